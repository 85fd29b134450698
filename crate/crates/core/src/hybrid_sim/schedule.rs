use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SimError;
use crate::lmi::PlantModel;
use crate::scalar::Real;

/// Rule for the next inter-sample time of a channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleMode {
    /// Always `T₂⁽ⁱ⁾`.
    ConstantT2,
    /// Uniform on `[T₁⁽ⁱ⁾, T₂⁽ⁱ⁾]`, reproducible from the seed.
    UniformRandom { seed: u64 },
    /// `T₁ + (T₂ − T₁)(1 + sin(2πft))/2` evaluated at the jump time `t`.
    Sinusoidal { frequency: f64 },
}

impl fmt::Display for ScheduleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ConstantT2 => write!(f, "constant"),
            Self::UniformRandom { seed } => write!(f, "uniform:{seed}"),
            Self::Sinusoidal { frequency } => write!(f, "sinusoidal:{frequency}"),
        }
    }
}

/// Parses `constant`, `uniform[:SEED]` (alias `random`) or
/// `sinusoidal:FREQ`.
impl FromStr for ScheduleMode {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let bad = |msg: String| SimError::Argument(format!("schedule `{s}`: {msg}"));
        match (name.to_ascii_lowercase().as_str(), arg) {
            ("constant" | "constant_t2", None) => Ok(Self::ConstantT2),
            ("uniform" | "random" | "uniform_random", None) => Ok(Self::UniformRandom { seed: 0 }),
            ("uniform" | "random" | "uniform_random", Some(a)) => a
                .parse()
                .map(|seed| Self::UniformRandom { seed })
                .map_err(|e| bad(format!("{e}"))),
            ("sinusoidal", Some(a)) => match a.parse::<f64>() {
                Ok(f) if f.is_finite() && f > 0.0 => Ok(Self::Sinusoidal { frequency: f }),
                _ => Err(bad("frequency must be a positive number".into())),
            },
            ("sinusoidal", None) => Err(bad("missing frequency".into())),
            _ => Err(bad("unknown mode".into())),
        }
    }
}

/// Produces timer reset values in `[T₁⁽ⁱ⁾, T₂⁽ⁱ⁾]`.
#[derive(Debug, Clone)]
pub struct SamplingSchedule<T> {
    mode: ScheduleMode,
    t1: Vec<T>,
    t2: Vec<T>,
    rng: ChaCha8Rng,
}

impl<T: Real> SamplingSchedule<T> {
    pub fn new(mode: ScheduleMode, t1: Vec<T>, t2: Vec<T>) -> Result<Self, SimError> {
        if t1.len() != t2.len() || t1.is_empty() {
            return Err(SimError::Argument("T1 and T2 must have equal nonzero length".into()));
        }
        if t1.iter().zip(&t2).any(|(&a, &b)| !(a > T::zero() && a <= b && b.is_finite())) {
            return Err(SimError::Argument("need 0 < T1 ≤ T2 < ∞ per channel".into()));
        }
        let seed = match mode {
            ScheduleMode::UniformRandom { seed } => seed,
            _ => 0,
        };
        Ok(Self {
            mode,
            t1,
            t2,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn for_plant(mode: ScheduleMode, plant: &PlantModel<T>) -> Result<Self, SimError> {
        Self::new(mode, plant.t1().to_vec(), plant.t2().to_vec())
    }

    pub fn mode(&self) -> ScheduleMode {
        self.mode
    }

    /// Reset value for channel `i` after a jump at time `t`.
    pub fn next(&mut self, i: usize, t: T) -> T {
        let (lo, hi) = (self.t1[i], self.t2[i]);
        let v = match self.mode {
            ScheduleMode::ConstantT2 => hi,
            ScheduleMode::UniformRandom { .. } => {
                let u: f64 = self.rng.random();
                lo + (hi - lo) * T::lit(u)
            }
            ScheduleMode::Sinusoidal { frequency } => {
                let phase = T::two() * T::PI() * T::lit(frequency) * t;
                lo + (hi - lo) * (T::one() + phase.sin()) / T::two()
            }
        };
        v.max(lo).min(hi)
    }
}

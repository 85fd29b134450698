use serde::{Deserialize, Serialize};

use super::{LmiError, PlantModel};
use crate::scalar::Real;
use crate::symmat::{Mat, SymMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Gain `K` given, `J` free.
    Analysis,
    /// `Y = KW` free, `J = 0`.
    Design,
}

/// Numeric values of all decision variables plus the fixed scalars `σ`, `α`.
#[derive(Debug, Clone, PartialEq)]
pub struct LmiVariables<T: Real> {
    pub w: SymMatrix<T>,
    /// `m×n`, design only.
    pub y: Mat<T>,
    pub r: Vec<SymMatrix<T>>,
    /// Diagonal of `S`.
    pub s: Vec<T>,
    pub z: Mat<T>,
    /// `m×n`, analysis only.
    pub j: Mat<T>,
    /// `ι = 1/μ̄`.
    pub iota: T,
    pub mw: SymMatrix<T>,
    pub sigma: Vec<T>,
    pub alpha: Option<T>,
}

impl<T: Real> LmiVariables<T> {
    pub fn zeros(n: usize, m: usize, dims: &[usize], sigma: Vec<T>, alpha: Option<T>) -> Self {
        Self {
            w: SymMatrix::zeros(n),
            y: Mat::zeros(m, n),
            r: dims.iter().map(|&d| SymMatrix::zeros(d)).collect(),
            s: vec![T::zero(); m],
            z: Mat::zeros(m, n),
            j: Mat::zeros(m, n),
            iota: T::zero(),
            mw: SymMatrix::zeros(n),
            sigma,
            alpha,
        }
    }

    /// `R̂ = ⊕ Rᵢ`.
    pub fn r_hat(&self) -> SymMatrix<T> {
        SymMatrix::direct_sum(&self.r).expect("nonempty R blocks")
    }

    /// `⊕ ψᵢ Rᵢ` for per-channel weights `ψ`.
    pub fn r_weighted(&self, psi: &[T]) -> SymMatrix<T> {
        let blocks: Vec<SymMatrix<T>> = self.r.iter().zip(psi).map(|(r, &p)| r.scale(p)).collect();
        SymMatrix::direct_sum(&blocks).expect("nonempty R blocks")
    }

    pub fn s_matrix(&self) -> Mat<T> {
        Mat::from_diag(&self.s)
    }

    pub fn mu_bar(&self) -> T {
        T::one() / self.iota
    }
}

/// Position of every decision-variable entry in the flat vector `y` seen by
/// the SDP solver. Symmetric matrices contribute their upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct VarLayout<T: Real> {
    mode: Mode,
    n: usize,
    m: usize,
    dims: Vec<usize>,
    sigma: Vec<T>,
    alpha: Option<T>,
    w: usize,
    y: Option<usize>,
    r: Vec<usize>,
    s: usize,
    z: usize,
    j: Option<usize>,
    iota: usize,
    mw: usize,
    nvars: usize,
}

fn tri(n: usize) -> usize {
    n * (n + 1) / 2
}

impl<T: Real> VarLayout<T> {
    /// Layout for `plant` with fixed `σ` (and `α` in design mode).
    pub fn new(plant: &PlantModel<T>, mode: Mode, sigma: Vec<T>, alpha: Option<T>) -> Result<Self, LmiError> {
        let (n, m) = (plant.n(), plant.m());
        let dims = plant.partition().dims().to_vec();
        if sigma.len() != dims.len() {
            return Err(LmiError::Argument(format!(
                "sigma has {} entries for {} channels",
                sigma.len(),
                dims.len()
            )));
        }
        if sigma.iter().any(|&s| !(s > T::zero())) {
            return Err(LmiError::Argument("sigma entries must be positive".into()));
        }
        match (mode, alpha) {
            (Mode::Design, Some(a)) if a > T::zero() => {}
            (Mode::Design, _) => return Err(LmiError::Argument("design mode needs alpha > 0".into())),
            (Mode::Analysis, _) => {}
        }
        let mut at = 0;
        let mut take = |len: usize| {
            let o = at;
            at += len;
            o
        };
        let w = take(tri(n));
        let y = (mode == Mode::Design).then(|| take(m * n));
        let r = dims.iter().map(|&d| take(tri(d))).collect();
        let s = take(m);
        let z = take(m * n);
        let j = (mode == Mode::Analysis).then(|| take(m * n));
        let iota = take(1);
        let mw = take(tri(n));
        Ok(Self {
            mode,
            n,
            m,
            dims,
            sigma,
            alpha: if mode == Mode::Design { alpha } else { None },
            w,
            y,
            r,
            s,
            z,
            j,
            iota,
            mw,
            nvars: at,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn sigma(&self) -> &[T] {
        &self.sigma
    }

    pub fn alpha(&self) -> Option<T> {
        self.alpha
    }

    pub fn iota_index(&self) -> usize {
        self.iota
    }

    /// Flat indices of the upper triangle of `M_W`, row-major.
    pub fn mw_indices(&self) -> Vec<(usize, usize, usize)> {
        tri_indices(self.n, self.mw)
    }

    /// Flat indices of the upper triangle of `R_i`, row-major.
    pub fn r_indices(&self, i: usize) -> Vec<(usize, usize, usize)> {
        tri_indices(self.dims[i], self.r[i])
    }

    pub fn s_indices(&self) -> std::ops::Range<usize> {
        self.s..self.s + self.m
    }

    pub fn w_indices(&self) -> Vec<(usize, usize, usize)> {
        tri_indices(self.n, self.w)
    }

    pub fn unpack(&self, y: &[T]) -> LmiVariables<T> {
        assert_eq!(y.len(), self.nvars, "decision vector length");
        let (n, m) = (self.n, self.m);
        let sym = |n: usize, off: usize| {
            let mut a = Mat::zeros(n, n);
            for (i, j, k) in tri_indices(n, off) {
                a[(i, j)] = y[k];
                a[(j, i)] = y[k];
            }
            SymMatrix::symmetrize(&a)
        };
        let rect = |off: Option<usize>| match off {
            Some(o) => Mat::from_vec(m, n, y[o..o + m * n].to_vec()).expect("sized"),
            None => Mat::zeros(m, n),
        };
        LmiVariables {
            w: sym(n, self.w),
            y: rect(self.y),
            r: self.dims.iter().zip(&self.r).map(|(&d, &o)| sym(d, o)).collect(),
            s: y[self.s..self.s + m].to_vec(),
            z: rect(Some(self.z)),
            j: rect(self.j),
            iota: y[self.iota],
            mw: sym(n, self.mw),
            sigma: self.sigma.clone(),
            alpha: self.alpha,
        }
    }

    pub fn pack(&self, v: &LmiVariables<T>) -> Vec<T> {
        let mut y = vec![T::zero(); self.nvars];
        let put_sym = |m: &SymMatrix<T>, off: usize, y: &mut Vec<T>| {
            for (i, j, k) in tri_indices(m.dim(), off) {
                y[k] = m[(i, j)];
            }
        };
        put_sym(&v.w, self.w, &mut y);
        put_sym(&v.mw, self.mw, &mut y);
        for (r, &o) in v.r.iter().zip(&self.r) {
            put_sym(r, o, &mut y);
        }
        let mn = self.m * self.n;
        if let Some(o) = self.y {
            y[o..o + mn].copy_from_slice(v.y.as_slice());
        }
        if let Some(o) = self.j {
            y[o..o + mn].copy_from_slice(v.j.as_slice());
        }
        y[self.z..self.z + mn].copy_from_slice(v.z.as_slice());
        y[self.s..self.s + self.m].copy_from_slice(&v.s);
        y[self.iota] = v.iota;
        y
    }
}

fn tri_indices(n: usize, off: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::with_capacity(tri(n));
    let mut k = off;
    for i in 0..n {
        for j in i..n {
            out.push((i, j, k));
            k += 1;
        }
    }
    out
}

impl<T: Real> VarLayout<T> {
    pub fn z_indices(&self) -> std::ops::Range<usize> {
        self.z..self.z + self.m * self.n
    }

    pub fn j_indices(&self) -> Option<std::ops::Range<usize>> {
        self.j.map(|o| o..o + self.m * self.n)
    }

    pub fn y_indices(&self) -> Option<std::ops::Range<usize>> {
        self.y.map(|o| o..o + self.m * self.n)
    }
}

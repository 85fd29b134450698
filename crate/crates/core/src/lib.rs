//! Stability certificates and gain synthesis for linear plants with
//! saturated inputs and asynchronous, aperiodic multi-rate sampling.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, which is what the solver tolerances are
//! tuned for.

pub mod certify;
pub mod hybrid_sim;
pub mod lmi;
pub mod scalar;
pub mod sdp;
pub mod symmat;
pub mod tolerances;

pub use scalar::Real;

pub type Matrix = symmat::Mat<f64>;
pub type SymMatrix = symmat::SymMatrix<f64>;
pub type Plant = lmi::PlantModel<f64>;
pub type Certificate = certify::StabilityCertificate<f64>;
pub type Basin = certify::BasinEstimate<f64>;
pub type Decay = certify::DecayCertificate<f64>;
pub type Settings = certify::Settings<f64>;
pub type Problem = sdp::SdpProblem<f64>;
pub type Solution = sdp::SdpSolution<f64>;
pub type State = hybrid_sim::HybridState<f64>;
pub type Trajectory = hybrid_sim::HybridTrajectory<f64>;
pub type Schedule = hybrid_sim::SamplingSchedule<f64>;

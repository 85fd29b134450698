//! Matrix inequalities for saturated sampled-data state feedback.
//!
//! Every inequality has a numeric builder, which assembles the matrix for
//! concrete decision-variable values, and a `build_*` wrapper that flattens
//! it into an [`LmiConstraint`](crate::sdp::LmiConstraint) over the scalar
//! decision vector described by a [`VarLayout`]. Because each builder is
//! affine in the decision variables, flattening is done by evaluation at the
//! origin and at the unit vectors, so the matrices handed to the solver and
//! the matrices used for verification come from the same code.

mod blocks;
mod plant;
mod vars;
mod vertices;

pub use blocks::{
    analysis_matrix, assemble_objective, build_analysis_lmi, build_design_lmi, build_inclusion_lmi,
    build_mw_link, build_positivity, design_matrix, inclusion_matrix, mw_link_matrix, theta,
    Weights,
};
pub use plant::PlantModel;
pub use vars::{LmiVariables, Mode, VarLayout};
pub use vertices::{enumerate_vertices, Vertex, VertexSet};

use thiserror::Error;

use crate::sdp::SdpError;
use crate::symmat::MatrixError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LmiError {
    #[error("invalid {field}: {msg}")]
    Validation { field: &'static str, msg: String },
    #[error("{0}")]
    Argument(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
}

pub(crate) fn invalid(field: &'static str, msg: impl Into<String>) -> LmiError {
    LmiError::Validation {
        field,
        msg: msg.into(),
    }
}

#[cfg(test)]
mod tests;

//! JSON certificate document.
//!
//! All matrices are stored row-major as arrays of rows. See
//! `docs/certificate-schema.md` for the field reference.

use serde::{Deserialize, Serialize};

use super::{BasinEstimate, CertifyError, GridRecord, SolverStats, StabilityCertificate};
use crate::lmi::Mode;
use crate::scalar::Real;
use crate::symmat::{Mat, SymMatrix};

pub const SCHEMA_VERSION: u32 = 1;

type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinDoc {
    pub p_hat_star: Rows,
    pub n: Rows,
    pub mu_bar: f64,
    pub volume_proxy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateDocument {
    pub schema_version: u32,
    pub mode: Mode,
    pub k: Rows,
    pub w: Rows,
    pub r: Vec<Rows>,
    pub s: Vec<f64>,
    pub z: Rows,
    pub j: Rows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mw: Option<Rows>,
    pub sigma: Vec<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    pub mu_bar: f64,
    #[serde(default)]
    pub solver: Option<SolverStats>,
    #[serde(default)]
    pub basin: Option<BasinDoc>,
    #[serde(default)]
    pub grid_log: Vec<GridRecord>,
}

fn rows<T: Real>(m: &Mat<T>) -> Rows {
    m.to_rows()
        .into_iter()
        .map(|r| r.into_iter().map(Real::to_f64_lossy).collect())
        .collect()
}

fn mat<T: Real>(r: &Rows, what: &str) -> Result<Mat<T>, CertifyError> {
    let conv: Vec<Vec<T>> = r.iter().map(|row| row.iter().map(|&v| T::lit(v)).collect()).collect();
    Mat::from_rows(&conv).map_err(|e| CertifyError::Argument(format!("{what}: {e}")))
}

fn sym<T: Real>(r: &Rows, what: &str) -> Result<SymMatrix<T>, CertifyError> {
    SymMatrix::new(mat(r, what)?).map_err(|e| CertifyError::Argument(format!("{what}: {e}")))
}

impl CertificateDocument {
    pub fn new<T: Real>(
        cert: &StabilityCertificate<T>,
        basin: Option<&BasinEstimate<T>>,
        grid_log: Vec<GridRecord>,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            mode: cert.mode,
            k: rows(&cert.k),
            w: rows(cert.w.as_mat()),
            r: cert.r.iter().map(|r| rows(r.as_mat())).collect(),
            s: cert.s.iter().map(|v| v.to_f64_lossy()).collect(),
            z: rows(&cert.z),
            j: rows(&cert.j),
            y: cert.y.as_ref().map(rows),
            mw: cert.mw.as_ref().map(|m| rows(m.as_mat())),
            sigma: cert.sigma.iter().map(|v| v.to_f64_lossy()).collect(),
            alpha: cert.alpha.map(Real::to_f64_lossy),
            mu_bar: cert.mu_bar.to_f64_lossy(),
            solver: cert.solver,
            basin: basin.map(|b| BasinDoc {
                p_hat_star: rows(b.p_hat_star.as_mat()),
                n: rows(b.n.as_mat()),
                mu_bar: b.mu_bar.to_f64_lossy(),
                volume_proxy: b.volume_proxy.to_f64_lossy(),
            }),
            grid_log,
        }
    }

    pub fn certificate<T: Real>(&self) -> Result<StabilityCertificate<T>, CertifyError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CertifyError::Argument(format!(
                "unsupported schema version {}",
                self.schema_version
            )));
        }
        Ok(StabilityCertificate {
            mode: self.mode,
            k: mat(&self.k, "k")?,
            w: sym(&self.w, "w")?,
            r: self
                .r
                .iter()
                .enumerate()
                .map(|(i, r)| sym(r, &format!("r[{i}]")))
                .collect::<Result<_, _>>()?,
            s: self.s.iter().map(|&v| T::lit(v)).collect(),
            z: mat(&self.z, "z")?,
            j: mat(&self.j, "j")?,
            y: self.y.as_ref().map(|y| mat(y, "y")).transpose()?,
            mw: self.mw.as_ref().map(|m| sym(m, "mw")).transpose()?,
            sigma: self.sigma.iter().map(|&v| T::lit(v)).collect(),
            alpha: self.alpha.map(T::lit),
            mu_bar: T::lit(self.mu_bar),
            solver: self.solver,
        })
    }
}

//! The four subcommands.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use satstab_core::certify::{
    self, basin_sets, build_problem, verify_certificate, CertificateDocument, GridRecord, Settings,
    StabilityCertificate, VerificationReport,
};
use satstab_core::hybrid_sim::{
    monitor, simulate, HybridTrajectory, SamplingSchedule, ScheduleMode, SimOptions, SimStatus, Violation,
    ViolationKind,
};
use satstab_core::sdp::write_triplets;
use satstab_core::symmat::Mat;
use serde::{Deserialize, Serialize};

use crate::error::Failure;
use crate::output::{render_plot, write_trajectory_csv};
use crate::problem::ProblemFile;

pub const CERTIFICATE_FILE: &str = "certificate.json";
pub const GRID_LOG_FILE: &str = "grid_log.json";
pub const ANALYSIS_FILE: &str = "analysis.json";
pub const ANALYSIS_LOG_FILE: &str = "analysis_grid_log.json";
pub const VERIFICATION_FILE: &str = "verification.json";
pub const MONITOR_FILE: &str = "monitor.json";
pub const PLOT_FILE: &str = "trajectories.svg";
pub const SDP_FILE: &str = "sdp_triplets.txt";

/// A gain given either as a full certificate or as `{"k": [[...]]}`.
pub enum GainSource {
    Certificate(Box<StabilityCertificate<f64>>),
    Gain(Mat<f64>),
}

impl GainSource {
    pub fn gain(&self) -> &Mat<f64> {
        match self {
            Self::Certificate(c) => &c.k,
            Self::Gain(k) => k,
        }
    }

    pub fn certificate(&self) -> Option<&StabilityCertificate<f64>> {
        match self {
            Self::Certificate(c) => Some(c),
            Self::Gain(_) => None,
        }
    }
}

#[derive(Deserialize)]
struct BareGain {
    k: Vec<Vec<f64>>,
}

pub fn read_certificate(path: &Path) -> Result<StabilityCertificate<f64>> {
    match read_gain(path)? {
        GainSource::Certificate(c) => Ok(*c),
        GainSource::Gain(_) => Err(Failure::Validation(format!("{} holds a bare gain, not a certificate", path.display())).into()),
    }
}

pub fn read_gain(path: &Path) -> Result<GainSource> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Validation(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Failure::Validation(format!("{}: line {}: {e}", path.display(), e.line())))?;
    if value.get("schema_version").is_some() {
        let doc: CertificateDocument = serde_json::from_value(value)
            .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
        let cert = doc
            .certificate::<f64>()
            .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
        return Ok(GainSource::Certificate(Box::new(cert)));
    }
    let bare: BareGain =
        serde_json::from_value(value).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    let k = Mat::from_rows(&bare.k).map_err(|e| Failure::Validation(format!("{}: k: {e}", path.display())))?;
    Ok(GainSource::Gain(k))
}

fn check_gain(problem: &ProblemFile, k: &Mat<f64>) -> Result<()> {
    let want = (problem.plant.m(), problem.plant.n());
    if k.shape() != want {
        return Err(Failure::Validation(format!("gain is {:?}, plant needs {want:?}", k.shape())).into());
    }
    Ok(())
}

fn check_certificate(problem: &ProblemFile, cert: &StabilityCertificate<f64>) -> Result<()> {
    check_gain(problem, &cert.k)?;
    let p = &problem.plant;
    let dims_ok = cert.w.dim() == p.n()
        && cert.r.len() == p.q()
        && cert.r.iter().zip(p.partition().dims()).all(|(r, &d)| r.dim() == d)
        && cert.s.len() == p.m()
        && cert.sigma.len() == p.q();
    if !dims_ok {
        return Err(Failure::Validation("certificate dimensions do not match the plant".into()).into());
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthesisSummary {
    pub certificate: PathBuf,
    pub grid_log: PathBuf,
    pub k: Vec<Vec<f64>>,
    pub sigma: Vec<f64>,
    pub alpha: Option<f64>,
    pub mu_bar: f64,
}

/// Design search over the problem grid; writes the certificate and the grid
/// log, plus the selected point's SDP when `dump_sdp` is set.
pub fn run_synthesize(problem: &ProblemFile, out: &Path, dump_sdp: bool) -> Result<SynthesisSummary> {
    let settings = Settings::default();
    let res = certify::synthesize(&problem.plant, &problem.grid, problem.weights, &settings)?;
    ensure_dir(out)?;
    let cert = &res.certificate;
    let doc = CertificateDocument::new(cert, Some(&res.basin), res.log.clone());
    let cert_path = out.join(CERTIFICATE_FILE);
    let log_path = out.join(GRID_LOG_FILE);
    write_json(&cert_path, &doc)?;
    write_json(&log_path, &res.log)?;
    if dump_sdp {
        let (_, sdp) = build_problem(&problem.plant, None, &cert.sigma, cert.alpha, problem.weights, &settings)?;
        let path = out.join(SDP_FILE);
        let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        write_triplets(&sdp, BufWriter::new(file))?;
    }
    Ok(SynthesisSummary {
        certificate: cert_path,
        grid_log: log_path,
        k: doc.k,
        sigma: doc.sigma,
        alpha: doc.alpha,
        mu_bar: doc.mu_bar,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisSummary {
    pub certificate: PathBuf,
    pub sigma: Vec<f64>,
    pub mu_bar: f64,
    pub log: Vec<GridRecord>,
}

/// Analysis of a fixed gain over the problem's `σ` grid.
pub fn run_analyze(problem: &ProblemFile, gain: &Mat<f64>, out: &Path) -> Result<AnalysisSummary> {
    check_gain(problem, gain)?;
    let settings = Settings::default();
    let res = certify::analyze(&problem.plant, gain, &problem.grid, problem.weights, &settings)?;
    ensure_dir(out)?;
    let doc = CertificateDocument::new(&res.certificate, Some(&res.basin), res.log.clone());
    let path = out.join(ANALYSIS_FILE);
    write_json(&path, &doc)?;
    write_json(&out.join(ANALYSIS_LOG_FILE), &res.log)?;
    Ok(AnalysisSummary {
        certificate: path,
        sigma: doc.sigma,
        mu_bar: doc.mu_bar,
        log: res.log,
    })
}

/// Eigenvalue report for every block of the certificate's conditions.
pub fn run_verify(problem: &ProblemFile, cert: &StabilityCertificate<f64>, tol: f64) -> Result<VerificationReport> {
    check_certificate(problem, cert)?;
    if !(tol > 0.0) {
        return Err(Failure::Validation("tolerance must be positive".into()).into());
    }
    Ok(verify_certificate(&problem.plant, cert, tol))
}

pub fn verification_text(report: &VerificationReport) -> String {
    let mut s = String::new();
    for c in &report.checks {
        s.push_str(&format!(
            "{:<28} {:<22} {:>14.6e}  {}\n",
            c.name,
            format!("{:?}", c.kind),
            c.value,
            if c.passed { "ok" } else { "FAIL" }
        ));
    }
    s.push_str(&format!(
        "{} at tol {:e}\n",
        if report.passed { "verified" } else { "NOT verified" },
        report.tol
    ));
    s
}

/// Cap on the violations listed per trajectory in the monitor file.
const LISTED_VIOLATIONS: usize = 50;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub index: usize,
    pub csv: PathBuf,
    pub x0: Vec<f64>,
    pub status: SimStatus,
    pub jumps: usize,
    pub t_end: f64,
    pub final_xp_norm: f64,
    /// First time with `|x_p| ≤ 1e-3`.
    pub entry_time: Option<f64>,
    pub in_region_start: Option<bool>,
    pub jump_violations: usize,
    pub flow_violations: usize,
    pub envelope_violations: usize,
    pub dwell_violations: usize,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub schedule: String,
    pub horizon: f64,
    pub monitored: bool,
    pub runs: Vec<RunSummary>,
    pub plot: Option<PathBuf>,
}

pub struct SimulateArgs {
    pub schedule: ScheduleMode,
    pub horizon: f64,
    pub out: PathBuf,
    pub plot: bool,
}

/// Simulates every initial condition of the problem file; one CSV per run,
/// a monitor summary, and optionally a plot.
pub fn run_simulate(problem: &ProblemFile, source: &GainSource, args: &SimulateArgs) -> Result<SimulationSummary> {
    let k = source.gain();
    check_gain(problem, k)?;
    let cert = source.certificate();
    if let Some(c) = cert {
        check_certificate(problem, c)?;
    }
    if problem.initial_conditions.is_empty() {
        return Err(Failure::Validation("simulation.initial_conditions is empty".into()).into());
    }
    let plant = &problem.plant;
    let opts = SimOptions {
        t_max: args.horizon,
        h_max: problem.h_max,
        ..SimOptions::default()
    };
    ensure_dir(&args.out)?;
    let mut runs = Vec::new();
    let mut trajectories: Vec<HybridTrajectory<f64>> = Vec::new();
    for (idx, x0) in problem.initial_conditions.iter().enumerate() {
        let mut schedule = SamplingSchedule::for_plant(args.schedule, plant)
            .map_err(|e| Failure::Validation(e.to_string()))?;
        let traj = simulate(x0, plant, k, &mut schedule, &opts, cert)
            .map_err(|e| Failure::Validation(format!("initial condition {idx}: {e}")))?;
        let csv_path = args.out.join(format!("trajectory_{idx}.csv"));
        let file = fs::File::create(&csv_path).with_context(|| format!("creating {}", csv_path.display()))?;
        write_trajectory_csv(&traj, BufWriter::new(file))?;
        let report = cert.map(|c| monitor(&traj, plant, c)).transpose()?;
        let count = |kind| report.as_ref().map_or(0, |r| r.count(kind));
        let last = traj.last();
        runs.push(RunSummary {
            index: idx,
            csv: csv_path,
            x0: x0.xbar().into_iter().chain(x0.tau.iter().copied()).collect(),
            status: traj.status,
            jumps: traj.jumps(),
            t_end: last.t,
            final_xp_norm: last.state.xp.iter().map(|v| v * v).sum::<f64>().sqrt(),
            entry_time: traj.first_entry(1e-3),
            in_region_start: report.as_ref().map(|r| r.in_region_start),
            jump_violations: count(ViolationKind::JumpIncrease),
            flow_violations: count(ViolationKind::FlowDecay),
            envelope_violations: count(ViolationKind::Envelope),
            dwell_violations: count(ViolationKind::DwellTime),
            violations: report
                .map(|r| r.violations.into_iter().take(LISTED_VIOLATIONS).collect())
                .unwrap_or_default(),
        });
        trajectories.push(traj);
    }
    let plot = if args.plot {
        let basin = cert.map(|c| basin_sets(plant, c)).transpose()?;
        let svg = render_plot(&trajectories, basin.as_ref(), plant.n(), plant.ubar()).map_err(Failure::Validation)?;
        let path = args.out.join(PLOT_FILE);
        fs::write(&path, svg).with_context(|| format!("writing {}", path.display()))?;
        Some(path)
    } else {
        None
    };
    let summary = SimulationSummary {
        schedule: args.schedule.to_string(),
        horizon: args.horizon,
        monitored: cert.is_some(),
        runs,
        plot,
    };
    write_json(&args.out.join(MONITOR_FILE), &summary)?;
    Ok(summary)
}

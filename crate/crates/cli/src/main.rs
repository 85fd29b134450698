use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use satstab_cli::commands::{
    self, read_certificate, read_gain, verification_text, SimulateArgs, VERIFICATION_FILE,
};
use satstab_cli::error::{ErrorRecord, Failure};
use satstab_cli::load_problem;
use satstab_core::hybrid_sim::ScheduleMode;
use satstab_core::tolerances::VERIFY_TOL;

/// Gain synthesis and stability certificates for saturated plants under
/// asynchronous sampling.
#[derive(Parser)]
#[command(name = "satstab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design a gain over the problem's (sigma, alpha) grid.
    Synthesize {
        #[arg(short, long)]
        problem: PathBuf,
        /// Output directory (defaults to the problem's).
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Also write the selected grid point's SDP in triplet form.
        #[arg(long)]
        dump_sdp: bool,
    },
    /// Refine the basin estimate for a fixed gain.
    Analyze {
        #[arg(short, long)]
        problem: PathBuf,
        /// Certificate or `{"k": ...}` file holding the gain.
        #[arg(short = 'K', long = "gain")]
        gain: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Check every matrix inequality of a certificate.
    Verify {
        #[arg(short, long)]
        certificate: PathBuf,
        #[arg(short, long)]
        problem: PathBuf,
        #[arg(long, default_value_t = VERIFY_TOL)]
        tol: f64,
        /// Where to write the JSON report (defaults to the output directory).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Simulate the closed loop from the problem's initial conditions.
    Simulate {
        /// Certificate (enables monitoring) or bare gain file.
        #[arg(short, long)]
        certificate: PathBuf,
        #[arg(short, long)]
        problem: PathBuf,
        /// constant | uniform[:SEED] | sinusoidal:FREQ
        #[arg(long)]
        schedule: Option<String>,
        /// Seed for the uniform schedule.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_plot: bool,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synthesize { problem, out, dump_sdp } => {
            let p = load_problem(&problem)?;
            let out = out.unwrap_or_else(|| p.output_dir.clone());
            let s = commands::run_synthesize(&p, &out, dump_sdp)?;
            println!("K = {:?}", s.k);
            println!("sigma = {:?}, alpha = {:?}, mu_bar = {:.6}", s.sigma, s.alpha, s.mu_bar);
            println!("wrote {} and {}", s.certificate.display(), s.grid_log.display());
        }
        Command::Analyze { problem, gain, out } => {
            let p = load_problem(&problem)?;
            let g = read_gain(&gain)?;
            let out = out.unwrap_or_else(|| p.output_dir.clone());
            let s = commands::run_analyze(&p, g.gain(), &out)?;
            println!("sigma = {:?}, mu_bar = {:.6}", s.sigma, s.mu_bar);
            println!("wrote {}", s.certificate.display());
        }
        Command::Verify { certificate, problem, tol, report } => {
            let p = load_problem(&problem)?;
            let cert = read_certificate(&certificate)?;
            let r = commands::run_verify(&p, &cert, tol)?;
            print!("{}", verification_text(&r));
            let path = report.unwrap_or_else(|| p.output_dir.join(VERIFICATION_FILE));
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(&path, serde_json::to_string_pretty(&r)? + "\n")?;
            if !r.passed {
                return Err(Failure::Infeasible(format!("failing blocks: {}", r.failures().join(", "))).into());
            }
        }
        Command::Simulate { certificate, problem, schedule, seed, horizon, out, no_plot } => {
            let p = load_problem(&problem)?;
            let source = read_gain(&certificate)?;
            let mut mode = match schedule {
                Some(s) => s.parse::<ScheduleMode>().map_err(|e| Failure::Validation(e.to_string()))?,
                None => p.schedule,
            };
            if let (ScheduleMode::UniformRandom { .. }, Some(seed)) = (mode, seed) {
                mode = ScheduleMode::UniformRandom { seed };
            }
            let args = SimulateArgs {
                schedule: mode,
                horizon: horizon.unwrap_or(p.horizon),
                out: out.unwrap_or_else(|| p.output_dir.clone()),
                plot: p.plot && !no_plot,
            };
            let s = commands::run_simulate(&p, &source, &args)?;
            for r in &s.runs {
                println!(
                    "run {}: {:?}, {} jumps, |xp(T)| = {:.3e}, violations jump/flow/envelope/dwell = {}/{}/{}/{}",
                    r.index,
                    r.status,
                    r.jumps,
                    r.final_xp_norm,
                    r.jump_violations,
                    r.flow_violations,
                    r.envelope_violations,
                    r.dwell_violations
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let record = ErrorRecord::new(&err);
            eprintln!("error: {err:#}");
            eprintln!("{}", serde_json::to_string(&record).unwrap_or_default());
            ExitCode::from(record.exit_code as u8)
        }
    }
}

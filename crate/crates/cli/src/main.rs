//! `rdid`: command-line front end for closed-loop runs, sweeps and the
//! steady-state and certificate diagnostics.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rdid::error::{Error, Result};
use rdid::harness::{
    equilibrium_convergence, run_sweep, trajectory_convergence, Execution, STUDY_REFERENCE,
    STUDY_RESOLUTIONS,
};
use rdid::output::{emit_convergence, emit_sweep, fmt_f64};
use rdid::{
    analysis, emit_outputs, equilibrium, g_lambda_inverse, load_config, run_single, Grid,
    RunConfig, SystemParams,
};

/// Trajectory study: dt = ratio · h², compared at this time.
const TRAJECTORY_RATIO: f64 = 0.4;
const TRAJECTORY_T_END: f64 = 0.1;

#[derive(Parser)]
#[command(name = "rdid", version, about = "Adaptive setpoint regulation and identification of a reaction-diffusion plant")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Skip SVG plots.
    #[arg(long, global = true)]
    no_plots: bool,
    /// Only errors on stderr, nothing on stdout.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run one closed-loop simulation.
    Simulate { config: PathBuf },
    /// Independent runs along one parameter axis.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Vec<f64>,
    },
    /// Analytic equilibrium profile and integrator value.
    Equilibrium {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        k: f64,
        #[arg(long)]
        yr: f64,
        /// Grid nodes for the profile written with --out.
        #[arg(long, default_value_t = 201)]
        n: usize,
    },
    /// Solve g_λ(k) = value for k.
    InvertG {
        #[arg(long)]
        lambda: f64,
        #[arg(long, allow_hyphen_values = true)]
        value: f64,
    },
    /// Lyapunov certificate and spectral abscissa at the true k.
    Certificate { config: PathBuf },
    /// Equilibrium and trajectory convergence orders.
    Convergence { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("rdid: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load(path: &Path, common: &Common) -> Result<RunConfig> {
    let mut cfg = load_config(path)?;
    if let Some(out) = &common.out {
        cfg.out_dir = out.clone();
    }
    if common.no_plots {
        cfg.plots = false;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let common = &cli.common;
    let say = |s: String| {
        if !common.quiet {
            println!("{s}");
        }
    };
    match &cli.command {
        Command::Simulate { config } => {
            let cfg = load(config, common)?;
            let result = run_single(&cfg)?;
            emit_outputs(&result, &cfg)?;
            let last = result.final_sample();
            say(format!(
                "t = {}  y = {}  chi = {}  k_hat = {}",
                last.t,
                last.y,
                last.chi,
                last.k_hat.map_or("-".into(), |k| k.to_string())
            ));
            say(format!(
                "certificate valid = {} (epsilon = {})",
                result.certificate.valid, result.certificate.epsilon
            ));
            say(format!("outputs in {}", cfg.out_dir.display()));
            if let Some(alarm) = &result.alarm {
                eprintln!("rdid: numerical alarm: {alarm}");
                return Ok(ExitCode::from(2));
            }
        }
        Command::Sweep { config, axis, values } => {
            let cfg = load(config, common)?;
            if values.is_empty() {
                return Err(Error::Validation {
                    what: "values".into(),
                    reason: "at least one value is required".into(),
                });
            }
            let cells = run_sweep(&cfg, axis, values)?;
            emit_sweep(&cells, &cfg, axis)?;
            let mut failed = 0;
            for cell in &cells {
                match &cell.result {
                    Ok(r) => {
                        let last = r.final_sample();
                        say(format!(
                            "{axis} = {}: y = {}  k_hat = {}",
                            cell.value,
                            last.y,
                            last.k_hat.map_or("-".into(), |k| k.to_string())
                        ));
                    }
                    Err(e) => {
                        failed += 1;
                        eprintln!("rdid: {axis} = {}: {e}", cell.value);
                    }
                }
            }
            say(format!("summary in {}", cfg.out_dir.join("sweep.csv").display()));
            if failed > 0 {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Equilibrium { lambda, k, yr, n } => {
            let params = SystemParams {
                lambda: *lambda,
                k_true: *k,
                y_r: *yr,
                ..SystemParams::reference()
            };
            let grid = Grid::new(*n)?;
            let eq = equilibrium(*k, &params, &grid)?;
            say(format!("chi_bar = {}", fmt_f64(eq.chi_bar)));
            say(format!("u_bar(0) = {}", fmt_f64(eq.u_bar[0])));
            say(format!("u_bar(1) = {}", fmt_f64(*eq.u_bar.last().unwrap())));
            if let Some(dir) = &common.out {
                std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
                let mut csv = String::from("x,u_bar\n");
                for (x, u) in grid.nodes().iter().zip(eq.u_bar.iter()) {
                    csv.push_str(&format!("{},{}\n", fmt_f64(*x), fmt_f64(*u)));
                }
                let path = dir.join("equilibrium.csv");
                std::fs::write(&path, csv).map_err(|e| io_error(&path, e))?;
            }
        }
        Command::InvertG { lambda, value } => {
            let k = g_lambda_inverse(*value, *lambda)?;
            say(fmt_f64(k));
        }
        Command::Certificate { config } => {
            let cfg = load(config, common)?;
            let c = match cfg.epsilon {
                Some(e) => analysis::certificate_at(e, cfg.params.k_true, &cfg.params),
                None => analysis::find_epsilon_star(&cfg.params, cfg.params.k_true),
            };
            let abscissa = analysis::spectral_abscissa(&cfg.params, &cfg.grid()?)?;
            say(format!("valid = {}", c.valid));
            say(format!("epsilon = {}", fmt_f64(c.epsilon)));
            say(format!("epsilon_star = {}", fmt_f64(c.epsilon_star)));
            say(format!("lambda_max(Psi) = {}", fmt_f64(c.psi_max_eig)));
            say(format!("lambda_max(Psi(2 eps)) = {}", fmt_f64(c.dissipation_max_eig)));
            say(format!("lambda_min(Q) = {}", fmt_f64(c.q_min_eig)));
            say(format!("spectral abscissa (n = {}) = {}", cfg.n, fmt_f64(abscissa)));
        }
        Command::Convergence { config } => {
            let cfg = load(config, common)?;
            let eq = equilibrium_convergence(&cfg, &STUDY_RESOLUTIONS)?;
            let traj = trajectory_convergence(
                &cfg,
                &STUDY_RESOLUTIONS,
                STUDY_REFERENCE,
                TRAJECTORY_RATIO,
                TRAJECTORY_T_END,
                Execution::default(),
            )?;
            for (name, study) in [("equilibrium", &eq), ("trajectory", &traj)] {
                for r in &study.rows {
                    say(format!("{name}: n = {:4}  error = {}", r.n, fmt_f64(r.error)));
                }
                say(format!("{name}: observed order = {:.4}", study.order));
            }
            let path = emit_convergence(&cfg.out_dir, &[("equilibrium", &eq), ("trajectory", &traj)])?;
            say(format!("table in {}", path.display()));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

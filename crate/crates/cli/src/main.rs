use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use invasionlab::commands::{self, Ctx};
use invasionlab::{CliError, CliResult};

/// Simulation and analysis of pushed fronts in the FitzHugh–Nagumo system.
#[derive(Parser, Debug)]
#[command(name = "invasionlab", version)]
struct Cli {
    /// JSON configuration (simulate, dispersion, eikonal).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; defaults to $INVASIONLAB_OUT/<name>.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for concurrent eigen-solves.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the noise seed of the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Integrate a configured run.
    Simulate,
    /// Front, wake, spectral and phase-defect analysis of a run.
    Analyze { run: PathBuf },
    /// Converged wave train of a run's wake.
    Wavetrain { run: PathBuf },
    /// Comoving front profile, speed and tail rate of a run.
    Front { run: PathBuf },
    /// Linear spreading speed from the pinched double root.
    Dispersion,
    /// Bloch spectrum and group velocity of a stored wave train.
    Spectrum {
        /// wavetrain.json written by the wavetrain subcommand.
        #[arg(long)]
        wavetrain: PathBuf,
        #[arg(long, default_value_t = 64)]
        n_k: usize,
        /// front.json written by the front subcommand, for the point spectrum.
        #[arg(long)]
        front: Option<PathBuf>,
    },
    /// Integrate the eikonal phase equation and fit an erf profile.
    Eikonal,
    /// Validate a run and render its heatmap and a markdown report.
    Report {
        run: PathBuf,
        /// Output directory of an earlier analyze call.
        #[arg(long)]
        analysis: Option<PathBuf>,
    },
}

const DEFAULT_ROOT: &str = "invasionlab-out";

fn output_dir(cli: &Cli, name: &str) -> PathBuf {
    if let Some(o) = &cli.out {
        return o.clone();
    }
    let root = std::env::var_os("INVASIONLAB_OUT").map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_ROOT));
    root.join(name)
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into())
}

fn need_config(cli: &Cli) -> CliResult<PathBuf> {
    cli.config.clone().ok_or_else(|| CliError::config("--config", "this subcommand needs --config PATH"))
}

fn print<T: serde::Serialize>(v: &T) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::config("--threads", e))?;
    }
    let ctx = |name: String| Ctx { out: output_dir(cli, &name), seed: cli.seed };
    match &cli.cmd {
        Cmd::Simulate => {
            let cfg = need_config(cli)?;
            let out = commands::simulate(&cfg, &ctx(stem(&cfg)))?;
            eprintln!("wrote {} snapshots to {}", out.snapshots, out.dir.display());
        }
        Cmd::Analyze { run } => print(&commands::analyze(run, &ctx(format!("{}-analysis", stem(run))))?),
        Cmd::Wavetrain { run } => {
            let r = commands::wavetrain_cmd(run, &ctx(format!("{}-wavetrain", stem(run))))?;
            print(&serde_json::json!({
                "L": r.wavetrain.l, "k_wt": r.wavetrain.k_wt, "c": r.wavetrain.c, "eps_L": r.eps_l,
                "quadrature_sum": r.quadrature.sum(), "bound": r.bound, "within_bound": r.within_bound,
            }));
        }
        Cmd::Front { run } => {
            let fp = commands::front_cmd(run, &ctx(format!("{}-front", stem(run))))?;
            print(&serde_json::json!({
                "c_ps": fp.c_ps, "eta_ps": fp.eta_ps, "alignment_residual": fp.alignment_residual,
            }));
        }
        Cmd::Dispersion => {
            let cfg = need_config(cli)?;
            print(&commands::dispersion_cmd(&cfg, &ctx(format!("{}-dispersion", stem(&cfg))))?);
        }
        Cmd::Spectrum { wavetrain, n_k, front } => {
            let name = format!("{}-spectrum", wavetrain.parent().map(stem).unwrap_or_else(|| "wavetrain".into()));
            print(&commands::spectrum_cmd(wavetrain, *n_k, front.as_deref(), &ctx(name))?);
        }
        Cmd::Eikonal => {
            let cfg = need_config(cli)?;
            print(&commands::eikonal_cmd(&cfg, &ctx(format!("{}-eikonal", stem(&cfg))))?);
        }
        Cmd::Report { run, analysis } => {
            let p = commands::report_cmd(run, analysis.as_deref(), &ctx(format!("{}-report", stem(run))))?;
            eprintln!("wrote {}", p.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

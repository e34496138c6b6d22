use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use confsob::commands::{cmd_minimize, cmd_movespheres, cmd_spectrum, cmd_verify, Target};
use confsob::config::{ConfigFile, RunConfig};
use confsob::suites::Fault;
use confsob::BoxError;

/// Numerics for the logarithmic operator and the log-Sobolev inequality on 𝕊ⁿ.
#[derive(Debug, Parser)]
#[command(name = "confsob", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Sphere dimension.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Band limit L.
    #[arg(long, global = true)]
    band_limit: Option<usize>,
    /// Quadrature grid degree (default 4L).
    #[arg(long, global = true)]
    grid_degree: Option<usize>,
    /// Identity tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed of the randomized suites and inits.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Report path (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON configuration file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FaultArg {
    CorruptMultiplier,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every identity suite; exit 1 naming the first failure.
    Verify {
        #[arg(long, hide = true, value_enum)]
        fault: Option<FaultArg>,
    },
    /// CSV of h_l and sampled P2s multipliers.
    Spectrum {
        /// Largest degree of the regular rows.
        #[arg(long, default_value_t = 64)]
        l_max: usize,
    },
    /// Deficit flow from an initial function, then a fit to the family.
    Minimize {
        /// constant:<c> | random[:seed=<k>] | extremizer:zeta=<z>[,c=<c>] | bump:l=,m=,amp= | file:<path>
        #[arg(long, default_value = "random")]
        init: String,
        #[arg(long)]
        max_iterations: Option<usize>,
        #[arg(long)]
        step: Option<f64>,
    },
    /// Critical scale of the moving-spheres comparison.
    Movespheres {
        /// Function spec, as for `minimize --init`.
        #[arg(long, default_value = "constant:1")]
        u: String,
        /// Centre ξ₀ on the sphere (comma separated).
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with_all = ["x0", "e"])]
        xi0: Option<Vec<f64>>,
        /// Centre x₀ in the plane.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with = "e")]
        x0: Option<Vec<f64>>,
        /// Reflection normal e; switches to moving planes.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        e: Option<Vec<f64>>,
        /// Scan interval lo,hi for λ (or α).
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        range: Option<Vec<f64>>,
        /// CSV profile path (default: report path with .csv).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<i32, BoxError> {
    let g = cli.global;
    let mut flags = ConfigFile {
        n: g.n,
        band_limit: g.band_limit,
        grid_degree: g.grid_degree,
        tol: g.tol,
        seed: g.seed,
        out: g.out,
        ..Default::default()
    };
    match cli.command {
        Command::Verify { fault } => {
            let cfg = RunConfig::resolve(flags, g.config.as_deref())?;
            let fault = fault.map(|FaultArg::CorruptMultiplier| Fault::CorruptMultiplier);
            let (report, code) = cmd_verify(&cfg, fault)?;
            for s in &report.suites {
                let tag = if s.pass { "pass" } else { "FAIL" };
                eprintln!("[{tag}] {}: worst {:.3e}, tolerance {:.1e}; {}", s.name, s.worst, s.tolerance, s.detail);
            }
            if let Some(name) = report.first_failure {
                eprintln!("verify failed: suite {name}");
            }
            Ok(code)
        }
        Command::Spectrum { l_max } => {
            let cfg = RunConfig::resolve(flags, g.config.as_deref())?;
            cmd_spectrum(cfg.n, l_max, cfg.out.as_deref())
        }
        Command::Minimize {
            init,
            max_iterations,
            step,
        } => {
            flags.max_iterations = max_iterations;
            flags.step = step;
            let cfg = RunConfig::resolve(flags, g.config.as_deref())?;
            let (report, code) = cmd_minimize(&cfg, &init)?;
            eprintln!(
                "{:?} after {} iterations: deficit {:.3e}, fit residual {}",
                report.status,
                report.iterations,
                report.deficit.deficit,
                report.fit.as_ref().map_or("n/a".into(), |f| format!("{:.3e}", f.residual)),
            );
            Ok(code)
        }
        Command::Movespheres {
            u,
            xi0,
            x0,
            e,
            range,
            csv,
        } => {
            let cfg = RunConfig::resolve(flags, g.config.as_deref())?;
            let target = match (xi0, x0, e) {
                (_, _, Some(e)) => Target::Normal(e),
                (_, Some(x0), _) => Target::X0(x0),
                (Some(xi0), _, _) => Target::Xi0(xi0),
                _ => {
                    let mut pole = vec![0.0; cfg.n + 1];
                    pole[cfg.n] = 1.0;
                    Target::Xi0(pole)
                }
            };
            let range = match range.as_deref() {
                None => None,
                Some([lo, hi]) => Some((*lo, *hi)),
                Some(_) => return Err("--range takes exactly two values lo,hi".into()),
            };
            let (report, code) = cmd_movespheres(&cfg, &u, &target, range, csv.as_deref())?;
            eprintln!(
                "critical value {}, sup|w| there {}, predicted {}: {}",
                fmt_opt(report.profile.critical),
                fmt_opt(report.profile.sup_at_critical),
                fmt_opt(report.predicted),
                if report.symmetric { "symmetric" } else { "not symmetric (flagged)" },
            );
            Ok(code)
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("n/a".into(), |v| format!("{v:.6e}"))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pairblock_core::checks::run_quick_checks;
use pairblock_core::steady::DEFAULT_TRUNCATION_TOL;
use pairblock_core::{
    check_truncation_detailed, evaluate_point, load_config, run_sweep, write_outputs, Error, HilbertSpace,
    SystemParams, DEFAULT_FLOOR,
};

#[derive(Parser)]
#[command(
    name = "pairblock",
    version,
    about = "Steady-state correlations of a driven atom-photon-phonon system"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a parameter sweep described by a TOML config.
    Sweep {
        config: PathBuf,
        /// Override the Fock truncation (cavity, mechanics).
        #[arg(long, num_args = 2, value_names = ["NC", "NM"])]
        truncation: Option<Vec<usize>>,
        /// Record unconverged truncations instead of aborting.
        #[arg(long)]
        no_strict_truncation: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Solve one parameter point and print its observables as JSON.
    Point(PointArgs),
    /// Run the built-in invariant checks.
    Check,
}

#[derive(Args)]
struct PointArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    delta: f64,
    #[arg(long, default_value_t = 0.1)]
    j_coupling: f64,
    #[arg(long, default_value_t = 1.0)]
    omega_drive: f64,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long, default_value_t = 10.0)]
    gamma_c: f64,
    #[arg(long, default_value_t = 10.0)]
    gamma_m: f64,
    #[arg(long, default_value_t = 0.0)]
    m_th: f64,
    #[arg(long, num_args = 2, value_names = ["NC", "NM"], default_values_t = [5, 5])]
    truncation: Vec<usize>,
    /// Skip the comparison against doubled truncation.
    #[arg(long)]
    no_check_truncation: bool,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config { .. } | Error::InvalidParameter { .. } | Error::InvalidSweep(_) => 1,
        Error::Io { .. } => 3,
        _ => 2,
    }
}

fn sweep(
    config: PathBuf,
    truncation: Option<Vec<usize>>,
    no_strict: bool,
    output: Option<PathBuf>,
) -> Result<u8, Error> {
    let mut config = load_config(&config)?;
    if let Some(t) = truncation {
        config.truncation = (t[0], t[1]);
    }
    if no_strict {
        config.strict_truncation = false;
    }
    if let Some(path) = output {
        config.output_path = Some(path);
    }
    let result = run_sweep(&config)?;
    let (csv, json) = write_outputs(&result, &config.output_path())?;
    let unconverged = result
        .rows
        .iter()
        .filter(|r| r.report.is_some_and(|rep| rep.truncation_converged == Some(false)))
        .count();
    eprintln!(
        "{}: {} points, {} failed, {} unconverged -> {}, {}",
        config.name,
        result.rows.len(),
        result.failed_rows(),
        unconverged,
        csv.display(),
        json.display()
    );
    Ok(if result.failed_rows() > 0 { 2 } else { 0 })
}

fn point(args: PointArgs) -> Result<u8, Error> {
    let params = SystemParams {
        delta: args.delta,
        j_coupling: args.j_coupling,
        omega_drive: args.omega_drive,
        kappa: args.kappa,
        gamma_c: args.gamma_c,
        gamma_m: args.gamma_m,
        m_th: args.m_th,
    };
    params.validate()?;
    let levels = (args.truncation[0], args.truncation[1]);
    let out = if args.no_check_truncation {
        let p = evaluate_point(&params, &HilbertSpace::new(levels.0, levels.1)?, DEFAULT_FLOOR)?;
        serde_json::json!({ "params": params, "record": p.record, "report": p.report })
    } else {
        let c = check_truncation_detailed(&params, levels, DEFAULT_TRUNCATION_TOL, DEFAULT_FLOOR)?;
        serde_json::json!({
            "params": params,
            "record": c.base.record,
            "report": c.report(),
            "truncation_check": { "max_change": c.max_change, "worst_observable": c.worst_observable },
        })
    };
    println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
    Ok(0)
}

fn check() -> u8 {
    let mut failed = 0;
    for c in run_quick_checks() {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.passed);
    }
    if failed == 0 {
        0
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep {
            config,
            truncation,
            no_strict_truncation,
            output,
        } => sweep(config, truncation, no_strict_truncation, output),
        Command::Point(args) => point(args),
        Command::Check => Ok(check()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

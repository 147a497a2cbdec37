use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use riccilab::cli::{self, GoldenStatus, EXIT_ERROR, EXIT_OK};
use riccilab::config::{RunConfig, Scenario};

/// Ricci flow with surgery on rotationally symmetric and homogeneous
/// 3-manifolds.
///
/// Exit codes: 0 completed with every enforced check passing, 2 completed
/// with monitor warnings, 1 error. With RICCILAB_GOLDEN_DIR set, the CSV
/// output is compared byte for byte with `$RICCILAB_GOLDEN_DIR/<scenario>/`
/// (and recorded there when missing).
#[derive(Parser, Debug)]
#[command(name = "riccilab", version)]
struct Args {
    /// Flat key=value config file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// round, dumbbell, cylinder, homogeneous-constK or homogeneous-product.
    #[arg(long, value_name = "NAME")]
    scenario: Option<String>,
    /// Output directory (default: `out` from the config, else riccilab-out).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Parallel runs during a sweep.
    #[arg(long, value_name = "K", default_value_t = 1)]
    jobs: usize,
    /// Re-run the weak-solution audit on the timeline stored in --out.
    #[arg(long)]
    verify: bool,
    /// Override one config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Sweep a numeric key over values, writing summary.csv.
    #[arg(long, value_name = "KEY=V1,V2,...")]
    sweep: Option<String>,
}

fn load(args: &Args) -> riccilab::Result<RunConfig> {
    let mut c = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => {
            let s = args
                .scenario
                .as_deref()
                .map(str::parse)
                .transpose()?
                .unwrap_or(Scenario::Round);
            RunConfig::for_scenario(s)
        }
    };
    if let Some(s) = &args.scenario {
        c.scenario = s.parse()?;
    }
    for kv in &args.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| riccilab::Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        c.set(k.trim(), v)?;
    }
    c.validate()?;
    Ok(c)
}

fn main() -> ExitCode {
    let args = Args::parse();
    ExitCode::from(real_main(&args) as u8)
}

fn real_main(args: &Args) -> i32 {
    if args.verify {
        let Some(dir) = &args.out else {
            eprintln!("riccilab: --verify needs --out DIR");
            return EXIT_ERROR;
        };
        return match cli::verify_dir(dir) {
            Ok(rep) if rep.ok => {
                println!("weak solution: ok");
                EXIT_OK
            }
            Ok(rep) => {
                for v in &rep.violations {
                    println!("violation ({}) at t = {}: {}", v.condition, v.time, v.detail);
                }
                EXIT_ERROR
            }
            Err(e) => {
                eprintln!("riccilab: {e}");
                EXIT_ERROR
            }
        };
    }
    let config = match load(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("riccilab: {e}");
            return EXIT_ERROR;
        }
    };
    let out = args
        .out
        .clone()
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("riccilab-out"));

    if let Some(spec) = &args.sweep {
        let Some((axis, values)) = spec.split_once('=') else {
            eprintln!("riccilab: --sweep expects KEY=V1,V2,...");
            return EXIT_ERROR;
        };
        let values: Vec<String> = values
            .split(',')
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .map(String::from)
            .collect();
        return match cli::sweep(&config, axis.trim(), &values, args.jobs, Some(&out)) {
            Ok(rows) => {
                let written = std::fs::create_dir_all(&out)
                    .and_then(|_| std::fs::write(out.join("summary.csv"), cli::write_summary(&rows)));
                match written {
                    Ok(()) => EXIT_OK,
                    Err(e) => {
                        eprintln!("riccilab: {e}");
                        EXIT_ERROR
                    }
                }
            }
            Err(e) => {
                eprintln!("riccilab: {e}");
                EXIT_ERROR
            }
        };
    }

    let code = cli::run(&config, &out);
    if let Some(golden) = std::env::var_os("RICCILAB_GOLDEN_DIR") {
        match cli::check_golden(&out, golden.as_ref(), config.scenario) {
            Ok(GoldenStatus::Match) => {}
            Ok(GoldenStatus::Recorded(files)) => {
                for f in files {
                    eprintln!("riccilab: recorded golden {}", f.display());
                }
            }
            Ok(GoldenStatus::Mismatch(files)) => {
                eprintln!("riccilab: output differs from golden: {}", files.join(", "));
                return EXIT_ERROR;
            }
            Err(e) => {
                eprintln!("riccilab: golden check: {e}");
                return EXIT_ERROR;
            }
        }
    }
    code
}

use std::path::PathBuf;
use std::process::ExitCode;

use acml_cli::bundled::{bundled, BUNDLED};
use acml_cli::report::{summary, to_json};
use acml_cli::{load_scenario, resolve, run_scenario, RunOptions};
use acml_core::exprcore::Expr;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "acml", version, about = "Check almost contact metric structures in adapted coordinates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file (or the name of a bundled scenario).
    Run {
        file: String,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
        /// Cross-check jets against finite differences at 25 points.
        #[arg(long)]
        fd_check: bool,
        /// Write the JSON report here instead of stdout.
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
        /// No summary on stderr.
        #[arg(long)]
        quiet: bool,
        /// Include elapsed_ms in the report.
        #[arg(long)]
        timing: bool,
        /// Worker threads for per-point sweeps.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List the bundled scenarios.
    Fixtures {
        /// Also write them as .scn files into DIR.
        #[arg(long, value_name = "DIR")]
        write: Option<PathBuf>,
    },
    /// Parse an expression and print its canonical form.
    ParseExpr {
        expr: String,
        #[arg(long)]
        dim: usize,
        /// Evaluate value and gradient at a comma-separated point.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        at: Option<Vec<f64>>,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { file, points, seed, tol, fd_check, json, quiet, timing, threads } => {
            if let Some(t) = threads {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
                    eprintln!("acml: cannot configure thread pool: {e}");
                    return ExitCode::from(2);
                }
            }
            let text = match std::fs::read_to_string(&file) {
                Ok(t) => t,
                Err(e) => match bundled(&file) {
                    Some(t) => t.to_string(),
                    None => {
                        eprintln!("acml: cannot read {file}: {e}");
                        return ExitCode::from(2);
                    }
                },
            };
            let sc = match load_scenario(&text) {
                Ok(sc) => sc,
                Err(e) => {
                    eprintln!("{file}:{e}");
                    return ExitCode::from(2);
                }
            };
            let opts = RunOptions { points, seed, tol, fd_check, timing };
            let sc = match resolve(&sc, &opts) {
                Ok(sc) => sc,
                Err(e) => {
                    eprintln!("acml: {e}");
                    return ExitCode::from(2);
                }
            };
            let report = run_scenario(&sc, timing);
            let out = to_json(&report);
            match json {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, out) {
                        eprintln!("acml: cannot write {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
                None => print!("{out}"),
            }
            if !quiet {
                eprint!("{}", summary(&report));
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Command::Fixtures { write } => {
            for (name, text) in BUNDLED {
                let sc = load_scenario(text).expect("bundled scenarios parse");
                let tasks: Vec<&str> = sc.tasks.iter().map(|t| t.name()).collect();
                println!("{name:<14} dim {}  {}", sc.dim, tasks.join(", "));
                if let Some(dir) = &write {
                    let path = dir.join(format!("{name}.scn"));
                    if let Err(e) = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(&path, text)) {
                        eprintln!("acml: cannot write {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
            }
            ExitCode::SUCCESS
        }
        Command::ParseExpr { expr, dim, at } => {
            let e = match Expr::parse(&expr, dim) {
                Ok(e) => e,
                Err(err) => {
                    eprintln!("{expr}");
                    eprintln!("{}^ {err}", " ".repeat(err.offset()));
                    return ExitCode::from(2);
                }
            };
            println!("{e}");
            if let Some(p) = at {
                match e.eval_jet(&p, 1) {
                    Ok(j) => {
                        println!("value {}", j.value());
                        let grad: Vec<f64> = (0..dim).map(|i| j.partial(&[i])).collect();
                        println!("gradient {grad:?}");
                    }
                    Err(err) => {
                        eprintln!("acml: {err}");
                        return ExitCode::from(2);
                    }
                }
            }
            ExitCode::SUCCESS
        }
    }
}

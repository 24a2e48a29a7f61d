use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use zerofree_cli::config::{build_region, RegionSpec};
use zerofree_cli::output::{sidecar_path, to_json, write_grid_csv, RunMeta};
use zerofree_cli::{demo_config, demo_names, parse_function, run_job, verify_expr, CliError, ExitClass, JobConfig};

#[derive(Parser)]
#[command(name = "zerofree", version, about = "Zero-free polynomial approximation on chains of discs")]
struct Cli {
    /// Worker threads for sampling and certification (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the full pipeline and polynomial fit for a job file.
    Approximate {
        #[arg(long)]
        config: PathBuf,
        /// Report path; overrides the config. Without either the report goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for CSV grids; overrides the config.
        #[arg(long)]
        grids: Option<PathBuf>,
    },
    /// Certify an expression on a region without approximating it.
    Verify {
        #[arg(long)]
        expr: String,
        #[arg(long, conflicts_with = "jordan")]
        chain: Option<usize>,
        /// Map expression of one domain; repeat per domain.
        #[arg(long, num_args = 1)]
        jordan: Vec<String>,
        /// Required minimum modulus.
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        #[arg(long, default_value_t = 64.0)]
        density: f64,
    },
    /// Run a built-in example.
    Demo {
        #[arg(long, required_unless_present = "list")]
        name: Option<String>,
        #[arg(long)]
        list: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        grids: Option<PathBuf>,
    },
    /// Dump an expression's values on a sample grid as CSV.
    Grid {
        #[arg(long)]
        expr: String,
        #[arg(long, conflicts_with = "jordan")]
        chain: Option<usize>,
        #[arg(long, num_args = 1)]
        jordan: Vec<String>,
        #[arg(long, default_value_t = 64.0)]
        density: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn region_spec(chain: Option<usize>, jordan: Vec<String>) -> RegionSpec {
    if jordan.is_empty() {
        RegionSpec::Chain(chain.unwrap_or(1))
    } else {
        RegionSpec::Jordan(jordan)
    }
}

fn write_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, text)?;
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run_and_write(cfg: &JobConfig, out: Option<PathBuf>, grids: Option<PathBuf>) -> Result<ExitClass, CliError> {
    let started = chrono::Utc::now();
    let outcome = run_job(cfg);
    let finished = chrono::Utc::now();
    let out = out.or_else(|| cfg.output.report.clone());
    let grids = grids.or_else(|| cfg.output.grids.clone());
    write_text(out.as_deref(), &to_json(&outcome.report)?)?;
    if let Some(path) = &out {
        fs::write(sidecar_path(path), to_json(&RunMeta::new(started, finished))?)?;
    }
    if let Some(dir) = grids {
        outcome.write_grids(&dir)?;
    }
    if let Some(msg) = &outcome.report.error {
        eprintln!("{msg}");
    }
    Ok(outcome.exit_class())
}

fn run(cli: Cli) -> Result<ExitClass, CliError> {
    match cli.cmd {
        Cmd::Approximate { config, out, grids } => {
            let cfg = JobConfig::from_json(&fs::read_to_string(&config)?)?;
            run_and_write(&cfg, out, grids)
        }
        Cmd::Verify {
            expr,
            chain,
            jordan,
            epsilon,
            density,
        } => {
            let rep = verify_expr(&expr, &region_spec(chain, jordan), epsilon, density)?;
            write_text(None, &to_json(&rep)?)?;
            Ok(rep.exit_class)
        }
        Cmd::Demo { list: true, .. } => {
            for (name, about) in demo_names() {
                println!("{name:<14} {about}");
            }
            Ok(ExitClass::Ok)
        }
        Cmd::Demo { name, out, grids, .. } => {
            let name = name.unwrap_or_default();
            let cfg = demo_config(&name).ok_or_else(|| {
                let known: Vec<&str> = demo_names().map(|(n, _)| n).collect();
                CliError::Config(format!("unknown demo '{name}'; known: {}", known.join(", ")))
            })?;
            run_and_write(&cfg, out, grids)
        }
        Cmd::Grid {
            expr,
            chain,
            jordan,
            density,
            out,
        } => {
            let f = parse_function(&expr)?;
            let region = build_region(&region_spec(chain, jordan), density)?;
            let grid = zerofree::geometry::boundary_grid(&region, density)?;
            match out {
                Some(p) => write_grid_csv(&f, &grid, std::io::BufWriter::new(fs::File::create(p)?))?,
                None => write_grid_csv(&f, &grid, std::io::stdout().lock())?,
            }
            Ok(ExitClass::Ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("cannot configure {n} threads: {e}");
            return ExitCode::from(ExitClass::Other.code() as u8);
        }
    }
    let class = match run(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_class()
        }
    };
    ExitCode::from(class.code() as u8)
}

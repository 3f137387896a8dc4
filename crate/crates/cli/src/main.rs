use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use stratmc::directions::export_directions;
use stratmc::experiment::{
    method_directions, parse_allocation, price_cell, run_experiment, to_csv, to_json, ExperimentConfig, Method, Model,
    OutputFormat,
};
use stratmc::linalg::angle_degrees;
use stratmc::{selftest, Error};

#[derive(Parser)]
#[command(name = "stratmc", version, about = "Stratified Monte Carlo along linear projections")]
struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured cell and write the result table.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Leave the time_ratio column empty so output is reproducible byte for byte.
        #[arg(long)]
        no_timing: bool,
    },
    /// Price one cell; without --method this is plain Monte Carlo.
    Price {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        method: Option<String>,
        #[arg(long, default_value = "opt")]
        alloc: String,
        /// Defaults to the first configured strike.
        #[arg(long)]
        strike: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print stratification directions and the pairwise angles between them.
    Directions {
        #[arg(long)]
        config: PathBuf,
        /// Repeat to compare several methods.
        #[arg(long, required = true)]
        method: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance checks.
    Selftest {
        /// Run only this criterion.
        #[arg(long)]
        criterion: Option<u32>,
    },
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => Ok(fs::write(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig, Error> {
    let mut config = ExperimentConfig::from_path(path)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    match cli.command {
        Command::Experiment {
            config,
            seed,
            out,
            format,
            no_timing,
        } => {
            let mut config = load(&config, seed)?;
            if no_timing {
                config.timing = false;
            }
            let format = match format {
                Some(Format::Csv) => OutputFormat::Csv,
                Some(Format::Json) => OutputFormat::Json,
                None => config.format,
            };
            let rows = run_experiment(&config)?;
            let text = match format {
                OutputFormat::Csv => to_csv(&rows)?,
                OutputFormat::Json => to_json(&rows)? + "\n",
            };
            let out = out.or_else(|| config.output.as_ref().map(PathBuf::from));
            emit(&text, out.as_ref())?;
        }
        Command::Price {
            config,
            method,
            alloc,
            strike,
            seed,
        } => {
            let config = load(&config, seed)?;
            let method = method.as_deref().map(Method::parse).transpose()?;
            let alloc = parse_allocation(&alloc)?;
            let strike = strike.unwrap_or(config.payoff.strikes[0]);
            let cell = price_cell(&config, method, alloc, strike)?;
            let r = &cell.report;
            println!(
                "{} {} K={} price {:.6} se {:.6} variance {:.6} samples {} strata {}",
                cell.row.method,
                cell.row.alloc,
                strike,
                r.price,
                r.std_error(),
                r.variance,
                r.total_samples(),
                r.n_strata()
            );
        }
        Command::Directions { config, method, out } => {
            let config = load(&config, None)?;
            let model = Model::build(&config.model)?;
            let mut labelled = Vec::new();
            let mut vectors = String::new();
            for name in &method {
                let set = method_directions(&config, &model, Method::parse(name)?)?;
                if !vectors.is_empty() {
                    vectors.push('\n');
                }
                vectors += &export_directions(&set);
                for (i, c) in set.columns().iter().enumerate() {
                    labelled.push((format!("{name}[{}]", i + 1), c.clone()));
                }
            }
            match &out {
                Some(path) => fs::write(path, &vectors)?,
                None => println!("{vectors}"),
            }
            for (i, (a, u)) in labelled.iter().enumerate() {
                for (b, v) in &labelled[i + 1..] {
                    println!("angle {a} {b} {:.6}", angle_degrees(u, v)?);
                }
            }
        }
        Command::Selftest { criterion } => {
            let outcomes = match criterion {
                Some(id) => vec![selftest::run(id)?],
                None => selftest::run_all(),
            };
            for o in &outcomes {
                println!("{o}");
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            println!("{} passed, {failed} failed", outcomes.len() - failed);
            if failed > 0 {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) => ExitCode::from(1),
                e if e.is_config() => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}

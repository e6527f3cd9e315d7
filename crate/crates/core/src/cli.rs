//! The `kronlev` command line.
//!
//! Machine-readable results go to stdout (JSON) or to the named files
//! (CSV, SVG); diagnostics go to stderr. Exit status is 0 on success, 2 for
//! invalid arguments or configs, 1 for failures while computing.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Parser, Subcommand};
use log::info;
use serde_json::json;

use crate::error::{Error, Result};
use crate::experiments::{emit_cdf, emit_cdf_svg, Experiment, ExperimentConfig};
use crate::indexset::{IndexSetSpec, MultiIndexSet};
use crate::oracle::{build_full, exact_leverage, solve_full, LeverageMode};
use crate::rng::RngState;
use crate::sampler::{mu_mass, SamplerMethod};
use crate::sketch::{
    assemble, draw_sketch, full_relative_error, sample_size, solve, SampleSizeBound,
};

#[derive(Debug, Parser)]
#[command(name = "kronlev", version, about = "Leverage-score row sampling for Kronecker-structured least squares")]
pub struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// More log output on stderr; repeat for more.
    #[arg(short, long, action = ArgAction::Count, global = true)]
    pub verbose: u8,

    /// Only errors on stderr.
    #[arg(short, long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build an index set and report its size and bounding box.
    Indexset {
        /// Index-set spec, or an experiment config with an `index_set` key.
        #[arg(long)]
        config: PathBuf,
        /// Also list the multi-indices in column order.
        #[arg(long)]
        list: bool,
    },
    /// Draw grid points and write them as CSV.
    Sample {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        method: SamplerMethod,
        #[arg(long)]
        count: usize,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve one sketched problem and score it on the full grid.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        method: SamplerMethod,
        /// Sketch size (default: from the config).
        #[arg(long = "K", visible_alias = "k")]
        k: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Dense reference solve and exact leverage scores.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        /// Write per-row leverage scores as CSV.
        #[arg(long)]
        dump: Option<PathBuf>,
        /// Write the factor Q, R and leverage tables as CSV.
        #[arg(long)]
        factor_tables: Option<PathBuf>,
    },
    /// Run all trials of a config and write the error CDFs.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// CDF as CSV: method, sorted_error, cdf_level.
        #[arg(long)]
        out: PathBuf,
        /// CDF plot as SVG.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Raw per-trial errors as CSV.
        #[arg(long)]
        trials_csv: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Sample size required by one of the sketching bounds.
    Bound {
        #[arg(long)]
        bound: SampleSizeBound,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        delta: f64,
    },
}

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::InvalidSpec(_)
        | Error::InvalidGrid(_)
        | Error::Json(_)
        | Error::ParameterRange(_)
        | Error::Precondition(_)
        | Error::TooFewNodes { .. } => 2,
        _ => 1,
    }
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<(ExperimentConfig, PathBuf)> {
    let (mut config, base) = ExperimentConfig::from_file(path)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    Ok((config, base))
}

fn load_index_set(path: &Path) -> Result<MultiIndexSet> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    match serde_json::from_str::<IndexSetSpec>(&text) {
        Ok(spec) => spec.build(),
        Err(spec_err) => match ExperimentConfig::from_json(&text) {
            Ok(config) => config.index_set.build(),
            Err(_) => Err(Error::Config(format!("invalid index-set spec: {spec_err}"))),
        },
    }
}

fn print_json(out: &mut dyn Write, value: &serde_json::Value) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

/// Executes a parsed command, writing JSON summaries to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Indexset { config, list } => {
            let set = load_index_set(config)?;
            let mut v = json!({
                "N": set.len(),
                "bounding_box": set.bounding_box(),
                "monotone_lower": set.is_monotone_lower(),
            });
            if *list {
                v["indices"] = json!(set.indices());
            }
            print_json(out, &v)
        }
        Command::Sample { config, method, count, seed, out: path } => {
            let (config, base) = load_config(config, *seed)?;
            if *count == 0 {
                return Err(Error::Config("--count must be >= 1".into()));
            }
            let exp = Experiment::prepare(&config, &base)?;
            let sampler = exp.sampler(*method)?;
            let state = RngState::for_trial(config.seed, method.id(), 0);
            let sketch = draw_sketch(&sampler, *count, state)?;
            let sink: Box<dyn Write> = match path {
                Some(p) => Box::new(std::fs::File::create(p)?),
                None => Box::new(&mut *out),
            };
            let mut w = csv::Writer::from_writer(sink);
            let d = config.dimension;
            let mut header: Vec<String> = (1..=d).map(|i| format!("m{i}")).collect();
            header.extend((1..=d).map(|i| format!("y{i}")));
            header.extend(["point_mass".into(), "mu_mass".into(), "weight".into()]);
            w.write_record(&header)?;
            for (p, v) in sketch.points.iter().zip(&sketch.weights) {
                let mut rec: Vec<String> = p.indices.iter().map(|m| m.to_string()).collect();
                rec.extend(p.coords.iter().map(|y| y.to_string()));
                rec.push(sampler.point_mass(&p.indices)?.to_string());
                rec.push(mu_mass(&exp.factors, &p.indices)?.to_string());
                rec.push(v.to_string());
                w.write_record(&rec)?;
            }
            w.flush()?;
            Ok(())
        }
        Command::Solve { config, method, k, seed } => {
            let (config, base) = load_config(config, *seed)?;
            let exp = Experiment::prepare(&config, &base)?;
            let k = k.unwrap_or(exp.samples);
            if k == 0 {
                return Err(Error::Config("--K must be >= 1".into()));
            }
            let sampler = exp.sampler(*method)?;
            let state = RngState::for_trial(config.seed, method.id(), 0);
            let sketch = draw_sketch(&sampler, k, state)?;
            let sys = assemble(&exp.set, &exp.factors, &sketch, &exp.target)?;
            let sol = solve(&sys)?;
            let err = full_relative_error(&exp.set, &exp.factors, &sol.x, &exp.target)?;
            let opt = exp.optimal_relative_error()?;
            print_json(
                out,
                &json!({
                    "relative_error": err,
                    "optimal_relative_error": opt,
                    "K": k,
                    "N": exp.set.len(),
                    "rank_flag": sol.rank_deficient,
                }),
            )
        }
        Command::Oracle { config, dump, factor_tables } => {
            let (config, base) = load_config(config, None)?;
            let exp = Experiment::prepare(&config, &base)?;
            let sys = build_full(&exp.set, &exp.factors, &exp.target)?;
            let lev = exact_leverage(&sys, LeverageMode::Plain)?;
            let full = solve_full(&sys)?;
            if let Some(path) = dump {
                let mut w = csv::Writer::from_path(path)?;
                let d = config.dimension;
                let mut header = vec!["row".to_string()];
                header.extend((1..=d).map(|i| format!("m{i}")));
                header.push("leverage".into());
                w.write_record(&header)?;
                for (row, l) in lev.iter().enumerate() {
                    let idx = crate::indexset::lexicographic_unrank(&sys.shape, row);
                    let mut rec = vec![row.to_string()];
                    rec.extend(idx.iter().map(|m| m.to_string()));
                    rec.push(l.to_string());
                    w.write_record(&rec)?;
                }
                w.flush()?;
            }
            if let Some(path) = factor_tables {
                let mut w = csv::Writer::from_path(path)?;
                w.write_record(["dimension", "table", "row", "col", "value"])?;
                for (d, f) in exp.factors.factors().iter().enumerate() {
                    f.write_tables_csv(d, &mut w)?;
                }
                w.flush()?;
            }
            print_json(
                out,
                &json!({
                    "rows": sys.a.nrows(),
                    "N": sys.a.ncols(),
                    "optimal_relative_error": full.relative_error,
                    "rank_flag": full.rank_deficient,
                    "leverage_sum": lev.iter().sum::<f64>(),
                }),
            )
        }
        Command::Experiment { config, out: csv_path, svg, trials_csv, seed } => {
            let (config, base) = load_config(config, *seed)?;
            let exp = Experiment::prepare(&config, &base)?;
            info!("N = {}, K = {}, {} grid rows", exp.set.len(), exp.samples, exp.factors.grid_size());
            let report = crate::experiments::run_prepared(&exp)?;
            emit_cdf(&report, csv_path)?;
            if let Some(p) = svg {
                emit_cdf_svg(&report, p)?;
            }
            if let Some(p) = trials_csv {
                let mut w = csv::Writer::from_path(p)?;
                for r in &report.records {
                    w.serialize(r)?;
                }
                w.flush()?;
            }
            let medians: serde_json::Map<String, serde_json::Value> = config
                .methods
                .iter()
                .map(|&m| (m.to_string(), json!(median(report.errors(m)))))
                .collect();
            print_json(
                out,
                &json!({
                    "N": report.n,
                    "K": report.k,
                    "trials": config.trials,
                    "optimal_relative_error": report.optimal_relative_error,
                    "median_relative_error": medians,
                }),
            )
        }
        Command::Bound { bound, n, epsilon, delta } => {
            let k = sample_size(*bound, *n, *epsilon, *delta)?;
            print_json(out, &json!({ "bound": bound, "N": n, "epsilon": epsilon, "delta": delta, "K": k }))
        }
    }
}

pub fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Parses `args`, runs, and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Warn,
        (false, 1) => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).parse_default_env().try_init();

    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be >= 1");
            return 2;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }

    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(&cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

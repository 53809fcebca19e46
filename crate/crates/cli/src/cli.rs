use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use flexsky::poisson::{cdf, pmf, quantile, survival};
use flexsky::{run_query, NumericsConfig64, Outputs, PoissonParams64};

use crate::bench::{bench, BenchConfig};
use crate::document::{oracle_check, result_document, to_json};
use crate::error::{CliError, CliResult};
use crate::query::parse_query;
use crate::relation_io::{gen_dataset, load_relation, parse_schema_arg, write_relation, RateRange};

#[derive(Debug, Parser)]
#[command(name = "flexsky", version, about = "Flexible skyline queries over CSV relations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Pareto skyline in transformed space.
    Sky(QueryArgs),
    /// Tuples not dominated under every scoring function of the family.
    Nd(QueryArgs),
    /// Tuples that are the unique best under some scoring function.
    Po(QueryArgs),
    /// Evaluate the Poisson distribution directly.
    Cdf(CdfArgs),
    /// Write a seeded synthetic relation.
    Gen(GenArgs),
    /// Time exact and clamped evaluation on synthetic data.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct QueryArgs {
    #[arg(long)]
    relation: PathBuf,
    #[arg(long)]
    query: PathBuf,
    /// Cross-check against the brute-force oracles; exits 4 on mismatch.
    #[arg(long)]
    oracle: bool,
    /// Evaluate Poisson terms with the band clamp.
    #[arg(long)]
    clamp: bool,
    /// Include per-phase timings (makes output run-dependent).
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CdfMode {
    Cdf,
    Survival,
    Pmf,
    Quantile,
}

#[derive(Debug, Args)]
struct CdfArgs {
    #[arg(long, allow_negative_numbers = true)]
    lambda: f64,
    #[arg(long, allow_negative_numbers = true)]
    k: Option<f64>,
    #[arg(long, value_enum, default_value = "cdf")]
    mode: CdfMode,
    /// Probability for `--mode quantile`.
    #[arg(long)]
    p: Option<f64>,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `name:kind,...` with kind `rate` or `normalized`.
    #[arg(long, conflicts_with = "query", required_unless_present = "query")]
    schema: Option<String>,
    /// Take the schema from a query document.
    #[arg(long)]
    query: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    lambda_min: f64,
    #[arg(long, default_value_t = 50.0)]
    lambda_max: f64,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 25.0)]
    k: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda_min: f64,
    #[arg(long, default_value_t = 50.0)]
    lambda_max: f64,
    /// Also run with the band clamp and compare ND sets.
    #[arg(long)]
    clamp: bool,
    #[arg(long)]
    threads: Option<usize>,
}

/// Runs one command line. Output goes to `out` only on success; errors go
/// to `err`. Returns the process exit code.
pub fn run_command<I, S>(argv: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let benign = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let text = e.render().to_string();
            if benign {
                let _ = out.write_all(text.as_bytes());
                return 0;
            }
            let _ = err.write_all(text.as_bytes());
            return 1;
        }
    };
    match execute(cli.command) {
        Ok(text) => match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(err, "error: writing output: {e}");
                2
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command) -> CliResult<String> {
    match command {
        Command::Sky(args) => query_command(args, |o| o.sky = true),
        Command::Nd(args) => query_command(args, |o| o.nd = true),
        Command::Po(args) => query_command(args, |o| o.po = true),
        Command::Cdf(args) => cdf_command(args),
        Command::Gen(args) => gen_command(args),
        Command::Bench(args) => bench_command(args),
    }
}

fn query_command(args: QueryArgs, select: impl FnOnce(&mut Outputs)) -> CliResult<String> {
    let mut query = parse_query(&args.query)?;
    if args.clamp {
        query.engine.clamp = true;
    }
    if let Some(t) = args.threads {
        query.engine.parallelism = t;
    }
    select(&mut query.outputs);
    let relation = load_relation(&args.relation, query.schema())?;
    let config = query.engine.engine_config();
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let result = run_query(&relation, &query.family, &config, query.outputs)
        .map_err(|e| CliError::core("query", e))?;
    let mut doc = result_document(&result, &relation, &query, args.timing);
    if args.oracle || query.engine.oracle {
        doc.oracle = Some(oracle_check(&result, &relation, &query)?);
    }
    Ok(to_json(&doc))
}

fn cdf_command(args: CdfArgs) -> CliResult<String> {
    let params = PoissonParams64::new(args.lambda).map_err(|e| CliError::core("--lambda", e))?;
    let need_k = || args.k.ok_or_else(|| CliError::Usage("--k is required for this mode".into()));
    let value = match args.mode {
        CdfMode::Cdf => cdf(params, need_k()?).map_err(|e| CliError::core("cdf", e))?,
        CdfMode::Survival => survival(params, need_k()?).map_err(|e| CliError::core("survival", e))?,
        CdfMode::Pmf => {
            let k = need_k()?;
            if !(k >= 0.0 && k.fract() == 0.0 && k < u64::MAX as f64) {
                return Err(CliError::Data(format!("pmf needs a non-negative integer k, got {k}")));
            }
            pmf(params, k as u64)
        }
        CdfMode::Quantile => {
            let p = args
                .p
                .ok_or_else(|| CliError::Usage("--p is required for quantile mode".into()))?;
            let q = quantile(params, p, &NumericsConfig64::default())
                .map_err(|e| CliError::core("quantile", e))?;
            return Ok(format!("{q}\n"));
        }
    };
    Ok(format!("{value:.10}\n"))
}

fn gen_command(args: GenArgs) -> CliResult<String> {
    let schema = match (&args.schema, &args.query) {
        (Some(text), _) => parse_schema_arg(text)?,
        (None, Some(path)) => parse_query(path)?.schema().clone(),
        (None, None) => return Err(CliError::Usage("give --schema or --query".into())),
    };
    let rates = RateRange {
        min: args.lambda_min,
        max: args.lambda_max,
    };
    let relation = gen_dataset(args.n, &schema, args.seed, rates)?;
    let mut buf = Vec::new();
    write_relation(&relation, &mut buf).map_err(|e| CliError::Data(format!("gen: {e}")))?;
    match args.out {
        Some(path) => {
            std::fs::write(&path, &buf).map_err(|e| CliError::io(&path, e))?;
            Ok(String::new())
        }
        None => Ok(String::from_utf8(buf).expect("csv output is utf-8")),
    }
}

fn bench_command(args: BenchArgs) -> CliResult<String> {
    let mut config = BenchConfig {
        n: args.n,
        d: args.d,
        seed: args.seed,
        k: args.k,
        rates: RateRange {
            min: args.lambda_min,
            max: args.lambda_max,
        },
        clamp: args.clamp,
        ..BenchConfig::default()
    };
    if let Some(t) = args.threads {
        config.engine.parallelism = t;
    }
    config
        .engine
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(to_json(&bench(&config)?))
}

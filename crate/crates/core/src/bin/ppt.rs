use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};

use poisson_product_tail::expansions::{region_bounds, truncation_gap};
use poisson_product_tail::harness::{
    error_record, evaluate, figure1, figure2, figure3, format_f64, json_line, model_record,
    tail_record, Format, Method, MethodOptions, NGrid, SweepSpec, Table,
};
use poisson_product_tail::laplace::PrefactorMode;
use poisson_product_tail::saddle::{solve_saddle_m, Variant};
use poisson_product_tail::{Error, PoissonModel};

/// Tail probabilities of products of independent Poisson variables.
#[derive(Debug, Parser)]
#[command(name = "ppt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Log-tail at one threshold with one method.
    Tail(TailArgs),
    /// Constrained saddle point with its residual certificate.
    Saddle(SaddleArgs),
    /// Exact against Laplace over a threshold grid.
    Figure1(SweepArgs),
    /// Exact against the one-, two- and three-term expansions.
    Figure2(SweepArgs),
    /// Laplace estimate for equal rates across dimensions.
    Figure3(Figure3Args),
    /// Region bounds for the two-factor tail.
    Regions(PairArgs),
    /// Cost of the balanced lattice point against the saddle.
    TruncationGap(PairArgs),
    /// Seeded Monte Carlo estimate.
    Mc(McArgs),
    /// Any set of methods over a threshold grid.
    Sweep(GenericSweepArgs),
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Comma-separated positive rates.
    #[arg(long, value_name = "L1,L2,...")]
    lambdas: PoissonModel,
    /// Threshold.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, default_value = "json")]
    format: FormatArg,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TailArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value = "exact")]
    method: Method,
    #[arg(long, default_value = "refined")]
    variant: Variant,
    #[arg(long, default_value = "exact-hessian")]
    prefactor: PrefactorMode,
    #[arg(long, default_value_t = poisson_product_tail::exact::DEFAULT_REL_TOL)]
    rel_tol: f64,
    /// Sample count for `--method mc`.
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    /// Seed for `--method mc`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SaddleArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value = "refined")]
    variant: Variant,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct PairArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct McArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long)]
    n_min: Option<u64>,
    #[arg(long)]
    n_max: Option<u64>,
    /// Number of log-spaced points.
    #[arg(long, default_value_t = 30, conflicts_with = "step")]
    points: usize,
    /// Linear step instead of log spacing.
    #[arg(long)]
    step: Option<u64>,
    /// Explicit comma-separated thresholds; overrides the range flags.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["n_min", "n_max", "step"])]
    n_values: Option<Vec<u64>>,
}

impl GridArgs {
    fn grid(&self, default_min: u64, default_max: u64) -> NGrid {
        if let Some(v) = &self.n_values {
            return NGrid::Explicit(v.clone());
        }
        let min = self.n_min.unwrap_or(default_min);
        let max = self.n_max.unwrap_or(default_max);
        match self.step {
            Some(step) => NGrid::Linear { min, max, step },
            None => NGrid::LogSpaced { min, max, count: self.points },
        }
    }
}

#[derive(Debug, Args)]
struct TableOutputArgs {
    #[arg(long, default_value = "csv")]
    format: FormatArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, default_value = "2,3")]
    lambdas: PoissonModel,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value = "refined")]
    variant: Variant,
    #[arg(long, default_value = "exact-hessian")]
    prefactor: PrefactorMode,
    #[arg(long, default_value_t = poisson_product_tail::exact::DEFAULT_REL_TOL)]
    rel_tol: f64,
    #[command(flatten)]
    output: TableOutputArgs,
}

#[derive(Debug, Args)]
struct Figure3Args {
    /// Common rate of every factor.
    #[arg(long, default_value_t = 2.0)]
    lambda: f64,
    /// Dimensions to compare.
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,5")]
    dims: Vec<usize>,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value = "refined")]
    variant: Variant,
    #[arg(long, default_value = "exact-hessian")]
    prefactor: PrefactorMode,
    #[command(flatten)]
    output: TableOutputArgs,
}

#[derive(Debug, Args)]
struct GenericSweepArgs {
    #[arg(long)]
    lambdas: PoissonModel,
    #[command(flatten)]
    grid: GridArgs,
    /// Comma-separated methods.
    #[arg(long, value_delimiter = ',', required = true)]
    methods: Vec<Method>,
    #[arg(long, default_value = "refined")]
    variant: Variant,
    #[arg(long, default_value = "exact-hessian")]
    prefactor: PrefactorMode,
    #[arg(long, default_value_t = poisson_product_tail::exact::DEFAULT_REL_TOL)]
    rel_tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: TableOutputArgs,
}

#[derive(Debug, Clone, Copy)]
struct FormatArg(Format);

impl std::str::FromStr for FormatArg {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        s.parse().map(FormatArg)
    }
}

enum Failure {
    Usage(String),
    Compute(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(msg) => Failure::Usage(msg),
            e => Failure::Compute(e),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            // The error record goes where a result record would have gone.
            print!("{}", json_line(&error_record(&e)));
            ExitCode::from(1)
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("PPT_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| format!("PPT_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Tail(a) => {
            let opts = MethodOptions {
                variant: a.variant,
                prefactor: a.prefactor,
                rel_tol: a.rel_tol,
                samples: a.samples,
                seed: a.seed,
            };
            let model = &a.model.lambdas;
            let n = a.model.n;
            let eval = evaluate(a.method, model, n, &opts)?;
            emit_record(&tail_record(a.method, model, n, &eval), &a.output)
        }
        Command::Saddle(a) => {
            let sp = solve_saddle_m(&a.model.lambdas, a.model.n, a.variant)?;
            emit_record(&model_record(&a.model.lambdas, a.model.n, &sp), &a.output)
        }
        Command::Regions(a) => {
            let (l1, l2) = pair(&a.model.lambdas)?;
            let rb = region_bounds(l1, l2, a.model.n)?;
            emit_record(&model_record(&a.model.lambdas, a.model.n, &rb), &a.output)
        }
        Command::TruncationGap(a) => {
            let (l1, l2) = pair(&a.model.lambdas)?;
            let tg = truncation_gap(l1, l2, a.model.n)?;
            emit_record(&model_record(&a.model.lambdas, a.model.n, &tg), &a.output)
        }
        Command::Mc(a) => {
            let opts = MethodOptions {
                samples: a.samples,
                seed: a.seed,
                ..MethodOptions::default()
            };
            let model = &a.model.lambdas;
            let eval = evaluate(Method::Mc, model, a.model.n, &opts)?;
            emit_record(&tail_record(Method::Mc, model, a.model.n, &eval), &a.output)
        }
        Command::Figure1(a) => {
            let n_values = a.grid.grid(100, 3000).resolve()?;
            let table = figure1(&a.lambdas, &n_values, &sweep_options(&a));
            emit_table(&table, &a.output)
        }
        Command::Figure2(a) => {
            let n_values = a.grid.grid(100, 3000).resolve()?;
            let table = figure2(&a.lambdas, &n_values, &sweep_options(&a))?;
            emit_table(&table, &a.output)
        }
        Command::Figure3(a) => {
            let n_values = a.grid.grid(100, 1_000_000).resolve()?;
            let opts = MethodOptions {
                variant: a.variant,
                prefactor: a.prefactor,
                ..MethodOptions::default()
            };
            let table = figure3(a.lambda, &a.dims, &n_values, &opts)?;
            emit_table(&table, &a.output)
        }
        Command::Sweep(a) => {
            let mut spec = SweepSpec::new(a.lambdas, &a.grid.grid(100, 3000), a.methods)?;
            spec.options = MethodOptions {
                variant: a.variant,
                prefactor: a.prefactor,
                rel_tol: a.rel_tol,
                samples: a.samples,
                seed: a.seed,
            };
            spec.format = a.output.format.0;
            spec.output_path = a.output.out.clone();
            emit_table(&spec.run(), &a.output)
        }
    }
}

fn sweep_options(a: &SweepArgs) -> MethodOptions {
    MethodOptions {
        variant: a.variant,
        prefactor: a.prefactor,
        rel_tol: a.rel_tol,
        ..MethodOptions::default()
    }
}

fn pair(model: &PoissonModel) -> Result<(f64, f64), Failure> {
    match *model.lambdas() {
        [a, b] => Ok((a, b)),
        _ => Err(Failure::Usage(format!(
            "this command takes exactly two rates, got {}",
            model.dim()
        ))),
    }
}

fn emit_record(rec: &Map<String, Value>, output: &OutputArgs) -> Result<(), Failure> {
    let text = match output.format.0 {
        Format::Json => json_line(rec),
        Format::Csv => record_csv(rec),
    };
    write_out(&text, output.out.as_ref())
}

fn emit_table(table: &Table, output: &TableOutputArgs) -> Result<(), Failure> {
    let text = match output.format.0 {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    };
    write_out(&text, output.out.as_ref())?;
    if !table.rows.is_empty() && table.succeeded_rows() == 0 {
        let (_, err) = &table.rows[0];
        let msg = err.clone().unwrap_or_default();
        return Err(Failure::Compute(Error::Domain {
            op: "sweep",
            detail: format!("every row failed; first: {msg}"),
        }));
    }
    Ok(())
}

fn write_out(text: &str, path: Option<&PathBuf>) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Header and value line; arrays spread over `key_1, key_2, ...`.
fn record_csv(rec: &Map<String, Value>) -> String {
    let mut header = Vec::new();
    let mut values = Vec::new();
    for (k, v) in rec {
        match v {
            Value::Array(items) => {
                for (i, item) in items.iter().enumerate() {
                    header.push(format!("{k}_{}", i + 1));
                    values.push(csv_scalar(item));
                }
            }
            _ => {
                header.push(k.clone());
                values.push(csv_scalar(v));
            }
        }
    }
    format!("{}\n{}\n", header.join(","), values.join(","))
}

fn csv_scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Number(x) => match x.as_f64() {
            Some(f) if x.is_f64() => format_f64(f),
            _ => x.to_string(),
        },
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

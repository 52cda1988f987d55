//! Everything the `ppt` binary does apart from flag parsing: method
//! dispatch, JSON records, threshold grids, and the figure sweeps.
//!
//! Sweep rows are independent and run on the current rayon pool; output is
//! always in ascending `n` (then `m`) order.

mod grid;
mod table;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{Map, Value};

pub use grid::NGrid;
pub use table::{format_f64, Cell, Table};

use crate::error::{Error, Result};
use crate::exact::{exact_tail_m, DEFAULT_REL_TOL};
use crate::expansions::{coarse_log_tail, expansion_log_tail, heuristic_two_term_m};
use crate::laplace::{laplace_tail, PrefactorMode};
use crate::model::PoissonModel;
use crate::montecarlo::mc_tail;
use crate::saddle::Variant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    Laplace,
    #[serde(rename = "expansion-1")]
    Expansion1,
    #[serde(rename = "expansion-2")]
    Expansion2,
    #[serde(rename = "expansion-3")]
    Expansion3,
    Coarse,
    HeuristicM,
    Mc,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Exact,
        Method::Laplace,
        Method::Expansion1,
        Method::Expansion2,
        Method::Expansion3,
        Method::Coarse,
        Method::HeuristicM,
        Method::Mc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Laplace => "laplace",
            Method::Expansion1 => "expansion-1",
            Method::Expansion2 => "expansion-2",
            Method::Expansion3 => "expansion-3",
            Method::Coarse => "coarse",
            Method::HeuristicM => "heuristic-m",
            Method::Mc => "mc",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method {s:?}")))
    }
}

/// Knobs shared by all methods; each method reads only the ones it needs.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodOptions {
    pub variant: Variant,
    pub prefactor: PrefactorMode,
    pub rel_tol: f64,
    pub samples: u64,
    pub seed: u64,
}

impl Default for MethodOptions {
    fn default() -> Self {
        MethodOptions {
            variant: Variant::Refined,
            prefactor: PrefactorMode::ExactHessian,
            rel_tol: DEFAULT_REL_TOL,
            samples: 1_000_000,
            seed: 0,
        }
    }
}

/// A log-tail value plus method-specific diagnostics, in a fixed key order.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub log_p: f64,
    pub diagnostics: Map<String, Value>,
}

fn two_rates(model: &PoissonModel, method: Method) -> Result<(f64, f64)> {
    match *model.lambdas() {
        [a, b] => Ok((a, b)),
        _ => Err(Error::InvalidArgument(format!(
            "method {method} is defined for exactly two factors, got {}",
            model.dim()
        ))),
    }
}

fn to_map<T: Serialize>(value: &T) -> Map<String, Value> {
    match serde_json::to_value(value).expect("diagnostics serialize") {
        Value::Object(map) => map,
        _ => unreachable!("diagnostics are structs"),
    }
}

/// Runs one method on one `(model, n)`.
pub fn evaluate(method: Method, model: &PoissonModel, n: u64, opts: &MethodOptions) -> Result<Evaluation> {
    let mut diagnostics = Map::new();
    let log_p = match method {
        Method::Exact => {
            diagnostics.insert("rel_tol".into(), opts.rel_tol.into());
            exact_tail_m(model, n, opts.rel_tol)?.ln()
        }
        Method::Laplace => {
            let est = laplace_tail(model, n, opts.variant, opts.prefactor)?;
            diagnostics.insert("variant".into(), est.saddle.variant.as_str().into());
            diagnostics.insert("prefactor".into(), est.prefactor_mode.as_str().into());
            diagnostics.insert("t_at_saddle".into(), est.t_at_saddle.into());
            diagnostics.insert("log_prefactor".into(), est.log_prefactor.into());
            diagnostics.insert("s".into(), est.saddle.s.into());
            diagnostics.insert("alpha".into(), est.saddle.alpha.into());
            diagnostics.insert("k".into(), est.saddle.k.clone().into());
            diagnostics.insert(
                "max_stationarity_residual".into(),
                est.saddle.max_stationarity_residual().into(),
            );
            diagnostics.insert("constraint_residual".into(), est.saddle.constraint_residual.into());
            diagnostics.insert("iterations".into(), est.saddle.iterations.into());
            est.log_p.ln()
        }
        Method::Expansion1 | Method::Expansion2 | Method::Expansion3 => {
            let (a, b) = two_rates(model, method)?;
            let order = match method {
                Method::Expansion1 => 1,
                Method::Expansion2 => 2,
                _ => 3,
            };
            diagnostics.insert("order".into(), order.into());
            expansion_log_tail(a, b, n, order)?
        }
        Method::Coarse => {
            let (a, b) = two_rates(model, method)?;
            diagnostics.insert("order".into(), 2.into());
            coarse_log_tail(a, b, n)?
        }
        Method::HeuristicM => heuristic_two_term_m(model, n)?,
        Method::Mc => {
            let est = mc_tail(model, n, opts.samples, opts.seed)?;
            diagnostics = to_map(&est);
            est.p_hat.ln()
        }
    };
    Ok(Evaluation { log_p, diagnostics })
}

/// Flat record `{method, m, n, log_p, p, ...diagnostics}`.
pub fn tail_record(method: Method, model: &PoissonModel, n: u64, eval: &Evaluation) -> Map<String, Value> {
    let mut rec = Map::new();
    rec.insert("method".into(), method.as_str().into());
    rec.insert("m".into(), model.dim().into());
    rec.insert("n".into(), n.into());
    rec.insert("log_p".into(), eval.log_p.into());
    rec.insert("p".into(), eval.log_p.exp().into());
    for (k, v) in &eval.diagnostics {
        rec.insert(k.clone(), v.clone());
    }
    rec
}

/// Flat record `{m, n, lambdas, ...fields of value}` for the non-tail
/// commands (saddle, regions, truncation gap).
pub fn model_record<T: Serialize>(model: &PoissonModel, n: u64, value: &T) -> Map<String, Value> {
    let mut rec = Map::new();
    rec.insert("m".into(), model.dim().into());
    rec.insert("n".into(), n.into());
    rec.insert("lambdas".into(), model.lambdas().to_vec().into());
    for (k, v) in to_map(value) {
        if k != "n" {
            rec.insert(k, v);
        }
    }
    rec
}

/// Machine-readable error record.
pub fn error_record(err: &Error) -> Map<String, Value> {
    let mut rec = Map::new();
    rec.insert("error".into(), err.kind().into());
    rec.insert("message".into(), err.to_string().into());
    rec
}

/// Flat JSON objects serialize in insertion order, one per line.
pub fn json_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("record serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::InvalidArgument(format!("unknown format {s:?}"))),
        }
    }
}

/// A multi-method sweep over a threshold grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub model: PoissonModel,
    pub n_values: Vec<u64>,
    pub methods: Vec<Method>,
    pub options: MethodOptions,
    pub output_path: Option<std::path::PathBuf>,
    pub format: Format,
}

impl SweepSpec {
    pub fn new(model: PoissonModel, grid: &NGrid, methods: Vec<Method>) -> Result<Self> {
        if methods.is_empty() {
            return Err(Error::InvalidArgument("a sweep needs at least one method".into()));
        }
        Ok(SweepSpec {
            model,
            n_values: grid.resolve()?,
            methods,
            options: MethodOptions::default(),
            output_path: None,
            format: Format::Csv,
        })
    }

    /// Columns `n, log_p_<method>...`, method names with `-` mapped to `_`.
    pub fn run(&self) -> Table {
        let header: Vec<String> = std::iter::once("n".to_owned())
            .chain(self.methods.iter().map(|m| format!("log_p_{}", m.as_str().replace('-', "_"))))
            .collect();
        let rows = self
            .n_values
            .par_iter()
            .map(|&n| {
                let mut cells = vec![Cell::Int(n)];
                let mut errors = Vec::new();
                for &method in &self.methods {
                    match evaluate(method, &self.model, n, &self.options) {
                        Ok(e) => cells.push(Cell::Num(e.log_p)),
                        Err(e) => {
                            cells.push(Cell::Empty);
                            errors.push(format!("{method}: {e}"));
                        }
                    }
                }
                let err = (!errors.is_empty()).then(|| errors.join("; "));
                (cells, err)
            })
            .collect();
        Table { header, rows }
    }
}

fn run_rows<F>(n_values: &[u64], header: &[&str], row: F) -> Table
where
    F: Fn(u64) -> Result<Vec<Cell>> + Sync,
{
    let rows = n_values
        .par_iter()
        .map(|&n| match row(n) {
            Ok(cells) => (cells, None),
            Err(e) => {
                let mut cells = vec![Cell::Int(n)];
                cells.resize(header.len(), Cell::Empty);
                (cells, Some(e.to_string()))
            }
        })
        .collect();
    Table {
        header: header.iter().map(|s| s.to_string()).collect(),
        rows,
    }
}

/// Exact log-tail against the Laplace estimate:
/// `n,log_p_exact,log_p_laplace,abs_gap`.
pub fn figure1(model: &PoissonModel, n_values: &[u64], opts: &MethodOptions) -> Table {
    run_rows(
        n_values,
        &["n", "log_p_exact", "log_p_laplace", "abs_gap"],
        |n| {
            let exact = exact_tail_m(model, n, opts.rel_tol)?.ln();
            let lap = laplace_tail(model, n, opts.variant, opts.prefactor)?.log_p.ln();
            Ok(vec![
                Cell::Int(n),
                Cell::Num(exact),
                Cell::Num(lap),
                Cell::Num((lap - exact).abs()),
            ])
        },
    )
}

/// Exact log-tail against the one-, two- and three-term expansions:
/// `n,log_p_exact,L1,L2,L3`.
pub fn figure2(model: &PoissonModel, n_values: &[u64], opts: &MethodOptions) -> Result<Table> {
    let (a, b) = two_rates(model, Method::Expansion1)?;
    Ok(run_rows(
        n_values,
        &["n", "log_p_exact", "L1", "L2", "L3"],
        |n| {
            let exact = exact_tail_m(model, n, opts.rel_tol)?.ln();
            let mut cells = vec![Cell::Int(n), Cell::Num(exact)];
            for order in 1..=3 {
                cells.push(Cell::Num(expansion_log_tail(a, b, n, order)?));
            }
            Ok(cells)
        },
    ))
}

/// Laplace log-tail for equal rates across dimensions: `m,n,log_p_laplace`,
/// ordered by `n` then `m`.
pub fn figure3(lambda: f64, dims: &[usize], n_values: &[u64], opts: &MethodOptions) -> Result<Table> {
    let models = dims
        .iter()
        .map(|&m| PoissonModel::equal(lambda, m))
        .collect::<Result<Vec<_>>>()?;
    let header = ["m", "n", "log_p_laplace"];
    let points: Vec<(usize, u64)> = n_values
        .iter()
        .flat_map(|&n| (0..models.len()).map(move |i| (i, n)))
        .collect();
    let rows = points
        .par_iter()
        .map(|&(i, n)| {
            let m = Cell::Int(models[i].dim() as u64);
            match laplace_tail(&models[i], n, opts.variant, opts.prefactor) {
                Ok(est) => (vec![m, Cell::Int(n), Cell::Num(est.log_p.ln())], None),
                Err(e) => (vec![m, Cell::Int(n), Cell::Empty], Some(e.to_string())),
            }
        })
        .collect();
    Ok(Table {
        header: header.iter().map(|s| s.to_string()).collect(),
        rows,
    })
}

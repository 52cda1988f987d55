//! Scalar special functions: Lambert W, log-factorial, Poisson log-pmf and
//! log-survival, the Chernoff bound and stable log-sum-exp.
//!
//! Everything here is a pure function; the only shared state is the
//! log-factorial table, built once behind a `OnceLock`.

mod factorial;
mod lambert;
mod logsum;
mod poisson;

pub use factorial::{log_factorial, STIRLING_CROSSOVER};
pub use lambert::{lambert_w0, lambert_w0_asymptotic, BRANCH_POINT};
pub use logsum::{log1m_exp, log_sum_exp, LogAccumulator};
pub use poisson::{chernoff_log_bound, log_poisson_pmf, log_poisson_sf};

//! Tail probabilities `P(X_1 X_2 ... X_m >= n)` for independent Poisson
//! variables, computed exactly, by a constrained Laplace estimate, by
//! closed-form expansions, and by seeded Monte Carlo. All probabilities are
//! natural logs, so thresholds whose tail is far below `f64::MIN_POSITIVE`
//! are routine.
//!
//! ```
//! use poisson_product_tail::exact::{exact_tail_m, DEFAULT_REL_TOL};
//! use poisson_product_tail::laplace::{laplace_tail, PrefactorMode};
//! use poisson_product_tail::saddle::Variant;
//! use poisson_product_tail::PoissonModel;
//!
//! let model = PoissonModel::pair(2.0, 3.0)?;
//! let exact = exact_tail_m(&model, 10_000, DEFAULT_REL_TOL)?;
//! let approx = laplace_tail(&model, 10_000, Variant::Refined, PrefactorMode::ExactHessian)?;
//! assert!((approx.log_p.ln() - exact.ln()).abs() < 0.01 * exact.ln().abs());
//! # Ok::<(), poisson_product_tail::Error>(())
//! ```
//!
//! The `ppt` binary wraps every computation and writes comparison tables as
//! CSV or JSON; see [`harness`].

pub mod error;
pub mod exact;
pub mod expansions;
pub mod harness;
pub mod laplace;
pub mod logprob;
pub mod model;
pub mod montecarlo;
pub mod roots;
pub mod saddle;
pub mod special;

pub use error::{Error, Result};
pub use logprob::LogProb;
pub use model::PoissonModel;

// Keep the guide's code samples compiling.
macro_rules! book_chapters {
    ($($name:ident => $file:literal),* $(,)?) => {
        $(
            #[cfg(doctest)]
            #[doc = include_str!(concat!("../../../book/src/", $file))]
            mod $name {}
        )*
    };
}

book_chapters! {
    book_introduction => "introduction.md",
    book_special_functions => "special-functions.md",
    book_exact_tail => "exact-tail.md",
    book_saddle_point => "saddle-point.md",
    book_laplace => "laplace.md",
    book_expansions => "expansions.md",
    book_monte_carlo => "monte-carlo.md",
    book_cli => "cli.md",
}

use std::process::{Command, Output};

use poisson_product_tail::exact::{exact_tail_m, DEFAULT_REL_TOL};
use poisson_product_tail::laplace::{laplace_tail, PrefactorMode};
use poisson_product_tail::saddle::Variant;
use poisson_product_tail::special::log_poisson_sf;
use poisson_product_tail::PoissonModel;
use serde_json::Value;

fn ppt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn record(args: &[&str]) -> serde_json::Map<String, Value> {
    let out = ppt(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    match serde_json::from_slice(&out.stdout).unwrap() {
        Value::Object(map) => map,
        other => panic!("not an object: {other}"),
    }
}

fn f(rec: &serde_json::Map<String, Value>, key: &str) -> f64 {
    rec[key].as_f64().unwrap_or_else(|| panic!("{key} missing"))
}

#[test]
fn tail_at_one_is_product_of_nonzero_masses() {
    let rec = record(&["tail", "--lambdas", "2,3", "--n", "1", "--method", "exact"]);
    let want = (-(-2f64).exp()).ln_1p() + (-(-3f64).exp()).ln_1p();
    assert!((f(&rec, "log_p") - want).abs() < 1e-14);
    let keys: Vec<&str> = rec.keys().take(5).map(String::as_str).collect();
    assert_eq!(keys, ["method", "m", "n", "log_p", "p"]);
}

#[test]
fn laplace_record_equals_library_call() {
    let rec = record(&["tail", "--lambdas", "2,3", "--n", "500", "--method", "laplace"]);
    let model = PoissonModel::pair(2.0, 3.0).unwrap();
    let est = laplace_tail(&model, 500, Variant::Refined, PrefactorMode::ExactHessian).unwrap();
    assert_eq!(f(&rec, "log_p"), est.log_p.ln());
    assert_eq!(f(&rec, "t_at_saddle"), est.t_at_saddle);
    assert_eq!(f(&rec, "log_prefactor"), est.log_prefactor);
}

#[test]
fn single_factor_is_poisson_survival() {
    let rec = record(&["tail", "--lambdas", "2", "--n", "5", "--method", "exact"]);
    assert_eq!(f(&rec, "log_p"), log_poisson_sf(5, 2.0).ln());
    // Independent check: 1 - sum_{k<5} e^-2 2^k / k!.
    let mut term = (-2f64).exp();
    let mut cdf = 0.0;
    for k in 0..5 {
        cdf += term;
        term *= 2.0 / (k + 1) as f64;
    }
    assert!((f(&rec, "log_p") - (1.0 - cdf).ln()).abs() < 1e-12);
}

#[test]
fn exact_record_equals_library_call() {
    let rec = record(&["tail", "--lambdas", "2,3,4", "--n", "300"]);
    let model = PoissonModel::new(vec![2.0, 3.0, 4.0]).unwrap();
    assert_eq!(f(&rec, "log_p"), exact_tail_m(&model, 300, DEFAULT_REL_TOL).unwrap().ln());
}

#[test]
fn symmetric_saddle() {
    let rec = record(&["saddle", "--lambdas", "2,2", "--n", "10000"]);
    let k: Vec<f64> = rec["k"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    for v in k {
        assert!((v - 100.0).abs() < 1e-10);
    }
}

#[test]
fn saddle_residuals_reported() {
    let rec = record(&["saddle", "--lambdas", "2,3", "--n", "1000"]);
    for r in rec["stationarity_residuals"].as_array().unwrap() {
        assert!(r.as_f64().unwrap() <= 1e-10);
    }
    assert!(f(&rec, "constraint_residual") <= 1e-12);
}

#[test]
fn saddle_below_domain_exits_one_with_record() {
    let out = ppt(&["saddle", "--lambdas", "2,3", "--n", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let rec: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rec["error"], "domain");
    assert!(rec["message"].as_str().unwrap().contains("n = 1"));
}

#[test]
fn regions_record() {
    let rec = record(&["regions", "--lambdas", "2,3", "--n", "10000"]);
    for key in ["log_ub_r1", "log_ub_r2", "log_lb_r3", "log_ratio"] {
        assert!(f(&rec, key).is_finite(), "{key}");
    }
    assert!(f(&rec, "log_ratio") < 0.0);
}

#[test]
fn symmetric_truncation_gap_is_zero() {
    let rec = record(&["truncation-gap", "--lambdas", "2,2", "--n", "10000"]);
    assert_eq!(f(&rec, "delta_t"), 0.0);
}

#[test]
fn mc_is_byte_identical() {
    let args = ["mc", "--lambdas", "2,3", "--n", "10", "--samples", "1000000", "--seed", "42"];
    let (a, b) = (ppt(&args), ppt(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let other = ppt(&["mc", "--lambdas", "2,3", "--n", "10", "--samples", "1000000", "--seed", "43"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn usage_errors_exit_two() {
    let cases: &[&[&str]] = &[
        &["tail", "--lambdas", "2,-3", "--n", "5"],
        &["tail", "--lambdas", "2,3", "--n", "0"],
        &["tail", "--lambdas", "2,3", "--n", "5", "--method", "bogus"],
        &["mc", "--lambdas", "2,3", "--n", "5"],
        &["regions", "--lambdas", "2,3,4", "--n", "100"],
        &["tail", "--lambdas", "2,3,4", "--n", "100", "--method", "expansion-2"],
        &["figure1", "--n-min", "500", "--n-max", "100"],
        &["nonsense"],
    ];
    for args in cases {
        assert_eq!(ppt(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn bad_thread_count_is_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_ppt"))
        .args(["tail", "--lambdas", "2,3", "--n", "5"])
        .env("PPT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn figure_headers() {
    let cases: &[(&[&str], &str)] = &[
        (&["figure1", "--points", "3"], "n,log_p_exact,log_p_laplace,abs_gap"),
        (&["figure2", "--points", "3"], "n,log_p_exact,L1,L2,L3"),
        (&["figure3", "--points", "3"], "m,n,log_p_laplace"),
    ];
    for (args, header) in cases {
        let out = ppt(args);
        assert!(out.status.success());
        let text = String::from_utf8(out.stdout).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(*header));
        let rows = lines.count();
        assert_eq!(rows, if header.starts_with('m') { 12 } else { 3 });
    }
}

#[test]
fn figure_rows_match_library_values() {
    let out = ppt(&["figure1", "--n-values", "100,1000"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let model = PoissonModel::pair(2.0, 3.0).unwrap();
    for (line, n) in text.lines().skip(1).zip([100u64, 1000]) {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells[0], n as f64);
        assert_eq!(cells[1], exact_tail_m(&model, n, DEFAULT_REL_TOL).unwrap().ln());
        let lap = laplace_tail(&model, n, Variant::Refined, PrefactorMode::ExactHessian).unwrap();
        assert_eq!(cells[2], lap.log_p.ln());
    }
}

#[test]
fn figure_partial_failure_keeps_exit_zero() {
    // Laplace has no saddle at n = 1, so that row fails and the rest succeed.
    let out = ppt(&["figure1", "--n-values", "1,100"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("n,log_p_exact,log_p_laplace,abs_gap,error\n1,,,,"));

    let out = ppt(&["figure1", "--n-values", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("ppt-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("fig2.json");
    let out = ppt(&["figure2", "--points", "2", "--format", "json", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let rows: Vec<Value> = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["n"], 100);
    std::fs::remove_dir_all(dir).unwrap();
}

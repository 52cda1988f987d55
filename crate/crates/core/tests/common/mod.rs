#![allow(dead_code)]

use poisson_product_tail::exact::{brute_force_omitted_mass, brute_force_tail, minimal_brute_force_cap};
use poisson_product_tail::expansions::RegionBounds;
use poisson_product_tail::{LogProb, PoissonModel};

/// Brute-force tail with the cap grown until the bound on the mass outside
/// the box is below `1e-13` of the sum found inside it. The library's minimal
/// cap only bounds the omitted mass absolutely, which is too loose once the
/// tail itself is tiny.
pub fn certified_brute_force(model: &PoissonModel, n: u64) -> LogProb {
    let mut cap = minimal_brute_force_cap(model);
    loop {
        let tail = brute_force_tail(model, n, cap).unwrap();
        if brute_force_omitted_mass(model, cap) <= 1e-13 * tail.prob() {
            return tail;
        }
        cap += cap / 4 + 1;
    }
}

/// Poisson pmf by the textbook recurrence, in plain floating point.
pub fn pmf_table(lambda: f64, cap: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(cap + 1);
    let mut p = (-lambda).exp();
    for k in 0..=cap {
        out.push(p);
        p *= lambda / (k + 1) as f64;
    }
    out
}

/// The three region masses `(R1, R2, R3)` of `{k l >= n}` by direct
/// enumeration of the box `[0, cap]^2`.
pub fn region_sums(lambda1: f64, lambda2: f64, n: u64, rb: &RegionBounds, cap: usize) -> (f64, f64, f64) {
    let p1 = pmf_table(lambda1, cap);
    let p2 = pmf_table(lambda2, cap);
    let (mut r1, mut r2, mut r3) = (0.0, 0.0, 0.0);
    for (k, pk) in p1.iter().enumerate() {
        for (l, pl) in p2.iter().enumerate() {
            if (k * l) as u64 >= n {
                let mass = pk * pl;
                if (k as f64) <= rb.a_n {
                    r1 += mass;
                } else if (l as f64) <= rb.a_n {
                    r2 += mass;
                } else {
                    r3 += mass;
                }
            }
        }
    }
    (r1, r2, r3)
}

/// Saddle point by damped Newton on `k_i ln(k_i/l_i) = k_1 ln(k_1/l_1)` for
/// every `i` together with `sum ln k_i = ln n`.
pub fn newton_saddle(lambdas: &[f64], n: f64, start: &[f64]) -> Vec<f64> {
    let m = lambdas.len();
    let mut k = start.to_vec();
    for _ in 0..500 {
        let (f, jac) = system(lambdas, n, &k);
        let step = solve_dense(jac, f.iter().map(|v| -v).collect());
        let mut t = 1.0;
        let norm0: f64 = f.iter().map(|v| v * v).sum();
        loop {
            let trial: Vec<f64> = k.iter().zip(&step).map(|(a, d)| a + t * d).collect();
            if trial.iter().all(|&v| v > 0.0) {
                let (ft, _) = system(lambdas, n, &trial);
                let norm: f64 = ft.iter().map(|v| v * v).sum();
                if norm < norm0 || t < 1e-12 {
                    k = trial;
                    break;
                }
            }
            t *= 0.5;
        }
        if step.iter().zip(&k).all(|(d, v)| (t * d).abs() <= 1e-15 * v) {
            break;
        }
    }
    assert_eq!(k.len(), m);
    k
}

fn system(lambdas: &[f64], n: f64, k: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let m = lambdas.len();
    let h = |i: usize| k[i] * (k[i] / lambdas[i]).ln();
    let dh = |i: usize| (k[i] / lambdas[i]).ln() + 1.0;
    let mut f = vec![0.0; m];
    let mut jac = vec![vec![0.0; m]; m];
    for i in 1..m {
        f[i - 1] = h(i) - h(0);
        jac[i - 1][i] = dh(i);
        jac[i - 1][0] = -dh(0);
    }
    f[m - 1] = k.iter().map(|v| v.ln()).sum::<f64>() - n.ln();
    for j in 0..m {
        jac[m - 1][j] = 1.0 / k[j];
    }
    (f, jac)
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let m = b.len();
    for c in 0..m {
        let p = (c..m)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..m {
            let f = a[r][c] / a[c][c];
            for j in c..m {
                a[r][j] -= f * a[c][j];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; m];
    for r in (0..m).rev() {
        let s: f64 = (r + 1..m).map(|j| a[r][j] * x[j]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

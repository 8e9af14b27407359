//! Floating-point product formula for an orthogonal basis on `T^{k-1}`:
//!
//! ```text
//! P_n(y) = prod_j R_j^{n_j} p_{n_j}^{(a_j, gamma_j)}(2 y_j / R_j - 1),
//! R_j = 1 - sum_{l<j} y_l,
//! a_j = 2 sum_{l>j} n_l + sum_{l>j} (gamma_l + 1) - 1     (l runs up to k),
//! ```
//!
//! with `p^{(a,b)}` the Jacobi polynomial for `(1 - x)^a (1 + x)^b`. Each
//! factor is evaluated as a homogeneous polynomial in `(y_j, R_j)`, so
//! points on faces are handled without division.

use statrs::function::gamma::ln_gamma;

use super::GammaWeights;

/// `R^n p_n^{(a,b)}(2y/R - 1)` by the three-term recurrence.
fn homogeneous_jacobi(n: u32, a: f64, b: f64, y: f64, r: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let x = 2.0 * y - r;
    let ab = a + b;
    let mut prev = 1.0;
    let mut cur = (a + 1.0) * r + 0.5 * (ab + 2.0) * (x - r);
    for m in 1..n {
        let m = m as f64;
        let s = 2.0 * m + ab;
        let c1 = (s + 1.0) * ((s + 2.0) * s * x + (a * a - b * b) * r);
        let c2 = 2.0 * (m + a) * (m + b) * (s + 2.0) * r * r;
        let d = 2.0 * (m + 1.0) * (m + ab + 1.0) * s;
        let next = (c1 * cur - c2 * prev) / d;
        prev = cur;
        cur = next;
    }
    cur
}

/// The Jacobi polynomial `p_n^{(a,b)}(x)` on `[-1, 1]`.
pub fn jacobi_p(n: u32, a: f64, b: f64, x: f64) -> f64 {
    homogeneous_jacobi(n, a, b, 0.5 * (x + 1.0), 1.0)
}

fn tail_parameters(n: &[u32], gamma: &[f64]) -> Vec<f64> {
    let d = n.len();
    (0..d)
        .map(|j| {
            let higher: u32 = n[j + 1..].iter().sum();
            let rest: f64 = gamma[j + 1..].iter().map(|g| g + 1.0).sum();
            2.0 * higher as f64 + rest - 1.0
        })
        .collect()
}

/// `P_n(y)`.
pub fn product_jacobi(n: &[u32], gw: &GammaWeights, y: &[f64]) -> f64 {
    let g = gw.gamma();
    let a = tail_parameters(n, g);
    let mut r = 1.0;
    let mut out = 1.0;
    for j in 0..n.len() {
        out *= homogeneous_jacobi(n[j], a[j], g[j], y[j], r);
        r -= y[j];
    }
    out
}

fn ln_h(n: u32, a: f64, b: f64) -> f64 {
    let nf = n as f64;
    if n == 0 {
        return ln_gamma(a + 1.0) + ln_gamma(b + 1.0) - ln_gamma(a + b + 2.0);
    }
    ln_gamma(nf + a + 1.0) + ln_gamma(nf + b + 1.0) - (2.0 * nf + a + b + 1.0).ln() - ln_gamma(nf + 1.0) - ln_gamma(nf + a + b + 1.0)
}

/// `<P_n, P_n>_gamma` in closed form.
pub fn product_jacobi_norm_sq(n: &[u32], gw: &GammaWeights) -> f64 {
    let g = gw.gamma();
    let a = tail_parameters(n, g);
    let log: f64 = (0..n.len()).map(|j| ln_h(n[j], a[j], g[j])).sum();
    (log + gw.ln_normalizer()).exp()
}

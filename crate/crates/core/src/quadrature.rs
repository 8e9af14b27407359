//! Numerical integration: Gauss–Jacobi rules, product rules for Dirichlet
//! weights on `T^{k-1}` and adaptive Gauss–Kronrod.

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::beta::ln_beta;

/// Nodes and weights of a one-dimensional rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }
}

/// `n`-point Gauss–Jacobi rule for `(1 - x)^a (1 + x)^b` on `[-1, 1]`,
/// by Golub–Welsch.
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> Rule {
    assert!(n >= 1 && a > -1.0 && b > -1.0, "invalid Gauss-Jacobi request");
    let ab = a + b;
    let diag: Vec<f64> = (0..n)
        .map(|j| {
            if j == 0 {
                (b - a) / (ab + 2.0)
            } else {
                let j = j as f64;
                (b * b - a * a) / ((2.0 * j + ab) * (2.0 * j + ab + 2.0))
            }
        })
        .collect();
    let off: Vec<f64> = (1..n)
        .map(|j| {
            let beta_j = if j == 1 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                let j = j as f64;
                let s = 2.0 * j + ab;
                4.0 * j * (j + a) * (j + b) * (j + ab) / (s * s * (s + 1.0) * (s - 1.0))
            };
            beta_j.sqrt()
        })
        .collect();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = diag[i];
        if i + 1 < n {
            m[(i, i + 1)] = off[i];
            m[(i + 1, i)] = off[i];
        }
    }
    let mu0 = ((ab + 1.0) * std::f64::consts::LN_2 + ln_beta(a + 1.0, b + 1.0)).exp();
    let eig = SymmetricEigen::new(m);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    Rule { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() }
}

/// `n`-point rule for the probability density of `Beta(a + 1, b + 1)` on
/// `[0, 1]`, i.e. weight `x^a (1 - x)^b / B(a + 1, b + 1)`.
pub fn gauss_beta(n: usize, a: f64, b: f64) -> Rule {
    let r = gauss_jacobi(n, b, a);
    let total: f64 = r.weights.iter().sum();
    Rule {
        nodes: r.nodes.iter().map(|t| 0.5 * (1.0 + t)).collect(),
        weights: r.weights.iter().map(|w| w / total).collect(),
    }
}

/// Tensor rule for expectations under the Dirichlet law on `T^{k-1}` with
/// density proportional to `prod_{i<k} y_i^{gamma_i} (1 - |y|)^{gamma_k}`.
///
/// Built by stick-breaking: `y_l = u_l prod_{j<l} (1 - u_j)` with independent
/// `u_l ~ Beta(gamma_l + 1, sum_{j>l} (gamma_j + 1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexRule {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SimplexRule {
    pub fn new(gamma: &[f64], n: usize) -> Self {
        let d = gamma.len() - 1;
        let factors: Vec<Rule> = (0..d)
            .map(|l| {
                let tail: f64 = gamma[l + 1..].iter().map(|g| g + 1.0).sum::<f64>() - 1.0;
                gauss_beta(n, gamma[l], tail)
            })
            .collect();
        let mut nodes = Vec::with_capacity(n.pow(d as u32));
        let mut weights = Vec::with_capacity(n.pow(d as u32));
        let mut idx = vec![0usize; d];
        loop {
            let mut y = Vec::with_capacity(d);
            let mut rest = 1.0;
            let mut w = 1.0;
            for l in 0..d {
                let u = factors[l].nodes[idx[l]];
                y.push(rest * u);
                rest *= 1.0 - u;
                w *= factors[l].weights[idx[l]];
            }
            nodes.push(y);
            weights.push(w);
            let mut l = 0;
            while l < d {
                idx[l] += 1;
                if idx[l] < n {
                    break;
                }
                idx[l] = 0;
                l += 1;
            }
            if l == d {
                break;
            }
        }
        Self { nodes, weights }
    }

    /// `E[f(Y)]` for `Y` Dirichlet.
    pub fn expect<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(y, w)| w * f(y)).sum()
    }
}

const GK_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = GK_WK[7] * fc;
    let mut g = GK_WG[3] * fc;
    for i in 0..7 {
        let dx = h * GK_X[i];
        let s = f(c - dx) + f(c + dx);
        k += GK_WK[i] * s;
        if i % 2 == 1 {
            g += GK_WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

/// Globally adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// Intervals with the largest error estimate are bisected until the total
/// estimate is below `max(abs_tol, rel_tol |value|)` or `max_intervals` is
/// reached. The integrand is never evaluated at the endpoints.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64, max_intervals: usize) -> Integral {
    if a == b {
        return Integral { value: 0.0, error: 0.0 };
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let (v, e) = gk15(&mut f, lo, hi);
    let mut parts = vec![(lo, hi, v, e)];
    loop {
        let value: f64 = parts.iter().map(|p| p.2).sum();
        let error: f64 = parts.iter().map(|p| p.3).sum();
        if error <= abs_tol.max(rel_tol * value.abs()) || parts.len() >= max_intervals || !error.is_finite() {
            return Integral { value: sign * value, error };
        }
        let (worst, _) = parts
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (l, r, _, _) = parts.swap_remove(worst);
        let m = 0.5 * (l + r);
        if m <= l || m >= r {
            return Integral { value: sign * value, error };
        }
        let (v1, e1) = gk15(&mut f, l, m);
        let (v2, e2) = gk15(&mut f, m, r);
        parts.push((l, m, v1, e1));
        parts.push((m, r, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_matches_known_nodes() {
        let r = gauss_jacobi(3, 0.0, 0.0);
        let x = (0.6f64).sqrt();
        assert!((r.nodes[0] + x).abs() < 1e-14 && r.nodes[1].abs() < 1e-14 && (r.nodes[2] - x).abs() < 1e-14);
        assert!((r.weights[0] - 5.0 / 9.0).abs() < 1e-14 && (r.weights[1] - 8.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn odd_rules_with_unequal_exponents_reproduce_moments() {
        // E[x] under (1-x)^a (1+x)^b on [-1,1] is (b - a) / (a + b + 2).
        for n in [1, 3, 5, 7] {
            for (a, b) in [(0.5, -0.5), (2.0, 0.0), (-0.3, 1.7)] {
                let r = gauss_jacobi(n, a, b);
                let mass: f64 = r.weights.iter().sum();
                let mean = r.integrate(|x| x) / mass;
                assert!((mean - (b - a) / (a + b + 2.0)).abs() < 1e-13, "n={n} a={a} b={b}");
            }
        }
    }

    #[test]
    fn beta_rule_is_exact_for_polynomials() {
        // E[x^m] for Beta(p, q) is prod_{j<m} (p + j) / (p + q + j).
        let (a, b) = (0.3, -0.6);
        let r = gauss_beta(6, a, b);
        for m in 0..12 {
            let exact: f64 = (0..m).map(|j| (a + 1.0 + j as f64) / (a + b + 2.0 + j as f64)).product();
            assert!((r.integrate(|x| x.powi(m)) - exact).abs() < 1e-14, "m={m}");
        }
    }

    #[test]
    fn simplex_rule_reproduces_dirichlet_moments() {
        let g = [0.2, -0.5, 1.0];
        let r = SimplexRule::new(&g, 8);
        assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let s: f64 = g.iter().map(|v| v + 1.0).sum();
        let e_y1y2 = (g[0] + 1.0) * (g[1] + 1.0) / (s * (s + 1.0));
        assert!((r.expect(|y| y[0] * y[1]) - e_y1y2).abs() < 1e-14);
        let e_last2 = (g[2] + 1.0) * (g[2] + 2.0) / (s * (s + 1.0));
        assert!((r.expect(|y| (1.0 - y[0] - y[1]).powi(2)) - e_last2).abs() < 1e-14);
        let four = SimplexRule::new(&[0.0, 1.0, 0.5, 2.0, -0.2], 4);
        assert_eq!(four.nodes.len(), 256);
        assert!((four.expect(|y| y[3]) - 3.0 / 8.3).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let r = integrate(|t| t.powf(-0.6), 0.0, 1.0, 1e-12, 1e-12, 2000);
        assert!((r.value - 2.5).abs() < 1e-9, "{:?}", r);
        let r = integrate(|t| (-t * t).exp(), -3.0, 5.0, 1e-14, 1e-14, 100);
        let exact = std::f64::consts::PI.sqrt() * 0.5 * (statrs::function::erf::erf(5.0) + statrs::function::erf::erf(3.0));
        assert!((r.value - exact).abs() < 1e-13);
        assert_eq!(integrate(|t| t, 1.0, 0.0, 1e-14, 0.0, 10).value, -0.5);
    }
}

//! Orthogonal polynomials on `T^{k-1}` for the Dirichlet weight, the
//! operator `L_gamma` they diagonalize, and the spectral description of the
//! Wright–Fisher transition density.
//!
//! With `gamma_i = 2 (b/alpha) p_i - 1` the stationary law of the first
//! `k - 1` coordinates is
//! `pi_gamma(y) = prod_{i<k} y_i^{gamma_i} (1 - |y|)^{gamma_k} / B(gamma + 1)`
//! and the generator of the diffusion is `L_gamma / 2`, where
//!
//! ```text
//! L_gamma f = sum_i (gamma_i + 1 - (|gamma| + k) y_i) d_i f
//!           + sum_i y_i (1 - y_i) d_ii f - 2 sum_{i<j} y_i y_j d_ij f.
//! ```
//!
//! Every orthogonal polynomial of degree `n` is an eigenfunction with
//! eigenvalue `-lambda_n`, `lambda_n = n (n + |gamma| + k - 1) = 2 nu_n`.

mod bases;
mod forward;
mod poly;
mod product;
mod spectral;

pub use bases::{basis_jacobi, basis_monic, basis_rodrigues, inner_product, moment, BasisTable, JacobiPolynomial, MAX_BASIS_DEGREE, MAX_BASIS_DIM};
pub use forward::{forward_equation_residual, interior_grid, EigenMode, SpaceTimeDensity, StationaryDensity};
pub use poly::{one_minus_sum_pow, Coeff, Exponent, MultiIndexPolynomial};
pub use product::{jacobi_p, product_jacobi, product_jacobi_norm_sq};
pub use spectral::{transition_density, SpectralDensity, TransitionDensity};

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};
use crate::simplex::TPoint;
use crate::wf::WfParams;

/// Exponents `gamma_1, ..., gamma_k` of the Dirichlet weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaWeights {
    gamma: Vec<f64>,
}

impl GammaWeights {
    pub fn new(gamma: Vec<f64>) -> Result<Self> {
        if gamma.len() < 2 {
            return Err(Error::TooFewColors(gamma.len()));
        }
        if let Some(i) = gamma.iter().position(|g| !(*g > -1.0) || !g.is_finite()) {
            return Err(invalid("gamma", format!("gamma_{} = {} must exceed -1", i + 1, gamma[i])));
        }
        Ok(Self { gamma })
    }

    /// `gamma_i = 2 (b/alpha) p_i - 1`.
    pub fn from_wf(params: &WfParams) -> Self {
        let c = 2.0 * params.rate();
        Self { gamma: params.p().as_slice().iter().map(|p| c * p - 1.0).collect() }
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn k(&self) -> usize {
        self.gamma.len()
    }

    /// Dimension `k - 1` of `T^{k-1}`.
    pub fn dim(&self) -> usize {
        self.gamma.len() - 1
    }

    pub fn sum(&self) -> f64 {
        self.gamma.iter().sum()
    }

    /// Exponents as the simplest rationals within a few ulps, the values
    /// used by every exact computation.
    pub fn exact(&self) -> Vec<BigRational> {
        self.gamma.iter().map(|g| <BigRational as Coeff>::from_f64(*g)).collect()
    }

    /// `ln(1 / B(gamma + 1))`.
    pub fn ln_normalizer(&self) -> f64 {
        let s: f64 = self.gamma.iter().map(|g| g + 1.0).sum();
        ln_gamma(s) - self.gamma.iter().map(|g| ln_gamma(g + 1.0)).sum::<f64>()
    }
}

/// `pi_gamma(y)`, computed in log space. Returns `+inf` on a face where the
/// corresponding exponent is negative and `0` where it is positive.
pub fn dirichlet_density(gw: &GammaWeights, y: &TPoint) -> Result<f64> {
    if y.dim() != gw.dim() {
        return Err(Error::LengthMismatch { b: gw.dim(), b0: y.dim() });
    }
    Ok(density_unchecked(gw, y.as_slice()))
}

pub(crate) fn density_unchecked(gw: &GammaWeights, y: &[f64]) -> f64 {
    let last = 1.0 - y.iter().sum::<f64>();
    let mut log = gw.ln_normalizer();
    for (v, g) in y.iter().chain(std::iter::once(&last)).zip(&gw.gamma) {
        let v = v.max(0.0);
        if *g == 0.0 {
            continue;
        }
        if v == 0.0 {
            return if *g < 0.0 { f64::INFINITY } else { 0.0 };
        }
        log += g * v.ln();
    }
    log.exp()
}

/// `nu_n = n (n + 2 b / alpha - 1) / 2`, the decay rate of degree-`n` modes.
pub fn eigenvalue_nu(n: u32, params: &WfParams) -> f64 {
    let n = n as f64;
    n * (n + 2.0 * params.rate() - 1.0) / 2.0
}

/// `lambda_n = n (n + |gamma| + k - 1)`, the eigenvalue of `-L_gamma`.
pub fn eigenvalue_lambda(n: u32, gw: &GammaWeights) -> f64 {
    let n = n as f64;
    n * (n + gw.sum() + gw.k() as f64 - 1.0)
}

/// All multi-indices of length `dim` and total degree `n`, in decreasing
/// lexicographic order.
pub fn multi_indices(dim: usize, n: u32) -> Vec<Exponent> {
    fn rec(dim: usize, n: u32, prefix: &mut Vec<u32>, out: &mut Vec<Exponent>) {
        if prefix.len() + 1 == dim {
            prefix.push(n);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=n).rev() {
            prefix.push(first);
            rec(dim, n - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if dim == 0 {
        return out;
    }
    rec(dim, n, &mut Vec::with_capacity(dim), &mut out);
    out
}

/// `L_gamma f`, by exact symbolic differentiation.
pub fn apply_generator<C: Coeff>(f: &MultiIndexPolynomial<C>, gw: &GammaWeights) -> Result<MultiIndexPolynomial<C>> {
    let d = f.dim();
    if d != gw.dim() {
        return Err(Error::LengthMismatch { b: gw.dim(), b0: d });
    }
    let g: Vec<C> = gw.gamma.iter().map(|v| C::from_f64(*v)).collect();
    let mut total = C::from_i64(gw.k() as i64);
    for gi in &g {
        total = total.add(gi);
    }
    let mut out = MultiIndexPolynomial::zero(d);
    for (e, c) in f.terms() {
        let deg: i64 = e.iter().map(|v| *v as i64).sum();
        // Diagonal part: -(|gamma| + k) |m| - |m| (|m| - 1).
        let diag = total.mul(&C::from_i64(deg)).add(&C::from_i64(deg * (deg - 1))).neg();
        out.add_term(e.clone(), c.mul(&diag));
        for i in 0..d {
            let m = e[i] as i64;
            if m == 0 {
                continue;
            }
            let mut down = e.clone();
            down[i] -= 1;
            let lower = g[i].add(&C::one()).mul(&C::from_i64(m)).add(&C::from_i64(m * (m - 1)));
            out.add_term(down, c.mul(&lower));
        }
    }
    Ok(out)
}

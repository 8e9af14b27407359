//! The transition density as a truncated eigenfunction expansion,
//! `p(y0, y; t) = pi(y) sum_n exp(-nu_n t) sum_{|n|=n} P_n(y) P_n(y0) / <P_n, P_n>`.

use serde::{Deserialize, Serialize};

use super::product::{product_jacobi, product_jacobi_norm_sq};
use super::{density_unchecked, eigenvalue_nu, multi_indices, Exponent, GammaWeights};
use crate::error::{invalid, Error, Result};
use crate::simplex::TPoint;
use crate::wf::WfParams;

/// Below this time the truncated series is flagged as unreliable.
pub const SMALL_TIME: f64 = 0.05;
/// Relative size of the last included degree above which the result carries a warning.
pub const TAIL_WARNING: f64 = 1e-6;
const MAX_TERMS: usize = 250_000;

/// Default truncation degree: 30 for `k = 2`, 10 otherwise.
pub fn default_max_degree(k: usize) -> u32 {
    if k == 2 {
        30
    } else {
        10
    }
}

/// Spectral expansion of `y -> p(y0, y; t)` for a fixed start `y0`.
#[derive(Debug, Clone)]
pub struct SpectralDensity {
    params: WfParams,
    gw: GammaWeights,
    max_degree: u32,
    /// Per degree: `nu_n` and the pairs `(n, P_n(y0) / <P_n, P_n>)`.
    degrees: Vec<(f64, Vec<(Exponent, f64)>)>,
}

impl SpectralDensity {
    pub fn new(params: &WfParams, y0: &TPoint, max_degree: u32) -> Result<Self> {
        let gw = GammaWeights::from_wf(params);
        let dim = gw.dim();
        if y0.dim() != dim {
            return Err(Error::LengthMismatch { b: dim, b0: y0.dim() });
        }
        if !y0.is_interior() {
            return Err(Error::OffSimplex("y0 must be interior".into()));
        }
        if dim > 4 {
            return Err(Error::UnsupportedRange(format!("spectral density needs k <= 5, got k = {}", dim + 1)));
        }
        let count: usize = (0..=max_degree).map(|d| multi_indices(dim, d).len()).sum();
        if count > MAX_TERMS {
            return Err(Error::UnsupportedRange(format!("max_degree {max_degree} needs {count} terms for k = {}, limit is {MAX_TERMS}", dim + 1)));
        }
        let degrees = (0..=max_degree)
            .map(|d| {
                let terms = multi_indices(dim, d)
                    .into_iter()
                    .map(|n| {
                        let c = product_jacobi(&n, &gw, y0.as_slice()) / product_jacobi_norm_sq(&n, &gw);
                        (n, c)
                    })
                    .collect();
                (eigenvalue_nu(d, params), terms)
            })
            .collect();
        Ok(Self { params: params.clone(), gw, max_degree, degrees })
    }

    pub fn params(&self) -> &WfParams {
        &self.params
    }

    pub fn gamma(&self) -> &GammaWeights {
        &self.gw
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    /// Number of basis functions in the expansion.
    pub fn n_terms(&self) -> usize {
        self.degrees.iter().map(|d| d.1.len()).sum()
    }

    /// Contribution of each degree, before multiplying by `pi(y)`.
    fn degree_sums(&self, y: &[f64]) -> Vec<f64> {
        self.degrees
            .iter()
            .map(|(_, terms)| terms.iter().map(|(n, c)| c * product_jacobi(n, &self.gw, y)).sum())
            .collect()
    }

    /// `(p, dp/dt, last-degree term)` at `(y, t)`.
    pub fn evaluate(&self, y: &[f64], t: f64) -> (f64, f64, f64) {
        let pi = density_unchecked(&self.gw, y);
        let sums = self.degree_sums(y);
        let mut value = 0.0;
        let mut deriv = 0.0;
        let mut last = 0.0;
        for ((nu, _), s) in self.degrees.iter().zip(&sums) {
            let e = (-nu * t).exp();
            value += e * s;
            deriv -= nu * e * s;
            last = e * s;
        }
        (pi * value, pi * deriv, pi * last)
    }
}

/// A transition-density value with its truncation diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionDensity {
    pub value: f64,
    /// Contribution of the highest included degree.
    pub tail_term: f64,
    pub n_terms: usize,
    pub max_degree: u32,
    /// `t` is below the range where the truncated series is trustworthy.
    pub unreliable: bool,
    pub warning: Option<String>,
}

/// `p(y0, y; t)` truncated at `max_degree` (default by `k`).
pub fn transition_density(y0: &TPoint, y: &TPoint, t: f64, params: &WfParams, max_degree: Option<u32>) -> Result<TransitionDensity> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(invalid("t", "must be positive and finite"));
    }
    if y.dim() + 1 != params.k() {
        return Err(Error::LengthMismatch { b: params.k() - 1, b0: y.dim() });
    }
    if !y.is_interior() {
        return Err(Error::OffSimplex("y must be interior".into()));
    }
    let d = max_degree.unwrap_or_else(|| default_max_degree(params.k()));
    let sd = SpectralDensity::new(params, y0, d)?;
    let (value, _, tail) = sd.evaluate(y.as_slice(), t);
    let mut warnings = Vec::new();
    let unreliable = t < SMALL_TIME;
    if unreliable {
        warnings.push(format!("t = {t} is below {SMALL_TIME}; the truncated series is unreliable"));
    }
    if d > 0 && tail.abs() > TAIL_WARNING * value.abs() {
        warnings.push(format!("degree-{d} term {tail:.3e} exceeds {TAIL_WARNING:e} of the sum; raise max_degree"));
    }
    Ok(TransitionDensity {
        value,
        tail_term: tail,
        n_terms: sd.n_terms(),
        max_degree: d,
        unreliable,
        warning: if warnings.is_empty() { None } else { Some(warnings.join("; ")) },
    })
}

//! One-dimensional marginal analytics: Feller classification of the
//! endpoints, scale function and speed density, hitting probabilities,
//! Green function, expected costs, and recessive or dominant color sets.
//!
//! For an index set `J` the marginal `Z = sum_{i in J} X_i` solves
//! `dZ = (a0 (1 - Z) - a1 Z) dt + sqrt(Z (1 - Z)) dW` with
//! `a0 = (b/alpha) p_J` and `a1 = (b/alpha)(1 - p_J)`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::quadrature::{gauss_beta, integrate};
use crate::rng;
use crate::wf::{marginal_step, OneDimWf, WfParams};

/// Feller type of an endpoint of `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundaryType {
    Exit,
    Regular,
    Entrance,
}

/// Classifies an endpoint from its drift coefficient `a_z` (`a0` at 0, `a1` at 1).
pub fn classify_boundary(a_z: f64) -> Result<BoundaryType> {
    if !(a_z >= 0.0) || !a_z.is_finite() {
        return Err(invalid("a_z", "must be finite and nonnegative"));
    }
    Ok(if a_z == 0.0 {
        BoundaryType::Exit
    } else if a_z < 0.5 {
        BoundaryType::Regular
    } else {
        BoundaryType::Entrance
    })
}

fn check_proper(params: &WfParams, set: &[usize]) -> Result<()> {
    let k = params.k();
    if set.is_empty() {
        return Err(Error::InvalidIndexSet("index set is empty".into()));
    }
    if set.len() >= k {
        return Err(Error::InvalidIndexSet(format!("index set must be a proper subset of the {k} colors")));
    }
    Ok(())
}

/// Marginal of the colors in `set` (0-based), which must be a nonempty proper subset.
pub fn group_to_1d(params: &WfParams, set: &[usize]) -> Result<OneDimWf> {
    check_proper(params, set)?;
    OneDimWf::from_group(params, set)
}

/// `J` is recessive iff `2 b p_J < alpha`.
pub fn is_recessive(params: &WfParams, set: &[usize]) -> Result<bool> {
    check_proper(params, set)?;
    OneDimWf::from_group(params, set)?;
    let pj: f64 = set.iter().map(|&i| params.p()[i]).sum();
    Ok(2.0 * params.b_scalar() * pj < params.alpha())
}

/// Color `i` (0-based) is dominant iff its complement is recessive.
pub fn is_dominant(params: &WfParams, i: usize) -> Result<bool> {
    let k = params.k();
    if i >= k {
        return Err(Error::InvalidIndexSet(format!("color {i} out of range for k = {k}")));
    }
    let rest: Vec<usize> = (0..k).filter(|&j| j != i).collect();
    is_recessive(params, &rest)
}

/// Free constants of the scale function: `S(z_ref) = s_ref`, `S'(z_ref) = slope`
/// up to the factor `z_ref^{-2 a0} (1 - z_ref)^{-2 a1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleRef {
    pub z_ref: f64,
    pub s_ref: f64,
    pub slope: f64,
}

impl Default for ScaleRef {
    fn default() -> Self {
        Self { z_ref: 0.5, s_ref: 0.0, slope: 1.0 }
    }
}

const JACOBI_NODES: usize = 48;
const QUAD_TOL: f64 = 1e-14;
const QUAD_MAX_INTERVALS: usize = 4000;

fn integrand(od: &OneDimWf, t: f64) -> f64 {
    t.powf(-2.0 * od.a0) * (1.0 - t).powf(-2.0 * od.a1)
}

/// `int_0^c t^{-2 a0} (1 - t)^{-2 a1} dt` for `c <= 1/2`, by a rule matched to `t^{-2 a0}`.
fn from_zero(e0: f64, e1: f64, c: f64) -> f64 {
    let rule = gauss_beta(JACOBI_NODES, -e0, 0.0);
    c.powf(1.0 - e0) / (1.0 - e0) * rule.integrate(|u| (1.0 - c * u).powf(-e1))
}

fn left_half(od: &OneDimWf, x: f64, y: f64) -> Result<f64> {
    let e0 = 2.0 * od.a0;
    if x == 0.0 {
        if e0 >= 1.0 {
            return Err(Error::DivergentIntegral { endpoint: 0.0 });
        }
        return Ok(from_zero(e0, 2.0 * od.a1, y));
    }
    if e0 < 1.0 && x < 0.25 * y {
        return Ok(from_zero(e0, 2.0 * od.a1, y) - from_zero(e0, 2.0 * od.a1, x));
    }
    Ok(integrate(|t| integrand(od, t), x, y, 0.0, QUAD_TOL, QUAD_MAX_INTERVALS).value)
}

/// `int_x^y t^{-2 a0} (1 - t)^{-2 a1} dt` for `0 <= x, y <= 1`.
///
/// Finite on `(0, 1)`; toward an endpoint it is finite iff that endpoint is
/// not an entrance boundary.
pub fn scale_integral(od: &OneDimWf, x: f64, y: f64) -> Result<f64> {
    for (name, v) in [("x", x), ("y", y)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::OutOfInterval { name, value: v, lo: 0.0, hi: 1.0 });
        }
    }
    if x > y {
        return scale_integral(od, y, x).map(|v| -v);
    }
    if x == y {
        return Ok(0.0);
    }
    let mirror = OneDimWf { a0: od.a1, a1: od.a0 };
    let mut total = 0.0;
    if x < 0.5 {
        total += left_half(od, x, y.min(0.5))?;
    }
    if y > 0.5 {
        let (lo, hi) = (x.max(0.5), y);
        total += left_half(&mirror, 1.0 - hi, 1.0 - lo).map_err(|e| match e {
            Error::DivergentIntegral { .. } => Error::DivergentIntegral { endpoint: 1.0 },
            other => other,
        })?;
    }
    Ok(total)
}

/// `S(z) = s_ref + slope int_{z_ref}^z t^{-2 a0} (1 - t)^{-2 a1} dt`.
pub fn scale_function(od: &OneDimWf, z: f64, r: &ScaleRef) -> Result<f64> {
    Ok(r.s_ref + r.slope * scale_integral(od, r.z_ref, z)?)
}

/// `S'(z) = slope z^{-2 a0} (1 - z)^{-2 a1}`.
pub fn scale_derivative(od: &OneDimWf, z: f64, r: &ScaleRef) -> f64 {
    r.slope * integrand(od, z)
}

/// `m(z) = z^{2 a0 - 1} (1 - z)^{2 a1 - 1} / slope`.
pub fn speed_density(od: &OneDimWf, z: f64, r: &ScaleRef) -> f64 {
    z.powf(2.0 * od.a0 - 1.0) * (1.0 - z).powf(2.0 * od.a1 - 1.0) / r.slope
}

/// `Beta(2 a0, 2 a1)` density at `z0`, the limit of the ratio between the
/// expected local exit indicator and the expected return time.
pub fn return_ratio_density(od: &OneDimWf, z0: f64) -> Result<f64> {
    if !(z0 > 0.0 && z0 < 1.0) {
        return Err(Error::OutOfInterval { name: "z0", value: z0, lo: 0.0, hi: 1.0 });
    }
    let (p, q) = (2.0 * od.a0, 2.0 * od.a1);
    if p <= 0.0 || q <= 0.0 {
        return Err(invalid("a0, a1", "both must be positive"));
    }
    let ln = statrs::function::gamma::ln_gamma(p + q)
        - statrs::function::gamma::ln_gamma(p)
        - statrs::function::gamma::ln_gamma(q)
        + (p - 1.0) * z0.ln()
        + (q - 1.0) * (1.0 - z0).ln();
    Ok(ln.exp())
}

/// The marginal diffusion stopped on leaving `(a, b)`, with `0 < a < b < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalProblem {
    pub od: OneDimWf,
    pub a: f64,
    pub b: f64,
    pub scale: ScaleRef,
}

impl IntervalProblem {
    pub fn new(od: OneDimWf, a: f64, b: f64) -> Result<Self> {
        if !(0.0 < a && a < b && b < 1.0) {
            return Err(invalid("a, b", format!("need 0 < a < b < 1, got a = {a}, b = {b}")));
        }
        Ok(Self { od, a, b, scale: ScaleRef::default() })
    }

    pub fn with_scale(mut self, scale: ScaleRef) -> Self {
        self.scale = scale;
        self
    }

    fn check(&self, name: &'static str, v: f64) -> Result<()> {
        if !(self.a <= v && v <= self.b) {
            return Err(Error::OutOfInterval { name, value: v, lo: self.a, hi: self.b });
        }
        Ok(())
    }

    fn s(&self, z: f64) -> f64 {
        scale_function(&self.od, z, &self.scale).expect("interior point")
    }

    fn i(&self, x: f64, y: f64) -> f64 {
        scale_integral(&self.od, x, y).expect("interior points")
    }

    /// `u(z0) = P(reach b before a | Z_0 = z0) = (S(z0) - S(a)) / (S(b) - S(a))`.
    pub fn hitting_prob(&self, z0: f64) -> Result<f64> {
        self.check("z0", z0)?;
        if z0 == self.a {
            return Ok(0.0);
        }
        if z0 == self.b {
            return Ok(1.0);
        }
        let sa = self.s(self.a);
        let u = (self.s(z0) - sa) / (self.s(self.b) - sa);
        Ok(u.clamp(0.0, 1.0))
    }

    /// Green function of the process killed on leaving `(a, b)`.
    pub fn green_function(&self, x: f64, s: f64) -> Result<f64> {
        self.check("x", x)?;
        self.check("s", s)?;
        let m = s.powf(2.0 * self.od.a0 - 1.0) * (1.0 - s).powf(2.0 * self.od.a1 - 1.0);
        let whole = self.i(self.a, self.b);
        let num = if x <= s { self.i(self.a, x) * self.i(s, self.b) } else { self.i(x, self.b) * self.i(self.a, s) };
        Ok(2.0 * num / whole * m)
    }

    /// `w(z0) = int_a^b G(z0, s) g(s) ds`, the expected cost accrued at rate
    /// `g` before leaving `(a, b)`.
    pub fn expected_cost<G: Fn(f64) -> f64>(&self, z0: f64, g: G) -> Result<f64> {
        self.check("z0", z0)?;
        let f = |s: f64| self.green_function(z0, s).expect("interior point") * g(s);
        let lo = integrate(f, self.a, z0, 1e-13, 1e-12, QUAD_MAX_INTERVALS).value;
        let hi = integrate(f, z0, self.b, 1e-13, 1e-12, QUAD_MAX_INTERVALS).value;
        Ok(lo + hi)
    }

    /// The same cost through `u`, `S` and `m`:
    /// `2 (u(z0) int_{z0}^b (S(b) - S(t)) m(t) g(t) dt
    ///   + (1 - u(z0)) int_a^{z0} (S(t) - S(a)) m(t) g(t) dt)`.
    pub fn expected_cost_by_scale<G: Fn(f64) -> f64>(&self, z0: f64, g: G) -> Result<f64> {
        let u = self.hitting_prob(z0)?;
        let (sa, sb) = (self.s(self.a), self.s(self.b));
        let m = |t: f64| speed_density(&self.od, t, &self.scale);
        let upper = integrate(|t| (sb - self.s(t)) * m(t) * g(t), z0, self.b, 1e-13, 1e-12, QUAD_MAX_INTERVALS).value;
        let lower = integrate(|t| (self.s(t) - sa) * m(t) * g(t), self.a, z0, 1e-13, 1e-12, QUAD_MAX_INTERVALS).value;
        Ok(2.0 * (u * upper + (1.0 - u) * lower))
    }

    /// Mean time to reach `a` or `b` from `z0`.
    pub fn mean_exit_time(&self, z0: f64) -> Result<f64> {
        self.expected_cost(z0, |_| 1.0)
    }
}

/// Monte Carlo estimate of exit statistics from `(a, b)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirstPassage {
    pub n_paths: usize,
    pub hit_b_fraction: f64,
    pub hit_b_stderr: f64,
    pub mean_exit_time: f64,
    pub exit_time_stderr: f64,
    /// Paths still inside `(a, b)` at the time cap.
    pub unfinished: usize,
}

/// Options of the first-passage simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PassageConfig {
    pub dt: f64,
    pub t_cap: f64,
    /// Detect crossings between grid points with the Brownian-bridge
    /// probability, using the diffusion coefficient frozen at the left point.
    pub bridge: bool,
}

impl Default for PassageConfig {
    fn default() -> Self {
        Self { dt: 1e-4, t_cap: 1e3, bridge: true }
    }
}

/// Simulates `n_paths` Euler–Maruyama paths from `z0` until they leave
/// `(a, b)`, on the streams `(seed, "exit", r)`.
pub fn first_passage_mc(ip: &IntervalProblem, z0: f64, cfg: &PassageConfig, seed: u64, n_paths: usize) -> Result<FirstPassage> {
    ip.check("z0", z0)?;
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        return Err(invalid("dt", "must be positive and finite"));
    }
    if n_paths < 2 {
        return Err(invalid("n_paths", "at least two paths are required"));
    }
    let max_steps = (cfg.t_cap / cfg.dt).ceil() as u64;
    let outcomes: Vec<(bool, f64, bool)> = (0..n_paths as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(seed, "exit", r);
            let sq = cfg.dt.sqrt();
            let mut z = z0;
            for n in 1..=max_steps {
                let var = (z * (1.0 - z)).max(0.0);
                let next = z + ip.od.drift(z) * cfg.dt + var.sqrt() * sq * rng.sample::<f64, _>(StandardNormal);
                let t = n as f64 * cfg.dt;
                if next <= ip.a {
                    return (false, t, true);
                }
                if next >= ip.b {
                    return (true, t, true);
                }
                if cfg.bridge && var > 0.0 {
                    let denom = var * cfg.dt;
                    let pa = (-2.0 * (z - ip.a) * (next - ip.a) / denom).exp();
                    let pb = (-2.0 * (ip.b - z) * (ip.b - next) / denom).exp();
                    let u: f64 = rng.random();
                    if u < pa {
                        return (false, t, true);
                    }
                    if u < pa + pb {
                        return (true, t, true);
                    }
                }
                z = next;
            }
            (false, max_steps as f64 * cfg.dt, false)
        })
        .collect();
    let n = n_paths as f64;
    let hits = outcomes.iter().filter(|o| o.0).count() as f64;
    let frac = hits / n;
    let times: Vec<f64> = outcomes.iter().map(|o| o.1).collect();
    let (mean, se) = crate::wf::mean_stderr(&times);
    Ok(FirstPassage {
        n_paths,
        hit_b_fraction: frac,
        hit_b_stderr: (frac * (1.0 - frac) / n).sqrt(),
        mean_exit_time: mean,
        exit_time_stderr: se,
        unfinished: outcomes.iter().filter(|o| !o.2).count(),
    })
}

/// Fraction of marginal paths that enter `[0, delta]` before `horizon`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TouchReport {
    pub a0: f64,
    pub a1: f64,
    pub z0: f64,
    pub delta: f64,
    pub horizon: f64,
    pub dt: f64,
    pub n_paths: usize,
    pub touched: usize,
    pub fraction: f64,
}

/// Simulates the clamped Euler–Maruyama marginal on the streams
/// `(seed, "touch", r)` and counts paths with `Z_t <= delta` at some grid time.
pub fn touch_fraction(od: &OneDimWf, z0: f64, delta: f64, horizon: f64, dt: f64, seed: u64, n_paths: usize) -> Result<TouchReport> {
    if !(z0 > delta && z0 <= 1.0) {
        return Err(Error::OutOfInterval { name: "z0", value: z0, lo: delta, hi: 1.0 });
    }
    if !(dt > 0.0 && dt.is_finite() && horizon > 0.0 && horizon.is_finite()) {
        return Err(invalid("dt, horizon", "must be positive and finite"));
    }
    let steps = (horizon / dt).round() as u64;
    let touched = (0..n_paths as u64)
        .into_par_iter()
        .filter(|&r| {
            let mut rng = rng::stream(seed, "touch", r);
            let mut z = z0;
            for _ in 0..steps {
                z = marginal_step(od, z, dt, rng.sample(StandardNormal));
                if z <= delta {
                    return true;
                }
            }
            false
        })
        .count();
    Ok(TouchReport {
        a0: od.a0,
        a1: od.a1,
        z0,
        delta,
        horizon,
        dt,
        n_paths,
        touched,
        fraction: touched as f64 / n_paths.max(1) as f64,
    })
}

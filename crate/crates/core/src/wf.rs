//! The k-allele Wright–Fisher diffusion with parent-independent mutation,
//! `dX = -(b/alpha)(X - p) dt + Sigma(X) dW`, and its one-dimensional
//! marginals.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::{self, StreamRng};
use crate::scaling::steps_ceil;
use crate::simplex::{project_to_simplex, SimplexPoint, SIMPLEX_TOL};
use crate::urn::SeedRecord;

/// Drift scale `|b|`, noise scale `alpha` and mutation kernel `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WfParams {
    b_scalar: f64,
    alpha: f64,
    p: SimplexPoint,
}

impl WfParams {
    pub fn new(b_scalar: f64, alpha: f64, p: SimplexPoint) -> Result<Self> {
        if !(b_scalar > 0.0) || !b_scalar.is_finite() {
            return Err(invalid("b", "|b| must be positive"));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::NonPositiveAlpha(alpha));
        }
        if p.dim() < 2 {
            return Err(Error::TooFewColors(p.dim()));
        }
        if let Some(i) = p.as_slice().iter().position(|v| !(*v > 0.0)) {
            return Err(invalid("p", format!("p_{} must be positive", i + 1)));
        }
        Ok(Self { b_scalar, alpha, p })
    }

    /// Parameters from a fixed-ball vector `b`, so that `p = b / |b|`.
    pub fn from_b(b: &[f64], alpha: f64) -> Result<Self> {
        let s: f64 = b.iter().sum();
        Self::new(s, alpha, SimplexPoint::from_weights(b)?)
    }

    pub fn b_scalar(&self) -> f64 {
        self.b_scalar
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn p(&self) -> &SimplexPoint {
        &self.p
    }

    pub fn k(&self) -> usize {
        self.p.dim()
    }

    /// Mean-reversion rate `b / alpha`.
    pub fn rate(&self) -> f64 {
        self.b_scalar / self.alpha
    }

    /// Parameters of the grouped diffusion: `p` is summed over each group.
    pub fn project(&self, part: &crate::scaling::Partition) -> Result<Self> {
        if part.k() != self.k() {
            return Err(Error::InvalidPartition(format!("partition is over {} colours, diffusion has {}", part.k(), self.k())));
        }
        Self::new(self.b_scalar, self.alpha, SimplexPoint::from_vec_unchecked(part.project(self.p.as_slice())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    EulerMaruyama,
}

/// Time-stepping configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdeConfig {
    pub dt: f64,
    pub scheme: Scheme,
    /// Apply `max(0, .)` inside square roots.
    pub clamp: bool,
}

impl Default for SdeConfig {
    fn default() -> Self {
        Self { dt: 1e-3, scheme: Scheme::EulerMaruyama, clamp: true }
    }
}

impl SdeConfig {
    pub fn with_dt(dt: f64) -> Result<Self> {
        let c = Self { dt, ..Self::default() };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(invalid("dt", "must be positive"));
        }
        Ok(())
    }
}

/// `dZ = (-a1 Z + a0 (1 - Z)) dt + sqrt(max(0, Z (1 - Z))) dW` on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneDimWf {
    pub a0: f64,
    pub a1: f64,
}

impl OneDimWf {
    pub fn new(a0: f64, a1: f64) -> Result<Self> {
        if !(a0 >= 0.0) || !a0.is_finite() {
            return Err(invalid("a0", "must be finite and nonnegative"));
        }
        if !(a1 >= 0.0) || !a1.is_finite() {
            return Err(invalid("a1", "must be finite and nonnegative"));
        }
        Ok(Self { a0, a1 })
    }

    /// Marginal of `sum_{i in J} X_i`: `a0 = (b/alpha) p_J`, `a1 = (b/alpha)(1 - p_J)`.
    pub fn from_group(params: &WfParams, set: &[usize]) -> Result<Self> {
        let k = params.k();
        let mut seen = vec![false; k];
        for &i in set {
            if i >= k || seen[i] {
                return Err(Error::InvalidIndexSet(format!("index {i} repeated or out of range for k = {k}")));
            }
            seen[i] = true;
        }
        let pj: f64 = set.iter().map(|&i| params.p[i]).sum();
        let qj: f64 = (0..k).filter(|i| !seen[*i]).map(|i| params.p[i]).sum();
        Self::new(params.rate() * pj, params.rate() * qj)
    }

    pub fn drift(&self, z: f64) -> f64 {
        -self.a1 * z + self.a0 * (1.0 - z)
    }
}

fn check_simplex(x: &[f64]) -> Result<()> {
    if x.iter().any(|v| !v.is_finite() || *v < -SIMPLEX_TOL) {
        return Err(Error::OffSimplex("negative or non-finite component".into()));
    }
    let s: f64 = x.iter().sum();
    if (s - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::OffSimplex(format!("components sum to {s}")));
    }
    Ok(())
}

/// Writes `Sigma(x)` row-major into `out` (length `k * k`).
pub(crate) fn sigma_into(x: &[f64], clamp: bool, suffix: &mut [f64], out: &mut [f64]) {
    let k = x.len();
    let mut acc = 0.0;
    for i in (0..k).rev() {
        acc += x[i];
        suffix[i] = acc;
    }
    let sqrt = |v: f64| if clamp { v.max(0.0).sqrt() } else { v.sqrt() };
    out.fill(0.0);
    for i in 0..k {
        if x[i] == 0.0 {
            continue;
        }
        let t_next = if i + 1 < k { suffix[i + 1] } else { 0.0 };
        out[i * k + i] = sqrt(x[i] * t_next / suffix[i]);
        for j in 0..i {
            if x[j] == 0.0 {
                continue;
            }
            out[i * k + j] = -x[i] * sqrt(x[j] / (suffix[j] * suffix[j + 1]));
        }
    }
}

/// The lower-triangular factor with `Sigma Sigma^T = diag(x) - x x^T`.
pub fn sigma(x: &SimplexPoint) -> Result<DMatrix<f64>> {
    check_simplex(x.as_slice())?;
    let k = x.dim();
    let mut out = vec![0.0; k * k];
    let mut suffix = vec![0.0; k];
    sigma_into(x.as_slice(), true, &mut suffix, &mut out);
    Ok(DMatrix::from_row_slice(k, k, &out))
}

/// `-(b/alpha)(x - p)`.
pub fn drift(x: &SimplexPoint, params: &WfParams) -> Vec<f64> {
    let c = params.rate();
    x.as_slice().iter().zip(params.p.as_slice()).map(|(xi, pi)| -c * (xi - pi)).collect()
}

/// Scratch space for repeated Euler–Maruyama steps.
#[derive(Debug, Clone)]
pub struct EmWorkspace {
    suffix: Vec<f64>,
    sig: Vec<f64>,
    next: Vec<f64>,
}

impl EmWorkspace {
    pub fn new(k: usize) -> Self {
        Self { suffix: vec![0.0; k], sig: vec![0.0; k * k], next: vec![0.0; k] }
    }
}

/// One step with a given standard-normal vector `z`, in place.
pub fn em_step_with_noise_in_place(x: &mut [f64], params: &WfParams, dt: f64, clamp: bool, z: &[f64], ws: &mut EmWorkspace) {
    let k = x.len();
    let c = params.rate();
    let sdt = dt.sqrt();
    sigma_into(x, clamp, &mut ws.suffix, &mut ws.sig);
    for i in 0..k {
        let mut noise = 0.0;
        for j in 0..=i {
            noise += ws.sig[i * k + j] * z[j];
        }
        ws.next[i] = x[i] - c * (x[i] - params.p[i]) * dt + noise * sdt;
    }
    if project_to_simplex(&mut ws.next).is_some() {
        x.copy_from_slice(&ws.next);
    }
}

/// One Euler–Maruyama step driven by an explicit noise vector.
pub fn em_step_with_noise(x: &SimplexPoint, params: &WfParams, config: &SdeConfig, z: &[f64]) -> SimplexPoint {
    let mut v = x.as_slice().to_vec();
    let mut ws = EmWorkspace::new(v.len());
    em_step_with_noise_in_place(&mut v, params, config.dt, config.clamp, z, &mut ws);
    SimplexPoint::from_vec_unchecked(v)
}

/// One Euler–Maruyama step followed by projection onto the simplex.
pub fn em_step<R: Rng + ?Sized>(x: &SimplexPoint, params: &WfParams, config: &SdeConfig, rng: &mut R) -> SimplexPoint {
    let z: Vec<f64> = (0..x.dim()).map(|_| rng.sample(StandardNormal)).collect();
    em_step_with_noise(x, params, config, &z)
}

/// Time grid `0, dt, ..., t_max` with `ceil(t_max / dt) + 1` points; the last
/// step is shortened so that the grid ends exactly at `t_max`.
pub fn time_grid(t_max: f64, dt: f64) -> Result<Vec<f64>> {
    if !(t_max >= 0.0) || !t_max.is_finite() {
        return Err(invalid("t_max", "must be finite and nonnegative"));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(invalid("dt", "must be positive"));
    }
    let n = steps_ceil(t_max, dt);
    let mut t: Vec<f64> = (0..=n).map(|j| j as f64 * dt).collect();
    if let Some(last) = t.last_mut() {
        *last = t_max;
    }
    Ok(t)
}

/// A time-stamped trajectory with the stream that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub t: Vec<f64>,
    /// Columnar values: `x[i][j]` is component `i` at `t[j]`.
    pub x: Vec<Vec<f64>>,
    pub seed: SeedRecord,
}

impl PathRecord {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn at(&self, j: usize) -> SimplexPoint {
        SimplexPoint::from_vec_unchecked(self.x.iter().map(|c| c[j]).collect())
    }

    pub fn last(&self) -> SimplexPoint {
        self.at(self.len() - 1)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> std::io::Result<()> {
        crate::export::write_time_table(w, &self.t, &self.x, "X")
    }
}

fn run_path<F: FnMut(usize, &[f64])>(params: &WfParams, x0: &[f64], grid: &[f64], config: &SdeConfig, rng: &mut StreamRng, mut visit: F) {
    let k = x0.len();
    let mut ws = EmWorkspace::new(k);
    let mut x = x0.to_vec();
    let mut z = vec![0.0; k];
    visit(0, &x);
    for j in 1..grid.len() {
        let dt = grid[j] - grid[j - 1];
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        em_step_with_noise_in_place(&mut x, params, dt, config.clamp, &z, &mut ws);
        visit(j, &x);
    }
}

fn validate_start(params: &WfParams, x0: &SimplexPoint, config: &SdeConfig) -> Result<()> {
    config.validate()?;
    if x0.dim() != params.k() {
        return Err(Error::LengthMismatch { b: params.k(), b0: x0.dim() });
    }
    check_simplex(x0.as_slice())
}

/// Simulates replica `index` of the stream `(seed, "wf", index)`.
pub fn simulate_wf_replica(params: &WfParams, x0: &SimplexPoint, t_max: f64, config: &SdeConfig, seed: u64, index: u64) -> Result<PathRecord> {
    validate_start(params, x0, config)?;
    let grid = time_grid(t_max, config.dt)?;
    let mut rng = rng::stream(seed, "wf", index);
    let mut x: Vec<Vec<f64>> = (0..params.k()).map(|_| Vec::with_capacity(grid.len())).collect();
    run_path(params, x0.as_slice(), &grid, config, &mut rng, |_, v| {
        for (col, vi) in x.iter_mut().zip(v) {
            col.push(*vi);
        }
    });
    Ok(PathRecord { t: grid, x, seed: SeedRecord { master: seed, label: "wf".into(), index } })
}

/// Simulates one path; deterministic in `seed`.
pub fn simulate_wf(params: &WfParams, x0: &SimplexPoint, t_max: f64, config: &SdeConfig, seed: u64) -> Result<PathRecord> {
    simulate_wf_replica(params, x0, t_max, config, seed, 0)
}

/// Values of `n_paths` independent replicas at the requested times.
///
/// `out[r][m]` is replica `r` at `times[m]`; each time is snapped to the
/// simulation grid `ceil(t / dt)`.
pub fn wf_ensemble_at(params: &WfParams, x0: &SimplexPoint, times: &[f64], config: &SdeConfig, seed: u64, n_paths: usize) -> Result<Vec<Vec<SimplexPoint>>> {
    validate_start(params, x0, config)?;
    let t_max = times.iter().cloned().fold(0.0, f64::max);
    let grid = time_grid(t_max, config.dt)?;
    let idx: Vec<usize> = times
        .iter()
        .map(|t| {
            if !(*t >= 0.0) {
                return Err(invalid("t", "must be nonnegative"));
            }
            Ok(grid.partition_point(|g| *g < *t - 1e-12 * t.max(1.0)))
        })
        .collect::<Result<_>>()?;
    let out = (0..n_paths as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(seed, "wf", r);
            let mut snaps = vec![SimplexPoint::from_vec_unchecked(Vec::new()); times.len()];
            run_path(params, x0.as_slice(), &grid, config, &mut rng, |j, v| {
                for (m, &target) in idx.iter().enumerate() {
                    if target == j {
                        snaps[m] = SimplexPoint::from_vec_unchecked(v.to_vec());
                    }
                }
            });
            snaps
        })
        .collect();
    Ok(out)
}

/// Ensemble mean and standard error at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub t: f64,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_paths: usize,
    pub seed: u64,
}

/// Componentwise mean and standard error of an ensemble at each time.
pub fn summarize(samples: &[Vec<SimplexPoint>], times: &[f64], seed: u64) -> Vec<EnsembleSummary> {
    let n = samples.len();
    times
        .iter()
        .enumerate()
        .map(|(m, &t)| {
            let k = samples.first().map_or(0, |s| s[m].dim());
            let mut mean = vec![0.0; k];
            let mut stderr = vec![0.0; k];
            for i in 0..k {
                let col: Vec<f64> = samples.iter().map(|s| s[m][i]).collect();
                let (mu, se) = mean_stderr(&col);
                mean[i] = mu;
                stderr[i] = se;
            }
            EnsembleSummary { t, mean, stderr, n_paths: n, seed }
        })
        .collect()
}

pub(crate) fn mean_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mu = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mu, f64::NAN);
    }
    let var = v.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (n - 1.0);
    (mu, (var / n).sqrt())
}

/// `E[X_t] = p + (x0 - p) exp(-(b/alpha) t)`.
pub fn mean_ode(params: &WfParams, x0: &SimplexPoint, t: f64) -> Result<Vec<f64>> {
    if !(t >= 0.0) {
        return Err(invalid("t", "must be nonnegative"));
    }
    if x0.dim() != params.k() {
        return Err(Error::LengthMismatch { b: params.k(), b0: x0.dim() });
    }
    let e = (-params.rate() * t).exp();
    Ok(params.p.as_slice().iter().zip(x0.as_slice()).map(|(p, x)| p + (x - p) * e).collect())
}

/// A scalar time series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarPath {
    pub t: Vec<f64>,
    pub z: Vec<f64>,
    pub seed: SeedRecord,
}

impl ScalarPath {
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> std::io::Result<()> {
        crate::export::write_time_table(w, &self.t, std::slice::from_ref(&self.z), "Z")
    }
}

/// One Euler–Maruyama step of the marginal, clamped to `[0, 1]`.
#[inline]
pub fn marginal_step(od: &OneDimWf, z: f64, dt: f64, noise: f64) -> f64 {
    let next = z + od.drift(z) * dt + (z * (1.0 - z)).max(0.0).sqrt() * dt.sqrt() * noise;
    next.clamp(0.0, 1.0)
}

/// Simulates replica `index` of the stream `(seed, "wf1d", index)`.
pub fn simulate_marginal_1d_replica(od: &OneDimWf, z0: f64, t_max: f64, config: &SdeConfig, seed: u64, index: u64) -> Result<ScalarPath> {
    config.validate()?;
    if !(0.0..=1.0).contains(&z0) {
        return Err(Error::OutOfInterval { name: "z0", value: z0, lo: 0.0, hi: 1.0 });
    }
    let grid = time_grid(t_max, config.dt)?;
    let mut rng = rng::stream(seed, "wf1d", index);
    let mut z = Vec::with_capacity(grid.len());
    z.push(z0);
    for j in 1..grid.len() {
        let prev = z[j - 1];
        z.push(marginal_step(od, prev, grid[j] - grid[j - 1], rng.sample(StandardNormal)));
    }
    Ok(ScalarPath { t: grid, z, seed: SeedRecord { master: seed, label: "wf1d".into(), index } })
}

/// Simulates the one-dimensional marginal diffusion; deterministic in `seed`.
pub fn simulate_marginal_1d(od: &OneDimWf, z0: f64, t_max: f64, config: &SdeConfig, seed: u64) -> Result<ScalarPath> {
    simulate_marginal_1d_replica(od, z0, t_max, config, seed, 0)
}

/// Endpoints at `t_max` of `n_paths` independent marginal replicas.
pub fn marginal_1d_endpoints(od: &OneDimWf, z0: f64, t_max: f64, config: &SdeConfig, seed: u64, n_paths: usize) -> Result<Vec<f64>> {
    config.validate()?;
    if !(0.0..=1.0).contains(&z0) {
        return Err(Error::OutOfInterval { name: "z0", value: z0, lo: 0.0, hi: 1.0 });
    }
    let grid = time_grid(t_max, config.dt)?;
    Ok((0..n_paths as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(seed, "wf1d", r);
            let mut z = z0;
            for j in 1..grid.len() {
                z = marginal_step(od, z, grid[j] - grid[j - 1], rng.sample(StandardNormal));
            }
            z
        })
        .collect())
}

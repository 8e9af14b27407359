//! Numerical exhibits of the diffusion limit: rescaled urn replicas against
//! Euler–Maruyama Wright–Fisher paths, and long-run urn samples against the
//! stationary Beta marginal.
//!
//! Urn replica `r` at every `beta` uses the stream `(seed, "urn", r)`; the
//! reference ensemble uses `(seed, "wf", r)`.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::rng;
use crate::scaling::{build_family_member, required_steps, steps_floor, time_step, ScaledFamilyParams};
use crate::simplex::SimplexPoint;
use crate::stats::{beta_cdf, ks_one_sample, ks_two_sample, KsReport};
use crate::urn::{UrnParams, UrnWalker};
use crate::wf::{mean_stderr, wf_ensemble_at, SdeConfig, WfParams};

/// Default cap on the total number of urn draws of one experiment.
pub const DEFAULT_STEP_BUDGET: u64 = 20_000_000_000;

/// Inputs of [`convergence_experiment`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceConfig {
    pub params: WfParams,
    /// Common start; the urn's variable balls point in this direction.
    pub x0: SimplexPoint,
    pub betas: Vec<f64>,
    /// Strictly increasing checkpoint times on the diffusion clock.
    pub checkpoints: Vec<f64>,
    pub urn_replicas: usize,
    pub wf_paths: usize,
    pub sde: SdeConfig,
    pub seed: u64,
    pub step_budget: u64,
}

impl ConvergenceConfig {
    pub fn new(params: WfParams, x0: SimplexPoint, betas: Vec<f64>, checkpoints: Vec<f64>, replicas: usize, seed: u64) -> Self {
        Self {
            params,
            x0,
            betas,
            checkpoints,
            urn_replicas: replicas,
            wf_paths: replicas,
            sde: SdeConfig::default(),
            seed,
            step_budget: DEFAULT_STEP_BUDGET,
        }
    }

    fn validate(&self) -> Result<Vec<Vec<u64>>> {
        self.sde.validate()?;
        if self.x0.dim() != self.params.k() {
            return Err(invalid("x0", format!("has {} components, expected {}", self.x0.dim(), self.params.k())));
        }
        if self.betas.is_empty() || self.checkpoints.is_empty() {
            return Err(invalid("betas, checkpoints", "must be nonempty"));
        }
        if self.urn_replicas < 2 || self.wf_paths < 2 {
            return Err(invalid("replicas", "at least two per ensemble"));
        }
        if self.checkpoints.iter().any(|t| !(*t > 0.0 && t.is_finite())) || self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("checkpoints", "must be positive, finite and strictly increasing"));
        }
        let t_max = *self.checkpoints.last().expect("nonempty");
        let mut total: u64 = 0;
        let mut steps = Vec::with_capacity(self.betas.len());
        for &beta in &self.betas {
            required_steps(beta, t_max)?;
            let h = time_step(beta);
            let s: Vec<u64> = self.checkpoints.iter().map(|&t| steps_floor(t, h)).collect();
            total = total.saturating_add(s.last().copied().unwrap_or(0).saturating_mul(self.urn_replicas as u64));
            steps.push(s);
        }
        if total > self.step_budget {
            return Err(Error::Infeasible(format!("{total} urn draws exceed the budget of {}", self.step_budget)));
        }
        Ok(steps)
    }

    /// Index sets compared: every singleton, plus one random bipartition when `k >= 3`.
    pub fn marginals(&self) -> Vec<Vec<usize>> {
        let k = self.params.k();
        let mut out: Vec<Vec<usize>> = (0..k).map(|i| vec![i]).collect();
        if k >= 3 {
            let mut r = rng::stream(self.seed, "partition", 0);
            loop {
                let set: Vec<usize> = (0..k).filter(|_| r.random::<bool>()).collect();
                if set.len() >= 2 && set.len() <= k - 2 {
                    out.push(set);
                    break;
                }
                if k == 3 && !set.is_empty() && set.len() < k {
                    out.push(set);
                    break;
                }
            }
        }
        out
    }

    fn urn_params(&self, beta: f64) -> Result<UrnParams> {
        let b: Vec<f64> = self.params.p().as_slice().iter().map(|p| p * self.params.b_scalar()).collect();
        build_family_member(&ScaledFamilyParams::new(self.params.alpha(), b, beta).with_direction(self.x0.clone()))
    }
}

/// Comparison at one `(beta, t, J)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalComparison {
    pub beta: f64,
    pub t: f64,
    pub set: Vec<usize>,
    pub ks: KsReport,
    /// `(mean_urn - mean_wf) / sqrt(se_urn^2 + se_wf^2)` for `Z` and `Z^2`.
    pub z_mean: f64,
    pub z_second_moment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub betas: Vec<f64>,
    pub checkpoints: Vec<f64>,
    pub marginals: Vec<Vec<usize>>,
    pub comparisons: Vec<MarginalComparison>,
    /// Mean KS distance over checkpoints and marginals, per beta.
    pub mean_ks: Vec<f64>,
    /// Mean KS at the largest beta does not exceed that at the smallest.
    pub trend_non_increasing: bool,
    pub seed: u64,
}

/// Report plus the sample sets behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRun {
    pub report: ConvergenceReport,
    /// `urn[beta][checkpoint][replica]`.
    pub urn: Vec<Vec<Vec<SimplexPoint>>>,
    /// `wf[checkpoint][path]`.
    pub wf: Vec<Vec<SimplexPoint>>,
}

/// `psi` of each replica at the given step counts, ascending.
pub fn urn_ensemble_at(params: &UrnParams, steps: &[u64], seed: u64, replicas: usize) -> Vec<Vec<SimplexPoint>> {
    let k = params.k();
    let per_replica: Vec<Vec<SimplexPoint>> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(seed, "urn", r);
            let mut w = UrnWalker::new(params);
            let mut buf = vec![0.0; k];
            steps
                .iter()
                .map(|&s| {
                    while w.n() < s {
                        w.advance(&mut rng);
                    }
                    w.psi_into(&mut buf);
                    SimplexPoint::from_vec_unchecked(buf.clone())
                })
                .collect()
        })
        .collect();
    (0..steps.len()).map(|m| per_replica.iter().map(|v| v[m].clone()).collect()).collect()
}

fn group_sum(x: &SimplexPoint, set: &[usize]) -> f64 {
    set.iter().map(|&i| x[i]).sum()
}

fn z_score(a: &[f64], b: &[f64]) -> f64 {
    let (ma, sa) = mean_stderr(a);
    let (mb, sb) = mean_stderr(b);
    let s = (sa * sa + sb * sb).sqrt();
    if s > 0.0 {
        (ma - mb) / s
    } else if ma == mb {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Two-sample comparison of rescaled urn replicas with the Wright–Fisher
/// ensemble on grouped one-dimensional marginals.
pub fn convergence_experiment(cfg: &ConvergenceConfig) -> Result<ConvergenceRun> {
    let steps = cfg.validate()?;
    let marginals = cfg.marginals();
    let wf_by_path = wf_ensemble_at(&cfg.params, &cfg.x0, &cfg.checkpoints, &cfg.sde, cfg.seed, cfg.wf_paths)?;
    let wf: Vec<Vec<SimplexPoint>> =
        (0..cfg.checkpoints.len()).map(|m| wf_by_path.iter().map(|p| p[m].clone()).collect()).collect();
    let mut urn = Vec::with_capacity(cfg.betas.len());
    let mut comparisons = Vec::new();
    let mut mean_ks = Vec::with_capacity(cfg.betas.len());
    for (bi, &beta) in cfg.betas.iter().enumerate() {
        let params = cfg.urn_params(beta)?;
        let samples = urn_ensemble_at(&params, &steps[bi], cfg.seed, cfg.urn_replicas);
        let mut acc = 0.0;
        for (m, &t) in cfg.checkpoints.iter().enumerate() {
            for set in &marginals {
                let u: Vec<f64> = samples[m].iter().map(|x| group_sum(x, set)).collect();
                let w: Vec<f64> = wf[m].iter().map(|x| group_sum(x, set)).collect();
                let ks = ks_two_sample(&u, &w)?;
                acc += ks.d;
                let u2: Vec<f64> = u.iter().map(|v| v * v).collect();
                let w2: Vec<f64> = w.iter().map(|v| v * v).collect();
                comparisons.push(MarginalComparison {
                    beta,
                    t,
                    set: set.clone(),
                    ks,
                    z_mean: z_score(&u, &w),
                    z_second_moment: z_score(&u2, &w2),
                });
            }
        }
        mean_ks.push(acc / (cfg.checkpoints.len() * marginals.len()) as f64);
        urn.push(samples);
    }
    let lo = (0..cfg.betas.len()).min_by(|&i, &j| cfg.betas[i].total_cmp(&cfg.betas[j])).expect("nonempty");
    let hi = (0..cfg.betas.len()).max_by(|&i, &j| cfg.betas[i].total_cmp(&cfg.betas[j])).expect("nonempty");
    let report = ConvergenceReport {
        betas: cfg.betas.clone(),
        checkpoints: cfg.checkpoints.clone(),
        marginals,
        comparisons,
        trend_non_increasing: mean_ks[hi] <= mean_ks[lo],
        mean_ks,
        seed: cfg.seed,
    };
    Ok(ConvergenceRun { report, urn, wf })
}

/// Inputs of [`stationary_test`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryConfig {
    pub params: WfParams,
    pub beta: f64,
    /// Rescaled time at which replicas are sampled.
    pub t: f64,
    pub replicas: usize,
    /// Colors whose total is tested (0-based).
    pub set: Vec<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryReport {
    pub beta: f64,
    pub t: f64,
    pub steps: u64,
    pub set: Vec<usize>,
    /// Shape parameters `(2 (b/alpha) p_J, 2 (b/alpha)(1 - p_J))`.
    pub shape: (f64, f64),
    pub ks: KsReport,
    pub seed: u64,
}

/// One-sample KS of `sum_{i in J} psi_i` over independent urn replicas
/// against the stationary Beta marginal.
pub fn stationary_test(cfg: &StationaryConfig) -> Result<(StationaryReport, Vec<f64>)> {
    let k = cfg.params.k();
    if cfg.set.is_empty() || cfg.set.len() >= k || cfg.set.iter().any(|&i| i >= k) {
        return Err(Error::InvalidIndexSet(format!("{:?} is not a nonempty proper subset of 0..{k}", cfg.set)));
    }
    if cfg.replicas < 2 {
        return Err(invalid("replicas", "at least two are required"));
    }
    let steps = required_steps(cfg.beta, cfg.t)?;
    let b: Vec<f64> = cfg.params.p().as_slice().iter().map(|p| p * cfg.params.b_scalar()).collect();
    let params = build_family_member(&ScaledFamilyParams::new(cfg.params.alpha(), b, cfg.beta))?;
    let samples: Vec<f64> = urn_ensemble_at(&params, &[steps], cfg.seed, cfg.replicas)[0]
        .iter()
        .map(|x| group_sum(x, &cfg.set))
        .collect();
    let pj: f64 = cfg.set.iter().map(|&i| cfg.params.p()[i]).sum();
    let shape = (2.0 * cfg.params.rate() * pj, 2.0 * cfg.params.rate() * (1.0 - pj));
    let ks = ks_one_sample(&samples, beta_cdf(shape.0, shape.1)?)?;
    Ok((StationaryReport { beta: cfg.beta, t: cfg.t, steps, set: cfg.set.clone(), shape, ks, seed: cfg.seed }, samples))
}

//! The `beta -> 1` family of urns and the colour-grouping projection.
//!
//! A family member starts with `|B_0| = alpha / (1 - beta)`, which keeps the
//! total number of balls constant at `|b| + alpha / (1 - beta)`. Its
//! predictive means then follow
//! `psi_n - psi_{n-1} = -eps(beta) (psi_{n-1} - p) + delta(beta) (xi_n - psi_{n-1})`
//! and, read on the clock `t = n (1 - beta)^2`, converge to the Wright–Fisher
//! diffusion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::SimplexPoint;
use crate::urn::{DrawOutcome, UrnParams, UrnTrajectory};

/// Mean-reversion and noise coefficients of a balanced family member.
pub fn eps_delta(alpha: f64, b_scalar: f64, beta: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0) {
        return Err(Error::NonPositiveAlpha(alpha));
    }
    if !(b_scalar > 0.0) {
        return Err(Error::ZeroFixedTotal);
    }
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::BetaNotBelowOne(beta));
    }
    let gap = 1.0 - beta;
    let denom = alpha + b_scalar * gap;
    Ok((b_scalar * gap * gap / denom, alpha * gap / denom))
}

/// Parameters of one member of the scaling family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledFamilyParams {
    pub alpha: f64,
    pub b: Vec<f64>,
    pub beta: f64,
    /// Direction of `B_0`; `None` means `p`, which starts the urn at `psi_0 = p`.
    pub b0_direction: Option<SimplexPoint>,
}

impl ScaledFamilyParams {
    pub fn new(alpha: f64, b: Vec<f64>, beta: f64) -> Self {
        Self { alpha, b, beta, b0_direction: None }
    }

    pub fn with_direction(mut self, dir: SimplexPoint) -> Self {
        self.b0_direction = Some(dir);
        self
    }

    /// `|B_0| = alpha / (1 - beta)`.
    pub fn b0_total(&self) -> f64 {
        self.alpha / (1.0 - self.beta)
    }
}

/// Builds the balanced urn for one `beta`.
pub fn build_family_member(fp: &ScaledFamilyParams) -> Result<UrnParams> {
    if !(0.0..1.0).contains(&fp.beta) {
        return Err(Error::BetaNotBelowOne(fp.beta));
    }
    if !(fp.alpha > 0.0) {
        return Err(Error::NonPositiveAlpha(fp.alpha));
    }
    let b_total: f64 = fp.b.iter().sum();
    if !(b_total > 0.0) {
        return Err(Error::ZeroFixedTotal);
    }
    let dir = match &fp.b0_direction {
        Some(d) => {
            if d.dim() != fp.b.len() {
                return Err(Error::LengthMismatch { b: fp.b.len(), b0: d.dim() });
            }
            d.clone()
        }
        None => SimplexPoint::from_weights(&fp.b)?,
    };
    let r = fp.b0_total();
    let b0 = dir.as_slice().iter().map(|d| r * d).collect();
    UrnParams::new(fp.alpha, fp.beta, fp.b.clone(), b0)
}

/// Length of one urn step on the diffusion clock, `(1 - beta)^2`.
pub fn time_step(beta: f64) -> f64 {
    let g = 1.0 - beta;
    g * g
}

/// Number of whole steps `floor(x)` for `x = t / h`, where grid times that
/// are multiples of `h` up to rounding snap to that multiple.
pub fn steps_floor(t: f64, h: f64) -> u64 {
    let x = t / h;
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.max(1.0) {
        r as u64
    } else {
        x.floor() as u64
    }
}

pub(crate) fn steps_ceil(t: f64, h: f64) -> u64 {
    let x = t / h;
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.max(1.0) {
        r as u64
    } else {
        x.ceil() as u64
    }
}

/// Urn steps needed to reach rescaled time `t_max`.
pub fn required_steps(beta: f64, t_max: f64) -> Result<u64> {
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::BetaNotBelowOne(beta));
    }
    if !(t_max >= 0.0) || !t_max.is_finite() {
        return Err(crate::error::invalid("t_max", "must be finite and nonnegative"));
    }
    Ok(steps_ceil(t_max, time_step(beta)))
}

/// `X_t = psi_{floor(t / (1-beta)^2)}` sampled on a regular output grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescaledPath {
    pub beta: f64,
    pub t_grid: Vec<f64>,
    /// Columnar values: `x[i][j]` is component `i` at `t_grid[j]`.
    pub x: Vec<Vec<f64>>,
}

impl RescaledPath {
    pub fn at(&self, j: usize) -> SimplexPoint {
        SimplexPoint::from_vec_unchecked(self.x.iter().map(|c| c[j]).collect())
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> std::io::Result<()> {
        crate::export::write_time_table(w, &self.t_grid, &self.x, "X")
    }
}

fn output_grid(t_max: f64, dt_out: f64) -> Result<Vec<f64>> {
    if !(dt_out > 0.0) || !dt_out.is_finite() {
        return Err(crate::error::invalid("dt_out", "must be positive"));
    }
    if !(t_max >= 0.0) || !t_max.is_finite() {
        return Err(crate::error::invalid("t_max", "must be finite and nonnegative"));
    }
    let n = steps_floor(t_max, dt_out);
    Ok((0..=n).map(|j| j as f64 * dt_out).collect())
}

/// Piecewise-constant sampling of an urn trajectory on the diffusion clock.
pub fn rescale_time(traj: &UrnTrajectory, beta: f64, t_max: f64, dt_out: f64) -> Result<RescaledPath> {
    let required = required_steps(beta, t_max)?;
    if (traj.steps() as u64) < required {
        return Err(Error::TrajectoryTooShort { required, available: traj.steps() as u64 });
    }
    let h = time_step(beta);
    let t_grid = output_grid(t_max, dt_out)?;
    let idx: Vec<usize> = t_grid.iter().map(|t| steps_floor(*t, h) as usize).collect();
    let x = traj.psi.iter().map(|col| idx.iter().map(|&n| col[n]).collect()).collect();
    Ok(RescaledPath { beta, t_grid, x })
}

/// A partition `J_1, ..., J_m` of the colours `0..k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    groups: Vec<Vec<usize>>,
    k: usize,
    owner: Vec<usize>,
}

impl Partition {
    pub fn new(groups: Vec<Vec<usize>>, k: usize) -> Result<Self> {
        let mut owner = vec![usize::MAX; k];
        for (g, grp) in groups.iter().enumerate() {
            if grp.is_empty() {
                return Err(Error::InvalidPartition(format!("group {} is empty", g + 1)));
            }
            for &i in grp {
                if i >= k {
                    return Err(Error::InvalidPartition(format!("colour index {i} out of range for k = {k}")));
                }
                if owner[i] != usize::MAX {
                    return Err(Error::InvalidPartition(format!("colour index {i} appears twice")));
                }
                owner[i] = g;
            }
        }
        if let Some(i) = owner.iter().position(|o| *o == usize::MAX) {
            return Err(Error::InvalidPartition(format!("colour index {i} is not covered")));
        }
        Ok(Self { groups, k, owner })
    }

    pub fn identity(k: usize) -> Self {
        Self::new((0..k).map(|i| vec![i]).collect(), k).expect("identity partition")
    }

    /// `J = {set, complement}`.
    pub fn bipartition(set: &[usize], k: usize) -> Result<Self> {
        let rest: Vec<usize> = (0..k).filter(|i| !set.contains(i)).collect();
        Self::new(vec![set.to_vec(), rest], k)
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Group containing colour `i`.
    pub fn group_of(&self, i: usize) -> usize {
        self.owner[i]
    }

    /// Sums a length-`k` vector over each group.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        self.groups.iter().map(|g| g.iter().map(|&i| v[i]).sum()).collect()
    }

    fn check_k(&self, k: usize) -> Result<()> {
        if k != self.k {
            return Err(Error::InvalidPartition(format!("partition is over {} colours, input has {k}", self.k)));
        }
        Ok(())
    }

    /// The grouped urn: `b` and `B_0` are summed over each group.
    pub fn project_params(&self, params: &UrnParams) -> Result<UrnParams> {
        self.check_k(params.k())?;
        UrnParams::new(params.alpha(), params.beta(), self.project(params.b()), self.project(params.b0()))
    }

    /// Groups draws, predictive means and parameters of an urn trajectory.
    pub fn project_trajectory(&self, traj: &UrnTrajectory) -> Result<UrnTrajectory> {
        self.check_k(traj.params.k())?;
        let psi = self
            .groups
            .iter()
            .map(|g| {
                (0..=traj.steps())
                    .map(|n| g.iter().map(|&i| traj.psi[i][n]).sum())
                    .collect()
            })
            .collect();
        let draws = traj.draws.iter().map(|d| DrawOutcome(self.owner[d.0])).collect();
        Ok(UrnTrajectory { params: self.project_params(&traj.params)?, seed: traj.seed.clone(), draws, psi })
    }

    /// Groups the components of a rescaled path.
    pub fn project_path(&self, path: &RescaledPath) -> Result<RescaledPath> {
        self.check_k(path.x.len())?;
        let x = self
            .groups
            .iter()
            .map(|g| (0..path.t_grid.len()).map(|j| g.iter().map(|&i| path.x[i][j]).sum()).collect())
            .collect();
        Ok(RescaledPath { beta: path.beta, t_grid: path.t_grid.clone(), x })
    }
}

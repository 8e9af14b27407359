//! The Rescaled Pólya urn.
//!
//! The urn holds `b_i + B_{n,i}` (real-valued) balls of color `i`. The fixed
//! part `b` never changes; after each draw the variable part is rescaled by
//! `beta` and `alpha` balls of the drawn color are added:
//! `B_{n+1} = beta * B_n + alpha * xi_{n+1}`. With `beta = 1` this is the
//! standard Eggenberger–Pólya urn; with `beta = 0` the urn only remembers the
//! last draw.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::export::fmt17;
use crate::rng;
use crate::simplex::SimplexPoint;

/// Fixed parameters of an urn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UrnParams {
    alpha: f64,
    beta: f64,
    b: Vec<f64>,
    b0: Vec<f64>,
}

impl UrnParams {
    pub fn new(alpha: f64, beta: f64, b: Vec<f64>, b0: Vec<f64>) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::NonPositiveAlpha(alpha));
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::BetaOutOfRange(beta));
        }
        if b.len() != b0.len() {
            return Err(Error::LengthMismatch { b: b.len(), b0: b0.len() });
        }
        if b.len() < 2 {
            return Err(Error::TooFewColors(b.len()));
        }
        for (i, v) in b.iter().enumerate() {
            if !(*v >= 0.0) || !v.is_finite() {
                return Err(Error::NegativeFixedBalls { color: i + 1, value: *v });
            }
        }
        if !b0.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter { name: "b0", reason: "entries must be finite".into() });
        }
        if b.iter().sum::<f64>() <= 0.0 {
            return Err(Error::ZeroFixedTotal);
        }
        for (i, (bi, b0i)) in b.iter().zip(&b0).enumerate() {
            if !(bi + b0i > 0.0) {
                return Err(Error::NonPositiveInitialBalls { color: i + 1, value: bi + b0i });
            }
        }
        Ok(Self { alpha, beta, b, b0 })
    }

    pub fn k(&self) -> usize {
        self.b.len()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn b0(&self) -> &[f64] {
        &self.b0
    }

    /// `|b|`.
    pub fn b_total(&self) -> f64 {
        self.b.iter().sum()
    }

    /// `|B_0|` (signed sum).
    pub fn b0_total(&self) -> f64 {
        self.b0.iter().sum()
    }

    /// The attracting point `p = b / |b|`.
    pub fn p(&self) -> SimplexPoint {
        SimplexPoint::from_weights(&self.b).expect("validated |b| > 0")
    }
}

/// The draw at one time step, stored as a 0-based color index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DrawOutcome(pub usize);

impl DrawOutcome {
    pub fn color(self) -> usize {
        self.0
    }

    /// The one-hot vector `xi` of this draw.
    pub fn one_hot(self, k: usize) -> Vec<f64> {
        let mut xi = vec![0.0; k];
        xi[self.0] = 1.0;
        xi
    }
}

/// Urn contents after `n` draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UrnState {
    n: u64,
    balls: Vec<f64>,
    r_star: f64,
}

impl UrnState {
    pub fn n(&self) -> u64 {
        self.n
    }

    /// The variable part `B_n`.
    pub fn variable_balls(&self) -> &[f64] {
        &self.balls
    }

    /// Total number of balls `r*_n = |b| + |B_n|`.
    pub fn r_star(&self) -> f64 {
        self.r_star
    }
}

pub fn new_urn(params: &UrnParams) -> UrnState {
    UrnState { n: 0, balls: params.b0.clone(), r_star: params.b_total() + params.b0_total() }
}

/// `psi_n = (b + B_n) / r*_n`, the law of the next draw.
pub fn predictive_mean(params: &UrnParams, state: &UrnState) -> SimplexPoint {
    let psi = params.b.iter().zip(&state.balls).map(|(b, bb)| (b + bb) / state.r_star).collect();
    SimplexPoint::from_vec_unchecked(psi)
}

/// Inverse-CDF draw from the current urn using a uniform `u` in `[0, 1)`.
///
/// Colors are scanned left to right and the first color whose cumulative
/// ball count exceeds `u * r*` is returned.
pub fn sample_color(params: &UrnParams, state: &UrnState, u: f64) -> DrawOutcome {
    DrawOutcome(inverse_cdf(&params.b, &state.balls, state.r_star, u))
}

#[inline]
fn inverse_cdf(b: &[f64], balls: &[f64], r_star: f64, u: f64) -> usize {
    let target = u * r_star;
    let mut cum = 0.0;
    let last = b.len() - 1;
    for i in 0..last {
        cum += b[i] + balls[i];
        if target < cum {
            return i;
        }
    }
    last
}

/// Deterministic state update for a given draw.
pub fn apply_draw(params: &UrnParams, state: &UrnState, draw: DrawOutcome) -> UrnState {
    let b_sum: f64 = state.balls.iter().sum();
    let mut balls: Vec<f64> = state.balls.iter().map(|v| params.beta * v).collect();
    balls[draw.0] += params.alpha;
    let r_star = state.r_star + (params.beta - 1.0) * b_sum + params.alpha;
    UrnState { n: state.n + 1, balls, r_star }
}

/// Draws one ball and returns the updated urn together with the draw.
pub fn step<R: Rng + ?Sized>(params: &UrnParams, state: &UrnState, rng: &mut R) -> (UrnState, DrawOutcome) {
    let draw = sample_color(params, state, rng.random::<f64>());
    (apply_draw(params, state, draw), draw)
}

/// `B_n` from the initial condition and the first `n` draws, as the explicit
/// sum `beta^n B_0 + sum_h alpha beta^(n-h) xi_h`.
///
/// Only nonnegative powers of `beta` are formed.
pub fn closed_form_b(params: &UrnParams, draws: &[DrawOutcome], n: usize) -> Result<Vec<f64>> {
    if n > draws.len() {
        return Err(Error::TrajectoryTooShort { required: n as u64, available: draws.len() as u64 });
    }
    let beta = params.beta;
    let scale_b0 = beta_pow(beta, n as u64);
    let mut out: Vec<f64> = params.b0.iter().map(|v| scale_b0 * v).collect();
    for (h, d) in draws[..n].iter().enumerate() {
        out[d.0] += params.alpha * beta_pow(beta, (n - 1 - h) as u64);
    }
    Ok(out)
}

fn beta_pow(beta: f64, e: u64) -> f64 {
    if e <= i32::MAX as u64 {
        beta.powi(e as i32)
    } else {
        beta.powf(e as f64)
    }
}

/// Total number of balls after `n` steps, from the geometric-series closed form.
pub fn total_balls(params: &UrnParams, n: u64) -> f64 {
    let b = params.b_total();
    let b0 = params.b0_total();
    if params.beta == 1.0 {
        return b + b0 + n as f64 * params.alpha;
    }
    let r = params.alpha / (1.0 - params.beta);
    b + r + beta_pow(params.beta, n) * (b0 - r)
}

/// `psi_n` computed directly from the draw history.
pub fn closed_form_psi(params: &UrnParams, draws: &[DrawOutcome], n: usize) -> Result<SimplexPoint> {
    let bn = closed_form_b(params, draws, n)?;
    let total = total_balls(params, n as u64);
    Ok(SimplexPoint::from_vec_unchecked(params.b.iter().zip(&bn).map(|(b, v)| (b + v) / total).collect()))
}

/// The split of one predictive-mean increment into mean reversion and a
/// martingale increment:
/// `psi_{n+1} - psi_n = -eps_n (psi_n - p) + delta_n (xi_{n+1} - psi_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementDecomposition {
    pub eps: f64,
    pub delta: f64,
    pub delta_m: Vec<f64>,
}

impl IncrementDecomposition {
    /// The right-hand side of the increment identity.
    pub fn increment(&self, psi: &[f64], p: &[f64]) -> Vec<f64> {
        psi.iter()
            .zip(p)
            .zip(&self.delta_m)
            .map(|((s, pi), dm)| -self.eps * (s - pi) + self.delta * dm)
            .collect()
    }
}

pub fn increment_decomposition(params: &UrnParams, state: &UrnState, draw: DrawOutcome) -> IncrementDecomposition {
    let b_sum: f64 = state.balls.iter().sum();
    let r_next = state.r_star + (params.beta - 1.0) * b_sum + params.alpha;
    let psi = predictive_mean(params, state);
    let mut delta_m: Vec<f64> = psi.as_slice().iter().map(|v| -v).collect();
    delta_m[draw.0] += 1.0;
    IncrementDecomposition {
        eps: params.b_total() * (1.0 - params.beta) / r_next,
        delta: params.alpha / r_next,
        delta_m,
    }
}

/// Where the random stream of a trajectory came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub master: u64,
    pub label: String,
    pub index: u64,
}

/// A simulated urn path with columnar storage of the predictive means:
/// `psi[i][n]` is `psi_{n,i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct UrnTrajectory {
    pub params: UrnParams,
    pub seed: Option<SeedRecord>,
    pub draws: Vec<DrawOutcome>,
    pub psi: Vec<Vec<f64>>,
}

impl UrnTrajectory {
    pub fn steps(&self) -> usize {
        self.draws.len()
    }

    pub fn psi_at(&self, n: usize) -> SimplexPoint {
        SimplexPoint::from_vec_unchecked(self.psi.iter().map(|col| col[n]).collect())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let k = self.params.k();
        write!(w, "n,color")?;
        for i in 1..=k {
            write!(w, ",psi_{i}")?;
        }
        writeln!(w)?;
        for n in 0..=self.steps() {
            write!(w, "{n},")?;
            if n > 0 {
                write!(w, "{}", self.draws[n - 1].0 + 1)?;
            }
            for col in &self.psi {
                write!(w, ",{}", fmt17(col[n]))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<f64>> = (0..=self.steps()).map(|n| self.psi_at(n).into_vec()).collect();
        serde_json::json!({
            "params": self.params,
            "seed": self.seed,
            "draws": self.draws.iter().map(|d| d.0 + 1).collect::<Vec<_>>(),
            "psi": rows,
        })
    }
}

/// In-place stepping for long runs and ensembles.
#[derive(Debug, Clone)]
pub struct UrnWalker<'a> {
    params: &'a UrnParams,
    n: u64,
    balls: Vec<f64>,
    r_star: f64,
}

impl<'a> UrnWalker<'a> {
    pub fn new(params: &'a UrnParams) -> Self {
        let s = new_urn(params);
        Self { params, n: 0, balls: s.balls, r_star: s.r_star }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    #[inline]
    pub fn advance<R: Rng + ?Sized>(&mut self, rng: &mut R) -> DrawOutcome {
        let c = inverse_cdf(&self.params.b, &self.balls, self.r_star, rng.random::<f64>());
        self.apply(c);
        DrawOutcome(c)
    }

    #[inline]
    fn apply(&mut self, c: usize) {
        let beta = self.params.beta;
        let mut b_sum = 0.0;
        for v in self.balls.iter_mut() {
            b_sum += *v;
            *v *= beta;
        }
        self.balls[c] += self.params.alpha;
        self.r_star += (beta - 1.0) * b_sum + self.params.alpha;
        self.n += 1;
    }

    pub fn psi_into(&self, out: &mut [f64]) {
        for ((o, b), bb) in out.iter_mut().zip(&self.params.b).zip(&self.balls) {
            *o = (b + bb) / self.r_star;
        }
    }

    pub fn psi(&self) -> SimplexPoint {
        let mut out = vec![0.0; self.balls.len()];
        self.psi_into(&mut out);
        SimplexPoint::from_vec_unchecked(out)
    }

    pub fn state(&self) -> UrnState {
        UrnState { n: self.n, balls: self.balls.clone(), r_star: self.r_star }
    }
}

/// Runs `steps` draws from a caller-supplied random source.
pub fn simulate_with_rng<R: Rng + ?Sized>(params: &UrnParams, steps: usize, rng: &mut R) -> UrnTrajectory {
    let k = params.k();
    let mut psi: Vec<Vec<f64>> = (0..k).map(|_| Vec::with_capacity(steps + 1)).collect();
    let mut draws = Vec::with_capacity(steps);
    let mut walker = UrnWalker::new(params);
    let mut buf = vec![0.0; k];
    walker.psi_into(&mut buf);
    for (col, v) in psi.iter_mut().zip(&buf) {
        col.push(*v);
    }
    for _ in 0..steps {
        draws.push(walker.advance(rng));
        walker.psi_into(&mut buf);
        for (col, v) in psi.iter_mut().zip(&buf) {
            col.push(*v);
        }
    }
    UrnTrajectory { params: params.clone(), seed: None, draws, psi }
}

/// Runs `steps` draws from the stream `(seed, "urn", 0)`.
pub fn simulate(params: &UrnParams, steps: usize, seed: u64) -> UrnTrajectory {
    let mut rng = rng::stream(seed, "urn", 0);
    let mut traj = simulate_with_rng(params, steps, &mut rng);
    traj.seed = Some(SeedRecord { master: seed, label: "urn".into(), index: 0 });
    traj
}

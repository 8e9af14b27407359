//! Pointwise residual of the forward equation
//! `dp/dt = (b/alpha) sum_i d_i((y_i - p_i) p) + 1/2 sum_i d_ii(y_i (1 - y_i) p) - sum_{i<j} d_ij(y_i y_j p)`.
//!
//! Space derivatives use fourth-order central differences.

use super::product::product_jacobi;
use super::{density_unchecked, eigenvalue_nu, GammaWeights, SpectralDensity};
use crate::wf::WfParams;

/// A density on `T^{k-1}` that can be evaluated off its own grid.
pub trait SpaceTimeDensity {
    fn value(&self, y: &[f64], t: f64) -> f64;
    fn time_derivative(&self, y: &[f64], t: f64) -> f64;
}

/// The stationary density `pi_gamma`.
#[derive(Debug, Clone)]
pub struct StationaryDensity(pub GammaWeights);

impl SpaceTimeDensity for StationaryDensity {
    fn value(&self, y: &[f64], _t: f64) -> f64 {
        density_unchecked(&self.0, y)
    }
    fn time_derivative(&self, _y: &[f64], _t: f64) -> f64 {
        0.0
    }
}

impl SpaceTimeDensity for SpectralDensity {
    fn value(&self, y: &[f64], t: f64) -> f64 {
        self.evaluate(y, t).0
    }
    fn time_derivative(&self, y: &[f64], t: f64) -> f64 {
        self.evaluate(y, t).1
    }
}

/// `pi(y) (1 + amplitude exp(-nu_n t) P_n(y))` for one basis function `P_n`.
#[derive(Debug, Clone)]
pub struct EigenMode {
    gw: GammaWeights,
    index: Vec<u32>,
    amplitude: f64,
    nu: f64,
}

impl EigenMode {
    pub fn new(params: &WfParams, index: Vec<u32>, amplitude: f64) -> Self {
        let deg = index.iter().sum();
        Self { gw: GammaWeights::from_wf(params), nu: eigenvalue_nu(deg, params), index, amplitude }
    }
}

impl SpaceTimeDensity for EigenMode {
    fn value(&self, y: &[f64], t: f64) -> f64 {
        density_unchecked(&self.gw, y) * (1.0 + self.amplitude * (-self.nu * t).exp() * product_jacobi(&self.index, &self.gw, y))
    }
    fn time_derivative(&self, y: &[f64], t: f64) -> f64 {
        -self.nu * density_unchecked(&self.gw, y) * self.amplitude * (-self.nu * t).exp() * product_jacobi(&self.index, &self.gw, y)
    }
}

/// Points of a regular grid with every simplex coordinate (including the
/// implied last one) in `[lo, 1]`, and every free coordinate in `[lo, hi]`.
pub fn interior_grid(dim: usize, lo: f64, hi: f64, per_axis: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = if per_axis == 1 {
        vec![0.5 * (lo + hi)]
    } else {
        (0..per_axis).map(|i| lo + (hi - lo) * i as f64 / (per_axis - 1) as f64).collect()
    };
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for _ in 0..dim {
        out = out.into_iter().flat_map(|p| axis.iter().map(move |v| [p.clone(), vec![*v]].concat())).collect();
    }
    out.retain(|y| 1.0 - y.iter().sum::<f64>() >= lo - 1e-12);
    out
}

fn d1<F: Fn(&[f64]) -> f64>(f: &F, y: &[f64], i: usize, h: f64) -> f64 {
    let at = |s: f64| {
        let mut z = y.to_vec();
        z[i] += s * h;
        f(&z)
    };
    (-at(2.0) + 8.0 * at(1.0) - 8.0 * at(-1.0) + at(-2.0)) / (12.0 * h)
}

fn d2<F: Fn(&[f64]) -> f64>(f: &F, y: &[f64], i: usize, h: f64) -> f64 {
    let at = |s: f64| {
        let mut z = y.to_vec();
        z[i] += s * h;
        f(&z)
    };
    (-at(2.0) + 16.0 * at(1.0) - 30.0 * at(0.0) + 16.0 * at(-1.0) - at(-2.0)) / (12.0 * h * h)
}

fn d11<F: Fn(&[f64]) -> f64>(f: &F, y: &[f64], i: usize, j: usize, h: f64) -> f64 {
    let inner = |z: &[f64]| d1(f, z, j, h);
    d1(&inner, y, i, h)
}

/// `dp/dt - (forward operator) p` at each point, at time `t`, with step `h`.
pub fn forward_equation_residual<D: SpaceTimeDensity + ?Sized>(density: &D, params: &WfParams, points: &[Vec<f64>], t: f64, h: f64) -> Vec<f64> {
    let c = params.rate();
    let p = params.p().as_slice();
    points
        .iter()
        .map(|y| {
            let dim = y.len();
            let mut rhs = 0.0;
            for i in 0..dim {
                let drift = |z: &[f64]| (z[i] - p[i]) * density.value(z, t);
                rhs += c * d1(&drift, y, i, h);
                let diff = |z: &[f64]| z[i] * (1.0 - z[i]) * density.value(z, t);
                rhs += 0.5 * d2(&diff, y, i, h);
                for j in i + 1..dim {
                    let cross = |z: &[f64]| z[i] * z[j] * density.value(z, t);
                    rhs -= d11(&cross, y, i, j, h);
                }
            }
            density.time_derivative(y, t) - rhs
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplex::{SimplexPoint, TPoint};

    fn max_abs(v: &[f64]) -> f64 {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    #[test]
    fn stationary_density_solves_the_forward_equation() {
        let params = WfParams::new(1.2, 1.0, SimplexPoint::new(vec![0.3, 0.3, 0.4]).unwrap()).unwrap();
        let gw = GammaWeights::from_wf(&params);
        let grid = interior_grid(2, 0.1, 0.8, 8);
        let r = forward_equation_residual(&StationaryDensity(gw), &params, &grid, 0.0, 1e-3);
        assert!(max_abs(&r) < 1e-6, "{}", max_abs(&r));
    }

    #[test]
    fn halved_drift_does_not_leave_the_stationary_density_invariant() {
        // With the drift term also multiplied by 1/2 the stationary law would change.
        let params = WfParams::new(1.2, 1.0, SimplexPoint::new(vec![0.3, 0.7]).unwrap()).unwrap();
        let halved = WfParams::new(0.6, 1.0, SimplexPoint::new(vec![0.3, 0.7]).unwrap()).unwrap();
        let gw = GammaWeights::from_wf(&params);
        let grid = interior_grid(1, 0.1, 0.9, 9);
        let r = forward_equation_residual(&StationaryDensity(gw), &halved, &grid, 0.0, 1e-3);
        assert!(max_abs(&r) > 1e-2);
    }

    #[test]
    fn single_mode_residual() {
        let params = WfParams::new(1.5, 1.0, SimplexPoint::new(vec![0.4, 0.6]).unwrap()).unwrap();
        let grid = interior_grid(1, 0.1, 0.9, 17);
        let mode = EigenMode::new(&params, vec![1], 0.3);
        let r = forward_equation_residual(&mode, &params, &grid, 0.5, 1e-3);
        assert!(max_abs(&r) < 1e-8, "{}", max_abs(&r));
    }

    #[test]
    fn truncated_series_residual_k2() {
        let params = WfParams::new(1.5, 1.0, SimplexPoint::new(vec![0.4, 0.6]).unwrap()).unwrap();
        let sd = SpectralDensity::new(&params, &TPoint::new(vec![0.3]).unwrap(), 20).unwrap();
        let grid = interior_grid(1, 0.1, 0.9, 17);
        let r = forward_equation_residual(&sd, &params, &grid, 1.0, 1e-3);
        assert!(max_abs(&r) < 1e-4, "{}", max_abs(&r));
    }

    #[test]
    fn grid_respects_the_last_coordinate() {
        let g = interior_grid(2, 0.1, 0.8, 8);
        assert!(g.iter().all(|y| 1.0 - y[0] - y[1] >= 0.1 - 1e-12));
        assert_eq!(interior_grid(1, 0.2, 0.8, 4).len(), 4);
    }
}

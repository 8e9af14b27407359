//! Points of the probability simplex and of its `(k-1)`-dimensional chart
//! `T^{k-1} = { y : y_i >= 0, sum y_i <= 1 }`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when validating that a vector sums to one.
pub const SIMPLEX_TOL: f64 = 1e-10;

/// A length-`k` nonnegative vector summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimplexPoint(Vec<f64>);

impl SimplexPoint {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(x, SIMPLEX_TOL)
    }

    pub fn with_tolerance(x: Vec<f64>, tol: f64) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::OffSimplex("empty vector".into()));
        }
        if let Some((i, v)) = x.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < -tol) {
            return Err(Error::OffSimplex(format!("component {} is {}", i + 1, v)));
        }
        let s: f64 = x.iter().sum();
        if (s - 1.0).abs() > tol {
            return Err(Error::OffSimplex(format!("components sum to {s}")));
        }
        Ok(Self(x))
    }

    /// Normalizes a nonnegative vector with positive total.
    pub fn from_weights(w: &[f64]) -> Result<Self> {
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::OffSimplex("weights must be finite and nonnegative".into()));
        }
        let s: f64 = w.iter().sum();
        if s <= 0.0 {
            return Err(Error::OffSimplex("weights sum to zero".into()));
        }
        Ok(Self(w.iter().map(|v| v / s).collect()))
    }

    /// The `i`-th vertex `e_i` of the simplex in `k` dimensions.
    pub fn vertex(k: usize, i: usize) -> Self {
        let mut v = vec![0.0; k];
        v[i] = 1.0;
        Self(v)
    }

    pub fn uniform(k: usize) -> Self {
        Self(vec![1.0 / k as f64; k])
    }

    pub(crate) fn from_vec_unchecked(x: Vec<f64>) -> Self {
        Self(x)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Drops the last coordinate, giving the `T^{k-1}` chart.
    pub fn to_tpoint(&self) -> TPoint {
        TPoint(self.0[..self.0.len() - 1].to_vec())
    }
}

impl std::ops::Index<usize> for SimplexPoint {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// A point `y` of `T^{k-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TPoint(Vec<f64>);

impl TPoint {
    pub fn new(y: Vec<f64>) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::OffSimplex("T point needs at least one coordinate".into()));
        }
        let tol = 1e-12;
        if let Some((i, v)) = y.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < -tol) {
            return Err(Error::OffSimplex(format!("y_{} = {}", i + 1, v)));
        }
        let s: f64 = y.iter().sum();
        if s > 1.0 + tol {
            return Err(Error::OffSimplex(format!("coordinates sum to {s} > 1")));
        }
        Ok(Self(y))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// The implied last simplex coordinate `1 - sum y_i`.
    pub fn last(&self) -> f64 {
        1.0 - self.0.iter().sum::<f64>()
    }

    /// Whether every simplex coordinate (including the implied last one) is positive.
    pub fn is_interior(&self) -> bool {
        self.0.iter().all(|v| *v > 0.0) && self.last() > 0.0
    }

    pub fn to_simplex(&self) -> SimplexPoint {
        let mut x = self.0.clone();
        x.push(self.last().max(0.0));
        SimplexPoint(x)
    }
}

/// Clamps negative entries to zero and rescales so that the left-to-right
/// sum of the result is exactly `1.0`.
///
/// Returns `None` when every entry is nonpositive or not finite.
pub fn project_to_simplex(v: &mut [f64]) -> Option<()> {
    for x in v.iter_mut() {
        if !x.is_finite() {
            return None;
        }
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    let s: f64 = v.iter().sum();
    if s <= 0.0 {
        return None;
    }
    for x in v.iter_mut() {
        *x /= s;
    }
    // The last positive component absorbs the rounding residue. When that
    // overshoots, components are walked one ulp at a time from the right
    // until the left-to-right sum is exactly one.
    if let Some(last) = v.iter().rposition(|x| *x > 0.0) {
        let head: f64 = v[..last].iter().sum();
        if head <= 1.0 {
            v[last] = 1.0 - head;
        }
    }
    'outer: for i in (0..v.len()).rev() {
        if v[i] == 0.0 {
            continue;
        }
        let s: f64 = v.iter().sum();
        if s == 1.0 {
            break;
        }
        let coarse = v[i] + (1.0 - s);
        if coarse >= 0.0 {
            v[i] = coarse;
        }
        for _ in 0..16 {
            let s: f64 = v.iter().sum();
            if s == 1.0 {
                break 'outer;
            }
            let next = if s < 1.0 { v[i].next_up() } else { v[i].next_down() };
            if next < 0.0 {
                break;
            }
            v[i] = next;
        }
    }
    Some(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_off_simplex() {
        assert!(SimplexPoint::new(vec![0.5, 0.6]).is_err());
        assert!(SimplexPoint::new(vec![-0.1, 1.1]).is_err());
        assert!(SimplexPoint::new(vec![0.25, 0.75]).is_ok());
        assert!(TPoint::new(vec![0.7, 0.4]).is_err());
    }

    #[test]
    fn chart_round_trip() {
        let x = SimplexPoint::new(vec![0.2, 0.3, 0.5]).unwrap();
        let y = x.to_tpoint();
        assert_eq!(y.as_slice(), &[0.2, 0.3]);
        assert!((y.to_simplex()[2] - 0.5).abs() < 1e-15);
        assert!(y.is_interior());
    }

    #[test]
    fn projection_is_exact_on_many_random_vectors() {
        use rand::Rng;
        let mut r = crate::rng::stream(0, "test-projection", 0);
        for k in 2..7 {
            for _ in 0..20_000 {
                let mut v: Vec<f64> = (0..k).map(|_| r.random::<f64>() - 0.1).collect();
                if project_to_simplex(&mut v).is_some() {
                    assert_eq!(v.iter().sum::<f64>(), 1.0, "{v:?}");
                    assert!(v.iter().all(|x| *x >= 0.0));
                }
            }
        }
    }

    #[test]
    fn projection_sums_to_one_exactly() {
        let mut v = vec![0.1, -0.2, 0.3, 0.7000000001];
        project_to_simplex(&mut v).unwrap();
        assert_eq!(v.iter().sum::<f64>(), 1.0);
        assert_eq!(v[1], 0.0);
        let mut zero = vec![-1.0, 0.0];
        assert!(project_to_simplex(&mut zero).is_none());
    }
}

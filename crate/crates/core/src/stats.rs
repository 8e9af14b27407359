//! Goodness-of-fit statistics: the chi-squared statistic of draw counts,
//! running empirical means, and one- and two-sample Kolmogorov–Smirnov tests.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::simplex::SimplexPoint;
use crate::urn::DrawOutcome;

/// Raw chi-squared statistic of observed color counts against `p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSqReport {
    pub n: u64,
    pub counts: Vec<u64>,
    pub p: SimplexPoint,
    pub statistic: f64,
}

/// `N sum_i (O_i / N - p_i)^2 / p_i`.
pub fn chi_squared_stat(counts: &[u64], p: &SimplexPoint, n: u64) -> Result<f64> {
    if counts.len() != p.dim() {
        return Err(invalid("counts", format!("length {} differs from k = {}", counts.len(), p.dim())));
    }
    if n == 0 || counts.iter().sum::<u64>() != n {
        return Err(invalid("counts", "must be nonempty and sum to N"));
    }
    if p.as_slice().iter().any(|&v| v <= 0.0) {
        return Err(invalid("p", "every component must be positive"));
    }
    let nf = n as f64;
    Ok(nf * counts.iter().zip(p.as_slice()).map(|(&o, &q)| (o as f64 / nf - q).powi(2) / q).sum::<f64>())
}

impl ChiSqReport {
    pub fn from_draws(draws: &[DrawOutcome], p: &SimplexPoint) -> Result<Self> {
        let mut counts = vec![0u64; p.dim()];
        for d in draws {
            let c = counts.get_mut(d.color()).ok_or_else(|| invalid("draws", "color out of range"))?;
            *c += 1;
        }
        let n = draws.len() as u64;
        let statistic = chi_squared_stat(&counts, p, n)?;
        Ok(Self { n, counts, p: p.clone(), statistic })
    }
}

/// Running means `bar xi_N = (1/N) sum_{n <= N} xi_n` for every prefix `N >= 1`.
pub fn empirical_mean(draws: &[DrawOutcome], k: usize) -> Result<Vec<SimplexPoint>> {
    if draws.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut counts = vec![0u64; k];
    let mut out = Vec::with_capacity(draws.len());
    for (n, d) in draws.iter().enumerate() {
        let c = counts.get_mut(d.color()).ok_or_else(|| invalid("draws", "color out of range"))?;
        *c += 1;
        let inv = 1.0 / (n + 1) as f64;
        out.push(SimplexPoint::from_vec_unchecked(counts.iter().map(|&c| c as f64 * inv).collect()));
    }
    Ok(out)
}

/// `c(a) = sqrt(-ln(a / 2) / 2)`, the asymptotic Kolmogorov quantile at level `a`.
pub fn kolmogorov_quantile(level: f64) -> f64 {
    (-(level / 2.0).ln() / 2.0).sqrt()
}

/// `P(K > x) = 2 sum_{j >= 1} (-1)^{j-1} exp(-2 j^2 x^2)` for the Kolmogorov law.
pub fn kolmogorov_survival(x: f64) -> f64 {
    // P(K <= 0.2) is below 1e-20.
    if x < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for j in 1..=100 {
        let j = j as f64;
        let term = (-2.0 * j * j * x * x).exp();
        s += if j as u64 % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// Kolmogorov–Smirnov distance with asymptotic critical values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsReport {
    pub d: f64,
    pub n: usize,
    /// Second sample size for the two-sample test.
    pub m: Option<usize>,
    pub critical_05: f64,
    pub critical_01: f64,
    pub p_value: f64,
}

impl KsReport {
    fn new(d: f64, n: usize, m: Option<usize>) -> Self {
        let ne = match m {
            None => n as f64,
            Some(m) => (n * m) as f64 / (n + m) as f64,
        };
        let s = ne.sqrt();
        Self {
            d,
            n,
            m,
            critical_05: kolmogorov_quantile(0.05) / s,
            critical_01: kolmogorov_quantile(0.01) / s,
            p_value: kolmogorov_survival(d * s),
        }
    }

    pub fn rejects_at_05(&self) -> bool {
        self.d > self.critical_05
    }

    pub fn rejects_at_01(&self) -> bool {
        self.d > self.critical_01
    }
}

fn sorted(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(invalid("samples", "contain NaN"));
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// `sup_x |F_n(x) - F(x)|` for a continuous `cdf`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<KsReport> {
    let v = sorted(samples)?;
    let n = v.len() as f64;
    let d = v.iter().enumerate().fold(0.0f64, |acc, (i, &x)| {
        let f = cdf(x);
        acc.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    });
    Ok(KsReport::new(d.clamp(0.0, 1.0), v.len(), None))
}

/// `sup_x |F_n(x) - G_m(x)|` of two empirical distribution functions.
pub fn ks_two_sample(s1: &[f64], s2: &[f64]) -> Result<KsReport> {
    let a = sorted(s1)?;
    let b = sorted(s2)?;
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(KsReport::new(d, a.len(), Some(b.len())))
}

/// CDF of `Beta(a, b)`.
pub fn beta_cdf(a: f64, b: f64) -> Result<impl Fn(f64) -> f64> {
    use statrs::distribution::{Beta, ContinuousCDF};
    let dist = Beta::new(a, b).map_err(|e| invalid("beta shape", e.to_string()))?;
    Ok(move |x: f64| dist.cdf(x.clamp(0.0, 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::urn::{simulate, UrnParams};
    use proptest::prelude::*;
    use rand::Rng;

    fn sp(v: &[f64]) -> SimplexPoint {
        SimplexPoint::new(v.to_vec()).unwrap()
    }

    #[test]
    fn chi_squared_examples() {
        assert_eq!(chi_squared_stat(&[50, 50], &sp(&[0.5, 0.5]), 100).unwrap(), 0.0);
        assert!((chi_squared_stat(&[60, 40], &sp(&[0.5, 0.5]), 100).unwrap() - 4.0).abs() < 1e-12);
        assert!(chi_squared_stat(&[60, 40], &sp(&[1.0, 0.0]), 100).is_err());
        assert!(chi_squared_stat(&[60, 41], &sp(&[0.5, 0.5]), 100).is_err());
        assert!(chi_squared_stat(&[0, 0], &sp(&[0.5, 0.5]), 0).is_err());
    }

    proptest! {
        #[test]
        fn chi_squared_forms_agree_and_permute(
            counts in prop::collection::vec(0u64..1000, 2..7), w in prop::collection::vec(0.05f64..1.0, 7), shift in 0usize..7
        ) {
            let k = counts.len();
            let n: u64 = counts.iter().sum();
            prop_assume!(n > 0);
            let p = SimplexPoint::from_weights(&w[..k]).unwrap();
            let s = chi_squared_stat(&counts, &p, n).unwrap();
            prop_assert!(s >= 0.0);
            let nf = n as f64;
            let alt: f64 = counts.iter().zip(p.as_slice()).map(|(&o, &q)| (o as f64 - nf * q).powi(2) / (nf * q)).sum();
            prop_assert!((s - alt).abs() <= 1e-12 * s.max(1.0));
            let rot = |v: &[f64]| -> Vec<f64> { (0..k).map(|i| v[(i + shift) % k]).collect() };
            let c2: Vec<u64> = (0..k).map(|i| counts[(i + shift) % k]).collect();
            let p2 = SimplexPoint::from_vec_unchecked(rot(p.as_slice()));
            let s2 = chi_squared_stat(&c2, &p2, n).unwrap();
            prop_assert!((s - s2).abs() <= 1e-12 * s.max(1.0));
        }

        #[test]
        fn running_means_stay_on_the_simplex(colors in prop::collection::vec(0usize..4, 1..300)) {
            let draws: Vec<DrawOutcome> = colors.iter().map(|&c| DrawOutcome(c)).collect();
            for m in empirical_mean(&draws, 4).unwrap() {
                prop_assert!(m.as_slice().iter().all(|&v| (0.0..=1.0).contains(&v)));
                prop_assert!((m.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn ks_distance_is_a_probability(a in prop::collection::vec(-3.0f64..3.0, 1..60), b in prop::collection::vec(-3.0f64..3.0, 1..60)) {
            let r = ks_two_sample(&a, &b).unwrap();
            prop_assert!((0.0..=1.0).contains(&r.d));
            prop_assert_eq!(r.d, ks_two_sample(&b, &a).unwrap().d);
            let o = ks_one_sample(&a, |x| ((x + 3.0) / 6.0).clamp(0.0, 1.0)).unwrap();
            prop_assert!((0.0..=1.0).contains(&o.d));
        }
    }

    #[test]
    fn constant_draws_give_a_vertex_mean() {
        let m = empirical_mean(&[DrawOutcome(0); 5], 3).unwrap();
        assert_eq!(m.len(), 5);
        assert_eq!(m[4].as_slice(), &[1.0, 0.0, 0.0]);
        assert!(empirical_mean(&[], 2).is_err());
    }

    #[test]
    fn empirical_mean_of_the_urn_approaches_p() {
        let params = UrnParams::new(1.0, 0.95, vec![1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let traj = simulate(&params, 100_000, 17);
        let means = empirical_mean(&traj.draws, 2).unwrap();
        assert!((means[99_999][0] - 0.5).abs() < 0.05);
        // Spread of the running mean over each decade shrinks.
        let spread = |lo: usize, hi: usize| {
            let (mn, mx) = means[lo..hi].iter().fold((1.0f64, 0.0f64), |(a, b), m| (a.min(m[0]), b.max(m[0])));
            mx - mn
        };
        assert!(spread(1_000, 10_000) > spread(10_000, 100_000));
    }

    #[test]
    fn critical_values_match_tables() {
        assert!((kolmogorov_quantile(0.05) - 1.3581).abs() < 1e-4);
        assert!((kolmogorov_quantile(0.01) - 1.6276).abs() < 1e-4);
        for (n, c05, c01) in [(100usize, 0.1358, 0.1628), (1000, 0.04295, 0.05147)] {
            let r = KsReport::new(0.0, n, None);
            assert!((r.critical_05 - c05).abs() < 1e-3 && (r.critical_01 - c01).abs() < 1e-3);
        }
        assert!((kolmogorov_survival(kolmogorov_quantile(0.05)) - 0.05).abs() < 1e-6);
        assert!((kolmogorov_survival(kolmogorov_quantile(0.01)) - 0.01).abs() < 1e-8);
        let two = KsReport::new(0.0, 100, Some(300));
        assert!((two.critical_05 - 1.3581 * (400.0f64 / 30_000.0).sqrt()).abs() < 1e-4);
    }

    #[test]
    fn identical_samples_have_zero_distance() {
        let v = [0.3, 0.1, 0.9, 0.1, 0.5];
        assert_eq!(ks_two_sample(&v, &v).unwrap().d, 0.0);
        assert!(ks_two_sample(&v, &[]).is_err());
        assert!(ks_one_sample(&[f64::NAN], |x| x).is_err());
    }

    #[test]
    fn two_sample_distance_matches_brute_force() {
        let mut rng = crate::rng::stream(4, "test", 0);
        for _ in 0..20 {
            let a: Vec<f64> = (0..37).map(|_| (rng.random::<f64>() * 10.0).floor()).collect();
            let b: Vec<f64> = (0..23).map(|_| (rng.random::<f64>() * 10.0).floor()).collect();
            let ecdf = |s: &[f64], x: f64| s.iter().filter(|&&v| v <= x).count() as f64 / s.len() as f64;
            let brute = a.iter().chain(&b).map(|&x| (ecdf(&a, x) - ecdf(&b, x)).abs()).fold(0.0, f64::max);
            assert!((ks_two_sample(&a, &b).unwrap().d - brute).abs() < 1e-15);
        }
    }

    #[test]
    fn uniform_samples_calibrate_and_shift_is_detected() {
        let mut accepted = 0;
        for rep in 0..40 {
            let mut rng = crate::rng::stream(rep, "test", 0);
            let s: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
            if !ks_one_sample(&s, |x| x.clamp(0.0, 1.0)).unwrap().rejects_at_01() {
                accepted += 1;
            }
        }
        assert!(accepted >= 38, "{accepted}/40");
        let mut rng = crate::rng::stream(99, "test", 0);
        let s: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
        let r = ks_one_sample(&s, |x| (x - 0.2).clamp(0.0, 1.0)).unwrap();
        assert!(r.rejects_at_01() && r.d > 0.19);
    }

    #[test]
    fn beta_cdf_endpoints() {
        let f = beta_cdf(2.0, 3.0).unwrap();
        assert_eq!(f(0.0), 0.0);
        assert_eq!(f(1.0), 1.0);
        // Beta(2, 3): F(x) = 6x^2 - 8x^3 + 3x^4.
        let x: f64 = 0.37;
        assert!((f(x) - (6.0 * x * x - 8.0 * x.powi(3) + 3.0 * x.powi(4))).abs() < 1e-13);
        assert!(beta_cdf(0.0, 1.0).is_err());
    }
}

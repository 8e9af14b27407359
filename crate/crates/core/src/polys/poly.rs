//! Sparse multivariate polynomials in `y_1, ..., y_d`.

use std::collections::BTreeMap;
use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Coefficient field. `BigRational` gives exact arithmetic, `f64` speed.
pub trait Coeff: Clone + Debug + PartialEq + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn from_i64(v: i64) -> Self;
    /// For exact fields: the simplest rational within a few ulps of `v`, so
    /// that decimal inputs such as `0.2` become `1/5`.
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
}

impl Coeff for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Coeff for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_f64(v: f64) -> Self {
        simplest_rational(v)
    }
    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }
}

/// Continued-fraction convergent of `v` within `4 ulp`, falling back to the
/// exact binary value when no convergent with denominator below `2^40` is
/// close enough.
pub(crate) fn simplest_rational(v: f64) -> BigRational {
    assert!(v.is_finite(), "finite coefficient");
    if v == v.trunc() && v.abs() < 9e15 {
        return BigRational::from_integer(BigInt::from(v as i64));
    }
    let tol = 4.0 * f64::EPSILON * v.abs();
    let (mut h0, mut h1) = (BigInt::from(0), BigInt::from(1));
    let (mut k0, mut k1) = (BigInt::from(1), BigInt::from(0));
    let mut x = v;
    for _ in 0..64 {
        let a = x.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = BigInt::from(a as i64);
        let h2 = &ai * &h1 + &h0;
        let k2 = &ai * &k1 + &k0;
        h0 = std::mem::replace(&mut h1, h2);
        k0 = std::mem::replace(&mut k1, k2);
        if k1.bits() > 40 {
            break;
        }
        let approx = BigRational::new(h1.clone(), k1.clone());
        if (ratio_to_f64(&approx) - v).abs() <= tol {
            return approx;
        }
        let frac = x - a;
        if frac == 0.0 {
            break;
        }
        x = 1.0 / frac;
    }
    BigRational::from_float(v).expect("finite coefficient")
}

/// Correctly scaled conversion that survives numerators and denominators
/// beyond the `f64` range.
pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = ToPrimitive::to_f64(r) {
        if v.is_finite() && (v != 0.0 || Zero::is_zero(r)) {
            return v;
        }
    }
    let n = r.numer();
    let d = r.denom();
    let shift = n.bits() as i64 - d.bits() as i64;
    let scaled = if shift > 0 {
        BigRational::new(n.clone(), d.clone() << (shift as usize))
    } else {
        BigRational::new(n.clone() << ((-shift) as usize), d.clone())
    };
    ToPrimitive::to_f64(&scaled).unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
}

/// Exponent vector of a monomial.
pub type Exponent = Vec<u32>;

/// A polynomial `sum_m c_m y^m` in `dim` variables; zero coefficients are
/// never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiIndexPolynomial<C: Coeff> {
    dim: usize,
    terms: BTreeMap<Exponent, C>,
}

impl<C: Coeff> MultiIndexPolynomial<C> {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: C) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(vec![0; dim], c);
        p
    }

    pub fn monomial(exp: Exponent, c: C) -> Self {
        let mut p = Self::zero(exp.len());
        p.add_term(exp, c);
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &C)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exp: &[u32]) -> C {
        self.terms.get(exp).cloned().unwrap_or_else(C::zero)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn add_term(&mut self, exp: Exponent, c: C) {
        assert_eq!(exp.len(), self.dim, "exponent length");
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exp) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().add(&c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &Self, c: &C) {
        for (e, v) in &other.terms {
            self.add_term(e.clone(), v.mul(c));
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero(self.dim);
        out.add_scaled(self, c);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, &C::from_i64(-1));
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.dim);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let e = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.add_term(e, ca.mul(cb));
            }
        }
        out
    }

    /// `d/dy_i`.
    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut f = e.clone();
                f[i] -= 1;
                out.add_term(f, c.mul(&C::from_i64(e[i] as i64)));
            }
        }
        out
    }

    pub fn map_coeffs<D: Coeff, F: Fn(&C) -> D>(&self, f: F) -> MultiIndexPolynomial<D> {
        let mut out = MultiIndexPolynomial::zero(self.dim);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), f(c));
        }
        out
    }

    pub fn to_f64(&self) -> MultiIndexPolynomial<f64> {
        self.map_coeffs(|c| c.to_f64())
    }

    /// Evaluates at `y` (length `dim`).
    pub fn eval(&self, y: &[f64]) -> f64 {
        assert_eq!(y.len(), self.dim, "point dimension");
        self.terms
            .iter()
            .map(|(e, c)| c.to_f64() * e.iter().zip(y).map(|(k, v)| v.powi(*k as i32)).product::<f64>())
            .sum()
    }

    /// Largest absolute coefficient, as `f64`.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }

    /// `{"[e_1,...,e_d]": coefficient}` with coefficients as `f64`.
    pub fn to_json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .terms
            .iter()
            .map(|(e, c)| (serde_json::to_string(e).expect("exponent"), serde_json::json!(c.to_f64())))
            .collect();
        serde_json::Value::Object(map)
    }
}

/// `(1 - y_1 - ... - y_d)^c`, expanded.
pub fn one_minus_sum_pow<C: Coeff>(dim: usize, c: u32) -> MultiIndexPolynomial<C> {
    let mut base = MultiIndexPolynomial::constant(dim, C::one());
    for i in 0..dim {
        let mut e = vec![0; dim];
        e[i] = 1;
        base.add_term(e, C::from_i64(-1));
    }
    let mut out = MultiIndexPolynomial::constant(dim, C::one());
    for _ in 0..c {
        out = out.mul(&base);
    }
    out
}

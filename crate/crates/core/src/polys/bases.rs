//! Three bases of the degree-`n` orthogonal space: an orthonormal basis built
//! by Gram–Schmidt on graded monomials, the monic basis `V_n` with leading
//! term `y^n`, and the Rodrigues-type basis `U_n`.

use std::collections::{BTreeMap, HashMap};

use num_rational::BigRational;

use super::poly::{one_minus_sum_pow, Coeff, Exponent, MultiIndexPolynomial};
use super::{multi_indices, GammaWeights};
use crate::error::{Error, Result};

/// Largest supported `k - 1` for the symbolic bases.
pub const MAX_BASIS_DIM: usize = 4;
/// Largest supported total degree for the symbolic bases.
pub const MAX_BASIS_DEGREE: u32 = 6;

fn check_range(dim: usize, degree: u32) -> Result<()> {
    if dim == 0 || dim > MAX_BASIS_DIM || degree > MAX_BASIS_DEGREE {
        return Err(Error::UnsupportedRange(format!(
            "symbolic bases need 1 <= k - 1 <= {MAX_BASIS_DIM} and degree <= {MAX_BASIS_DEGREE}, got k - 1 = {dim}, degree = {degree}"
        )));
    }
    Ok(())
}

fn check_index(n: &[u32], gw: &GammaWeights) -> Result<u32> {
    if n.len() != gw.dim() {
        return Err(Error::LengthMismatch { b: gw.dim(), b0: n.len() });
    }
    let deg = n.iter().sum();
    check_range(n.len(), deg)?;
    Ok(deg)
}

/// Rising factorial `(x)_n`.
fn pochhammer<C: Coeff>(x: &C, n: u32) -> C {
    let mut out = C::one();
    for j in 0..n {
        out = out.mul(&x.add(&C::from_i64(j as i64)));
    }
    out
}

fn binom(n: u32, k: u32) -> i64 {
    (0..k as i64).fold(1, |acc, i| acc * (n as i64 - i) / (i + 1))
}

fn gamma_in<C: Coeff>(gw: &GammaWeights) -> Vec<C> {
    gw.gamma().iter().map(|g| C::from_f64(*g)).collect()
}

/// `E_pi[y^a] = prod_i (gamma_i + 1)_{a_i} / (|gamma| + k)_{|a|}`.
pub fn moment<C: Coeff>(gw: &GammaWeights, a: &[u32]) -> C {
    let g: Vec<C> = gamma_in(gw);
    let mut total = C::from_i64(gw.k() as i64);
    for v in &g {
        total = total.add(v);
    }
    let mut num = C::one();
    for (gi, ai) in g.iter().zip(a) {
        num = num.mul(&pochhammer(&gi.add(&C::one()), *ai));
    }
    num.div(&pochhammer(&total, a.iter().sum()))
}

/// Cached moments for one weight.
struct Moments<C: Coeff> {
    gw: GammaWeights,
    cache: HashMap<Exponent, C>,
}

impl<C: Coeff> Moments<C> {
    fn new(gw: &GammaWeights) -> Self {
        Self { gw: gw.clone(), cache: HashMap::new() }
    }

    fn get(&mut self, a: &[u32]) -> C {
        if let Some(v) = self.cache.get(a) {
            return v.clone();
        }
        let v = moment::<C>(&self.gw, a);
        self.cache.insert(a.to_vec(), v.clone());
        v
    }

    fn inner(&mut self, f: &MultiIndexPolynomial<C>, g: &MultiIndexPolynomial<C>) -> C {
        let mut acc = C::zero();
        for (a, ca) in f.terms() {
            for (b, cb) in g.terms() {
                let e: Exponent = a.iter().zip(b).map(|(x, y)| x + y).collect();
                acc = acc.add(&ca.mul(cb).mul(&self.get(&e)));
            }
        }
        acc
    }
}

/// `<f, g>_gamma`, exact for rational coefficients.
pub fn inner_product<C: Coeff>(f: &MultiIndexPolynomial<C>, g: &MultiIndexPolynomial<C>, gw: &GammaWeights) -> C {
    Moments::new(gw).inner(f, g)
}

/// One element of the orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiPolynomial {
    pub index: Exponent,
    /// Orthogonal, with leading monomial `y^index` of coefficient one.
    pub orthogonal: MultiIndexPolynomial<BigRational>,
    /// `<orthogonal, orthogonal>_gamma`.
    pub norm_sq: BigRational,
    /// `orthogonal / sqrt(norm_sq)`.
    pub normalized: MultiIndexPolynomial<f64>,
}

/// The orthonormal basis up to a given degree, built once by exact
/// Gram–Schmidt on monomials in graded order (degree first, then decreasing
/// lexicographic).
#[derive(Debug, Clone)]
pub struct BasisTable {
    gw: GammaWeights,
    max_degree: u32,
    entries: Vec<JacobiPolynomial>,
    position: BTreeMap<Exponent, usize>,
}

impl BasisTable {
    pub fn new(gw: &GammaWeights, max_degree: u32) -> Result<Self> {
        let dim = gw.dim();
        check_range(dim, max_degree)?;
        let mut moments = Moments::<BigRational>::new(gw);
        let mut entries: Vec<JacobiPolynomial> = Vec::new();
        let mut position = BTreeMap::new();
        for d in 0..=max_degree {
            for m in multi_indices(dim, d) {
                let mono = MultiIndexPolynomial::monomial(m.clone(), <BigRational as Coeff>::one());
                let mut q = mono.clone();
                for prev in &entries {
                    let c = moments.inner(&mono, &prev.orthogonal).div(&prev.norm_sq);
                    q.add_scaled(&prev.orthogonal, &c.neg());
                }
                let norm_sq = moments.inner(&q, &q);
                let scale = 1.0 / norm_sq.to_f64().sqrt();
                let normalized = q.map_coeffs(|c| c.to_f64() * scale);
                position.insert(m.clone(), entries.len());
                entries.push(JacobiPolynomial { index: m, orthogonal: q, norm_sq, normalized });
            }
        }
        Ok(Self { gw: gw.clone(), max_degree, entries, position })
    }

    pub fn gamma(&self) -> &GammaWeights {
        &self.gw
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn get(&self, n: &[u32]) -> Option<&JacobiPolynomial> {
        self.position.get(n).map(|i| &self.entries[*i])
    }

    pub fn iter(&self) -> impl Iterator<Item = &JacobiPolynomial> {
        self.entries.iter()
    }
}

/// Orthonormal basis element for the multi-index `n`.
pub fn basis_jacobi(n: &[u32], gw: &GammaWeights) -> Result<JacobiPolynomial> {
    let deg = check_index(n, gw)?;
    let table = BasisTable::new(gw, deg)?;
    Ok(table.get(n).expect("index enumerated").clone())
}

/// The monic orthogonal polynomial `V_n = y^n + (lower degree)`:
///
/// ```text
/// V_n = sum_{m <= n} (-1)^{|n|+|m|} prod_i C(n_i, m_i) (gamma_i+1)_{n_i} / (gamma_i+1)_{m_i}
///       * (lambda)_{|n|+|m|} / (lambda)_{2|n|} * y^m,    lambda = |gamma| + k - 1.
/// ```
pub fn basis_monic(n: &[u32], gw: &GammaWeights) -> Result<MultiIndexPolynomial<BigRational>> {
    let deg = check_index(n, gw)?;
    let g: Vec<BigRational> = gamma_in(gw);
    let mut lambda = <BigRational as Coeff>::from_i64(gw.k() as i64 - 1);
    for v in &g {
        lambda = lambda.add(v);
    }
    let denom = pochhammer(&lambda, 2 * deg);
    let mut out = MultiIndexPolynomial::zero(n.len());
    for m in dominated(n) {
        let mdeg: u32 = m.iter().sum();
        let mut c = <BigRational as Coeff>::from_i64(if (deg + mdeg) % 2 == 0 { 1 } else { -1 });
        for i in 0..n.len() {
            let gp = g[i].add(&Coeff::one());
            c = c.mul(&Coeff::from_i64(binom(n[i], m[i])));
            c = c.mul(&pochhammer(&gp, n[i])).div(&pochhammer(&gp, m[i]));
        }
        c = c.mul(&pochhammer(&lambda, deg + mdeg)).div(&denom);
        out.add_term(m, c);
    }
    Ok(out)
}

/// All `m` with `0 <= m_i <= n_i`.
fn dominated(n: &[u32]) -> Vec<Exponent> {
    let mut out = vec![Vec::with_capacity(n.len())];
    for &ni in n {
        out = out
            .into_iter()
            .flat_map(|p: Exponent| {
                (0..=ni).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

/// The Rodrigues-type polynomial
/// `U_n = w^{-1} d^n / dy^n [ (1 - |y|)^{gamma_k + |n|} prod_i y_i^{gamma_i + n_i} ]`,
/// `w = (1 - |y|)^{gamma_k} prod_i y_i^{gamma_i}`.
///
/// The derivative is carried as a sum of terms
/// `c * prod_i y_i^{gamma_i + a_i} (1 - |y|)^{gamma_k + e}` with integer
/// offsets `a_i, e`, so the division by the weight is exact.
pub fn basis_rodrigues(n: &[u32], gw: &GammaWeights) -> Result<MultiIndexPolynomial<BigRational>> {
    let deg = check_index(n, gw)?;
    let dim = n.len();
    let g: Vec<BigRational> = gamma_in(gw);
    let gk = g[dim].clone();
    // Offsets (a_1..a_d, e) -> coefficient.
    let mut terms: BTreeMap<Vec<i64>, BigRational> = BTreeMap::new();
    let mut start: Vec<i64> = n.iter().map(|v| *v as i64).collect();
    start.push(deg as i64);
    terms.insert(start, Coeff::one());
    for (i, &ni) in n.iter().enumerate() {
        for _ in 0..ni {
            let mut next: BTreeMap<Vec<i64>, BigRational> = BTreeMap::new();
            for (off, c) in &terms {
                // d/dy_i y_i^{g_i + a_i} = (g_i + a_i) y_i^{g_i + a_i - 1}
                let f = g[i].add(&Coeff::from_i64(off[i]));
                if !Coeff::is_zero(&f) {
                    let mut o = off.clone();
                    o[i] -= 1;
                    accumulate(&mut next, o, c.mul(&f));
                }
                // d/dy_i (1 - |y|)^{g_k + e} = -(g_k + e) (1 - |y|)^{g_k + e - 1}
                let f = gk.add(&Coeff::from_i64(off[dim]));
                if !Coeff::is_zero(&f) {
                    let mut o = off.clone();
                    o[dim] -= 1;
                    accumulate(&mut next, o, c.mul(&f).neg());
                }
            }
            terms = next;
        }
    }
    let mut out = MultiIndexPolynomial::zero(dim);
    for (off, c) in terms {
        assert!(off.iter().all(|v| *v >= 0), "non-polynomial quotient in Rodrigues formula: offsets {off:?}");
        let mono: Exponent = off[..dim].iter().map(|v| *v as u32).collect();
        let mut piece = one_minus_sum_pow::<BigRational>(dim, off[dim] as u32);
        piece = piece.mul(&MultiIndexPolynomial::monomial(mono, c));
        out.add_scaled(&piece, &Coeff::one());
    }
    Ok(out)
}

fn accumulate(map: &mut BTreeMap<Vec<i64>, BigRational>, key: Vec<i64>, c: BigRational) {
    let e = map.entry(key).or_insert_with(Coeff::zero);
    *e = e.add(&c);
}

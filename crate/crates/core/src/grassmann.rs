//! The balanced Grassmann algebra over generators `eta_bar_x, eta_x`.
//!
//! The basis element for the pair `(I, J)` (bitmasks, `|I| = |J|`) is
//! `eta_bar_{i_1} ... eta_bar_{i_k} eta_{j_1} ... eta_{j_k}` with increasing
//! indices. The pairing used by interior products is the bilinear one,
//! `<X, Z> = sum_b X_b Z_b`.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::poly::Poly;
use crate::weight::ratio_to_f64;

pub const MAX_GENERATORS: usize = 16;

/// Scalars the algebra can carry.
pub trait Coeff:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// Size used for pivoting; any positive value for nonzero exact scalars.
    fn modulus(&self) -> f64;
    fn abs_sq(&self) -> f64;
    fn from_i64(v: i64) -> Self;
}

impl Coeff for f64 {
    fn modulus(&self) -> f64 {
        self.abs()
    }
    fn abs_sq(&self) -> f64 {
        self * self
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
}

impl Coeff for Complex64 {
    fn modulus(&self) -> f64 {
        self.norm()
    }
    fn abs_sq(&self) -> f64 {
        self.norm_sqr()
    }
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
}

impl Coeff for BigRational {
    fn modulus(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            // size is irrelevant for exact elimination, but prefer small ones
            1.0 / (1.0 + (self.numer().bits() + self.denom().bits()) as f64)
        }
    }
    fn abs_sq(&self) -> f64 {
        let v = ratio_to_f64(self);
        v * v
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(v.into())
    }
}

/// Determinant by Gaussian elimination with largest-modulus pivoting.
pub fn det<C: Coeff>(m: &DMatrix<C>) -> C {
    let n = m.nrows();
    let mut a: Vec<Vec<C>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)].clone()).collect()).collect();
    let mut d = C::one();
    for col in 0..n {
        let piv = (col..n)
            .filter(|&r| !a[r][col].is_zero())
            .max_by(|&x, &y| a[x][col].modulus().total_cmp(&a[y][col].modulus()));
        let Some(p) = piv else { return C::zero() };
        if p != col {
            a.swap(p, col);
            d = -d;
        }
        let pv = a[col][col].clone();
        d = d * pv.clone();
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone() / pv.clone();
            for c in col + 1..n {
                let t = f.clone() * a[col][c].clone();
                a[r][c] = a[r][c].clone() - t;
            }
        }
    }
    d
}

#[inline]
fn parity(x: u32) -> bool {
    x.count_ones() % 2 == 1
}

/// True when sorting the concatenation `a ++ b` of two increasing index
/// lists takes an odd number of transpositions.
#[inline]
fn merge_sign(a: u32, b: u32) -> bool {
    let mut odd = false;
    let mut bb = b;
    while bb != 0 {
        let y = bb.trailing_zeros();
        bb &= bb - 1;
        let above = if y >= 31 { 0 } else { a >> (y + 1) };
        odd ^= parity(above);
    }
    odd
}

/// Sign of `e_(i1,j1) e_(i2,j2) = ± e_(i1|i2, j1|j2)`, `None` when zero.
#[inline]
pub fn product_sign(i1: u32, j1: u32, i2: u32, j2: u32) -> Option<bool> {
    if i1 & i2 != 0 || j1 & j2 != 0 {
        return None;
    }
    let cross = (j1.count_ones() * i2.count_ones()) % 2 == 1;
    Some(cross ^ merge_sign(i1, i2) ^ merge_sign(j1, j2))
}

/// Bitmasks of all `k`-subsets of `0..n` in increasing order.
pub fn subsets(n: usize, k: usize) -> Vec<u32> {
    (0u32..(1u32 << n)).filter(|m| m.count_ones() as usize == k).collect()
}

fn indices(mask: u32) -> Vec<usize> {
    (0..32).filter(|&i| mask >> i & 1 == 1).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrassmannElement<C> {
    n: usize,
    terms: BTreeMap<(u32, u32), C>,
}

impl<C: Coeff> GrassmannElement<C> {
    pub fn zero(n: usize) -> Self {
        assert!(n <= MAX_GENERATORS, "at most {MAX_GENERATORS} generators");
        GrassmannElement {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn unit(n: usize) -> Self {
        Self::monomial(n, 0, 0, C::one())
    }

    pub fn monomial(n: usize, i: u32, j: u32, c: C) -> Self {
        let mut x = Self::zero(n);
        x.add_term(i, j, c);
        x
    }

    /// `prod_{x in S} eta_bar_x eta_x` for the set `S`.
    pub fn diagonal_product(n: usize, set: u32) -> Self {
        let m = set.count_ones() as i64;
        let c = if (m * (m - 1) / 2) % 2 == 1 {
            -C::one()
        } else {
            C::one()
        };
        Self::monomial(n, set, set, c)
    }

    pub fn generators(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<(u32, u32), C> {
        &self.terms
    }

    pub fn coefficient(&self, i: u32, j: u32) -> C {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, i: u32, j: u32, c: C) {
        assert_eq!(i.count_ones(), j.count_ones(), "unbalanced monomial");
        assert!(i >> self.n == 0 && j >> self.n == 0, "generator out of range");
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&(i, j)) {
            Some(old) => {
                let s = old + c;
                if !s.is_zero() {
                    self.terms.insert((i, j), s);
                }
            }
            None => {
                self.terms.insert((i, j), c);
            }
        }
    }

    pub fn scale(&self, s: &C) -> Self {
        let mut out = Self::zero(self.n);
        for (&(i, j), c) in &self.terms {
            out.add_term(i, j, c.clone() * s.clone());
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.n, o.n);
        let mut out = self.clone();
        for (&(i, j), c) in &o.terms {
            out.add_term(i, j, c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-C::one()))
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.n, o.n);
        let mut out = Self::zero(self.n);
        for (&(i1, j1), c1) in &self.terms {
            for (&(i2, j2), c2) in &o.terms {
                if let Some(neg) = product_sign(i1, j1, i2, j2) {
                    let v = c1.clone() * c2.clone();
                    out.add_term(i1 | i2, j1 | j2, if neg { -v } else { v });
                }
            }
        }
        out
    }

    /// Interior product `i_Y(X)`, adjoint of left multiplication by `Y`.
    pub fn interior(y: &Self, x: &Self) -> Self {
        assert_eq!(y.n, x.n);
        let mut out = Self::zero(x.n);
        for (&(ia, ja), ya) in &y.terms {
            for (&(ib, jb), xb) in &x.terms {
                if ib & ia != ia || jb & ja != ja {
                    continue;
                }
                let (ic, jc) = (ib & !ia, jb & !ja);
                let neg = product_sign(ia, ja, ic, jc).expect("disjoint by construction");
                let v = ya.clone() * xb.clone();
                out.add_term(ic, jc, if neg { -v } else { v });
            }
        }
        out
    }

    /// Bilinear pairing `sum_b X_b Z_b`.
    pub fn pairing(&self, z: &Self) -> C {
        let mut acc = C::zero();
        for (k, c) in &self.terms {
            if let Some(d) = z.terms.get(k) {
                acc = acc + c.clone() * d.clone();
            }
        }
        acc
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        self.terms.values().map(Coeff::abs_sq).sum::<f64>().sqrt()
    }

    /// Move generator `x` to `map[x]` (which must be injective on the support)
    /// in an algebra with `new_n` generators.
    pub fn relabel(&self, map: &[usize], new_n: usize) -> Self {
        let mut out = Self::zero(new_n);
        for (&(i, j), c) in &self.terms {
            let (ni, si) = relabel_mask(i, map);
            let (nj, sj) = relabel_mask(j, map);
            out.add_term(ni, nj, if si ^ sj { -c.clone() } else { c.clone() });
        }
        out
    }

    /// `R_{F -> F'}`: interior product with `prod_{F \ F'} eta_bar eta`, then
    /// re-indexed so that `keep[k]` becomes generator `k`.
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let mut kmask = 0u32;
        for &k in keep {
            kmask |= 1 << k;
        }
        let rest = ((1u32 << self.n) - 1) & !kmask;
        let y = Self::diagonal_product(self.n, rest);
        let inner = Self::interior(&y, self);
        let mut map = vec![usize::MAX; self.n];
        for (k, &v) in keep.iter().enumerate() {
            map[v] = k;
        }
        inner.relabel(&map, keep.len())
    }

    /// Scale each `k`-balanced coefficient by `s^k`.
    pub fn tau(&self, s: &C) -> Self {
        let mut pows = vec![C::one()];
        for k in 1..=self.n {
            pows.push(pows[k - 1].clone() * s.clone());
        }
        let mut out = Self::zero(self.n);
        for (&(i, j), c) in &self.terms {
            out.add_term(i, j, c.clone() * pows[i.count_ones() as usize].clone());
        }
        out
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> GrassmannElement<D> {
        let mut out = GrassmannElement::zero(self.n);
        for (&(i, j), c) in &self.terms {
            out.add_term(i, j, f(c));
        }
        out
    }
}

fn relabel_mask(mask: u32, map: &[usize]) -> (u32, bool) {
    let seq: Vec<usize> = indices(mask).iter().map(|&i| map[i]).collect();
    let mut inv = 0;
    for a in 0..seq.len() {
        for b in a + 1..seq.len() {
            if seq[a] > seq[b] {
                inv += 1;
            }
        }
    }
    let m = seq.iter().fold(0u32, |acc, &v| {
        assert!(v < 32, "relabel target out of range");
        acc | 1 << v
    });
    (m, inv % 2 == 1)
}

/// `exp(eta_bar Q eta)`: the `(I, J)` coefficient is
/// `(-1)^{k(k-1)/2} det Q_{I,J}` with `k = |I|`.
pub fn exp_q<C: Coeff>(q: &DMatrix<C>) -> GrassmannElement<C> {
    let n = q.nrows();
    let mut out = GrassmannElement::unit(n);
    for k in 1..=n {
        let sign_neg = (k * (k - 1) / 2) % 2 == 1;
        let subs = subsets(n, k);
        let idx: Vec<Vec<usize>> = subs.iter().map(|&m| indices(m)).collect();
        for (a, &im) in subs.iter().enumerate() {
            for (b, &jm) in subs.iter().enumerate() {
                let minor = DMatrix::from_fn(k, k, |r, c| q[(idx[a][r], idx[b][c])].clone());
                let d = det(&minor);
                out.add_term(im, jm, if sign_neg { -d } else { d });
            }
        }
    }
    out
}

/// Vanishing order at `lambda = 0` of `lambda -> R_{F->F'} exp(Q0 - lambda B)`,
/// computed exactly by interpolating every coefficient.
pub fn nd_order(q0: &DMatrix<BigRational>, b: &DMatrix<BigRational>, keep: &[usize]) -> usize {
    let n = q0.nrows();
    let nodes: Vec<BigRational> = (0..=n as i64).map(BigRational::from_integer_i64).collect();
    let mut samples: BTreeMap<(u32, u32), Vec<BigRational>> = BTreeMap::new();
    for (k, lam) in nodes.iter().enumerate() {
        let m = DMatrix::from_fn(n, n, |i, j| &q0[(i, j)] - lam * &b[(i, j)]);
        let r = exp_q(&m).restrict(keep);
        for (&key, c) in r.terms() {
            samples
                .entry(key)
                .or_insert_with(|| vec![BigRational::zero(); nodes.len()])[k] = c.clone();
        }
    }
    samples
        .values()
        .filter_map(|ys| Poly::interpolate(&nodes, ys).order_at_zero())
        .min()
        .unwrap_or(n)
}

/// Small helper so integer nodes read naturally.
trait FromI64 {
    fn from_integer_i64(v: i64) -> Self;
}

impl FromI64 for BigRational {
    fn from_integer_i64(v: i64) -> Self {
        BigRational::from_integer(v.into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, rat};
    use crate::schur;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type Gc = GrassmannElement<Complex64>;
    type Gq = GrassmannElement<BigRational>;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
        let m = DMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        (&m + m.transpose()).scale(0.5)
    }

    fn rel_err(a: &Gc, b: &Gc) -> f64 {
        a.sub(b).norm() / a.norm().max(b.norm()).max(1e-300)
    }

    /// Product of `1 + Q_xy eta_bar_x eta_y` over all pairs.
    fn exp_by_product(q: &DMatrix<Complex64>) -> Gc {
        let n = q.nrows();
        let mut out = Gc::unit(n);
        for x in 0..n {
            for y in 0..n {
                let f = Gc::unit(n).add(&Gc::monomial(n, 1 << x, 1 << y, q[(x, y)]));
                out = out.mul(&f);
            }
        }
        out
    }

    #[test]
    fn small_cases() {
        let z = DMatrix::<Complex64>::zeros(3, 3);
        assert_eq!(exp_q(&z), Gc::unit(3));
        let q = DMatrix::from_element(1, 1, c(2.5, 0.0));
        let e = exp_q(&q);
        assert_eq!(e.terms().len(), 2);
        assert_eq!(e.coefficient(1, 1), c(2.5, 0.0));
        assert_eq!(Gc::unit(2).norm(), 1.0);
    }

    #[test]
    fn exp_matches_product_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=4 {
            let q = random_sym(&mut rng, n);
            assert!(rel_err(&exp_q(&q), &exp_by_product(&q)) < 1e-12);
        }
    }

    #[test]
    fn top_coefficient_is_determinant_up_to_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let q = random_sym(&mut rng, 3);
        let top = exp_q(&q).coefficient(7, 7);
        assert!((top.norm() - schur::det(&q).norm()).abs() < 1e-12);
        let y = Gc::diagonal_product(3, 7);
        let full = Gc::interior(&y, &exp_q(&q));
        assert!((full.coefficient(0, 0) - schur::det(&q)).norm() < 1e-12);
    }

    #[test]
    fn basis_products_commute_and_dimension() {
        let n = 3;
        let mut basis = Vec::new();
        for k in 0..=n {
            for &i in &subsets(n, k) {
                for &j in &subsets(n, k) {
                    basis.push(Gq::monomial(n, i, j, int(1)));
                }
            }
        }
        assert_eq!(basis.len(), 20);
        for a in &basis {
            for b in &basis {
                assert_eq!(a.mul(b), b.mul(a));
            }
            assert_eq!(a.mul(&Gq::unit(n)), *a);
        }
    }

    #[test]
    fn adjointness_on_full_basis() {
        let n = 3;
        let mut basis = Vec::new();
        for k in 0..=n {
            for &i in &subsets(n, k) {
                for &j in &subsets(n, k) {
                    basis.push(Gq::monomial(n, i, j, int(1)));
                }
            }
        }
        for y in &basis {
            for x in &basis {
                let ix = Gq::interior(y, x);
                for z in &basis {
                    assert_eq!(ix.pairing(z), x.pairing(&y.mul(z)));
                }
            }
        }
        let x = basis[5].add(&basis[7]);
        assert_eq!(Gq::interior(&Gq::unit(n), &x), x);
    }

    #[test]
    fn disjoint_product_sign() {
        let a = Gq::monomial(2, 1, 1, int(1));
        let b = Gq::monomial(2, 2, 2, int(1));
        // eta_bar_0 eta_0 eta_bar_1 eta_1 = - eta_bar_0 eta_bar_1 eta_0 eta_1
        assert_eq!(a.mul(&b).coefficient(3, 3), int(-1));
        assert_eq!(Gq::diagonal_product(2, 3), a.mul(&b));
    }

    #[test]
    fn norm_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let q = random_sym(&mut rng, 3);
            let e = exp_q(&q);
            let id = DMatrix::<Complex64>::identity(3, 3);
            let d = schur::det(&(id + &q * q.adjoint()));
            assert!((e.norm().powi(2) - d.re).abs() < 1e-10 * d.re);
        }
        // symmetric unitary Q = diag(e^{i t})
        let q = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(0.0, 1.0),
            c(0.6, 0.8),
            c(-1.0, 0.0),
        ]));
        assert!((exp_q(&q).norm().powi(2) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn restriction_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let q = random_sym(&mut rng, 4);
            let keep = [1, 3];
            let e = exp_q(&q);
            let r = e.restrict(&keep);
            let top = Gc::diagonal_product(2, 3);
            assert!((r.pairing(&top) - schur::det(&q)).norm() < 1e-10);
            let inner = schur::submatrix(&q, &[0, 2], &[0, 2]);
            let di = schur::det(&inner);
            assert!((r.pairing(&Gc::unit(2)) - di).norm() < 1e-10);
            let t = schur::trace_on_subset(&q, &keep).unwrap();
            let rhs = exp_q(&t).scale(&di);
            assert!(rel_err(&r, &rhs) < 1e-10);
        }
        let q = random_sym(&mut rng, 3);
        assert_eq!(exp_q(&q).restrict(&[0, 1, 2]), exp_q(&q));
    }

    #[test]
    fn block_factorization() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let qa = random_sym(&mut rng, 2);
        let qb = random_sym(&mut rng, 3);
        let mut q = DMatrix::zeros(5, 5);
        q.view_mut((0, 0), (2, 2)).copy_from(&qa);
        q.view_mut((2, 2), (3, 3)).copy_from(&qb);
        let ea = exp_q(&qa).relabel(&[0, 1], 5);
        let eb = exp_q(&qb).relabel(&[2, 3, 4], 5);
        assert!(rel_err(&exp_q(&q), &ea.mul(&eb)) < 1e-12);
    }

    #[test]
    fn tau_scales_by_degree() {
        let q = DMatrix::from_row_slice(2, 2, &[int(1), int(2), int(2), int(3)]);
        let e = exp_q(&q).tau(&int(2));
        let q2 = q.map(|v| v * int(2));
        assert_eq!(e, exp_q(&q2));
    }

    fn nullspace_dim_oracle(q0: &DMatrix<f64>, keep: &[usize]) -> usize {
        let n = q0.nrows();
        let mut m = DMatrix::zeros(n + keep.len(), n);
        m.view_mut((0, 0), (n, n)).copy_from(q0);
        for (k, &v) in keep.iter().enumerate() {
            m[(n + k, v)] = 1.0;
        }
        let sv = m.svd(false, false).singular_values;
        let smax = sv.max();
        sv.iter().filter(|&&s| s < 1e-9 * smax).count()
    }

    #[test]
    fn nd_order_small_cases() {
        let b = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![int(1), int(2), int(1)]));
        let q0 = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![int(1), int(3), rat(1, 2)]));
        assert_eq!(nd_order(&q0, &b, &[0]), 0);
        let zero = DMatrix::from_element(3, 3, int(0));
        assert_eq!(nd_order(&zero, &b, &[]), 3);
        // kernel spanned by e_1 which vanishes on {0, 2}
        let q1 = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![int(1), int(0), int(2)]));
        assert_eq!(nd_order(&q1, &b, &[0, 2]), 1);
        assert_eq!(nullspace_dim_oracle(&q1.map(|v| ratio_to_f64(&v)), &[0, 2]), 1);
        // same kernel but e_1 does not vanish on {1}
        assert_eq!(nd_order(&q1, &b, &[1]), 0);
    }
}

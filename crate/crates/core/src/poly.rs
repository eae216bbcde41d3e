//! Univariate polynomials with exact rational coefficients.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::weight::ratio_to_f64;

/// Coefficients in increasing degree, without trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    c: Vec<BigRational>,
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

impl Poly {
    pub fn new(mut c: Vec<BigRational>) -> Self {
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        Poly { c }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&v| int(v)).collect())
    }

    pub fn zero() -> Self {
        Poly { c: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(v: BigRational) -> Self {
        Self::new(vec![v])
    }

    /// The polynomial `x`.
    pub fn x() -> Self {
        Self::from_ints(&[0, 1])
    }

    /// `x - r`
    pub fn linear_root(r: &BigRational) -> Self {
        Self::new(vec![-r.clone(), BigRational::one()])
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.c
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.c.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn lead(&self) -> BigRational {
        self.c.last().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.c.len() <= 1
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        Self::new(self.c.iter().map(|v| v * s).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.lead();
        Poly {
            c: self.c.iter().map(|v| v / &l).collect(),
        }
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for v in self.c.iter().rev() {
            acc = acc * x + v;
        }
        acc
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.c.iter().map(ratio_to_f64).collect()
    }

    pub fn eval_c64(&self, z: Complex64) -> Complex64 {
        eval_c64(&self.to_f64(), z)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, v)| v * BigRational::from_integer(k.into()))
                .collect(),
        )
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Poly::one();
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// `self(g(x))`
    pub fn compose(&self, g: &Poly) -> Self {
        let mut acc = Poly::zero();
        for v in self.c.iter().rev() {
            acc = &(&acc * g) + &Poly::constant(v.clone());
        }
        acc
    }

    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let dd = d.c.len() - 1;
        let dl = d.lead();
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut q = vec![BigRational::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let f = &r[k + dd] / &dl;
            if !f.is_zero() {
                for (j, dv) in d.c.iter().enumerate() {
                    r[k + j] -= &f * dv;
                }
            }
            q[k] = f;
        }
        r.truncate(dd);
        (Poly::new(q), Poly::new(r))
    }

    pub fn exact_div(&self, d: &Poly) -> Option<Poly> {
        let (q, r) = self.div_rem(d);
        r.is_zero().then_some(q)
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(a: &Poly, b: &Poly) -> Poly {
        if a.is_zero() {
            return b.monic();
        }
        if b.is_zero() {
            return a.monic();
        }
        let (ia, _) = a.primitive_integer();
        let (ib, _) = b.primitive_integer();
        let g = int_poly_gcd(ia, ib);
        Poly::new(g.into_iter().map(BigRational::from_integer).collect()).monic()
    }

    /// `(p, s)` with integer primitive `p` (positive leading coefficient)
    /// and `self = s * p`.
    pub fn primitive_integer(&self) -> (Vec<BigInt>, BigRational) {
        if self.is_zero() {
            return (Vec::new(), BigRational::zero());
        }
        let den = self.c.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let ints: Vec<BigInt> = self.c.iter().map(|v| (v * &den).to_integer()).collect();
        let mut content = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
        if ints.last().unwrap().is_negative() {
            content = -content;
        }
        let p = ints.iter().map(|v| v / &content).collect();
        (p, BigRational::new(content, den))
    }

    /// Largest bit size of any numerator or denominator.
    pub fn max_bits(&self) -> u64 {
        self.c
            .iter()
            .map(|v| v.numer().bits().max(v.denom().bits()))
            .max()
            .unwrap_or(0)
    }

    /// Multiplicity of `r` as a root.
    pub fn root_multiplicity(&self, r: &BigRational) -> usize {
        if self.is_zero() {
            return usize::MAX;
        }
        let lin = Poly::linear_root(r);
        let mut p = self.clone();
        let mut k = 0;
        while let Some(q) = p.exact_div(&lin) {
            p = q;
            k += 1;
        }
        k
    }

    /// Lowest degree with a nonzero coefficient (vanishing order at 0).
    pub fn order_at_zero(&self) -> Option<usize> {
        self.c.iter().position(|v| !v.is_zero())
    }

    /// Yun's algorithm: `self = lead * prod f_i^i` with square-free, pairwise
    /// coprime monic `f_i`. Returns the nonconstant `(f_i, i)`.
    pub fn square_free(&self) -> Vec<(Poly, usize)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let f = self.monic();
        let df = f.derivative();
        let a0 = Poly::gcd(&f, &df);
        let mut b = f.exact_div(&a0).unwrap();
        let mut c = df.exact_div(&a0).unwrap();
        let mut d = &c - &b.derivative();
        let mut i = 1;
        while !b.is_constant() {
            let a = Poly::gcd(&b, &d);
            if !a.is_constant() {
                out.push((a.clone(), i));
            }
            b = b.exact_div(&a).unwrap();
            c = d.exact_div(&a).unwrap();
            d = &c - &b.derivative();
            i += 1;
        }
        out
    }

    /// Roots with exact multiplicities; locations from companion eigenvalues
    /// of each square-free factor, refined by Newton steps.
    pub fn roots(&self) -> Vec<(Complex64, usize)> {
        let mut out = Vec::new();
        for (f, mult) in self.square_free() {
            for z in simple_roots(&f) {
                out.push((z, mult));
            }
        }
        out.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
        out
    }

    /// Real roots (imaginary part below `imag_tol`) with multiplicities.
    pub fn real_roots(&self, imag_tol: f64) -> Vec<(f64, usize)> {
        self.roots()
            .into_iter()
            .filter(|(z, _)| z.im.abs() <= imag_tol)
            .map(|(z, m)| (z.re, m))
            .collect()
    }

    /// Newton interpolation through `(xs[k], ys[k])`.
    pub fn interpolate(xs: &[BigRational], ys: &[BigRational]) -> Poly {
        assert_eq!(xs.len(), ys.len());
        let n = xs.len();
        let mut dd: Vec<BigRational> = ys.to_vec();
        for j in 1..n {
            for i in (j..n).rev() {
                dd[i] = (&dd[i] - &dd[i - 1]) / (&xs[i] - &xs[i - j]);
            }
        }
        let mut p = Poly::zero();
        for k in (0..n).rev() {
            p = &(&p * &Poly::linear_root(&xs[k])) + &Poly::constant(dd[k].clone());
        }
        p
    }
}

fn eval_c64(c: &[f64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::zero(), |acc, &v| acc * z + v)
}

fn simple_roots(f: &Poly) -> Vec<Complex64> {
    let d = f.degree().unwrap_or(0);
    if d == 0 {
        return Vec::new();
    }
    let c = f.monic().to_f64();
    if d == 1 {
        return vec![Complex64::new(-c[0], 0.0)];
    }
    let comp = DMatrix::from_fn(d, d, |i, j| {
        if j == d - 1 {
            -c[i]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let dc: Vec<f64> = (1..=d).map(|k| c[k] * k as f64).collect();
    comp.complex_eigenvalues()
        .iter()
        .map(|&z0| {
            let mut z = z0;
            for _ in 0..8 {
                let dz = eval_c64(&dc, z);
                if dz.norm() == 0.0 {
                    break;
                }
                let step = eval_c64(&c, z) / dz;
                z -= step;
                if step.norm() <= 1e-16 * z.norm().max(1.0) {
                    break;
                }
            }
            if z.im.abs() < 1e-13 * z.norm().max(1.0) {
                z.im = 0.0;
            }
            z
        })
        .collect()
}

fn int_content(p: &[BigInt]) -> BigInt {
    p.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v))
}

fn int_primitive(p: Vec<BigInt>) -> Vec<BigInt> {
    let mut c = int_content(&p);
    if c.is_zero() {
        return Vec::new();
    }
    if p.last().unwrap().is_negative() {
        c = -c;
    }
    p.into_iter().map(|v| v / &c).collect()
}

fn int_trim(mut p: Vec<BigInt>) -> Vec<BigInt> {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

/// Pseudo-remainder of `a` by `b`.
fn int_prem(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let db = b.len() - 1;
    let lb = &b[db];
    let mut r = a.to_vec();
    while r.len() > db {
        let dr = r.len() - 1;
        let lr = r[dr].clone();
        let shift = dr - db;
        for v in r.iter_mut() {
            *v *= lb;
        }
        for (j, bv) in b.iter().enumerate() {
            r[shift + j] -= &lr * bv;
        }
        r = int_trim(r);
    }
    r
}

/// Primitive PRS gcd of integer polynomials, normalized to a positive
/// leading coefficient.
fn int_poly_gcd(a: Vec<BigInt>, b: Vec<BigInt>) -> Vec<BigInt> {
    let mut a = int_primitive(int_trim(a));
    let mut b = int_primitive(int_trim(b));
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    while !b.is_empty() {
        let r = int_prem(&a, &b);
        a = b;
        b = int_primitive(r);
    }
    a
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly::new((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![BigRational::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::new(c)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            c: self.c.iter().map(|v| -v).collect(),
        }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, v) in self.c.iter().enumerate().rev() {
            if v.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{v}")?,
                1 => write!(f, "({v})x")?,
                _ => write!(f, "({v})x^{k}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn arithmetic_and_division() {
        let p = Poly::from_ints(&[-1, 0, 1]);
        let q = Poly::from_ints(&[1, 1]);
        assert_eq!(p.exact_div(&q), Some(Poly::from_ints(&[-1, 1])));
        let (d, r) = Poly::from_ints(&[1, 0, 1]).div_rem(&q);
        assert_eq!(&(&d * &q) + &r, Poly::from_ints(&[1, 0, 1]));
        assert_eq!(p.eval(&int(3)), int(8));
        assert_eq!(Poly::x().compose(&p), p);
    }

    #[test]
    fn gcd_and_multiplicities() {
        // (x+1)^2 (x-2)^3 (x - 1/3)
        let f =
            &(&Poly::from_ints(&[1, 1]).pow(2) * &Poly::from_ints(&[-2, 1]).pow(3)) * &Poly::linear_root(&rat(1, 3));
        let g = &Poly::from_ints(&[1, 1]) * &Poly::from_ints(&[5, 1]);
        assert_eq!(Poly::gcd(&f, &g), Poly::from_ints(&[1, 1]));
        assert_eq!(f.root_multiplicity(&int(2)), 3);
        assert_eq!(f.root_multiplicity(&int(-1)), 2);
        assert_eq!(f.root_multiplicity(&int(7)), 0);
        let sf = f.square_free();
        let mults: Vec<usize> = sf.iter().map(|x| x.1).collect();
        assert_eq!(mults, vec![1, 2, 3]);
        let roots = f.real_roots(1e-9);
        assert_eq!(roots.len(), 3);
        assert!((roots[0].0 + 1.0).abs() < 1e-14 && roots[0].1 == 2);
        assert!((roots[2].0 - 2.0).abs() < 1e-14 && roots[2].1 == 3);
    }

    #[test]
    fn complex_roots() {
        let f = Poly::from_ints(&[1, 0, 1]);
        let r = f.roots();
        assert_eq!(r.len(), 2);
        assert!((r[0].0.norm() - 1.0).abs() < 1e-14);
        assert!(f.real_roots(1e-9).is_empty());
    }

    #[test]
    fn interpolation_recovers() {
        let f = Poly::new(vec![rat(1, 2), int(-3), int(0), rat(7, 5)]);
        let xs: Vec<_> = (0..4).map(int).collect();
        let ys: Vec<_> = xs.iter().map(|x| f.eval(x)).collect();
        assert_eq!(Poly::interpolate(&xs, &ys), f);
    }

    fn small_poly() -> impl Strategy<Value = Poly> {
        proptest::collection::vec(-5i64..5, 0..6).prop_map(|v| Poly::from_ints(&v))
    }

    proptest! {
        #[test]
        fn gcd_divides_both(a in small_poly(), b in small_poly(), c in small_poly()) {
            let x = &a * &c;
            let y = &b * &c;
            let g = Poly::gcd(&x, &y);
            if !g.is_zero() {
                prop_assert!(x.exact_div(&g).is_some());
                prop_assert!(y.exact_div(&g).is_some());
                if !c.is_zero() {
                    prop_assert!(g.exact_div(&c.monic()).is_some());
                }
            }
        }

        #[test]
        fn division_identity(a in small_poly(), b in small_poly()) {
            prop_assume!(!b.is_zero());
            let (q, r) = a.div_rem(&b);
            prop_assert_eq!(&(&q * &b) + &r, a);
            prop_assert!(r.degree().map_or(true, |d| d < b.degree().unwrap()));
        }
    }
}

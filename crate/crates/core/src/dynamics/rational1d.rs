//! Rational maps of the projective line with exact coefficients.

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::poly::Poly;

/// Default cap on coefficient size during iterated composition.
pub const DEFAULT_BIT_LIMIT: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq)]
pub struct RationalMap1D {
    num: Poly,
    den: Poly,
}

impl RationalMap1D {
    /// `num / den` with the common factor removed.
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Malformed("zero denominator".into()));
        }
        let g = Poly::gcd(&num, &den);
        let (num, den) = if g.is_constant() {
            (num, den)
        } else {
            (num.exact_div(&g).unwrap(), den.exact_div(&g).unwrap())
        };
        // normalize the denominator to be monic
        let lc = den.lead();
        let inv = num_traits::Inv::inv(lc);
        Ok(RationalMap1D {
            num: num.scale(&inv),
            den: den.scale(&inv),
        })
    }

    pub fn polynomial(p: Poly) -> Self {
        RationalMap1D::new(p, Poly::one()).unwrap()
    }

    pub fn identity() -> Self {
        Self::polynomial(Poly::x())
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn degree(&self) -> usize {
        self.num.degree().unwrap_or(0).max(self.den.degree().unwrap_or(0))
    }

    pub fn eval(&self, z: &BigRational) -> Option<BigRational> {
        let d = self.den.eval(z);
        if d.is_zero() {
            None
        } else {
            Some(self.num.eval(z) / d)
        }
    }

    pub fn eval_f64(&self, z: f64) -> f64 {
        let n: f64 = horner(&self.num.to_f64(), z);
        n / horner(&self.den.to_f64(), z)
    }

    /// Unreduced homogeneous composition `self o inner` as `(num, den)`.
    pub fn compose_raw(&self, inner: &RationalMap1D) -> (Poly, Poly) {
        let d = self.degree() as u32;
        let hom = |p: &Poly| {
            let mut acc = Poly::zero();
            for (k, c) in p.coeffs().iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let term = &inner.num.pow(k as u32) * &inner.den.pow(d - k as u32);
                acc = &acc + &term.scale(c);
            }
            acc
        };
        (hom(&self.num), hom(&self.den))
    }

    pub fn compose(&self, inner: &RationalMap1D) -> RationalMap1D {
        let (n, d) = self.compose_raw(inner);
        RationalMap1D::new(n, d).unwrap()
    }

    /// Same map as a function: `n1 d2 = n2 d1`.
    pub fn same_map(&self, o: &RationalMap1D) -> bool {
        &self.num * &o.den == &o.num * &self.den
    }

    pub fn max_bits(&self) -> u64 {
        self.num.max_bits().max(self.den.max_bits())
    }
}

fn horner(c: &[f64], z: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * z + v)
}

/// `f^n` by repeated composition with reduction, and the degrees of
/// `f, f^2, ..., f^n` after reduction.
pub fn compose_reduce_1d(f: &RationalMap1D, n: usize, bit_limit: u64) -> Result<(RationalMap1D, Vec<usize>)> {
    let mut cur = RationalMap1D::identity();
    let mut degrees = Vec::with_capacity(n);
    for _ in 0..n {
        cur = f.compose(&cur);
        let bits = cur.max_bits();
        if bits > bit_limit {
            return Err(Error::BitLimit(bits));
        }
        degrees.push(cur.degree());
    }
    Ok((cur, degrees))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, rat};

    #[test]
    fn reduction_on_construction() {
        let f = RationalMap1D::new(Poly::from_ints(&[0, 1, 1]), Poly::from_ints(&[0, 2])).unwrap();
        assert_eq!(f.degree(), 1);
        assert_eq!(f.eval(&int(3)), Some(rat(2, 1)));
    }

    #[test]
    fn identity_and_polynomials() {
        let (id, d) = compose_reduce_1d(&RationalMap1D::identity(), 6, DEFAULT_BIT_LIMIT).unwrap();
        assert_eq!(d, vec![1; 6]);
        assert!(id.same_map(&RationalMap1D::identity()));
        let p = RationalMap1D::polynomial(Poly::from_ints(&[0, 5, 2]));
        let (_, d) = compose_reduce_1d(&p, 5, DEFAULT_BIT_LIMIT).unwrap();
        assert_eq!(d, vec![2, 4, 8, 16, 32]);
    }

    #[test]
    fn degree_drops_when_factors_cancel() {
        // z -> 1/z is an involution
        let inv = RationalMap1D::new(Poly::one(), Poly::x()).unwrap();
        let (_, d) = compose_reduce_1d(&inv, 3, DEFAULT_BIT_LIMIT).unwrap();
        assert_eq!(d, vec![1, 1, 1]);
        // in one variable the raw composite is already coprime
        let sq = RationalMap1D::new(Poly::from_ints(&[0, 0, 1]), Poly::from_ints(&[1, 0, 1])).unwrap();
        let (n, d) = sq.compose_raw(&inv);
        assert!(Poly::gcd(&n, &d).is_constant());
        assert_eq!(d.degree(), Some(2));
    }

    #[test]
    fn bit_limit() {
        let p = RationalMap1D::polynomial(Poly::new(vec![rat(1, 3), rat(7, 5), rat(11, 13)]));
        assert!(matches!(compose_reduce_1d(&p, 8, 64), Err(Error::BitLimit(_))));
    }
}

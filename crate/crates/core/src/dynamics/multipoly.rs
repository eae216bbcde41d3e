//! Sparse multivariate polynomials over the rationals, a bivariate gcd, and
//! the removal of common factors from the components of a projective map.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::poly::Poly;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        MPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, BigRational::one())
    }

    pub fn monomial(exps: Vec<u32>, c: BigRational) -> Self {
        let mut p = Self::zero(exps.len());
        p.add_term(exps, c);
        p
    }

    /// Sum of `c * x^e` over the given `(c, e)` with integer `c`.
    pub fn from_terms(nvars: usize, terms: &[(i64, &[u32])]) -> Self {
        let mut p = Self::zero(nvars);
        for &(c, e) in terms {
            assert_eq!(e.len(), nvars);
            p.add_term(e.to_vec(), BigRational::from_integer(c.into()));
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, BigRational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, e: Vec<u32>, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e.clone()).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut p = self.clone();
        for (e, c) in &o.terms {
            p.add_term(e.clone(), c.clone());
        }
        p
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-BigRational::one()))
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            p.add_term(e.clone(), c * s);
        }
        p
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut p = Self::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                p.add_term(e, c1 * c2);
            }
        }
        p
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::constant(self.nvars, BigRational::one());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                out = out.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        out
    }

    /// `self(subs[0], ..., subs[nvars-1])`
    pub fn substitute(&self, subs: &[MPoly]) -> MPoly {
        assert_eq!(subs.len(), self.nvars);
        let m = subs[0].nvars;
        let maxe: Vec<u32> = (0..self.nvars)
            .map(|i| self.terms.keys().map(|e| e[i]).max().unwrap_or(0))
            .collect();
        // cached powers per variable
        let pows: Vec<Vec<MPoly>> = subs
            .iter()
            .zip(&maxe)
            .map(|(s, &k)| {
                let mut v = vec![MPoly::constant(m, BigRational::one())];
                for j in 1..=k as usize {
                    let next = v[j - 1].mul(s);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = MPoly::zero(m);
        for (e, c) in &self.terms {
            let mut t = MPoly::constant(m, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = t.mul(&pows[i][k as usize]);
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// Largest total degree in the variables of `block`.
    pub fn degree_in(&self, block: &[usize]) -> u32 {
        self.terms
            .keys()
            .map(|e| block.iter().map(|&i| e[i]).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Homogeneous in each block.
    pub fn is_multihomogeneous(&self, blocks: &[Vec<usize>]) -> bool {
        blocks.iter().all(|b| {
            let mut degs = self.terms.keys().map(|e| b.iter().map(|&i| e[i]).sum::<u32>());
            match degs.next() {
                Some(d) => degs.all(|x| x == d),
                None => true,
            }
        })
    }

    pub fn eval(&self, x: &[BigRational]) -> BigRational {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .zip(x)
                    .fold(c.clone(), |acc, (&k, v)| acc * num_traits::pow(v.clone(), k as usize))
            })
            .fold(BigRational::zero(), |a, b| a + b)
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let c = crate::weight::ratio_to_f64(c);
                e.iter().zip(x).fold(c, |acc, (&k, v)| acc * v.powi(k as i32))
            })
            .sum()
    }

    /// Univariate polynomial in `t` after `x_i = subs_i(t)`.
    pub fn along(&self, subs: &[Poly]) -> Poly {
        assert_eq!(subs.len(), self.nvars);
        let mut out = Poly::zero();
        for (e, c) in &self.terms {
            let mut t = Poly::constant(c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = &t * &subs[i].pow(k);
                }
            }
            out = &out + &t;
        }
        out
    }

    pub fn max_bits(&self) -> u64 {
        self.terms
            .values()
            .map(|v| v.numer().bits().max(v.denom().bits()))
            .max()
            .unwrap_or(0)
    }

    fn min_exponent(&self, i: usize) -> u32 {
        self.terms.keys().map(|e| e[i]).min().unwrap_or(0)
    }

    fn shift_down(&self, sh: &[u32]) -> Self {
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            p.add_term(e.iter().zip(sh).map(|(a, b)| a - b).collect(), c.clone());
        }
        p
    }
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(e, c)| {
                let mono: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| k > 0)
                    .map(|(i, &k)| if k == 1 { format!("x{i}") } else { format!("x{i}^{k}") })
                    .collect();
                if mono.is_empty() {
                    format!("{c}")
                } else {
                    format!("{c}*{}", mono.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Bivariate polynomial as coefficients in `x` of powers of `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct Bivar(pub Vec<Poly>);

impl Bivar {
    fn trim(mut self) -> Self {
        while self.0.last().is_some_and(|p| p.is_zero()) {
            self.0.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|p| p.is_zero())
    }

    pub fn deg_y(&self) -> Option<usize> {
        self.0.iter().rposition(|p| !p.is_zero())
    }

    pub fn deg_x(&self) -> usize {
        self.0.iter().filter_map(|p| p.degree()).max().unwrap_or(0)
    }

    fn lc(&self) -> Poly {
        self.deg_y().map(|d| self.0[d].clone()).unwrap_or_else(Poly::zero)
    }

    pub fn from_mpoly(p: &MPoly, xv: usize, yv: usize) -> Self {
        let mut rows: Vec<Vec<BigRational>> = Vec::new();
        for (e, c) in p.terms() {
            let (i, j) = (e[xv] as usize, e[yv] as usize);
            if rows.len() <= j {
                rows.resize(j + 1, Vec::new());
            }
            if rows[j].len() <= i {
                rows[j].resize(i + 1, BigRational::zero());
            }
            rows[j][i] += c;
        }
        Bivar(rows.into_iter().map(Poly::new).collect()).trim()
    }

    fn content(&self) -> Poly {
        self.0.iter().filter(|p| !p.is_zero()).fold(Poly::zero(), |g, p| {
            if g.is_zero() {
                p.monic()
            } else {
                Poly::gcd(&g, p)
            }
        })
    }

    fn div_poly(&self, d: &Poly) -> Self {
        Bivar(
            self.0
                .iter()
                .map(|p| {
                    if p.is_zero() {
                        Poly::zero()
                    } else {
                        p.exact_div(d).unwrap()
                    }
                })
                .collect(),
        )
    }

    fn primitive(&self) -> Self {
        let c = self.content();
        if c.is_zero() {
            return self.clone();
        }
        self.div_poly(&c)
    }

    fn mul_poly(&self, p: &Poly) -> Self {
        Bivar(self.0.iter().map(|q| q * p).collect()).trim()
    }

    fn sub(&self, o: &Self) -> Self {
        let n = self.0.len().max(o.0.len());
        Bivar(
            (0..n)
                .map(|k| {
                    let a = self.0.get(k).cloned().unwrap_or_else(Poly::zero);
                    let b = o.0.get(k).cloned().unwrap_or_else(Poly::zero);
                    &a - &b
                })
                .collect(),
        )
        .trim()
    }

    fn shift_y(&self, k: usize) -> Self {
        let mut v = vec![Poly::zero(); k];
        v.extend(self.0.iter().cloned());
        Bivar(v)
    }

    /// Pseudo-remainder in `y`.
    fn prem(&self, d: &Self) -> Self {
        let dd = d.deg_y().expect("division by zero");
        let lc = d.lc();
        let mut r = self.clone().trim();
        while let Some(dr) = r.deg_y() {
            if dr < dd {
                break;
            }
            let lr = r.lc();
            r = r.mul_poly(&lc).sub(&d.mul_poly(&lr).shift_y(dr - dd));
        }
        r
    }

    /// `gcd` up to a rational unit.
    pub fn gcd(a: &Self, b: &Self) -> Self {
        if a.is_zero() {
            return b.clone().trim();
        }
        if b.is_zero() {
            return a.clone().trim();
        }
        let c = Poly::gcd(&a.content(), &b.content());
        let (mut p, mut q) = (a.primitive(), b.primitive());
        if p.deg_y() < q.deg_y() {
            std::mem::swap(&mut p, &mut q);
        }
        while !q.is_zero() {
            let r = p.prem(&q);
            p = q;
            q = if r.is_zero() { r } else { r.primitive() };
        }
        p.primitive().mul_poly(&c)
    }

    /// Exact quotient, or `None` when `d` does not divide.
    pub fn exact_div(&self, d: &Self) -> Option<Self> {
        let dd = d.deg_y()?;
        let lc = d.lc();
        let mut r = self.clone().trim();
        let mut q = vec![Poly::zero(); r.deg_y().map(|x| x + 1).unwrap_or(0).saturating_sub(dd).max(1)];
        while let Some(dr) = r.deg_y() {
            if dr < dd {
                return None;
            }
            let t = r.lc().exact_div(&lc)?;
            r = r.sub(&Bivar(vec![t.clone()]).mul_bivar(d).shift_y(dr - dd));
            q[dr - dd] = &q[dr - dd] + &t;
        }
        Some(Bivar(q).trim())
    }

    fn mul_bivar(&self, o: &Self) -> Self {
        if self.0.is_empty() || o.0.is_empty() {
            return Bivar(Vec::new());
        }
        let mut v = vec![Poly::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                v[i + j] = &v[i + j] + &(a * b);
            }
        }
        Bivar(v).trim()
    }

    /// Specialize `x = c`.
    fn at_x(&self, c: &BigRational) -> Poly {
        Poly::new(self.0.iter().map(|p| p.eval(c)).collect())
    }

    /// Swap the roles of `x` and `y`.
    fn transpose(&self) -> Self {
        let dx = self.deg_x();
        Bivar(
            (0..=dx)
                .map(|i| Poly::new(self.0.iter().map(|p| p.coeff(i)).collect()))
                .collect(),
        )
        .trim()
    }
}

/// True when the polynomials certainly share no factor of positive degree in
/// `y`, checked at one specialization of `x`.
fn coprime_in_y(ps: &[Bivar]) -> bool {
    let Some(first) = ps.iter().find(|p| p.deg_y().unwrap_or(0) > 0) else {
        return true;
    };
    let lc = first.lc();
    for k in 1..50i64 {
        let c =
            BigRational::new(k.into(), 7.into()) * BigRational::from_integer(if k % 2 == 0 { 1 } else { -1 }.into());
        if lc.eval(&c).is_zero() {
            continue;
        }
        let g = ps
            .iter()
            .map(|p| p.at_x(&c))
            .fold(Poly::zero(), |g, p| if g.is_zero() { p } else { Poly::gcd(&g, &p) });
        return g.degree().unwrap_or(0) == 0;
    }
    false
}

/// Components with their common factor divided out.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub polys: Vec<MPoly>,
    /// Block degrees of the removed factor.
    pub removed: Vec<u32>,
}

/// Divide out the common factor of multihomogeneous components.
///
/// `blocks` lists the variable blocks; each block must have two variables
/// (a `P^1` factor) when there are two blocks, or three (a `P^2`) when
/// there is one. The last variable of each block is used to dehomogenize.
pub fn reduce_common_factor(polys: &[MPoly], blocks: &[Vec<usize>]) -> Reduction {
    let nv = polys[0].nvars();
    let before: Vec<Vec<u32>> = polys
        .iter()
        .map(|p| blocks.iter().map(|b| p.degree_in(b)).collect())
        .collect();
    // common monomial factor
    let sh: Vec<u32> = (0..nv)
        .map(|i| {
            polys
                .iter()
                .filter(|p| !p.is_zero())
                .map(|p| p.min_exponent(i))
                .min()
                .unwrap_or(0)
        })
        .collect();
    let polys: Vec<MPoly> = polys.iter().map(|p| p.shift_down(&sh)).collect();
    let (xv, yv) = match blocks {
        [b0, b1] if b0.len() == 2 && b1.len() == 2 => (b0[0], b1[0]),
        [b] if b.len() == 3 => (b[0], b[1]),
        _ => panic!("unsupported block layout"),
    };
    let biv: Vec<Bivar> = polys.iter().map(|p| Bivar::from_mpoly(p, xv, yv)).collect();
    let nonzero: Vec<Bivar> = biv.iter().filter(|b| !b.is_zero()).cloned().collect();
    let trivial = coprime_in_y(&nonzero) && coprime_in_y(&nonzero.iter().map(|b| b.transpose()).collect::<Vec<_>>());
    let polys = if trivial {
        polys
    } else {
        let h = nonzero
            .iter()
            .skip(1)
            .fold(nonzero[0].clone(), |g, p| Bivar::gcd(&g, p));
        let hdeg = match blocks.len() {
            2 => vec![h.deg_x() as u32, h.deg_y().unwrap_or(0) as u32],
            _ => vec![bivar_total_degree(&h)],
        };
        if hdeg.iter().all(|&d| d == 0) {
            polys
        } else {
            polys
                .iter()
                .zip(&biv)
                .map(|(p, b)| {
                    if b.is_zero() {
                        return p.clone();
                    }
                    let q = b.exact_div(&h).expect("gcd divides");
                    let target: Vec<u32> = blocks.iter().zip(&hdeg).map(|(bl, d)| p.degree_in(bl) - d).collect();
                    rehomogenize(&q, nv, blocks, &target)
                })
                .collect::<Vec<MPoly>>()
        }
    };
    let removed = blocks
        .iter()
        .enumerate()
        .map(|(k, b)| {
            let first = polys.iter().position(|p| !p.is_zero()).unwrap_or(0);
            before[first][k] - polys[first].degree_in(b)
        })
        .collect::<Vec<_>>();
    Reduction { polys, removed }
}

fn bivar_total_degree(b: &Bivar) -> u32 {
    b.0.iter()
        .enumerate()
        .filter_map(|(j, p)| p.degree().map(|d| (d + j) as u32))
        .max()
        .unwrap_or(0)
}

fn rehomogenize(b: &Bivar, nv: usize, blocks: &[Vec<usize>], target: &[u32]) -> MPoly {
    let mut out = MPoly::zero(nv);
    for (j, p) in b.0.iter().enumerate() {
        for (i, c) in p.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut e = vec![0u32; nv];
            match blocks {
                [b0, b1] => {
                    e[b0[0]] = i as u32;
                    e[b0[1]] = target[0] - i as u32;
                    e[b1[0]] = j as u32;
                    e[b1[1]] = target[1] - j as u32;
                }
                [b] => {
                    e[b[0]] = i as u32;
                    e[b[1]] = j as u32;
                    e[b[2]] = target[0] - (i + j) as u32;
                }
                _ => unreachable!(),
            }
            out.add_term(e, c.clone());
        }
    }
    out
}

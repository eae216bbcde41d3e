//! Degree bookkeeping for maps of `P^1 x P^1`, the dynamical degree, the
//! dichotomy it decides, and the growth of the non N-D part of the spectrum.

use nalgebra::DMatrix;
use num_rational::BigRational;

use super::multipoly::{reduce_common_factor, MPoly};
use crate::error::{Error, Result};
use crate::measure::AtomicMeasure;
use crate::operator::{assemble, BaseOperator};
use crate::spectral::{
    counting_measure, nd_spectrum_with, spectrum_with, BoundaryCondition, NdOptions, SpectrumOptions,
};
use crate::structure::Structure;

/// Variables `(u0, v0, u1, v1)`.
pub const BLOCKS: [[usize; 2]; 2] = [[0, 1], [2, 3]];

fn blocks() -> Vec<Vec<usize>> {
    BLOCKS.iter().map(|b| b.to_vec()).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DegreeMatrix {
    entries: Vec<Vec<u64>>,
    spectral_radius: f64,
}

impl DegreeMatrix {
    pub fn new(entries: Vec<Vec<u64>>) -> Self {
        let k = entries.len();
        let m = DMatrix::from_fn(k, k, |i, j| entries[i][j] as f64);
        let spectral_radius = m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
        DegreeMatrix {
            entries,
            spectral_radius,
        }
    }

    pub fn entries(&self) -> &[Vec<u64>] {
        &self.entries
    }

    /// `l_n`
    pub fn spectral_radius(&self) -> f64 {
        self.spectral_radius
    }

    pub fn product(&self, o: &DegreeMatrix) -> DegreeMatrix {
        let k = self.entries.len();
        DegreeMatrix::new(
            (0..k)
                .map(|i| {
                    (0..k)
                        .map(|j| (0..k).map(|l| self.entries[i][l] * o.entries[l][j]).sum())
                        .collect()
                })
                .collect(),
        )
    }

    pub fn entrywise_le(&self, o: &DegreeMatrix) -> bool {
        self.entries
            .iter()
            .flatten()
            .zip(o.entries.iter().flatten())
            .all(|(a, b)| a <= b)
    }
}

/// `([P0 : Q0], [P1 : Q1])` in the variables `(u0, v0, u1, v1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BiProjectiveMap {
    comps: [MPoly; 4],
}

impl BiProjectiveMap {
    pub fn new(comps: [MPoly; 4]) -> Result<Self> {
        let b = blocks();
        for pair in [[0, 1], [2, 3]] {
            let (p, q) = (&comps[pair[0]], &comps[pair[1]]);
            if !p.is_multihomogeneous(&b) || !q.is_multihomogeneous(&b) {
                return Err(Error::Malformed("components must be bihomogeneous".into()));
            }
            if b.iter().any(|bl| p.degree_in(bl) != q.degree_in(bl)) && !p.is_zero() && !q.is_zero() {
                return Err(Error::Malformed("components of a pair differ in bidegree".into()));
            }
        }
        Ok(BiProjectiveMap { comps })
    }

    pub fn components(&self) -> &[MPoly; 4] {
        &self.comps
    }

    /// Row `i`: degrees of pair `i` in the two blocks.
    pub fn bidegree(&self) -> DegreeMatrix {
        let b = blocks();
        DegreeMatrix::new(
            [0, 2]
                .iter()
                .map(|&k| {
                    let p = if self.comps[k].is_zero() {
                        &self.comps[k + 1]
                    } else {
                        &self.comps[k]
                    };
                    b.iter().map(|bl| p.degree_in(bl) as u64).collect()
                })
                .collect(),
        )
    }

    /// `self o inner` before any reduction.
    pub fn compose_raw(&self, inner: &BiProjectiveMap) -> BiProjectiveMap {
        let subs = inner.comps.clone();
        BiProjectiveMap {
            comps: self.comps.clone().map(|c| c.substitute(&subs)),
        }
    }

    /// Each pair divided by its common factor.
    pub fn reduced(&self) -> BiProjectiveMap {
        let b = blocks();
        let r0 = reduce_common_factor(&self.comps[0..2], &b).polys;
        let r1 = reduce_common_factor(&self.comps[2..4], &b).polys;
        BiProjectiveMap {
            comps: [r0[0].clone(), r0[1].clone(), r1[0].clone(), r1[1].clone()],
        }
    }

    pub fn compose(&self, inner: &BiProjectiveMap) -> BiProjectiveMap {
        self.compose_raw(inner).reduced()
    }

    pub fn max_bits(&self) -> u64 {
        self.comps.iter().map(|c| c.max_bits()).max().unwrap_or(0)
    }

    /// `([z0 : z1], [w0 : w1])` as ratios, `None` at indeterminacy.
    pub fn eval(&self, p: &[BigRational; 4]) -> Option<[BigRational; 4]> {
        let v = self.comps.clone().map(|c| c.eval(p));
        let zero = num_traits::Zero::is_zero;
        if (zero(&v[0]) && zero(&v[1])) || (zero(&v[2]) && zero(&v[3])) {
            None
        } else {
            Some(v)
        }
    }
}

/// `d_1, ..., d_n` of the iterates, each reduced.
pub fn bidegree_sequence(m: &BiProjectiveMap, n: usize, bit_limit: u64) -> Result<Vec<DegreeMatrix>> {
    let mut cur = m.reduced();
    let mut out = vec![cur.bidegree()];
    for _ in 1..n {
        cur = m.compose(&cur);
        let bits = cur.max_bits();
        if bits > bit_limit {
            return Err(Error::BitLimit(bits));
        }
        out.push(cur.bidegree());
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct DegreeEstimate {
    /// `l_n^{1/n}` at the largest `n`.
    pub estimate: f64,
    /// `l_n^{1/n}` for every `n`.
    pub sequence: Vec<f64>,
    /// Running minimum of the sequence, an upper bound by submultiplicativity.
    pub upper_bounds: Vec<f64>,
}

/// `d_inf ~ l_n^{1/n}` from `l_1, l_2, ...`.
pub fn dynamical_degree(l: &[f64]) -> Result<DegreeEstimate> {
    if l.is_empty() || l.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Validation("l_n must be positive".into()));
    }
    let sequence: Vec<f64> = l
        .iter()
        .enumerate()
        .map(|(k, v)| v.powf(1.0 / (k + 1) as f64))
        .collect();
    let upper_bounds = sequence
        .iter()
        .scan(f64::INFINITY, |m, &v| {
            *m = m.min(v);
            Some(*m)
        })
        .collect();
    Ok(DegreeEstimate {
        estimate: *sequence.last().unwrap(),
        sequence,
        upper_bounds,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dichotomy {
    /// `d_inf < N`: the density of states is carried by N-D eigenvalues.
    CaseI,
    /// `d_inf = N`: generically no N-D part.
    CaseII,
    Inconclusive,
}

impl std::fmt::Display for Dichotomy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Dichotomy::CaseI => "case_i",
            Dichotomy::CaseII => "case_ii",
            Dichotomy::Inconclusive => "inconclusive",
        })
    }
}

pub const CASE_I_MARGIN: f64 = 0.2;
pub const CASE_II_MARGIN: f64 = 0.1;

pub fn dichotomy_classify(d_inf: f64, n: usize) -> Dichotomy {
    let n = n as f64;
    if d_inf < n - CASE_I_MARGIN {
        Dichotomy::CaseI
    } else if (d_inf - n).abs() <= CASE_II_MARGIN {
        Dichotomy::CaseII
    } else {
        Dichotomy::Inconclusive
    }
}

#[derive(Clone, Debug)]
pub struct GrowthFit {
    /// `(n, |nu^+_<n> - nu^ND_<n>|)`
    pub points: Vec<(usize, f64)>,
    /// Least-squares slope of the log of the mass against `n`; `-inf` when
    /// every difference vanishes.
    pub slope: f64,
}

/// Mass of `nu^+_<n> - nu^ND_<n>` over `levels` and its exponential rate.
pub fn growth_check(s: &Structure, base: &BaseOperator, levels: &[usize], opts: &NdOptions) -> Result<GrowthFit> {
    let mut points = Vec::new();
    for &n in levels {
        let op = assemble(base, s, &s.build_level(n))?;
        let neu = spectrum_with(
            &op,
            BoundaryCondition::Neumann,
            SpectrumOptions {
                ceiling: opts.ceiling,
                vectors: false,
            },
        )?;
        let nd = nd_spectrum_with(&op, opts)?;
        let diff: AtomicMeasure = counting_measure(&neu).difference(&nd);
        points.push((n, diff.total_mass()));
    }
    Ok(GrowthFit {
        slope: log_slope(&points),
        points,
    })
}

/// Least-squares slope of `ln y` against `x` over positive `y`.
pub fn log_slope(points: &[(usize, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, y)| *y > 0.0)
        .map(|&(x, y)| (x as f64, y.ln()))
        .collect();
    if pts.is_empty() {
        return f64::NEG_INFINITY;
    }
    if pts.len() == 1 {
        return f64::NAN;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

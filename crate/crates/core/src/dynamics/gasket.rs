//! The Sierpinski gasket: the maps induced by `T`, the decimation
//! polynomial `p(v) = v(5 + 2v)`, and the closed-form limit of the density
//! of states.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::degree::BiProjectiveMap;
use super::multipoly::MPoly;
use super::rational1d::RationalMap1D;
use crate::error::{Error, Result};
use crate::measure::AtomicMeasure;
use crate::operator::{assemble, BaseOperator};
use crate::poly::{int, rat, Poly};
use crate::spectral::{spectrum_with, BoundaryCondition, SpectrumOptions};
use crate::structure::Structure;

/// Locations excluded from the decimation diagnostic.
pub const EXCEPTIONAL: [f64; 3] = [-3.0, -1.5, -2.5];

#[derive(Clone, Debug)]
pub struct GasketMaps {
    /// `g` on `P^1 x P^1`.
    pub g: BiProjectiveMap,
    /// Homogeneous lift of `R` to `C^2 x C^2`.
    pub lift: [MPoly; 4],
    /// `z -> z(z+5) / ((2z+1)(z+1))`
    pub g_hat: RationalMap1D,
    /// `v -> v(5 + 2v)`
    pub p_hat: RationalMap1D,
    /// `z -> 3z / (1 - z)`
    pub conjugacy: RationalMap1D,
}

fn v(i: usize) -> MPoly {
    MPoly::var(4, i)
}

fn mono(c: i64, e: [u32; 4]) -> MPoly {
    MPoly::monomial(e.to_vec(), int(c))
}

pub fn gasket_maps() -> GasketMaps {
    // ([3 u0 u1 : 2 u0 v1 + u1 v0], [3 u1 (u0 v1 + u1 v0) : 5 u1 v0 v1 + u0 v1^2])
    let p0 = mono(3, [1, 0, 1, 0]);
    let q0 = mono(2, [1, 0, 0, 1]).add(&mono(1, [0, 1, 1, 0]));
    let p1 = mono(3, [1, 0, 1, 1]).add(&mono(3, [0, 1, 2, 0]));
    let q1 = mono(5, [0, 1, 1, 1]).add(&mono(1, [1, 0, 0, 2]));
    let g = BiProjectiveMap::new([p0, q0, p1, q1]).expect("bihomogeneous");
    let lift = [
        mono(3, [1, 0, 1, 1]),
        mono(2, [1, 0, 0, 2]).add(&mono(1, [0, 1, 1, 1])),
        mono(6, [1, 0, 1, 1]).add(&mono(6, [0, 1, 2, 0])),
        mono(10, [0, 1, 1, 1]).add(&mono(2, [1, 0, 0, 2])),
    ];
    let g_hat = RationalMap1D::new(Poly::from_ints(&[0, 5, 1]), Poly::from_ints(&[1, 3, 2])).unwrap();
    let p_hat = RationalMap1D::polynomial(Poly::from_ints(&[0, 5, 2]));
    let conjugacy = RationalMap1D::new(Poly::from_ints(&[0, 3]), Poly::from_ints(&[1, -1])).unwrap();
    let _ = v;
    GasketMaps {
        g,
        lift,
        g_hat,
        p_hat,
        conjugacy,
    }
}

impl GasketMaps {
    /// `p_hat o h = h o g_hat` as rational functions.
    pub fn conjugacy_holds(&self) -> bool {
        self.p_hat
            .compose(&self.conjugacy)
            .same_map(&self.conjugacy.compose(&self.g_hat))
    }
}

fn check_target(t: f64) -> Result<()> {
    if !(-2.5..=0.0).contains(&t) {
        return Err(Error::OutsideInvariantInterval(t));
    }
    Ok(())
}

/// Both roots of `2v^2 + 5v - t = 0`.
fn preimages_of(t: f64) -> [f64; 2] {
    let s = (25.0 + 8.0 * t).sqrt();
    [(-5.0 + s) / 4.0, (-5.0 - s) / 4.0]
}

/// All real solutions of `p_hat^k(v) = target`.
pub fn phat_preimages(target: f64, k: usize) -> Result<Vec<f64>> {
    check_target(target)?;
    let mut level = vec![target];
    for _ in 0..k {
        level = level.iter().flat_map(|&t| preimages_of(t)).collect();
    }
    Ok(level)
}

#[derive(Clone, Debug, Serialize)]
pub struct PreimageNode {
    pub depth: usize,
    pub parent: Option<usize>,
    pub location: f64,
}

/// Preimage tree down to depth `k`, breadth first.
pub fn phat_preimage_tree(target: f64, k: usize) -> Result<Vec<PreimageNode>> {
    check_target(target)?;
    let mut nodes = vec![PreimageNode {
        depth: 0,
        parent: None,
        location: target,
    }];
    let mut frontier = vec![0usize];
    for d in 1..=k {
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for &p in &frontier {
            for loc in preimages_of(nodes[p].location) {
                next.push(nodes.len());
                nodes.push(PreimageNode {
                    depth: d,
                    parent: Some(p),
                    location: loc,
                });
            }
        }
        frontier = next;
    }
    Ok(nodes)
}

#[derive(Clone, Debug)]
pub struct LimitAtom {
    pub location: f64,
    pub mass: BigRational,
    /// Preimage depth, `None` for the isolated atom.
    pub depth: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct GasketLimitMeasure {
    pub atoms: Vec<LimitAtom>,
    /// Mass of the terms beyond the truncation.
    pub deficit: BigRational,
}

impl GasketLimitMeasure {
    pub fn total_mass(&self) -> BigRational {
        self.atoms.iter().fold(BigRational::zero(), |a, b| a + &b.mass)
    }

    pub fn to_measure(&self) -> AtomicMeasure {
        AtomicMeasure::from_atoms(
            self.atoms
                .iter()
                .map(|a| (a.location, crate::weight::ratio_to_f64(&a.mass)))
                .collect(),
            1e-12,
        )
    }
}

/// `delta_{-3} / 2` plus `3^{-k-1} / 2` at every `k`-th preimage of `-3/2`
/// and `-5/2`, for `k <= k_max`.
pub fn gasket_limit_measure(k_max: usize) -> GasketLimitMeasure {
    let mut atoms = vec![LimitAtom {
        location: -3.0,
        mass: rat(1, 2),
        depth: None,
    }];
    for k in 0..=k_max {
        let mass = BigRational::new(BigInt::one(), BigInt::from(2) * BigInt::from(3).pow(k as u32 + 1));
        for root in [-1.5, -2.5] {
            for loc in phat_preimages(root, k).expect("roots lie in the invariant interval") {
                atoms.push(LimitAtom {
                    location: loc,
                    mass: mass.clone(),
                    depth: Some(k),
                });
            }
        }
    }
    // sum_{k > k_max} 2^{k+1} 3^{-k-1} / 2 = (2/3)^{k_max + 1}
    let deficit = num_traits::pow(rat(2, 3), k_max + 1);
    atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
    GasketLimitMeasure { atoms, deficit }
}

#[derive(Clone, Debug)]
pub struct LimitComparison {
    /// Largest distance from a finite-level atom to its nearest limit atom.
    pub max_location_mismatch: f64,
    /// Finite-level atoms farther than the tolerance from every limit atom.
    pub unmatched: Vec<(f64, f64)>,
    /// Finite-level atoms heavier than their limit atom.
    pub mass_violations: Vec<(f64, f64, f64)>,
    pub finite_total: f64,
    pub limit_total: f64,
    pub finite_mass_at_minus_three: f64,
}

impl LimitComparison {
    pub fn matched(&self) -> bool {
        self.unmatched.is_empty() && self.mass_violations.is_empty()
    }
}

pub fn compare_with_limit(
    finite: &AtomicMeasure,
    limit: &GasketLimitMeasure,
    loc_tol: f64,
    mass_tol: f64,
) -> LimitComparison {
    let lm = limit.to_measure();
    let mut out = LimitComparison {
        max_location_mismatch: 0.0,
        unmatched: Vec::new(),
        mass_violations: Vec::new(),
        finite_total: finite.total_mass(),
        limit_total: lm.total_mass(),
        finite_mass_at_minus_three: finite.mass_near(-3.0, loc_tol),
    };
    for &(loc, mass) in finite.atoms() {
        match lm.nearest(loc) {
            Some((l, m)) => {
                let d = (l - loc).abs();
                out.max_location_mismatch = out.max_location_mismatch.max(d);
                if d > loc_tol {
                    out.unmatched.push((loc, mass));
                } else if mass > m + mass_tol {
                    out.mass_violations.push((loc, mass, m));
                }
            }
            None => out.unmatched.push((loc, mass)),
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct DecimationReport {
    pub n: usize,
    pub checked: usize,
    pub excluded: usize,
    /// `(lambda, p_hat(lambda), distance to the level n spectrum)`
    pub failures: Vec<(f64, f64, f64)>,
    pub max_mismatch: f64,
}

/// `p_hat` maps the Dirichlet spectrum at level `n + 1` into the Dirichlet
/// and Neumann spectra at level `n`, away from the exceptional values.
pub fn decimation_check(
    s: &Structure,
    base: &BaseOperator,
    n: usize,
    tol: f64,
    ceiling: usize,
) -> Result<DecimationReport> {
    let opts = SpectrumOptions {
        ceiling,
        vectors: false,
    };
    let upper = assemble(base, s, &s.build_level(n + 1))?;
    let lower = assemble(base, s, &s.build_level(n))?;
    let fine = spectrum_with(&upper, BoundaryCondition::Dirichlet, opts)?.eigenvalues;
    let mut coarse = spectrum_with(&lower, BoundaryCondition::Dirichlet, opts)?.eigenvalues;
    coarse.extend(spectrum_with(&lower, BoundaryCondition::Neumann, opts)?.eigenvalues);
    coarse.sort_by(f64::total_cmp);
    let maps = gasket_maps();
    let mut rep = DecimationReport {
        n,
        checked: 0,
        excluded: 0,
        failures: Vec::new(),
        max_mismatch: 0.0,
    };
    for &lam in &fine {
        if EXCEPTIONAL.iter().any(|&e| (lam - e).abs() <= tol) {
            rep.excluded += 1;
            continue;
        }
        rep.checked += 1;
        let img = maps.p_hat.eval_f64(lam);
        let d = nearest_distance(&coarse, img);
        rep.max_mismatch = rep.max_mismatch.max(d);
        if d > tol {
            rep.failures.push((lam, img, d));
        }
    }
    Ok(rep)
}

fn nearest_distance(sorted: &[f64], x: f64) -> f64 {
    let i = sorted.partition_point(|&v| v < x);
    let mut d = f64::INFINITY;
    if i < sorted.len() {
        d = d.min((sorted[i] - x).abs());
    }
    if i > 0 {
        d = d.min((sorted[i - 1] - x).abs());
    }
    d
}

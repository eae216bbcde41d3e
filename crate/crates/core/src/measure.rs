//! Finite atomic measures on the real line.

use serde::Serialize;

pub const DEFAULT_MERGE_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AtomicMeasure {
    /// Strictly increasing locations with positive masses.
    atoms: Vec<(f64, f64)>,
    merge_tol: f64,
}

impl AtomicMeasure {
    pub fn empty(merge_tol: f64) -> Self {
        AtomicMeasure {
            atoms: Vec::new(),
            merge_tol,
        }
    }

    /// Build from arbitrary `(location, mass)` pairs. Sorted locations whose
    /// gap to the previous one is at most `merge_tol` are coalesced; the
    /// merged location is the mass-weighted mean.
    pub fn from_atoms(mut raw: Vec<(f64, f64)>, merge_tol: f64) -> Self {
        raw.retain(|a| a.1 > 0.0);
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut atoms: Vec<(f64, f64)> = Vec::new();
        let mut last_loc = f64::NEG_INFINITY;
        let mut weighted = 0.0;
        for (loc, mass) in raw {
            match atoms.last_mut() {
                Some(a) if loc - last_loc <= merge_tol => {
                    weighted += loc * mass;
                    a.1 += mass;
                    a.0 = weighted / a.1;
                }
                _ => {
                    weighted = loc * mass;
                    atoms.push((loc, mass));
                }
            }
            last_loc = loc;
        }
        AtomicMeasure { atoms, merge_tol }
    }

    /// Unit mass at each value, repeated values adding up.
    pub fn counting(values: &[f64], merge_tol: f64) -> Self {
        Self::from_atoms(values.iter().map(|&v| (v, 1.0)).collect(), merge_tol)
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn merge_tol(&self) -> f64 {
        self.merge_tol
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    pub fn scale(&self, c: f64) -> Self {
        AtomicMeasure {
            atoms: self.atoms.iter().map(|&(l, m)| (l, m * c)).collect(),
            merge_tol: self.merge_tol,
        }
    }

    /// Mass in `[lambda, 0]`.
    pub fn cdf(&self, lambda: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.0 >= lambda && a.0 <= 0.0)
            .map(|a| a.1)
            .sum()
    }

    /// Mass of atoms within `tol` of `loc`.
    pub fn mass_near(&self, loc: f64, tol: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| (a.0 - loc).abs() <= tol)
            .map(|a| a.1)
            .sum()
    }

    /// Atom closest to `loc`.
    pub fn nearest(&self, loc: f64) -> Option<(f64, f64)> {
        self.atoms
            .iter()
            .copied()
            .min_by(|a, b| (a.0 - loc).abs().total_cmp(&(b.0 - loc).abs()))
    }

    /// `self - other` with atoms of `other` matched within the merge tolerance;
    /// negative leftovers are dropped.
    pub fn difference(&self, other: &AtomicMeasure) -> Self {
        let tol = self.merge_tol.max(other.merge_tol);
        let mut atoms = Vec::new();
        for &(l, m) in &self.atoms {
            let rest = m - other.mass_near(l, tol);
            if rest > 1e-12 {
                atoms.push((l, rest));
            }
        }
        AtomicMeasure {
            atoms,
            merge_tol: self.merge_tol,
        }
    }
}

/// `sup_lambda |F1(lambda) - F2(lambda)|` for the cdf convention above.
///
/// Locations of the two measures closer than the larger merge tolerance are
/// identified first, so that roundoff in coincident atoms does not register
/// as a jump.
pub fn sup_cdf_distance(m1: &AtomicMeasure, m2: &AtomicMeasure) -> f64 {
    let tol = m1.merge_tol.max(m2.merge_tol);
    let mut locs: Vec<f64> = m1.atoms.iter().chain(&m2.atoms).map(|a| a.0).collect();
    locs.sort_by(f64::total_cmp);
    let mut reps: Vec<f64> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for l in locs {
        if reps.is_empty() || l - last > tol {
            reps.push(l);
        }
        last = l;
    }
    let snap = |l: f64| -> usize {
        match reps.binary_search_by(|r| r.total_cmp(&l)) {
            Ok(k) => k,
            Err(k) => k - 1,
        }
    };
    // masses per representative, then a sweep from the top
    let mut diff = vec![0.0; reps.len()];
    for &(l, m) in &m1.atoms {
        if l <= tol {
            diff[snap(l)] += m;
        }
    }
    for &(l, m) in &m2.atoms {
        if l <= tol {
            diff[snap(l)] -= m;
        }
    }
    let mut acc: f64 = 0.0;
    let mut best: f64 = 0.0;
    for d in diff.iter().rev() {
        acc += d;
        best = best.max(acc.abs());
    }
    best
}

/// `m1 >= m2` atomwise: each atom of `m2` is covered by mass of `m1` within
/// `tol`, up to a relative slack of 1e-9.
pub fn dominates(m1: &AtomicMeasure, m2: &AtomicMeasure, tol: f64) -> bool {
    m2.atoms
        .iter()
        .all(|&(l, m)| m1.mass_near(l, tol) >= m * (1.0 - 1e-9) - 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn counting_coalesces() {
        let m = AtomicMeasure::counting(&[0.0, -3.0, -3.0], DEFAULT_MERGE_TOL);
        assert_eq!(m.atoms(), &[(-3.0, 2.0), (0.0, 1.0)]);
        assert_eq!(m.cdf(-3.0), 3.0);
        assert_eq!(m.cdf(-2.0), 1.0);
        assert_eq!(m.scale(0.5).total_mass(), 1.5);
    }

    #[test]
    fn near_values_merge() {
        let m = AtomicMeasure::counting(&[-1.0, -1.0 + 5e-8, -2.0], 1e-7);
        assert_eq!(m.len(), 2);
        assert_eq!(m.atoms()[1].1, 2.0);
    }

    #[test]
    fn domination_and_distance() {
        let a = AtomicMeasure::counting(&[-1.0, -1.0, -2.0], 1e-7);
        let b = AtomicMeasure::counting(&[-1.0, -2.0], 1e-7);
        assert!(dominates(&a, &b, 1e-7));
        assert!(!dominates(&b, &a, 1e-7));
        assert_eq!(sup_cdf_distance(&a, &b), 1.0);
        assert_eq!(sup_cdf_distance(&a, &a), 0.0);
        assert_eq!(a.difference(&b).total_mass(), 1.0);
    }

    proptest! {
        #[test]
        fn merged_atoms_are_increasing(v in proptest::collection::vec(-10.0f64..0.0, 0..60)) {
            let m = AtomicMeasure::counting(&v, 1e-3);
            prop_assert!(m.atoms().windows(2).all(|w| w[1].0 - w[0].0 > 0.0));
            prop_assert!((m.total_mass() - v.len() as f64).abs() < 1e-9);
            prop_assert!((m.cdf(-10.0) - v.len() as f64).abs() < 1e-9);
        }

        #[test]
        fn distance_is_symmetric(
            v in proptest::collection::vec(-5.0f64..0.0, 0..20),
            w in proptest::collection::vec(-5.0f64..0.0, 0..20),
        ) {
            let a = AtomicMeasure::counting(&v, 1e-7);
            let b = AtomicMeasure::counting(&w, 1e-7);
            prop_assert_eq!(sup_cdf_distance(&a, &b), sup_cdf_distance(&b, &a));
            prop_assert!(sup_cdf_distance(&a, &b) >= (a.total_mass() - b.total_mass()).abs() - 1e-9);
        }
    }
}

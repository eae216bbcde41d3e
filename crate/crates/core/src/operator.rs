//! Difference operators `A_<n>` and measures `b_<n>` on lattice levels.

use std::fmt::Write as _;
use std::ops::{AddAssign, Mul};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structure::{LatticeLevel, Structure};
use crate::weight::Weight;

/// On-disk form: upper-triangle conductances `[x, y, a_xy]` (1-based) and
/// the point masses `b`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BaseOperatorFile {
    pub a: Vec<(usize, usize, Weight)>,
    pub b: Vec<Weight>,
}

/// `A f(x) = -sum_{y != x} a_xy (f(y) - f(x))` together with masses `b` on `F`.
#[derive(Clone, Debug)]
pub struct BaseOperator {
    size: usize,
    conductances: Vec<(usize, usize, Weight)>,
    b: Vec<Weight>,
}

impl BaseOperator {
    /// Conductances are 0-based `(x, y, a_xy)` with `x != y`; each unordered
    /// pair may appear once.
    pub fn new(size: usize, conductances: Vec<(usize, usize, Weight)>, b: Vec<Weight>) -> Result<Self> {
        if b.len() != size {
            return Err(Error::DimensionMismatch {
                expected: size,
                found: b.len(),
            });
        }
        let mut seen = vec![false; size * size];
        for (x, y, a) in &conductances {
            if *x >= size || *y >= size || x == y {
                return Err(Error::IndexOutOfRange(format!("conductance ({}, {})", x + 1, y + 1)));
            }
            let (lo, hi) = if x < y { (*x, *y) } else { (*y, *x) };
            if std::mem::replace(&mut seen[lo * size + hi], true) {
                return Err(Error::Malformed(format!(
                    "conductance ({}, {}) listed twice",
                    lo + 1,
                    hi + 1
                )));
            }
            if a.value() < 0.0 {
                return Err(Error::NonPositiveWeight(format!("a_{},{} = {a}", x + 1, y + 1)));
            }
        }
        if let Some(w) = b.iter().find(|w| !w.is_positive()) {
            return Err(Error::NonPositiveWeight(format!("b entry {w}")));
        }
        Ok(BaseOperator { size, conductances, b })
    }

    pub fn from_file_format(f: BaseOperatorFile) -> Result<Self> {
        let n = f.b.len();
        let cond =
            f.a.into_iter()
                .map(|(x, y, a)| {
                    if x == 0 || y == 0 {
                        Err(Error::IndexOutOfRange("indices are 1-based".into()))
                    } else {
                        Ok((x - 1, y - 1, a))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
        Self::new(n, cond, f.b)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file_format(serde_json::from_str(text)?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_file_format(&self) -> BaseOperatorFile {
        BaseOperatorFile {
            a: self
                .conductances
                .iter()
                .map(|(x, y, a)| (x + 1, y + 1, a.clone()))
                .collect(),
            b: self.b.clone(),
        }
    }

    /// Complete graph with unit conductances and unit masses.
    pub fn complete_graph(size: usize) -> Self {
        let mut c = Vec::new();
        for x in 0..size {
            for y in x + 1..size {
                c.push((x, y, Weight::one()));
            }
        }
        BaseOperator::new(size, c, vec![Weight::one(); size]).expect("valid")
    }

    /// The triangle Laplacian of the gasket.
    pub fn gasket() -> Self {
        Self::complete_graph(3)
    }

    /// The discrete Laplacian on two points with masses `m0, m1`.
    pub fn interval(m0: Weight, m1: Weight) -> Result<Self> {
        BaseOperator::new(2, vec![(0, 1, Weight::one())], vec![m0, m1])
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn conductances(&self) -> &[(usize, usize, Weight)] {
        &self.conductances
    }

    pub fn b(&self) -> &[Weight] {
        &self.b
    }

    pub fn b_values(&self) -> Vec<f64> {
        self.b.iter().map(Weight::value).collect()
    }

    pub fn a_matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.size, self.size);
        for (x, y, a) in &self.conductances {
            let v = a.value();
            m[(*x, *y)] -= v;
            m[(*y, *x)] -= v;
            m[(*x, *x)] += v;
            m[(*y, *y)] += v;
        }
        m
    }

    /// Exact `A` when every conductance is rational.
    pub fn a_exact(&self) -> Option<DMatrix<BigRational>> {
        let mut m = DMatrix::from_element(self.size, self.size, BigRational::zero());
        for (x, y, a) in &self.conductances {
            let v = a.exact()?.clone();
            m[(*x, *y)] -= &v;
            m[(*y, *x)] -= &v;
            m[(*x, *x)] += &v;
            m[(*y, *y)] += &v;
        }
        Some(m)
    }

    pub fn b_exact(&self) -> Option<Vec<BigRational>> {
        self.b.iter().map(|w| w.exact().cloned()).collect()
    }

    /// Check the size, irreducibility and group invariance against a structure.
    pub fn check_against(&self, s: &Structure) -> Result<()> {
        if self.size != s.n_points() {
            return Err(Error::DimensionMismatch {
                expected: s.n_points(),
                found: self.size,
            });
        }
        let mut uf = crate::structure::UnionFind::new(self.size);
        for (x, y, a) in &self.conductances {
            if a.value() > 0.0 {
                uf.union(*x, *y);
            }
        }
        if (0..self.size).any(|x| uf.find(x) != 0) {
            return Err(Error::Validation("base operator is not irreducible".into()));
        }
        let a = self.a_matrix();
        let b = self.b_values();
        for g in s.group() {
            for x in 0..self.size {
                if (b[g[x]] - b[x]).abs() > 1e-12 * b[x] {
                    return Err(Error::Validation("b is not group invariant".into()));
                }
                for y in 0..self.size {
                    if (a[(g[x], g[y])] - a[(x, y)]).abs() > 1e-12 * a.amax() {
                        return Err(Error::Validation("A is not group invariant".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Coordinate-list symmetric matrix with both triangles stored.
#[derive(Clone, Debug, PartialEq)]
pub struct CooMatrix {
    pub dim: usize,
    /// Sorted by (row, col), duplicates merged.
    pub entries: Vec<(usize, usize, f64)>,
}

impl CooMatrix {
    fn from_triplets(dim: usize, mut t: Vec<(usize, usize, f64)>) -> Self {
        t.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(t.len());
        for (r, c, v) in t {
            match entries.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => entries.push((r, c, v)),
            }
        }
        entries.retain(|e| e.2 != 0.0);
        CooMatrix { dim, entries }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] = v;
        }
        m
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }

    /// Largest absolute row sum, an upper bound for the spectral norm of a
    /// symmetric matrix.
    pub fn norm_inf(&self) -> f64 {
        let mut s = vec![0.0; self.dim];
        for &(r, _, v) in &self.entries {
            s[r] += v.abs();
        }
        s.into_iter().fold(0.0, f64::max)
    }

    /// MatrixMarket coordinate text (symmetric, lower triangle, 1-based).
    pub fn to_matrix_market(&self) -> String {
        let lower: Vec<_> = self.entries.iter().filter(|e| e.0 >= e.1).collect();
        let mut s = String::from("%%MatrixMarket matrix coordinate real symmetric\n");
        writeln!(s, "{} {} {}", self.dim, self.dim, lower.len()).unwrap();
        for (r, c, v) in lower {
            writeln!(s, "{} {} {:.17e}", r + 1, c + 1, v).unwrap();
        }
        s
    }
}

/// `A_<n>`, `b_<n>` and the boundary of one level.
#[derive(Clone, Debug)]
pub struct LevelOperator {
    pub level: usize,
    pub a: CooMatrix,
    pub b: Vec<f64>,
    pub boundary: Vec<usize>,
    pub interior: Vec<usize>,
}

impl LevelOperator {
    pub fn dim(&self) -> usize {
        self.b.len()
    }
}

/// Per `<0>`-cell energy and mass factors `alpha_1^n / prod alpha_{i_k}` and
/// `prod beta_{i_k} / beta_1^n`.
pub fn cell_factors(s: &Structure, addr: &[usize]) -> (f64, f64) {
    let a = s.alpha();
    let b = s.beta();
    let mut fa = 1.0;
    let mut fb = 1.0;
    for &i in addr {
        fa *= a[0].value() / a[i].value();
        fb *= b[i].value() / b[0].value();
    }
    (fa, fb)
}

/// Exact version of [`cell_factors`] for the energy weight.
pub fn cell_factor_exact(s: &Structure, addr: &[usize]) -> Option<BigRational> {
    let a = s.alpha();
    let mut f = BigRational::from_integer(1.into());
    for &i in addr {
        f = f * a[0].exact()? / a[i].exact()?;
    }
    Some(f)
}

/// Sum of weighted copies of `A` and `b` over all `<0>`-cells of `lat`.
pub fn assemble(base: &BaseOperator, s: &Structure, lat: &LatticeLevel) -> Result<LevelOperator> {
    if base.size() != s.n_points() || lat.n_points() != s.n_points() {
        return Err(Error::DimensionMismatch {
            expected: s.n_points(),
            found: base.size(),
        });
    }
    let a0 = base.a_matrix();
    let b0 = base.b_values();
    let nv = lat.num_vertices();
    let mut trip = Vec::new();
    let mut b = vec![0.0; nv];
    for (addr, verts) in lat.zero_cells() {
        let (fa, fb) = cell_factors(s, &addr);
        for (x, &vx) in verts.iter().enumerate() {
            b[vx] += fb * b0[x];
            for (y, &vy) in verts.iter().enumerate() {
                if a0[(x, y)] != 0.0 {
                    trip.push((vx, vy, fa * a0[(x, y)]));
                }
            }
        }
    }
    Ok(LevelOperator {
        level: lat.n,
        a: CooMatrix::from_triplets(nv, trip),
        b,
        boundary: lat.boundary().to_vec(),
        interior: lat.interior().to_vec(),
    })
}

/// Dense `Q_<n> = sum_cells w(addr) * copy of Q` for an arbitrary scalar type.
pub fn assemble_dense<T, W>(q: &DMatrix<T>, lat: &LatticeLevel, weight: W) -> DMatrix<T>
where
    T: nalgebra::Scalar + Zero + AddAssign + Mul<Output = T>,
    W: Fn(&[usize]) -> T,
{
    let nv = lat.num_vertices();
    let mut m = DMatrix::from_element(nv, nv, T::zero());
    for (addr, verts) in lat.zero_cells() {
        let w = weight(&addr);
        for (x, &vx) in verts.iter().enumerate() {
            for (y, &vy) in verts.iter().enumerate() {
                m[(vx, vy)] += w.clone() * q[(x, y)].clone();
            }
        }
    }
    m
}

/// A symmetric generalized pencil `(A, diag b)` on a subset of vertices.
#[derive(Clone, Debug)]
pub struct Pencil {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    /// Vertex id of each row.
    pub vertices: Vec<usize>,
}

/// Neumann pencil on all vertices and Dirichlet pencil on the interior.
/// Eigenvalues of `H^±` are the negatives of the pencil eigenvalues.
pub fn h_matrices(op: &LevelOperator) -> (Pencil, Pencil) {
    let full = op.a.to_dense();
    let all: Vec<usize> = (0..op.dim()).collect();
    let neumann = Pencil {
        a: full.clone(),
        b: DVector::from_vec(op.b.clone()),
        vertices: all,
    };
    let k = op.interior.len();
    let a = DMatrix::from_fn(k, k, |i, j| full[(op.interior[i], op.interior[j])]);
    let dirichlet = Pencil {
        a,
        b: DVector::from_iterator(k, op.interior.iter().map(|&v| op.b[v])),
        vertices: op.interior.clone(),
    };
    (neumann, dirichlet)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::StructureSpec;

    fn gasket_op(n: usize) -> LevelOperator {
        let s = Structure::gasket();
        assemble(&BaseOperator::gasket(), &s, &s.build_level(n)).unwrap()
    }

    #[test]
    fn gasket_level_one_entries() {
        let op = gasket_op(1);
        let a = op.a.to_dense();
        for &v in &op.interior {
            assert_eq!(a[(v, v)], 4.0);
            assert_eq!(op.b[v], 2.0);
        }
        for &v in &op.boundary {
            assert_eq!(a[(v, v)], 2.0);
            assert_eq!(op.b[v], 1.0);
        }
    }

    #[test]
    fn level_zero_is_base() {
        let s = Structure::interval(Weight::ratio(1, 3)).unwrap();
        let base = BaseOperator::interval(Weight::ratio(2, 1), Weight::one()).unwrap();
        let op = assemble(&base, &s, &s.build_level(0)).unwrap();
        assert_eq!(op.a.to_dense(), base.a_matrix());
        assert_eq!(op.b, vec![2.0, 1.0]);
    }

    #[test]
    fn half_interval_is_path_laplacian() {
        let s = Structure::interval(Weight::ratio(1, 2)).unwrap();
        let base = BaseOperator::interval(Weight::one(), Weight::one()).unwrap();
        let op = assemble(&base, &s, &s.build_level(2)).unwrap();
        let a = op.a.to_dense();
        // vertices ordered along the path by smallest word
        let path = DMatrix::from_fn(5, 5, |i, j| {
            if i == j {
                if i == 0 || i == 4 {
                    1.0
                } else {
                    2.0
                }
            } else if i.abs_diff(j) == 1 {
                -1.0
            } else {
                0.0
            }
        });
        let lat = s.build_level(2);
        // order: word (0,0,0)=left end ... map by walking cell addresses
        let order: Vec<usize> = vec![
            lat.vertex_of(&[0, 0, 0]),
            lat.vertex_of(&[0, 0, 1]),
            lat.vertex_of(&[0, 1, 1]),
            lat.vertex_of(&[1, 0, 1]),
            lat.vertex_of(&[1, 1, 1]),
        ];
        let permuted = DMatrix::from_fn(5, 5, |i, j| a[(order[i], order[j])]);
        assert_eq!(permuted, path);
    }

    #[test]
    fn kernel_is_constants() {
        for n in 0..=4 {
            let op = gasket_op(n);
            let a = op.a.to_dense();
            let ones = DVector::from_element(op.dim(), 1.0);
            assert!((&a * &ones).amax() < 1e-12);
            let eig = nalgebra::SymmetricEigen::new(a);
            let zeros = eig.eigenvalues.iter().filter(|v| v.abs() < 1e-9).count();
            assert_eq!(zeros, 1);
        }
    }

    #[test]
    fn locality_under_h() {
        // interval with unequal weights exercises assumption (H)
        let s = Structure::interval(Weight::ratio(1, 3)).unwrap();
        let base = BaseOperator::interval(Weight::one(), Weight::ratio(3, 2)).unwrap();
        for n in 1..=4 {
            let lower = s.build_level(n);
            let upper = s.build_level(n + 1);
            let op_n = assemble(&base, &s, &lower).unwrap();
            let op_up = assemble(&base, &s, &upper).unwrap();
            for i in 0..2 {
                let emb = upper.embed(&lower, i);
                let mut f_low = vec![0.0; lower.num_vertices()];
                for (k, &v) in lower.interior().iter().enumerate() {
                    f_low[v] = (k as f64 + 1.0).sin();
                }
                let mut f_up = vec![0.0; upper.num_vertices()];
                for v in 0..lower.num_vertices() {
                    f_up[emb[v]] = f_low[v];
                }
                let h_low: Vec<f64> = op_n.a.mul_vec(&f_low).iter().zip(&op_n.b).map(|(a, b)| a / b).collect();
                let a_up = op_up.a.mul_vec(&f_up);
                for v in 0..upper.num_vertices() {
                    if !emb.contains(&v) {
                        assert_eq!(a_up[v], 0.0);
                    }
                }
                for &v in lower.interior() {
                    let h_up = a_up[emb[v]] / op_up.b[emb[v]];
                    assert!((h_up - h_low[v]).abs() < 1e-12, "n={n} i={i}");
                }
            }
        }
    }

    #[test]
    fn group_equivariance() {
        let s = Structure::gasket();
        for n in 0..=3 {
            let lat = s.build_level(n);
            let a = assemble(&BaseOperator::gasket(), &s, &lat).unwrap().a.to_dense();
            for g in s.group() {
                let p = lat.induced_permutation(g).unwrap();
                for i in 0..lat.num_vertices() {
                    for j in 0..lat.num_vertices() {
                        assert_eq!(a[(p[i], p[j])], a[(i, j)]);
                    }
                }
            }
        }
    }

    #[test]
    fn base_operator_checks() {
        assert!(BaseOperator::new(2, vec![(0, 0, Weight::one())], vec![Weight::one(); 2]).is_err());
        assert!(BaseOperator::new(2, vec![(0, 1, Weight::one())], vec![Weight::one()]).is_err());
        let disconnected = BaseOperator::new(3, vec![(0, 1, Weight::one())], vec![Weight::one(); 3]).unwrap();
        assert!(disconnected.check_against(&Structure::gasket()).is_err());
        let skew = BaseOperator::new(
            3,
            vec![
                (0, 1, Weight::one()),
                (1, 2, Weight::one()),
                (0, 2, Weight::ratio(2, 1)),
            ],
            vec![Weight::one(); 3],
        )
        .unwrap();
        assert!(skew.check_against(&Structure::gasket()).is_err());
        assert!(BaseOperator::gasket().check_against(&Structure::gasket()).is_ok());
        let json = r#"{"a": [[1,2,1],[1,3,"1"],[2,3,1.0]], "b": [1,1,1]}"#;
        let parsed = BaseOperator::from_json(json).unwrap();
        assert_eq!(parsed.a_matrix(), BaseOperator::gasket().a_matrix());
        let _ = StructureSpec::gasket();
    }

    #[test]
    fn matrix_market_export() {
        let op = gasket_op(1);
        let mm = op.a.to_matrix_market();
        let mut lines = mm.lines();
        assert!(lines.next().unwrap().starts_with("%%MatrixMarket"));
        assert_eq!(lines.next().unwrap(), "6 6 15");
    }
}

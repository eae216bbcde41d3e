//! The renormalization map `T` on symmetric matrices, its polynomial lift
//! `R` on the Grassmann algebra, the Green function and the spectral
//! polynomials built from `R^n(phi(lambda))`.
//!
//! Sign convention: `phi(lambda) = exp(eta_bar (A + lambda diag b) eta)`, so
//! that roots of the spectral polynomials sit at eigenvalues of `H`, which
//! are `<= 0`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::grassmann::{exp_q, Coeff, GrassmannElement};
use crate::measure::AtomicMeasure;
use crate::operator::{assemble, assemble_dense, BaseOperator};
use crate::poly::Poly;
use crate::schur::trace_on_subset;
use crate::spectral::{nd_spectrum_with, stacked_nullity, NdOptions};
use crate::structure::{LatticeLevel, Structure};

pub type Gc = GrassmannElement<Complex64>;
pub type Gq = GrassmannElement<BigRational>;

pub const DEFAULT_GREEN_ITERATIONS: usize = 40;
/// Norms below this count as hitting the indeterminacy set.
pub const GREEN_ZERO_NORM: f64 = 1e-280;

/// Scalars for which the cell weights `alpha_1 / alpha_i` are available.
pub trait RenormScalar: Coeff {
    fn cell_weights(ctx: &RenormContext) -> Result<Vec<Self>>;
}

impl RenormScalar for Complex64 {
    fn cell_weights(ctx: &RenormContext) -> Result<Vec<Self>> {
        Ok(ctx.weights.iter().map(|&w| Complex64::new(w, 0.0)).collect())
    }
}

impl RenormScalar for BigRational {
    fn cell_weights(ctx: &RenormContext) -> Result<Vec<Self>> {
        ctx.weights_exact.clone().ok_or_else(|| Error::NotExact("alpha".into()))
    }
}

#[derive(Clone, Debug)]
pub struct RenormContext {
    structure: Structure,
    level1: LatticeLevel,
    /// `lifts[i][x]`: vertex of `F_<1>` carrying point `x` of cell `i`.
    lifts: Vec<Vec<usize>>,
    weights: Vec<f64>,
    weights_exact: Option<Vec<BigRational>>,
    symg_basis: Vec<DMatrix<BigRational>>,
}

impl RenormContext {
    pub fn new(structure: &Structure) -> Self {
        let level1 = structure.build_level(1);
        let n0 = structure.n_points();
        let lifts = (0..structure.n_cells())
            .map(|i| (0..n0).map(|x| level1.vertex_of(&[i, x])).collect())
            .collect();
        let a = structure.alpha();
        let weights = a.iter().map(|ai| a[0].value() / ai.value()).collect();
        let weights_exact = a
            .iter()
            .map(|ai| Some(a[0].exact()? / ai.exact()?))
            .collect::<Option<Vec<_>>>();
        let symg_basis = commutant_basis(n0, structure.group());
        RenormContext {
            structure: structure.clone(),
            level1,
            lifts,
            weights,
            weights_exact,
            symg_basis,
        }
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn level1(&self) -> &LatticeLevel {
        &self.level1
    }

    /// Basis of the symmetric matrices commuting with the group.
    pub fn symg_basis(&self) -> &[DMatrix<BigRational>] {
        &self.symg_basis
    }

    /// `alpha_1 / alpha_i`
    pub fn cell_weights(&self) -> &[f64] {
        &self.weights
    }

    fn n(&self) -> usize {
        self.structure.n_cells()
    }

    fn n0(&self) -> usize {
        self.structure.n_points()
    }

    /// `Q_<1>`: weighted copies of `Q` on the level-one cells.
    pub fn q1<C: RenormScalar + nalgebra::Scalar + std::ops::AddAssign>(&self, q: &DMatrix<C>) -> Result<DMatrix<C>> {
        let w = C::cell_weights(self)?;
        let nv = self.level1.num_vertices();
        let mut m = DMatrix::from_element(nv, nv, C::zero());
        for (i, lift) in self.lifts.iter().enumerate() {
            for x in 0..self.n0() {
                for y in 0..self.n0() {
                    m[(lift[x], lift[y])] += w[i].clone() * q[(x, y)].clone();
                }
            }
        }
        Ok(m)
    }

    /// `T Q = (Q_<1>)_{boundary of F_<1>}`
    pub fn t_map(&self, q: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        self.check_dim(q.nrows())?;
        trace_on_subset(&self.q1(q)?, self.level1.boundary())
    }

    /// `T^n Q`
    pub fn t_iterate(&self, q: &DMatrix<Complex64>, n: usize) -> Result<DMatrix<Complex64>> {
        let mut x = q.clone();
        for _ in 0..n {
            x = self.t_map(&x)?;
        }
        Ok(x)
    }

    /// Dense `Q_<n>` on a given level.
    pub fn q_level(&self, q: &DMatrix<Complex64>, lat: &LatticeLevel) -> DMatrix<Complex64> {
        let w = self.weights.clone();
        assemble_dense(q, lat, move |addr| {
            Complex64::new(addr.iter().map(|&i| w[i]).product(), 0.0)
        })
    }

    /// Residual `max |g Q - Q g|` over the group.
    pub fn invariance_residual(&self, q: &DMatrix<Complex64>) -> f64 {
        let mut r: f64 = 0.0;
        for g in self.structure.group() {
            for x in 0..self.n0() {
                for y in 0..self.n0() {
                    r = r.max((q[(g[x], g[y])] - q[(x, y)]).norm());
                }
            }
        }
        r
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.n0() {
            return Err(Error::DimensionMismatch {
                expected: self.n0(),
                found: d,
            });
        }
        Ok(())
    }

    /// `R = R_{F_<1> -> boundary} o (product of the scaled lifts)`.
    pub fn r_map<C: RenormScalar>(&self, x: &GrassmannElement<C>) -> Result<GrassmannElement<C>> {
        self.check_dim(x.generators())?;
        let w = C::cell_weights(self)?;
        let nv = self.level1.num_vertices();
        let mut prod = GrassmannElement::unit(nv);
        for (i, lift) in self.lifts.iter().enumerate() {
            prod = prod.mul(&x.tau(&w[i]).relabel(lift, nv));
        }
        Ok(prod.restrict(self.level1.boundary()))
    }

    pub fn r_iterate<C: RenormScalar>(&self, x: &GrassmannElement<C>, n: usize) -> Result<GrassmannElement<C>> {
        let mut y = x.clone();
        for _ in 0..n {
            y = self.r_map(&y)?;
        }
        Ok(y)
    }

    /// `C_<n>` from `C_<n> = C_<n-1>^N (prod_k alpha_k / alpha_1)^{|interior F_<n-1>|}`.
    pub fn c_n(&self, n: usize) -> f64 {
        let p: f64 = self.weights.iter().map(|w| 1.0 / w).product();
        let mut c: f64 = 1.0;
        for m in 1..=n {
            let inner = self.structure.build_level(m - 1).interior().len();
            c = c.powi(self.n() as i32) * p.powi(inner as i32);
        }
        c
    }

    pub fn c_n_exact(&self, n: usize) -> Result<BigRational> {
        let w = self
            .weights_exact
            .as_ref()
            .ok_or_else(|| Error::NotExact("alpha".into()))?;
        let p = w.iter().fold(BigRational::one(), |acc, v| acc / v);
        let mut c = BigRational::one();
        for m in 1..=n {
            let inner = self.structure.build_level(m - 1).interior().len();
            c = num_traits::pow(c, self.n()) * num_traits::pow(p.clone(), inner);
        }
        Ok(c)
    }

    /// Normalized iteration of `R` summing the telescoped log-norms.
    pub fn green_estimate(&self, x: &Gc, n_max: usize) -> Result<GreenEstimate> {
        let nrm = x.norm();
        if nrm == 0.0 {
            return Err(Error::Numerical("Green function of the zero element".into()));
        }
        let nf = self.n() as f64;
        let mut cur = x.scale(&Complex64::new(1.0 / nrm, 0.0));
        let mut history = Vec::with_capacity(n_max);
        let mut acc = 0.0;
        let mut weight = 1.0 / nf;
        for k in 0..n_max {
            let next = self.r_map(&cur)?;
            let g = next.norm();
            if g < GREEN_ZERO_NORM || !g.is_finite() {
                return Ok(GreenEstimate {
                    value: f64::NEG_INFINITY,
                    iterations: k + 1,
                    tail_bound: 0.0,
                    log_norm_history: history,
                    zero_hit: Some(k),
                });
            }
            let lg = g.ln();
            history.push(lg);
            acc += lg * weight;
            weight /= nf;
            cur = next.scale(&Complex64::new(1.0 / g, 0.0));
        }
        let sup = history.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(GreenEstimate {
            value: nrm.ln() + acc,
            iterations: n_max,
            tail_bound: sup / (nf.powi(n_max as i32) * (nf - 1.0)),
            log_norm_history: history,
            zero_hit: None,
        })
    }

    /// Green function of `phi(lambda)` over a list of points.
    pub fn green_scan(
        &self,
        base: &BaseOperator,
        points: &[Complex64],
        n_max: usize,
        exec: Exec,
    ) -> Vec<Result<GreenEstimate>> {
        exec.map(points, |&z| self.green_estimate(&phi(base, z), n_max))
    }

    /// `lambda -> R^n(phi(lambda))` with every coefficient as an exact
    /// polynomial of degree at most `|F_<n>|`.
    pub fn iterate_polynomials(&self, base: &BaseOperator, n: usize, exec: Exec) -> Result<BTreeMap<(u32, u32), Poly>> {
        let deg = self.structure.build_level(n).num_vertices();
        self.interpolated(base, n, deg, exec)
    }

    fn interpolated(
        &self,
        base: &BaseOperator,
        n: usize,
        deg: usize,
        exec: Exec,
    ) -> Result<BTreeMap<(u32, u32), Poly>> {
        let nodes: Vec<BigRational> = (0..=deg as i64)
            .map(|k| BigRational::from_integer((-k).into()))
            .collect();
        let values = exec.map(&nodes, |lam| -> Result<Gq> {
            self.r_iterate(&phi_exact(base, lam)?, n)
        });
        let mut samples: BTreeMap<(u32, u32), Vec<BigRational>> = BTreeMap::new();
        for (k, v) in values.into_iter().enumerate() {
            for (&key, c) in v?.terms() {
                samples
                    .entry(key)
                    .or_insert_with(|| vec![BigRational::zero(); nodes.len()])[k] = c.clone();
            }
        }
        Ok(samples
            .into_iter()
            .map(|(key, ys)| (key, Poly::interpolate(&nodes, &ys)))
            .collect())
    }

    /// `lambda -> <R^n phi(lambda), 1>`, whose roots are the Dirichlet
    /// eigenvalues of `H_<n>`.
    pub fn dirichlet_poly(&self, base: &BaseOperator, n: usize) -> Result<Poly> {
        let deg = self.structure.build_level(n).interior().len();
        let polys = self.interpolated(base, n, deg, Exec::default())?;
        Ok(polys.get(&(0, 0)).cloned().unwrap_or_else(Poly::zero))
    }

    /// `lambda -> <R^n phi(lambda), prod eta_bar eta>`, whose roots are the
    /// Neumann eigenvalues of `H_<n>`.
    pub fn neumann_poly(&self, base: &BaseOperator, n: usize) -> Result<Poly> {
        let deg = self.structure.build_level(n).num_vertices();
        let polys = self.interpolated(base, n, deg, Exec::default())?;
        let full = (1u32 << self.n0()) - 1;
        let top = polys.get(&(full, full)).cloned().unwrap_or_else(Poly::zero);
        let k = self.n0() as i64;
        Ok(if (k * (k - 1) / 2) % 2 == 1 { -&top } else { top })
    }

    /// `rho_n(lambda0) = dim ker^ND((A + lambda0 b)_<n>)` by stacked nullity.
    pub fn rho_n(&self, base: &BaseOperator, lambda0: f64, n: usize, tol: f64) -> Result<usize> {
        let lat = self.structure.build_level(n);
        let op = assemble(base, &self.structure, &lat)?;
        Ok(stacked_nullity(&op, lambda0, tol))
    }

    /// Vanishing order at `lambda0` of `lambda -> R^n(phi(lambda))`.
    pub fn rho_n_exact(&self, base: &BaseOperator, lambda0: &BigRational, n: usize) -> Result<usize> {
        let polys = self.iterate_polynomials(base, n, Exec::default())?;
        Ok(polys.values().map(|p| p.root_multiplicity(lambda0)).min().unwrap_or(0))
    }

    /// `nu^ND_<n> / N^n`, a lower approximation of `mu^ND`.
    pub fn mu_nd_estimate(&self, base: &BaseOperator, n: usize, opts: &NdOptions) -> Result<AtomicMeasure> {
        let lat = self.structure.build_level(n);
        let op = assemble(base, &self.structure, &lat)?;
        let nd = nd_spectrum_with(&op, opts)?;
        Ok(nd.scale((self.n() as f64).powi(-(n as i32))))
    }
}

#[derive(Clone, Debug)]
pub struct GreenEstimate {
    pub value: f64,
    pub iterations: usize,
    pub tail_bound: f64,
    pub log_norm_history: Vec<f64>,
    /// Step at which the iterate vanished, if it did.
    pub zero_hit: Option<usize>,
}

/// `exp(eta_bar (A + lambda diag b) eta)`
pub fn phi(base: &BaseOperator, lambda: Complex64) -> Gc {
    exp_q(&phi_matrix(base, lambda))
}

pub fn phi_matrix(base: &BaseOperator, lambda: Complex64) -> DMatrix<Complex64> {
    let a = base.a_matrix();
    let b = base.b_values();
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| {
        let d = if i == j { lambda * b[i] } else { Complex64::zero() };
        Complex64::new(a[(i, j)], 0.0) + d
    })
}

pub fn phi_exact(base: &BaseOperator, lambda: &BigRational) -> Result<Gq> {
    let a = base.a_exact().ok_or_else(|| Error::NotExact("A".into()))?;
    let b = base.b_exact().ok_or_else(|| Error::NotExact("b".into()))?;
    let m = DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| {
        if i == j {
            &a[(i, j)] + lambda * &b[i]
        } else {
            a[(i, j)].clone()
        }
    });
    Ok(exp_q(&m))
}

/// Exact basis of symmetric matrices `Q` with `Q[g x, g y] = Q[x, y]`.
pub fn commutant_basis(n0: usize, group: &[Vec<usize>]) -> Vec<DMatrix<BigRational>> {
    let pairs: Vec<(usize, usize)> = (0..n0).flat_map(|x| (x..n0).map(move |y| (x, y))).collect();
    let var = |x: usize, y: usize| -> usize {
        let (a, b) = if x <= y { (x, y) } else { (y, x) };
        pairs.iter().position(|&p| p == (a, b)).unwrap()
    };
    let mut rows: Vec<Vec<BigRational>> = Vec::new();
    for g in group {
        for &(x, y) in &pairs {
            let (u, v) = (var(g[x], g[y]), var(x, y));
            if u != v {
                let mut r = vec![BigRational::zero(); pairs.len()];
                r[u] += BigRational::one();
                r[v] -= BigRational::one();
                rows.push(r);
            }
        }
    }
    nullspace(rows, pairs.len())
        .into_iter()
        .map(|v| DMatrix::from_fn(n0, n0, |i, j| v[var(i, j)].clone()))
        .collect()
}

/// Exact nullspace by reduced row echelon form.
pub fn nullspace(mut rows: Vec<Vec<BigRational>>, ncols: usize) -> Vec<Vec<BigRational>> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let pv = rows[r][c].clone();
        for v in rows[r].iter_mut() {
            *v = &*v / &pv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for k in 0..ncols {
                    let t = &f * &rows[r][k];
                    rows[i][k] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); ncols];
            v[f] = BigRational::one();
            for (k, &pc) in pivots.iter().enumerate() {
                v[pc] = -rows[k][f].clone();
            }
            v
        })
        .collect()
}

/// `(u0, u1)` with `Q = u0 p_W0 + u1 p_W1`, `p_W0 = J / 3`.
pub fn gasket_coords(q: &DMatrix<Complex64>) -> (Complex64, Complex64) {
    let u0 = q.sum() / 3.0;
    let u1 = (q.trace() - u0) / 2.0;
    (u0, u1)
}

pub fn gasket_matrix(u0: Complex64, u1: Complex64) -> DMatrix<Complex64> {
    DMatrix::from_fn(3, 3, |i, j| {
        let j3 = u0 / 3.0 - u1 / 3.0;
        if i == j {
            j3 + u1
        } else {
            j3
        }
    })
}

/// Closed form of `T` on gasket coordinates.
pub fn gasket_t(u0: Complex64, u1: Complex64) -> (Complex64, Complex64) {
    (3.0 * u0 * u1 / (2.0 * u0 + u1), 3.0 * u1 * (u0 + u1) / (5.0 * u1 + u0))
}

/// Closed form of `T` on interval coordinates `(a, d, q)`.
pub fn interval_t(delta: f64, a: Complex64, d: Complex64, q: Complex64) -> [Complex64; 3] {
    let s = a + d / delta;
    [
        (a * s - q * q / delta) / s,
        (delta * d * s - delta * q * q) / s,
        -q * q / s,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{int, rat};
    use crate::schur::{det, submatrix};
    use crate::spectral::{spectrum, BoundaryCondition};
    use crate::weight::Weight;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cmax(m: DMatrix<Complex64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn rel(a: &Gc, b: &Gc) -> f64 {
        a.sub(b).norm() / a.norm().max(b.norm())
    }

    fn gasket() -> (RenormContext, BaseOperator) {
        (RenormContext::new(&Structure::gasket()), BaseOperator::gasket())
    }

    fn interval(a: i64, b: i64) -> (RenormContext, BaseOperator) {
        let s = Structure::interval(Weight::ratio(a, b)).unwrap();
        (
            RenormContext::new(&s),
            BaseOperator::interval(Weight::one(), Weight::one()).unwrap(),
        )
    }

    #[test]
    fn commutant_dimensions() {
        let (g, _) = gasket();
        assert_eq!(g.symg_basis().len(), 2);
        for q in g.symg_basis() {
            for p in g.structure().group() {
                for x in 0..3 {
                    for y in 0..3 {
                        assert_eq!(q[(p[x], p[y])], q[(x, y)]);
                    }
                }
            }
        }
        let (i, _) = interval(1, 3);
        assert_eq!(i.symg_basis().len(), 3);
    }

    #[test]
    fn gasket_t_closed_form() {
        let (g, _) = gasket();
        let one = gasket_matrix(c(1.0, 0.0), c(1.0, 0.0));
        let t = g.t_map(&one).unwrap();
        assert!(cmax(t - &one) < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let u0 = c(rng.gen_range(0.1..2.0), rng.gen_range(0.1..1.0));
            let u1 = c(rng.gen_range(0.1..2.0), rng.gen_range(0.1..1.0));
            let t = g.t_map(&gasket_matrix(u0, u1)).unwrap();
            let (v0, v1) = gasket_coords(&t);
            let (w0, w1) = gasket_t(u0, u1);
            assert!((v0 - w0).norm() < 1e-12 && (v1 - w1).norm() < 1e-12);
            assert!(g.invariance_residual(&t) < 1e-12);
        }
        let (u0, u1) = gasket_coords(&BaseOperator::gasket().a_matrix().map(|v| c(v, 0.0)));
        assert!(u0.norm() < 1e-15 && (u1 - 3.0).norm() < 1e-15);
    }

    #[test]
    fn interval_t_closed_form() {
        for (a_, b_) in [(1, 2), (1, 3)] {
            let (ctx, _) = interval(a_, b_);
            let alpha = a_ as f64 / b_ as f64;
            let delta = alpha / (1.0 - alpha);
            let q = DMatrix::from_row_slice(2, 2, &[c(1.3, 0.2), c(-0.4, 0.1), c(-0.4, 0.1), c(0.7, 0.5)]);
            let t = ctx.t_map(&q).unwrap();
            let e = interval_t(delta, q[(0, 0)], q[(1, 1)], q[(0, 1)]);
            assert!((t[(0, 0)] - e[0]).norm() < 1e-12);
            assert!((t[(1, 1)] - e[1]).norm() < 1e-12);
            assert!((t[(0, 1)] - e[2]).norm() < 1e-12);
        }
    }

    #[test]
    fn t_twice_equals_level_two_trace() {
        let (g, _) = gasket();
        let q = gasket_matrix(c(0.4, 0.3), c(1.1, 0.2));
        let lat = g.structure().build_level(2);
        let direct = trace_on_subset(&g.q_level(&q, &lat), lat.boundary()).unwrap();
        let iter = g.t_iterate(&q, 2).unwrap();
        assert!(cmax(direct - iter) < 1e-10);
    }

    #[test]
    fn lift_of_exponential() {
        for (ctx, _) in [gasket(), interval(1, 3)] {
            let n0 = ctx.structure().n_points();
            let q = if n0 == 3 {
                gasket_matrix(c(0.7, 0.4), c(1.9, 0.3))
            } else {
                DMatrix::from_row_slice(2, 2, &[c(1.2, 0.3), c(-0.5, 0.1), c(-0.5, 0.1), c(0.8, 0.2)])
            };
            for n in 1..=2 {
                let lat = ctx.structure().build_level(n);
                let qn = ctx.q_level(&q, &lat);
                let inner = submatrix(&qn, lat.interior(), lat.interior());
                let lhs = ctx.r_iterate(&exp_q(&q), n).unwrap();
                let rhs = exp_q(&ctx.t_iterate(&q, n).unwrap()).scale(&(det(&inner) * ctx.c_n(n)));
                assert!(rel(&lhs, &rhs) < 1e-9, "n={n} err={}", rel(&lhs, &rhs));
            }
        }
    }

    #[test]
    fn gasket_unit_coefficient() {
        let (g, _) = gasket();
        let (u0, u1) = (rat(3, 7), rat(-2, 5));
        let q = gasket_matrix(c(3.0 / 7.0, 0.0), c(-0.4, 0.0)).map(|z| z.re);
        // exact Q with the same coordinates
        let third = rat(1, 3);
        let qe = DMatrix::from_fn(3, 3, |i, j| {
            let base = (&u0 - &u1) * &third;
            if i == j {
                &base + &u1
            } else {
                base
            }
        });
        assert!((qe.map(|v| crate::weight::ratio_to_f64(&v)) - q).amax() < 1e-15);
        let r = g.r_map(&exp_q(&qe)).unwrap();
        let two = int(2);
        let five = int(5);
        let expected = rat(2, 27) * (&two * &u0 + &u1) * (&u0 + &five * &u1) * (&u0 + &five * &u1);
        assert_eq!(r.coefficient(0, 0), expected);
    }

    #[test]
    fn homogeneity_of_r() {
        let (g, base) = gasket();
        let x = phi(&base, c(-0.3, 0.2));
        let s = c(1.7, -0.4);
        let lhs = g.r_map(&x.scale(&s)).unwrap();
        let rhs = g.r_map(&x).unwrap().scale(&s.powi(3));
        assert!(rel(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn constants() {
        let (g, _) = gasket();
        assert_eq!(g.c_n(1), 1.0);
        let (i, _) = interval(1, 3);
        assert_eq!(i.c_n_exact(2).unwrap(), rat(2, 1));
        assert!((i.c_n(2) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn green_homogeneity_and_functional_equation() {
        let (g, base) = gasket();
        let x = phi(&base, c(-1.2, 0.5));
        let ge = g.green_estimate(&x, 30).unwrap();
        let s = c(0.3, 2.0);
        let gs = g.green_estimate(&x.scale(&s), 30).unwrap();
        assert!((gs.value - ge.value - s.norm().ln()).abs() <= ge.tail_bound + gs.tail_bound + 1e-12);
        let rx = g.r_map(&x).unwrap();
        let gr = g.green_estimate(&rx, 30).unwrap();
        assert!((gr.value - 3.0 * ge.value).abs() <= 3.0 * ge.tail_bound + gr.tail_bound + 1e-10);
        let g40 = g.green_estimate(&x, 40).unwrap();
        assert!((g40.value - ge.value).abs() <= ge.tail_bound);
    }

    #[test]
    fn green_hits_zero_on_indeterminacy() {
        let (g, _) = gasket();
        let z = Gc::monomial(3, 1, 1, c(1.0, 0.0));
        let e = g.green_estimate(&z, 10).unwrap();
        assert_eq!(e.value, f64::NEG_INFINITY);
        assert_eq!(e.zero_hit, Some(0));
    }

    #[test]
    fn polynomials_match_spectra() {
        let (g, base) = gasket();
        assert_eq!(g.dirichlet_poly(&base, 0).unwrap().degree(), Some(0));
        let p1 = g.dirichlet_poly(&base, 1).unwrap();
        let roots = p1.real_roots(1e-9);
        assert_eq!(roots.len(), 2);
        assert!((roots[0].0 + 2.5).abs() < 1e-12 && roots[0].1 == 2);
        assert!((roots[1].0 + 1.0).abs() < 1e-12 && roots[1].1 == 1);
        for n in 1..=2 {
            let op = assemble(&base, g.structure(), &g.structure().build_level(n)).unwrap();
            let neu = spectrum(&op, BoundaryCondition::Neumann).unwrap();
            let roots = g.neumann_poly(&base, n).unwrap().real_roots(1e-9);
            let from_poly: Vec<f64> = roots
                .iter()
                .rev()
                .flat_map(|&(l, m)| std::iter::repeat(l).take(m))
                .collect();
            assert_eq!(from_poly.len(), neu.eigenvalues.len());
            for (a, b) in from_poly.iter().zip(&neu.eigenvalues) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn rho_two_ways() {
        let (g, base) = gasket();
        let exact = g.rho_n_exact(&base, &int(-3), 2).unwrap();
        let stacked = g.rho_n(&base, -3.0, 2, 1e-8).unwrap();
        assert_eq!(exact, stacked);
        assert!(stacked > 0);
        assert_eq!(g.rho_n(&base, -0.77, 2, 1e-8).unwrap(), 0);
    }

    #[test]
    fn dirichlet_poly_level_two() {
        let (g, base) = gasket();
        let p = g.dirichlet_poly(&base, 2).unwrap();
        assert_eq!(p.degree(), Some(12));
        let op = assemble(&base, g.structure(), &g.structure().build_level(2)).unwrap();
        let dir = spectrum(&op, BoundaryCondition::Dirichlet).unwrap();
        let roots: Vec<f64> = p
            .real_roots(1e-9)
            .iter()
            .rev()
            .flat_map(|&(l, m)| std::iter::repeat(l).take(m))
            .collect();
        assert_eq!(roots.len(), 12);
        for (a, b) in roots.iter().zip(&dir.eigenvalues) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn siegel_points_never_vanish_and_converge() {
        let (g, _) = gasket();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let q = gasket_matrix(
                c(rng.gen_range(-3.0..3.0), rng.gen_range(0.01..2.0)),
                c(rng.gen_range(-3.0..3.0), rng.gen_range(0.01..2.0)),
            );
            let x = exp_q(&q);
            let mut prev = g.green_estimate(&x, 10).unwrap();
            assert!(prev.zero_hit.is_none());
            for n in 11..=14 {
                let cur = g.green_estimate(&x, n).unwrap();
                assert!((cur.value - prev.value).abs() <= prev.tail_bound + 1e-13);
                prev = cur;
            }
        }
    }
}

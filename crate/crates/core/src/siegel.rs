//! The Siegel upper half-space `S_+` of complex symmetric matrices with
//! positive definite imaginary part, its invariant distance, and the
//! estimates showing that `T` preserves `S_+` and contracts toward `i Id`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::BaseOperator;
use crate::renorm::{phi, RenormContext};

type CMat = DMatrix<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn real_part(q: &CMat) -> DMatrix<f64> {
    q.map(|z| z.re)
}

pub fn imag_part(q: &CMat) -> DMatrix<f64> {
    q.map(|z| z.im)
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Smallest eigenvalue of `Im Q` (symmetrized).
pub fn min_imag_eigenvalue(q: &CMat) -> f64 {
    sym(&imag_part(q)).symmetric_eigenvalues().min()
}

pub fn in_siegel(q: &CMat) -> bool {
    min_imag_eigenvalue(q) > 0.0
}

/// Smallest and largest characteristic roots, i.e. singular values.
pub fn characteristic_roots(m: &DMatrix<f64>) -> (f64, f64) {
    let s = m.clone().singular_values();
    (s.min(), s.max())
}

fn check(q: &CMat) -> Result<()> {
    if q.nrows() != q.ncols() {
        return Err(Error::DimensionMismatch {
            expected: q.nrows(),
            found: q.ncols(),
        });
    }
    if !in_siegel(q) {
        return Err(Error::NotInSiegel);
    }
    Ok(())
}

fn inverse(m: CMat) -> Result<CMat> {
    m.try_inverse().ok_or(Error::Numerical("singular matrix in S_+".into()))
}

/// `Y^{-1/2}` for real symmetric positive definite `Y`.
fn inv_sqrt(y: &DMatrix<f64>) -> DMatrix<f64> {
    let e = SymmetricEigen::new(sym(y));
    let d = e.eigenvalues.map(|v| 1.0 / v.sqrt());
    &e.eigenvectors * DMatrix::from_diagonal(&d) * e.eigenvectors.transpose()
}

fn from_roots(sqrt_r: impl Iterator<Item = f64>) -> f64 {
    sqrt_r
        .map(|s| {
            let s = s.clamp(0.0, 1.0);
            let l = ((1.0 + s) / (1.0 - s)).ln();
            l * l
        })
        .sum::<f64>()
        .sqrt()
}

/// Invariant distance on `S_+`.
///
/// Moves `Q2` to `i Id` by `Q -> Y^{-1/2} (Q - X) Y^{-1/2}` with
/// `Q2 = X + iY`, then reads the roots off the Cayley transform
/// `E = (Q' - i)(Q' + i)^{-1}`: the cross ratio becomes `E E^*`.
pub fn siegel_distance(q1: &CMat, q2: &CMat) -> Result<f64> {
    check(q1)?;
    check(q2)?;
    let n = q1.nrows();
    let s = inv_sqrt(&imag_part(q2)).map(|v| Complex64::new(v, 0.0));
    let x = real_part(q2).map(|v| Complex64::new(v, 0.0));
    let qp = &s * (q1 - x) * &s;
    let id = CMat::identity(n, n);
    let e = (&qp - &id * I) * inverse(&qp + &id * I)?;
    Ok(from_roots(e.singular_values().iter().copied()))
}

/// `R(Q1, Q2) = (Q1 - Q2)(Q1 - Q2bar)^{-1}(Q1bar - Q2bar)(Q1bar - Q2)^{-1}`
pub fn cross_ratio(q1: &CMat, q2: &CMat) -> Result<CMat> {
    let c1 = q1.conjugate();
    let c2 = q2.conjugate();
    Ok((q1 - q2) * inverse(q1 - &c2)? * (&c1 - &c2) * inverse(&c1 - q2)?)
}

/// The same distance from the eigenvalues of the cross ratio.
pub fn siegel_distance_cross_ratio(q1: &CMat, q2: &CMat) -> Result<f64> {
    check(q1)?;
    check(q2)?;
    let r = cross_ratio(q1, q2)?;
    let ev = r
        .schur()
        .eigenvalues()
        .ok_or_else(|| Error::Numerical("cross ratio eigenvalues".into()))?;
    Ok(from_roots(ev.iter().map(|z| z.re.max(0.0).sqrt())))
}

pub fn i_id(n: usize) -> CMat {
    CMat::identity(n, n) * I
}

#[derive(Clone, Debug, Default)]
pub struct SiegelReport {
    pub samples: usize,
    /// `Im(TQ)` positive definite.
    pub invariance_failures: usize,
    /// `rho_min(Im TQ) >= alpha_1 / alpha_max * rho_min(Im Q)`
    pub lower_bound_failures: usize,
    /// `rho_min(Im (TQ)^{-1}) >= alpha_min / alpha_1 * rho_min(Im Q^{-1})`
    pub inverse_bound_failures: usize,
    /// `d(i, T^n Q) <= sqrt|F| (d(i, Q) + n d(i, T(i)))`
    pub contraction_failures: usize,
    pub errors: Vec<String>,
    /// Smallest slack seen in each of the three inequalities.
    pub min_slack: [f64; 3],
}

impl SiegelReport {
    pub fn passed(&self) -> bool {
        self.invariance_failures == 0
            && self.lower_bound_failures == 0
            && self.inverse_bound_failures == 0
            && self.contraction_failures == 0
            && self.errors.is_empty()
    }
}

/// Run the invariance, the two root bounds and the contraction bound up to
/// `n_max` iterations on every sample.
pub fn siegel_invariance_check(ctx: &RenormContext, samples: &[CMat], n_max: usize) -> SiegelReport {
    let alpha: Vec<f64> = ctx.structure().alpha().iter().map(|a| a.value()).collect();
    let a1 = alpha[0];
    let amax = alpha.iter().cloned().fold(f64::MIN, f64::max);
    let amin = alpha.iter().cloned().fold(f64::MAX, f64::min);
    let n0 = ctx.structure().n_points();
    let mut rep = SiegelReport {
        samples: samples.len(),
        min_slack: [f64::INFINITY; 3],
        ..Default::default()
    };
    let origin = i_id(n0);
    let step = match ctx.t_map(&origin).and_then(|t| siegel_distance(&origin, &t)) {
        Ok(d) => d,
        Err(e) => {
            rep.errors.push(format!("T(i Id): {e}"));
            return rep;
        }
    };
    let scale = 1e-12;
    for (k, q) in samples.iter().enumerate() {
        let mut run = || -> Result<()> {
            let tq = ctx.t_map(q)?;
            if !in_siegel(&tq) {
                rep.invariance_failures += 1;
                return Ok(());
            }
            let lhs = characteristic_roots(&imag_part(&tq)).0;
            let rhs = a1 / amax * characteristic_roots(&imag_part(q)).0;
            rep.min_slack[0] = rep.min_slack[0].min(lhs - rhs);
            if lhs < rhs * (1.0 - scale) {
                rep.lower_bound_failures += 1;
            }
            let lhs = characteristic_roots(&imag_part(&inverse(tq.clone())?)).0;
            let rhs = amin / a1 * characteristic_roots(&imag_part(&inverse(q.clone())?)).0;
            rep.min_slack[1] = rep.min_slack[1].min(lhs - rhs);
            if lhs < rhs * (1.0 - scale) {
                rep.inverse_bound_failures += 1;
            }
            let d0 = siegel_distance(&origin, q)?;
            let mut cur = tq;
            for n in 1..=n_max {
                let bound = (n0 as f64).sqrt() * (d0 + n as f64 * step);
                let dn = siegel_distance(&origin, &cur)?;
                rep.min_slack[2] = rep.min_slack[2].min(bound - dn);
                if dn > bound * (1.0 + scale) + scale {
                    rep.contraction_failures += 1;
                    break;
                }
                if n < n_max {
                    cur = ctx.t_map(&cur)?;
                }
            }
            Ok(())
        };
        if let Err(e) = run() {
            rep.errors.push(format!("sample {k}: {e}"));
        }
    }
    rep
}

/// Five-point discrete Laplacian of `lambda -> G(phi(lambda))` at `z` with
/// step `h`.
pub fn green_laplacian(ctx: &RenormContext, base: &BaseOperator, z: Complex64, h: f64, n_max: usize) -> Result<f64> {
    let g = |w: Complex64| -> Result<f64> {
        let e = ctx.green_estimate(&phi(base, w), n_max)?;
        Ok(e.value)
    };
    let c = g(z)?;
    let s = g(z + h)? + g(z - h)? + g(z + I * h)? + g(z - I * h)?;
    Ok((s - 4.0 * c) / (h * h))
}

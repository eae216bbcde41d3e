//! Trace of a symmetric matrix on a subset (Schur complement) and harmonic
//! prolongation.
//!
//! Matrices are complex symmetric (not Hermitian), so all solves go through a
//! plain partially pivoted LU.

use nalgebra::{ComplexField, DMatrix, DVector};

use crate::error::{Error, Result};

/// Interior blocks with reciprocal condition number below this are poles.
pub const POLE_RCOND: f64 = 1e-13;

/// Sorted complement of `keep` in `0..n`.
pub fn complement(n: usize, keep: &[usize]) -> Vec<usize> {
    let mut mark = vec![false; n];
    for &k in keep {
        mark[k] = true;
    }
    (0..n).filter(|&i| !mark[i]).collect()
}

pub fn submatrix<T: nalgebra::Scalar>(q: &DMatrix<T>, rows: &[usize], cols: &[usize]) -> DMatrix<T> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| q[(rows[i], cols[j])].clone())
}

fn norm1<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.clone().modulus()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Factor the block on `idx` and refuse it when it is numerically singular.
fn factor<T: ComplexField<RealField = f64>>(m: DMatrix<T>) -> Result<nalgebra::LU<T, nalgebra::Dyn, nalgebra::Dyn>> {
    let n1 = norm1(&m);
    let lu = m.lu();
    let inv = lu.try_inverse().ok_or(Error::Pole { rcond: 0.0 })?;
    let rcond = if n1 == 0.0 { 0.0 } else { 1.0 / (n1 * norm1(&inv)) };
    if !(rcond >= POLE_RCOND) {
        return Err(Error::Pole { rcond });
    }
    Ok(lu)
}

/// Reciprocal condition number in the 1-norm, 0 for singular input.
pub fn rcond<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    let n1 = norm1(m);
    match m.clone().try_inverse() {
        Some(inv) if n1 > 0.0 => 1.0 / (n1 * norm1(&inv)),
        _ => 0.0,
    }
}

/// `Q_{F'} = Q|F' - B (Q|F\F')^{-1} B^t`, indexed by `keep` in the given order.
pub fn trace_on_subset<T: ComplexField<RealField = f64>>(q: &DMatrix<T>, keep: &[usize]) -> Result<DMatrix<T>> {
    let n = q.nrows();
    if q.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: q.ncols(),
        });
    }
    let rest = complement(n, keep);
    let qff = submatrix(q, keep, keep);
    if rest.is_empty() {
        return Ok(qff);
    }
    let b = submatrix(q, keep, &rest);
    let lu = factor(submatrix(q, &rest, &rest))?;
    let x = lu.solve(&b.transpose()).ok_or(Error::Pole { rcond: 0.0 })?;
    Ok(qff - b * x)
}

/// Extension `Hf` of `f` on `keep` with `(Q Hf)` vanishing off `keep`.
pub fn harmonic_prolongation<T: ComplexField<RealField = f64>>(
    q: &DMatrix<T>,
    keep: &[usize],
    f: &DVector<T>,
) -> Result<DVector<T>> {
    let n = q.nrows();
    if f.len() != keep.len() {
        return Err(Error::DimensionMismatch {
            expected: keep.len(),
            found: f.len(),
        });
    }
    let rest = complement(n, keep);
    let mut out = DVector::from_element(n, T::zero());
    for (k, &i) in keep.iter().enumerate() {
        out[i] = f[k].clone();
    }
    if rest.is_empty() {
        return Ok(out);
    }
    let bt = submatrix(q, &rest, keep);
    let lu = factor(submatrix(q, &rest, &rest))?;
    let rhs = -(bt * f);
    let h = lu.solve(&rhs).ok_or(Error::Pole { rcond: 0.0 })?;
    for (k, &i) in rest.iter().enumerate() {
        out[i] = h[k].clone();
    }
    Ok(out)
}

/// Determinant through LU, for any field.
pub fn det<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> T {
    if m.nrows() == 0 {
        return T::one();
    }
    m.clone().lu().determinant()
}

//! Dense eigensolves of the Neumann and Dirichlet pencils and detection of
//! Neumann-Dirichlet eigenvalues.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::measure::{AtomicMeasure, DEFAULT_MERGE_TOL};
use crate::operator::{h_matrices, LevelOperator, Pencil};

pub const DEFAULT_CEILING: usize = 10_000;
pub const DEFAULT_ND_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryCondition {
    Neumann,
    Dirichlet,
}

#[derive(Clone, Copy, Debug)]
pub struct SpectrumOptions {
    pub ceiling: usize,
    pub vectors: bool,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            ceiling: DEFAULT_CEILING,
            vectors: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    /// Eigenvalues of `H`, descending (all `<= 0`).
    pub eigenvalues: Vec<f64>,
    /// Column `k` belongs to `eigenvalues[k]`; columns are orthonormal for
    /// the `b`-weighted inner product. Rows follow `vertices`.
    pub eigenvectors: Option<DMatrix<f64>>,
    pub vertices: Vec<usize>,
}

impl EigenDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Solve `A f = mu diag(b) f` through `diag(b)^{-1/2} A diag(b)^{-1/2}`.
pub fn pencil_spectrum(p: &Pencil, vectors: bool) -> EigenDecomposition {
    let k = p.b.len();
    if k == 0 {
        return EigenDecomposition {
            eigenvalues: Vec::new(),
            eigenvectors: vectors.then(|| DMatrix::zeros(0, 0)),
            vertices: Vec::new(),
        };
    }
    let s: DVector<f64> = p.b.map(|x| 1.0 / x.sqrt());
    // faer's blocked solver: nalgebra's eigenvector path is far too slow here
    let sym = faer::Mat::<f64>::from_fn(k, k, |i, j| s[i] * p.a[(i, j)] * s[j]);
    let scale = sym.norm_max().max(f64::MIN_POSITIVE);
    let (mu, vecs): (Vec<f64>, Option<faer::Mat<f64>>) = if vectors {
        let e = sym
            .self_adjoint_eigen(faer::Side::Lower)
            .expect("symmetric eigensolve converges");
        (e.S().column_vector().iter().copied().collect(), Some(e.U().to_owned()))
    } else {
        (
            sym.self_adjoint_eigenvalues(faer::Side::Lower)
                .expect("symmetric eigensolve converges"),
            None,
        )
    };
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| mu[a].total_cmp(&mu[b]));
    let eigenvalues = order
        .iter()
        .map(|&i| {
            let lam = -mu[i];
            // roundoff around the zero mode
            if lam > 0.0 && lam <= 1e-10 * scale {
                0.0
            } else {
                lam
            }
        })
        .collect();
    let eigenvectors = vecs.map(|v| DMatrix::from_fn(k, k, |r, c| s[r] * v[(r, order[c])]));
    EigenDecomposition {
        eigenvalues,
        eigenvectors,
        vertices: p.vertices.clone(),
    }
}

pub fn spectrum(op: &LevelOperator, bc: BoundaryCondition) -> Result<EigenDecomposition> {
    spectrum_with(op, bc, SpectrumOptions::default())
}

pub fn spectrum_with(op: &LevelOperator, bc: BoundaryCondition, opts: SpectrumOptions) -> Result<EigenDecomposition> {
    let size = match bc {
        BoundaryCondition::Neumann => op.dim(),
        BoundaryCondition::Dirichlet => op.interior.len(),
    };
    if size > opts.ceiling {
        return Err(Error::CeilingExceeded {
            size,
            ceiling: opts.ceiling,
        });
    }
    let (neu, dir) = h_matrices(op);
    let p = match bc {
        BoundaryCondition::Neumann => neu,
        BoundaryCondition::Dirichlet => dir,
    };
    Ok(pencil_spectrum(&p, opts.vectors))
}

pub fn counting_measure(eig: &EigenDecomposition) -> AtomicMeasure {
    AtomicMeasure::counting(&eig.eigenvalues, DEFAULT_MERGE_TOL)
}

/// Upper bound on `||A + lambda diag(b)||_2`.
fn pencil_norm_bound(op: &LevelOperator, lambda: f64) -> f64 {
    let bmax = op.b.iter().cloned().fold(0.0, f64::max);
    op.a.norm_inf() + lambda.abs() * bmax
}

/// Nullity of the stacked system `[(A + lambda B); boundary rows]`, counting
/// singular values below `tol * sigma_max`.
pub fn stacked_nullity(op: &LevelOperator, lambda: f64, tol: f64) -> usize {
    let n = op.dim();
    let nb = op.boundary.len();
    let mut m = DMatrix::zeros(n + nb, n);
    for &(r, c, v) in &op.a.entries {
        m[(r, c)] = v;
    }
    for v in 0..n {
        m[(v, v)] += lambda * op.b[v];
    }
    for (k, &v) in op.boundary.iter().enumerate() {
        m[(n + k, v)] = 1.0;
    }
    let sv = m.svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s < tol * smax).count()
}

#[derive(Clone, Debug)]
pub struct NdOptions {
    pub tol: f64,
    pub merge_tol: f64,
    pub ceiling: usize,
    pub exec: Exec,
}

impl Default for NdOptions {
    fn default() -> Self {
        NdOptions {
            tol: DEFAULT_ND_TOL,
            merge_tol: DEFAULT_MERGE_TOL,
            ceiling: DEFAULT_CEILING,
            exec: Exec::default(),
        }
    }
}

/// Neumann-Dirichlet spectrum with default options.
pub fn nd_spectrum(op: &LevelOperator, tol: f64) -> Result<AtomicMeasure> {
    nd_spectrum_with(
        op,
        &NdOptions {
            tol,
            ..NdOptions::default()
        },
    )
}

/// Dirichlet clusters are the only candidates. For a cluster with
/// eigenspace `E`, every `f` in `E` already solves the interior rows, so the
/// stacked nullity equals `dim E - rank(A_{boundary, interior} E)`.
pub fn nd_spectrum_with(op: &LevelOperator, opts: &NdOptions) -> Result<AtomicMeasure> {
    let eig = spectrum_with(
        op,
        BoundaryCondition::Dirichlet,
        SpectrumOptions {
            ceiling: opts.ceiling,
            vectors: true,
        },
    )?;
    Ok(nd_from_dirichlet(op, &eig, opts))
}

/// Same as [`nd_spectrum_with`] for a precomputed Dirichlet decomposition.
pub fn nd_from_dirichlet(op: &LevelOperator, eig: &EigenDecomposition, opts: &NdOptions) -> AtomicMeasure {
    let vecs = eig.eigenvectors.as_ref().expect("Dirichlet eigenvectors required");
    let clusters = clusters(&eig.eigenvalues, opts.merge_tol);
    let interior = &op.interior;
    let mut pos = vec![usize::MAX; op.dim()];
    for (k, &v) in interior.iter().enumerate() {
        pos[v] = k;
    }
    // A restricted to boundary rows and interior columns
    let nb = op.boundary.len();
    let mut coupling = DMatrix::zeros(nb, interior.len());
    for (k, &bv) in op.boundary.iter().enumerate() {
        for &(r, c, v) in &op.a.entries {
            if r == bv && pos[c] != usize::MAX {
                coupling[(k, pos[c])] = v;
            }
        }
    }
    let found = opts.exec.map(&clusters, |&(start, end)| {
        let m = end - start;
        let lambda = eig.eigenvalues[start..end].iter().sum::<f64>() / m as f64;
        let basis = vecs.columns(start, m).into_owned().qr().q();
        let residual = &coupling * basis;
        let sv = residual.svd(false, false).singular_values;
        let thresh = opts.tol * pencil_norm_bound(op, lambda);
        let rank = sv.iter().filter(|&&s| s >= thresh).count();
        (lambda, (m - rank) as f64)
    });
    AtomicMeasure::from_atoms(found, opts.merge_tol)
}

/// Index ranges of consecutive values closer than `merge_tol`.
fn clusters(values: &[f64], merge_tol: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || (values[i] - values[i - 1]).abs() > merge_tol {
            if i > start {
                out.push((start, i));
            }
            start = i;
        }
    }
    out
}

/// Largest residual `||A f + lambda b f|| / ||A||` over all pairs.
pub fn max_residual(p: &Pencil, eig: &EigenDecomposition) -> f64 {
    let Some(v) = &eig.eigenvectors else { return 0.0 };
    let anorm = p.a.amax().max(f64::MIN_POSITIVE);
    (0..eig.len())
        .map(|k| {
            let f = v.column(k);
            let r = &p.a * f + p.b.component_mul(&f) * eig.eigenvalues[k];
            r.amax() / anorm / f.amax().max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max)
}

//! Zero counting for `lambda -> det(A_<n> + lambda diag b_<n>)` by the
//! argument principle on axis-parallel rectangles.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::Pencil;

/// Largest phase step accepted between neighbouring samples.
const MAX_STEP: f64 = PI / 8.0;
const MAX_DEPTH: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl Rect {
    pub fn new(re0: f64, re1: f64, im0: f64, im1: f64) -> Self {
        Rect {
            re: (re0.min(re1), re0.max(re1)),
            im: (im0.min(im1), im0.max(im1)),
        }
    }

    /// Corners in counterclockwise order.
    pub fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re.0, self.im.0),
            Complex64::new(self.re.1, self.im.0),
            Complex64::new(self.re.1, self.im.1),
            Complex64::new(self.re.0, self.im.1),
        ]
    }
}

#[derive(Clone, Debug)]
pub struct ZeroCount {
    pub count: i64,
    /// Total phase change divided by `2 pi`, before rounding.
    pub winding: f64,
    pub evaluations: usize,
}

/// `log det(A + lambda diag b)` and its derivative `tr((A + lambda B)^{-1} B)`.
pub fn log_det(p: &Pencil, lambda: Complex64) -> Result<(Complex64, Complex64)> {
    let k = p.a.nrows();
    let m = DMatrix::from_fn(k, k, |i, j| {
        let d = if i == j {
            lambda * p.b[i]
        } else {
            Complex64::new(0.0, 0.0)
        };
        Complex64::new(p.a[(i, j)], 0.0) + d
    });
    let lu = m.lu();
    let zero = Complex64::new(0.0, 0.0);
    let mut acc = zero;
    {
        let u = lu.u();
        for i in 0..k {
            if u[(i, i)] == zero {
                return Err(Error::Numerical(format!(
                    "determinant vanishes on the contour at {lambda}"
                )));
            }
            acc += u[(i, i)].ln();
        }
    }
    if lu.p().determinant::<f64>() < 0.0 {
        acc += Complex64::new(0.0, PI);
    }
    let inv = lu
        .try_inverse()
        .ok_or_else(|| Error::Numerical(format!("singular pencil at {lambda}")))?;
    let deriv = (0..k).map(|i| inv[(i, i)] * p.b[i]).sum();
    Ok((acc, deriv))
}

fn wrap(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y == -PI {
        PI
    } else {
        y
    }
}

/// Number of zeros inside `rect`, with multiplicity.
pub fn count_zeros(p: &Pencil, rect: Rect) -> Result<ZeroCount> {
    let corners = rect.corners();
    let mut total = 0.0;
    let mut evals = 0;
    for e in 0..4 {
        total += edge(p, corners[e], corners[(e + 1) % 4], &mut evals)?;
    }
    let winding = total / (2.0 * PI);
    Ok(ZeroCount {
        count: winding.round() as i64,
        winding,
        evaluations: evals,
    })
}

/// Phase change along `[a, b]`, stepping so that `|f'| |dz|` stays below
/// `MAX_STEP` at both ends of every step.
fn edge(p: &Pencil, a: Complex64, b: Complex64, evals: &mut usize) -> Result<f64> {
    let len = (b - a).norm();
    let dir = (b - a) / len;
    let (mut f, mut df) = log_det(p, a)?;
    *evals += 1;
    let mut t = 0.0;
    let mut total = 0.0;
    while t < len {
        let mut h = (MAX_STEP / df.norm().max(1e-300)).min(len - t);
        let mut halvings = 0;
        loop {
            let z = a + dir * (t + h);
            let (g, dg) = log_det(p, z)?;
            *evals += 1;
            let step = wrap(g.im - f.im);
            if (dg.norm() * h <= MAX_STEP && step.abs() < MAX_STEP) || halvings >= MAX_DEPTH {
                total += step;
                t += h;
                f = g;
                df = dg;
                break;
            }
            h *= 0.5;
            halvings += 1;
        }
    }
    Ok(total)
}

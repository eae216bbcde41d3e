//! The unit interval with weights `(alpha, 1 - alpha)`: `T` in coordinates
//! `(a, d, q)`, the reduced polynomial map `R_hat = p(Q) T Q` on `C^3`, and
//! its Green function.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::multipoly::{reduce_common_factor, MPoly};
use crate::error::{Error, Result};
use crate::poly::{int, Poly};
use crate::renorm::{GreenEstimate, GREEN_ZERO_NORM};

#[derive(Clone, Debug)]
pub struct IntervalMaps {
    pub alpha: BigRational,
    pub delta: BigRational,
    /// `R_hat` in the variables `(a, d, q)`.
    pub r_hat: [MPoly; 3],
}

pub fn interval_maps(alpha: &BigRational) -> Result<IntervalMaps> {
    if !(alpha > &BigRational::zero() && alpha < &BigRational::one()) {
        return Err(Error::Validation(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    let delta = alpha / (BigRational::one() - alpha);
    let m = |c: BigRational, e: [u32; 3]| MPoly::monomial(e.to_vec(), c);
    let one = BigRational::one();
    let d2 = &delta * &delta;
    // delta (a (a + d / delta) - q^2 / delta, delta d (a + d / delta) - delta q^2, -q^2)
    let r_hat = [
        m(delta.clone(), [2, 0, 0])
            .add(&m(one.clone(), [1, 1, 0]))
            .add(&m(-one.clone(), [0, 0, 2])),
        m(d2.clone(), [1, 1, 0])
            .add(&m(delta.clone(), [0, 2, 0]))
            .add(&m(-d2, [0, 0, 2])),
        m(-delta.clone(), [0, 0, 2]),
    ];
    Ok(IntervalMaps {
        alpha: alpha.clone(),
        delta,
        r_hat,
    })
}

/// `phi_hat(lambda) = A + lambda diag(m0, m1)` as `(a, d, q)` in `lambda`.
pub fn phi_hat(m0: &BigRational, m1: &BigRational) -> [Poly; 3] {
    [
        Poly::new(vec![BigRational::one(), m0.clone()]),
        Poly::new(vec![BigRational::one(), m1.clone()]),
        Poly::constant(int(-1)),
    ]
}

impl IntervalMaps {
    pub fn delta_f64(&self) -> f64 {
        crate::weight::ratio_to_f64(&self.delta)
    }

    pub fn apply(&self, x: &[Complex64; 3]) -> [Complex64; 3] {
        let [a, d, q] = *x;
        let dl = self.delta_f64();
        [
            dl * a * a + a * d - q * q,
            dl * dl * a * d + dl * d * d - dl * dl * q * q,
            -dl * q * q,
        ]
    }

    pub fn apply_exact(&self, x: &[BigRational; 3]) -> [BigRational; 3] {
        self.r_hat.clone().map(|c| c.eval(x))
    }

    /// `R_hat^n` along a curve of polynomials.
    pub fn iterate_along(&self, curve: &[Poly; 3], n: usize) -> Vec<[Poly; 3]> {
        let mut out = Vec::with_capacity(n);
        let mut cur = curve.clone();
        for _ in 0..n {
            cur = self.r_hat.clone().map(|c| c.along(&cur));
            out.push(cur.clone());
        }
        out
    }

    /// Degrees of the reduced iterates of the induced map on `P^2`.
    pub fn projective_degrees(&self, n: usize, bit_limit: u64) -> Result<Vec<u32>> {
        let blocks = vec![vec![0, 1, 2]];
        let mut cur: Vec<MPoly> = (0..3).map(|i| MPoly::var(3, i)).collect();
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let raw: Vec<MPoly> = self.r_hat.iter().map(|c| c.substitute(&cur)).collect();
            cur = reduce_common_factor(&raw, &blocks).polys;
            let bits = cur.iter().map(|c| c.max_bits()).max().unwrap_or(0);
            if bits > bit_limit {
                return Err(Error::BitLimit(bits));
            }
            out.push(cur[0].total_degree());
        }
        Ok(out)
    }

    /// Normalized iteration of `R_hat`, degree 2.
    pub fn green(&self, x: &[Complex64; 3], n_max: usize) -> GreenEstimate {
        let norm = |v: &[Complex64; 3]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let n0 = norm(x);
        let mut cur = x.map(|z| z / n0);
        let mut hist = Vec::with_capacity(n_max);
        let mut acc = 0.0;
        let mut w = 0.5;
        for k in 0..n_max {
            let next = self.apply(&cur);
            let g = norm(&next);
            if g < GREEN_ZERO_NORM || !g.is_finite() {
                return GreenEstimate {
                    value: f64::NEG_INFINITY,
                    iterations: k + 1,
                    tail_bound: 0.0,
                    log_norm_history: hist,
                    zero_hit: Some(k),
                };
            }
            hist.push(g.ln());
            acc += g.ln() * w;
            w *= 0.5;
            cur = next.map(|z| z / g);
        }
        let sup = hist.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        GreenEstimate {
            value: n0.ln() + acc,
            iterations: n_max,
            tail_bound: sup / 2f64.powi(n_max as i32),
            log_norm_history: hist,
            zero_hit: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ZeroLocusReport {
    pub levels: usize,
    /// Every iterate has a nonzero constant `q` component along `phi_hat`.
    pub q_constant_nonzero: bool,
    /// The three components never vanish simultaneously.
    pub never_meets: bool,
}

/// Exact check that `R_hat^n o phi_hat` has no zero for `n <= levels`.
pub fn zero_locus_check(maps: &IntervalMaps, m0: &BigRational, m1: &BigRational, levels: usize) -> ZeroLocusReport {
    let its = maps.iterate_along(&phi_hat(m0, m1), levels);
    let q_constant_nonzero = its.iter().all(|c| c[2].is_constant() && !c[2].is_zero());
    let never_meets = its.iter().all(|c| {
        let g = Poly::gcd(&Poly::gcd(&c[0], &c[1]), &c[2]);
        g.degree() == Some(0)
    });
    ZeroLocusReport {
        levels,
        q_constant_nonzero,
        never_meets,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::BaseOperator;
    use crate::poly::rat;
    use crate::renorm::{interval_t, RenormContext};
    use crate::structure::Structure;
    use crate::weight::Weight;

    #[test]
    fn r_hat_is_p_times_t() {
        for (p, q) in [(1, 2), (1, 3), (2, 5)] {
            let maps = interval_maps(&rat(p, q)).unwrap();
            let dl = maps.delta_f64();
            let x = [
                Complex64::new(0.7, 0.2),
                Complex64::new(-1.1, 0.4),
                Complex64::new(0.3, -0.5),
            ];
            let t = interval_t(dl, x[0], x[1], x[2]);
            let pq = dl * x[0] + x[1];
            let r = maps.apply(&x);
            for k in 0..3 {
                assert!((r[k] - pq * t[k]).norm() < 1e-13);
            }
            let e = maps.apply_exact(&[rat(7, 10), rat(-11, 10), rat(3, 10)]);
            let f = maps.apply(&[
                Complex64::new(0.7, 0.0),
                Complex64::new(-1.1, 0.0),
                Complex64::new(0.3, 0.0),
            ]);
            for k in 0..3 {
                assert!((crate::weight::ratio_to_f64(&e[k]) - f[k].re).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn r_hat_agrees_with_grassmann_r() {
        let s = Structure::interval(Weight::ratio(1, 3)).unwrap();
        let ctx = RenormContext::new(&s);
        let maps = interval_maps(&rat(1, 3)).unwrap();
        let base = BaseOperator::interval(Weight::one(), Weight::one()).unwrap();
        let lam = Complex64::new(-0.4, 0.3);
        let x = crate::renorm::phi(&base, lam);
        let r = ctx.r_map(&x).unwrap();
        let (a, d, q) = (x.coefficient(1, 1), x.coefficient(2, 2), x.coefficient(1, 2));
        let rh = maps.apply(&[a, d, q]);
        // R_hat differs from R by the constant C_1 times the unit coefficient
        let unit = r.coefficient(0, 0);
        let ratio = rh[0] / r.coefficient(1, 1);
        assert!((rh[1] / r.coefficient(2, 2) - ratio).norm() < 1e-12);
        assert!((rh[2] / r.coefficient(1, 2) - ratio).norm() < 1e-12);
        assert!((unit * ratio - (maps.delta_f64() * a + d)).norm() < 1e-12);
    }

    #[test]
    fn phi_hat_avoids_zeros() {
        for (p, q) in [(1, 2), (1, 3)] {
            let maps = interval_maps(&rat(p, q)).unwrap();
            let r = zero_locus_check(&maps, &int(1), &int(1), 8);
            assert!(r.q_constant_nonzero && r.never_meets);
        }
    }

    #[test]
    fn zero_locus_on_diagonal_chart() {
        // along (a, d, q) = (t, 1, 0) the common zeros of R_hat^n sit at
        // delta^k t + 1 = 0 for k = 1, 0, -1, ..., 2 - n
        let alpha = rat(1, 3);
        let maps = interval_maps(&alpha).unwrap();
        let curve = [Poly::x(), Poly::one(), Poly::zero()];
        let n = 4;
        let it = maps.iterate_along(&curve, n);
        for (step, c) in it.iter().enumerate() {
            let g = Poly::gcd(&c[0], &c[1]);
            let roots: Vec<BigRational> = (0..=step)
                .map(|j| -num_traits::pow(maps.delta.clone(), j) / &maps.delta)
                .collect();
            for r in &roots {
                assert!(g.root_multiplicity(r) >= 1, "step {step} root {r}");
            }
            let expected = roots.len();
            let distinct: usize = g.square_free().iter().map(|(f, _)| f.degree().unwrap()).sum();
            assert_eq!(distinct, expected);
        }
    }

    #[test]
    fn projective_degrees_double() {
        let maps = interval_maps(&rat(1, 3)).unwrap();
        assert_eq!(maps.projective_degrees(5, 1 << 20).unwrap(), vec![2, 4, 8, 16, 32]);
    }

    #[test]
    fn green_functional_equation() {
        let maps = interval_maps(&rat(1, 3)).unwrap();
        let x = [
            Complex64::new(1.0, 0.3),
            Complex64::new(0.6, -0.2),
            Complex64::new(-1.0, 0.0),
        ];
        let g = maps.green(&x, 40);
        let gr = maps.green(&maps.apply(&x), 40);
        assert!((gr.value - 2.0 * g.value).abs() < 1e-9);
        let c = Complex64::new(0.0, 3.0);
        let gc = maps.green(&x.map(|z| z * c), 40);
        assert!((gc.value - g.value - 3f64.ln()).abs() < 1e-9);
    }
}

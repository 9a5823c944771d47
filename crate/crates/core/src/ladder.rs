//! The ladder functions `A_n(z)`, `B_n(z)` at complex `z`, and pointwise
//! checks of the lowering relation, the compatibility conditions and the
//! second-order ODE satisfied by `P_n`.
//!
//! For this weight `(v0'(z) - v0'(y))/(z - y) = 2`, so
//! `A_n(z) = 2 + a_n(z)` and `B_n(z) = b_n(z)`. Splitting
//! `1/((z-y)(y-t)) = (1/(z-t)) (1/(y-t) + 1/(z-y))` gives
//!
//! ```text
//! A_n(z) = 2 + (R_n + γ C_n(z)/h_n) / (z - t),      C_n(z) = ∫ P_n² w/(z-y)
//! B_n(z) = (r_n + γ E_n(z)/h_{n-1}) / (z - t),      E_n(z) = ∫ P_n P_{n-1} w/(z-y)
//! ```
//!
//! where `R_n, r_n` are the singular integrals `γ/h ∫ … w/(y-t)`. They
//! diverge for `γ ≤ 0`; there the values `2α_n - t` and `2β_n - n` are used
//! instead and every report says so.

use rug::{Assign, Complex, Float};

use crate::error::{Error, Result};
use crate::report::{IdentityId, ResidualReport};
use crate::num::{self, fl};
use crate::orthopoly::{eval_monic_all, eval_monic_all_real, eval_monic_derivatives, RecurrenceData};
use crate::quadrature::{self, Side};
use crate::weight::{NumericPolicy, WeightParams};

/// Note attached to reports whose singular integrals were replaced.
pub const SUBSTITUTED_NOTE: &str = "singular integrals replaced by 2alpha_n - t and 2beta_n - n (gamma <= 0)";

/// Cauchy-circle radius as a fraction of `|Im z|`.
const CIRCLE_FRACTION: u32 = 16;

#[derive(Debug, Clone)]
pub struct LadderSample {
    pub z: Complex,
    pub n: usize,
    pub an: Complex,
    pub bn: Complex,
    /// `A_{n-1}(z)`; zero for `n = 0`
    pub an_prev: Complex,
    /// `B_{n+1}(z)`
    pub bn_next: Complex,
}

/// Batched quadrature of every integral the ladder checks need, for
/// `k ≤ k_max` and a fixed set of points.
#[derive(Debug, Clone)]
pub struct LadderEvaluator {
    pub params: WeightParams,
    /// Precision of the quadrature (enough for `quad_tol` plus guard bits).
    pub quad_prec: u32,
    /// Precision of the recurrence data.
    pub prec: u32,
    pub k_max: usize,
    pub points: Vec<Complex>,
    circle_points: usize,
    /// `R_k` used in `A_k` (quadrature for `γ > 0`)
    pub r_big: Vec<Float>,
    /// `r_k` used in `B_k`
    pub r_small: Vec<Float>,
    /// `(1/h_k) ∫ P_k² v0' w` and `(1/h_{k-1}) ∫ P_k P_{k-1} v0' w`
    pub v0_moments: Vec<[Float; 2]>,
    /// `C_k(z)` per point
    c: Vec<Vec<Complex>>,
    /// `E_k(z)` per point
    e: Vec<Vec<Complex>>,
    pub substituted: bool,
    rec: RecurrenceData,
    t: Float,
}

/// Number of circle points for Cauchy differentiation at tolerance `tol`.
pub fn circle_points_for(tol: f64) -> usize {
    let digits = -(tol * 1e-4).log10();
    let m = (digits / (CIRCLE_FRACTION as f64).log10()).ceil() as usize;
    m.max(8)
}

impl LadderEvaluator {
    /// Integrates at the given points; with `derivatives`, also on a circle
    /// of radius `|Im z|/16` around each point.
    pub fn new(
        params: &WeightParams,
        rec: &RecurrenceData,
        policy: &NumericPolicy,
        k_max: usize,
        points: &[Complex],
        derivatives: bool,
    ) -> Result<Self> {
        if k_max > rec.n_max {
            return Err(Error::InsufficientData(format!(
                "ladder needs k_max = {k_max} but recurrence data stop at {}",
                rec.n_max
            )));
        }
        let prec = rec.prec;
        let quad_prec = ((-policy.quad_tol.log2()).ceil() as u32 + 64).min(prec).max(64);
        let t_rat = params.t();
        for z in points {
            if z.imag().is_zero() {
                return Err(Error::InvalidParams("ladder points need Im z != 0".into()));
            }
            if *z.real() == *t_rat && z.imag().is_zero() {
                return Err(Error::SingularPoint);
            }
        }
        let base = points.len();
        let m = if derivatives { circle_points_for(policy.quad_tol) } else { 0 };
        let mut all: Vec<Complex> = points.iter().map(|z| Complex::with_val(prec, z)).collect();
        for z in points {
            let rho = fl(prec, z.imag().abs_ref()) / CIRCLE_FRACTION;
            for j in 0..m {
                let theta = num::pi(prec) * 2u32 * j as u32 / m as u32;
                let (s, c) = theta.sin_cos(Float::new(prec));
                let p = Complex::with_val(prec, (fl(prec, &rho * &c), fl(prec, &rho * &s))) + z;
                all.push(p);
            }
        }

        let gamma_pos = *params.gamma() > 0;
        let kk = k_max + 1;
        let n_pts = all.len();
        let sing = if gamma_pos { 2 * kk } else { 0 };
        let v0 = 2 * kk;
        let dim = sing + v0 + 4 * kk * n_pts;
        let zr: Vec<Float> = all.iter().map(|z| fl(quad_prec, z.real())).collect();
        let zi: Vec<Float> = all.iter().map(|z| fl(quad_prec, z.imag())).collect();
        let t_q = params.t_f(quad_prec);
        let out = quadrature::integrate_weighted(
            params,
            quad_prec,
            policy.quad_tol,
            2 * k_max + 1,
            if gamma_pos { 1 } else { 0 },
            dim,
            |node, v| {
                let qp = quad_prec;
                let p = eval_monic_all_real(node.y, k_max, rec);
                let mut sq = Vec::with_capacity(kk);
                let mut cross = Vec::with_capacity(kk);
                for k in 0..kk {
                    sq.push(fl(qp, &p[k] * &p[k]) * node.w);
                    cross.push(if k == 0 {
                        fl(qp, 0)
                    } else {
                        fl(qp, &p[k] * &p[k - 1]) * node.w
                    });
                }
                let mut off = 0;
                if gamma_pos {
                    let inv = match node.side {
                        Side::Right => fl(qp, 1) / node.u,
                        Side::Left => -(fl(qp, 1) / node.u),
                    };
                    for k in 0..kk {
                        v[off + 2 * k].assign(&sq[k] * &inv);
                        v[off + 2 * k + 1].assign(&cross[k] * &inv);
                    }
                    off += sing;
                }
                let vp = fl(qp, node.y * 2u32) - &t_q;
                for k in 0..kk {
                    v[off + 2 * k].assign(&sq[k] * &vp);
                    v[off + 2 * k + 1].assign(&cross[k] * &vp);
                }
                off += v0;
                let mut dr = fl(qp, 0);
                let mut den = fl(qp, 0);
                let mut ir = fl(qp, 0);
                let mut ii = fl(qp, 0);
                for i in 0..n_pts {
                    // 1/(z - y) = ((x - y) - i b)/((x - y)^2 + b^2)
                    dr.assign(&zr[i] - node.y);
                    den.assign(&dr * &dr);
                    den += fl(qp, &zi[i] * &zi[i]);
                    ir.assign(&dr / &den);
                    ii.assign(&zi[i] / &den);
                    rug::ops::NegAssign::neg_assign(&mut ii);
                    let base = off + 4 * kk * i;
                    for k in 0..kk {
                        let s = base + 4 * k;
                        v[s].assign(&sq[k] * &ir);
                        v[s + 1].assign(&sq[k] * &ii);
                        v[s + 2].assign(&cross[k] * &ir);
                        v[s + 3].assign(&cross[k] * &ii);
                    }
                }
            },
        )?;

        let vals = out.values;
        let g = params.gamma_f(prec);
        let t = params.t_f(prec);
        let mut r_big = Vec::with_capacity(kk);
        let mut r_small = Vec::with_capacity(kk);
        let mut off = 0;
        if gamma_pos {
            for k in 0..kk {
                r_big.push(fl(prec, &vals[2 * k] * &g) / &rec.h[k]);
                r_small.push(if k == 0 {
                    fl(prec, 0)
                } else {
                    fl(prec, &vals[2 * k + 1] * &g) / &rec.h[k - 1]
                });
            }
            off += sing;
        } else {
            for k in 0..kk {
                r_big.push(fl(prec, &rec.alpha[k] * 2u32) - &t);
                r_small.push(fl(prec, &rec.beta[k] * 2u32) - k as u32);
            }
        }
        let mut v0_moments = Vec::with_capacity(kk);
        for k in 0..kk {
            let a = fl(prec, &vals[off + 2 * k] / &rec.h[k]);
            let b = if k == 0 {
                fl(prec, 0)
            } else {
                fl(prec, &vals[off + 2 * k + 1] / &rec.h[k - 1])
            };
            v0_moments.push([a, b]);
        }
        off += v0;
        let mut c = Vec::with_capacity(n_pts);
        let mut e = Vec::with_capacity(n_pts);
        for i in 0..n_pts {
            let base = off + 4 * kk * i;
            let mut ci = Vec::with_capacity(kk);
            let mut ei = Vec::with_capacity(kk);
            for k in 0..kk {
                let s = base + 4 * k;
                ci.push(Complex::with_val(prec, (&vals[s], &vals[s + 1])));
                ei.push(Complex::with_val(prec, (&vals[s + 2], &vals[s + 3])));
            }
            c.push(ci);
            e.push(ei);
        }

        Ok(Self {
            params: params.clone(),
            quad_prec,
            prec,
            k_max,
            points: all[..base].to_vec(),
            circle_points: m,
            r_big,
            r_small,
            v0_moments,
            c,
            e,
            substituted: !gamma_pos,
            rec: rec.clone(),
            t,
        })
    }

    fn z_at(&self, idx: usize) -> Complex {
        if idx < self.points.len() {
            return self.points[idx].clone();
        }
        let j = idx - self.points.len();
        let (i, q) = (j / self.circle_points, j % self.circle_points);
        let prec = self.prec;
        let z = &self.points[i];
        let rho = fl(prec, z.imag().abs_ref()) / CIRCLE_FRACTION;
        let theta = num::pi(prec) * 2u32 * q as u32 / self.circle_points as u32;
        let (s, c) = theta.sin_cos(Float::new(prec));
        Complex::with_val(prec, (fl(prec, &rho * &c), fl(prec, &rho * &s))) + z
    }

    fn a_idx(&self, idx: usize, k: usize) -> Complex {
        let prec = self.prec;
        let z = self.z_at(idx);
        let g = self.params.gamma_f(prec);
        let inner = Complex::with_val(prec, &self.c[idx][k] * &g) / &self.rec.h[k] + &self.r_big[k];
        inner / Complex::with_val(prec, &z - &self.t) + 2u32
    }

    fn b_idx(&self, idx: usize, k: usize) -> Complex {
        let prec = self.prec;
        if k == 0 {
            return Complex::with_val(prec, 0);
        }
        let z = self.z_at(idx);
        let g = self.params.gamma_f(prec);
        let inner = Complex::with_val(prec, &self.e[idx][k] * &g) / &self.rec.h[k - 1] + &self.r_small[k];
        inner / Complex::with_val(prec, &z - &self.t)
    }

    /// `A_k` at base point `i`.
    pub fn a(&self, i: usize, k: usize) -> Complex {
        self.a_idx(i, k)
    }

    /// `B_k` at base point `i`.
    pub fn b(&self, i: usize, k: usize) -> Complex {
        self.b_idx(i, k)
    }

    fn circle_derivative(&self, i: usize, f: impl Fn(usize) -> Complex) -> Result<Complex> {
        let m = self.circle_points;
        if m == 0 {
            return Err(Error::InsufficientData("evaluator built without circle points".into()));
        }
        let prec = self.prec;
        let z = &self.points[i];
        let rho = fl(prec, z.imag().abs_ref()) / CIRCLE_FRACTION;
        let mut acc = Complex::with_val(prec, 0);
        let start = self.points.len() + i * m;
        for j in 0..m {
            let theta = num::pi(prec) * 2u32 * j as u32 / m as u32;
            let (s, c) = theta.sin_cos(Float::new(prec));
            // e^{-iθ}
            let rot = Complex::with_val(prec, (c, -s));
            acc += f(start + j) * rot;
        }
        Ok(acc / (rho * m as u32))
    }

    pub fn a_prime(&self, i: usize, k: usize) -> Result<Complex> {
        self.circle_derivative(i, |idx| self.a_idx(idx, k))
    }

    pub fn b_prime(&self, i: usize, k: usize) -> Result<Complex> {
        self.circle_derivative(i, |idx| self.b_idx(idx, k))
    }

    pub fn sample(&self, i: usize, n: usize) -> LadderSample {
        LadderSample {
            z: self.points[i].clone(),
            n,
            an: self.a(i, n),
            bn: self.b(i, n),
            an_prev: if n == 0 {
                Complex::with_val(self.prec, 0)
            } else {
                self.a(i, n - 1)
            },
            bn_next: self.b(i, n + 1),
        }
    }

    fn notes(&self, base: &str) -> String {
        if self.substituted {
            if base.is_empty() {
                SUBSTITUTED_NOTE.to_string()
            } else {
                format!("{base}; {SUBSTITUTED_NOTE}")
            }
        } else {
            base.to_string()
        }
    }

    fn report(&self, id: IdentityId, n: usize, z: &Complex, residual: Float, tol: f64, note: &str) -> ResidualReport {
        let zs = format!("z={}", format_z(z));
        let note = if note.is_empty() { zs } else { format!("{zs}; {note}") };
        ResidualReport::new(id, n, &self.params, residual, fl(self.prec, tol), self.notes(&note))
    }

    /// `P_n' = β_n A_n P_{n-1} - B_n P_n` at base point `i`.
    pub fn check_lowering(&self, i: usize, n: usize, policy: &NumericPolicy) -> ResidualReport {
        let prec = self.prec;
        let z = &self.points[i];
        let [p, dp, _] = eval_monic_derivatives(z, n, &self.rec);
        let p_prev = if n == 0 {
            Complex::with_val(prec, 0)
        } else {
            eval_monic_all(z, n - 1, &self.rec).pop().expect("nonempty")
        };
        let rhs = Complex::with_val(prec, &self.a(i, n) * &p_prev) * &self.rec.beta[n]
            - Complex::with_val(prec, &self.b(i, n) * &p);
        let res = num::cabs(&Complex::with_val(prec, &dp - &rhs)) / (num::cabs(&dp) + 1u32);
        self.report(IdentityId::Lowering, n, z, res, 100.0 * policy.quad_tol, "")
    }

    /// Both corollary identities for `P_n` (quadrature on both sides).
    pub fn check_corollary(&self, n: usize, policy: &NumericPolicy) -> Result<Vec<ResidualReport>> {
        if self.substituted {
            return Err(Error::NotIntegrable("corollary identities need gamma > 0".into()));
        }
        let prec = self.prec;
        let tol = 100.0 * policy.quad_tol;
        let lhs1 = &self.r_big[n];
        let rhs1 = &self.v0_moments[n][0];
        let res1 = fl(prec, lhs1 - rhs1).abs() / (fl(prec, rhs1.abs_ref()) + 1u32);
        let mut out = vec![ResidualReport::new(
            IdentityId::Corollary1,
            n,
            &self.params,
            res1,
            fl(prec, tol),
            String::new(),
        )];
        if n >= 1 {
            let lhs2 = &self.r_small[n];
            let rhs2 = fl(prec, &self.v0_moments[n][1] - n as u32);
            let res2 = fl(prec, lhs2 - &rhs2).abs() / (fl(prec, rhs2.abs_ref()) + 1u32);
            out.push(ResidualReport::new(
                IdentityId::Corollary2,
                n,
                &self.params,
                res2,
                fl(prec, tol),
                String::new(),
            ));
        }
        Ok(out)
    }

    /// `(S1)`, `(S2)` and `(S2')` at base point `i`; needs `n + 1 ≤ k_max`.
    pub fn check_compatibility(&self, i: usize, n: usize, policy: &NumericPolicy) -> Result<Vec<ResidualReport>> {
        if n + 1 > self.k_max {
            return Err(Error::InsufficientData(format!("compatibility at n = {n} needs k_max ≥ {}", n + 1)));
        }
        let prec = self.prec;
        let z = &self.points[i];
        let tol = 100.0 * policy.quad_tol;
        let vp = Complex::with_val(prec, z * 2u32) - &self.t;
        let zma = Complex::with_val(prec, z - &self.rec.alpha[n]);
        let an = self.a(i, n);
        let bn = self.b(i, n);
        let bn1 = self.b(i, n + 1);
        let an1 = self.a(i, n + 1);
        let an_prev = if n == 0 { Complex::with_val(prec, 0) } else { self.a(i, n - 1) };

        let t1 = Complex::with_val(prec, &zma * &an);
        let s1 = Complex::with_val(prec, &bn + &bn1) - &t1 + &vp;
        let scale1 = num::cabs(&t1) + num::cabs(&vp) + 1u32;

        let t2 = Complex::with_val(prec, &bn1 - &bn) * &zma;
        let u1 = Complex::with_val(prec, &an1 * &self.rec.beta[n + 1]);
        let u2 = Complex::with_val(prec, &an_prev * &self.rec.beta[n]);
        let s2 = Complex::with_val(prec, &t2 + 1u32) - &u1 + &u2;
        let scale2 = num::cabs(&t2) + num::cabs(&u1) + num::cabs(&u2) + 1u32;

        let mut sum_a = Complex::with_val(prec, 0);
        for k in 0..n {
            sum_a += self.a(i, k);
        }
        let b2 = Complex::with_val(prec, &bn * &bn);
        let vb = Complex::with_val(prec, &vp * &bn);
        let prod = Complex::with_val(prec, &an * &an_prev) * &self.rec.beta[n];
        let s3 = Complex::with_val(prec, &b2 + &vb) + &sum_a - &prod;
        let scale3 = num::cabs(&b2) + num::cabs(&vb) + num::cabs(&sum_a) + num::cabs(&prod) + 1u32;

        Ok(vec![
            self.report(IdentityId::S1, n, z, num::cabs(&s1) / scale1, tol, ""),
            self.report(IdentityId::S2, n, z, num::cabs(&s2) / scale2, tol, ""),
            self.report(IdentityId::S2Prime, n, z, num::cabs(&s3) / scale3, tol, ""),
        ])
    }

    /// `P_n'' + Q_n P_n' + T_n P_n = 0` at base point `i`, with `A_n'`,
    /// `B_n'` from the circle.
    pub fn check_ode(&self, i: usize, n: usize, policy: &NumericPolicy) -> Result<ResidualReport> {
        let prec = self.prec;
        let z = &self.points[i];
        let [p, dp, d2p] = eval_monic_derivatives(z, n, &self.rec);
        let vp = Complex::with_val(prec, z * 2u32) - &self.t;
        let an = self.a(i, n);
        let bn = self.b(i, n);
        let an_prev = if n == 0 { Complex::with_val(prec, 0) } else { self.a(i, n - 1) };
        let dan = self.a_prime(i, n)?;
        let dbn = self.b_prime(i, n)?;
        let ratio = Complex::with_val(prec, &dan / &an);
        let q = -Complex::with_val(prec, &vp + &ratio);
        let t_coef = Complex::with_val(prec, &dbn - &bn * &ratio)
            + Complex::with_val(prec, &an * &an_prev) * &self.rec.beta[n]
            - Complex::with_val(prec, &bn * &bn)
            - Complex::with_val(prec, &bn * &vp);
        let qp = Complex::with_val(prec, &q * &dp);
        let tp = Complex::with_val(prec, &t_coef * &p);
        let res = Complex::with_val(prec, &d2p + &qp) + &tp;
        let scale = num::cabs(&d2p) + num::cabs(&qp) + num::cabs(&tp) + 1u32;
        Ok(self.report(IdentityId::Ode, n, z, num::cabs(&res) / scale, 1e3 * policy.quad_tol, ""))
    }
}

pub fn format_z(z: &Complex) -> String {
    let re = z.real().to_f64();
    let im = z.imag().to_f64();
    if im < 0.0 {
        format!("{re}-{}i", -im)
    } else {
        format!("{re}+{im}i")
    }
}

/// `A_n(z)` and `B_n(z)` (with `A_{n-1}`, `B_{n+1}`) at one point.
pub fn eval_ab(
    z: &Complex,
    n: usize,
    rec: &RecurrenceData,
    params: &WeightParams,
    policy: &NumericPolicy,
) -> Result<LadderSample> {
    let ev = LadderEvaluator::new(params, rec, policy, n + 1, std::slice::from_ref(z), false)?;
    Ok(ev.sample(0, n))
}

/// Large-`z` behaviour of `A_n`, `B_n` on the imaginary axis.
#[derive(Debug, Clone)]
pub struct LargeZReport {
    pub radii: Vec<f64>,
    /// `|A_n - expansion|` at each radius
    pub err_a: Vec<f64>,
    pub err_b: Vec<f64>,
    pub reports: Vec<ResidualReport>,
}

/// Compares `A_n`, `B_n` at `z = i·radius` with the expansions through
/// `z^-3`; consecutive errors must shrink like `radius^-4`, checked as
/// `|log10(e_1/e_2) / log10(r_2/r_1) - 4| ≤ 0.5`.
pub fn check_large_z(
    n: usize,
    radii: &[f64],
    rec: &RecurrenceData,
    params: &WeightParams,
    policy: &NumericPolicy,
) -> Result<LargeZReport> {
    let prec = rec.prec;
    let points: Vec<Complex> = radii
        .iter()
        .map(|r| Complex::with_val(prec, (0, *r)))
        .collect();
    let ev = LadderEvaluator::new(params, rec, policy, n + 1, &points, false)?;
    let g = params.gamma_f(prec);
    let t = params.t_f(prec);
    let r_n = fl(prec, &rec.alpha[n] * 2u32) - &t;
    let r_small = fl(prec, &rec.beta[n] * 2u32) - n as u32;
    let mut err_a = Vec::new();
    let mut err_b = Vec::new();
    for (i, z) in points.iter().enumerate() {
        let inv = Complex::with_val(prec, 1) / z;
        let inv2 = Complex::with_val(prec, &inv * &inv);
        let inv3 = Complex::with_val(prec, &inv2 * &inv);
        let c2 = fl(prec, &t * &r_n) + &g;
        let c3 = fl(prec, &g * &rec.alpha[n]) + fl(prec, &g * &t) + fl(prec, &t * &t) * &r_n;
        let exp_a = Complex::with_val(prec, &inv * &r_n) + Complex::with_val(prec, &inv2 * &c2) + Complex::with_val(prec, &inv3 * &c3) + 2u32;
        let d2 = fl(prec, &t * &r_small);
        let d3 = fl(prec, &g * &rec.beta[n]) + fl(prec, &t * &t) * &r_small;
        let exp_b = Complex::with_val(prec, &inv * &r_small) + Complex::with_val(prec, &inv2 * &d2) + Complex::with_val(prec, &inv3 * &d3);
        err_a.push(num::cabs_f64(&(ev.a(i, n) - exp_a)));
        err_b.push(num::cabs_f64(&(ev.b(i, n) - exp_b)));
    }
    let mut reports = Vec::new();
    for w in 1..radii.len() {
        let decades = (radii[w] / radii[w - 1]).log10();
        for (id, errs) in [(IdentityId::LargeZA, &err_a), (IdentityId::LargeZB, &err_b)] {
            let order = (errs[w - 1] / errs[w]).log10() / decades;
            let res = (order - 4.0).abs();
            let note = format!(
                "|z|={:e}->{:e}; err {:e} -> {:e}; observed order {order:.3}",
                radii[w - 1], radii[w], errs[w - 1], errs[w]
            );
            reports.push(ResidualReport::new(
                id,
                n,
                params,
                fl(prec, if res.is_finite() { res } else { f64::MAX }),
                fl(prec, 0.5),
                ev.notes(&note),
            ));
        }
    }
    Ok(LargeZReport {
        radii: radii.to_vec(),
        err_a,
        err_b,
        reports,
    })
}

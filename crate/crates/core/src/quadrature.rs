//! Double-exponential (tanh-sinh) quadrature on a truncated half-line
//! `[0, U]`, for integrands that behave like `u^e` at `u = 0` (any `e > -1`)
//! and decay like a Gaussian toward `U`.
//!
//! Integrals are vector valued: one pass evaluates many integrands on the
//! same nodes. Levels halve the step and reuse previous nodes; nodes of a
//! level are evaluated in fixed-size chunks in parallel and summed in chunk
//! order, so results do not depend on the thread count.

use rayon::prelude::*;
use rug::Float;

use crate::error::{Error, Result};
use crate::num::{self, fl};
use crate::weight::WeightParams;

const CHUNK: usize = 32;

/// Truncated half-line `[0, upper]` with endpoint exponent `e` at 0.
#[derive(Debug, Clone)]
pub struct HalfLineRule {
    pub prec: u32,
    pub upper: f64,
    pub endpoint_exponent: f64,
    pub min_level: u32,
    pub max_level: u32,
}

#[derive(Debug, Clone)]
pub struct QuadOutput {
    pub values: Vec<Float>,
    /// `∫ |f_i|` estimates; the scale against which convergence is judged.
    pub l1: Vec<Float>,
    /// `|S_l - S_{l-1}| / l1` per component at the final level.
    pub rel_error: Vec<f64>,
    pub levels: u32,
    pub nodes: usize,
}

impl HalfLineRule {
    pub fn new(prec: u32, upper: f64, endpoint_exponent: f64) -> Self {
        Self {
            prec,
            upper,
            endpoint_exponent,
            min_level: 3,
            max_level: 15,
        }
    }

    /// |s| beyond which nodes near `u = 0` contribute below `2^-(p+32)`.
    fn s_max_left(&self) -> f64 {
        let e1 = (self.endpoint_exponent + 1.0).max(1e-3);
        let need = (self.prec as f64 + 48.0) * std::f64::consts::LN_2
            + e1 * self.upper.max(1.0).ln().abs();
        // u ≈ U e^{-2q}; need u^(e+1) below the threshold
        let q = need / (2.0 * e1) + 2.0;
        (q * 2.0 / std::f64::consts::PI).asinh() + 0.25
    }

    /// s beyond which all nodes sit within 2^-8 of `U`, where the
    /// truncation bound already makes the integrand negligible.
    fn s_max_right(&self) -> f64 {
        let q = (self.upper.max(1.0) * 256.0).ln() / 2.0 + 1.0;
        (q * 2.0 / std::f64::consts::PI).asinh() + 0.25
    }

    /// Node abscissa and `du/ds` at `s`.
    fn node(&self, s: f64, half_pi: &Float, upper: &Float) -> (Float, Float) {
        let prec = self.prec;
        let sf = fl(prec, s);
        let (sinh, cosh) = sf.abs().sinh_cosh(Float::new(prec));
        let q = sinh * half_pi;
        let big = fl(prec, &q * 2u32).exp();
        let v = fl(prec, 1) / (big + 1u32);
        let one_minus_v = fl(prec, 1) - &v;
        let jac = fl(prec, upper * half_pi) * 2u32 * cosh * &v * &one_minus_v;
        let u = if s < 0.0 {
            fl(prec, upper * &v)
        } else {
            fl(prec, upper * &one_minus_v)
        };
        (u, jac)
    }

    /// Integrates every component of `f` over `[0, upper]` to relative
    /// accuracy `tol` (relative to each component's L1 norm).
    pub fn integrate<F>(&self, dim: usize, tol: f64, f: F) -> Result<QuadOutput>
    where
        F: Fn(&Float, &mut [Float]) + Sync,
    {
        let prec = self.prec;
        let half_pi = num::pi(prec) / 2u32;
        let upper = fl(prec, self.upper);
        let s_left = self.s_max_left();
        let s_right = self.s_max_right();

        let mut raw = vec![fl(prec, 0); dim];
        let mut raw_abs = vec![fl(prec, 0); dim];
        let mut prev: Option<Vec<Float>> = None;
        let mut nodes = 0usize;

        for level in 0..=self.max_level {
            let h = (-(level as f64)).exp2();
            let abscissae = level_abscissae(level, s_left, s_right);
            nodes += abscissae.len();
            let partials: Vec<(Vec<Float>, Vec<Float>)> = abscissae
                .par_chunks(CHUNK)
                .map(|chunk| {
                    let mut sum = vec![fl(prec, 0); dim];
                    let mut sum_abs = vec![fl(prec, 0); dim];
                    let mut vals = vec![fl(prec, 0); dim];
                    for &s in chunk {
                        let (u, jac) = self.node(s, &half_pi, &upper);
                        if u.is_zero() || jac.is_zero() {
                            continue;
                        }
                        for v in vals.iter_mut() {
                            v.assign_zero();
                        }
                        f(&u, &mut vals);
                        for i in 0..dim {
                            let term = fl(prec, &vals[i] * &jac);
                            sum_abs[i] += fl(prec, term.abs_ref());
                            sum[i] += term;
                        }
                    }
                    (sum, sum_abs)
                })
                .collect();
            for (sum, sum_abs) in partials {
                for i in 0..dim {
                    raw[i] += &sum[i];
                    raw_abs[i] += &sum_abs[i];
                }
            }
            let hf = fl(prec, h);
            let current: Vec<Float> = raw.iter().map(|x| fl(prec, x * &hf)).collect();
            let l1: Vec<Float> = raw_abs.iter().map(|x| fl(prec, x * &hf)).collect();
            if let Some(prev_vals) = &prev {
                let rel: Vec<f64> = current
                    .iter()
                    .zip(prev_vals)
                    .zip(&l1)
                    .map(|((c, p), s)| {
                        if s.is_zero() {
                            0.0
                        } else {
                            (fl(prec, c - p).abs() / s).to_f64()
                        }
                    })
                    .collect();
                let bad = rel.iter().filter(|r| **r > tol).count();
                if level >= self.min_level && bad == 0 {
                    return Ok(QuadOutput {
                        values: current,
                        l1,
                        rel_error: rel,
                        levels: level,
                        nodes,
                    });
                }
                if level == self.max_level {
                    let worst = rel.iter().cloned().fold(0.0, f64::max);
                    return Err(Error::QuadratureNonConvergence {
                        component: bad,
                        tol,
                        levels: level,
                        worst,
                    });
                }
            }
            prev = Some(current);
        }
        unreachable!("loop returns at max_level")
    }
}

trait AssignZero {
    fn assign_zero(&mut self);
}

impl AssignZero for Float {
    fn assign_zero(&mut self) {
        rug::Assign::assign(self, 0);
    }
}

/// New abscissae at `level`: all integers for level 0, odd multiples of
/// `2^-level` afterwards, clipped to `[-s_left, s_right]`.
fn level_abscissae(level: u32, s_left: f64, s_right: f64) -> Vec<f64> {
    let h = (-(level as f64)).exp2();
    let mut out = Vec::new();
    if level == 0 {
        let lo = -(s_left.floor() as i64);
        let hi = s_right.floor() as i64;
        for j in lo..=hi {
            out.push(j as f64);
        }
    } else {
        let lo = -((s_left / h).floor() as i64);
        let hi = (s_right / h).floor() as i64;
        let mut j = if lo % 2 == 0 { lo + 1 } else { lo };
        while j <= hi {
            out.push(j as f64 * h);
            j += 2;
        }
    }
    out
}

/// Truncation point `U` such that `(u + r)^degree u^gamma e^{-u^2 + |t| u}`
/// with `r = |t| + 1 + sqrt(degree)` stays below `2^-(p+32)` beyond `U`.
pub fn tail_cutoff(prec: u32, gamma: f64, t_abs: f64, degree: usize, log_amp: f64) -> f64 {
    let k = degree as f64;
    let r = t_abs + 1.0 + k.sqrt();
    let target = -((prec as f64) + 32.0) * std::f64::consts::LN_2 - log_amp.max(0.0);
    let g = |u: f64| k * (u + r).ln() + gamma.max(0.0) * u.ln() - u * u + t_abs * u;
    let mut lo = 1.0 + t_abs + (k / 2.0).sqrt();
    if g(lo) <= target {
        return lo;
    }
    let mut hi = lo * 2.0;
    while g(hi) > target {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Which half-line a node lies on: `y = t - u` (left) or `y = t + u` (right).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Value of the weight at a quadrature node, passed to integrands over ℝ.
pub struct WeightedNode<'a> {
    pub side: Side,
    pub u: &'a Float,
    pub y: &'a Float,
    /// `w(y)`
    pub w: &'a Float,
}

/// Integrates `f(y) w(y)` over ℝ, splitting at `y = t`. `degree` bounds the
/// polynomial growth of `f` (for the tail cutoff); `singular_order` is 0 for
/// regular integrands and 1 when `f` carries a `1/(y - t)` factor.
pub fn integrate_weighted<F>(
    params: &WeightParams,
    prec: u32,
    tol: f64,
    degree: usize,
    singular_order: u32,
    dim: usize,
    f: F,
) -> Result<QuadOutput>
where
    F: Fn(&WeightedNode<'_>, &mut [Float]) + Sync,
{
    let gamma = params.gamma_f64();
    let expo = gamma - singular_order as f64;
    if expo <= -1.0 {
        return Err(Error::NotIntegrable(format!(
            "integrand behaves like |y - t|^{expo} at y = t"
        )));
    }
    let t = params.t_f(prec);
    let gamma_f = params.gamma_f(prec);
    let amp_r = params.right_amplitude(prec);
    let amp_l = params.left_amplitude(prec);
    let log_amp = amp_r.to_f64().max(amp_l.to_f64()).max(1.0).ln();
    let upper = tail_cutoff(prec, gamma, params.t_f64().abs(), degree, log_amp);
    let rule = HalfLineRule::new(prec, upper, expo);

    let mut total: Option<QuadOutput> = None;
    for (side, amp) in [(Side::Left, &amp_l), (Side::Right, &amp_r)] {
        if amp.is_zero() {
            continue;
        }
        let out = rule.integrate(dim, tol, |u, vals| {
            // exponent of e^{-y^2 + t y} in terms of u: -u^2 ± t u
            let tu = fl(prec, &t * u);
            let mut e = -fl(prec, u * u);
            match side {
                Side::Left => e += &tu,
                Side::Right => e -= &tu,
            }
            if !gamma_f.is_zero() {
                e += fl(prec, u.ln_ref()) * &gamma_f;
            }
            let w = e.exp() * amp;
            let y = match side {
                Side::Left => fl(prec, &t - u),
                Side::Right => fl(prec, &t + u),
            };
            f(
                &WeightedNode {
                    side,
                    u,
                    y: &y,
                    w: &w,
                },
                vals,
            );
        })?;
        total = Some(match total {
            None => out,
            Some(mut acc) => {
                for i in 0..dim {
                    acc.values[i] += &out.values[i];
                    acc.l1[i] += &out.l1[i];
                    acc.rel_error[i] = acc.rel_error[i].max(out.rel_error[i]);
                }
                acc.levels = acc.levels.max(out.levels);
                acc.nodes += out.nodes;
                acc
            }
        });
    }
    Ok(total.expect("at least one side has positive amplitude"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::Pow;

    fn rel(a: &Float, b: &Float) -> f64 {
        (fl(a.prec(), a - b) / b).abs().to_f64()
    }

    #[test]
    fn half_gaussian() {
        let prec = 256;
        let rule = HalfLineRule::new(prec, tail_cutoff(prec, 0.0, 0.0, 0, 0.0), 0.0);
        let out = rule
            .integrate(1, 1e-70, |u, v| {
                v[0] = fl(prec, -fl(prec, u * u)).exp();
            })
            .unwrap();
        let exact = num::sqrt_pi(prec) / 2u32;
        assert!(rel(&out.values[0], &exact) < 1e-72, "{}", rel(&out.values[0], &exact));
    }

    #[test]
    fn endpoint_singularity_is_absorbed() {
        // ∫_0^∞ u^{-1/2} e^{-u^2} du = Γ(1/4)/2
        let prec = 256;
        let rule = HalfLineRule::new(prec, tail_cutoff(prec, -0.5, 0.0, 0, 0.0), -0.5);
        let out = rule
            .integrate(1, 1e-70, |u, v| {
                let e = -fl(prec, u * u) - fl(prec, u.ln_ref()) / 2u32;
                v[0] = e.exp();
            })
            .unwrap();
        let exact = fl(prec, 0.25).gamma() / 2u32;
        assert!(rel(&out.values[0], &exact) < 1e-70);
    }

    #[test]
    fn strong_singularity_near_minus_one() {
        // ∫_0^∞ u^{-0.9} e^{-u^2} du = Γ(0.05)/2
        let prec = 192;
        let rule = HalfLineRule::new(prec, tail_cutoff(prec, -0.9, 0.0, 0, 0.0), -0.9);
        let g = fl(prec, -0.9);
        let out = rule
            .integrate(1, 1e-45, |u, v| {
                let e = -fl(prec, u * u) + fl(prec, u.ln_ref()) * &g;
                v[0] = e.exp();
            })
            .unwrap();
        let exact = (fl(prec, &g + 1u32) / 2u32).gamma() / 2u32;
        assert!(rel(&out.values[0], &exact) < 1e-44);
    }

    #[test]
    fn vector_components_share_nodes() {
        // ∫_0^∞ u^k e^{-u^2} du = Γ((k+1)/2)/2 for k = 0..6
        let prec = 192;
        let rule = HalfLineRule::new(prec, tail_cutoff(prec, 0.0, 0.0, 6, 0.0), 0.0);
        let out = rule
            .integrate(7, 1e-50, |u, v| {
                let w = fl(prec, -fl(prec, u * u)).exp();
                for (k, slot) in v.iter_mut().enumerate() {
                    *slot = fl(prec, u.pow(k as u32)) * &w;
                }
            })
            .unwrap();
        for k in 0..7 {
            let exact = fl(prec, (k as f64 + 1.0) / 2.0).gamma() / 2u32;
            assert!(rel(&out.values[k], &exact) < 1e-50, "k={k}");
        }
    }

    #[test]
    fn reports_non_convergence() {
        let prec = 128;
        let mut rule = HalfLineRule::new(prec, 10.0, 0.0);
        rule.max_level = 3;
        let err = rule
            .integrate(1, 1e-35, |u, v| {
                // sharp interior feature the coarse levels cannot resolve
                let d = fl(prec, u - 5u32);
                v[0] = fl(prec, -fl(prec, &d * &d) * 400u32).exp();
            })
            .unwrap_err();
        assert!(matches!(err, Error::QuadratureNonConvergence { .. }));
    }

    #[test]
    fn abscissae_partition_levels() {
        let l0 = level_abscissae(0, 3.2, 1.7);
        assert_eq!(l0, vec![-3.0, -2.0, -1.0, 0.0, 1.0]);
        let l1 = level_abscissae(1, 3.2, 1.7);
        assert_eq!(l1, vec![-2.5, -1.5, -0.5, 0.5, 1.5]);
    }

    #[test]
    fn weighted_line_integral_total_mass() {
        // A = 1, B = 1, gamma = 0, t = 0: mass (3/2)√π
        let prec = 192;
        let params = WeightParams::from_f64(1.0, 1.0, 0.0, 0.0).unwrap();
        let out = integrate_weighted(&params, prec, 1e-50, 0, 0, 1, |node, v| {
            v[0] = node.w.clone();
        })
        .unwrap();
        let exact = num::sqrt_pi(prec) * 3u32 / 2u32;
        assert!(rel(&out.values[0], &exact) < 1e-50);
    }
}

//! Moments `μ_k = ∫ z^k w(z) dz` of the deformed Hermite weight, computed by
//! two independent routes and cross-validated.
//!
//! Substituting `z = t ± u` reduces every moment to the base integrals
//! `I_k^± = ∫_0^∞ u^(γ+k) e^(-u² ∓ t u) du`, which obey
//! `I_{k+2}^± = ((γ+k+1) I_k^± ∓ t I_{k+1}^±) / 2` (integration by parts).
//! The recurrence backend integrates `I_0^±, I_1^±` numerically and runs the
//! recurrence upward; the quadrature backend integrates `z^k w(z)` directly.

use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{self, fl};
use crate::quadrature::{self, HalfLineRule};
use crate::weight::{NumericPolicy, WeightParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Backend {
    Quadrature,
    Recurrence,
    CrossChecked,
}

/// `μ_0 .. μ_{2N}` at fixed parameters.
#[derive(Debug, Clone)]
pub struct MomentTable {
    pub params: WeightParams,
    pub policy: NumericPolicy,
    pub moments: Vec<Float>,
    pub backend: Backend,
    /// Precisions tried before this table was accepted.
    pub escalations: Vec<u32>,
}

impl MomentTable {
    pub fn prec(&self) -> u32 {
        self.policy.precision_bits
    }

    pub fn len(&self) -> usize {
        self.moments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moments.is_empty()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let prec = self.prec();
        serde_json::json!({
            "A": rational_to_decimal(self.params.a()),
            "B": rational_to_decimal(self.params.b()),
            "gamma": rational_to_decimal(self.params.gamma()),
            "t": rational_to_decimal(self.params.t()),
            "precision_bits": prec,
            "backend": self.backend,
            "moments": self.moments.iter().map(|m| num::to_decimal(m, prec)).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let field = |k: &str| -> Result<String> {
            match &v[k] {
                serde_json::Value::String(s) => Ok(s.clone()),
                serde_json::Value::Number(n) => Ok(n.to_string()),
                _ => Err(Error::InvalidParams(format!("missing field {k}"))),
            }
        };
        let params = WeightParams::from_decimal(&field("A")?, &field("B")?, &field("gamma")?, &field("t")?)?;
        let prec = v["precision_bits"]
            .as_u64()
            .ok_or_else(|| Error::InvalidPolicy("missing precision_bits".into()))? as u32;
        let moments = v["moments"]
            .as_array()
            .ok_or_else(|| Error::InsufficientData("missing moments".into()))?
            .iter()
            .map(|s| {
                s.as_str()
                    .and_then(|s| num::parse_float(s, prec))
                    .ok_or_else(|| Error::InsufficientData("bad moment entry".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        let backend = serde_json::from_value(v["backend"].clone()).unwrap_or(Backend::Recurrence);
        Ok(Self {
            params,
            policy: NumericPolicy::default().with_precision(prec),
            moments,
            backend,
            escalations: vec![],
        })
    }
}

/// Terminating decimal expansion of `r` when one exists, otherwise 40
/// significant digits.
pub fn rational_to_decimal(r: &Rational) -> String {
    let mut den = r.denom().clone();
    let mut twos = 0u32;
    let mut fives = 0u32;
    while den.is_divisible_u(2) {
        den /= 2u32;
        twos += 1;
    }
    while den.is_divisible_u(5) {
        den /= 5u32;
        fives += 1;
    }
    if den != 1 {
        return num::to_decimal_digits(&fl(256, r), 40);
    }
    let scale = twos.max(fives);
    let scaled = r * Rational::from(Integer::from(Integer::u_pow_u(10, scale)));
    let digits = scaled.numer().clone().abs().to_string();
    let neg = *r < 0;
    let s = if scale == 0 {
        digits
    } else {
        let width = scale as usize + 1;
        let padded = format!("{digits:0>width$}");
        let (int, frac) = padded.split_at(padded.len() - scale as usize);
        let frac = frac.trim_end_matches('0');
        if frac.is_empty() {
            int.to_string()
        } else {
            format!("{int}.{frac}")
        }
    };
    if neg {
        format!("-{s}")
    } else {
        s
    }
}

/// `I_0^-, I_1^-` (left half-line, `e^{-u²+tu}`) and `I_0^+, I_1^+`
/// (right half-line, `e^{-u²-tu}`), with relative error estimates.
#[derive(Debug, Clone)]
pub struct BaseIntegrals {
    pub minus: [Float; 2],
    pub plus: [Float; 2],
    pub rel_error: f64,
}

pub fn base_integrals(params: &WeightParams, policy: &NumericPolicy) -> Result<BaseIntegrals> {
    let prec = policy.precision_bits;
    let gamma = params.gamma_f64();
    let t = params.t_f(prec);
    let g = params.gamma_f(prec);
    let upper = quadrature::tail_cutoff(prec, gamma, params.t_f64().abs(), 1, 0.0);
    let rule = HalfLineRule::new(prec, upper, gamma);
    let out = rule.integrate(4, policy.working_tol(), |u, v| {
        let mut e = -fl(prec, u * u);
        if !g.is_zero() {
            e += fl(prec, u.ln_ref()) * &g;
        }
        let tu = fl(prec, &t * u);
        let minus = fl(prec, &e + &tu).exp();
        let plus = (e - tu).exp();
        v[1] = fl(prec, &minus * u);
        v[3] = fl(prec, &plus * u);
        v[0] = minus;
        v[2] = plus;
    })?;
    let rel_error = out
        .rel_error
        .iter()
        .cloned()
        .fold((-(prec as f64)).exp2(), f64::max);
    let mut it = out.values.into_iter();
    let (m0, m1, p0, p1) = (
        it.next().unwrap(),
        it.next().unwrap(),
        it.next().unwrap(),
        it.next().unwrap(),
    );
    Ok(BaseIntegrals {
        minus: [m0, m1],
        plus: [p0, p1],
        rel_error,
    })
}

/// Runs `I_{k+2} = ((γ+k+1) I_k + sign·t I_{k+1}) / 2` up to `k_max` with a
/// running absolute error bound. `sign = +1` for `I^-`, `-1` for `I^+`.
fn upward(
    first: &[Float; 2],
    rel0: f64,
    gamma: &Float,
    t: &Float,
    sign: i32,
    k_max: usize,
    prec: u32,
) -> Result<(Vec<Float>, Vec<Float>)> {
    let ulp = num::pow2(prec, -(prec as i64) + 1);
    let rel0f = fl(prec, rel0);
    let mut vals = vec![first[0].clone(), first[1].clone()];
    let mut errs = vec![
        fl(prec, first[0].abs_ref()) * &rel0f,
        fl(prec, first[1].abs_ref()) * &rel0f,
    ];
    let t_abs = fl(prec, t.abs_ref());
    let guard = -(prec as f64) / 2.0;
    for k in 0..k_max.saturating_sub(1) {
        let c = fl(prec, gamma + (k as u32 + 1));
        let mut next = fl(prec, &c * &vals[k]);
        let tk = fl(prec, t * &vals[k + 1]);
        if sign > 0 {
            next += tk;
        } else {
            next -= tk;
        }
        next /= 2u32;
        let mut e = fl(prec, &c * &errs[k]) + fl(prec, &t_abs * &errs[k + 1]);
        e /= 2u32;
        e += fl(prec, next.abs_ref()) * &ulp * 4u32;
        let rel = num::log2_abs(&e) - num::log2_abs(&next);
        if rel > guard {
            return Err(Error::PrecisionLoss {
                k: k + 2,
                bits_lost: prec as f64 + rel,
                precision_bits: prec,
            });
        }
        vals.push(next);
        errs.push(e);
    }
    vals.truncate(k_max + 1);
    errs.truncate(k_max + 1);
    Ok((vals, errs))
}

/// Moments `μ_0 .. μ_{2n}` from the base integrals and the upward recurrence.
pub fn moments_recurrence(n: usize, params: &WeightParams, policy: &NumericPolicy) -> Result<MomentTable> {
    let prec = policy.precision_bits;
    let k_max = 2 * n;
    let base = base_integrals(params, policy)?;
    let gamma = params.gamma_f(prec);
    let t = params.t_f(prec);
    let (im, em) = upward(&base.minus, base.rel_error, &gamma, &t, 1, k_max.max(1), prec)?;
    let (ip, ep) = upward(&base.plus, base.rel_error, &gamma, &t, -1, k_max.max(1), prec)?;
    let amp_r = params.right_amplitude(prec);
    let amp_l = params.left_amplitude(prec);
    let ulp = num::pow2(prec, -(prec as i64) + 1);

    // powers of t
    let mut tpow = vec![fl(prec, 1)];
    for j in 1..=k_max {
        let next = fl(prec, &tpow[j - 1] * &t);
        tpow.push(next);
    }

    let mut moments = Vec::with_capacity(k_max + 1);
    let mut bounds = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        // z = t + u on the right, z = t - u on the left
        let mut sum = fl(prec, 0);
        let mut abs_sum = fl(prec, 0);
        let mut err = fl(prec, 0);
        for j in 0..=k {
            let binom = fl(prec, Integer::from(k).binomial(j as u32));
            let coef = binom * &tpow[k - j];
            let left = if j % 2 == 0 {
                fl(prec, &amp_l * &im[j])
            } else {
                -fl(prec, &amp_l * &im[j])
            };
            let side = fl(prec, &amp_r * &ip[j]) + left;
            let term = fl(prec, &coef * &side);
            abs_sum += fl(prec, term.abs_ref());
            sum += &term;
            let e_side = fl(prec, &amp_r * &ep[j]) + fl(prec, &amp_l * &em[j]);
            err += fl(prec, coef.abs_ref()) * e_side;
        }
        err += fl(prec, &abs_sum * &ulp) * ((k + 2) as u32);
        moments.push(sum);
        bounds.push(err);
    }

    for k in 0..=k_max {
        let scale = moment_scale(&moments, k);
        if scale.is_zero() {
            continue;
        }
        let rel = num::log2_abs(&bounds[k]) - num::log2_abs(&scale);
        if rel > -(prec as f64) / 2.0 {
            return Err(Error::PrecisionLoss {
                k,
                bits_lost: prec as f64 + rel,
                precision_bits: prec,
            });
        }
    }

    Ok(MomentTable {
        params: params.clone(),
        policy: policy.clone(),
        moments,
        backend: Backend::Recurrence,
        escalations: vec![],
    })
}

/// Natural scale of `μ_k` as a Hankel entry: `|μ_k|` for even `k`,
/// `sqrt(μ_{k-1} μ_{k+1})` for odd `k` (Cauchy–Schwarz bound).
fn moment_scale(m: &[Float], k: usize) -> Float {
    let prec = m[k].prec();
    if k.is_multiple_of(2) || k + 1 >= m.len() {
        return fl(prec, m[k].abs_ref());
    }
    let prod = fl(prec, &m[k - 1] * &m[k + 1]).abs();
    prod.sqrt().max(&fl(prec, m[k].abs_ref()))
}

/// Moments `μ_0 .. μ_{2n}` by direct quadrature of `z^k w(z)` on each side
/// of `z = t`.
pub fn moments_quadrature(n: usize, params: &WeightParams, policy: &NumericPolicy) -> Result<MomentTable> {
    let prec = policy.precision_bits;
    let k_max = 2 * n;
    let dim = k_max + 1;
    let out = quadrature::integrate_weighted(params, prec, policy.working_tol(), k_max, 0, dim, |node, v| {
        let mut pw = node.w.clone();
        for slot in v.iter_mut() {
            rug::Assign::assign(&mut *slot, &pw);
            pw *= node.y;
        }
    })?;
    Ok(MomentTable {
        params: params.clone(),
        policy: policy.clone(),
        moments: out.values,
        backend: Backend::Quadrature,
        escalations: vec![],
    })
}

/// `max_k |a_k - b_k| / (1 + |b_k|)`, with the index where it occurs.
pub fn max_relative_difference(a: &[Float], b: &[Float]) -> (usize, f64) {
    let mut worst = (0, 0.0);
    for (k, (x, y)) in a.iter().zip(b).enumerate() {
        let prec = x.prec().max(y.prec());
        let d = fl(prec, x - y).abs() / (fl(prec, y.abs_ref()) + 1u32);
        let d = d.to_f64();
        if d > worst.1 {
            worst = (k, d);
        }
    }
    worst
}

/// Runs both backends and returns the recurrence table tagged
/// `CrossChecked` when they agree to `32 quad_tol`. On disagreement or a
/// numerical failure, precision is escalated once.
pub fn cross_check(n: usize, params: &WeightParams, policy: &NumericPolicy) -> Result<MomentTable> {
    let mut tried = Vec::new();
    let mut current = policy.clone();
    let mut last_err = None;
    for _attempt in 0..2 {
        tried.push(current.precision_bits);
        match attempt_cross_check(n, params, &current) {
            Ok(mut table) => {
                table.escalations = tried[..tried.len() - 1].to_vec();
                return Ok(table);
            }
            Err(e) => last_err = Some(e),
        }
        current = current.escalated();
    }
    Err(last_err.expect("at least one attempt"))
}

fn attempt_cross_check(n: usize, params: &WeightParams, policy: &NumericPolicy) -> Result<MomentTable> {
    let rec = moments_recurrence(n, params, policy)?;
    let quad = moments_quadrature(n, params, policy)?;
    let threshold = 32.0 * policy.quad_tol;
    let (k, max_diff) = max_relative_difference(&rec.moments, &quad.moments);
    if max_diff >= threshold {
        return Err(Error::BackendDisagreement {
            k,
            max_diff,
            threshold,
            precision_bits: policy.precision_bits,
        });
    }
    Ok(MomentTable {
        backend: Backend::CrossChecked,
        ..rec
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: f64, b: f64, g: f64, t: f64) -> WeightParams {
        WeightParams::from_f64(a, b, g, t).unwrap()
    }

    fn policy(bits: u32) -> NumericPolicy {
        NumericPolicy::new(bits, 1e-40, "1e-8", 2).unwrap()
    }

    fn assert_close(x: &Float, expect: &Float, tol: f64) {
        let d = (fl(x.prec(), x - expect).abs() / (fl(x.prec(), expect.abs_ref()) + 1u32)).to_f64();
        assert!(d < tol, "{} vs {} (diff {d:e})", x.to_f64(), expect.to_f64());
    }

    #[test]
    fn half_gaussian_base_integrals() {
        let pol = policy(256);
        let b = base_integrals(&params(1.0, 0.0, 0.0, 0.0), &pol).unwrap();
        let half = num::sqrt_pi(256) / 2u32;
        assert_close(&b.minus[0], &half, 1e-70);
        assert_close(&b.plus[0], &half, 1e-70);
        let b = base_integrals(&params(1.0, 0.0, 1.0, 0.0), &pol).unwrap();
        let quarter = num::sqrt_pi(256) / 4u32;
        assert_close(&b.minus[1], &quarter, 1e-70);
        assert_close(&b.plus[1], &quarter, 1e-70);
    }

    #[test]
    fn recurrence_examples() {
        let pol = policy(256);
        let sp = num::sqrt_pi(256);
        let m = moments_recurrence(1, &params(1.0, 0.0, 0.0, 0.0), &pol).unwrap();
        assert_close(&m.moments[0], &sp, 1e-70);
        assert!(m.moments[1].to_f64().abs() < 1e-70);
        let m = moments_recurrence(0, &params(1.0, 1.0, 0.0, 0.0), &pol).unwrap();
        assert_close(&m.moments[0], &(sp.clone() * 3u32 / 2u32), 1e-70);
        let m = moments_recurrence(0, &params(1.0, 0.0, 1.0, 0.0), &pol).unwrap();
        assert_close(&m.moments[0], &fl(256, 1), 1e-70);
    }

    #[test]
    fn quadrature_examples() {
        let pol = policy(256);
        let sp = num::sqrt_pi(256);
        let m = moments_quadrature(1, &params(1.0, 0.0, 0.0, 0.0), &pol).unwrap();
        assert_close(&m.moments[0], &sp, 1e-70);
        assert!(m.moments[1].to_f64().abs() < 1e-70);
        let m = moments_quadrature(0, &params(1.0, 1.0, 0.0, 0.0), &pol).unwrap();
        assert_close(&m.moments[0], &(sp.clone() * 3u32 / 2u32), 1e-70);
        let m = moments_quadrature(0, &params(1.0, 0.0, 1.0, 0.0), &pol).unwrap();
        assert_close(&m.moments[0], &fl(256, 1), 1e-70);
    }

    #[test]
    fn cross_check_examples() {
        let pol = policy(256);
        let m = cross_check(8, &params(1.0, 1.0, 0.5, 0.5), &pol).unwrap();
        assert_eq!(m.backend, Backend::CrossChecked);
        assert_eq!(m.len(), 17);
        let m = cross_check(0, &params(0.0, 1.0, 0.0, 0.0), &pol).unwrap();
        assert_close(&m.moments[0], &(num::sqrt_pi(256) / 2u32), 1e-70);
    }

    #[test]
    fn shifted_gaussian_moments() {
        // μ_k = A e^{t²/4} ∫ z^k e^{-(z - t/2)^2} dz = A e^{t²/4} √π Σ_j C(k,2j) (t/2)^{k-2j} (2j-1)!!/2^j
        let prec = 256;
        let p = WeightParams::from_decimal("1", "0", "0", "0.7").unwrap();
        let m = cross_check(4, &p, &policy(prec)).unwrap();
        let tf = p.t_f(prec);
        let c = fl(prec, &tf / 2u32);
        let pref = (fl(prec, &tf * &tf) / 4u32).exp() * num::sqrt_pi(prec);
        for k in 0..=8usize {
            let mut s = fl(prec, 0);
            for j in 0..=k / 2 {
                let binom = fl(prec, Integer::from(k).binomial(2 * j as u32));
                let mut dfact = fl(prec, 1);
                for i in 0..j {
                    dfact *= (2 * i + 1) as u32;
                }
                let g = dfact / fl(prec, 1u64 << j);
                s += binom * fl(prec, rug::ops::Pow::pow(&c, k as u32 - 2 * j as u32)) * g;
            }
            assert_close(&m.moments[k], &(s * &pref), 1e-70);
        }
    }

    #[test]
    fn json_round_trip() {
        let pol = policy(192);
        let m = moments_recurrence(2, &WeightParams::from_decimal("1", "0.5", "1.5", "0.7").unwrap(), &pol).unwrap();
        let v = m.to_json();
        assert_eq!(v["A"], "1");
        assert_eq!(v["B"], "0.5");
        assert_eq!(v["t"], "0.7");
        let back = MomentTable::from_json(&v).unwrap();
        assert_eq!(back.params, m.params);
        let (_, d) = max_relative_difference(&back.moments, &m.moments);
        assert!(d < 1e-55);
    }

    #[test]
    fn rational_decimals() {
        assert_eq!(rational_to_decimal(&Rational::from((7, 10))), "0.7");
        assert_eq!(rational_to_decimal(&Rational::from((-1, 2))), "-0.5");
        assert_eq!(rational_to_decimal(&Rational::from(3)), "3");
        assert_eq!(rational_to_decimal(&Rational::from((1, 100_000_000))), "0.00000001");
        assert!(rational_to_decimal(&Rational::from((1, 3))).starts_with("3.33333"));
    }
}

//! Hankel determinants, recurrence coefficients and auxiliary quantities of
//! the monic orthogonal polynomials `P_n`, computed from a moment table.
//!
//! The primary route is an `L D Lᵀ` factorization of the Hankel moment
//! matrix: the pivots are the squared norms `h_n` and
//! `α_n = L_{n+1,n} - L_{n,n-1}`. The Chebyshev algorithm on the same
//! moments is an independent second route for `h_n`, and rerunning it on
//! moments rounded to fewer bits measures how many bits the factorization
//! loses.

use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::moments::MomentTable;
use crate::num::{self, fl};
use crate::quadrature::{self, Side};
use crate::weight::{NumericPolicy, WeightParams};

/// Bits dropped from the moments to measure sensitivity of the factorization.
const PROBE_BITS: u32 = 32;

#[derive(Debug, Clone)]
pub struct RecurrenceData {
    pub params: WeightParams,
    pub prec: u32,
    pub n_max: usize,
    /// `h_0 ..= h_{n_max}`
    pub h: Vec<Float>,
    /// `α_0 ..= α_{n_max}`
    pub alpha: Vec<Float>,
    /// `β_0 ..= β_{n_max}` with `β_0 = 0`
    pub beta: Vec<Float>,
    /// `p(0,t) ..= p(n_max+1,t)`
    pub p1: Vec<Float>,
    /// `D_0 = 1, D_1 ..= D_{n_max+1}`
    pub d: Vec<Float>,
    /// `ln D_0 ..= ln D_{n_max+1}`
    pub ln_d: Vec<Float>,
    /// Estimated bits lost between the moments and the coefficients.
    pub bits_lost: f64,
}

impl RecurrenceData {
    pub fn t(&self) -> Float {
        self.params.t_f(self.prec)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let p = self.prec;
        let dec = |v: &[Float]| v.iter().map(|x| num::to_decimal(x, p)).collect::<Vec<_>>();
        serde_json::json!({
            "A": crate::moments::rational_to_decimal(self.params.a()),
            "B": crate::moments::rational_to_decimal(self.params.b()),
            "gamma": crate::moments::rational_to_decimal(self.params.gamma()),
            "t": crate::moments::rational_to_decimal(self.params.t()),
            "precision_bits": p,
            "n_max": self.n_max,
            "h": dec(&self.h),
            "alpha": dec(&self.alpha),
            "beta": dec(&self.beta[1..]),
            "p1": dec(&self.p1),
            "D": dec(&self.d[1..]),
        })
    }
}

/// Factorization pivots and off-diagonals of the Hankel matrix.
struct Ldl {
    pivots: Vec<Float>,
    /// `L_{n+1,n}` for each available `n`
    sub: Vec<Float>,
}

fn ldl_hankel(mu: &[Float], size: usize, prec: u32) -> Ldl {
    // e[i][k] = L_{ik} d_k, kept to avoid re-multiplying by the pivots.
    let mut l: Vec<Vec<Float>> = Vec::with_capacity(size + 1);
    let mut e: Vec<Vec<Float>> = Vec::with_capacity(size + 1);
    let mut pivots: Vec<Float> = Vec::with_capacity(size);
    let mut sub = Vec::with_capacity(size);
    let mut acc = fl(prec, 0);
    for i in 0..=size {
        let mut li = Vec::with_capacity(i);
        let mut ei = Vec::with_capacity(i);
        for j in 0..i.min(size) {
            rug::Assign::assign(&mut acc, &mu[i + j]);
            for k in 0..j {
                acc -= fl(prec, &ei[k] * &l[j][k]);
            }
            let lij = fl(prec, &acc / &pivots[j]);
            ei.push(acc.clone());
            li.push(lij);
        }
        if i > 0 {
            sub.push(li[i - 1].clone());
        }
        if i < size {
            rug::Assign::assign(&mut acc, &mu[2 * i]);
            for k in 0..i {
                acc -= fl(prec, &ei[k] * &li[k]);
            }
            pivots.push(acc.clone());
        }
        l.push(li);
        e.push(ei);
    }
    Ldl { pivots, sub }
}

/// Chebyshev algorithm: `(α_0..α_{m-1}, β_0..β_{m-1})` from `μ_0..μ_{2m-1}`,
/// with `β_0 = μ_0`.
pub fn chebyshev(mu: &[Float], m: usize, prec: u32) -> (Vec<Float>, Vec<Float>) {
    let len = 2 * m;
    let mut prev = vec![fl(prec, 0); len];
    let mut cur: Vec<Float> = mu[..len].iter().map(|x| fl(prec, x)).collect();
    let mut a = vec![fl(prec, &mu[1] / &mu[0])];
    let mut b = vec![fl(prec, &mu[0])];
    for k in 1..m {
        let mut next = vec![fl(prec, 0); len];
        for l in k..(len - k) {
            next[l] = fl(prec, &cur[l + 1] - &a[k - 1] * &cur[l]) - fl(prec, &b[k - 1] * &prev[l]);
        }
        a.push(fl(prec, &next[k + 1] / &next[k]) - fl(prec, &cur[k] / &cur[k - 1]));
        b.push(fl(prec, &next[k] / &cur[k - 1]));
        prev = cur;
        cur = next;
    }
    (a, b)
}

/// Recurrence data for `n ≤ n_max` from `μ_0..μ_{2 n_max + 1}`.
pub fn recurrence_from_moments(table: &MomentTable, n_max: usize) -> Result<RecurrenceData> {
    let prec = table.prec();
    let mu = &table.moments;
    if mu.len() < 2 * n_max + 2 {
        return Err(Error::InsufficientData(format!(
            "{} moments given, {} needed for n_max = {n_max}",
            mu.len(),
            2 * n_max + 2
        )));
    }
    let size = n_max + 1;
    let ldl = ldl_hankel(mu, size, prec);
    for (n, piv) in ldl.pivots.iter().enumerate() {
        if *piv <= 0 {
            return Err(Error::PrecisionExhausted {
                n,
                reason: format!("non-positive pivot h_{n} = {}", num::to_sci(piv)),
            });
        }
    }

    let mut alpha = Vec::with_capacity(size);
    for n in 0..size {
        let a = if n == 0 {
            ldl.sub[0].clone()
        } else {
            fl(prec, &ldl.sub[n] - &ldl.sub[n - 1])
        };
        alpha.push(a);
    }
    let h = ldl.pivots;
    let mut beta = vec![fl(prec, 0)];
    for n in 1..size {
        beta.push(fl(prec, &h[n] / &h[n - 1]));
    }

    // second route and sensitivity probe
    let (a_ch, b_ch) = chebyshev(mu, size, prec);
    let low: Vec<Float> = mu.iter().map(|x| fl(prec, &fl(prec - PROBE_BITS, x))).collect();
    let (a_lo, b_lo) = chebyshev(&low, size, prec);
    let mut d = vec![fl(prec, 1)];
    // Chebyshev returns β_n; the norms are running products h_n = h_{n-1} β_n
    let mut d_cheb = fl(prec, 1);
    let mut probe_d = fl(prec, 1);
    let mut h_cheb = fl(prec, 1);
    let mut h_probe = fl(prec, 1);
    let mut bits_lost: f64 = 0.0;
    let mut route_gap: f64 = f64::NEG_INFINITY;
    for n in 0..size {
        let last = fl(prec, &d[n] * &h[n]);
        d.push(last);
        h_cheb *= &b_ch[n];
        h_probe *= &b_lo[n];
        d_cheb *= &h_cheb;
        probe_d *= &h_probe;
        let dn = &d[n + 1];
        let gap = num::log2_abs(&fl(prec, &d_cheb - dn)) - num::log2_abs(dn);
        route_gap = route_gap.max(gap);
        let sens_d = num::log2_abs(&fl(prec, &probe_d - dn)) - num::log2_abs(dn);
        let sens_a = num::log2_abs(&fl(prec, &a_lo[n] - &a_ch[n]))
            - (num::log2_abs(&a_ch[n]).max(0.0));
        for s in [sens_d, sens_a] {
            if s.is_finite() {
                bits_lost = bits_lost.max(s + (prec - PROBE_BITS) as f64);
            }
        }
    }
    let half = prec as f64 / 2.0;
    if bits_lost > half {
        return Err(Error::PrecisionExhausted {
            n: n_max,
            reason: format!("factorization loses {bits_lost:.0} of {prec} bits"),
        });
    }
    if route_gap > -half {
        return Err(Error::PrecisionExhausted {
            n: n_max,
            reason: format!("pivot product and Chebyshev norms differ by 2^{route_gap:.0}"),
        });
    }

    let mut p1 = vec![fl(prec, 0)];
    for n in 0..size {
        let next = fl(prec, &p1[n] - &alpha[n]);
        p1.push(next);
    }
    let mut ln_d = vec![fl(prec, 0)];
    for n in 0..size {
        let next = fl(prec, &ln_d[n] + &fl(prec, h[n].ln_ref()));
        ln_d.push(next);
    }

    Ok(RecurrenceData {
        params: table.params.clone(),
        prec,
        n_max,
        h,
        alpha,
        beta,
        p1,
        d,
        ln_d,
        bits_lost,
    })
}

/// `P_0(y) ..= P_n(y)` at a real point.
pub fn eval_monic_all_real(y: &Float, n: usize, rec: &RecurrenceData) -> Vec<Float> {
    let prec = y.prec();
    let mut out = Vec::with_capacity(n + 1);
    out.push(fl(prec, 1));
    if n == 0 {
        return out;
    }
    out.push(fl(prec, y - &rec.alpha[0]));
    for k in 1..n {
        let next = fl(prec, y - &rec.alpha[k]) * &out[k] - fl(prec, &rec.beta[k] * &out[k - 1]);
        out.push(next);
    }
    out
}

/// `P_0(z) ..= P_n(z)` at a complex point.
pub fn eval_monic_all(z: &Complex, n: usize, rec: &RecurrenceData) -> Vec<Complex> {
    let prec = z.prec().0;
    let mut out = Vec::with_capacity(n + 1);
    out.push(Complex::with_val(prec, 1));
    if n == 0 {
        return out;
    }
    out.push(Complex::with_val(prec, z - &rec.alpha[0]));
    for k in 1..n {
        let zk = Complex::with_val(prec, z - &rec.alpha[k]);
        let next = zk * &out[k] - Complex::with_val(prec, &out[k - 1] * &rec.beta[k]);
        out.push(next);
    }
    out
}

pub fn eval_monic(z: &Complex, n: usize, rec: &RecurrenceData) -> Complex {
    eval_monic_all(z, n, rec).pop().expect("nonempty")
}

/// `[P_n, P_n', P_n'']` at `z` by differentiating the recurrence.
pub fn eval_monic_derivatives(z: &Complex, n: usize, rec: &RecurrenceData) -> [Complex; 3] {
    let prec = z.prec().0;
    let zero = || Complex::with_val(prec, 0);
    // (value, first, second) for k-1 and k
    let mut prev = [zero(), zero(), zero()];
    let mut cur = [Complex::with_val(prec, 1), zero(), zero()];
    for k in 0..n {
        let zk = Complex::with_val(prec, z - &rec.alpha[k]);
        let b = &rec.beta[k];
        let v = Complex::with_val(prec, &zk * &cur[0]) - Complex::with_val(prec, &prev[0] * b);
        let d1 = Complex::with_val(prec, &zk * &cur[1]) + &cur[0] - Complex::with_val(prec, &prev[1] * b);
        let d2 = Complex::with_val(prec, &zk * &cur[2]) + Complex::with_val(prec, &cur[1] * 2u32)
            - Complex::with_val(prec, &prev[2] * b);
        prev = std::mem::replace(&mut cur, [v, d1, d2]);
    }
    cur
}

/// `R_n, r_n, σ_n, σ̂_n` read off the recurrence coefficients.
#[derive(Debug, Clone)]
pub struct AuxQuantities {
    /// `R_0 ..= R_{n_max}`, `R_n = 2α_n - t`
    pub r_big: Vec<Float>,
    /// `r_0 ..= r_{n_max}`, `r_n = 2β_n - n` (`r_0 = 0`)
    pub r: Vec<Float>,
    /// `σ_0 ..= σ_{n_max+1}`, `σ_n = p(n,t) + n t`
    pub sigma: Vec<Float>,
    /// `σ̂_0 ..= σ̂_{n_max+1}`, `σ̂_n = -Σ_{j<n} R_j`
    pub sigma_hat: Vec<Float>,
}

impl AuxQuantities {
    pub fn to_json(&self, prec: u32) -> serde_json::Value {
        let dec = |v: &[Float]| v.iter().map(|x| num::to_decimal(x, prec)).collect::<Vec<_>>();
        serde_json::json!({
            "R": dec(&self.r_big),
            "r": dec(&self.r[1..]),
            "sigma": dec(&self.sigma[1..]),
            "sigma_hat": dec(&self.sigma_hat[1..]),
        })
    }
}

pub fn aux_from_recurrence(rec: &RecurrenceData, t: &Float) -> AuxQuantities {
    let prec = rec.prec;
    let r_big: Vec<Float> = rec
        .alpha
        .iter()
        .map(|a| fl(prec, a * 2u32) - t)
        .collect();
    let r: Vec<Float> = rec
        .beta
        .iter()
        .enumerate()
        .map(|(n, b)| fl(prec, b * 2u32) - n as u32)
        .collect();
    let sigma: Vec<Float> = rec
        .p1
        .iter()
        .enumerate()
        .map(|(n, p)| fl(prec, t * n as u32) + p)
        .collect();
    let mut sigma_hat = vec![fl(prec, 0)];
    for rj in &r_big {
        let next = fl(prec, sigma_hat.last().unwrap() - rj);
        sigma_hat.push(next);
    }
    AuxQuantities {
        r_big,
        r,
        sigma,
        sigma_hat,
    }
}

/// `(R_n, r_n)` by direct quadrature of `γ/h_n ∫ P_n² w/(y-t)` and
/// `γ/h_{n-1} ∫ P_n P_{n-1} w/(y-t)`; `r_0` is returned as 0.
pub fn aux_by_quadrature(
    n: usize,
    rec: &RecurrenceData,
    params: &WeightParams,
    policy: &NumericPolicy,
) -> Result<(Float, Float)> {
    if *params.gamma() <= 0 {
        return Err(Error::NotIntegrable(
            "R_n and r_n integrals need gamma > 0".into(),
        ));
    }
    if n > rec.n_max {
        return Err(Error::InsufficientData(format!("n = {n} exceeds n_max = {}", rec.n_max)));
    }
    let prec = rec.prec;
    let out = quadrature::integrate_weighted(params, prec, policy.quad_tol, 2 * n, 1, 2, |node, v| {
        let p = eval_monic_all_real(node.y, n, rec);
        let inv = match node.side {
            Side::Right => fl(prec, node.w / node.u),
            Side::Left => -fl(prec, node.w / node.u),
        };
        v[0] = fl(prec, &p[n] * &p[n]) * &inv;
        if n > 0 {
            v[1] = fl(prec, &p[n] * &p[n - 1]) * &inv;
        }
    })?;
    let g = params.gamma_f(prec);
    let big = fl(prec, &out.values[0] * &g) / &rec.h[n];
    let small = if n == 0 {
        fl(prec, 0)
    } else {
        fl(prec, &out.values[1] * &g) / &rec.h[n - 1]
    };
    Ok((big, small))
}

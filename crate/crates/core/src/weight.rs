//! The deformed Hermite weight with one jump,
//! `w(z) = exp(-z^2 + t z) |z - t|^gamma (A + B θ(z - t))`, its parameters and
//! the numerical policy every computation runs under.

use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{self, fl};

/// `(A, B, gamma, t)` stored as exact rationals so that decimal inputs such as
/// `t = 0.7` are represented exactly at every working precision.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightParams {
    a: Rational,
    b: Rational,
    gamma: Rational,
    t: Rational,
}

impl WeightParams {
    pub fn new(a: Rational, b: Rational, gamma: Rational, t: Rational) -> Result<Self> {
        if a < 0 {
            return Err(Error::InvalidParams(format!("A must be >= 0, got {}", a.to_f64())));
        }
        let upper = Rational::from(&a + &b);
        if upper < 0 {
            return Err(Error::InvalidParams(format!(
                "A + B must be >= 0, got {}",
                upper.to_f64()
            )));
        }
        if gamma <= -1 {
            return Err(Error::InvalidParams(format!(
                "gamma must be > -1, got {}",
                gamma.to_f64()
            )));
        }
        if a == 0 && upper == 0 {
            return Err(Error::InvalidParams(
                "A = 0 and A + B = 0: the weight vanishes identically".into(),
            ));
        }
        Ok(Self { a, b, gamma, t })
    }

    /// Convenience constructor from binary floats (taken at their exact value).
    pub fn from_f64(a: f64, b: f64, gamma: f64, t: f64) -> Result<Self> {
        let conv = |x: f64, name: &str| {
            Rational::from_f64(x)
                .ok_or_else(|| Error::InvalidParams(format!("{name} is not finite")))
        };
        Self::new(conv(a, "A")?, conv(b, "B")?, conv(gamma, "gamma")?, conv(t, "t")?)
    }

    /// Constructor from decimal strings, parsed exactly.
    pub fn from_decimal(a: &str, b: &str, gamma: &str, t: &str) -> Result<Self> {
        let conv = |s: &str, name: &str| {
            num::parse_decimal(s)
                .ok_or_else(|| Error::InvalidParams(format!("{name}: cannot parse '{s}'")))
        };
        Self::new(conv(a, "A")?, conv(b, "B")?, conv(gamma, "gamma")?, conv(t, "t")?)
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }
    pub fn b(&self) -> &Rational {
        &self.b
    }
    pub fn gamma(&self) -> &Rational {
        &self.gamma
    }
    pub fn t(&self) -> &Rational {
        &self.t
    }

    /// Same weight family with the jump/singularity moved to `t`.
    pub fn with_t(&self, t: Rational) -> Self {
        Self { t, ..self.clone() }
    }

    pub fn a_f(&self, prec: u32) -> Float {
        fl(prec, &self.a)
    }
    pub fn b_f(&self, prec: u32) -> Float {
        fl(prec, &self.b)
    }
    pub fn gamma_f(&self, prec: u32) -> Float {
        fl(prec, &self.gamma)
    }
    pub fn t_f(&self, prec: u32) -> Float {
        fl(prec, &self.t)
    }

    /// Amplitude `A + B` on `(t, ∞)`.
    pub fn right_amplitude(&self, prec: u32) -> Float {
        fl(prec, Rational::from(&self.a + &self.b))
    }

    /// Amplitude `A` on `(-∞, t]`.
    pub fn left_amplitude(&self, prec: u32) -> Float {
        fl(prec, &self.a)
    }

    pub fn gamma_f64(&self) -> f64 {
        self.gamma.to_f64()
    }
    pub fn t_f64(&self) -> f64 {
        self.t.to_f64()
    }

    /// `gamma == 0 && B == 0`: the weight is a shifted Gaussian.
    pub fn is_shifted_gaussian(&self) -> bool {
        self.gamma == 0 && self.b == 0
    }
}

impl std::fmt::Display for WeightParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "A={} B={} gamma={} t={}",
            self.a.to_f64(),
            self.b.to_f64(),
            self.gamma.to_f64(),
            self.t.to_f64()
        )
    }
}

/// Working precision and numerical tolerances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericPolicy {
    pub precision_bits: u32,
    /// Relative quadrature target for the pointwise (ladder) integrals.
    pub quad_tol: f64,
    /// Step `h` for finite differences in `t`, as an exact decimal.
    pub fd_step: String,
    pub escalation_factor: u32,
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self {
            precision_bits: 512,
            quad_tol: 1e-40,
            fd_step: "1e-8".into(),
            escalation_factor: 2,
        }
    }
}

impl NumericPolicy {
    pub fn new(precision_bits: u32, quad_tol: f64, fd_step: &str, escalation_factor: u32) -> Result<Self> {
        let p = Self {
            precision_bits,
            quad_tol,
            fd_step: fd_step.to_string(),
            escalation_factor,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.precision_bits < 64 {
            return Err(Error::InvalidPolicy(format!(
                "precision_bits must be >= 64, got {}",
                self.precision_bits
            )));
        }
        if self.escalation_factor < 2 {
            return Err(Error::InvalidPolicy("escalation_factor must be >= 2".into()));
        }
        if self.quad_tol.is_nan() || self.quad_tol <= 0.0 || !self.quad_tol.is_finite() {
            return Err(Error::InvalidPolicy("quad_tol must be positive".into()));
        }
        // quad_tol >= 2^(16 - p), compared in log space so large p never underflows
        if self.quad_tol.log2() < 16.0 - self.precision_bits as f64 {
            return Err(Error::InvalidPolicy(format!(
                "quad_tol {:e} is below 2^(16-{})",
                self.quad_tol, self.precision_bits
            )));
        }
        let h = self.fd_step_rational()?;
        if h <= 0 {
            return Err(Error::InvalidPolicy("fd_step must be positive".into()));
        }
        Ok(())
    }

    pub fn with_precision(&self, bits: u32) -> Self {
        Self {
            precision_bits: bits,
            ..self.clone()
        }
    }

    /// Precision multiplied by the escalation factor.
    pub fn escalated(&self) -> Self {
        self.with_precision(self.precision_bits * self.escalation_factor)
    }

    pub fn fd_step_rational(&self) -> Result<Rational> {
        num::parse_decimal(&self.fd_step)
            .ok_or_else(|| Error::InvalidPolicy(format!("fd_step: cannot parse '{}'", self.fd_step)))
    }

    /// Relative target for moment-level integrals: working precision with 16
    /// guard bits, never looser than `quad_tol`.
    pub fn working_tol(&self) -> f64 {
        let w = (16.0 - self.precision_bits as f64).exp2();
        w.min(self.quad_tol)
    }

    /// Default tolerance for relative comparisons:
    /// `100 * max(quad_tol, 2^(-p/2))`.
    pub fn rel_tol(&self) -> f64 {
        100.0 * self.quad_tol.max((-(self.precision_bits as f64) / 2.0).exp2())
    }

    /// Working precision recommended for orders up to `n`: 512 bits up to
    /// n = 32, 2048 bits beyond.
    pub fn for_order(&self, n: usize) -> Self {
        let want = if n <= 32 { 512 } else { 2048 };
        self.with_precision(self.precision_bits.max(want))
    }
}

/// Heaviside step with θ(0) = 0.
fn theta(x: &Float) -> bool {
    *x > 0
}

/// `w(z) = exp(-z^2 + t z) |z - t|^gamma (A + B θ(z - t))`.
pub fn weight_eval(z: &Float, params: &WeightParams) -> Result<Float> {
    let prec = z.prec();
    let t = params.t_f(prec);
    let d = fl(prec, z - &t);
    let amp = if theta(&d) {
        params.right_amplitude(prec)
    } else {
        params.left_amplitude(prec)
    };
    let mut expo = fl(prec, &t * z) - fl(prec, z * z);
    if d.is_zero() {
        if *params.gamma() < 0 {
            return Err(Error::SingularPoint);
        }
        if *params.gamma() > 0 {
            return Ok(fl(prec, 0));
        }
    } else if *params.gamma() != 0 {
        expo += d.abs().ln() * params.gamma_f(prec);
    }
    Ok(expo.exp() * amp)
}

/// `v0(z) = z^2 - t z`.
pub fn potential_v0(z: &Float, params: &WeightParams) -> Float {
    let prec = z.prec();
    let t = params.t_f(prec);
    fl(prec, z * z) - t * z
}

/// `v0'(z) = 2 z - t`.
pub fn v0_prime(z: &Float, params: &WeightParams) -> Float {
    let prec = z.prec();
    let t = params.t_f(prec);
    fl(prec, z * 2u32) - t
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(a: f64, b: f64, g: f64, t: f64) -> WeightParams {
        WeightParams::from_f64(a, b, g, t).unwrap()
    }

    fn close(x: &Float, y: f64, tol: f64) -> bool {
        (x.to_f64() - y).abs() <= tol
    }

    #[test]
    fn weight_examples() {
        let prec = 128;
        let w = weight_eval(&fl(prec, 0), &p(1.0, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!(w, 1);
        let w = weight_eval(&fl(prec, 1), &p(1.0, 1.0, 0.0, 0.0)).unwrap();
        assert!(close(&w, 0.7357588823428847, 1e-15));
        let w = weight_eval(&fl(prec, -1), &p(1.0, 1.0, 2.0, 0.0)).unwrap();
        assert!(close(&w, 0.36787944117144233, 1e-15));
    }

    #[test]
    fn jump_point_conventions() {
        let prec = 128;
        let z = fl(prec, 0.5);
        assert_eq!(
            weight_eval(&z, &p(1.0, 1.0, -0.5, 0.5)).unwrap_err(),
            Error::SingularPoint
        );
        assert!(weight_eval(&z, &p(1.0, 1.0, 0.5, 0.5)).unwrap().is_zero());
        // θ(0) = 0: amplitude A is used at the jump.
        let w = weight_eval(&z, &p(1.0, 2.0, 0.0, 0.5)).unwrap();
        let expect = (-0.25f64 + 0.25).exp();
        assert!(close(&w, expect, 1e-15));
    }

    #[test]
    fn potential_examples() {
        let prec = 64;
        let cases = [(0.0, 0.0, 0.0, 0.0), (1.0, 0.0, 1.0, 2.0), (2.0, 3.0, -2.0, 1.0)];
        for (z, t, v, vp) in cases {
            let par = p(1.0, 0.0, 0.0, t);
            assert_eq!(potential_v0(&fl(prec, z), &par), v);
            assert_eq!(v0_prime(&fl(prec, z), &par), vp);
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(WeightParams::from_f64(-0.1, 1.0, 0.0, 0.0).is_err());
        assert!(WeightParams::from_f64(1.0, -1.5, 0.0, 0.0).is_err());
        assert!(WeightParams::from_f64(1.0, 0.0, -1.0, 0.0).is_err());
        assert!(WeightParams::from_f64(0.0, 0.0, 0.0, 0.0).is_err());
        // one-sided supports are allowed
        assert!(WeightParams::from_f64(0.0, 1.0, 0.0, 0.0).is_ok());
        assert!(WeightParams::from_f64(1.0, -1.0, 0.0, 0.0).is_ok());
    }

    #[test]
    fn one_sided_supports() {
        let prec = 128;
        let right_only = p(0.0, 1.0, 0.0, 0.0);
        assert!(weight_eval(&fl(prec, -0.3), &right_only).unwrap().is_zero());
        assert!(weight_eval(&fl(prec, 0.3), &right_only).unwrap() > 0);
        let left_only = p(1.0, -1.0, 0.0, 0.0);
        assert!(weight_eval(&fl(prec, 0.3), &left_only).unwrap().is_zero());
        assert!(weight_eval(&fl(prec, -0.3), &left_only).unwrap() > 0);
    }

    #[test]
    fn policy_validation() {
        assert!(NumericPolicy::default().validate().is_ok());
        assert!(NumericPolicy::new(32, 1e-5, "1e-8", 2).is_err());
        assert!(NumericPolicy::new(128, 1e-60, "1e-8", 2).is_err());
        assert!(NumericPolicy::new(512, 1e-40, "1e-8", 1).is_err());
        assert!(NumericPolicy::new(512, 1e-40, "-1e-8", 2).is_err());
        let e = NumericPolicy::default().escalated();
        assert_eq!(e.precision_bits, 1024);
    }

    proptest! {
        #[test]
        fn weight_is_nonnegative(
            z in -6.0f64..6.0,
            a in 0.0f64..3.0,
            b in -3.0f64..3.0,
            g in -0.9f64..4.0,
            t in -2.0f64..2.0,
        ) {
            prop_assume!(a + b >= 0.0 && !(a == 0.0 && a + b == 0.0));
            prop_assume!(z != t);
            let par = p(a, b, g, t);
            let w = weight_eval(&fl(128, z), &par).unwrap();
            prop_assert!(w >= 0);
        }

        #[test]
        fn gaussian_case_matches_completed_square(z in -5.0f64..5.0, a in 0.1f64..3.0, t in -2.0f64..2.0) {
            let prec = 256;
            let par = p(a, 0.0, 0.0, t);
            let zf = fl(prec, z);
            let w = weight_eval(&zf, &par).unwrap();
            let tf = fl(prec, t);
            let shift = fl(prec, &zf - fl(prec, &tf / 2u32));
            let expo = fl(prec, &tf * &tf) / 4u32 - fl(prec, &shift * &shift);
            let expect = expo.exp() * fl(prec, a);
            let rel = (fl(prec, &w - &expect) / &expect).abs();
            prop_assert!(rel < num::pow2(prec, -240));
        }

        #[test]
        fn v0_prime_is_derivative(z in -5.0f64..5.0, t in -3.0f64..3.0) {
            let prec = 256;
            let par = p(1.0, 0.0, 0.0, t);
            let h = num::pow2(prec, -30);
            let zf = fl(prec, z);
            let up = potential_v0(&fl(prec, &zf + &h), &par);
            let dn = potential_v0(&fl(prec, &zf - &h), &par);
            let fd = (up - dn) / (h * 2u32);
            let diff = (fd - v0_prime(&zf, &par)).abs();
            prop_assert!(diff < num::pow2(prec, -55));
        }
    }
}

//! Finite differences in `t`: the full pipeline is rerun at `t + k h` with
//! `t + k h` kept exact.

use rayon::prelude::*;
use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::fl;
use crate::pipeline::{compute, Computation};
use crate::weight::{NumericPolicy, WeightParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FdOrder {
    /// Three-point stencils, error `O(h²)`.
    Central2,
    /// Five-point stencils, error `O(h⁴)`.
    Richardson4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FDScheme {
    pub step: Rational,
    pub order: FdOrder,
}

impl FDScheme {
    pub fn new(step: Rational, order: FdOrder) -> Self {
        Self { step, order }
    }

    pub fn from_policy(policy: &NumericPolicy, order: FdOrder) -> Result<Self> {
        Ok(Self::new(policy.fd_step_rational()?, order))
    }

    /// Requires `2^(-p/3) < h < 1e-4`.
    pub fn validate(&self, prec: u32) -> Result<()> {
        let h = self.step.to_f64();
        let lo = (-(prec as f64) / 3.0).exp2();
        if !(h > lo && h < 1e-4) {
            return Err(Error::InvalidScheme(format!(
                "step {h:e} outside ({lo:e}, 1e-4) at {prec} bits"
            )));
        }
        Ok(())
    }

    pub fn offsets(&self) -> &'static [i32] {
        match self.order {
            FdOrder::Central2 => &[-1, 0, 1],
            FdOrder::Richardson4 => &[-2, -1, 0, 1, 2],
        }
    }

    fn power(&self) -> i32 {
        match self.order {
            FdOrder::Central2 => 2,
            FdOrder::Richardson4 => 4,
        }
    }

    /// Tolerance for identities with one `t`-derivative:
    /// `max(1e4 h^q, 2^(-p/3))` with `q` the scheme order.
    pub fn first_derivative_tol(&self, prec: u32) -> f64 {
        let h = self.step.to_f64();
        (1e4 * h.powi(self.power())).max((-(prec as f64) / 3.0).exp2())
    }

    /// Tolerance for identities with a second `t`-derivative:
    /// `max(1e8 h^q, 2^(-p/4))`.
    pub fn second_derivative_tol(&self, prec: u32) -> f64 {
        let h = self.step.to_f64();
        (1e8 * h.powi(self.power())).max((-(prec as f64) / 4.0).exp2())
    }
}

/// Pipeline results at the stencil points around `t`.
#[derive(Debug, Clone)]
pub struct FdContext {
    pub scheme: FDScheme,
    pub n_max: usize,
    samples: Vec<(i32, Computation)>,
}

impl FdContext {
    pub fn new(params: &WeightParams, policy: &NumericPolicy, scheme: FDScheme, n_max: usize) -> Result<Self> {
        scheme.validate(policy.precision_bits)?;
        let samples = scheme
            .offsets()
            .par_iter()
            .map(|&k| {
                let t = params.t() + Rational::from(&scheme.step * k);
                compute(&params.with_t(t), policy, n_max).map(|c| (k, c))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            scheme,
            n_max,
            samples,
        })
    }

    pub fn at(&self, k: i32) -> &Computation {
        &self
            .samples
            .iter()
            .find(|(o, _)| *o == k)
            .expect("offset in stencil")
            .1
    }

    pub fn center(&self) -> &Computation {
        self.at(0)
    }

    pub fn prec(&self) -> u32 {
        self.center().prec()
    }

    fn h(&self) -> Float {
        fl(self.prec(), &self.scheme.step)
    }

    /// `d f / dt` at the centre.
    pub fn d1(&self, f: impl Fn(&Computation) -> Float) -> Float {
        let prec = self.prec();
        let h = self.h();
        match self.scheme.order {
            FdOrder::Central2 => (f(self.at(1)) - f(self.at(-1))) / (h * 2u32),
            FdOrder::Richardson4 => {
                let num = f(self.at(-2)) - fl(prec, f(self.at(-1)) * 8u32) + fl(prec, f(self.at(1)) * 8u32)
                    - f(self.at(2));
                num / (h * 12u32)
            }
        }
    }

    /// `d² f / dt²` at the centre.
    pub fn d2(&self, f: impl Fn(&Computation) -> Float) -> Float {
        let prec = self.prec();
        let h = self.h();
        let h2 = fl(prec, &h * &h);
        match self.scheme.order {
            FdOrder::Central2 => {
                (f(self.at(1)) - fl(prec, f(self.at(0)) * 2u32) + f(self.at(-1))) / h2
            }
            FdOrder::Richardson4 => {
                let num = -f(self.at(2)) + fl(prec, f(self.at(1)) * 16u32) - fl(prec, f(self.at(0)) * 30u32)
                    + fl(prec, f(self.at(-1)) * 16u32)
                    - f(self.at(-2));
                num / (h2 * 12u32)
            }
        }
    }
}

//! Runs selected identity families over `n = 1..=n_max` at one parameter
//! set and merges the reports in a fixed order.

use std::fmt;
use std::str::FromStr;

use rug::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd::{FDScheme, FdContext, FdOrder};
use crate::identities as id;
use crate::ladder::{check_large_z, LadderEvaluator};
use crate::num::fl;
use crate::pipeline::{compute, Computation};
use crate::report::{rel_residual, sort_reports, IdentityId, ResidualReport};
use crate::weight::{NumericPolicy, WeightParams};

/// Identity families selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    String,
    Deriv,
    Riccati,
    Painleve,
    Sigma,
    Dsigma,
    Ladder,
    Aux,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::String,
        Suite::Deriv,
        Suite::Riccati,
        Suite::Painleve,
        Suite::Sigma,
        Suite::Dsigma,
        Suite::Ladder,
        Suite::Aux,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::String => "string",
            Suite::Deriv => "deriv",
            Suite::Riccati => "riccati",
            Suite::Painleve => "painleve",
            Suite::Sigma => "sigma",
            Suite::Dsigma => "dsigma",
            Suite::Ladder => "ladder",
            Suite::Aux => "aux",
        }
    }

    fn needs_fd(self) -> bool {
        matches!(self, Suite::Deriv | Suite::Riccati | Suite::Painleve | Suite::Sigma)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s.trim())
            .ok_or_else(|| Error::InvalidParams(format!("unknown suite '{s}'")))
    }
}

/// Parses a comma-separated suite list; `all` selects every family.
pub fn parse_suites(s: &str) -> Result<Vec<Suite>> {
    let mut out = Vec::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        if part.trim() == "all" {
            out.extend(Suite::ALL);
        } else {
            out.push(part.parse()?);
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidParams("no suites selected".into()));
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Complex points at which the ladder family is checked.
pub fn ladder_points(prec: u32) -> Vec<Complex> {
    [(1.0, 1.0), (0.0, 2.0), (-3.0, 0.5)]
        .iter()
        .map(|&(re, im)| Complex::with_val(prec, (re, im)))
        .collect()
}

/// Radii on the imaginary axis for the large-`z` check.
pub const LARGE_Z_RADII: [f64; 4] = [20.0, 40.0, 80.0, 160.0];

/// Options beyond the weight and numeric policy.
#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub fd_order: FdOrder,
    pub large_z: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { fd_order: FdOrder::Central2, large_z: true }
    }
}

/// Every selected family for `1 ≤ n ≤ n_max` (and `n = 0` where the
/// family is defined there).
pub fn run_suites(
    params: &WeightParams,
    policy: &NumericPolicy,
    n_max: usize,
    suites: &[Suite],
    opts: &SuiteOptions,
) -> Result<Vec<ResidualReport>> {
    if n_max < 1 {
        return Err(Error::InvalidParams("n_max must be at least 1".into()));
    }
    if suites.is_empty() {
        return Err(Error::InvalidParams("no suites selected".into()));
    }
    let pol = policy.for_order(n_max + 1).with_precision(policy.precision_bits.max(pol_floor(n_max)));
    let has = |s: Suite| suites.contains(&s);

    let (comp, ctx) = if suites.iter().any(|s| s.needs_fd()) {
        let scheme = FDScheme::from_policy(&pol, opts.fd_order)?;
        let ctx = FdContext::new(params, &pol, scheme, n_max + 1)?;
        (ctx.center().clone(), Some(ctx))
    } else {
        (compute(params, &pol, n_max + 1)?, None)
    };

    let mut out = Vec::new();
    if has(Suite::String) {
        for n in 1..=n_max {
            out.extend(id::check_string_equations(n, &comp.aux, &comp.rec)?);
        }
    }
    if let Some(ctx) = &ctx {
        for n in 1..=n_max {
            if has(Suite::Deriv) {
                out.extend(id::check_t_derivatives(n, ctx)?);
            }
            if has(Suite::Riccati) {
                out.extend(id::check_riccati(n, ctx)?);
            }
            if has(Suite::Painleve) {
                out.extend(id::check_painleve4(n, ctx)?);
            }
            if has(Suite::Sigma) {
                out.extend(id::check_sigma_continuous(n, ctx)?);
            }
        }
    }
    if has(Suite::Dsigma) {
        for n in 1..=n_max {
            out.push(id::check_sigma_hat(n, &comp.aux, &comp.rec));
            out.push(id::check_sigma_discrete(n, &comp.aux, &comp.rec)?);
        }
    }
    if has(Suite::Ladder) {
        out.extend(ladder_reports(params, &pol, &comp, n_max, opts)?);
    }
    if has(Suite::Aux) {
        out.extend(aux_reports(params, &pol, &comp, n_max)?);
    }
    sort_reports(&mut out);
    Ok(out)
}

fn pol_floor(n_max: usize) -> u32 {
    if n_max + 1 > 32 {
        2048
    } else {
        0
    }
}

/// Lowering relation, corollaries, compatibility and ODE at the standard
/// points for `0 ≤ n ≤ n_max`, plus the large-`z` decay at `n_max`.
pub fn ladder_reports(
    params: &WeightParams,
    policy: &NumericPolicy,
    comp: &Computation,
    n_max: usize,
    opts: &SuiteOptions,
) -> Result<Vec<ResidualReport>> {
    let pts = ladder_points(comp.prec());
    let ev = LadderEvaluator::new(params, &comp.rec, policy, n_max + 1, &pts, true)?;
    let mut out = Vec::new();
    for i in 0..pts.len() {
        for n in 0..=n_max {
            out.push(ev.check_lowering(i, n, policy));
            out.extend(ev.check_compatibility(i, n, policy)?);
            out.push(ev.check_ode(i, n, policy)?);
        }
    }
    if !ev.substituted {
        for n in 0..=n_max {
            out.extend(ev.check_corollary(n, policy)?);
        }
    }
    if opts.large_z {
        out.extend(check_large_z(n_max, &LARGE_Z_RADII, &comp.rec, params, policy)?.reports);
    }
    Ok(out)
}

/// `R_n` and `r_n` from their defining integrals against `2α_n - t` and
/// `2β_n - n`; skipped for `γ ≤ 0`, where the integrals diverge.
pub fn aux_reports(
    params: &WeightParams,
    policy: &NumericPolicy,
    comp: &Computation,
    n_max: usize,
) -> Result<Vec<ResidualReport>> {
    let prec = comp.prec();
    let tol = fl(prec, 100.0 * policy.quad_tol);
    if *params.gamma() <= 0 {
        return Ok((0..=n_max)
            .flat_map(|n| {
                [
                    ResidualReport::skipped(IdentityId::AuxRQuad, n, params, tol.clone(), "integral diverges for gamma <= 0"),
                    ResidualReport::skipped(IdentityId::AuxSmallRQuad, n, params, tol.clone(), "integral diverges for gamma <= 0"),
                ]
            })
            .collect());
    }
    let ev = LadderEvaluator::new(params, &comp.rec, policy, n_max, &[], false)?;
    let mut out = Vec::new();
    for n in 0..=n_max {
        out.push(ResidualReport::new(
            IdentityId::AuxRQuad,
            n,
            params,
            rel_residual(&ev.r_big[n], &comp.aux.r_big[n]),
            tol.clone(),
            String::new(),
        ));
        if n >= 1 {
            out.push(ResidualReport::new(
                IdentityId::AuxSmallRQuad,
                n,
                params,
                rel_residual(&ev.r_small[n], &comp.aux.r[n]),
                tol.clone(),
                String::new(),
            ));
        }
    }
    Ok(out)
}

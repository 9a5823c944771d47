//! Residual reports: one identity at one `(n, t)`, with its tolerance and
//! verdict, serializable as CSV rows or JSON objects.

use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use crate::moments::rational_to_decimal;
use crate::num::{self, fl};
use crate::weight::WeightParams;

/// Identity families checked by the suite. The declaration order is the
/// report ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum IdentityId {
    Lowering,
    Corollary1,
    Corollary2,
    S1,
    S2,
    S2Prime,
    Ode,
    LargeZA,
    LargeZB,
    AuxRQuad,
    AuxSmallRQuad,
    StringRSum,
    StringBetaStep,
    StringCross,
    StringRSumBeta,
    StringQuadratic,
    LnHDerivative,
    BetaDerivative,
    PDerivative,
    AlphaDerivative,
    RiccatiSmallR,
    RiccatiBigR,
    Painleve4,
    Painleve4Normal,
    SigmaLnD,
    SigmaPrime,
    SigmaForm,
    SigmaRRepresentation,
    SigmaRrRepresentation,
    SigmaHat,
    DiscreteSigma,
    AsymptoticR,
    AsymptoticRNegative,
    HankelExpansion,
    HankelExpansionNegative,
    Quartic,
}

impl IdentityId {
    pub fn label(self) -> &'static str {
        use IdentityId::*;
        match self {
            Lowering => "LADDER_2_1",
            Corollary1 => "COROLLARY_2_6_1",
            Corollary2 => "COROLLARY_2_6_2",
            S1 => "S1_2_7",
            S2 => "S2_2_8",
            S2Prime => "S2P",
            Ode => "ODE_2_13",
            LargeZA => "LARGEZ_3_1",
            LargeZB => "LARGEZ_3_2",
            AuxRQuad => "AUX_3_1_1",
            AuxSmallRQuad => "AUX_3_2_1",
            StringRSum => "EQ_3_4",
            StringBetaStep => "EQ_3_5",
            StringCross => "EQ_3_6",
            StringRSumBeta => "EQ_3_7",
            StringQuadratic => "EQ_3_9",
            LnHDerivative => "DERIV_4_2",
            BetaDerivative => "DERIV_4_3",
            PDerivative => "DERIV_4_4",
            AlphaDerivative => "DERIV_4_5",
            RiccatiSmallR => "RICCATI_4_6",
            RiccatiBigR => "RICCATI_4_7",
            Painleve4 => "PIV_4_12",
            Painleve4Normal => "PIV_NORMAL",
            SigmaLnD => "SIGMA_LND",
            SigmaPrime => "SIGMA_3_19",
            SigmaForm => "SIGMA_3_11",
            SigmaRRepresentation => "SIGMA_3_25",
            SigmaRrRepresentation => "SIGMA_3_27",
            SigmaHat => "SIGMA_HAT",
            DiscreteSigma => "DSIGMA_3_21",
            AsymptoticR => "ASY_5_2",
            AsymptoticRNegative => "ASY_5_4",
            HankelExpansion => "HANKEL_5_5",
            HankelExpansionNegative => "HANKEL_5_6",
            Quartic => "QUARTIC_4_13",
        }
    }
}

impl std::fmt::Display for IdentityId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub identity_id: IdentityId,
    pub n: usize,
    pub t: Rational,
    pub residual: Float,
    pub tolerance: Float,
    pub pass: bool,
    /// Degenerate case reported without a verdict.
    pub skipped: bool,
    pub notes: String,
}

pub const CSV_HEADER: &str = "identity_id,n,t,residual,tolerance,pass,notes";

impl ResidualReport {
    pub fn new(
        identity_id: IdentityId,
        n: usize,
        params: &WeightParams,
        residual: Float,
        tolerance: Float,
        notes: String,
    ) -> Self {
        // a NaN residual never passes
        let pass = !residual.is_nan() && residual <= tolerance;
        Self {
            identity_id,
            n,
            t: params.t().clone(),
            residual,
            tolerance,
            pass,
            skipped: false,
            notes,
        }
    }

    /// A degenerate case: residual 0, passing, with the reason in `notes`.
    pub fn skipped(identity_id: IdentityId, n: usize, params: &WeightParams, tolerance: Float, reason: &str) -> Self {
        let prec = tolerance.prec();
        Self {
            identity_id,
            n,
            t: params.t().clone(),
            residual: fl(prec, 0),
            tolerance,
            pass: true,
            skipped: true,
            notes: format!("skipped: {reason}"),
        }
    }

    pub fn residual_f64(&self) -> f64 {
        self.residual.to_f64()
    }

    fn digits(&self) -> u32 {
        self.residual.prec().max(self.tolerance.prec())
    }

    pub fn residual_string(&self) -> String {
        num::to_decimal(&self.residual, self.digits())
    }

    pub fn tolerance_string(&self) -> String {
        num::to_decimal(&self.tolerance, self.digits())
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.identity_id,
            self.n,
            rational_to_decimal(&self.t),
            self.residual_string(),
            self.tolerance_string(),
            self.pass,
            csv_escape(&self.notes)
        )
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "identity_id": self.identity_id.label(),
            "n": self.n,
            "t": rational_to_decimal(&self.t),
            "residual": self.residual_string(),
            "tolerance": self.tolerance_string(),
            "pass": self.pass,
            "notes": self.notes,
        })
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        format!(
            "{:<16} n={:<3} t={:<6} residual={} tol={} {}{}",
            self.identity_id.label(),
            self.n,
            rational_to_decimal(&self.t),
            num::to_sci(&self.residual),
            num::to_sci(&self.tolerance),
            if self.pass { "ok" } else { "FAIL" },
            if self.notes.is_empty() { String::new() } else { format!(" ({})", self.notes) }
        )
    }
}

pub fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Stable ordering by `(identity_id, n, t)`; ties keep generation order.
pub fn sort_reports(reports: &mut [ResidualReport]) {
    reports.sort_by(|a, b| {
        a.identity_id
            .cmp(&b.identity_id)
            .then(a.n.cmp(&b.n))
            .then(a.t.cmp(&b.t))
    });
}

pub fn to_csv(reports: &[ResidualReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

pub fn to_json(reports: &[ResidualReport]) -> serde_json::Value {
    serde_json::Value::Array(reports.iter().map(|r| r.to_json()).collect())
}

/// `|lhs - rhs| / (1 + |rhs|)`
pub fn rel_residual(lhs: &Float, rhs: &Float) -> Float {
    let prec = lhs.prec().max(rhs.prec());
    fl(prec, lhs - rhs).abs() / (fl(prec, rhs.abs_ref()) + 1u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> WeightParams {
        WeightParams::from_decimal("1", "1", "1.5", "0.5").unwrap()
    }

    #[test]
    fn pass_iff_residual_within_tolerance() {
        let p = params();
        let r = ResidualReport::new(IdentityId::S1, 2, &p, fl(64, 1e-10), fl(64, 1e-9), String::new());
        assert!(r.pass);
        let r = ResidualReport::new(IdentityId::S1, 2, &p, fl(64, 1e-8), fl(64, 1e-9), String::new());
        assert!(!r.pass);
        let r = ResidualReport::new(IdentityId::S1, 2, &p, Float::with_val(64, rug::float::Special::Nan), fl(64, 1.0), String::new());
        assert!(!r.pass);
    }

    #[test]
    fn csv_and_json_shapes() {
        let p = params();
        let r = ResidualReport::new(IdentityId::StringQuadratic, 5, &p, fl(64, 0.0), fl(64, 1e-9), "a, b".into());
        let row = r.csv_row();
        assert!(row.starts_with("EQ_3_9,5,0.5,0,"));
        assert!(row.ends_with(",true,\"a, b\""));
        let j = r.to_json();
        assert_eq!(j["identity_id"], "EQ_3_9");
        assert_eq!(j["t"], "0.5");
        assert_eq!(j["pass"], true);
        let s = ResidualReport::skipped(IdentityId::RiccatiSmallR, 3, &p, fl(64, 1e-12), "R_n below floor");
        assert!(s.pass && s.skipped && s.notes.starts_with("skipped"));
    }

    #[test]
    fn ordering_is_by_identity_then_n() {
        let p = params();
        let mk = |id, n| ResidualReport::new(id, n, &p, fl(64, 0.0), fl(64, 1.0), String::new());
        let mut v = vec![mk(IdentityId::Quartic, 1), mk(IdentityId::S1, 3), mk(IdentityId::S1, 1)];
        sort_reports(&mut v);
        let got: Vec<_> = v.iter().map(|r| (r.identity_id, r.n)).collect();
        assert_eq!(got, vec![(IdentityId::S1, 1), (IdentityId::S1, 3), (IdentityId::Quartic, 1)]);
    }
}

//! Moments → recurrence coefficients → auxiliary quantities at one parameter
//! point, escalating precision when the factorization runs out of bits.

use rug::Rational;

use crate::error::{Error, Result};
use crate::moments::{cross_check, MomentTable};
use crate::orthopoly::{aux_from_recurrence, recurrence_from_moments, AuxQuantities, RecurrenceData};
use crate::weight::{NumericPolicy, WeightParams};

/// Escalations attempted after the first run.
const MAX_ESCALATIONS: usize = 2;

#[derive(Debug, Clone)]
pub struct Computation {
    pub table: MomentTable,
    pub rec: RecurrenceData,
    pub aux: AuxQuantities,
    /// Precisions tried and abandoned before this result.
    pub escalations: Vec<u32>,
}

impl Computation {
    pub fn prec(&self) -> u32 {
        self.rec.prec
    }

    pub fn params(&self) -> &WeightParams {
        &self.table.params
    }
}

fn recoverable(e: &Error) -> bool {
    matches!(
        e,
        Error::PrecisionLoss { .. } | Error::PrecisionExhausted { .. } | Error::BackendDisagreement { .. }
    )
}

/// Full pipeline for `n ≤ n_max` with cross-checked moments.
pub fn compute(params: &WeightParams, policy: &NumericPolicy, n_max: usize) -> Result<Computation> {
    let mut current = policy.clone();
    let mut tried = Vec::new();
    loop {
        let attempt = cross_check(n_max + 1, params, &current).and_then(|table| {
            let rec = recurrence_from_moments(&table, n_max)?;
            Ok((table, rec))
        });
        match attempt {
            Ok((table, rec)) => {
                let aux = aux_from_recurrence(&rec, &params.t_f(rec.prec));
                tried.extend(table.escalations.iter().copied());
                return Ok(Computation {
                    table,
                    rec,
                    aux,
                    escalations: tried,
                });
            }
            Err(e) if recoverable(&e) && tried.len() < MAX_ESCALATIONS => {
                tried.push(current.precision_bits);
                current = current.escalated();
            }
            Err(e) => return Err(e),
        }
    }
}

/// The pipeline at the same `(A, B, γ)` but a different `t`.
pub fn compute_at(params: &WeightParams, t: &Rational, policy: &NumericPolicy, n_max: usize) -> Result<Computation> {
    compute(&params.with_t(t.clone()), policy, n_max)
}

//! Cancellativity verdicts, common right multiples and right lcms.
//!
//! Left cancellativity follows from complete reversing together with the
//! absence of relations `s·w = s·w'` with `w ≠ w'`. The criterion is only
//! sufficient, so a failed hypothesis is reported as `NotByThisCriterion`,
//! never as a proof that cancellation fails. Right cancellativity is the same
//! criterion applied to the mirrored presentation.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::budget::Budget;
use crate::completeness::{check_completeness, CompletenessReport, Verdict};
use crate::presentation::{Letter, Presentation, Word};
use crate::reversing::{reverse_complemented, reverse_enumerate, Grid, GridError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CancellativityStatus {
    Cancellative,
    /// A hypothesis of the criterion fails; cancellativity is left open.
    NotByThisCriterion {
        reason: String,
    },
    Inconclusive {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CancellativityVerdict {
    pub side: Side,
    pub status: CancellativityStatus,
    /// Completeness evidence for the presentation actually checked (the mirror for `Right`).
    pub completeness: CompletenessReport,
    /// Relations `s·w = s·w'` of the checked presentation, by index.
    pub conflicts: Vec<usize>,
}

impl CancellativityVerdict {
    pub fn is_cancellative(&self) -> bool {
        self.status == CancellativityStatus::Cancellative
    }

    /// `p` is the presentation the verdict was asked about; the evidence of a
    /// right-side verdict refers to its mirror.
    pub fn to_json(&self, p: &Presentation) -> Value {
        let checked = match self.side {
            Side::Left => p.clone(),
            Side::Right => p.mirror(),
        };
        let mut out = serde_json::to_value(&self.status).expect("serializable");
        out["side"] = json!(self.side);
        out["conflicts"] = json!(self.conflicts);
        out["evidence"] = self.completeness.summary_json(&checked);
        out
    }
}

fn left_verdict(p: &Presentation, b: &Budget, side: Side) -> CancellativityVerdict {
    let completeness = check_completeness(p, b);
    let conflicts: Vec<usize> = p.left_cancel_conflicts().iter().map(|r| r.index).collect();
    let status = if let Some(&first) = conflicts.first() {
        CancellativityStatus::NotByThisCriterion {
            reason: format!("relation {} has sides sharing their first letter", first),
        }
    } else {
        match &completeness.verdict {
            Verdict::Complete => CancellativityStatus::Cancellative,
            Verdict::Incomplete { .. } => CancellativityStatus::NotByThisCriterion {
                reason: "reversing is not complete".into(),
            },
            Verdict::Inconclusive { reason } => CancellativityStatus::Inconclusive {
                reason: format!("completeness undecided: {reason}"),
            },
        }
    };
    CancellativityVerdict {
        side,
        status,
        completeness,
        conflicts,
    }
}

pub fn check_left_cancellative(p: &Presentation, b: &Budget) -> CancellativityVerdict {
    left_verdict(p, b, Side::Left)
}

/// The left criterion on the mirrored presentation.
pub fn check_right_cancellative(p: &Presentation, b: &Budget) -> CancellativityVerdict {
    left_verdict(&p.mirror(), b, Side::Right)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MultipleResult {
    /// `multiple = u·v1 ≡ v·u1`, read off `grid`.
    Multiple {
        multiple: Word,
        complements: (Word, Word),
        grid: Grid,
    },
    /// Certified by a completed enumeration with no grid and complete reversing.
    NoCommonMultiple {
        stuck: Vec<(Letter, Letter)>,
    },
    Inconclusive {
        reason: String,
    },
}

impl MultipleResult {
    pub fn to_json(&self, p: &Presentation) -> Value {
        match self {
            MultipleResult::Multiple {
                multiple,
                complements,
                grid,
            } => json!({
                "status": "multiple",
                "multiple": p.tokens(multiple),
                "complements": [p.tokens(&complements.0), p.tokens(&complements.1)],
                "grid": grid.to_json(p),
            }),
            MultipleResult::NoCommonMultiple { stuck } => json!({
                "status": "no_common_multiple",
                "stuck": stuck_json(p, stuck),
            }),
            MultipleResult::Inconclusive { reason } => json!({
                "status": "inconclusive",
                "reason": reason,
            }),
        }
    }
}

fn stuck_json(p: &Presentation, stuck: &[(Letter, Letter)]) -> Value {
    stuck.iter().map(|&(s, t)| json!([p.name(s), p.name(t)])).collect()
}

/// A common right multiple of `u` and `v` from the first grid (in trace order).
///
/// Any grid yields a genuine common multiple, so that answer needs no
/// precondition; the negative answer needs complete reversing, which this
/// function checks.
pub fn common_right_multiple(
    p: &Presentation,
    u: &[Letter],
    v: &[Letter],
    b: &Budget,
) -> Result<MultipleResult, GridError> {
    common_right_multiple_with(p, None, u, v, b)
}

/// As [`common_right_multiple`], reusing a completeness report for `p` when given.
pub fn common_right_multiple_with(
    p: &Presentation,
    report: Option<&CompletenessReport>,
    u: &[Letter],
    v: &[Letter],
    b: &Budget,
) -> Result<MultipleResult, GridError> {
    let mut outcome = reverse_enumerate(p, u, v, b)?;
    let completed = outcome.is_completed();
    if let Some(grid) = std::mem::take(&mut outcome.grids).into_iter().next() {
        let (u1, v1) = grid.target.clone();
        return Ok(MultipleResult::Multiple {
            multiple: Word::from(u).concat(&v1),
            complements: (u1, v1),
            grid,
        });
    }
    if !completed {
        return Ok(MultipleResult::Inconclusive {
            reason: "grid enumeration exceeded the budget".into(),
        });
    }
    let complete = match report {
        Some(r) => r.is_complete(),
        None => check_completeness(p, b).is_complete(),
    };
    Ok(if complete {
        MultipleResult::NoCommonMultiple { stuck: outcome.stuck }
    } else {
        MultipleResult::Inconclusive {
            reason: "no grid exists, but reversing is not known to be complete".into(),
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LcmResult {
    Lcm { multiple: Word, complements: (Word, Word) },
    NoCommonMultiple { stuck: Vec<(Letter, Letter)> },
    Inconclusive { reason: String },
}

impl LcmResult {
    pub fn to_json(&self, p: &Presentation) -> Value {
        match self {
            LcmResult::Lcm { multiple, complements } => json!({
                "status": "lcm",
                "multiple": p.tokens(multiple),
                "complements": [p.tokens(&complements.0), p.tokens(&complements.1)],
            }),
            LcmResult::NoCommonMultiple { stuck } => json!({
                "status": "no_common_multiple",
                "stuck": stuck_json(p, stuck),
            }),
            LcmResult::Inconclusive { reason } => json!({
                "status": "inconclusive",
                "reason": reason,
            }),
        }
    }
}

/// Right lcm by deterministic reversing; requires a right-complemented
/// presentation with complete reversing.
pub fn right_lcm(p: &Presentation, u: &[Letter], v: &[Letter], b: &Budget) -> Result<LcmResult, GridError> {
    right_lcm_with(p, None, u, v, b)
}

pub fn right_lcm_with(
    p: &Presentation,
    report: Option<&CompletenessReport>,
    u: &[Letter],
    v: &[Letter],
    b: &Budget,
) -> Result<LcmResult, GridError> {
    if p.has_epsilon_relation() {
        return Err(GridError::EpsilonRelation);
    }
    if !p.is_right_complemented() {
        return Err(GridError::NotComplemented);
    }
    let complete = match report {
        Some(r) => r.is_complete(),
        None => check_completeness(p, b).is_complete(),
    };
    if !complete {
        return Ok(LcmResult::Inconclusive {
            reason: "reversing is not known to be complete".into(),
        });
    }
    let outcome = reverse_complemented(p, u, v, b)?;
    let completed = outcome.is_completed();
    Ok(match outcome.grids.into_iter().next() {
        Some(grid) => {
            let (u1, v1) = grid.target;
            LcmResult::Lcm {
                multiple: Word::from(u).concat(&v1),
                complements: (u1, v1),
            }
        }
        None if completed => LcmResult::NoCommonMultiple { stuck: outcome.stuck },
        None => LcmResult::Inconclusive {
            reason: "reversing exceeded the cell budget".into(),
        },
    })
}

/// Every pair of distinct generators `s, t` has a relation `s·t' = t·s'` with
/// `s', t'` generators.
pub fn has_total_lcm_shape(p: &Presentation) -> bool {
    let short = |x: &Word, y: &Word, s: Letter, t: Letter| x.len() == 2 && y.len() == 2 && x[0] == s && y[0] == t;
    p.alphabet().all(|s| {
        p.alphabet().filter(|&t| t != s).all(|t| {
            p.relations()
                .iter()
                .any(|r| short(&r.lhs, &r.rhs, s, t) || short(&r.rhs, &r.lhs, s, t))
        })
    })
}

//! The diamond check, completeness verdicts, reversing-based equivalence and
//! the defect of a presentation.
//!
//! For a generator `s` and a relation `w = w'`, the diamond condition asks that
//! every grid from `(s, w)` has a grid from `(s, w')` with componentwise
//! equivalent targets, and vice versa. For weight-homogeneous presentations it
//! holds for all pairs exactly when right reversing is complete.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::budget::Budget;
use crate::oracle::{ClassOracle, Distance};
use crate::presentation::{Letter, Presentation, Relation, Word};
use crate::reversing::{reversal_targets, reverse_enumerate, Grid, GridError, ReversalOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    LhsToRhs,
    RhsToLhs,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::LhsToRhs => "lhs->rhs",
            Direction::RhsToLhs => "rhs->lhs",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiamondStatus {
    /// Each grid from the source side, paired with the first equivalent grid
    /// (in trace order) from the other side.
    Verified {
        matching: Vec<(Grid, Grid)>,
    },
    /// A grid with no equivalent partner; `exhausted` records that the other
    /// side was enumerated completely.
    Counterexample {
        grid: Grid,
        exhausted: bool,
    },
    Inconclusive {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiamondReport {
    pub generator: Letter,
    pub relation: usize,
    pub direction: Direction,
    pub status: DiamondStatus,
}

impl DiamondReport {
    pub fn is_verified(&self) -> bool {
        matches!(self.status, DiamondStatus::Verified { .. })
    }

    pub fn is_counterexample(&self) -> bool {
        matches!(self.status, DiamondStatus::Counterexample { .. })
    }

    pub fn to_json(&self, p: &Presentation) -> Value {
        let mut out = json!({
            "generator": p.name(self.generator),
            "relation_index": self.relation,
            "relation": p.format_relation(p.relation(self.relation)),
            "direction": self.direction.as_str(),
        });
        match &self.status {
            DiamondStatus::Verified { matching } => {
                out["status"] = json!("verified");
                out["matched"] = json!(matching.len());
            }
            DiamondStatus::Counterexample { grid, exhausted } => {
                out["status"] = json!("counterexample");
                out["exhausted"] = json!(exhausted);
                out["witness"] = grid.to_json(p);
            }
            DiamondStatus::Inconclusive { reason } => {
                out["status"] = json!("inconclusive");
                out["reason"] = json!(reason);
            }
        }
        out
    }
}

/// Componentwise target equivalence; `None` when the oracle ran out of budget.
fn targets_equivalent(oracle: &mut ClassOracle<'_>, a: &Grid, b: &Grid) -> Option<bool> {
    let first = oracle.equivalent(&a.target.0, &b.target.0);
    if first == Some(false) {
        return Some(false);
    }
    let second = oracle.equivalent(&a.target.1, &b.target.1);
    match (first, second) {
        (_, Some(false)) => Some(false),
        (Some(true), Some(true)) => Some(true),
        _ => None,
    }
}

fn one_direction(oracle: &mut ClassOracle<'_>, from: &ReversalOutcome, to: &ReversalOutcome) -> DiamondStatus {
    if !from.is_completed() {
        return DiamondStatus::Inconclusive {
            reason: "grid enumeration on the source side exceeded the budget".into(),
        };
    }
    let mut matching = Vec::with_capacity(from.grids.len());
    for g in &from.grids {
        let mut undecided = false;
        let partner = to.grids.iter().find(|h| match targets_equivalent(oracle, g, h) {
            Some(eq) => eq,
            None => {
                undecided = true;
                false
            }
        });
        match partner {
            Some(h) => matching.push((g.clone(), h.clone())),
            None if undecided => {
                return DiamondStatus::Inconclusive {
                    reason: "equivalence class exceeded the budget".into(),
                }
            }
            None if !to.is_completed() => {
                return DiamondStatus::Inconclusive {
                    reason: "grid enumeration on the opposite side exceeded the budget".into(),
                }
            }
            None => {
                return DiamondStatus::Counterexample {
                    grid: g.clone(),
                    exhausted: true,
                }
            }
        }
    }
    DiamondStatus::Verified { matching }
}

fn precondition(p: &Presentation) -> Option<&'static str> {
    if p.has_epsilon_relation() {
        Some("the presentation contains an ε-relation")
    } else if !p.is_weight_homogeneous() {
        Some("the presentation is not weight-homogeneous")
    } else {
        None
    }
}

fn enumerate_both(
    p: &Presentation,
    s: Letter,
    rel: &Relation,
    b: &Budget,
) -> Result<(ReversalOutcome, ReversalOutcome), GridError> {
    Ok((
        reverse_enumerate(p, &[s], &rel.lhs, b)?,
        reverse_enumerate(p, &[s], &rel.rhs, b)?,
    ))
}

/// Both directions of the diamond check for `s` and `rel`.
pub fn check_diamond(p: &Presentation, s: Letter, rel: &Relation, b: &Budget) -> [DiamondReport; 2] {
    let report = |direction, status| DiamondReport {
        generator: s,
        relation: rel.index,
        direction,
        status,
    };
    let fail = |reason: String| {
        [
            report(
                Direction::LhsToRhs,
                DiamondStatus::Inconclusive { reason: reason.clone() },
            ),
            report(Direction::RhsToLhs, DiamondStatus::Inconclusive { reason }),
        ]
    };
    if let Some(reason) = precondition(p) {
        return fail(reason.into());
    }
    let (lhs, rhs) = match enumerate_both(p, s, rel, b) {
        Ok(both) => both,
        Err(e) => return fail(e.to_string()),
    };
    let mut oracle = ClassOracle::new(p, *b);
    let forward = one_direction(&mut oracle, &lhs, &rhs);
    let backward = one_direction(&mut oracle, &rhs, &lhs);
    [
        report(Direction::LhsToRhs, forward),
        report(Direction::RhsToLhs, backward),
    ]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Complete,
    /// The diamond condition fails at the given report.
    Incomplete {
        witness: DiamondReport,
    },
    Inconclusive {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoetherianWitness {
    /// Every relation has sides of equal weight under the (positive) generator weights.
    pub homogeneous: bool,
    pub unbalanced: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletenessReport {
    /// In presentation order: generators, then relations, then both directions.
    pub reports: Vec<DiamondReport>,
    pub verdict: Verdict,
    pub noetherian: NoetherianWitness,
}

impl CompletenessReport {
    pub fn is_complete(&self) -> bool {
        self.verdict == Verdict::Complete
    }

    pub fn counterexamples(&self) -> impl Iterator<Item = &DiamondReport> {
        self.reports.iter().filter(|r| r.is_counterexample())
    }

    pub fn verdict_name(&self) -> &'static str {
        match self.verdict {
            Verdict::Complete => "complete",
            Verdict::Incomplete { .. } => "incomplete",
            Verdict::Inconclusive { .. } => "inconclusive",
        }
    }

    /// Verdict and counts without the per-pair list.
    pub fn summary_json(&self, p: &Presentation) -> Value {
        let mut out = json!({
            "verdict": self.verdict_name(),
            "pairs_checked": self.reports.len(),
            "verified": self.reports.iter().filter(|r| r.is_verified()).count(),
            "noetherian": {
                "weight_homogeneous": self.noetherian.homogeneous,
                "unbalanced_relations": self.noetherian.unbalanced,
            },
        });
        match &self.verdict {
            Verdict::Complete => {}
            Verdict::Incomplete { witness } => out["witness"] = witness.to_json(p),
            Verdict::Inconclusive { reason } => out["reason"] = json!(reason),
        }
        out
    }

    pub fn to_json(&self, p: &Presentation) -> Value {
        let mut out = self.summary_json(p);
        out["pairs"] = self.reports.iter().map(|r| r.to_json(p)).collect();
        out
    }
}

/// Runs the diamond check over every generator and relation and aggregates a verdict.
///
/// `Complete` needs every report verified and weight-homogeneity (the
/// noetherianity witness). Without homogeneity the verdict is `Inconclusive`,
/// and no checks run at all for presentations with ε-relations.
pub fn check_completeness(p: &Presentation, b: &Budget) -> CompletenessReport {
    let noetherian = NoetherianWitness {
        homogeneous: p.is_weight_homogeneous(),
        unbalanced: p.unbalanced_relations(),
    };
    if p.has_epsilon_relation() {
        return CompletenessReport {
            reports: Vec::new(),
            verdict: Verdict::Inconclusive {
                reason: "the presentation contains an ε-relation".into(),
            },
            noetherian,
        };
    }
    if !noetherian.homogeneous {
        let reports = p
            .alphabet()
            .flat_map(|s| {
                p.relations()
                    .iter()
                    .flat_map(move |rel| check_diamond_unchecked(p, s, rel, b))
            })
            .collect();
        return CompletenessReport {
            reports,
            verdict: Verdict::Inconclusive {
                reason: "no weight-homogeneity witness for termination".into(),
            },
            noetherian,
        };
    }
    let pairs: Vec<(Letter, &Relation)> = p
        .alphabet()
        .flat_map(|s| p.relations().iter().map(move |rel| (s, rel)))
        .collect();
    let reports: Vec<DiamondReport> = pairs
        .par_iter()
        .map(|&(s, rel)| check_diamond(p, s, rel, b))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let verdict = if let Some(bad) = reports.iter().find(|r| r.is_counterexample()) {
        Verdict::Incomplete { witness: bad.clone() }
    } else if let Some(open) = reports.iter().find(|r| !r.is_verified()) {
        let DiamondStatus::Inconclusive { reason } = &open.status else {
            unreachable!("neither verified nor counterexample")
        };
        Verdict::Inconclusive {
            reason: format!(
                "generator {}, relation {} ({}): {reason}",
                p.name(open.generator),
                open.relation,
                open.direction.as_str()
            ),
        }
    } else {
        Verdict::Complete
    };
    CompletenessReport {
        reports,
        verdict,
        noetherian,
    }
}

/// The diamond check without the homogeneity precondition, for diagnostics.
fn check_diamond_unchecked(p: &Presentation, s: Letter, rel: &Relation, b: &Budget) -> [DiamondReport; 2] {
    let report = |direction, status| DiamondReport {
        generator: s,
        relation: rel.index,
        direction,
        status,
    };
    match enumerate_both(p, s, rel, b) {
        Ok((lhs, rhs)) => {
            let mut oracle = ClassOracle::new(p, *b);
            [
                report(Direction::LhsToRhs, one_direction(&mut oracle, &lhs, &rhs)),
                report(Direction::RhsToLhs, one_direction(&mut oracle, &rhs, &lhs)),
            ]
        }
        Err(e) => [
            report(
                Direction::LhsToRhs,
                DiamondStatus::Inconclusive { reason: e.to_string() },
            ),
            report(
                Direction::RhsToLhs,
                DiamondStatus::Inconclusive { reason: e.to_string() },
            ),
        ],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReversingDecision {
    /// Some grid from `(u, v)` has target `(ε, ε)`.
    Reversible,
    /// The enumeration completed and no grid reaches `(ε, ε)`.
    NotReversible,
    BudgetExceeded,
}

impl ReversingDecision {
    pub fn as_bool(self) -> Option<bool> {
        match self {
            ReversingDecision::Reversible => Some(true),
            ReversingDecision::NotReversible => Some(false),
            ReversingDecision::BudgetExceeded => None,
        }
    }
}

/// Whether `(u, v)` reverses to `(ε, ε)`. This decides `u ≡ v` when reversing
/// is complete for the presentation.
pub fn decide_equiv_by_reversing(
    p: &Presentation,
    u: &[Letter],
    v: &[Letter],
    b: &Budget,
) -> Result<ReversingDecision, GridError> {
    let set = reversal_targets(p, u, v, b)?;
    Ok(match set.targets {
        None => ReversingDecision::BudgetExceeded,
        Some(targets) if targets.contains(&(Word::empty(), Word::empty())) => ReversingDecision::Reversible,
        Some(_) => ReversingDecision::NotReversible,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectValue {
    Finite(u32),
    /// Reversing is not complete; some grid has no equivalent partner.
    Infinite,
    /// A budget ran out.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefectWitness {
    pub generator: Letter,
    pub relation: usize,
    pub direction: Direction,
    pub grid: Grid,
    /// The closest equivalent grid from the other side, if any.
    pub partner: Option<Grid>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefectResult {
    pub value: DefectValue,
    pub witness: Option<DefectWitness>,
}

impl DefectResult {
    pub fn to_json(&self, p: &Presentation) -> Value {
        let value = match self.value {
            DefectValue::Finite(d) => json!(d),
            DefectValue::Infinite => json!("infinite"),
            DefectValue::Unknown => json!("unknown"),
        };
        let witness = self.witness.as_ref().map(|w| {
            json!({
                "generator": p.name(w.generator),
                "relation_index": w.relation,
                "direction": w.direction.as_str(),
                "grid": w.grid.to_json(p),
                "partner": w.partner.as_ref().map(|g| g.to_json(p)),
            })
        });
        json!({ "value": value, "witness": witness })
    }
}

/// Sum of the distances between corresponding target components.
pub fn grid_distance(oracle: &mut ClassOracle<'_>, a: &Grid, b: &Grid) -> Distance {
    let d0 = oracle.distance(&a.target.0, &b.target.0);
    let d1 = oracle.distance(&a.target.1, &b.target.1);
    match (d0, d1) {
        (Distance::Finite(x), Distance::Finite(y)) => Distance::Finite(x + y),
        (Distance::Infinite, _) | (_, Distance::Infinite) => Distance::Infinite,
        _ => Distance::Unknown,
    }
}

/// Largest (over generators, relations, directions and grids) of the smallest
/// distance to an equivalent grid from the other side.
fn pair_defect(
    p: &Presentation,
    s: Letter,
    rel: &Relation,
    b: &Budget,
) -> Result<Option<(u32, DefectWitness)>, DefectValue> {
    let (lhs, rhs) = enumerate_both(p, s, rel, b).map_err(|_| DefectValue::Unknown)?;
    if !lhs.is_completed() || !rhs.is_completed() {
        return Err(DefectValue::Unknown);
    }
    let mut oracle = ClassOracle::new(p, *b);
    let mut best: Option<(u32, DefectWitness)> = None;
    for (direction, from, to) in [(Direction::LhsToRhs, &lhs, &rhs), (Direction::RhsToLhs, &rhs, &lhs)] {
        for g in &from.grids {
            let mut closest: Option<(u32, &Grid)> = None;
            for h in &to.grids {
                match grid_distance(&mut oracle, g, h) {
                    Distance::Finite(d) => {
                        if closest.is_none_or(|(c, _)| d < c) {
                            closest = Some((d, h));
                        }
                    }
                    Distance::Infinite => {}
                    Distance::Unknown => return Err(DefectValue::Unknown),
                }
            }
            let Some((d, h)) = closest else {
                return Err(DefectValue::Infinite);
            };
            if best.as_ref().is_none_or(|(m, _)| d > *m) {
                best = Some((
                    d,
                    DefectWitness {
                        generator: s,
                        relation: rel.index,
                        direction,
                        grid: g.clone(),
                        partner: Some(h.clone()),
                    },
                ));
            }
        }
    }
    Ok(best)
}

/// The defect: defined when reversing is complete, `Infinite` when the
/// diamond condition fails, `Unknown` when a budget ran out.
pub fn defect(p: &Presentation, b: &Budget) -> DefectResult {
    let report = check_completeness(p, b);
    match report.verdict {
        Verdict::Complete => {}
        Verdict::Incomplete { witness } => {
            let DiamondStatus::Counterexample { grid, .. } = witness.status else {
                unreachable!("incomplete verdicts carry a counterexample")
            };
            return DefectResult {
                value: DefectValue::Infinite,
                witness: Some(DefectWitness {
                    generator: witness.generator,
                    relation: witness.relation,
                    direction: witness.direction,
                    grid,
                    partner: None,
                }),
            };
        }
        Verdict::Inconclusive { .. } => {
            return DefectResult {
                value: DefectValue::Unknown,
                witness: None,
            }
        }
    }
    let pairs: Vec<(Letter, &Relation)> = p
        .alphabet()
        .flat_map(|s| p.relations().iter().map(move |rel| (s, rel)))
        .collect();
    let results: Vec<_> = pairs.par_iter().map(|&(s, rel)| pair_defect(p, s, rel, b)).collect();
    let mut best: Option<(u32, DefectWitness)> = None;
    for r in results {
        match r {
            Err(value) => return DefectResult { value, witness: None },
            Ok(Some((d, w))) => {
                if best.as_ref().is_none_or(|(m, _)| d > *m) {
                    best = Some((d, w));
                }
            }
            Ok(None) => {}
        }
    }
    match best {
        Some((d, w)) => DefectResult {
            value: DefectValue::Finite(d),
            witness: Some(w),
        },
        None => DefectResult {
            value: DefectValue::Finite(0),
            witness: None,
        },
    }
}

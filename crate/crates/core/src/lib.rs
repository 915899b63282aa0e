//! Decision procedures for finitely presented monoids based on reversing grids.
//!
//! A [`Presentation`] is parsed from a small line-oriented text format or built
//! by one of the [`catalog`] constructors. On top of it the crate offers:
//!
//! - a breadth-first congruence oracle ([`oracle`]) giving exact equivalence
//!   classes and combinatorial distances,
//! - enumeration, replay, composition and rendering of reversing grids
//!   ([`reversing`]),
//! - the per-generator, per-relation diamond check and the resulting
//!   completeness verdict and defect ([`completeness`]),
//! - cancellativity verdicts and common right multiples / right lcms
//!   ([`cancellativity`]).
//!
//! Every procedure that may not terminate takes a [`Budget`]; running out of
//! budget is always reported as an explicit inconclusive status.

pub mod budget;
pub mod cancellativity;
pub mod catalog;
pub mod completeness;
pub mod oracle;
pub mod presentation;
pub mod reversing;

pub use budget::Budget;
pub use cancellativity::{
    check_left_cancellative, check_right_cancellative, common_right_multiple, common_right_multiple_with,
    has_total_lcm_shape, right_lcm, right_lcm_with, CancellativityStatus, CancellativityVerdict, LcmResult,
    MultipleResult, Side,
};
pub use completeness::{
    check_completeness, check_diamond, decide_equiv_by_reversing, defect, CompletenessReport, DefectResult,
    DefectValue, DefectWitness, DiamondReport, DiamondStatus, Direction, NoetherianWitness, ReversingDecision, Verdict,
};
pub use oracle::{
    are_equivalent, comb_distance, equivalence_class, ClassOracle, Distance, Equivalence, EquivalenceClass,
    EquivalenceOutcome,
};
pub use presentation::{
    parse_presentation, Diagnostic, Letter, ParseError, Presentation, PresentationError, Relation, Word,
};
pub use reversing::{
    check_grid_structure, compose_h, render_grid, reversal_targets, reverse_complemented, reverse_enumerate, split_h,
    tiles, validate_grid, Grid, GridError, GridFailure, GridValidation, Orientation, ReversalOutcome, ReversalStatus,
    Sym, TargetSet, Tile, TileKind,
};

//! Reversing grids.
//!
//! A grid is built from a source pair `(u, v)` (left edge `u`, top edge `v`)
//! by filling cells with elementary tiles until right and bottom edges are
//! reached. Edges carry symbols in `S ∪ {ε}`: cancellation tiles and relation
//! tiles with an empty output emit `ε` edges, and those must be crossed by
//! pass-through tiles like any other edge. Target words drop the `ε` symbols.
//!
//! Cells are filled in one canonical order: for `u = x·u'` and `v = y·v'`,
//! first the cell `(x, y)`, then the rest of the top strip from
//! `(right(x, y), v')`, then the lower block from `(u', bottom(x, y)·c)` where
//! `c` is the bottom of the top strip. A grid is identified with its list of
//! cells in that order (its trace), so equality and sorting of grids are
//! equality and sorting of traces.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::rc::Rc;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedSub};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::budget::Budget;
use crate::oracle::{are_equivalent, Equivalence, EquivalenceOutcome};
use crate::presentation::{Letter, Presentation, Word};

/// An edge label: a letter, or `None` for `ε`.
pub type Sym = Option<Letter>;

/// Which relation side starts with the tile's left letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    LhsLeft,
    RhsLeft,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TileKind {
    Relation { index: usize, orientation: Orientation },
    Cancel,
    PassLeft,
    PassTop,
    Empty,
}

/// One elementary piece. For a relation `s·t1…tq = t·s1…sp` with left `s`
/// and top `t`, the bottom is `t1…tq` and the right is `s1…sp` (a single `ε`
/// when empty).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Tile {
    pub kind: TileKind,
    pub left: Sym,
    pub top: Sym,
    pub right: Vec<Sym>,
    pub bottom: Vec<Sym>,
}

fn edge(word: &[Letter]) -> Vec<Sym> {
    if word.is_empty() {
        vec![None]
    } else {
        word.iter().copied().map(Some).collect()
    }
}

fn strip(syms: &[Sym]) -> Word {
    syms.iter().flatten().copied().collect()
}

fn lift(word: &[Letter]) -> Vec<Sym> {
    word.iter().copied().map(Some).collect()
}

/// The tile an `ε` input forces; `None` when both inputs are letters.
fn forced_tile(left: Sym, top: Sym) -> Option<Tile> {
    let (kind, right, bottom) = match (left, top) {
        (Some(_), Some(_)) => return None,
        (Some(s), None) => (TileKind::PassLeft, vec![Some(s)], vec![None]),
        (None, Some(t)) => (TileKind::PassTop, vec![None], vec![Some(t)]),
        (None, None) => (TileKind::Empty, vec![None], vec![None]),
    };
    Some(Tile {
        kind,
        left,
        top,
        right,
        bottom,
    })
}

/// All tiles applicable to a cell with the given left and top labels.
///
/// For two letters: the cancellation tile first when they coincide, then one
/// relation tile per relation and orientation whose left-starting side begins
/// with `left` and whose other side begins with `top`. An empty result means
/// the cell is stuck.
pub fn tiles(p: &Presentation, left: Sym, top: Sym) -> Vec<Tile> {
    let (Some(s), Some(t)) = (left, top) else {
        return forced_tile(left, top).into_iter().collect();
    };
    let mut out = Vec::new();
    if s == t {
        out.push(Tile {
            kind: TileKind::Cancel,
            left,
            top,
            right: vec![None],
            bottom: vec![None],
        });
    }
    for r in p.relations() {
        for orientation in [Orientation::LhsLeft, Orientation::RhsLeft] {
            let (s_side, t_side) = match orientation {
                Orientation::LhsLeft => (&r.lhs, &r.rhs),
                Orientation::RhsLeft => (&r.rhs, &r.lhs),
            };
            if s_side.first() == Some(&s) && t_side.first() == Some(&t) {
                out.push(Tile {
                    kind: TileKind::Relation {
                        index: r.index,
                        orientation,
                    },
                    left,
                    top,
                    right: edge(&t_side[1..]),
                    bottom: edge(&s_side[1..]),
                });
            }
        }
    }
    out
}

/// Every tile of a presentation, indexed by its input labels.
struct TileTable {
    n: usize,
    pairs: Vec<Vec<Tile>>,
    pass_left: Vec<Tile>,
    pass_top: Vec<Tile>,
    empty: Tile,
}

impl TileTable {
    fn new(p: &Presentation) -> Self {
        let n = p.generator_count();
        let mut pairs = Vec::with_capacity(n * n);
        for s in p.alphabet() {
            for t in p.alphabet() {
                pairs.push(tiles(p, Some(s), Some(t)));
            }
        }
        TileTable {
            n,
            pairs,
            pass_left: p.alphabet().map(|s| forced_tile(Some(s), None).unwrap()).collect(),
            pass_top: p.alphabet().map(|t| forced_tile(None, Some(t)).unwrap()).collect(),
            empty: forced_tile(None, None).unwrap(),
        }
    }

    fn get(&self, left: Sym, top: Sym) -> &[Tile] {
        match (left, top) {
            (Some(s), Some(t)) => &self.pairs[s.index() * self.n + t.index()],
            (Some(s), None) => std::slice::from_ref(&self.pass_left[s.index()]),
            (None, Some(t)) => std::slice::from_ref(&self.pass_top[t.index()]),
            (None, None) => std::slice::from_ref(&self.empty),
        }
    }
}

/// A reversing grid together with its trace of cells in canonical fill order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    pub source: (Word, Word),
    pub target: (Word, Word),
    pub cells: Vec<Tile>,
}

impl Grid {
    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    /// Number of cells filled by a relation tile.
    pub fn relation_cells(&self) -> usize {
        self.cells
            .iter()
            .filter(|c| matches!(c.kind, TileKind::Relation { .. }))
            .count()
    }

    /// JSON form: `{source, target, cells}` with words as token arrays and `ε`
    /// edge symbols spelled `1` inside cells.
    pub fn to_json(&self, p: &Presentation) -> Value {
        let sym = |s: &Sym| match s {
            Some(l) => p.name(*l).to_string(),
            None => "1".to_string(),
        };
        let cells: Vec<Value> = self
            .cells
            .iter()
            .map(|c| {
                let mut cell = json!({
                    "left": sym(&c.left),
                    "top": sym(&c.top),
                    "right": c.right.iter().map(sym).collect::<Vec<_>>(),
                    "bottom": c.bottom.iter().map(sym).collect::<Vec<_>>(),
                });
                let kind = match c.kind {
                    TileKind::Relation { index, orientation } => {
                        cell["rel_index"] = json!(index);
                        cell["orientation"] = json!(orientation);
                        "relation"
                    }
                    TileKind::Cancel => "cancel",
                    TileKind::PassLeft => "pass_left",
                    TileKind::PassTop => "pass_top",
                    TileKind::Empty => "empty",
                };
                cell["kind"] = json!(kind);
                cell
            })
            .collect();
        json!({
            "source": [p.tokens(&self.source.0), p.tokens(&self.source.1)],
            "target": [p.tokens(&self.target.0), p.tokens(&self.target.1)],
            "cells": cells,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("the presentation contains an ε-relation; reversing is undefined")]
    EpsilonRelation,
    #[error("the presentation is not right-complemented")]
    NotComplemented,
    #[error("letter id {0} is not in the alphabet")]
    UnknownLetter(u32),
    #[error("edge mismatch: {0}")]
    EdgeMismatch(String),
    #[error("split column {column} exceeds the top word length {len}")]
    SplitOutOfRange { column: usize, len: usize },
    #[error("cell {cell}: {reason}")]
    Replay { cell: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ReversalStatus {
    /// The branching search terminated; the grid list is exhaustive.
    Completed,
    /// A cell or grid bound was hit; `partial` counts partial grids assembled so far.
    BudgetExceeded { partial: usize },
}

/// All grids from a source pair.
///
/// `Completed` with no grids means every branch got stuck; `stuck` lists the
/// letter pairs for which no tile exists, which certifies the absence of grids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReversalOutcome {
    pub status: ReversalStatus,
    pub grids: Vec<Grid>,
    pub stuck: Vec<(Letter, Letter)>,
}

impl ReversalOutcome {
    pub fn is_completed(&self) -> bool {
        self.status == ReversalStatus::Completed
    }

    /// Completed, and no grid exists.
    pub fn is_stuck_only(&self) -> bool {
        self.is_completed() && self.grids.is_empty()
    }
}

fn check_input(p: &Presentation, words: &[&[Letter]]) -> Result<(), GridError> {
    if p.has_epsilon_relation() {
        return Err(GridError::EpsilonRelation);
    }
    for w in words {
        if let Some(l) = w.iter().find(|l| l.index() >= p.generator_count()) {
            return Err(GridError::UnknownLetter(l.0));
        }
    }
    Ok(())
}

/// Stack headroom for the recursive constructions; deep grids grow the stack on demand.
const RED_ZONE: usize = 128 * 1024;
const STACK_GROWTH: usize = 8 * 1024 * 1024;

#[derive(Debug)]
struct Exceeded;

struct Partial<'t> {
    right: Vec<Sym>,
    bottom: Vec<Sym>,
    cells: Vec<&'t Tile>,
}

type PartialMemo<'t> = HashMap<(Vec<Sym>, Vec<Sym>), Rc<Vec<Partial<'t>>>>;

struct Enumerator<'t> {
    table: &'t TileTable,
    budget: Budget,
    memo: PartialMemo<'t>,
    stuck: BTreeSet<(Letter, Letter)>,
    assembled: usize,
}

impl<'t> Enumerator<'t> {
    fn run(&mut self, u: &[Sym], v: &[Sym], depth: usize) -> Result<Rc<Vec<Partial<'t>>>, Exceeded> {
        stacker::maybe_grow(RED_ZONE, STACK_GROWTH, || self.run_inner(u, v, depth))
    }

    fn run_inner(&mut self, u: &[Sym], v: &[Sym], depth: usize) -> Result<Rc<Vec<Partial<'t>>>, Exceeded> {
        if u.is_empty() || v.is_empty() {
            return Ok(Rc::new(vec![Partial {
                right: u.to_vec(),
                bottom: v.to_vec(),
                cells: Vec::new(),
            }]));
        }
        // each nesting level adds a cell to the branch under construction
        if depth > self.budget.max_cells {
            return Err(Exceeded);
        }
        let key = (u.to_vec(), v.to_vec());
        if let Some(hit) = self.memo.get(&key) {
            return Ok(Rc::clone(hit));
        }
        let table = self.table;
        let candidates = table.get(u[0], v[0]);
        if candidates.is_empty() {
            if let (Some(s), Some(t)) = (u[0], v[0]) {
                self.stuck.insert((s, t));
            }
        }
        let mut out = Vec::new();
        for tile in candidates {
            let strip = self.run(&tile.right, &v[1..], depth + 1)?;
            for first in strip.iter() {
                let mut lower_top = tile.bottom.clone();
                lower_top.extend_from_slice(&first.bottom);
                let lower = self.run(&u[1..], &lower_top, depth + 1)?;
                for second in lower.iter() {
                    let size = 1 + first.cells.len() + second.cells.len();
                    if size > self.budget.max_cells {
                        return Err(Exceeded);
                    }
                    let mut cells = Vec::with_capacity(size);
                    cells.push(tile);
                    cells.extend_from_slice(&first.cells);
                    cells.extend_from_slice(&second.cells);
                    let mut right = first.right.clone();
                    right.extend_from_slice(&second.right);
                    out.push(Partial {
                        right,
                        bottom: second.bottom.clone(),
                        cells,
                    });
                    self.assembled += 1;
                    if out.len() > self.budget.max_grids {
                        return Err(Exceeded);
                    }
                }
            }
        }
        let out = Rc::new(out);
        self.memo.insert(key, Rc::clone(&out));
        Ok(out)
    }
}

/// Enumerates every grid from `(u, v)`, sorted by trace.
pub fn reverse_enumerate(
    p: &Presentation,
    u: &[Letter],
    v: &[Letter],
    b: &Budget,
) -> Result<ReversalOutcome, GridError> {
    check_input(p, &[u, v])?;
    let table = TileTable::new(p);
    let mut e = Enumerator {
        table: &table,
        budget: *b,
        memo: HashMap::new(),
        stuck: BTreeSet::new(),
        assembled: 0,
    };
    let result = e.run(&lift(u), &lift(v), 0);
    let stuck: Vec<_> = e.stuck.iter().copied().collect();
    let partials = match result {
        Ok(partials) => partials,
        Err(Exceeded) => {
            return Ok(ReversalOutcome {
                status: ReversalStatus::BudgetExceeded { partial: e.assembled },
                grids: Vec::new(),
                stuck,
            })
        }
    };
    let mut grids: Vec<Grid> = partials
        .iter()
        .map(|part| Grid {
            source: (Word::from(u), Word::from(v)),
            target: (strip(&part.right), strip(&part.bottom)),
            cells: part.cells.iter().map(|&t| t.clone()).collect(),
        })
        .collect();
    grids.sort_by(|a, b| a.cells.cmp(&b.cells));
    grids.dedup_by(|a, b| a.cells == b.cells);
    Ok(ReversalOutcome {
        status: ReversalStatus::Completed,
        grids,
        stuck,
    })
}

/// Targets of all grids from `(u, v)`, without building the grids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetSet {
    /// `None` when the budget ran out.
    pub targets: Option<BTreeSet<(Word, Word)>>,
    pub stuck: Vec<(Letter, Letter)>,
}

type Targets = Rc<Vec<(Vec<Letter>, Vec<Letter>)>>;

struct TargetEnumerator<'t> {
    table: &'t TileTable,
    budget: Budget,
    memo: HashMap<(Vec<Letter>, Vec<Letter>), Targets>,
    stuck: BTreeSet<(Letter, Letter)>,
}

impl TargetEnumerator<'_> {
    fn run(&mut self, u: &[Letter], v: &[Letter], depth: usize) -> Result<Targets, Exceeded> {
        stacker::maybe_grow(RED_ZONE, STACK_GROWTH, || self.run_inner(u, v, depth))
    }

    // Crossing an ε edge leaves every label unchanged, so working on stripped
    // words yields the same targets as the full construction.
    fn run_inner(&mut self, u: &[Letter], v: &[Letter], depth: usize) -> Result<Targets, Exceeded> {
        if u.is_empty() || v.is_empty() {
            return Ok(Rc::new(vec![(u.to_vec(), v.to_vec())]));
        }
        if depth > self.budget.max_cells {
            return Err(Exceeded);
        }
        let key = (u.to_vec(), v.to_vec());
        if let Some(hit) = self.memo.get(&key) {
            return Ok(Rc::clone(hit));
        }
        let table = self.table;
        let candidates = table.get(Some(u[0]), Some(v[0]));
        if candidates.is_empty() {
            self.stuck.insert((u[0], v[0]));
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for tile in candidates {
            let right: Vec<Letter> = tile.right.iter().flatten().copied().collect();
            let strip = self.run(&right, &v[1..], depth + 1)?;
            for (a1, c) in strip.iter() {
                let mut lower_top: Vec<Letter> = tile.bottom.iter().flatten().copied().collect();
                lower_top.extend_from_slice(c);
                let lower = self.run(&u[1..], &lower_top, depth + 1)?;
                for (u1, v1) in lower.iter() {
                    let mut right = a1.clone();
                    right.extend_from_slice(u1);
                    if right.len() + v1.len() > self.budget.max_cells.saturating_mul(4) {
                        return Err(Exceeded);
                    }
                    let target = (right, v1.clone());
                    if seen.insert(target.clone()) {
                        out.push(target);
                        if out.len() > self.budget.max_grids {
                            return Err(Exceeded);
                        }
                    }
                }
            }
        }
        let out = Rc::new(out);
        self.memo.insert(key, Rc::clone(&out));
        Ok(out)
    }
}

/// The set of targets `(u1, v1)` reachable from `(u, v)` by some grid.
///
/// `max_cells` bounds the nesting depth of the construction here, and
/// `max_grids` the number of distinct targets per step.
pub fn reversal_targets(p: &Presentation, u: &[Letter], v: &[Letter], b: &Budget) -> Result<TargetSet, GridError> {
    check_input(p, &[u, v])?;
    let table = TileTable::new(p);
    let mut e = TargetEnumerator {
        table: &table,
        budget: *b,
        memo: HashMap::new(),
        stuck: BTreeSet::new(),
    };
    let targets = e.run(u, v, 0).ok().map(|all| {
        all.iter()
            .map(|(a, c)| (Word::from(a.as_slice()), Word::from(c.as_slice())))
            .collect()
    });
    Ok(TargetSet {
        targets,
        stuck: e.stuck.into_iter().collect(),
    })
}

/// A top-edge symbol with the index of the region it descends from.
type Tagged = (Sym, u8);

struct Replay<'f> {
    choose: &'f mut dyn FnMut(usize, Sym, Sym, u8) -> Result<Tile, GridError>,
    cells: Vec<Tile>,
    tags: Vec<u8>,
    max_cells: usize,
}

impl Replay<'_> {
    fn run(&mut self, u: &[Sym], v: &[Tagged]) -> Result<(Vec<Sym>, Vec<Tagged>), GridError> {
        stacker::maybe_grow(RED_ZONE, STACK_GROWTH, || self.run_inner(u, v))
    }

    fn run_inner(&mut self, u: &[Sym], v: &[Tagged]) -> Result<(Vec<Sym>, Vec<Tagged>), GridError> {
        if u.is_empty() || v.is_empty() {
            return Ok((u.to_vec(), v.to_vec()));
        }
        let index = self.cells.len();
        if index >= self.max_cells {
            return Err(GridError::Replay {
                cell: index,
                reason: "cell bound exceeded".into(),
            });
        }
        let (top, tag) = v[0];
        let tile = (self.choose)(index, u[0], top, tag)?;
        if tile.left != u[0] || tile.top != top {
            return Err(GridError::Replay {
                cell: index,
                reason: "tile inputs do not match the edges reached".into(),
            });
        }
        self.cells.push(tile.clone());
        self.tags.push(tag);
        let (a1, c) = self.run(&tile.right, &v[1..])?;
        let mut lower_top: Vec<Tagged> = tile.bottom.iter().map(|&s| (s, tag)).collect();
        lower_top.extend(c);
        let (u1, v1) = self.run(&u[1..], &lower_top)?;
        let mut right = a1;
        right.extend(u1);
        Ok((right, v1))
    }
}

/// Rebuilds a grid from a source by asking `choose` for each cell's tile in canonical order.
fn replay_with(
    u: &[Letter],
    v: &[(Letter, u8)],
    max_cells: usize,
    choose: &mut dyn FnMut(usize, Sym, Sym, u8) -> Result<Tile, GridError>,
) -> Result<(Grid, Vec<u8>), GridError> {
    let mut r = Replay {
        choose,
        cells: Vec::new(),
        tags: Vec::new(),
        max_cells,
    };
    let top: Vec<Tagged> = v.iter().map(|&(l, t)| (Some(l), t)).collect();
    let (right, bottom) = r.run(&lift(u), &top)?;
    let bottom: Vec<Sym> = bottom.into_iter().map(|(s, _)| s).collect();
    let grid = Grid {
        source: (Word::from(u), v.iter().map(|&(l, _)| l).collect()),
        target: (strip(&right), strip(&bottom)),
        cells: r.cells,
    };
    Ok((grid, r.tags))
}

/// Deterministic reversing for right-complemented presentations: at most one grid.
pub fn reverse_complemented(
    p: &Presentation,
    u: &[Letter],
    v: &[Letter],
    b: &Budget,
) -> Result<ReversalOutcome, GridError> {
    check_input(p, &[u, v])?;
    if !p.is_right_complemented() {
        return Err(GridError::NotComplemented);
    }
    let table = TileTable::new(p);
    let mut stuck = None;
    let mut choose = |cell: usize, left: Sym, top: Sym, _: u8| {
        let options = table.get(left, top);
        debug_assert!(options.len() <= 1);
        match options.first() {
            Some(tile) => Ok(tile.clone()),
            None => {
                stuck = left.zip(top);
                Err(GridError::Replay {
                    cell,
                    reason: "stuck".into(),
                })
            }
        }
    };
    let top: Vec<(Letter, u8)> = v.iter().map(|&l| (l, 0)).collect();
    match replay_with(u, &top, b.max_cells, &mut choose) {
        Ok((grid, _)) => Ok(ReversalOutcome {
            status: ReversalStatus::Completed,
            grids: vec![grid],
            stuck: Vec::new(),
        }),
        Err(GridError::Replay { cell, .. }) => match stuck {
            Some(pair) => Ok(ReversalOutcome {
                status: ReversalStatus::Completed,
                grids: Vec::new(),
                stuck: vec![pair],
            }),
            None => Ok(ReversalOutcome {
                status: ReversalStatus::BudgetExceeded { partial: cell },
                grids: Vec::new(),
                stuck: Vec::new(),
            }),
        },
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridFailure {
    pub cell: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridValidation {
    pub valid: bool,
    /// First failing cell of the replay (or the trace end) when structurally invalid.
    pub failure: Option<GridFailure>,
    /// Oracle decision on `u·v1 ≡ v·u1`, run when the structure is valid.
    pub equivalence: Option<EquivalenceOutcome>,
}

/// Replays the trace against the presentation's tiles and checks the recorded target.
pub fn check_grid_structure(p: &Presentation, g: &Grid) -> Result<(), GridFailure> {
    let n = p.generator_count();
    if let Some(l) = g.source.0.iter().chain(g.source.1.iter()).find(|l| l.index() >= n) {
        return Err(GridFailure {
            cell: 0,
            reason: format!("letter id {} is not in the alphabet", l.0),
        });
    }
    let known = |s: &Sym| s.is_none_or(|l| l.index() < n);
    let table = TileTable::new(p);
    let mut choose = |cell: usize, left: Sym, top: Sym, _: u8| {
        let fail = |reason: &str| GridError::Replay {
            cell,
            reason: reason.to_string(),
        };
        let tile = g
            .cells
            .get(cell)
            .ok_or_else(|| fail("trace ends before the grid is complete"))?;
        if tile.left != left || tile.top != top {
            return Err(fail("tile inputs do not match the edges reached"));
        }
        if !known(&tile.left) || !known(&tile.top) || !table.get(left, top).contains(tile) {
            return Err(fail("tile is not a piece of this presentation"));
        }
        Ok(tile.clone())
    };
    let top: Vec<(Letter, u8)> = g.source.1.iter().map(|&l| (l, 0)).collect();
    let (rebuilt, _) = replay_with(&g.source.0, &top, g.cells.len(), &mut choose).map_err(|e| match e {
        GridError::Replay { cell, reason } => GridFailure { cell, reason },
        other => GridFailure {
            cell: 0,
            reason: other.to_string(),
        },
    })?;
    if rebuilt.cells.len() != g.cells.len() {
        return Err(GridFailure {
            cell: rebuilt.cells.len(),
            reason: "trace has cells beyond the completed grid".into(),
        });
    }
    if rebuilt.target != g.target {
        return Err(GridFailure {
            cell: g.cells.len(),
            reason: "recorded target differs from the replayed edges".into(),
        });
    }
    Ok(())
}

/// Structural replay plus the oracle check `u·v1 ≡ v·u1`.
pub fn validate_grid(p: &Presentation, g: &Grid, b: &Budget) -> GridValidation {
    if let Err(failure) = check_grid_structure(p, g) {
        return GridValidation {
            valid: false,
            failure: Some(failure),
            equivalence: None,
        };
    }
    let (u, v) = &g.source;
    let (u1, v1) = &g.target;
    let outcome = are_equivalent(p, &u.concat(v1), &v.concat(u1), b);
    GridValidation {
        valid: outcome.status != Equivalence::NotEquivalent,
        failure: None,
        equivalence: Some(outcome),
    }
}

fn tagged(v: &[Letter], tag: u8) -> impl Iterator<Item = (Letter, u8)> + '_ {
    v.iter().map(move |&l| (l, tag))
}

fn exhausted(rest: usize, what: &str) -> Result<(), GridError> {
    if rest == 0 {
        Ok(())
    } else {
        Err(GridError::EdgeMismatch(format!("{rest} unused cells in the {what}")))
    }
}

/// Horizontal composition: `g1` from `(u, v')` to `(u', v1')` and `g2` from
/// `(u', v'')` to `(u1, v1'')` give a grid from `(u, v'v'')` to `(u1, v1'v1'')`.
///
/// The result is rebuilt in canonical order: cells under `v'` come from `g1`,
/// letter cells under `v''` take `g2`'s choices in order, and the cells that
/// cross `ε` edges of `g1`'s right side are generated.
pub fn compose_h(g1: &Grid, g2: &Grid) -> Result<Grid, GridError> {
    if g1.target.0 != g2.source.0 {
        return Err(GridError::EdgeMismatch(
            "right edge of the first grid differs from the left edge of the second".into(),
        ));
    }
    let mut first = g1.cells.iter();
    let mut decisions = g2.cells.iter().filter(|c| c.left.is_some() && c.top.is_some());
    let mut choose = |cell: usize, left: Sym, top: Sym, tag: u8| {
        let next = if tag == 0 {
            first.next().cloned()
        } else {
            forced_tile(left, top).or_else(|| decisions.next().cloned())
        };
        next.ok_or_else(|| GridError::Replay {
            cell,
            reason: "trace ends before the grid is complete".into(),
        })
    };
    let top: Vec<(Letter, u8)> = tagged(&g1.source.1, 0).chain(tagged(&g2.source.1, 1)).collect();
    let (grid, _) = replay_with(&g1.source.0, &top, usize::MAX, &mut choose)?;
    exhausted(first.len(), "first grid")?;
    exhausted(decisions.count(), "second grid")?;
    let expected_bottom = g1.target.1.concat(&g2.target.1);
    if grid.target.0 != g2.target.0 || grid.target.1 != expected_bottom {
        return Err(GridError::EdgeMismatch(
            "composite target differs from the parts".into(),
        ));
    }
    Ok(grid)
}

/// Cuts a grid along the vertical line after the first `k` top letters; the
/// inverse of [`compose_h`].
pub fn split_h(g: &Grid, k: usize) -> Result<(Grid, Grid), GridError> {
    let (u, v) = &g.source;
    if k > v.len() {
        return Err(GridError::SplitOutOfRange {
            column: k,
            len: v.len(),
        });
    }
    let mut all = g.cells.iter();
    let mut choose = |cell: usize, _: Sym, _: Sym, _: u8| {
        all.next().cloned().ok_or_else(|| GridError::Replay {
            cell,
            reason: "trace ends before the grid is complete".into(),
        })
    };
    let top: Vec<(Letter, u8)> = tagged(&v[..k], 0).chain(tagged(&v[k..], 1)).collect();
    let (full, tags) = replay_with(u, &top, g.cells.len().max(1), &mut choose)?;
    exhausted(all.len(), "grid")?;
    let mut left_cells = Vec::new();
    let mut right_cells = Vec::new();
    for (cell, tag) in full.cells.into_iter().zip(tags) {
        if tag == 0 {
            left_cells.push(cell);
        } else if cell.left.is_some() && cell.top.is_some() {
            right_cells.push(cell);
        }
    }

    let mut left_iter = left_cells.into_iter();
    let mut choose_left = |cell: usize, _: Sym, _: Sym, _: u8| {
        left_iter.next().ok_or_else(|| GridError::Replay {
            cell,
            reason: "left part ends early".into(),
        })
    };
    let (g1, _) = replay_with(u, &tagged(&v[..k], 0).collect::<Vec<_>>(), usize::MAX, &mut choose_left)?;
    exhausted(left_iter.len(), "left part")?;

    let mut right_iter = right_cells.into_iter();
    let mut choose_right = |cell: usize, left: Sym, top: Sym, _: u8| {
        forced_tile(left, top)
            .or_else(|| right_iter.next())
            .ok_or_else(|| GridError::Replay {
                cell,
                reason: "right part ends early".into(),
            })
    };
    let (g2, _) = replay_with(
        &g1.target.0,
        &tagged(&v[k..], 1).collect::<Vec<_>>(),
        usize::MAX,
        &mut choose_right,
    )?;
    exhausted(right_iter.len(), "right part")?;
    if g2.target.0 != g.target.0 || g1.target.1.concat(&g2.target.1) != g.target.1 {
        return Err(GridError::EdgeMismatch("parts do not reassemble the grid".into()));
    }
    Ok((g1, g2))
}

type Q = Ratio<i128>;

/// A vertical edge at `x` spanning `[y0, y1]`, or a horizontal one at `y`
/// spanning `[x0, x1]`: `(label, fixed, from, to)`.
type Seg = (Sym, Q, Q, Q);

struct Layout<'g> {
    cells: &'g [Tile],
    next: usize,
    vertical: Vec<Seg>,
    horizontal: Vec<Seg>,
}

/// Splits `[a, b]` into `parts` equal pieces, `None` on arithmetic overflow.
fn subdivide(a: Q, b: Q, parts: usize) -> Option<Vec<(Q, Q)>> {
    let step = b.checked_sub(&a)?.checked_div(&Q::from_integer(parts as i128))?;
    let mut out = Vec::with_capacity(parts);
    let mut lo = a;
    for i in 0..parts {
        let hi = if i + 1 == parts { b } else { lo.checked_add(&step)? };
        out.push((lo, hi));
        lo = hi;
    }
    Some(out)
}

impl Layout<'_> {
    fn run(&mut self, u: &[Seg], v: &[Seg]) -> Option<(Vec<Seg>, Vec<Seg>)> {
        stacker::maybe_grow(RED_ZONE, STACK_GROWTH, || self.run_inner(u, v))
    }

    fn run_inner(&mut self, u: &[Seg], v: &[Seg]) -> Option<(Vec<Seg>, Vec<Seg>)> {
        if u.is_empty() || v.is_empty() {
            return Some((u.to_vec(), v.to_vec()));
        }
        let tile = self.cells.get(self.next)?;
        self.next += 1;
        let (_, x, y0, y1) = u[0];
        let (_, _, x0, x1) = v[0];
        debug_assert_eq!(x, x0);
        let right: Vec<Seg> = subdivide(y0, y1, tile.right.len())?
            .into_iter()
            .zip(&tile.right)
            .map(|((a, b), &s)| (s, x1, a, b))
            .collect();
        let bottom: Vec<Seg> = subdivide(x0, x1, tile.bottom.len())?
            .into_iter()
            .zip(&tile.bottom)
            .map(|((a, b), &s)| (s, y1, a, b))
            .collect();
        self.vertical.extend_from_slice(&right);
        self.horizontal.extend_from_slice(&bottom);
        let (a1, c) = self.run(&right, &v[1..])?;
        let mut lower_top = bottom;
        lower_top.extend(c);
        let (u1, v1) = self.run(&u[1..], &lower_top)?;
        let mut out = a1;
        out.extend(u1);
        Some((out, v1))
    }
}

/// Grids above this size are listed rather than drawn.
const DRAW_LIMIT: usize = 400;

/// Text rendering: an ASCII drawing of the grid (top word along the top edge,
/// left word down the left edge, tile outputs subdividing edges), a summary
/// line, and the list of cells in canonical order.
pub fn render_grid(p: &Presentation, g: &Grid) -> String {
    let label = |s: &Sym| match s {
        Some(l) => p.name(*l).to_string(),
        None => "ε".to_string(),
    };
    let mut out = String::new();
    if g.cells.len() <= DRAW_LIMIT {
        if let Some(drawing) = draw(g, &label) {
            out.push_str(&drawing);
        }
    }
    out.push_str(&format!(
        "({}, {}) -> ({}, {})  [{} cells]\n",
        p.format_word(&g.source.0),
        p.format_word(&g.source.1),
        p.format_word(&g.target.0),
        p.format_word(&g.target.1),
        g.cells.len()
    ));
    for (i, c) in g.cells.iter().enumerate() {
        let kind = match c.kind {
            TileKind::Relation { index, orientation } => {
                let side = match orientation {
                    Orientation::LhsLeft => "lhs",
                    Orientation::RhsLeft => "rhs",
                };
                format!("relation {index} ({side} on the left)")
            }
            TileKind::Cancel => "cancel".into(),
            TileKind::PassLeft => "pass left".into(),
            TileKind::PassTop => "pass top".into(),
            TileKind::Empty => "empty".into(),
        };
        let join = |syms: &[Sym]| syms.iter().map(&label).collect::<Vec<_>>().join(" ");
        out.push_str(&format!(
            "  {:>3}. left {} top {}: {kind}; right {}, bottom {}\n",
            i + 1,
            label(&c.left),
            label(&c.top),
            join(&c.right),
            join(&c.bottom),
        ));
    }
    out
}

fn draw(g: &Grid, label: &dyn Fn(&Sym) -> String) -> Option<String> {
    let zero = Q::from_integer(0);
    let int = |i: usize| Q::from_integer(i as i128);
    let sides = |w: &Word| -> Vec<Sym> {
        if w.is_empty() {
            vec![None]
        } else {
            lift(w)
        }
    };
    let (u, v) = (sides(&g.source.0), sides(&g.source.1));
    let left: Vec<Seg> = u
        .iter()
        .enumerate()
        .map(|(i, &s)| (s, zero, int(i), int(i + 1)))
        .collect();
    let top: Vec<Seg> = v
        .iter()
        .enumerate()
        .map(|(i, &s)| (s, zero, int(i), int(i + 1)))
        .collect();
    let mut layout = Layout {
        cells: &g.cells,
        next: 0,
        vertical: left.clone(),
        horizontal: top.clone(),
    };
    if g.source.0.is_empty() || g.source.1.is_empty() {
        // no cells: the sides are carried straight across
        let (w, h) = (int(v.len()), int(u.len()));
        layout.vertical.extend(left.iter().map(|&(s, _, a, b)| (s, w, a, b)));
        layout.horizontal.extend(top.iter().map(|&(s, _, a, b)| (s, h, a, b)));
    } else {
        layout.run(&left, &top)?;
        if layout.next != g.cells.len() {
            return None;
        }
    }

    let mut xs: Vec<Q> = layout.vertical.iter().map(|s| s.1).collect();
    xs.extend(layout.horizontal.iter().flat_map(|s| [s.2, s.3]));
    xs.sort();
    xs.dedup();
    let mut ys: Vec<Q> = layout.horizontal.iter().map(|s| s.1).collect();
    ys.extend(layout.vertical.iter().flat_map(|s| [s.2, s.3]));
    ys.sort();
    ys.dedup();
    let xi = |x: &Q| xs.binary_search(x).expect("known coordinate");
    let yi = |y: &Q| ys.binary_search(y).expect("known coordinate");
    let width = |s: &Sym| label(s).chars().count();

    // constraints col[b] - col[a] >= need, with a < b
    let mut needs: Vec<Vec<(usize, usize)>> = vec![Vec::new(); xs.len()];
    for (s, _, x0, x1) in &layout.horizontal {
        needs[xi(x1)].push((xi(x0), width(s) + 3));
    }
    let mut margin = 0;
    for (s, x, y0, _) in &layout.vertical {
        let row = yi(y0);
        let next_line = layout
            .vertical
            .iter()
            .filter(|o| o.1 > *x && o.2 <= ys[row] && o.3 >= ys[row + 1])
            .map(|o| o.1)
            .min();
        match next_line {
            Some(x2) => needs[xi(&x2)].push((xi(x), width(s) + 3)),
            None => margin = margin.max(width(s) + 2),
        }
    }
    let mut col = vec![0usize; xs.len()];
    for i in 1..xs.len() {
        col[i] = col[i - 1] + 2;
        for &(a, need) in &needs[i] {
            col[i] = col[i].max(col[a] + need);
        }
    }
    let row = |y: &Q| 2 * yi(y);
    let mut canvas = vec![vec![' '; col[xs.len() - 1] + 1 + margin]; 2 * ys.len() - 1];

    for (_, y, x0, x1) in &layout.horizontal {
        let r = row(y);
        for ch in &mut canvas[r][col[xi(x0)]..=col[xi(x1)]] {
            if *ch == ' ' {
                *ch = '-';
            }
        }
    }
    for (_, x, y0, y1) in &layout.vertical {
        let c = col[xi(x)];
        for line in &mut canvas[row(y0)..=row(y1)] {
            if line[c] == ' ' {
                line[c] = '|';
            }
        }
    }
    for (_, y, x0, x1) in &layout.horizontal {
        canvas[row(y)][col[xi(x0)]] = '+';
        canvas[row(y)][col[xi(x1)]] = '+';
    }
    for (_, x, y0, y1) in &layout.vertical {
        canvas[row(y0)][col[xi(x)]] = '+';
        canvas[row(y1)][col[xi(x)]] = '+';
    }
    for (s, y, x0, x1) in &layout.horizontal {
        let text: Vec<char> = label(s).chars().collect();
        let (a, b) = (col[xi(x0)], col[xi(x1)]);
        let start = a + 1 + (b - a - 1 - text.len()) / 2;
        canvas[row(y)][start..start + text.len()].copy_from_slice(&text);
    }
    for (s, x, y0, _) in &layout.vertical {
        let text: Vec<char> = label(s).chars().collect();
        let start = col[xi(x)] + 2;
        canvas[row(y0) + 1][start..start + text.len()].copy_from_slice(&text);
    }
    let mut out = String::new();
    for line in canvas {
        let line: String = line.into_iter().collect();
        out.push_str(line.trim_end());
        out.push('\n');
    }
    Some(out)
}

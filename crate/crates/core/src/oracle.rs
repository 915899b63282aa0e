//! Breadth-first exploration of the congruence generated by a presentation.
//!
//! A single step replaces one occurrence of a relation side by the other side,
//! at any position and in either orientation. Classes of weight-homogeneous
//! presentations are finite, so exploring them exhaustively gives exact
//! equivalence decisions and exact combinatorial distances.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::presentation::{Letter, Presentation, Word};

/// Single-step rewriting with every relation in both orientations.
#[derive(Debug, Clone)]
pub(crate) struct Rewriter {
    rules: Vec<(Vec<Letter>, Vec<Letter>)>,
    by_first: Vec<Vec<usize>>,
    insertions: Vec<usize>,
}

impl Rewriter {
    pub(crate) fn new(p: &Presentation) -> Self {
        let mut rules = Vec::new();
        for r in p.relations() {
            rules.push((r.lhs.to_vec(), r.rhs.to_vec()));
            rules.push((r.rhs.to_vec(), r.lhs.to_vec()));
        }
        let mut by_first = vec![Vec::new(); p.generator_count()];
        let mut insertions = Vec::new();
        for (i, (from, _)) in rules.iter().enumerate() {
            match from.first() {
                Some(l) => by_first[l.index()].push(i),
                None => insertions.push(i),
            }
        }
        Rewriter {
            rules,
            by_first,
            insertions,
        }
    }

    pub(crate) fn for_each_neighbor(&self, w: &[Letter], mut f: impl FnMut(Vec<Letter>)) {
        for i in 0..w.len() {
            for &ri in &self.by_first[w[i].index()] {
                let (from, to) = &self.rules[ri];
                if w[i..].starts_with(from) {
                    let mut next = Vec::with_capacity(w.len() - from.len() + to.len());
                    next.extend_from_slice(&w[..i]);
                    next.extend_from_slice(to);
                    next.extend_from_slice(&w[i + from.len()..]);
                    f(next);
                }
            }
        }
        for &ri in &self.insertions {
            let to = &self.rules[ri].1;
            for i in 0..=w.len() {
                let mut next = Vec::with_capacity(w.len() + to.len());
                next.extend_from_slice(&w[..i]);
                next.extend_from_slice(to);
                next.extend_from_slice(&w[i..]);
                f(next);
            }
        }
    }
}

/// Result of [`equivalence_class`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceClass {
    pub class: BTreeSet<Word>,
    /// The closure reached a fixed point within budget.
    pub complete: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Equivalence {
    Equivalent { distance: u32 },
    NotEquivalent,
    BudgetExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceOutcome {
    pub status: Equivalence,
    /// Number of distinct words visited.
    pub explored: usize,
}

impl EquivalenceOutcome {
    pub fn is_equivalent(&self) -> bool {
        matches!(self.status, Equivalence::Equivalent { .. })
    }

    pub fn distance(&self) -> Distance {
        match self.status {
            Equivalence::Equivalent { distance } => Distance::Finite(distance),
            Equivalence::NotEquivalent => Distance::Infinite,
            Equivalence::BudgetExhausted => Distance::Unknown,
        }
    }
}

/// A combinatorial distance, `Infinite` for inequivalent words.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    Finite(u32),
    Infinite,
    /// The budget ran out before the distance was decided.
    Unknown,
}

fn weight_limit(p: &Presentation, b: &Budget, inputs: &[&[Letter]]) -> u64 {
    inputs
        .iter()
        .map(|w| p.word_weight(w))
        .max()
        .unwrap_or(0)
        .max(b.max_word_weight)
}

/// Breadth-first closure of `{w}` under single relation applications.
pub fn equivalence_class(p: &Presentation, w: &[Letter], b: &Budget) -> EquivalenceClass {
    let rw = Rewriter::new(p);
    let (class, complete) = explore_class(p, &rw, w, b);
    EquivalenceClass {
        class: class.into_keys().map(Word::from).collect(),
        complete,
    }
}

/// Distances from `w` to every visited word of its class.
fn explore_class(p: &Presentation, rw: &Rewriter, w: &[Letter], b: &Budget) -> (HashMap<Vec<Letter>, u32>, bool) {
    let limit = weight_limit(p, b, &[w]);
    let mut dist = HashMap::new();
    dist.insert(w.to_vec(), 0u32);
    let mut queue = VecDeque::from([w.to_vec()]);
    let mut complete = true;
    while let Some(cur) = queue.pop_front() {
        let d = dist[&cur];
        let mut overflow = false;
        rw.for_each_neighbor(&cur, |next| {
            if overflow || dist.contains_key(&next) {
                return;
            }
            if p.word_weight(&next) > limit || dist.len() >= b.max_class_size {
                overflow = true;
                return;
            }
            dist.insert(next.clone(), d + 1);
            queue.push_back(next);
        });
        if overflow {
            complete = false;
            break;
        }
    }
    (dist, complete)
}

/// Bidirectional breadth-first search; `Equivalent` carries the exact distance.
pub fn are_equivalent(p: &Presentation, u: &[Letter], v: &[Letter], b: &Budget) -> EquivalenceOutcome {
    let rw = Rewriter::new(p);
    bidirectional(p, &rw, u, v, b)
}

pub(crate) fn bidirectional(
    p: &Presentation,
    rw: &Rewriter,
    u: &[Letter],
    v: &[Letter],
    b: &Budget,
) -> EquivalenceOutcome {
    if u == v {
        return EquivalenceOutcome {
            status: Equivalence::Equivalent { distance: 0 },
            explored: 1,
        };
    }
    let limit = weight_limit(p, b, &[u, v]);
    let mut sides = [Side::new(u.to_vec()), Side::new(v.to_vec())];
    loop {
        let explored = sides[0].dist.len() + sides[1].dist.len();
        // Expand the side with the smaller frontier by one full layer.
        let which = if sides[0].frontier.len() <= sides[1].frontier.len() {
            0
        } else {
            1
        };
        let [a, c] = &mut sides;
        let (this, other) = if which == 0 { (a, &*c) } else { (c, &*a) };
        if this.frontier.is_empty() {
            return EquivalenceOutcome {
                status: Equivalence::NotEquivalent,
                explored,
            };
        }
        let depth = this.depth + 1;
        let mut next_frontier = Vec::new();
        let mut best: Option<u32> = None;
        let mut overflow = false;
        for cur in std::mem::take(&mut this.frontier) {
            rw.for_each_neighbor(&cur, |next| {
                if overflow || this.dist.contains_key(&next) {
                    return;
                }
                if p.word_weight(&next) > limit || this.dist.len() + other.dist.len() >= b.max_class_size {
                    overflow = true;
                    return;
                }
                if let Some(&d) = other.dist.get(&next) {
                    let total = depth + d;
                    best = Some(best.map_or(total, |x| x.min(total)));
                }
                this.dist.insert(next.clone(), depth);
                next_frontier.push(next);
            });
            if overflow {
                break;
            }
        }
        this.depth = depth;
        this.frontier = next_frontier;
        let explored = this.dist.len() + other.dist.len();
        if let Some(distance) = best {
            return EquivalenceOutcome {
                status: Equivalence::Equivalent { distance },
                explored,
            };
        }
        if overflow {
            return EquivalenceOutcome {
                status: Equivalence::BudgetExhausted,
                explored,
            };
        }
    }
}

struct Side {
    dist: HashMap<Vec<Letter>, u32>,
    frontier: Vec<Vec<Letter>>,
    depth: u32,
}

impl Side {
    fn new(start: Vec<Letter>) -> Self {
        let mut dist = HashMap::new();
        dist.insert(start.clone(), 0);
        Side {
            dist,
            frontier: vec![start],
            depth: 0,
        }
    }
}

/// Minimal number of relation applications from `u` to `v`.
pub fn comb_distance(p: &Presentation, u: &[Letter], v: &[Letter], b: &Budget) -> Distance {
    are_equivalent(p, u, v, b).distance()
}

/// Breadth-first distances from one word, and whether the search finished.
type DistanceTable = (HashMap<Vec<Letter>, u32>, bool);

/// Memoizing oracle for repeated queries against one presentation.
///
/// Every fully enumerated class gets an id shared by all its members, so
/// later equivalence queries on any member are lookups.
pub struct ClassOracle<'p> {
    p: &'p Presentation,
    rw: Rewriter,
    budget: Budget,
    class_ids: HashMap<Vec<Letter>, usize>,
    incomplete: HashSet<Vec<Letter>>,
    distances: HashMap<Vec<Letter>, DistanceTable>,
    classes: usize,
}

impl<'p> ClassOracle<'p> {
    pub fn new(p: &'p Presentation, budget: Budget) -> Self {
        ClassOracle {
            p,
            rw: Rewriter::new(p),
            budget,
            class_ids: HashMap::new(),
            incomplete: HashSet::new(),
            distances: HashMap::new(),
            classes: 0,
        }
    }

    /// Identifier of the class of `w`, or `None` when the class exceeds the budget.
    pub fn class_id(&mut self, w: &[Letter]) -> Option<usize> {
        if let Some(&id) = self.class_ids.get(w) {
            return Some(id);
        }
        if self.incomplete.contains(w) {
            return None;
        }
        let (class, complete) = explore_class(self.p, &self.rw, w, &self.budget);
        if !complete {
            self.incomplete.insert(w.to_vec());
            return None;
        }
        let id = self.classes;
        self.classes += 1;
        for word in class.into_keys() {
            self.class_ids.insert(word, id);
        }
        Some(id)
    }

    pub fn equivalent(&mut self, u: &[Letter], v: &[Letter]) -> Option<bool> {
        if u == v {
            return Some(true);
        }
        Some(self.class_id(u)? == self.class_id(v)?)
    }

    /// Exact distance, computed from a cached breadth-first layer map rooted at `u`.
    pub fn distance(&mut self, u: &[Letter], v: &[Letter]) -> Distance {
        if u == v {
            return Distance::Finite(0);
        }
        if !self.distances.contains_key(u) {
            let explored = explore_class(self.p, &self.rw, u, &self.budget);
            self.distances.insert(u.to_vec(), explored);
        }
        let (dist, complete) = &self.distances[u];
        match dist.get(v) {
            Some(&d) => Distance::Finite(d),
            None if *complete => Distance::Infinite,
            // Breadth-first layers are only exact up to the last full layer.
            None => Distance::Unknown,
        }
    }

    pub fn presentation(&self) -> &'p Presentation {
        self.p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn w(p: &Presentation, s: &str) -> Word {
        p.parse_word(s).unwrap()
    }

    #[test]
    fn braid_class_of_length_three() {
        let p = catalog::braid(4).unwrap();
        let c = equivalence_class(&p, &w(&p, "s1 s2 s1"), &Budget::default());
        assert!(c.complete);
        let expected: BTreeSet<Word> = [w(&p, "s1 s2 s1"), w(&p, "s2 s1 s2")].into();
        assert_eq!(c.class, expected);
    }

    #[test]
    fn empty_word_class_is_singleton() {
        let p = catalog::malcev();
        let c = equivalence_class(&p, &[], &Budget::default());
        assert!(c.complete);
        assert_eq!(c.class.len(), 1);
    }

    #[test]
    fn distances_in_braid() {
        let p = catalog::braid(4).unwrap();
        let b = Budget::default();
        let e = are_equivalent(&p, &w(&p, "s1 s2 s1"), &w(&p, "s2 s1 s2"), &b);
        assert_eq!(e.status, Equivalence::Equivalent { distance: 1 });
        assert_eq!(
            comb_distance(&p, &w(&p, "s1 s3"), &w(&p, "s3 s1"), &b),
            Distance::Finite(1)
        );
        assert_eq!(
            comb_distance(&p, &w(&p, "s1 s3"), &w(&p, "s1 s3"), &b),
            Distance::Finite(0)
        );
        assert_eq!(
            comb_distance(&p, &w(&p, "s1 s2 s1"), &w(&p, "s1 s3 s1"), &b),
            Distance::Infinite
        );
    }

    #[test]
    fn exhausted_budget_is_explicit() {
        let p = catalog::braid(4).unwrap();
        let tight = Budget {
            max_class_size: 3,
            ..Budget::default()
        };
        // the class of s1 s2 s1 s3 s2 s1 has 16 elements
        let u = w(&p, "s1 s2 s1 s3 s2 s1");
        let v = w(&p, "s3 s2 s3 s1 s2 s3");
        assert_eq!(are_equivalent(&p, &u, &v, &tight).status, Equivalence::BudgetExhausted);
        assert!(!equivalence_class(&p, &u, &tight).complete);
    }

    #[test]
    fn non_homogeneous_growth_hits_weight_bound() {
        let p = crate::parse_presentation("gens: a b\nrel: a = a b").unwrap();
        let b = Budget {
            max_word_weight: 6,
            ..Budget::default()
        };
        let c = equivalence_class(&p, &w(&p, "a"), &b);
        assert!(!c.complete);
        assert!(c.class.iter().all(|x| x.len() <= 6));
        assert_eq!(
            are_equivalent(&p, &w(&p, "a"), &w(&p, "b"), &b).status,
            Equivalence::BudgetExhausted
        );
    }

    #[test]
    fn class_oracle_matches_direct_queries() {
        let p = catalog::braid(4).unwrap();
        let mut o = ClassOracle::new(&p, Budget::default());
        let u = w(&p, "s1 s2 s3 s1");
        let v = w(&p, "s2 s1 s2 s3");
        let direct = are_equivalent(&p, &u, &v, &Budget::default());
        assert_eq!(o.equivalent(&u, &v), Some(direct.is_equivalent()));
        assert_eq!(o.distance(&u, &v), direct.distance());
    }
}

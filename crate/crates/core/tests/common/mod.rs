//! Reference implementations used to cross-check the library.
//!
//! They share nothing with the crate beyond the presentation type: reversing
//! is done by rewriting signed words, and congruence questions by plain
//! breadth-first search with a linear scan of the relations.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;
use reversal_core::{catalog, Letter, Presentation, Word};

/// A letter or its formal inverse.
type Signed = (Letter, bool);

/// Targets `(u1, v1)` of all terminal words reachable from `u⁻¹ v` by
/// rewriting `x⁻¹ y` into `b a⁻¹` for relations `x a = y b`, and `x⁻¹ x` into
/// the empty word. `None` when more than `limit` signed words are visited.
pub fn signed_targets(p: &Presentation, u: &[Letter], v: &[Letter], limit: usize) -> Option<BTreeSet<(Word, Word)>> {
    let start: Vec<Signed> = u
        .iter()
        .rev()
        .map(|&l| (l, false))
        .chain(v.iter().map(|&l| (l, true)))
        .collect();
    let mut seen = HashSet::from([start.clone()]);
    let mut stack = vec![start];
    let mut out = BTreeSet::new();
    while let Some(word) = stack.pop() {
        let mut terminal = true;
        for i in 0..word.len().saturating_sub(1) {
            let ((x, xp), (y, yp)) = (word[i], word[i + 1]);
            if xp || !yp {
                continue;
            }
            terminal = false;
            let mut replacements: Vec<Vec<Signed>> = Vec::new();
            if x == y {
                replacements.push(Vec::new());
            }
            for r in p.relations() {
                for (a, b) in [(&r.lhs, &r.rhs), (&r.rhs, &r.lhs)] {
                    if a.first() == Some(&x) && b.first() == Some(&y) {
                        let mut rep: Vec<Signed> = a[1..].iter().map(|&l| (l, true)).collect();
                        rep.extend(b[1..].iter().rev().map(|&l| (l, false)));
                        replacements.push(rep);
                    }
                }
            }
            for rep in replacements {
                let mut next = word[..i].to_vec();
                next.extend(rep);
                next.extend_from_slice(&word[i + 2..]);
                if seen.insert(next.clone()) {
                    if seen.len() > limit {
                        return None;
                    }
                    stack.push(next);
                }
            }
        }
        if terminal {
            let split = word.iter().position(|&(_, pos)| !pos).unwrap_or(word.len());
            let v1: Word = word[..split].iter().map(|&(l, _)| l).collect();
            let u1: Word = word[split..].iter().rev().map(|&(l, _)| l).collect();
            out.insert((u1, v1));
        }
    }
    Some(out)
}

fn neighbors(p: &Presentation, w: &[Letter]) -> Vec<Vec<Letter>> {
    let mut out = Vec::new();
    for r in p.relations() {
        for (from, to) in [(&r.lhs, &r.rhs), (&r.rhs, &r.lhs)] {
            if from.len() > w.len() {
                continue;
            }
            for i in 0..=w.len() - from.len() {
                if w[i..i + from.len()] == from[..] {
                    let mut next = w[..i].to_vec();
                    next.extend_from_slice(to);
                    next.extend_from_slice(&w[i + from.len()..]);
                    out.push(next);
                }
            }
        }
    }
    out
}

/// The congruence class of `w` for a presentation without ε-relations whose
/// relations preserve length.
pub fn naive_class(p: &Presentation, w: &[Letter]) -> BTreeSet<Word> {
    let mut seen = HashSet::from([w.to_vec()]);
    let mut stack = vec![w.to_vec()];
    while let Some(cur) = stack.pop() {
        for n in neighbors(p, &cur) {
            if seen.insert(n.clone()) {
                stack.push(n);
            }
        }
    }
    seen.into_iter().map(Word::from).collect()
}

/// Breadth-first distance; `None` when `v` is not in the (finite) class of `u`.
pub fn naive_distance(p: &Presentation, u: &[Letter], v: &[Letter]) -> Option<u32> {
    let mut dist = HashMap::from([(u.to_vec(), 0u32)]);
    let mut queue = VecDeque::from([u.to_vec()]);
    while let Some(cur) = queue.pop_front() {
        let d = dist[&cur];
        if cur == v {
            return Some(d);
        }
        for n in neighbors(p, &cur) {
            if !dist.contains_key(&n) {
                dist.insert(n.clone(), d + 1);
                queue.push_back(n);
            }
        }
    }
    None
}

/// Every word of exactly `len` letters, in lexicographic order of letter ids.
pub fn all_words(p: &Presentation, len: usize) -> Vec<Word> {
    let letters: Vec<Letter> = p.alphabet().collect();
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w: Vec<Letter>| {
                letters.iter().map(move |&l| {
                    let mut next = w.clone();
                    next.push(l);
                    next
                })
            })
            .collect();
    }
    out.into_iter().map(Word::from).collect()
}

pub fn random_word(p: &Presentation, rng: &mut impl Rng, len: usize) -> Word {
    let letters: Vec<Letter> = p.alphabet().collect();
    (0..len).map(|_| *letters.choose(rng).unwrap()).collect()
}

/// A random word together with a random member of its class.
pub fn random_equivalent_pair(p: &Presentation, rng: &mut impl Rng, len: usize) -> (Word, Word) {
    let u = random_word(p, rng, len);
    let class: Vec<Word> = naive_class(p, &u).into_iter().collect();
    let v = class.choose(rng).unwrap().clone();
    (u, v)
}

pub fn w(p: &Presentation, s: &str) -> Word {
    p.parse_word(s).unwrap()
}

/// The catalog presentations exercised by the property suites.
pub fn catalog_presentations() -> Vec<(&'static str, Presentation)> {
    vec![
        ("braid(3)", catalog::braid(3).unwrap()),
        ("braid(4)", catalog::braid(4).unwrap()),
        ("colored_braid(3,2)", catalog::colored_braid(3, &["a", "b"]).unwrap()),
        ("colored_braid(4,2)", catalog::colored_braid(4, &["a", "b"]).unwrap()),
        (
            "restricted_colored(4,2)",
            catalog::restricted_colored(4, &["a", "b"]).unwrap(),
        ),
        ("malcev", catalog::malcev()),
    ]
}

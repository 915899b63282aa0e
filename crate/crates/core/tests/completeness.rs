mod common;

use std::collections::BTreeSet;

use common::{all_words, naive_class, naive_distance, random_equivalent_pair, random_word, signed_targets, w};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reversal_core::*;

fn complete_set() -> Vec<(&'static str, Presentation)> {
    vec![
        ("braid(3)", catalog::braid(3).unwrap()),
        ("braid(4)", catalog::braid(4).unwrap()),
        ("colored_braid(3,2)", catalog::colored_braid(3, &["a", "b"]).unwrap()),
        ("malcev", catalog::malcev()),
    ]
}

#[test]
fn catalog_verdicts() {
    let b = Budget::default();
    for (name, p) in complete_set() {
        assert!(check_completeness(&p, &b).is_complete(), "{name}");
    }
    assert!(check_completeness(&catalog::colored_braid(4, &["a", "b"]).unwrap(), &b).is_complete());
    let restricted = catalog::restricted_colored(4, &["a", "b"]).unwrap();
    let r = check_completeness(&restricted, &b);
    assert!(matches!(r.verdict, Verdict::Incomplete { .. }));
    let s = restricted.letter("s1.a").unwrap();
    let rel = w(&restricted, "s2.b s3.b s2.b");
    assert!(r
        .counterexamples()
        .any(|c| c.generator == s && restricted.relation(c.relation).lhs == rel));
}

#[test]
fn both_directions_are_reported() {
    let p = catalog::colored_braid(3, &["a", "b"]).unwrap();
    let r = check_completeness(&p, &Budget::default());
    for s in p.alphabet() {
        for rel in p.relations() {
            let dirs: BTreeSet<Direction> = r
                .reports
                .iter()
                .filter(|x| x.generator == s && x.relation == rel.index)
                .map(|x| x.direction)
                .collect();
            assert_eq!(dirs, BTreeSet::from([Direction::LhsToRhs, Direction::RhsToLhs]));
        }
    }
}

#[test]
fn counterexamples_are_certified_independently() {
    let p = catalog::restricted_colored(4, &["a", "b"]).unwrap();
    let r = check_completeness(&p, &Budget::default());
    let mut seen = 0;
    for c in r.counterexamples() {
        let DiamondStatus::Counterexample { grid, exhausted } = &c.status else {
            unreachable!()
        };
        assert!(exhausted);
        let rel = p.relation(c.relation);
        let other = match c.direction {
            Direction::LhsToRhs => &rel.rhs,
            Direction::RhsToLhs => &rel.lhs,
        };
        let partners = signed_targets(&p, &[c.generator], other, 1_000_000).unwrap();
        let right = naive_class(&p, &grid.target.0);
        let bottom = naive_class(&p, &grid.target.1);
        assert!(partners
            .iter()
            .all(|(u1, v1)| !(right.contains(u1) && bottom.contains(v1))));
        seen += 1;
    }
    assert!(seen > 0);
}

#[test]
fn matched_grids_are_equivalent() {
    for (name, p) in complete_set() {
        let r = check_completeness(&p, &Budget::default());
        for report in &r.reports {
            let DiamondStatus::Verified { matching } = &report.status else {
                panic!("{name}")
            };
            for (g, h) in matching {
                assert!(naive_class(&p, &g.target.0).contains(&h.target.0));
                assert!(naive_class(&p, &g.target.1).contains(&h.target.1));
            }
        }
    }
}

/// Equivalent words reverse to `(ε, ε)`: every word up to length 6 against
/// every member of its class.
#[test]
fn reversing_detects_every_equivalence() {
    let b = Budget::default();
    for (name, p) in complete_set() {
        for len in 0..=6 {
            for u in all_words(&p, len) {
                for v in naive_class(&p, &u) {
                    let d = decide_equiv_by_reversing(&p, &u, &v, &b).unwrap();
                    assert_eq!(
                        d,
                        ReversingDecision::Reversible,
                        "{name}: {} / {}",
                        p.format_word(&u),
                        p.format_word(&v)
                    );
                }
            }
        }
    }
}

/// The other direction, on random pairs of equal length (mostly inequivalent).
#[test]
fn reversing_never_identifies_inequivalent_words() {
    let b = Budget::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (name, p) in complete_set() {
        for _ in 0..1500 {
            let len = rand::Rng::gen_range(&mut rng, 0..=6);
            let (u, v) = (random_word(&p, &mut rng, len), random_word(&p, &mut rng, len));
            let d = decide_equiv_by_reversing(&p, &u, &v, &b).unwrap();
            assert_eq!(d.as_bool(), Some(naive_class(&p, &u).contains(&v)), "{name}");
        }
        for _ in 0..300 {
            let (u, v) = random_equivalent_pair(&p, &mut rng, 6);
            assert_eq!(
                decide_equiv_by_reversing(&p, &u, &v, &b).unwrap(),
                ReversingDecision::Reversible
            );
        }
    }
}

#[test]
fn counter_relation_escapes_reversing() {
    let p = catalog::restricted_colored(4, &["a", "b"]).unwrap();
    let b = Budget::default();
    let u = w(&p, "s2.b s3.b s2.b s1.a s2.b s3.a");
    let v = w(&p, "s1.a s3.b s2.a s1.b s3.b s2.b");
    assert!(are_equivalent(&p, &u, &v, &b).is_equivalent());
    assert!(naive_class(&p, &u).contains(&v));
    assert_eq!(
        decide_equiv_by_reversing(&p, &u, &v, &b).unwrap(),
        ReversingDecision::NotReversible
    );
    let targets = signed_targets(&p, &u, &v, 1_000_000).unwrap();
    assert!(!targets.contains(&(Word::empty(), Word::empty())));
}

/// Defect recomputed from signed-word targets and plain breadth-first distances.
fn reference_defect(p: &Presentation) -> u32 {
    let mut worst = 0;
    for s in p.alphabet() {
        for rel in p.relations() {
            let lhs = signed_targets(p, &[s], &rel.lhs, 1_000_000).unwrap();
            let rhs = signed_targets(p, &[s], &rel.rhs, 1_000_000).unwrap();
            for (from, to) in [(&lhs, &rhs), (&rhs, &lhs)] {
                for (a0, a1) in from {
                    let best = to
                        .iter()
                        .filter_map(|(b0, b1)| Some(naive_distance(p, a0, b0)? + naive_distance(p, a1, b1)?))
                        .min()
                        .expect("complete presentation");
                    worst = worst.max(best);
                }
            }
        }
    }
    worst
}

#[test]
fn defect_matches_reference() {
    let b = Budget::default();
    let mut cases = complete_set();
    cases.push(("colored_braid(4,2)", catalog::colored_braid(4, &["a", "b"]).unwrap()));
    for (name, p) in cases {
        let d = defect(&p, &b);
        assert_eq!(d.value, DefectValue::Finite(reference_defect(&p)), "{name}");
    }
}

#[test]
fn pinned_defects() {
    let b = Budget::default();
    let braid4 = catalog::braid(4).unwrap();
    assert_eq!(defect(&braid4, &b).value, DefectValue::Finite(5));
    let colored = catalog::colored_braid(4, &["a", "b"]).unwrap();
    let d = defect(&colored, &b);
    assert_eq!(d.value, DefectValue::Finite(5));
    let wit = d.witness.unwrap();
    let partner = wit.partner.unwrap();
    let sum = naive_distance(&colored, &wit.grid.target.0, &partner.target.0).unwrap()
        + naive_distance(&colored, &wit.grid.target.1, &partner.target.1).unwrap();
    assert_eq!(sum, 5);
}

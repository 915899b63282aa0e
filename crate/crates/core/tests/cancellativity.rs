mod common;

use common::{all_words, naive_class, random_word, w};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reversal_core::completeness::check_completeness;
use reversal_core::*;

#[test]
fn catalog_verdicts() {
    let b = Budget::default();
    let colored = catalog::colored_braid(4, &["a", "b"]).unwrap();
    assert!(check_left_cancellative(&colored, &b).is_cancellative());
    assert!(check_right_cancellative(&colored, &b).is_cancellative());
    assert!(check_left_cancellative(&catalog::malcev(), &b).is_cancellative());
    let restricted = catalog::restricted_colored(4, &["a", "b"]).unwrap();
    for v in [
        check_left_cancellative(&restricted, &b),
        check_right_cancellative(&restricted, &b),
    ] {
        assert!(
            matches!(v.status, CancellativityStatus::NotByThisCriterion { .. }),
            "{:?}",
            v.side
        );
    }
}

#[test]
fn right_side_is_the_mirrored_left_side() {
    let b = Budget::default();
    let mut cases = common::catalog_presentations();
    cases.push(("conflict", parse_presentation("gens: a b c\nrel: b a = c a").unwrap()));
    for (name, p) in cases {
        let right = check_right_cancellative(&p, &b);
        let left = check_left_cancellative(&p.mirror(), &b);
        assert_eq!(right.side, Side::Right);
        assert_eq!(left.side, Side::Left);
        assert_eq!(right.status, left.status, "{name}");
        assert_eq!(right.conflicts, left.conflicts);
        assert_eq!(right.completeness, left.completeness);
    }
}

/// Pairs `(u, v)` with `s·u ≡ s·v`, read off the class of `s·u`.
fn left_cancel_instances(p: &Presentation, rng: &mut ChaCha8Rng, count: usize) -> Vec<(Word, Word)> {
    let letters: Vec<Letter> = p.alphabet().collect();
    let mut out = Vec::new();
    while out.len() < count {
        let s = *letters.choose(rng).unwrap();
        let len = rng.gen_range(0..=5);
        let u = random_word(p, rng, len);
        let su = Word::from(vec![s]).concat(&u);
        let same_start: Vec<Word> = naive_class(p, &su).into_iter().filter(|x| x[0] == s).collect();
        let v = Word::from(&same_start.choose(rng).unwrap()[1..]);
        out.push((u, v));
    }
    out
}

#[test]
fn cancellation_holds_where_claimed() {
    let b = Budget::default();
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for (name, p) in common::catalog_presentations() {
        if !check_left_cancellative(&p, &b).is_cancellative() {
            continue;
        }
        for (u, v) in left_cancel_instances(&p, &mut rng, 300) {
            assert!(are_equivalent(&p, &u, &v, &b).is_equivalent(), "{name}");
        }
    }
}

fn has_prefix(class: &std::collections::BTreeSet<Word>, prefix: &[Letter]) -> bool {
    class.iter().any(|z| z.starts_with(prefix))
}

#[test]
fn lcm_is_minimal_in_braid3() {
    let p = catalog::braid(3).unwrap();
    let b = Budget::default();
    let report = check_completeness(&p, &b);
    let mut candidates = Vec::new();
    for len in 0..=6 {
        candidates.extend(all_words(&p, len).into_iter().map(|z| {
            let class = naive_class(&p, &z);
            (z, class)
        }));
    }
    for ul in 0..=3 {
        for vl in 0..=3 {
            for u in all_words(&p, ul) {
                for v in all_words(&p, vl) {
                    let LcmResult::Lcm { multiple, complements } = reversing_lcm(&p, &report, &u, &v, &b) else {
                        panic!("braid elements always have an lcm");
                    };
                    let m_class = naive_class(&p, &multiple);
                    assert!(m_class.contains(&v.concat(&complements.0)));
                    assert!(has_prefix(&m_class, &u) && has_prefix(&m_class, &v));
                    for (_, class) in &candidates {
                        if has_prefix(class, &u) && has_prefix(class, &v) {
                            assert!(has_prefix(class, &multiple));
                        }
                    }
                }
            }
        }
    }
}

fn reversing_lcm(p: &Presentation, report: &CompletenessReport, u: &[Letter], v: &[Letter], b: &Budget) -> LcmResult {
    cancellativity::right_lcm_with(p, Some(report), u, v, b).unwrap()
}

#[test]
fn braid4_lcms_of_generators() {
    let p = catalog::braid(4).unwrap();
    let b = Budget::default();
    let lcm = |u: &str, v: &str| match right_lcm(&p, &w(&p, u), &w(&p, v), &b).unwrap() {
        LcmResult::Lcm { multiple, .. } => multiple,
        other => panic!("{other:?}"),
    };
    assert_eq!(lcm("s1", "s2"), w(&p, "s1 s2 s1"));
    assert_eq!(lcm("s1", "s3"), w(&p, "s1 s3"));
    assert_eq!(lcm("s2 s1", "s2 s1"), w(&p, "s2 s1"));
    // lcm of all three generators is the longest element
    let full = lcm("s1 s2 s1", "s3");
    assert_eq!(naive_class(&p, &full).len(), 16);
}

#[test]
fn common_multiples_are_sound() {
    let p = catalog::colored_braid(4, &["a", "b"]).unwrap();
    let b = Budget::default();
    let report = check_completeness(&p, &b);
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut found = 0;
    for _ in 0..300 {
        let (ul, vl) = (rng.gen_range(0..=3), rng.gen_range(0..=3));
        let (u, v) = (random_word(&p, &mut rng, ul), random_word(&p, &mut rng, vl));
        match cancellativity::common_right_multiple_with(&p, Some(&report), &u, &v, &b).unwrap() {
            MultipleResult::Multiple {
                multiple,
                complements,
                grid,
            } => {
                assert!(validate_grid(&p, &grid, &b).valid);
                assert_eq!(multiple, u.concat(&complements.1));
                assert!(naive_class(&p, &multiple).contains(&v.concat(&complements.0)));
                found += 1;
            }
            MultipleResult::NoCommonMultiple { stuck } => assert!(!stuck.is_empty()),
            MultipleResult::Inconclusive { reason } => panic!("{reason}"),
        }
    }
    assert!(found > 0);
}

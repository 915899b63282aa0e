//! Constructors for the braid-like presentations and the Malcev example.
//!
//! Braid generators are named `s<i>` and colored generators `s<i>.<color>`,
//! with indices `1..n-1` for `n` strands.

use thiserror::Error;

use crate::presentation::{Letter, Presentation, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("strand count must be at least 2, got {0}")]
    TooFewStrands(usize),
    #[error("color set must be nonempty")]
    NoColors,
    #[error("invalid or duplicate color `{0}`")]
    BadColor(String),
    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),
}

/// The first `k` color names: `a`, `b`, `c`, ...
pub fn color_names(k: usize) -> Vec<String> {
    (0..k)
        .map(|i| {
            let mut name = String::new();
            let mut i = i;
            loop {
                name.insert(0, (b'a' + (i % 26) as u8) as char);
                if i < 26 {
                    break;
                }
                i = i / 26 - 1;
            }
            name
        })
        .collect()
}

/// Artin's presentation of the positive braid monoid on `n` strands.
pub fn braid(n: usize) -> Result<Presentation, CatalogError> {
    if n < 2 {
        return Err(CatalogError::TooFewStrands(n));
    }
    let mut p = Presentation::new((1..n).map(|i| format!("s{i}"))).expect("valid tokens");
    let g = |i: usize| Letter((i - 1) as u32);
    for i in 1..n {
        for j in i + 1..n {
            let (lhs, rhs) = if j - i >= 2 {
                (vec![g(i), g(j)], vec![g(j), g(i)])
            } else {
                (vec![g(i), g(j), g(i)], vec![g(j), g(i), g(j)])
            };
            p.add_relation(lhs.into(), rhs.into()).expect("letters in range");
        }
    }
    Ok(p)
}

fn colored_alphabet(n: usize, colors: &[&str]) -> Result<Presentation, CatalogError> {
    if n < 2 {
        return Err(CatalogError::TooFewStrands(n));
    }
    if colors.is_empty() {
        return Err(CatalogError::NoColors);
    }
    for (i, c) in colors.iter().enumerate() {
        if c.is_empty() || colors[..i].contains(c) || !crate::presentation::is_token(&format!("s{c}")) {
            return Err(CatalogError::BadColor(c.to_string()));
        }
    }
    let names = (1..n).flat_map(|i| colors.iter().map(move |c| format!("s{i}.{c}")));
    Presentation::new(names).map_err(|e| CatalogError::BadColor(e.to_string()))
}

/// Which Yang–Baxter color triples `(x, y, z)` a colored family keeps.
fn colored_family(
    n: usize,
    colors: &[&str],
    keep: impl Fn(usize, usize, usize) -> bool,
) -> Result<Presentation, CatalogError> {
    let mut p = colored_alphabet(n, colors)?;
    let k = colors.len();
    let g = |i: usize, c: usize| Letter(((i - 1) * k + c) as u32);
    for i in 1..n {
        for j in i + 1..n {
            if j - i >= 2 {
                for x in 0..k {
                    for y in 0..k {
                        p.add_relation(Word::new(vec![g(i, x), g(j, y)]), Word::new(vec![g(j, y), g(i, x)]))
                            .expect("letters in range");
                    }
                }
            } else {
                for x in 0..k {
                    for y in 0..k {
                        for z in 0..k {
                            if !keep(x, y, z) {
                                continue;
                            }
                            p.add_relation(
                                Word::new(vec![g(i, x), g(j, y), g(i, z)]),
                                Word::new(vec![g(j, z), g(i, y), g(j, x)]),
                            )
                            .expect("letters in range");
                        }
                    }
                }
            }
        }
    }
    Ok(p)
}

/// Positive braids with colored crossings: `s_i^x s_j^y s_i^z = s_j^z s_i^y s_j^x`
/// for adjacent `i, j`, colored commutations otherwise.
pub fn colored_braid(n: usize, colors: &[&str]) -> Result<Presentation, CatalogError> {
    colored_family(n, colors, |_, _, _| true)
}

/// The restricted variant: the middle color of each Yang–Baxter relation equals
/// one of the outer colors.
pub fn restricted_colored(n: usize, colors: &[&str]) -> Result<Presentation, CatalogError> {
    colored_family(n, colors, |x, y, z| y == x || y == z)
}

/// `<a, b, c, d, a', b', c', d' | ac = bd, ac' = bd', a'c = b'd>`, with primes spelled `p`.
pub fn malcev() -> Presentation {
    let mut p = Presentation::new(["a", "b", "c", "d", "ap", "bp", "cp", "dp"]).expect("valid tokens");
    for (lhs, rhs) in [("a c", "b d"), ("a cp", "b dp"), ("ap c", "bp d")] {
        let lhs = p.parse_word(lhs).expect("known letters");
        let rhs = p.parse_word(rhs).expect("known letters");
        p.add_relation(lhs, rhs).expect("known letters");
    }
    p
}

/// The free monoid on `k` letters `a`, `b`, ...
pub fn free(k: usize) -> Presentation {
    Presentation::new(color_names(k)).expect("valid tokens")
}

/// Looks an entry up by its command-line name.
pub fn by_name(name: &str, n: usize, colors: usize) -> Result<Presentation, CatalogError> {
    let names = color_names(colors);
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    match name {
        "braid" => braid(n),
        "colored-braid" => colored_braid(n, &refs),
        "restricted-colored" => restricted_colored(n, &refs),
        "malcev" => Ok(malcev()),
        "free" => Ok(free(colors.max(1))),
        other => Err(CatalogError::UnknownEntry(other.to_string())),
    }
}

pub const ENTRY_NAMES: [&str; 5] = ["braid", "colored-braid", "restricted-colored", "malcev", "free"];

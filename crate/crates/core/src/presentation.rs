//! Monoid presentations: interned alphabets, words, relations and weights.
//!
//! The text format is line oriented:
//!
//! ```text
//! # comment
//! gens: a b c
//! weights: a=2
//! rel: a b = b a
//! rel: a c = 1        # `1` spells the empty word
//! ```

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A generator, interned as a dense index into its presentation's alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Letter(pub u32);

impl Letter {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A finite sequence of letters; the empty word stands for the unit.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.0
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = Vec::with_capacity(self.len() + other.len());
        letters.extend_from_slice(&self.0);
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    pub fn push(&mut self, letter: Letter) {
        self.0.push(letter);
    }
}

impl Deref for Word {
    type Target = [Letter];

    fn deref(&self) -> &[Letter] {
        &self.0
    }
}

impl From<Vec<Letter>> for Word {
    fn from(letters: Vec<Letter>) -> Self {
        Word(letters)
    }
}

impl From<&[Letter]> for Word {
    fn from(letters: &[Letter]) -> Self {
        Word(letters.to_vec())
    }
}

impl FromIterator<Letter> for Word {
    fn from_iter<I: IntoIterator<Item = Letter>>(iter: I) -> Self {
        Word(iter.into_iter().collect())
    }
}

/// One defining relation `lhs = rhs`. Consumers treat it as an unordered pair.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Relation {
    pub lhs: Word,
    pub rhs: Word,
    /// Position in the presentation's relation list.
    pub index: usize,
}

impl Relation {
    /// One side empty, the other not.
    pub fn is_epsilon(&self) -> bool {
        self.lhs.is_empty() != self.rhs.is_empty()
    }

    /// Orientation-free identity of the relation.
    fn key(&self) -> (Word, Word) {
        unordered(&self.lhs, &self.rhs)
    }
}

fn unordered(a: &Word, b: &Word) -> (Word, Word) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PresentationError {
    #[error("invalid generator token `{0}`")]
    InvalidToken(String),
    #[error("duplicate generator `{0}`")]
    DuplicateGenerator(String),
    #[error("unknown letter `{0}`")]
    UnknownLetter(String),
    #[error("letter id {0} is not in the alphabet")]
    UnknownLetterId(u32),
    #[error("weight of `{0}` must be a positive integer")]
    NonPositiveWeight(String),
    #[error("the presentation contains an ε-relation, which reversing cannot handle")]
    EpsilonRelation,
}

/// Observations produced by [`Presentation::validate`] and by relation deduplication.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostic {
    EpsilonRelation {
        relation: usize,
    },
    /// A relation repeating an earlier one (in either orientation) was dropped.
    DuplicateRelation {
        relation: String,
        duplicate_of: usize,
    },
    /// A relation `w = w` was dropped.
    TrivialRelation {
        relation: String,
    },
    WeightHomogeneity {
        homogeneous: bool,
        unbalanced: Vec<usize>,
    },
    LeftCancelConflict {
        relation: usize,
    },
    RightComplemented {
        complemented: bool,
        witness: Option<(String, String)>,
    },
}

impl Diagnostic {
    /// Diagnostics that make reversing-based procedures inapplicable.
    pub fn is_error(&self) -> bool {
        matches!(self, Diagnostic::EpsilonRelation { .. })
    }
}

/// A monoid presentation `(S, R)` with positive integer generator weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    names: Vec<String>,
    lookup: HashMap<String, Letter>,
    weights: Vec<u64>,
    relations: Vec<Relation>,
    keys: BTreeSet<(Word, Word)>,
    dropped: Vec<Diagnostic>,
}

pub(crate) fn is_token(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '^' | '-'))
}

impl Presentation {
    /// A presentation with the given generators, unit weights and no relations.
    pub fn new<I, S>(generators: I) -> Result<Self, PresentationError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut names = Vec::new();
        let mut lookup = HashMap::new();
        for name in generators {
            let name = name.into();
            if !is_token(&name) {
                return Err(PresentationError::InvalidToken(name));
            }
            if lookup.contains_key(&name) {
                return Err(PresentationError::DuplicateGenerator(name));
            }
            lookup.insert(name.clone(), Letter(names.len() as u32));
            names.push(name);
        }
        let weights = vec![1; names.len()];
        Ok(Presentation {
            names,
            lookup,
            weights,
            relations: Vec::new(),
            keys: BTreeSet::new(),
            dropped: Vec::new(),
        })
    }

    pub fn set_weight(&mut self, letter: Letter, weight: u64) -> Result<(), PresentationError> {
        self.check_letter(letter)?;
        if weight == 0 {
            return Err(PresentationError::NonPositiveWeight(self.name(letter).to_string()));
        }
        self.weights[letter.index()] = weight;
        Ok(())
    }

    /// Appends `lhs = rhs`. Duplicates (in either orientation) and trivial
    /// relations are dropped with a diagnostic; the new index is returned otherwise.
    pub fn add_relation(&mut self, lhs: Word, rhs: Word) -> Result<Option<usize>, PresentationError> {
        for &l in lhs.iter().chain(rhs.iter()) {
            self.check_letter(l)?;
        }
        let text = format!("{} = {}", self.format_word(&lhs), self.format_word(&rhs));
        if lhs == rhs {
            self.dropped.push(Diagnostic::TrivialRelation { relation: text });
            return Ok(None);
        }
        let key = unordered(&lhs, &rhs);
        if self.keys.contains(&key) {
            let duplicate_of = self
                .relations
                .iter()
                .find(|r| r.key() == key)
                .map(|r| r.index)
                .unwrap_or_default();
            self.dropped.push(Diagnostic::DuplicateRelation {
                relation: text,
                duplicate_of,
            });
            return Ok(None);
        }
        let index = self.relations.len();
        self.keys.insert(key);
        self.relations.push(Relation { lhs, rhs, index });
        Ok(Some(index))
    }

    fn check_letter(&self, letter: Letter) -> Result<(), PresentationError> {
        if letter.index() < self.names.len() {
            Ok(())
        } else {
            Err(PresentationError::UnknownLetterId(letter.0))
        }
    }

    pub fn generator_count(&self) -> usize {
        self.names.len()
    }

    pub fn alphabet(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.names.len() as u32).map(Letter)
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn relation(&self, index: usize) -> &Relation {
        &self.relations[index]
    }

    pub fn letter(&self, name: &str) -> Option<Letter> {
        self.lookup.get(name).copied()
    }

    pub fn name(&self, letter: Letter) -> &str {
        &self.names[letter.index()]
    }

    pub fn weight(&self, letter: Letter) -> u64 {
        self.weights[letter.index()]
    }

    /// Diagnostics recorded while relations were added (dropped duplicates and trivial relations).
    pub fn construction_diagnostics(&self) -> &[Diagnostic] {
        &self.dropped
    }

    /// Sum of generator weights over `word`; 0 for the empty word.
    pub fn weight_of(&self, word: &[Letter]) -> Result<u64, PresentationError> {
        word.iter().try_fold(0u64, |acc, &l| {
            self.check_letter(l)?;
            Ok(acc + self.weight(l))
        })
    }

    pub(crate) fn word_weight(&self, word: &[Letter]) -> u64 {
        word.iter().map(|&l| self.weights[l.index()]).sum()
    }

    /// Parses space separated tokens; `1` or a blank string is the empty word.
    pub fn parse_word(&self, text: &str) -> Result<Word, PresentationError> {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens == ["1"] {
            return Ok(Word::empty());
        }
        tokens
            .into_iter()
            .map(|t| {
                self.letter(t)
                    .ok_or_else(|| PresentationError::UnknownLetter(t.to_string()))
            })
            .collect()
    }

    /// Space separated tokens, `ε` for the empty word.
    pub fn format_word(&self, word: &[Letter]) -> String {
        if word.is_empty() {
            return "ε".to_string();
        }
        self.tokens(word).join(" ")
    }

    pub fn tokens(&self, word: &[Letter]) -> Vec<String> {
        word.iter().map(|&l| self.name(l).to_string()).collect()
    }

    pub fn format_relation(&self, relation: &Relation) -> String {
        format!(
            "{} = {}",
            self.format_word(&relation.lhs),
            self.format_word(&relation.rhs)
        )
    }

    pub fn has_epsilon_relation(&self) -> bool {
        self.relations.iter().any(Relation::is_epsilon)
    }

    /// Relations whose two sides have different weights.
    pub fn unbalanced_relations(&self) -> Vec<usize> {
        self.relations
            .iter()
            .filter(|r| self.word_weight(&r.lhs) != self.word_weight(&r.rhs))
            .map(|r| r.index)
            .collect()
    }

    /// Every relation balances the generator weights; with positive weights
    /// this witnesses right noetherianity.
    pub fn is_weight_homogeneous(&self) -> bool {
        self.unbalanced_relations().is_empty()
    }

    /// Letter-reverses every relation side; alphabet and weights are kept.
    pub fn mirror(&self) -> Presentation {
        let mut mirrored = Presentation {
            names: self.names.clone(),
            lookup: self.lookup.clone(),
            weights: self.weights.clone(),
            relations: Vec::with_capacity(self.relations.len()),
            keys: BTreeSet::new(),
            dropped: Vec::new(),
        };
        for r in &self.relations {
            mirrored
                .add_relation(r.lhs.reversed(), r.rhs.reversed())
                .expect("letters already validated");
        }
        mirrored
    }

    /// Relations `s w = s w'` with distinct `w, w'`.
    pub fn left_cancel_conflicts(&self) -> Vec<&Relation> {
        self.relations
            .iter()
            .filter(|r| match (r.lhs.first(), r.rhs.first()) {
                (Some(a), Some(b)) => a == b && r.lhs != r.rhs,
                _ => false,
            })
            .collect()
    }

    /// First pair of initial letters violating right-complementedness, if any.
    fn complement_violation(&self) -> Option<(Letter, Letter)> {
        let mut seen = BTreeSet::new();
        for r in &self.relations {
            let (Some(&a), Some(&b)) = (r.lhs.first(), r.rhs.first()) else {
                continue;
            };
            if a == b {
                return Some((a, b));
            }
            let pair = (a.min(b), a.max(b));
            if !seen.insert(pair) {
                return Some(pair);
            }
        }
        None
    }

    /// At most one relation `s... = t...` per pair `s != t`, and none with equal initial letters.
    pub fn is_right_complemented(&self) -> bool {
        self.complement_violation().is_none()
    }

    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = self.dropped.clone();
        out.extend(
            self.relations
                .iter()
                .filter(|r| r.is_epsilon())
                .map(|r| Diagnostic::EpsilonRelation { relation: r.index }),
        );
        let unbalanced = self.unbalanced_relations();
        out.push(Diagnostic::WeightHomogeneity {
            homogeneous: unbalanced.is_empty(),
            unbalanced,
        });
        out.extend(
            self.left_cancel_conflicts()
                .into_iter()
                .map(|r| Diagnostic::LeftCancelConflict { relation: r.index }),
        );
        let violation = self.complement_violation();
        out.push(Diagnostic::RightComplemented {
            complemented: violation.is_none(),
            witness: violation.map(|(a, b)| (self.name(a).to_string(), self.name(b).to_string())),
        });
        out
    }

    /// Serializes to the text format accepted by [`parse_presentation`].
    pub fn to_file_text(&self) -> String {
        let mut out = format!("gens: {}\n", self.names.join(" "));
        let weighted: Vec<String> = self
            .alphabet()
            .filter(|&l| self.weight(l) != 1)
            .map(|l| format!("{}={}", self.name(l), self.weight(l)))
            .collect();
        if !weighted.is_empty() {
            out.push_str(&format!("weights: {}\n", weighted.join(" ")));
        }
        for r in &self.relations {
            let side = |w: &Word| {
                if w.is_empty() {
                    "1".to_string()
                } else {
                    self.tokens(w).join(" ")
                }
            };
            out.push_str(&format!("rel: {} = {}\n", side(&r.lhs), side(&r.rhs)));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown letter `{0}`")]
    UnknownLetter(String),
    #[error("duplicate generator `{0}`")]
    DuplicateGenerator(String),
    #[error("weight of `{0}` must be a positive integer")]
    NonPositiveWeight(String),
    #[error("ε-relation with an empty side; such relations are invalid for reversing (spell the empty word `1`)")]
    EpsilonRelation,
}

struct Line<'a> {
    number: usize,
    text: &'a str,
}

impl Line<'_> {
    fn err(&self, offset: usize, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: self.number,
            column: self.text[..offset].chars().count() + 1,
            kind,
        }
    }

    /// Whitespace separated tokens of `self.text[start..end]` with their byte offsets.
    fn tokens(&self, start: usize, end: usize) -> Vec<(usize, &str)> {
        let mut out = Vec::new();
        let slice = &self.text[start..end];
        let mut token_start = None;
        for (i, c) in slice.char_indices() {
            match (c.is_whitespace(), token_start) {
                (false, None) => token_start = Some(i),
                (true, Some(s)) => {
                    out.push((start + s, &slice[s..i]));
                    token_start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = token_start {
            out.push((start + s, &slice[s..]));
        }
        out
    }
}

/// Parses the presentation text format.
pub fn parse_presentation(source: &str) -> Result<Presentation, ParseError> {
    let mut presentation: Option<Presentation> = None;
    let mut weights_seen = false;

    for (i, raw) in source.lines().enumerate() {
        let text = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = Line { number: i + 1, text };
        let Some(first) = line.tokens(0, text.len()).first().map(|&(o, _)| o) else {
            continue;
        };
        let Some(colon) = text.find(':') else {
            return Err(line.err(first, ParseErrorKind::Syntax("expected `keyword:`".into())));
        };
        let keyword = text[..colon].trim();
        let body = colon + 1;
        match keyword {
            "gens" => {
                if presentation.is_some() {
                    return Err(line.err(first, ParseErrorKind::Syntax("`gens:` given twice".into())));
                }
                let tokens = line.tokens(body, text.len());
                if tokens.is_empty() {
                    return Err(line.err(body, ParseErrorKind::Syntax("no generators".into())));
                }
                let mut seen = BTreeSet::new();
                for &(offset, tok) in &tokens {
                    if !is_token(tok) {
                        return Err(line.err(
                            offset,
                            ParseErrorKind::Syntax(format!("invalid generator token `{tok}`")),
                        ));
                    }
                    if !seen.insert(tok) {
                        return Err(line.err(offset, ParseErrorKind::DuplicateGenerator(tok.into())));
                    }
                }
                presentation = Some(Presentation::new(tokens.iter().map(|&(_, t)| t)).expect("tokens validated above"));
            }
            "weights" => {
                let Some(p) = presentation.as_mut() else {
                    return Err(line.err(first, ParseErrorKind::Syntax("`weights:` before `gens:`".into())));
                };
                if weights_seen {
                    return Err(line.err(first, ParseErrorKind::Syntax("`weights:` given twice".into())));
                }
                weights_seen = true;
                for (offset, tok) in line.tokens(body, text.len()) {
                    let Some((name, value)) = tok.split_once('=') else {
                        return Err(line.err(
                            offset,
                            ParseErrorKind::Syntax(format!("expected `token=weight`, found `{tok}`")),
                        ));
                    };
                    let letter = p
                        .letter(name)
                        .ok_or_else(|| line.err(offset, ParseErrorKind::UnknownLetter(name.into())))?;
                    let weight: i128 = value.parse().map_err(|_| {
                        line.err(
                            offset + name.len() + 1,
                            ParseErrorKind::Syntax(format!("`{value}` is not an integer")),
                        )
                    })?;
                    if weight <= 0 || weight > u32::MAX as i128 {
                        return Err(line.err(offset, ParseErrorKind::NonPositiveWeight(name.into())));
                    }
                    p.set_weight(letter, weight as u64).expect("letter and weight checked");
                }
            }
            "rel" => {
                let Some(p) = presentation.as_mut() else {
                    return Err(line.err(first, ParseErrorKind::Syntax("`rel:` before `gens:`".into())));
                };
                let rest = &text[body..];
                let eq = match rest.match_indices('=').map(|(i, _)| i).collect::<Vec<_>>()[..] {
                    [one] => body + one,
                    [] => return Err(line.err(body, ParseErrorKind::Syntax("relation needs `=`".into()))),
                    [_, second, ..] => {
                        return Err(line.err(body + second, ParseErrorKind::Syntax("more than one `=`".into())))
                    }
                };
                let lhs = parse_side(&line, p, body, eq)?;
                let rhs = parse_side(&line, p, eq + 1, text.len())?;
                p.add_relation(lhs, rhs).expect("letters resolved by parse_side");
            }
            other => return Err(line.err(first, ParseErrorKind::Syntax(format!("unknown keyword `{other}`")))),
        }
    }

    presentation.ok_or(ParseError {
        line: source.lines().count().max(1),
        column: 1,
        kind: ParseErrorKind::Syntax("missing `gens:` line".into()),
    })
}

fn parse_side(line: &Line<'_>, p: &Presentation, start: usize, end: usize) -> Result<Word, ParseError> {
    let tokens = line.tokens(start, end);
    if tokens.is_empty() {
        return Err(line.err(start, ParseErrorKind::EpsilonRelation));
    }
    if tokens.len() == 1 && tokens[0].1 == "1" {
        return Ok(Word::empty());
    }
    tokens
        .into_iter()
        .map(|(offset, tok)| {
            if tok == "1" {
                return Err(line.err(
                    offset,
                    ParseErrorKind::Syntax("`1` must stand alone on its side".into()),
                ));
            }
            p.letter(tok)
                .ok_or_else(|| line.err(offset, ParseErrorKind::UnknownLetter(tok.into())))
        })
        .collect()
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_file_text())
    }
}

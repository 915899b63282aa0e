//! The `reversal` command line.
//!
//! Exit status: 0 when the answer is affirmative, 1 when it is negative, 2 when
//! it is inconclusive, 64 on usage and input errors.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::builder::PossibleValuesParser;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use reversal_core::*;
use serde_json::{json, Value};

pub const EXIT_YES: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "reversal", version, about = "Decide monoid properties with reversing grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Report ε-relations, homogeneity, left-cancel conflicts and complementedness.
    Validate(Common),
    /// Reverse (U, V) and list the targets of all grids.
    Reverse(PairArgs),
    /// Reverse (U, V) and draw every grid.
    Grids(PairArgs),
    /// Decide U ≡ V with the congruence oracle, or by reversing to (ε, ε).
    Equiv {
        #[command(flatten)]
        pair: PairArgs,
        /// Decide by reversing instead of exploring the class.
        #[arg(long)]
        reversing: bool,
    },
    /// Check completeness of reversing.
    Complete(Common),
    /// Apply the cancellativity criterion.
    Cancel {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = SideArg::Both)]
        side: SideArg,
    },
    /// Right lcm of U and V (right-complemented presentations only).
    Lcm(PairArgs),
    /// A common right multiple of U and V.
    Multiple(PairArgs),
    /// The defect of the presentation.
    Defect(Common),
    /// List catalog entries, describe one, or print its presentation file.
    Catalog {
        #[arg(value_parser = PossibleValuesParser::new(catalog::ENTRY_NAMES))]
        name: Option<String>,
        #[command(flatten)]
        shape: Shape,
        /// Print the presentation in file format.
        #[arg(long, requires = "name")]
        emit: bool,
        #[arg(long)]
        json: bool,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SideArg {
    Left,
    Right,
    Both,
}

#[derive(Args, Debug)]
struct Shape {
    /// Strand count for braid-like entries.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(2..))]
    n: u64,
    /// Number of colors (letters for `free`).
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    colors: u64,
}

#[derive(Args, Debug)]
struct Common {
    /// Presentation file.
    #[arg(
        long,
        value_name = "PATH",
        required_unless_present = "catalog",
        conflicts_with = "catalog"
    )]
    file: Option<PathBuf>,
    /// Catalog entry.
    #[arg(long, value_name = "NAME", value_parser = PossibleValuesParser::new(catalog::ENTRY_NAMES))]
    catalog: Option<String>,
    #[command(flatten)]
    shape: Shape,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    max_cells: u64,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    max_grids: u64,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    max_class_size: u64,
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u64).range(1..))]
    max_word_weight: u64,
    /// Emit a single JSON document.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct PairArgs {
    #[command(flatten)]
    common: Common,
    /// Space separated letters; `1` is the empty word.
    u: String,
    v: String,
}

impl Common {
    fn presentation(&self) -> Result<Presentation, String> {
        if let Some(path) = &self.file {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            return parse_presentation(&text).map_err(|e| format!("{}: {e}", path.display()));
        }
        let name = self.catalog.as_deref().expect("clap enforces a source");
        catalog::by_name(name, self.shape.n as usize, self.shape.colors as usize).map_err(|e| e.to_string())
    }

    fn budget(&self) -> Budget {
        Budget {
            max_class_size: self.max_class_size as usize,
            max_cells: self.max_cells as usize,
            max_grids: self.max_grids as usize,
            max_word_weight: self.max_word_weight,
        }
    }
}

impl PairArgs {
    fn words(&self, p: &Presentation) -> Result<(Word, Word), String> {
        let parse = |text: &str| p.parse_word(text).map_err(|e| format!("in word `{text}`: {e}"));
        Ok((parse(&self.u)?, parse(&self.v)?))
    }
}

/// Collected output of one command.
struct Report {
    code: i32,
    json: Value,
    text: String,
}

/// Runs the command line `args` (program name first) and returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_YES,
                _ => EXIT_USAGE,
            };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_YES {
                write!(out, "{rendered}")
            } else {
                write!(err, "{rendered}")
            };
            return code;
        }
    };
    let json_mode = match &cli.command {
        Command::Validate(c) | Command::Complete(c) | Command::Defect(c) => c.json,
        Command::Reverse(p) | Command::Grids(p) | Command::Lcm(p) | Command::Multiple(p) => p.common.json,
        Command::Equiv { pair, .. } => pair.common.json,
        Command::Cancel { common, .. } => common.json,
        Command::Catalog { json, .. } => *json,
    };
    match execute(cli.command) {
        Ok(report) => {
            let written = if json_mode {
                let doc = serde_json::to_string_pretty(&report.json).expect("serializable");
                writeln!(out, "{doc}")
            } else {
                write!(out, "{}", report.text)
            };
            if written.is_err() {
                return EXIT_USAGE;
            }
            report.code
        }
        Err(message) => {
            let _ = writeln!(err, "error: {message}");
            EXIT_USAGE
        }
    }
}

fn execute(command: Command) -> Result<Report, String> {
    match command {
        Command::Validate(c) => validate(&c.presentation()?),
        Command::Reverse(args) => {
            let p = args.common.presentation()?;
            let (u, v) = args.words(&p)?;
            reverse(&p, &u, &v, &args.common.budget(), false)
        }
        Command::Grids(args) => {
            let p = args.common.presentation()?;
            let (u, v) = args.words(&p)?;
            reverse(&p, &u, &v, &args.common.budget(), true)
        }
        Command::Equiv { pair, reversing } => {
            let p = pair.common.presentation()?;
            let (u, v) = pair.words(&p)?;
            if reversing {
                equiv_by_reversing(&p, &u, &v, &pair.common.budget())
            } else {
                Ok(equiv(&p, &u, &v, &pair.common.budget()))
            }
        }
        Command::Complete(c) => Ok(complete(&c.presentation()?, &c.budget())),
        Command::Cancel { common, side } => Ok(cancel(&common.presentation()?, side, &common.budget())),
        Command::Lcm(args) => {
            let p = args.common.presentation()?;
            let (u, v) = args.words(&p)?;
            let result = right_lcm(&p, &u, &v, &args.common.budget()).map_err(|e| e.to_string())?;
            Ok(lcm(&p, &result))
        }
        Command::Multiple(args) => {
            let p = args.common.presentation()?;
            let (u, v) = args.words(&p)?;
            let result = common_right_multiple(&p, &u, &v, &args.common.budget()).map_err(|e| e.to_string())?;
            Ok(multiple(&p, &result))
        }
        Command::Defect(c) => Ok(defect_report(&c.presentation()?, &c.budget())),
        Command::Catalog { name, shape, emit, .. } => catalog_entry(name.as_deref(), &shape, emit),
    }
}

fn validate(p: &Presentation) -> Result<Report, String> {
    let diagnostics = p.validate();
    let ok = !diagnostics.iter().any(Diagnostic::is_error);
    let mut text = format!(
        "{} generators, {} relations\n",
        p.generator_count(),
        p.relations().len()
    );
    for d in &diagnostics {
        let line = match d {
            Diagnostic::EpsilonRelation { relation } => {
                format!(
                    "error: relation {relation} is an ε-relation ({})",
                    p.format_relation(p.relation(*relation))
                )
            }
            Diagnostic::DuplicateRelation { relation, duplicate_of } => {
                format!("note: dropped {relation}, a repeat of relation {duplicate_of}")
            }
            Diagnostic::TrivialRelation { relation } => format!("note: dropped trivial relation {relation}"),
            Diagnostic::WeightHomogeneity { homogeneous: true, .. } => "weight-homogeneous: yes".to_string(),
            Diagnostic::WeightHomogeneity { unbalanced, .. } => {
                format!("weight-homogeneous: no (unbalanced relations {unbalanced:?})")
            }
            Diagnostic::LeftCancelConflict { relation } => format!(
                "left-cancel conflict: relation {relation} ({})",
                p.format_relation(p.relation(*relation))
            ),
            Diagnostic::RightComplemented { complemented: true, .. } => "right-complemented: yes".to_string(),
            Diagnostic::RightComplemented { witness, .. } => match witness {
                Some((s, t)) => format!("right-complemented: no (pair {s}, {t})"),
                None => "right-complemented: no".to_string(),
            },
        };
        text.push_str(&line);
        text.push('\n');
    }
    Ok(Report {
        code: if ok { EXIT_YES } else { EXIT_NO },
        json: json!({
            "valid": ok,
            "generators": p.generator_count(),
            "relations": p.relations().len(),
            "diagnostics": serde_json::to_value(&diagnostics).expect("serializable"),
        }),
        text,
    })
}

fn status_json(outcome: &ReversalOutcome) -> Value {
    match outcome.status {
        ReversalStatus::Completed => json!({"status": "completed"}),
        ReversalStatus::BudgetExceeded { partial } => json!({"status": "budget_exceeded", "partial": partial}),
    }
}

fn reverse(p: &Presentation, u: &Word, v: &Word, b: &Budget, draw: bool) -> Result<Report, String> {
    let outcome = reverse_enumerate(p, u, v, b).map_err(|e| e.to_string())?;
    let code = match outcome.status {
        ReversalStatus::BudgetExceeded { .. } => EXIT_UNKNOWN,
        ReversalStatus::Completed if outcome.grids.is_empty() => EXIT_NO,
        ReversalStatus::Completed => EXIT_YES,
    };
    let stuck: Vec<Value> = outcome
        .stuck
        .iter()
        .map(|&(s, t)| json!([p.name(s), p.name(t)]))
        .collect();
    let mut text = String::new();
    let mut json = json!({
        "source": [p.tokens(u), p.tokens(v)],
        "enumeration": status_json(&outcome),
        "grid_count": outcome.grids.len(),
        "stuck": stuck,
    });
    if draw {
        json["grids"] = outcome.grids.iter().map(|g| g.to_json(p)).collect();
        for g in &outcome.grids {
            text.push_str(&render_grid(p, g));
            text.push('\n');
        }
    } else {
        json["targets"] = outcome
            .grids
            .iter()
            .map(|g| json!([p.tokens(&g.target.0), p.tokens(&g.target.1)]))
            .collect();
        for g in &outcome.grids {
            let _ = writeln!(
                text,
                "({}, {})  [{} cells]",
                p.format_word(&g.target.0),
                p.format_word(&g.target.1),
                g.cell_count()
            );
        }
    }
    for &(s, t) in &outcome.stuck {
        let _ = writeln!(text, "stuck: no tile for left {} and top {}", p.name(s), p.name(t));
    }
    let _ = match outcome.status {
        ReversalStatus::Completed => writeln!(text, "completed: {} grids", outcome.grids.len()),
        ReversalStatus::BudgetExceeded { partial } => {
            writeln!(
                text,
                "budget exceeded after {partial} partial grids; the list is not exhaustive"
            )
        }
    };
    Ok(Report { code, json, text })
}

fn equiv(p: &Presentation, u: &Word, v: &Word, b: &Budget) -> Report {
    let outcome = are_equivalent(p, u, v, b);
    let (code, text, distance) = match outcome.status {
        Equivalence::Equivalent { distance } => (EXIT_YES, format!("equivalent, distance {distance}"), json!(distance)),
        Equivalence::NotEquivalent => (EXIT_NO, "not equivalent".to_string(), json!("infinite")),
        Equivalence::BudgetExhausted => (
            EXIT_UNKNOWN,
            "inconclusive: class budget exhausted".to_string(),
            json!("unknown"),
        ),
    };
    Report {
        code,
        json: json!({
            "method": "oracle",
            "equivalent": match outcome.status {
                Equivalence::Equivalent { .. } => json!(true),
                Equivalence::NotEquivalent => json!(false),
                Equivalence::BudgetExhausted => Value::Null,
            },
            "distance": distance,
            "explored": outcome.explored,
        }),
        text: format!("{text} ({} words explored)\n", outcome.explored),
    }
}

fn equiv_by_reversing(p: &Presentation, u: &Word, v: &Word, b: &Budget) -> Result<Report, String> {
    let decision = decide_equiv_by_reversing(p, u, v, b).map_err(|e| e.to_string())?;
    let (code, text) = match decision {
        ReversingDecision::Reversible => (EXIT_YES, "reverses to (ε, ε): equivalent"),
        ReversingDecision::NotReversible => (
            EXIT_NO,
            "does not reverse to (ε, ε): not equivalent if reversing is complete",
        ),
        ReversingDecision::BudgetExceeded => (EXIT_UNKNOWN, "inconclusive: reversing budget exceeded"),
    };
    Ok(Report {
        code,
        json: json!({"method": "reversing", "reversible": decision.as_bool()}),
        text: format!("{text}\n"),
    })
}

fn verdict_code(verdict: &Verdict) -> i32 {
    match verdict {
        Verdict::Complete => EXIT_YES,
        Verdict::Incomplete { .. } => EXIT_NO,
        Verdict::Inconclusive { .. } => EXIT_UNKNOWN,
    }
}

fn complete(p: &Presentation, b: &Budget) -> Report {
    let report = check_completeness(p, b);
    let mut text = String::new();
    for r in &report.reports {
        let status = match &r.status {
            DiamondStatus::Verified { matching } => format!("verified ({} grids)", matching.len()),
            DiamondStatus::Counterexample { grid, .. } => format!(
                "COUNTEREXAMPLE target ({}, {})",
                p.format_word(&grid.target.0),
                p.format_word(&grid.target.1)
            ),
            DiamondStatus::Inconclusive { reason } => format!("inconclusive: {reason}"),
        };
        let _ = writeln!(
            text,
            "{:<8} {:<40} {:<9} {status}",
            p.name(r.generator),
            p.format_relation(p.relation(r.relation)),
            r.direction.as_str()
        );
    }
    let _ = match &report.verdict {
        Verdict::Complete => writeln!(text, "verdict: complete ({} checks)", report.reports.len()),
        Verdict::Incomplete { witness } => {
            let _ = writeln!(text, "verdict: incomplete");
            if let DiamondStatus::Counterexample { grid, .. } = &witness.status {
                text.push_str(&render_grid(p, grid));
            }
            Ok(())
        }
        Verdict::Inconclusive { reason } => writeln!(text, "verdict: inconclusive ({reason})"),
    };
    Report {
        code: verdict_code(&report.verdict),
        json: report.to_json(p),
        text,
    }
}

fn describe_cancel(v: &CancellativityVerdict) -> String {
    let side = match v.side {
        Side::Left => "left",
        Side::Right => "right",
    };
    match &v.status {
        CancellativityStatus::Cancellative => format!("{side}: cancellative"),
        CancellativityStatus::NotByThisCriterion { reason } => format!("{side}: not by this criterion ({reason})"),
        CancellativityStatus::Inconclusive { reason } => format!("{side}: inconclusive ({reason})"),
    }
}

fn cancel(p: &Presentation, side: SideArg, b: &Budget) -> Report {
    let mut verdicts = Vec::new();
    if side != SideArg::Right {
        verdicts.push(check_left_cancellative(p, b));
    }
    if side != SideArg::Left {
        verdicts.push(check_right_cancellative(p, b));
    }
    // the criterion is only sufficient, so a failed hypothesis is "don't know"
    let code = if verdicts.iter().all(CancellativityVerdict::is_cancellative) {
        EXIT_YES
    } else {
        EXIT_UNKNOWN
    };
    let mut json = json!({});
    let mut evidence = json!({});
    let mut text = String::new();
    for v in &verdicts {
        let key = match v.side {
            Side::Left => "left",
            Side::Right => "right",
        };
        let entry = v.to_json(p);
        evidence[key] = entry["evidence"].clone();
        json[key] = entry;
        text.push_str(&describe_cancel(v));
        text.push('\n');
    }
    json["evidence"] = evidence;
    Report { code, json, text }
}

fn lcm(p: &Presentation, result: &LcmResult) -> Report {
    let (code, text) = match result {
        LcmResult::Lcm { multiple, complements } => (
            EXIT_YES,
            format!(
                "lcm {} (complements {}, {})",
                p.format_word(multiple),
                p.format_word(&complements.0),
                p.format_word(&complements.1)
            ),
        ),
        LcmResult::NoCommonMultiple { stuck } => (
            EXIT_NO,
            format!("no common right multiple ({} stuck pairs)", stuck.len()),
        ),
        LcmResult::Inconclusive { reason } => (EXIT_UNKNOWN, format!("inconclusive: {reason}")),
    };
    Report {
        code,
        json: result.to_json(p),
        text: format!("{text}\n"),
    }
}

fn multiple(p: &Presentation, result: &MultipleResult) -> Report {
    let (code, text) = match result {
        MultipleResult::Multiple { multiple, grid, .. } => (
            EXIT_YES,
            format!(
                "common right multiple {}\n{}",
                p.format_word(multiple),
                render_grid(p, grid)
            ),
        ),
        MultipleResult::NoCommonMultiple { stuck } => (
            EXIT_NO,
            format!("no common right multiple ({} stuck pairs)\n", stuck.len()),
        ),
        MultipleResult::Inconclusive { reason } => (EXIT_UNKNOWN, format!("inconclusive: {reason}\n")),
    };
    Report {
        code,
        json: result.to_json(p),
        text,
    }
}

fn defect_report(p: &Presentation, b: &Budget) -> Report {
    let result = defect(p, b);
    let (code, mut text) = match result.value {
        DefectValue::Finite(n) => (EXIT_YES, format!("defect {n}\n")),
        DefectValue::Infinite => (EXIT_NO, "defect infinite: reversing is not complete\n".to_string()),
        DefectValue::Unknown => (EXIT_UNKNOWN, "defect unknown: budget exhausted\n".to_string()),
    };
    if let Some(w) = &result.witness {
        let _ = writeln!(
            text,
            "attained at {} against {} ({})",
            p.name(w.generator),
            p.format_relation(p.relation(w.relation)),
            w.direction.as_str()
        );
        text.push_str(&render_grid(p, &w.grid));
        if let Some(partner) = &w.partner {
            text.push_str("closest partner:\n");
            text.push_str(&render_grid(p, partner));
        }
    }
    Report {
        code,
        json: result.to_json(p),
        text,
    }
}

fn catalog_entry(name: Option<&str>, shape: &Shape, emit: bool) -> Result<Report, String> {
    let Some(name) = name else {
        let mut text = String::new();
        for entry in catalog::ENTRY_NAMES {
            let _ = writeln!(text, "{entry}");
        }
        return Ok(Report {
            code: EXIT_YES,
            json: json!({"entries": catalog::ENTRY_NAMES}),
            text,
        });
    };
    let p = catalog::by_name(name, shape.n as usize, shape.colors as usize).map_err(|e| e.to_string())?;
    let file = p.to_file_text();
    let text = if emit {
        file.clone()
    } else {
        format!(
            "{name}: {} generators, {} relations\n",
            p.generator_count(),
            p.relations().len()
        )
    };
    Ok(Report {
        code: EXIT_YES,
        json: json!({
            "name": name,
            "generators": p.alphabet().map(|l| p.name(l)).collect::<Vec<_>>(),
            "relations": p.relations().len(),
            "file": file,
        }),
        text,
    })
}

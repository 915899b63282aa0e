use std::io::Write;

use reversal_cli::{run, EXIT_NO, EXIT_UNKNOWN, EXIT_USAGE, EXIT_YES};
use serde_json::Value;

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn reversal(args: &[&str]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("reversal").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = args.to_vec();
    full.push("--json");
    let o = reversal(&full);
    let value = serde_json::from_str(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", o.stdout));
    (o.code, value)
}

#[test]
fn equivalent_braid_words() {
    let o = reversal(&["equiv", "--catalog", "braid", "--n", "4", "s1 s2 s1", "s2 s1 s2"]);
    assert_eq!(o.code, EXIT_YES);
    assert!(o.stdout.contains("distance 1"));
    let (code, v) = json(&["equiv", "--catalog", "braid", "s1 s2", "s2 s1"]);
    assert_eq!(code, EXIT_NO);
    assert_eq!(v["equivalent"], false);
    assert_eq!(v["distance"], "infinite");
}

#[test]
fn equiv_by_reversing_on_the_witness_pair() {
    let args = [
        "equiv",
        "--reversing",
        "--catalog",
        "restricted-colored",
        "s2.b s3.b s2.b s1.a s2.b s3.a",
        "s1.a s3.b s2.a s1.b s3.b s2.b",
    ];
    assert_eq!(reversal(&args).code, EXIT_NO);
    assert_eq!(
        reversal(&args[..1].iter().chain(&args[2..]).copied().collect::<Vec<_>>()).code,
        EXIT_YES
    );
}

#[test]
fn colored_braid_is_complete() {
    let (code, v) = json(&["complete", "--catalog", "colored-braid", "--n", "4", "--colors", "2"]);
    assert_eq!(code, EXIT_YES);
    assert_eq!(v["verdict"], "complete");
}

#[test]
fn restricted_presentation() {
    let o = reversal(&["cancel", "--catalog", "restricted-colored", "--n", "4", "--colors", "2"]);
    assert_eq!(o.code, EXIT_UNKNOWN);
    assert!(o.stdout.contains("not by this criterion"));
    let (code, v) = json(&["complete", "--catalog", "restricted-colored"]);
    assert_eq!(code, EXIT_NO);
    assert_eq!(v["verdict"], "incomplete");
    assert!(v["witness"].is_object());
}

#[test]
fn cancel_json_shape() {
    let (code, v) = json(&["cancel", "--catalog", "colored-braid"]);
    assert_eq!(code, EXIT_YES);
    for side in ["left", "right"] {
        assert_eq!(v[side]["status"], "cancellative");
        assert_eq!(v["evidence"][side]["verdict"], "complete");
    }
    let (_, v) = json(&["cancel", "--catalog", "malcev", "--side", "left"]);
    assert!(v.get("right").is_none());
}

#[test]
fn grids_json_schema() {
    let (code, v) = json(&["grids", "--catalog", "braid", "s1", "s2 s3 s2"]);
    assert_eq!(code, EXIT_YES);
    let grids = v["grids"].as_array().unwrap();
    assert_eq!(grids.len(), 1);
    let g = &grids[0];
    assert_eq!(g["cells"].as_array().unwrap().len(), 8);
    assert_eq!(g["target"][1], serde_json::json!(["s2", "s1", "s3", "s2", "s1"]));
    for cell in g["cells"].as_array().unwrap() {
        for key in ["left", "top", "kind", "right", "bottom"] {
            assert!(cell.get(key).is_some(), "{key}");
        }
    }
}

#[test]
fn grids_are_drawn() {
    let o = reversal(&["grids", "--catalog", "braid", "--n", "3", "s1", "s2"]);
    assert_eq!(o.code, EXIT_YES);
    assert!(o.stdout.starts_with("+---s2----+\n"));
    assert!(o.stdout.contains("completed: 1 grids"));
}

#[test]
fn stuck_reversal_is_negative() {
    let o = reversal(&["reverse", "--catalog", "colored-braid", "s1.a", "s1.b"]);
    assert_eq!(o.code, EXIT_NO);
    assert!(o.stdout.contains("stuck: no tile for left s1.a and top s1.b"));
}

#[test]
fn budget_exhaustion_is_inconclusive() {
    let (code, v) = json(&["reverse", "--catalog", "braid", "--max-cells", "1", "s1 s2", "s2 s1"]);
    assert_eq!(code, EXIT_UNKNOWN);
    assert_eq!(v["enumeration"]["status"], "budget_exceeded");
    let o = reversal(&[
        "equiv",
        "--catalog",
        "braid",
        "--max-class-size",
        "1",
        "s1 s2 s1",
        "s2 s1 s2",
    ]);
    assert_eq!(o.code, EXIT_UNKNOWN);
}

#[test]
fn lcm_and_multiples() {
    let (code, v) = json(&["lcm", "--catalog", "braid", "s1", "s2"]);
    assert_eq!(code, EXIT_YES);
    assert_eq!(v["multiple"], serde_json::json!(["s1", "s2", "s1"]));
    let (code, v) = json(&["multiple", "--catalog", "colored-braid", "s1.a", "s1.b"]);
    assert_eq!(code, EXIT_NO);
    assert_eq!(v["status"], "no_common_multiple");
    let o = reversal(&["lcm", "--catalog", "colored-braid", "s1.a", "s2.a"]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.stderr.contains("right-complemented"));
}

#[test]
fn defect_of_colored_braid() {
    let (code, v) = json(&["defect", "--catalog", "colored-braid"]);
    assert_eq!(code, EXIT_YES);
    assert_eq!(v["value"], 5);
    let (code, v) = json(&["defect", "--catalog", "restricted-colored"]);
    assert_eq!(code, EXIT_NO);
    assert_eq!(v["value"], "infinite");
}

#[test]
fn presentation_files() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "# commuting letters\ngens: a b\nrel: a b = b a").unwrap();
    let path = file.path().to_str().unwrap();
    assert_eq!(reversal(&["validate", "--file", path]).code, EXIT_YES);
    assert_eq!(reversal(&["equiv", "--file", path, "a b a", "b a a"]).code, EXIT_YES);
    assert_eq!(reversal(&["equiv", "--file", path, "1", "1"]).code, EXIT_YES);

    let mut eps = tempfile::NamedTempFile::new().unwrap();
    writeln!(eps, "gens: a b\nrel: a b = 1").unwrap();
    let path = eps.path().to_str().unwrap();
    let (code, v) = json(&["validate", "--file", path]);
    assert_eq!(code, EXIT_NO);
    assert_eq!(v["diagnostics"][0]["kind"], "epsilon_relation");

    let mut bad = tempfile::NamedTempFile::new().unwrap();
    writeln!(bad, "gens: a\nrel: a = b").unwrap();
    let o = reversal(&["validate", "--file", bad.path().to_str().unwrap()]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.stderr.contains("line 2"));
}

#[test]
fn emitted_catalog_files_round_trip() {
    for name in ["braid", "colored-braid", "restricted-colored", "malcev", "free"] {
        let emitted = reversal(&["catalog", name, "--n", "4", "--colors", "2", "--emit"]);
        assert_eq!(emitted.code, EXIT_YES);
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(emitted.stdout.as_bytes()).unwrap();
        let path = file.path().to_str().unwrap();
        let from_file = reversal(&["complete", "--file", path, "--json"]);
        let from_catalog = reversal(&["complete", "--catalog", name, "--json"]);
        assert_eq!(from_file.stdout, from_catalog.stdout, "{name}");
    }
    let (code, v) = json(&["catalog"]);
    assert_eq!(code, EXIT_YES);
    assert_eq!(v["entries"].as_array().unwrap().len(), 5);
}

#[test]
fn usage_errors() {
    for args in [
        vec!["equiv", "s1", "s2"],
        vec!["equiv", "--catalog", "braid", "--file", "x", "s1", "s2"],
        vec!["complete", "--catalog", "nope"],
        vec!["complete", "--catalog", "braid", "--max-grids", "0"],
        vec!["equiv", "--catalog", "braid", "s1", "q"],
        vec!["frobnicate"],
        vec!["complete", "--file", "/nonexistent/presentation.txt"],
    ] {
        let o = reversal(&args);
        assert_eq!(o.code, EXIT_USAGE, "{args:?}");
        assert!(o.stdout.is_empty());
        assert!(!o.stderr.is_empty());
    }
    let o = reversal(&["complete", "--catalog", "braid", "--max-grids", "0"]);
    assert!(o.stderr.contains("--max-grids"));
    assert_eq!(reversal(&["--help"]).code, EXIT_YES);
    assert_eq!(reversal(&["--version"]).code, EXIT_YES);
}

#[test]
fn json_is_deterministic_and_sorted() {
    let args = ["complete", "--catalog", "colored-braid", "--n", "3", "--json"];
    let first = reversal(&args).stdout;
    assert_eq!(first, reversal(&args).stdout);
    let v: Value = serde_json::from_str(&first).unwrap();
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    // keys appear sorted in the text itself, not only after parsing
    let noetherian = first.find("\"noetherian\"").unwrap();
    let verdict = first.find("\"verdict\"").unwrap();
    assert!(noetherian < verdict);
}

//! End-to-end tests of the `singcalc` binary: golden-file comparisons for
//! the 1/19(1,7) worked examples, JSON round-trips, DOT well-formedness,
//! and the exit-code contract (0 success, 1 domain error with a JSON report
//! on stderr, 2 usage error).

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::Command;

use singcalc_core::cfrac::Chain;
use singcalc_core::resolutions::DecoratedResolution;

fn singcalc(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_singcalc"))
        .args(args)
        .env_remove("SINGCALC_STEP_BUDGET")
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("binary exits"),
        String::from_utf8(out.stdout).expect("stdout is UTF-8"),
        String::from_utf8(out.stderr).expect("stderr is UTF-8"),
    )
}

fn ok(args: &[&str]) -> String {
    let (code, stdout, stderr) = singcalc(args);
    assert_eq!(code, 0, "singcalc {args:?} failed: {stderr}");
    stdout
}

fn golden(rel: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(rel);
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("missing golden {}: {e}", path.display()))
}

fn is_dot_id(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Checks `text` against the fragment of the DOT grammar the tool emits:
/// a sequence of `graph <id> { ... }` blocks whose statements are attribute
/// assignments, node declarations with `[key=value, ...]` lists, or edges
/// between declared nodes, each terminated by a semicolon.
fn assert_valid_dot(text: &str) {
    let mut lines = text.lines();
    let mut graphs = 0;
    while let Some(header) = lines.next() {
        let header = header.trim();
        if header.is_empty() {
            continue;
        }
        let name = header
            .strip_prefix("graph ")
            .and_then(|rest| rest.trim().strip_suffix('{'))
            .unwrap_or_else(|| panic!("expected a graph header, got {header:?}"))
            .trim();
        assert!(is_dot_id(name), "bad graph id {name:?}");
        let mut nodes: BTreeSet<String> = BTreeSet::new();
        let mut closed = false;
        for line in lines.by_ref() {
            let line = line.trim();
            if line == "}" {
                closed = true;
                break;
            }
            let stmt = line
                .strip_suffix(';')
                .unwrap_or_else(|| panic!("statement without semicolon: {line:?}"));
            if let Some((l, r)) = stmt.split_once("--") {
                for end in [l.trim(), r.trim()] {
                    assert!(nodes.contains(end), "edge endpoint {end:?} undeclared");
                }
            } else if let Some((id, attrs)) = stmt.split_once('[') {
                let id = id.trim();
                assert!(is_dot_id(id), "bad node id {id:?}");
                let attrs = attrs.strip_suffix(']').expect("attribute list closes");
                for kv in attrs.split(',') {
                    let (k, v) = kv.split_once('=').expect("attribute is key=value");
                    assert!(is_dot_id(k.trim()), "bad attribute key {k:?}");
                    let v = v.trim();
                    let quoted = v.len() >= 2 && v.starts_with('"') && v.ends_with('"');
                    assert!(quoted || is_dot_id(v), "bad attribute value {v:?}");
                }
                nodes.insert(id.to_string());
            } else if let Some((k, v)) = stmt.split_once('=') {
                assert!(
                    is_dot_id(k.trim()) && is_dot_id(v.trim()),
                    "bad assignment {stmt:?}"
                );
            } else {
                panic!("unrecognized statement {stmt:?}");
            }
        }
        assert!(closed, "graph {name} never closes");
        graphs += 1;
    }
    assert!(graphs > 0, "no graphs in DOT output");
}

#[test]
fn expansion_and_dual_match_golden() {
    assert_eq!(ok(&["cf", "19", "7"]), golden("19_7/cf.txt"));
    assert_eq!(ok(&["cf", "19", "7", "--json"]), golden("19_7/cf.txt"));
    assert_eq!(ok(&["dual", "19", "7"]), golden("19_7/dual.txt"));
}

#[test]
fn expansion_json_round_trips() {
    let text = ok(&["cf", "19", "7", "--json"]);
    let chain: Chain = serde_json::from_str(text.trim()).expect("parses as a chain");
    assert_eq!(serde_json::to_string(&chain).unwrap(), text.trim());
}

#[test]
fn descriptor_set_matches_golden() {
    assert_eq!(ok(&["ke", "19", "7"]), golden("19_7/ke.txt"));
    let text = ok(&["ke", "19", "7", "--json"]);
    assert_eq!(text, golden("19_7/ke.json"));
    let tuples: Vec<Vec<i64>> = serde_json::from_str(text.trim()).expect("parses as tuples");
    assert_eq!(serde_json::to_string(&tuples).unwrap(), text.trim());
}

#[test]
fn maximal_resolution_matches_golden() {
    assert_eq!(ok(&["maxres", "19", "7"]), golden("19_7/maxres.txt"));
    let text = ok(&["maxres", "19", "7", "--json"]);
    assert_eq!(text, golden("19_7/maxres.json"));
    let value: serde_json::Value = serde_json::from_str(text.trim()).expect("parses");
    assert_eq!(value["alphas"][0]["num"], "8");
    assert_eq!(value["alphas"][0]["den"], "19");
}

#[test]
fn resolution_listing_matches_golden() {
    assert_eq!(ok(&["pres", "19", "7"]), golden("19_7_pres/pres.txt"));
    let text = ok(&["pres", "19", "7", "--json"]);
    assert_eq!(text, golden("19_7_pres/pres.json"));
    let list: Vec<DecoratedResolution> =
        serde_json::from_str(text.trim()).expect("parses as decorations");
    assert_eq!(list.len(), 3);
    assert_eq!(serde_json::to_string(&list).unwrap(), text.trim());
}

#[test]
fn resolution_graphs_are_valid_dot() {
    let text = ok(&["pres", "19", "7", "--dot"]);
    assert_eq!(text, golden("19_7_pres/pres.dot"));
    assert_valid_dot(&text);
    assert!(text.contains("shape=box") && text.contains("shape=circle"));
}

#[test]
fn crepant_refinements_match_golden() {
    assert_eq!(ok(&["crepant", "19", "7"]), golden("19_7_pres/crepant.txt"));
    assert_eq!(ok(&["crepant", "19", "7", "--pres", "3"]), "[4] -1 [5,2]\n");
    assert_valid_dot(&ok(&["crepant", "19", "7", "--pres", "3", "--dot"]));
}

#[test]
fn program_run_stream_matches_golden() {
    let text = ok(&["mmp", "19", "7", "--pres", "3"]);
    assert_eq!(text, golden("19_7_mmp/mmp_y3.jsonl"));
    for line in text.lines() {
        serde_json::from_str::<serde_json::Value>(line).expect("every line is JSON");
    }
    let summary: serde_json::Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(summary["flips"], 2);
    assert_eq!(summary["n"], serde_json::json!([2, 2, 1, 3]));
    assert_eq!(summary["filling"], "W_{19,7}(2,2,1,3)");
}

#[test]
fn identification_matches_golden() {
    let text = ok(&["identify", "19", "7"]);
    assert_eq!(text, golden("19_7_mmp/identify.jsonl"));
    let (code, all, _) = singcalc(&["identify", "19", "7", "--all"]);
    assert_eq!(code, 0);
    assert_eq!(all, text);
}

#[test]
fn identification_accepts_inline_decorations() {
    let listing = ok(&["pres", "19", "7", "--json"]);
    let list: Vec<DecoratedResolution> = serde_json::from_str(listing.trim()).unwrap();
    let inline = serde_json::to_string(&list[2]).unwrap();
    let text = ok(&["identify", "19", "7", "--pres", &inline]);
    assert_eq!(text, golden("19_7_mmp/identify.jsonl").lines().last().unwrap().to_owned() + "\n");
}

#[test]
fn decoration_files_feed_the_program_runner() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    fs::write(&path, ok(&["crepant", "19", "7", "--pres", "3", "--json"])).unwrap();
    let text = ok(&["mmp", "19", "7", "--pres-file", path.to_str().unwrap()]);
    assert_eq!(text, golden("19_7_mmp/mmp_y3.jsonl"));
}

#[test]
fn frame_export_writes_one_valid_graph_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let frames = dir.path().join("frames");
    let text = ok(&[
        "mmp",
        "19",
        "7",
        "--pres",
        "3",
        "--dot-frames",
        frames.to_str().unwrap(),
    ]);
    let steps = text.lines().count() - 1; // final line is the summary
    let mut names: Vec<String> = fs::read_dir(&frames)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    let expected: Vec<String> = (0..=steps).map(|k| format!("frame_{k:03}.dot")).collect();
    assert_eq!(names, expected);
    for name in &names {
        assert_valid_dot(&fs::read_to_string(frames.join(name)).unwrap());
    }
    let last = fs::read_to_string(frames.join(names.last().unwrap())).unwrap();
    assert!(last.contains("label=\"1\""), "final frame is the [1,1] chain");
}

#[test]
fn boundary_limit_flip_case_runs_at_the_command_line() {
    let text = ok(&["mmp", "9", "5", "--pres", "2"]);
    let summary: serde_json::Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(summary["flips"], 2);
    assert_eq!(summary["d"], serde_json::json!([0, 1, 0, 0]));
    assert_eq!(summary["n"], serde_json::json!([3, 1, 2, 2]));
    assert_eq!(summary["filling"], "W_{9,5}(3,1,2,2)");
}

#[test]
fn verification_reports_the_pair_count() {
    assert_eq!(ok(&["verify", "19", "7"]), golden("19_7/verify.txt"));
    let text = ok(&["verify", "19", "7", "--json"]);
    let value: serde_json::Value = serde_json::from_str(text.trim()).unwrap();
    assert_eq!(value["singularity"], "1/19(1,7)");
    assert_eq!(value["bijective"], true);
    assert_eq!(value["pairs"], 3);
}

#[test]
fn sweep_is_clean_on_a_small_range() {
    let (code, stdout, _) = singcalc(&["sweep", "--max-n", "12"]);
    assert_eq!(code, 0);
    assert!(stdout.lines().count() > 10);
    for line in stdout.lines() {
        assert!(line.contains("bijective: true"), "unexpected row {line:?}");
    }
    let (code, rows, _) = singcalc(&["sweep", "--max-n", "8", "--json"]);
    assert_eq!(code, 0);
    for line in rows.lines() {
        let row: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(row["bijective"], true);
    }
}

#[test]
fn degenerate_boundary_is_a_domain_error() {
    let (code, stdout, stderr) = singcalc(&["ke", "5", "4"]);
    assert_eq!(code, 1);
    assert!(stdout.is_empty());
    let err: serde_json::Value = serde_json::from_str(stderr.trim()).unwrap();
    assert_eq!(err["error"], "degenerate-length");
}

#[test]
fn invalid_fractions_are_domain_errors() {
    for args in [["cf", "19", "0"], ["cf", "4", "2"], ["cf", "1", "3"]] {
        let (code, _, stderr) = singcalc(&args);
        assert_eq!(code, 1, "cf {args:?}");
        let err: serde_json::Value = serde_json::from_str(stderr.trim()).unwrap();
        assert_eq!(err["error"], "invalid-fraction");
    }
}

#[test]
fn exhausted_budgets_are_domain_errors() {
    let (code, _, stderr) = singcalc(&["mmp", "19", "7", "--pres", "3", "--step-budget", "2"]);
    assert_eq!(code, 1);
    let err: serde_json::Value = serde_json::from_str(stderr.trim()).unwrap();
    assert_eq!(err["error"], "budget-exceeded");
}

#[test]
fn environment_variable_sets_the_default_budget() {
    let out = Command::new(env!("CARGO_BIN_EXE_singcalc"))
        .args(["mmp", "19", "7", "--pres", "3"])
        .env("SINGCALC_STEP_BUDGET", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value =
        serde_json::from_str(String::from_utf8(out.stderr).unwrap().trim()).unwrap();
    assert_eq!(err["error"], "budget-exceeded");
    // An explicit flag wins over the environment.
    let out = Command::new(env!("CARGO_BIN_EXE_singcalc"))
        .args(["mmp", "19", "7", "--pres", "3", "--step-budget", "500"])
        .env("SINGCALC_STEP_BUDGET", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn selector_mistakes_are_domain_errors() {
    for selector in ["9", "0"] {
        let (code, _, stderr) = singcalc(&["mmp", "19", "7", "--pres", selector]);
        assert_eq!(code, 1, "--pres {selector}");
        let err: serde_json::Value = serde_json::from_str(stderr.trim()).unwrap();
        assert_eq!(err["error"], "invalid-input");
    }
}

#[test]
fn usage_mistakes_exit_with_two() {
    for args in [
        &["pres", "19", "7", "--json", "--dot"][..],
        &["mmp", "19", "7"][..],
        &["cf", "19"][..],
        &["nonsense"][..],
    ] {
        let (code, _, _) = singcalc(args);
        assert_eq!(code, 2, "args {args:?}");
    }
}

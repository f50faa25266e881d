use std::path::PathBuf;

use paflow::equivalence::twist_all;
use paflow::*;
use serde_json::{json, Value};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

struct Outcome {
    code: i32,
    out: String,
    err: String,
}

impl Outcome {
    fn json(&self) -> Value {
        serde_json::from_str(&self.out).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", self.out))
    }
}

fn run(args: &[&str]) -> Outcome {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("paflow").chain(args.iter().copied());
    let code = paflow_cli::run(argv, &mut out, &mut err);
    Outcome { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

fn write_temp(dir: &tempfile::TempDir, name: &str, content: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, content).unwrap();
    path.display().to_string()
}

#[test]
fn fixtures_are_the_library_fixtures() {
    let read = |name: &str| -> ModelFlowSpec { serde_json::from_str(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap() };
    assert_eq!(read("banana.json"), fixtures::banana_self_glued());
    assert_eq!(read("banana_twisted.json"), twist_all(&fixtures::banana_self_glued(), 2, -1).unwrap());
    assert_eq!(read("two_banana.json"), fixtures::two_banana_spec());
    assert_eq!(read("marked_two_banana.json"), fixtures::marked_two_banana_spec());
    assert_eq!(read("marked_two_banana_negated.json"), fixtures::marked_two_banana_spec().with_negated_seed("b"));
}

#[test]
fn validate_lists_the_four_conditions() {
    let r = run(&["validate", &fixture("banana.json")]);
    assert_eq!(r.code, 0, "{}", r.err);
    let v = r.json();
    assert_eq!(v["status"], "pass");
    let findings = v["findings"].as_array().unwrap();
    for condition in ["condition-1-connected", "condition-2-even-valence", "condition-3-sides-differ", "condition-4-even-boundary"] {
        let f = findings.iter().find(|f| f["check"] == condition).unwrap_or_else(|| panic!("{condition} missing"));
        assert_eq!(f["passed"], true);
    }
    let expected = serde_json::to_value(validate_spec(&fixtures::banana_self_glued()).findings).unwrap();
    assert_eq!(v["findings"], expected);
}

#[test]
fn validate_fails_on_upper_triangular_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = fixtures::banana_self_glued();
    s.matrices.insert(0, GluingMatrix::new(1, 3, 0, 1));
    let path = write_temp(&dir, "upper.json", &serde_json::to_string(&s).unwrap());
    let r = run(&["validate", &path]);
    assert_eq!(r.code, 1);
    assert_eq!(r.json()["status"], "fail");
    // other subcommands refuse the spec outright
    let r = run(&["build-graph", &path]);
    assert_eq!(r.code, 2);
    assert_eq!(r.json()["status"], "error");
}

#[test]
fn transitive_banana() {
    let r = run(&["transitive", &fixture("banana.json")]);
    assert_eq!(r.code, 0);
    assert_eq!(r.json()["payload"], json!({ "transitive": true }));
}

#[test]
fn build_graph_payload_is_the_export() {
    let r = run(&["build-graph", &fixture("banana.json")]);
    assert_eq!(r.code, 0);
    let s = fixtures::banana_self_glued();
    let g = build_flow_graph(&s, &s.orientation().unwrap()).unwrap();
    assert_eq!(r.json()["payload"], serde_json::to_value(g.export()).unwrap());
    let text = run(&["build-graph", &fixture("banana.json"), "--format", "text"]);
    assert_eq!(text.out, "T1 T2 -1 banana.0\nT1 T1 +1 banana.1\nT2 T1 -1 banana.2\nT2 T2 +1 banana.3\n");
}

#[test]
fn equiv_twisted_copy() {
    let (a, b) = (fixture("banana.json"), fixture("banana_twisted.json"));
    let r = run(&["equiv", &a, &b, "--mode", "isotopy-with-twists"]);
    assert_eq!(r.code, 0);
    let v = r.json();
    assert_eq!(v["payload"]["equivalent"], true);
    let w: EquivalenceWitness = serde_json::from_value(v["payload"]["witness"].clone()).unwrap();
    let (s1, s2) = (fixtures::banana_self_glued(), twist_all(&fixtures::banana_self_glued(), 2, -1).unwrap());
    assert!(verify_witness(&s1, &s2, &w, EquivalenceMode::IsotopyWithTwists).unwrap());
    for mode in ["exact", "isotopy"] {
        let r = run(&["equiv", &a, &b, "--mode", mode]);
        assert_eq!(r.code, 1, "{mode}");
        assert_eq!(r.json()["payload"]["witness"], Value::Null);
    }
}

#[test]
fn equiv_distinguishes_orientation_classes() {
    let r = run(&["equiv", &fixture("marked_two_banana.json"), &fixture("marked_two_banana_negated.json")]);
    assert_eq!(r.code, 1);
    let r = run(&["equiv", &fixture("marked_two_banana.json"), &fixture("marked_two_banana.json"), "--allow-reflection"]);
    assert_eq!(r.code, 0);
}

#[test]
fn orient_counts_classes() {
    let r = run(&["orient", &fixture("marked_two_banana.json")]);
    assert_eq!(r.code, 0);
    let expected = orientation_classes(&fixtures::marked_two_banana_spec()).unwrap();
    assert_eq!(r.json()["payload"], serde_json::to_value(expected).unwrap());
    assert_eq!(r.json()["payload"]["count"], 4);
}

#[test]
fn itinerary_words_and_periodic_words() {
    let spec = fixture("banana.json");
    let r = run(&["itinerary", &spec, &fixture("word_valid.json")]);
    assert_eq!((r.code, r.json()["payload"]["valid"].clone()), (0, json!(true)));
    let r = run(&["itinerary", &spec, &fixture("word_orbits.json")]);
    assert_eq!(r.code, 0);
    let dir = tempfile::tempdir().unwrap();
    let bad = write_temp(&dir, "w.json", r#"{"body": ["T1", "T3"]}"#);
    assert_eq!(run(&["itinerary", &spec, &bad]).code, 2);
    let r = run(&["itinerary", &spec, "--max-len", "4"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.json()["payload"]["counts"], json!([2, 3, 4, 6]));
    assert_eq!(run(&["itinerary", &spec]).code, 2);
    assert_eq!(run(&["itinerary", &spec, "--max-len", "40"]).code, 2);
}

#[test]
fn census_payload_matches_library() {
    let r = run(&["census", "--max-edges", "3"]);
    assert_eq!(r.code, 0);
    let v = r.json();
    assert_eq!(v["payload"]["spines"], serde_json::to_value(enumerate_spines(3).unwrap()).unwrap());
    let specs = spec_census(CensusOptions { max_edges: 3, max_pieces: 2 }).unwrap();
    assert_eq!(v["payload"]["specs"], serde_json::to_value(specs).unwrap());
    assert_eq!(run(&["census", "--max-edges", "4", "--format", "text"]).out, "9 spines, 34 specs\n");
    assert_eq!(run(&["census", "--max-edges", "9"]).code, 2);
}

#[test]
fn normalize_matrix_command() {
    let r = run(&["normalize-matrix", &fixture("matrix.json")]);
    assert_eq!(r.code, 0);
    let expected = normalize_matrix(&GluingMatrix::new(2, 3, 5, 7)).unwrap();
    assert_eq!(r.json()["payload"], serde_json::to_value(expected).unwrap());
    let r = run(&["normalize-matrix", &fixture("upper_matrix.json")]);
    assert_eq!(r.code, 2);
    assert!(r.err.contains("upper triangular"), "{}", r.err);
}

#[test]
fn parse_errors_name_file_line_and_pointer() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_temp(&dir, "bad.json", "{\n  \"pieces\": [],\n  \"bases\": {\"a.0\": [1, 2]}\n}\n");
    let r = run(&["validate", &path]);
    assert_eq!(r.code, 2);
    assert!(r.err.contains(&format!("{path}:3:")), "{}", r.err);
    assert!(r.err.contains("/bases/a.0/1"), "{}", r.err);
    let trailing = write_temp(&dir, "trailing.json", "[[2, 3], [5, 7]] x");
    assert_eq!(run(&["normalize-matrix", &trailing]).code, 2);
    let r = run(&["validate", &dir.path().join("missing.json").display().to_string()]);
    assert_eq!(r.code, 2);
    assert!(r.err.contains("missing.json"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [vec!["bogus"], vec!["validate", "--frob", "x"], vec![], vec!["equiv", "only-one.json"], vec!["equiv", "a", "b", "--mode", "loose"]] {
        let r = run(&args);
        assert_eq!(r.code, 2, "{args:?}");
        assert!(!r.err.is_empty());
    }
    assert_eq!(run(&["--help"]).code, 0);
}

#[test]
fn seed_flag_has_no_effect() {
    let spec = fixture("banana.json");
    let plain = run(&["itinerary", &spec, "--max-len", "3"]);
    let seeded = run(&["itinerary", &spec, "--max-len", "3", "--seed", "17"]);
    assert_eq!(plain.out, seeded.out);
}

#[test]
fn output_is_deterministic() {
    let args = ["equiv", &fixture("two_banana.json"), &fixture("two_banana.json")];
    assert_eq!(run(&args).out, run(&args).out);
}

#[test]
fn binary_exit_status() {
    let bin = env!("CARGO_BIN_EXE_paflow");
    let status = |args: &[&str]| std::process::Command::new(bin).args(args).output().unwrap().status.code();
    assert_eq!(status(&["transitive", &fixture("banana.json")]), Some(0));
    assert_eq!(status(&["equiv", &fixture("banana.json"), &fixture("banana_twisted.json"), "--mode", "exact"]), Some(1));
    assert_eq!(status(&["nonsense"]), Some(2));
}

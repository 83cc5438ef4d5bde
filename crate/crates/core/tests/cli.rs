//! End-to-end runs of the `bddcheck` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bddcheck::netlist::parse;
use bddcheck::oracle::circuit_truth_table;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bddcheck"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const AND: &str = ".inputs x1 x2\n.outputs f\n.gate and f x1 x2\n.end\n";
const OR: &str = ".inputs x1 x2\n.outputs f\n.gate or f x1 x2\n.end\n";
const TREE: &str = "\
.inputs x1 x2 x3 x4
.outputs f
.gate and a x1 x2
.gate and b x3 x4
.gate or f a b
.end
";

#[test]
fn verify_identical_files() {
    let d = tempfile::tempdir().unwrap();
    let a = write(d.path(), "a.net", AND);
    let out = run(&["verify", s(&a), s(&a)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("verdict: equivalent"));
}

#[test]
fn verify_and_vs_or_reports_counterexample() {
    let d = tempfile::tempdir().unwrap();
    let a = write(d.path(), "a.net", AND);
    let o = write(d.path(), "o.net", OR);
    let report = d.path().join("r.json");
    let out = run(&["verify", s(&a), s(&o), "--format", "json", "--out", s(&report)]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["verdict"], "not_equivalent");
    // AND and OR differ exactly where one input is set; the smallest such
    // assignment in variable order keeps x1 at 0.
    assert_eq!(v["counterexample"]["x1"], 0);
    assert_eq!(v["counterexample"]["x2"], 1);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["config"]["capacity"], 1u64 << 26);
    assert_eq!(v["config"]["order"], "dfs");
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn unparsable_file_exits_3_with_line() {
    let d = tempfile::tempdir().unwrap();
    let a = write(d.path(), "a.net", AND);
    let bad = write(d.path(), "bad.net", ".inputs x1 x2\n.outputs f\n.gate and f x1 nope\n.end\n");
    let out = run(&["verify", s(&a), s(&bad)]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
    assert!(err.contains("undefined signal"), "{err}");
}

#[test]
fn interface_mismatch_is_usage_error() {
    let d = tempfile::tempdir().unwrap();
    let a = write(d.path(), "a.net", AND);
    let b = write(d.path(), "b.net", ".inputs y1 y2\n.outputs f\n.gate and f y1 y2\n.end\n");
    assert_eq!(run(&["verify", s(&a), s(&b)]).status.code(), Some(3));
}

#[test]
fn simulate_tree_csv() {
    let d = tempfile::tempdir().unwrap();
    let t = write(d.path(), "t.net", TREE);
    let out = run(&["simulate", s(&t), "--order", "dfs"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "topo_index,signal,gate_kind,signal_size,created_cum,live_nodes,ite_entries_cum"
    );
    let last: Vec<&str> = csv.lines().last().unwrap().split(',').collect();
    assert_eq!(last[1], "f");
    assert_eq!(last[3], "4");
    assert_eq!(last[4], "4");
}

#[test]
fn simulate_with_poly_bound() {
    let d = tempfile::tempdir().unwrap();
    let t = write(d.path(), "t.net", TREE);
    let out = run(&["simulate", s(&t), "--poly-degree", "1", "--poly-coeff", "1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["poly_bound"]["passed"], true);
    assert_eq!(v["stats"]["completed"], true);
}

#[test]
fn simulate_capacity_abort_keeps_trace() {
    // 20 inputs folded by XOR: the projections alone need 20 nodes, so the
    // run stops at the eleventh input.
    let mut text = String::from(".inputs");
    for i in 0..20 {
        text += &format!(" x{i}");
    }
    text += "\n.outputs p\n.gate xor p";
    for i in 0..20 {
        text += &format!(" x{i}");
    }
    text += "\n.end\n";
    let d = tempfile::tempdir().unwrap();
    let c = write(d.path(), "x.net", &text);
    let out = run(&["simulate", s(&c), "--capacity", "10", "--format", "json"]);
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["stats"]["completed"], false);
    assert_eq!(v["stats"]["failing_signal"], "x10");
    assert_eq!(v["stats"]["signals"].as_array().unwrap().len(), 10);
}

#[test]
fn explicit_order_file() {
    let d = tempfile::tempdir().unwrap();
    let t = write(d.path(), "t.net", TREE);
    let ord = write(d.path(), "o.txt", "x1 x3 x2 x4\n");
    let out = run(&["simulate", s(&t), "--order", &format!("file:{}", s(&ord)), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["order_used"], serde_json::json!(["x1", "x3", "x2", "x4"]));
    // The interleaved order is worse than the depth-first one.
    assert!(v["stats"]["created_total"].as_u64().unwrap() > 4);

    let bad = write(d.path(), "bad.txt", "x1 x2\n");
    let out = run(&["simulate", s(&t), "--order", &format!("file:{}", s(&bad))]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn gen_tree_is_deterministic() {
    let a = run(&["gen-tree", "-n", "4", "--seed", "7"]);
    let b = run(&["gen-tree", "-n", "4", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = parse(&String::from_utf8(a.stdout).unwrap()).unwrap();
    assert!(c.is_tree());
    assert_eq!(c.input_count(), 4);
    assert_eq!(run(&["gen-tree", "-n", "1"]).status.code(), Some(3));
}

#[test]
fn expand_or_into_two_muxes() {
    let d = tempfile::tempdir().unwrap();
    let o = write(d.path(), "o.net", OR);
    let rep = d.path().join("rep.json");
    let out = run(&["expand-bdd", s(&o), "--mode", "mux", "--report", s(&rep)]);
    assert_eq!(out.status.code(), Some(0));
    let generated = parse(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(generated.gates().len(), 2);
    assert!(generated.gates().iter().all(|g| g.kind == bddcheck::GateKind::Mux));
    let original = parse(OR).unwrap();
    assert_eq!(circuit_truth_table(&generated).unwrap(), circuit_truth_table(&original).unwrap());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["roundtrip"]["bdd_size"], 2);
}

#[test]
fn expand_constant_zero_circuit() {
    let d = tempfile::tempdir().unwrap();
    let z = write(d.path(), "z.net", ".inputs a\n.outputs f\n.const k 0\n.gate and f a k\n.end\n");
    let out = run(&["expand-bdd", s(&z), "--mode", "gates"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.contains(".gate"), "{text}");
    assert!(text.contains(".const const0 0"));
    let c = parse(&text).unwrap();
    assert_eq!(c.outputs(), &["const0".to_string()]);
}

#[test]
fn multiplier_aborts_under_small_capacity() {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/mult16.net");
    let out = run(&["simulate", s(&fixture), "--capacity", "1048576"]);
    assert_eq!(out.status.code(), Some(2));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.lines().count() > 2);
}

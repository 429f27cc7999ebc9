use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn freeterm(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freeterm"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_out(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}: {}{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn ok(dir: &Path, args: &[&str]) -> Value {
    let out = freeterm(dir, args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    json_out(&out)
}

fn strings(v: &Value) -> Vec<String> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|s| s.as_str().unwrap().to_owned())
        .collect()
}

fn file(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn gen_then_analyze_fig1() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    for (v, cat, ft) in [
        ("a", 1, vec!["s2"]),
        ("b", 2, vec!["l2", "r2"]),
        ("c", 3, vec![]),
        ("d", 4, vec!["r3"]),
    ] {
        let name = format!("f{v}.json");
        ok(d, &["gen", "fig1", "--variant", v, "--out", &name]);
        let r = ok(d, &["analyze", &name]);
        assert_eq!(r["category"], cat, "{v}");
        assert_eq!(strings(&r["ft_states"]), ft, "{v}");
    }
}

#[test]
fn analyze_fig2_and_single_state() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(
        d,
        &[
            "gen",
            "powerset-union",
            "--universe",
            "a,b,c",
            "--query",
            "a",
            "--out",
            "fig2.json",
        ],
    );
    let r = ok(d, &["analyze", "fig2.json", "--dot", "fig2.dot"]);
    assert_eq!(
        strings(&r["ft_states"]),
        ["{a}", "{a,b}", "{a,c}", "{a,b,c}"]
    );
    assert_eq!(strings(&r["antichain"]), ["{a}"]);
    assert_eq!(r["algebra"]["acyclic"], true);
    assert_eq!(r["algebra"]["is_join_semilattice"], true);
    let dot = fs::read_to_string(d.join("fig2.dot")).unwrap();
    assert!(dot.starts_with("digraph"));

    file(
        d,
        "one.json",
        r#"{"states": 1, "labels": ["x"], "start": 0, "delta": [[0]], "query": {"values": [true]}}"#,
    );
    let r = ok(d, &["analyze", "one.json"]);
    assert_eq!(strings(&r["ft_states"]), ["s0"]);
}

#[test]
fn check_examples() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(
        d,
        &[
            "gen",
            "powerset-union",
            "--universe",
            "a,b,c",
            "--query",
            "a",
            "--out",
            "fig2.json",
        ],
    );
    let r = ok(
        d,
        &["check", "fig2.json", "--prop", "semilattice-ft-same-value"],
    );
    assert_eq!(r["status"], "pass");

    ok(
        d,
        &["gen", "modular-counter", "--n", "6", "--out", "z6.json"],
    );
    assert_eq!(
        ok(d, &["check", "z6.json", "--prop", "inverse-curse"])["status"],
        "pass"
    );
    // Preconditions that fail are reported, not treated as failures.
    let r = ok(
        d,
        &["check", "z6.json", "--prop", "semilattice-ft-same-value"],
    );
    assert_eq!(r["status"], "not_applicable");

    ok(d, &["gen", "fig1", "--variant", "b", "--out", "f1b.json"]);
    ok(d, &["minimize", "f1b.json", "--out", "m.json"]);
    assert_eq!(
        ok(d, &["check", "m.json", "--prop", "collapsed-fixpoint"])["status"],
        "pass"
    );

    for prop in [
        "oracle-agreement",
        "maximal-states-ft",
        "top-in-range-ft",
        "threshold-ft",
        "antichain",
        "semilattice-fts-reachable",
        "commutativity-same-value",
        "commutativity-fts-reachable",
        "minimal-ft-acyclic",
    ] {
        let r = ok(d, &["check", "fig2.json", "--prop", prop]);
        assert_ne!(r["status"], "fail", "{prop}");
    }
}

#[test]
fn failing_property_exits_one() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    // Two accepting states swapped by b: free states on a cycle.
    file(
        d,
        "swap.json",
        r#"{"states": 3, "labels": ["a", "b"], "start": 0, "delta": [[1, 0], [1, 2], [2, 1]],
            "query": {"values": [false, true, true]}}"#,
    );
    let out = freeterm(d, &["check", "swap.json", "--prop", "minimal-ft-acyclic"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_out(&out)["status"], "fail");
    let out = freeterm(d, &["check", "swap.json", "--prop", "collapsed-fixpoint"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn input_errors_exit_two_and_caps_exit_three() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    file(
        d,
        "bad.json",
        "{\"states\": 2,\n \"labels\": [\"x\"], \"delta\": [[0]]\n}",
    );
    let out = freeterm(d, &["analyze", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.json"), "{err}");

    let out = freeterm(d, &["analyze", "missing.json"]);
    assert_eq!(out.status.code(), Some(2));
    let out = freeterm(d, &["check", "bad.json", "--prop", "no-such-prop"]);
    assert_eq!(out.status.code(), Some(2));
    let out = freeterm(d, &["gen", "fig1", "--out", "x.json"]);
    assert_eq!(out.status.code(), Some(2));

    let universe: Vec<String> = (0..25).map(|i| i.to_string()).collect();
    let out = freeterm(
        d,
        &[
            "gen",
            "powerset-union",
            "--universe",
            &universe.join(","),
            "--query",
            "1",
            "--out",
            "b.json",
        ],
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(!d.join("b.json").exists());
}

#[test]
fn minimize_writes_equivalent_machine_and_sidecar() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    file(
        d,
        "dup.json",
        r#"{"states": 4, "labels": ["a", "b", "c"], "start": 0,
            "delta": [[1, 0, 0], [2, 1, 2], [1, 2, 1], [3, 3, 3]],
            "query": {"values": [false, true, true, false]}}"#,
    );
    let r = ok(
        d,
        &[
            "minimize", "--in", "dup.json", "--out", "m.json", "--dot", "m.dot",
        ],
    );
    assert_eq!(r["output_states"], 2);
    assert_eq!(r["dropped_unreachable"], 1);
    assert_eq!(r["equivalent"], true);
    let map: Value =
        serde_json::from_str(&fs::read_to_string(d.join("m.json.map.json")).unwrap()).unwrap();
    assert_eq!(map["new_states"], 2);
    assert_eq!(map["old_to_new"][3], Value::Null);
    assert_eq!(map["old_to_new"][1], map["old_to_new"][2]);

    let r = ok(
        d,
        &["minimize", "dup.json", "--out", "c.json", "--collapse-only"],
    );
    assert_eq!(r["equivalent"], true);
    let r = ok(d, &["analyze", "m.json"]);
    assert_eq!(r["states"], 2);
}

#[test]
fn generated_files_are_canonical() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(
        d,
        &[
            "gen",
            "g-counter",
            "--replicas",
            "2",
            "--cap",
            "3",
            "--counter-query",
            "sum>=4",
            "--out",
            "g.json",
        ],
    );
    ok(
        d,
        &["minimize", "g.json", "--out", "g2.json", "--collapse-only"],
    );
    let again = ok(
        d,
        &[
            "gen",
            "g-counter",
            "--replicas",
            "2",
            "--cap",
            "3",
            "--counter-query",
            "sum>=4",
            "--out",
            "h.json",
        ],
    );
    assert_eq!(again["states"], 16);
    assert_eq!(
        fs::read(d.join("g.json")).unwrap(),
        fs::read(d.join("h.json")).unwrap()
    );
    let text = fs::read_to_string(d.join("g.json")).unwrap();
    let reloaded = freeterm_core::format::from_json(&text).unwrap();
    assert_eq!(freeterm_core::format::to_json(&reloaded), text);

    let spec = file(
        d,
        "spec.json",
        r#"{"kind":"tc_fixpoint","edges":[[1,2],[2,3]],"query":{"path":[1,3]}}"#,
    );
    ok(
        d,
        &[
            "gen",
            "spec",
            "--spec",
            spec.to_str().unwrap(),
            "--out",
            "tc.json",
        ],
    );
    ok(
        d,
        &[
            "gen",
            "tc-fixpoint",
            "--edges",
            "1-2,2-3",
            "--tc-query",
            "path:1,3",
            "--out",
            "tc2.json",
        ],
    );
    assert_eq!(
        fs::read(d.join("tc.json")).unwrap(),
        fs::read(d.join("tc2.json")).unwrap()
    );
    ok(
        d,
        &[
            "gen",
            "random-acyclic",
            "--states",
            "20",
            "--labels",
            "2",
            "--seed",
            "4",
            "--out",
            "r.json",
        ],
    );
    ok(
        d,
        &[
            "gen",
            "two-phase-set",
            "--universe",
            "a",
            "--query",
            "a",
            "--out",
            "tp.json",
        ],
    );
    ok(
        d,
        &[
            "gen",
            "pn-counter",
            "--replicas",
            "1",
            "--cap",
            "2",
            "--out",
            "pn.json",
        ],
    );
    ok(
        d,
        &[
            "gen",
            "grow-only-set",
            "--universe",
            "a,b",
            "--no-merge-labels",
            "--out",
            "gs.json",
        ],
    );
    assert_eq!(ok(d, &["analyze", "gs.json"])["labels"], 2);
}

fn sim_files(d: &Path) {
    file(d, "line2.json", r#"{"nodes": 2, "edges": [[0, 1]]}"#);
    file(
        d,
        "ring4.json",
        r#"{"nodes": 4, "edges": [[0, 1], [1, 2], [2, 3], [3, 0]]}"#,
    );
    file(d, "r1.json", r#"[{"rel": "R", "tuple": [1]}]"#);
}

#[test]
fn simulate_exists_r() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    sim_files(d);
    let r = ok(
        d,
        &[
            "simulate",
            "--network",
            "line2.json",
            "--instance",
            "r1.json",
            "--query",
            "exists_R",
            "--seeds",
            "10",
        ],
    );
    assert_eq!(r["runs"].as_array().unwrap().len(), 10);
    assert_eq!(r["all_ready_runs"][0], 10);
    assert_eq!(r["agree"], true);

    let args = [
        "simulate",
        "--network",
        "ring4.json",
        "--instance",
        "r1.json",
        "--query",
        "(exists R)",
        "--seeds",
        "8",
    ];
    let serial = ok(d, &args);
    let mut par = args.to_vec();
    par.push("--parallel-seeds");
    assert_eq!(serial, ok(d, &par));
}

#[test]
fn simulate_modes() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    sim_files(d);
    file(d, "i.json", r#"[{"rel": "R", "tuple": ["a"]}]"#);
    file(
        d,
        "u.json",
        r#"[{"rel": "R", "tuple": ["a"]}, {"rel": "R", "tuple": ["c"]}, {"rel": "S", "tuple": ["c"]}]"#,
    );
    let base = [
        "simulate",
        "--network",
        "ring4.json",
        "--instance",
        "i.json",
        "--universe",
        "u.json",
    ];
    let q = ["--query", "(and R(c) (not S(c)))", "--seeds", "5"];
    let plain = ok(d, &[&base[..], &q[..]].concat());
    assert_eq!(plain["no_ready_runs"][0], 5);
    let all = ok(
        d,
        &[&base[..], &q[..], &["--all-metadata", "--traces", "t.json"]].concat(),
    );
    assert_eq!(all["all_ready_runs"][0], 5);
    let traces: Value =
        serde_json::from_str(&fs::read_to_string(d.join("t.json")).unwrap()).unwrap();
    assert_eq!(traces.as_array().unwrap().len(), 5);
    assert!(traces[0]["events"]
        .as_array()
        .unwrap()
        .iter()
        .any(|e| e["kind"] == "all_inject"));

    file(
        d,
        "policy.json",
        r#"[{"fact": {"rel": "R", "tuple": ["a"]}, "nodes": [0]},
            {"fact": {"rel": "R", "tuple": ["b"]}, "nodes": [2]},
            {"fact": {"rel": "S", "tuple": ["b"]}, "nodes": [0]}]"#,
    );
    file(
        d,
        "i2.json",
        r#"[{"rel": "R", "tuple": ["a"]}, {"rel": "S", "tuple": ["b"]}]"#,
    );
    let r = ok(
        d,
        &[
            "simulate",
            "--network",
            "ring4.json",
            "--instance",
            "i2.json",
            "--query",
            "(not R(b))",
            "--policy",
            "policy.json",
            "--seeds",
            "5",
        ],
    );
    assert_eq!(r["all_ready_runs"][0], 5);
    assert_eq!(r["predicted_ready"][0], true);
}

#[test]
fn simulate_set_query() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    file(
        d,
        "line3.json",
        r#"{"nodes": 3, "edges": [[0, 1], [1, 2]]}"#,
    );
    file(
        d,
        "i.json",
        r#"[{"rel": "R", "tuple": [20]}, {"rel": "T", "tuple": [5]}]"#,
    );
    let r = ok(
        d,
        &[
            "simulate",
            "--network",
            "line3.json",
            "--instance",
            "i.json",
            "--query",
            "(or (and R(?x) (gt ?x 10)) (and S(?x) (not T(?x))))",
            "--var",
            "x",
            "--outputs",
            "5,20",
            "--seeds",
            "5",
            "--format",
            "json",
        ],
    );
    assert_eq!(strings(&r["slots"]), ["(5)", "(20)"]);
    assert_eq!(r["expected"], serde_json::json!([false, true]));
    assert_eq!(r["all_ready_runs"], serde_json::json!([5, 5]));
}

#[test]
fn text_format_is_line_per_field() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["gen", "fig1", "--variant", "b", "--out", "b.json"]);
    let out = freeterm(d, &["analyze", "b.json", "--format", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "ft_states: l2, r2"), "{text}");
    assert!(text.lines().any(|l| l == "category: 2"));
}

use std::fs;
use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn quolat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quolat")).args(args).output().expect("binary runs")
}

fn quolat_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_quolat"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}\n{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn text(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn verify_quo6_passes_with_25_steps() {
    let out = quolat(&["verify", "quo6"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["ok"], true);
    assert_eq!(v["steps"], 25);
    assert_eq!(v["one_one_two"], true);
    assert_eq!(v["certificate"]["conclusion"]["passed"], true);
}

#[test]
fn verify_construction_flag_is_accepted() {
    let out = quolat(&["verify", "--construction", "quo3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["closure_size"], 29);
    assert_eq!(v["three_generation"]["examined"], 3654);
    assert_eq!(v["three_generation"]["refuted"], true);
}

#[test]
fn verify_usage_errors_exit_2() {
    for name in ["odd:12", "even:13", "odd:9", "nonsense", "kulin:x"] {
        let out = quolat(&["verify", name]);
        assert_eq!(out.status.code(), Some(2), "{name}");
        assert!(out.stdout.is_empty());
    }
    assert_eq!(quolat(&["verify"]).status.code(), Some(2));
}

#[test]
fn verify_lattice_counts() {
    let out = quolat(&["verify", "table1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["quo"], serde_json::json!([1, 4, 29, 355, 6942, 209527]));
    assert_eq!(v["equ"], serde_json::json!([1, 2, 5, 15, 52, 203, 877]));
}

#[test]
fn verify_equ6_and_kulin() {
    let v = json(&quolat(&["verify", "equ6"]));
    assert_eq!(v["generation"]["outcome"], "generates");
    let out = quolat(&["verify", "kulin:5"]);
    assert_eq!(out.status.code(), Some(0));
    // 5 * 4 q-atoms, one of which is the generator rho
    assert_eq!(json(&out)["certificate"]["derived"]["q"], 19);
}

#[test]
fn verify_odd_11() {
    let out = quolat(&["verify", "odd:11"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["invariants"].as_array().unwrap().iter().all(|c| c["holds"] == true));
}

#[test]
fn enumerate_counts_and_dump() {
    let out = quolat(&["enumerate", "--kind", "quo", "--n", "4", "--count-only"]);
    assert_eq!(text(&out).trim(), "355");
    let out = quolat(&["enumerate", "--kind", "equ", "--n", "4"]);
    let lines: Vec<&str> = std::str::from_utf8(&out.stdout).unwrap().lines().collect();
    assert_eq!(lines.len(), 15);
    for line in lines {
        quolat::Relation::from_json_str(line).unwrap();
    }
    assert_eq!(quolat(&["enumerate", "--kind", "quo", "--n", "9", "--count-only"]).status.code(), Some(2));
}

#[test]
fn construct_round_trips_through_eval() {
    let dir = tempfile::tempdir().unwrap();
    let out = quolat(&["construct", "--family", "quo6"]);
    let path = dir.path().join("quo6.json");
    fs::write(&path, &out.stdout).unwrap();
    let v = json(&quolat(&["eval", "--bindings", path.to_str().unwrap(), "beta & delta"]));
    assert_eq!(v["pairs"], "{(b,c), (c,b)}");
    assert_eq!(v["diagram_text"], "[b,c]");
    let from_family = json(&quolat(&["eval", "--family", "quo6", "beta & delta"]));
    assert_eq!(from_family, v);
    let parsed = quolat::Relation::from_json_str(&v["relation"].to_string()).unwrap();
    assert_eq!(parsed.pairs_display(), "{(b,c), (c,b)}");
}

#[test]
fn eval_hides_isolated_singletons() {
    let bindings = r#"{"delta": {"n": 3, "labels": ["a","b","c"], "pairs": []},
                      "rho": {"n": 3, "labels": ["a","b","c"], "pairs": [["a","b"]]}}"#;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.json");
    fs::write(&path, bindings).unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(json(&quolat(&["eval", "--bindings", p, "delta"]))["diagram_text"], "");
    assert_eq!(json(&quolat(&["eval", "--bindings", p, "rho | delta"]))["diagram_text"], "[a] [b]\n[a] < [b]");
    let bad = quolat(&["eval", "--bindings", p, "rho & (delta"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("line 1, column 13"));
    assert_eq!(quolat(&["eval", "--bindings", p, "sigma"]).status.code(), Some(2));
}

#[test]
fn render_examples() {
    let q = r#"{"n": 2, "labels": ["a","b"], "pairs": [["a","b"]]}"#;
    let dot = text(&quolat_stdin(&["render", "-"], q));
    assert_eq!(dot.matches("[label=").count(), 2);
    assert_eq!(dot.matches("->").count(), 1);
    let delta = r#"{"n": 3, "labels": ["a","b","c"], "pairs": []}"#;
    let dot = text(&quolat_stdin(&["render", "-"], delta));
    assert_eq!(dot.lines().count(), 3, "{dot}");

    let dir = tempfile::tempdir().unwrap();
    let fam = json(&quolat(&["construct", "--family", "quo6"]));
    let beta = fam["members"].as_array().unwrap().iter().find(|m| m[0] == "beta").unwrap()[1].to_string();
    let path = dir.path().join("beta.json");
    fs::write(&path, beta).unwrap();
    let dot = text(&quolat(&["render", path.to_str().unwrap(), "--name", "beta"]));
    assert_eq!(dot.matches("[label=").count(), 3);
    assert_eq!(dot.matches("->").count(), 1);
    assert_eq!(quolat_stdin(&["render", "-"], "{not json").status.code(), Some(2));
}

#[test]
fn construct_dot_and_bad_family() {
    let dot = text(&quolat(&["construct", "--family", "equ6", "--emit", "dot"]));
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.matches("subgraph").count(), 4);
    assert_eq!(quolat(&["construct", "--family", "even:15"]).status.code(), Some(2));
}

#[test]
fn cert_text_round_trip_and_tamper() {
    let dir = tempfile::tempdir().unwrap();
    let source = text(&quolat(&["cert", "--builtin", "quo6", "--emit", "text"]));
    let path = dir.path().join("quo6.cert");
    fs::write(&path, &source).unwrap();
    let out = quolat(&["cert", "--cert", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["ok"], true);

    // flip one pair of the beta generator
    let tampered = source.replacen("q(b,c)", "q(c,b)", 1);
    assert_ne!(tampered, source);
    fs::write(&path, &tampered).unwrap();
    let out = quolat(&["cert", "--cert", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["ok"], false);
    assert!(v["failure"]["message"].is_string());

    fs::write(&path, "ground a b\ngen x = q(a,b\n").unwrap();
    let out = quolat(&["cert", "--cert", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn closure_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("quo3.json");
    fs::write(&path, quolat(&["construct", "--family", "quo3"]).stdout).unwrap();
    let p = path.to_str().unwrap();
    let v = json(&quolat(&["closure", "--generators", p, "--target", "saturate", "--max-elements", "1000"]));
    assert_eq!(v["discovered"], 29);
    assert_eq!(v["stop_reason"], "saturated");
    let v = json(&quolat(&["closure", "--generators", p, "--target", "q-atoms", "--max-elements", "5"]));
    assert_eq!(v["stop_reason"], "budget-exceeded");
    let v = json(&quolat(&["closure", "--family", "quo3", "--max-depth", "1", "--target", "saturate"]));
    assert_eq!(v["depth_reached"], 1);
    let v = json(&quolat(&["closure", "--family", "quo6", "--strategy", "anchored", "--max-elements", "300000"]));
    assert_eq!(v["stop_reason"], "target-atoms-found");
    assert_eq!(v["atoms_found"].as_array().unwrap().len(), 30);
}

#[test]
fn search_checkpoint_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let cp = dir.path().join("cp.json");
    let found = dir.path().join("found.jsonl");
    let args = |max: Option<&str>| {
        let mut a = vec![
            "--jobs",
            "2",
            "search",
            "--lattice",
            "quo:3",
            "--size",
            "4",
            "--shape",
            "any",
            "--no-orbit",
            "--shards",
            "2",
            "--shard-index",
            "1",
            "--checkpoint-every",
            "500",
            "--checkpoint",
            cp.to_str().unwrap(),
            "--findings",
            found.to_str().unwrap(),
        ]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
        if let Some(m) = max {
            a.extend(["--max-candidates".to_string(), m.to_string()]);
        }
        a
    };
    let run = |a: Vec<String>| quolat(&a.iter().map(String::as_str).collect::<Vec<_>>());
    let first = json(&run(args(Some("2000"))));
    assert_eq!(first["exhausted"], false);
    let cp_json: Value = serde_json::from_str(&fs::read_to_string(&cp).unwrap()).unwrap();
    assert_eq!(cp_json["version"], 1);
    assert!(cp_json["cursor"].is_u64() && cp_json["examined"] == 2000);
    let second = json(&run(args(None)));
    assert_eq!(second["exhausted"], true);
    assert!(second["resumed_from"].is_u64());

    let fresh = json(&quolat(&[
        "search",
        "--lattice",
        "quo:3",
        "--size",
        "4",
        "--no-orbit",
        "--shards",
        "2",
        "--shard-index",
        "1",
    ]));
    assert_eq!(second["generating_sets_found"], fresh["generating_sets_found"]);
    let lines = fs::read_to_string(&found).unwrap();
    assert_eq!(lines.lines().count(), fresh["generating_sets_found"].as_array().unwrap().len());

    assert_eq!(quolat(&["search", "--lattice", "quo:3", "--shards", "2", "--shard-index", "2"]).status.code(), Some(2));
    assert_eq!(quolat(&["search", "--lattice", "ord:3"]).status.code(), Some(2));
}

#[test]
fn search_equ5_one_one_two_is_empty() {
    let v = json(&quolat(&["search", "--lattice", "equ:5", "--size", "4", "--shape", "one-one-two"]));
    assert_eq!(v["exhausted"], true);
    assert_eq!(v["generating_sets_found"], serde_json::json!([]));
}

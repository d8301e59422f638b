use std::path::PathBuf;
use std::process::{Command, Output};

fn pep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pep")).args(args).output().unwrap()
}

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn check_exit_codes() {
    assert_eq!(pep(&["check", &fixture("k4_triangle.json")]).status.code(), Some(0));
    assert_eq!(pep(&["check", &fixture("k4_isolated_wrong_face.json")]).status.code(), Some(1));
    assert_eq!(pep(&["check", &fixture("alternating_blocks.json"), "--oracle"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"n\": 3, \"edges\": [[0, 0]]}").unwrap();
    assert_eq!(pep(&["check", bad.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&bad, "not json").unwrap();
    assert_eq!(pep(&["check", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn json_report() {
    let o = pep(&["check", &fixture("k4_triangle.json"), "--json", "--oracle"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["answer"], true);
    assert_eq!(v["oracle"], true);
    assert!(v["component_results"].is_array());
    assert!(v["stats"]["updates"].as_u64().unwrap() > 0);
    assert!(v["timings"]["total_ms"].is_number());
}

#[test]
fn gen_is_deterministic_and_positive() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = pep(&["gen", "--n", "6", "--seed", "1", "--out", p.to_str().unwrap()]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(pep(&["check", a.to_str().unwrap(), "--oracle"]).status.code(), Some(0));
    let big = dir.path().join("big.json");
    assert!(pep(&["gen", "--n", "100000", "--seed", "2", "--out", big.to_str().unwrap()]).status.success());
    assert_eq!(pep(&["check", big.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(pep(&["gen", "--n", "2"]).status.code(), Some(2));
}

#[test]
fn mutate_then_oracle_adjudicates() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("base.json");
    assert!(pep(&["gen", "--n", "7", "--seed", "5", "--out", base.to_str().unwrap()]).status.success());
    for kind in ["rotation-swap", "placement-move", "edge-add"] {
        for seed in 0..5 {
            let m = dir.path().join(format!("{kind}-{seed}.json"));
            let o = pep(&["mutate", base.to_str().unwrap(), "--kind", kind, "--seed", &seed.to_string(), "--out", m.to_str().unwrap()]);
            assert!(o.status.success());
            let code = pep(&["check", m.to_str().unwrap(), "--oracle"]).status.code();
            assert!(matches!(code, Some(0 | 1)), "{kind} {seed}: {code:?}");
        }
    }
    assert_eq!(pep(&["mutate", base.to_str().unwrap(), "--kind", "shuffle"]).status.code(), Some(2));
}

#[test]
fn bench_csv() {
    let o = pep(&["bench", "--sizes", "50,100", "--seeds", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,m,seed,ms,updates,tp_edges"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.len() == 6));
    assert_eq!(rows[2][0], "100");
}

#[test]
fn dumps() {
    let tri = fixture("k4_triangle.json");
    let faces = stdout(&pep(&["dump", &tri, "--stage", "faces"]));
    assert_eq!(faces.lines().count(), 2);
    let bridges = stdout(&pep(&["dump", &tri, "--stage", "bridges"]));
    assert!(bridges.contains("attachments [0, 1, 2]"));
    let colors = stdout(&pep(&["dump", &tri, "--stage", "colors"]));
    assert_eq!(colors.lines().count(), 3);
    let tree = stdout(&pep(&["dump", &tri, "--stage", "tree@1"]));
    assert!(tree.contains("graph"), "{tree}");
    assert_eq!(pep(&["dump", &tri, "--stage", "leaves"]).status.code(), Some(2));
}

#[test]
fn dump_bridges_of_full_drawing_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("full.json");
    let full = r#"{"n":3,"edges":[[0,1],[1,2],[2,0]],"h_edges":[0,1,2],"h_isolated":[],"rotations":{"0":[0,2],"1":[1,0],"2":[2,1]},"components":[{"rep":0,"outer_local_face":{"v":0,"e_in":2},"placement":"outer"}]}"#;
    std::fs::write(&p, full).unwrap();
    assert!(stdout(&pep(&["dump", p.to_str().unwrap(), "--stage", "bridges"])).is_empty());
    assert_eq!(pep(&["check", p.to_str().unwrap()]).status.code(), Some(0));
}

use std::process::Command;

fn gview(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_gview")).args(args).output().unwrap()
}

#[test]
fn generate_then_query() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("g");
    let dir = dir.to_str().unwrap();
    assert!(
        gview(&["generate", "lineage", "--out", dir, "--jobs", "30", "--files", "60", "--seed", "4"])
            .status
            .success()
    );
    let again = tmp.path().join("h");
    gview(&[
        "generate",
        "lineage",
        "--out",
        again.to_str().unwrap(),
        "--jobs",
        "30",
        "--files",
        "60",
        "--seed",
        "4",
    ]);
    for f in ["vertices.csv", "edges.csv", "schema.json"] {
        assert_eq!(
            std::fs::read(tmp.path().join("g").join(f)).unwrap(),
            std::fs::read(again.join(f)).unwrap()
        );
    }

    let q = tmp.path().join("q.txt");
    std::fs::write(&q, "MATCH (j:Job) RETURN count(j)").unwrap();
    let out = gview(&["run", "--query", q.to_str().unwrap(), "--graph", dir]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[1], "30");
    assert!(lines[2].starts_with("edges_expanded=0 vertices_touched="));
}

#[test]
fn validation_errors_exit_2() {
    assert_eq!(gview(&["bench", "--alpha", "42"]).status.code(), Some(2));
    assert_eq!(gview(&["load-check", "--graph", "/nonexistent"]).status.code(), Some(2));
    let tmp = tempfile::tempdir().unwrap();
    let spec = tmp.path().join("w.json");
    std::fs::write(
        &spec,
        r#"{"budget": 1, "queries": [{"name": "a", "type": "query", "text": "MATCH (a RETURN a"}]}"#,
    )
    .unwrap();
    let out = gview(&["select", "--spec", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse a"));
}

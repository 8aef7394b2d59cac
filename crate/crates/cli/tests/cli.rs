mod common;

use std::io::Write;

use common::{schema, scripts_dir, twistor, violations};

#[test]
fn dimension_text_output() {
    let o = twistor(&["dim", "--n", "0", "--rank", "2", "--c1", "", "--k", "3"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(o.stdout.starts_with("dimension: 12\n"));
}

#[test]
fn text_and_json_agree() {
    let args = ["dim", "--n", "2", "--a", "1,0", "--c1", "-1,1", "--k", "2"];
    let text = twistor(&args);
    let mut with_json = args.to_vec();
    with_json.push("--json");
    let doc = twistor(&with_json).json();
    let dimension = doc["result"]["dimension"].as_i64().unwrap();
    assert!(text
        .stdout
        .starts_with(&format!("dimension: {dimension}\n")));
    assert_eq!(doc["space"]["a"], serde_json::json!([1, 0]));
}

#[test]
fn lemma_sweep_passes() {
    let o = twistor(&[
        "verify", "--lemma", "2.5", "--n-max", "3", "--r-max", "3", "--k-max", "6", "--route",
        "both",
    ]);
    assert_eq!(o.code, 0, "{}", o.stdout);
    assert!(o.stdout.starts_with("lemma2.5: pass"));
}

#[test]
fn corrupted_relations_fail_with_counterexample() {
    let o = twistor(&[
        "verify",
        "--lemma",
        "2.5",
        "--n-max",
        "2",
        "--corrupt-relation",
    ]);
    assert_eq!(o.code, 1);
    assert!(o.stdout.contains("counterexample"));
}

#[test]
fn canonical_identity_passes() {
    let o = twistor(&["verify", "--identity", "canonical", "--n-max", "6"]);
    assert_eq!(o.code, 0);
    assert!(o
        .stdout
        .starts_with("identity canonical: pass (127 identities)"));
}

#[test]
fn tables_follow_the_dimension_formula() {
    let o = twistor(&[
        "table", "--vary", "k", "--from", "0", "--to", "5", "--n", "0", "--rank", "2", "--json",
    ]);
    let dims: Vec<i64> = o.json()["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["dim"].as_i64().unwrap())
        .collect();
    assert_eq!(dims, [0, 4, 8, 12, 16, 20]);

    let o = twistor(&[
        "table", "--vary", "r", "--from", "1", "--to", "4", "--n", "0", "--k", "1", "--json",
    ]);
    let dims: Vec<i64> = o.json()["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["dim"].as_i64().unwrap())
        .collect();
    assert_eq!(dims, [2, 4, 6, 8]);

    let o = twistor(&[
        "table", "--vary", "n", "--from", "0", "--to", "5", "--rank", "1", "--k", "0", "--json",
    ]);
    let chi_o: Vec<String> = o.json()["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["chi_O"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(chi_o, ["1/1", "2/1", "3/1", "4/1", "5/1", "6/1"]);
}

#[test]
fn table_rows_are_csv() {
    let o = twistor(&[
        "table", "--vary", "k", "--from", "0", "--to", "2", "--n", "0",
    ]);
    let lines: Vec<&str> = o.stdout.lines().collect();
    assert_eq!(lines[0], "n,A,c2_mode,rank,k,dim,real_dim,chi,chi_O");
    assert_eq!(lines[2], "0,0,paper,2,1,4,8,-4,1");
}

#[test]
fn usage_errors_exit_two_and_name_the_flag() {
    let cases: &[(&[&str], &str)] = &[
        (
            &[
                "table", "--vary", "k", "--vary", "r", "--from", "0", "--to", "1",
            ],
            "--vary",
        ),
        (&["dim", "--n", "2", "--a", "1,0,1"], "--a"),
        (&["dim", "--n", "2", "--c1", "1"], "--c1"),
        (&["dim", "--n", "1", "--a", "2"], "--a"),
        (&["verify", "--lemma", "3.1"], "--lemma"),
        (&["dim", "--rank", "x"], "--rank"),
        (&["verify", "--n-max", "2"], "--lemma"),
        (
            &[
                "table", "--vary", "n", "--from", "0", "--to", "2", "--a", "1",
            ],
            "--a",
        ),
    ];
    for (args, flag) in cases {
        let o = twistor(args);
        assert_eq!(o.code, 2, "{args:?}");
        assert!(o.stderr.contains(flag), "{args:?}: {}", o.stderr);
    }
}

#[test]
fn negative_values_are_accepted() {
    let o = twistor(&["dim", "--n", "2", "--c1", "-1,-1", "--k", "-3"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
}

#[test]
fn eval_runs_corpus_scripts() {
    let path = scripts_dir().join("framed_dimension.tws");
    let o = twistor(&["eval", path.to_str().unwrap()]);
    assert_eq!(o.code, 0);
    assert_eq!(
        o.stdout,
        "space n=0 A=0 e=2 sgn=0 c2=paper\ndimension: 4\ndimension: 12\n"
    );
}

fn script(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new().suffix(".tws").tempfile().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn eval_exit_codes() {
    let cases = [
        ("space n=0\nassert integrate(w^3) == 1\n", 0, None),
        (
            "space n=0\nassert integrate(w^3) == 2\n",
            1,
            Some("2:1: assertion_failed"),
        ),
        ("space n=0\nprint (w\n", 2, Some("2:9: syntax")),
        (
            "space n=1\nlet s = e1 + e2\n",
            2,
            Some("2:1: unbound_generator"),
        ),
    ];
    for (text, code, message) in cases {
        let f = script(text);
        let o = twistor(&["eval", f.path().to_str().unwrap()]);
        assert_eq!(o.code, code, "{text}: {}", o.stderr);
        if let Some(m) = message {
            assert!(o.stderr.contains(m), "{}", o.stderr);
        }
    }
    let f = script("space n=1\nverify lemma2.5 O\n");
    assert_eq!(twistor(&["eval", f.path().to_str().unwrap()]).code, 0);
    let f = script("sweep n<=1 r<=1 k<=1 verify lemma2.5\n");
    assert_eq!(
        twistor(&["eval", "--corrupt-relation", f.path().to_str().unwrap()]).code,
        1
    );
    assert_eq!(twistor(&["eval", "/nonexistent/x.tws"]).code, 2);
}

#[test]
fn every_json_output_matches_the_schema() {
    let schema = schema();
    let framed = scripts_dir().join("framed_dimension.tws");
    let failing = scripts_dir().join("error_assertion.tws");
    let runs: Vec<Vec<&str>> = vec![
        vec!["dim", "--n", "1", "--k", "2", "--json"],
        vec!["chi", "--n", "2", "--a", "0,1", "--c1", "1,0", "--json"],
        vec![
            "verify", "--lemma", "2.5", "--n-max", "2", "--r-max", "2", "--k-max", "2", "--json",
        ],
        vec![
            "verify",
            "--lemma",
            "2.5",
            "--n-max",
            "1",
            "--corrupt-relation",
            "--json",
        ],
        vec!["verify", "--identity", "all", "--n-max", "3", "--json"],
        vec![
            "sweep", "--n-max", "1", "--r-max", "2", "--k-max", "1", "--b", "all", "--json",
        ],
        vec![
            "table", "--vary", "n", "--from", "0", "--to", "3", "--rank", "1", "--k", "0", "--json",
        ],
        vec!["eval", framed.to_str().unwrap(), "--json"],
        vec!["eval", failing.to_str().unwrap(), "--json"],
        vec!["dim", "--n", "2", "--a", "1", "--json"],
    ];
    for args in runs {
        let o = twistor(&args);
        let doc = o.json();
        assert_eq!(doc["schema"], 1);
        let problems = violations(&schema, &doc);
        assert!(problems.is_empty(), "{args:?}: {problems:?}");
    }
}

#[test]
fn schema_rejects_malformed_documents() {
    let schema = schema();
    let bad = [
        serde_json::json!({ "kind": "dim" }),
        serde_json::json!({ "schema": 2, "kind": "dim" }),
        serde_json::json!({ "schema": 1, "kind": "dim", "space": {}, "params": {}, "result": {} }),
        serde_json::json!({ "schema": 1, "kind": "table", "vary": "k", "rows": [{ "chi": "1.5" }] }),
    ];
    for doc in bad {
        assert!(!violations(&schema, &doc).is_empty(), "{doc}");
    }
}

#[test]
fn help_exits_zero() {
    let o = twistor(&["--help"]);
    assert_eq!(o.code, 0);
    assert!(o.stdout.contains("verify"));
}

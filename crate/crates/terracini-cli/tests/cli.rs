//! End-to-end tests of the command-line interface: exit codes, JSON
//! envelopes, file formats and the fault-injection path.

use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_terracini"))
        .args(args)
        .env_remove("SECANT_WITNESS_PRIME")
        .output()
        .expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("terracini-cli-{}-{name}", std::process::id()))
}

#[test]
fn check_skew_binomial_n5() {
    let out = run(&["check-skew", "--n", "5", "--field", "prime"]);
    assert_eq!(out.status.code(), Some(0));
    let js = stdout_json(&out);
    assert_eq!(js["report"]["rank"], 165);
    assert_eq!(js["report"]["skew"], true);
    assert_eq!(js["tool_version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(js["field"], "prime-field");
    assert_eq!(js["params"]["m"], 11);
}

#[test]
fn check_skew_rational_matches_prime() {
    let out = run(&["check-skew", "--n", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let js = stdout_json(&out);
    assert_eq!(js["report"]["rank"], 24);
    assert_eq!(js["field"], "rational");
}

#[test]
fn check_skew_pigeonhole_fails_with_exit_one() {
    let out = run(&[
        "check-skew", "--n", "2", "--m", "3", "--witness", "random", "--seed", "4",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let js = stdout_json(&out);
    assert_eq!(js["report"]["skew"], false);
    assert_eq!(js["report"]["expected"], 9);
    assert!(js["report"]["rank"].as_u64().unwrap() <= 7);
}

#[test]
fn check_skew_rejects_invalid_input() {
    let out = run(&["check-skew", "--n", "0"]);
    assert_eq!(out.status.code(), Some(2));
    // n beyond the guard is invalid input too, not a long-running surprise.
    let out = run(&["check-skew", "--n", "9"]);
    assert_eq!(out.status.code(), Some(2));
    // The binomial witness pins m.
    let out = run(&["check-skew", "--n", "3", "--m", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn contact_locus_base_case() {
    let out = run(&["contact-locus", "--n", "4", "--field", "prime"]);
    assert_eq!(out.status.code(), Some(0));
    let js = stdout_json(&out);
    assert_eq!(js["report"]["verdict"], "PASS");
    let dims = js["report"]["contact_kernel_dims"].as_array().unwrap();
    assert_eq!(dims.len(), 7);
    assert!(dims.iter().all(|d| d == 1));
}

#[test]
fn contact_locus_rejects_bad_n() {
    assert_eq!(run(&["contact-locus", "--n", "1"]).status.code(), Some(2));
    assert_eq!(run(&["contact-locus", "--n", "9"]).status.code(), Some(2));
}

#[test]
fn ranges_csv_table() {
    let out = run(&["ranges", "--k", "2", "--d", "3", "--n-max", "17"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,k,d,cond1_bound,cond2_bound,expected_generic_rank,regime"
    );
    assert_eq!(lines.next().unwrap(), "2,2,3,,2,3,condition-2");
    let n17 = text.lines().find(|l| l.starts_with("17,")).unwrap();
    assert_eq!(n17, "17,2,3,333,,488,condition-1");
}

#[test]
fn ranges_degree_two_regime() {
    let out = run(&["ranges", "--k", "2", "--d", "2", "--n-max", "4"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text
        .lines()
        .skip(1)
        .all(|l| l.ends_with("non-identifiable (square identity)")));
}

#[test]
fn ranges_general_d_table() {
    let out = run(&["ranges", "--general-d", "--d-max", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "3,17,333"));
    assert!(text.lines().any(|l| l == "2,,"));
}

#[test]
fn ranges_emits_gnuplot_script() {
    let csv = temp_path("ranges.csv");
    let plot = temp_path("ranges.gp");
    let out = run(&[
        "ranges",
        "--n-max",
        "10",
        "--output",
        csv.to_str().unwrap(),
        "--emit-gnuplot",
        plot.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let script = std::fs::read_to_string(&plot).unwrap();
    assert!(script.contains(csv.to_str().unwrap()));
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("n,k,d,"));
    let _ = std::fs::remove_file(csv);
    let _ = std::fs::remove_file(plot);
}

#[test]
fn moments_from_model_file() {
    let model = temp_path("model.json");
    std::fs::write(
        &model,
        r#"{"n": 1, "components": [{"sigma": [["1"]]}], "weights": ["1"]}"#,
    )
    .unwrap();
    let out = run(&["moments", "--model-file", model.to_str().unwrap(), "--order", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let js = stdout_json(&out);
    // q^3 = x^6 / 8 for the standard normal in one variable.
    assert_eq!(js["report"]["terms"][0]["num"], "1");
    assert_eq!(js["report"]["terms"][0]["den"], "8");

    let out = run(&["moments", "--model-file", model.to_str().unwrap(), "--order", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let js = stdout_json(&out);
    assert_eq!(js["report"]["terms"].as_array().unwrap().len(), 0);
    let _ = std::fs::remove_file(model);
}

#[test]
fn moments_of_a_uniform_two_component_mixture() {
    let model = temp_path("uniform-model.json");
    std::fs::write(
        &model,
        r#"{"n": 2,
            "components": [{"sigma": [["1","0"],["0","1"]]},
                           {"sigma": [["2","1"],["1","2"]]}],
            "weights": ["1/2", "1/2"]}"#,
    )
    .unwrap();
    let out = run(&["moments", "--model-file", model.to_str().unwrap(), "--order", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let js = stdout_json(&out);
    // x^6 coefficient of (q1^3 + q2^3)/2 with q1 = (x^2+y^2)/2 and
    // q2 = x^2 + xy + y^2 is 1/16 + 1/2 = 9/16.
    let x6 = js["report"]["terms"]
        .as_array()
        .unwrap()
        .iter()
        .find(|t| t["exponents"] == serde_json::json!([6, 0]))
        .unwrap();
    assert_eq!(x6["num"], "9");
    assert_eq!(x6["den"], "16");
    let _ = std::fs::remove_file(model);
}

#[test]
fn moments_rejects_non_psd_model() {
    let model = temp_path("bad-model.json");
    std::fs::write(
        &model,
        r#"{"n": 2, "components": [{"sigma": [["1","3"],["3","1"]]}], "weights": ["1"]}"#,
    )
    .unwrap();
    let out = run(&["moments", "--model-file", model.to_str().unwrap(), "--order", "4"]);
    assert_eq!(out.status.code(), Some(2));
    let _ = std::fs::remove_file(model);
}

#[test]
fn verify_paper_quick_passes() {
    let out = run(&["verify-paper", "--level", "quick"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[PASS] skewness-binomial-prime"));
    assert!(text.contains("[PASS] contact-binomial-prime"));
    assert!(!text.contains("[FAIL]"));
    // Canonical ordering: ids appear sorted.
    let ids: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with('['))
        .map(|l| l.split_whitespace().nth(1).unwrap())
        .collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
}

#[test]
fn verify_paper_detects_injected_fault() {
    let out = run(&["verify-paper", "--inject-fault", "duplicate-witness"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[FAIL] skewness-binomial-prime"));
    assert!(text.contains("[FAIL] contact-binomial-prime"));
}

#[test]
fn prime_override_is_honored_and_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_terracini"))
        .args(["check-skew", "--n", "2", "--field", "prime"])
        .env("SECANT_WITNESS_PRIME", "4294967279")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let js = stdout_json(&out);
    assert_eq!(js["prime"], 4294967279u64);

    let out = Command::new(env!("CARGO_BIN_EXE_terracini"))
        .args(["check-skew", "--n", "2"])
        .env("SECANT_WITNESS_PRIME", "42")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_are_stable_across_runs() {
    let a = run(&["check-skew", "--n", "3", "--witness", "random", "--seed", "7"]);
    let b = run(&["check-skew", "--n", "3", "--witness", "random", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), b.status.code());
}

use std::process::{Command, Output};

use serde_json::Value;

fn hurwitz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hurwitz"))
        .args(args)
        .env_remove("HURWITZ_BUDGET")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--output", "json"]);
    let o = hurwitz(&all);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn compute_prints_the_value() {
    let o = hurwitz(&["compute", "--mu", "3,1", "--nu", "3,1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "6");
    let v = json(&["compute", "--mu", "3,1", "--nu", "3,1"]);
    assert_eq!(v["value"], "6");
    assert_eq!(v["r"], 2);
}

#[test]
fn compute_agrees_across_methods() {
    for method in ["oracle", "closed-form", "trees", "chambers", "auto"] {
        let v = json(&["compute", "--mu", "3,1", "--nu", "2,1,1", "--method", method]);
        assert_eq!(v["value"], "54", "{method}");
    }
    let v = json(&["compute", "--mu", "2", "--nu", "2"]);
    assert_eq!(v["value"], "1/2");
}

#[test]
fn literal_three_part_form_reproduces_its_failure() {
    let v = json(&[
        "compute",
        "--mu",
        "2,1,1",
        "--nu",
        "3,1",
        "--method",
        "closed-form-literal",
    ]);
    assert_eq!(v["value"], "48");
}

#[test]
fn chambers_for_two_by_two() {
    let v = json(&["chambers", "--m", "2", "--n", "2"]);
    assert_eq!(v["count"], 2);
    assert_eq!(v["chambers"].as_array().unwrap().len(), 2);
    let text = stdout(&hurwitz(&["chambers", "--m", "2", "--n", "2"]));
    assert!(text.ends_with("2 chambers\n"));
}

#[test]
fn trees_for_the_worked_example() {
    let v = json(&["trees", "--mu", "4,2,1", "--nu", "5,2"]);
    assert_eq!(v["count"], 3);
    let v = json(&["trees", "--mu", "4,2,1", "--nu", "5,2", "--essential"]);
    assert_eq!(v["essential"], true);
    assert!(v["count"].as_u64().unwrap() > 0);
}

#[test]
fn poly_evaluates_to_the_value() {
    let v = json(&["poly", "--mu", "2,1", "--nu", "2,1"]);
    assert_eq!(v["polynomial"]["vars"], serde_json::json!({"m": 2, "n": 2}));
    assert!(v["signature"].is_string());
}

#[test]
fn csv_uses_the_value_columns() {
    let o = hurwitz(&["compute", "--mu", "2,2", "--nu", "3,1", "--output", "csv"]);
    assert_eq!(
        stdout(&o),
        "mu,nu,d,r,method,value\n\"2,2\",\"3,1\",4,2,closed_form,6\n"
    );
}

#[test]
fn json_round_trips_byte_identically() {
    for args in [
        vec!["compute", "--mu", "3,2,1", "--nu", "4,2", "--polynomial"],
        vec!["chambers", "--m", "2", "--n", "3"],
        vec!["trees", "--mu", "4,2,1", "--nu", "5,2"],
        vec!["verify", "--d-max", "3"],
        vec!["identity37", "--m", "4"],
    ] {
        let mut all = args.clone();
        all.extend(["--output", "json"]);
        let emitted = stdout(&hurwitz(&all));
        let parsed: Value = serde_json::from_str(&emitted).unwrap();
        assert_eq!(
            serde_json::to_string_pretty(&parsed).unwrap() + "\n",
            emitted,
            "{args:?}"
        );
    }
}

#[test]
fn verify_is_deterministic_across_worker_counts() {
    let run = |w: &str| {
        let o = hurwitz(&["verify", "--d-max", "5", "--output", "json", "--workers", w]);
        assert_eq!(o.status.code(), Some(0));
        stdout(&o)
    };
    let one = run("1");
    assert_eq!(one, run("4"));
    assert_eq!(one, run("4"));
}

#[test]
fn verify_fails_on_disagreement() {
    let o = hurwitz(&["verify", "--d-max", "4", "--methods", "oracle,closed-form-literal"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("DISAGREE (2,1,1);(3,1)"));
}

#[test]
fn identity_holds() {
    let v = json(&["identity37", "--m", "5"]);
    assert_eq!(v["holds"], true);
    assert_eq!(v["lhs"], v["rhs"]);
}

#[test]
fn parse_errors_exit_two() {
    for args in [
        vec!["compute", "--mu", "3,x", "--nu", "4"],
        vec!["compute", "--mu", "3,1", "--nu", "3"],
        vec!["compute", "--mu", "0,4", "--nu", "4"],
        vec!["compute", "--mu", "4", "--nu", "4", "--method", "magic"],
        vec!["chambers", "--m", "0", "--n", "2"],
        vec!["verify", "--d-max", "3", "--workers", "0"],
        vec!["frobnicate"],
    ] {
        assert_eq!(hurwitz(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn budgets_are_enforced() {
    let o = hurwitz(&[
        "compute",
        "--mu",
        "3,1",
        "--nu",
        "3,1",
        "--method",
        "chambers",
        "--max-vars",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let o = Command::new(env!("CARGO_BIN_EXE_hurwitz"))
        .args(["compute", "--mu", "3,1", "--nu", "3,1"])
        .env("HURWITZ_BUDGET", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

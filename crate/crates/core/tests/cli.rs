use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccs-playground")).args(args).env_remove("CCS_PLAYGROUND_BUDGET").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn translate_shows_the_sum_under_the_input() {
    let o = run(&["translate", "[1] a1.0 + a1.tick.0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("⟨in1↦⊕[⟨_↦∅⟩, ⟨tick↦⟨_↦∅⟩, _↦∅⟩], _↦∅⟩"), "{}", stdout(&o));
}

#[test]
fn private_synchronisation_is_weakly_bisimilar_to_nil() {
    let o = run(&["bisim", "--weak", "--depth", "5", "--left-ccs", "[1] new a. (a2.0 | 'a2.0)", "--right-ccs", "[1] 0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn free_channel_is_not_bisimilar_to_nil() {
    let o = run(&["bisim", "--weak", "--depth", "5", "--left-ccs", "[1] new a. (a1.0 | 'a1.0)", "--right-ccs", "[1] 0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn strong_bisim_sees_the_silent_step() {
    let args = ["bisim", "--strong", "--left-ccs", "[1] new a. (a2.a1.0 | 'a2.0)", "--right-ccs", "[1] a1.0"];
    assert_eq!(run(&args).status.code(), Some(1));
}

#[test]
fn strategy_side_of_bisim() {
    let p = "[0] new a. (a1.tick.0 | 'a1.0)";
    let o = run(&["bisim", "--left-ccs", p, "--right-ccs", p, "--right-source", "strategies"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn fairtest_standard_finds_the_output_test() {
    let o = run(&["fairtest", "--standard", "--gen-depth", "2", "--left", "[1] a1.0", "--right", "[1] 0", "--json"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "fail");
    assert_eq!(v["witness"]["test"], "'a1.tick.0");
    assert_eq!(v["family_size"], 496);
    for key in ["budget_used", "depth"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

#[test]
fn fairtest_semantic_agrees_and_passes_symmetric_pair() {
    let o = run(&["fairtest", "--semantic", "--left", "[1] a1.0", "--right", "[1] 0", "--json"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["witness"]["test"], "'a1.tick.0");
    let o = run(&["fairtest", "--semantic", "--gen-depth", "1", "--left", "[2] a1.0 | a2.0", "--right", "[2] a2.0 | a1.0"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn witness_replays_as_a_user_test() {
    let o = run(&["fairtest", "--no-gen", "--test", "[1] 'a1.tick.0", "--left", "[1] a1.0", "--right", "[1] 0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("'a1.tick.0"));
}

#[test]
fn tiny_budget_is_inconclusive() {
    let args = ["fairtest", "--state-cap", "3", "--left", "[1] rec X. ('a1.0 | a1.X)", "--right", "[1] 0", "--gen-depth", "1"];
    assert_eq!(run(&args).status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_ccs-playground"))
        .args(&args[3..])
        .args(["fairtest"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn budget_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_ccs-playground"))
        .args(["lts", "[1] rec X. (a1.0 | tick.X)"])
        .env("CCS_PLAYGROUND_BUDGET", "7")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_ccs-playground"))
        .args(["lts", "[1] a1.0"])
        .env("CCS_PLAYGROUND_BUDGET", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn usage_errors_name_the_flag() {
    let o = run(&["bisim", "--left-ccs", "[1] a2.0", "--right-ccs", "[1] 0"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--left-ccs"));
    let o = run(&["lts", "[1] a1.0", "--source", "ccs", "--base", "F"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--base"));
    assert_eq!(run(&["translate", "[0] 0", "--dot", "/tmp/never.dot"]).status.code(), Some(3));
    assert_eq!(run(&["fairtest", "--standard", "--semantic", "--left", "[0] 0", "--right", "[0] 0"]).status.code(), Some(3));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(3));
}

#[test]
fn lts_bases_and_dot() {
    let dir = std::env::temp_dir().join(format!("ccs-playground-dot-{}", std::process::id()));
    let path = dir.with_extension("dot");
    let p = "[1] a1.0 | 'a1.0";
    for (source, base) in [("ccs", "A"), ("terms", "F"), ("terms", "L"), ("terms", "A"), ("strategies", "F"), ("strategies", "L"), ("strategies", "A")] {
        let o = run(&["lts", p, "--source", source, "--base", base, "--json"]);
        assert_eq!(o.status.code(), Some(0), "{source} {base}");
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["complete"], true);
        // the strategy side has one extra state before the fork
        let states = if source == "ccs" { 4 } else { 5 };
        assert_eq!(v["states"].as_array().unwrap().len(), states, "{source} {base}");
    }
    let o = run(&["lts", p, "--dot", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let dot = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert!(dot.starts_with("digraph lts {"));
    assert!(dot.contains("label=\"a1\""));
}

#[test]
fn undue_input_is_absent_over_the_interface() {
    let o = run(&["lts", "[0] new a. a1.0", "--source", "strategies", "--base", "F", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["edges"].as_array().unwrap().iter().any(|e| e["label"].as_str().unwrap().starts_with("in")));
    let o = run(&["lts", "[0] new a. a1.0", "--source", "strategies", "--base", "L", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["edges"].as_array().unwrap().iter().all(|e| !e["label"].as_str().unwrap().starts_with("in")));
}

#[test]
fn output_is_deterministic_across_jobs() {
    let base = ["fairtest", "--json", "--left", "[1] a1.0 + tick.0", "--right", "[1] tick.0"];
    let one = run(&[&base[..], &["--jobs", "1"]].concat());
    let four = run(&[&base[..], &["--jobs", "4"]].concat());
    let again = run(&[&base[..], &["--jobs", "4"]].concat());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(four.stdout, again.stdout);
    let a = run(&["lts", "[2] a1.a2.0 + a2.a1.0", "--source", "strategies", "--json"]);
    let b = run(&["lts", "[2] a1.a2.0 + a2.a1.0", "--source", "strategies", "--json"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn accept_single_criterion() {
    let o = run(&["accept", "--only", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("criterion 1 [PASS]"));
    assert_eq!(run(&["accept", "--only", "9"]).status.code(), Some(3));
}

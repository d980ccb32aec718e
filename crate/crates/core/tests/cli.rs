use std::process::{Command, Output};

use quasistate::report::{parse_report, Value};

fn quasistate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quasistate")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn real(v: &Value) -> f64 {
    match v {
        Value::Real(x) => x.get(),
        other => panic!("expected a real, got {other:?}"),
    }
}

#[test]
fn help_goes_to_stdout() {
    let o = quasistate(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("chsh-sweep"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(quasistate(&["box"]).status.code(), Some(2));
    assert_eq!(quasistate(&["box", "--r", "1,2"]).status.code(), Some(2));
    assert_eq!(quasistate(&["highdim", "--d", "1", "--epsilon", "0.5"]).status.code(), Some(2));
    assert_eq!(quasistate(&["planes", "--r", "0.2,0,0"]).status.code(), Some(2));
}

#[test]
fn complementarity_violation_fails_the_check() {
    let o = quasistate(&["pc-check", "--r", "1,1,0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("complementarity"));
    let rep = parse_report(&stdout(&o)).unwrap();
    assert_eq!(rep.outputs["satisfies_pc"], Value::Flag(false));

    let o = quasistate(&["pc-check", "--r", "0.6,0,0.8"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn box_reaches_four_beyond_root_two() {
    let o = quasistate(&["box", "--r", "0,0,2"]);
    assert_eq!(o.status.code(), Some(0));
    let rep = parse_report(&stdout(&o)).unwrap();
    assert!((real(&rep.outputs["chsh"]) - 4.0).abs() < 1e-9);
    assert_eq!(rep.outputs["probabilities_valid"], Value::Flag(true));
}

#[test]
fn tsirelson_settings_overshoot_into_invalid_probabilities() {
    let o = quasistate(&["box", "--r", "0,0,2", "--settings", "tsirelson"]);
    let rep = parse_report(&stdout(&o)).unwrap();
    assert!((real(&rep.outputs["chsh"]) - 4.0 * 2f64.sqrt()).abs() < 1e-9);
    assert_eq!(rep.outputs["probabilities_valid"], Value::Flag(false));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_emits_one_row_per_step() {
    let o = quasistate(&["chsh-sweep", "--r-min", "1", "--r-max", "2", "--steps", "11"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "r,chsh,expected,valid");
    assert_eq!(lines.len(), 12);
    assert_eq!(lines[11], "2,4,4,1");
}

#[test]
fn reports_are_reproducible() {
    let args = ["discriminate", "--r", "0.3,-1.1,0.9", "--y", "0.1", "--z", "-0.2", "--trials", "50", "--seed", "9"];
    let a = quasistate(&args);
    let b = quasistate(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn highdim_three_level_report() {
    let o = quasistate(&["highdim", "--d", "3", "--epsilon", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let rep = parse_report(&stdout(&o)).unwrap();
    assert!((real(&rep.outputs["q1_nu1"]) - 1.0).abs() < 1e-10);
    assert!(real(&rep.outputs["q1_nu0"]).abs() < 1e-10);
    let expected = (5f64.sqrt() + 2.0 * 3f64.sqrt()) / 7.0;
    assert!((real(&rep.outputs["overlap"]) - expected).abs() < 1e-11);
}

#[test]
fn highdim_accepts_explicit_spectrum() {
    let o = quasistate(&["highdim", "--d", "4", "--epsilon", "1", "--lambdas", "-1.5,0.25,0.25", "--phases", "random"]);
    assert_eq!(o.status.code(), Some(0));
    let o = quasistate(&["highdim", "--d", "4", "--epsilon", "1", "--lambdas", "-1,0.25,0.25"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn clone_demo_reproduces_both_states() {
    let o = quasistate(&["clone-demo", "--r", "0,0,1.5", "--y", "0.3", "--z", "0", "--format", "text"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("[PASS] plus_clone_matches"));
    assert!(text.contains("[PASS] minus_clone_matches"));
}

#[test]
fn planes_sample_both_boundaries() {
    let o = quasistate(&["planes", "--r", "0,0,2", "--samples", "8"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 17);
}

#[test]
fn timing_is_opt_in() {
    let plain = stdout(&quasistate(&["pc-check", "--r", "0,0,0.5"]));
    assert!(!plain.contains("duration_ms"));
    let timed = stdout(&quasistate(&["pc-check", "--r", "0,0,0.5", "--timing"]));
    assert!(timed.contains("duration_ms"));
}

#[test]
fn verify_all_passes() {
    let o = quasistate(&["verify-all", "--format", "text"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(stdout(&o).matches("[PASS]").count(), 9);
}

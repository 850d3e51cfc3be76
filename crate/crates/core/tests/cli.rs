use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dicke-ed"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn value<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

#[test]
fn analytic_entropy_curve() {
    let (code, out, _) = run(&["analytic", "--curve", "co_entropy", "--two_j", "1", "--kappa", "0:4:0.05"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "kappa,co_entropy");
    assert_eq!(lines.len(), 82);
    assert_eq!(lines[1], "0.0,0.0");
    // κ = 2 at j = 1/2: overlap 1/2.
    let row = lines.iter().find(|l| l.starts_with("2.0,")).unwrap();
    let s: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    let expected = 2f64.ln() - 0.25 * 0.5f64.ln() - 0.75 * 1.5f64.ln();
    assert!((s - expected).abs() < 1e-15);
}

#[test]
fn analytic_rabi_curve_uses_xi() {
    let (code, out, _) = run(&["analytic", "--curve", "rabi_entropy", "--xi", "1"]);
    assert_eq!(code, 0);
    let s: f64 = out.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((s - 0.684).abs() < 1e-3);
    let (code, _, err) = run(&["analytic", "--curve", "rabi_entropy", "--kappa", "1"]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn ground_prints_a_converged_record() {
    let (code, out, _) = run(&["ground", "--two_j", "10", "--omega_over_delta", "1", "--kappa", "0.5", "--epsilon", "0"]);
    assert_eq!(code, 0);
    assert_eq!(value(&out, "converged"), "true");
    let parity: f64 = value(&out, "parity").parse().unwrap();
    assert!((parity - 1.0).abs() < 1e-8);
    let jx: f64 = value(&out, "jx").parse().unwrap();
    assert!(jx.abs() < 1e-9);
    let s: f64 = value(&out, "entropy_nats").parse().unwrap();
    assert!(s > 0.0 && s < 11f64.ln());
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["frobnicate"][..],
        &["ground", "--two_j", "10"],
        &["ground", "--two_j", "0", "--omega_over_delta", "1", "--kappa", "0.5"],
        &["analytic", "--curve", "nope", "--kappa", "0:1:0.1"],
        &["analytic", "--curve", "co_entropy", "--kappa", "0:1"],
        &["verify", "--suite", "nope"],
    ] {
        let (code, _, _) = run(args);
        assert_eq!(code, 2, "{args:?}");
    }
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "kapa=1\n").unwrap();
    let (code, _, err) = run(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("line 1") && err.contains("kapa"), "{err}");
}

#[test]
fn help_exits_cleanly() {
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn verify_mean_field_suite() {
    let (code, out, _) = run(&["verify", "--suite", "mf"]);
    assert_eq!(code, 0);
    assert!(out.lines().next().unwrap().starts_with("PASS criterion  1"));
}

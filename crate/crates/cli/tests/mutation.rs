use std::process::Command;

fn selftest(extra: &[&str]) -> (bool, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_vorproc")).arg("selftest").args(extra).output().unwrap();
    (o.status.success(), String::from_utf8_lossy(&o.stdout).into_owned())
}

#[test]
fn selftest_passes_and_is_repeatable() {
    let (ok, first) = selftest(&[]);
    assert!(ok, "{first}");
    assert!(!first.contains("FAIL"));
    let (_, second) = selftest(&[]);
    assert_eq!(first, second);
}

#[test]
fn corrupted_incircle_predicate_is_caught() {
    let (ok, out) = selftest(&["--inject-fault", "incircle"]);
    assert!(!ok);
    assert!(out.contains("FAIL oracle-equivalence"), "{out}");
    assert!(out.contains("FAIL incremental-vs-rebuild"), "{out}");
}

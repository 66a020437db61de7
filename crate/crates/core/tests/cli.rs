use std::process::Command;

fn rankmf(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_rankmf")).args(args).output().unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(rankmf(&["solve", "--matrix", "poisson2d:7"]).status.code(), Some(0));
    let missing = rankmf(&["solve", "--matrix", "no/such/file.mtx"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("no/such/file.mtx"));
    assert_eq!(rankmf(&["sim", "--pz", "3"]).status.code(), Some(2));
    let starved = rankmf(&[
        "solve", "--matrix", "poisson2d:15", "--compression", "blr", "--tol", "0.5", "--threshold-dense", "16",
        "--mode", "gmres", "--gmres-tol", "1e-15", "--maxit", "1",
    ]);
    assert_eq!(starved.status.code(), Some(4));
}

#[test]
fn numeric_failure_exit_code() {
    let dir = std::env::temp_dir().join(format!("rankmf-bin-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("zero.mtx");
    std::fs::write(&path, "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 1\n").unwrap();
    assert_eq!(rankmf(&["solve", "--matrix", path.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn same_seed_same_bytes() {
    let args = ["solve", "--matrix", "poisson2d:15", "--compression", "hodlr", "--threshold-dense", "16", "--seed", "5", "--omit-timings"];
    assert_eq!(rankmf(&args).stdout, rankmf(&args).stdout);
}

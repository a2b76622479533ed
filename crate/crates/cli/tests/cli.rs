use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SUBCOMMANDS: [&str; 13] =
    ["gns", "weyl", "propagators", "commutator", "wick", "tadpole", "smatrix", "bogoliubov", "graphs", "extend", "ms", "wf", "flow"];

fn paqft(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paqft")).args(args).current_dir(cwd).output().expect("spawn paqft")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let mut rows = vec![r.headers().unwrap().iter().map(String::from).collect()];
    rows.extend(r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()));
    rows
}

#[test]
fn every_subcommand_writes_its_artifact() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in SUBCOMMANDS {
        let o = paqft(&[cmd, "--out", "art", "--timestamp", "t0"], dir.path());
        assert_eq!(code(&o), 0, "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        let csv = dir.path().join("art").join(format!("{cmd}_t0.csv"));
        let rows = read_csv(&csv);
        assert!(rows.len() > 1, "{cmd} wrote no rows");
        assert!(rows.iter().all(|r| r.len() == rows[0].len()));
        assert!(!o.stdout.is_empty(), "{cmd} printed no summary");
    }
}

#[test]
fn suite_passes_and_its_artifact_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = paqft(&["suite", "--out", out, "--timestamp", "run", "--seed", "7"], dir.path());
        let stdout = String::from_utf8_lossy(&o.stdout);
        assert_eq!(code(&o), 0, "{stdout}{}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout.contains("13 of 13 criteria passed"));
        assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS [")).count(), 13);
    }
    let a = std::fs::read(dir.path().join("a/suite_run.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/suite_run.csv")).unwrap();
    assert_eq!(a, b);
    let ids: std::collections::BTreeSet<String> = read_csv(&dir.path().join("a/suite_run.csv")).into_iter().skip(1).map(|r| r[0].clone()).collect();
    assert_eq!(ids.len(), 13);
}

#[test]
fn wick_artifact_has_the_three_terms() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&paqft(&["wick", "--out", ".", "--timestamp", "w"], dir.path())), 0);
    let rows = read_csv(&dir.path().join("wick_w.csv"));
    assert_eq!(rows[0], ["term", "hbar_order", "coefficient", "expected", "matches"]);
    let body: Vec<(&str, &str, &str)> = rows[1..].iter().map(|r| (r[0].as_str(), r[1].as_str(), r[2].as_str())).collect();
    assert_eq!(body, [("pointwise", "0", "1"), ("one-contraction", "1", "4"), ("two-contraction", "2", "2")]);
    assert!(rows[1..].iter().all(|r| r[4] == "true"));
}

#[test]
fn same_seed_same_bytes_and_seed_matters() {
    let dir = tempfile::tempdir().unwrap();
    let run = |out: &str, seed: &str| {
        for cmd in ["commutator", "smatrix", "bogoliubov", "tadpole"] {
            assert_eq!(code(&paqft(&[cmd, "--out", out, "--seed", seed, "--timestamp", "d"], dir.path())), 0);
        }
    };
    run("x", "11");
    run("y", "11");
    run("z", "12");
    let mut differs = 0;
    for cmd in ["commutator", "smatrix", "bogoliubov", "tadpole"] {
        let file = format!("{cmd}_d.csv");
        let x = std::fs::read(dir.path().join("x").join(&file)).unwrap();
        assert_eq!(x, std::fs::read(dir.path().join("y").join(&file)).unwrap(), "{cmd}");
        differs += (x != std::fs::read(dir.path().join("z").join(&file)).unwrap()) as usize;
    }
    assert!(differs > 0);
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("syntax.toml", "seed = = 3"),
        ("unknown.toml", "colour = 3"),
        ("range.toml", "trials = 0"),
        ("lattice.toml", "[lattice]\nn_t = 24\nn_x = 24\na_t = 2.0\na_x = 1.0\nmass = 1.0"),
        ("expr.toml", "[eg]\nexpression = \"xpi0(\""),
    ];
    for (name, text) in cases {
        write(dir.path(), name, text);
        let o = paqft(&["wick", "--config", name, "--out", "o"], dir.path());
        assert_eq!(code(&o), 2, "{name}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stderr).contains("configuration error"), "{name}");
    }
    assert!(!dir.path().join("o").exists());
    assert_eq!(code(&paqft(&["wick", "--config", "absent.toml"], dir.path())), 2);
    assert_eq!(code(&paqft(&["wick", "--timestamp", "../x"], dir.path())), 2);
    assert_eq!(code(&paqft(&["frobnicate"], dir.path())), 2);
}

#[test]
fn failed_check_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "strict.toml", "[tolerance]\nweyl = 1e-300\n[weyl]\ninterpolate = true\nfirst = [0.3, 1.5]");
    let o = paqft(&["weyl", "--config", "strict.toml", "--out", ".", "--timestamp", "s"], dir.path());
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(dir.path().join("weyl_s.csv").exists());
}

#[test]
fn gns_reads_a_state_file() {
    let dir = tempfile::tempdir().unwrap();
    let c2 = "dim 2\nunit 0\nc 0 0 0 1.0\nc 0 1 1 1.0\nc 1 0 1 1.0\nc 1 1 1 1.0\ns 0 0 1.0\ns 1 1 1.0\n";
    write(dir.path(), "half.alg", &format!("{c2}state 0 1.0\nstate 1 0.5\n"));
    write(dir.path(), "half.toml", "[gns]\nstate_file = \"half.alg\"");
    assert_eq!(code(&paqft(&["gns", "--config", "half.toml", "--out", ".", "--timestamp", "g"], dir.path())), 0);
    let rows = read_csv(&dir.path().join("gns_g.csv"));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][2], "2");

    write(dir.path(), "neg.alg", &format!("{c2}state 0 1.0\nstate 1 -1.0\n"));
    write(dir.path(), "neg.toml", "[gns]\nstate_file = \"neg.alg\"");
    assert_eq!(code(&paqft(&["gns", "--config", "neg.toml"], dir.path())), 2);
    write(dir.path(), "junk.alg", "dim two\n");
    write(dir.path(), "junk.toml", "[gns]\nstate_file = \"junk.alg\"");
    assert_eq!(code(&paqft(&["gns", "--config", "junk.toml"], dir.path())), 2);
}

//! End-to-end checks of the command line: file formats, exit codes, and
//! byte-level determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sl2k"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn tmpdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sl2k-cli-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn construct_validate_casimir_pipeline() {
    let dir = tmpdir("pipeline");
    let out = dir.join("sym2.json");
    let st = run(&[
        "construct",
        "sym",
        "--k",
        "2",
        "--field",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        st.status.success(),
        "{}",
        String::from_utf8_lossy(&st.stderr)
    );
    let v = run(&["validate", "--in", out.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(0));
    let c = run(&["casimir", "--in", out.to_str().unwrap()]);
    let text = String::from_utf8(c.stdout).unwrap();
    // k(k+2) = 8 = 1 mod 7
    assert!(text.contains("\"scalar\":1"), "{text}");
    // identities come out as one JSON line per instantiation, all passing
    let idl = run(&[
        "identities",
        "--in",
        out.to_str().unwrap(),
        "--imax",
        "2",
        "--jmax",
        "2",
    ]);
    assert!(idl.status.success());
    let lines = String::from_utf8(idl.stdout).unwrap();
    assert!(lines.lines().count() >= 10);
    for line in lines.lines() {
        assert!(line.contains("\"pass\":true"), "{line}");
    }
}

#[test]
fn deterministic_output_bytes() {
    let dir = tmpdir("determinism");
    let a = dir.join("a.json");
    let b = dir.join("b.json");
    for out in [&a, &b] {
        let st = run(&[
            "construct",
            "twisted",
            "--field",
            "3:2",
            "--exponents",
            "0,1",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(st.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    // scramble with the same seed is reproducible too
    let s1 = dir.join("s1.json");
    let s2 = dir.join("s2.json");
    for out in [&s1, &s2] {
        let st = run(&[
            "scramble",
            "--in",
            a.to_str().unwrap(),
            "--seed",
            "9",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(st.status.success());
    }
    assert_eq!(std::fs::read(&s1).unwrap(), std::fs::read(&s2).unwrap());
    // identical analysis output on identical input
    let r1 = run(&["coherence", "--in", s1.to_str().unwrap()]);
    let r2 = run(&["coherence", "--in", s2.to_str().unwrap()]);
    assert_eq!(r1.stdout, r2.stdout);
}

#[test]
fn corrupted_module_fails_validation_with_exit_1() {
    let dir = tmpdir("corrupt");
    let good = dir.join("good.json");
    let st = run(&[
        "construct",
        "sym",
        "--k",
        "1",
        "--field",
        "5",
        "--out",
        good.to_str().unwrap(),
    ]);
    assert!(st.status.success());
    // swap the X and Y matrices by hand
    let text = std::fs::read_to_string(&good).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let gen = &mut v["generators"][0];
    let x = gen["X"].clone();
    gen["X"] = gen["Y"].clone();
    gen["Y"] = x;
    let bad = dir.join("bad.json");
    std::fs::write(&bad, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    let val = run(&["validate", "--in", bad.to_str().unwrap()]);
    assert_eq!(val.status.code(), Some(1));
    let report = String::from_utf8(val.stdout).unwrap();
    assert!(report.contains("[X_i,Y_j]"), "{report}");
}

#[test]
fn malformed_input_exits_2() {
    let dir = tmpdir("malformed");
    let bad = dir.join("nonsense.json");
    std::fs::write(&bad, "{\"characteristic\": 4}").unwrap();
    let st = run(&["validate", "--in", bad.to_str().unwrap()]);
    assert_eq!(st.status.code(), Some(2));
    // characteristic 2 is refused at construction
    let st = run(&[
        "construct",
        "sym",
        "--k",
        "1",
        "--field",
        "2",
        "--out",
        dir.join("x.json").to_str().unwrap(),
    ]);
    assert_eq!(st.status.code(), Some(2));
}

#[test]
fn classify_and_refusals_through_the_cli() {
    let dir = tmpdir("classify");
    let s1 = dir.join("s1.json");
    let s2 = dir.join("s2.json");
    let sum = dir.join("sum.json");
    let scr = dir.join("scr.json");
    assert!(run(&[
        "construct",
        "sym",
        "--k",
        "1",
        "--field",
        "7",
        "--out",
        s1.to_str().unwrap()
    ])
    .status
    .success());
    assert!(run(&[
        "construct",
        "sym",
        "--k",
        "2",
        "--field",
        "7",
        "--out",
        s2.to_str().unwrap()
    ])
    .status
    .success());
    assert!(run(&[
        "construct",
        "sum",
        "--in",
        s1.to_str().unwrap(),
        "--in",
        s2.to_str().unwrap(),
        "--out",
        sum.to_str().unwrap()
    ])
    .status
    .success());
    assert!(run(&[
        "scramble",
        "--in",
        sum.to_str().unwrap(),
        "--seed",
        "4",
        "--out",
        scr.to_str().unwrap()
    ])
    .status
    .success());
    let cl = run(&["classify", "--in", scr.to_str().unwrap(), "--n", "3"]);
    assert!(cl.status.success());
    let text = String::from_utf8(cl.stdout).unwrap();
    assert!(text.contains("\"multiplicities\":[[1,1],[2,1]]"), "{text}");
    // twisted tensor refuses the series with exit 1
    let tw = dir.join("tw.json");
    assert!(run(&[
        "construct",
        "twisted",
        "--field",
        "3:2",
        "--exponents",
        "0,1",
        "--out",
        tw.to_str().unwrap()
    ])
    .status
    .success());
    let ser = run(&[
        "series",
        "--in",
        tw.to_str().unwrap(),
        "--n",
        "3",
        "--mode",
        "ker",
    ]);
    assert_eq!(ser.status.code(), Some(1));
}

//! Figure regeneration against committed golden files, byte for byte, plus
//! exit-code and config-handling checks. The golden parameter sets cover
//! the weight tables (one Kronecker, one alternating interior, one huge
//! exterior shift), the moment tables at three orders, and the envelope /
//! transmission curves for the three wide-pulse shifts including a complex
//! one.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_qdad")
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn run_ok(args: &[&str]) {
    let out = Command::new(bin()).args(args).output().expect("spawn qdad");
    assert!(
        out.status.success(),
        "qdad {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn assert_matches_golden(generated_stem: &Path, names: &[&str]) {
    for name in names {
        let got_path = generated_stem.with_file_name(name);
        let want_path = golden_dir().join(name);
        let got = std::fs::read(&got_path)
            .unwrap_or_else(|e| panic!("missing output {}: {e}", got_path.display()));
        let want = std::fs::read(&want_path)
            .unwrap_or_else(|e| panic!("missing golden {}: {e}", want_path.display()));
        if got != want {
            let got_s = String::from_utf8_lossy(&got);
            let want_s = String::from_utf8_lossy(&want);
            let diff_line = got_s
                .lines()
                .zip(want_s.lines())
                .enumerate()
                .find(|(_, (a, b))| a != b);
            panic!(
                "{name} differs from golden at {:?}",
                diff_line.map(|(i, (a, b))| format!("line {}: '{a}' vs '{b}'", i + 1))
            );
        }
    }
}

fn tmp() -> tempfile::TempDir {
    tempfile::tempdir().expect("tempdir")
}

#[test]
fn criterion_10_fig1_moment_tables_match_golden() {
    let dir = tmp();
    let stem = dir.path().join("fig1");
    run_ok(&[
        "moments", "--K", "1", "--K", "15", "--K", "30", "--alpha-tilde", "4", "--n-max", "40",
        "--out", stem.to_str().unwrap(),
    ]);
    assert_matches_golden(
        &stem,
        &[
            "fig1_K1.csv",
            "fig1_K1.json",
            "fig1_K15.csv",
            "fig1_K15.json",
            "fig1_K30.csv",
            "fig1_K30.json",
        ],
    );
    println!("criterion 10 (fig 1 moment tables): PASS");
}

#[test]
fn criterion_10_fig2_weight_tables_match_golden() {
    let dir = tmp();
    let stem = dir.path().join("fig2");
    run_ok(&[
        "dad", "--K", "30", "--alpha-re", "-15", "--alpha-re", "-15.5", "--alpha-re", "120",
        "--out", stem.to_str().unwrap(),
    ]);
    assert_matches_golden(
        &stem,
        &[
            "fig2_a0.csv",
            "fig2_a0.json",
            "fig2_a1.csv",
            "fig2_a1.json",
            "fig2_a2.csv",
            "fig2_a2.json",
        ],
    );
    // structural fact: the first shift sits on the node set, so the table
    // is a Kronecker delta at m = 15
    let text = std::fs::read_to_string(golden_dir().join("fig2_a0.csv")).unwrap();
    for line in text.lines().filter(|l| !l.starts_with('#') && !l.starts_with('m')) {
        let cells: Vec<&str> = line.split(',').collect();
        let m: u32 = cells[0].parse().unwrap();
        if m == 15 {
            assert!(cells[1].starts_with("1.0000000"));
        } else {
            assert_eq!(cells[1], "0");
        }
    }
    println!("criterion 10 (fig 2 weight tables): PASS");
}

#[test]
fn criterion_10_fig3_envelopes_match_golden() {
    let dir = tmp();
    for (stem_name, tilde, tilde_im, files) in [
        ("fig3a", "4", None, ["fig3a.csv", "fig3a.json"]),
        ("fig3b", "4.5", None, ["fig3b.csv", "fig3b.json"]),
        ("fig3c", "3.5", Some("2"), ["fig3c.csv", "fig3c.json"]),
    ] {
        let stem = dir.path().join(stem_name);
        let mut args = vec![
            "envelope", "--K", "30", "--alpha-tilde", tilde, "--sigma", "60", "--grid-points",
            "501", "--out",
        ];
        let stem_str = stem.to_str().unwrap().to_string();
        args.push(&stem_str);
        let extra;
        if let Some(im) = tilde_im {
            extra = ["--alpha-tilde-im", im];
            args.splice(5..5, extra.iter().copied());
        }
        run_ok(&args);
        assert_matches_golden(&stem, &files);
    }
    println!("criterion 10 (fig 3a-c envelopes): PASS");
}

#[test]
fn criterion_10_fig3_transmissions_match_golden() {
    let dir = tmp();
    for (stem_name, tilde, tilde_im, files) in [
        ("fig3d", "4", None, ["fig3d.csv", "fig3d.json"]),
        ("fig3e", "4.5", None, ["fig3e.csv", "fig3e.json"]),
        ("fig3f", "3.5", Some("2"), ["fig3f.csv", "fig3f.json"]),
    ] {
        let stem = dir.path().join(stem_name);
        let mut args = vec![
            "transmission", "--K", "30", "--alpha-tilde", tilde, "--sigma", "60",
            "--grid-points", "401", "--out",
        ];
        let stem_str = stem.to_str().unwrap().to_string();
        args.push(&stem_str);
        let extra;
        if let Some(im) = tilde_im {
            extra = ["--alpha-tilde-im", im];
            args.splice(5..5, extra.iter().copied());
        }
        run_ok(&args);
        assert_matches_golden(&stem, &files);
    }
    println!("criterion 10 (fig 3d-f transmissions): PASS");
}

#[test]
fn identical_configs_give_byte_identical_outputs() {
    let dir = tmp();
    let a = dir.path().join("runa");
    let b = dir.path().join("runb");
    for stem in [&a, &b] {
        run_ok(&[
            "envelope", "--K", "12", "--alpha-tilde", "3", "--sigma", "24", "--grid-points",
            "101", "--out", stem.to_str().unwrap(),
        ]);
    }
    for ext in ["csv", "json"] {
        let fa = std::fs::read(a.with_extension(ext)).unwrap();
        let fb = std::fs::read(b.with_extension(ext)).unwrap();
        assert_eq!(fa, fb, ".{ext} outputs differ between identical runs");
    }
}

#[test]
fn config_file_matches_flags() {
    let dir = tmp();
    let conf = dir.path().join("fig3a.conf");
    std::fs::write(
        &conf,
        "# wide-pulse envelope\nK = 30\nalpha_tilde = 4\nsigma = 60\ngrid_points = 501\n",
    )
    .unwrap();
    let stem = dir.path().join("fig3a");
    run_ok(&[
        "envelope", "--config", conf.to_str().unwrap(), "--out", stem.to_str().unwrap(),
    ]);
    assert_matches_golden(&stem, &["fig3a.csv", "fig3a.json"]);
}

#[test]
fn json_format_carries_the_table_inline() {
    let dir = tmp();
    let stem = dir.path().join("mom");
    run_ok(&[
        "moments", "--K", "2", "--alpha-re", "1", "--n-max", "2", "--format", "json", "--out",
        stem.to_str().unwrap(),
    ]);
    assert!(!stem.with_extension("csv").exists());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(stem.with_extension("json")).unwrap())
            .unwrap();
    assert_eq!(doc["command"], "moments");
    assert_eq!(doc["columns"][0], "n");
    assert_eq!(doc["rows"].as_array().unwrap().len(), 3);
    assert_eq!(doc["derived"]["spec"]["abs_sum"].as_str().unwrap()[..3], *"7.0");
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tmp();
    let out = dir.path().join("x");
    let code = |args: &[&str]| {
        Command::new(bin())
            .args(args)
            .output()
            .unwrap()
            .status
            .code()
            .unwrap()
    };
    // 0: success
    assert_eq!(
        code(&["dad", "--K", "1", "--alpha-re", "4", "--out", out.to_str().unwrap()]),
        0
    );
    // 1: parameter errors (missing K, bad number, bad flag)
    assert_eq!(code(&["dad", "--alpha-re", "4"]), 1);
    assert_eq!(code(&["dad", "--K", "1", "--alpha-re", "abc"]), 1);
    assert_eq!(code(&["dad", "--K", "1", "--alpha-re", "4", "--no-such-flag"]), 1);
    // 2: precision-insufficient
    assert_eq!(
        code(&[
            "envelope", "--K", "30", "--alpha-tilde", "4", "--sigma", "60", "--mode", "float",
            "--digits", "40", "--grid-points", "11", "--out", out.to_str().unwrap(),
        ]),
        2
    );
    // 3: I/O error (stem under a plain file)
    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, "not a dir").unwrap();
    let bad = blocker.join("sub/x");
    assert_eq!(
        code(&["dad", "--K", "1", "--alpha-re", "4", "--out", bad.to_str().unwrap()]),
        3
    );
}

#[test]
fn float_mode_at_sufficient_digits_succeeds_and_reports_mode() {
    let dir = tmp();
    let stem = dir.path().join("f");
    run_ok(&[
        "dad", "--K", "30", "--alpha-re", "120", "--mode", "float", "--digits", "71", "--out",
        stem.to_str().unwrap(),
    ]);
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(stem.with_extension("json")).unwrap())
            .unwrap();
    assert_eq!(doc["config"]["mode"], "float");
    assert_eq!(doc["derived"]["spec"]["exact"], false);
}

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn bpgd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bpgd"))
        .args(args)
        .env_remove("QBPGD_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn validate_reports_parameters() {
    let o = bpgd(&["validate", "--code", &fixture("steane.css")]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("n=7 k1=4 k2=3 k=1 valid"));
    let rep = fixture("rep2.alist");
    let o = bpgd(&["validate", "--hgp", &rep, &rep]);
    assert!(stdout(&o).contains("n=5 "));
}

#[test]
fn validate_rejects_corrupt_files() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.css");
    // Rows overlap in one position: G2·H1ᵀ ≠ 0.
    std::fs::write(&bad, "css bad 3 1 1\n1 2\n2 3\n").unwrap();
    let o = bpgd(&["validate", "--code", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    let o = bpgd(&["validate", "--code", dir.path().join("missing.css").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn construct_hgp_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("hgp.css");
    let rep = fixture("rep2.alist");
    let o = bpgd(&["construct-hgp", "--hgp", &rep, &rep, "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(&out).unwrap(), std::fs::read_to_string(fixture("hgp_rep2.css")).unwrap());
}

#[test]
fn decode_zero_syndrome() {
    let o = bpgd(&["decode", "--code", &fixture("steane.css"), "--syndrome", "000", "--p", "0.05"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["converged"], true);
    assert_eq!(v["support"], serde_json::json!([]));
    assert_eq!(v["rounds"], 1);
}

#[test]
fn decode_steane_single_errors() {
    // Qubit 5 decodes exactly; qubit 3 converges to a weight-4 pattern.
    let o = bpgd(&["decode", "--code", &fixture("steane.css"), "--error", "0000100", "--p", "0.05"]);
    let v = json(&o);
    assert_eq!(v["outcome"], "exact");
    assert_eq!(v["support"], serde_json::json!([5]));
    let o = bpgd(&["decode", "--code", &fixture("steane.css"), "--syndrome", "111", "--p", "0.05"]);
    assert_eq!(json(&o)["support"], serde_json::json!([2, 3, 5, 6]));
}

#[test]
fn decode_quaternary() {
    let o = bpgd(&[
        "decode", "--code", &fixture("steane.css"), "--decoder", "qbp", "--error", "IIIIYII", "--p", "0.05",
    ]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["estimate"], "IIIIYII");
    assert_eq!(v["outcome"], "exact");
}

#[test]
fn decode_nonconvergence_is_not_a_tool_failure() {
    let code = fixture("steane.css");
    let o = bpgd(&["decode", "--code", &code, "--syndrome", "101", "--p", "0.3", "--T", "1", "--R", "1"]);
    assert!(o.status.success());
    let v = json(&o);
    assert!(v["converged"].is_boolean());
}

#[test]
fn decode_rejects_bad_syndrome_length() {
    let o = bpgd(&["decode", "--code", &fixture("steane.css"), "--syndrome", "11", "--p", "0.05"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn decoder_noise_mismatch_is_rejected() {
    let o = bpgd(&["decode", "--code", &fixture("steane.css"), "--decoder", "qbp", "--syndrome", "000", "--p", "0.9"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_single_trial_rows() {
    let o = bpgd(&[
        "sweep", "--code", &fixture("steane.css"), "--decoder", "bp", "--p", "0.01,0.05,0.1", "--max-trials", "1",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "code,decoder,variant,p,T,R,gamma_prime,seed,trials,block_errors,bler,bler_ci_lo,bler_ci_hi,nonconv_frac,r_avg,wall_s"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    for r in rows {
        let f: Vec<&str> = r.split(',').collect();
        assert_eq!(f[8], "1");
        assert!(f[10] == "0.0" || f[10] == "1.0", "{r}");
        assert_eq!(f[15], "");
    }
}

#[test]
fn sweep_is_reproducible_and_seeded_by_env() {
    let code = fixture("steane.css");
    let args = ["sweep", "--code", &code, "--decoder", "bpgd-rd", "--p", "0.05,0.1", "--max-trials", "300"];
    let a = bpgd(&args);
    let b = bpgd(&args);
    assert_eq!(a.stdout, b.stdout);
    let env_seeded = Command::new(env!("CARGO_BIN_EXE_bpgd"))
        .args(args)
        .env("QBPGD_SEED", "77")
        .output()
        .unwrap();
    let flag_seeded = bpgd(&[&args[..], &["--seed", "77"]].concat());
    assert_eq!(env_seeded.stdout, flag_seeded.stdout);
    assert!(stdout(&flag_seeded).contains(",77,"));
}

#[test]
fn sweep_rejects_unsorted_probabilities() {
    let o = bpgd(&["sweep", "--code", &fixture("steane.css"), "--p", "0.1,0.05", "--max-trials", "5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_json_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    std::fs::write(
        &cfg,
        format!("code = {}\ndecoder = qbpgd\np = 0.05\nmax-trials = 50\nformat = json\n", fixture("steane.css")),
    )
    .unwrap();
    let o = bpgd(&["sweep", "--config", cfg.to_str().unwrap(), "--T", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v[0]["decoder"], "qbpgd");
    assert_eq!(v[0]["T"], 5);
    assert_eq!(v[0]["trials"], 50);
    assert_eq!(v[0]["R"], 7);
}

#[test]
fn sampling_bound_tables() {
    let o = bpgd(&["sampling-bound", "--code", &fixture("hgp_rep2.css"), "--p", "0.01,0.05,0.1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn sampling_bound_trivial_code_has_unit_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trivial.css");
    // k1 = k2: every syndrome has a single coset.
    std::fs::write(&path, "css trivial 2 1 1\n1 2\n1 2\n").unwrap();
    let o = bpgd(&["sampling-bound", "--code", path.to_str().unwrap(), "--p", "0.1", "--format", "json"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v[0]["ratio"], 1.0);
    assert_eq!(v[0]["p_dqml"], 0.0);
    assert_eq!(v[0]["p_s"], 0.0);
}

#[test]
fn degeneracy_reports() {
    let code = fixture("steane.css");
    let o = bpgd(&["degeneracy", "--code", &code, "--truth", "0000000", "--runs", "20", "--p", "0.05"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows, vec!["1,20,0,0,exact,"]);
    let o = bpgd(&["degeneracy", "--code", &code, "--truth", "5", "--runs", "1", "--p", "0.05"]);
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 2);
    let o = bpgd(&["degeneracy", "--code", &code, "--decoder", "bp", "--truth", "5", "--p", "0.05"]);
    assert_eq!(o.status.code(), Some(2));
}

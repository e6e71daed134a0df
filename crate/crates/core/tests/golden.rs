use std::path::PathBuf;

use bpgd_core::oracle::{sampling_error_rates, GoldenRecord};
use bpgd_core::parse_code_file;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

#[test]
fn exact_error_rates_match_golden_file() {
    let text = std::fs::read_to_string(fixtures().join("sampling_bound_golden.txt")).unwrap();
    let records = GoldenRecord::parse_file(&text).unwrap();
    assert_eq!(records.len(), 8);
    for r in records {
        let code = parse_code_file(fixtures().join(format!("{}.css", r.code))).unwrap();
        let rates = sampling_error_rates(&code, r.p_x).unwrap();
        assert!((rates.p_dqml - r.p_dqml).abs() < 1e-12, "{} {}", r.code, r.p_x);
        assert!((rates.p_sampling - r.p_sampling).abs() < 1e-12, "{} {}", r.code, r.p_x);
        assert!(rates.satisfies_bounds(1e-12));
    }
}

#[test]
fn fixture_codes_have_expected_parameters() {
    let steane = parse_code_file(fixtures().join("steane.css")).unwrap();
    assert_eq!((steane.n(), steane.k1(), steane.k2(), steane.k()), (7, 4, 3, 1));
    let hgp = parse_code_file(fixtures().join("hgp_rep2.css")).unwrap();
    assert_eq!((hgp.n(), hgp.k()), (5, 1));
    let h = bpgd_core::alist::read_alist(fixtures().join("hamming.alist")).unwrap();
    assert_eq!(&h, steane.h1());
}

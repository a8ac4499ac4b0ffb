//! Values checked against fixtures computed in 60-digit arithmetic by
//! `tools/gen_fixtures.py`.

use flowdet::determinant::{fk_det, mult_commutator_section, Section};
use flowdet::funcalc;
use flowdet::hardy::{MatrixFixture, OperatorMatrix};
use flowdet::symbol::{FrequencyModule, Symbol};
use serde::Deserialize;

#[derive(Deserialize)]
struct ExpCase {
    name: String,
    input: MatrixFixture,
    exp: MatrixFixture,
}

#[derive(Deserialize)]
struct DetCase {
    name: String,
    input: MatrixFixture,
    log_abs_det: f64,
}

#[derive(Deserialize)]
struct SectionCase {
    n: usize,
    padding: usize,
    d: f64,
}

fn load<T: for<'a> Deserialize<'a>>(name: &str) -> T {
    let path = format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

#[test]
fn exponential_matches_high_precision() {
    let cases: Vec<ExpCase> = load("exp.json");
    for case in cases {
        let a = OperatorMatrix::try_from(case.input).unwrap();
        let want = OperatorMatrix::try_from(case.exp).unwrap();
        let got = funcalc::mat_exp(&a.entries).unwrap();
        let rel = funcalc::op_norm(&(&got - &want.entries)).unwrap() / funcalc::op_norm(&want.entries).unwrap();
        assert!(rel <= 1e-12, "{}: relative error {rel:e}", case.name);
    }
}

#[test]
fn log_abs_det_matches_high_precision() {
    let cases: Vec<DetCase> = load("log_abs_det.json");
    for case in cases {
        let a = OperatorMatrix::try_from(case.input).unwrap();
        let got = funcalc::log_abs_det(&a.entries).unwrap();
        assert!(
            (got - case.log_abs_det).abs() <= 1e-12 * (1.0 + case.log_abs_det.abs()),
            "{}",
            case.name
        );
    }
}

#[test]
fn shift_pair_sections_match_high_precision() {
    let cases: Vec<SectionCase> = load("shift_pair_sections.json");
    let e1 = Symbol::character(FrequencyModule::circle(), 1).unwrap();
    let em1 = Symbol::character(FrequencyModule::circle(), -1).unwrap();
    for case in cases {
        let q = mult_commutator_section(&e1, &em1, Section::with_padding(case.n, case.padding)).unwrap();
        let d = fk_det(&q).unwrap().value;
        assert!((d - case.d).abs() <= 1e-13, "N = {}: {d} vs {}", case.n, case.d);
    }
}

#[test]
fn fixture_round_trip_is_exact() {
    let cases: Vec<ExpCase> = load("exp.json");
    for case in cases {
        let a = OperatorMatrix::try_from(case.input).unwrap();
        assert_eq!(OperatorMatrix::from_json(&a.to_json()).unwrap(), a);
    }
}

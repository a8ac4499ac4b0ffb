#![allow(dead_code)]

use flowdet::funcalc::CMatrix;
use flowdet::symbol::{FrequencyModule, Lattice, Symbol};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Point of the closed unit disc from two uniforms.
pub fn disc(r: f64, a: f64) -> Complex64 {
    Complex64::from_polar(r.sqrt(), std::f64::consts::TAU * a)
}

pub fn circle_symbol(max_degree: i64) -> impl Strategy<Value = Symbol> {
    prop::collection::vec((-max_degree..=max_degree, 0.0..1.0f64, 0.0..1.0f64), 1..6).prop_map(|terms| {
        Symbol::from_terms(
            FrequencyModule::circle(),
            terms.into_iter().map(|(k, r, a)| (Lattice::from(k), disc(r, a))),
        )
        .unwrap()
    })
}

/// Real-valued circle symbol: `c_{-λ} = conj(c_λ)`.
pub fn real_circle_symbol(max_degree: i64) -> impl Strategy<Value = Symbol> {
    circle_symbol(max_degree).prop_map(|s| s.plus(&s.conj()).unwrap())
}

pub fn torus_symbol(theta: f64, band: i64) -> impl Strategy<Value = Symbol> {
    prop::collection::vec(((-band..=band), (-band..=band), 0.0..1.0f64, 0.0..1.0f64), 1..5).prop_map(move |terms| {
        Symbol::from_terms(
            FrequencyModule::kronecker(theta),
            terms
                .into_iter()
                .map(|(m, n, r, a)| (Lattice::from([m, n]), disc(r, a))),
        )
        .unwrap()
    })
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// Random matrix scaled to operator norm `target` (exactly, via SVD).
pub fn random_with_norm(rng: &mut ChaCha8Rng, n: usize, target: f64) -> CMatrix {
    let m = random_matrix(rng, n);
    let norm = flowdet::funcalc::op_norm(&m).unwrap();
    m * c(target / norm, 0.0)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

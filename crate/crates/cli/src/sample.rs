//! Seeded random inputs. Every case draws from its own ChaCha stream, picked
//! by the case index, so results do not depend on evaluation order.

use std::f64::consts::TAU;

use flowdet::funcalc::{self, CMatrix};
use flowdet::symbol::{FrequencyModule, Lattice, Symbol};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream reserved for draws shared by all cases.
const SHARED_STREAM: u64 = u64::MAX;

pub fn case_rng(seed: u64, case: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(case as u64);
    rng
}

pub fn shared_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(SHARED_STREAM);
    rng
}

/// Uniform point of the disc of radius `r`.
pub fn disc<R: Rng>(rng: &mut R, r: f64) -> Complex64 {
    let rho = r * rng.random::<f64>().sqrt();
    Complex64::from_polar(rho, TAU * rng.random::<f64>())
}

/// Circle symbol of random degree `d ≤ max_degree` with every coefficient
/// `c_{-d}, …, c_d` drawn from the disc of radius `r`.
pub fn circle_symbol<R: Rng>(rng: &mut R, max_degree: i64, r: f64) -> Symbol {
    let d = rng.random_range(0..=max_degree);
    let terms: Vec<(Lattice, Complex64)> = (-d..=d).map(|k| (Lattice::from(k), disc(rng, r))).collect();
    Symbol::from_terms(FrequencyModule::circle(), terms).expect("circle terms are rank 1")
}

pub fn matrix<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

/// Random `n × n` matrix rescaled to operator norm `norm`.
pub fn matrix_with_norm<R: Rng>(rng: &mut R, n: usize, norm: f64) -> CMatrix {
    let m = matrix(rng, n);
    let current = funcalc::op_norm(&m).expect("svd of a small random matrix");
    if current == 0.0 {
        return m;
    }
    m * Complex64::new(norm / current, 0.0)
}

pub fn basepoints<R: Rng>(rng: &mut R, count: usize) -> Vec<[f64; 2]> {
    (0..count).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect()
}

/// Band-2 Kronecker pairs with unit coefficients whose closed-form flow
/// error has weight at most 2.
pub fn default_torus_pairs(theta: f64) -> Vec<(Symbol, Symbol)> {
    let module = FrequencyModule::kronecker(theta);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let sym = |terms: &[([i64; 2], Complex64)]| {
        Symbol::from_terms(module.clone(), terms.iter().map(|&(l, c)| (Lattice::from(l), c))).expect("torus terms")
    };
    vec![
        (sym(&[([1, 1], one)]), sym(&[([-1, -1], one)])),
        (
            sym(&[([1, 0], one), ([0, 1], one)]),
            sym(&[([-1, 0], one), ([0, -1], one)]),
        ),
        (sym(&[([0, 2], one), ([1, 0], one)]), sym(&[([0, -2], one)])),
        (
            sym(&[([2, 1], one), ([1, 2], i)]),
            sym(&[([-2, -1], one), ([-1, -2], one)]),
        ),
    ]
}

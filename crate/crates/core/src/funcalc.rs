//! Dense complex matrix functional calculus and quadrature.
//!
//! The exponential is scaling-and-squaring with diagonal Padé approximants;
//! determinants go through LU with partial pivoting and never through an
//! eigendecomposition. The adjoint series expands `e^T W e^{-T}` into nested
//! commutators and carries a certified bound on the part it did not sum.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Pivots smaller than this are treated as exact zeros.
pub const PIVOT_THRESHOLD: f64 = 1e-300;

/// Complex product through four real products, which take nalgebra's
/// blocked gemm path instead of the generic scalar loop.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ai) = (a.map(|z| z.re), a.map(|z| z.im));
    let (br, bi) = (b.map(|z| z.re), b.map(|z| z.im));
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    re.zip_map(&im, Complex64::new)
}

/// Largest number of nested commutators the adjoint series will sum.
pub const SERIES_TERM_CAP: usize = 500;

/// Overestimate factor applied to power-iteration norm estimates.
pub const NORM_OVERESTIMATE: f64 = 1.01;

fn ensure_square(a: &CMatrix, what: &str) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::Shape(format!(
            "{what} needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(())
}

fn one_norm(a: &CMatrix) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `AB - BA`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.53939833006323e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Matrix exponential by scaling and squaring with a diagonal Padé
/// approximant of degree 3, 5, 7, 9 or 13, picked from the 1-norm.
pub fn mat_exp(a: &CMatrix) -> Result<CMatrix> {
    ensure_square(a, "mat_exp")?;
    let n = a.nrows();
    let norm = one_norm(a);
    if !norm.is_finite() {
        return Err(Error::Overflow { norm });
    }
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let id = CMatrix::identity(n, n);

    for &(m, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            let (u, v) = pade_low(a, coeffs);
            return pade_solve(&u, &v, 0, norm);
        }
    }

    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    if s > 1000 {
        return Err(Error::Overflow { norm });
    }
    let scaled = a * Complex64::new(0.5f64.powi(s), 0.0);
    let a2 = matmul(&scaled, &scaled);
    let a4 = matmul(&a2, &a2);
    let a6 = matmul(&a4, &a2);
    let b = |k: usize| Complex64::new(B13[k], 0.0);
    let u_inner =
        matmul(&a6, &(&a6 * b(13) + &a4 * b(11) + &a2 * b(9))) + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &id * b(1);
    let u = matmul(&scaled, &u_inner);
    let v = matmul(&a6, &(&a6 * b(12) + &a4 * b(10) + &a2 * b(8))) + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &id * b(0);
    pade_solve(&u, &v, s as u32, norm)
}

/// Odd part `U` and even part `V` of a low-degree Padé numerator.
fn pade_low(a: &CMatrix, b: &[f64]) -> (CMatrix, CMatrix) {
    let n = a.nrows();
    let a2 = matmul(a, a);
    let mut power = CMatrix::identity(n, n);
    let mut u_inner = CMatrix::zeros(n, n);
    let mut v = CMatrix::zeros(n, n);
    for k in (0..b.len()).step_by(2) {
        v += &power * Complex64::new(b[k], 0.0);
        u_inner += &power * Complex64::new(b[k + 1], 0.0);
        power = matmul(&power, &a2);
    }
    (matmul(a, &u_inner), v)
}

fn pade_solve(u: &CMatrix, v: &CMatrix, squarings: u32, norm: f64) -> Result<CMatrix> {
    let p = v + u;
    let q = v - u;
    let lu = Lu::new(&q)?;
    let mut r = lu.solve(&p);
    for _ in 0..squarings {
        r = matmul(&r, &r);
    }
    if r.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Overflow { norm });
    }
    Ok(r)
}

/// LU factorization with partial pivoting, checked against
/// [`PIVOT_THRESHOLD`].
pub struct Lu {
    inner: nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
    log_abs_det: f64,
}

impl Lu {
    pub fn new(a: &CMatrix) -> Result<Lu> {
        ensure_square(a, "LU")?;
        let inner = a.clone().lu();
        let u = inner.u();
        let mut log_abs_det = 0.0;
        for i in 0..u.nrows() {
            let pivot = u[(i, i)].norm();
            if pivot.is_nan() || pivot <= PIVOT_THRESHOLD {
                return Err(Error::Singular { row: i, pivot });
            }
            log_abs_det += pivot.ln();
        }
        Ok(Lu { inner, log_abs_det })
    }

    /// `Σ log|u_ii|`.
    pub fn log_abs_det(&self) -> f64 {
        self.log_abs_det
    }

    pub fn solve(&self, b: &CMatrix) -> CMatrix {
        self.inner.solve(b).expect("pivots were checked at factorization")
    }

    pub fn inverse(&self) -> CMatrix {
        self.inner.try_inverse().expect("pivots were checked at factorization")
    }
}

pub fn log_abs_det(a: &CMatrix) -> Result<f64> {
    Ok(Lu::new(a)?.log_abs_det())
}

pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    Ok(Lu::new(a)?.inverse())
}

pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    Ok(Lu::new(a)?.solve(b))
}

/// Singular values in decreasing order.
pub fn singular_values(a: &CMatrix) -> Result<Vec<f64>> {
    if a.is_empty() {
        return Ok(Vec::new());
    }
    let svd = nalgebra::SVD::try_new(a.clone(), false, false, f64::EPSILON, 10_000).ok_or(Error::SvdFailure)?;
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    Ok(sv)
}

/// Operator norm from the largest singular value.
pub fn op_norm(a: &CMatrix) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

/// Operator-norm upper estimate: power iteration on `A*A`, scaled by
/// [`NORM_OVERESTIMATE`].
pub fn op_norm_upper(a: &CMatrix) -> f64 {
    let n = a.ncols();
    if n == 0 || a.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return 0.0;
    }
    let mut v = nalgebra::DVector::from_fn(n, |i, _| Complex64::new(1.0 + 0.37 * i as f64, 0.11 * (i % 7) as f64));
    v /= Complex64::new(v.norm(), 0.0);
    let ah = a.adjoint();
    let mut est = 0.0f64;
    for _ in 0..500 {
        let av = a * &v;
        let next = &ah * &av;
        let sigma = av.norm();
        let nn = next.norm();
        if nn == 0.0 {
            break;
        }
        v = next / Complex64::new(nn, 0.0);
        let converged = (sigma - est).abs() <= 1e-12 * sigma;
        est = est.max(sigma);
        if converged {
            break;
        }
    }
    NORM_OVERESTIMATE * est
}

/// Truncated nested-commutator expansion of `e^T W e^{-T}`.
#[derive(Debug, Clone)]
pub struct SeriesResult {
    pub value: CMatrix,
    /// Index of the last summed term `W_K / K!`.
    pub terms_used: usize,
    /// Upper bound for the norm of everything not summed.
    pub tail_bound: f64,
}

/// `Σ_{n>K} x^n/n!`, rounded up. `term` is `x^{K+1}/(K+1)!`.
fn exp_tail(x: f64, k: usize, term: f64) -> f64 {
    let mut t = term;
    let mut sum = 0.0;
    let mut n = k + 1;
    loop {
        sum += t;
        let ratio = x / (n + 1) as f64;
        t *= ratio;
        n += 1;
        if ratio < 0.5 && t <= 1e-17 * sum {
            // remaining terms are dominated by a geometric series
            sum += t * ratio / (1.0 - ratio) + t;
            break;
        }
        if n > k + 10_000 {
            return f64::INFINITY;
        }
    }
    sum * (1.0 + 1e-12)
}

/// Sums `W_n/n!` with `W_0 = W`, `W_{n+1} = [T, W_n]` until the certified
/// tail `Σ_{n>K} (2a)^n b / n!` (with `a ≥ ‖T‖`, `b ≥ ‖W‖`) drops to
/// `tol · b`. If some `W_n` vanishes exactly the series is finite and the
/// tail bound is zero.
pub fn adjoint_series(t: &CMatrix, w: &CMatrix, tol: f64) -> Result<SeriesResult> {
    ensure_square(t, "adjoint_series")?;
    if t.shape() != w.shape() {
        return Err(Error::Shape(format!("T is {:?}, W is {:?}", t.shape(), w.shape())));
    }
    let a = op_norm_upper(t);
    let b = op_norm_upper(w);
    let x = 2.0 * a;

    let mut value = w.clone();
    let mut wn = w.clone();
    let mut factorial = 1.0f64;
    // x^{n}/n! for the current n
    let mut term = 1.0f64;
    let zero = Complex64::new(0.0, 0.0);
    for n in 0..=SERIES_TERM_CAP {
        if n > 0 {
            wn = commutator(t, &wn);
            factorial *= n as f64;
            term *= x / n as f64;
            if wn.iter().all(|z| *z == zero) {
                return Ok(SeriesResult {
                    value,
                    terms_used: n - 1,
                    tail_bound: 0.0,
                });
            }
            value += &wn / Complex64::new(factorial, 0.0);
        }
        if !term.is_finite() || !factorial.is_finite() {
            break;
        }
        let tail = b * exp_tail(x, n, term * x / (n + 1) as f64);
        if tail <= tol * b {
            return Ok(SeriesResult {
                value,
                terms_used: n,
                tail_bound: tail,
            });
        }
    }
    Err(Error::SeriesCap {
        cap: SERIES_TERM_CAP,
        norm: a,
    })
}

/// `Σ_k (-1)^k C(n,k) T^{n-k} W T^k`, the closed form of the `n`-th nested
/// commutator `[T, [T, …, [T, W]]]`.
pub fn commutator_term_binomial(t: &CMatrix, w: &CMatrix, n: usize) -> CMatrix {
    let dim = t.nrows();
    let mut powers = Vec::with_capacity(n + 1);
    powers.push(CMatrix::identity(dim, dim));
    for k in 1..=n {
        let next = &powers[k - 1] * t;
        powers.push(next);
    }
    let mut out = CMatrix::zeros(dim, w.ncols());
    let mut binom = 1.0f64;
    for k in 0..=n {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        out += (&powers[n - k] * w * &powers[k]) * Complex64::new(sign * binom, 0.0);
        binom = binom * (n - k) as f64 / (k + 1) as f64;
    }
    out
}

/// Quadrature rule on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Largest final Newton correction among the nodes.
    pub node_residual: f64,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<T, F>(&self, mut f: F) -> T
    where
        F: FnMut(f64) -> T,
        T: std::ops::Mul<f64, Output = T> + std::iter::Sum<T>,
    {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| f(x) * w).sum()
    }
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// `n`-point Gauss–Legendre rule mapped to `[0, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> Result<QuadratureRule> {
    if !(1..=256).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "Gauss-Legendre order {n} outside 1..=256"
        )));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let mut residual = 0.0f64;
    for i in 0..n.div_ceil(2) {
        // roots of P_n in decreasing order on [-1, 1]
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dx = 0.0;
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        residual = residual.max(dx.abs());
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // mirror pair on [0, 1]
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        nodes[i] = 0.5 * (1.0 - x);
        weights[n - 1 - i] = 0.5 * w;
        weights[i] = 0.5 * w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.5;
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        node_residual: residual,
    })
}

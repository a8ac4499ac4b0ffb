//! Finite-section Hardy-space models on rank-1 frequency modules.
//!
//! Basis vectors are characters `e_j`. A Hardy window holds the
//! nonnegative-frequency characters `0, 1, …, N-1`; a two-sided window holds
//! `-N, …, N-1` and carries full-space operators such as multiplication and
//! the Hilbert transform. Every window has a trace weight `w` so that the
//! trace is `w · (matrix trace)`: `w = 1` on the unit circle and `w = 1/q` on
//! a period-`q` closed orbit.
//!
//! Semicommutator and commutator blocks are assembled from the formula for
//! the infinite Toeplitz operators, never as commutators of truncated
//! matrices (whose trace is identically zero).

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcalc::{self, CMatrix, QuadratureRule};
use crate::symbol::{FrequencyModule, Lattice, Symbol};

/// Ordered block of consecutive character frequencies with a trace weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyWindow {
    module: FrequencyModule,
    first: i64,
    size: usize,
    weight: f64,
}

impl HardyWindow {
    /// Hardy window `0, …, size-1` with the density-of-states weight, which
    /// equals the module's rate (`1` on the circle, `1/q` on an orbit).
    pub fn new(module: FrequencyModule, size: usize) -> Result<Self> {
        let rate = Self::check_module(&module)?;
        Ok(HardyWindow {
            module,
            first: 0,
            size,
            weight: rate,
        })
    }

    /// Two-sided window `-n, …, n-1`.
    pub fn two_sided(module: FrequencyModule, n: usize) -> Result<Self> {
        let rate = Self::check_module(&module)?;
        Ok(HardyWindow {
            module,
            first: -(n as i64),
            size: 2 * n,
            weight: rate,
        })
    }

    pub fn circle(size: usize) -> Self {
        Self::new(FrequencyModule::circle(), size).expect("circle module is rank 1")
    }

    pub fn with_weight(mut self, weight: f64) -> Result<Self> {
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "trace weight must be positive, got {weight}"
            )));
        }
        self.weight = weight;
        Ok(self)
    }

    /// Same module, offset and weight with a different size.
    pub fn resized(&self, size: usize) -> Self {
        HardyWindow { size, ..self.clone() }
    }

    fn check_module(module: &FrequencyModule) -> Result<f64> {
        if module.rank() != 1 {
            return Err(Error::RankMismatch {
                expected: 1,
                found: module.rank(),
            });
        }
        let rate = module.rates()[0];
        if rate.is_nan() || rate <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "operator models need a positive rate, got {rate}"
            )));
        }
        Ok(rate)
    }

    pub fn module(&self) -> &FrequencyModule {
        &self.module
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn first_frequency(&self) -> i64 {
        self.first
    }

    pub fn is_hardy(&self) -> bool {
        self.first == 0
    }

    pub fn frequencies(&self) -> impl Iterator<Item = i64> {
        self.first..self.first + self.size as i64
    }

    fn ensure_symbol(&self, phi: &Symbol) -> Result<()> {
        if phi.module() != &self.module {
            return Err(Error::ModuleMismatch {
                left: phi.module().rates().to_vec(),
                right: self.module.rates().to_vec(),
            });
        }
        Ok(())
    }

    fn ensure_hardy(&self) -> Result<()> {
        if !self.is_hardy() {
            return Err(Error::InvalidArgument(
                "operation needs a Hardy window starting at frequency 0".into(),
            ));
        }
        Ok(())
    }

    fn ensure_two_sided(&self) -> Result<usize> {
        if self.first != -(self.size as i64 / 2) || self.size % 2 != 0 {
            return Err(Error::InvalidArgument(
                "operation needs a two-sided window -n..n-1".into(),
            ));
        }
        Ok(self.size / 2)
    }
}

/// Dense matrix on a window.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub window: HardyWindow,
    pub entries: CMatrix,
}

impl OperatorMatrix {
    pub fn new(window: HardyWindow, entries: CMatrix) -> Result<Self> {
        if entries.nrows() != window.size || entries.ncols() != window.size {
            return Err(Error::Shape(format!(
                "{}x{} entries on a window of size {}",
                entries.nrows(),
                entries.ncols(),
                window.size
            )));
        }
        Ok(OperatorMatrix { window, entries })
    }

    pub fn identity(window: HardyWindow) -> Self {
        let n = window.size;
        OperatorMatrix {
            window,
            entries: CMatrix::identity(n, n),
        }
    }

    pub fn size(&self) -> usize {
        self.window.size
    }

    /// Same window, new entries.
    pub fn with_entries(&self, entries: CMatrix) -> OperatorMatrix {
        OperatorMatrix {
            window: self.window.clone(),
            entries,
        }
    }

    /// `w · Σ_i a_ii`.
    pub fn weighted_trace(&self) -> Complex64 {
        self.entries.trace() * self.window.weight
    }

    /// Weighted Schatten norm `(w · Σ σ_i^p)^{1/p}` for `p ∈ {1, 2}`.
    pub fn schatten_norm(&self, p: u32) -> Result<f64> {
        let w = self.window.weight;
        match p {
            1 => Ok(w * funcalc::singular_values(&self.entries)?.iter().sum::<f64>()),
            // Σσ² is the Frobenius norm squared
            2 => Ok((w * self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()),
            _ => Err(Error::InvalidArgument(format!("Schatten exponent {p} not in {{1, 2}}"))),
        }
    }

    /// Unweighted operator norm.
    pub fn op_norm(&self) -> Result<f64> {
        funcalc::op_norm(&self.entries)
    }

    /// Leading `n × n` corner on the window `0..n`.
    pub fn compress(&self, n: usize) -> Result<OperatorMatrix> {
        if n > self.size() {
            return Err(Error::Shape(format!("cannot compress size {} to {n}", self.size())));
        }
        Ok(OperatorMatrix {
            window: self.window.resized(n),
            entries: self.entries.view((0, 0), (n, n)).into_owned(),
        })
    }

    /// Whether `a(ρ, κ)` depends only on `ρ - κ`, compared exactly.
    pub fn is_toeplitz(&self) -> bool {
        let n = self.size();
        (1..n).all(|i| (1..n).all(|j| self.entries[(i, j)] == self.entries[(i - 1, j - 1)]))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&MatrixFixture::from(self)).expect("fixture serializes")
    }

    pub fn from_json(text: &str) -> Result<OperatorMatrix> {
        let fx: MatrixFixture = serde_json::from_str(text)?;
        fx.try_into()
    }
}

/// JSON fixture form: row-major `[re, im]` pairs plus the window triple.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFixture {
    pub rates: Vec<f64>,
    pub first: i64,
    pub n: usize,
    pub weight: f64,
    pub entries: Vec<[f64; 2]>,
}

impl From<&OperatorMatrix> for MatrixFixture {
    fn from(m: &OperatorMatrix) -> Self {
        let n = m.size();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let z = m.entries[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        MatrixFixture {
            rates: m.window.module.rates().to_vec(),
            first: m.window.first,
            n,
            weight: m.window.weight,
            entries,
        }
    }
}

impl TryFrom<MatrixFixture> for OperatorMatrix {
    type Error = Error;

    fn try_from(fx: MatrixFixture) -> Result<Self> {
        if fx.entries.len() != fx.n * fx.n {
            return Err(Error::Shape(format!("{} entries for n = {}", fx.entries.len(), fx.n)));
        }
        let module = FrequencyModule::new(fx.rates)?;
        HardyWindow::check_module(&module)?;
        let window = HardyWindow {
            module,
            first: fx.first,
            size: fx.n,
            weight: fx.weight,
        };
        let entries = CMatrix::from_row_iterator(fx.n, fx.n, fx.entries.iter().map(|&[re, im]| Complex64::new(re, im)));
        OperatorMatrix::new(window, entries)
    }
}

/// Matrix with `a(ρ, κ) = c_{ρ-κ}(φ)` over the window's frequencies. On a
/// Hardy window this is the Toeplitz operator; on a two-sided window it is
/// the multiplication operator.
fn banded(phi: &Symbol, window: &HardyWindow) -> Result<OperatorMatrix> {
    window.ensure_symbol(phi)?;
    let n = window.size;
    let mut entries = CMatrix::zeros(n, n);
    for (lambda, c) in phi.terms() {
        let k = lambda.coords()[0];
        for row in 0..n as i64 {
            let col = row - k;
            if (0..n as i64).contains(&col) {
                entries[(row as usize, col as usize)] = *c;
            }
        }
    }
    Ok(OperatorMatrix {
        window: window.clone(),
        entries,
    })
}

/// Compression of `T_φ = P M_φ` to a Hardy window.
pub fn toeplitz_matrix(phi: &Symbol, window: &HardyWindow) -> Result<OperatorMatrix> {
    window.ensure_hardy()?;
    banded(phi, window)
}

/// `M_φ` on a two-sided window.
pub fn multiplication_matrix(phi: &Symbol, window: &HardyWindow) -> Result<OperatorMatrix> {
    window.ensure_two_sided()?;
    banded(phi, window)
}

/// Hilbert transform on a two-sided window: `diag(sign ω(j))` with
/// `sign(0) = +1`, so that `e_0` lies in the Hardy space.
pub fn hilbert_sign_matrix(window: &HardyWindow) -> Result<OperatorMatrix> {
    window.ensure_two_sided()?;
    let n = window.size;
    let diag = nalgebra::DVector::from_iterator(
        n,
        window.frequencies().map(|j| {
            let w = window.module.omega(&Lattice::from(j));
            Complex64::new(if w >= 0.0 { 1.0 } else { -1.0 }, 0.0)
        }),
    );
    Ok(OperatorMatrix {
        window: window.clone(),
        entries: CMatrix::from_diagonal(&diag),
    })
}

/// `P = ½(I + H)`.
pub fn hardy_projection(window: &HardyWindow) -> Result<OperatorMatrix> {
    let h = hilbert_sign_matrix(window)?;
    let n = window.size;
    Ok(h.with_entries((CMatrix::identity(n, n) + &h.entries) * Complex64::new(0.5, 0.0)))
}

/// `P M_φ Q` on a two-sided window: entries `c_{j-k}` for `j ≥ 0 > k`.
pub fn hankel_block(phi: &Symbol, window: &HardyWindow) -> Result<OperatorMatrix> {
    let half = window.ensure_two_sided()?;
    let required = phi.max_degree() as usize;
    if half < required {
        return Err(Error::WindowTooSmall {
            size: window.size,
            required: 2 * required,
        });
    }
    let mut m = banded(phi, window)?;
    for i in 0..window.size {
        for j in 0..window.size {
            if !(i >= half && j < half) {
                m.entries[(i, j)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    Ok(m)
}

/// `[H, M_φ]` on a two-sided window.
pub fn hilbert_commutator(phi: &Symbol, window: &HardyWindow) -> Result<OperatorMatrix> {
    let h = hilbert_sign_matrix(window)?;
    let m = banded(phi, window)?;
    Ok(h.with_entries(funcalc::commutator(&h.entries, &m.entries)))
}

fn exact_block_size(phi: &Symbol, psi: &Symbol) -> usize {
    (phi.max_degree() + psi.max_degree()) as usize
}

/// `T_φ T_ψ - T_{φψ} = -(P M_φ Q)(Q M_ψ P)` for the infinite model, with
/// entries `-Σ_{μ<0} c_{ρ-μ}(φ) c_{μ-κ}(ψ)`.
///
/// The block is supported in rows below the top positive frequency of `φ`
/// and columns below the top negative frequency of `ψ`; a window at least
/// `deg φ + deg ψ` wide contains it entirely.
pub fn semicommutator_block(phi: &Symbol, psi: &Symbol, window: &HardyWindow) -> Result<OperatorMatrix> {
    window.ensure_hardy()?;
    window.ensure_symbol(phi)?;
    window.ensure_symbol(psi)?;
    let required = exact_block_size(phi, psi);
    if window.size < required {
        return Err(Error::WindowTooSmall {
            size: window.size,
            required,
        });
    }
    let n = window.size as i64;
    let mut entries = CMatrix::zeros(window.size, window.size);
    for (a, ca) in phi.terms() {
        let a = a.coords()[0];
        if a <= 0 {
            continue;
        }
        for (b, cb) in psi.terms() {
            let b = b.coords()[0];
            // μ = ρ - a < 0 and κ = μ - b
            for row in 0..a.min(n) {
                let col = row - a - b;
                if (0..n).contains(&col) {
                    entries[(row as usize, col as usize)] -= ca * cb;
                }
            }
        }
    }
    Ok(OperatorMatrix {
        window: window.clone(),
        entries,
    })
}

/// `[T_φ, T_ψ]` of the infinite model as a difference of semicommutators.
pub fn commutator_block(phi: &Symbol, psi: &Symbol, window: &HardyWindow) -> Result<OperatorMatrix> {
    let a = semicommutator_block(phi, psi, window)?;
    let b = semicommutator_block(psi, phi, window)?;
    Ok(a.with_entries(&a.entries - &b.entries))
}

/// The three sides of `‖[H, M_φ]‖₂² = ‖k_φ‖²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelIdentity {
    /// Weighted Hilbert–Schmidt norm squared of `[H, M_φ]`.
    pub lhs: f64,
    /// `(2/π) Σ |ω(λ)| |c_λ|²`.
    pub rhs_exact: f64,
    /// `(1/π²) ∫_X ∫_{|t| ≤ t_max} |φ(x+t) - φ(x)|²/t² dt dμ(x)`.
    pub rhs_quadrature: f64,
    /// Bound `8‖φ‖_∞²/(π² t_max)` on the discarded `|t| > t_max` part.
    pub tail_bound: f64,
    pub t_max: f64,
}

/// Gauss–Legendre panel order used for the `t` integral.
const KERNEL_PANEL_ORDER: usize = 16;

/// Evaluates the kernel-norm identity for `φ` on a two-sided window.
///
/// The quadrature side averages over `x` on a uniform grid (exact for the
/// trigonometric polynomial `|φ(x+t) - φ(x)|²`) and integrates `t` with
/// composite Gauss–Legendre panels short enough to resolve the fastest
/// oscillation.
pub fn kernel_norm_identity(phi: &Symbol, window: &HardyWindow, t_max: f64) -> Result<KernelIdentity> {
    let half = window.ensure_two_sided()?;
    window.ensure_symbol(phi)?;
    let d = phi.max_degree() as usize;
    if half <= d {
        return Err(Error::WindowTooSmall {
            size: window.size,
            required: 2 * (d + 1),
        });
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidArgument(format!("t_max must be positive, got {t_max}")));
    }
    let comm = hilbert_commutator(phi, window)?;
    let lhs = comm.schatten_norm(2)?.powi(2);

    let module = phi.module();
    let rhs_exact = (2.0 / PI)
        * phi
            .terms()
            .map(|(l, c)| module.omega(l).abs() * c.norm_sqr())
            .sum::<f64>();

    let terms: Vec<(f64, Complex64, i64)> = phi.terms().map(|(l, c)| (module.omega(l), *c, l.coords()[0])).collect();
    let grid = 2 * d + 1;
    // a_λ(x) = c_λ e_λ(x) at each grid point
    let at_x: Vec<Vec<Complex64>> = (0..grid)
        .map(|k| {
            terms
                .iter()
                .map(|&(_, c, m)| {
                    c * Complex64::from_polar(1.0, TAU * ((m * k as i64).rem_euclid(grid as i64) as f64 / grid as f64))
                })
                .collect()
        })
        .collect();
    let avg_sq_increment = |t: f64| -> f64 {
        let phase: Vec<Complex64> = terms
            .iter()
            .map(|&(w, _, _)| Complex64::from_polar(1.0, w * t) - 1.0)
            .collect();
        at_x.iter()
            .map(|a| a.iter().zip(&phase).map(|(ai, p)| ai * p).sum::<Complex64>().norm_sqr())
            .sum::<f64>()
            / grid as f64
    };

    let max_omega = terms.iter().map(|t| t.0.abs()).fold(0.0, f64::max);
    let panel = if max_omega > 0.0 {
        (0.25 * TAU / max_omega).min(0.25)
    } else {
        t_max
    };
    let panels = (t_max / panel).ceil() as usize;
    let h = t_max / panels as f64;
    let rule: QuadratureRule = funcalc::gauss_legendre(KERNEL_PANEL_ORDER)?;
    let mut integral = 0.0;
    for p in 0..panels {
        let start = p as f64 * h;
        let piece: f64 = rule.integrate(|s| {
            let t = start + s * h;
            // both signs of t
            (avg_sq_increment(t) + avg_sq_increment(-t)) / (t * t)
        });
        integral += piece * h;
    }
    let rhs_quadrature = integral / (PI * PI);
    let sup = phi.l1_coeff_norm();
    let tail_bound = 8.0 * sup * sup / (PI * PI * t_max);
    Ok(KernelIdentity {
        lhs,
        rhs_exact,
        rhs_quadrature,
        tail_bound,
        t_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn circ(terms: &[(i64, Complex64)]) -> Symbol {
        Symbol::from_terms(
            FrequencyModule::circle(),
            terms.iter().map(|&(m, v)| (Lattice::from(m), v)),
        )
        .unwrap()
    }

    fn e(k: i64) -> Symbol {
        Symbol::character(FrequencyModule::circle(), k).unwrap()
    }

    #[test]
    fn toeplitz_of_e1_is_the_shift() {
        let t = toeplitz_matrix(&e(1), &HardyWindow::circle(3)).unwrap();
        let z = c(0.0, 0.0);
        let o = c(1.0, 0.0);
        let want = CMatrix::from_row_slice(3, 3, &[z, z, z, o, z, z, z, o, z]);
        assert_eq!(t.entries, want);
        assert!(t.is_toeplitz());
    }

    #[test]
    fn toeplitz_of_constant_and_real_symbol() {
        let k = Symbol::constant(FrequencyModule::circle(), c(2.5, -1.0));
        let t = toeplitz_matrix(&k, &HardyWindow::circle(4)).unwrap();
        assert_eq!(t.entries, CMatrix::identity(4, 4) * c(2.5, -1.0));

        let real = circ(&[
            (1, c(0.2, 0.7)),
            (-1, c(0.2, -0.7)),
            (0, c(3.0, 0.0)),
            (2, c(-1.0, 0.5)),
            (-2, c(-1.0, -0.5)),
        ]);
        let t = toeplitz_matrix(&real, &HardyWindow::circle(6)).unwrap();
        assert_eq!(t.entries, t.entries.adjoint());
    }

    #[test]
    fn toeplitz_rejects_rank_two() {
        assert!(matches!(
            HardyWindow::new(FrequencyModule::kronecker(0.3), 4),
            Err(Error::RankMismatch { .. })
        ));
    }

    #[test]
    fn hilbert_sign_convention() {
        let win = HardyWindow::two_sided(FrequencyModule::circle(), 1).unwrap();
        let h = hilbert_sign_matrix(&win).unwrap();
        assert_eq!(
            h.entries,
            CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(-1.0, 0.0), c(1.0, 0.0)]))
        );

        let win = HardyWindow::two_sided(FrequencyModule::circle(), 5).unwrap();
        let h = hilbert_sign_matrix(&win).unwrap();
        assert_eq!(&h.entries * &h.entries, CMatrix::identity(10, 10));
        assert_eq!(h.entries, h.entries.adjoint());
        // e_0 sits at index n
        assert_eq!(h.entries[(5, 5)], c(1.0, 0.0));
        let p = hardy_projection(&win).unwrap();
        assert_eq!(&p.entries * &p.entries - &p.entries, CMatrix::zeros(10, 10));
    }

    #[test]
    fn semicommutator_shift_pair() {
        let win = HardyWindow::circle(16);
        let s = semicommutator_block(&e(1), &e(-1), &win).unwrap();
        let mut want = CMatrix::zeros(16, 16);
        want[(0, 0)] = c(-1.0, 0.0);
        assert_eq!(s.entries, want);

        // direct matrix products at N = 16: rows/cols away from the far edge agree
        let big = HardyWindow::circle(20);
        let t1 = toeplitz_matrix(&e(1), &big).unwrap().entries;
        let tm1 = toeplitz_matrix(&e(-1), &big).unwrap().entries;
        let one = toeplitz_matrix(&Symbol::constant(FrequencyModule::circle(), c(1.0, 0.0)), &big)
            .unwrap()
            .entries;
        let direct = &t1 * &tm1 - one;
        assert_eq!(direct.view((0, 0), (16, 16)).into_owned(), want);
    }

    #[test]
    fn semicommutator_of_analytic_symbols_vanishes() {
        let phi = circ(&[(0, c(1.0, 0.0)), (2, c(0.5, 0.5)), (3, c(-0.2, 0.0))]);
        let psi = circ(&[(1, c(0.3, -0.1)), (4, c(1.0, 0.0))]);
        let s = semicommutator_block(&phi, &psi, &HardyWindow::circle(8)).unwrap();
        assert!(s.entries.iter().all(|z| *z == c(0.0, 0.0)));
    }

    #[test]
    fn semicommutator_trace_for_second_harmonic() {
        let s = semicommutator_block(&e(2), &e(-2), &HardyWindow::circle(4)).unwrap();
        // pairs (ρ ≥ 0, μ < 0) with ρ - μ = 2: (0,-2) and (1,-1)
        assert_eq!(s.weighted_trace(), c(-2.0, 0.0));
    }

    #[test]
    fn semicommutator_window_too_small() {
        let r = semicommutator_block(&e(3), &e(-2), &HardyWindow::circle(4));
        assert_eq!(r.unwrap_err(), Error::WindowTooSmall { size: 4, required: 5 });
    }

    #[test]
    fn commutator_examples() {
        let win = HardyWindow::circle(5);
        let k = commutator_block(&e(1), &e(-1), &win).unwrap();
        let mut want = CMatrix::zeros(5, 5);
        want[(0, 0)] = c(-1.0, 0.0);
        assert_eq!(k.entries, want);
        assert_eq!(k.weighted_trace(), c(-1.0, 0.0));
        let pairing = e(1).pairing(&e(-1)).unwrap();
        assert!((k.weighted_trace() + pairing / c(0.0, TAU)).norm() < 1e-15);

        let phi = circ(&[(1, c(0.3, 0.0)), (-2, c(0.0, 1.0))]);
        let z = commutator_block(&phi, &phi, &win).unwrap();
        assert!(z.entries.iter().all(|v| *v == c(0.0, 0.0)));
    }

    #[test]
    fn weighted_trace_examples() {
        let id = OperatorMatrix::identity(HardyWindow::circle(5));
        assert_eq!(id.weighted_trace(), c(5.0, 0.0));
        let id = OperatorMatrix::identity(HardyWindow::circle(5).with_weight(0.2).unwrap());
        assert!((id.weighted_trace() - c(1.0, 0.0)).norm() < 1e-15);

        let win = HardyWindow::circle(6);
        let a = toeplitz_matrix(&circ(&[(1, c(0.4, 0.1)), (-1, c(1.0, 0.0))]), &win).unwrap();
        let b = toeplitz_matrix(&circ(&[(2, c(0.0, 1.0)), (0, c(2.0, 0.0))]), &win).unwrap();
        let comm = a.with_entries(funcalc::commutator(&a.entries, &b.entries));
        assert!(comm.weighted_trace().norm() < 1e-14);
    }

    #[test]
    fn schatten_examples() {
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = c(-1.0, 0.0);
        let a = OperatorMatrix::new(HardyWindow::circle(4), m).unwrap();
        assert!((a.schatten_norm(1).unwrap() - 1.0).abs() < 1e-15);
        let id = OperatorMatrix::identity(HardyWindow::circle(4));
        assert!((id.schatten_norm(2).unwrap() - 2.0).abs() < 1e-15);
        let k = commutator_block(&e(1), &e(-1), &HardyWindow::circle(8)).unwrap();
        assert!((k.schatten_norm(1).unwrap() - 1.0).abs() < 1e-15);
        assert!(id.schatten_norm(3).is_err());
    }

    #[test]
    fn kernel_identity_examples() {
        let win = HardyWindow::two_sided(FrequencyModule::circle(), 4).unwrap();
        let k = kernel_norm_identity(&e(1), &win, 50.0).unwrap();
        assert!((k.lhs - 4.0).abs() < 1e-12);
        assert!((k.rhs_exact - 4.0).abs() < 1e-12);
        assert!(k.rhs_quadrature <= k.rhs_exact + 1e-6);
        assert!(k.rhs_quadrature >= k.rhs_exact - k.tail_bound - 1e-6);

        let konst = Symbol::constant(FrequencyModule::circle(), c(3.0, 0.0));
        let k = kernel_norm_identity(&konst, &win, 10.0).unwrap();
        assert_eq!((k.lhs, k.rhs_exact), (0.0, 0.0));
        assert!(k.rhs_quadrature.abs() < 1e-14);

        let cos = circ(&[(1, c(1.0, 0.0)), (-1, c(1.0, 0.0))]);
        let k = kernel_norm_identity(&cos, &win, 10.0).unwrap();
        assert!((k.lhs - 8.0).abs() < 1e-12 && (k.rhs_exact - 8.0).abs() < 1e-12);
    }

    #[test]
    fn kernel_identity_direct_hs_sum() {
        // HS² of [H, M_φ] counts 4|c_λ|² once per sign-mismatched index pair
        let phi = circ(&[(2, c(0.5, -0.25)), (-3, c(0.1, 0.9)), (0, c(7.0, 0.0))]);
        let n = 6i64;
        let mut direct = 0.0;
        for j in -n..n {
            for k in -n..n {
                if (j >= 0) != (k >= 0) {
                    direct += 4.0 * phi.coeff(&Lattice::from(j - k)).norm_sqr();
                }
            }
        }
        let win = HardyWindow::two_sided(FrequencyModule::circle(), n as usize).unwrap();
        let k = kernel_norm_identity(&phi, &win, 5.0).unwrap();
        assert!((k.lhs - direct).abs() < 1e-12 * direct);
        assert!((k.lhs - k.rhs_exact).abs() < 1e-10 * k.lhs);
    }

    #[test]
    fn kernel_identity_window_too_small() {
        let win = HardyWindow::two_sided(FrequencyModule::circle(), 2).unwrap();
        assert!(matches!(
            kernel_norm_identity(&e(2), &win, 1.0),
            Err(Error::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn fixture_json_round_trip() {
        let t = toeplitz_matrix(&circ(&[(1, c(0.25, -0.5)), (-2, c(3.0, 0.0))]), &HardyWindow::circle(4)).unwrap();
        let back = OperatorMatrix::from_json(&t.to_json()).unwrap();
        assert_eq!(back, t);
    }
}

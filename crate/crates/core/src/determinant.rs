//! Determinants of multiplicative commutators of Toeplitz exponentials.
//!
//! For `Q = e^T e^W e^{-T} e^{-W}` the Fuglede–Kadison determinant satisfies
//! `d(Q) = exp(Re τ(TW - WT))`, which for Toeplitz `T = T_φ`, `W = T_ψ`
//! becomes `exp(-(1/2π) Im ∫ φ′ψ dμ)`.
//!
//! # Finite sections
//!
//! The determinant of a product of square matrices is the product of their
//! determinants, so a multiplicative commutator of truncated matrices always
//! has determinant 1. The model therefore builds the exponentials and their
//! product on a larger working window of size `N + padding`, then compresses
//! the product to its leading `N × N` corner before taking determinants or
//! traces. The corner sees the infinite operator up to an error that decays
//! faster than exponentially in the padding.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcalc::{self, matmul, CMatrix, QuadratureRule};
use crate::hardy::{toeplitz_matrix, HardyWindow, OperatorMatrix};
use crate::symbol::Symbol;

/// Largest window size accepted by the convergence routines.
pub const MAX_WINDOW: usize = 4096;

/// Default Gauss–Legendre order for the path functional.
pub const DEFAULT_QUADRATURE_ORDER: usize = 32;

/// Which sign of the exponent a determinant report uses.
///
/// `DettrChain` is `d = exp(Re τ(TW - WT)) = exp(-(1/2π) Im ∫ φ′ψ dμ)`, the
/// value computed by matrix determinants (the shift pair gives `e^{-1}`).
/// `PaperDisplay` is the opposite sign, `exp(+(1/2π) Im ∫ φ′ψ dμ)`, kept so
/// that both candidate signs can be reported side by side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignConvention {
    #[default]
    DettrChain,
    PaperDisplay,
}

impl SignConvention {
    /// Maps a chain-convention log-determinant into this convention.
    pub fn orient(self, log_value: f64) -> f64 {
        match self {
            SignConvention::DettrChain => log_value,
            SignConvention::PaperDisplay => -log_value,
        }
    }
}

/// A determinant value with its convergence trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeterminantReport {
    pub value: f64,
    pub log_value: f64,
    pub n_schedule: Vec<usize>,
    pub per_n_values: Vec<f64>,
    pub sign_convention: SignConvention,
    /// Gauss–Legendre order behind the value; 0 when no quadrature was used.
    pub quadrature_order: usize,
}

impl DeterminantReport {
    fn single(n: usize, log_value: f64, sign_convention: SignConvention, quadrature_order: usize) -> Self {
        let value = log_value.exp();
        DeterminantReport {
            value,
            log_value,
            n_schedule: vec![n],
            per_n_values: vec![value],
            sign_convention,
            quadrature_order,
        }
    }

    /// `|d_{N_{k+1}} - d_{N_k}|` along the schedule.
    pub fn cauchy_differences(&self) -> Vec<f64> {
        self.per_n_values.windows(2).map(|w| (w[1] - w[0]).abs()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn ensure_same_window(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<()> {
    if a.window != b.window {
        return Err(Error::Shape("operators live on different windows".into()));
    }
    Ok(())
}

fn is_zero(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re == 0.0 && z.im == 0.0)
}

/// `e^T e^W e^{-T} e^{-W}` on the operators' common window.
///
/// Commuting arguments return the identity without touching the exponential.
pub fn mult_commutator(t: &OperatorMatrix, w: &OperatorMatrix) -> Result<OperatorMatrix> {
    ensure_same_window(t, w)?;
    if is_zero(&funcalc::commutator(&t.entries, &w.entries)) {
        return Ok(OperatorMatrix::identity(t.window.clone()));
    }
    let et = funcalc::mat_exp(&t.entries)?;
    let ew = funcalc::mat_exp(&w.entries)?;
    let emt = funcalc::mat_exp(&-&t.entries)?;
    let emw = funcalc::mat_exp(&-&w.entries)?;
    Ok(t.with_entries(matmul(&matmul(&et, &ew), &matmul(&emt, &emw))))
}

/// Finite section of size `size` computed on a working window of
/// `size + padding`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub size: usize,
    pub padding: usize,
}

impl Section {
    /// Padding equal to the section size.
    pub fn new(size: usize) -> Self {
        Section { size, padding: size }
    }

    pub fn with_padding(size: usize, padding: usize) -> Self {
        Section { size, padding }
    }

    pub fn working_size(&self) -> usize {
        self.size + self.padding
    }

    /// Toeplitz matrices of both symbols on the working window.
    pub fn toeplitz_pair(&self, phi: &Symbol, psi: &Symbol) -> Result<(OperatorMatrix, OperatorMatrix)> {
        if self.size == 0 {
            return Err(Error::InvalidArgument("section size must be positive".into()));
        }
        let win = HardyWindow::new(phi.module().clone(), self.working_size())?;
        Ok((toeplitz_matrix(phi, &win)?, toeplitz_matrix(psi, &win)?))
    }
}

/// Leading corner of `e^{T_φ} e^{T_ψ} e^{-T_φ} e^{-T_ψ}` for a section.
pub fn mult_commutator_section(phi: &Symbol, psi: &Symbol, section: Section) -> Result<OperatorMatrix> {
    let (t, w) = section.toeplitz_pair(phi, psi)?;
    mult_commutator(&t, &w)?.compress(section.size)
}

/// `w · log|det Q|`.
pub fn fk_log_det(q: &OperatorMatrix) -> Result<f64> {
    Ok(q.window.weight() * funcalc::log_abs_det(&q.entries)?)
}

/// Fuglede–Kadison determinant `|det Q|^w` of a finite section.
pub fn fk_det(q: &OperatorMatrix) -> Result<DeterminantReport> {
    Ok(DeterminantReport::single(
        q.size(),
        fk_log_det(q)?,
        SignConvention::DettrChain,
        0,
    ))
}

fn check_schedule(schedule: &[usize]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::InvalidArgument("empty N-schedule".into()));
    }
    if schedule[0] == 0 || schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!(
            "N-schedule {schedule:?} is not strictly increasing and positive"
        )));
    }
    if let Some(&n) = schedule.iter().find(|&&n| n > MAX_WINDOW) {
        return Err(Error::InvalidArgument(format!("N = {n} exceeds the cap {MAX_WINDOW}")));
    }
    Ok(())
}

/// `d` of the sectioned multiplicative commutator at every `N` of the
/// schedule, padding each section by `N`.
pub fn det_convergence(
    phi: &Symbol,
    psi: &Symbol,
    schedule: &[usize],
    convention: SignConvention,
) -> Result<DeterminantReport> {
    check_schedule(schedule)?;
    let mut logs = Vec::with_capacity(schedule.len());
    for &n in schedule {
        let q = mult_commutator_section(phi, psi, Section::new(n))?;
        logs.push(convention.orient(fk_log_det(&q)?));
    }
    let log_value = *logs.last().expect("schedule is nonempty");
    Ok(DeterminantReport {
        value: log_value.exp(),
        log_value,
        n_schedule: schedule.to_vec(),
        per_n_values: logs.iter().map(|l| l.exp()).collect(),
        sign_convention: convention,
        quadrature_order: 0,
    })
}

/// `-∫₀¹ τ(γ′γ⁻¹) dt` along `γ(t) = e^{tW} e^T e^{-tW} e^{-T}`, with the trace
/// restricted to the leading `corner × corner` block.
///
/// The integrand is `τ(W - e^{tW} e^T W e^{-T} e^{-tW})`.
pub fn hs_path_functional_corner(
    t: &OperatorMatrix,
    w: &OperatorMatrix,
    rule: &QuadratureRule,
    corner: usize,
) -> Result<Complex64> {
    ensure_same_window(t, w)?;
    if corner == 0 || corner > t.size() {
        return Err(Error::Shape(format!(
            "corner {corner} outside window of size {}",
            t.size()
        )));
    }
    let et = funcalc::mat_exp(&t.entries)?;
    let emt = funcalc::mat_exp(&-&t.entries)?;
    let conj = matmul(&matmul(&et, &w.entries), &emt);
    let weight = t.window.weight();
    let mut total = Complex64::new(0.0, 0.0);
    for (&s, &ws) in rule.nodes.iter().zip(&rule.weights) {
        let sw = &w.entries * Complex64::new(s, 0.0);
        let inner = matmul(&matmul(&funcalc::mat_exp(&sw)?, &conj), &funcalc::mat_exp(&-sw)?);
        let diff = &w.entries - inner;
        let tr: Complex64 = (0..corner).map(|i| diff[(i, i)]).sum();
        total += tr * (weight * ws);
    }
    Ok(-total)
}

/// Path functional with the full trace; equals `w · tr(TW - WT)` for
/// matrices.
pub fn hs_path_functional(t: &OperatorMatrix, w: &OperatorMatrix, rule: &QuadratureRule) -> Result<Complex64> {
    hs_path_functional_corner(t, w, rule, t.size())
}

/// Path functional with the order doubled from 32 until successive values
/// differ by less than `1e-10` (or the order reaches 256).
pub fn hs_path_functional_adaptive(
    t: &OperatorMatrix,
    w: &OperatorMatrix,
    corner: usize,
) -> Result<(Complex64, usize)> {
    let mut order = DEFAULT_QUADRATURE_ORDER;
    let mut value = hs_path_functional_corner(t, w, &funcalc::gauss_legendre(order)?, corner)?;
    while order < 256 {
        let next = hs_path_functional_corner(t, w, &funcalc::gauss_legendre(2 * order)?, corner)?;
        let change = (next - value).norm();
        value = next;
        order *= 2;
        if change < 1e-10 {
            break;
        }
    }
    Ok((value, order))
}

/// `d` of a section through the path functional, `exp(Re ·)`.
pub fn det_via_path(
    phi: &Symbol,
    psi: &Symbol,
    section: Section,
    convention: SignConvention,
) -> Result<DeterminantReport> {
    let (t, w) = section.toeplitz_pair(phi, psi)?;
    let (value, order) = hs_path_functional_adaptive(&t, &w, section.size)?;
    Ok(DeterminantReport::single(
        section.size,
        convention.orient(value.re),
        convention,
        order,
    ))
}

/// Exponent `-(1/2π) Im ∫ φ′ψ dμ` of the symbol-side formula.
pub fn det_formula_log(phi: &Symbol, psi: &Symbol) -> Result<f64> {
    Ok(-phi.pairing(psi)?.im / TAU)
}

/// `exp(-(1/2π) Im ∫ φ′ψ dμ)`.
///
/// ```
/// use flowdet::symbol::{FrequencyModule, Symbol};
/// let e1 = Symbol::character(FrequencyModule::circle(), 1).unwrap();
/// let em1 = Symbol::character(FrequencyModule::circle(), -1).unwrap();
/// let d = flowdet::determinant::det_formula_symbols(&e1, &em1).unwrap();
/// assert!((d - (-1f64).exp()).abs() < 1e-15);
/// ```
pub fn det_formula_symbols(phi: &Symbol, psi: &Symbol) -> Result<f64> {
    Ok(det_formula_log(phi, psi)?.exp())
}

pub fn det_formula_symbols_with(phi: &Symbol, psi: &Symbol, convention: SignConvention) -> Result<f64> {
    Ok(convention.orient(det_formula_log(phi, psi)?).exp())
}

/// The Steinberg symbol `{e^φ, e^ψ}`, stored through its exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct SteinbergSymbol {
    pub phi: Symbol,
    pub psi: Symbol,
}

impl SteinbergSymbol {
    pub fn new(phi: Symbol, psi: Symbol) -> Result<Self> {
        if phi.module() != psi.module() {
            return Err(Error::ModuleMismatch {
                left: phi.module().rates().to_vec(),
                right: psi.module().rates().to_vec(),
            });
        }
        Ok(SteinbergSymbol { phi, psi })
    }

    pub fn swapped(&self) -> Self {
        SteinbergSymbol {
            phi: self.psi.clone(),
            psi: self.phi.clone(),
        }
    }
}

/// `Δ({e^φ, e^ψ})` at formula level.
pub fn steinberg_delta(s: &SteinbergSymbol) -> Result<f64> {
    det_formula_symbols(&s.phi, &s.psi)
}

/// `Δ` on the matrix side: `d` of the lifted commutator along a schedule.
pub fn steinberg_delta_matrix(s: &SteinbergSymbol, schedule: &[usize]) -> Result<DeterminantReport> {
    det_convergence(&s.phi, &s.psi, schedule, SignConvention::DettrChain)
}

/// A perturbation `K` supported in a fixed leading block, with `‖K‖ < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealPerturbation {
    block: CMatrix,
}

impl IdealPerturbation {
    pub fn new(block: CMatrix) -> Result<Self> {
        if block.nrows() != block.ncols() || block.nrows() == 0 {
            return Err(Error::Shape("perturbation block must be square and nonempty".into()));
        }
        let norm = funcalc::op_norm(&block)?;
        if norm >= 1.0 {
            return Err(Error::InvalidArgument(format!(
                "perturbation norm {norm} is not below 1"
            )));
        }
        Ok(IdealPerturbation { block })
    }

    /// `v · e_0 ⊗ e_0`.
    pub fn rank_one_corner(v: Complex64) -> Result<Self> {
        Self::new(CMatrix::from_element(1, 1, v))
    }

    pub fn block_size(&self) -> usize {
        self.block.nrows()
    }

    fn embed(&self, n: usize) -> CMatrix {
        let mut k = CMatrix::zeros(n, n);
        k.view_mut((0, 0), (self.block_size(), self.block_size()))
            .copy_from(&self.block);
        k
    }
}

/// Per-`N` comparison of `d(G̃HG̃⁻¹H⁻¹)` with `d(GHG⁻¹H⁻¹)`, where
/// `G̃ = e^T(I + K)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub n_schedule: Vec<usize>,
    pub base_values: Vec<f64>,
    pub perturbed_values: Vec<f64>,
    pub differences: Vec<f64>,
}

/// Checks that `d` only sees the symbols: perturbing `e^{T_φ}` by an ideal
/// element leaves the determinant unchanged in the limit.
///
/// The block of `K` must fit strictly inside the smallest section, since a
/// block filling the window is indistinguishable from a scalar.
pub fn symbol_invariance_probe(
    phi: &Symbol,
    psi: &Symbol,
    k: &IdealPerturbation,
    schedule: &[usize],
) -> Result<ProbeReport> {
    check_schedule(schedule)?;
    if k.block_size() >= schedule[0] {
        return Err(Error::InvalidArgument(format!(
            "perturbation block {} does not fit inside N = {}",
            k.block_size(),
            schedule[0]
        )));
    }
    let mut report = ProbeReport {
        n_schedule: schedule.to_vec(),
        base_values: vec![],
        perturbed_values: vec![],
        differences: vec![],
    };
    for &n in schedule {
        let section = Section::new(n);
        let (t, w) = section.toeplitz_pair(phi, psi)?;
        let m = section.working_size();
        let g = funcalc::mat_exp(&t.entries)?;
        let g_inv = funcalc::mat_exp(&-&t.entries)?;
        let h = funcalc::mat_exp(&w.entries)?;
        let h_inv = funcalc::mat_exp(&-&w.entries)?;
        let kk = k.embed(m);
        let ipk = CMatrix::identity(m, m) + &kk;
        let ipk_inv = funcalc::inverse(&ipk)?;
        let base = t
            .with_entries(matmul(&matmul(&g, &h), &matmul(&g_inv, &h_inv)))
            .compress(n)?;
        let pert = t
            .with_entries(matmul(
                &matmul(&matmul(&g, &ipk), &matmul(&h, &ipk_inv)),
                &matmul(&g_inv, &h_inv),
            ))
            .compress(n)?;
        let d0 = fk_log_det(&base)?.exp();
        let d1 = fk_log_det(&pert)?.exp();
        report.base_values.push(d0);
        report.perturbed_values.push(d1);
        report.differences.push((d1 - d0).abs());
    }
    Ok(report)
}

/// Outcome of the 2×2 block lift check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockLiftOutcome {
    /// Largest entry of `h(uv)⁻¹ h(u) h(v) - diag(I, uvu⁻¹v⁻¹)`.
    pub block_error: f64,
    /// `d` of the `2N` corner block.
    pub det_block: f64,
    /// `d` of the `N` corner of `uvu⁻¹v⁻¹`.
    pub det_commutator: f64,
    pub passed: bool,
}

const BLOCK_LIFT_TOL: f64 = 1e-10;

fn block_diag(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (n, m) = (a.nrows(), b.nrows());
    let mut out = CMatrix::zeros(n + m, n + m);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((n, n), (m, m)).copy_from(b);
    out
}

/// Realizes `h₁₂(u) = diag(u, u⁻¹)` for `u = e^{T_φ}`, `v = e^{T_ψ}` and
/// checks `h(uv)⁻¹ h(u) h(v) = diag(I, uvu⁻¹v⁻¹)` together with equality of
/// the block and commutator determinants.
pub fn block_lift_check(phi: &Symbol, psi: &Symbol, section: Section) -> Result<BlockLiftOutcome> {
    let (t, w) = section.toeplitz_pair(phi, psi)?;
    let m = section.working_size();
    let n = section.size;
    let u = funcalc::mat_exp(&t.entries)?;
    let u_inv = funcalc::mat_exp(&-&t.entries)?;
    let v = funcalc::mat_exp(&w.entries)?;
    let v_inv = funcalc::mat_exp(&-&w.entries)?;
    let uv = &u * &v;
    let uv_inv = &v_inv * &u_inv;
    let triple = block_diag(&uv_inv, &uv) * block_diag(&u, &u_inv) * block_diag(&v, &v_inv);
    let comm = &uv * &u_inv * &v_inv;
    let expected = block_diag(&CMatrix::identity(m, m), &comm);
    let scale = expected.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let block_error = (&triple - &expected).iter().map(|z| z.norm()).fold(0.0, f64::max) / scale;

    // leading corners of both diagonal blocks form the 2N section
    let mut corner = CMatrix::zeros(2 * n, 2 * n);
    corner.view_mut((0, 0), (n, n)).copy_from(&triple.view((0, 0), (n, n)));
    corner.view_mut((0, n), (n, n)).copy_from(&triple.view((0, m), (n, n)));
    corner.view_mut((n, 0), (n, n)).copy_from(&triple.view((m, 0), (n, n)));
    corner.view_mut((n, n), (n, n)).copy_from(&triple.view((m, m), (n, n)));
    let weight = t.window.weight();
    let det_block = (weight * funcalc::log_abs_det(&corner)?).exp();
    let det_commutator = fk_log_det(&t.with_entries(comm).compress(n)?)?.exp();
    let passed = block_error <= BLOCK_LIFT_TOL && (det_block - det_commutator).abs() <= BLOCK_LIFT_TOL * det_commutator;
    Ok(BlockLiftOutcome {
        block_error,
        det_block,
        det_commutator,
        passed,
    })
}

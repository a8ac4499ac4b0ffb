//! Certified checks of the norm inequalities behind the trace-class
//! estimates.
//!
//! Each check brackets both sides, `lhs ∈ [a, b]` and `rhs ∈ [c, d]`, and
//! passes when `b ≤ c`. It fails hard only when `a > d`. Anything in between
//! is indeterminate and is retried with a doubled sampling grid, which only
//! tightens the sampled lower ends of `C¹` norms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcalc::{self, CMatrix};
use crate::hardy::{hankel_block, semicommutator_block, toeplitz_matrix, HardyWindow, OperatorMatrix};
use crate::symbol::{NormBounds, Symbol};

/// Retries allowed for an indeterminate comparison.
pub const MAX_DOUBLINGS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Indeterminate,
    Fail,
}

pub fn classify(lhs: NormBounds, rhs: NormBounds) -> Verdict {
    if lhs.upper <= rhs.lower {
        Verdict::Pass
    } else if lhs.lower > rhs.upper {
        Verdict::Fail
    } else {
        Verdict::Indeterminate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditOutcome {
    pub lhs: NormBounds,
    pub rhs: NormBounds,
    pub verdict: Verdict,
    /// Grid used for the final classification.
    pub grid: usize,
    pub doublings: usize,
}

fn refine<F>(grid: usize, mut sides: F) -> Result<AuditOutcome>
where
    F: FnMut(usize) -> Result<(NormBounds, NormBounds)>,
{
    let mut grid = grid.max(1);
    let mut doublings = 0;
    loop {
        let (lhs, rhs) = sides(grid)?;
        let verdict = classify(lhs, rhs);
        if verdict != Verdict::Indeterminate || doublings == MAX_DOUBLINGS {
            return Ok(AuditOutcome {
                lhs,
                rhs,
                verdict,
                grid,
                doublings,
            });
        }
        grid *= 2;
        doublings += 1;
    }
}

// Singular values from a backward-stable SVD are accurate to a small
// multiple of eps·σ_max each.
fn svd_slack(sv: &[f64]) -> f64 {
    let top = sv.first().copied().unwrap_or(0.0);
    1e-12 * top * (sv.len().max(1) as f64) + f64::MIN_POSITIVE
}

fn bracket(v: f64, slack: f64) -> NormBounds {
    NormBounds {
        lower: (v - slack).max(0.0),
        upper: v + slack,
    }
}

/// Bracket for the weighted Schatten norm, `p ∈ {1, 2}`.
pub fn schatten_bounds(m: &OperatorMatrix, p: u32) -> Result<NormBounds> {
    let sv = funcalc::singular_values(&m.entries)?;
    let w = m.window.weight();
    let slack = svd_slack(&sv);
    match p {
        1 => Ok(bracket(w * sv.iter().sum::<f64>(), w * slack)),
        2 => {
            let v = (w * sv.iter().map(|s| s * s).sum::<f64>()).sqrt();
            Ok(bracket(v, w.sqrt() * slack * (sv.len().max(1) as f64).sqrt()))
        }
        _ => Err(Error::InvalidArgument(format!("Schatten exponent {p} not in {{1, 2}}"))),
    }
}

/// Bracket for the unweighted operator norm.
pub fn op_norm_bounds(m: &CMatrix) -> Result<NormBounds> {
    let sv = funcalc::singular_values(m)?;
    Ok(bracket(sv.first().copied().unwrap_or(0.0), svd_slack(&sv)))
}

fn c1(phi: &Symbol, grid: usize) -> Result<NormBounds> {
    let required = (2 * phi.max_degree() + 1) as usize;
    phi.c1_norm_bounds(grid.max(required))
}

fn times(a: NormBounds, b: NormBounds) -> NormBounds {
    NormBounds {
        lower: a.lower * b.lower,
        upper: a.upper * b.upper,
    }
}

fn plus(a: NormBounds, b: NormBounds) -> NormBounds {
    NormBounds {
        lower: a.lower + b.lower,
        upper: a.upper + b.upper,
    }
}

/// `‖T_φT_ψ - T_{φψ}‖₁ ≤ ‖φ‖_{C¹} ‖ψ‖_{C¹}` on a rank-1 module.
pub fn audit_semicommutator(phi: &Symbol, psi: &Symbol, grid: usize) -> Result<AuditOutcome> {
    let n = ((phi.max_degree() + psi.max_degree()) as usize).max(1);
    let win = HardyWindow::new(phi.module().clone(), n)?;
    let lhs = schatten_bounds(&semicommutator_block(phi, psi, &win)?, 1)?;
    refine(grid, |g| Ok((lhs, times(c1(phi, g)?, c1(psi, g)?))))
}

/// `‖P M_φ Q‖₂ ≤ ‖φ‖_{C¹}`.
pub fn audit_hankel(phi: &Symbol, grid: usize) -> Result<AuditOutcome> {
    let win = HardyWindow::two_sided(phi.module().clone(), (phi.max_degree() as usize).max(1))?;
    let lhs = schatten_bounds(&hankel_block(phi, &win)?, 2)?;
    refine(grid, |g| Ok((lhs, c1(phi, g)?)))
}

/// `‖SF‖_p ≤ ‖S‖_p ‖F‖_op` for matrices on a common window.
pub fn audit_holder(s: &OperatorMatrix, f: &OperatorMatrix, p: u32) -> Result<AuditOutcome> {
    if s.window != f.window {
        return Err(Error::Shape("operators live on different windows".into()));
    }
    let lhs = schatten_bounds(&s.with_entries(&s.entries * &f.entries), p)?;
    let rhs = times(schatten_bounds(s, p)?, op_norm_bounds(&f.entries)?);
    refine(0, |_| Ok((lhs, rhs)))
}

/// `T_φ + S` with `S` a square block in the leading corner, normed by
/// `‖T‖_⊕ = ‖φ‖_{C¹} + ‖S‖₁ + ‖S‖_op`.
#[derive(Debug, Clone, PartialEq)]
pub struct OplusElement {
    pub symbol: Symbol,
    pub block: CMatrix,
}

impl OplusElement {
    pub fn new(symbol: Symbol, block: CMatrix) -> Result<Self> {
        if block.nrows() != block.ncols() {
            return Err(Error::Shape("finite part must be square".into()));
        }
        Ok(OplusElement { symbol, block })
    }

    fn block_size(&self) -> usize {
        self.block.nrows()
    }

    fn embedded(&self, n: usize) -> CMatrix {
        let mut m = CMatrix::zeros(n, n);
        let k = self.block_size();
        m.view_mut((0, 0), (k, k)).copy_from(&self.block);
        m
    }

    pub fn norm_bounds(&self, grid: usize) -> Result<NormBounds> {
        let win = HardyWindow::new(self.symbol.module().clone(), self.block_size().max(1))?;
        let s = OperatorMatrix::new(win, self.embedded(self.block_size().max(1)))?;
        Ok(plus(
            c1(&self.symbol, grid)?,
            plus(schatten_bounds(&s, 1)?, op_norm_bounds(&s.entries)?),
        ))
    }
}

/// `‖TW‖_⊕ ≤ 4 ‖T‖_⊕ ‖W‖_⊕`, where `TW = T_{φψ} + R` with the finite part
/// `R = (T_φT_ψ - T_{φψ}) + T_φ S_W + S_T T_ψ + S_T S_W` assembled exactly.
pub fn audit_oplus(t: &OplusElement, w: &OplusElement, grid: usize) -> Result<AuditOutcome> {
    let (dp, dq) = (t.symbol.max_degree() as usize, w.symbol.max_degree() as usize);
    let k = t.block_size().max(w.block_size());
    let n = (dp + dq).max(k + dp).max(k + dq).max(1);
    let win = HardyWindow::new(t.symbol.module().clone(), n)?;
    let tp = toeplitz_matrix(&t.symbol, &win)?.entries;
    let tq = toeplitz_matrix(&w.symbol, &win)?.entries;
    let (st, sw) = (t.embedded(n), w.embedded(n));
    let semi = semicommutator_block(&t.symbol, &w.symbol, &win)?.entries;
    let rem = OperatorMatrix::new(win, semi + &tp * &sw + &st * &tq + &st * &sw)?;
    let rem_norm = plus(schatten_bounds(&rem, 1)?, op_norm_bounds(&rem.entries)?);
    let product = t.symbol.product(&w.symbol)?;
    refine(grid, |g| {
        let lhs = plus(c1(&product, g)?, rem_norm);
        let r = times(t.norm_bounds(g)?, w.norm_bounds(g)?);
        Ok((
            lhs,
            NormBounds {
                lower: 4.0 * r.lower,
                upper: 4.0 * r.upper,
            },
        ))
    })
}

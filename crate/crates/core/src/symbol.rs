//! Almost-periodic trigonometric-polynomial symbols.
//!
//! A [`Symbol`] is a finite sum `φ(x) = Σ c_λ e_λ(x)` of characters of a
//! torus, `e_λ(x) = exp(2πi⟨λ, x⟩)` with `λ` an integer lattice vector. The
//! flow moves a point along the direction given by the module's rates, so a
//! character is an eigenfunction of the flow derivative:
//!
//! ```text
//! e_λ(x + t) = exp(i ω(λ) t) e_λ(x),    ω(λ) = 2π ⟨λ, rates⟩.
//! ```
//!
//! Frequencies are kept as exact integer vectors; the only rounding happens
//! when `ω` is evaluated. The invariant measure is normalized Haar measure,
//! so the mean of a symbol is its constant coefficient.
//!
//! All reported constants depend on the character convention above.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients below this fraction of the largest one are dropped after
/// every algebraic operation.
pub const DEFAULT_DROP_TOLERANCE: f64 = 1e-15;

/// Integer frequency vector `λ`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Lattice(Vec<i64>);

impl Lattice {
    pub fn new(coords: Vec<i64>) -> Self {
        Lattice(coords)
    }

    pub fn zero(rank: usize) -> Self {
        Lattice(vec![0; rank])
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn neg(&self) -> Lattice {
        Lattice(self.0.iter().map(|c| -c).collect())
    }

    pub fn add(&self, other: &Lattice) -> Lattice {
        Lattice(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Lattice) -> Lattice {
        Lattice(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// Largest absolute coordinate.
    pub fn max_abs(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    /// Lexicographically larger of `λ` and `-λ`.
    fn fold_sign(&self) -> Lattice {
        let n = self.neg();
        if n > *self {
            n
        } else {
            self.clone()
        }
    }
}

impl fmt::Debug for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<i64> for Lattice {
    fn from(m: i64) -> Self {
        Lattice(vec![m])
    }
}

impl From<[i64; 2]> for Lattice {
    fn from(v: [i64; 2]) -> Self {
        Lattice(v.to_vec())
    }
}

/// Integer lattice together with the flow rates that turn a lattice point
/// into a flow frequency.
///
/// The circle model has rates `(1)`, a period-`q` closed orbit has `(1/q)`,
/// and the Kronecker flow of slope `θ` on the 2-torus has `(1, θ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyModule {
    rates: Vec<f64>,
}

impl FrequencyModule {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::InvalidArgument(
                "frequency module needs at least one rate".into(),
            ));
        }
        if rates.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite rate in {rates:?}")));
        }
        Ok(FrequencyModule { rates })
    }

    /// Unit circle with the rotation flow `x ↦ x + t`.
    pub fn circle() -> Self {
        FrequencyModule { rates: vec![1.0] }
    }

    /// Closed orbit of period `q` parametrized by `[0, 1)`.
    pub fn orbit(q: u64) -> Self {
        FrequencyModule {
            rates: vec![1.0 / q as f64],
        }
    }

    /// Linear flow of slope `θ` on the 2-torus.
    pub fn kronecker(theta: f64) -> Self {
        FrequencyModule {
            rates: vec![1.0, theta],
        }
    }

    pub fn rank(&self) -> usize {
        self.rates.len()
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// Flow frequency `ω(λ) = 2π⟨λ, rates⟩`.
    pub fn omega(&self, lambda: &Lattice) -> f64 {
        let dot: f64 = lambda.0.iter().zip(&self.rates).map(|(&m, r)| m as f64 * r).sum();
        TAU * dot
    }

    /// Checks that no nonzero `λ` with `|λ_i| ≤ bound` has `ω(λ) = 0`.
    ///
    /// This is how a rank-2 module certifies that its slope behaves like an
    /// irrational one at the resolution a computation actually uses.
    pub fn check_nondegenerate(&self, bound: i64) -> Result<()> {
        let rank = self.rank();
        let side = (2 * bound + 1) as usize;
        let total = side.pow(rank as u32);
        for idx in 0..total {
            let mut rest = idx;
            let coords: Vec<i64> = (0..rank)
                .map(|_| {
                    let c = (rest % side) as i64 - bound;
                    rest /= side;
                    c
                })
                .collect();
            let lambda = Lattice(coords);
            if !lambda.is_zero() && self.omega(&lambda) == 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "rates {:?} annihilate nonzero frequency {lambda:?}",
                    self.rates
                )));
            }
        }
        Ok(())
    }

    fn ensure_same(&self, other: &FrequencyModule) -> Result<()> {
        if self != other {
            return Err(Error::ModuleMismatch {
                left: self.rates.clone(),
                right: other.rates.clone(),
            });
        }
        Ok(())
    }
}

/// Certified bracket for a norm: the true value lies in `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormBounds {
    pub lower: f64,
    pub upper: f64,
}

impl NormBounds {
    pub fn exact(v: f64) -> Self {
        NormBounds { lower: v, upper: v }
    }

    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Finitely supported complex coefficient map over a [`FrequencyModule`].
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SymbolLiteral", into = "SymbolLiteral")]
pub struct Symbol {
    module: FrequencyModule,
    coeffs: BTreeMap<Lattice, Complex64>,
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Symbol")
            .field("rates", &self.module.rates)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl Symbol {
    pub fn zero(module: FrequencyModule) -> Self {
        Symbol {
            module,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(module: FrequencyModule, c: Complex64) -> Self {
        let rank = module.rank();
        Self::from_terms(module, [(Lattice::zero(rank), c)]).expect("zero lattice has module rank")
    }

    /// The character `e_λ`.
    pub fn character(module: FrequencyModule, lambda: impl Into<Lattice>) -> Result<Self> {
        Self::from_terms(module, [(lambda.into(), Complex64::new(1.0, 0.0))])
    }

    /// Builds a symbol from `(λ, c_λ)` pairs; repeated frequencies are summed.
    pub fn from_terms<I>(module: FrequencyModule, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Lattice, Complex64)>,
    {
        let mut coeffs = BTreeMap::new();
        for (lambda, c) in terms {
            if lambda.rank() != module.rank() {
                return Err(Error::RankMismatch {
                    expected: module.rank(),
                    found: lambda.rank(),
                });
            }
            *coeffs.entry(lambda).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        let mut s = Symbol { module, coeffs };
        s.prune(DEFAULT_DROP_TOLERANCE);
        Ok(s)
    }

    pub fn module(&self) -> &FrequencyModule {
        &self.module
    }

    pub fn coeff(&self, lambda: &Lattice) -> Complex64 {
        self.coeffs.get(lambda).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Lattice, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &Lattice> {
        self.coeffs.keys()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest absolute lattice coordinate in the support.
    pub fn max_degree(&self) -> i64 {
        self.coeffs.keys().map(Lattice::max_abs).max().unwrap_or(0)
    }

    /// Largest positive and largest negative (as a magnitude) frequency of a
    /// rank-1 symbol; `(0, 0)` for constants.
    pub fn degree_split(&self) -> (i64, i64) {
        let mut pos = 0;
        let mut neg = 0;
        for lambda in self.coeffs.keys() {
            let m = lambda.0[0];
            pos = pos.max(m);
            neg = neg.max(-m);
        }
        (pos, neg)
    }

    /// `Σ |c_λ|`, an upper bound for the sup norm.
    pub fn l1_coeff_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    /// Drops coefficients with `|c| ≤ tol · max|c|` (and exact zeros).
    pub fn prune(&mut self, tol: f64) {
        let max = self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max);
        let cut = tol * max;
        self.coeffs
            .retain(|_, c| c.norm() > cut && *c != Complex64::new(0.0, 0.0));
    }

    /// Whether `c_{-λ} = conj(c_λ)` for every `λ`, compared exactly.
    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|(l, c)| self.coeff(&l.neg()) == c.conj())
    }

    /// Pointwise complex conjugate: `c_λ(φ̄) = conj(c_{-λ}(φ))`.
    pub fn conj(&self) -> Symbol {
        Symbol {
            module: self.module.clone(),
            coeffs: self.coeffs.iter().map(|(l, c)| (l.neg(), c.conj())).collect(),
        }
    }

    pub fn scaled(&self, s: Complex64) -> Symbol {
        let mut out = Symbol {
            module: self.module.clone(),
            coeffs: self.coeffs.iter().map(|(l, c)| (l.clone(), c * s)).collect(),
        };
        out.prune(DEFAULT_DROP_TOLERANCE);
        out
    }

    pub fn plus(&self, other: &Symbol) -> Result<Symbol> {
        self.module.ensure_same(&other.module)?;
        let mut coeffs = self.coeffs.clone();
        for (l, c) in &other.coeffs {
            *coeffs.entry(l.clone()).or_default() += c;
        }
        let mut out = Symbol {
            module: self.module.clone(),
            coeffs,
        };
        out.prune(DEFAULT_DROP_TOLERANCE);
        Ok(out)
    }

    /// Pointwise product, realized as the coefficient convolution
    /// `c_λ(φψ) = Σ_μ c_μ(φ) c_{λ-μ}(ψ)`.
    pub fn product(&self, other: &Symbol) -> Result<Symbol> {
        self.module.ensure_same(&other.module)?;
        let mut coeffs: BTreeMap<Lattice, Complex64> = BTreeMap::new();
        for (a, ca) in &self.coeffs {
            for (b, cb) in &other.coeffs {
                *coeffs.entry(a.add(b)).or_default() += ca * cb;
            }
        }
        let mut out = Symbol {
            module: self.module.clone(),
            coeffs,
        };
        out.prune(DEFAULT_DROP_TOLERANCE);
        Ok(out)
    }

    /// Derivative along the flow: `c_λ(φ′) = iω(λ) c_λ(φ)`.
    pub fn flow_derivative(&self) -> Symbol {
        let mut out = Symbol {
            module: self.module.clone(),
            coeffs: self
                .coeffs
                .iter()
                .map(|(l, c)| (l.clone(), Complex64::new(0.0, self.module.omega(l)) * c))
                .collect(),
        };
        out.prune(DEFAULT_DROP_TOLERANCE);
        out
    }

    /// `∫ φ dμ` for the invariant probability measure, i.e. `c_0`.
    pub fn mean(&self) -> Complex64 {
        self.coeff(&Lattice::zero(self.module.rank()))
    }

    /// `∫ φ′ ψ dμ = Σ_λ iω(λ) c_λ(φ) c_{-λ}(ψ)`.
    ///
    /// Terms are grouped by `±λ` and summed in a fixed order, so that
    /// `pairing(ψ, φ)` is bit-for-bit `-pairing(φ, ψ)`.
    pub fn pairing(&self, other: &Symbol) -> Result<Complex64> {
        self.module.ensure_same(&other.module)?;
        let mut grouped: BTreeMap<Lattice, Complex64> = BTreeMap::new();
        for (l, c) in &self.coeffs {
            let Some(d) = other.coeffs.get(&l.neg()) else { continue };
            let term = Complex64::new(0.0, self.module.omega(l)) * (c * d);
            *grouped.entry(l.fold_sign()).or_default() += term;
        }
        Ok(grouped.values().fold(Complex64::new(0.0, 0.0), |acc, t| acc + t))
    }

    /// Evaluates `φ(x) = Σ c_λ exp(2πi⟨λ, x⟩)` at one point.
    pub fn evaluate(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.module.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.module.rank(),
                found: x.len(),
            });
        }
        Ok(self
            .coeffs
            .iter()
            .map(|(l, c)| {
                // reduce ⟨λ, x⟩ mod 1 before scaling to keep the phase accurate
                let turns: f64 = l.0.iter().zip(x).map(|(&m, xi)| (m as f64 * xi).rem_euclid(1.0)).sum();
                c * Complex64::from_polar(1.0, TAU * turns.rem_euclid(1.0))
            })
            .sum())
    }

    pub fn evaluate_grid(&self, points: &[Vec<f64>]) -> Result<Vec<Complex64>> {
        points.iter().map(|p| self.evaluate(p)).collect()
    }

    /// Value of `φ` at `x + t` along the flow.
    pub fn evaluate_along_flow(&self, x: &[f64], t: f64) -> Result<Complex64> {
        let shifted: Vec<f64> = x.iter().zip(self.module.rates()).map(|(xi, r)| xi + r * t).collect();
        self.evaluate(&shifted)
    }

    /// Certified bracket for `‖φ‖_{C¹} = ‖φ‖_∞ + ‖φ′‖_∞`.
    ///
    /// The lower end samples `|φ|` and `|φ′|` on the uniform grid with `grid`
    /// points per axis. Grid points are `k/grid` with phases reduced in exact
    /// integer arithmetic, so a doubled grid reproduces every old sample
    /// bit-for-bit and the lower end never decreases along a doubling
    /// sequence. The upper end is `Σ|c_λ| + Σ|ω(λ)||c_λ|`.
    pub fn c1_norm_bounds(&self, grid: usize) -> Result<NormBounds> {
        let required = (2 * self.max_degree() + 1) as usize;
        if grid < required {
            return Err(Error::GridTooSmall { grid, required });
        }
        let deriv = self.flow_derivative();
        let (sup, sup_d) = grid_sups(self, &deriv, grid);
        let upper = self.l1_coeff_norm() + deriv.l1_coeff_norm();
        Ok(NormBounds {
            lower: sup + sup_d,
            upper,
        })
    }
}

/// Sampled sup norms of `φ` and `ψ` over the uniform grid.
fn grid_sups(phi: &Symbol, psi: &Symbol, grid: usize) -> (f64, f64) {
    let rank = phi.module.rank();
    let g = grid as i64;
    let table: Vec<Complex64> = (0..grid)
        .map(|m| Complex64::from_polar(1.0, TAU * (m as f64 / grid as f64)))
        .collect();
    let eval = |s: &Symbol, k: &[i64]| -> Complex64 {
        s.coeffs
            .iter()
            .map(|(l, c)| {
                let idx: i64 = l.0.iter().zip(k).map(|(m, ki)| m * ki).sum();
                c * table[idx.rem_euclid(g) as usize]
            })
            .sum()
    };
    let total = grid.pow(rank as u32);
    let mut k = vec![0i64; rank];
    let (mut a, mut b) = (0.0f64, 0.0f64);
    for idx in 0..total {
        let mut rest = idx;
        for ki in k.iter_mut() {
            *ki = (rest % grid) as i64;
            rest /= grid;
        }
        a = a.max(eval(phi, &k).norm());
        b = b.max(eval(psi, &k).norm());
    }
    (a, b)
}

/// JSON literal form: `{"rates": [...], "terms": [{"lambda": [...], "re": .., "im": ..}]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymbolLiteral {
    pub rates: Vec<f64>,
    pub terms: Vec<TermLiteral>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermLiteral {
    pub lambda: Vec<i64>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl TryFrom<SymbolLiteral> for Symbol {
    type Error = Error;

    fn try_from(lit: SymbolLiteral) -> Result<Symbol> {
        let module = FrequencyModule::new(lit.rates)?;
        Symbol::from_terms(
            module,
            lit.terms
                .into_iter()
                .map(|t| (Lattice(t.lambda), Complex64::new(t.re, t.im))),
        )
    }
}

impl From<Symbol> for SymbolLiteral {
    fn from(s: Symbol) -> SymbolLiteral {
        SymbolLiteral {
            rates: s.module.rates.clone(),
            terms: s
                .coeffs
                .into_iter()
                .map(|(l, c)| TermLiteral {
                    lambda: l.0,
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }
}

impl Symbol {
    pub fn from_json(text: &str) -> Result<Symbol> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("symbol literal serializes")
    }
}

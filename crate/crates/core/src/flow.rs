//! The Kronecker flow of slope `θ` on the 2-torus, reached through closed
//! orbits of rational slope `p/q`.
//!
//! The orbit through `y` with slope `p/q` closes after time `q`. Restricting a
//! torus symbol to it gives a trigonometric polynomial in the orbit
//! parameter, with `e_{(m,n)}` landing on frequency `qm + pn` of the rank-1
//! module with rate `1/q`. Operator models on that module carry trace weight
//! `1/q`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardy::{commutator_block, HardyWindow};
use crate::symbol::{FrequencyModule, Lattice, Symbol};

/// Continued-fraction convergents with denominators at least 2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Convergents {
    pub pairs: Vec<(u64, u64)>,
    /// Set when `θ` equals one of its convergents to float resolution; the
    /// expansion stops there and `pairs` may be shorter than requested.
    pub rational: bool,
}

/// First `count` convergents `p/q` of `θ ∈ (0, 1)` with `q ≥ 2`.
///
/// ```
/// let golden = (5f64.sqrt() - 1.0) / 2.0;
/// let c = flowdet::flow::convergents(golden, 4).unwrap();
/// assert_eq!(c.pairs, vec![(1, 2), (2, 3), (3, 5), (5, 8)]);
/// ```
pub fn convergents(theta: f64, count: usize) -> Result<Convergents> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidArgument(format!("slope must lie in (0, 1), got {theta}")));
    }
    if count == 0 {
        return Err(Error::InvalidArgument("need at least one convergent".into()));
    }
    // p_{-1}/q_{-1} = 1/0, p_0/q_0 = 0/1
    let (mut p_prev, mut q_prev, mut p, mut q) = (1u64, 0u64, 0u64, 1u64);
    let mut x = theta;
    let mut pairs = Vec::with_capacity(count);
    let mut rational = false;
    while pairs.len() < count {
        let inv = 1.0 / x;
        let a = inv.floor();
        if !a.is_finite() || a > 1e15 {
            rational = true;
            break;
        }
        let a = a as u64;
        let next_p = a.checked_mul(p).and_then(|v| v.checked_add(p_prev));
        let next_q = a.checked_mul(q).and_then(|v| v.checked_add(q_prev));
        let (Some(np), Some(nq)) = (next_p, next_q) else {
            rational = true;
            break;
        };
        (p_prev, q_prev, p, q) = (p, q, np, nq);
        if q >= 2 {
            pairs.push((p, q));
        }
        if (theta * q as f64 - p as f64).abs() <= 4.0 * f64::EPSILON * q as f64 {
            rational = true;
            break;
        }
        x = inv - a as f64;
        if x <= 0.0 {
            rational = true;
            break;
        }
    }
    Ok(Convergents { pairs, rational })
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Rational slope `p/q` standing in for `θ`, and the orbit's basepoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowApproximant {
    pub theta: f64,
    pub p: u64,
    pub q: u64,
    pub basepoint: [f64; 2],
}

impl FlowApproximant {
    pub fn new(theta: f64, p: u64, q: u64, basepoint: [f64; 2]) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidArgument(format!("slope must lie in (0, 1), got {theta}")));
        }
        if p == 0 || q == 0 || gcd(p, q) != 1 {
            return Err(Error::InvalidArgument(format!(
                "{p}/{q} is not a reduced positive fraction"
            )));
        }
        let qf = q as f64;
        if (theta - p as f64 / qf).abs() >= 1.0 / (qf * qf) {
            return Err(Error::InvalidArgument(format!("{p}/{q} is not within 1/q² of {theta}")));
        }
        if basepoint.iter().any(|y| !(0.0..1.0).contains(y)) {
            return Err(Error::InvalidArgument(format!(
                "basepoint {basepoint:?} outside [0, 1)²"
            )));
        }
        Ok(FlowApproximant { theta, p, q, basepoint })
    }

    /// Orbit frequency `qm + pn` of the torus character `e_{(m,n)}`.
    pub fn orbit_frequency(&self, lambda: &Lattice) -> i64 {
        let c = lambda.coords();
        self.q as i64 * c[0] + self.p as i64 * c[1]
    }

    /// `exp(2πi⟨λ, y⟩)`, reduced symmetrically so that `-λ` gets the exact
    /// conjugate phase.
    fn phase(&self, lambda: &Lattice) -> Complex64 {
        let c = lambda.coords();
        let turns = c[0] as f64 * self.basepoint[0] + c[1] as f64 * self.basepoint[1];
        Complex64::from_polar(1.0, TAU * (turns - turns.round()))
    }

    /// Whether two distinct frequencies of `set` land on the same orbit
    /// frequency.
    pub fn collides<'a>(&self, set: impl IntoIterator<Item = &'a Lattice>) -> bool {
        let mut seen: BTreeMap<i64, &Lattice> = BTreeMap::new();
        for l in set {
            if let Some(prev) = seen.insert(self.orbit_frequency(l), l) {
                if prev != l {
                    return true;
                }
            }
        }
        false
    }

    /// Aliasing test for a pair: collisions among `supp φ ∪ supp ψ ∪
    /// (supp φ + supp ψ) ∪ {0}`.
    pub fn pair_aliased(&self, phi: &Symbol, psi: &Symbol) -> bool {
        let mut set: Vec<Lattice> = phi.support().chain(psi.support()).cloned().collect();
        for a in phi.support() {
            for b in psi.support() {
                set.push(a.add(b));
            }
        }
        set.push(Lattice::zero(2));
        set.sort();
        set.dedup();
        self.collides(&set)
    }
}

/// A torus symbol restricted to a closed orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSymbol {
    pub symbol: Symbol,
    pub source: Symbol,
    pub approximant: FlowApproximant,
    /// Distinct source frequencies collided.
    pub aliased: bool,
}

fn ensure_torus(phi: &Symbol) -> Result<()> {
    if phi.module().rank() != 2 {
        return Err(Error::RankMismatch {
            expected: 2,
            found: phi.module().rank(),
        });
    }
    Ok(())
}

/// `t ↦ φ(y + t(1, p/q))` for `t ∈ [0, q)`, written on the orbit module.
pub fn orbit_restrict(phi: &Symbol, a: &FlowApproximant) -> Result<OrbitSymbol> {
    ensure_torus(phi)?;
    let terms = phi
        .terms()
        .map(|(l, c)| (Lattice::from(a.orbit_frequency(l)), c * a.phase(l)));
    let symbol = Symbol::from_terms(FrequencyModule::orbit(a.q), terms)?;
    Ok(OrbitSymbol {
        symbol,
        source: phi.clone(),
        approximant: a.clone(),
        aliased: a.collides(phi.support()),
    })
}

/// Mean of `φ` over the closed orbit.
pub fn birkhoff_average(phi: &Symbol, a: &FlowApproximant) -> Result<Complex64> {
    Ok(orbit_restrict(phi, a)?.symbol.mean())
}

/// Model against exact value of the trace formula on one approximant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowTraceError {
    /// `(1/q) tr [T_f, T_g]` for the restricted symbols.
    pub model: Complex64,
    /// `-(1/2πi) ∫ φ′ψ dμ` with the true slope.
    pub exact: Complex64,
    pub error: f64,
    /// Error in `exp(Re ·)` of the two sides.
    pub error_det: f64,
    pub window: usize,
    pub aliased: bool,
}

/// Smallest window on which the orbit commutator block is exact.
pub fn admissible_window(phi: &Symbol, psi: &Symbol, a: &FlowApproximant) -> Result<usize> {
    let f = orbit_restrict(phi, a)?;
    let g = orbit_restrict(psi, a)?;
    Ok(((f.symbol.max_degree() + g.symbol.max_degree()) as usize).max(1))
}

/// Compares the period-`q` model of the trace formula with its exact value
/// on the Kronecker module.
///
/// `n = None` picks the smallest exact window. Aliased pairs still produce a
/// value, marked by `aliased`.
pub fn flow_trace_error(phi: &Symbol, psi: &Symbol, a: &FlowApproximant, n: Option<usize>) -> Result<FlowTraceError> {
    ensure_torus(phi)?;
    ensure_torus(psi)?;
    if phi.module() != psi.module() {
        return Err(Error::ModuleMismatch {
            left: phi.module().rates().to_vec(),
            right: psi.module().rates().to_vec(),
        });
    }
    let rates = phi.module().rates();
    if rates[0] != 1.0 || rates[1] != a.theta {
        return Err(Error::ModuleMismatch {
            left: rates.to_vec(),
            right: vec![1.0, a.theta],
        });
    }
    let f = orbit_restrict(phi, a)?;
    let g = orbit_restrict(psi, a)?;
    let window = n.unwrap_or(((f.symbol.max_degree() + g.symbol.max_degree()) as usize).max(1));
    let win = HardyWindow::new(FrequencyModule::orbit(a.q), window)?;
    let model = commutator_block(&f.symbol, &g.symbol, &win)?.weighted_trace();
    let exact = -phi.pairing(psi)? / Complex64::new(0.0, TAU);
    Ok(FlowTraceError {
        model,
        exact,
        error: (model - exact).norm(),
        error_det: (model.re.exp() - exact.re.exp()).abs(),
        window,
        aliased: a.pair_aliased(phi, psi),
    })
}

/// One line of a rational-flow sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub theta: f64,
    pub p: u64,
    pub q: u64,
    #[serde(rename = "N")]
    pub n: usize,
    pub basepoint: [f64; 2],
    pub error_trace: f64,
    pub error_det: f64,
    pub aliasing_flag: bool,
}

/// Runs [`flow_trace_error`] over every convergent and basepoint.
pub fn rational_flow_sweep(
    phi: &Symbol,
    psi: &Symbol,
    convergents: &[(u64, u64)],
    basepoints: &[[f64; 2]],
) -> Result<Vec<SweepRow>> {
    ensure_torus(phi)?;
    let theta = phi.module().rates()[1];
    let mut rows = Vec::with_capacity(convergents.len() * basepoints.len());
    for &(p, q) in convergents {
        for &y in basepoints {
            let a = FlowApproximant::new(theta, p, q, y)?;
            let e = flow_trace_error(phi, psi, &a, None)?;
            rows.push(SweepRow {
                theta,
                p,
                q,
                n: e.window,
                basepoint: y,
                error_trace: e.error,
                error_det: e.error_det,
                aliasing_flag: e.aliased,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> f64 {
        (5f64.sqrt() - 1.0) / 2.0
    }

    fn torus(theta: f64, terms: &[([i64; 2], Complex64)]) -> Symbol {
        Symbol::from_terms(
            FrequencyModule::kronecker(theta),
            terms.iter().map(|&(l, c)| (Lattice::from(l), c)),
        )
        .unwrap()
    }

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn golden_convergents() {
        let c = convergents(golden(), 9).unwrap();
        assert_eq!(
            c.pairs,
            vec![
                (1, 2),
                (2, 3),
                (3, 5),
                (5, 8),
                (8, 13),
                (13, 21),
                (21, 34),
                (34, 55),
                (55, 89)
            ]
        );
        assert!(!c.rational);
    }

    #[test]
    fn rational_slope_is_reported() {
        let c = convergents(1.0 / 3.0 + 1e-17, 1).unwrap();
        assert_eq!(c.pairs, vec![(1, 3)]);
        let c = convergents(1.0 / 3.0, 5).unwrap();
        assert_eq!(c.pairs, vec![(1, 3)]);
        assert!(c.rational);
        assert!(convergents(1.0, 3).is_err());
    }

    #[test]
    fn convergents_satisfy_dirichlet() {
        let theta = 2f64.sqrt() - 1.0;
        let c = convergents(theta, 12).unwrap();
        assert!(c.pairs.windows(2).all(|w| w[0].1 < w[1].1));
        for &(p, q) in &c.pairs {
            FlowApproximant::new(theta, p, q, [0.0, 0.0]).unwrap();
        }
    }

    #[test]
    fn approximant_rejects_bad_fractions() {
        assert!(FlowApproximant::new(golden(), 2, 4, [0.0, 0.0]).is_err());
        assert!(FlowApproximant::new(golden(), 1, 3, [0.0, 0.0]).is_err());
        assert!(FlowApproximant::new(golden(), 3, 5, [1.0, 0.0]).is_err());
    }

    #[test]
    fn restriction_examples() {
        let a = FlowApproximant::new(golden(), 3, 5, [0.0, 0.0]).unwrap();
        let r = orbit_restrict(&torus(golden(), &[([1, 0], one())]), &a).unwrap();
        assert_eq!(r.symbol, Symbol::character(FrequencyModule::orbit(5), 5).unwrap());
        assert!(!r.aliased);

        let a = FlowApproximant::new(golden(), 3, 5, [0.0, 0.25]).unwrap();
        let r = orbit_restrict(&torus(golden(), &[([0, 1], one())]), &a).unwrap();
        let c = r.symbol.coeff(&Lattice::from(3));
        assert!((c - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(r.symbol.len(), 1);
    }

    #[test]
    fn restriction_commutes_with_derivative() {
        let a = FlowApproximant::new(golden(), 8, 13, [0.3, 0.7]).unwrap();
        let mut phi = torus(
            golden(),
            &[
                ([1, -2], Complex64::new(0.5, 0.1)),
                ([0, 1], one()),
                ([2, 2], Complex64::new(0.0, -1.0)),
            ],
        );
        // derivative with the rational slope
        phi = Symbol::from_terms(
            FrequencyModule::kronecker(8.0 / 13.0),
            phi.terms().map(|(l, c)| (l.clone(), *c)),
        )
        .unwrap();
        let lhs = orbit_restrict(&phi.flow_derivative(), &a).unwrap().symbol;
        let rhs = orbit_restrict(&phi, &a).unwrap().symbol.flow_derivative();
        for (l, c) in rhs.terms() {
            assert!((lhs.coeff(l) - c).norm() <= 1e-13 * c.norm());
        }
        assert_eq!(lhs.len(), rhs.len());
    }

    #[test]
    fn birkhoff_examples() {
        let a = FlowApproximant::new(golden(), 5, 8, [0.1, 0.9]).unwrap();
        let k = Symbol::constant(FrequencyModule::kronecker(golden()), Complex64::new(2.0, -1.0));
        assert_eq!(birkhoff_average(&k, &a).unwrap(), Complex64::new(2.0, -1.0));
        assert_eq!(
            birkhoff_average(&torus(golden(), &[([1, 0], one())]), &a).unwrap(),
            Complex64::new(0.0, 0.0)
        );

        let y = [0.1, 0.9];
        let resonant = torus(golden(), &[([5, -8], one())]);
        let avg = birkhoff_average(&resonant, &a).unwrap();
        let want = Complex64::from_polar(1.0, TAU * (5.0 * y[0] - 8.0 * y[1]));
        assert!((avg - want).norm() < 1e-14);
        assert_eq!(resonant.mean(), Complex64::new(0.0, 0.0));
        assert!(a.pair_aliased(
            &resonant,
            &Symbol::constant(FrequencyModule::kronecker(golden()), one())
        ));
    }

    #[test]
    fn trace_error_single_term_closed_form() {
        let phi = torus(golden(), &[([1, 1], one())]);
        let psi = torus(golden(), &[([-1, -1], one())]);
        for (p, q, want) in [(3, 5, 0.018034), (8, 13, 0.0026494)] {
            let a = FlowApproximant::new(golden(), p, q, [0.2, 0.6]).unwrap();
            let e = flow_trace_error(&phi, &psi, &a, None).unwrap();
            let closed = (golden() - p as f64 / q as f64).abs();
            assert!((e.error - closed).abs() <= 1e-12, "{} vs {}", e.error, closed);
            assert!((e.error - want).abs() < 1e-6);
            assert!(!e.aliased);
        }
    }

    #[test]
    fn trace_error_disjoint_pairing_is_zero() {
        let phi = torus(golden(), &[([1, 0], one())]);
        let psi = torus(golden(), &[([0, 1], one())]);
        let a = FlowApproximant::new(golden(), 5, 8, [0.0, 0.0]).unwrap();
        let e = flow_trace_error(&phi, &psi, &a, None).unwrap();
        assert_eq!(e.model, Complex64::new(0.0, 0.0));
        assert_eq!(e.exact, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn trace_error_rejects_wrong_slope_and_small_window() {
        let phi = torus(0.3, &[([1, 1], one())]);
        let psi = torus(0.3, &[([-1, -1], one())]);
        let a = FlowApproximant::new(golden(), 3, 5, [0.0, 0.0]).unwrap();
        assert!(matches!(
            flow_trace_error(&phi, &psi, &a, None),
            Err(Error::ModuleMismatch { .. })
        ));
        let phi = torus(golden(), &[([1, 1], one())]);
        let psi = torus(golden(), &[([-1, -1], one())]);
        assert!(matches!(
            flow_trace_error(&phi, &psi, &a, Some(4)),
            Err(Error::WindowTooSmall { .. })
        ));
    }
}

use std::f64::consts::TAU;
use std::time::Instant;

use flowdet::audit::{self, AuditOutcome, OplusElement, Verdict};
use flowdet::determinant::{
    block_lift_check, det_formula_symbols_with, fk_log_det, mult_commutator_section, steinberg_delta,
    DeterminantReport, Section, SignConvention, SteinbergSymbol,
};
use flowdet::flow::{convergents, flow_trace_error, FlowApproximant, SweepRow};
use flowdet::funcalc;
use flowdet::hardy::{commutator_block, kernel_norm_identity, toeplitz_matrix, HardyWindow, OperatorMatrix};
use flowdet::symbol::{FrequencyModule, Lattice, Symbol};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::{Experiment, ExperimentConfig};
use crate::report::ReportRow;
use crate::sample;

#[derive(Debug)]
pub enum RunError {
    /// Rejected before any computation.
    Config(String),
    Compute(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "invalid config: {m}"),
            RunError::Compute(m) => write!(f, "computation failed: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<flowdet::Error> for RunError {
    fn from(e: flowdet::Error) -> Self {
        RunError::Compute(e.to_string())
    }
}

type Res<T> = Result<T, RunError>;

/// Side artifacts some experiments produce besides their rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub rows: Vec<ReportRow>,
    pub sweep: Vec<SweepRow>,
    pub determinants: Vec<DeterminantReport>,
}

impl Outcome {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

pub struct RunOptions {
    pub jobs: usize,
    pub timings: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            jobs: 1,
            timings: false,
        }
    }
}

struct CaseOutput {
    rows: Vec<ReportRow>,
    sweep: Vec<SweepRow>,
    /// Log-determinant of a det-convergence case.
    logs: Vec<f64>,
}

impl CaseOutput {
    fn rows(rows: Vec<ReportRow>) -> Self {
        CaseOutput {
            rows,
            sweep: vec![],
            logs: vec![],
        }
    }
}

/// Runs every case of the experiment on a pool of `jobs` threads and
/// assembles the rows in case order.
pub fn run_experiment(config: &ExperimentConfig, options: &RunOptions) -> Res<Outcome> {
    config.validate().map_err(RunError::Config)?;
    let plan = Plan::new(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs.max(1))
        .build()
        .map_err(|e| RunError::Config(format!("thread pool: {e}")))?;
    let outputs: Vec<Res<CaseOutput>> = pool.install(|| {
        (0..plan.len())
            .into_par_iter()
            .map(|i| {
                let start = Instant::now();
                let mut out = plan.run_case(config, i)?;
                if options.timings {
                    let ms = start.elapsed().as_secs_f64() * 1e3;
                    out.rows.iter_mut().for_each(|r| r.runtime_ms = ms);
                }
                Ok(out)
            })
            .collect()
    });
    let mut outcome = Outcome::default();
    let mut logs = Vec::new();
    for out in outputs {
        let out = out?;
        outcome.rows.extend(out.rows);
        outcome.sweep.extend(out.sweep);
        logs.extend(out.logs);
    }
    for (i, r) in outcome.rows.iter_mut().enumerate() {
        r.row = i;
    }
    if let Plan::Det { .. } = &plan {
        for chunk in logs.chunks(config.n_schedule.len()) {
            let log_value = *chunk.last().expect("schedule is nonempty");
            outcome.determinants.push(DeterminantReport {
                value: log_value.exp(),
                log_value,
                n_schedule: config.n_schedule.clone(),
                per_n_values: chunk.iter().map(|l| l.exp()).collect(),
                sign_convention: SignConvention::DettrChain,
                quadrature_order: 0,
            });
        }
    }
    Ok(outcome)
}

/// The deterministic list of cases.
enum Plan {
    Pairs {
        pairs: Option<Vec<(Symbol, Symbol)>>,
        count: usize,
    },
    /// One case per pair and window size, pair-major.
    Det {
        pairs: Vec<(Symbol, Symbol)>,
        schedule: Vec<usize>,
    },
    Flow {
        pairs: Vec<(Symbol, Symbol)>,
        approximants: Vec<(u64, u64)>,
        basepoints: Vec<[f64; 2]>,
    },
    Symbols {
        symbols: Option<Vec<Symbol>>,
        count: usize,
    },
    Count(usize),
}

fn explicit(config: &ExperimentConfig) -> Option<Vec<(Symbol, Symbol)>> {
    config
        .pairs
        .as_ref()
        .map(|ps| ps.iter().map(|p| (p.phi.clone(), p.psi.clone())).collect())
}

impl Plan {
    fn new(config: &ExperimentConfig) -> Res<Plan> {
        Ok(match config.experiment {
            Experiment::TraceSweep | Experiment::K2PairingTable => {
                let pairs = explicit(config);
                let count = pairs.as_ref().map_or(config.count, Vec::len);
                Plan::Pairs { pairs, count }
            }
            Experiment::DetConvergence => {
                let pairs = explicit(config).unwrap_or_else(|| {
                    let e = |k| Symbol::character(FrequencyModule::circle(), k).expect("circle character");
                    vec![(e(1), e(-1))]
                });
                Plan::Det {
                    pairs,
                    schedule: config.n_schedule.clone(),
                }
            }
            Experiment::RationalFlowSweep => {
                let pairs = explicit(config).unwrap_or_else(|| sample::default_torus_pairs(config.theta));
                let c = convergents(config.theta, config.convergents)?;
                let basepoints = sample::basepoints(&mut sample::shared_rng(config.seed), config.basepoints);
                Plan::Flow {
                    pairs,
                    approximants: c.pairs,
                    basepoints,
                }
            }
            Experiment::KernelIdentity => {
                let count = config.symbols.as_ref().map_or(config.count, Vec::len);
                Plan::Symbols {
                    symbols: config.symbols.clone(),
                    count,
                }
            }
            Experiment::NormAudit | Experiment::SeriesAudit => Plan::Count(config.count),
        })
    }

    fn len(&self) -> usize {
        match self {
            Plan::Pairs { count, .. } | Plan::Symbols { count, .. } | Plan::Count(count) => *count,
            Plan::Det { pairs, schedule } => pairs.len() * schedule.len(),
            Plan::Flow {
                pairs,
                approximants,
                basepoints,
            } => pairs.len() * approximants.len() * basepoints.len(),
        }
    }

    fn run_case(&self, cfg: &ExperimentConfig, i: usize) -> Res<CaseOutput> {
        let mut rng = sample::case_rng(cfg.seed, i);
        match (self, cfg.experiment) {
            (Plan::Pairs { pairs, .. }, Experiment::TraceSweep) => {
                let (phi, psi) = match pairs {
                    Some(p) => p[i].clone(),
                    None => (
                        sample::circle_symbol(&mut rng, cfg.max_degree, 1.0),
                        sample::circle_symbol(&mut rng, cfg.max_degree, 1.0),
                    ),
                };
                Ok(CaseOutput::rows(vec![trace_row(&phi, &psi)?]))
            }
            (Plan::Pairs { pairs, .. }, _) => {
                let (phi, psi) = match pairs {
                    Some(p) => p[i].clone(),
                    None => {
                        let d = cfg.max_degree.min(2);
                        (
                            sample::circle_symbol(&mut rng, d, 0.5),
                            sample::circle_symbol(&mut rng, d, 0.5),
                        )
                    }
                };
                Ok(CaseOutput::rows(k2_rows(&phi, &psi, cfg.section)?))
            }
            (Plan::Det { pairs, schedule }, _) => {
                let (phi, psi) = &pairs[i / schedule.len()];
                det_case(phi, psi, cfg, i / schedule.len(), schedule[i % schedule.len()])
            }
            (
                Plan::Flow {
                    pairs,
                    approximants,
                    basepoints,
                },
                _,
            ) => {
                let per_pair = approximants.len() * basepoints.len();
                let (phi, psi) = &pairs[i / per_pair];
                let (p, q) = approximants[(i % per_pair) / basepoints.len()];
                let y = basepoints[i % basepoints.len()];
                flow_case(phi, psi, cfg.theta, p, q, y, i / per_pair)
            }
            (Plan::Symbols { symbols, .. }, _) => {
                let phi = match symbols {
                    Some(s) => s[i].clone(),
                    None => sample::circle_symbol(&mut rng, cfg.max_degree, 1.0),
                };
                Ok(CaseOutput::rows(kernel_rows(&phi, cfg.t_max)?))
            }
            (Plan::Count(_), Experiment::NormAudit) => Ok(CaseOutput::rows(audit_rows(&mut rng, cfg)?)),
            (Plan::Count(_), _) => Ok(CaseOutput::rows(series_rows(&mut rng, i)?)),
        }
    }
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `|lhs - rhs| / rhs` for a positive oracle.
fn relative_row(experiment: &str, params: String, lhs: f64, rhs: f64, tol: f64) -> ReportRow {
    let abs = (lhs - rhs).abs();
    ReportRow::with_error(
        experiment,
        params,
        re(lhs),
        re(rhs),
        abs,
        abs / rhs.abs().max(f64::MIN_POSITIVE),
        tol,
    )
}

fn trace_row(phi: &Symbol, psi: &Symbol) -> Res<ReportRow> {
    let n = ((phi.max_degree() + psi.max_degree()) as usize).max(1);
    let lhs = commutator_block(phi, psi, &HardyWindow::new(phi.module().clone(), n)?)?.weighted_trace();
    let rhs = -phi.pairing(psi)? / Complex64::new(0.0, TAU);
    let params = format!("deg_phi={};deg_psi={};N={n}", phi.max_degree(), psi.max_degree());
    Ok(ReportRow::compare("trace-sweep", params, lhs, rhs, 1e-10))
}

fn det_case(phi: &Symbol, psi: &Symbol, cfg: &ExperimentConfig, pair: usize, n: usize) -> Res<CaseOutput> {
    let rhs = det_formula_symbols_with(phi, psi, cfg.sign_convention)?;
    let convention = match cfg.sign_convention {
        SignConvention::DettrChain => "dettr-chain",
        SignConvention::PaperDisplay => "paper-display",
    };
    let log_d = fk_log_det(&mult_commutator_section(phi, psi, Section::new(n))?)?;
    let params = format!("pair={pair};N={n};padding={n};sign_convention={convention}");
    let row = relative_row("det-convergence", params, log_d.exp(), rhs, 1e-3);
    Ok(CaseOutput {
        rows: vec![row],
        sweep: vec![],
        logs: vec![log_d],
    })
}

/// `|θ - p/q| · |Σ n c_λ(φ) c_{-λ}(ψ)|`.
pub fn closed_form_flow_error(phi: &Symbol, psi: &Symbol, theta: f64, p: u64, q: u64) -> f64 {
    let weight: Complex64 = phi
        .terms()
        .map(|(l, c)| c * psi.coeff(&l.neg()) * l.coords()[1] as f64)
        .sum();
    (theta - p as f64 / q as f64).abs() * weight.norm()
}

fn flow_case(phi: &Symbol, psi: &Symbol, theta: f64, p: u64, q: u64, y: [f64; 2], pair: usize) -> Res<CaseOutput> {
    let a = FlowApproximant::new(theta, p, q, y)?;
    let e = flow_trace_error(phi, psi, &a, None)?;
    let sweep = SweepRow {
        theta,
        p,
        q,
        n: e.window,
        basepoint: y,
        error_trace: e.error,
        error_det: e.error_det,
        aliasing_flag: e.aliased,
    };
    let mut rows = Vec::new();
    if !e.aliased {
        let closed = closed_form_flow_error(phi, psi, theta, p, q);
        let params = format!(
            "pair={pair};p={p};q={q};N={};y1={:.16e};y2={:.16e}",
            e.window, y[0], y[1]
        );
        let abs = (e.error - closed).abs();
        let rel = if closed > 0.0 { abs / closed } else { abs };
        rows.push(ReportRow::with_error(
            "rational-flow-sweep",
            params,
            re(e.error),
            re(closed),
            abs,
            rel,
            1e-6,
        ));
    }
    Ok(CaseOutput {
        rows,
        sweep: vec![sweep],
        logs: vec![],
    })
}

fn kernel_rows(phi: &Symbol, t_max: f64) -> Res<Vec<ReportRow>> {
    let n = phi.max_degree() as usize + 1;
    let k = kernel_norm_identity(phi, &HardyWindow::two_sided(phi.module().clone(), n)?, t_max)?;
    let deg = phi.max_degree();
    let exact = ReportRow::compare(
        "kernel-identity",
        format!("side=exact;deg={deg};N={n}"),
        re(k.lhs),
        re(k.rhs_exact),
        1e-10,
    );
    // the truncated integral may fall short of the full one by at most the tail
    let below = (k.rhs_exact - k.tail_bound) - k.rhs_quadrature;
    let above = k.rhs_quadrature - k.rhs_exact;
    let outside = below.max(above).max(0.0);
    let quad = ReportRow::with_error(
        "kernel-identity",
        format!(
            "side=quadrature;deg={deg};t_max={:.16e};tail_bound={:.16e}",
            k.t_max, k.tail_bound
        ),
        re(k.rhs_quadrature),
        re(k.rhs_exact),
        (k.rhs_quadrature - k.rhs_exact).abs(),
        outside,
        1e-4,
    );
    Ok(vec![exact, quad])
}

fn k2_rows(phi: &Symbol, psi: &Symbol, section: usize) -> Res<Vec<ReportRow>> {
    let e = "k2-pairing-table";
    let s = SteinbergSymbol::new(phi.clone(), psi.clone())?;
    let delta = steinberg_delta(&s)?;
    let anti = delta * steinberg_delta(&s.swapped())?;
    let mut rows = vec![ReportRow::compare(
        e,
        "check=antisymmetry".into(),
        re(anti),
        re(1.0),
        1e-12,
    )];

    // split φ into two halves of its support
    let terms: Vec<(Lattice, Complex64)> = phi.terms().map(|(l, c)| (l.clone(), *c)).collect();
    let (a, b) = terms.split_at(terms.len() / 2);
    let phi1 = Symbol::from_terms(phi.module().clone(), a.to_vec())?;
    let phi2 = Symbol::from_terms(phi.module().clone(), b.to_vec())?;
    let lhs = steinberg_delta(&SteinbergSymbol::new(phi1.plus(&phi2)?, psi.clone())?)?;
    let rhs = steinberg_delta(&SteinbergSymbol::new(phi1, psi.clone())?)?
        * steinberg_delta(&SteinbergSymbol::new(phi2, psi.clone())?)?;
    rows.push(relative_row(e, "check=bilinearity".into(), lhs, rhs, 1e-12));

    let lift = block_lift_check(phi, psi, Section::new(section))?;
    let det_rel = (lift.det_block - lift.det_commutator).abs() / lift.det_commutator;
    rows.push(ReportRow::with_error(
        e,
        format!("check=block-lift;N={section};block_error={:.16e}", lift.block_error),
        re(lift.det_block),
        re(lift.det_commutator),
        (lift.det_block - lift.det_commutator).abs(),
        det_rel.max(lift.block_error),
        1e-10,
    ));

    let d = fk_log_det(&mult_commutator_section(phi, psi, Section::new(section))?)?.exp();
    rows.push(relative_row(
        e,
        format!("check=matrix-side;N={section}"),
        d,
        delta,
        1e-3,
    ));
    Ok(rows)
}

fn audit_row(inequality: &str, o: AuditOutcome) -> ReportRow {
    let margin = (o.lhs.lower - o.rhs.upper).max(0.0);
    let verdict = match o.verdict {
        Verdict::Pass => "pass",
        Verdict::Indeterminate => "indeterminate",
        Verdict::Fail => "fail",
    };
    let params = format!(
        "inequality={inequality};verdict={verdict};grid={};doublings={}",
        o.grid, o.doublings
    );
    // only a certified violation fails
    ReportRow::with_error(
        "norm-audit",
        params,
        re(o.lhs.upper),
        re(o.rhs.lower),
        margin,
        margin / o.rhs.upper.max(1.0),
        0.0,
    )
}

fn audit_rows(rng: &mut rand_chacha::ChaCha8Rng, cfg: &ExperimentConfig) -> Res<Vec<ReportRow>> {
    use rand::Rng;
    let d = cfg.max_degree;
    let phi = sample::circle_symbol(rng, d, 1.0);
    let psi = sample::circle_symbol(rng, d, 1.0);
    let mut rows = vec![
        audit_row(
            "semicommutator-trace-norm",
            audit::audit_semicommutator(&phi, &psi, cfg.grid)?,
        ),
        audit_row("hankel-hilbert-schmidt", audit::audit_hankel(&phi, cfg.grid)?),
    ];
    let n = (phi.max_degree() as usize).max(1) + 4;
    let win = HardyWindow::new(FrequencyModule::circle(), n)?;
    let k = rng.random_range(1..=4usize);
    let mut s = flowdet::funcalc::CMatrix::zeros(n, n);
    s.view_mut((0, 0), (k, k)).copy_from(&sample::matrix(rng, k));
    let s = OperatorMatrix::new(win.clone(), s)?;
    let f = toeplitz_matrix(&phi, &win)?;
    rows.push(audit_row("holder-p1", audit::audit_holder(&s, &f, 1)?));
    rows.push(audit_row("holder-p2", audit::audit_holder(&s, &f, 2)?));
    let bs = rng.random_range(1..=4usize);
    let ks = rng.random::<f64>();
    let bt = rng.random_range(1..=4usize);
    let kt = rng.random::<f64>();
    let t = OplusElement::new(phi, sample::matrix_with_norm(rng, bs, ks))?;
    let w = OplusElement::new(psi, sample::matrix_with_norm(rng, bt, kt))?;
    rows.push(audit_row("oplus-product", audit::audit_oplus(&t, &w, cfg.grid)?));
    Ok(rows)
}

fn series_rows(rng: &mut rand_chacha::ChaCha8Rng, case: usize) -> Res<Vec<ReportRow>> {
    use rand::Rng;
    let n = rng.random_range(1..=16usize);
    let t_norm = rng.random::<f64>();
    let t = sample::matrix_with_norm(rng, n, t_norm);
    let w = sample::matrix(rng, n);
    let s = funcalc::adjoint_series(&t, &w, 1e-13)?;
    let oracle = funcalc::mat_exp(&t)? * &w * funcalc::mat_exp(&-&t)?;
    let gap = funcalc::op_norm(&(&s.value - oracle))?;
    let wn = funcalc::op_norm(&w)?;
    let bound = s.tail_bound + 1e-11 * wn;
    let over = (gap - bound).max(0.0);
    let e = "series-audit";
    let params = format!("check=tail-bound;n={n};t_norm={t_norm:.16e};terms={}", s.terms_used);
    let mut rows = vec![ReportRow::with_error(
        e,
        params,
        re(gap),
        re(bound),
        over,
        over / bound.max(1.0),
        0.0,
    )];

    let k = case % 9;
    let mut nested = w.clone();
    for _ in 0..k {
        nested = funcalc::commutator(&t, &nested);
    }
    let binom = funcalc::commutator_term_binomial(&t, &w, k);
    let scale = nested.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let diff = (&binom - &nested).iter().map(|z| z.norm()).fold(0.0, f64::max);
    rows.push(ReportRow::with_error(
        e,
        format!("check=binomial;n={n};order={k}"),
        re(diff),
        re(0.0),
        diff,
        diff / scale,
        1e-11,
    ));
    Ok(rows)
}

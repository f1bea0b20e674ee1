//! Augmented-Lagrangian structure learning around regularized RICF.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::admg::{Admg, GraphClass};
use crate::error::{Error, Result};
use crate::linsem::{gaussian_neg2_loglik, Dataset, SemParams};
use crate::numfmt::sig12;
use crate::penalty::{class_penalty, PenaltyConfig};
use crate::ricf::{self, regularized_ricf, RicfConfig};
use crate::scoring::{abic, bic, ScoreConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub lambda: f64,
    pub omega: f64,
    pub h_tol: f64,
    pub ricf_tol: f64,
    pub max_dual_iterations: usize,
    /// Growth `s` of the RICF iteration budget per dual iteration.
    pub ricf_increment: usize,
    /// Upper bound on the RICF iteration budget.
    pub max_ricf_budget: usize,
    /// Required progress factor `r` of the constraint per dual step.
    pub progress_rate: f64,
    pub rho_init: f64,
    pub rho_factor: f64,
    pub rho_max: f64,
    pub restarts: usize,
    pub class: GraphClass,
    pub penalty: PenaltyConfig,
    /// Sharpness of the tanh penalty; `None` means `ln n`.
    pub c_sharpness: Option<f64>,
    pub seed: u64,
}

impl Hyperparams {
    pub fn new(class: GraphClass) -> Self {
        Self {
            lambda: 0.05,
            omega: 0.05,
            h_tol: 1e-8,
            ricf_tol: 1e-4,
            max_dual_iterations: 100,
            ricf_increment: 1,
            max_ricf_budget: 500,
            progress_rate: 0.25,
            rho_init: 1.0,
            rho_factor: 10.0,
            rho_max: 1e16,
            restarts: 5,
            class,
            penalty: PenaltyConfig::default(),
            c_sharpness: None,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.into()));
        if !(self.progress_rate > 0.0 && self.progress_rate < 1.0) {
            return bad("progress_rate must lie in (0, 1)");
        }
        if !(self.rho_init > 0.0 && self.rho_max >= self.rho_init) {
            return bad("need rho_max >= rho_init > 0");
        }
        if !(self.rho_factor > 1.0) {
            return bad("rho_factor must exceed 1");
        }
        if !(self.h_tol > 0.0 && self.ricf_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.lambda >= 0.0 && self.omega >= 0.0) {
            return bad("lambda and omega must be non-negative");
        }
        if self.restarts == 0 || self.ricf_increment == 0 || self.max_ricf_budget == 0 {
            return bad("restarts, ricf_increment and max_ricf_budget must be positive");
        }
        if let Some(c) = self.c_sharpness {
            if !(c > 0.0) {
                return bad("c_sharpness must be positive");
            }
        }
        Ok(())
    }

    fn score_config(&self, n: usize) -> ScoreConfig {
        ScoreConfig {
            lambda: self.lambda,
            c_sharpness: self.c_sharpness.unwrap_or_else(|| (n as f64).ln()),
            zero_tol: self.omega,
        }
    }
}

/// One accepted dual iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualRecord {
    pub iteration: usize,
    pub rho: f64,
    pub alpha: f64,
    pub h: f64,
    /// NaN when the implied covariance does not exist.
    pub neg2loglik: f64,
    pub abic: f64,
    pub ricf_iters: usize,
    pub ricf_step_norm: f64,
}

#[derive(Debug, Clone)]
pub struct RestartSummary {
    pub restart: usize,
    pub converged: bool,
    pub h: f64,
    pub abic: f64,
    /// The run hit a numerical failure and was discarded.
    pub diverged: bool,
}

#[derive(Debug, Clone)]
pub struct DiscoveryResult {
    pub params: SemParams,
    pub graph: Admg,
    pub trace: Vec<DualRecord>,
    pub converged: bool,
    pub h: f64,
    pub abic: f64,
    /// BIC of the selected parameters.
    pub score: f64,
    /// Index of the selected restart.
    pub restart: usize,
    pub restarts: Vec<RestartSummary>,
}

/// Directed edge where `|δ_ij| > ω`, bidirected edge where `|β_ij| > ω`.
pub fn threshold_to_graph<S: AsRef<str>>(p: &SemParams, omega: f64, names: &[S]) -> Result<Admg> {
    if !(omega >= 0.0) {
        return Err(Error::InvalidArgument("omega must be non-negative".into()));
    }
    let d = p.d();
    let mut dir = Vec::new();
    let mut bi = Vec::new();
    for i in 0..d {
        for j in 0..d {
            if i != j && p.delta()[(i, j)].abs() > omega {
                dir.push((i, j));
            }
            if i < j && p.beta()[(i, j)].abs() > omega {
                bi.push((i, j));
            }
        }
    }
    Admg::from_edges(names, &dir, &bi)
}

struct Run {
    params: SemParams,
    h: f64,
    converged: bool,
    trace: Vec<DualRecord>,
}

fn finite_or_nan(r: Result<f64>) -> f64 {
    r.unwrap_or(f64::NAN)
}

fn run_once(data: &Dataset, hp: &Hyperparams, init: SemParams) -> Result<Run> {
    let score_cfg = hp.score_config(data.n());
    let mut theta = init;
    let mut alpha = 1.0;
    let mut budget = 1usize;
    let mut rho = hp.rho_init;
    let mut h_prev = f64::INFINITY;
    let mut trace = Vec::new();
    if ricf::free_layout(data.d(), None).is_empty() {
        let h = class_penalty(&theta, hp.class, &hp.penalty)?;
        return Ok(Run { params: theta, h, converged: h <= hp.h_tol, trace });
    }

    let mut iteration = 0;
    while iteration < hp.max_dual_iterations && h_prev > hp.h_tol {
        iteration += 1;
        let (outcome, h_new) = loop {
            let cfg = RicfConfig {
                tol: hp.ricf_tol,
                max_iterations: budget,
                rho,
                alpha,
                lambda: hp.lambda,
                c_sharpness: Some(score_cfg.c_sharpness),
                class: Some(hp.class),
                penalty: hp.penalty,
                support: None,
                ..RicfConfig::default()
            };
            let outcome = regularized_ricf(data, &theta, &cfg)?;
            let h_new = class_penalty(&outcome.state.params, hp.class, &hp.penalty)?;
            if !h_new.is_finite() {
                return Err(Error::Numeric("constraint value is not finite".into()));
            }
            if h_new < hp.progress_rate * h_prev || h_new <= hp.h_tol || rho >= hp.rho_max {
                break (outcome, h_new);
            }
            rho = (rho * hp.rho_factor).min(hp.rho_max);
        };
        theta = outcome.state.params;
        alpha += rho * h_new;
        h_prev = h_new;
        budget = (budget + hp.ricf_increment).min(hp.max_ricf_budget);
        trace.push(DualRecord {
            iteration,
            rho,
            alpha,
            h: h_new,
            neg2loglik: finite_or_nan(gaussian_neg2_loglik(data, &theta)),
            abic: finite_or_nan(abic(data, &theta, &score_cfg)),
            ricf_iters: outcome.state.iteration,
            ricf_step_norm: outcome.state.last_step_norm,
        });
    }
    Ok(Run { params: theta, h: h_prev, converged: h_prev <= hp.h_tol, trace })
}

/// Random stream for restart `k`; independent of the thread schedule.
pub fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

/// Learns an ADMG of class `hp.class` from `data`. Restart 0 starts from the
/// default initialization and the others from random ones; the converged
/// run with the smallest ABIC wins, otherwise the run with the smallest
/// constraint value is returned with `converged = false`.
pub fn discover(data: &Dataset, hp: &Hyperparams) -> Result<DiscoveryResult> {
    hp.validate()?;
    ricf::check_variances(data)?;
    if data.n() < data.d() + 1 {
        log::warn!("only {} samples for {} variables", data.n(), data.d());
    }
    let score_cfg = hp.score_config(data.n());
    let runs: Vec<Result<Run>> = (0..hp.restarts)
        .into_par_iter()
        .map(|k| {
            let init = if k == 0 {
                ricf::default_init(data)
            } else {
                ricf::random_init(data, None, &mut restart_rng(hp.seed, k))
            };
            run_once(data, hp, init)
        })
        .collect();

    let mut summaries = Vec::with_capacity(runs.len());
    let mut traces = Vec::new();
    let mut ok: Vec<(usize, Run, f64)> = Vec::new();
    for (k, r) in runs.into_iter().enumerate() {
        match r {
            Ok(run) => {
                let a = finite_or_nan(abic(data, &run.params, &score_cfg));
                summaries.push(RestartSummary { restart: k, converged: run.converged, h: run.h, abic: a, diverged: false });
                ok.push((k, run, a));
            }
            Err(e) if e.is_numeric() => {
                log::warn!("restart {k} failed: {e}");
                summaries.push(RestartSummary {
                    restart: k,
                    converged: false,
                    h: f64::NAN,
                    abic: f64::NAN,
                    diverged: true,
                });
                traces.push(Vec::new());
            }
            Err(e) => return Err(e),
        }
    }
    if ok.is_empty() {
        return Err(Error::DiscoveryFailure { restarts: hp.restarts, traces });
    }

    let best_converged = ok
        .iter()
        .filter(|(_, r, a)| r.converged && a.is_finite())
        .min_by(|x, y| x.2.total_cmp(&y.2))
        .map(|(k, _, _)| *k);
    let chosen = best_converged.unwrap_or_else(|| {
        ok.iter().min_by(|x, y| x.1.h.total_cmp(&y.1.h)).map(|(k, _, _)| *k).expect("non-empty")
    });
    let (restart, run, run_abic) = ok.into_iter().find(|(k, _, _)| *k == chosen).expect("chosen exists");
    let converged = best_converged.is_some();
    let graph = threshold_to_graph(&run.params, hp.omega, data.names())?;
    let score = finite_or_nan(bic(data, &run.params, &score_cfg));
    Ok(DiscoveryResult {
        params: run.params,
        graph,
        trace: run.trace,
        converged,
        h: run.h,
        abic: run_abic,
        score,
        restart,
        restarts: summaries,
    })
}

/// Writes the trace with columns
/// `iteration,rho,alpha,h,neg2loglik,abic,ricf_iters`.
pub fn write_trace_csv<W: Write>(trace: &[DualRecord], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["iteration", "rho", "alpha", "h", "neg2loglik", "abic", "ricf_iters"])?;
    for r in trace {
        wr.write_record([
            r.iteration.to_string(),
            sig12(r.rho),
            sig12(r.alpha),
            sig12(r.h),
            sig12(r.neg2loglik),
            sig12(r.abic),
            r.ricf_iters.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

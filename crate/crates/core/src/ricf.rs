//! Regularized residual iterative conditional fitting.
//!
//! Each outer iteration freezes the pseudo-variables
//! `Z^{(i)}_{:,-i} = ε_{-i} (β_{-i,-i})^{-T}` built from the current residuals
//! `ε = X (I - δ)` and minimizes
//!
//! ```text
//! LS(θ) + ρ/2 h(θ)² + α h(θ) + λ Σ tanh(c|θ_k|)
//! LS(θ) = 1/(2n) Σ_i ‖X_i - X δ_{:,i} - Z^{(i)} β_{:,i}‖²
//! ```
//!
//! jointly over the free off-diagonal entries of `δ` and `β` (each `β`
//! pair is a single parameter). Afterwards `β_ii` is reset to the residual
//! variance of variable `i`.
//!
//! All least-squares quantities are computed from the centered sample
//! covariance `S = X'X/n`, so the cost of an iteration does not depend on `n`.
//!
//! A new state is only accepted if `β` stays positive definite and the
//! penalized negative log-likelihood
//!
//! ```text
//! ½ (ln det β - 2 ln|det(I - δ)| + tr(S (I - δ) β⁻¹ (I - δ)')) + ρ/2 h² + α h + λ Σ tanh(c|θ_k|)
//! ```
//!
//! does not increase; otherwise the step is shortened. This keeps the
//! sequence of states monotone.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::admg::{Admg, GraphClass};
use crate::error::{Error, Result};
use crate::linsem::{Dataset, SemParams};
use crate::optim::{self, LbfgsConfig};
use crate::penalty::{class_penalty, class_penalty_gradient, PenaltyConfig};

const COND_LIMIT: f64 = 1e12;
const RIDGE: f64 = 1e-8;
const MAX_BACKTRACKS: usize = 30;

/// `ε = X - X δ`, column `i` being the residual of variable `i` given its
/// parents at the current coefficients.
pub fn residuals(data: &Dataset, p: &SemParams) -> DMatrix<f64> {
    data.x() - data.x() * p.delta()
}

fn others(d: usize, i: usize) -> Vec<usize> {
    (0..d).filter(|&k| k != i).collect()
}

/// `(β_{-i,-i})^{-T}` embedded in a `d × d` matrix whose row and column `i`
/// are zero. Ill-conditioned blocks receive a small ridge.
fn pseudo_transform(beta: &DMatrix<f64>, i: usize) -> Result<DMatrix<f64>> {
    let d = beta.nrows();
    let idx = others(d, i);
    let mut sub = beta.select_rows(&idx).select_columns(&idx);
    let mut out = DMatrix::zeros(d, d);
    if idx.is_empty() {
        return Ok(out);
    }
    let eig = SymmetricEigen::new((&sub + sub.transpose()) * 0.5);
    let (lo, hi) = eig
        .eigenvalues
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v.abs()), hi.max(v.abs())));
    if !(hi / lo <= COND_LIMIT) {
        log::warn!("beta block without vertex {i} is ill-conditioned (cond {:.3e}); adding a ridge", hi / lo);
        for k in 0..sub.nrows() {
            sub[(k, k)] += RIDGE;
        }
    }
    let inv = sub
        .try_inverse()
        .ok_or_else(|| Error::Numeric(format!("beta block without vertex {i} is singular")))?;
    let inv_t = inv.transpose();
    for (a, &r) in idx.iter().enumerate() {
        for (b, &c) in idx.iter().enumerate() {
            out[(r, c)] = inv_t[(a, b)];
        }
    }
    Ok(out)
}

/// `Z^{(i)}`: column `i` is zero and the others are `ε_{-i} (β_{-i,-i})^{-T}`.
pub fn pseudo_variables(eps: &DMatrix<f64>, beta: &DMatrix<f64>, i: usize) -> Result<DMatrix<f64>> {
    if eps.ncols() != beta.nrows() || !beta.is_square() || i >= beta.nrows() {
        return Err(Error::InvalidArgument("shape mismatch in pseudo_variables".into()));
    }
    Ok(eps * pseudo_transform(beta, i)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreeParam {
    Delta(usize, usize),
    /// The tied pair `β_ij = β_ji` with `i < j`.
    Beta(usize, usize),
}

/// The free off-diagonal parameters, optionally restricted to the edges of
/// a support graph.
pub fn free_layout(d: usize, support: Option<&Admg>) -> Vec<FreeParam> {
    let mut out = Vec::new();
    for i in 0..d {
        for j in 0..d {
            if i != j && support.is_none_or(|g| g.has_directed(i, j)) {
                out.push(FreeParam::Delta(i, j));
            }
        }
    }
    for i in 0..d {
        for j in (i + 1)..d {
            if support.is_none_or(|g| g.has_bidirected(i, j)) {
                out.push(FreeParam::Beta(i, j));
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct RicfConfig {
    /// Stop once the Frobenius norm of the parameter change is below this.
    pub tol: f64,
    pub max_iterations: usize,
    pub rho: f64,
    pub alpha: f64,
    pub lambda: f64,
    /// Sharpness of the tanh penalty; `None` means `ln n`.
    pub c_sharpness: Option<f64>,
    /// Class constraint `h`; `None` drops the augmented terms.
    pub class: Option<GraphClass>,
    pub penalty: PenaltyConfig,
    /// Restricts the free parameters to the edges of this graph.
    pub support: Option<Admg>,
    pub lbfgs: LbfgsConfig,
}

impl Default for RicfConfig {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            max_iterations: 100,
            rho: 0.0,
            alpha: 0.0,
            lambda: 0.0,
            c_sharpness: None,
            class: None,
            penalty: PenaltyConfig::default(),
            support: None,
            lbfgs: LbfgsConfig { max_iterations: 300, ..LbfgsConfig::default() },
        }
    }
}

#[derive(Debug, Clone)]
pub struct RicfState {
    pub params: SemParams,
    pub iteration: usize,
    pub last_step_norm: f64,
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct RicfOutcome {
    pub state: RicfState,
    /// Objective at the initial state followed by one value per accepted iteration.
    pub objective_history: Vec<f64>,
    /// The step size reached `tol`.
    pub converged: bool,
    /// No objective-decreasing step could be found.
    pub stalled: bool,
}

/// Per-variable quadratic forms of the least-squares term at frozen
/// pseudo-variables: `LS_i(w) = ½(S_ii - 2 w·c_i + wᵀ G_i w)` with
/// `w = (δ_{:,i}, β_{:,i})`.
struct Quadratics {
    grams: Vec<DMatrix<f64>>,
    lin: Vec<DVector<f64>>,
    s_diag: Vec<f64>,
}

impl Quadratics {
    fn build(s: &DMatrix<f64>, p: &SemParams) -> Result<Self> {
        let d = p.d();
        let a = DMatrix::identity(d, d) - p.delta();
        let xe = s * &a;
        let ee = a.transpose() * &xe;
        let mut grams = Vec::with_capacity(d);
        let mut lin = Vec::with_capacity(d);
        for i in 0..d {
            let m = pseudo_transform(p.beta(), i)?;
            let xz = &xe * &m;
            let zz = m.transpose() * &ee * &m;
            let mut g = DMatrix::zeros(2 * d, 2 * d);
            g.view_mut((0, 0), (d, d)).copy_from(s);
            g.view_mut((0, d), (d, d)).copy_from(&xz);
            g.view_mut((d, 0), (d, d)).copy_from(&xz.transpose());
            g.view_mut((d, d), (d, d)).copy_from(&((&zz + zz.transpose()) * 0.5));
            let mut c = DVector::zeros(2 * d);
            c.rows_mut(0, d).copy_from(&s.column(i));
            c.rows_mut(d, d).copy_from(&xz.row(i).transpose());
            grams.push(g);
            lin.push(c);
        }
        Ok(Self { grams, lin, s_diag: (0..d).map(|i| s[(i, i)]).collect() })
    }

    fn weights(p_delta: &DMatrix<f64>, p_beta: &DMatrix<f64>, i: usize) -> DVector<f64> {
        let d = p_delta.nrows();
        let mut w = DVector::zeros(2 * d);
        for k in 0..d {
            w[k] = p_delta[(k, i)];
            if k != i {
                w[d + k] = p_beta[(k, i)];
            }
        }
        w
    }

    /// Total least-squares value; fills per-variable gradients if requested.
    fn evaluate(&self, delta: &DMatrix<f64>, beta: &DMatrix<f64>, mut grads: Option<&mut Vec<DVector<f64>>>) -> f64 {
        let d = delta.nrows();
        let mut total = 0.0;
        if let Some(g) = grads.as_deref_mut() {
            g.clear();
        }
        for i in 0..d {
            let w = Self::weights(delta, beta, i);
            let gw = &self.grams[i] * &w;
            total += 0.5 * (self.s_diag[i] - 2.0 * w.dot(&self.lin[i]) + w.dot(&gw));
            if let Some(g) = grads.as_deref_mut() {
                g.push(gw - &self.lin[i]);
            }
        }
        total
    }
}

/// The smooth inner objective of one outer iteration as a function of the
/// free parameters.
pub struct InnerObjective<'a> {
    quad: Quadratics,
    base: SemParams,
    layout: Vec<FreeParam>,
    cfg: &'a RicfConfig,
    c: f64,
}

impl<'a> InnerObjective<'a> {
    /// Freezes the pseudo-variables at `params`.
    pub fn new(data: &Dataset, params: &SemParams, cfg: &'a RicfConfig) -> Result<Self> {
        let c = cfg.c_sharpness.unwrap_or_else(|| (data.n() as f64).ln());
        Ok(Self {
            quad: Quadratics::build(data.covariance(), params)?,
            base: params.clone(),
            layout: free_layout(params.d(), cfg.support.as_ref()),
            cfg,
            c,
        })
    }

    pub fn layout(&self) -> &[FreeParam] {
        &self.layout
    }

    pub fn pack(&self, p: &SemParams) -> Vec<f64> {
        pack(&self.layout, p)
    }

    pub fn unpack(&self, x: &[f64]) -> SemParams {
        unpack(&self.layout, &self.base, x)
    }

    fn uses_constraint(&self) -> bool {
        self.cfg.class.is_some() && (self.cfg.rho != 0.0 || self.cfg.alpha != 0.0)
    }

    fn tanh_term(&self, x: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let lambda = self.cfg.lambda;
        if lambda == 0.0 {
            return 0.0;
        }
        let c = self.c;
        let mut total = 0.0;
        match grad {
            Some(g) => {
                for (k, v) in x.iter().enumerate() {
                    let t = (c * v.abs()).tanh();
                    total += t;
                    let sign = if *v > 0.0 {
                        1.0
                    } else if *v < 0.0 {
                        -1.0
                    } else {
                        0.0
                    };
                    g[k] += lambda * c * (1.0 - t * t) * sign;
                }
            }
            None => total = x.iter().map(|v| (c * v.abs()).tanh()).sum(),
        }
        lambda * total
    }

    /// Objective value; writes the gradient into `grad`.
    pub fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let p = self.unpack(x);
        let d = p.d();
        let mut grads = Vec::with_capacity(d);
        let ls = self.quad.evaluate(p.delta(), p.beta(), Some(&mut grads));
        for (k, fp) in self.layout.iter().enumerate() {
            grad[k] = match *fp {
                FreeParam::Delta(r, c) => grads[c][r],
                FreeParam::Beta(r, c) => grads[c][d + r] + grads[r][d + c],
            };
        }
        let mut value = ls;
        if self.uses_constraint() {
            let class = self.cfg.class.expect("checked");
            match class_penalty_gradient(&p, class, &self.cfg.penalty) {
                Ok(pg) => {
                    let h = pg.value;
                    value += 0.5 * self.cfg.rho * h * h + self.cfg.alpha * h;
                    let w = self.cfg.rho * h + self.cfg.alpha;
                    for (k, fp) in self.layout.iter().enumerate() {
                        grad[k] += w * match *fp {
                            FreeParam::Delta(r, c) => pg.delta[(r, c)],
                            FreeParam::Beta(r, c) => pg.beta[(r, c)],
                        };
                    }
                }
                Err(_) => return f64::NAN,
            }
        }
        value + self.tanh_term(x, Some(grad))
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let mut g = vec![0.0; x.len()];
        self.value_and_gradient(x, &mut g)
    }
}

fn pack(layout: &[FreeParam], p: &SemParams) -> Vec<f64> {
    layout
        .iter()
        .map(|fp| match *fp {
            FreeParam::Delta(r, c) => p.delta()[(r, c)],
            FreeParam::Beta(r, c) => p.beta()[(r, c)],
        })
        .collect()
}

fn unpack(layout: &[FreeParam], base: &SemParams, x: &[f64]) -> SemParams {
    let mut delta = base.delta().clone();
    let mut beta = base.beta().clone();
    for (fp, v) in layout.iter().zip(x) {
        match *fp {
            FreeParam::Delta(r, c) => delta[(r, c)] = *v,
            FreeParam::Beta(r, c) => {
                beta[(r, c)] = *v;
                beta[(c, r)] = *v;
            }
        }
    }
    SemParams::from_parts_unchecked(delta, beta)
}

/// Sets `β_ii` to the residual variance of variable `i` under `δ`.
fn reset_diagonal(s: &DMatrix<f64>, delta: &DMatrix<f64>, beta: &mut DMatrix<f64>) {
    let d = delta.nrows();
    let a = DMatrix::identity(d, d) - delta;
    let ee = a.transpose() * s * &a;
    for i in 0..d {
        beta[(i, i)] = ee[(i, i)];
    }
}

/// Penalized Gaussian negative log-likelihood of a state, per sample and
/// up to a constant. `None` if `β` is not positive definite or the value
/// is not finite.
fn state_objective(data: &Dataset, p: &SemParams, cfg: &RicfConfig, c: f64) -> Option<f64> {
    let chol = Cholesky::new(p.beta().clone())?;
    let d = p.d();
    let a = DMatrix::identity(d, d) - p.delta();
    let log_det_a = a.determinant().abs().ln();
    let log_det_b = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let trace = (data.covariance() * &a * chol.solve(&a.transpose())).trace();
    let mut value = 0.5 * (log_det_b - 2.0 * log_det_a + trace);
    if let Some(class) = cfg.class {
        if cfg.rho != 0.0 || cfg.alpha != 0.0 {
            let h = class_penalty(p, class, &cfg.penalty).ok()?;
            value += 0.5 * cfg.rho * h * h + cfg.alpha * h;
        }
    }
    if cfg.lambda != 0.0 {
        let layout = free_layout(p.d(), cfg.support.as_ref());
        value += cfg.lambda * pack(&layout, p).iter().map(|v| (c * v.abs()).tanh()).sum::<f64>();
    }
    value.is_finite().then_some(value)
}

fn validate(data: &Dataset, init: &SemParams, cfg: &RicfConfig) -> Result<()> {
    if data.d() != init.d() {
        return Err(Error::InvalidArgument("data and initial parameters differ in dimension".into()));
    }
    if !(cfg.rho >= 0.0) || !(cfg.lambda >= 0.0) || !(cfg.tol > 0.0) || !cfg.alpha.is_finite() {
        return Err(Error::InvalidArgument("need rho >= 0, lambda >= 0, tol > 0 and finite alpha".into()));
    }
    if let Some(g) = &cfg.support {
        if g.d() != data.d() {
            return Err(Error::InvalidArgument("support graph has the wrong number of vertices".into()));
        }
    }
    check_variances(data)
}

/// Every column needs a positive, finite sample variance for the
/// likelihood to be defined.
pub(crate) fn check_variances(data: &Dataset) -> Result<()> {
    let s = data.covariance();
    match (0..data.d()).find(|&i| !(s[(i, i)] > 0.0 && s[(i, i)].is_finite())) {
        Some(i) => Err(Error::Numeric(format!("column '{}' has no positive finite variance", data.names()[i]))),
        None => Ok(()),
    }
}

fn failure(message: impl Into<String>, last: Option<RicfState>) -> Error {
    Error::OptimizationFailure { message: message.into(), last_state: last.map(Box::new) }
}

/// Runs regularized RICF from `init`. Entries of `init` outside the free
/// set are kept as they are (the diagonal of `β` is replaced after the
/// first iteration).
pub fn regularized_ricf(data: &Dataset, init: &SemParams, cfg: &RicfConfig) -> Result<RicfOutcome> {
    validate(data, init, cfg)?;
    let c = cfg.c_sharpness.unwrap_or_else(|| (data.n() as f64).ln());
    let s = data.covariance();
    let Some(obj0) = state_objective(data, init, cfg, c) else {
        return Err(failure("objective is not finite at the initial state", None));
    };
    let mut state = RicfState { params: init.clone(), iteration: 0, last_step_norm: f64::INFINITY, objective: obj0 };
    let mut history = vec![obj0];
    let mut converged = false;
    let mut stalled = false;

    for it in 1..=cfg.max_iterations {
        let inner = InnerObjective::new(data, &state.params, cfg).map_err(|e| failure(e.to_string(), Some(state.clone())))?;
        let x0 = inner.pack(&state.params);
        let proposal = if x0.is_empty() {
            state.params.clone()
        } else {
            let res = optim::minimize(|x, g| inner.value_and_gradient(x, g), &x0, &cfg.lbfgs)
                .map_err(|e| failure(e.to_string(), Some(state.clone())))?;
            inner.unpack(&res.x)
        };

        // Step along the segment towards the proposal until the state
        // objective does not increase.
        let (d0, b0) = (state.params.delta(), state.params.beta());
        let mut gamma = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_BACKTRACKS {
            let delta = d0 + (proposal.delta() - d0) * gamma;
            let mut beta = b0 + (proposal.beta() - b0) * gamma;
            reset_diagonal(s, &delta, &mut beta);
            let cand = SemParams::from_parts_unchecked(delta, beta);
            if let Some(v) = state_objective(data, &cand, cfg, c) {
                if v <= state.objective {
                    accepted = Some((cand, v));
                    break;
                }
            }
            gamma *= 0.5;
        }
        let Some((next, value)) = accepted else {
            stalled = true;
            break;
        };
        let step = ((next.delta() - d0).norm_squared() + (next.beta() - b0).norm_squared()).sqrt();
        state = RicfState { params: next, iteration: it, last_step_norm: step, objective: value };
        history.push(value);
        if !value.is_finite() {
            return Err(failure("objective diverged", Some(state)));
        }
        if step < cfg.tol {
            converged = true;
            break;
        }
    }
    Ok(RicfOutcome { state, objective_history: history, converged, stalled })
}

/// Unpenalized maximum-likelihood fit with the edges of `support` free,
/// started from [`default_init`].
pub fn fit_support(data: &Dataset, support: &Admg, tol: f64, max_iterations: usize) -> Result<RicfOutcome> {
    let cfg = RicfConfig { tol, max_iterations, support: Some(support.clone()), ..RicfConfig::default() };
    regularized_ricf(data, &default_init(data), &cfg)
}

/// Default starting point: `δ = 0` and `β` the diagonal of column variances.
pub fn default_init(data: &Dataset) -> SemParams {
    let d = data.d();
    let s = data.covariance();
    SemParams::from_parts_unchecked(DMatrix::zeros(d, d), DMatrix::from_fn(d, d, |i, j| if i == j { s[(i, i)] } else { 0.0 }))
}

/// Random starting point: free entries uniform on `[-0.5, 0.5]`, diagonal
/// of `β` equal to the column variances. Off-diagonal `β` entries are
/// halved until `β` is positive definite.
pub fn random_init<R: rand::Rng + ?Sized>(data: &Dataset, support: Option<&Admg>, rng: &mut R) -> SemParams {
    let base = default_init(data);
    let layout = free_layout(data.d(), support);
    let x: Vec<f64> = layout.iter().map(|_| rng.random_range(-0.5..=0.5)).collect();
    let p = unpack(&layout, &base, &x);
    let (delta, mut beta) = p.into_parts();
    let diag = DMatrix::from_diagonal(&beta.diagonal());
    while Cholesky::new(beta.clone()).is_none() {
        beta = (&beta - &diag) * 0.5 + &diag;
    }
    SemParams::from_parts_unchecked(delta, beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linsem::{random_parameters, sample_data};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn residuals_and_pseudo_variables() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 5.0, -1.0, 0.5]);
        let ds = Dataset::with_default_names(x.clone()).unwrap();
        let mut delta = DMatrix::zeros(2, 2);
        let p0 = SemParams::new(delta.clone(), DMatrix::identity(2, 2)).unwrap();
        assert_eq!(residuals(&ds, &p0), x);
        delta[(0, 1)] = 0.5;
        let p = SemParams::new(delta, DMatrix::identity(2, 2)).unwrap();
        let eps = residuals(&ds, &p);
        for r in 0..3 {
            assert_eq!(eps[(r, 1)], x[(r, 1)] - 0.5 * x[(r, 0)]);
        }
        let beta = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 2.0]);
        let z = pseudo_variables(&eps, &beta, 0).unwrap();
        for r in 0..3 {
            assert_eq!(z[(r, 0)], 0.0);
            assert!((z[(r, 1)] - eps[(r, 1)] / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn empty_support_takes_one_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = Admg::with_vertices(3);
        let p = random_parameters(&g, &mut rng).unwrap();
        let ds = sample_data(&p, 200, None, &mut rng).unwrap();
        let cfg = RicfConfig { support: Some(g), ..RicfConfig::default() };
        let out = regularized_ricf(&ds, &default_init(&ds), &cfg).unwrap();
        assert!(out.converged);
        assert_eq!(out.state.iteration, 1);
        assert_eq!(out.state.params.delta().amax(), 0.0);
    }

    #[test]
    fn single_edge_matches_ols() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = Admg::with_vertices(2).with_directed(0, 1).unwrap();
        let p = random_parameters(&g, &mut rng).unwrap();
        let ds = sample_data(&p, 500, None, &mut rng).unwrap();
        let s = ds.covariance();
        let slope = s[(0, 1)] / s[(0, 0)];
        let cfg = RicfConfig { support: Some(g), tol: 1e-10, ..RicfConfig::default() };
        let out = regularized_ricf(&ds, &default_init(&ds), &cfg).unwrap();
        assert!((out.state.params.delta()[(0, 1)] - slope).abs() < 1e-6);
    }

    #[test]
    fn inner_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = Admg::from_edges(&["A", "B", "C", "D"], &[(0, 1), (1, 2)], &[(0, 3), (2, 3)]).unwrap();
        let p = random_parameters(&g, &mut rng).unwrap();
        let ds = sample_data(&p, 300, None, &mut rng).unwrap();
        for class in GraphClass::ALL {
            let cfg = RicfConfig { rho: 3.0, alpha: 1.5, lambda: 0.1, class: Some(class), ..RicfConfig::default() };
            let init = random_init(&ds, None, &mut rng);
            let inner = InnerObjective::new(&ds, &init, &cfg).unwrap();
            let x: Vec<f64> = inner.pack(&init).iter().map(|v| v + 0.01).collect();
            let mut grad = vec![0.0; x.len()];
            inner.value_and_gradient(&x, &mut grad);
            for k in 0..x.len() {
                let h = 1e-6;
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[k] += h;
                xm[k] -= h;
                let num = (inner.value(&xp) - inner.value(&xm)) / (2.0 * h);
                assert!((num - grad[k]).abs() <= 1e-5 * num.abs().max(1.0), "{class} {k}: {num} vs {}", grad[k]);
            }
        }
    }

    #[test]
    fn random_init_is_positive_definite() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = DMatrix::from_fn(50, 6, |_, _| rng.random_range(-1.0..1.0));
        let ds = Dataset::with_default_names(x).unwrap();
        for _ in 0..50 {
            let p = random_init(&ds, None, &mut rng);
            assert!(p.is_beta_positive_definite());
            assert!(p.delta().amax() <= 0.5);
        }
    }
}

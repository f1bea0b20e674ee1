//! Differentiable algebraic constraints characterizing ADMG classes.
//!
//! Every function takes non-negative weighted adjacency matrices `D`
//! (directed) and `B` (bidirected, symmetric) and returns a non-negative
//! value that vanishes exactly when the support graph is acyclic and lies in
//! the requested class. Matrix exponentials are either evaluated as a
//! truncated Taylor series or replaced by the power `(I + cA)^d`, which
//! has the same zero set.

mod tape;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::admg::{Admg, GraphClass};
use crate::error::{Error, Result};
use crate::linsem::SemParams;
use tape::{Tape, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyMode {
    MatrixExponential,
    MatrixPower,
}

impl std::str::FromStr for PenaltyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "power" | "matrix_power" | "matrixpower" => Ok(PenaltyMode::MatrixPower),
            "exp" | "exponential" | "matrix_exponential" | "matrixexponential" => Ok(PenaltyMode::MatrixExponential),
            other => Err(Error::InvalidArgument(format!("unknown penalty mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    pub mode: PenaltyMode,
    /// `c` in `(I + cD)^d` for the directed parts.
    pub c_directed: f64,
    /// `c` in `(I + cB)^d` for the bidirected parts.
    pub c_bidirected: f64,
    /// Sharpness of the soft fixability mask in [`greenery`].
    pub tanh_scale: f64,
    /// Highest power kept in the truncated exponential series.
    pub exp_series_terms: usize,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self {
            mode: PenaltyMode::MatrixPower,
            c_directed: 1.0,
            c_bidirected: 2.0,
            tanh_scale: 5000f64.ln(),
            exp_series_terms: 20,
        }
    }
}

impl PenaltyConfig {
    pub fn exponential() -> Self {
        Self { mode: PenaltyMode::MatrixExponential, ..Self::default() }
    }

    fn validate(&self, d: usize) -> Result<()> {
        for (name, v) in [("c_directed", self.c_directed), ("c_bidirected", self.c_bidirected), ("tanh_scale", self.tanh_scale)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if self.mode == PenaltyMode::MatrixExponential && self.exp_series_terms < d {
            return Err(Error::InvalidArgument(format!(
                "exp_series_terms ({}) must be at least the number of vertices ({d})",
                self.exp_series_terms
            )));
        }
        Ok(())
    }
}

/// `e^{A}` or `(I + cA)^d` depending on the mode.
fn expand(t: &mut Tape, a: Var, c: f64, cfg: &PenaltyConfig) -> Var {
    let d = t.value(a).nrows();
    match cfg.mode {
        PenaltyMode::MatrixPower => {
            let scaled = t.scale(a, c);
            let m = t.add_identity(scaled, 1.0);
            t.powi(m, d.max(1))
        }
        PenaltyMode::MatrixExponential => {
            // Horner form of sum_{k=0}^{K} A^k / k!
            let zero = t.scale(a, 0.0);
            let mut acc = t.add_identity(zero, 1.0);
            for k in (1..=cfg.exp_series_terms).rev() {
                let prod = t.matmul(a, acc);
                let scaled = t.scale(prod, 1.0 / k as f64);
                acc = t.add_identity(scaled, 1.0);
            }
            acc
        }
    }
}

fn acyclicity_term(t: &mut Tape, dm: Var, cfg: &PenaltyConfig) -> Var {
    let d = t.value(dm).nrows() as f64;
    let e = expand(t, dm, cfg.c_directed, cfg);
    let tr = t.trace(e);
    t.add_scalar(tr, -d)
}

fn ancestral_term(t: &mut Tape, dm: Var, bm: Var, cfg: &PenaltyConfig) -> Var {
    let e = expand(t, dm, cfg.c_directed, cfg);
    let h = t.hadamard(e, bm);
    t.sum(h)
}

fn bow_term(t: &mut Tape, dm: Var, bm: Var) -> Var {
    let h = t.hadamard(dm, bm);
    t.sum(h)
}

/// Soft fixability masks `f` recorded while evaluating [`greenery`].
#[derive(Debug, Clone, PartialEq)]
pub struct GreeneryTrace {
    pub value: f64,
    /// `masks[root][iteration]` is the vector `f` of that inner iteration.
    pub masks: Vec<Vec<Vec<f64>>>,
    /// Column sums `sum(C[:, root])` per root.
    pub column_sums: Vec<f64>,
}

fn greenery_term(
    t: &mut Tape,
    dm: Var,
    bm: Var,
    cfg: &PenaltyConfig,
    mut trace: Option<&mut GreeneryTrace>,
) -> Var {
    let d = t.value(dm).nrows();
    let mut acc: Option<Var> = None;
    for root in 0..d {
        let mut df = dm;
        let mut bf = bm;
        let mut root_masks = Vec::new();
        for _ in 1..d {
            let eb = expand(t, bf, cfg.c_bidirected, cfg);
            let prod = t.hadamard(eb, df);
            let rs = t.row_sums(prod);
            let mut unit = DMatrix::zeros(d, 1);
            unit[(root, 0)] = 1.0;
            let shifted = t.add_const(rs, &unit);
            let arg = t.scale(shifted, cfg.tanh_scale);
            let f = t.tanh(arg);
            if trace.is_some() {
                root_masks.push(t.value(f).iter().copied().collect());
            }
            let rows = t.tile_rows(f);
            let cols = t.tile_cols(f);
            df = t.hadamard(df, rows);
            let b1 = t.hadamard(bf, rows);
            bf = t.hadamard(b1, cols);
        }
        let ed = expand(t, df, cfg.c_directed, cfg);
        let eb = expand(t, bf, cfg.c_bidirected, cfg);
        let c = t.hadamard(ed, eb);
        let col = t.column_sum(c, root);
        if let Some(tr) = trace.as_deref_mut() {
            tr.masks.push(root_masks);
            tr.column_sums.push(t.scalar(col));
        }
        acc = Some(match acc {
            None => col,
            Some(a) => t.add(a, col),
        });
    }
    match acc {
        Some(a) => t.add_scalar(a, -(d as f64)),
        None => t.leaf(DMatrix::zeros(1, 1)),
    }
}

fn class_term(t: &mut Tape, dm: Var, bm: Var, class: GraphClass, cfg: &PenaltyConfig) -> Var {
    let acyc = acyclicity_term(t, dm, cfg);
    let extra = match class {
        GraphClass::Ancestral => ancestral_term(t, dm, bm, cfg),
        GraphClass::Arid => greenery_term(t, dm, bm, cfg, None),
        GraphClass::BowFree => bow_term(t, dm, bm),
    };
    t.add(acyc, extra)
}

fn check_nonnegative(name: &str, m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Domain(format!("{name} must be square")));
    }
    if let Some(x) = m.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::Domain(format!("{name} must be entrywise non-negative and finite, found {x}")));
    }
    Ok(())
}

fn check_pair(d_mat: &DMatrix<f64>, b_mat: &DMatrix<f64>, cfg: &PenaltyConfig) -> Result<()> {
    check_nonnegative("D", d_mat)?;
    check_nonnegative("B", b_mat)?;
    if d_mat.shape() != b_mat.shape() {
        return Err(Error::Domain("D and B must have the same shape".into()));
    }
    let tol = 1e-12 * b_mat.amax().max(1.0);
    if (b_mat - b_mat.transpose()).amax() > tol {
        return Err(Error::Domain("B must be symmetric".into()));
    }
    cfg.validate(d_mat.nrows())
}

/// `trace(e^D) - d` (or its matrix-power form); zero iff the support of `D` is acyclic.
pub fn acyclicity_penalty(d_mat: &DMatrix<f64>, cfg: &PenaltyConfig) -> Result<f64> {
    check_nonnegative("D", d_mat)?;
    cfg.validate(d_mat.nrows())?;
    let mut t = Tape::new();
    let dm = t.leaf(d_mat.clone());
    let out = acyclicity_term(&mut t, dm, cfg);
    Ok(t.scalar(out))
}

/// Acyclicity plus `sum(e^D ∘ B)`; zero iff the support is acyclic and ancestral.
pub fn ancestrality_penalty(d_mat: &DMatrix<f64>, b_mat: &DMatrix<f64>, cfg: &PenaltyConfig) -> Result<f64> {
    graph_penalty(d_mat, b_mat, GraphClass::Ancestral, cfg)
}

/// Acyclicity plus `sum(D ∘ B)`; zero iff the support is acyclic and bow-free.
pub fn bow_penalty(d_mat: &DMatrix<f64>, b_mat: &DMatrix<f64>, cfg: &PenaltyConfig) -> Result<f64> {
    graph_penalty(d_mat, b_mat, GraphClass::BowFree, cfg)
}

/// Acyclicity plus the c-tree detector; zero iff the support is acyclic and arid.
pub fn arid_penalty(d_mat: &DMatrix<f64>, b_mat: &DMatrix<f64>, cfg: &PenaltyConfig) -> Result<f64> {
    graph_penalty(d_mat, b_mat, GraphClass::Arid, cfg)
}

/// The c-tree detector on its own (without the acyclicity term).
///
/// For every root `i` the inner loop applies `d - 1` rounds of soft primal
/// fixing: `t` holds the row sums of `e^{B_f} ∘ D_f`, the mask is
/// `f = tanh(scale * (t + e_i))`, and incoming edges of every vertex are
/// scaled by its mask entry. What remains in column `i` of
/// `e^{D_f} ∘ e^{B_f}` beyond the diagonal one witnesses a root-`i` c-tree.
pub fn greenery(d_mat: &DMatrix<f64>, b_mat: &DMatrix<f64>, cfg: &PenaltyConfig) -> Result<f64> {
    Ok(greenery_trace(d_mat, b_mat, cfg)?.value)
}

/// [`greenery`] together with its intermediate masks and column sums.
pub fn greenery_trace(d_mat: &DMatrix<f64>, b_mat: &DMatrix<f64>, cfg: &PenaltyConfig) -> Result<GreeneryTrace> {
    check_pair(d_mat, b_mat, cfg)?;
    let mut t = Tape::new();
    let dm = t.leaf(d_mat.clone());
    let bm = t.leaf(b_mat.clone());
    let mut trace = GreeneryTrace { value: 0.0, masks: Vec::new(), column_sums: Vec::new() };
    let out = greenery_term(&mut t, dm, bm, cfg, Some(&mut trace));
    trace.value = t.scalar(out);
    Ok(trace)
}

/// Penalty of `class` (including the acyclicity term) on non-negative matrices.
pub fn graph_penalty(d_mat: &DMatrix<f64>, b_mat: &DMatrix<f64>, class: GraphClass, cfg: &PenaltyConfig) -> Result<f64> {
    check_pair(d_mat, b_mat, cfg)?;
    let mut t = Tape::new();
    let dm = t.leaf(d_mat.clone());
    let bm = t.leaf(b_mat.clone());
    let out = class_term(&mut t, dm, bm, class, cfg);
    Ok(t.scalar(out))
}

/// All three class penalties of a graph's binary adjacency matrices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphPenalties {
    pub acyclic: f64,
    pub ancestral: f64,
    pub arid: f64,
    pub bow_free: f64,
}

pub fn graph_penalties(g: &Admg, cfg: &PenaltyConfig) -> Result<GraphPenalties> {
    let d_mat = g.directed_matrix();
    let b_mat = g.bidirected_matrix();
    Ok(GraphPenalties {
        acyclic: acyclicity_penalty(&d_mat, cfg)?,
        ancestral: graph_penalty(&d_mat, &b_mat, GraphClass::Ancestral, cfg)?,
        arid: graph_penalty(&d_mat, &b_mat, GraphClass::Arid, cfg)?,
        bow_free: graph_penalty(&d_mat, &b_mat, GraphClass::BowFree, cfg)?,
    })
}

/// Value and gradient of [`class_penalty`].
///
/// `delta[i][j]` is `∂h/∂δ_ij`. Off-diagonal `β_ij` and `β_ji` share one free
/// parameter, so `beta[i][j] = beta[j][i]` is the derivative with respect to
/// that shared parameter; the diagonal is zero because `h` ignores it.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyGradient {
    pub value: f64,
    pub delta: DMatrix<f64>,
    pub beta: DMatrix<f64>,
}

fn sem_tape(params: &SemParams, class: GraphClass, cfg: &PenaltyConfig) -> Result<(Tape, Var, Var, Var)> {
    let d = params.d();
    cfg.validate(d)?;
    let mut t = Tape::new();
    let delta = t.leaf(params.delta().clone());
    let beta = t.leaf(params.beta().clone());
    let dm = t.hadamard(delta, delta);
    let off = DMatrix::from_fn(d, d, |i, j| if i == j { 0.0 } else { 1.0 });
    let beta_off = t.mask(beta, off);
    let bm = t.hadamard(beta_off, beta_off);
    let out = class_term(&mut t, dm, bm, class, cfg);
    Ok((t, delta, beta, out))
}

/// Class penalty of SEM parameters using `D = δ∘δ` and `B = β'∘β'`, where
/// `β'` is `β` with its diagonal zeroed.
pub fn class_penalty(params: &SemParams, class: GraphClass, cfg: &PenaltyConfig) -> Result<f64> {
    let (t, _, _, out) = sem_tape(params, class, cfg)?;
    Ok(t.scalar(out))
}

pub fn class_penalty_gradient(params: &SemParams, class: GraphClass, cfg: &PenaltyConfig) -> Result<PenaltyGradient> {
    let (t, delta, beta, out) = sem_tape(params, class, cfg)?;
    let mut adj = t.gradient(out);
    let g_delta = std::mem::replace(&mut adj[delta.index()], DMatrix::zeros(0, 0));
    let g_beta = &adj[beta.index()];
    let d = params.d();
    let tied = DMatrix::from_fn(d, d, |i, j| if i == j { 0.0 } else { g_beta[(i, j)] + g_beta[(j, i)] });
    Ok(PenaltyGradient { value: t.scalar(out), delta: g_delta, beta: tied })
}

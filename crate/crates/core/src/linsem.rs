//! Linear Gaussian structural equation models with correlated errors.
//!
//! Each variable satisfies `V_j = sum_i δ_ij V_i + ε_j` with
//! `ε ~ N(0, β)`, so the implied covariance is
//! `Σ = (I - δ)^{-T} β (I - δ)^{-1}`.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{Cholesky, DMatrix};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::admg::Admg;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SemParams {
    delta: DMatrix<f64>,
    beta: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct SemParamsJson {
    delta: Vec<Vec<f64>>,
    beta: Vec<Vec<f64>>,
    #[serde(default)]
    names: Vec<String>,
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

fn from_rows(name: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let d = rows.len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(Error::Parse(format!("{name} must be a square matrix")));
    }
    Ok(DMatrix::from_fn(d, d, |r, c| rows[r][c]))
}

impl SemParams {
    /// Validates shapes, finiteness and symmetry of `β`. Positive
    /// definiteness is checked lazily by the operations that need it.
    pub fn new(delta: DMatrix<f64>, beta: DMatrix<f64>) -> Result<Self> {
        if !delta.is_square() || delta.shape() != beta.shape() {
            return Err(Error::InvalidArgument("delta and beta must be square matrices of the same size".into()));
        }
        if delta.iter().chain(beta.iter()).any(|x| !x.is_finite()) {
            return Err(Error::Numeric("parameters must be finite".into()));
        }
        let tol = 1e-10 * beta.amax().max(1.0);
        if (&beta - beta.transpose()).amax() > tol {
            return Err(Error::InvalidArgument("beta must be symmetric".into()));
        }
        Ok(Self { delta, beta })
    }

    pub(crate) fn from_parts_unchecked(delta: DMatrix<f64>, beta: DMatrix<f64>) -> Self {
        Self { delta, beta }
    }

    pub fn d(&self) -> usize {
        self.delta.nrows()
    }

    pub fn delta(&self) -> &DMatrix<f64> {
        &self.delta
    }

    pub fn beta(&self) -> &DMatrix<f64> {
        &self.beta
    }

    pub fn into_parts(self) -> (DMatrix<f64>, DMatrix<f64>) {
        (self.delta, self.beta)
    }

    pub fn is_beta_positive_definite(&self) -> bool {
        Cholesky::new(self.beta.clone()).is_some()
    }

    /// Joint relabeling: vertex `perm[k]` of `self` becomes vertex `k`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let d = self.d();
        Self {
            delta: DMatrix::from_fn(d, d, |r, c| self.delta[(perm[r], perm[c])]),
            beta: DMatrix::from_fn(d, d, |r, c| self.beta[(perm[r], perm[c])]),
        }
    }

    pub fn to_json(&self, names: &[String]) -> Result<String> {
        let j = SemParamsJson { delta: to_rows(&self.delta), beta: to_rows(&self.beta), names: names.to_vec() };
        Ok(serde_json::to_string_pretty(&j)?)
    }

    /// Parses `{"delta", "beta", "names"}`; returns the parameters and names
    /// (empty when absent).
    pub fn from_json(s: &str) -> Result<(Self, Vec<String>)> {
        let j: SemParamsJson = serde_json::from_str(s)?;
        let p = Self::new(from_rows("delta", &j.delta)?, from_rows("beta", &j.beta)?)?;
        if !j.names.is_empty() && j.names.len() != p.d() {
            return Err(Error::Parse("names length does not match matrix size".into()));
        }
        Ok((p, j.names))
    }
}

/// An `n × d` data matrix with column labels and its centered covariance.
#[derive(Debug, Clone)]
pub struct Dataset {
    x: DMatrix<f64>,
    names: Vec<String>,
    cov: DMatrix<f64>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, names: Vec<String>) -> Result<Self> {
        if x.nrows() < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 rows, got {}", x.nrows())));
        }
        if names.len() != x.ncols() {
            return Err(Error::InvalidArgument("one name per column required".into()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("data contain non-finite values".into()));
        }
        let n = x.nrows() as f64;
        let means = x.row_mean();
        let mut centered = x.clone();
        for mut row in centered.row_iter_mut() {
            row -= &means;
        }
        let mut cov = centered.tr_mul(&centered) / n;
        cov = (&cov + cov.transpose()) * 0.5;
        Ok(Self { x, names, cov })
    }

    pub fn with_default_names(x: DMatrix<f64>) -> Result<Self> {
        let names = (1..=x.ncols()).map(|k| format!("V{k}")).collect();
        Self::new(x, names)
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Sample covariance after mean-centering, divisor `n`.
    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Column-centered copy of the data.
    pub fn centered(&self) -> DMatrix<f64> {
        let means = self.x.row_mean();
        let mut c = self.x.clone();
        for mut row in c.row_iter_mut() {
            row -= &means;
        }
        c
    }

    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let x = DMatrix::from_fn(self.n(), self.d(), |r, c| self.x[(r, perm[c])]);
        let names = perm.iter().map(|&k| self.names[k].clone()).collect();
        Self::new(x, names)
    }

    /// The dataset stacked on top of itself.
    pub fn duplicated(&self) -> Result<Self> {
        let n = self.n();
        let x = DMatrix::from_fn(2 * n, self.d(), |r, c| self.x[(r % n, c)]);
        Self::new(x, self.names.clone())
    }

    /// Writes a header row of names followed by one row per sample. Values
    /// use the shortest representation that parses back to the same float.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(&self.names)?;
        let mut buf = Vec::with_capacity(self.d());
        for r in 0..self.n() {
            buf.clear();
            buf.extend(self.x.row(r).iter().map(|v| format!("{v:?}")));
            wr.write_record(&buf)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(r);
        let names: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
        if names.is_empty() || names.iter().any(String::is_empty) {
            return Err(Error::Parse("header must list a non-empty name per column".into()));
        }
        let d = names.len();
        let mut values = Vec::new();
        for (line, rec) in rd.records().enumerate() {
            let rec = rec?;
            if rec.len() != d {
                return Err(Error::Parse(format!("row {} has {} fields, expected {d}", line + 2, rec.len())));
            }
            for field in rec.iter() {
                let v: f64 = field
                    .parse()
                    .map_err(|_| Error::Parse(format!("row {}: '{field}' is not a number", line + 2)))?;
                values.push(v);
            }
        }
        let n = values.len() / d;
        Self::new(DMatrix::from_row_slice(n, d, &values), names)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

fn i_minus(delta: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::identity(delta.nrows(), delta.ncols()) - delta
}

/// `(I - δ)^{-T} β (I - δ)^{-1}`.
pub fn implied_covariance(p: &SemParams) -> Result<DMatrix<f64>> {
    let inv = i_minus(p.delta())
        .try_inverse()
        .ok_or_else(|| Error::Numeric("I - delta is singular".into()))?;
    let sigma = inv.transpose() * p.beta() * &inv;
    Ok((&sigma + sigma.transpose()) * 0.5)
}

/// Draws `n` rows `V = ε (I - δ)^{-1}` with `ε ~ N(0, β)`.
pub fn sample_data<R: Rng + ?Sized>(p: &SemParams, n: usize, names: Option<Vec<String>>, rng: &mut R) -> Result<Dataset> {
    let d = p.d();
    let chol = Cholesky::new(p.beta().clone())
        .ok_or_else(|| Error::Numeric("beta is not positive definite".into()))?;
    let l = chol.l();
    let inv = i_minus(p.delta())
        .try_inverse()
        .ok_or_else(|| Error::Numeric("I - delta is singular".into()))?;
    let draws: Vec<f64> = (0..n * d).map(|_| StandardNormal.sample(rng)).collect();
    let z = DMatrix::from_row_slice(n, d, &draws);
    let eps = z * l.transpose();
    let x = eps * inv;
    let names = names.unwrap_or_else(|| (1..=d).map(|k| format!("V{k}")).collect());
    Dataset::new(x, names)
}

fn signed<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let m = rng.random_range(lo..=hi);
    if rng.random_bool(0.5) {
        m
    } else {
        -m
    }
}

/// Random parameters supported on `g`: `|δ_ij| ∈ [0.5, 2]`,
/// `|β_ij| ∈ [0.4, 0.7]` with uniform signs, and
/// `β_ii = u_i + sum_j |β_ij|` with `u_i ~ U[0.7, 1.2]`.
pub fn random_parameters<R: Rng + ?Sized>(g: &Admg, rng: &mut R) -> Result<SemParams> {
    if !g.is_acyclic() {
        return Err(Error::InvalidGraph("random parameters need an acyclic graph".into()));
    }
    let d = g.d();
    let mut delta = DMatrix::zeros(d, d);
    let mut beta = DMatrix::zeros(d, d);
    for (i, j) in g.directed_edges() {
        delta[(i, j)] = signed(rng, 0.5, 2.0);
    }
    for (i, j) in g.bidirected_edges() {
        let v = signed(rng, 0.4, 0.7);
        beta[(i, j)] = v;
        beta[(j, i)] = v;
    }
    for i in 0..d {
        let off: f64 = (0..d).filter(|&j| j != i).map(|j| beta[(i, j)].abs()).sum();
        beta[(i, i)] = rng.random_range(0.7..=1.2) + off;
    }
    SemParams::new(delta, beta)
}

/// `n (ln det Σ + tr(S Σ^{-1}) + d ln 2π)` for a covariance matrix `sigma`.
pub fn neg2_loglik_from_sigma(s: &DMatrix<f64>, n: usize, sigma: &DMatrix<f64>) -> Result<f64> {
    let d = sigma.nrows();
    let chol = Cholesky::new(sigma.clone())
        .ok_or_else(|| Error::Numeric("implied covariance is not positive definite".into()))?;
    let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let tr = chol.solve(s).trace();
    let v = n as f64 * (log_det + tr + d as f64 * (2.0 * std::f64::consts::PI).ln());
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numeric("log-likelihood is not finite".into()))
    }
}

/// `-2 ln L` of the zero-mean Gaussian model at `p`, using the centered
/// sample covariance.
pub fn gaussian_neg2_loglik(data: &Dataset, p: &SemParams) -> Result<f64> {
    if data.d() != p.d() {
        return Err(Error::InvalidArgument("data and parameter dimensions differ".into()));
    }
    let sigma = implied_covariance(p)?;
    neg2_loglik_from_sigma(data.covariance(), data.n(), &sigma)
}

/// Left-hand side of the Verma polynomial for vertices labeled
/// `A, B, C, D` (indices 0..4), evaluated after rescaling `Σ` and the
/// parameters to unit variances:
/// `Σ_BC - δ_CD δ_DB - δ_AC β_AB - δ_AC β_AD δ_DB`.
pub fn verma_residual(sigma: &DMatrix<f64>, p: &SemParams) -> Result<f64> {
    if sigma.shape() != (4, 4) || p.d() != 4 {
        return Err(Error::InvalidArgument("verma_residual needs 4 × 4 inputs".into()));
    }
    let lam: Vec<f64> = (0..4).map(|i| sigma[(i, i)]).collect();
    if lam.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Domain("covariance must have a positive diagonal".into()));
    }
    let s = |i: usize, j: usize| sigma[(i, j)] / (lam[i] * lam[j]).sqrt();
    let dl = |i: usize, j: usize| p.delta()[(i, j)] * (lam[i] / lam[j]).sqrt();
    let bt = |i: usize, j: usize| p.beta()[(i, j)] / (lam[i] * lam[j]).sqrt();
    let (a, b, c, d) = (0, 1, 2, 3);
    Ok(s(b, c) - dl(c, d) * dl(d, b) - dl(a, c) * bt(a, b) - dl(a, c) * bt(a, d) * dl(d, b))
}

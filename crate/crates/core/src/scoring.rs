//! BIC and its smooth surrogate ABIC.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linsem::{gaussian_neg2_loglik, Dataset, SemParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreConfig {
    pub lambda: f64,
    /// Sharpness `c` of `tanh(c|θ|)`.
    pub c_sharpness: f64,
    /// Magnitudes at or below this are treated as zero when counting.
    pub zero_tol: f64,
}

impl ScoreConfig {
    /// `λ` with the default sharpness `ln n` and threshold 0.05.
    pub fn for_sample_size(lambda: f64, n: usize) -> Self {
        Self { lambda, c_sharpness: (n as f64).ln(), zero_tol: 0.05 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !(self.zero_tol >= 0.0) || !(self.c_sharpness > 0.0) {
            return Err(Error::InvalidArgument(
                "lambda and zero_tol must be non-negative and c_sharpness positive".into(),
            ));
        }
        Ok(())
    }
}

/// Free parameter values: off-diagonal `δ`, one entry per off-diagonal `β`
/// pair, and the `d` diagonal `β` entries.
pub fn free_parameters(p: &SemParams) -> Vec<f64> {
    let d = p.d();
    let mut out = Vec::with_capacity(d * d + d * (d + 1) / 2);
    for i in 0..d {
        for j in 0..d {
            if i != j {
                out.push(p.delta()[(i, j)]);
            }
        }
    }
    for i in 0..d {
        for j in (i + 1)..d {
            out.push(p.beta()[(i, j)]);
        }
    }
    out
}

/// Number of nonzero free parameters; diagonal `β` entries always count.
pub fn nonzero_count(p: &SemParams, zero_tol: f64) -> usize {
    free_parameters(p).iter().filter(|v| v.abs() > zero_tol).count() + p.d()
}

/// `λ Σ tanh(c|θ|)` over all free parameters including the diagonal of `β`.
pub fn tanh_penalty(p: &SemParams, cfg: &ScoreConfig) -> f64 {
    let c = cfg.c_sharpness;
    let off: f64 = free_parameters(p).iter().map(|v| (c * v.abs()).tanh()).sum();
    let diag: f64 = (0..p.d()).map(|i| (c * p.beta()[(i, i)].abs()).tanh()).sum();
    cfg.lambda * (off + diag)
}

pub fn bic(data: &Dataset, p: &SemParams, cfg: &ScoreConfig) -> Result<f64> {
    cfg.validate()?;
    let ll = gaussian_neg2_loglik(data, p)?;
    Ok(ll + (data.n() as f64).ln() * nonzero_count(p, cfg.zero_tol) as f64)
}

pub fn abic(data: &Dataset, p: &SemParams, cfg: &ScoreConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(gaussian_neg2_loglik(data, p)? + tanh_penalty(p, cfg))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub neg2loglik: f64,
    pub bic: f64,
    pub abic: f64,
    pub nonzero: usize,
}

pub fn score_report(data: &Dataset, p: &SemParams, cfg: &ScoreConfig) -> Result<ScoreReport> {
    cfg.validate()?;
    let neg2loglik = gaussian_neg2_loglik(data, p)?;
    let nonzero = nonzero_count(p, cfg.zero_tol);
    Ok(ScoreReport {
        neg2loglik,
        bic: neg2loglik + (data.n() as f64).ln() * nonzero as f64,
        abic: neg2loglik + tanh_penalty(p, cfg),
        nonzero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    fn one_d() -> (Dataset, SemParams) {
        let x = DMatrix::from_column_slice(5, 1, &[0.3, -1.0, 2.0, 0.5, 1.5]);
        let ds = Dataset::with_default_names(x).unwrap();
        let s2 = ds.covariance()[(0, 0)];
        let p = SemParams::new(DMatrix::zeros(1, 1), DMatrix::from_element(1, 1, s2)).unwrap();
        (ds, p)
    }

    #[test]
    fn bic_closed_form() {
        let (ds, p) = one_d();
        let s2 = ds.covariance()[(0, 0)];
        let cfg = ScoreConfig::for_sample_size(0.0, 5);
        let want = 5.0 * ((2.0 * std::f64::consts::PI * s2).ln() + 1.0) + 5f64.ln();
        assert_abs_diff_eq!(bic(&ds, &p, &cfg).unwrap(), want, epsilon = 1e-12);
        assert_abs_diff_eq!(abic(&ds, &p, &cfg).unwrap(), gaussian_neg2_loglik(&ds, &p).unwrap(), epsilon = 0.0);
    }

    #[test]
    fn counting_and_penalty_conventions() {
        let delta = DMatrix::from_row_slice(3, 3, &[0., 0.8, 0.01, 0., 0., 0., 0., 0., 0.]);
        let beta = DMatrix::from_row_slice(3, 3, &[1., 0., 0.3, 0., 1., 0., 0.3, 0., 1.]);
        let p = SemParams::new(delta, beta).unwrap();
        assert_eq!(nonzero_count(&p, 0.05), 1 + 1 + 3);
        let cfg = ScoreConfig { lambda: 2.0, c_sharpness: 1e9, zero_tol: 0.05 };
        assert_abs_diff_eq!(tanh_penalty(&p, &cfg), 2.0 * 6.0, epsilon = 1e-9);

        let diag = SemParams::new(DMatrix::zeros(2, 2), DMatrix::from_diagonal_element(2, 2, 0.5)).unwrap();
        let cfg = ScoreConfig { lambda: 3.0, c_sharpness: 2.0, zero_tol: 0.05 };
        assert_abs_diff_eq!(tanh_penalty(&diag, &cfg), 3.0 * 2.0 * 1f64.tanh(), epsilon = 1e-15);
    }
}

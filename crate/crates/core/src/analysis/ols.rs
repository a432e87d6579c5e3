//! Ordinary least squares by Householder QR.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Columns whose QR pivot falls below this fraction of the largest pivot are
/// treated as linear combinations of the earlier columns.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeKind {
    #[default]
    Classical,
    /// White heteroskedasticity-robust errors with the `n / (n - k)` correction.
    Hc1,
}

/// A named regressor matrix, one row per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Design {
    /// A design with only an intercept column named `_cons`.
    pub fn intercept(n: usize) -> Self {
        Design {
            names: vec!["_cons".into()],
            rows: vec![vec![1.0]; n],
        }
    }

    pub fn push_column(&mut self, name: impl Into<String>, values: impl IntoIterator<Item = f64>) {
        self.names.push(name.into());
        let mut count = 0;
        for (row, v) in self.rows.iter_mut().zip(values) {
            row.push(v);
            count += 1;
        }
        assert_eq!(count, self.rows.len(), "column length mismatch");
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn k(&self) -> usize {
        self.names.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub se: f64,
    pub t: f64,
    pub p: f64,
    pub stars: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OlsFit {
    pub coefficients: Vec<Coefficient>,
    pub n: usize,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub sigma: f64,
    pub se_kind: SeKind,
    #[serde(skip)]
    pub residuals: Vec<f64>,
}

impl OlsFit {
    pub fn coef(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }
}

/// `*`, `**`, `***` at the 0.1, 0.05 and 0.01 levels.
pub fn stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.1 {
        "*"
    } else {
        ""
    }
}

pub fn ols_fit(y: &[f64], design: &Design, se_kind: SeKind) -> Result<OlsFit> {
    let (n, k) = (design.n(), design.k());
    if y.len() != n {
        return Err(Error::argument(format!("y has {} rows, design has {n}", y.len())));
    }
    if k == 0 || n < k {
        return Err(Error::argument(format!(
            "need at least as many observations as regressors (n = {n}, k = {k})"
        )));
    }
    if let Some((i, _)) = y.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::argument(format!("non-finite response at row {i}")));
    }
    let x = DMatrix::from_fn(n, k, |i, j| design.rows[i][j]);
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::argument("non-finite regressor value"));
    }
    let yv = DVector::from_column_slice(y);
    let qr = x.clone().qr();
    let r = qr.r();
    let scale = (0..k).map(|j| r[(j, j)].abs()).fold(0.0, f64::max);
    for j in 0..k {
        if r[(j, j)].abs() <= RANK_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::argument(format!(
                "design is rank deficient: column {:?} is collinear with earlier columns",
                design.names[j]
            )));
        }
    }
    let qty = qr.q().transpose() * &yv;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Degenerate("singular triangular factor".into()))?;
    let fitted = &x * &beta;
    let resid = &yv - fitted;
    let rss = resid.norm_squared();
    let mean = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let df = (n - k) as f64;
    let sigma2 = if n > k { rss / df } else { f64::NAN };
    let r_inv = r
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("singular triangular factor".into()))?;
    let xtx_inv = &r_inv * r_inv.transpose();
    let cov = match se_kind {
        SeKind::Classical => &xtx_inv * sigma2,
        SeKind::Hc1 => {
            let mut meat = DMatrix::<f64>::zeros(k, k);
            for i in 0..n {
                let row = x.row(i);
                meat += row.transpose() * row * resid[i].powi(2);
            }
            &xtx_inv * meat * &xtx_inv * (n as f64 / df)
        }
    };
    let tdist = (n > k).then(|| StudentsT::new(0.0, 1.0, df).expect("df > 0"));
    let coefficients = (0..k)
        .map(|j| {
            let se = cov[(j, j)].max(0.0).sqrt();
            let t = beta[j] / se;
            let p = match &tdist {
                Some(d) if t.is_finite() => 2.0 * (1.0 - d.cdf(t.abs())),
                _ => f64::NAN,
            };
            Coefficient {
                name: design.names[j].clone(),
                estimate: beta[j],
                se,
                t,
                p,
                stars: stars(p),
            }
        })
        .collect();
    let r_squared = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };
    Ok(OlsFit {
        coefficients,
        n,
        r_squared,
        adj_r_squared: 1.0 - (1.0 - r_squared) * (n as f64 - 1.0) / df,
        sigma: sigma2.sqrt(),
        se_kind,
        residuals: resid.iter().copied().collect(),
    })
}

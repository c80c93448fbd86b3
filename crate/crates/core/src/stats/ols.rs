use nalgebra::{DMatrix, DVector};

use super::StatsError;

/// Relative pivot size below which a column counts as linearly dependent on
/// the columns before it.
pub(crate) const RANK_TOL: f64 = 1e-10;

/// Least-squares fit of `y` on the columns of `x`.
#[derive(Debug, Clone)]
pub struct OlsFit {
    pub names: Vec<String>,
    pub beta: DVector<f64>,
    pub residuals: DVector<f64>,
    pub fitted: DVector<f64>,
    /// `(X'X)^-1`, the bread of every sandwich estimator.
    pub xtx_inv: DMatrix<f64>,
    pub ssr: f64,
    pub sst: f64,
    pub n: usize,
    pub p: usize,
}

/// Sums of squares and dimensions behind the usual fit statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anova {
    pub n: usize,
    /// Columns in the design, intercept and absorbed dummies included.
    pub p: usize,
    pub ssr: f64,
    pub sst: f64,
}

impl Anova {
    pub fn df_resid(&self) -> usize {
        self.n - self.p
    }

    /// `1 - SSR/SST`, or 0 for a constant outcome.
    pub fn r_squared(&self) -> f64 {
        if self.sst > 0.0 {
            (1.0 - self.ssr / self.sst).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }

    /// Adjusted R² for a model with an intercept.
    pub fn adj_r_squared(&self) -> f64 {
        let df = self.df_resid() as f64;
        if df <= 0.0 || self.sst <= 0.0 {
            return 0.0;
        }
        1.0 - (1.0 - self.r_squared()) * (self.n as f64 - 1.0) / df
    }

    pub fn sigma(&self) -> f64 {
        let df = self.df_resid();
        if df == 0 {
            f64::NAN
        } else {
            (self.ssr / df as f64).sqrt()
        }
    }

    /// Classical F against the intercept-only model.
    pub fn f_statistic(&self) -> f64 {
        let df1 = self.p as f64 - 1.0;
        let df2 = self.df_resid() as f64;
        if df1 <= 0.0 || df2 <= 0.0 {
            return f64::NAN;
        }
        ((self.sst - self.ssr) / df1) / (self.ssr / df2)
    }
}

impl OlsFit {
    pub fn anova(&self) -> Anova {
        Anova {
            n: self.n,
            p: self.p,
            ssr: self.ssr,
            sst: self.sst,
        }
    }

    pub fn df_resid(&self) -> usize {
        self.anova().df_resid()
    }

    pub fn r_squared(&self) -> f64 {
        self.anova().r_squared()
    }

    pub fn adj_r_squared(&self) -> f64 {
        self.anova().adj_r_squared()
    }

    pub fn sigma(&self) -> f64 {
        self.anova().sigma()
    }

    pub fn f_statistic(&self) -> f64 {
        self.anova().f_statistic()
    }

    /// `(X'X)^-1 σ²`.
    pub fn classical_vcov(&self) -> DMatrix<f64> {
        let s = self.sigma();
        &self.xtx_inv * (s * s)
    }
}

/// Columns whose QR pivot is negligible relative to their norm.
pub fn deficient_columns(x: &DMatrix<f64>) -> Vec<usize> {
    negligible_pivots(x, &x.clone().qr().r())
}

pub(crate) fn negligible_pivots(x: &DMatrix<f64>, r: &DMatrix<f64>) -> Vec<usize> {
    (0..x.ncols())
        .filter(|&k| {
            let norm = x.column(k).norm();
            norm == 0.0 || r[(k, k)].abs() <= RANK_TOL * norm
        })
        .collect()
}

/// Ordinary least squares through a Householder QR decomposition.
pub fn ols(x: &DMatrix<f64>, y: &DVector<f64>, names: &[String]) -> Result<OlsFit, StatsError> {
    let (n, p) = x.shape();
    if y.len() != n || names.len() != p {
        return Err(StatsError::Dimension(format!(
            "design is {n}x{p} with {} names, outcome has {} rows",
            names.len(),
            y.len()
        )));
    }
    if n <= p {
        return Err(StatsError::TooFewRows { n, p });
    }
    let qr = x.clone().qr();
    let r = qr.r();
    let bad: Vec<String> = negligible_pivots(x, &r).into_iter().map(|k| names[k].clone()).collect();
    if !bad.is_empty() {
        return Err(StatsError::RankDeficiency { columns: bad });
    }
    let q = qr.q();
    let qty = q.transpose() * y;
    let singular = || StatsError::RankDeficiency { columns: names.to_vec() };
    let beta = r.solve_upper_triangular(&qty).ok_or_else(singular)?;
    let r_inv = r.solve_upper_triangular(&DMatrix::identity(p, p)).ok_or_else(singular)?;
    let xtx_inv = &r_inv * r_inv.transpose();
    let fitted = x * &beta;
    let residuals = y - &fitted;
    let mean = y.mean();
    Ok(OlsFit {
        names: names.to_vec(),
        ssr: residuals.norm_squared(),
        sst: y.iter().map(|v| (v - mean).powi(2)).sum(),
        beta,
        residuals,
        fitted,
        xtx_inv,
        n,
        p,
    })
}

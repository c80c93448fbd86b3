//! Least squares with absorbed fixed effects.
//!
//! The design is split into a sparse block `D` (intercept plus one-hot
//! dummies, a few nonzeros per row) and a dense block `Z` of model terms.
//! Slopes come from regressing `y` on `Z` after projecting both off `D`,
//! and the rows of `(X'X)^-1 X'` needed for the intercept and slopes are
//! assembled from the partitioned inverse, so the cost is linear in the
//! number of rows however many dummies there are.

use nalgebra::{DMatrix, DVector};

use super::ols::RANK_TOL;
use super::{Anova, StatsError};

#[derive(Debug, Clone, PartialEq)]
pub struct FeDesign {
    pub y: DVector<f64>,
    /// Model terms, one column each.
    pub z: DMatrix<f64>,
    pub z_names: Vec<String>,
    /// Per row, the columns of `D` equal to 1 (column 0 is the intercept).
    pub d: Vec<Vec<usize>>,
    pub d_names: Vec<String>,
}

impl FeDesign {
    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// `[D | Z]` as a dense matrix with its column names.
    pub fn dense(&self) -> (DMatrix<f64>, Vec<String>) {
        let q = self.d_names.len();
        let r = self.z.ncols();
        let mut x = DMatrix::zeros(self.n(), q + r);
        for (i, cols) in self.d.iter().enumerate() {
            for &j in cols {
                x[(i, j)] = 1.0;
            }
            for k in 0..r {
                x[(i, q + k)] = self.z[(i, k)];
            }
        }
        let names = self.d_names.iter().chain(&self.z_names).cloned().collect();
        (x, names)
    }
}

#[derive(Debug, Clone)]
pub struct FeFit {
    /// Intercept then model terms.
    pub names: Vec<String>,
    pub estimates: DVector<f64>,
    pub residuals: DVector<f64>,
    /// Rows of `(X'X)^-1 X'` for the reported coefficients; column `i` times
    /// the residual of row `i` is that row's score contribution.
    pub projector: DMatrix<f64>,
    pub anova: Anova,
}

impl FeFit {
    /// `projector` with each column scaled by its residual.
    pub fn influence(&self) -> DMatrix<f64> {
        let mut m = self.projector.clone();
        for (mut col, &u) in m.column_iter_mut().zip(self.residuals.iter()) {
            col *= u;
        }
        m
    }
}

/// OLS of `y` on `[D | Z]`, reporting the intercept and the `Z` slopes.
pub fn ols_fixed_effects(design: &FeDesign) -> Result<FeFit, StatsError> {
    let n = design.n();
    let q = design.d_names.len();
    let r = design.z.ncols();
    if design.z.nrows() != n || design.d.len() != n || design.z_names.len() != r {
        return Err(StatsError::Dimension(format!(
            "outcome has {n} rows, terms {}x{r} with {} names, dummies for {} rows",
            design.z.nrows(),
            design.z_names.len(),
            design.d.len()
        )));
    }
    if q == 0 || design.d.iter().any(|cols| cols.first() != Some(&0) || cols.iter().any(|&j| j >= q)) {
        return Err(StatsError::Dimension("every row needs the intercept and valid dummy columns".into()));
    }
    if n <= q + r {
        return Err(StatsError::TooFewRows { n, p: q + r });
    }

    // D'D, D'Z, D'y by accumulation over the sparse rows
    let mut dtd = DMatrix::<f64>::zeros(q, q);
    let mut dtz = DMatrix::<f64>::zeros(q, r);
    let mut dty = DVector::<f64>::zeros(q);
    for (i, cols) in design.d.iter().enumerate() {
        for &a in cols {
            for &b in cols {
                dtd[(a, b)] += 1.0;
            }
            for k in 0..r {
                dtz[(a, k)] += design.z[(i, k)];
            }
            dty[a] += design.y[i];
        }
    }
    let p_inv = dtd
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| StatsError::RankDeficiency { columns: design.d_names.clone() })?;
    let a = &p_inv * &dtz;
    let c = &p_inv * &dty;

    let mut zt = design.z.clone();
    let mut yt = design.y.clone();
    for (i, cols) in design.d.iter().enumerate() {
        for &j in cols {
            for k in 0..r {
                zt[(i, k)] -= a[(j, k)];
            }
            yt[i] -= c[j];
        }
    }

    let qr = zt.clone().qr();
    let rm = qr.r();
    let bad: Vec<String> = (0..r)
        .filter(|&k| {
            let norm = design.z.column(k).norm();
            norm == 0.0 || rm[(k, k)].abs() <= RANK_TOL * norm
        })
        .map(|k| design.z_names[k].clone())
        .collect();
    if !bad.is_empty() {
        return Err(StatsError::RankDeficiency { columns: bad });
    }
    let singular = || StatsError::RankDeficiency { columns: design.z_names.clone() };
    let mut qty = yt.clone();
    qr.q_tr_mul(&mut qty);
    let beta = rm.solve_upper_triangular(&qty.rows(0, r).into_owned()).ok_or_else(singular)?;
    let r_inv = rm.solve_upper_triangular(&DMatrix::identity(r, r)).ok_or_else(singular)?;
    let s = &r_inv * r_inv.transpose();

    let residuals = &yt - &zt * &beta;
    let gamma0 = c[0] - (a.row(0) * &beta)[0];

    // rows of (X'X)^-1 X': slopes S z~_i, intercept P[0,:] d_i - A[0,:] S z~_i
    let a0s = a.row(0) * &s;
    let mut projector = DMatrix::zeros(1 + r, n);
    for (i, cols) in design.d.iter().enumerate() {
        let zi = zt.row(i).transpose();
        let slope = &s * &zi;
        projector[(0, i)] = cols.iter().map(|&j| p_inv[(0, j)]).sum::<f64>() - (&a0s * &zi)[0];
        for k in 0..r {
            projector[(1 + k, i)] = slope[k];
        }
    }

    let mut estimates = DVector::zeros(1 + r);
    estimates[0] = gamma0;
    estimates.rows_mut(1, r).copy_from(&beta);
    let mean = design.y.mean();
    let mut names = vec![design.d_names[0].clone()];
    names.extend(design.z_names.iter().cloned());
    Ok(FeFit {
        names,
        estimates,
        anova: Anova {
            n,
            p: q + r,
            ssr: residuals.norm_squared(),
            sst: design.y.iter().map(|v| (v - mean).powi(2)).sum(),
        },
        residuals,
        projector,
    })
}

//! Sandwich covariance estimators. Each is `B M B` with bread
//! `B = (X'X)^-1` and an estimator-specific meat `M`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::StatsError;

fn check(x: &DMatrix<f64>, u: &DVector<f64>) -> Result<(), StatsError> {
    if x.nrows() != u.len() {
        return Err(StatsError::Dimension(format!(
            "design has {} rows, residuals {}",
            x.nrows(),
            u.len()
        )));
    }
    Ok(())
}

/// Row scores `x_r u_r` as the columns of a `p x n` matrix.
fn scores(x: &DMatrix<f64>, u: &DVector<f64>) -> DMatrix<f64> {
    let mut s = x.transpose();
    for (mut col, &ur) in s.column_iter_mut().zip(u.iter()) {
        col *= ur;
    }
    s
}

pub fn sandwich(bread: &DMatrix<f64>, meat: &DMatrix<f64>) -> DMatrix<f64> {
    let v = bread * meat * bread;
    // symmetrize away rounding
    (&v + v.transpose()) * 0.5
}

pub fn bread(x: &DMatrix<f64>) -> Result<DMatrix<f64>, StatsError> {
    (x.transpose() * x)
        .try_inverse()
        .ok_or_else(|| StatsError::RankDeficiency { columns: vec!["X'X".into()] })
}

pub fn hc0_meat(x: &DMatrix<f64>, u: &DVector<f64>) -> Result<DMatrix<f64>, StatsError> {
    check(x, u)?;
    let s = scores(x, u);
    Ok(&s * s.transpose())
}

/// Meat for one-way clustering; rows sharing a label are summed before the
/// outer product.
pub fn cluster_meat<K: Ord>(x: &DMatrix<f64>, u: &DVector<f64>, clusters: &[K]) -> Result<DMatrix<f64>, StatsError> {
    check(x, u)?;
    if clusters.len() != u.len() {
        return Err(StatsError::Dimension(format!(
            "{} cluster labels for {} rows",
            clusters.len(),
            u.len()
        )));
    }
    let s = scores(x, u);
    let mut sums: BTreeMap<&K, DVector<f64>> = BTreeMap::new();
    for (r, k) in clusters.iter().enumerate() {
        *sums.entry(k).or_insert_with(|| DVector::zeros(x.ncols())) += s.column(r);
    }
    let mut m = DMatrix::zeros(x.ncols(), x.ncols());
    for g in sums.values() {
        m += g * g.transpose();
    }
    Ok(m)
}

/// Dyadic-cluster meat: the sum of `x_r u_r u_s x_s'` over every ordered pair
/// of rows whose dyads share at least one school.
pub fn dcr_meat(x: &DMatrix<f64>, u: &DVector<f64>, members: &[(usize, usize)]) -> Result<DMatrix<f64>, StatsError> {
    check(x, u)?;
    dyadic_cluster_sum(&scores(x, u), members)
}

/// `sum s_r s_t'` over ordered pairs of columns of `s` whose dyads share a
/// school. With `s` holding row scores this is the dyadic meat; with rows of
/// `(X'X)^-1 X'` scaled by residuals it is the full sandwich.
///
/// Summing per-school totals counts pairs within the same unordered dyad
/// twice, so their per-dyad outer products are subtracted once.
pub fn dyadic_cluster_sum(s: &DMatrix<f64>, members: &[(usize, usize)]) -> Result<DMatrix<f64>, StatsError> {
    if members.len() != s.ncols() {
        return Err(StatsError::Dimension(format!(
            "{} dyad memberships for {} rows",
            members.len(),
            s.ncols()
        )));
    }
    if let Some(r) = members.iter().position(|&(i, j)| i == j) {
        return Err(StatsError::Dimension(format!("row {r} pairs a school with itself")));
    }
    let p = s.nrows();
    let mut per_school: BTreeMap<usize, DVector<f64>> = BTreeMap::new();
    let mut per_dyad: BTreeMap<(usize, usize), DVector<f64>> = BTreeMap::new();
    for (r, &(i, j)) in members.iter().enumerate() {
        let sr = s.column(r);
        *per_school.entry(i).or_insert_with(|| DVector::zeros(p)) += sr;
        *per_school.entry(j).or_insert_with(|| DVector::zeros(p)) += sr;
        *per_dyad.entry((i.min(j), i.max(j))).or_insert_with(|| DVector::zeros(p)) += sr;
    }
    let mut m = DMatrix::zeros(p, p);
    for g in per_school.values() {
        m += g * g.transpose();
    }
    for h in per_dyad.values() {
        m -= h * h.transpose();
    }
    Ok((&m + m.transpose()) * 0.5)
}

pub fn hc0(bread: &DMatrix<f64>, x: &DMatrix<f64>, u: &DVector<f64>) -> Result<DMatrix<f64>, StatsError> {
    Ok(sandwich(bread, &hc0_meat(x, u)?))
}

/// HC0 scaled by `n / (n - p)`.
pub fn hc1(bread: &DMatrix<f64>, x: &DMatrix<f64>, u: &DVector<f64>) -> Result<DMatrix<f64>, StatsError> {
    let (n, p) = x.shape();
    if n <= p {
        return Err(StatsError::TooFewRows { n, p });
    }
    Ok(hc0(bread, x, u)? * (n as f64 / (n - p) as f64))
}

/// Dyadic-cluster-robust covariance. `members[r]` holds the two schools of
/// row `r`, as indices.
pub fn dcr_variance(
    bread: &DMatrix<f64>,
    x: &DMatrix<f64>,
    u: &DVector<f64>,
    members: &[(usize, usize)],
) -> Result<DMatrix<f64>, StatsError> {
    if bread.shape() != (x.ncols(), x.ncols()) {
        return Err(StatsError::Dimension(format!(
            "bread is {:?} for {} columns",
            bread.shape(),
            x.ncols()
        )));
    }
    Ok(sandwich(bread, &dcr_meat(x, u, members)?))
}

/// Square roots of the diagonal. Negative variances, which the dyadic
/// estimator can produce, become NaN with a warning.
pub fn standard_errors(v: &DMatrix<f64>, names: &[String]) -> Vec<f64> {
    (0..v.nrows())
        .map(|k| {
            let d = v[(k, k)];
            if d < 0.0 {
                let name = names.get(k).map(String::as_str).unwrap_or("?");
                log::warn!("negative variance {d:e} for {name}; covariance is not positive semi-definite");
                f64::NAN
            } else {
                d.sqrt()
            }
        })
        .collect()
}

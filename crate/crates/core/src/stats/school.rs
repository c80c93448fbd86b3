use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{deficient_columns, hc1, ols, FitResult, StatsError};
use crate::corpus::Institutions;
use crate::diffusion::PairAttribution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchoolRow {
    pub institution: String,
    pub produced: u32,
    pub adopted: u32,
    pub size: f64,
    pub private: u8,
    pub public: u8,
    pub land_grant: u8,
    pub avg_ranking: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchoolTarget {
    Produced,
    Adopted,
}

/// Counts of vogue pairs each institution produced and adopted.
pub fn build_school_rows(attributions: &[PairAttribution], institutions: &Institutions) -> Vec<SchoolRow> {
    let mut produced: BTreeMap<&str, u32> = BTreeMap::new();
    let mut adopted: BTreeMap<&str, u32> = BTreeMap::new();
    for a in attributions {
        for p in &a.producers {
            *produced.entry(p).or_default() += 1;
        }
        for d in &a.adopters {
            *adopted.entry(d).or_default() += 1;
        }
    }
    institutions
        .iter()
        .map(|r| SchoolRow {
            institution: r.name.clone(),
            produced: produced.get(r.name.as_str()).copied().unwrap_or(0),
            adopted: adopted.get(r.name.as_str()).copied().unwrap_or(0),
            size: f64::from(r.size),
            private: u8::from(r.private),
            public: u8::from(r.public),
            land_grant: u8::from(r.land_grant),
            avg_ranking: f64::from(r.ranking),
        })
        .collect()
}

pub fn write_school_csv<W: Write>(rows: &[SchoolRow], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

const SCHOOL_COLUMNS: [&str; 6] = ["(Intercept)", "size", "private", "public", "land_grant", "avg_ranking"];

/// OLS of a school's count on its characteristics with HC1 errors.
///
/// Public and private are complementary whenever every school is one or the
/// other, which makes them aliased with the intercept; regressors that are
/// exact linear combinations of earlier ones are dropped and listed in
/// [`FitResult::dropped`].
pub fn school_level_regression(rows: &[SchoolRow], target: SchoolTarget) -> Result<FitResult, StatsError> {
    let n = rows.len();
    let full = DMatrix::from_fn(n, SCHOOL_COLUMNS.len(), |i, k| {
        let r = &rows[i];
        match k {
            0 => 1.0,
            1 => r.size,
            2 => f64::from(r.private),
            3 => f64::from(r.public),
            4 => f64::from(r.land_grant),
            _ => r.avg_ranking,
        }
    });
    let y = DVector::from_iterator(
        n,
        rows.iter().map(|r| f64::from(match target {
            SchoolTarget::Produced => r.produced,
            SchoolTarget::Adopted => r.adopted,
        })),
    );
    let mut keep: Vec<usize> = (0..SCHOOL_COLUMNS.len()).collect();
    // drop one aliased column at a time; the intercept is never dropped
    loop {
        let x = full.select_columns(&keep);
        match deficient_columns(&x).into_iter().find(|&k| k > 0) {
            Some(k) => {
                keep.remove(k);
            }
            None => break,
        }
    }
    let dropped: Vec<String> = (0..SCHOOL_COLUMNS.len())
        .filter(|k| !keep.contains(k))
        .map(|k| SCHOOL_COLUMNS[k].to_string())
        .collect();
    if !dropped.is_empty() {
        log::info!("school-level regression drops aliased regressors {dropped:?}");
    }
    let x = full.select_columns(&keep);
    let names: Vec<String> = keep.iter().map(|&k| SCHOOL_COLUMNS[k].to_string()).collect();
    let fit = ols(&x, &y, &names)?;
    let vcov = hc1(&fit.xtx_inv, &x, &fit.residuals)?;
    let label = match target {
        SchoolTarget::Produced => "production",
        SchoolTarget::Adopted => "adoption",
    };
    let mut res = FitResult::new(label, &fit.names, fit.beta.as_slice(), &vcov, &fit.anova(), "hc1", fit.df_resid());
    res.dropped = dropped;
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(f: impl Fn(usize) -> u32) -> Vec<SchoolRow> {
        (0..12)
            .map(|i| SchoolRow {
                institution: format!("S{i}"),
                produced: f(i),
                adopted: 0,
                size: (i * 4 + (i * i) % 7) as f64,
                private: u8::from(i % 3 == 0),
                public: u8::from(i % 3 != 0),
                land_grant: u8::from(i % 4 == 1),
                avg_ranking: (i * 5 % 11 + 1) as f64,
            })
            .collect()
    }

    #[test]
    fn noiseless_size_slope() {
        let mut data = rows(|i| 5 + i as u32);
        for (i, r) in data.iter_mut().enumerate() {
            r.size = (i * 4) as f64;
        }
        let res = school_level_regression(&data, SchoolTarget::Produced).unwrap();
        assert_eq!(res.dropped, ["public"]);
        assert!((res.coefficient("size").unwrap().estimate - 0.25).abs() < 1e-10);
        assert!((res.coefficient("(Intercept)").unwrap().estimate - 5.0).abs() < 1e-10);
        assert!(res.coefficient("private").unwrap().estimate.abs() < 1e-10);
    }

    #[test]
    fn zero_target() {
        let res = school_level_regression(&rows(|_| 0), SchoolTarget::Produced).unwrap();
        assert!(res.coefficients.iter().all(|c| c.estimate.abs() < 1e-12));
        assert_eq!(res.r_squared, 0.0);
    }

    #[test]
    fn counts_from_attributions() {
        use crate::corpus::InstitutionRecord;
        use crate::semnet::EdgeKey;
        let inst = Institutions::new(
            ["A", "B"]
                .iter()
                .map(|n| InstitutionRecord {
                    name: n.to_string(),
                    region: "NE".into(),
                    public: true,
                    private: false,
                    land_grant: false,
                    ranking: 1,
                    size: 3,
                })
                .collect(),
        )
        .unwrap();
        let attr = |p: &[&str], a: &[&str]| PairAttribution {
            edge: EdgeKey::new("x", "y").unwrap(),
            producers: p.iter().map(|s| s.to_string()).collect(),
            adopters: a.iter().map(|s| s.to_string()).collect(),
        };
        let rows = build_school_rows(&[attr(&["A"], &["B"]), attr(&["A", "B"], &["B"])], &inst);
        assert_eq!((rows[0].produced, rows[0].adopted), (2, 0));
        assert_eq!((rows[1].produced, rows[1].adopted), (1, 2));
    }
}

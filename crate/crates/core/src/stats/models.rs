use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use super::{dyadic_cluster_sum, ols_fixed_effects, standard_errors, Anova, DyadRow, DyadTable, FeDesign, StatsError};

/// A dyad-level regressor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    SameRank,
    SameSize,
    SameLocation,
    BothPublic,
    BothPrivate,
    BothLandgrant,
    Fit,
    RankGap,
    SizeGap,
}

impl Feature {
    pub fn as_str(self) -> &'static str {
        match self {
            Feature::SameRank => "same_rank",
            Feature::SameSize => "same_size",
            Feature::SameLocation => "same_location",
            Feature::BothPublic => "both_public",
            Feature::BothPrivate => "both_private",
            Feature::BothLandgrant => "both_landgrant",
            Feature::Fit => "fit",
            Feature::RankGap => "rank_gap",
            Feature::SizeGap => "size_gap",
        }
    }

    /// `None` when the row lacks the value.
    pub fn value(self, row: &DyadRow) -> Option<f64> {
        Some(match self {
            Feature::SameRank => f64::from(row.same_rank),
            Feature::SameSize => f64::from(row.same_size),
            Feature::SameLocation => f64::from(row.same_location),
            Feature::BothPublic => f64::from(row.both_public),
            Feature::BothPrivate => f64::from(row.both_private),
            Feature::BothLandgrant => f64::from(row.both_landgrant),
            Feature::Fit => return row.fit,
            Feature::RankGap => row.rank_gap,
            Feature::SizeGap => row.size_gap,
        })
    }
}

/// A product of features; one factor is a main effect.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term(pub Vec<Feature>);

impl Term {
    pub fn main(f: Feature) -> Self {
        Term(vec![f])
    }

    pub fn interaction(a: Feature, b: Feature) -> Self {
        Term(vec![a, b])
    }

    pub fn name(&self) -> String {
        self.0.iter().map(|f| f.as_str()).collect::<Vec<_>>().join(":")
    }

    pub fn value(&self, row: &DyadRow) -> Option<f64> {
        self.0.iter().try_fold(1.0, |acc, f| f.value(row).map(|v| acc * v))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    pub terms: Vec<Term>,
}

/// Which school dummies enter a dyad model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedEffects {
    None,
    #[default]
    Adopter,
    Producer,
    Both,
}

impl FromStr for FixedEffects {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(Self::None),
            "adopter" => Ok(Self::Adopter),
            "producer" => Ok(Self::Producer),
            "both" => Ok(Self::Both),
            _ => Err(format!("unknown fixed effects {s:?} (none|adopter|producer|both)")),
        }
    }
}

impl fmt::Display for FixedEffects {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::None => "none",
            Self::Adopter => "adopter",
            Self::Producer => "producer",
            Self::Both => "both",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_value: f64,
    pub p_value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Coefficient {
    pub fn stars(&self) -> &'static str {
        if self.p_value < 0.01 {
            "**"
        } else if self.p_value < 0.05 {
            "*"
        } else {
            ""
        }
    }
}

/// Reported summary of one regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: String,
    pub coefficients: Vec<Coefficient>,
    pub variance: String,
    pub fixed_effects: FixedEffects,
    /// Dummy columns absorbed by the fixed effects, not reported.
    pub fe_columns: usize,
    /// Regressors removed as exact aliases before fitting.
    pub dropped: Vec<String>,
    pub n: usize,
    /// Rows left out for missing regressors.
    pub excluded: usize,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub residual_se: f64,
    pub df_resid: usize,
    pub f_statistic: f64,
    pub f_df: (usize, usize),
    pub f_p_value: f64,
    /// Degrees of freedom behind coefficient p-values and intervals.
    pub test_df: usize,
}

impl FitResult {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }

    /// Builds the summary from estimates, their covariance and the fit's
    /// sums of squares. Coefficient tests use Student t with `test_df`
    /// degrees of freedom.
    pub fn new(
        model: &str,
        names: &[String],
        estimates: &[f64],
        vcov: &DMatrix<f64>,
        anova: &Anova,
        variance: &str,
        test_df: usize,
    ) -> Self {
        let df = anova.df_resid();
        let se = standard_errors(vcov, names);
        let t_dist = StudentsT::new(0.0, 1.0, test_df as f64).ok();
        let crit = t_dist.as_ref().map(|t| t.inverse_cdf(0.975)).unwrap_or(f64::NAN);
        let coefficients = names
            .iter()
            .zip(estimates)
            .zip(&se)
            .map(|((name, &est), &se)| {
                let t = est / se;
                let p = match &t_dist {
                    Some(d) if t.is_finite() => 2.0 * (1.0 - d.cdf(t.abs())),
                    Some(_) if t.is_infinite() => 0.0,
                    _ => f64::NAN,
                };
                Coefficient {
                    name: name.clone(),
                    estimate: est,
                    std_error: se,
                    t_value: t,
                    p_value: p,
                    ci_low: est - crit * se,
                    ci_high: est + crit * se,
                }
            })
            .collect();
        let f = anova.f_statistic();
        let df1 = anova.p.saturating_sub(1);
        let f_p = match FisherSnedecor::new(df1 as f64, df as f64) {
            Ok(d) if f.is_finite() => 1.0 - d.cdf(f),
            Ok(_) if f.is_infinite() => 0.0,
            _ => f64::NAN,
        };
        FitResult {
            model: model.to_string(),
            coefficients,
            variance: variance.to_string(),
            fixed_effects: FixedEffects::None,
            fe_columns: 0,
            dropped: Vec::new(),
            n: anova.n,
            excluded: 0,
            r_squared: anova.r_squared(),
            adj_r_squared: anova.adj_r_squared(),
            residual_se: anova.sigma(),
            df_resid: df,
            f_statistic: f,
            f_df: (df1, df),
            f_p_value: f_p,
            test_df,
        }
    }
}

/// Dyad regression inputs: the intercept and fixed-effect dummies (first
/// level of each family as reference) in the sparse block, model terms in
/// the dense one.
pub struct DyadDesign {
    pub design: FeDesign,
    pub members: Vec<(usize, usize)>,
    /// Distinct schools among the kept rows.
    pub schools: usize,
    pub excluded: usize,
}

type Pick = fn(&DyadRow) -> &str;

pub fn dyad_design(rows: &[DyadRow], spec: &ModelSpec, fe: FixedEffects) -> DyadDesign {
    let kept: Vec<(&DyadRow, Vec<f64>)> = rows
        .iter()
        .filter_map(|r| {
            let vals: Option<Vec<f64>> = spec.terms.iter().map(|t| t.value(r)).collect();
            vals.map(|v| (r, v))
        })
        .collect();
    let excluded = rows.len() - kept.len();

    let mut schools: BTreeMap<&str, usize> = BTreeMap::new();
    for (r, _) in &kept {
        schools.insert(&r.producer, 0);
        schools.insert(&r.adopter, 0);
    }
    for (i, v) in schools.values_mut().enumerate() {
        *v = i;
    }
    let levels = |pick: Pick| -> Vec<&str> {
        let mut l: Vec<&str> = kept.iter().map(|(r, _)| pick(r)).collect();
        l.sort_unstable();
        l.dedup();
        l.into_iter().skip(1).collect()
    };
    let mut families: Vec<(&str, Pick, Vec<&str>)> = Vec::new();
    if matches!(fe, FixedEffects::Adopter | FixedEffects::Both) {
        families.push(("adopter", |r| r.adopter.as_str(), levels(|r| r.adopter.as_str())));
    }
    if matches!(fe, FixedEffects::Producer | FixedEffects::Both) {
        families.push(("producer", |r| r.producer.as_str(), levels(|r| r.producer.as_str())));
    }

    let mut d_names = vec!["(Intercept)".to_string()];
    for (fam, _, lv) in &families {
        d_names.extend(lv.iter().map(|l| format!("{fam}[{l}]")));
    }
    let n = kept.len();
    let r = spec.terms.len();
    let mut z = DMatrix::zeros(n, r);
    let mut y = DVector::zeros(n);
    let mut d = Vec::with_capacity(n);
    let mut members = Vec::with_capacity(n);
    for (i, (row, vals)) in kept.iter().enumerate() {
        y[i] = row.y;
        for (k, v) in vals.iter().enumerate() {
            z[(i, k)] = *v;
        }
        let mut cols = vec![0];
        let mut offset = 1;
        for (_, pick, lv) in &families {
            if let Ok(pos) = lv.binary_search(&pick(row)) {
                cols.push(offset + pos);
            }
            offset += lv.len();
        }
        d.push(cols);
        members.push((schools[row.producer.as_str()], schools[row.adopter.as_str()]));
    }
    DyadDesign {
        design: FeDesign {
            y,
            z,
            z_names: spec.terms.iter().map(Term::name).collect(),
            d,
            d_names,
        },
        members,
        schools: schools.len(),
        excluded,
    }
}

/// OLS with school fixed effects and dyadic-cluster-robust errors. Tests use
/// one degree of freedom fewer than the number of schools, the usual
/// convention for cluster-robust inference.
pub fn fit_dyad_model(table: &DyadTable, spec: &ModelSpec, fe: FixedEffects) -> Result<FitResult, StatsError> {
    let d = dyad_design(&table.rows, spec, fe);
    let fit = ols_fixed_effects(&d.design)?;
    let vcov = dyadic_cluster_sum(&fit.influence(), &d.members)?;
    let test_df = d.schools.saturating_sub(1).min(fit.anova.df_resid());
    let mut res = FitResult::new(
        &spec.name,
        &fit.names,
        fit.estimates.as_slice(),
        &vcov,
        &fit.anova,
        "dcr",
        test_df,
    );
    res.fixed_effects = fe;
    res.fe_columns = d.design.d_names.len() - 1;
    res.excluded = d.excluded;
    Ok(res)
}

/// The six interaction models followed by the seven research-fit models.
pub fn table_models() -> Vec<ModelSpec> {
    use Feature::*;
    let m = Term::main;
    let i = Term::interaction;
    let spec = |name: &str, terms: Vec<Term>| ModelSpec { name: name.into(), terms };
    vec![
        spec("3.1", vec![m(BothPublic), m(SameLocation), i(SameLocation, BothPublic)]),
        spec("3.2", vec![m(BothLandgrant), m(SameLocation), i(SameLocation, BothLandgrant)]),
        spec("3.3", vec![m(BothPrivate), m(SameLocation), i(SameLocation, BothPrivate)]),
        spec("3.4", vec![m(BothPublic), m(SameRank), i(SameRank, BothPublic)]),
        spec("3.5", vec![m(BothLandgrant), m(SameRank), i(SameRank, BothLandgrant)]),
        spec("3.6", vec![m(BothPrivate), m(SameRank), i(SameRank, BothPrivate)]),
        spec("4.1", vec![m(Fit)]),
        spec("4.2", vec![m(Fit), m(SameLocation)]),
        spec("4.3", vec![m(Fit), m(RankGap)]),
        spec("4.4", vec![m(Fit), m(SameLocation), m(RankGap)]),
        spec("4.5", vec![m(Fit), m(SameLocation), m(RankGap), m(SizeGap)]),
        spec("4.6", vec![m(Fit), m(BothLandgrant), m(BothPrivate), m(BothPublic)]),
        spec(
            "4.7",
            vec![m(Fit), m(SameLocation), m(RankGap), m(SizeGap), m(BothLandgrant), m(BothPrivate), m(BothPublic)],
        ),
    ]
}

/// Fits every table model in order.
pub fn run_table_models(table: &DyadTable, fe: FixedEffects) -> Result<Vec<FitResult>, StatsError> {
    table_models().par_iter().map(|s| fit_dyad_model(table, s, fe)).collect()
}

/// Long-format table: coefficient rows, then footer statistics per model.
pub fn write_models_csv<W: Write>(results: &[FitResult], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["model", "term", "estimate", "std_error", "p_value", "stars"])?;
    for r in results {
        for c in &r.coefficients {
            w.write_record([
                r.model.as_str(),
                &c.name,
                &c.estimate.to_string(),
                &c.std_error.to_string(),
                &c.p_value.to_string(),
                c.stars(),
            ])?;
        }
        let footer = [
            ("observations", r.n.to_string()),
            ("r_squared", r.r_squared.to_string()),
            ("adj_r_squared", r.adj_r_squared.to_string()),
            ("residual_se", r.residual_se.to_string()),
            ("df_resid", r.df_resid.to_string()),
            ("f_statistic", r.f_statistic.to_string()),
        ];
        for (k, v) in footer {
            w.write_record([r.model.as_str(), k, &v, "", "", ""])?;
        }
    }
    w.flush()?;
    Ok(())
}

//! Dyad- and school-level regression: datasets, OLS with fixed effects and
//! robust covariance estimators.

mod dyads;
mod fe;
mod models;
mod ols;
mod robust;
mod school;

use thiserror::Error;

pub use dyads::{build_dyads, fit_similarity, percentile, rank_tier, size_terciles, DyadRow, DyadTable, FitMap};
pub use models::{
    dyad_design, fit_dyad_model, run_table_models, table_models, write_models_csv, Coefficient, DyadDesign, Feature,
    FitResult, FixedEffects, ModelSpec, Term,
};
pub use fe::{ols_fixed_effects, FeDesign, FeFit};
pub use ols::{deficient_columns, ols, Anova, OlsFit};
pub use robust::{bread, cluster_meat, dcr_meat, dcr_variance, dyadic_cluster_sum, hc0, hc0_meat, hc1, sandwich, standard_errors};
pub use school::{build_school_rows, school_level_regression, write_school_csv, SchoolRow, SchoolTarget};

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("design is rank deficient; collinear columns: {}", columns.join(", "))]
    RankDeficiency { columns: Vec<String> },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("{n} observations cannot identify {p} coefficients")]
    TooFewRows { n: usize, p: usize },
    #[error("institutions missing from metadata: {}", missing.join(", "))]
    Metadata { missing: Vec<String> },
}

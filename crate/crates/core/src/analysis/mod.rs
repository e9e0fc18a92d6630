//! Scoring and statistics for the perception experiments: TIPI traits,
//! preference and why-category tables, one-sample t-tests and factorial
//! ANOVA.

pub mod anova;
pub mod records;
pub mod report;
pub mod special;
pub mod tables;
pub mod tipi;
pub mod ttest;

pub use anova::{anova, AnovaRow, AnovaTable, Model, Observation};
pub use records::{read_judgments, Choice, DomainError, Judgment, JudgmentRecord, ReadError, WhyCategory};
pub use report::{analyze, Report};
pub use tables::{preference_table, why_category_table, PreferenceRow, PreferenceTable, WhyRow, WhyTable};
pub use tipi::{tipi_score, Trait, TraitScores};
pub use ttest::{one_sample_ttest, StatError, StatResult};

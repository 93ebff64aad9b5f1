//! Temporal belief-updating benchmark: fixture, driver, scoring and grading.

mod audit;
mod autograde;
mod dataset;
mod grading;
mod runner;

pub use audit::{audit_evidence, lexicon_coverage, AuditRow, CoverageRow};
pub use autograde::{autograde_3pt, parse_score, rubric_prompt, summarize, AutogradeSummary, RubricGrader, RUBRIC_TEMPLATE};
pub use dataset::{Question, QuestionKind, TemporalDataset, BUNDLED_FIXTURE, INITIAL_LEN, LOOP_LEN, STANDARD_LEN};
pub use grading::{
    export_blind_grading, format_percent, import_grades, read_grades, AccuracyRow, KeyRow, SheetRow,
};
pub use runner::{
    evidence_recall, raw_prompt, run_temporal_bench, BenchConfig, BenchReport, ConfigSnapshot, QuestionRecord,
    RawTrace, RunRecord, SystemId, SystemTrace, DEFAULT_CHECKPOINTS, DEFAULT_RAW_BUDGET,
};

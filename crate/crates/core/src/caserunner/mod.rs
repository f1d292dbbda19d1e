//! Case files, the corpus runner and its reports.

mod case;
pub mod expr;
mod run;

pub use case::{
    load_case, parse_case, Case, CaseKind, ConeCheck, ConeData, CurveData, Expectation, Family, Flags, Relation,
    SurfaceData, SCHEMA_VERSION,
};
pub use run::{
    compute, load_corpus, numeric_oracle, render_table, run_case, run_corpus, CaseReport, Computed, CorpusReport,
    LoadFailure, OracleReport, RunOptions, Verdict, ORACLE_GRID, ORACLE_TOLERANCE,
};

//! Session data analysis: net values, truth-telling, welfare, rank tests
//! and least squares.

pub mod ols;
pub mod report;
pub mod session;
pub mod stats;
pub mod synthetic;

pub use ols::{ols_fit, Design, OlsFit, SeKind};
pub use session::{
    classify_truthful, load_session, net_values, read_session, truth_rate_table, welfare_total,
    write_session, NetValueRecord, NetValueSummary, RankMean, Scope, SubjectRecord, TruthRate,
    TruthReport, WelfareReport, GOODS,
};
pub use stats::{jonckheere_terpstra, wilcoxon_ranksum, Alternative, JtResult, RankSumResult};

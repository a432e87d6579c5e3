//! The combined analysis report and its CSV tables.

use std::io::Write;

use serde::Serialize;

use crate::analysis::ols::{ols_fit, Design, OlsFit, SeKind};
use crate::analysis::session::{
    classify_truthful, net_values, truth_rate_table, welfare_total, RankMean, Scope, SubjectRecord,
    TruthReport, WelfareReport, GOODS, TREATMENTS,
};
use crate::analysis::stats::{jonckheere_terpstra, wilcoxon_ranksum, Alternative, JtResult, RankSumResult};
use crate::error::{Error, Result};
use crate::mechanisms::MechanismKind;
use crate::money::Cents;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetValueByTreatment {
    pub treatment: Option<MechanismKind>,
    pub by_rank: Vec<RankMean>,
    /// Net value decreasing in received rank.
    pub jonckheere_terpstra: Option<JtResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruthComparison {
    pub tolerance: Cents,
    pub scope: Scope,
    /// Truthful indicator, RSD against Boston.
    pub ranksum: Option<RankSumResult>,
}

/// One regression column, or why it could not be estimated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionColumn {
    pub label: String,
    pub treatment: Option<MechanismKind>,
    pub fit: Option<OlsFit>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub records: usize,
    pub tolerances: Vec<Cents>,
    pub net_value: Vec<NetValueByTreatment>,
    pub truth: TruthReport,
    pub truth_tests: Vec<TruthComparison>,
    pub welfare: WelfareReport,
    /// Group welfare totals, RSD against Boston.
    pub welfare_test: Option<RankSumResult>,
    pub table1: Vec<RegressionColumn>,
    pub table5: Vec<RegressionColumn>,
}

fn subset(records: &[SubjectRecord], t: Option<MechanismKind>) -> Vec<SubjectRecord> {
    records
        .iter()
        .filter(|r| t.is_none_or(|k| r.treatment == k))
        .cloned()
        .collect()
}

fn nv_dollars(records: &[SubjectRecord]) -> Vec<f64> {
    records.iter().map(|r| r.net_value().as_dollars()).collect()
}

/// Regressors of the net-value table: received rank, optionally with the
/// Phase I value of the received good and the subject covariates.
pub fn table1_design(records: &[SubjectRecord], controls: bool) -> Design {
    let mut d = Design::intercept(records.len());
    d.push_column("rank", records.iter().map(|r| r.rank_received() as f64));
    if controls {
        d.push_column("initial value", records.iter().map(|r| r.phase1_value[r.good_received].as_dollars()));
        d.push_column("risk aversion", records.iter().map(|r| r.risk_row as f64));
        d.push_column("loss aversion", records.iter().map(|r| r.loss_row as f64));
        d.push_column("CRT score", records.iter().map(|r| r.crt as f64));
        d.push_column("female", records.iter().map(|r| f64::from(u8::from(r.female))));
        d.push_column("Phase I order", records.iter().map(|r| r.phase1_order as f64));
        d.push_column("practice", records.iter().map(|r| r.practice as f64));
        d.push_column("truthful", records.iter().map(|r| f64::from(u8::from(r.ranked_above_implied()))));
    }
    d
}

/// Received-rank dummies (rank 1 omitted), received-good dummies (mug
/// omitted), initial value and risk aversion.
pub fn table5_design(records: &[SubjectRecord]) -> Design {
    let mut d = Design::intercept(records.len());
    for (rank, name) in [(2, "ranked 2nd"), (3, "ranked 3rd"), (4, "ranked 4th"), (5, "ranked 5th")] {
        d.push_column(name, records.iter().map(|r| f64::from(u8::from(r.rank_received() == rank))));
    }
    for (g, name) in GOODS.iter().enumerate() {
        if *name == "mug" {
            continue;
        }
        d.push_column(*name, records.iter().map(|r| f64::from(u8::from(r.good_received == g))));
    }
    d.push_column("initial value", records.iter().map(|r| r.phase1_value[r.good_received].as_dollars()));
    d.push_column("risk aversion", records.iter().map(|r| r.risk_row as f64));
    d
}

fn column(label: &str, treatment: Option<MechanismKind>, y: &[f64], d: &Design, se: SeKind) -> RegressionColumn {
    let (fit, error) = match ols_fit(y, d, se) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    RegressionColumn {
        label: label.into(),
        treatment,
        fit,
        error,
    }
}

pub fn analyze(records: &[SubjectRecord], tolerances: &[Cents], se: SeKind) -> AnalysisReport {
    let net_value = TREATMENTS
        .iter()
        .map(|&t| {
            let sub = subset(records, t);
            let nv = net_values(&sub);
            NetValueByTreatment {
                treatment: t,
                jonckheere_terpstra: jonckheere_terpstra(&nv.groups(), Alternative::Decreasing).ok(),
                by_rank: nv.by_rank,
            }
        })
        .collect();
    let rsd = subset(records, Some(MechanismKind::Rsd));
    let boston = subset(records, Some(MechanismKind::Boston));
    let mut truth_tests = Vec::new();
    for &tolerance in tolerances {
        for scope in Scope::ALL {
            let ind = |rs: &[SubjectRecord]| -> Vec<f64> {
                rs.iter()
                    .map(|r| f64::from(u8::from(classify_truthful(r, tolerance, scope))))
                    .collect()
            };
            truth_tests.push(TruthComparison {
                tolerance,
                scope,
                ranksum: wilcoxon_ranksum(&ind(&rsd), &ind(&boston)).ok(),
            });
        }
    }
    let welfare = welfare_total(records);
    let totals = |k: MechanismKind| -> Vec<f64> {
        welfare
            .groups
            .iter()
            .filter(|g| g.treatment == k)
            .map(|g| g.total.as_dollars())
            .collect()
    };
    let welfare_test = wilcoxon_ranksum(&totals(MechanismKind::Rsd), &totals(MechanismKind::Boston)).ok();

    let mut table1 = Vec::new();
    let mut table5 = Vec::new();
    let specs: [(&str, Option<MechanismKind>, bool); 5] = [
        ("(1)", Some(MechanismKind::Rsd), false),
        ("(2)", Some(MechanismKind::Rsd), true),
        ("(3)", Some(MechanismKind::Boston), false),
        ("(4)", Some(MechanismKind::Boston), true),
        ("(5)", None, true),
    ];
    for (label, t, controls) in specs {
        let sub = subset(records, t);
        table1.push(column(label, t, &nv_dollars(&sub), &table1_design(&sub, controls), se));
    }
    for (label, t) in [("(1)", Some(MechanismKind::Rsd)), ("(2)", Some(MechanismKind::Boston)), ("(3)", None)] {
        let sub = subset(records, t);
        table5.push(column(label, t, &nv_dollars(&sub), &table5_design(&sub), se));
    }
    AnalysisReport {
        records: records.len(),
        tolerances: tolerances.to_vec(),
        net_value,
        truth: truth_rate_table(records, tolerances),
        truth_tests,
        welfare,
        welfare_test,
        table1,
        table5,
    }
}

fn treatment_name(t: Option<MechanismKind>) -> &'static str {
    t.map_or("all", MechanismKind::name)
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.4}")).unwrap_or_default()
}

fn csv_err(e: std::io::Error) -> Error {
    Error::io("<table>", e)
}

/// Net values by received rank, one row per treatment and rank.
pub fn write_net_value_csv<W: Write>(w: W, report: &AnalysisReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["treatment", "rank", "count", "mean", "sd", "ci95_lo", "ci95_hi"])?;
    for t in &report.net_value {
        for m in &t.by_rank {
            w.write_record([
                treatment_name(t.treatment).to_string(),
                m.rank.to_string(),
                m.count.to_string(),
                opt(m.mean),
                opt(m.sd),
                opt(m.ci95.map(|c| c.0)),
                opt(m.ci95.map(|c| c.1)),
            ])?;
        }
    }
    w.flush().map_err(csv_err)
}

/// Truth-telling rates: rows are tolerance and scope, columns treatments.
pub fn write_truth_csv<W: Write>(w: W, report: &AnalysisReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["tolerance", "scope", "rsd", "boston", "all"])?;
    for &tol in &report.tolerances {
        for scope in [Scope::All, Scope::Top1, Scope::Top2] {
            let mut row = vec![tol.to_string(), format!("{scope:?}").to_lowercase()];
            for t in TREATMENTS {
                row.push(opt(report.truth.get(t, tol, scope).and_then(|r| r.rate)));
            }
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(csv_err)
}

/// Mean group welfare per treatment.
pub fn write_welfare_csv<W: Write>(w: W, report: &AnalysisReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["rsd", "boston", "all"])?;
    w.write_record(report.welfare.by_treatment.iter().map(|t| opt(t.mean)))?;
    w.flush().map_err(csv_err)
}

/// A regression table: one row per coefficient (estimate with stars) and
/// its standard error, then observations and R-squared.
pub fn write_regression_csv<W: Write>(w: W, columns: &[RegressionColumn]) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    let mut names: Vec<String> = Vec::new();
    for c in columns {
        for coef in c.fit.iter().flat_map(|f| &f.coefficients) {
            if !names.contains(&coef.name) {
                names.push(coef.name.clone());
            }
        }
    }
    // Intercept last, as in the usual layout.
    if let Some(i) = names.iter().position(|n| n == "_cons") {
        let c = names.remove(i);
        names.push(c);
    }
    let mut header = vec!["term".to_string()];
    header.extend(columns.iter().map(|c| format!("{} {}", c.label, treatment_name(c.treatment))));
    w.write_record(&header)?;
    for name in &names {
        let mut est = vec![name.clone()];
        let mut se = vec![String::new()];
        for c in columns {
            match c.fit.as_ref().and_then(|f| f.coef(name)) {
                Some(k) => {
                    est.push(format!("{:.4}{}", k.estimate, k.stars));
                    se.push(format!("({:.4})", k.se));
                }
                None => {
                    est.push(String::new());
                    se.push(String::new());
                }
            }
        }
        w.write_record(&est)?;
        w.write_record(&se)?;
    }
    let mut obs = vec!["No. of Obs.".to_string()];
    let mut r2 = vec!["R-Squared".to_string()];
    for c in columns {
        obs.push(c.fit.as_ref().map(|f| f.n.to_string()).unwrap_or_default());
        r2.push(c.fit.as_ref().map(|f| format!("{:.2}", f.r_squared)).unwrap_or_default());
    }
    w.write_record(&obs)?;
    w.write_record(&r2)?;
    w.flush().map_err(csv_err)
}

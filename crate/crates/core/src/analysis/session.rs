//! Session records and the per-subject outcome measures.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::market::RankList;
use crate::mechanisms::MechanismKind;
use crate::money::{exact_to_dollars, Cents, Exact};

/// Goods in column order. Ids are positions in this list.
pub const GOODS: [&str; 5] = ["backpack", "bottle", "notebook", "mug", "pens"];

pub const HEADER: [&str; 21] = [
    "subject_id",
    "treatment",
    "group_id",
    "v_backpack",
    "v_bottle",
    "v_notebook",
    "v_mug",
    "v_pens",
    "rank1",
    "rank2",
    "rank3",
    "rank4",
    "rank5",
    "good_received",
    "phase2_value",
    "phase1_order",
    "risk_row",
    "loss_row",
    "crt",
    "female",
    "practice",
];

/// Subjects per matching group.
pub const GROUP_SIZE: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubjectRecord {
    pub subject_id: String,
    pub treatment: MechanismKind,
    pub group_id: String,
    /// Phase I value of each good, indexed by [`GOODS`] position.
    pub phase1_value: [Cents; 5],
    pub report: RankList,
    pub good_received: usize,
    pub phase2_value: Cents,
    /// Position (1..=20) at which the received good was valued in Phase I.
    pub phase1_order: u8,
    pub risk_row: u8,
    pub loss_row: u8,
    pub crt: u8,
    pub female: bool,
    pub practice: u32,
}

impl SubjectRecord {
    /// 1-based rank of the received good in the submitted list.
    pub fn rank_received(&self) -> usize {
        self.report.rank_of(self.good_received).expect("validated on construction")
    }

    pub fn net_value(&self) -> Cents {
        self.phase2_value - self.phase1_value[self.good_received]
    }

    /// Rank the received good would have under Phase I values: one plus the
    /// number of goods valued strictly higher.
    pub fn implied_rank(&self) -> usize {
        let v = self.phase1_value[self.good_received];
        1 + self.phase1_value.iter().filter(|&&w| w > v).count()
    }

    /// The received good was listed strictly higher than its Phase I rank.
    pub fn ranked_above_implied(&self) -> bool {
        self.rank_received() < self.implied_rank()
    }
}

fn good_id(cell: &str) -> Option<usize> {
    let c = cell.trim();
    GOODS
        .iter()
        .position(|g| g.eq_ignore_ascii_case(c))
        .or_else(|| c.parse::<usize>().ok().filter(|&i| i < GOODS.len()))
}

fn parse_record(rec: &csv::StringRecord) -> std::result::Result<SubjectRecord, String> {
    if rec.len() != HEADER.len() {
        return Err(format!("expected {} fields, found {}", HEADER.len(), rec.len()));
    }
    let cell = |i: usize| rec.get(i).unwrap_or("").trim();
    let money = |i: usize| -> std::result::Result<Cents, String> {
        let c: Cents = cell(i)
            .parse()
            .map_err(|_| format!("{}: not a dollar amount: {:?}", HEADER[i], cell(i)))?;
        if c < Cents::ZERO {
            return Err(format!("{}: negative value {c}", HEADER[i]));
        }
        Ok(c)
    };
    let int = |i: usize, lo: u32, hi: u32| -> std::result::Result<u32, String> {
        let v: u32 = cell(i)
            .parse()
            .map_err(|_| format!("{}: not an integer: {:?}", HEADER[i], cell(i)))?;
        if !(lo..=hi).contains(&v) {
            return Err(format!("{}: {v} outside {lo}..={hi}", HEADER[i]));
        }
        Ok(v)
    };
    let subject_id = cell(0).to_string();
    if subject_id.is_empty() {
        return Err("subject_id is empty".into());
    }
    let treatment: MechanismKind = cell(1)
        .parse()
        .map_err(|_| format!("treatment: expected rsd or boston, got {:?}", cell(1)))?;
    let mut phase1_value = [Cents::ZERO; 5];
    for (g, v) in phase1_value.iter_mut().enumerate() {
        *v = money(3 + g)?;
    }
    let order = (8..13)
        .map(|i| good_id(cell(i)).ok_or_else(|| format!("{}: unknown good {:?}", HEADER[i], cell(i))))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let report = RankList::new(order).map_err(|_| "rank1..rank5 are not a permutation of the five goods".to_string())?;
    let good_received =
        good_id(cell(13)).ok_or_else(|| format!("good_received: unknown good {:?}", cell(13)))?;
    Ok(SubjectRecord {
        subject_id,
        treatment,
        group_id: cell(2).to_string(),
        phase1_value,
        report,
        good_received,
        phase2_value: money(14)?,
        phase1_order: int(15, 1, 20)? as u8,
        risk_row: int(16, 1, 50)? as u8,
        loss_row: int(17, 1, 50)? as u8,
        crt: int(18, 0, 3)? as u8,
        female: int(19, 0, 1)? == 1,
        practice: int(20, 0, u32::MAX)?,
    })
}

/// Reads session rows. Errors name the file and the 1-based line (the
/// header is line 1).
pub fn read_session<R: Read>(reader: R, file: &str) -> Result<Vec<SubjectRecord>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::data(file, 1, e.to_string()))?.clone();
    let got: Vec<&str> = header.iter().map(str::trim).collect();
    if got != HEADER {
        let missing: Vec<&str> = HEADER.iter().copied().filter(|h| !got.contains(h)).collect();
        let msg = if missing.is_empty() {
            format!("header must be exactly {}", HEADER.join(","))
        } else {
            format!("missing column(s): {}", missing.join(", "))
        };
        return Err(Error::data(file, 1, msg));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::data(file, line, e.to_string()))?;
        out.push(parse_record(&rec).map_err(|m| Error::data(file, line, m))?);
    }
    Ok(out)
}

pub fn load_session(path: impl AsRef<Path>) -> Result<Vec<SubjectRecord>> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_session(f, &path.display().to_string())
}

pub fn write_session<W: Write>(writer: W, records: &[SubjectRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(HEADER)?;
    for r in records {
        let mut row: Vec<String> = vec![
            r.subject_id.clone(),
            r.treatment.to_string(),
            r.group_id.clone(),
        ];
        row.extend(r.phase1_value.iter().map(Cents::to_string));
        row.extend(r.report.order().iter().map(|&g| GOODS[g].to_string()));
        row.push(GOODS[r.good_received].to_string());
        row.push(r.phase2_value.to_string());
        row.extend([
            r.phase1_order.to_string(),
            r.risk_row.to_string(),
            r.loss_row.to_string(),
            r.crt.to_string(),
            u8::from(r.female).to_string(),
            r.practice.to_string(),
        ]);
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<session>", e))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NetValueRecord {
    pub subject_id: String,
    pub treatment: MechanismKind,
    pub rank_received: usize,
    pub net_value: Cents,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankMean {
    pub rank: usize,
    pub count: usize,
    /// Mean net value in dollars.
    pub mean: Option<f64>,
    #[serde(skip)]
    pub mean_exact: Option<Exact>,
    pub sd: Option<f64>,
    /// Two-sided 95% t interval for the mean.
    pub ci95: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetValueSummary {
    pub records: Vec<NetValueRecord>,
    pub by_rank: Vec<RankMean>,
}

impl NetValueSummary {
    /// Net values in dollars grouped by received rank 1..=5.
    pub fn groups(&self) -> Vec<Vec<f64>> {
        let mut g = vec![Vec::new(); GOODS.len()];
        for r in &self.records {
            g[r.rank_received - 1].push(r.net_value.as_dollars());
        }
        g
    }
}

pub fn net_values(records: &[SubjectRecord]) -> NetValueSummary {
    let nv: Vec<NetValueRecord> = records
        .iter()
        .map(|r| NetValueRecord {
            subject_id: r.subject_id.clone(),
            treatment: r.treatment,
            rank_received: r.rank_received(),
            net_value: r.net_value(),
        })
        .collect();
    let by_rank = (1..=GOODS.len())
        .map(|rank| {
            let xs: Vec<i64> = nv.iter().filter(|r| r.rank_received == rank).map(|r| r.net_value.0).collect();
            rank_mean(rank, &xs)
        })
        .collect();
    NetValueSummary {
        records: nv,
        by_rank,
    }
}

fn rank_mean(rank: usize, cents: &[i64]) -> RankMean {
    let count = cents.len();
    if count == 0 {
        return RankMean {
            rank,
            count,
            mean: None,
            mean_exact: None,
            sd: None,
            ci95: None,
        };
    }
    let sum: i128 = cents.iter().map(|&c| c as i128).sum();
    let mean_exact = Exact::new(sum, count as i128);
    let mean = exact_to_dollars(&mean_exact);
    let (sd, ci95) = if count < 2 {
        (None, None)
    } else {
        let k = count as f64;
        let ss: f64 = cents.iter().map(|&c| (c as f64 / 100.0 - mean).powi(2)).sum();
        let sd = (ss / (k - 1.0)).sqrt();
        let t = StudentsT::new(0.0, 1.0, k - 1.0).expect("df > 0").inverse_cdf(0.975);
        let half = t * sd / k.sqrt();
        (Some(sd), Some((mean - half, mean + half)))
    };
    RankMean {
        rank,
        count,
        mean: Some(mean),
        mean_exact: Some(mean_exact),
        sd,
        ci95,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    All,
    Top2,
    Top1,
}

impl Scope {
    pub const ALL: [Scope; 3] = [Scope::All, Scope::Top1, Scope::Top2];

    /// Number of leading list positions whose goods are checked against
    /// everything listed below them.
    fn depth(self) -> usize {
        match self {
            Scope::All => usize::MAX,
            Scope::Top1 => 1,
            Scope::Top2 => 2,
        }
    }
}

/// No good among the first `scope` positions is listed above a good whose
/// Phase I value exceeds it by more than `tolerance`. Gaps within the
/// tolerance, ties included, may appear in either order.
pub fn classify_truthful(record: &SubjectRecord, tolerance: Cents, scope: Scope) -> bool {
    let order = record.report.order();
    let v = &record.phase1_value;
    let depth = scope.depth().min(order.len());
    (0..depth).all(|p| {
        order[p + 1..]
            .iter()
            .all(|&lower| v[lower] - v[order[p]] <= tolerance)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruthRate {
    /// `None` pools both treatments.
    pub treatment: Option<MechanismKind>,
    pub tolerance: Cents,
    pub scope: Scope,
    pub n: usize,
    pub truthful: usize,
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruthReport {
    pub rates: Vec<TruthRate>,
}

impl TruthReport {
    pub fn get(&self, treatment: Option<MechanismKind>, tolerance: Cents, scope: Scope) -> Option<&TruthRate> {
        self.rates
            .iter()
            .find(|r| r.treatment == treatment && r.tolerance == tolerance && r.scope == scope)
    }
}

pub const TREATMENTS: [Option<MechanismKind>; 3] =
    [Some(MechanismKind::Rsd), Some(MechanismKind::Boston), None];

pub fn truth_rate_table(records: &[SubjectRecord], tolerances: &[Cents]) -> TruthReport {
    let mut rates = Vec::new();
    for &tolerance in tolerances {
        for scope in Scope::ALL {
            for treatment in TREATMENTS {
                let subset: Vec<&SubjectRecord> = records
                    .iter()
                    .filter(|r| treatment.is_none_or(|t| r.treatment == t))
                    .collect();
                let truthful = subset
                    .iter()
                    .filter(|r| classify_truthful(r, tolerance, scope))
                    .count();
                rates.push(TruthRate {
                    treatment,
                    tolerance,
                    scope,
                    n: subset.len(),
                    truthful,
                    rate: (!subset.is_empty()).then(|| truthful as f64 / subset.len() as f64),
                });
            }
        }
    }
    TruthReport { rates }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupWelfare {
    pub treatment: MechanismKind,
    pub group_id: String,
    pub size: usize,
    pub total: Cents,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreatmentWelfare {
    pub treatment: Option<MechanismKind>,
    pub groups: usize,
    pub mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WelfareReport {
    /// Complete groups only.
    pub groups: Vec<GroupWelfare>,
    pub excluded: Vec<GroupWelfare>,
    pub by_treatment: Vec<TreatmentWelfare>,
}

/// Sums Phase II values within each group of five and averages the sums per
/// treatment. Groups of any other size are excluded with a warning.
pub fn welfare_total(records: &[SubjectRecord]) -> WelfareReport {
    let mut sums: BTreeMap<(MechanismKind, &str), (usize, Cents)> = BTreeMap::new();
    for r in records {
        let e = sums.entry((r.treatment, r.group_id.as_str())).or_default();
        e.0 += 1;
        e.1 += r.phase2_value;
    }
    let mut groups = Vec::new();
    let mut excluded = Vec::new();
    for ((treatment, group_id), (size, total)) in sums {
        let g = GroupWelfare {
            treatment,
            group_id: group_id.to_string(),
            size,
            total,
        };
        if size == GROUP_SIZE {
            groups.push(g);
        } else {
            log::warn!(
                "excluding {treatment} group {group_id:?} from welfare: {size} members, expected {GROUP_SIZE}"
            );
            excluded.push(g);
        }
    }
    let by_treatment = TREATMENTS
        .iter()
        .map(|&t| {
            let sel: Vec<&GroupWelfare> =
                groups.iter().filter(|g| t.is_none_or(|k| g.treatment == k)).collect();
            let total: i64 = sel.iter().map(|g| g.total.0).sum();
            TreatmentWelfare {
                treatment: t,
                groups: sel.len(),
                mean: (!sel.is_empty()).then(|| total as f64 / sel.len() as f64 / 100.0),
            }
        })
        .collect();
    WelfareReport {
        groups,
        excluded,
        by_treatment,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(x: f64) -> Cents {
        Cents::from_dollars_f64(x)
    }

    pub(crate) fn record(values: [f64; 5], order: [usize; 5], received: usize, phase2: f64) -> SubjectRecord {
        SubjectRecord {
            subject_id: "s".into(),
            treatment: MechanismKind::Rsd,
            group_id: "g".into(),
            phase1_value: values.map(d),
            report: RankList::new(order.to_vec()).unwrap(),
            good_received: received,
            phase2_value: d(phase2),
            phase1_order: 1,
            risk_row: 10,
            loss_row: 10,
            crt: 1,
            female: false,
            practice: 2,
        }
    }

    const TABLE_VALUES: [f64; 5] = [28.24, 22.56, 9.11, 6.53, 5.33];

    #[test]
    fn truthful_examples() {
        let truthful = record(TABLE_VALUES, [0, 1, 2, 3, 4], 0, 30.0);
        for scope in Scope::ALL {
            assert!(classify_truthful(&truthful, Cents::ZERO, scope));
        }
        let swapped_top = record(TABLE_VALUES, [1, 0, 2, 3, 4], 0, 30.0);
        assert!(!classify_truthful(&swapped_top, d(2.0), Scope::All));
        assert!(!classify_truthful(&swapped_top, d(2.0), Scope::Top1));
        let swapped_low = record(TABLE_VALUES, [0, 1, 2, 4, 3], 0, 30.0);
        assert!(classify_truthful(&swapped_low, d(2.0), Scope::All));
        assert!(!classify_truthful(&swapped_low, Cents::ZERO, Scope::All));
        assert!(classify_truthful(&swapped_low, Cents::ZERO, Scope::Top2));
    }

    #[test]
    fn net_value_arithmetic() {
        let r = record([14.5, 1.0, 1.0, 1.0, 1.0], [0, 1, 2, 3, 4], 0, 17.0);
        assert_eq!(r.net_value(), d(2.5));
        let same = record([14.5, 1.0, 1.0, 1.0, 1.0], [0, 1, 2, 3, 4], 0, 14.5);
        assert_eq!(same.net_value(), Cents::ZERO);
    }

    #[test]
    fn implied_rank_counts_strictly_higher() {
        let r = record([5.0, 5.0, 3.0, 2.0, 1.0], [2, 1, 0, 3, 4], 1, 5.0);
        assert_eq!(r.implied_rank(), 1);
        assert_eq!(r.rank_received(), 2);
        assert!(!r.ranked_above_implied());
        let up = record([5.0, 4.0, 3.0, 2.0, 1.0], [2, 1, 0, 3, 4], 2, 5.0);
        assert!(up.ranked_above_implied());
    }

    #[test]
    fn welfare_groups() {
        let mut rs: Vec<SubjectRecord> = [10.0, 20.0, 30.0, 20.0, 10.0]
            .iter()
            .map(|&p| record(TABLE_VALUES, [0, 1, 2, 3, 4], 0, p))
            .collect();
        let mut stray = record(TABLE_VALUES, [0, 1, 2, 3, 4], 0, 99.0);
        stray.group_id = "h".into();
        rs.push(stray);
        let w = welfare_total(&rs);
        assert_eq!(w.groups.len(), 1);
        assert_eq!(w.groups[0].total, d(90.0));
        assert_eq!(w.excluded.len(), 1);
        assert_eq!(w.by_treatment[0].mean, Some(90.0));
        assert_eq!(w.by_treatment[1].mean, None);
    }

    #[test]
    fn truth_rates_half() {
        let rs = vec![
            record(TABLE_VALUES, [0, 1, 2, 3, 4], 0, 1.0),
            record(TABLE_VALUES, [4, 3, 2, 1, 0], 0, 1.0),
        ];
        let t = truth_rate_table(&rs, &[Cents::ZERO]);
        assert_eq!(t.get(None, Cents::ZERO, Scope::All).unwrap().rate, Some(0.5));
    }
}

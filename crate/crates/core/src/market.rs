//! Market primitives: goods, rank lists, the rankings-dependent bonus schedule,
//! matchings, and evaluated outcomes.
//!
//! An agent's utility from receiving good `x` that it listed at (1-based)
//! position `j` is `v[i][x] + rho(j)`. Ranks are 1-based everywhere; agent
//! and good ids are 0-based.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::money::Cents;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Good {
    pub id: usize,
    pub label: String,
}

/// One agent's submitted ordinal report, most-preferred good first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct RankList {
    order: Vec<usize>,
}

impl RankList {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        check_permutation(&order, "rank list")?;
        Ok(RankList { order })
    }

    /// The list `0, 1, ..., n-1`.
    pub fn identity(n: usize) -> Self {
        RankList {
            order: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Good listed at 1-based position `rank`.
    pub fn good_at(&self, rank: usize) -> Option<usize> {
        rank.checked_sub(1).and_then(|k| self.order.get(k).copied())
    }

    /// 1-based position of `good` in this list.
    pub fn rank_of(&self, good: usize) -> Option<usize> {
        self.order.iter().position(|&g| g == good).map(|k| k + 1)
    }
}

impl TryFrom<Vec<usize>> for RankList {
    type Error = Error;
    fn try_from(order: Vec<usize>) -> Result<Self> {
        RankList::new(order)
    }
}

impl From<RankList> for Vec<usize> {
    fn from(r: RankList) -> Vec<usize> {
        r.order
    }
}

/// Rankings-dependent utility `rho(1) >= rho(2) >= ... >= rho(n)`, in cents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Cents>", into = "Vec<Cents>")]
pub struct RhoSchedule {
    rho: Vec<Cents>,
}

impl RhoSchedule {
    pub fn new(rho: Vec<Cents>) -> Result<Self> {
        if rho.is_empty() {
            return Err(Error::argument("rho schedule is empty"));
        }
        if let Some(j) = rho.windows(2).position(|w| w[0] < w[1]) {
            return Err(Error::argument(format!(
                "rho schedule must be non-increasing: rho({}) = {} < rho({}) = {}",
                j + 1,
                rho[j],
                j + 2,
                rho[j + 1]
            )));
        }
        Ok(RhoSchedule { rho })
    }

    pub fn zeros(n: usize) -> Self {
        RhoSchedule {
            rho: vec![Cents::ZERO; n],
        }
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// `rho(rank)` for a 1-based rank.
    pub fn at(&self, rank: usize) -> Result<Cents> {
        rank.checked_sub(1)
            .and_then(|k| self.rho.get(k).copied())
            .ok_or_else(|| {
                Error::argument(format!("rank {rank} outside 1..={}", self.rho.len()))
            })
    }

    pub fn as_slice(&self) -> &[Cents] {
        &self.rho
    }

    /// Sum of `rho(j)` for `j` in `from..=to` (1-based, empty when `from > to`).
    pub fn sum_range(&self, from: usize, to: usize) -> Cents {
        if from > to || from == 0 {
            return Cents::ZERO;
        }
        self.rho[from - 1..to.min(self.rho.len())].iter().sum()
    }
}

impl TryFrom<Vec<Cents>> for RhoSchedule {
    type Error = Error;
    fn try_from(rho: Vec<Cents>) -> Result<Self> {
        RhoSchedule::new(rho)
    }
}

impl From<RhoSchedule> for Vec<Cents> {
    fn from(r: RhoSchedule) -> Vec<Cents> {
        r.rho
    }
}

/// Fundamental values `v[agent][good]`, square and non-negative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueMatrix {
    n: usize,
    data: Vec<Cents>,
}

impl ValueMatrix {
    pub fn new(rows: Vec<Vec<Cents>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::argument(format!(
                    "value matrix row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| v.0 < 0) {
                return Err(Error::argument(format!(
                    "value matrix row {i} has negative value {v}"
                )));
            }
            data.extend(row);
        }
        Ok(ValueMatrix { n, data })
    }

    /// Every agent values good `g` at `common[g]`.
    pub fn common(common: &[Cents]) -> Result<Self> {
        ValueMatrix::new(vec![common.to_vec(); common.len()])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, agent: usize, good: usize) -> Cents {
        self.data[agent * self.n + good]
    }

    pub fn row(&self, agent: usize) -> &[Cents] {
        &self.data[agent * self.n..(agent + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<Cents>> {
        self.data.chunks(self.n.max(1)).map(|r| r.to_vec()).collect()
    }
}

/// Game primitives: `n` agents, `n` goods, values and the rho schedule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MarketJson", into = "MarketJson")]
pub struct MarketInstance {
    goods: Vec<Good>,
    values: ValueMatrix,
    rho: RhoSchedule,
}

impl MarketInstance {
    pub fn new(labels: Vec<String>, values: ValueMatrix, rho: RhoSchedule) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::argument("market needs at least one good"));
        }
        if values.n() != n || rho.len() != n {
            return Err(Error::argument(format!(
                "inconsistent market dimensions: {n} goods, {}x{} values, {} rho entries",
                values.n(),
                values.n(),
                rho.len()
            )));
        }
        let goods = labels
            .into_iter()
            .enumerate()
            .map(|(id, label)| Good { id, label })
            .collect();
        Ok(MarketInstance { goods, values, rho })
    }

    /// Market whose goods are labelled `x1, x2, ...`.
    pub fn unlabelled(values: ValueMatrix, rho: RhoSchedule) -> Result<Self> {
        let labels = (1..=values.n()).map(|k| format!("x{k}")).collect();
        MarketInstance::new(labels, values, rho)
    }

    pub fn n(&self) -> usize {
        self.goods.len()
    }

    pub fn goods(&self) -> &[Good] {
        &self.goods
    }

    pub fn values(&self) -> &ValueMatrix {
        &self.values
    }

    pub fn rho(&self) -> &RhoSchedule {
        &self.rho
    }

    pub fn good_id(&self, label: &str) -> Option<usize> {
        self.goods
            .iter()
            .find(|g| g.label.eq_ignore_ascii_case(label))
            .map(|g| g.id)
    }

    /// Checks a report profile against this market.
    pub fn check_reports(&self, reports: &[RankList]) -> Result<()> {
        if reports.len() != self.n() {
            return Err(Error::argument(format!(
                "{} reports for a market with {} agents",
                reports.len(),
                self.n()
            )));
        }
        if let Some((i, r)) = reports.iter().enumerate().find(|(_, r)| r.len() != self.n()) {
            return Err(Error::argument(format!(
                "report of agent {i} lists {} goods, expected {}",
                r.len(),
                self.n()
            )));
        }
        Ok(())
    }
}

/// On-disk form: `{ "n": int, "goods": [labels], "values": [[cents]], "rho": [cents] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct MarketJson {
    n: usize,
    goods: Vec<String>,
    values: Vec<Vec<Cents>>,
    rho: Vec<Cents>,
}

impl TryFrom<MarketJson> for MarketInstance {
    type Error = Error;
    fn try_from(m: MarketJson) -> Result<Self> {
        if m.goods.len() != m.n {
            return Err(Error::argument(format!(
                "market declares n = {} but lists {} goods",
                m.n,
                m.goods.len()
            )));
        }
        MarketInstance::new(m.goods, ValueMatrix::new(m.values)?, RhoSchedule::new(m.rho)?)
    }
}

impl From<MarketInstance> for MarketJson {
    fn from(m: MarketInstance) -> MarketJson {
        MarketJson {
            n: m.n(),
            goods: m.goods.into_iter().map(|g| g.label).collect(),
            values: m.values.rows(),
            rho: m.rho.into(),
        }
    }
}

/// A bijection agent -> good.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Matching {
    assignment: Vec<usize>,
}

impl Matching {
    pub fn new(assignment: Vec<usize>) -> Result<Self> {
        check_permutation(&assignment, "matching")?;
        Ok(Matching { assignment })
    }

    pub(crate) fn from_trusted(assignment: Vec<usize>) -> Self {
        debug_assert!(check_permutation(&assignment, "matching").is_ok());
        Matching { assignment }
    }

    pub fn good_of(&self, agent: usize) -> Option<usize> {
        self.assignment.get(agent).copied()
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }
}

impl TryFrom<Vec<usize>> for Matching {
    type Error = Error;
    fn try_from(a: Vec<usize>) -> Result<Self> {
        Matching::new(a)
    }
}

impl From<Matching> for Vec<usize> {
    fn from(m: Matching) -> Vec<usize> {
        m.assignment
    }
}

/// A matching annotated with received ranks and utilities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub matching: Matching,
    pub received_rank: Vec<usize>,
    pub utility: Vec<Cents>,
    pub welfare_total: Cents,
}

impl Outcome {
    pub fn evaluate(matching: Matching, reports: &[RankList], market: &MarketInstance) -> Result<Self> {
        market.check_reports(reports)?;
        if matching.len() != market.n() {
            return Err(Error::argument("matching size differs from market size"));
        }
        let mut ranks = Vec::with_capacity(market.n());
        let mut utility_v = Vec::with_capacity(market.n());
        for agent in 0..market.n() {
            let rank = received_rank(&matching, reports, agent)?;
            let good = matching.assignment[agent];
            utility_v.push(utility(market.values().get(agent, good), rank, market.rho())?);
            ranks.push(rank);
        }
        let welfare_total = utility_v.iter().sum();
        Ok(Outcome {
            matching,
            received_rank: ranks,
            utility: utility_v,
            welfare_total,
        })
    }
}

/// Total welfare with its rankings-dependent and fundamental-value parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WelfareBreakdown {
    pub total: Cents,
    pub rho_component: Cents,
    pub value_component: Cents,
}

/// `v_ix + rho(rank_j)`.
pub fn utility(v_ix: Cents, rank_j: usize, rho: &RhoSchedule) -> Result<Cents> {
    Ok(v_ix + rho.at(rank_j)?)
}

/// 1-based position of the agent's assigned good in its own report.
pub fn received_rank(matching: &Matching, reports: &[RankList], agent: usize) -> Result<usize> {
    let good = matching
        .good_of(agent)
        .ok_or_else(|| Error::Inconsistency(format!("agent {agent} is unmatched")))?;
    let report = reports
        .get(agent)
        .ok_or_else(|| Error::argument(format!("no report for agent {agent}")))?;
    report.rank_of(good).ok_or_else(|| {
        Error::Inconsistency(format!("agent {agent} received good {good} missing from its report"))
    })
}

pub fn outcome_welfare(outcome: &Outcome, market: &MarketInstance) -> WelfareBreakdown {
    let rho_component = outcome
        .received_rank
        .iter()
        .map(|&r| market.rho().at(r).unwrap_or(Cents::ZERO))
        .sum();
    WelfareBreakdown {
        total: outcome.welfare_total,
        rho_component,
        value_component: outcome.welfare_total - rho_component,
    }
}

pub(crate) fn check_permutation(order: &[usize], what: &str) -> Result<()> {
    let n = order.len();
    let mut seen = vec![false; n];
    for &x in order {
        if x >= n {
            return Err(Error::argument(format!("{what}: id {x} out of range 0..{n}")));
        }
        if std::mem::replace(&mut seen[x], true) {
            return Err(Error::argument(format!("{what}: id {x} appears twice")));
        }
    }
    Ok(())
}

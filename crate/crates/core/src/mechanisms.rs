//! Random serial dictatorship and Boston (immediate acceptance) engines.
//!
//! Both engines take the same [`TieBreakOrder`]: for RSD it is the picking
//! order, for Boston position `k` carries tie-break number `k + 1` and lower
//! numbers win ties.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{check_permutation, MarketInstance, Matching, Outcome, RankList};
use crate::money::Exact;
use crate::rng;

/// Largest market for which expected utilities are enumerated over all orders.
pub const MAX_EXACT_N: usize = 8;
/// Largest market for which all matchings are enumerated in the efficiency check.
pub const MAX_PARETO_N: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MechanismKind {
    Rsd,
    Boston,
}

impl MechanismKind {
    pub const ALL: [MechanismKind; 2] = [MechanismKind::Rsd, MechanismKind::Boston];

    pub fn name(self) -> &'static str {
        match self {
            MechanismKind::Rsd => "rsd",
            MechanismKind::Boston => "boston",
        }
    }
}

impl fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MechanismKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rsd" | "sd" => Ok(MechanismKind::Rsd),
            "boston" | "ia" => Ok(MechanismKind::Boston),
            other => Err(Error::argument(format!("unknown mechanism {other:?} (rsd|boston)"))),
        }
    }
}

/// A permutation of agent ids; position 0 has the highest priority.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct TieBreakOrder {
    order: Vec<usize>,
}

impl TieBreakOrder {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        check_permutation(&order, "tie-break order")?;
        Ok(TieBreakOrder { order })
    }

    pub fn identity(n: usize) -> Self {
        TieBreakOrder {
            order: (0..n).collect(),
        }
    }

    /// Draws an order uniformly from stream `stream_id` of `seed`.
    pub fn draw(n: usize, seed: u64, stream_id: u64) -> Self {
        TieBreakOrder {
            order: rng::permutation(&mut rng::stream(seed, stream_id), n),
        }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

impl TryFrom<Vec<usize>> for TieBreakOrder {
    type Error = Error;
    fn try_from(order: Vec<usize>) -> Result<Self> {
        TieBreakOrder::new(order)
    }
}

impl From<TieBreakOrder> for Vec<usize> {
    fn from(o: TieBreakOrder) -> Vec<usize> {
        o.order
    }
}

/// Reusable scratch space so hot loops run without allocating.
#[derive(Debug, Clone)]
pub(crate) struct Engine {
    taken: Vec<bool>,
}

const UNASSIGNED: usize = usize::MAX;

impl Engine {
    pub(crate) fn new(n: usize) -> Self {
        Engine {
            taken: vec![false; n],
        }
    }

    /// Writes the good of each agent into `out`. Inputs must already be validated.
    pub(crate) fn run<L: AsRef<[usize]>>(
        &mut self,
        kind: MechanismKind,
        lists: &[L],
        order: &[usize],
        out: &mut [usize],
    ) {
        let n = order.len();
        if self.taken.len() != n {
            self.taken.resize(n, false);
        }
        self.taken.fill(false);
        out.fill(UNASSIGNED);
        match kind {
            MechanismKind::Rsd => {
                for &agent in order {
                    let good = lists[agent]
                        .as_ref()
                        .iter()
                        .copied()
                        .find(|&g| !self.taken[g])
                        .expect("a complete list always has a free good");
                    self.taken[good] = true;
                    out[agent] = good;
                }
            }
            MechanismKind::Boston => {
                let mut left = n;
                // Agents whose k-th choice is already gone pass this round.
                for round in 0..n {
                    for &agent in order {
                        if out[agent] != UNASSIGNED {
                            continue;
                        }
                        let good = lists[agent].as_ref()[round];
                        if !self.taken[good] {
                            self.taken[good] = true;
                            out[agent] = good;
                            left -= 1;
                        }
                    }
                    if left == 0 {
                        break;
                    }
                }
                debug_assert_eq!(left, 0);
            }
        }
    }
}

fn check_profile(reports: &[RankList], order: &TieBreakOrder) -> Result<()> {
    let n = reports.len();
    if order.len() != n {
        return Err(Error::argument(format!(
            "tie-break order has {} agents but {n} reports were given",
            order.len()
        )));
    }
    if let Some((i, r)) = reports.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::argument(format!(
            "report of agent {i} lists {} goods, expected {n}",
            r.len()
        )));
    }
    Ok(())
}

/// Runs `kind` on `reports` with a fixed tie-break order.
pub fn run(kind: MechanismKind, reports: &[RankList], order: &TieBreakOrder) -> Result<Matching> {
    check_profile(reports, order)?;
    let lists: Vec<&[usize]> = reports.iter().map(RankList::order).collect();
    let mut out = vec![UNASSIGNED; reports.len()];
    Engine::new(reports.len()).run(kind, &lists, order.as_slice(), &mut out);
    Ok(Matching::from_trusted(out))
}

/// Serial dictatorship: the agent at position `k` takes its best remaining good.
pub fn run_rsd(reports: &[RankList], order: &TieBreakOrder) -> Result<Matching> {
    run(MechanismKind::Rsd, reports, order)
}

/// Boston: round `k` assigns `k`-th choices among still-unassigned agents,
/// ties going to the earlier position in `order`.
pub fn run_boston(reports: &[RankList], order: &TieBreakOrder) -> Result<Matching> {
    run(MechanismKind::Boston, reports, order)
}

/// Draws a tie-break order from `(seed, MECHANISM_STREAM)`, runs the engine
/// and evaluates the outcome in `market`.
pub fn run_random(
    kind: MechanismKind,
    market: &MarketInstance,
    reports: &[RankList],
    seed: u64,
) -> Result<(Outcome, TieBreakOrder)> {
    market.check_reports(reports)?;
    let order = TieBreakOrder::draw(market.n(), seed, rng::MECHANISM_STREAM);
    let matching = run(kind, reports, &order)?;
    Ok((Outcome::evaluate(matching, reports, market)?, order))
}

/// All permutations of `0..n` in lexicographic order.
pub fn all_orders(n: usize) -> Vec<Vec<usize>> {
    (0..n).permutations(n).collect()
}

/// Per-agent expected utility (in cents) averaged over all `n!` tie-break orders.
pub fn exact_expected_utilities(
    kind: MechanismKind,
    reports: &[RankList],
    market: &MarketInstance,
) -> Result<Vec<Exact>> {
    market.check_reports(reports)?;
    let n = market.n();
    if n > MAX_EXACT_N {
        return Err(Error::Size {
            what: "exact expectation (use simulation instead)",
            limit: MAX_EXACT_N,
            n,
        });
    }
    let lists: Vec<&[usize]> = reports.iter().map(RankList::order).collect();
    // rank_utility[agent][good] = v + rho(rank of good in the agent's list)
    let mut rank_utility = vec![vec![0i128; n]; n];
    for (agent, list) in lists.iter().enumerate() {
        for (k, &good) in list.iter().enumerate() {
            rank_utility[agent][good] =
                (market.values().get(agent, good) + market.rho().as_slice()[k]).0 as i128;
        }
    }
    // Blocks by first-picked agent; integer sums make the reduction order irrelevant.
    let block_sums: Vec<Vec<i128>> = (0..n)
        .into_par_iter()
        .map(|first| {
            let mut engine = Engine::new(n);
            let mut out = vec![UNASSIGNED; n];
            let mut sums = vec![0i128; n];
            let rest: Vec<usize> = (0..n).filter(|&a| a != first).collect();
            let mut order = Vec::with_capacity(n);
            for tail in rest.iter().copied().permutations(n - 1) {
                order.clear();
                order.push(first);
                order.extend(tail);
                engine.run(kind, &lists, &order, &mut out);
                for agent in 0..n {
                    sums[agent] += rank_utility[agent][out[agent]];
                }
            }
            sums
        })
        .collect();
    let count: i128 = (1..=n as i128).product();
    Ok((0..n)
        .map(|agent| {
            let total: i128 = block_sums.iter().map(|b| b[agent]).sum();
            Exact::new(total, count)
        })
        .collect())
}

/// True iff no other matching makes some agent strictly better off (by its
/// own report) without making another agent worse off.
pub fn is_pareto_efficient(matching: &Matching, reports: &[RankList]) -> Result<bool> {
    let n = reports.len();
    if matching.len() != n {
        return Err(Error::argument("matching size differs from number of reports"));
    }
    if n > MAX_PARETO_N {
        return Err(Error::Size {
            what: "Pareto efficiency check",
            limit: MAX_PARETO_N,
            n,
        });
    }
    let current: Vec<usize> = (0..n)
        .map(|a| crate::market::received_rank(matching, reports, a))
        .collect::<Result<_>>()?;
    let dominated = (0..n).permutations(n).any(|alt| {
        let mut strict = false;
        for agent in 0..n {
            let r = reports[agent].rank_of(alt[agent]).expect("complete list");
            if r > current[agent] {
                return false;
            }
            strict |= r < current[agent];
        }
        strict
    });
    Ok(!dominated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{RhoSchedule, ValueMatrix};
    use crate::money::Cents;

    fn lists(v: &[&[usize]]) -> Vec<RankList> {
        v.iter().map(|l| RankList::new(l.to_vec()).unwrap()).collect()
    }

    // Goods: 0 Pizza, 1 Chips, 2 Soda, 3 Pretzels. Agents: 0 Ann, 1 Bob, 2 Carol, 3 Dave.
    #[test]
    fn rsd_worked_example() {
        let reports = lists(&[&[1, 0, 2, 3], &[0, 1, 2, 3], &[0, 3, 1, 2], &[3, 2, 1, 0]]);
        let order = TieBreakOrder::new(vec![1, 2, 3, 0]).unwrap();
        let m = run_rsd(&reports, &order).unwrap();
        assert_eq!(m.assignment(), &[1, 0, 3, 2]);
    }

    #[test]
    fn boston_worked_example() {
        let reports = lists(&[&[0, 3, 1, 2], &[0, 1, 2, 3], &[0, 1, 3, 2], &[3, 2, 1, 0]]);
        let order = TieBreakOrder::new(vec![1, 0, 2, 3]).unwrap();
        let m = run_boston(&reports, &order).unwrap();
        assert_eq!(m.assignment(), &[2, 0, 1, 3]);
        // Ann received Soda, her fourth choice.
        assert_eq!(crate::market::received_rank(&m, &reports, 0).unwrap(), 4);
    }

    #[test]
    fn distinct_first_choices_are_honoured() {
        let reports = lists(&[&[2, 0, 1], &[0, 1, 2], &[1, 2, 0]]);
        for order in all_orders(3) {
            let o = TieBreakOrder::new(order).unwrap();
            for kind in MechanismKind::ALL {
                let m = run(kind, &reports, &o).unwrap();
                assert_eq!(m.assignment(), &[2, 0, 1]);
            }
        }
    }

    #[test]
    fn identical_lists_follow_the_order() {
        let reports = vec![RankList::new(vec![2, 0, 1, 3]).unwrap(); 4];
        let o = TieBreakOrder::new(vec![3, 1, 0, 2]).unwrap();
        let m = run_rsd(&reports, &o).unwrap();
        for (k, &agent) in o.as_slice().iter().enumerate() {
            assert_eq!(m.good_of(agent), reports[0].good_at(k + 1));
        }
    }

    #[test]
    fn malformed_order_is_rejected() {
        let reports = lists(&[&[0, 1], &[1, 0]]);
        assert!(TieBreakOrder::new(vec![0, 0]).is_err());
        let short = TieBreakOrder::new(vec![0]).unwrap();
        assert!(matches!(run_rsd(&reports, &short), Err(Error::Argument(_))));
    }

    #[test]
    fn single_agent_market() {
        let market = MarketInstance::unlabelled(
            ValueMatrix::new(vec![vec![Cents(500)]]).unwrap(),
            RhoSchedule::zeros(1),
        )
        .unwrap();
        let reports = lists(&[&[0]]);
        for kind in MechanismKind::ALL {
            let (o, _) = run_random(kind, &market, &reports, 11).unwrap();
            assert_eq!(o.matching.assignment(), &[0]);
            let eu = exact_expected_utilities(kind, &reports, &market).unwrap();
            assert_eq!(eu, vec![Exact::from_integer(500)]);
        }
    }

    #[test]
    fn run_random_is_deterministic() {
        let market = MarketInstance::unlabelled(
            ValueMatrix::common(&[Cents(100), Cents(70), Cents(0)]).unwrap(),
            RhoSchedule::new(vec![Cents(10), Cents(0), Cents(0)]).unwrap(),
        )
        .unwrap();
        let reports = vec![RankList::identity(3); 3];
        for kind in MechanismKind::ALL {
            assert_eq!(
                run_random(kind, &market, &reports, 99).unwrap(),
                run_random(kind, &market, &reports, 99).unwrap()
            );
        }
    }

    #[test]
    fn exact_eu_size_guard() {
        let n = 9;
        let market = MarketInstance::unlabelled(
            ValueMatrix::common(&vec![Cents(1); n]).unwrap(),
            RhoSchedule::zeros(n),
        )
        .unwrap();
        let reports = vec![RankList::identity(n); n];
        assert!(matches!(
            exact_expected_utilities(MechanismKind::Rsd, &reports, &market),
            Err(Error::Size { .. })
        ));
    }

    #[test]
    fn pareto_examples() {
        let reports = lists(&[&[1, 0, 2, 3], &[0, 1, 2, 3], &[0, 3, 1, 2], &[3, 2, 1, 0]]);
        let m = run_rsd(&reports, &TieBreakOrder::new(vec![1, 2, 3, 0]).unwrap()).unwrap();
        assert!(is_pareto_efficient(&m, &reports).unwrap());

        let firsts = lists(&[&[0, 1, 2], &[1, 0, 2], &[2, 0, 1]]);
        assert!(is_pareto_efficient(&Matching::new(vec![0, 1, 2]).unwrap(), &firsts).unwrap());

        // Each holds the other's first choice and ranks its own good last.
        let swap = lists(&[&[1, 0], &[0, 1]]);
        assert!(!is_pareto_efficient(&Matching::new(vec![0, 1]).unwrap(), &swap).unwrap());
    }
}

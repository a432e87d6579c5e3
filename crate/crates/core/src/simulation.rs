//! Seeded Monte Carlo over strategy profiles.
//!
//! Replication `r` draws everything it needs from stream `(seed, r)`, in this
//! order: the lower-goods rankings of structured agents, the tie-break
//! order, and (with [`LowerStage::Lottery`]) the reassignment of lower goods.
//! Replications are grouped into fixed-size blocks and summed in integer
//! cents, so reports do not depend on the worker count.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::LowerStage;
use crate::error::{Error, Result};
use crate::market::{MarketInstance, RankList};
use crate::mechanisms::{Engine, MechanismKind};
use crate::money::Cents;
use crate::rng;

const BLOCK: u64 = 4096;

/// Which popular good a structured agent lists first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopGood {
    X1,
    X2,
}

impl TopGood {
    fn id(self) -> usize {
        match self {
            TopGood::X1 => 0,
            TopGood::X2 => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Fixed(RankList),
    /// List `top` first and the lower goods in random order. The other popular
    /// good goes second under RSD and last under Boston, except that Boston
    /// agents all listing `x1` first put `x2` second.
    Structured { top: TopGood },
}

/// How structured agents draw their lower-goods rankings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LowerRanking {
    /// One uniformly drawn ranking shared by all structured agents.
    #[default]
    Common,
    /// An independent uniform ranking per agent.
    PerAgent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyProfile {
    pub strategies: Vec<Strategy>,
}

impl StrategyProfile {
    pub fn fixed(reports: Vec<RankList>) -> Self {
        StrategyProfile {
            strategies: reports.into_iter().map(Strategy::Fixed).collect(),
        }
    }

    /// Agents `0..n1` list `x1` first, the rest `x2`.
    pub fn structured(n: usize, n1: usize) -> Self {
        StrategyProfile {
            strategies: (0..n)
                .map(|a| Strategy::Structured {
                    top: if a < n1 { TopGood::X1 } else { TopGood::X2 },
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.strategies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strategies.is_empty()
    }

    fn has_structured(&self) -> bool {
        self.strategies
            .iter()
            .any(|s| matches!(s, Strategy::Structured { .. }))
    }

    /// Agent groups sharing a strategy, in first-appearance order.
    fn groups(&self) -> Vec<(String, Vec<usize>)> {
        let mut groups: Vec<(String, Vec<usize>)> = Vec::new();
        for (agent, s) in self.strategies.iter().enumerate() {
            let label = match s {
                Strategy::Structured { top: TopGood::X1 } => "x1_first".to_string(),
                Strategy::Structured { top: TopGood::X2 } => "x2_first".to_string(),
                Strategy::Fixed(_) => format!("agent_{agent}"),
            };
            match groups.iter_mut().find(|(l, _)| *l == label) {
                Some((_, members)) => members.push(agent),
                None => groups.push((label, vec![agent])),
            }
        }
        groups
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimConfig {
    pub replications: u64,
    pub seed: u64,
    pub lower_stage: LowerStage,
    pub lower_ranking: LowerRanking,
}

impl SimConfig {
    pub fn new(replications: u64, seed: u64) -> Self {
        SimConfig {
            replications,
            seed,
            lower_stage: LowerStage::SharedTieBreak,
            lower_ranking: LowerRanking::Common,
        }
    }

    pub fn with_lower_stage(mut self, stage: LowerStage) -> Self {
        self.lower_stage = stage;
        self
    }

    pub fn with_lower_ranking(mut self, ranking: LowerRanking) -> Self {
        self.lower_ranking = ranking;
        self
    }
}

/// Mean and standard error of a per-replication quantity, in dollars.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupEstimate {
    pub group: String,
    pub agents: Vec<usize>,
    /// Expected utility of one member.
    pub eu: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub mechanism: MechanismKind,
    pub n: usize,
    pub replications: u64,
    pub seed: u64,
    pub rank_histogram: Vec<u64>,
    pub rank_fractions: Vec<f64>,
    pub welfare: Estimate,
    pub welfare_rho: Estimate,
    pub agent_eu: Vec<Estimate>,
    pub group_eu: Vec<GroupEstimate>,
}

/// Integer moments of one quantity over replications.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    sum: i128,
    sum_sq: i128,
}

impl Moments {
    fn push(&mut self, x: i64) {
        let x = x as i128;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn merge(&mut self, o: &Moments) {
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
    }

    /// Estimate of `x / scale` in dollars.
    fn estimate(&self, reps: u64, scale: f64) -> Estimate {
        let r = reps as i128;
        let mean = self.sum as f64 / reps as f64 / scale / 100.0;
        let se = if reps < 2 {
            0.0
        } else {
            // Exact integer numerator keeps a zero-variance run at exactly zero.
            let num = r * self.sum_sq - self.sum * self.sum;
            let var = num as f64 / (r * (r - 1)) as f64;
            (var.max(0.0) / reps as f64).sqrt() / scale / 100.0
        };
        Estimate { mean, se }
    }
}

#[derive(Debug, Clone)]
struct Totals {
    histogram: Vec<u64>,
    welfare: Moments,
    welfare_rho: Moments,
    agents: Vec<Moments>,
    groups: Vec<Moments>,
}

impl Totals {
    fn new(n: usize, groups: usize) -> Self {
        Totals {
            histogram: vec![0; n],
            welfare: Moments::default(),
            welfare_rho: Moments::default(),
            agents: vec![Moments::default(); n],
            groups: vec![Moments::default(); groups],
        }
    }

    fn merge(&mut self, o: &Totals) {
        for (a, b) in self.histogram.iter_mut().zip(&o.histogram) {
            *a += b;
        }
        self.welfare.merge(&o.welfare);
        self.welfare_rho.merge(&o.welfare_rho);
        for (a, b) in self.agents.iter_mut().zip(&o.agents) {
            a.merge(b);
        }
        for (a, b) in self.groups.iter_mut().zip(&o.groups) {
            a.merge(b);
        }
    }
}

/// One agent's result in one replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AgentRecord {
    pub rep: u64,
    pub agent: usize,
    pub good: usize,
    pub rank: usize,
    pub utility_cents: i64,
}

/// Per-replication state reused across replications of one worker.
struct Replicator<'a> {
    kind: MechanismKind,
    market: &'a MarketInstance,
    profile: &'a StrategyProfile,
    config: SimConfig,
    corner: bool,
    lists: Vec<Vec<usize>>,
    lower: Vec<usize>,
    order: Vec<usize>,
    out: Vec<usize>,
    holders: Vec<usize>,
    engine: Engine,
}

impl<'a> Replicator<'a> {
    fn new(
        kind: MechanismKind,
        market: &'a MarketInstance,
        profile: &'a StrategyProfile,
        config: SimConfig,
    ) -> Self {
        let n = market.n();
        let corner = kind == MechanismKind::Boston
            && profile
                .strategies
                .iter()
                .all(|s| *s == Strategy::Structured { top: TopGood::X1 });
        let lists = profile
            .strategies
            .iter()
            .map(|s| match s {
                Strategy::Fixed(r) => r.order().to_vec(),
                Strategy::Structured { .. } => vec![0; n],
            })
            .collect();
        Replicator {
            kind,
            market,
            profile,
            config,
            corner,
            lists,
            lower: (2..n.max(2)).collect(),
            order: (0..n).collect(),
            out: vec![0; n],
            holders: Vec::with_capacity(n),
            engine: Engine::new(n),
        }
    }

    fn fill_structured(&mut self, agent: usize, top: TopGood, rng: &mut ChaCha8Rng, redraw: bool) {
        if redraw {
            rng::shuffle(rng, &mut self.lower);
        }
        let top = top.id();
        let other = 1 - top;
        let list = &mut self.lists[agent];
        list.clear();
        list.push(top);
        if self.kind == MechanismKind::Rsd || self.corner {
            list.push(other);
            list.extend_from_slice(&self.lower);
        } else {
            list.extend_from_slice(&self.lower);
            list.push(other);
        }
    }

    /// Runs replication `rep`; afterwards `self.out` holds the assignment.
    fn run(&mut self, rep: u64) {
        let n = self.market.n();
        let mut rng = rng::stream(self.config.seed, rep);
        let structured = self.profile.has_structured();
        if structured && self.config.lower_ranking == LowerRanking::Common {
            rng::shuffle(&mut rng, &mut self.lower);
        }
        for agent in 0..n {
            if let Strategy::Structured { top } = self.profile.strategies[agent] {
                let redraw = self.config.lower_ranking == LowerRanking::PerAgent;
                self.fill_structured(agent, top, &mut rng, redraw);
            }
        }
        for (k, slot) in self.order.iter_mut().enumerate() {
            *slot = k;
        }
        rng::shuffle(&mut rng, &mut self.order);
        self.engine.run(self.kind, &self.lists, &self.order, &mut self.out);
        if structured && self.config.lower_stage == LowerStage::Lottery {
            // Reassign the lower goods uniformly among their holders.
            self.holders.clear();
            self.holders.extend((0..n).filter(|&a| self.out[a] >= 2));
            let mut goods: Vec<usize> = self.holders.iter().map(|&a| self.out[a]).collect();
            rng::shuffle(&mut rng, &mut goods);
            for (&a, g) in self.holders.iter().zip(goods) {
                self.out[a] = g;
            }
        }
    }

    fn rank_of(&self, agent: usize, good: usize) -> usize {
        self.lists[agent].iter().position(|&g| g == good).expect("complete list") + 1
    }
}

fn check_inputs(market: &MarketInstance, profile: &StrategyProfile, config: &SimConfig) -> Result<()> {
    let n = market.n();
    if config.replications == 0 {
        return Err(Error::argument("replications must be at least 1"));
    }
    if profile.len() != n {
        return Err(Error::argument(format!(
            "profile has {} strategies for a market of {n}",
            profile.len()
        )));
    }
    for (agent, s) in profile.strategies.iter().enumerate() {
        if let Strategy::Fixed(r) = s {
            if r.len() != n {
                return Err(Error::argument(format!(
                    "fixed report of agent {agent} lists {} goods, expected {n}",
                    r.len()
                )));
            }
        }
    }
    if profile.has_structured() && !is_symmetric(market) {
        return Err(Error::argument(
            "structured strategies need a symmetric market: common values with v(x1) > v(x2) > v(x3) = ... = v(xn)",
        ));
    }
    Ok(())
}

/// Common values of the form `v1 > v2 > vbar = ... = vbar`, `n >= 3`.
pub fn is_symmetric(market: &MarketInstance) -> bool {
    let n = market.n();
    if n < 3 {
        return false;
    }
    let rows = market.values();
    let first = rows.row(0);
    (1..n).all(|a| rows.row(a) == first)
        && first[0] > first[1]
        && first[1] > first[2]
        && first[2..].iter().all(|&v| v == first[2])
}

pub fn simulate(
    kind: MechanismKind,
    market: &MarketInstance,
    profile: &StrategyProfile,
    config: SimConfig,
) -> Result<SimReport> {
    check_inputs(market, profile, &config)?;
    let n = market.n();
    let groups = profile.groups();
    let blocks = config.replications.div_ceil(BLOCK);
    let rho = market.rho().as_slice();
    let partial: Vec<Totals> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut t = Totals::new(n, groups.len());
            let mut rep_state = Replicator::new(kind, market, profile, config);
            let mut utility = vec![0i64; n];
            let end = ((b + 1) * BLOCK).min(config.replications);
            for rep in b * BLOCK..end {
                rep_state.run(rep);
                let mut total = 0i64;
                let mut total_rho = 0i64;
                for agent in 0..n {
                    let good = rep_state.out[agent];
                    let rank = rep_state.rank_of(agent, good);
                    let r = rho[rank - 1].0;
                    utility[agent] = market.values().get(agent, good).0 + r;
                    total += utility[agent];
                    total_rho += r;
                    t.histogram[rank - 1] += 1;
                    t.agents[agent].push(utility[agent]);
                }
                t.welfare.push(total);
                t.welfare_rho.push(total_rho);
                for (g, (_, members)) in groups.iter().enumerate() {
                    t.groups[g].push(members.iter().map(|&a| utility[a]).sum());
                }
            }
            t
        })
        .collect();
    let mut totals = Totals::new(n, groups.len());
    for t in &partial {
        totals.merge(t);
    }
    let reps = config.replications;
    let cells = (reps * n as u64) as f64;
    Ok(SimReport {
        mechanism: kind,
        n,
        replications: reps,
        seed: config.seed,
        rank_fractions: totals.histogram.iter().map(|&c| c as f64 / cells).collect(),
        rank_histogram: totals.histogram,
        welfare: totals.welfare.estimate(reps, 1.0),
        welfare_rho: totals.welfare_rho.estimate(reps, 1.0),
        agent_eu: totals.agents.iter().map(|m| m.estimate(reps, 1.0)).collect(),
        group_eu: groups
            .into_iter()
            .zip(&totals.groups)
            .map(|((group, agents), m)| GroupEstimate {
                eu: m.estimate(reps, agents.len() as f64),
                group,
                agents,
            })
            .collect(),
    })
}

/// Fraction of agent-replications receiving their `j`-th listed good, `j = 1..=n`.
pub fn rank_distribution(
    kind: MechanismKind,
    market: &MarketInstance,
    profile: &StrategyProfile,
    config: SimConfig,
) -> Result<Vec<f64>> {
    Ok(simulate(kind, market, profile, config)?.rank_fractions)
}

/// Per-agent records of every replication, in replication then agent order.
pub fn replication_records(
    kind: MechanismKind,
    market: &MarketInstance,
    profile: &StrategyProfile,
    config: SimConfig,
) -> Result<Vec<AgentRecord>> {
    check_inputs(market, profile, &config)?;
    let n = market.n();
    let mut rep_state = Replicator::new(kind, market, profile, config);
    let mut records = Vec::with_capacity((config.replications as usize).saturating_mul(n));
    for rep in 0..config.replications {
        rep_state.run(rep);
        for agent in 0..n {
            let good = rep_state.out[agent];
            let rank = rep_state.rank_of(agent, good);
            let u: Cents = market.values().get(agent, good) + market.rho().as_slice()[rank - 1];
            records.push(AgentRecord {
                rep,
                agent,
                good,
                rank,
                utility_cents: u.0,
            });
        }
    }
    Ok(records)
}

//! Symmetric two-popular-goods environment.
//!
//! Goods `x1` (id 0) and `x2` (id 1) have common values `v1 > v2`; the other
//! `n - 2` goods share the value `vbar < v2`. In the strategy structure
//! studied here, `n1` agents list `x1` first and the rest list `x2` first.
//! The remaining goods are listed in uniformly random order, and the other
//! popular good goes second (RSD) or last (Boston). At the Boston corner
//! `n1 = n` it goes second as well.
//!
//! Closed forms are evaluated in exact rationals over cents. Every closed
//! form has a brute-force counterpart that runs the real engines over all
//! `n!` tie-break orders.

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{MarketInstance, RankList, RhoSchedule, ValueMatrix};
use crate::mechanisms::{all_orders, exact_expected_utilities, Engine, MechanismKind};
use crate::money::{exact_to_dollars, Cents, Exact};

/// Largest market for the enumeration oracles in this module.
pub const MAX_BRUTE_N: usize = 6;

const X1: usize = 0;
const X2: usize = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SymmetricJson", into = "SymmetricJson")]
pub struct SymmetricInstance {
    n: usize,
    v1: Cents,
    v2: Cents,
    vbar: Cents,
    rho: RhoSchedule,
}

#[derive(Serialize, Deserialize)]
struct SymmetricJson {
    n: usize,
    v1: Cents,
    v2: Cents,
    vbar: Cents,
    rho: RhoSchedule,
}

impl SymmetricInstance {
    pub fn new(n: usize, v1: Cents, v2: Cents, vbar: Cents, rho: RhoSchedule) -> Result<Self> {
        if n < 3 {
            return Err(Error::argument(format!("symmetric instance needs n >= 3, got {n}")));
        }
        if rho.len() != n {
            return Err(Error::argument(format!(
                "rho has {} entries, expected {n}",
                rho.len()
            )));
        }
        if !(v1 > v2 && v2 > vbar && vbar >= Cents::ZERO) {
            return Err(Error::argument(format!(
                "values must satisfy v1 > v2 > vbar >= 0, got {v1}, {v2}, {vbar}"
            )));
        }
        Ok(SymmetricInstance {
            n,
            v1,
            v2,
            vbar,
            rho,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn v1(&self) -> Cents {
        self.v1
    }

    pub fn v2(&self) -> Cents {
        self.v2
    }

    pub fn vbar(&self) -> Cents {
        self.vbar
    }

    pub fn rho(&self) -> &RhoSchedule {
        &self.rho
    }

    /// Common value of each good: `v1, v2, vbar, ..., vbar`.
    pub fn good_values(&self) -> Vec<Cents> {
        let mut v = vec![self.vbar; self.n];
        v[X1] = self.v1;
        v[X2] = self.v2;
        v
    }

    pub fn to_market(&self) -> MarketInstance {
        MarketInstance::unlabelled(
            ValueMatrix::common(&self.good_values()).expect("validated values"),
            self.rho.clone(),
        )
        .expect("consistent dimensions")
    }

    fn rho_at(&self, j: usize) -> Exact {
        self.rho.as_slice()[j - 1].exact()
    }

    /// The corner condition: listing `x1` first beats the best an `x2` deviator
    /// can get when everyone else lists `x1` first.
    pub fn corner_holds(&self) -> bool {
        let n = self.n as i128;
        let p = symmetric_params(self).expect("n >= 3");
        let lhs = (self.v1.exact() + self.rho_at(1)) / n
            + (self.v2.exact() + self.rho_at(2)) / n
            + Exact::new(n - 2, n) * p.delta_prime;
        lhs >= self.v2.exact() + self.rho_at(1)
    }
}

impl TryFrom<SymmetricJson> for SymmetricInstance {
    type Error = Error;
    fn try_from(j: SymmetricJson) -> Result<Self> {
        SymmetricInstance::new(j.n, j.v1, j.v2, j.vbar, j.rho)
    }
}

impl From<SymmetricInstance> for SymmetricJson {
    fn from(s: SymmetricInstance) -> Self {
        SymmetricJson {
            n: s.n,
            v1: s.v1,
            v2: s.v2,
            vbar: s.vbar,
            rho: s.rho,
        }
    }
}

/// Continuation values of the lower-goods lottery.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetricParams {
    /// `vbar` plus the mean of `rho(2..=n-1)`: a Boston loser's lottery value.
    pub delta: Exact,
    /// Mean of `rho(3..=n)`.
    pub rho_bar: Exact,
    /// `vbar + rho_bar`: an RSD agent's lottery value from position three on.
    pub delta_prime: Exact,
    /// `None` when `rho(1) = rho(2)`.
    pub alpha: Option<Exact>,
}

pub fn symmetric_params(inst: &SymmetricInstance) -> Result<SymmetricParams> {
    let n = inst.n;
    if n < 3 {
        return Err(Error::argument("symmetric parameters need n >= 3"));
    }
    let m = (n - 2) as i128;
    let vbar = inst.vbar.exact();
    let delta = vbar + inst.rho.sum_range(2, n - 1).exact() / m;
    let rho_bar = inst.rho.sum_range(3, n).exact() / m;
    let gap = inst.rho_at(1) - inst.rho_at(2);
    let alpha = (gap != Exact::from_integer(0)).then(|| {
        Exact::new(n as i128, 2) + Exact::new(n as i128 - 1, 2) * (inst.v1 - inst.v2).exact() / gap
    });
    Ok(SymmetricParams {
        delta,
        rho_bar,
        delta_prime: vbar + rho_bar,
        alpha,
    })
}

/// Expected utility of an agent listing `x1` first and of one listing `x2`
/// first when `n1` agents list `x1` first. A side is `None` when no agent
/// plays it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupEu {
    pub x1: Option<Exact>,
    pub x2: Option<Exact>,
}

fn check_n1(inst: &SymmetricInstance, n1: usize) -> Result<()> {
    if n1 > inst.n {
        return Err(Error::argument(format!("n1 = {n1} outside 0..={}", inst.n)));
    }
    Ok(())
}

/// Boston group expected utilities. Round one is a uniform lottery among the
/// agents contesting each popular good; losers enter the lower-goods lottery.
pub fn boston_group_eu(inst: &SymmetricInstance, n1: usize) -> Result<GroupEu> {
    check_n1(inst, n1)?;
    let n = inst.n;
    let delta = symmetric_params(inst)?.delta;
    let r1 = inst.rho_at(1);
    let side = |k: usize, v: Cents| -> Option<Exact> {
        (k > 0).then(|| {
            let k = k as i128;
            (v.exact() + r1) / k + Exact::new(k - 1, k) * delta
        })
    };
    Ok(GroupEu {
        x1: side(n1, inst.v1),
        x2: side(n - n1, inst.v2),
    })
}

/// RSD group expected utilities. Only the first two positions decide who
/// gets the popular goods; later positions enter the lower-goods lottery.
pub fn sd_group_eu(inst: &SymmetricInstance, n1: usize) -> Result<GroupEu> {
    check_n1(inst, n1)?;
    let n = inst.n as i128;
    let k1 = n1 as i128;
    let p = symmetric_params(inst)?;
    let (a, b) = (inst.v1.exact(), inst.v2.exact());
    let (r1, r2) = (inst.rho_at(1), inst.rho_at(2));
    let tail = Exact::new(n - 2, n) * p.delta_prime;
    let x1 = (n1 > 0).then(|| {
        (a + r1) / n
            + (Exact::new(k1 - 1, n - 1) * (b + r2) + Exact::new(n - k1, n - 1) * (a + r1)) / n
            + tail
    });
    let x2 = (k1 < n).then(|| {
        (b + r1) / n
            + (Exact::new(k1, n - 1) * (b + r1) + Exact::new(n - k1 - 1, n - 1) * (a + r2)) / n
            + tail
    });
    Ok(GroupEu { x1, x2 })
}

pub fn group_eu(kind: MechanismKind, inst: &SymmetricInstance, n1: usize) -> Result<GroupEu> {
    match kind {
        MechanismKind::Rsd => sd_group_eu(inst, n1),
        MechanismKind::Boston => boston_group_eu(inst, n1),
    }
}

/// Gain of one `x1`-lister from switching to `x2` first (`1 <= n1 <= n`).
pub fn delta_x1_to_x2(kind: MechanismKind, inst: &SymmetricInstance, n1: usize) -> Result<Exact> {
    if n1 == 0 || n1 > inst.n {
        return Err(Error::argument(format!("n1 = {n1} outside 1..={}", inst.n)));
    }
    let stay = group_eu(kind, inst, n1)?.x1.expect("n1 >= 1");
    let moved = group_eu(kind, inst, n1 - 1)?.x2.expect("n1 - 1 < n");
    Ok(stay - moved)
}

/// Gain of one `x2`-lister from switching to `x1` first (`0 <= n1 < n`).
pub fn delta_x2_to_x1(kind: MechanismKind, inst: &SymmetricInstance, n1: usize) -> Result<Exact> {
    if n1 >= inst.n {
        return Err(Error::argument(format!("n1 = {n1} outside 0..{}", inst.n)));
    }
    let stay = group_eu(kind, inst, n1)?.x2.expect("n1 < n");
    let moved = group_eu(kind, inst, n1 + 1)?.x1.expect("n1 + 1 >= 1");
    Ok(stay - moved)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    ClosedForm,
    BruteForce,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateEu {
    pub n1: usize,
    pub x1_first: Option<Exact>,
    pub x2_first: Option<Exact>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquilibriumSolution {
    pub mechanism: MechanismKind,
    pub method: SolveMethod,
    /// Ascending; the first entry is the canonical one.
    pub n1_candidates: Vec<usize>,
    /// Closed interval for `n1`; absent only for the degenerate RSD case.
    pub range: Option<(Exact, Exact)>,
    pub corner_all_top: bool,
    pub eus: Vec<CandidateEu>,
}

impl EquilibriumSolution {
    pub fn canonical_n1(&self) -> usize {
        self.n1_candidates[0]
    }
}

/// The interval of `n1` values at which neither group gains by switching.
pub fn equilibrium_range(kind: MechanismKind, inst: &SymmetricInstance) -> Result<(Exact, Exact)> {
    let n = inst.n as i128;
    let p = symmetric_params(inst)?;
    match kind {
        MechanismKind::Boston => {
            let r1 = inst.rho_at(1);
            let a = inst.v1.exact() + r1 - p.delta;
            let b = inst.v2.exact() + r1 - p.delta;
            let d = a + b;
            if d <= Exact::from_integer(0) {
                return Err(Error::Degenerate("Boston range denominator is not positive".into()));
            }
            Ok(((a * n - b) / d, (a * n + a) / d))
        }
        MechanismKind::Rsd => {
            let alpha = p
                .alpha
                .ok_or_else(|| Error::Degenerate("rho(1) = rho(2): alpha undefined".into()))?;
            let half = Exact::new(1, 2);
            Ok((alpha - half, alpha + half))
        }
    }
}

/// Solves for the equilibrium number of `x1`-first listers.
///
/// When the corner condition holds, `{n}` is returned for both mechanisms.
/// Otherwise the candidates are the integers of the closed interval in
/// `[1, n-1]`, plus `n` for RSD when the interval reaches it. RSD with
/// `rho(1) = rho(2)` is solved by enumeration (`n <= 6`).
pub fn solve_equilibrium(kind: MechanismKind, inst: &SymmetricInstance) -> Result<EquilibriumSolution> {
    let n = inst.n;
    let corner = inst.corner_holds();
    let (range, method, candidates) = match equilibrium_range(kind, inst) {
        Ok((lo, hi)) => {
            let candidates: Vec<usize> = if corner {
                vec![n]
            } else {
                let mut c: Vec<usize> = (1..n)
                    .filter(|&k| {
                        let k = Exact::from_integer(k as i128);
                        lo <= k && k <= hi
                    })
                    .collect();
                if kind == MechanismKind::Rsd && hi >= Exact::from_integer(n as i128) {
                    c.push(n);
                }
                c
            };
            (Some((lo, hi)), SolveMethod::ClosedForm, candidates)
        }
        Err(Error::Degenerate(msg)) if kind == MechanismKind::Rsd => {
            if corner {
                (None, SolveMethod::ClosedForm, vec![n])
            } else if n <= MAX_BRUTE_N {
                (None, SolveMethod::BruteForce, brute_force_equilibria(kind, inst)?)
            } else {
                return Err(Error::Degenerate(format!("{msg}; n = {n} too large to enumerate")));
            }
        }
        Err(e) => return Err(e),
    };
    if candidates.is_empty() {
        return Err(Error::Inconsistency(format!(
            "no {kind} equilibrium n1 found (range {:?})",
            range.map(|(lo, hi)| (exact_to_dollars(&lo) * 100.0, exact_to_dollars(&hi) * 100.0))
        )));
    }
    let eus = candidates
        .iter()
        .map(|&n1| {
            // At the corner Boston lists coincide with RSD lists.
            let k = if n1 == n { MechanismKind::Rsd } else { kind };
            let g = group_eu(k, inst, n1)?;
            Ok(CandidateEu {
                n1,
                x1_first: g.x1,
                x2_first: g.x2,
            })
        })
        .collect::<Result<_>>()?;
    Ok(EquilibriumSolution {
        mechanism: kind,
        method,
        n1_candidates: candidates,
        range,
        corner_all_top: corner,
        eus,
    })
}

/// How goods `x3..xn` are valued in the enumeration oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LowerStage {
    /// An agent left without `x1`/`x2` gets the uniform lottery over the lower
    /// goods at the ranks it listed them. This is the allocation the closed
    /// forms assume.
    #[default]
    Lottery,
    /// Lower goods go through the same engine run and tie-break order as the
    /// popular goods, with every agent listing them in one common order.
    SharedTieBreak,
}

fn structured_list(kind: MechanismKind, n: usize, top: usize, corner: bool) -> Vec<usize> {
    let other = 1 - top;
    let mut l = vec![top];
    if kind == MechanismKind::Rsd || corner {
        l.push(other);
        l.extend(2..n);
    } else {
        l.extend(2..n);
        l.push(other);
    }
    l
}

/// Lists of the structured profile with `n1` `x1`-first agents (ids `0..n1`).
pub fn structured_profile(kind: MechanismKind, n: usize, n1: usize) -> Vec<Vec<usize>> {
    let corner = kind == MechanismKind::Boston && n1 == n;
    (0..n)
        .map(|a| structured_list(kind, n, if a < n1 { X1 } else { X2 }, corner))
        .collect()
}

struct Oracle<'a> {
    kind: MechanismKind,
    stage: LowerStage,
    values: Vec<i128>,
    rho: Vec<i128>,
    orders: &'a [Vec<usize>],
}

impl Oracle<'_> {
    /// Expected utility of `agent`, scaled by `n! * (n - 2)`.
    fn scaled_eu(&self, lists: &[Vec<usize>], agent: usize) -> i128 {
        let n = lists.len();
        let m = (n - 2) as i128;
        let mut rank = vec![0usize; n];
        for (k, &g) in lists[agent].iter().enumerate() {
            rank[g] = k;
        }
        let lottery: i128 = (2..n).map(|h| self.values[h] + self.rho[rank[h]]).sum();
        let mut engine = Engine::new(n);
        let mut out = vec![0usize; n];
        let mut total = 0i128;
        for order in self.orders {
            engine.run(self.kind, lists, order, &mut out);
            let g = out[agent];
            total += if g < 2 || self.stage == LowerStage::SharedTieBreak {
                (self.values[g] + self.rho[rank[g]]) * m
            } else {
                lottery
            };
        }
        total
    }

    fn is_equilibrium(&self, n: usize, n1: usize) -> bool {
        let kind = self.kind;
        let lists = structured_profile(kind, n, n1);
        let deviate = |agent: usize, to: usize| {
            let mut l = lists.clone();
            l[agent] = structured_list(kind, n, to, false);
            self.scaled_eu(&l, agent) > self.scaled_eu(&lists, agent)
        };
        !(n1 > 0 && deviate(0, X2)) && !(n1 < n && deviate(n - 1, X1))
    }
}

/// All `n1` in `0..=n` at which no agent gains by switching which popular good
/// it lists first, by exhaustive enumeration of tie-break orders.
pub fn brute_force_equilibria(kind: MechanismKind, inst: &SymmetricInstance) -> Result<Vec<usize>> {
    brute_force_equilibria_with(kind, inst, LowerStage::Lottery)
}

pub fn brute_force_equilibria_with(
    kind: MechanismKind,
    inst: &SymmetricInstance,
    stage: LowerStage,
) -> Result<Vec<usize>> {
    let n = inst.n;
    if n > MAX_BRUTE_N {
        return Err(Error::Size {
            what: "brute-force equilibrium search",
            limit: MAX_BRUTE_N,
            n,
        });
    }
    let orders = all_orders(n);
    let oracle = Oracle {
        kind,
        stage,
        values: inst.good_values().iter().map(|c| c.0 as i128).collect(),
        rho: inst.rho.as_slice().iter().map(|c| c.0 as i128).collect(),
        orders: &orders,
    };
    let flags: Vec<bool> = (0..=n)
        .into_par_iter()
        .map(|n1| oracle.is_equilibrium(n, n1))
        .collect();
    Ok((0..=n).filter(|&k| flags[k]).collect())
}

/// Exact expected utility of agent `agent` in a structured profile, by
/// enumeration (`n <= 6`).
pub fn brute_force_group_eu(
    kind: MechanismKind,
    inst: &SymmetricInstance,
    n1: usize,
    stage: LowerStage,
) -> Result<GroupEu> {
    check_n1(inst, n1)?;
    let n = inst.n;
    if n > MAX_BRUTE_N {
        return Err(Error::Size {
            what: "brute-force group expected utility",
            limit: MAX_BRUTE_N,
            n,
        });
    }
    let orders = all_orders(n);
    let oracle = Oracle {
        kind,
        stage,
        values: inst.good_values().iter().map(|c| c.0 as i128).collect(),
        rho: inst.rho.as_slice().iter().map(|c| c.0 as i128).collect(),
        orders: &orders,
    };
    let lists = structured_profile(kind, n, n1);
    let scale = orders.len() as i128 * (n as i128 - 2);
    Ok(GroupEu {
        x1: (n1 > 0).then(|| Exact::new(oracle.scaled_eu(&lists, 0), scale)),
        x2: (n1 < n).then(|| Exact::new(oracle.scaled_eu(&lists, n - 1), scale)),
    })
}

/// True iff no single agent can raise its exact expected utility by
/// deviating from the all-truthful profile (`n <= 6`).
pub fn check_truthtelling_equilibrium(kind: MechanismKind, inst: &SymmetricInstance) -> Result<bool> {
    let n = inst.n;
    if n > MAX_BRUTE_N {
        return Err(Error::Size {
            what: "truth-telling equilibrium check",
            limit: MAX_BRUTE_N,
            n,
        });
    }
    let market = inst.to_market();
    // Values are common and the goods are listed in value order, so every
    // agent's truthful list is the identity and agents are interchangeable.
    let truthful = vec![RankList::identity(n); n];
    let base = exact_expected_utilities(kind, &truthful, &market)?[0];
    let deviations = all_orders(n);
    let gains: Vec<bool> = deviations
        .into_par_iter()
        .map(|dev| {
            let mut reports = truthful.clone();
            reports[0] = RankList::new(dev).expect("permutation");
            exact_expected_utilities(kind, &reports, &market).map(|eu| eu[0] > base)
        })
        .collect::<Result<_>>()?;
    Ok(!gains.into_iter().any(|g| g))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquilibriumWelfare {
    pub rho_component: Exact,
    pub total: Exact,
}

/// Expected total welfare at `n1`, split into its rankings-dependent part.
/// The fundamental-value part `v1 + v2 + (n-2) vbar` does not depend on the
/// matching.
pub fn equilibrium_welfare(
    kind: MechanismKind,
    inst: &SymmetricInstance,
    n1: usize,
) -> Result<EquilibriumWelfare> {
    let n = inst.n;
    let lowest = if kind == MechanismKind::Boston { 1 } else { 0 };
    if n1 < lowest || n1 > n {
        return Err(Error::argument(format!(
            "n1 = {n1} is not a {kind} equilibrium candidate (expected {lowest}..={n})"
        )));
    }
    let rho = &inst.rho;
    let (r1, r2) = (inst.rho_at(1), inst.rho_at(2));
    let rest = rho.sum_range(3, n).exact();
    let rho_component = if n1 == n {
        r1 + r2 + rest
    } else {
        match kind {
            MechanismKind::Boston => r1 * 2 + rho.sum_range(2, n - 1).exact(),
            MechanismKind::Rsd => {
                let (nn, k) = (n as i128, n1 as i128);
                Exact::new(k, nn) * Exact::new(k - 1, nn - 1) * (r1 + r2)
                    + Exact::new(2 * k, nn) * Exact::new(nn - k, nn - 1) * (r1 * 2)
                    + Exact::new(nn - k, nn) * Exact::new(nn - k - 1, nn - 1) * (r1 + r2)
                    + rest
            }
        }
    };
    let values: Cents = inst.good_values().iter().sum();
    Ok(EquilibriumWelfare {
        total: rho_component + values.exact(),
        rho_component,
    })
}

/// Serializable summary of both mechanisms on one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverReport {
    pub instance: SymmetricInstance,
    pub delta: f64,
    pub delta_prime: f64,
    pub rho_bar: f64,
    pub alpha: Option<f64>,
    pub corner_all_top: bool,
    pub n1_boston: usize,
    pub n1_rsd: usize,
    pub boston: MechanismSection,
    pub rsd: MechanismSection,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MechanismSection {
    pub method: SolveMethod,
    pub n1_candidates: Vec<usize>,
    pub range_lo: Option<f64>,
    pub range_hi: Option<f64>,
    pub eu_x1_first: Vec<Option<f64>>,
    pub eu_x2_first: Vec<Option<f64>>,
    pub welfare_rho: f64,
    pub welfare_total: f64,
    pub brute_force: Option<Vec<usize>>,
}

/// Dollar amounts in the report are rounded to 1e-9 so output is stable
/// under harmless changes in evaluation order.
fn dollars(x: &Exact) -> f64 {
    (exact_to_dollars(x) * 1e9).round() / 1e9
}

fn ratio(x: &Exact) -> f64 {
    (x.to_f64().unwrap_or(f64::NAN) * 1e9).round() / 1e9
}

pub fn solver_report(inst: &SymmetricInstance, with_brute_force: bool) -> Result<SolverReport> {
    let p = symmetric_params(inst)?;
    let section = |kind| -> Result<(MechanismSection, usize)> {
        let sol = solve_equilibrium(kind, inst)?;
        let w = equilibrium_welfare(kind, inst, sol.canonical_n1())?;
        let brute = if with_brute_force && inst.n <= MAX_BRUTE_N {
            Some(brute_force_equilibria(kind, inst)?)
        } else {
            None
        };
        Ok((
            MechanismSection {
                method: sol.method,
                range_lo: sol.range.as_ref().map(|r| ratio(&r.0)),
                range_hi: sol.range.as_ref().map(|r| ratio(&r.1)),
                eu_x1_first: sol.eus.iter().map(|e| e.x1_first.as_ref().map(dollars)).collect(),
                eu_x2_first: sol.eus.iter().map(|e| e.x2_first.as_ref().map(dollars)).collect(),
                welfare_rho: dollars(&w.rho_component),
                welfare_total: dollars(&w.total),
                brute_force: brute,
                n1_candidates: sol.n1_candidates.clone(),
            },
            sol.canonical_n1(),
        ))
    };
    let (boston, n1_boston) = section(MechanismKind::Boston)?;
    let (rsd, n1_rsd) = section(MechanismKind::Rsd)?;
    Ok(SolverReport {
        instance: inst.clone(),
        delta: dollars(&p.delta),
        delta_prime: dollars(&p.delta_prime),
        rho_bar: dollars(&p.rho_bar),
        alpha: p.alpha.as_ref().map(ratio),
        corner_all_top: inst.corner_holds(),
        n1_boston,
        n1_rsd,
        boston,
        rsd,
    })
}

mod common;

use rankmatch::equilibrium::{
    brute_force_group_eu, delta_x2_to_x1, equilibrium_welfare, group_eu, solve_equilibrium, LowerStage,
    SymmetricInstance,
};
use rankmatch::money::exact_to_dollars;
use rankmatch::simulation::{simulate, SimConfig, StrategyProfile};
use rankmatch::{rng, Cents, Exact, MechanismKind, RhoSchedule};

fn e1() -> SymmetricInstance {
    SymmetricInstance::new(
        5,
        Cents(2824),
        Cents(2256),
        Cents(700),
        RhoSchedule::new(vec![Cents(800), Cents(200), Cents(0), Cents(0), Cents(0)]).unwrap(),
    )
    .unwrap()
}

#[test]
fn sd_switch_gain_rises_linearly_in_n1() {
    let mut r = rng::stream(31, 0);
    for trial in 0..200 {
        let n = 4 + trial % 3;
        let inst = common::symmetric(&mut r, n, 1500, false);
        let rho = inst.rho().as_slice();
        let slope = Exact::new(2 * (rho[0] - rho[1]).0 as i128, (n * (n - 1)) as i128);
        for n1 in 0..n - 1 {
            let step = delta_x2_to_x1(MechanismKind::Rsd, &inst, n1 + 1).unwrap()
                - delta_x2_to_x1(MechanismKind::Rsd, &inst, n1).unwrap();
            assert_eq!(step, slope, "n={n} n1={n1}");
        }
    }
}

#[test]
fn welfare_equals_enumerated_group_totals() {
    let mut r = rng::stream(32, 0);
    for trial in 0..60 {
        let n = 3 + trial % 4;
        let inst = common::symmetric(&mut r, n, 1500, false);
        for kind in MechanismKind::ALL {
            let lowest = usize::from(kind == MechanismKind::Boston);
            for n1 in lowest..=n {
                let g = brute_force_group_eu(kind, &inst, n1, LowerStage::Lottery).unwrap();
                let k = n1 as i128;
                let total = g.x1.map_or(Exact::from_integer(0), |u| u * k)
                    + g.x2.map_or(Exact::from_integer(0), |u| u * (n as i128 - k));
                assert_eq!(equilibrium_welfare(kind, &inst, n1).unwrap().total, total, "{kind} n={n} n1={n1}");
            }
        }
    }
}

#[test]
fn candidates_lie_in_the_closed_range() {
    let mut r = rng::stream(33, 0);
    for trial in 0..300 {
        let inst = common::symmetric(&mut r, 4 + trial % 3, 1500, true);
        for kind in MechanismKind::ALL {
            let sol = solve_equilibrium(kind, &inst).unwrap();
            let (lo, hi) = sol.range.unwrap();
            for &c in &sol.n1_candidates {
                assert!((1..=inst.n()).contains(&c));
                if sol.corner_all_top {
                    continue;
                }
                let c = Exact::from_integer(c as i128);
                if c == Exact::from_integer(inst.n() as i128) {
                    // RSD boundary: an interval reaching past n selects n.
                    assert!(kind == MechanismKind::Rsd && hi >= c, "{kind}: n selected with hi = {hi}");
                } else {
                    assert!(lo <= c && c <= hi, "{kind}: {c} outside [{lo}, {hi}]");
                }
            }
        }
    }
}

fn check_against_monte_carlo(kind: MechanismKind, inst: &SymmetricInstance, n1: usize) {
    const REPS: u64 = 1_000_000;
    let closed = group_eu(kind, inst, n1).unwrap();
    let cfg = SimConfig::new(REPS, 11).with_lower_stage(LowerStage::Lottery);
    let rep = simulate(kind, &inst.to_market(), &StrategyProfile::structured(inst.n(), n1), cfg).unwrap();
    for g in &rep.group_eu {
        let want = match g.group.as_str() {
            "x1_first" => closed.x1.unwrap(),
            "x2_first" => closed.x2.unwrap(),
            other => panic!("unexpected group {other}"),
        };
        let want = exact_to_dollars(&want);
        assert!(
            (g.eu.mean - want).abs() <= 4.0 * g.eu.se,
            "{kind} n1={n1} {}: {} vs {want} (se {})",
            g.group,
            g.eu.mean,
            g.eu.se
        );
    }
}

#[test]
fn boston_group_utilities_match_monte_carlo() {
    check_against_monte_carlo(MechanismKind::Boston, &e1(), 3);
    let mut r = rng::stream(34, 0);
    let inst = common::symmetric(&mut r, 6, 1500, true);
    check_against_monte_carlo(MechanismKind::Boston, &inst, 2);
}

#[test]
fn sd_group_utilities_match_monte_carlo() {
    check_against_monte_carlo(MechanismKind::Rsd, &e1(), 4);
    check_against_monte_carlo(MechanismKind::Rsd, &e1(), 5);
}

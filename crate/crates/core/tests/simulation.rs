mod common;

use std::time::Instant;

use rankmatch::equilibrium::{solve_equilibrium, SymmetricInstance};
use rankmatch::mechanisms::exact_expected_utilities;
use rankmatch::money::exact_to_dollars;
use rankmatch::simulation::{replication_records, simulate, SimConfig, SimReport, StrategyProfile};
use rankmatch::{rng, Cents, Exact, MarketInstance, MechanismKind, RhoSchedule, ValueMatrix};

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

fn random_market(r: &mut rand_chacha::ChaCha8Rng, n: usize) -> MarketInstance {
    let values = (0..n).map(|_| (0..n).map(|_| common::cents(r, 0, 4000)).collect()).collect();
    let mut rho: Vec<Cents> = (0..n).map(|_| common::cents(r, -200, 1000)).collect();
    rho.sort_by(|a, b| b.cmp(a));
    MarketInstance::unlabelled(ValueMatrix::new(values).unwrap(), RhoSchedule::new(rho).unwrap()).unwrap()
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn fixed_profiles_agree_with_enumeration() {
    let mut r = rng::stream(41, 0);
    for n in 2..=5 {
        let market = random_market(&mut r, n);
        let reports = common::random_reports(&mut r, n);
        for kind in MechanismKind::ALL {
            let exact: Exact = exact_expected_utilities(kind, &reports, &market).unwrap().into_iter().sum();
            let rep = simulate(kind, &market, &StrategyProfile::fixed(reports.clone()), SimConfig::new(1_000_000, n as u64))
                .unwrap();
            let want = exact_to_dollars(&exact);
            assert!(
                (rep.welfare.mean - want).abs() <= 4.0 * rep.welfare.se.max(1e-12),
                "{kind} n={n}: {} vs {want} (se {})",
                rep.welfare.mean,
                rep.welfare.se
            );
        }
    }
}

#[test]
fn report_is_identical_for_any_worker_count() {
    let inst = e1();
    let run = |threads| -> Vec<SimReport> {
        in_pool(threads, || {
            MechanismKind::ALL
                .iter()
                .map(|&k| simulate(k, &inst.to_market(), &StrategyProfile::structured(5, 3), SimConfig::new(50_000, 9)).unwrap())
                .collect()
        })
    };
    assert_eq!(run(1), run(3));
    assert_eq!(run(1), run(8));
}

#[test]
fn histogram_and_standard_error_follow_their_definitions() {
    let inst = e1();
    let market = inst.to_market();
    let profile = StrategyProfile::structured(5, 3);
    let cfg = SimConfig::new(3000, 5);
    let rep = simulate(MechanismKind::Boston, &market, &profile, cfg).unwrap();
    assert_eq!(rep.rank_histogram.iter().sum::<u64>(), 3000 * 5);

    let records = replication_records(MechanismKind::Boston, &market, &profile, cfg).unwrap();
    let mut totals = vec![0f64; 3000];
    for rec in &records {
        totals[rec.rep as usize] += rec.utility_cents as f64 / 100.0;
    }
    let mean = totals.iter().sum::<f64>() / 3000.0;
    let var = totals.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / 2999.0;
    assert!((rep.welfare.mean - mean).abs() < 1e-9);
    assert!((rep.welfare.se - (var / 3000.0).sqrt()).abs() < 1e-9);
}

#[test]
fn throughput_single_core() {
    const REPS: u64 = 400_000;
    let mut r = rng::stream(42, 0);
    let market = random_market(&mut r, 5);
    let profile = StrategyProfile::fixed(common::random_reports(&mut r, 5));
    let start = Instant::now();
    in_pool(1, || simulate(MechanismKind::Boston, &market, &profile, SimConfig::new(REPS, 1)).unwrap());
    let rate = REPS as f64 / start.elapsed().as_secs_f64();
    assert!(rate >= 1e5, "{rate:.0} replications/s");
}

#[test]
fn boston_gives_more_first_choices_at_equilibrium() {
    let inst = e1();
    let fraction = |kind| {
        let n1 = solve_equilibrium(kind, &inst).unwrap().canonical_n1();
        simulate(kind, &inst.to_market(), &StrategyProfile::structured(5, n1), SimConfig::new(1_000_000, 3))
            .unwrap()
            .rank_fractions[0]
    };
    let (boston, sd) = (fraction(MechanismKind::Boston), fraction(MechanismKind::Rsd));
    assert!(boston >= sd, "boston {boston} sd {sd}");
}

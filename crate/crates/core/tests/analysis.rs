use proptest::prelude::*;
use rankmatch::analysis::ols::{ols_fit, Design, SeKind};
use rankmatch::analysis::report::{analyze, table1_design};
use rankmatch::analysis::session::{
    classify_truthful, load_session, net_values, read_session, truth_rate_table, welfare_total, write_session,
    Scope, SubjectRecord, TREATMENTS,
};
use rankmatch::analysis::stats::{jonckheere_terpstra, wilcoxon_ranksum, Alternative};
use rankmatch::analysis::synthetic::{generate_session, SyntheticConfig};
use rankmatch::mechanisms::run_random;
use rankmatch::simulation::{simulate, SimConfig, StrategyProfile};
use rankmatch::{rng, Cents, MarketInstance, MechanismKind, RankList, RhoSchedule, ValueMatrix};
use rand_distr::{Distribution, Normal};

const RHO: [Cents; 5] = [Cents(287), Cents(100), Cents(50), Cents(0), Cents(-69)];

fn noisy(groups: usize, seed: u64, noise: f64, misreport: f64) -> Vec<SubjectRecord> {
    let mut c = SyntheticConfig::new(groups, RHO, seed);
    c.noise_sd_cents = noise;
    c.misreport_prob = misreport;
    generate_session(&c).unwrap()
}

fn record_strategy() -> impl Strategy<Value = SubjectRecord> {
    (
        proptest::array::uniform5(0i64..4),
        Just((0..5).collect::<Vec<usize>>()).prop_shuffle(),
        0usize..5,
        0i64..5000,
        any::<bool>(),
    )
        .prop_map(|(v, order, good, phase2, boston)| SubjectRecord {
            subject_id: "s".into(),
            treatment: if boston { MechanismKind::Boston } else { MechanismKind::Rsd },
            group_id: "g".into(),
            // Coarse values so ties and small gaps are common.
            phase1_value: v.map(|x| Cents(1000 + 150 * x)),
            report: RankList::new(order).unwrap(),
            good_received: good,
            phase2_value: Cents(phase2),
            phase1_order: 1,
            risk_row: 1,
            loss_row: 1,
            crt: 0,
            female: false,
            practice: 0,
        })
}

proptest! {
    #[test]
    fn net_value_identity(records in proptest::collection::vec(record_strategy(), 1..40)) {
        let nv = net_values(&records);
        for (r, n) in records.iter().zip(&nv.records) {
            prop_assert_eq!(n.net_value, r.phase2_value - r.phase1_value[r.good_received]);
            prop_assert_eq!(n.rank_received, r.report.rank_of(r.good_received).unwrap());
        }
    }

    #[test]
    fn truth_rates_are_monotone(records in proptest::collection::vec(record_strategy(), 1..40)) {
        let tols = [Cents(0), Cents(100), Cents(200), Cents(400)];
        let t = truth_rate_table(&records, &tols);
        for tr in TREATMENTS {
            for w in tols.windows(2) {
                for s in Scope::ALL {
                    let lo = t.get(tr, w[0], s).unwrap();
                    let hi = t.get(tr, w[1], s).unwrap();
                    prop_assert!(lo.truthful <= hi.truthful);
                }
            }
            for &tol in &tols {
                let all = t.get(tr, tol, Scope::All).unwrap().truthful;
                let top2 = t.get(tr, tol, Scope::Top2).unwrap().truthful;
                let top1 = t.get(tr, tol, Scope::Top1).unwrap().truthful;
                prop_assert!(all <= top2 && top2 <= top1);
            }
        }
    }

    #[test]
    fn rank_tests_ignore_within_group_order(
        groups in proptest::collection::vec(proptest::collection::vec(0u8..6, 1..5), 2..4),
        seed in any::<u64>(),
    ) {
        let groups: Vec<Vec<f64>> = groups.iter().map(|g| g.iter().map(|&x| x as f64).collect()).collect();
        let mut r = rng::stream(seed, 0);
        let shuffled: Vec<Vec<f64>> = groups
            .iter()
            .map(|g| {
                let mut g = g.clone();
                rng::shuffle(&mut r, &mut g);
                g
            })
            .collect();
        for alt in [Alternative::Decreasing, Alternative::Increasing] {
            prop_assert_eq!(
                jonckheere_terpstra(&groups, alt).unwrap(),
                jonckheere_terpstra(&shuffled, alt).unwrap()
            );
        }
        prop_assert_eq!(
            wilcoxon_ranksum(&groups[0], &groups[1]).unwrap(),
            wilcoxon_ranksum(&shuffled[0], &shuffled[1]).unwrap()
        );
    }

    #[test]
    fn two_group_jt_is_one_sided_ranksum(
        a in proptest::collection::vec(0u8..8, 1..12),
        b in proptest::collection::vec(0u8..8, 1..12),
    ) {
        let a: Vec<f64> = a.into_iter().map(f64::from).collect();
        let b: Vec<f64> = b.into_iter().map(f64::from).collect();
        let jt = jonckheere_terpstra(&[a.clone(), b.clone()], Alternative::Decreasing).unwrap();
        let w = wilcoxon_ranksum(&a, &b).unwrap();
        prop_assert!((jt.variance - w.variance).abs() <= 1e-9 * w.variance.max(1.0));
        prop_assert!((jt.p - w.p_upper).abs() <= 1e-9, "jt {} ranksum {}", jt.p, w.p_upper);
        prop_assert_eq!(jt.p < 0.05, w.p_upper < 0.05);
    }

    #[test]
    fn ols_residuals_are_orthogonal(
        rows in proptest::collection::vec((-50.0f64..50.0, 0.0f64..10.0, -1e3f64..1e3), 8..60),
    ) {
        let mut d = Design::intercept(rows.len());
        d.push_column("a", rows.iter().map(|r| r.0));
        d.push_column("b", rows.iter().map(|r| r.1));
        d.push_column("ab", rows.iter().map(|r| r.0 * r.1));
        let y: Vec<f64> = rows.iter().map(|r| r.2).collect();
        let Ok(fit) = ols_fit(&y, &d, SeKind::Classical) else {
            return Ok(());
        };
        let scale = y.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
        let cols: [Vec<f64>; 4] = [
            vec![1.0; rows.len()],
            rows.iter().map(|r| r.0).collect(),
            rows.iter().map(|r| r.1).collect(),
            rows.iter().map(|r| r.0 * r.1).collect(),
        ];
        for c in &cols {
            let dot: f64 = c.iter().zip(&fit.residuals).map(|(x, e)| x * e).sum();
            let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assert!(dot.abs() <= 1e-8 * norm * scale, "dot {dot}");
        }
    }
}

fn midranks(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .map(|&x| {
            let below = xs.iter().filter(|&&y| y < x).count() as f64;
            let equal = xs.iter().filter(|&&y| y == x).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Every labelling of the pooled sample into groups of the given sizes.
fn labellings(sizes: &[usize], n: usize) -> Vec<Vec<usize>> {
    fn go(left: &mut Vec<usize>, cur: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for g in 0..left.len() {
            if left[g] > 0 {
                left[g] -= 1;
                cur.push(g);
                go(left, cur, n, out);
                cur.pop();
                left[g] += 1;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut sizes.to_vec(), &mut Vec::new(), n, &mut out);
    out
}

fn jt_stat(pooled: &[f64], label: &[usize]) -> f64 {
    let mut s = 0.0;
    for i in 0..pooled.len() {
        for j in 0..pooled.len() {
            if label[i] < label[j] {
                s += if pooled[i] < pooled[j] {
                    1.0
                } else if pooled[i] == pooled[j] {
                    0.5
                } else {
                    0.0
                };
            }
        }
    }
    s
}

#[test]
fn exact_p_values_match_brute_force_permutation() {
    let cases: [&[&[f64]]; 4] = [
        &[&[3.0, 5.0, 5.0], &[1.0, 2.0, 5.0], &[0.0, 1.0]],
        &[&[1.0, 1.0], &[1.0, 2.0], &[2.0, 2.0, 3.0]],
        &[&[4.0, 6.0, 7.0, 9.0], &[1.0, 2.0, 3.0, 4.0, 5.0]],
        &[&[2.0, 2.0, 2.0], &[2.0, 2.0, 1.0, 3.0]],
    ];
    for groups in cases {
        let sizes: Vec<usize> = groups.iter().map(|g| g.len()).collect();
        let pooled: Vec<f64> = groups.concat();
        let observed: Vec<usize> = sizes.iter().enumerate().flat_map(|(g, &s)| vec![g; s]).collect();
        let all = labellings(&sizes, pooled.len());
        let owned: Vec<Vec<f64>> = groups.iter().map(|g| g.to_vec()).collect();

        let j0 = jt_stat(&pooled, &observed);
        let frac = |f: &dyn Fn(&Vec<usize>) -> bool| all.iter().filter(|l| f(l)).count() as f64 / all.len() as f64;
        let jt = jonckheere_terpstra(&owned, Alternative::Decreasing).unwrap();
        assert_eq!(jt.statistic, j0);
        assert!((jt.p_exact.unwrap() - frac(&|l| jt_stat(&pooled, l) <= j0 + 1e-9)).abs() < 1e-12);

        if groups.len() == 2 {
            let ranks = midranks(&pooled);
            let w = |l: &Vec<usize>| -> f64 { ranks.iter().zip(l).filter(|(_, &g)| g == 0).map(|(r, _)| r).sum() };
            let w0 = w(&observed);
            let e = sizes[0] as f64 * (pooled.len() + 1) as f64 / 2.0;
            let rs = wilcoxon_ranksum(groups[0], groups[1]).unwrap();
            assert_eq!(rs.statistic, w0);
            assert!((rs.p_upper - frac(&|l| w(l) >= w0 - 1e-9)).abs() < 1e-12);
            assert!((rs.p_lower - frac(&|l| w(l) <= w0 + 1e-9)).abs() < 1e-12);
            assert!((rs.p_exact.unwrap() - frac(&|l| (w(l) - e).abs() >= (w0 - e).abs() - 1e-9)).abs() < 1e-12);
        }
    }
}

#[test]
fn ols_recovers_planted_coefficients() {
    let mut r = rng::stream(61, 0);
    let noise = Normal::new(0.0, 2.0).unwrap();
    let n = 400;
    let x1: Vec<f64> = (0..n).map(|_| rng::unit(&mut r) * 10.0).collect();
    let x2: Vec<f64> = (0..n).map(|_| rng::below(&mut r, 2) as f64).collect();
    let y: Vec<f64> = (0..n).map(|i| 1.5 - 0.7 * x1[i] + 2.0 * x2[i] + noise.sample(&mut r)).collect();
    let mut d = Design::intercept(n);
    d.push_column("x1", x1);
    d.push_column("x2", x2);
    for se in [SeKind::Classical, SeKind::Hc1] {
        let fit = ols_fit(&y, &d, se).unwrap();
        for (name, beta) in [("_cons", 1.5), ("x1", -0.7), ("x2", 2.0)] {
            let c = fit.coef(name).unwrap();
            assert!((c.estimate - beta).abs() <= 3.0 * c.se, "{name}: {} se {}", c.estimate, c.se);
        }
    }
}

#[test]
fn rank_slope_recovered_from_linear_bonus() {
    // rho falls by $0.40 per rank.
    let rho = [Cents(160), Cents(120), Cents(80), Cents(40), Cents(0)];
    let mut c = SyntheticConfig::new(40, rho, 62);
    c.noise_sd_cents = 250.0;
    let s = generate_session(&c).unwrap();
    let y: Vec<f64> = s.iter().map(|r| r.net_value().as_dollars()).collect();
    let fit = ols_fit(&y, &table1_design(&s, false), SeKind::Classical).unwrap();
    let k = fit.coef("rank").unwrap();
    assert!((k.estimate + 0.40).abs() <= 3.0 * k.se, "{} se {}", k.estimate, k.se);
}

#[test]
fn truth_rate_recovers_misreport_probability() {
    let p = 0.3;
    let s = noisy(200, 63, 0.0, p);
    let t = truth_rate_table(&s, &[Cents::ZERO]);
    let rate = t.get(None, Cents::ZERO, Scope::All).unwrap();
    let n = rate.n as f64;
    let bound = 3.0 * (p * (1.0 - p) / n).sqrt();
    assert!((rate.rate.unwrap() - (1.0 - p)).abs() <= bound, "{:?}", rate.rate);
    // Swapping the top two never survives the top-1 check.
    assert_eq!(t.get(None, Cents::ZERO, Scope::Top1).unwrap().truthful, rate.truthful);
}

#[test]
fn planted_welfare_matches_simulated_mechanism() {
    const GROUPS: u64 = 4000;
    let values = vec![
        vec![Cents(3000), Cents(2200), Cents(1500), Cents(1200), Cents(1000)],
        vec![Cents(2800), Cents(2600), Cents(1400), Cents(1100), Cents(1300)],
        vec![Cents(2500), Cents(1900), Cents(2100), Cents(1000), Cents(1050)],
        vec![Cents(3100), Cents(1500), Cents(1250), Cents(1600), Cents(1150)],
        vec![Cents(2000), Cents(2700), Cents(1700), Cents(1300), Cents(1010)],
    ];
    let market = MarketInstance::unlabelled(ValueMatrix::new(values.clone()).unwrap(), RhoSchedule::new(RHO.to_vec()).unwrap())
        .unwrap();
    let reports: Vec<RankList> = values
        .iter()
        .map(|row| {
            let mut o: Vec<usize> = (0..5).collect();
            o.sort_by(|&a, &b| row[b].cmp(&row[a]));
            RankList::new(o).unwrap()
        })
        .collect();
    for kind in MechanismKind::ALL {
        let mut records = Vec::new();
        for g in 0..GROUPS {
            let (out, _) = run_random(kind, &market, &reports, 1000 + g).unwrap();
            for i in 0..5 {
                records.push(SubjectRecord {
                    subject_id: format!("{g}-{i}"),
                    treatment: kind,
                    group_id: format!("{g}"),
                    phase1_value: values[i].clone().try_into().unwrap(),
                    report: reports[i].clone(),
                    good_received: out.matching.good_of(i).unwrap(),
                    phase2_value: out.utility[i],
                    phase1_order: 1,
                    risk_row: 1,
                    loss_row: 1,
                    crt: 0,
                    female: false,
                    practice: 0,
                });
            }
        }
        let planted = welfare_total(&records);
        let mean = planted.by_treatment.iter().find(|t| t.treatment == Some(kind)).unwrap().mean.unwrap();
        let sim = simulate(kind, &market, &StrategyProfile::fixed(reports.clone()), SimConfig::new(200_000, 7)).unwrap();
        let sd = sim.welfare.se * (200_000f64).sqrt();
        let se = (sim.welfare.se.powi(2) + sd * sd / GROUPS as f64).sqrt();
        assert!((mean - sim.welfare.mean).abs() <= 4.0 * se.max(1e-9), "{kind}: {mean} vs {}", sim.welfare.mean);
    }
}

#[test]
fn classification_band_examples() {
    let rec = |values: [i64; 5], order: [usize; 5]| SubjectRecord {
        subject_id: "s".into(),
        treatment: MechanismKind::Rsd,
        group_id: "g".into(),
        phase1_value: values.map(Cents),
        report: RankList::new(order.to_vec()).unwrap(),
        good_received: order[0],
        phase2_value: Cents(0),
        phase1_order: 1,
        risk_row: 1,
        loss_row: 1,
        crt: 0,
        female: false,
        practice: 0,
    };
    // Second good listed first, $1.50 below the first.
    let r = rec([2000, 1850, 1000, 900, 800], [1, 0, 2, 3, 4]);
    assert!(!classify_truthful(&r, Cents(0), Scope::All));
    assert!(classify_truthful(&r, Cents(200), Scope::All));
    assert!(!classify_truthful(&r, Cents(149), Scope::Top1));
    // Ties may go either way at zero tolerance.
    let r = rec([2000, 2000, 1000, 900, 800], [1, 0, 2, 3, 4]);
    assert!(classify_truthful(&r, Cents(0), Scope::All));
    // Only the bottom two swapped: fine for the top scopes.
    let r = rec([2000, 1500, 1000, 900, 800], [0, 1, 2, 4, 3]);
    assert!(!classify_truthful(&r, Cents(0), Scope::All));
    assert!(classify_truthful(&r, Cents(0), Scope::Top2));
}

#[test]
fn session_round_trip_and_row_errors() {
    let s = noisy(3, 64, 150.0, 0.2);
    let mut buf = Vec::new();
    write_session(&mut buf, &s).unwrap();
    assert_eq!(read_session(buf.as_slice(), "mem").unwrap(), s);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let text = String::from_utf8(buf).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    // Line 4 lists the backpack twice.
    lines[3] = lines[3].replacen("bottle", "backpack", 1);
    std::fs::write(&path, lines.join("\n")).unwrap();
    let err = load_session(&path).unwrap_err().to_string();
    assert!(err.contains("s.csv") && err.contains('4'), "{err}");

    let missing = load_session(dir.path().join("none.csv")).unwrap_err().to_string();
    assert!(missing.contains("none.csv"), "{missing}");
}

#[test]
fn empty_session_gives_empty_report() {
    let rep = analyze(&[], &[Cents(0), Cents(200)], SeKind::Classical);
    assert_eq!(rep.records, 0);
    assert!(rep.welfare.groups.is_empty());
    assert!(rep.table1.iter().all(|c| c.fit.is_none() && c.error.is_some()));
}

//! Synthetic sessions with a planted rankings-dependent bonus.
//!
//! Each group of five draws Phase I values, submits lists, runs its
//! treatment's mechanism, and reports Phase II values equal to the Phase I
//! value of the received good plus `rho(rank)` plus Gaussian noise rounded
//! to the cent. Group `g` uses stream `(seed, g)`.

use rand_distr::{Distribution, Normal};

use crate::analysis::session::{SubjectRecord, GOODS, GROUP_SIZE};
use crate::error::{Error, Result};
use crate::market::RankList;
use crate::mechanisms::{self, MechanismKind, TieBreakOrder};
use crate::money::Cents;
use crate::rng;

/// Phase I value ranges per good, in cents. The floor keeps Phase II values
/// non-negative for any plausible noise draw.
const VALUE_RANGES: [(i64, i64); 5] = [(2000, 3500), (1500, 2800), (1000, 1600), (1000, 1500), (1000, 1400)];

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub groups_per_treatment: usize,
    pub rho: [Cents; 5],
    /// Standard deviation of the Phase II noise, in cents.
    pub noise_sd_cents: f64,
    /// Probability that a subject swaps its top two goods.
    pub misreport_prob: f64,
    pub seed: u64,
}

impl SyntheticConfig {
    pub fn new(groups_per_treatment: usize, rho: [Cents; 5], seed: u64) -> Self {
        SyntheticConfig {
            groups_per_treatment,
            rho,
            noise_sd_cents: 0.0,
            misreport_prob: 0.0,
            seed,
        }
    }
}

pub fn generate_session(config: &SyntheticConfig) -> Result<Vec<SubjectRecord>> {
    if !(0.0..=1.0).contains(&config.misreport_prob) {
        return Err(Error::argument("misreport_prob must lie in [0, 1]"));
    }
    if !(config.noise_sd_cents >= 0.0 && config.noise_sd_cents.is_finite()) {
        return Err(Error::argument("noise_sd_cents must be finite and non-negative"));
    }
    let noise = Normal::new(0.0, config.noise_sd_cents.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::argument(e.to_string()))?;
    let mut out = Vec::with_capacity(2 * config.groups_per_treatment * GROUP_SIZE);
    let mut stream_id = 0u64;
    for treatment in MechanismKind::ALL {
        for g in 0..config.groups_per_treatment {
            let mut r = rng::stream(config.seed, stream_id);
            stream_id += 1;
            let mut values = Vec::with_capacity(GROUP_SIZE);
            let mut reports = Vec::with_capacity(GROUP_SIZE);
            for _ in 0..GROUP_SIZE {
                let v = distinct_values(&mut r);
                let mut order: Vec<usize> = (0..GOODS.len()).collect();
                order.sort_by(|&a, &b| v[b].cmp(&v[a]));
                if rng::unit(&mut r) < config.misreport_prob {
                    order.swap(0, 1);
                }
                values.push(v);
                reports.push(RankList::new(order).expect("permutation"));
            }
            let tie = TieBreakOrder::new(rng::permutation(&mut r, GROUP_SIZE)).expect("permutation");
            let matching = mechanisms::run(treatment, &reports, &tie)?;
            for (i, (v, report)) in values.iter().zip(reports).enumerate() {
                let good = matching.good_of(i).expect("complete matching");
                let rank = report.rank_of(good).expect("complete list");
                let eps = if config.noise_sd_cents > 0.0 {
                    noise.sample(&mut r).round() as i64
                } else {
                    0
                };
                let phase2 = Cents((v[good] + config.rho[rank - 1]).0 + eps).max(Cents::ZERO);
                out.push(SubjectRecord {
                    subject_id: format!("{treatment}-{g:03}-{i}"),
                    treatment,
                    group_id: format!("{treatment}-{g:03}"),
                    phase1_value: *v,
                    report,
                    good_received: good,
                    phase2_value: phase2,
                    phase1_order: 1 + rng::below(&mut r, 20) as u8,
                    risk_row: 1 + rng::below(&mut r, 50) as u8,
                    loss_row: 1 + rng::below(&mut r, 50) as u8,
                    crt: rng::below(&mut r, 4) as u8,
                    female: rng::below(&mut r, 2) == 1,
                    practice: rng::below(&mut r, 11) as u32,
                });
            }
        }
    }
    Ok(out)
}

fn distinct_values(r: &mut rand_chacha::ChaCha8Rng) -> [Cents; 5] {
    loop {
        let v = VALUE_RANGES.map(|(lo, hi)| Cents(lo + rng::below(r, (hi - lo + 1) as u64) as i64));
        let mut sorted = v;
        sorted.sort();
        if sorted.windows(2).all(|w| w[0] != w[1]) {
            return v;
        }
    }
}

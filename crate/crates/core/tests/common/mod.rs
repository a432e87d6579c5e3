#![allow(dead_code)]

use rand_chacha::ChaCha8Rng;
use rankmatch::equilibrium::SymmetricInstance;
use rankmatch::{rng, Cents, RankList, RhoSchedule};

pub fn cents(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Cents {
    Cents(lo + rng::below(rng, (hi - lo + 1) as u64) as i64)
}

/// A random symmetric instance: vbar in $0..$10, v2 at least $1 above vbar,
/// v1 above v2 by up to $8 (up to $80 for one instance in five, which
/// reaches the all-top corner), rho drawn in 0..=rho_cap cents and sorted.
/// Redraws until rho(1) > rho(2) when `strict_top` is set.
pub fn symmetric(rng: &mut ChaCha8Rng, n: usize, rho_cap: i64, strict_top: bool) -> SymmetricInstance {
    loop {
        let vbar = cents(rng, 0, 1000);
        let v2 = vbar + cents(rng, 100, 3000);
        let gap_cap = if rng::below(rng, 5) == 0 { 8000 } else { 800 };
        let v1 = v2 + cents(rng, 1, gap_cap);
        let mut rho: Vec<Cents> = (0..n).map(|_| cents(rng, 0, rho_cap)).collect();
        rho.sort_by(|a, b| b.cmp(a));
        if strict_top && rho[0] <= rho[1] {
            continue;
        }
        return SymmetricInstance::new(n, v1, v2, vbar, RhoSchedule::new(rho).unwrap()).unwrap();
    }
}

pub fn random_reports(rng: &mut ChaCha8Rng, n: usize) -> Vec<RankList> {
    (0..n).map(|_| RankList::new(rng::permutation(rng, n)).unwrap()).collect()
}

pub fn lists(v: &[&[usize]]) -> Vec<RankList> {
    v.iter().map(|l| RankList::new(l.to_vec()).unwrap()).collect()
}

pub fn d(s: &str) -> Cents {
    s.parse().unwrap()
}

//! Jonckheere-Terpstra and Wilcoxon rank-sum tests.
//!
//! Both tests use midranks for ties. Exact null distributions are built by a
//! dynamic program over tie blocks: the observations of one block can carry
//! any mix of labels, and a mix `c` of a block of size `t` occurs in
//! `t! / prod(c_g!)` of the equally likely labelings. Statistics are tracked
//! doubled so that half-counts from ties stay integral.

use std::collections::BTreeMap;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Exact p-values are computed when the pooled sample has at most this many
/// observations.
pub const EXACT_MAX_N: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Alternative {
    /// Values fall as the group index rises.
    Decreasing,
    Increasing,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JtResult {
    pub alternative: Alternative,
    pub statistic: f64,
    pub expected: f64,
    pub variance: f64,
    pub z: f64,
    pub p_normal: f64,
    pub p_exact: Option<f64>,
    /// `p_exact` when available, else `p_normal`.
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankSumResult {
    /// Sum of the midranks of the first sample.
    pub statistic: f64,
    pub expected: f64,
    pub variance: f64,
    pub z: f64,
    pub p_normal: f64,
    pub p_exact: Option<f64>,
    /// Two-sided; `p_exact` when available.
    pub p: f64,
    /// One-sided p for "first sample tends smaller".
    pub p_lower: f64,
    /// One-sided p for "first sample tends larger".
    pub p_upper: f64,
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("valid parameters")
}

/// Tie blocks of the pooled sample in ascending order: per block, the count
/// of each label.
fn tie_blocks(samples: &[&[f64]]) -> Result<Vec<Vec<usize>>> {
    let mut pooled: Vec<(f64, usize)> = Vec::new();
    for (g, s) in samples.iter().enumerate() {
        for &x in s.iter() {
            if !x.is_finite() {
                return Err(Error::argument(format!("non-finite observation {x} in group {g}")));
            }
            pooled.push((x, g));
        }
    }
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut last = f64::NAN;
    for (x, g) in pooled {
        if x != last {
            blocks.push(vec![0; samples.len()]);
            last = x;
        }
        blocks.last_mut().expect("pushed")[g] += 1;
    }
    Ok(blocks)
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn multinomial(parts: &[usize]) -> u128 {
    let mut total = 0;
    let mut acc = 1u128;
    for &p in parts {
        total += p;
        acc *= binomial(total, p);
    }
    acc
}

/// Calls `f` with every split of `t` items into `caps.len()` parts bounded by `caps`.
fn compositions(t: usize, caps: &[usize], f: &mut impl FnMut(&[usize])) {
    fn go(t: usize, caps: &[usize], cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        let g = cur.len();
        if g == caps.len() {
            if t == 0 {
                f(cur);
            }
            return;
        }
        let rest: usize = caps[g + 1..].iter().sum();
        let lo = t.saturating_sub(rest);
        for c in lo..=t.min(caps[g]) {
            cur.push(c);
            go(t - c, caps, cur, f);
            cur.pop();
        }
    }
    go(t, caps, &mut Vec::with_capacity(caps.len()), f);
}

/// Doubled JT contribution of a block with label counts `c` after `prev`
/// strictly smaller observations per group.
fn jt_block_contribution(prev: &[usize], c: &[usize]) -> i64 {
    let mut twice = 0i64;
    let mut below_prev = 0usize;
    let mut below_tied = 0usize;
    for g in 0..c.len() {
        twice += (c[g] * (2 * below_prev + below_tied)) as i64;
        below_prev += prev[g];
        below_tied += c[g];
    }
    twice
}

/// Exact null distribution of the doubled JT statistic: (2J, count).
fn jt_exact_distribution(blocks: &[Vec<usize>], sizes: &[usize]) -> BTreeMap<i64, u128> {
    let k = sizes.len();
    let mut states: BTreeMap<(Vec<usize>, i64), u128> = BTreeMap::new();
    states.insert((vec![0; k], 0), 1);
    for block in blocks {
        let t: usize = block.iter().sum();
        let mut next: BTreeMap<(Vec<usize>, i64), u128> = BTreeMap::new();
        for ((prev, j2), w) in &states {
            let caps: Vec<usize> = (0..k).map(|g| sizes[g] - prev[g]).collect();
            compositions(t, &caps, &mut |c| {
                let mut p = prev.clone();
                for g in 0..k {
                    p[g] += c[g];
                }
                *next.entry((p, j2 + jt_block_contribution(prev, c))).or_default() +=
                    w * multinomial(c);
            });
        }
        states = next;
    }
    let mut dist = BTreeMap::new();
    for ((_, j2), w) in states {
        *dist.entry(j2).or_default() += w;
    }
    dist
}

fn tail_fraction(dist: &BTreeMap<i64, u128>, keep: impl Fn(i64) -> bool) -> f64 {
    let total: u128 = dist.values().sum();
    let hit: u128 = dist.iter().filter(|(k, _)| keep(**k)).map(|(_, w)| *w).sum();
    hit as f64 / total as f64
}

/// Jonckheere-Terpstra test for an ordered alternative across `groups`,
/// listed in the hypothesised order.
///
/// When every observation is identical the statistic sits at its null mean,
/// the variance is zero and `p = 1`.
pub fn jonckheere_terpstra(groups: &[Vec<f64>], alternative: Alternative) -> Result<JtResult> {
    let groups: Vec<&[f64]> = groups.iter().map(Vec::as_slice).filter(|g| !g.is_empty()).collect();
    if groups.len() < 2 {
        return Err(Error::argument("Jonckheere-Terpstra needs at least two non-empty groups"));
    }
    let sizes: Vec<usize> = groups.iter().map(|g| g.len()).collect();
    let blocks = tie_blocks(&groups)?;
    let k = sizes.len();
    let mut prev = vec![0usize; k];
    let mut j2 = 0i64;
    for c in &blocks {
        j2 += jt_block_contribution(&prev, c);
        for g in 0..k {
            prev[g] += c[g];
        }
    }
    let nn = sizes.iter().sum::<usize>() as f64;
    let ns: Vec<f64> = sizes.iter().map(|&s| s as f64).collect();
    let ts: Vec<f64> = blocks.iter().map(|b| b.iter().sum::<usize>() as f64).collect();
    let expected = (nn * nn - ns.iter().map(|n| n * n).sum::<f64>()) / 4.0;
    let s = |xs: &[f64], f: &dyn Fn(f64) -> f64| xs.iter().map(|&x| f(x)).sum::<f64>();
    let a = |x: f64| x * (x - 1.0) * (2.0 * x + 5.0);
    let b = |x: f64| x * (x - 1.0) * (x - 2.0);
    let c = |x: f64| x * (x - 1.0);
    let mut variance = (a(nn) - s(&ns, &a) - s(&ts, &a)) / 72.0;
    if nn > 2.0 {
        variance += s(&ns, &b) * s(&ts, &b) / (36.0 * b(nn));
    }
    variance += s(&ns, &c) * s(&ts, &c) / (8.0 * c(nn));
    let statistic = j2 as f64 / 2.0;
    let (z, p_normal) = if variance <= 1e-12 {
        (0.0, 1.0)
    } else {
        let sd = variance.sqrt();
        let normal = std_normal();
        match alternative {
            Alternative::Decreasing => {
                let z = (statistic - expected + 0.5) / sd;
                (z, normal.cdf(z))
            }
            Alternative::Increasing => {
                let z = (statistic - expected - 0.5) / sd;
                (z, 1.0 - normal.cdf(z))
            }
        }
    };
    let p_exact = (nn as usize <= EXACT_MAX_N).then(|| {
        let dist = jt_exact_distribution(&blocks, &sizes);
        match alternative {
            Alternative::Decreasing => tail_fraction(&dist, |x| x <= j2),
            Alternative::Increasing => tail_fraction(&dist, |x| x >= j2),
        }
    });
    Ok(JtResult {
        alternative,
        statistic,
        expected,
        variance,
        z,
        p_normal,
        p: p_exact.unwrap_or(p_normal),
        p_exact,
    })
}

/// Exact null distribution of the doubled rank sum of `n_a` labelled items.
fn ranksum_exact_distribution(blocks: &[Vec<usize>], n_a: usize) -> BTreeMap<i64, u128> {
    let mut states: BTreeMap<(usize, i64), u128> = BTreeMap::new();
    states.insert((0, 0), 1);
    let mut start = 0usize;
    for block in blocks {
        let t: usize = block.iter().sum();
        let doubled_mid = (2 * start + t + 1) as i64;
        let mut next: BTreeMap<(usize, i64), u128> = BTreeMap::new();
        for (&(taken, w2), &w) in &states {
            for c in 0..=t.min(n_a - taken) {
                *next.entry((taken + c, w2 + c as i64 * doubled_mid)).or_default() +=
                    w * binomial(t, c);
            }
        }
        states = next;
        start += t;
    }
    let mut dist = BTreeMap::new();
    for ((taken, w2), w) in states {
        if taken == n_a {
            *dist.entry(w2).or_default() += w;
        }
    }
    dist
}

/// Wilcoxon rank-sum test of `a` against `b`.
pub fn wilcoxon_ranksum(a: &[f64], b: &[f64]) -> Result<RankSumResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::argument("rank-sum test needs two non-empty samples"));
    }
    let blocks = tie_blocks(&[a, b])?;
    let (na, nb) = (a.len(), b.len());
    let n = na + nb;
    let mut w2 = 0i64;
    let mut start = 0usize;
    for block in &blocks {
        let t: usize = block.iter().sum();
        w2 += (block[0] * (2 * start + t + 1)) as i64;
        start += t;
    }
    let e2 = (na * (n + 1)) as i64;
    let statistic = w2 as f64 / 2.0;
    let expected = e2 as f64 / 2.0;
    let ties: f64 = blocks
        .iter()
        .map(|b| {
            let t = b.iter().sum::<usize>() as f64;
            t * t * t - t
        })
        .sum();
    let (naf, nbf, nf) = (na as f64, nb as f64, n as f64);
    let variance = naf * nbf / 12.0 * ((nf + 1.0) - ties / (nf * (nf - 1.0)).max(1.0));
    let normal = std_normal();
    let diff = statistic - expected;
    let (z, p_normal, p_lower_n, p_upper_n) = if variance <= 1e-12 {
        (0.0, 1.0, 1.0, 1.0)
    } else {
        let sd = variance.sqrt();
        let z = diff.signum() * (diff.abs() - 0.5).max(0.0) / sd;
        let p2 = (2.0 * (1.0 - normal.cdf(z.abs()))).min(1.0);
        let lower = normal.cdf((diff + 0.5) / sd);
        let upper = 1.0 - normal.cdf((diff - 0.5) / sd);
        (z, p2, lower, upper)
    };
    let exact = (n <= EXACT_MAX_N).then(|| {
        let dist = ranksum_exact_distribution(&blocks, na);
        let d = (w2 - e2).abs();
        (
            tail_fraction(&dist, |x| (x - e2).abs() >= d),
            tail_fraction(&dist, |x| x <= w2),
            tail_fraction(&dist, |x| x >= w2),
        )
    });
    Ok(RankSumResult {
        statistic,
        expected,
        variance,
        z,
        p_normal,
        p_exact: exact.map(|e| e.0),
        p: exact.map_or(p_normal, |e| e.0),
        p_lower: exact.map_or(p_lower_n, |e| e.1),
        p_upper: exact.map_or(p_upper_n, |e| e.2),
    })
}

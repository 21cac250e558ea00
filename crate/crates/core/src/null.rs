//! Inference under continuous independence.
//!
//! When `X` and `Y` are independent with continuous marginals, the response
//! ranks read off in predictor order form a uniformly random cyclic order, so
//! the null law of the statistic is free of the marginals. Writing
//! `S_n = sum_k D_k (n - D_k)` for that random cycle, `raw = 1 - 6 S_n /
//! (n^2 (n + 1))`, and
//!
//! ```text
//! E raw = 0,   Var raw = (n - 3)(n - 2) / (5 n^2 (n + 1)).
//! ```
//!
//! This module provides those moments in exact arithmetic, the exact null
//! distribution for small `n` by enumerating every cycle, and the normal and
//! conditional permutation tests.

use std::collections::BTreeMap;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circular::{cyclic_rank_profile, penalty_sum, CircularSample};
use crate::coefficient::{raw_from_penalty, CoefficientReport};
use crate::error::{Error, Result};
use crate::normal;

pub type Rational = Ratio<i128>;

fn q(num: i128, den: i128) -> Rational {
    Ratio::new(num, den)
}

fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullMoments {
    pub n: usize,
    pub mean_raw: f64,
    pub var_raw: f64,
    /// Present for `n >= 4`.
    pub var_corrected: Option<f64>,
}

/// Exact `Var(raw)` under the null.
pub fn null_variance_exact(n: usize) -> Result<Rational> {
    if n < 2 {
        return Err(Error::SampleTooSmall { n, min: 2 });
    }
    let m = n as i128;
    Ok(q((m - 3) * (m - 2), 5 * m * m * (m + 1)))
}

/// Exact `Var(corrected)` under the null, `n >= 4`.
pub fn null_variance_corrected_exact(n: usize) -> Result<Rational> {
    if n < 4 {
        return Err(Error::SampleTooSmall { n, min: 4 });
    }
    let m = n as i128;
    Ok(q(m + 1, 5 * (m - 2) * (m - 3)))
}

pub fn null_moments(n: usize) -> Result<NullMoments> {
    Ok(NullMoments {
        n,
        mean_raw: 0.0,
        var_raw: to_f64(&null_variance_exact(n)?),
        var_corrected: null_variance_corrected_exact(n).ok().map(|v| to_f64(&v)),
    })
}

/// Largest `n` accepted by the enumeration routines; `(n - 1)!` cycles.
pub const MAX_ENUMERATION_N: usize = 10;

/// Calls `f` once for every cyclic order of `0..n`, as a listing that
/// starts at 0 (Heap's algorithm on the remaining `n - 1` entries).
fn for_each_cycle(n: usize, mut f: impl FnMut(&[usize])) {
    let mut seq: Vec<usize> = (0..n).collect();
    let m = n - 1;
    let mut counters = vec![0usize; m];
    f(&seq);
    let mut i = 0;
    while i < m {
        if counters[i] < i {
            let j = if i % 2 == 0 { 0 } else { counters[i] };
            seq.swap(1 + j, 1 + i);
            f(&seq);
            counters[i] += 1;
            i = 0;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
}

fn check_enumeration(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::SampleTooSmall { n, min });
    }
    if n > MAX_ENUMERATION_N {
        return Err(Error::EnumerationTooLarge {
            n,
            max: MAX_ENUMERATION_N,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullPoint {
    /// `S_n = sum d (n - d)` for this support point.
    pub penalty: u64,
    pub value: Rational,
    pub probability: Rational,
}

/// Exact null distribution of the raw statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct NullDistribution {
    pub n: usize,
    /// Support points in increasing order of the statistic.
    pub points: Vec<NullPoint>,
}

impl NullDistribution {
    pub fn mean(&self) -> Rational {
        self.points
            .iter()
            .map(|p| p.value * p.probability)
            .fold(q(0, 1), |a, b| a + b)
    }

    pub fn variance(&self) -> Rational {
        let mean = self.mean();
        self.points
            .iter()
            .map(|p| (p.value - mean) * (p.value - mean) * p.probability)
            .fold(q(0, 1), |a, b| a + b)
    }

    /// `Var(S_n)`.
    pub fn penalty_variance(&self) -> Rational {
        let mean = self
            .points
            .iter()
            .map(|p| p.probability * p.penalty as i128)
            .fold(q(0, 1), |a, b| a + b);
        self.points
            .iter()
            .map(|p| {
                let c = Rational::from_integer(p.penalty as i128) - mean;
                c * c * p.probability
            })
            .fold(q(0, 1), |a, b| a + b)
    }

    /// `P(raw >= value)`.
    pub fn upper_tail(&self, value: f64) -> f64 {
        let tail = self
            .points
            .iter()
            .filter(|p| to_f64(&p.value) >= value - 1e-12)
            .map(|p| p.probability)
            .fold(q(0, 1), |a, b| a + b);
        to_f64(&tail)
    }
}

/// Enumerates all `(n - 1)!` cyclic orders and tabulates the statistic.
pub fn enumerate_null(n: usize) -> Result<NullDistribution> {
    check_enumeration(n, 2)?;
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for_each_cycle(n, |seq| {
        *counts.entry(penalty_sum(seq) as u64).or_default() += 1;
    });
    let total: i128 = (1..n as i128).product();
    let m = n as i128;
    let denom = m * m * (m + 1);
    // larger penalty means smaller statistic
    let points = counts
        .into_iter()
        .rev()
        .map(|(penalty, count)| NullPoint {
            penalty,
            value: q(denom - 6 * penalty as i128, denom),
            probability: q(count as i128, total),
        })
        .collect();
    Ok(NullDistribution { n, points })
}

/// One-edge and two-edge moments of `Z_k = D_k (n - D_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeMoments {
    pub mean: Rational,
    pub variance: Rational,
    pub cov_adjacent: Rational,
    pub cov_disjoint: Rational,
}

impl EdgeMoments {
    pub fn closed_form(n: usize) -> Self {
        let m = n as i128;
        EdgeMoments {
            mean: q(m * (m + 1), 6),
            variance: q(m * (m - 3) * (m - 2) * (m + 1), 180),
            cov_adjacent: q(-m * (m - 3) * (m + 1), 180),
            cov_disjoint: q(m * (m + 1), 90),
        }
    }
}

/// Edge moments by brute force over every cycle, `4 <= n <= 10`.
pub fn edge_moment_oracle(n: usize) -> Result<EdgeMoments> {
    check_enumeration(n, 4)?;
    let (mut s1, mut s11, mut s12, mut s13) = (0i128, 0i128, 0i128, 0i128);
    let mut count = 0i128;
    for_each_cycle(n, |seq| {
        let z = |k: usize| {
            let d = (seq[(k + 1) % n] + n - seq[k]) % n;
            (d * (n - d)) as i128
        };
        let (z1, z2, z3) = (z(0), z(1), z(2));
        s1 += z1;
        s11 += z1 * z1;
        s12 += z1 * z2;
        s13 += z1 * z3;
        count += 1;
    });
    let mean = q(s1, count);
    Ok(EdgeMoments {
        mean,
        variance: q(s11, count) - mean * mean,
        cov_adjacent: q(s12, count) - mean * mean,
        cov_disjoint: q(s13, count) - mean * mean,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestMethod {
    Normal,
    Permutation,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullTestReport {
    pub statistic: f64,
    pub z: Option<f64>,
    pub p_value: f64,
    pub method: TestMethod,
    pub permutations_used: Option<usize>,
    pub seed: Option<u64>,
}

impl NullTestReport {
    pub fn rejects(&self, level: f64) -> bool {
        self.p_value <= level
    }
}

/// One-sided normal test, `z = raw / sqrt(Var_0 raw)`, `p = P(Z > z)`.
pub fn test_normal(report: &CoefficientReport) -> Result<NullTestReport> {
    if report.n < 4 {
        return Err(Error::SampleTooSmall {
            n: report.n,
            min: 4,
        });
    }
    let z = report.raw / null_moments(report.n)?.var_raw.sqrt();
    Ok(NullTestReport {
        statistic: report.raw,
        z: Some(z),
        p_value: normal::sf(z),
        method: TestMethod::Normal,
        permutations_used: None,
        seed: None,
    })
}

/// Exact one-sided p-value from the enumerated null, `n <= 10`.
pub fn test_exact(report: &CoefficientReport) -> Result<NullTestReport> {
    let dist = enumerate_null(report.n)?;
    Ok(NullTestReport {
        statistic: report.raw,
        z: None,
        p_value: dist.upper_tail(report.raw),
        method: TestMethod::Exact,
        permutations_used: None,
        seed: None,
    })
}

/// Default number of random permutations.
pub const DEFAULT_PERMUTATIONS: usize = 499;

/// Conditional permutation test.
///
/// Keeps the predictor cyclic order fixed and shuffles the response cyclic
/// ranks. Permutation `j` draws from its own ChaCha stream `j` under `seed`,
/// so the result does not depend on scheduling.
/// `p = (1 + #{perm >= observed}) / (B + 1)`.
pub fn test_permutation(
    sample: &CircularSample,
    permutations: usize,
    seed: u64,
) -> Result<NullTestReport> {
    if permutations == 0 {
        return Err(Error::InvalidParameter(
            "at least one permutation is required".into(),
        ));
    }
    let profile = cyclic_rank_profile(sample)?;
    let sequence = profile.rank_sequence();
    let observed = penalty_sum(&sequence);
    // a smaller penalty is a larger statistic
    let exceed = (0..permutations as u64)
        .into_par_iter()
        .filter(|&j| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(j);
            let mut shuffled = sequence.clone();
            shuffled.shuffle(&mut rng);
            penalty_sum(&shuffled) <= observed
        })
        .count();
    Ok(NullTestReport {
        statistic: raw_from_penalty(profile.n(), observed),
        z: None,
        p_value: (1 + exceed) as f64 / (permutations + 1) as f64,
        method: TestMethod::Permutation,
        permutations_used: Some(permutations),
        seed: Some(seed),
    })
}

//! Angles on the unit circle, paired circular samples and cyclic ranks.
//!
//! Everything here works in turns: an angle is a point of `[0, 1)` and
//! arithmetic is modulo one. Radians and degrees are converted at the
//! boundary by [`normalize_angles`].

use std::f64::consts::TAU;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::mix_seed;

/// An angle measured in turns, reduced into `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Turn(f64);

impl Turn {
    pub const ZERO: Turn = Turn(0.0);

    /// Reduces `value` modulo one. Non-finite input is rejected.
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::InvalidAngle { index: 0, value });
        }
        Ok(Turn(reduce_mod1(value)))
    }

    pub fn from_radians(rad: f64) -> Result<Self> {
        if !rad.is_finite() {
            return Err(Error::InvalidAngle {
                index: 0,
                value: rad,
            });
        }
        Ok(Turn(reduce_mod1(rad.rem_euclid(TAU) / TAU)))
    }

    pub fn from_degrees(deg: f64) -> Result<Self> {
        if !deg.is_finite() {
            return Err(Error::InvalidAngle {
                index: 0,
                value: deg,
            });
        }
        Ok(Turn(reduce_mod1(deg.rem_euclid(360.0) / 360.0)))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn to_radians(self) -> f64 {
        self.0 * TAU
    }

    /// Counterclockwise arc length from `self` to `other`, in `[0, 1)`.
    pub fn arc_to(self, other: Turn) -> f64 {
        reduce_mod1(other.0 - self.0)
    }

    /// Rotates by `delta` turns.
    pub fn rotate(self, delta: f64) -> Turn {
        Turn(reduce_mod1(self.0 + delta))
    }

    /// Reflection `t -> 1 - t (mod 1)`.
    pub fn reflect(self) -> Turn {
        Turn(reduce_mod1(-self.0))
    }

    // Non-negative floats order the same way as their bit patterns.
    #[inline]
    fn sort_key(self) -> u64 {
        self.0.to_bits()
    }
}

impl fmt::Display for Turn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// The reduction `[v]_1` into `[0, 1)`.
#[inline]
pub(crate) fn reduce_mod1(v: f64) -> f64 {
    let r = v.rem_euclid(1.0);
    // rem_euclid can round up to exactly 1.0 for tiny negative inputs and
    // keeps the sign of -0.0.
    if r >= 1.0 {
        0.0
    } else {
        r + 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleUnit {
    Turns,
    #[default]
    Radians,
    Degrees,
}

/// Converts raw angles to turns and reduces them modulo one.
pub fn normalize_angles(values: &[f64], unit: AngleUnit) -> Result<Vec<Turn>> {
    values
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            let turn = match unit {
                AngleUnit::Turns => Turn::new(value),
                AngleUnit::Radians => Turn::from_radians(value),
                AngleUnit::Degrees => Turn::from_degrees(value),
            };
            turn.map_err(|_| Error::InvalidAngle { index, value })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
        })
    }
}

/// Paired circular observations `(x_i, y_i)`, `n >= 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircularSample {
    x: Vec<Turn>,
    y: Vec<Turn>,
}

impl CircularSample {
    pub fn new(x: Vec<Turn>, y: Vec<Turn>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch {
                x: x.len(),
                y: y.len(),
            });
        }
        if x.len() < 2 {
            return Err(Error::SampleTooSmall { n: x.len(), min: 2 });
        }
        Ok(CircularSample { x, y })
    }

    pub fn from_values(x: &[f64], y: &[f64], unit: AngleUnit) -> Result<Self> {
        Self::new(normalize_angles(x, unit)?, normalize_angles(y, unit)?)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &[Turn] {
        &self.x
    }

    pub fn y(&self) -> &[Turn] {
        &self.y
    }

    pub fn axis(&self, axis: Axis) -> &[Turn] {
        match axis {
            Axis::X => &self.x,
            Axis::Y => &self.y,
        }
    }

    /// The same sample with predictor and response exchanged.
    pub fn swapped(&self) -> CircularSample {
        CircularSample {
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }

    /// Applies `f` to every coordinate on one axis.
    pub fn map_axis(&self, axis: Axis, f: impl Fn(Turn) -> Turn) -> CircularSample {
        let mut out = self.clone();
        let values = match axis {
            Axis::X => &mut out.x,
            Axis::Y => &mut out.y,
        };
        values.iter_mut().for_each(|t| *t = f(*t));
        out
    }

    /// Indices involved in ties on `axis`, ascending. Empty when all distinct.
    pub fn tied_indices(&self, axis: Axis) -> Vec<usize> {
        tied_indices(self.axis(axis))
    }

    pub fn has_ties(&self) -> bool {
        !self.tied_indices(Axis::X).is_empty() || !self.tied_indices(Axis::Y).is_empty()
    }
}

fn tied_indices(values: &[Turn]) -> Vec<usize> {
    let sorted = sort_keys(values);
    let mut tied = Vec::new();
    let mut start = 0;
    while start < sorted.len() {
        let mut end = start + 1;
        while end < sorted.len() && sorted[end].0 == sorted[start].0 {
            end += 1;
        }
        if end - start > 1 {
            tied.extend(sorted[start..end].iter().map(|&(_, i)| i));
        }
        start = end;
    }
    tied.sort_unstable();
    tied
}

fn sort_keys(values: &[Turn]) -> Vec<(u64, usize)> {
    let mut keyed: Vec<(u64, usize)> = values
        .iter()
        .enumerate()
        .map(|(i, t)| (t.sort_key(), i))
        .collect();
    keyed.sort_unstable();
    keyed
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TiesMode {
    #[default]
    Reject,
    Jitter,
}

/// How tied coordinates are handled before ranking.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TiesPolicy {
    pub mode: TiesMode,
    /// Half-width of the uniform perturbation, in turns.
    pub jitter_scale: f64,
    pub seed: u64,
}

impl TiesPolicy {
    pub const DEFAULT_JITTER_SCALE: f64 = 1e-9;

    pub fn reject() -> Self {
        TiesPolicy {
            mode: TiesMode::Reject,
            jitter_scale: Self::DEFAULT_JITTER_SCALE,
            seed: 0,
        }
    }

    pub fn jitter(seed: u64) -> Self {
        TiesPolicy {
            mode: TiesMode::Jitter,
            jitter_scale: Self::DEFAULT_JITTER_SCALE,
            seed,
        }
    }

    pub fn with_scale(mut self, jitter_scale: f64) -> Self {
        self.jitter_scale = jitter_scale;
        self
    }
}

impl Default for TiesPolicy {
    fn default() -> Self {
        Self::reject()
    }
}

const MAX_JITTER_ROUNDS: u64 = 64;

/// Removes ties according to `policy`.
///
/// Under [`TiesMode::Jitter`] every tied coordinate receives an independent
/// uniform perturbation on `(-jitter_scale, jitter_scale)`, and the process
/// repeats with a fresh sub-seed until both axes are tie-free. Samples without
/// ties come back unchanged.
pub fn resolve_ties(sample: &CircularSample, policy: &TiesPolicy) -> Result<CircularSample> {
    let mut out = sample.clone();
    for (axis_id, axis) in [Axis::X, Axis::Y].into_iter().enumerate() {
        let mut tied = out.tied_indices(axis);
        if tied.is_empty() {
            continue;
        }
        match policy.mode {
            TiesMode::Reject => {
                return Err(Error::TiesPresent {
                    axis,
                    indices: tied,
                })
            }
            TiesMode::Jitter => {
                if !(policy.jitter_scale > 0.0 && policy.jitter_scale.is_finite()) {
                    return Err(Error::Domain {
                        what: "jitter_scale",
                        value: policy.jitter_scale,
                    });
                }
                let values = match axis {
                    Axis::X => &mut out.x,
                    Axis::Y => &mut out.y,
                };
                let mut round = 0;
                while !tied.is_empty() {
                    if round == MAX_JITTER_ROUNDS {
                        return Err(Error::InvalidParameter(format!(
                            "jitter scale {} too small to separate tied {} values",
                            policy.jitter_scale, axis
                        )));
                    }
                    let mut rng =
                        ChaCha8Rng::seed_from_u64(mix_seed(policy.seed, axis_id as u64, round));
                    for &i in &tied {
                        let delta = rng.random_range(-policy.jitter_scale..policy.jitter_scale);
                        values[i] = values[i].rotate(delta);
                    }
                    tied = tied_indices(values);
                    round += 1;
                }
            }
        }
    }
    Ok(out)
}

/// Cyclic order of the predictor and cyclic ranks of the response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclicRankProfile {
    order: Vec<usize>,
    ranks: Vec<usize>,
    increments: Vec<usize>,
}

impl CyclicRankProfile {
    /// Builds a profile from a predictor order `i_1..i_n` and response ranks.
    pub fn from_parts(order: Vec<usize>, ranks: Vec<usize>) -> Result<Self> {
        let n = order.len();
        if n < 2 {
            return Err(Error::SampleTooSmall { n, min: 2 });
        }
        if ranks.len() != n {
            return Err(Error::LengthMismatch {
                x: n,
                y: ranks.len(),
            });
        }
        if !is_permutation(&order) || !is_permutation(&ranks) {
            return Err(Error::InvalidParameter(
                "order and ranks must both be permutations of 0..n".into(),
            ));
        }
        let sequence: Vec<usize> = order.iter().map(|&i| ranks[i]).collect();
        let increments = increments_of(&sequence);
        Ok(CyclicRankProfile {
            order,
            ranks,
            increments,
        })
    }

    pub fn n(&self) -> usize {
        self.order.len()
    }

    /// Sample indices sorted by predictor angle, starting at the minimum.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// 0-based cyclic ranks of the response, indexed by sample position.
    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// Clockwise rank increments `d_k` along consecutive predictor edges.
    pub fn increments(&self) -> &[usize] {
        &self.increments
    }

    /// Response ranks read off in predictor order.
    pub fn rank_sequence(&self) -> Vec<usize> {
        self.order.iter().map(|&i| self.ranks[i]).collect()
    }

    /// Number of response revolutions per predictor revolution.
    pub fn winding_number(&self) -> usize {
        self.increments.iter().sum::<usize>() / self.n()
    }
}

fn is_permutation(values: &[usize]) -> bool {
    let mut seen = vec![false; values.len()];
    values
        .iter()
        .all(|&v| v < seen.len() && !std::mem::replace(&mut seen[v], true))
}

/// `d_k = (s[k+1] - s[k]) mod n`, cyclically.
pub(crate) fn increments_of(sequence: &[usize]) -> Vec<usize> {
    let n = sequence.len();
    (0..n)
        .map(|k| (sequence[(k + 1) % n] + n - sequence[k]) % n)
        .collect()
}

/// `sum_k d_k (n - d_k)` over the cyclic rank sequence, in exact arithmetic.
pub(crate) fn penalty_sum(sequence: &[usize]) -> u128 {
    penalty_of(sequence.iter().copied(), sequence.len())
}

fn penalty_of(sequence: impl Iterator<Item = usize> + Clone, n: usize) -> u128 {
    let Some(mut prev) = sequence.clone().last() else {
        return 0;
    };
    let mut total: u128 = 0;
    for cur in sequence {
        let d = if cur >= prev {
            cur - prev
        } else {
            cur + n - prev
        };
        total += (d as u128) * ((n - d) as u128);
        prev = cur;
    }
    total
}

/// Sorted order of one axis. Fails on ties.
pub(crate) fn strict_order(values: &[Turn], axis: Axis) -> Result<Vec<usize>> {
    let keyed = sort_keys(values);
    if keyed.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::TiesPresent {
            axis,
            indices: tied_indices(values),
        });
    }
    Ok(keyed.into_iter().map(|(_, i)| i).collect())
}

pub(crate) fn ranks_from_order(order: &[usize]) -> Vec<usize> {
    let mut ranks = vec![0; order.len()];
    for (r, &i) in order.iter().enumerate() {
        ranks[i] = r;
    }
    ranks
}

// Bucket by angle so each bucket fits in L2, then sort buckets in place.
// Order is exact since buckets are monotone in the angle. `scratch` must have
// the same length as `pairs` and holds the sorted result on return.
const BUCKET_TARGET: usize = 4096;
const MAX_BUCKETS: usize = 256;

fn sort_by_turn_key(pairs: &mut Vec<(u64, u64)>, scratch: &mut Vec<(u64, u64)>) {
    let n = pairs.len();
    let buckets = (n / BUCKET_TARGET).clamp(1, MAX_BUCKETS);
    if buckets == 1 {
        pairs.sort_unstable_by_key(|p| p.0);
        std::mem::swap(pairs, scratch);
        return;
    }
    let bucket_of = |key: u64| ((f64::from_bits(key) * buckets as f64) as usize).min(buckets - 1);
    let mut starts = vec![0usize; buckets + 1];
    for p in pairs.iter() {
        starts[bucket_of(p.0) + 1] += 1;
    }
    for b in 0..buckets {
        starts[b + 1] += starts[b];
    }
    let mut next = starts.clone();
    for &p in pairs.iter() {
        let b = bucket_of(p.0);
        scratch[next[b]] = p;
        next[b] += 1;
    }
    for w in starts.windows(2) {
        scratch[w[0]..w[1]].sort_unstable_by_key(|p| p.0);
    }
}

/// `(predictor key, response rank)` in predictor order, for `predictor` being
/// either axis.
///
/// Sorting `(response, predictor)` pairs by response and then
/// `(predictor, rank)` pairs by predictor needs no gather or scatter, which
/// keeps large inputs close to linear in memory traffic.
fn ranked_by_predictor(sample: &CircularSample, predictor: Axis) -> Result<Vec<(u64, u64)>> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::SampleTooSmall { n, min: 2 });
    }
    let response = match predictor {
        Axis::X => Axis::Y,
        Axis::Y => Axis::X,
    };
    let mut pairs: Vec<(u64, u64)> = sample
        .axis(response)
        .iter()
        .zip(sample.axis(predictor))
        .map(|(r, p)| (r.sort_key(), p.sort_key()))
        .collect();
    let mut scratch = vec![(0u64, 0u64); n];
    sort_by_turn_key(&mut pairs, &mut scratch);
    let response_tied = scratch.windows(2).any(|w| w[0].0 == w[1].0);
    for (rank, (out, sorted)) in pairs.iter_mut().zip(&scratch).enumerate() {
        *out = (sorted.1, rank as u64);
    }
    sort_by_turn_key(&mut pairs, &mut scratch);
    if scratch.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::TiesPresent {
            axis: predictor,
            indices: tied_indices(sample.axis(predictor)),
        });
    }
    if response_tied {
        return Err(Error::TiesPresent {
            axis: response,
            indices: tied_indices(sample.axis(response)),
        });
    }
    Ok(scratch)
}

/// `sum_k d_k (n - d_k)` for the sample read with `predictor` as predictor.
pub(crate) fn sample_penalty(sample: &CircularSample, predictor: Axis) -> Result<u128> {
    let ranked = ranked_by_predictor(sample, predictor)?;
    Ok(penalty_of(
        ranked.iter().map(|&(_, rank)| rank as usize),
        ranked.len(),
    ))
}

/// Sorts by predictor, ranks the response and forms the increments.
///
/// The cyclic order starts at the observation with the smallest `x`; any other
/// start gives a cyclic relabelling of the same increments.
pub fn cyclic_rank_profile(sample: &CircularSample) -> Result<CyclicRankProfile> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::SampleTooSmall { n, min: 2 });
    }
    let order = strict_order(sample.x(), Axis::X)?;
    let ranks = ranks_from_order(&strict_order(sample.y(), Axis::Y)?);
    let sequence: Vec<usize> = order.iter().map(|&i| ranks[i]).collect();
    let increments = increments_of(&sequence);
    Ok(CyclicRankProfile {
        order,
        ranks,
        increments,
    })
}

/// The discrepancy `h(t) = t (1 - t)` on `[0, 1]`.
pub fn discrepancy_h(t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain {
            what: "t",
            value: t,
        });
    }
    Ok(t * (1.0 - t))
}

//! The finite-sample circular coefficient, its corrected version and the
//! symmetric variant.
//!
//! With `d_k` the cyclic rank increments of the response along consecutive
//! predictor edges,
//!
//! ```text
//! raw       = 1 - 6 / (n^2 (n + 1)) * sum_k d_k (n - d_k)
//! corrected = raw / a_n,   a_n = (n - 2)(n - 3) / (n (n + 1)),   n >= 4
//! ```
//!
//! `raw` never exceeds `a_n`, with equality exactly when the two cyclic
//! orders agree or are reversed.

use serde::{Deserialize, Serialize};

use crate::circular::{penalty_sum, sample_penalty, Axis, CircularSample, CyclicRankProfile};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    XToY,
    YToX,
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientReport {
    pub raw: f64,
    /// `raw / a_n`; absent for `n < 4`, where `a_n <= 0`.
    pub corrected: Option<f64>,
    pub n: usize,
    pub direction: Direction,
    pub ties_applied: bool,
}

/// `a_n = (n - 2)(n - 3) / (n (n + 1))`, the largest attainable raw value.
pub fn correction_factor(n: usize) -> f64 {
    let n = n as f64;
    (n - 2.0) * (n - 3.0) / (n * (n + 1.0))
}

// n^2 (n + 1) - 6 * penalty, exact.
fn numerator(n: usize, penalty: u128) -> i128 {
    let n = n as i128;
    n * n * (n + 1) - 6 * penalty as i128
}

/// Raw statistic from the exact penalty sum `sum d (n - d)`.
pub(crate) fn raw_from_penalty(n: usize, penalty: u128) -> f64 {
    let m = n as i128;
    numerator(n, penalty) as f64 / (m * m * (m + 1)) as f64
}

/// Corrected statistic, formed as one quotient so that agreement gives 1.0.
pub(crate) fn corrected_from_penalty(n: usize, penalty: u128) -> Option<f64> {
    let m = n as i128;
    (n >= 4).then(|| numerator(n, penalty) as f64 / (m * (m - 2) * (m - 3)) as f64)
}

/// The circular coefficient of a cyclic rank profile (predictor -> response).
pub fn xi_circular(profile: &CyclicRankProfile) -> CoefficientReport {
    report_from_penalty(
        profile.n(),
        penalty_sum(&profile.rank_sequence()),
        Direction::XToY,
    )
}

fn report_from_penalty(n: usize, penalty: u128, direction: Direction) -> CoefficientReport {
    CoefficientReport {
        raw: raw_from_penalty(n, penalty),
        corrected: corrected_from_penalty(n, penalty),
        n,
        direction,
        ties_applied: false,
    }
}

/// Directed or symmetric coefficient of a tie-free sample.
pub fn xi_circular_directed(
    sample: &CircularSample,
    direction: Direction,
) -> Result<CoefficientReport> {
    match direction {
        Direction::XToY => Ok(report_from_penalty(
            sample.len(),
            sample_penalty(sample, Axis::X)?,
            direction,
        )),
        Direction::YToX => Ok(report_from_penalty(
            sample.len(),
            sample_penalty(sample, Axis::Y)?,
            direction,
        )),
        Direction::Symmetric => xi_circular_symmetric(sample),
    }
}

/// Maximum of the two directed coefficients.
pub fn xi_circular_symmetric(sample: &CircularSample) -> Result<CoefficientReport> {
    let forward = xi_circular_directed(sample, Direction::XToY)?;
    let backward = xi_circular_directed(sample, Direction::YToX)?;
    Ok(CoefficientReport {
        raw: forward.raw.max(backward.raw),
        corrected: forward
            .corrected
            .zip(backward.corrected)
            .map(|(a, b)| a.max(b)),
        n: forward.n,
        direction: Direction::Symmetric,
        ties_applied: false,
    })
}

//! Classical circular-circular correlations used as baselines.
//!
//! Both are signed here; callers that tabulate them take absolute values.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::circular::{CircularSample, Turn};
use crate::error::{Error, Result};

/// Resultant lengths below this leave the mean direction undefined.
pub const RESULTANT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircularMean {
    /// `None` when the unit vectors (nearly) cancel.
    pub direction: Option<Turn>,
    pub resultant_length: f64,
}

/// Mean direction and mean resultant length of a set of angles.
pub fn circular_mean(angles: &[Turn]) -> Result<CircularMean> {
    if angles.is_empty() {
        return Err(Error::SampleTooSmall { n: 0, min: 1 });
    }
    let (s, c) = angles.iter().fold((0.0, 0.0), |(s, c), t| {
        let (ts, tc) = t.to_radians().sin_cos();
        (s + ts, c + tc)
    });
    let n = angles.len() as f64;
    let resultant_length = ((s / n).hypot(c / n)).min(1.0);
    let direction = if resultant_length < RESULTANT_EPS {
        None
    } else {
        Some(Turn::from_radians(s.atan2(c))?)
    };
    Ok(CircularMean {
        direction,
        resultant_length,
    })
}

/// Centred-sine correlation about the sample mean directions
/// (Jammalamadaka and Sarma).
pub fn js_correlation(sample: &CircularSample) -> Result<f64> {
    let centred_sines = |angles: &[Turn], what: &'static str| -> Result<Vec<f64>> {
        let mean = circular_mean(angles)?
            .direction
            .ok_or(Error::DegenerateSample(what))?;
        Ok(angles
            .iter()
            .map(|t| (TAU * (t.value() - mean.value())).sin())
            .collect())
    };
    let sx = centred_sines(sample.x(), "x has no defined circular mean")?;
    let sy = centred_sines(sample.y(), "y has no defined circular mean")?;
    let num: f64 = sx.iter().zip(&sy).map(|(a, b)| a * b).sum();
    let sxx: f64 = sx.iter().map(|a| a * a).sum();
    let syy: f64 = sy.iter().map(|b| b * b).sum();
    ratio(num, sxx, syy)
}

/// Pairwise-difference correlation (Fisher and Lee), evaluated over all
/// `n (n - 1) / 2` pairs.
pub fn fl_correlation(sample: &CircularSample) -> Result<f64> {
    let trig = |angles: &[Turn]| -> Vec<(f64, f64)> {
        angles.iter().map(|t| t.to_radians().sin_cos()).collect()
    };
    let tx = trig(sample.x());
    let ty = trig(sample.y());
    let n = tx.len();
    let (mut num, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (sxi, cxi) = tx[i];
        let (syi, cyi) = ty[i];
        for j in (i + 1)..n {
            // sin(a - b) = sin a cos b - cos a sin b
            let dx = sxi * tx[j].1 - cxi * tx[j].0;
            let dy = syi * ty[j].1 - cyi * ty[j].0;
            num += dx * dy;
            sxx += dx * dx;
            syy += dy * dy;
        }
    }
    ratio(num, sxx, syy)
}

fn ratio(num: f64, sxx: f64, syy: f64) -> Result<f64> {
    let den = (sxx * syy).sqrt();
    if den.is_nan() || den <= 0.0 {
        return Err(Error::DegenerateSample(
            "zero denominator in circular correlation",
        ));
    }
    Ok((num / den).clamp(-1.0, 1.0))
}

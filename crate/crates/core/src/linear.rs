//! The ordinary (real-line) Chatterjee statistic and cut-point linearizations
//! of the circle.
//!
//! Cutting the predictor circle at `a` and the response circle at `b` maps
//! each observation to `([x - a]_1, [y - b]_1)`, after which the ordinary
//! statistic applies. The value depends on the cuts; averaging it over all
//! `n^2` pairs of sample gaps recovers the cyclic-rank coefficient exactly.

use serde::{Deserialize, Serialize};

use crate::circular::{ranks_from_order, strict_order, Axis, CircularSample, Turn};
use crate::error::{Error, Result};

/// Ordinary Chatterjee statistic for tie-free real data.
///
/// Sorts by `x`, takes the ranks `r_i` of the concomitant `y` values and
/// returns `1 - 3 / (n^2 - 1) * sum |r_{i+1} - r_i|`.
pub fn xi_linear(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            x: x.len(),
            y: y.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::SampleTooSmall { n, min: 2 });
    }
    for (i, &v) in x.iter().chain(y).enumerate() {
        if !v.is_finite() {
            return Err(Error::InvalidAngle {
                index: i % n,
                value: v,
            });
        }
    }
    let order = real_order(x, Axis::X)?;
    let ranks = ranks_from_order(&real_order(y, Axis::Y)?);
    let sequence: Vec<usize> = order.iter().map(|&i| ranks[i]).collect();
    Ok(linear_from_sequence(&sequence))
}

fn real_order(values: &[f64], axis: Axis) -> Result<Vec<usize>> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    if let Some(w) = idx.windows(2).find(|w| values[w[0]] == values[w[1]]) {
        let v = values[w[0]];
        let indices = (0..values.len()).filter(|&i| values[i] == v).collect();
        return Err(Error::TiesPresent { axis, indices });
    }
    Ok(idx)
}

fn linear_from_sequence(ranks_in_order: &[usize]) -> f64 {
    let n = ranks_in_order.len();
    let total: usize = ranks_in_order.windows(2).map(|w| w[0].abs_diff(w[1])).sum();
    1.0 - 3.0 * total as f64 / (n * n - 1) as f64
}

/// Where one circle is cut.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cut {
    /// Cut at a fixed angle.
    Angle(Turn),
    /// Cut strictly inside the `g`-th sample gap, `g` in `1..=n`: gap `g`
    /// separates the `g`-th and `(g+1)`-th smallest observations and gap `n`
    /// wraps from the largest back to the smallest.
    Gap(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutPair {
    pub predictor: Cut,
    pub response: Cut,
}

impl CutPair {
    pub fn angles(a: f64, b: f64) -> Result<Self> {
        Ok(CutPair {
            predictor: Cut::Angle(Turn::new(a)?),
            response: Cut::Angle(Turn::new(b)?),
        })
    }

    pub fn gaps(a: usize, b: usize) -> Self {
        CutPair {
            predictor: Cut::Gap(a),
            response: Cut::Gap(b),
        }
    }
}

/// `k x k` equally spaced angle cuts `{0, 1/k, .., (k-1)/k}`, predictor-major.
pub fn angle_grid(k: usize) -> Vec<CutPair> {
    let step = |i: usize| Cut::Angle(Turn::new(i as f64 / k as f64).expect("finite"));
    (0..k)
        .flat_map(|i| {
            (0..k).map(move |j| CutPair {
                predictor: step(i),
                response: step(j),
            })
        })
        .collect()
}

/// All `n^2` sample-gap cut pairs, predictor-major.
pub fn gap_grid(n: usize) -> Vec<CutPair> {
    (1..=n)
        .flat_map(|a| (1..=n).map(move |b| CutPair::gaps(a, b)))
        .collect()
}

fn check_gap(g: usize, n: usize) -> Result<()> {
    if g == 0 || g > n {
        return Err(Error::InvalidParameter(format!(
            "gap index {g} outside 1..={n}"
        )));
    }
    Ok(())
}

// Linear coordinates of one axis after cutting.
fn encode_axis(values: &[Turn], cut: Cut, axis: Axis) -> Result<Vec<f64>> {
    match cut {
        Cut::Angle(a) => {
            if let Some(index) = values.iter().position(|&v| v == a) {
                return Err(Error::CutOnDatum {
                    axis,
                    cut: a.value(),
                    index,
                });
            }
            Ok(values.iter().map(|v| a.arc_to(*v)).collect())
        }
        Cut::Gap(g) => {
            let n = values.len();
            check_gap(g, n)?;
            // A cut anywhere inside the gap yields the same linear order:
            // the observation right after the gap comes first.
            let ranks = ranks_from_order(&strict_order(values, axis)?);
            Ok(ranks
                .iter()
                .map(|&r| ((r + n - g % n) % n) as f64)
                .collect())
        }
    }
}

/// Ordinary statistic of the sample linearized at `cut`.
pub fn xi_borel_cut(sample: &CircularSample, cut: &CutPair) -> Result<f64> {
    let x = encode_axis(sample.x(), cut.predictor, Axis::X)?;
    let y = encode_axis(sample.y(), cut.response, Axis::Y)?;
    xi_linear(&x, &y)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutScanReport {
    pub mean: f64,
    /// Standard deviation over the grid, dividing by the grid size.
    pub sd: f64,
    pub min: f64,
    pub max: f64,
    pub grid: Vec<(CutPair, f64)>,
}

/// Offset of an angle cut nudged by this much when it lands on a datum.
pub const CUT_NUDGE: f64 = 1e-12;

/// Pre-sorted sample that evaluates any cut pair in `O(n)`.
///
/// Cutting at angle `a` starts the linear order at the first observation at
/// or after `a`; cutting in gap `g` starts it at sorted position `g mod n`.
/// Either way the linear ranks are cyclic ranks shifted by that offset.
pub(crate) struct CutEvaluator {
    sorted_x: Vec<f64>,
    sorted_y: Vec<f64>,
    sequence: Vec<usize>,
}

impl CutEvaluator {
    pub(crate) fn new(sample: &CircularSample) -> Result<Self> {
        let x_order = strict_order(sample.x(), Axis::X)?;
        let y_order = strict_order(sample.y(), Axis::Y)?;
        let y_ranks = ranks_from_order(&y_order);
        Ok(CutEvaluator {
            sorted_x: x_order.iter().map(|&i| sample.x()[i].value()).collect(),
            sorted_y: y_order.iter().map(|&i| sample.y()[i].value()).collect(),
            sequence: x_order.iter().map(|&i| y_ranks[i]).collect(),
        })
    }

    fn offset(sorted: &[f64], cut: Cut) -> Result<usize> {
        let n = sorted.len();
        match cut {
            Cut::Gap(g) => {
                check_gap(g, n)?;
                Ok(g % n)
            }
            Cut::Angle(a) => {
                let mut a = a.value();
                if sorted.binary_search_by(|v| v.total_cmp(&a)).is_ok() {
                    a += CUT_NUDGE;
                }
                Ok(sorted.partition_point(|&v| v < a) % n)
            }
        }
    }

    pub(crate) fn evaluate(&self, cut: &CutPair) -> Result<f64> {
        let n = self.sequence.len();
        let start = Self::offset(&self.sorted_x, cut.predictor)?;
        let shift = Self::offset(&self.sorted_y, cut.response)?;
        let linear = |k: usize| (self.sequence[(start + k) % n] + n - shift) % n;
        let mut total = 0usize;
        let mut prev = linear(0);
        for k in 1..n {
            let cur = linear(k);
            total += prev.abs_diff(cur);
            prev = cur;
        }
        Ok(1.0 - 3.0 * total as f64 / (n * n - 1) as f64)
    }
}

/// Evaluates the cut statistic over `grid` and summarizes it.
///
/// Angle cuts that coincide with an observation are moved forward by
/// [`CUT_NUDGE`] instead of failing the scan.
pub fn cut_scan(sample: &CircularSample, grid: &[CutPair]) -> Result<CutScanReport> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("cut grid is empty".into()));
    }
    let evaluator = CutEvaluator::new(sample)?;
    let values = grid
        .iter()
        .map(|cut| evaluator.evaluate(cut).map(|v| (*cut, v)))
        .collect::<Result<Vec<_>>>()?;
    let count = values.len() as f64;
    let mean = values.iter().map(|(_, v)| v).sum::<f64>() / count;
    let var = values.iter().map(|(_, v)| (v - mean).powi(2)).sum::<f64>() / count;
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, v)| {
            (lo.min(*v), hi.max(*v))
        });
    Ok(CutScanReport {
        mean,
        sd: var.sqrt(),
        min,
        max,
        grid: values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circular::AngleUnit;
    use crate::coefficient::xi_circular_directed;
    use crate::Direction;

    fn sample(x: &[f64], y: &[f64]) -> CircularSample {
        CircularSample::from_values(x, y, AngleUnit::Turns).unwrap()
    }

    #[test]
    fn monotone_data() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let up: Vec<f64> = x.iter().map(|v| v * 2.0 + 1.0).collect();
        let down: Vec<f64> = x.iter().map(|v| -v).collect();
        let expected = 1.0 - 27.0 / 99.0;
        assert!((xi_linear(&x, &up).unwrap() - expected).abs() < 1e-15);
        assert!((xi_linear(&x, &down).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn three_points_by_enumeration() {
        // y ranks (1, 3, 2): increments 2 and 1
        let v = xi_linear(&[1.0, 2.0, 3.0], &[10.0, 30.0, 20.0]).unwrap();
        assert!((v - (-0.125)).abs() < 1e-15);
    }

    #[test]
    fn linear_errors() {
        assert!(matches!(
            xi_linear(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]),
            Err(Error::TiesPresent { axis: Axis::X, .. })
        ));
        assert!(matches!(
            xi_linear(&[1.0, 2.0, 3.0], &[1.0, 2.0, 1.0]),
            Err(Error::TiesPresent { axis: Axis::Y, ref indices }) if indices == &vec![0, 2]
        ));
        assert!(matches!(
            xi_linear(&[1.0], &[1.0]),
            Err(Error::SampleTooSmall { .. })
        ));
        assert!(xi_linear(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn rotation_cut_at_zero_wraps_once() {
        let x: Vec<f64> = (0..16).map(|i| (i as f64 + 0.5) / 16.0).collect();
        let y: Vec<f64> = x.iter().map(|v| v + 0.125).collect();
        let s = sample(&x, &y);
        let borel = xi_borel_cut(&s, &CutPair::angles(0.0, 0.0).unwrap()).unwrap();
        let wrapped: Vec<f64> = y.iter().map(|v| v % 1.0).collect();
        assert_eq!(borel, xi_linear(&x, &wrapped).unwrap());
        // two wrap points break the monotone run once
        assert!(borel < 1.0 - 3.0 * 15.0 / 255.0);
    }

    #[test]
    fn cut_on_datum() {
        let s = sample(&[0.0, 0.3, 0.6], &[0.1, 0.2, 0.5]);
        assert!(matches!(
            xi_borel_cut(&s, &CutPair::angles(0.0, 0.9).unwrap()),
            Err(Error::CutOnDatum {
                axis: Axis::X,
                index: 0,
                ..
            })
        ));
        // the scan nudges instead, which equals cutting just past the datum
        let scan = cut_scan(&s, &[CutPair::angles(0.0, 0.9).unwrap()]).unwrap();
        let nudged = xi_borel_cut(&s, &CutPair::angles(CUT_NUDGE, 0.9).unwrap()).unwrap();
        assert_eq!(scan.mean, nudged);
    }

    #[test]
    fn gap_index_range() {
        let s = sample(&[0.1, 0.3, 0.6], &[0.1, 0.2, 0.5]);
        assert!(xi_borel_cut(&s, &CutPair::gaps(0, 1)).is_err());
        assert!(xi_borel_cut(&s, &CutPair::gaps(1, 4)).is_err());
        assert!(cut_scan(&s, &[CutPair::gaps(4, 1)]).is_err());
    }

    #[test]
    fn single_cut_scan() {
        let s = sample(&[0.1, 0.3, 0.6, 0.8], &[0.4, 0.2, 0.5, 0.9]);
        let r = cut_scan(&s, &[CutPair::angles(0.2, 0.7).unwrap()]).unwrap();
        assert_eq!(r.mean, r.min);
        assert_eq!(r.mean, r.max);
        assert_eq!(r.sd, 0.0);
        assert!(cut_scan(&s, &[]).is_err());
    }

    #[test]
    fn gap_cuts_average_to_circular_coefficient() {
        let x = [0.05, 0.93, 0.41, 0.27, 0.66, 0.12, 0.78];
        let y = [0.33, 0.01, 0.72, 0.58, 0.19, 0.86, 0.47];
        let s = sample(&x, &y);
        let literal: f64 = gap_grid(7)
            .iter()
            .map(|c| xi_borel_cut(&s, c).unwrap())
            .sum::<f64>()
            / 49.0;
        let scan = cut_scan(&s, &gap_grid(7)).unwrap();
        let xi = xi_circular_directed(&s, Direction::XToY).unwrap().raw;
        assert!((literal - xi).abs() < 1e-14);
        assert!((scan.mean - xi).abs() < 1e-14);
    }

    #[test]
    fn evaluator_matches_literal_encoding() {
        let x = [0.05, 0.93, 0.41, 0.27, 0.66, 0.12, 0.78, 0.5];
        let y = [0.33, 0.01, 0.72, 0.58, 0.19, 0.86, 0.47, 0.99];
        let s = sample(&x, &y);
        let eval = CutEvaluator::new(&s).unwrap();
        for cut in angle_grid(8).iter().skip(1).chain(gap_grid(8).iter()) {
            if let Ok(v) = xi_borel_cut(&s, cut) {
                assert_eq!(eval.evaluate(cut).unwrap(), v, "{cut:?}");
            }
        }
        // mixed kinds
        let mixed = CutPair {
            predictor: Cut::Gap(3),
            response: Cut::Angle(Turn::new(0.4).unwrap()),
        };
        assert_eq!(
            eval.evaluate(&mixed).unwrap(),
            xi_borel_cut(&s, &mixed).unwrap()
        );
    }

    #[test]
    fn grids_have_expected_shape() {
        let g = angle_grid(8);
        assert_eq!(g.len(), 64);
        assert_eq!(g[1], CutPair::angles(0.0, 0.125).unwrap());
        assert_eq!(gap_grid(5).len(), 25);
    }
}

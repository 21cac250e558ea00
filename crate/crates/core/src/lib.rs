//! Cyclic-rank Chatterjee coefficient for paired circular data.
//!
//! Angles are handled internally in turns (the circle is `R/Z`, one full
//! revolution = 1). The statistic only looks at the cyclic order of the
//! predictor and the cyclic ranks of the response, so it does not depend on
//! where either circle is cut.
//!
//! ```
//! use circxi::{AngleUnit, CircularSample, Direction, xi_circular_directed};
//!
//! let x = [0.1, 0.2, 0.3, 0.4];
//! let y = [0.15, 0.35, 0.55, 0.75];
//! let sample = CircularSample::from_values(&x, &y, AngleUnit::Turns).unwrap();
//! let report = xi_circular_directed(&sample, Direction::XToY).unwrap();
//! assert!((report.raw - 0.1).abs() < 1e-15);
//! assert_eq!(report.corrected, Some(1.0));
//! ```

pub mod circular;
pub mod coefficient;
pub mod competitors;
mod error;
pub mod linear;
pub mod normal;
pub mod null;
pub mod population;
pub mod simulation;
pub(crate) mod stats;

pub use circular::{
    cyclic_rank_profile, discrepancy_h, normalize_angles, resolve_ties, AngleUnit, Axis,
    CircularSample, CyclicRankProfile, TiesMode, TiesPolicy, Turn,
};
pub use coefficient::{
    correction_factor, xi_circular, xi_circular_directed, xi_circular_symmetric, CoefficientReport,
    Direction,
};
pub use error::{Error, Result};
pub use linear::{cut_scan, xi_borel_cut, xi_linear, Cut, CutPair, CutScanReport};
pub use null::{
    enumerate_null, null_moments, test_exact, test_normal, test_permutation, NullMoments,
    NullTestReport, TestMethod,
};

pub use population::{
    bessel_ratio, noise_cf, xi_population_additive, xi_population_mc, McEstimate, NoiseModel,
    SeriesResult,
};

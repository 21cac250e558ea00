//! Population values of the coefficient.
//!
//! For an additive circular model `U = S + eps (mod 1)` with noise
//! independent of the uniform predictor rank `S`, the coefficient is
//!
//! ```text
//! xi = 6 / pi^2 * sum_{m >= 1} |phi(m)|^2 / m^2,    phi(m) = E exp(2 pi i m eps),
//! ```
//!
//! which lies in `[0, 1]`, is 1 without noise and 0 for noise uniform on the
//! circle. The series is evaluated here with a certified truncation bound and
//! can be cross-checked against a direct Monte Carlo estimate of the
//! dispersion form `1 - 6 E h([U_2 - U_1]_1)`.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circular::{discrepancy_h, reduce_mod1, Turn};
use crate::error::{Error, Result};

/// Symmetric circular noise laws with real characteristic functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    None,
    /// Wrapped normal; `sigma` is the unwrapped standard deviation in turns.
    WrappedNormal {
        sigma: f64,
    },
    /// Von Mises with concentration `kappa` and mean direction zero.
    VonMises {
        kappa: f64,
    },
    /// Uniform on a centred arc of the given length, in turns.
    UniformArc {
        length: f64,
    },
}

impl NoiseModel {
    /// Wrapped normal with `sigma` given in radians.
    pub fn wrapped_normal_radians(sigma_rad: f64) -> Self {
        NoiseModel::WrappedNormal {
            sigma: sigma_rad / TAU,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::None => Ok(()),
            NoiseModel::WrappedNormal { sigma } if sigma.is_finite() && sigma >= 0.0 => Ok(()),
            NoiseModel::WrappedNormal { sigma } => Err(Error::Domain {
                what: "sigma",
                value: sigma,
            }),
            NoiseModel::VonMises { kappa } if kappa.is_finite() && kappa >= 0.0 => Ok(()),
            NoiseModel::VonMises { kappa } => Err(Error::Domain {
                what: "kappa",
                value: kappa,
            }),
            NoiseModel::UniformArc { length } if length > 0.0 && length <= 1.0 => Ok(()),
            NoiseModel::UniformArc { length } => Err(Error::Domain {
                what: "arc length",
                value: length,
            }),
        }
    }

    /// Draws one noise value, in turns (not reduced).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            NoiseModel::None => 0.0,
            NoiseModel::WrappedNormal { sigma } => {
                if sigma == 0.0 {
                    0.0
                } else {
                    Normal::new(0.0, sigma)
                        .expect("validated sigma")
                        .sample(rng)
                }
            }
            NoiseModel::VonMises { kappa } => sample_von_mises(kappa, rng) / TAU,
            NoiseModel::UniformArc { length } => (rng.random::<f64>() - 0.5) * length,
        }
    }
}

/// `sin(pi x)`, exactly zero at integers.
fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    if r == r.trunc() {
        return 0.0;
    }
    (PI * r).sin()
}

/// Characteristic function `phi(m)` of the noise at frequency `m >= 1`.
pub fn noise_cf(model: &NoiseModel, m: u64) -> Result<f64> {
    model.validate()?;
    if m < 1 {
        return Err(Error::Domain {
            what: "frequency",
            value: m as f64,
        });
    }
    let mf = m as f64;
    Ok(match *model {
        NoiseModel::None => 1.0,
        NoiseModel::WrappedNormal { sigma } => (-2.0 * PI * PI * sigma * sigma * mf * mf).exp(),
        NoiseModel::VonMises { kappa } => bessel_ratio(m, kappa),
        NoiseModel::UniformArc { length } => sin_pi(mf * length) / (PI * mf * length),
    })
}

/// `I_m(kappa) / I_0(kappa)`.
pub fn bessel_ratio(m: u64, kappa: f64) -> f64 {
    *bessel_ratios(m as usize, kappa)
        .last()
        .expect("at least the m = 0 entry")
}

/// `I_m(kappa) / I_0(kappa)` for `m = 0..=m_max`.
///
/// Uses the backward recurrence `r_k = 1 / (2k / kappa + r_{k+1})` for the
/// successive ratios `r_k = I_k / I_{k-1}`, started well above both `m_max`
/// and `kappa` from the uniform asymptotic estimate, then multiplies up from
/// `I_0`. Forward recurrence loses all accuracy once `m > kappa`.
pub fn bessel_ratios(m_max: usize, kappa: f64) -> Vec<f64> {
    let mut out = vec![0.0; m_max + 1];
    out[0] = 1.0;
    if m_max == 0 || kappa == 0.0 {
        return out;
    }
    let start = m_max.max(kappa.ceil() as usize) + 64;
    let k = (start + 1) as f64;
    let mut next = kappa / (k + (k * k + kappa * kappa).sqrt());
    let mut successive = vec![0.0; m_max + 1];
    for k in (1..=start).rev() {
        let r = 1.0 / (2.0 * k as f64 / kappa + next);
        if k <= m_max {
            successive[k] = r;
        }
        next = r;
    }
    for m in 1..=m_max {
        out[m] = out[m - 1] * successive[m];
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesResult {
    pub value: f64,
    pub terms_used: u64,
    /// Certified bound on the neglected tail.
    pub tail_bound: f64,
}

const MAX_SERIES_TERMS: u64 = 1 << 32;

/// Sums the additive-noise series until the tail bound drops below `tol`.
///
/// The tail after `M` terms is bounded by `6 / pi^2 * E(M) / M`, where
/// `sum_{m > M} m^-2 < 1 / M` and `E(M) >= sup_{m > M} phi(m)^2` is an
/// envelope of the squared characteristic function: 1 without noise,
/// `phi(M + 1)^2` for the wrapped normal and von Mises laws (both decrease
/// in `m`), and `(pi (M + 1) a)^-2` for the uniform arc.
pub fn xi_population_additive(model: &NoiseModel, tol: f64) -> Result<SeriesResult> {
    model.validate()?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Domain {
            what: "tol",
            value: tol,
        });
    }
    let scale = 6.0 / (PI * PI);
    let mut ratios: Vec<f64> = Vec::new();
    let mut cf = |m: u64| -> f64 {
        match *model {
            NoiseModel::VonMises { kappa } => {
                if m as usize >= ratios.len() {
                    ratios = bessel_ratios((2 * m as usize).max(64), kappa);
                }
                ratios[m as usize]
            }
            _ => noise_cf(model, m).expect("validated"),
        }
    };
    let envelope = |m_next: u64, phi_next: f64| -> f64 {
        match *model {
            NoiseModel::None => 1.0,
            NoiseModel::WrappedNormal { .. } | NoiseModel::VonMises { .. } => phi_next * phi_next,
            NoiseModel::UniformArc { length } => {
                (1.0 / (PI * m_next as f64 * length)).min(1.0).powi(2)
            }
        }
    };
    // Neumaier-compensated running sum
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    let mut m = 0u64;
    let mut phi_next = cf(1);
    loop {
        m += 1;
        let phi = phi_next;
        let term = phi * phi / (m as f64 * m as f64);
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
        phi_next = cf(m + 1);
        let tail_bound = scale * envelope(m + 1, phi_next) / m as f64;
        if tail_bound <= tol {
            return Ok(SeriesResult {
                value: scale * (sum + comp),
                terms_used: m,
                tail_bound,
            });
        }
        if m >= MAX_SERIES_TERMS {
            return Err(Error::InvalidParameter(format!(
                "tolerance {tol} needs more than {MAX_SERIES_TERMS} terms"
            )));
        }
    }
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub replicates: usize,
}

const MC_CHUNK: usize = 8192;

/// Estimates `1 - 6 E h([U_2 - U_1]_1)` by simulation.
///
/// Each replicate draws `S` uniform on the circle and asks `sampler` for two
/// conditionally independent response ranks given `S` (in turns). Replicates
/// are processed in fixed chunks, chunk `c` drawing from ChaCha stream `c`,
/// so the estimate does not depend on the thread count.
pub fn xi_population_mc<F>(sampler: F, replicates: usize, seed: u64) -> Result<McEstimate>
where
    F: Fn(f64, &mut ChaCha8Rng) -> (f64, f64) + Sync,
{
    if replicates == 0 {
        return Err(Error::InvalidParameter(
            "replicates must be positive".into(),
        ));
    }
    let chunks = replicates.div_ceil(MC_CHUNK);
    // (count, mean, M2) per chunk, merged in chunk order
    let parts: Vec<(f64, f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = MC_CHUNK.min(replicates - c * MC_CHUNK);
            let (mut mean, mut m2) = (0.0, 0.0);
            for i in 0..len {
                let s = rng.random::<f64>();
                let (u1, u2) = sampler(s, &mut rng);
                let h = discrepancy_h(reduce_mod1(u2 - u1)).expect("reduced into [0, 1)");
                let v = 1.0 - 6.0 * h;
                let delta = v - mean;
                mean += delta / (i + 1) as f64;
                m2 += delta * (v - mean);
            }
            (len as f64, mean, m2)
        })
        .collect();
    let (count, mean, m2) =
        parts
            .into_iter()
            .fold((0.0, 0.0, 0.0), |(na, ma, sa), (nb, mb, sb)| {
                let n = na + nb;
                let delta = mb - ma;
                (
                    n,
                    ma + delta * nb / n,
                    sa + sb + delta * delta * na * nb / n,
                )
            });
    let var = if count > 1.0 { m2 / (count - 1.0) } else { 0.0 };
    Ok(McEstimate {
        value: mean,
        std_error: (var / count).sqrt(),
        replicates,
    })
}

/// Conditional sampler for `U = S + eps (mod 1)`.
pub fn additive_sampler(model: NoiseModel) -> impl Fn(f64, &mut ChaCha8Rng) -> (f64, f64) + Sync {
    move |s, rng| {
        let u1 = reduce_mod1(s + model.sample(rng));
        let u2 = reduce_mod1(s + model.sample(rng));
        (u1, u2)
    }
}

/// Von Mises draw in radians on `(-pi, pi]` (Best and Fisher's rejection
/// sampler with a wrapped Cauchy envelope).
pub fn sample_von_mises<R: Rng + ?Sized>(kappa: f64, rng: &mut R) -> f64 {
    if kappa < 1e-8 {
        return (rng.random::<f64>() - 0.5) * TAU;
    }
    let tau = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
    let rho = (tau - (2.0 * tau).sqrt()) / (2.0 * kappa);
    let r = (1.0 + rho * rho) / (2.0 * rho);
    loop {
        let z = (PI * rng.random::<f64>()).cos();
        let f = (1.0 + r * z) / (r + z);
        let c = kappa * (r - f);
        let u2: f64 = rng.random();
        if c * (2.0 - c) > u2 || (c / u2).ln() + 1.0 >= c {
            let theta = f.clamp(-1.0, 1.0).acos();
            return if rng.random::<bool>() { theta } else { -theta };
        }
    }
}

/// Partial sum `1/6 - 1/pi^2 * sum_{m=1}^{M} cos(2 pi m t) / m^2` of the
/// cosine series of `h`.
pub fn h_cosine_expansion(t: f64, terms: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain {
            what: "t",
            value: t,
        });
    }
    if terms == 0 {
        return Err(Error::Domain {
            what: "terms",
            value: 0.0,
        });
    }
    // smallest terms first
    let sum: f64 = (1..=terms)
        .rev()
        .map(|m| {
            let mf = m as f64;
            (TAU * reduce_mod1(mf * t)).cos() / (mf * mf)
        })
        .sum();
    Ok(1.0 / 6.0 - sum / (PI * PI))
}

/// Midpoint-rule value of `int_0^1 |[u - b]_1 - [v - b]_1| db` next to the
/// closed form `2 q (1 - q)`, `q = [v - u]_1`.
pub fn cut_distance_identity_check(u: Turn, v: Turn, points: usize) -> Result<(f64, f64)> {
    if points < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 quadrature points, got {points}"
        )));
    }
    let step = 1.0 / points as f64;
    let lhs = (0..points)
        .map(|k| {
            let b = Turn::new((k as f64 + 0.5) * step).expect("finite");
            (b.arc_to(u) - b.arc_to(v)).abs()
        })
        .sum::<f64>()
        * step;
    let q = u.arc_to(v);
    Ok((lhs, 2.0 * q * (1.0 - q)))
}

//! Small numeric helpers shared across modules.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `(master, a, b)`.
///
/// Each component is folded in with a golden-ratio increment followed by the
/// SplitMix64 finalizer, so nearby inputs give unrelated outputs.
pub fn mix_seed(master: u64, a: u64, b: u64) -> u64 {
    let s = splitmix64(master.wrapping_add(GOLDEN));
    let s = splitmix64(s ^ a.wrapping_add(GOLDEN.wrapping_mul(2)));
    splitmix64(s ^ b.wrapping_add(GOLDEN.wrapping_mul(3)))
}

/// Pairwise (cascade) summation; the result depends only on the slice order.
pub(crate) fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 64;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Mean and sample standard deviation (divisor `n - 1`, zero when `n < 2`).
pub(crate) fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(values) / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    (mean, (pairwise_sum(&sq) / (n - 1) as f64).sqrt())
}

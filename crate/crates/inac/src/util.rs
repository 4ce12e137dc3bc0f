//! Small shared helpers: dB conversions, deterministic seed mixing and
//! binomial confidence intervals.

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Convert a linear power ratio to decibels.
pub fn lin_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Convert decibels to a linear power ratio.
pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Convert a power in watts to dBW.
pub fn watts_to_dbw(w: f64) -> f64 {
    lin_to_db(w)
}

/// SplitMix64 finalizer. Used to derive statistically independent per-trial
/// seeds from a base seed and a trial counter, so that results do not depend
/// on how trials are scheduled across workers.
pub fn mix_seed(base: u64, counter: u64) -> u64 {
    let mut z = base
        .wrapping_add(counter.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Wilson score interval for a binomial proportion.
///
/// Returns `(center, halfwidth)` for `k` successes out of `n` trials at
/// normal quantile `z` (1.96 for a 95% interval).
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 0.5);
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    (center, half)
}

/// Wilson-score halfwidth at the given `z` (e.g. `z = 3.0` for a
/// three-standard-error band).
pub fn wilson_halfwidth(k: u64, n: u64, z: f64) -> f64 {
    wilson_interval(k, n, z).1
}

/// True when `reference` lies inside the Wilson interval of (`k`, `n`) at `z`.
pub fn within_wilson(reference: f64, k: u64, n: u64, z: f64) -> bool {
    let (c, h) = wilson_interval(k, n, z);
    (reference - c).abs() <= h
}

/// Format a float for CSV output: shortest representation that round-trips,
/// identical across runs for identical bits.
pub fn fmt_f64(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{:.1}", x)
    } else {
        format!("{}", x)
    }
}

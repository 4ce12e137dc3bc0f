//! Composite satellite channel: free-space amplitude gain, deterministic
//! phase, additive white Gaussian noise, and an optional residual
//! Doppler/phase-noise impairment applied after ideal phase compensation.
//!
//! Multipath is deliberately absent: circular polarization filters odd-order
//! reflections and even-order ones arrive too weak to matter outdoors.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::model::{Impairments, SystemConfig};
use crate::phy_tx::InacBurst;
use crate::util::SPEED_OF_LIGHT;

/// Free-space amplitude gain `c / (4 pi f_c d)`. Path loss in dB is
/// `-20 log10` of this value.
pub fn path_gain(distance_m: f64, f_c: f64) -> f64 {
    SPEED_OF_LIGHT / (4.0 * PI * f_c * distance_m)
}

/// One deterministic channel draw: amplitude gain, propagation phase, the
/// noise seed and the impairment settings in effect.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// Amplitude gain.
    pub gain: f64,
    /// Propagation phase `-2 pi d f_c / c` reduced to [0, 2 pi).
    pub phase: f64,
    /// Integer-chip propagation delay applied cyclically over the burst.
    pub delay_chips: usize,
    /// Seed for the noise generator.
    pub noise_seed: u64,
    pub impairments: Option<Impairments>,
}

impl ChannelRealization {
    /// Build the realization for a config at its configured distance.
    pub fn from_config(cfg: &SystemConfig, noise_seed: u64) -> Self {
        let gain = path_gain(cfg.distance, cfg.f_c);
        let cycles = -cfg.distance * cfg.f_c / SPEED_OF_LIGHT;
        let phase = (cycles * 2.0 * PI).rem_euclid(2.0 * PI);
        let delay_chips = (cfg.distance / SPEED_OF_LIGHT * cfg.chip_rate).round() as usize;
        ChannelRealization {
            gain,
            phase,
            delay_chips,
            noise_seed,
            impairments: cfg.impairments,
        }
    }

    /// Received signal power `P_s = P gain^2` in watts.
    pub fn received_power(&self, cfg: &SystemConfig) -> f64 {
        cfg.tx_power * self.gain * self.gain
    }
}

/// Pass unit-power baseband samples through the channel: scale to the
/// received amplitude `sqrt(2 P_s)`, delay cyclically by the integer-chip
/// propagation offset, apply impairments when enabled, and add white
/// Gaussian noise of per-sample variance `sigma_n^2`. Channel phase is
/// assumed perfectly estimated and compensated, so the signal term stays
/// real.
pub fn apply_samples(baseband: &[f64], real: &ChannelRealization, cfg: &SystemConfig) -> Vec<f64> {
    let p_s = real.received_power(cfg);
    let amp = (2.0 * p_s).sqrt();
    let sigma = cfg.noise_power().sqrt();
    let n = baseband.len();
    let delay = if n == 0 { 0 } else { real.delay_chips % n };
    let t_c = 1.0 / cfg.chip_rate;

    let mut rng = ChaCha8Rng::seed_from_u64(real.noise_seed);
    let mut out = Vec::with_capacity(n);
    match real.impairments {
        Some(imp) if imp.residual_doppler != 0.0 || imp.phase_noise_variance > 0.0 => {
            let step_sigma = imp.phase_noise_variance.sqrt();
            let mut theta = 0.0f64;
            for k in 0..n {
                let src = (k + n - delay) % n;
                let walk: f64 = rng.sample(StandardNormal);
                theta += step_sigma * walk;
                let rot = (2.0 * PI * imp.residual_doppler * k as f64 * t_c + theta).cos();
                let noise: f64 = rng.sample(StandardNormal);
                out.push(amp * baseband[src] * rot + sigma * noise);
            }
        }
        _ => {
            for k in 0..n {
                let src = (k + n - delay) % n;
                let noise: f64 = rng.sample(StandardNormal);
                out.push(amp * baseband[src] + sigma * noise);
            }
        }
    }
    out
}

/// [`apply_samples`] over a framed burst.
pub fn apply(burst: &InacBurst, real: &ChannelRealization, cfg: &SystemConfig) -> Vec<f64> {
    apply_samples(&burst.baseband, real, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SystemConfig;
    use crate::phy_tx::build_burst;
    use crate::pn::PnSequence;
    use crate::util::lin_to_db;

    fn cfg() -> SystemConfig {
        SystemConfig::default()
    }

    #[test]
    fn fspl_reference_point() {
        // standard identity: 32.45 + 20 log10(d_km) + 20 log10(f_MHz)
        let g = path_gain(8000e3, 1207.14e6);
        let loss_db = -2.0 * lin_to_db(g);
        let reference = 32.44778 + 2.0 * lin_to_db(8000.0) + 2.0 * lin_to_db(1207.14);
        assert!((loss_db - reference).abs() < 0.01, "{loss_db} vs {reference}");
        assert!((loss_db - 172.15).abs() < 0.01);
    }

    #[test]
    fn gain_inverse_in_distance() {
        let g1 = path_gain(8000e3, 1207.14e6);
        let g2 = path_gain(4000e3, 1207.14e6);
        assert!((g2 / g1 - 2.0).abs() < 1e-12);
        // 20000 vs 8000 km: 20 log10(2.5) = 7.96 dB extra loss
        let g3 = path_gain(20000e3, 1207.14e6);
        let delta_db = 2.0 * lin_to_db(g1 / g3);
        assert!((delta_db - 7.96).abs() < 0.01);
    }

    #[test]
    fn phase_matches_propagation() {
        let c = cfg();
        let real = ChannelRealization::from_config(&c, 0);
        let cycles = -c.distance * c.f_c / SPEED_OF_LIGHT;
        let expect = (cycles * 2.0 * PI).rem_euclid(2.0 * PI);
        assert!((real.phase - expect).abs() < 1e-9);
        assert!(real.gain > 0.0);
    }

    #[test]
    fn noiseless_identity() {
        // gain 1, P = 0.5 -> amplitude sqrt(2 * 0.5) = 1; zero noise, zero
        // delay: output equals the baseband exactly
        let c = SystemConfig {
            noise_psd: 0.0,
            frame_mul_symbols: 2,
            ..cfg()
        };
        let pn = PnSequence::default_code(c.chip_rate);
        let burst = build_burst(&c, &pn, 1, None).unwrap();
        let real = ChannelRealization {
            gain: 1.0,
            phase: 0.0,
            delay_chips: 0,
            noise_seed: 0,
            impairments: None,
        };
        let c2 = SystemConfig { tx_power: 0.5, ..c };
        let out = apply(&burst, &real, &c2);
        for (a, b) in out.iter().zip(burst.baseband.iter()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn delay_is_cyclic_and_known() {
        let c = SystemConfig {
            noise_psd: 0.0,
            frame_mul_symbols: 2,
            ..cfg()
        };
        let pn = PnSequence::default_code(c.chip_rate);
        let burst = build_burst(&c, &pn, 1, None).unwrap();
        let real = ChannelRealization {
            gain: 1.0,
            phase: 0.0,
            delay_chips: 17,
            noise_seed: 0,
            impairments: None,
        };
        let c2 = SystemConfig { tx_power: 0.5, ..c };
        let out = apply(&burst, &real, &c2);
        let n = out.len();
        for k in 0..n {
            assert_eq!(out[k], burst.baseband[(k + n - 17) % n]);
        }
    }

    #[test]
    fn noise_variance_tracks_sigma() {
        // all-zero burst: output samples are pure noise with variance sigma^2
        let c = SystemConfig {
            frame_mul_symbols: 10,
            ..cfg()
        };
        let pn = PnSequence::default_code(c.chip_rate);
        let mut burst = build_burst(&c, &pn, 1, None).unwrap();
        for x in &mut burst.baseband {
            *x = 0.0;
        }
        // widen to 10^6 samples by looping seeds
        let sigma2 = c.noise_power();
        let mut sum = 0.0;
        let mut count = 0usize;
        for seed in 0..49u64 {
            let real = ChannelRealization {
                gain: 1.0,
                phase: 0.0,
                delay_chips: 0,
                noise_seed: seed,
                impairments: None,
            };
            let out = apply(&burst, &real, &c);
            sum += out.iter().map(|x| x * x).sum::<f64>();
            count += out.len();
        }
        assert!(count >= 1_000_000);
        let var = sum / count as f64;
        assert!(
            (var / sigma2 - 1.0).abs() < 0.01,
            "variance ratio {}",
            var / sigma2
        );
    }

    #[test]
    fn disabled_impairments_bit_identical() {
        let c = SystemConfig {
            frame_mul_symbols: 2,
            impairments: Some(Impairments {
                residual_doppler: 0.0,
                phase_noise_variance: 0.0,
            }),
            ..cfg()
        };
        let pn = PnSequence::default_code(c.chip_rate);
        let burst = build_burst(&c, &pn, 1, None).unwrap();
        let with = apply(&burst, &ChannelRealization::from_config(&c, 5), &c);
        let plain_cfg = SystemConfig {
            impairments: None,
            ..c.clone()
        };
        let burst2 = build_burst(&plain_cfg, &pn, 1, None).unwrap();
        let without = apply(&burst2, &ChannelRealization::from_config(&plain_cfg, 5), &plain_cfg);
        assert_eq!(with, without);
    }

    #[test]
    fn noise_reproducible_from_seed() {
        let c = cfg();
        let pn = PnSequence::default_code(c.chip_rate);
        let burst = build_burst(&c, &pn, 1, None).unwrap();
        let real = ChannelRealization::from_config(&c, 99);
        let a = apply(&burst, &real, &c);
        let b = apply(&burst, &real, &c);
        assert_eq!(a, b);
    }
}

//! Config-file loading. The file is TOML whose keys mirror the config field
//! names exactly; values are linear SI except for explicitly dB-suffixed
//! alternatives, which are converted here and never stored.
//!
//! Instead of `tx_power`, a file may give `c_n0_dbhz`: the received
//! carrier-to-noise-density ratio, back-solved to transmit power through the
//! free-space gain at the configured distance.

use serde::Deserialize;

use crate::channel::path_gain;
use crate::error::{Error, Result};
use crate::model::{default_noise_psd, Impairments, Scenario, SystemConfig};
use crate::util::db_to_lin;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    beta1: Option<f64>,
    beta2: Option<f64>,
    xi: Option<f64>,
    r_nav: Option<f64>,
    r_com: Option<f64>,
    chip_rate: Option<f64>,
    pn_length: Option<usize>,
    f_c: Option<f64>,
    b_fe: Option<f64>,
    b_l: Option<f64>,
    t_coh: Option<f64>,
    distance: Option<f64>,
    tx_power: Option<f64>,
    /// Alternative to `tx_power`: received C/N0 in dB-Hz.
    c_n0_dbhz: Option<f64>,
    noise_psd: Option<f64>,
    /// Alternative to `noise_psd`: one-sided density in dBm/Hz.
    noise_psd_dbm_hz: Option<f64>,
    delta: Option<f64>,
    scenario: Option<Scenario>,
    impairments: Option<Impairments>,
    frame_mul_symbols: Option<usize>,
    nav_fraction: Option<f64>,
}

/// Parse a TOML config string into a validated config.
pub fn from_toml_str(text: &str) -> Result<SystemConfig> {
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| Error::ConfigInvalid(format!("parse: {e}")))?;
    let d = SystemConfig::default();

    let noise_psd = match (raw.noise_psd, raw.noise_psd_dbm_hz) {
        (Some(_), Some(_)) => {
            return Err(Error::ConfigInvalid(
                "give either noise_psd or noise_psd_dbm_hz, not both".into(),
            ))
        }
        (Some(w), None) => w,
        (None, Some(dbm)) => db_to_lin(dbm - 30.0),
        (None, None) => default_noise_psd(),
    };

    let mut cfg = SystemConfig {
        beta1: raw.beta1.unwrap_or(d.beta1),
        beta2: raw.beta2.unwrap_or(d.beta2),
        xi: raw.xi.unwrap_or(d.xi),
        r_nav: raw.r_nav.unwrap_or(d.r_nav),
        r_com: raw.r_com.unwrap_or(d.r_com),
        chip_rate: raw.chip_rate.unwrap_or(d.chip_rate),
        pn_length: raw.pn_length.unwrap_or(d.pn_length),
        f_c: raw.f_c.unwrap_or(d.f_c),
        b_fe: raw.b_fe.unwrap_or(d.b_fe),
        b_l: raw.b_l.unwrap_or(d.b_l),
        t_coh: raw.t_coh.unwrap_or(d.t_coh),
        distance: raw.distance.unwrap_or(d.distance),
        tx_power: raw.tx_power.unwrap_or(d.tx_power),
        noise_psd,
        delta: raw.delta.unwrap_or(d.delta),
        scenario: raw.scenario.unwrap_or(d.scenario),
        impairments: raw.impairments,
        frame_mul_symbols: raw.frame_mul_symbols.unwrap_or(d.frame_mul_symbols),
        nav_fraction: raw.nav_fraction,
    };

    match (raw.tx_power, raw.c_n0_dbhz) {
        (Some(_), Some(_)) => {
            return Err(Error::ConfigInvalid(
                "give either tx_power or c_n0_dbhz, not both".into(),
            ))
        }
        (None, Some(dbhz)) => {
            // C/N0 = P gain^2 / N0  =>  P = C/N0 * N0 / gain^2
            let gain = path_gain(cfg.distance, cfg.f_c);
            cfg.tx_power = db_to_lin(dbhz) * cfg.noise_psd / (gain * gain);
        }
        _ => {}
    }

    cfg.validate()?;
    Ok(cfg)
}

/// Load a config from a TOML file.
pub fn from_toml_file(path: &std::path::Path) -> Result<SystemConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::ConfigInvalid(format!("read {}: {e}", path.display())))?;
    from_toml_str(&text)
}

/// Serialize a config snapshot as TOML (used by run manifests).
pub fn to_toml_string(cfg: &SystemConfig) -> String {
    toml::to_string_pretty(cfg).expect("config serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelRealization;
    use approx::assert_relative_eq;

    #[test]
    fn defaults_round_trip() {
        let cfg = from_toml_str("").unwrap();
        assert_eq!(cfg, SystemConfig::default());
        let text = to_toml_string(&cfg);
        let back = from_toml_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn explicit_fields_and_sections() {
        let cfg = from_toml_str(
            r#"
            beta1 = 0.3
            beta2 = 0.7
            scenario = "uo_inac"
            r_com = 1000.0
            distance = 12000e3

            [impairments]
            residual_doppler = 2.0
            phase_noise_variance = 1e-7
            "#,
        )
        .unwrap();
        assert_eq!(cfg.scenario, Scenario::UoInac);
        assert_eq!(cfg.impairments.unwrap().residual_doppler, 2.0);
        assert_eq!(cfg.distance, 12000e3);
    }

    #[test]
    fn c_n0_back_solves_power() {
        let cfg = from_toml_str("c_n0_dbhz = 45.0").unwrap();
        let real = ChannelRealization::from_config(&cfg, 0);
        let p_s = real.received_power(&cfg);
        let c_n0 = p_s / cfg.noise_psd;
        assert_relative_eq!(10.0 * c_n0.log10(), 45.0, epsilon = 1e-9);
    }

    #[test]
    fn dbm_noise_density() {
        let cfg = from_toml_str("noise_psd_dbm_hz = -174.0").unwrap();
        assert_relative_eq!(cfg.noise_psd, default_noise_psd(), max_relative = 1e-12);
    }

    #[test]
    fn conflicting_and_unknown_keys_rejected() {
        assert!(from_toml_str("tx_power = 10.0\nc_n0_dbhz = 45.0").is_err());
        assert!(from_toml_str("noise_psd = 1e-20\nnoise_psd_dbm_hz = -174.0").is_err());
        assert!(from_toml_str("not_a_field = 1").is_err());
        // invalid physics still rejected after parse
        assert!(from_toml_str("beta1 = 0.2\nbeta2 = 0.8").is_err());
    }
}

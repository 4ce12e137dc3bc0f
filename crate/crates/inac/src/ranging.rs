//! Code-phase tracking jitter and ranging error, mapped from despread signal
//! quality. Formula-level only: no discriminator or loop-filter simulation.
//!
//! The loop formula takes a carrier-to-noise-density ratio; the bridge from
//! the per-sample noise variance used everywhere else is `N0 = sigma_n^2 /
//! B_fe`, and each branch's C/N0 is its despread amplitude squared over
//! `g_nav N0`.

use crate::analytic::amplitudes;
use crate::error::{Error, Result};
use crate::model::{Scenario, SystemConfig};
use crate::util::{lin_to_db, SPEED_OF_LIGHT};

/// Code-tracking jitter and ranging error at one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct RangingReport {
    /// Tracking jitter in chips, printed combining rule.
    pub sigma_chips: f64,
    /// Ranging error in meters, `c * sigma * T_c`.
    pub error_m: f64,
    pub scenario: Scenario,
    /// Per-branch carrier-to-noise-density ratios in dB-Hz.
    pub c_n0_dbhz: Vec<f64>,
    /// Alternative combining rule, kept as a diagnostic: RMS-combined
    /// branches in the multi-cast-oriented scenario, the opposing-polarity
    /// second branch in the uni-cast-oriented one.
    pub sigma_chips_alt: f64,
    /// Ranging error of the alternative rule in meters.
    pub error_m_alt: f64,
}

/// Delay-lock tracking jitter in chips for a coherent early-late loop:
/// `sqrt( B_L/(2 C/N0) * 1/(B_fe T_c) * (1 + 1/(T_coh C/N0)) )`.
///
/// `c_n0` is linear (hertz).
pub fn dll_jitter(c_n0: f64, b_l: f64, b_fe: f64, t_c: f64, t_coh: f64) -> f64 {
    (b_l / (2.0 * c_n0) * (1.0 / (b_fe * t_c)) * (1.0 + 1.0 / (t_coh * c_n0))).sqrt()
}

fn to_meters(sigma_chips: f64, t_c: f64) -> f64 {
    SPEED_OF_LIGHT * sigma_chips * t_c
}

/// Multi-cast-oriented ranging: the tracking branch rides the multi-cast
/// stream, so the jitter is averaged over the superimposed uni-cast
/// patterns with binomial weights.
pub fn ranging_mo(cfg: &SystemConfig, p_s: f64) -> Result<RangingReport> {
    if cfg.scenario != Scenario::MoInac {
        return Err(Error::WrongScenario(
            "multi-cast-oriented ranging on a uni-cast-oriented config".into(),
        ));
    }
    let amps = amplitudes(cfg, p_s)?;
    let (g_nav, _) = cfg.spreading_gains_f64();
    let n0 = cfg.noise_power() / cfg.b_fe;
    let t_c = 1.0 / cfg.chip_rate;
    let m = amps.a_i.len() - 1;
    let two_pow_m = (2.0f64).powi(m as i32);

    let mut sigma = 0.0;
    let mut sigma_sq = 0.0;
    let mut c_n0_dbhz = Vec::with_capacity(m + 1);
    for (i, &a) in amps.a_i.iter().enumerate() {
        let weight = binomial(m as u64, i as u64) / two_pow_m;
        let c_n0 = a * a / (g_nav * n0);
        let j = dll_jitter(c_n0, cfg.b_l, cfg.b_fe, t_c, cfg.t_coh);
        sigma += weight * j;
        sigma_sq += weight * j * j;
        c_n0_dbhz.push(lin_to_db(c_n0));
    }
    Ok(RangingReport {
        sigma_chips: sigma,
        error_m: to_meters(sigma, t_c),
        scenario: Scenario::MoInac,
        c_n0_dbhz,
        sigma_chips_alt: sigma_sq.sqrt(),
        error_m_alt: to_meters(sigma_sq.sqrt(), t_c),
    })
}

/// Uni-cast-oriented ranging: tracking rides the strong uni-cast stream,
/// whose data polarity caps the coherent integration at one uni-cast symbol.
/// The printed rule evaluates both branches at the aligned amplitude; the
/// alternative uses the opposing-polarity amplitude for the second branch.
pub fn ranging_uo(cfg: &SystemConfig, p_s: f64) -> Result<RangingReport> {
    if cfg.scenario != Scenario::UoInac {
        return Err(Error::WrongScenario(
            "uni-cast-oriented ranging on a multi-cast-oriented config".into(),
        ));
    }
    cfg.validate()?;
    let (_, g_uni) = cfg.spreading_gains_f64();
    let s1 = (2.0 * p_s * cfg.beta1).sqrt();
    let s2 = (2.0 * p_s * cfg.beta2).sqrt();
    let a_plus = g_uni * (s2 + s1);
    let a_minus = g_uni * (s2 - s1);
    let n0 = cfg.noise_power() / cfg.b_fe;
    let t_c = 1.0 / cfg.chip_rate;
    let t_uni = 1.0 / cfg.unicast_rate();
    let t_coh = t_uni.min(cfg.t_coh);

    let cn0_plus = a_plus * a_plus / (g_uni * n0);
    let cn0_minus = a_minus * a_minus / (g_uni * n0);
    let j_plus = dll_jitter(cn0_plus, cfg.b_l, cfg.b_fe, t_c, t_coh);
    let j_minus = dll_jitter(cn0_minus, cfg.b_l, cfg.b_fe, t_c, t_coh);

    let printed = 0.5 * j_plus + 0.5 * j_plus;
    let symmetric = 0.5 * j_plus + 0.5 * j_minus;
    Ok(RangingReport {
        sigma_chips: printed,
        error_m: to_meters(printed, t_c),
        scenario: Scenario::UoInac,
        c_n0_dbhz: vec![lin_to_db(cn0_plus), lin_to_db(cn0_minus)],
        sigma_chips_alt: symmetric,
        error_m_alt: to_meters(symmetric, t_c),
    })
}

/// Ranging of a plain full-power navigation signal with the same spreading
/// parameters; the reference the superimposed designs are compared against.
pub fn ranging_pure_nav(cfg: &SystemConfig, p_s: f64) -> Result<RangingReport> {
    cfg.validate()?;
    let (g_nav, _) = cfg.spreading_gains_f64();
    let n0 = cfg.noise_power() / cfg.b_fe;
    let t_c = 1.0 / cfg.chip_rate;
    let a = g_nav * (2.0 * p_s).sqrt();
    let c_n0 = a * a / (g_nav * n0);
    let j = dll_jitter(c_n0, cfg.b_l, cfg.b_fe, t_c, cfg.t_coh);
    Ok(RangingReport {
        sigma_chips: j,
        error_m: to_meters(j, t_c),
        scenario: cfg.scenario,
        c_n0_dbhz: vec![lin_to_db(c_n0)],
        sigma_chips_alt: j,
        error_m_alt: to_meters(j, t_c),
    })
}

fn binomial(m: u64, i: u64) -> f64 {
    let mut acc = 1.0;
    for k in 0..i.min(m - i) {
        acc = acc * (m - k) as f64 / (k + 1) as f64;
    }
    acc
}

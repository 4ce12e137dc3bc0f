//! System configuration shared by every other module: power allocation,
//! rates, spreading parameters, link geometry and the derived frame layout.
//!
//! All internal units are linear SI (watts, hertz, seconds, meters). dB-valued
//! inputs are converted at the config-file boundary, never stored.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::db_to_lin;

/// Power-allocation scenario for the superimposed streams.
///
/// In the multi-cast-oriented scenario the multi-cast stream carries more
/// power (`beta1 > beta2`); in the uni-cast-oriented scenario the uni-cast
/// stream does (`beta1 < beta2`). Equality is rejected: the stronger stream
/// must be strictly stronger for the cancellation order to be well defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    MoInac,
    UoInac,
}

impl Scenario {
    /// Short lowercase tag used in CSV output.
    pub fn tag(&self) -> &'static str {
        match self {
            Scenario::MoInac => "mo_inac",
            Scenario::UoInac => "uo_inac",
        }
    }
}

/// Optional residual front-end impairments applied after ideal phase
/// compensation: a residual carrier offset plus a Wiener phase walk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Impairments {
    /// Residual carrier offset in hertz.
    pub residual_doppler: f64,
    /// Phase-walk step variance in rad^2 per chip.
    pub phase_noise_variance: f64,
}

impl Default for Impairments {
    fn default() -> Self {
        Impairments {
            residual_doppler: 5.0,
            phase_noise_variance: 1e-6,
        }
    }
}

/// Complete description of one operating point. The single source of truth
/// for a run; immutable once validated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Multi-cast power allocation factor.
    pub beta1: f64,
    /// Uni-cast power allocation factor.
    pub beta2: f64,
    /// Fraction of communication resources folded into the multi-cast stream.
    pub xi: f64,
    /// Navigation data rate in bits/s.
    pub r_nav: f64,
    /// Communication data rate in bits/s.
    pub r_com: f64,
    /// Chip rate in chips/s.
    pub chip_rate: f64,
    /// Spreading-sequence length in chips.
    pub pn_length: usize,
    /// Carrier frequency in hertz.
    pub f_c: f64,
    /// Transmitted-signal bandwidth in hertz.
    pub b_fe: f64,
    /// Loop-noise bandwidth in hertz.
    pub b_l: f64,
    /// Coherent integration duration in seconds.
    pub t_coh: f64,
    /// Satellite-user distance in meters.
    pub distance: f64,
    /// Satellite transmit power in watts.
    pub tx_power: f64,
    /// One-sided noise power spectral density in W/Hz.
    pub noise_psd: f64,
    /// Impact factor in (0, 1] modelling accumulated cancellation errors in
    /// the uni-cast-oriented second stage.
    pub delta: f64,
    /// Power-allocation scenario.
    pub scenario: Scenario,
    /// Optional residual front-end impairments.
    pub impairments: Option<Impairments>,
    /// Multi-cast symbols per simulated frame.
    pub frame_mul_symbols: usize,
    /// Fraction of the frame occupied by navigation symbols. `None` derives
    /// the rate-consistent value `r_nav / (r_nav + xi * r_com)`, which makes
    /// the stream bit counts match the resource split exactly.
    pub nav_fraction: Option<f64>,
}

/// Default one-sided noise density: -174 dBm/Hz expressed in W/Hz.
pub fn default_noise_psd() -> f64 {
    db_to_lin(-174.0 - 30.0)
}

impl Default for SystemConfig {
    /// Multi-cast-oriented operating point with the reference simulation
    /// parameters: 4.092 MHz bandwidth, 1207.14 MHz carrier, 2.046 Mchip/s,
    /// 2046-chip sequence, 0.70:0.30 power split.
    fn default() -> Self {
        SystemConfig {
            beta1: 0.70,
            beta2: 0.30,
            xi: 0.0,
            r_nav: 1000.0,
            r_com: 3000.0,
            chip_rate: 2.046e6,
            pn_length: 2046,
            f_c: 1207.14e6,
            b_fe: 4.092e6,
            b_l: 0.2,
            t_coh: 1e-3,
            distance: 8000e3,
            tx_power: 50.0,
            noise_psd: default_noise_psd(),
            delta: 1.0,
            scenario: Scenario::MoInac,
            impairments: None,
            frame_mul_symbols: 100,
            nav_fraction: None,
        }
    }
}

/// Derived per-frame symbol counts and spreading gains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameLayout {
    /// Navigation symbols per frame.
    pub k_nav: usize,
    /// Split-communication symbols per frame (0 when `xi == 0`).
    pub k_mul: usize,
    /// Uni-cast symbols per frame.
    pub k_uni: usize,
    /// Chips per multi-cast symbol.
    pub g_mul: usize,
    /// Chips per uni-cast symbol.
    pub g_uni: usize,
    /// Rate ratio: uni-cast symbols nested in one multi-cast symbol.
    pub m: usize,
    /// Total chips per frame.
    pub chips: usize,
}

const REL_TOL: f64 = 1e-9;

fn as_exact_integer(x: f64) -> Option<u64> {
    let r = x.round();
    if r >= 1.0 && (x - r).abs() <= REL_TOL * x.abs().max(1.0) {
        Some(r as u64)
    } else {
        None
    }
}

impl SystemConfig {
    /// Basic physical validation: positivity, power-split identity and
    /// scenario consistency. Does not require integer spreading gains, so
    /// formula-level evaluation (closed-form error rates at arbitrary rates,
    /// code-tracking jitter) can run on configs the waveform path rejects.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("r_nav", self.r_nav),
            ("r_com", self.r_com),
            ("chip_rate", self.chip_rate),
            ("f_c", self.f_c),
            ("b_fe", self.b_fe),
            ("b_l", self.b_l),
            ("t_coh", self.t_coh),
            ("distance", self.distance),
            ("tx_power", self.tx_power),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::ConfigInvalid(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.noise_psd < 0.0 || !self.noise_psd.is_finite() {
            return Err(Error::ConfigInvalid(format!(
                "noise_psd must be >= 0, got {}",
                self.noise_psd
            )));
        }
        if !(self.beta1 > 0.0 && self.beta1 < 1.0 && self.beta2 > 0.0 && self.beta2 < 1.0) {
            return Err(Error::ConfigInvalid(format!(
                "beta1, beta2 must lie in (0,1), got {}, {}",
                self.beta1, self.beta2
            )));
        }
        if (self.beta1 + self.beta2 - 1.0).abs() > 1e-12 {
            return Err(Error::ConfigInvalid(format!(
                "beta1 + beta2 must equal 1 within 1e-12, got {}",
                self.beta1 + self.beta2
            )));
        }
        match self.scenario {
            Scenario::MoInac if self.beta1 <= self.beta2 => {
                return Err(Error::ConfigInvalid(
                    "multi-cast-oriented scenario requires beta1 > beta2".into(),
                ));
            }
            Scenario::UoInac if self.beta1 >= self.beta2 => {
                return Err(Error::ConfigInvalid(
                    "uni-cast-oriented scenario requires beta1 < beta2".into(),
                ));
            }
            _ => {}
        }
        if !(0.0..1.0).contains(&self.xi) {
            return Err(Error::ConfigInvalid(format!(
                "xi must lie in [0,1), got {}",
                self.xi
            )));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::InvalidDelta(self.delta));
        }
        if self.pn_length == 0 {
            return Err(Error::ConfigInvalid("pn_length must be >= 1".into()));
        }
        if self.frame_mul_symbols == 0 {
            return Err(Error::ConfigInvalid("frame_mul_symbols must be >= 1".into()));
        }
        if let Some(f) = self.nav_fraction {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::ConfigInvalid(format!(
                    "nav_fraction must lie in (0,1], got {f}"
                )));
            }
        }
        Ok(())
    }

    /// Multi-cast symbol rate `r_nav + xi * r_com` in symbols/s.
    pub fn multicast_rate(&self) -> f64 {
        self.r_nav + self.xi * self.r_com
    }

    /// Uni-cast symbol rate `(1 - xi) * r_com` in symbols/s.
    pub fn unicast_rate(&self) -> f64 {
        (1.0 - self.xi) * self.r_com
    }

    /// Rate ratio: the number of uni-cast symbols nested inside one
    /// multi-cast symbol. Errors unless the ratio is an integer within 1e-9
    /// relative tolerance; fractional ratios would break the exact nesting of
    /// uni-cast symbols in multi-cast symbols.
    pub fn rate_ratio(&self) -> Result<u64> {
        let m = self.unicast_rate() / self.multicast_rate();
        as_exact_integer(m).ok_or(Error::NonIntegerRateRatio {
            m,
            dev: (m - m.round()).abs() / m.abs().max(1.0),
        })
    }

    /// Real-valued rate ratio, for formula-level use where exact nesting is
    /// not required.
    pub fn rate_ratio_f64(&self) -> f64 {
        self.unicast_rate() / self.multicast_rate()
    }

    /// Spreading gains `(g_mul, g_uni)` in chips per symbol, both required to
    /// be integers.
    pub fn spreading_gains(&self) -> Result<(u64, u64)> {
        let m = self.rate_ratio()?;
        let g_mul = self.chip_rate / self.multicast_rate();
        let g_mul = as_exact_integer(g_mul).ok_or(Error::NonIntegerGain {
            name: "g_mul",
            value: g_mul,
        })?;
        let g_uni = g_mul as f64 / m as f64;
        let g_uni = as_exact_integer(g_uni).ok_or(Error::NonIntegerGain {
            name: "g_uni",
            value: g_uni,
        })?;
        Ok((g_mul, g_uni))
    }

    /// Real-valued spreading gains, for formula-level use.
    pub fn spreading_gains_f64(&self) -> (f64, f64) {
        let g_mul = self.chip_rate / self.multicast_rate();
        (g_mul, g_mul / self.rate_ratio_f64())
    }

    /// Noise power `sigma_n^2 = N0 * B_fe` in watts.
    pub fn noise_power(&self) -> f64 {
        self.noise_psd * self.b_fe
    }

    /// Derive the per-frame layout. Enforces the integrality constraints the
    /// waveform path relies on: integer rate ratio, integer spreading gains
    /// and an integer number of chips per navigation-rate symbol.
    pub fn layout(&self) -> Result<FrameLayout> {
        self.validate()?;
        let m = self.rate_ratio()? as usize;
        let (g_mul, g_uni) = self.spreading_gains()?;
        if as_exact_integer(self.chip_rate / self.r_nav).is_none() {
            return Err(Error::NonIntegerGain {
                name: "chips per navigation-rate symbol",
                value: self.chip_rate / self.r_nav,
            });
        }
        let k_tot = self.frame_mul_symbols;
        let frac = self
            .nav_fraction
            .unwrap_or(self.r_nav / self.multicast_rate());
        let (k_nav, k_mul) = if self.xi == 0.0 {
            // degenerate split: the whole multi-cast stream is navigation
            (k_tot, 0)
        } else {
            let k_nav = ((k_tot as f64 * frac).round() as usize).clamp(1, k_tot - 1);
            (k_nav, k_tot - k_nav)
        };
        let k_uni = m * k_tot;
        Ok(FrameLayout {
            k_nav,
            k_mul,
            k_uni,
            g_mul: g_mul as usize,
            g_uni: g_uni as usize,
            m,
            chips: k_tot * g_mul as usize,
        })
    }
}

/// PN-code allocation scheme for serving `k_users` dedicated communication
/// users alongside one continuous navigation broadcast.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeScheme {
    /// One code for the broadcast plus one quasi-orthogonal code per user.
    Conventional,
    /// Navigation shares a code with one user; remaining users pair up over
    /// shared sequences (one unpaired user keeps its own code).
    MucNomaPaired,
}

/// Number of distinct PN sequences required to serve `k_users` communication
/// users plus the navigation broadcast.
pub fn codes_required(k_users: u64, scheme: CodeScheme) -> u64 {
    assert!(k_users >= 1, "k_users must be >= 1");
    match scheme {
        CodeScheme::Conventional => k_users + 1,
        CodeScheme::MucNomaPaired => 1 + k_users.saturating_sub(1).div_ceil(2),
    }
}

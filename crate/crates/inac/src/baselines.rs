//! Comparison schemes under matched bandwidth and duration: orthogonal
//! time-slotting, and shift-keyed co-modulation on the shared sequence.

use rayon::prelude::*;

use crate::channel::{apply_samples, ChannelRealization};
use crate::error::{Error, Result};
use crate::model::SystemConfig;
use crate::phy_rx::despread;
use crate::pn::{circular_correlate_at, PnSequence};
use crate::simkit::{BerReport, Ci95, RunOptions, StreamCounts};
use crate::util::{fmt_f64, mix_seed, wilson_halfwidth};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// How the time-slot baseline budgets slot power.
///
/// `MatchedTotal` runs each slot at the full superimposed power, keeping the
/// frame energy identical to the superposition scheme. `StreamShare` runs
/// each slot at that stream's power share, which is the budgeting the
/// published comparison curves correspond to: each stream then pays the full
/// halved-integration penalty, at half the frame energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TdmaPower {
    #[default]
    MatchedTotal,
    StreamShare,
}

/// Time-slot baseline parameters.
#[derive(Debug, Clone, Copy)]
pub struct TdmaParams {
    /// Fraction of the frame given to the navigation slot.
    pub slot_fraction: f64,
    pub power: TdmaPower,
}

impl Default for TdmaParams {
    fn default() -> Self {
        TdmaParams {
            slot_fraction: 0.5,
            power: TdmaPower::MatchedTotal,
        }
    }
}

/// Baseline scheme selector.
#[derive(Debug, Clone, Copy)]
pub enum BaselineScheme {
    Tdma(TdmaParams),
    Ccsk {
        /// Bits carried per sequence period.
        k_bits_per_symbol: u32,
    },
}

impl BaselineScheme {
    pub fn tag(&self) -> &'static str {
        match self {
            BaselineScheme::Tdma(_) => "tdma",
            BaselineScheme::Ccsk { .. } => "ccsk",
        }
    }
}

fn tdma_gains(cfg: &SystemConfig, params: &TdmaParams) -> Result<(f64, f64)> {
    if !(params.slot_fraction > 0.0 && params.slot_fraction < 1.0) {
        return Err(Error::ConfigInvalid(format!(
            "slot_fraction must lie in (0,1), got {}",
            params.slot_fraction
        )));
    }
    let g_nav = params.slot_fraction * cfg.chip_rate / cfg.r_nav;
    let g_com = (1.0 - params.slot_fraction) * cfg.chip_rate / cfg.r_com;
    Ok((g_nav, g_com))
}

fn tdma_power_shares(cfg: &SystemConfig, params: &TdmaParams) -> (f64, f64) {
    match params.power {
        TdmaPower::MatchedTotal => (1.0, 1.0),
        TdmaPower::StreamShare => (cfg.beta1, cfg.beta2),
    }
}

/// Closed-form error rates of the time-slot baseline: each stream spreads
/// over its slot only, so its gain shrinks by the slot fraction.
pub fn tdma_ber(cfg: &SystemConfig, p_s: f64, params: &TdmaParams) -> Result<(f64, f64)> {
    cfg.validate()?;
    let (g_nav, g_com) = tdma_gains(cfg, params)?;
    let (w_nav, w_com) = tdma_power_shares(cfg, params);
    let sigma2 = cfg.noise_power();
    let erfc = statrs::function::erf::erfc;
    let nav = 0.5 * erfc((w_nav * p_s * g_nav / sigma2).sqrt());
    let com = 0.5 * erfc((w_com * p_s * g_com / sigma2).sqrt());
    Ok((nav, com))
}

/// Per-frame bit counts shared by the baselines: same frame duration as the
/// superposition scheme, each stream at its own data rate.
fn frame_bits(cfg: &SystemConfig) -> Result<(usize, usize, f64)> {
    let t_frame = cfg.frame_mul_symbols as f64 / cfg.multicast_rate();
    let nav_bits = cfg.r_nav * t_frame;
    let com_bits = cfg.r_com * t_frame;
    let round_ok = |x: f64| (x - x.round()).abs() < 1e-9 && x.round() >= 1.0;
    if !round_ok(nav_bits) || !round_ok(com_bits) {
        return Err(Error::ConfigInvalid(format!(
            "frame of {t_frame} s does not hold integer bit counts ({nav_bits} nav, {com_bits} com)"
        )));
    }
    Ok((nav_bits.round() as usize, com_bits.round() as usize, t_frame))
}

fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<i8> {
    (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()
}

fn baseline_report(
    cfg: &SystemConfig,
    opts: &RunOptions,
    nav: StreamCounts,
    com: StreamCounts,
) -> BerReport {
    BerReport {
        nav_ber: nav.rate(),
        com_ber: com.rate(),
        mul_ber: nav.rate(),
        uni_ber: com.rate(),
        trials: opts.trials,
        nav,
        split: StreamCounts::default(),
        uni: com,
        ci95_halfwidth: Ci95 {
            nav: wilson_halfwidth(nav.errors, nav.bits, 1.96),
            com: wilson_halfwidth(com.errors, com.bits, 1.96),
            mul: wilson_halfwidth(nav.errors, nav.bits, 1.96),
            uni: wilson_halfwidth(com.errors, com.bits, 1.96),
        },
        cfg_snapshot: cfg.clone(),
        seed: opts.seed,
    }
}

/// Simulate the time-slot baseline: navigation bits spread over the first
/// slot, communication bits over the second, the sequence cycling across the
/// whole frame.
pub fn simulate_tdma(
    cfg: &SystemConfig,
    params: &TdmaParams,
    opts: &RunOptions,
) -> Result<BerReport> {
    cfg.validate()?;
    let (g_nav_f, g_com_f) = tdma_gains(cfg, params)?;
    let (nav_bits, com_bits, _) = frame_bits(cfg)?;
    let int_ok = |x: f64| (x - x.round()).abs() < 1e-9 && x.round() >= 1.0;
    if !int_ok(g_nav_f) || !int_ok(g_com_f) {
        return Err(Error::NonIntegerGain {
            name: "tdma chips per slot symbol",
            value: if int_ok(g_nav_f) { g_com_f } else { g_nav_f },
        });
    }
    let (g_nav, g_com) = (g_nav_f.round() as usize, g_com_f.round() as usize);
    let (w_nav, w_com) = tdma_power_shares(cfg, params);
    let (a_nav, a_com) = (w_nav.sqrt(), w_com.sqrt());
    let pn = PnSequence::generate(cfg.pn_length, &crate::pn::PnGenerator::default_gold(), cfg.chip_rate)?;
    let base = ChannelRealization::from_config(cfg, 0);
    let nav_chips = nav_bits * g_nav;

    let run_trial = |t: u64| -> (StreamCounts, StreamCounts) {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(opts.seed, 2 * t));
        let nav = random_bits(&mut rng, nav_bits);
        let com = random_bits(&mut rng, com_bits);
        let total = nav_chips + com_bits * g_com;
        let mut baseband = Vec::with_capacity(total);
        for n in 0..nav_chips {
            baseband.push(a_nav * nav[n / g_nav] as f64 * pn.chip_at(n));
        }
        for n in nav_chips..total {
            baseband.push(a_com * com[(n - nav_chips) / g_com] as f64 * pn.chip_at(n));
        }
        let real = ChannelRealization {
            noise_seed: mix_seed(opts.seed, 2 * t + 1),
            ..base.clone()
        };
        let rx = apply_samples(&baseband, &real, cfg);
        let n = rx.len();
        let d = real.delay_chips % n;
        let mut aligned = Vec::with_capacity(n);
        aligned.extend_from_slice(&rx[d..]);
        aligned.extend_from_slice(&rx[..d]);
        let pn_t = pn.tile(n);
        let (nav_dec, _) = despread(&aligned[..nav_chips], &pn_t[..nav_chips], g_nav);
        let (com_dec, _) = despread(&aligned[nav_chips..], &pn_t[nav_chips..], g_com);
        let nav_err = nav.iter().zip(&nav_dec).filter(|(a, b)| a != b).count() as u64;
        let com_err = com.iter().zip(&com_dec).filter(|(a, b)| a != b).count() as u64;
        (
            StreamCounts { bits: nav_bits as u64, errors: nav_err },
            StreamCounts { bits: com_bits as u64, errors: com_err },
        )
    };

    let (nav_tot, com_tot) = (0..opts.trials)
        .into_par_iter()
        .map(run_trial)
        .reduce(
            || (StreamCounts::default(), StreamCounts::default()),
            |mut a, b| {
                a.0.bits += b.0.bits;
                a.0.errors += b.0.errors;
                a.1.bits += b.1.bits;
                a.1.errors += b.1.errors;
                a
            },
        );
    Ok(baseline_report(cfg, opts, nav_tot, com_tot))
}

/// Shift-keying codec over the shared sequence: each `k`-bit group selects a
/// cyclic shift; decoding searches the candidate alphabet exhaustively.
#[derive(Debug, Clone)]
pub struct CcskCodec {
    k: u32,
    stride: usize,
    offset: usize,
}

impl CcskCodec {
    /// Identity shift map: group value `m` selects shift `m` directly.
    pub fn new(k: u32, pn_len: usize) -> Result<Self> {
        if k == 0 || k >= 63 || (1usize << k) > pn_len {
            return Err(Error::ShiftAlphabetTooLarge { k, kp: pn_len });
        }
        Ok(CcskCodec { k, stride: 1, offset: 0 })
    }

    /// Alphabet spread across the period and offset away from shift zero, so
    /// a superimposed plain-sequence component does not sit on a candidate.
    pub fn spread(k: u32, pn_len: usize) -> Result<Self> {
        if k == 0 || k >= 63 {
            return Err(Error::ShiftAlphabetTooLarge { k, kp: pn_len });
        }
        let stride = pn_len / ((1usize << k) + 1);
        if stride == 0 {
            return Err(Error::ShiftAlphabetTooLarge { k, kp: pn_len });
        }
        Ok(CcskCodec { k, stride, offset: stride })
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.k
    }

    fn shift_of(&self, m: usize) -> usize {
        self.offset + m * self.stride
    }

    /// Group index from ±1 bits, most significant first (+1 encodes binary
    /// zero, matching the sequence chip convention).
    fn group_index(bits: &[i8]) -> usize {
        bits.iter()
            .fold(0usize, |acc, &b| (acc << 1) | usize::from(b == -1))
    }

    fn index_bits(&self, m: usize) -> Vec<i8> {
        (0..self.k)
            .rev()
            .map(|j| if (m >> j) & 1 == 1 { -1 } else { 1 })
            .collect()
    }

    /// Map each `k`-bit group to one period of the shifted sequence.
    pub fn encode(&self, bits: &[i8], pn: &PnSequence) -> Result<Vec<i8>> {
        if bits.len() % self.k as usize != 0 {
            return Err(Error::LengthMismatch(format!(
                "{} bits is not a multiple of k = {}",
                bits.len(),
                self.k
            )));
        }
        let kp = pn.len();
        let mut chips = Vec::with_capacity(bits.len() / self.k as usize * kp);
        for group in bits.chunks(self.k as usize) {
            let m = Self::group_index(group);
            chips.extend_from_slice(&pn.shifted(self.shift_of(m)));
        }
        Ok(chips)
    }

    /// Decode one period per symbol by exhaustive search over the candidate
    /// shifts. Returns the bits and the number of correlations performed.
    pub fn decode(&self, samples: &[f64], pn: &PnSequence) -> Result<(Vec<i8>, u64)> {
        let kp = pn.len();
        if samples.len() % kp != 0 {
            return Err(Error::LengthMismatch(format!(
                "{} samples is not a whole number of {kp}-chip symbols",
                samples.len()
            )));
        }
        let alphabet = 1usize << self.k;
        let mut bits = Vec::with_capacity(samples.len() / kp * self.k as usize);
        let mut correlations = 0u64;
        for span in samples.chunks(kp) {
            let mut best = f64::NEG_INFINITY;
            let mut best_m = 0usize;
            for m in 0..alphabet {
                let c = circular_correlate_at(span, pn, self.shift_of(m))?;
                correlations += 1;
                if c > best {
                    best = c;
                    best_m = m;
                }
            }
            bits.extend(self.index_bits(best_m));
        }
        Ok((bits, correlations))
    }
}

/// Shift-keying co-modulation baseline outcome.
#[derive(Debug, Clone)]
pub struct CcskBaselineReport {
    pub ber: BerReport,
    /// Total correlations spent decoding.
    pub correlations: u64,
    /// Correlations per communication symbol (the `2^k` search cost).
    pub correlations_per_symbol: f64,
}

/// Simulate the co-modulation baseline: plain BPSK navigation at the
/// multi-cast power share superimposed with shift-keyed communication
/// symbols at the uni-cast share, one sequence period per symbol.
pub fn simulate_ccsk(cfg: &SystemConfig, opts: &RunOptions) -> Result<CcskBaselineReport> {
    cfg.validate()?;
    let kp = cfg.pn_length;
    let k_bits = cfg.r_com * kp as f64 / cfg.chip_rate;
    if (k_bits - k_bits.round()).abs() > 1e-9 || k_bits < 1.0 {
        return Err(Error::ConfigInvalid(format!(
            "communication rate {} bps does not give whole bits per {kp}-chip symbol",
            cfg.r_com
        )));
    }
    let k = k_bits.round() as u32;
    let codec = CcskCodec::spread(k, kp)?;
    let g_nav_f = cfg.chip_rate / cfg.r_nav;
    if (g_nav_f - g_nav_f.round()).abs() > 1e-9 {
        return Err(Error::NonIntegerGain {
            name: "chips per navigation bit",
            value: g_nav_f,
        });
    }
    let g_nav = g_nav_f.round() as usize;
    let (nav_bits, com_bits, _) = frame_bits(cfg)?;
    let symbols = com_bits / k as usize;
    if symbols * k as usize != com_bits || symbols * kp != nav_bits * g_nav {
        return Err(Error::ConfigInvalid(format!(
            "frame holds {com_bits} communication bits; not a whole number of {k}-bit symbols \
             spanning the navigation slot"
        )));
    }
    let (a_nav, a_com) = (cfg.beta1.sqrt(), cfg.beta2.sqrt());
    let pn = PnSequence::generate(kp, &crate::pn::PnGenerator::default_gold(), cfg.chip_rate)?;
    let base = ChannelRealization::from_config(cfg, 0);
    let chips = nav_bits * g_nav;

    let run_trial = |t: u64| -> (StreamCounts, StreamCounts, u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(opts.seed, 2 * t));
        let nav = random_bits(&mut rng, nav_bits);
        let com = random_bits(&mut rng, com_bits);
        let com_chips = codec.encode(&com, &pn).expect("validated group size");
        let mut baseband = Vec::with_capacity(chips);
        for n in 0..chips {
            baseband.push(
                a_nav * nav[n / g_nav] as f64 * pn.chip_at(n) + a_com * com_chips[n] as f64,
            );
        }
        let real = ChannelRealization {
            noise_seed: mix_seed(opts.seed, 2 * t + 1),
            ..base.clone()
        };
        let rx = apply_samples(&baseband, &real, cfg);
        let n = rx.len();
        let d = real.delay_chips % n;
        let mut aligned = Vec::with_capacity(n);
        aligned.extend_from_slice(&rx[d..]);
        aligned.extend_from_slice(&rx[..d]);
        let pn_t = pn.tile(n);
        let (nav_dec, _) = despread(&aligned, &pn_t, g_nav);
        let (com_dec, corr) = codec.decode(&aligned, &pn).expect("whole symbols");
        let nav_err = nav.iter().zip(&nav_dec).filter(|(a, b)| a != b).count() as u64;
        let com_err = com.iter().zip(&com_dec).filter(|(a, b)| a != b).count() as u64;
        (
            StreamCounts { bits: nav_bits as u64, errors: nav_err },
            StreamCounts { bits: com_bits as u64, errors: com_err },
            corr,
        )
    };

    let (nav_tot, com_tot, correlations) = (0..opts.trials)
        .into_par_iter()
        .map(run_trial)
        .reduce(
            || (StreamCounts::default(), StreamCounts::default(), 0u64),
            |mut a, b| {
                a.0.bits += b.0.bits;
                a.0.errors += b.0.errors;
                a.1.bits += b.1.bits;
                a.1.errors += b.1.errors;
                a.2 += b.2;
                a
            },
        );
    let total_symbols = symbols as u64 * opts.trials;
    Ok(CcskBaselineReport {
        ber: baseline_report(cfg, opts, nav_tot, com_tot),
        correlations,
        correlations_per_symbol: correlations as f64 / total_symbols as f64,
    })
}

/// Nominal transmit energy per frame in units of `2 P_s T_c` (chips times
/// normalized per-chip power); the parity check across schemes.
pub fn nominal_frame_energy(cfg: &SystemConfig, scheme: &BaselineScheme) -> Result<f64> {
    cfg.validate()?;
    let (nav_bits, _, t_frame) = frame_bits(cfg)?;
    let chips = (t_frame * cfg.chip_rate).round();
    let _ = nav_bits;
    Ok(match scheme {
        BaselineScheme::Tdma(p) => match p.power {
            TdmaPower::MatchedTotal => chips,
            TdmaPower::StreamShare => {
                chips * (p.slot_fraction * cfg.beta1 + (1.0 - p.slot_fraction) * cfg.beta2)
            }
        },
        BaselineScheme::Ccsk { .. } => chips * (cfg.beta1 + cfg.beta2),
    })
}

/// Nominal frame energy of the superposition scheme itself, same units.
pub fn noma_frame_energy(cfg: &SystemConfig) -> Result<f64> {
    cfg.validate()?;
    let (_, _, t_frame) = frame_bits(cfg)?;
    Ok((t_frame * cfg.chip_rate).round() * (cfg.beta1 + cfg.beta2))
}

/// Scheme-labelled results CSV; same columns as the sweep output plus the
/// leading scheme column.
pub fn scheme_results_csv(
    x_name: &str,
    rows: &[(String, f64, Result<BerReport>)],
) -> String {
    let mut out = format!(
        "scheme,{x_name},nav_ber,com_ber,nav_bits,nav_errors,com_bits,com_errors,\
         ci95_nav,ci95_com,trials,seed,status\n"
    );
    for (scheme, x, res) in rows {
        match res {
            Ok(r) => {
                let com = r.com_counts();
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},ok\n",
                    scheme,
                    fmt_f64(*x),
                    fmt_f64(r.nav_ber),
                    fmt_f64(r.com_ber),
                    r.nav.bits,
                    r.nav.errors,
                    com.bits,
                    com.errors,
                    fmt_f64(r.ci95_halfwidth.nav),
                    fmt_f64(r.ci95_halfwidth.com),
                    r.trials,
                    r.seed,
                ));
            }
            Err(e) => out.push_str(&format!(
                "{},{},,,,,,,,,,,error: {}\n",
                scheme,
                fmt_f64(*x),
                e.to_string().replace(',', ";")
            )),
        }
    }
    out
}

//! Monte Carlo experiment engine: seeded trial loops over the
//! transmit-channel-receive pipeline, stream-level error accounting with
//! confidence intervals, parameter sweeps and the impact-factor fit.
//!
//! One trial is one full frame. Per-trial seeds come from a counter-based
//! mixer, so partitioning trials across any number of workers returns
//! bit-identical reports.

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::thm4_uo_multicast_raw;
use crate::channel::{apply, ChannelRealization};
use crate::error::{Error, Result};
use crate::model::{Scenario, SystemConfig};
use crate::phy_rx::{decode_burst, decode_burst_genie, RxSideInfo};
use crate::phy_tx::{build_burst, compose_multicast};
use crate::pn::PnSequence;
use crate::util::{fmt_f64, mix_seed, wilson_halfwidth};

/// Execution options for a Monte Carlo run.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Number of frames.
    pub trials: u64,
    /// Base seed; every derived stream is a pure function of it.
    pub seed: u64,
    /// Worker threads; 0 uses the process-wide default pool.
    pub workers: usize,
    /// Force stage-1 decisions to ground truth before cancellation.
    pub genie_stage1: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            trials: 1000,
            seed: 1,
            workers: 0,
            genie_stage1: false,
        }
    }
}

/// Error count for one bit stream.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct StreamCounts {
    pub bits: u64,
    pub errors: u64,
}

impl StreamCounts {
    pub fn rate(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.errors as f64 / self.bits as f64
        }
    }

    fn add(&mut self, other: &StreamCounts) {
        self.bits += other.bits;
        self.errors += other.errors;
    }
}

/// 95% Wilson halfwidths per reported rate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Ci95 {
    pub nav: f64,
    pub com: f64,
    pub mul: f64,
    pub uni: f64,
}

/// Aggregated Monte Carlo error rates for one operating point.
#[derive(Debug, Clone, Serialize)]
pub struct BerReport {
    pub nav_ber: f64,
    pub com_ber: f64,
    pub mul_ber: f64,
    pub uni_ber: f64,
    pub trials: u64,
    pub nav: StreamCounts,
    pub split: StreamCounts,
    pub uni: StreamCounts,
    pub ci95_halfwidth: Ci95,
    pub cfg_snapshot: SystemConfig,
    pub seed: u64,
}

impl BerReport {
    /// Combined multi-cast stream counts (navigation plus split
    /// communication).
    pub fn mul_counts(&self) -> StreamCounts {
        StreamCounts {
            bits: self.nav.bits + self.split.bits,
            errors: self.nav.errors + self.split.errors,
        }
    }

    /// Pooled communication counts (split plus uni-cast).
    pub fn com_counts(&self) -> StreamCounts {
        StreamCounts {
            bits: self.split.bits + self.uni.bits,
            errors: self.split.errors + self.uni.errors,
        }
    }
}

#[derive(Default, Clone, Copy)]
struct TrialCounts {
    nav: StreamCounts,
    split: StreamCounts,
    uni: StreamCounts,
}

fn count_errors(truth: &[i8], decided: &[i8]) -> u64 {
    truth
        .iter()
        .zip(decided)
        .filter(|(a, b)| a != b)
        .count() as u64
}

fn run_trial(
    cfg: &SystemConfig,
    pn: &PnSequence,
    base: &ChannelRealization,
    opts: &RunOptions,
    trial: u64,
) -> TrialCounts {
    let tx_seed = mix_seed(opts.seed, 2 * trial);
    let noise_seed = mix_seed(opts.seed, 2 * trial + 1);
    let burst = build_burst(cfg, pn, tx_seed, None).expect("validated config");
    let real = ChannelRealization {
        noise_seed,
        ..base.clone()
    };
    let rx = apply(&burst, &real, cfg);
    let side = RxSideInfo {
        p_s: real.received_power(cfg),
        delay_chips: real.delay_chips,
    };
    let out = if opts.genie_stage1 {
        let truth: Vec<i8> = match cfg.scenario {
            Scenario::MoInac => compose_multicast(&burst.streams),
            Scenario::UoInac => burst.streams.uni.clone(),
        };
        decode_burst_genie(&rx, pn, cfg, &side, &truth).expect("lengths match by construction")
    } else {
        decode_burst(&rx, pn, cfg, &side).expect("lengths match by construction")
    };
    let k_nav = burst.streams.nav.len();
    let k_mul = burst.streams.split_com.len();
    TrialCounts {
        nav: StreamCounts {
            bits: k_nav as u64,
            errors: count_errors(&burst.streams.nav, &out.nav_bits),
        },
        split: StreamCounts {
            bits: k_mul as u64,
            errors: count_errors(&burst.streams.split_com, &out.com_bits[..k_mul]),
        },
        uni: StreamCounts {
            bits: burst.streams.uni.len() as u64,
            errors: count_errors(&burst.streams.uni, &out.com_bits[k_mul..]),
        },
    }
}

fn reduce_counts(cfg: &SystemConfig, opts: &RunOptions, totals: TrialCounts) -> BerReport {
    let nav_rate = totals.nav.rate();
    let split_rate = totals.split.rate();
    let uni_rate = totals.uni.rate();
    let mul = {
        let mut c = totals.nav;
        c.add(&totals.split);
        c
    };
    let com = {
        let mut c = totals.split;
        c.add(&totals.uni);
        c
    };
    // service mapping from raw stream counts: navigation is the multi-cast
    // stream, communication weights the split and uni-cast rates by the
    // resource split
    let com_ber = cfg.xi * split_rate + (1.0 - cfg.xi) * uni_rate;
    BerReport {
        nav_ber: nav_rate,
        com_ber,
        mul_ber: mul.rate(),
        uni_ber: uni_rate,
        trials: opts.trials,
        nav: totals.nav,
        split: totals.split,
        uni: totals.uni,
        ci95_halfwidth: Ci95 {
            nav: wilson_halfwidth(totals.nav.errors, totals.nav.bits, 1.96),
            com: wilson_halfwidth(com.errors, com.bits, 1.96),
            mul: wilson_halfwidth(mul.errors, mul.bits, 1.96),
            uni: wilson_halfwidth(totals.uni.errors, totals.uni.bits, 1.96),
        },
        cfg_snapshot: cfg.clone(),
        seed: opts.seed,
    }
}

/// Run one Monte Carlo operating point: `opts.trials` seeded frames through
/// transmit, channel and receive, with per-stream error accounting.
pub fn run_point(cfg: &SystemConfig, opts: &RunOptions) -> Result<BerReport> {
    cfg.layout()?;
    if opts.trials == 0 {
        return Err(Error::ConfigInvalid("trials must be >= 1".into()));
    }
    let pn = PnSequence::generate(
        cfg.pn_length,
        &crate::pn::PnGenerator::default_gold(),
        cfg.chip_rate,
    )?;
    let base = ChannelRealization::from_config(cfg, 0);

    let fold = |range: rayon::range::Iter<u64>| -> TrialCounts {
        range
            .map(|t| run_trial(cfg, &pn, &base, opts, t))
            .reduce(TrialCounts::default, |mut a, b| {
                a.nav.add(&b.nav);
                a.split.add(&b.split);
                a.uni.add(&b.uni);
                a
            })
    };

    let totals = if opts.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .map_err(|e| Error::ConfigInvalid(format!("worker pool: {e}")))?;
        pool.install(|| fold((0..opts.trials).into_par_iter()))
    } else {
        fold((0..opts.trials).into_par_iter())
    };
    Ok(reduce_counts(cfg, opts, totals))
}

/// Sweep axis for grid experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Satellite-user distance in meters.
    Distance,
    /// Communication data rate in bits/s.
    RCom,
    /// Multi-cast power share (the uni-cast share follows as its
    /// complement).
    Beta1,
    /// Communication resource split.
    Xi,
}

impl SweepAxis {
    pub fn apply(&self, cfg: &SystemConfig, value: f64) -> SystemConfig {
        let mut c = cfg.clone();
        match self {
            SweepAxis::Distance => c.distance = value,
            SweepAxis::RCom => c.r_com = value,
            SweepAxis::Beta1 => {
                c.beta1 = value;
                c.beta2 = 1.0 - value;
            }
            SweepAxis::Xi => c.xi = value,
        }
        c
    }

    pub fn column(&self) -> &'static str {
        match self {
            SweepAxis::Distance => "distance_m",
            SweepAxis::RCom => "r_com_bps",
            SweepAxis::Beta1 => "beta1",
            SweepAxis::Xi => "xi",
        }
    }
}

/// One sweep point: the axis value and the run outcome. Invalid points carry
/// their validation error so the sweep can continue past them.
pub type SweepPoint = (f64, Result<BerReport>);

/// Run a grid of operating points along one axis. Reports come back in
/// input order; per-point failures do not abort the sweep.
pub fn sweep(
    cfg_template: &SystemConfig,
    axis: SweepAxis,
    values: &[f64],
    opts: &RunOptions,
) -> Vec<SweepPoint> {
    values
        .iter()
        .enumerate()
        .map(|(idx, &v)| {
            let cfg = axis.apply(cfg_template, v);
            let point_opts = RunOptions {
                seed: mix_seed(opts.seed, 0x0053_5745 ^ (idx as u64) << 20),
                ..*opts
            };
            (v, run_point(&cfg, &point_opts))
        })
        .collect()
}

/// Render Monte Carlo sweep points as CSV with a stable column set.
pub fn results_csv(x_name: &str, points: &[SweepPoint]) -> String {
    let mut out = format!(
        "{x_name},scenario,nav_ber,com_ber,mul_ber,uni_ber,nav_bits,nav_errors,\
         split_bits,split_errors,uni_bits,uni_errors,ci95_nav,ci95_com,ci95_mul,ci95_uni,\
         trials,seed,status\n"
    );
    for (x, res) in points {
        match res {
            Ok(r) => out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},ok\n",
                fmt_f64(*x),
                r.cfg_snapshot.scenario.tag(),
                fmt_f64(r.nav_ber),
                fmt_f64(r.com_ber),
                fmt_f64(r.mul_ber),
                fmt_f64(r.uni_ber),
                r.nav.bits,
                r.nav.errors,
                r.split.bits,
                r.split.errors,
                r.uni.bits,
                r.uni.errors,
                fmt_f64(r.ci95_halfwidth.nav),
                fmt_f64(r.ci95_halfwidth.com),
                fmt_f64(r.ci95_halfwidth.mul),
                fmt_f64(r.ci95_halfwidth.uni),
                r.trials,
                r.seed,
            )),
            Err(e) => out.push_str(&format!(
                "{},,,,,,,,,,,,,,,,,,error: {}\n",
                fmt_f64(*x),
                e.to_string().replace(',', ";")
            )),
        }
    }
    out
}

/// Outcome of the impact-factor fit.
#[derive(Debug, Clone)]
pub struct DeltaFit {
    /// Fitted impact factor in (0, 1].
    pub delta: f64,
    /// RMS log-domain residual over the grid, in dB.
    pub residual_db: f64,
    /// (distance, measured multi-cast rate, received power) per grid point.
    pub points: Vec<(f64, f64, f64)>,
}

/// Least-squares fit of the impact factor: minimize the squared log-rate
/// error between the stage-2 closed form and measured multi-cast rates over
/// a distance grid in the uni-cast-oriented scenario.
pub fn estimate_delta(
    cfg_uo: &SystemConfig,
    distances: &[f64],
    opts: &RunOptions,
) -> Result<DeltaFit> {
    if cfg_uo.scenario != Scenario::UoInac {
        return Err(Error::WrongScenario(
            "impact-factor fit runs on the uni-cast-oriented scenario".into(),
        ));
    }
    let (g_mul, _) = cfg_uo.spreading_gains_f64();
    let sigma2 = cfg_uo.noise_power();

    let mut points = Vec::new();
    for (idx, &d) in distances.iter().enumerate() {
        let cfg = SweepAxis::Distance.apply(cfg_uo, d);
        let point_opts = RunOptions {
            seed: mix_seed(opts.seed, 0x00de17a ^ (idx as u64) << 20),
            ..*opts
        };
        let rep = run_point(&cfg, &point_opts)?;
        let real = ChannelRealization::from_config(&cfg, 0);
        let p_s = real.received_power(&cfg);
        if rep.mul_ber > 0.0 {
            points.push((d, rep.mul_ber, p_s));
        }
    }
    if points.is_empty() {
        return Err(Error::FitOutOfRange(
            "no grid point produced a nonzero multi-cast error rate".into(),
        ));
    }

    let loss = |delta: f64| -> f64 {
        points
            .iter()
            .map(|&(_, p_hat, p_s)| {
                let model = thm4_uo_multicast_raw(cfg_uo.beta1, g_mul, p_s, sigma2, delta);
                let diff = model.max(1e-300).log10() - p_hat.log10();
                diff * diff
            })
            .sum()
    };

    // golden-section search over (delta_min, 1]
    let delta_min = 1e-3;
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (delta_min, 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (loss(c), loss(d));
    for _ in 0..200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = loss(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = loss(d);
        }
    }
    let delta = 0.5 * (a + b);
    if delta <= delta_min * 1.01 {
        return Err(Error::FitOutOfRange(format!(
            "fitted impact factor collapsed to the lower bound ({delta:.4})"
        )));
    }
    let residual_db = (loss(delta) / points.len() as f64).sqrt() * 10.0;
    Ok(DeltaFit {
        delta,
        residual_db,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mo_cfg() -> SystemConfig {
        SystemConfig {
            frame_mul_symbols: 20,
            ..SystemConfig::default()
        }
    }

    fn uo_cfg() -> SystemConfig {
        SystemConfig {
            beta1: 0.3,
            beta2: 0.7,
            scenario: Scenario::UoInac,
            ..mo_cfg()
        }
    }

    #[test]
    fn noiseless_point_is_error_free() {
        let cfg = SystemConfig {
            noise_psd: 0.0,
            ..mo_cfg()
        };
        let rep = run_point(&cfg, &RunOptions { trials: 20, ..Default::default() }).unwrap();
        assert_eq!(rep.nav_ber, 0.0);
        assert_eq!(rep.com_ber, 0.0);
        assert_eq!(rep.mul_ber, 0.0);
        assert_eq!(rep.uni_ber, 0.0);
    }

    #[test]
    fn same_seed_same_report() {
        let cfg = mo_cfg();
        let opts = RunOptions { trials: 50, seed: 9, ..Default::default() };
        let a = run_point(&cfg, &opts).unwrap();
        let b = run_point(&cfg, &opts).unwrap();
        assert_eq!(a.nav.errors, b.nav.errors);
        assert_eq!(a.uni.errors, b.uni.errors);
        assert_eq!(a.nav_ber, b.nav_ber);
        let c = run_point(&cfg, &RunOptions { seed: 10, ..opts }).unwrap();
        assert!(c.uni.errors != a.uni.errors || c.nav.errors != a.nav.errors);
    }

    #[test]
    fn worker_count_invariance() {
        let cfg = mo_cfg();
        let base = RunOptions { trials: 40, seed: 4, ..Default::default() };
        let w1 = run_point(&cfg, &RunOptions { workers: 1, ..base }).unwrap();
        let w4 = run_point(&cfg, &RunOptions { workers: 4, ..base }).unwrap();
        assert_eq!(w1.nav.errors, w4.nav.errors);
        assert_eq!(w1.split.errors, w4.split.errors);
        assert_eq!(w1.uni.errors, w4.uni.errors);
    }

    #[test]
    fn aggregation_matches_stream_counts() {
        // service mapping recomputed from raw counts must match the report
        let cfg = SystemConfig {
            r_nav: 500.0,
            r_com: 4500.0,
            xi: 1.0 / 9.0,
            chip_rate: 4.092e6,
            b_fe: 8.184e6,
            frame_mul_symbols: 20,
            tx_power: 20.0,
            ..SystemConfig::default()
        };
        let rep = run_point(&cfg, &RunOptions { trials: 60, ..Default::default() }).unwrap();
        assert!(rep.uni.errors > 0, "operating point should be noisy");
        let com_expect =
            cfg.xi * rep.split.rate() + (1.0 - cfg.xi) * rep.uni.rate();
        assert!((rep.com_ber - com_expect).abs() < 1e-12);
        assert!((rep.nav_ber - rep.nav.rate()).abs() < 1e-12);
        let mul = rep.mul_counts();
        assert_eq!(mul.bits, rep.nav.bits + rep.split.bits);
    }

    #[test]
    fn sweep_continues_past_invalid_points() {
        let cfg = mo_cfg();
        // 2500 bps gives a fractional rate ratio -> per-point error
        let points = sweep(
            &cfg,
            SweepAxis::RCom,
            &[3000.0, 2500.0, 6000.0],
            &RunOptions { trials: 5, ..Default::default() },
        );
        assert_eq!(points.len(), 3);
        assert!(points[0].1.is_ok());
        assert!(points[1].1.is_err());
        assert!(points[2].1.is_ok());
        let csv = results_csv("r_com_bps", &points);
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.lines().nth(2).unwrap().contains("error:"));
    }

    #[test]
    fn genie_removes_propagation() {
        // with forced-correct stage 1 in the uni-cast-oriented scenario, the
        // multi-cast rate must not exceed the real receiver's
        let cfg = SystemConfig {
            tx_power: 2.0,
            ..uo_cfg()
        };
        let opts = RunOptions { trials: 300, seed: 3, ..Default::default() };
        let real = run_point(&cfg, &opts).unwrap();
        let genie = run_point(&cfg, &RunOptions { genie_stage1: true, ..opts }).unwrap();
        assert!(genie.mul_ber <= real.mul_ber);
    }

    #[test]
    fn wilson_coverage() {
        // known p = 1e-2 Bernoulli stream: the 95% interval covers p in at
        // least 190 of 200 repetitions
        let p = 1e-2;
        let n = 10_000u64;
        let mut covered = 0;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let mut k = 0u64;
            for _ in 0..n {
                if rng.random::<f64>() < p {
                    k += 1;
                }
            }
            let (center, half) = crate::util::wilson_interval(k, n, 1.96);
            if (p - center).abs() <= half {
                covered += 1;
            }
        }
        assert!(covered >= 190, "covered {covered}/200");
    }

    #[test]
    fn delta_fit_genie_returns_one() {
        // forced-perfect stage 1 leaves no propagation: the fitted factor
        // sits at the top of its range
        let cfg = SystemConfig {
            tx_power: 1.0,
            frame_mul_symbols: 40,
            ..uo_cfg()
        };
        let fit = estimate_delta(
            &cfg,
            &[16_000e3, 18_000e3, 20_000e3],
            &RunOptions { trials: 400, seed: 5, genie_stage1: true, ..Default::default() },
        )
        .unwrap();
        assert!((fit.delta - 1.0).abs() < 0.05, "delta = {}", fit.delta);
        assert!(fit.residual_db < 1.0, "residual {} dB", fit.residual_db);
    }
}

//! Pseudo-noise spreading sequences and correlation primitives.
//!
//! Sequences are kept as ±1 chips at one sample per chip (rectangular NRZ
//! pulses). The default code is an 11-stage truncated Gold sequence of length
//! 2046 built from the preferred pair x^11+x^2+1 and x^11+x^8+x^5+x^2+1; any
//! balanced sequence of the same length is interchangeable, since every
//! derived quantity depends only on the spreading gain.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Default tap exponents for the first generator polynomial (x^11 + x^2 + 1).
pub const DEFAULT_TAPS_1: [u32; 2] = [11, 2];
/// Default tap exponents for the second generator polynomial
/// (x^11 + x^8 + x^5 + x^2 + 1), the decimation-by-3 partner of the first.
pub const DEFAULT_TAPS_2: [u32; 4] = [11, 8, 5, 2];

/// How to produce the chip sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PnGenerator {
    /// XOR of two maximal-length sequences at selectable phases, truncated to
    /// the requested length.
    GoldTruncated {
        taps1: Vec<u32>,
        taps2: Vec<u32>,
        phase1: usize,
        phase2: usize,
    },
    /// Single maximal-length sequence from the given taps and seed.
    MSequence { taps: Vec<u32>, seed: u32 },
}

impl PnGenerator {
    /// Default Gold configuration with both phase selectors at zero.
    pub fn default_gold() -> Self {
        PnGenerator::GoldTruncated {
            taps1: DEFAULT_TAPS_1.to_vec(),
            taps2: DEFAULT_TAPS_2.to_vec(),
            phase1: 0,
            phase2: 0,
        }
    }
}

/// A ±1 chip sequence with its chip rate.
#[derive(Debug, Clone, PartialEq)]
pub struct PnSequence {
    chips: Vec<i8>,
    chip_rate: f64,
}

/// Fibonacci LFSR over cells 1..=n: output is cell n, feedback is the XOR of
/// the cells at the polynomial's tap exponents, shifted in at cell 1.
struct Lfsr {
    state: u32,
    taps: Vec<u32>,
    degree: u32,
}

impl Lfsr {
    fn new(taps: &[u32], seed: u32) -> Result<Self> {
        let degree = *taps
            .iter()
            .max()
            .ok_or_else(|| Error::ConfigInvalid("empty tap list".into()))?;
        if degree == 0 || degree > 20 || taps.iter().any(|&t| t == 0) {
            return Err(Error::ConfigInvalid(format!("bad tap exponents {taps:?}")));
        }
        let mask = (1u32 << degree) - 1;
        let state = seed & mask;
        if state == 0 {
            return Err(Error::ConfigInvalid("LFSR seed must be nonzero".into()));
        }
        Ok(Lfsr {
            state,
            taps: taps.to_vec(),
            degree,
        })
    }

    fn step(&mut self) -> u8 {
        // cell i lives in bit i-1
        let out = ((self.state >> (self.degree - 1)) & 1) as u8;
        let mut fb = 0u32;
        for &t in &self.taps {
            fb ^= (self.state >> (t - 1)) & 1;
        }
        self.state = ((self.state << 1) | fb) & ((1u32 << self.degree) - 1);
        out
    }

    /// Full period from the all-ones state; errors unless the polynomial is
    /// primitive (period 2^degree - 1).
    fn full_period_bits(taps: &[u32]) -> Result<Vec<u8>> {
        let degree = *taps.iter().max().unwrap_or(&0);
        let expected = (1usize << degree) - 1;
        let seed = (1u32 << degree) - 1;
        let mut lfsr = Lfsr::new(taps, seed)?;
        let start = lfsr.state;
        let mut bits = Vec::with_capacity(expected);
        for i in 0..=expected {
            bits.push(lfsr.step());
            if lfsr.state == start {
                if i + 1 == expected {
                    return Ok(bits);
                }
                return Err(Error::NonPrimitivePolynomial {
                    taps: taps.to_vec(),
                    period: i + 1,
                    expected,
                });
            }
        }
        Err(Error::NonPrimitivePolynomial {
            taps: taps.to_vec(),
            period: expected + 1,
            expected,
        })
    }

    /// Period check only, without materializing the sequence.
    fn check_primitive(taps: &[u32]) -> Result<()> {
        let degree = *taps.iter().max().unwrap_or(&0);
        let expected = (1usize << degree) - 1;
        let seed = (1u32 << degree) - 1;
        let mut lfsr = Lfsr::new(taps, seed)?;
        let start = lfsr.state;
        for i in 0..=expected {
            lfsr.step();
            if lfsr.state == start {
                if i + 1 == expected {
                    return Ok(());
                }
                return Err(Error::NonPrimitivePolynomial {
                    taps: taps.to_vec(),
                    period: i + 1,
                    expected,
                });
            }
        }
        Err(Error::NonPrimitivePolynomial {
            taps: taps.to_vec(),
            period: expected + 1,
            expected,
        })
    }
}

fn bit_to_chip(b: u8) -> i8 {
    1 - 2 * (b as i8)
}

impl PnSequence {
    /// Generate a sequence of `length` chips. Deterministic in its
    /// parameters; bit-reproducible across runs and platforms.
    pub fn generate(length: usize, generator: &PnGenerator, chip_rate: f64) -> Result<Self> {
        let chips = match generator {
            PnGenerator::GoldTruncated {
                taps1,
                taps2,
                phase1,
                phase2,
            } => {
                let m1 = Lfsr::full_period_bits(taps1)?;
                let m2 = Lfsr::full_period_bits(taps2)?;
                if m1.len() != m2.len() {
                    return Err(Error::LengthMismatch(format!(
                        "generator periods differ: {} vs {}",
                        m1.len(),
                        m2.len()
                    )));
                }
                let n = m1.len();
                if length > n {
                    return Err(Error::LengthExceedsPeriod {
                        requested: length,
                        period: n,
                    });
                }
                (0..length)
                    .map(|k| bit_to_chip(m1[(k + phase1) % n] ^ m2[(k + phase2) % n]))
                    .collect()
            }
            PnGenerator::MSequence { taps, seed } => {
                let degree = *taps.iter().max().unwrap_or(&0);
                let period = (1usize << degree) - 1;
                if length > period {
                    return Err(Error::LengthExceedsPeriod {
                        requested: length,
                        period,
                    });
                }
                // primitivity check runs over the full period regardless of
                // the requested truncation
                Lfsr::check_primitive(taps)?;
                let mut lfsr = Lfsr::new(taps, *seed)?;
                (0..length).map(|_| bit_to_chip(lfsr.step())).collect()
            }
        };
        Ok(PnSequence { chips, chip_rate })
    }

    /// Default 2046-chip truncated Gold code at the given chip rate.
    pub fn default_code(chip_rate: f64) -> Self {
        PnSequence::generate(2046, &PnGenerator::default_gold(), chip_rate)
            .expect("default generator parameters are valid")
    }

    pub fn len(&self) -> usize {
        self.chips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chips.is_empty()
    }

    pub fn chip_rate(&self) -> f64 {
        self.chip_rate
    }

    pub fn chips(&self) -> &[i8] {
        &self.chips
    }

    /// Chip at absolute index `k`, cycling over the sequence period.
    pub fn chip_at(&self, k: usize) -> f64 {
        self.chips[k % self.chips.len()] as f64
    }

    /// Cyclic extension of the sequence to `len` samples as f64, for tight
    /// correlation loops.
    pub fn tile(&self, len: usize) -> Vec<f64> {
        let kp = self.chips.len();
        (0..len).map(|k| self.chips[k % kp] as f64).collect()
    }

    /// Sequence cyclically shifted by `m` chips: `out[k] = chips[(k+m) % Kp]`.
    pub fn shifted(&self, m: usize) -> Vec<i8> {
        let kp = self.chips.len();
        (0..kp).map(|k| self.chips[(k + m) % kp]).collect()
    }

    /// Sum of chips; ±1 for a full-period maximal-length sequence.
    pub fn balance(&self) -> i64 {
        self.chips.iter().map(|&c| c as i64).sum()
    }

    /// Write the chips as text, one ±1 integer per line.
    pub fn export_text(&self, path: &Path) -> std::io::Result<()> {
        let mut f = std::fs::File::create(path)?;
        for &c in &self.chips {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }

    /// Read a chip sequence from text written by [`export_text`].
    ///
    /// [`export_text`]: PnSequence::export_text
    pub fn import_text(path: &Path, chip_rate: f64) -> std::io::Result<Self> {
        let f = BufReader::new(std::fs::File::open(path)?);
        let mut chips = Vec::new();
        for line in f.lines() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            match t {
                "1" | "+1" => chips.push(1i8),
                "-1" => chips.push(-1i8),
                other => {
                    return Err(std::io::Error::new(
                        std::io::ErrorKind::InvalidData,
                        format!("expected +/-1, got {other:?}"),
                    ))
                }
            }
        }
        Ok(PnSequence { chips, chip_rate })
    }
}

/// Correlate `samples[start..start+span]` against the sequence cycled at
/// absolute sample positions: `sum samples[start+k] * c[(start+k) mod Kp]`.
pub fn correlate(samples: &[f64], pn: &PnSequence, start: usize, span: usize) -> Result<f64> {
    if span == 0 || start + span > samples.len() {
        return Err(Error::OutOfRange {
            start,
            span,
            len: samples.len(),
        });
    }
    let kp = pn.len();
    let mut acc = 0.0;
    let mut idx = start % kp;
    for &s in &samples[start..start + span] {
        acc += s * pn.chips[idx] as f64;
        idx += 1;
        if idx == kp {
            idx = 0;
        }
    }
    Ok(acc)
}

/// Correlation of `samples` (one full sequence period) against every cyclic
/// shift of the sequence. Element `m` pairs the samples with the sequence
/// shifted by `m`, so a clean shifted replica peaks at its own shift.
pub fn circular_correlate_all_shifts(samples: &[f64], pn: &PnSequence) -> Result<Vec<f64>> {
    let kp = pn.len();
    if samples.len() != kp {
        return Err(Error::LengthMismatch(format!(
            "expected {} samples, got {}",
            kp,
            samples.len()
        )));
    }
    Ok((0..kp)
        .map(|m| {
            let mut acc = 0.0;
            for k in 0..kp {
                acc += samples[k] * pn.chips[(k + m) % kp] as f64;
            }
            acc
        })
        .collect())
}

/// Correlation of one period of `samples` against a single cyclic shift.
pub fn circular_correlate_at(samples: &[f64], pn: &PnSequence, shift: usize) -> Result<f64> {
    let kp = pn.len();
    if samples.len() != kp {
        return Err(Error::LengthMismatch(format!(
            "expected {} samples, got {}",
            kp,
            samples.len()
        )));
    }
    let mut acc = 0.0;
    for k in 0..kp {
        acc += samples[k] * pn.chips[(k + shift) % kp] as f64;
    }
    Ok(acc)
}

//! AWGN Monte Carlo harness: BPSK transmission of the all-zero codeword,
//! quantized min-sum decoding, and BER/FER records with deterministic
//! seeding, adaptive stopping, and checkpointed persistence.
//!
//! Simulating the all-zero codeword is sound because every assembled matrix
//! satisfies `H·0 = 0` and the decoder is codeword-symmetric (twisting
//! channel signs by any codeword translates its decisions by that codeword,
//! see the decoder module), so error statistics do not depend on the
//! transmitted codeword. Noise is drawn per frame from a generator seeded
//! by (master seed, point index, frame index), which makes any single frame
//! reproducible in isolation and the whole run independent of batch size
//! and thread count.

use crate::code::{MdMappingSet, ScCodeSpec};
use crate::decode::{DecodeConfig, MinSumDecoder, WindowPlan};
use crate::error::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

/// Frames drawn between stopping-rule checks.
const BATCH: u64 = 256;

// ------------------------------------------------------------------ plan --

/// How each frame is decoded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderMode {
    /// Whole-frame decoding of the assembled matrix.
    Block,
    /// 1D windowed decoding with window size `w`; single chain only.
    Windowed { w: usize },
    /// MD windowed decoding with local window size `w`.
    MdWindowed { w: usize },
}

/// A reproducible BER measurement plan.
///
/// SNR points are Eb/N0 in decibels with design-rate energy normalization:
/// at rate `R`, the noise variance is `σ² = 1 / (2·R·10^(EbN0/10))` and the
/// channel value of a received `y` is `2y/σ²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimPlan {
    /// Label of the code under test; recorded in outputs and the
    /// checkpoint digest.
    pub code: String,
    /// Eb/N0 points in dB, simulated in order.
    pub snr_db: Vec<f64>,
    /// Hard frame budget per point.
    pub max_frames: u64,
    /// Stop a point early once it has this many bit errors (0 disables the
    /// bit-error rule).
    pub min_bit_errors: u64,
    /// Additionally require this many erroneous frames before stopping
    /// early (0 disables the frame-error rule).
    pub min_frame_errors: u64,
    /// Master seed all frame generators derive from.
    pub seed: u64,
    /// Decoder settings shared by every frame.
    pub decoder: DecodeConfig,
    /// Decoding schedule.
    pub mode: DecoderMode,
}

impl SimPlan {
    /// A plan with the default budgets: up to 10⁶ frames per point,
    /// stopping early at 100 bit errors.
    pub fn new(code: impl Into<String>, snr_db: Vec<f64>) -> Self {
        Self {
            code: code.into(),
            snr_db,
            max_frames: 1_000_000,
            min_bit_errors: 100,
            min_frame_errors: 0,
            seed: 1,
            decoder: DecodeConfig::default(),
            mode: DecoderMode::Block,
        }
    }

    /// Rejects empty or non-finite plans.
    pub fn validate(&self) -> Result<()> {
        if self.snr_db.is_empty() {
            return Err(Error::invalid("plan needs at least one SNR point"));
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::invalid("SNR points must be finite"));
        }
        if self.max_frames == 0 {
            return Err(Error::invalid("frame budget must be at least one"));
        }
        self.decoder.validate()
    }

    /// Hex digest identifying the plan, stored in checkpoints.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("plan serializes");
        let mut h = Sha256::new();
        h.update(json.as_bytes());
        h.finalize().iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

/// Noise standard deviation at an Eb/N0 point for a given design rate.
pub fn noise_sigma(snr_db: f64, rate: f64) -> f64 {
    (1.0 / (2.0 * rate * 10f64.powf(snr_db / 10.0))).sqrt()
}

/// The seed of one frame's noise generator.
///
/// Chained 64-bit finalizer mixes of (master, point, frame), so seeds are
/// well spread even for consecutive indices.
pub fn frame_seed(master: u64, point: usize, frame: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ point as u64) ^ frame)
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

// --------------------------------------------------------------- records --

/// Measured error rates of one SNR point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerRecord {
    /// Eb/N0 in dB.
    pub snr_db: f64,
    /// Frames actually simulated.
    pub frames: u64,
    /// Wrong bits across all frames.
    pub bit_errors: u64,
    /// Frames with at least one wrong bit.
    pub frame_errors: u64,
    /// `bit_errors / (frames × bits_per_frame)`.
    pub ber: f64,
    /// `frame_errors / frames`.
    pub fer: f64,
    /// Σ of squared per-frame bit-error counts; bit errors cluster within
    /// frames, so error bars must be computed per frame.
    pub bit_errors_sq: u64,
    /// Code length used as the BER denominator.
    pub bits_per_frame: u64,
    /// Wall-clock seconds spent on this point. Not covered by the
    /// determinism guarantee.
    pub seconds: f64,
}

impl BerRecord {
    /// Clustered standard error of the BER: frames are independent, bits
    /// within a frame are not.
    pub fn ber_se(&self) -> f64 {
        if self.frames < 2 {
            return 0.0;
        }
        let f = self.frames as f64;
        let mean = self.bit_errors as f64 / f;
        let var = ((self.bit_errors_sq as f64) - f * mean * mean).max(0.0) / (f - 1.0);
        (var / f).sqrt() / self.bits_per_frame as f64
    }

    /// 95% confidence interval of the BER. Normal on the clustered standard
    /// error; a zero-error point falls back to the exact Poisson upper
    /// bound for zero observed events.
    pub fn ber_ci95(&self) -> (f64, f64) {
        let half = 1.96 * self.ber_se();
        let bits = (self.frames * self.bits_per_frame) as f64;
        let hi = if self.bit_errors == 0 { 3.69 / bits } else { self.ber + half };
        ((self.ber - half).max(0.0), hi)
    }
}

/// Indices of records whose BER rises above the previous point's by more
/// than three joint standard errors — inversions too large to blame on
/// Monte Carlo noise.
pub fn flag_inversions(records: &[BerRecord]) -> Vec<usize> {
    records
        .windows(2)
        .enumerate()
        .filter(|(_, pair)| pair[1].ber > pair[0].ber + 3.0 * (pair[0].ber_se() + pair[1].ber_se()))
        .map(|(i, _)| i + 1)
        .collect()
}

// -------------------------------------------------------------- simulate --

enum Runner {
    Block(MinSumDecoder),
    Window(Box<WindowPlan>),
}

impl Runner {
    fn build(
        spec: &ScCodeSpec,
        md: Option<&MdMappingSet>,
        mode: DecoderMode,
        cfg: DecodeConfig,
    ) -> Result<(Self, usize)> {
        let n = spec.n() * md.map_or(1, |m| m.l2);
        let runner = match mode {
            DecoderMode::Block => {
                let h = match md {
                    Some(md) => spec.assemble_md(md)?,
                    None => spec.assemble(),
                };
                Runner::Block(MinSumDecoder::new(&h, cfg)?)
            }
            DecoderMode::Windowed { w } => {
                if md.is_some() {
                    return Err(Error::invalid(
                        "1D windowed decoding drives a single chain; use the MD windowed mode for coupled sets",
                    ));
                }
                Runner::Window(Box::new(WindowPlan::one_dim(spec, w, cfg)?))
            }
            DecoderMode::MdWindowed { w } => {
                let md = md.ok_or_else(|| Error::invalid("MD windowed decoding needs a mapping set"))?;
                Runner::Window(Box::new(WindowPlan::md(spec, md, w, cfg)?))
            }
        };
        Ok((runner, n))
    }

    fn decode(&self, llr: &[f64]) -> Result<Vec<u8>> {
        match self {
            Runner::Block(dec) => Ok(dec.decode(llr)?.decisions),
            Runner::Window(plan) => plan.decode(llr),
        }
    }
}

/// Runs the plan and returns one record per SNR point.
pub fn simulate(spec: &ScCodeSpec, md: Option<&MdMappingSet>, plan: &SimPlan) -> Result<Vec<BerRecord>> {
    simulate_to(spec, md, plan, None)
}

/// Runs the plan with persistence: finished points are appended to the
/// checkpoint file after each point, and a rerun against the same plan
/// resumes after the last finished point instead of repeating it.
pub fn simulate_to(
    spec: &ScCodeSpec,
    md: Option<&MdMappingSet>,
    plan: &SimPlan,
    checkpoint: Option<&Path>,
) -> Result<Vec<BerRecord>> {
    spec.validate()?;
    plan.validate()?;
    let digest = plan.digest();
    let mut records = match checkpoint {
        Some(path) if path.exists() => load_checkpoint(path, &digest, plan)?,
        _ => Vec::new(),
    };
    let (runner, n) = Runner::build(spec, md, plan.mode, plan.decoder)?;
    let rate = spec.design_rate();
    for (pi, &snr_db) in plan.snr_db.iter().enumerate().skip(records.len()) {
        let started = Instant::now();
        let sigma = noise_sigma(snr_db, rate);
        let scale = 2.0 / (sigma * sigma);
        let (mut frames, mut bit_errors, mut frame_errors, mut bit_errors_sq) = (0u64, 0u64, 0u64, 0u64);
        while frames < plan.max_frames {
            let batch = BATCH.min(plan.max_frames - frames);
            let counts: Vec<u64> = (frames..frames + batch)
                .into_par_iter()
                .map(|f| -> Result<u64> {
                    let mut rng = ChaCha8Rng::seed_from_u64(frame_seed(plan.seed, pi, f));
                    let noise = Normal::new(0.0, sigma).expect("sigma is positive and finite");
                    let llr: Vec<f64> =
                        (0..n).map(|_| scale * (1.0 + noise.sample(&mut rng))).collect();
                    let decisions = runner.decode(&llr)?;
                    Ok(decisions.iter().map(|&b| u64::from(b)).sum())
                })
                .collect::<Result<_>>()?;
            for e in counts {
                bit_errors += e;
                bit_errors_sq += e * e;
                frame_errors += u64::from(e > 0);
            }
            frames += batch;
            let wants_early = plan.min_bit_errors > 0 || plan.min_frame_errors > 0;
            if wants_early && bit_errors >= plan.min_bit_errors && frame_errors >= plan.min_frame_errors {
                break;
            }
        }
        records.push(BerRecord {
            snr_db,
            frames,
            bit_errors,
            frame_errors,
            ber: bit_errors as f64 / (frames * n as u64) as f64,
            fer: frame_errors as f64 / frames as f64,
            bit_errors_sq,
            bits_per_frame: n as u64,
            seconds: started.elapsed().as_secs_f64(),
        });
        if let Some(path) = checkpoint {
            save_checkpoint(path, &digest, &records)?;
        }
    }
    Ok(records)
}

// ----------------------------------------------------------- persistence --

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    digest: String,
    records: Vec<BerRecord>,
}

fn load_checkpoint(path: &Path, digest: &str, plan: &SimPlan) -> Result<Vec<BerRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let ckpt: Checkpoint = serde_json::from_str(&text)?;
    if ckpt.digest != digest {
        return Err(Error::invalid(format!(
            "checkpoint {} was produced by a different plan",
            path.display()
        )));
    }
    if ckpt.records.len() > plan.snr_db.len()
        || ckpt.records.iter().zip(&plan.snr_db).any(|(r, &s)| r.snr_db != s)
    {
        return Err(Error::invalid("checkpoint records do not match the plan's SNR points"));
    }
    Ok(ckpt.records)
}

fn save_checkpoint(path: &Path, digest: &str, records: &[BerRecord]) -> Result<()> {
    let ckpt = Checkpoint { digest: digest.to_string(), records: records.to_vec() };
    let body = serde_json::to_string_pretty(&ckpt).expect("records serialize");
    fs::write(path, body).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Output format of [`emit_curve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveFormat {
    Csv,
    Json,
}

/// Writes records as a plotting-ready file: CSV with the columns
/// `snr_db,frames,bit_errors,frame_errors,ber,fer`, or a JSON array of the
/// full records.
pub fn emit_curve(records: &[BerRecord], format: CurveFormat, path: &Path) -> Result<()> {
    let body = match format {
        CurveFormat::Csv => {
            let mut s = String::from("snr_db,frames,bit_errors,frame_errors,ber,fer\n");
            for r in records {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{:e},{:e}",
                    r.snr_db, r.frames, r.bit_errors, r.frame_errors, r.ber, r.fer
                );
            }
            s
        }
        CurveFormat::Json => {
            let mut s = serde_json::to_string_pretty(records).expect("records serialize");
            s.push('\n');
            s
        }
    };
    fs::write(path, body).map_err(|e| Error::io(path.display().to_string(), e))
}

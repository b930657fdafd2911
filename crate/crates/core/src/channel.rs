//! BPSK over AWGN and the Monte Carlo BER harness.
//!
//! Bits map to `x = 1 − 2b`; `y = x + n` with `σ² = 1 / (2 R Eb/N0)` and the channel LLR is
//! `2y/σ²`. `R` is the exact information-bits-per-transmitted-bit rate of the frame, tail
//! included.
//!
//! Every frame draws its information bits and noise from its own ChaCha stream, selected by
//! (grid point, frame index) under the master seed, so results do not depend on how frames are
//! spread over worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::codec::{
    frame_rate, iterative_decode_counts, make_interleaver, turbo_encode, Interleaver, InterleaverKind, LlrFrame,
    PuncturePattern,
};
use crate::trellis::{build_trellis, RscSpec, Trellis};
use crate::{Error, Real, Result};

/// LLR magnitude used in place of `2/σ²` on the noiseless path.
pub const NOISELESS_LLR: f64 = 1.0e3;

/// Noise variance per real dimension for unit-energy BPSK.
pub fn noise_variance(ebno_db: f64, rate: f64) -> f64 {
    1.0 / (2.0 * rate * 10f64.powf(ebno_db / 10.0))
}

/// Adds Gaussian noise to the BPSK image of `bits` and returns channel LLRs.
pub fn awgn_llrs<T: Real, R: Rng + ?Sized>(bits: &[u8], ebno_db: f64, rate: f64, rng: &mut R) -> Vec<T> {
    let sigma2 = noise_variance(ebno_db, rate);
    let sigma = sigma2.sqrt();
    bits.iter()
        .map(|&b| {
            let x = 1.0 - 2.0 * (b & 1) as f64;
            let n: f64 = rng.sample(StandardNormal);
            T::of(2.0 * (x + sigma * n) / sigma2)
        })
        .collect()
}

/// [`awgn_llrs`] with a generator seeded from `seed`; identical seeds give identical LLRs.
pub fn awgn_transmit<T: Real>(bits: &[u8], ebno_db: f64, rate: f64, seed: u64) -> Result<Vec<T>> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::InvalidArgument(format!("rate {rate} is outside (0, 1]")));
    }
    if !ebno_db.is_finite() {
        return Err(Error::InvalidArgument("Eb/N0 must be finite".into()));
    }
    Ok(awgn_llrs(bits, ebno_db, rate, &mut ChaCha8Rng::seed_from_u64(seed)))
}

pub fn noiseless_llrs<T: Real>(bits: &[u8]) -> Vec<T> {
    bits.iter().map(|&b| T::of(if b & 1 == 0 { NOISELESS_LLR } else { -NOISELESS_LLR })).collect()
}

/// Generator for frame `index` of stream `stream` under `seed`.
pub fn frame_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((stream << 40) ^ index);
    rng
}

pub fn random_bits<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<u8> {
    (0..n).map(|_| rng.random::<bool>() as u8).collect()
}

/// Encodes random information bits and passes the punctured frame through the channel.
/// Returns the information bits and the depunctured LLR frame.
pub fn simulate_frame<T: Real, R: Rng + ?Sized>(
    trellis: &Trellis,
    il: &Interleaver,
    pat: &PuncturePattern,
    ebno_db: Option<f64>,
    rng: &mut R,
) -> Result<(Vec<u8>, LlrFrame<T>)> {
    let n = il.len();
    let info = random_bits(n, rng);
    let cw = turbo_encode(trellis, il, &info)?;
    let bits = cw.transmitted_bits(pat)?;
    let llrs = match ebno_db {
        Some(ebno) => awgn_llrs(&bits, ebno, frame_rate(pat, n, trellis.memory()), rng),
        None => noiseless_llrs(&bits),
    };
    let frame = LlrFrame::from_channel(&llrs, pat, n, trellis.memory())?;
    Ok((info, frame))
}

/// Monte Carlo BER run description.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub code: RscSpec,
    /// Interleaver size N (information bits per frame).
    pub n: usize,
    pub interleaver: InterleaverKind,
    pub pattern: PuncturePattern,
    pub ebno_db: Vec<f64>,
    pub iterations: usize,
    pub max_frames: u64,
    /// A grid point stops once this many bit errors (after the last iteration) are collected.
    pub min_errors: u64,
    pub seed: u64,
    /// Replace the channel by error-free, high-confidence LLRs.
    pub noiseless: bool,
    /// Frames dispatched between stopping-rule checks.
    pub batch: usize,
}

impl SimConfig {
    pub fn new(code: RscSpec, n: usize, pattern: PuncturePattern, ebno_db: Vec<f64>) -> Self {
        Self {
            code,
            n,
            interleaver: InterleaverKind::Random { seed: 1 },
            pattern,
            ebno_db,
            iterations: 10,
            max_frames: 100_000,
            min_errors: 100,
            seed: 1,
            noiseless: false,
            batch: 32,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidArgument("iterations must be at least 1".into()));
        }
        if self.ebno_db.is_empty() {
            return Err(Error::InvalidArgument("Eb/N0 grid is empty".into()));
        }
        if self.ebno_db.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("Eb/N0 values must be finite".into()));
        }
        if self.n == 0 || self.max_frames == 0 || self.batch == 0 {
            return Err(Error::InvalidArgument("n, max_frames and batch must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub ebno_db: f64,
    pub frames: u64,
    pub bits: u64,
    /// Bit errors after each iteration `1..=iterations`.
    pub bit_errors: Vec<u64>,
    /// Fewer than `min_errors` errors were collected before `max_frames`.
    pub insufficient: bool,
}

impl BerPoint {
    pub fn ber(&self, iteration: usize) -> f64 {
        if self.bits == 0 {
            return 0.0;
        }
        self.bit_errors[iteration] as f64 / self.bits as f64
    }

    pub fn final_ber(&self) -> f64 {
        self.ber(self.bit_errors.len() - 1)
    }

    pub fn final_errors(&self) -> u64 {
        *self.bit_errors.last().unwrap_or(&0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerCurve {
    pub points: Vec<BerPoint>,
}

impl BerCurve {
    /// CSV with columns `ebno_db,iteration,bit_errors,bits,ber,frames`.
    pub fn to_csv(&self, comment: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(c) = comment {
            out.push_str(&format!("# {c}\n"));
        }
        out.push_str("ebno_db,iteration,bit_errors,bits,ber,frames\n");
        for p in &self.points {
            for (it, errors) in p.bit_errors.iter().enumerate() {
                out.push_str(&format!(
                    "{:.4},{},{},{},{:.12e},{}\n",
                    p.ebno_db,
                    it + 1,
                    errors,
                    p.bits,
                    p.ber(it),
                    p.frames
                ));
            }
        }
        out
    }
}

/// Runs encode, puncture, AWGN, depuncture and iterative decoding at every grid point until the
/// stopping rule fires.
pub fn ber_simulation(cfg: &SimConfig) -> Result<BerCurve> {
    cfg.validate()?;
    let trellis = build_trellis(cfg.code);
    let il = make_interleaver(cfg.interleaver, cfg.n)?;
    let mut points = Vec::with_capacity(cfg.ebno_db.len());
    for (point, &ebno) in cfg.ebno_db.iter().enumerate() {
        let mut errors = vec![0u64; cfg.iterations];
        let mut frames = 0u64;
        while frames < cfg.max_frames && errors[cfg.iterations - 1] < cfg.min_errors {
            let count = (cfg.batch as u64).min(cfg.max_frames - frames);
            let batch: Vec<Vec<u64>> = (frames..frames + count)
                .into_par_iter()
                .map(|index| -> Result<Vec<u64>> {
                    let mut rng = frame_rng(cfg.seed, point as u64, index);
                    let channel = (!cfg.noiseless).then_some(ebno);
                    let (info, frame) = simulate_frame::<f64, _>(&trellis, &il, &cfg.pattern, channel, &mut rng)?;
                    iterative_decode_counts(&frame, &trellis, &il, cfg.iterations, &info)
                })
                .collect::<Result<_>>()?;
            for per_frame in batch {
                for (acc, e) in errors.iter_mut().zip(per_frame) {
                    *acc += e;
                }
            }
            frames += count;
        }
        points.push(BerPoint {
            ebno_db: ebno,
            frames,
            bits: frames * cfg.n as u64,
            insufficient: errors[cfg.iterations - 1] < cfg.min_errors,
            bit_errors: errors,
        });
    }
    Ok(BerCurve { points })
}

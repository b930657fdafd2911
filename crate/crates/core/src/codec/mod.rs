//! Turbo encoder, puncturing, log-MAP BCJR and the iterative decoder.

mod bcjr;
mod interleaver;
mod puncture;

pub use bcjr::{bcjr_decode, SisoOutput, TailLlrs};
pub use interleaver::{make_interleaver, Interleaver, InterleaverKind};
pub use puncture::{classify_pattern, depuncture, puncture, PatternClass, PuncturePattern};

use crate::exit::measure_mutual_information;
use crate::trellis::{encode_rsc, Trellis};
use crate::{Error, Real, Result};

/// Encoder output before puncturing. Only the first encoder is terminated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TurboCodeword {
    pub systematic: Vec<u8>,
    pub parity1: Vec<u8>,
    pub parity2: Vec<u8>,
    pub tail_systematic: Vec<u8>,
    pub tail_parity: Vec<u8>,
}

impl TurboCodeword {
    /// Channel bit sequence: punctured body followed by the tail as (systematic, parity) pairs.
    pub fn transmitted_bits(&self, pat: &PuncturePattern) -> Result<Vec<u8>> {
        let mut bits = puncture(self, pat)?;
        for (s, p) in self.tail_systematic.iter().zip(&self.tail_parity) {
            bits.push(*s);
            bits.push(*p);
        }
        Ok(bits)
    }
}

pub fn turbo_encode(trellis: &Trellis, il: &Interleaver, info: &[u8]) -> Result<TurboCodeword> {
    if info.len() != il.len() {
        return Err(Error::LengthMismatch { expected: il.len(), got: info.len() });
    }
    let first = encode_rsc(trellis, info, true);
    let second = encode_rsc(trellis, &il.interleave(info), false);
    Ok(TurboCodeword {
        systematic: first.systematic,
        parity1: first.parity,
        parity2: second.parity,
        tail_systematic: first.tail_systematic,
        tail_parity: first.tail_parity,
    })
}

/// Exact transmitted-bits-per-information-bit rate of a frame, tail included.
pub fn frame_rate(pat: &PuncturePattern, n: usize, memory: usize) -> f64 {
    n as f64 / (pat.punctured_len(n) + 2 * memory) as f64
}

/// Per-position channel LLRs after depuncturing; erased positions hold exactly 0.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrFrame<T> {
    pub sys: Vec<T>,
    pub par1: Vec<T>,
    pub par2: Vec<T>,
    pub tail_sys: Vec<T>,
    pub tail_par: Vec<T>,
}

impl<T: Real> LlrFrame<T> {
    pub fn erased(n: usize) -> Self {
        Self {
            sys: vec![T::zero(); n],
            par1: vec![T::zero(); n],
            par2: vec![T::zero(); n],
            tail_sys: Vec::new(),
            tail_par: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.sys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sys.is_empty()
    }

    /// Splits received LLRs laid out as by [`TurboCodeword::transmitted_bits`].
    pub fn from_channel(llrs: &[T], pat: &PuncturePattern, n: usize, memory: usize) -> Result<Self> {
        let body = pat.punctured_len(n);
        if llrs.len() != body + 2 * memory {
            return Err(Error::LengthMismatch { expected: body + 2 * memory, got: llrs.len() });
        }
        let mut frame = depuncture(&llrs[..body], pat, n)?;
        for pair in llrs[body..].chunks_exact(2) {
            frame.tail_sys.push(pair[0]);
            frame.tail_par.push(pair[1]);
        }
        Ok(frame)
    }
}

/// Mutual-information and error statistics of one decoder iteration.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IterationRecord {
    /// A-priori information entering decoder 1.
    pub ia1: f64,
    pub ie1: f64,
    /// A-priori information entering decoder 2; equal to `ie1` by construction.
    pub ia2: f64,
    pub ie2: f64,
    pub bit_errors: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome<T> {
    pub bits: Vec<u8>,
    /// Decoder-2 posterior LLRs after the final iteration, in natural order.
    pub posterior: Vec<T>,
    /// Present when the transmitted bits were supplied.
    pub iterations: Vec<IterationRecord>,
}

fn hard_decision<T: Real>(llrs: &[T]) -> Vec<u8> {
    llrs.iter().map(|&l| (l < T::zero()) as u8).collect()
}

/// Iterative turbo decoding. Decoder 1 sees the natural-order systematic and parity-1 LLRs plus
/// the tail; decoder 2 sees the interleaved systematic LLRs and parity 2. Each passes its
/// extrinsic output to the other as a-priori input; the first iteration starts with none.
/// When `truth` is given, the MI of every exchanged stream and the bit errors after each
/// iteration are recorded.
pub fn iterative_decode<T: Real>(
    frame: &LlrFrame<T>,
    trellis: &Trellis,
    il: &Interleaver,
    iterations: usize,
    truth: Option<&[u8]>,
) -> Result<DecodeOutcome<T>> {
    decode_loop(frame, trellis, il, iterations, truth, true)
}

/// Bit errors after each iteration, without the mutual-information bookkeeping.
pub fn iterative_decode_counts<T: Real>(
    frame: &LlrFrame<T>,
    trellis: &Trellis,
    il: &Interleaver,
    iterations: usize,
    truth: &[u8],
) -> Result<Vec<u64>> {
    let out = decode_loop(frame, trellis, il, iterations, Some(truth), false)?;
    Ok(out.iterations.iter().map(|r| r.bit_errors as u64).collect())
}

fn decode_loop<T: Real>(
    frame: &LlrFrame<T>,
    trellis: &Trellis,
    il: &Interleaver,
    iterations: usize,
    truth: Option<&[u8]>,
    measure_mi: bool,
) -> Result<DecodeOutcome<T>> {
    let n = il.len();
    if iterations == 0 {
        return Err(Error::InvalidArgument("at least one iteration is required".into()));
    }
    if frame.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: frame.len() });
    }
    if let Some(t) = truth {
        if t.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: t.len() });
        }
    }
    let tail = if frame.tail_sys.is_empty() && frame.tail_par.is_empty() {
        None
    } else {
        Some(TailLlrs { systematic: &frame.tail_sys[..], parity: &frame.tail_par[..] })
    };
    let truth_il = truth.filter(|_| measure_mi).map(|t| il.interleave(t));
    let sys_il = il.interleave(&frame.sys);

    let mut apriori1 = vec![T::zero(); n];
    let mut records = Vec::new();
    let mut posterior = Vec::new();
    let mut ia1 = 0.0;
    for _ in 0..iterations {
        let d1 = bcjr_decode(trellis, &frame.sys, &frame.par1, &apriori1, tail)?;
        let apriori2 = il.interleave(&d1.extrinsic);
        let d2 = bcjr_decode(trellis, &sys_il, &frame.par2, &apriori2, None)?;
        apriori1 = il.deinterleave(&d2.extrinsic);
        posterior = il.deinterleave(&d2.posterior);
        if let Some(t) = truth {
            let bit_errors = posterior.iter().zip(t).filter(|(&l, &b)| (l < T::zero()) as u8 != b).count();
            let mut record = IterationRecord { bit_errors, ..Default::default() };
            if let Some(t_il) = &truth_il {
                let ie1 = measure_mutual_information(&d1.extrinsic, t);
                let ie2 = measure_mutual_information(&d2.extrinsic, t_il);
                record = IterationRecord { ia1, ie1, ia2: ie1, ie2, bit_errors };
                ia1 = ie2;
            }
            records.push(record);
        }
    }
    Ok(DecodeOutcome { bits: hard_decision(&posterior), posterior, iterations: records })
}

//! Rate-1/2 recursive systematic convolutional (RSC) constituent codes.
//!
//! Generators are written in octal, most significant bit first, so `7` is `1 + D + D²` and `5` is
//! `1 + D²`. The register state packs the most recent register `s₁` into the most significant
//! bit: with memory 2, state `0b10` means `s₁ = 1, s₂ = 0`.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// A recursive systematic convolutional code `(1, ff/fb)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RscSpec {
    feedforward: u32,
    feedback: u32,
    memory: usize,
}

impl RscSpec {
    pub fn new(feedforward: u32, feedback: u32) -> Result<Self> {
        if feedback & 1 == 0 {
            return Err(Error::NonRecursiveFeedback(feedback));
        }
        if feedforward == 0 {
            return Err(Error::InvalidCode("feedforward polynomial is zero".into()));
        }
        let bits = |p: u32| 32 - p.leading_zeros() as usize;
        let memory = bits(feedforward).max(bits(feedback)) - 1;
        if memory == 0 {
            return Err(Error::InvalidCode("memory must be at least 1".into()));
        }
        if memory > 16 {
            return Err(Error::InvalidCode(format!("memory {memory} is too large")));
        }
        Ok(Self { feedforward, feedback, memory })
    }

    pub fn feedforward(&self) -> u32 {
        self.feedforward
    }

    pub fn feedback(&self) -> u32 {
        self.feedback
    }

    /// Encoder memory ν.
    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn num_states(&self) -> usize {
        1 << self.memory
    }

    /// Compact label usable in file names, e.g. `1_5_7`.
    pub fn file_label(&self) -> String {
        format!("1_{:o}_{:o}", self.feedforward, self.feedback)
    }
}

/// Parses `"1,<ff>/<fb>"`, e.g. `"1,5/7"`.
pub fn parse_generator_spec(text: &str) -> Result<RscSpec> {
    let malformed = || Error::MalformedGenerator(text.to_string());
    let t = text.trim();
    let rest = t.strip_prefix('1').ok_or_else(malformed)?.trim_start();
    let rest = rest.strip_prefix(',').ok_or_else(malformed)?.trim();
    let (ff, fb) = rest.split_once('/').ok_or_else(malformed)?;
    let octal = |s: &str| {
        let s = s.trim();
        if s.is_empty() || !s.bytes().all(|b| (b'0'..=b'7').contains(&b)) {
            return Err(malformed());
        }
        u32::from_str_radix(s, 8).map_err(|_| malformed())
    };
    RscSpec::new(octal(ff)?, octal(fb)?)
}

impl FromStr for RscSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_generator_spec(s)
    }
}

impl fmt::Display for RscSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "1,{:o}/{:o}", self.feedforward, self.feedback)
    }
}

/// One branch of the trellis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    pub next: usize,
    pub parity: u8,
}

/// State-transition graph of an [`RscSpec`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trellis {
    spec: RscSpec,
    transitions: Vec<[Transition; 2]>,
    termination_input: Vec<u8>,
}

/// Output of [`encode_rsc`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RscCodeword {
    pub systematic: Vec<u8>,
    pub parity: Vec<u8>,
    /// Termination inputs (empty when not terminated).
    pub tail_systematic: Vec<u8>,
    pub tail_parity: Vec<u8>,
    pub final_state: usize,
}

pub fn build_trellis(spec: RscSpec) -> Trellis {
    let nu = spec.memory;
    // coefficient of D^i
    let tap = |poly: u32, i: usize| ((poly >> i) & 1) as u8;
    let reg = |state: usize, i: usize| ((state >> (nu - i)) & 1) as u8;

    let mut transitions = Vec::with_capacity(spec.num_states());
    let mut termination_input = Vec::with_capacity(spec.num_states());
    for state in 0..spec.num_states() {
        let fb_sum = (1..=nu).fold(0u8, |acc, i| acc ^ (tap(spec.feedback, i) & reg(state, i)));
        let ff_sum = (1..=nu).fold(0u8, |acc, i| acc ^ (tap(spec.feedforward, i) & reg(state, i)));
        let branch = |input: u8| {
            let a = input ^ fb_sum;
            Transition {
                next: ((a as usize) << (nu - 1)) | (state >> 1),
                parity: (tap(spec.feedforward, 0) & a) ^ ff_sum,
            }
        };
        transitions.push([branch(0), branch(1)]);
        termination_input.push(fb_sum);
    }
    Trellis { spec, transitions, termination_input }
}

impl Trellis {
    pub fn spec(&self) -> RscSpec {
        self.spec
    }

    pub fn memory(&self) -> usize {
        self.spec.memory
    }

    pub fn num_states(&self) -> usize {
        self.transitions.len()
    }

    #[inline]
    pub fn step(&self, state: usize, input: u8) -> Transition {
        self.transitions[state][input as usize]
    }

    /// Input bit that zeroes the feedback into the register from `state`.
    #[inline]
    pub fn termination_input(&self, state: usize) -> u8 {
        self.termination_input[state]
    }
}

pub fn encode_rsc(trellis: &Trellis, info: &[u8], terminate: bool) -> RscCodeword {
    let mut state = 0;
    let mut parity = Vec::with_capacity(info.len());
    for &u in info {
        let t = trellis.step(state, u & 1);
        parity.push(t.parity);
        state = t.next;
    }
    let mut tail_systematic = Vec::new();
    let mut tail_parity = Vec::new();
    if terminate {
        for _ in 0..trellis.memory() {
            let u = trellis.termination_input(state);
            let t = trellis.step(state, u);
            tail_systematic.push(u);
            tail_parity.push(t.parity);
            state = t.next;
        }
    }
    RscCodeword {
        systematic: info.iter().map(|b| b & 1).collect(),
        parity,
        tail_systematic,
        tail_parity,
        final_state: state,
    }
}

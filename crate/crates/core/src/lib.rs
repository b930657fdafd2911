//! Analysis and simulation of rate-1/3 parallel concatenated convolutional codes (turbo codes)
//! and their punctured rate-1/2 children.
//!
//! * [`trellis`]: recursive systematic constituent codes and their trellises.
//! * [`wef`]: exact weight enumerators and the uniform-interleaver combination.
//! * [`bounds`]: ML union bounds over AWGN and the non-systematic improvement condition.
//! * [`codec`]: turbo encoding, puncturing, log-MAP BCJR and iterative decoding.
//! * [`channel`]: BPSK/AWGN transmission and the Monte Carlo BER harness.
//! * [`exit`]: EXIT transfer characteristics, decoding trajectories and tunnel detection.
//!
//! Soft-decision code is generic over [`Real`] (`f32` or `f64`); enumerators are exact
//! rationals. The `*64` aliases below fix the scalar to `f64`.

pub mod bounds;
pub mod channel;
pub mod codec;
mod error;
pub mod exit;
mod scalar;
pub mod trellis;
pub mod wef;

pub use error::{Error, Result};
pub use scalar::{log_sum_exp, max_star, softplus_neg, Real};

pub use codec::{Interleaver, LlrFrame, PatternClass, PuncturePattern};
pub use trellis::{build_trellis, parse_generator_spec, RscSpec, Trellis};
pub use wef::{EnumeratorKind, WeightEnumerator};

pub type LlrFrame64 = codec::LlrFrame<f64>;
pub type LlrFrame32 = codec::LlrFrame<f32>;
pub type BoundCurve64 = bounds::BoundCurve<f64>;
pub type BoundCurve32 = bounds::BoundCurve<f32>;
pub type DecodeOutcome64 = codec::DecodeOutcome<f64>;

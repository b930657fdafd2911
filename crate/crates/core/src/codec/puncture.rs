//! Periodic puncturing of the (systematic, parity-1, parity-2) streams.
//!
//! Text form: `p=<period>;s=<mask>;p1=<mask>;p2=<mask>` with binary masks of length `period`.
//! Position `i` of a stream is transmitted iff its mask has a `1` at `i mod period`; the
//! transmitted order is systematic, parity-1, parity-2 for each position in turn. Tail bits of
//! the terminated encoder are not punctured.

use std::fmt;
use std::str::FromStr;

use super::{LlrFrame, TurboCodeword};
use crate::bounds::Rate;
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatternClass {
    /// All systematic bits transmitted.
    Systematic,
    /// Some systematic bits transmitted.
    PartiallySystematic,
    /// No systematic bits transmitted.
    NonSystematic,
}

impl PatternClass {
    pub fn label(self) -> &'static str {
        match self {
            PatternClass::Systematic => "S",
            PatternClass::PartiallySystematic => "PS",
            PatternClass::NonSystematic => "NS",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PuncturePattern {
    period: usize,
    keep_systematic: Vec<bool>,
    keep_parity1: Vec<bool>,
    keep_parity2: Vec<bool>,
}

impl PuncturePattern {
    pub fn new(keep_systematic: Vec<bool>, keep_parity1: Vec<bool>, keep_parity2: Vec<bool>) -> Result<Self> {
        let period = keep_systematic.len();
        if period == 0 {
            return Err(Error::InvalidPattern("period must be at least 1".into()));
        }
        if keep_parity1.len() != period || keep_parity2.len() != period {
            return Err(Error::InvalidPattern("masks must all have the period's length".into()));
        }
        let pat = Self { period, keep_systematic, keep_parity1, keep_parity2 };
        let kept = pat.kept_per_period();
        if kept == 0 {
            return Err(Error::InvalidPattern("all-zero pattern transmits nothing".into()));
        }
        if kept < period {
            return Err(Error::InvalidPattern(format!("{kept} bits per {period} inputs gives a rate above 1")));
        }
        Ok(pat)
    }

    /// Unpunctured rate-1/3 mother code.
    pub fn parent() -> Self {
        Self::new(vec![true], vec![true], vec![true]).expect("valid")
    }

    /// Rate-1/2 child with every systematic bit punctured.
    pub fn non_systematic() -> Self {
        Self::new(vec![false], vec![true], vec![true]).expect("valid")
    }

    /// Rate-1/2 child sending 1 systematic and 7 parity bits per 4 inputs (`s=1000;p1=1111;p2=1110`).
    pub fn partially_systematic() -> Self {
        "p=4;s=1000;p1=1111;p2=1110".parse().expect("valid")
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn keep_systematic(&self) -> &[bool] {
        &self.keep_systematic
    }

    pub fn keep_parity1(&self) -> &[bool] {
        &self.keep_parity1
    }

    pub fn keep_parity2(&self) -> &[bool] {
        &self.keep_parity2
    }

    pub fn kept_per_period(&self) -> usize {
        [&self.keep_systematic, &self.keep_parity1, &self.keep_parity2]
            .iter()
            .map(|m| m.iter().filter(|&&k| k).count())
            .sum()
    }

    /// Information bits per transmitted bit, ignoring the tail.
    pub fn rate(&self) -> Rate {
        Rate::new(self.period as i64, self.kept_per_period() as i64)
    }

    /// Number of body bits transmitted for `n` information bits.
    pub fn punctured_len(&self, n: usize) -> usize {
        (0..n).map(|i| self.kept_at(i)).sum()
    }

    fn kept_at(&self, i: usize) -> usize {
        let r = i % self.period;
        self.keep_systematic[r] as usize + self.keep_parity1[r] as usize + self.keep_parity2[r] as usize
    }

    pub fn classify(&self) -> PatternClass {
        classify_pattern(self)
    }
}

pub fn classify_pattern(pat: &PuncturePattern) -> PatternClass {
    if pat.keep_systematic.iter().all(|&k| k) {
        PatternClass::Systematic
    } else if pat.keep_systematic.iter().all(|&k| !k) {
        PatternClass::NonSystematic
    } else {
        PatternClass::PartiallySystematic
    }
}

fn mask_text(mask: &[bool]) -> String {
    mask.iter().map(|&k| if k { '1' } else { '0' }).collect()
}

impl fmt::Display for PuncturePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "p={};s={};p1={};p2={}",
            self.period,
            mask_text(&self.keep_systematic),
            mask_text(&self.keep_parity1),
            mask_text(&self.keep_parity2)
        )
    }
}

impl FromStr for PuncturePattern {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = |why: &str| Error::InvalidPattern(format!("`{text}`: {why}"));
        let mut period = None;
        let (mut s, mut p1, mut p2) = (None, None, None);
        for field in text.trim().split(';').map(str::trim).filter(|f| !f.is_empty()) {
            let (key, value) = field.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            let mask = || -> Result<Vec<bool>> {
                value
                    .trim()
                    .chars()
                    .map(|c| match c {
                        '1' => Ok(true),
                        '0' => Ok(false),
                        _ => Err(bad("masks are binary")),
                    })
                    .collect()
            };
            match key.trim() {
                "p" => period = Some(value.trim().parse::<usize>().map_err(|_| bad("bad period"))?),
                "s" => s = Some(mask()?),
                "p1" => p1 = Some(mask()?),
                "p2" => p2 = Some(mask()?),
                other => return Err(bad(&format!("unknown key `{other}`"))),
            }
        }
        let period = period.ok_or_else(|| bad("missing p"))?;
        let (s, p1, p2) = (s.ok_or_else(|| bad("missing s"))?, p1.ok_or_else(|| bad("missing p1"))?, p2.ok_or_else(|| bad("missing p2"))?);
        if s.len() != period {
            return Err(bad("mask length differs from period"));
        }
        Self::new(s, p1, p2)
    }
}

/// Serializes the kept body bits (tail excluded).
pub fn puncture(codeword: &TurboCodeword, pat: &PuncturePattern) -> Result<Vec<u8>> {
    let n = codeword.systematic.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty codeword".into()));
    }
    if codeword.parity1.len() != n || codeword.parity2.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: codeword.parity1.len().min(codeword.parity2.len()) });
    }
    Ok(puncture_streams(&codeword.systematic, &codeword.parity1, &codeword.parity2, pat))
}

pub(crate) fn puncture_streams<V: Copy>(sys: &[V], par1: &[V], par2: &[V], pat: &PuncturePattern) -> Vec<V> {
    let mut out = Vec::with_capacity(pat.punctured_len(sys.len()));
    for i in 0..sys.len() {
        let r = i % pat.period;
        if pat.keep_systematic[r] {
            out.push(sys[i]);
        }
        if pat.keep_parity1[r] {
            out.push(par1[i]);
        }
        if pat.keep_parity2[r] {
            out.push(par2[i]);
        }
    }
    out
}

/// Places received body LLRs at their positions; erased positions get LLR 0. The returned frame
/// has no tail.
pub fn depuncture<T: Real>(llrs: &[T], pat: &PuncturePattern, n: usize) -> Result<LlrFrame<T>> {
    let expected = pat.punctured_len(n);
    if llrs.len() != expected {
        return Err(Error::LengthMismatch { expected, got: llrs.len() });
    }
    let mut frame = LlrFrame::erased(n);
    let mut it = llrs.iter().copied();
    for i in 0..n {
        let r = i % pat.period;
        if pat.keep_systematic[r] {
            frame.sys[i] = it.next().expect("length checked");
        }
        if pat.keep_parity1[r] {
            frame.par1[i] = it.next().expect("length checked");
        }
        if pat.keep_parity2[r] {
            frame.par2[i] = it.next().expect("length checked");
        }
    }
    Ok(frame)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::TurboCodeword;

    fn codeword(n: usize) -> TurboCodeword {
        TurboCodeword {
            systematic: (0..n).map(|i| (i % 2) as u8).collect(),
            parity1: (0..n).map(|i| (i % 3 == 0) as u8).collect(),
            parity2: (0..n).map(|i| (i % 5 == 0) as u8).collect(),
            tail_systematic: vec![],
            tail_parity: vec![],
        }
    }

    #[test]
    fn classification() {
        let p: PuncturePattern = "p=4;s=1111;p1=1111;p2=0000".parse().unwrap();
        assert_eq!(p.classify(), PatternClass::Systematic);
        let p: PuncturePattern = "p=4;s=0000;p1=1111;p2=1111".parse().unwrap();
        assert_eq!(p.classify(), PatternClass::NonSystematic);
        assert_eq!(PuncturePattern::partially_systematic().classify(), PatternClass::PartiallySystematic);
    }

    #[test]
    fn rates() {
        assert_eq!(PuncturePattern::parent().rate(), Rate::new(1, 3));
        assert_eq!(PuncturePattern::non_systematic().rate(), Rate::new(1, 2));
        assert_eq!(PuncturePattern::partially_systematic().rate(), Rate::new(1, 2));
    }

    #[test]
    fn text_round_trip_and_errors() {
        let p = PuncturePattern::partially_systematic();
        assert_eq!(p.to_string(), "p=4;s=1000;p1=1111;p2=1110");
        assert_eq!(p.to_string().parse::<PuncturePattern>().unwrap(), p);
        for bad in ["p=4;s=100;p1=1111;p2=1111", "p=1;s=0;p1=0;p2=0", "p=2;s=00;p1=10;p2=00", "s=1;p1=1;p2=1", "p=1;s=2;p1=1;p2=1", "p=1;s=1;p1=1;p2=1;q=1"] {
            assert!(bad.parse::<PuncturePattern>().is_err(), "{bad}");
        }
    }

    #[test]
    fn all_ones_is_identity() {
        let cw = codeword(6);
        let out = puncture(&cw, &PuncturePattern::parent()).unwrap();
        let expect: Vec<u8> = (0..6).flat_map(|i| [cw.systematic[i], cw.parity1[i], cw.parity2[i]]).collect();
        assert_eq!(out, expect);
    }

    #[test]
    fn ns_and_ps_lengths() {
        assert_eq!(puncture(&codeword(1000), &PuncturePattern::non_systematic()).unwrap().len(), 2000);
        assert_eq!(puncture(&codeword(8), &PuncturePattern::partially_systematic()).unwrap().len(), 16);
        assert!(puncture(&codeword(0), &PuncturePattern::parent()).is_err());
    }

    #[test]
    fn depuncture_places_and_erases() {
        let pat = PuncturePattern::non_systematic();
        let llrs: Vec<f64> = (0..20).map(|i| i as f64 + 1.0).collect();
        let f = depuncture(&llrs, &pat, 10).unwrap();
        assert!(f.sys.iter().all(|&x| x == 0.0));
        assert_eq!(f.par1[3], 7.0);
        assert_eq!(f.par2[3], 8.0);
        assert!(depuncture(&llrs[..19], &pat, 10).is_err());

        let pass = depuncture(&llrs[..18], &PuncturePattern::parent(), 6).unwrap();
        assert_eq!(pass.sys, vec![1.0, 4.0, 7.0, 10.0, 13.0, 16.0]);
    }
}

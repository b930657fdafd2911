//! Exact weight enumerating functions.
//!
//! A [`WeightEnumerator`] is a sparse table `(w, k) -> coefficient` where `w` is the information
//! weight and `k` is either the parity weight `j` (CWEF kinds) or the total output weight `d`
//! (IOWEF kinds). Constituent tables hold integers; combining two constituents through the
//! uniform interleaver divides by `C(N, w)`, so every coefficient is kept as an exact
//! [`BigRational`].
//!
//! Termination convention: the constituent encoder is driven back to the zero state by `ν` tail
//! inputs. Tail parity is counted in `j`; tail inputs are not counted in `w`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::trellis::Trellis;
use crate::{Error, Result};

/// Default information-weight truncation.
pub const DEFAULT_W_MAX: usize = 6;
/// Default parity-weight truncation.
pub const DEFAULT_J_MAX: usize = 60;
/// Largest block length accepted by [`exhaustive_cwef_oracle`].
pub const ORACLE_MAX_N: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnumeratorKind {
    /// `A^C_{w,j}` of a constituent code.
    ConstituentCwef,
    /// `A^P_{w,j}` of the parallel concatenation under the uniform interleaver.
    PcccCwef,
    /// `B^P_{w,d}` with `d = w + j`.
    PcccIowef,
    /// `B^P'_{w,d'}` with `d' = j` (systematic stream punctured).
    NsIowef,
}

impl EnumeratorKind {
    pub fn name(self) -> &'static str {
        match self {
            EnumeratorKind::ConstituentCwef => "constituent-cwef",
            EnumeratorKind::PcccCwef => "pccc-cwef",
            EnumeratorKind::PcccIowef => "pccc-iowef",
            EnumeratorKind::NsIowef => "ns-iowef",
        }
    }

    pub fn is_iowef(self) -> bool {
        matches!(self, EnumeratorKind::PcccIowef | EnumeratorKind::NsIowef)
    }
}

impl fmt::Display for EnumeratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnumeratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "constituent-cwef" => EnumeratorKind::ConstituentCwef,
            "pccc-cwef" => EnumeratorKind::PcccCwef,
            "pccc-iowef" => EnumeratorKind::PcccIowef,
            "ns-iowef" => EnumeratorKind::NsIowef,
            other => return Err(Error::Parse(format!("unknown enumerator kind `{other}`"))),
        })
    }
}

/// Which input sequences a constituent enumerator counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Every length-N input, followed by the ν forced tail inputs.
    Tail,
    /// Only inputs that return the encoder to state zero on their own (free error events).
    SelfTerminating,
}

/// Sparse, exact weight enumerator.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightEnumerator {
    n: usize,
    kind: EnumeratorKind,
    w_max: usize,
    j_max: usize,
    clamped: bool,
    coeffs: BTreeMap<(usize, usize), BigRational>,
}

impl WeightEnumerator {
    fn empty(n: usize, kind: EnumeratorKind, w_max: usize, j_max: usize) -> Self {
        Self { n, kind, w_max, j_max, clamped: false, coeffs: BTreeMap::new() }
    }

    /// Interleaver size N.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> EnumeratorKind {
        self.kind
    }

    pub fn w_max(&self) -> usize {
        self.w_max
    }

    /// Parity-weight truncation (applies to `j` even for IOWEF kinds).
    pub fn j_max(&self) -> usize {
        self.j_max
    }

    /// True when the requested limits exceeded what the block length allows and were reduced.
    pub fn clamped(&self) -> bool {
        self.clamped
    }

    /// Coefficient at `(w, k)`; zero when absent.
    pub fn get(&self, w: usize, k: usize) -> BigRational {
        self.coeffs.get(&(w, k)).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Nonzero entries in `(w, k)` order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &BigRational)> {
        self.coeffs.iter().map(|(&(w, k), c)| (w, k, c))
    }

    /// Nonzero entries of one information-weight row.
    pub fn row(&self, w: usize) -> impl Iterator<Item = (usize, &BigRational)> {
        self.coeffs.range((w, 0)..=(w, usize::MAX)).map(|(&(_, k), c)| (k, c))
    }

    /// Information weights with at least one nonzero entry.
    pub fn weights(&self) -> Vec<usize> {
        let mut ws: Vec<usize> = self.coeffs.keys().map(|&(w, _)| w).collect();
        ws.dedup();
        ws
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Sum of all coefficients.
    pub fn total(&self) -> BigRational {
        self.coeffs.values().fold(BigRational::zero(), |acc, c| acc + c)
    }

    /// Smallest second index in row `w`.
    pub fn min_index(&self, w: usize) -> Option<usize> {
        self.row(w).next().map(|(k, _)| k)
    }

    fn insert(&mut self, w: usize, k: usize, c: BigRational) {
        if !c.is_zero() {
            self.coeffs.insert((w, k), c);
        }
    }

    /// Natural logarithms of the coefficients, `(w, k, ln c)`.
    pub fn ln_coefficients(&self) -> Vec<(usize, usize, f64)> {
        self.iter().map(|(w, k, c)| (w, k, ln_rational(c))).collect()
    }

    /// Text form: header `N w_max j_max kind`, then `w k coefficient` lines.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {} {}\n", self.n, self.w_max, self.j_max, self.kind);
        for (w, k, c) in self.iter() {
            if c.denom().is_one() {
                out.push_str(&format!("{w} {k} {}\n", c.numer()));
            } else {
                out.push_str(&format!("{w} {k} {}/{}\n", c.numer(), c.denom()));
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::Parse("empty enumerator file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::Parse(format!("line 1: expected `N w_max j_max kind`, got `{header}`")));
        }
        let num = |s: &str, line: usize| {
            s.parse::<usize>().map_err(|_| Error::Parse(format!("line {line}: bad integer `{s}`")))
        };
        let kind: EnumeratorKind = fields[3].parse()?;
        let mut e = Self::empty(num(fields[0], 1)?, kind, num(fields[1], 1)?, num(fields[2], 1)?);
        for (idx, line) in lines {
            let lineno = idx + 1;
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(Error::Parse(format!("line {lineno}: expected `w k coefficient`")));
            }
            let w = num(parts[0], lineno)?;
            let k = num(parts[1], lineno)?;
            let c: BigRational = parts[2]
                .parse()
                .map_err(|_| Error::Parse(format!("line {lineno}: bad coefficient `{}`", parts[2])))?;
            if c < BigRational::zero() {
                return Err(Error::Parse(format!("line {lineno}: negative coefficient")));
            }
            if w > e.w_max {
                return Err(Error::Parse(format!("line {lineno}: w = {w} exceeds w_max")));
            }
            e.insert(w, k, c);
        }
        Ok(e)
    }
}

/// `ln(x)` for an arbitrarily large unsigned integer.
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `ln(x)` for a nonnegative rational.
pub fn ln_rational(x: &BigRational) -> f64 {
    let numer = x.numer().to_biguint().unwrap_or_default();
    let denom = x.denom().to_biguint().unwrap_or_else(BigUint::one);
    ln_biguint(&numer) - ln_biguint(&denom)
}

fn check_limits(w_max: usize, j_max: usize) -> Result<()> {
    if w_max < 2 || j_max < 2 {
        return Err(Error::InvalidArgument(format!("truncation limits must be at least 2 (got w_max {w_max}, j_max {j_max})")));
    }
    Ok(())
}

/// Constituent CWEF `A^C_{w,j}` of the tail-terminated code, by dynamic programming over
/// (time, state, w, j) with exact integer counts.
pub fn constituent_cwef(trellis: &Trellis, n: usize, w_max: usize, j_max: usize) -> Result<WeightEnumerator> {
    constituent_cwef_with(trellis, n, w_max, j_max, Termination::Tail)
}

pub fn constituent_cwef_with(
    trellis: &Trellis,
    n: usize,
    w_max: usize,
    j_max: usize,
    termination: Termination,
) -> Result<WeightEnumerator> {
    if n == 0 {
        return Err(Error::InvalidArgument("block length must be at least 1".into()));
    }
    check_limits(w_max, j_max)?;
    let nu = trellis.memory();
    let w_cap = w_max.min(n);
    let j_cap = j_max.min(n + nu);
    let states = trellis.num_states();
    let stride_w = j_cap + 1;
    let stride_s = (w_cap + 1) * stride_w;
    let idx = |s: usize, w: usize, j: usize| s * stride_s + w * stride_w + j;

    let mut cur = vec![BigUint::zero(); states * stride_s];
    let mut next = cur.clone();
    cur[idx(0, 0, 0)] = BigUint::one();
    for t in 0..n {
        for c in next.iter_mut() {
            c.set_zero();
        }
        let w_hi = t.min(w_cap);
        let j_hi = t.min(j_cap);
        for s in 0..states {
            for w in 0..=w_hi {
                for j in 0..=j_hi {
                    let c = &cur[idx(s, w, j)];
                    if c.is_zero() {
                        continue;
                    }
                    for input in 0..2u8 {
                        let tr = trellis.step(s, input);
                        let (nw, nj) = (w + input as usize, j + tr.parity as usize);
                        if nw <= w_cap && nj <= j_cap {
                            next[idx(tr.next, nw, nj)] += c;
                        }
                    }
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }

    let mut out = WeightEnumerator::empty(n, EnumeratorKind::ConstituentCwef, w_cap, j_cap);
    out.clamped = w_cap < w_max || j_cap < j_max;
    let mut acc: BTreeMap<(usize, usize), BigUint> = BTreeMap::new();
    for s in 0..states {
        // parity emitted while flushing the registers from `s`
        let (tail_weight, end) = match termination {
            Termination::Tail => {
                let mut st = s;
                let mut weight = 0;
                for _ in 0..nu {
                    let tr = trellis.step(st, trellis.termination_input(st));
                    weight += tr.parity as usize;
                    st = tr.next;
                }
                (weight, st)
            }
            Termination::SelfTerminating => (0, s),
        };
        if end != 0 {
            continue;
        }
        for w in 0..=w_cap {
            for j in 0..=j_cap {
                let c = &cur[idx(s, w, j)];
                if c.is_zero() || j + tail_weight > j_cap {
                    continue;
                }
                *acc.entry((w, j + tail_weight)).or_default() += c;
            }
        }
    }
    for ((w, j), c) in acc {
        out.insert(w, j, BigRational::from_integer(c.into()));
    }
    Ok(out)
}

/// Brute-force constituent CWEF over all `2^N` inputs, without truncation.
pub fn exhaustive_cwef_oracle(trellis: &Trellis, n: usize) -> Result<WeightEnumerator> {
    if n > ORACLE_MAX_N {
        return Err(Error::TooLarge { got: n, max: ORACLE_MAX_N });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("block length must be at least 1".into()));
    }
    let nu = trellis.memory();
    let mut counts: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut info = vec![0u8; n];
    for word in 0u64..(1u64 << n) {
        for (i, b) in info.iter_mut().enumerate() {
            *b = ((word >> i) & 1) as u8;
        }
        let cw = crate::trellis::encode_rsc(trellis, &info, true);
        let w = info.iter().filter(|&&b| b == 1).count();
        let j = cw.parity.iter().chain(&cw.tail_parity).filter(|&&b| b == 1).count();
        *counts.entry((w, j)).or_default() += 1;
    }
    let mut out = WeightEnumerator::empty(n, EnumeratorKind::ConstituentCwef, n, n + nu);
    for ((w, j), c) in counts {
        out.insert(w, j, BigRational::from_integer(c.into()));
    }
    Ok(out)
}

/// Squares one CWEF row as a polynomial in Z, keeping degrees up to `j_max`.
pub fn square_row(row: &[(usize, BigRational)], j_max: usize) -> BTreeMap<usize, BigRational> {
    let mut out: BTreeMap<usize, BigRational> = BTreeMap::new();
    for (j1, c1) in row {
        for (j2, c2) in row {
            if j1 + j2 <= j_max {
                *out.entry(j1 + j2).or_insert_with(BigRational::zero) += c1 * c2;
            }
        }
    }
    out
}

/// PCCC CWEF under the uniform interleaver: `A^P(w, Z) = [A^C(w, Z)]² / C(N, w)`.
///
/// Degrees above `j_max` are dropped since the truncated constituent rows cannot produce them
/// completely.
pub fn uniform_interleaver_combine(cwef: &WeightEnumerator, n: usize) -> Result<WeightEnumerator> {
    if cwef.kind != EnumeratorKind::ConstituentCwef {
        return Err(Error::KindMismatch { expected: "constituent-cwef", found: cwef.kind.name() });
    }
    if cwef.n != n {
        return Err(Error::LengthMismatch { expected: cwef.n, got: n });
    }
    let mut out = WeightEnumerator::empty(n, EnumeratorKind::PcccCwef, cwef.w_max, cwef.j_max);
    out.clamped = cwef.clamped;
    for w in cwef.weights() {
        if w > n {
            return Err(Error::WeightOutOfRange { w, w_max: n });
        }
        let row: Vec<(usize, BigRational)> = cwef.row(w).map(|(j, c)| (j, c.clone())).collect();
        let denom = BigRational::from_integer(binomial(BigUint::from(n), BigUint::from(w)).into());
        for (j, c) in square_row(&row, cwef.j_max) {
            out.insert(w, j, c / &denom);
        }
    }
    Ok(out)
}

/// IOWEF of the systematic PCCC (`d = w + j`) or its non-systematic child (`d' = j`).
pub fn cwef_to_iowef(pccc: &WeightEnumerator, systematic: bool) -> Result<WeightEnumerator> {
    if pccc.kind != EnumeratorKind::PcccCwef {
        return Err(Error::KindMismatch { expected: "pccc-cwef", found: pccc.kind.name() });
    }
    let kind = if systematic { EnumeratorKind::PcccIowef } else { EnumeratorKind::NsIowef };
    let mut out = WeightEnumerator::empty(pccc.n, kind, pccc.w_max, pccc.j_max);
    out.clamped = pccc.clamped;
    for (w, j, c) in pccc.iter() {
        let d = if systematic { w + j } else { j };
        out.insert(w, d, c.clone());
    }
    Ok(out)
}

/// Minimum output weight among weight-2 inputs of a PCCC CWEF.
pub fn d_free_eff(cwef: &WeightEnumerator, systematic: bool) -> Result<usize> {
    if cwef.kind != EnumeratorKind::PcccCwef {
        return Err(Error::KindMismatch { expected: "pccc-cwef", found: cwef.kind.name() });
    }
    let j = cwef.min_index(2).ok_or(Error::EmptyRow { w: 2, j_max: cwef.j_max })?;
    Ok(if systematic { j + 2 } else { j })
}

/// Free effective distance computed from free (self-terminating) weight-2 error events, which
/// excludes low-weight artefacts created by forcing the tail at the block end.
pub fn free_effective_distance(trellis: &Trellis, systematic: bool, j_max: usize) -> Result<usize> {
    // long enough for any weight-2 event whose parity fits within j_max
    let n = (j_max + 2) * trellis.num_states() + 2;
    let constituent = constituent_cwef_with(trellis, n, 2, j_max, Termination::SelfTerminating)?;
    let pccc = uniform_interleaver_combine(&constituent, n)?;
    d_free_eff(&pccc, systematic)
}

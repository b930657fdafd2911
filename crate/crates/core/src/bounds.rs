//! ML union bounds on the bit error probability over AWGN.
//!
//! `P(w) = Σ_d (w/N) B_{w,d} Q(√(2 R Eb/N0 · d))` and `P_B ≤ Σ_w P(w)`. Coefficients can have
//! hundreds of digits, so each term is formed as `ln(w/N) + ln B + ln Q(·)` and the sum over `d`
//! is taken with log-sum-exp.

use std::collections::BTreeMap;

use num_rational::Ratio;

use crate::wef::{EnumeratorKind, WeightEnumerator};
use crate::{log_sum_exp, Error, Real, Result};

/// Exact code rate, e.g. `1/3`.
pub type Rate = Ratio<i64>;

/// Default Eb/N0 grid: 0 to 7 dB in 0.25 dB steps.
pub fn default_grid() -> Vec<f64> {
    (0..=28).map(|i| i as f64 * 0.25).collect()
}

/// Gaussian tail probability `Q(x) = ½ erfc(x/√2)`.
pub fn q_function<T: Real>(x: T) -> T {
    T::of(0.5 * libm::erfc(x.as_f64() / std::f64::consts::SQRT_2))
}

/// `ln Q(x)`, accurate where `Q(x)` itself underflows.
pub fn ln_q(x: f64) -> f64 {
    if x < 30.0 {
        return (0.5 * libm::erfc(x / std::f64::consts::SQRT_2)).ln();
    }
    // Q(x) = φ(x) · M(x), Mills ratio by its continued fraction x + 1/(x + 2/(x + 3/(x + ...)))
    let mut tail = x;
    for k in (1..=60).rev() {
        tail = x + k as f64 / tail;
    }
    -0.5 * x * x - 0.5 * (2.0 * std::f64::consts::PI).ln() - tail.ln()
}

fn gamma_linear(ebno_db: f64) -> f64 {
    10f64.powf(ebno_db / 10.0)
}

/// Bound evaluated over an Eb/N0 grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCurve<T> {
    pub rate: f64,
    pub ebno_grid_db: Vec<T>,
    /// `P_B` per grid point, clipped at 1.
    pub total: Vec<T>,
    /// `P(w)` per grid point, for every `w` in `1..=w_max`.
    pub per_weight: BTreeMap<usize, Vec<T>>,
    pub w_max: usize,
    pub j_max: usize,
}

impl<T: Real> BoundCurve<T> {
    /// CSV with columns `ebno_db,total,P1,...,P<w_max>`, optionally preceded by a `#` line.
    pub fn to_csv(&self, comment: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(c) = comment {
            out.push_str(&format!("# {c}\n"));
        }
        out.push_str("ebno_db,total");
        for w in self.per_weight.keys() {
            out.push_str(&format!(",P{w}"));
        }
        out.push('\n');
        for (i, ebno) in self.ebno_grid_db.iter().enumerate() {
            out.push_str(&format!("{:.4},{:.12e}", ebno.as_f64(), self.total[i].as_f64()));
            for values in self.per_weight.values() {
                out.push_str(&format!(",{:.12e}", values[i].as_f64()));
            }
            out.push('\n');
        }
        out
    }
}

struct LogTerms {
    n: usize,
    kind: EnumeratorKind,
    w_max: usize,
    /// `(w, d, ln B)`
    terms: Vec<(usize, usize, f64)>,
}

impl LogTerms {
    fn new(iowef: &WeightEnumerator) -> Result<Self> {
        if !iowef.kind().is_iowef() {
            return Err(Error::KindMismatch { expected: "pccc-iowef or ns-iowef", found: iowef.kind().name() });
        }
        Ok(Self { n: iowef.n(), kind: iowef.kind(), w_max: iowef.w_max(), terms: iowef.ln_coefficients() })
    }

    fn contribution(&self, w: usize, rate: f64, gamma: f64, shift: usize) -> f64 {
        if w == 0 {
            return 0.0;
        }
        let ln_weight = (w as f64 / self.n as f64).ln();
        let logs: Vec<f64> = self
            .terms
            .iter()
            .filter(|&&(tw, _, _)| tw == w)
            .map(|&(_, d, ln_b)| {
                let d = d.saturating_sub(shift) as f64;
                ln_weight + ln_b + ln_q((2.0 * rate * gamma * d).sqrt())
            })
            .collect();
        if logs.is_empty() {
            0.0
        } else {
            log_sum_exp(&logs).exp()
        }
    }
}

/// `P(w)` for a systematic IOWEF, or `P'(w)` for a non-systematic one (index already `d' = j`).
pub fn weight_contribution<T: Real>(iowef: &WeightEnumerator, w: usize, rate: f64, ebno_db: T) -> Result<T> {
    let terms = LogTerms::new(iowef)?;
    if w > terms.w_max {
        return Err(Error::WeightOutOfRange { w, w_max: terms.w_max });
    }
    Ok(T::of(terms.contribution(w, rate, gamma_linear(ebno_db.as_f64()), 0)))
}

/// `P'(w)` evaluated from the parent's systematic IOWEF with Q-argument `2R'Eb/N0·(d − w)`.
pub fn ns_contribution_from_parent<T: Real>(
    parent_iowef: &WeightEnumerator,
    w: usize,
    rate_child: f64,
    ebno_db: T,
) -> Result<T> {
    let terms = LogTerms::new(parent_iowef)?;
    if terms.kind != EnumeratorKind::PcccIowef {
        return Err(Error::KindMismatch { expected: "pccc-iowef", found: terms.kind.name() });
    }
    if w > terms.w_max {
        return Err(Error::WeightOutOfRange { w, w_max: terms.w_max });
    }
    Ok(T::of(terms.contribution(w, rate_child, gamma_linear(ebno_db.as_f64()), w)))
}

/// Union bound `Σ_w P(w)` over `grid` (dB). Totals and per-weight terms are clipped at 1.
pub fn union_bound<T: Real>(iowef: &WeightEnumerator, rate: f64, grid: &[T]) -> Result<BoundCurve<T>> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("Eb/N0 grid is empty".into()));
    }
    let terms = LogTerms::new(iowef)?;
    let mut per_weight: BTreeMap<usize, Vec<T>> = BTreeMap::new();
    let mut total = Vec::with_capacity(grid.len());
    for &ebno in grid {
        let gamma = gamma_linear(ebno.as_f64());
        let mut sum = 0.0;
        for w in 1..=terms.w_max {
            let p = terms.contribution(w, rate, gamma, 0);
            sum += p;
            per_weight.entry(w).or_default().push(T::of(p.min(1.0)));
        }
        total.push(T::of(sum.min(1.0)));
    }
    Ok(BoundCurve {
        rate,
        ebno_grid_db: grid.to_vec(),
        total,
        per_weight,
        w_max: iowef.w_max(),
        j_max: iowef.j_max(),
    })
}

/// `2R'/(R' − R)`: the free effective distance the parent must exceed.
pub fn ns_threshold(rate_child: Rate, rate_parent: Rate) -> Result<Rate> {
    let zero = Rate::from_integer(0);
    if rate_child <= rate_parent || rate_parent <= zero {
        return Err(Error::RateOrder { child: ratio_f64(rate_child), parent: ratio_f64(rate_parent) });
    }
    Ok(Rate::from_integer(2) * rate_child / (rate_child - rate_parent))
}

/// Whether the non-systematic child has the lower large-N bound: `d_free.eff > 2R'/(R' − R)`.
pub fn check_ns_improves(d_free_eff: usize, rate_child: Rate, rate_parent: Rate) -> Result<bool> {
    let threshold = ns_threshold(rate_child, rate_parent)?;
    Ok(Rate::from_integer(d_free_eff as i64) > threshold)
}

pub fn ratio_f64(r: Rate) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Parses `"1/2"` or `"1"`.
pub fn parse_rate(text: &str) -> Result<Rate> {
    let bad = || Error::Parse(format!("bad rate `{text}`"));
    let t = text.trim();
    let r = match t.split_once('/') {
        Some((a, b)) => {
            let (a, b): (i64, i64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            if b == 0 {
                return Err(bad());
            }
            Rate::new(a, b)
        }
        None => Rate::from_integer(t.parse().map_err(|_| bad())?),
    };
    if r <= Rate::from_integer(0) || r > Rate::from_integer(1) {
        return Err(bad());
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trellis::{build_trellis, parse_generator_spec};
    use crate::wef::{constituent_cwef, cwef_to_iowef, uniform_interleaver_combine};
    use num_bigint::BigInt;
    use num_rational::BigRational;

    /// Composite Simpson integration of the Gaussian density on [x, x + 40].
    fn q_oracle(x: f64) -> f64 {
        let steps = 400_000;
        let h = 40.0 / steps as f64;
        let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut s = pdf(x) + pdf(x + 40.0);
        for i in 1..steps {
            let t = x + i as f64 * h;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * pdf(t);
        }
        s * h / 3.0
    }

    #[test]
    fn q_basic_values() {
        assert_eq!(q_function(0.0f64), 0.5);
        let x = 1.3f64;
        assert!((q_function(-x) - (1.0 - q_function(x))).abs() < 1e-15);
        let q3 = q_function(3.0f64);
        assert!(((q3 - 1.3499e-3) / 1.3499e-3).abs() < 1e-4);
        assert!(((q3 - q_oracle(3.0)) / q3).abs() < 1e-6);
        assert!((q_function(2.0f32) - 0.022_750_13).abs() < 1e-7);
    }

    #[test]
    fn q_matches_quadrature_on_0_40() {
        for i in 0..=80 {
            let x = i as f64 * 0.5;
            assert!((q_function(x) - q_oracle(x)).abs() <= 1e-12, "x = {x}");
        }
    }

    #[test]
    fn q_is_monotone_decreasing() {
        let mut prev = q_function(-10.0f64);
        for i in -99..=400 {
            let q = q_function(i as f64 * 0.1);
            assert!(q <= prev);
            prev = q;
        }
    }

    #[test]
    fn ln_q_continues_past_underflow() {
        for x in [1.0, 5.0, 20.0, 29.9] {
            assert!((ln_q(x) - q_function(x).ln()).abs() < 1e-9 * ln_q(x).abs());
        }
        // both branches agree at the switch-over
        let below = (0.5 * libm::erfc(30.0 / std::f64::consts::SQRT_2)).ln();
        assert!((ln_q(30.0) - below).abs() < 1e-10 * below.abs());
        assert!(ln_q(60.0).is_finite() && ln_q(60.0) < ln_q(40.0));
    }

    fn toy_iowef(n: usize) -> WeightEnumerator {
        WeightEnumerator::from_text(&format!("{n} 2 8 pccc-iowef\n2 10 1\n")).unwrap()
    }

    #[test]
    fn single_entry_contribution() {
        let e = toy_iowef(1000);
        let got: f64 = weight_contribution(&e, 2, 1.0 / 3.0, 2.0).unwrap();
        let arg = (2.0 * (1.0 / 3.0) * 10f64.powf(0.2) * 10.0).sqrt();
        let expect = 2.0 / 1000.0 * 0.5 * libm::erfc(arg / std::f64::consts::SQRT_2);
        assert!(((got - expect) / expect).abs() < 1e-12);
        assert_eq!(weight_contribution(&e, 1, 1.0 / 3.0, 2.0f64).unwrap(), 0.0);
        assert!(weight_contribution(&e, 3, 1.0 / 3.0, 2.0f64).is_err());
    }

    #[test]
    fn zero_enumerator_gives_zero_curve() {
        let e = WeightEnumerator::from_text("100 6 60 pccc-iowef\n").unwrap();
        let c = union_bound(&e, 1.0 / 3.0, &default_grid()).unwrap();
        assert!(c.total.iter().all(|&p| p == 0.0));
        assert!(union_bound::<f64>(&e, 1.0 / 3.0, &[]).is_err());
    }

    #[test]
    fn thresholds() {
        let r = |a, b| Rate::new(a, b);
        assert_eq!(ns_threshold(r(1, 2), r(1, 3)).unwrap(), Rate::from_integer(6));
        assert_eq!(ns_threshold(r(1, 2), r(1, 4)).unwrap(), Rate::from_integer(4));
        assert_eq!(ns_threshold(r(2, 3), r(1, 3)).unwrap(), Rate::from_integer(4));
        assert!(ns_threshold(r(1, 2), r(1, 2)).is_err());
        assert!(check_ns_improves(10, r(1, 2), r(1, 3)).unwrap());
        assert!(!check_ns_improves(4, r(1, 2), r(1, 3)).unwrap());
        assert!(!check_ns_improves(6, r(1, 2), r(1, 3)).unwrap());
        assert!(check_ns_improves(7, r(1, 2), r(1, 3)).unwrap());
    }

    #[test]
    fn rate_parsing() {
        assert_eq!(parse_rate("1/2").unwrap(), Rate::new(1, 2));
        assert_eq!(parse_rate(" 2/6 ").unwrap(), Rate::new(1, 3));
        assert!(parse_rate("3/2").is_err());
        assert!(parse_rate("1/0").is_err());
        assert!(parse_rate("x").is_err());
    }

    fn iowefs(code: &str, n: usize) -> (WeightEnumerator, WeightEnumerator) {
        let t = build_trellis(parse_generator_spec(code).unwrap());
        let p = uniform_interleaver_combine(&constituent_cwef(&t, n, 6, 60).unwrap(), n).unwrap();
        (cwef_to_iowef(&p, true).unwrap(), cwef_to_iowef(&p, false).unwrap())
    }

    #[test]
    fn ns_argument_identity() {
        let (sys, ns) = iowefs("1,5/7", 200);
        for w in 1..=6 {
            for ebno in [0.0f64, 1.5, 4.0, 6.5] {
                let direct: f64 = weight_contribution(&ns, w, 0.5, ebno).unwrap();
                let via_parent: f64 = ns_contribution_from_parent(&sys, w, 0.5, ebno).unwrap();
                assert!((direct - via_parent).abs() <= 1e-12 * direct.abs().max(1e-300), "w={w} {ebno}");
            }
        }
        assert!(ns_contribution_from_parent::<f64>(&ns, 2, 0.5, 1.0).is_err());
    }

    #[test]
    fn curve_is_consistent_and_monotone() {
        let (sys, _) = iowefs("1,7/5", 500);
        let c = union_bound(&sys, 1.0 / 3.0, &default_grid()).unwrap();
        for i in 0..c.total.len() {
            let sum: f64 = c.per_weight.values().map(|v| v[i]).sum();
            if c.total[i] < 1.0 {
                assert!((sum - c.total[i]).abs() <= 1e-12 * sum);
            }
            assert!((0.0..=1.0).contains(&c.total[i]));
        }
        assert!(c.total.windows(2).all(|p| p[1] <= p[0]));
        let csv = c.to_csv(Some("hash"));
        assert!(csv.starts_with("# hash\nebno_db,total,P1,P2,P3,P4,P5,P6\n"));
        assert_eq!(csv.lines().count(), 2 + c.total.len());
    }

    #[test]
    fn f32_curve_tracks_f64() {
        let (sys, _) = iowefs("1,5/7", 100);
        let grid64 = default_grid();
        let grid32: Vec<f32> = grid64.iter().map(|&x| x as f32).collect();
        let a = union_bound(&sys, 1.0 / 3.0, &grid64).unwrap();
        let b = union_bound(&sys, 1.0 / 3.0, &grid32).unwrap();
        for (x, y) in a.total.iter().zip(&b.total) {
            assert!(((*x as f32 - y) / y).abs() < 1e-4);
        }
    }

    #[test]
    fn huge_coefficients_stay_finite() {
        let big = BigRational::from_integer(BigInt::from(10u32).pow(400));
        let mut text = String::from("10000 2 60 pccc-iowef\n");
        text.push_str(&format!("2 60 {}\n", big.numer()));
        let e = WeightEnumerator::from_text(&text).unwrap();
        let p: f64 = weight_contribution(&e, 2, 1.0 / 3.0, 40.0).unwrap();
        assert!(p.is_finite());
    }
}

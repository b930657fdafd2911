//! EXIT-chart analysis.
//!
//! A-priori LLRs are modelled as `L = x σ²/2 + σ n` with `n ~ N(0, 1)`; their mutual information
//! with the transmitted bit is `J(σ)`. Transfer characteristics `I_E = T(I_A, Eb/N0)` are
//! measured by feeding such synthetic a-priori LLRs to one constituent BCJR pass and estimating
//! the MI of its extrinsic output against the known bits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::channel::{frame_rng, simulate_frame};
use crate::codec::{bcjr_decode, iterative_decode, make_interleaver, InterleaverKind, PuncturePattern, TailLlrs};
use crate::trellis::Trellis;
use crate::{softplus_neg, Error, Real, Result};

const INTEGRATION_TOLERANCE: f64 = 1e-13;

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Mutual information between a bit and a consistent Gaussian LLR of standard deviation `sigma`.
pub fn j_function(sigma: f64) -> f64 {
    if sigma <= 0.0 {
        return 0.0;
    }
    let mean = 0.5 * sigma * sigma;
    let density = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    // E[log2(1 + e^{-L})] with L = mean + sigma t
    let integrand = |t: f64| density(t) * softplus_neg(mean + sigma * t) / std::f64::consts::LN_2;
    let loss = adaptive_simpson(&integrand, -12.0, 0.0, INTEGRATION_TOLERANCE)
        + adaptive_simpson(&integrand, 0.0, 12.0, INTEGRATION_TOLERANCE);
    (1.0 - loss).clamp(0.0, 1.0)
}

/// Inverse of [`j_function`] by bisection.
pub fn j_inverse(mi: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&mi) {
        return Err(Error::InvalidArgument(format!("mutual information {mi} is outside [0, 1]")));
    }
    if mi >= 1.0 {
        return Err(Error::InverseUnbounded(mi));
    }
    if mi == 0.0 {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while j_function(hi) < mi {
        hi *= 2.0;
        if hi > 1e4 {
            return Err(Error::InverseUnbounded(mi));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if j_function(mid) < mi {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Time-average MI estimate `1 − mean(log₂(1 + e^{−xL}))`, clipped to `[0, 1]`.
pub fn measure_mutual_information<T: Real>(llrs: &[T], bits: &[u8]) -> f64 {
    debug_assert_eq!(llrs.len(), bits.len());
    if llrs.is_empty() {
        return 0.0;
    }
    let loss: f64 = llrs
        .iter()
        .zip(bits)
        .map(|(&l, &b)| {
            let x = if b & 1 == 0 { 1.0 } else { -1.0 };
            softplus_neg(x * l.as_f64())
        })
        .sum::<f64>()
        / (llrs.len() as f64 * std::f64::consts::LN_2);
    (1.0 - loss).clamp(0.0, 1.0)
}

/// Gaussian a-priori LLRs with mutual information `J(sigma)` about `bits`.
pub fn gaussian_apriori<T: Real, R: Rng + ?Sized>(bits: &[u8], sigma: f64, rng: &mut R) -> Vec<T> {
    let mean = 0.5 * sigma * sigma;
    bits.iter()
        .map(|&b| {
            let x = if b & 1 == 0 { 1.0 } else { -1.0 };
            let n: f64 = rng.sample(StandardNormal);
            T::of(x * mean + sigma * n)
        })
        .collect()
}

/// Which constituent decoder a transfer characteristic describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecoderRole {
    /// Natural-order systematic LLRs, parity 1, terminated trellis.
    First,
    /// Interleaved systematic LLRs, parity 2, open-ended trellis.
    Second,
}

impl DecoderRole {
    pub fn index(self) -> usize {
        match self {
            DecoderRole::First => 1,
            DecoderRole::Second => 2,
        }
    }
}

/// Sampled transfer characteristic of one constituent decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferCurve {
    pub ebno_db: f64,
    pub role: DecoderRole,
    pub block_len: usize,
    /// `(I_A, I_E)` with strictly increasing `I_A`.
    pub samples: Vec<(f64, f64)>,
}

impl TransferCurve {
    pub fn to_csv(&self, comment: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(c) = comment {
            out.push_str(&format!("# {c}\n"));
        }
        out.push_str("ia,ie\n");
        for (ia, ie) in &self.samples {
            out.push_str(&format!("{ia:.6},{ie:.6}\n"));
        }
        out
    }

    /// `I_E` at a sampled `I_A`.
    pub fn ie_at(&self, ia: f64) -> Option<f64> {
        self.samples.iter().find(|(a, _)| (a - ia).abs() < 1e-12).map(|&(_, e)| e)
    }
}

/// Measurement setup shared by the points of a transfer characteristic.
#[derive(Debug, Clone)]
pub struct ExitSetup<'a> {
    pub trellis: &'a Trellis,
    pub pattern: PuncturePattern,
    pub block_len: usize,
    /// Independent blocks averaged per `I_A` point.
    pub blocks: usize,
    pub seed: u64,
}

/// `I_A` grid `0, 0.05, ..., 0.95, 0.99`.
pub fn default_ia_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (0..20).map(|i| i as f64 * 0.05).collect();
    g.push(0.99);
    g
}

/// Measures `I_E = T(I_A)` at `ebno_db` for every `I_A` in `ia_grid`.
///
/// Each block carries one channel realization shared by all grid points.
pub fn transfer_characteristic(
    setup: &ExitSetup<'_>,
    role: DecoderRole,
    ebno_db: f64,
    ia_grid: &[f64],
) -> Result<TransferCurve> {
    if setup.blocks == 0 || setup.block_len == 0 {
        return Err(Error::InvalidArgument("blocks and block length must be positive".into()));
    }
    if ia_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("I_A grid must be strictly increasing".into()));
    }
    let sigmas: Vec<f64> = ia_grid.iter().map(|&ia| j_inverse(ia)).collect::<Result<_>>()?;
    let trellis = setup.trellis;
    let per_block: Vec<Vec<f64>> = (0..setup.blocks as u64)
        .into_par_iter()
        .map(|block| -> Result<Vec<f64>> {
            let il = make_interleaver(InterleaverKind::Random { seed: setup.seed ^ (block + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15) }, setup.block_len)?;
            let mut rng = frame_rng(setup.seed, 0xE417, block);
            let (info, frame) = simulate_frame::<f64, _>(trellis, &il, &setup.pattern, Some(ebno_db), &mut rng)?;
            let (bits, sys, par, tail) = match role {
                DecoderRole::First => (
                    info,
                    frame.sys.clone(),
                    frame.par1.clone(),
                    Some((frame.tail_sys.clone(), frame.tail_par.clone())),
                ),
                DecoderRole::Second => (il.interleave(&info), il.interleave(&frame.sys), frame.par2.clone(), None),
            };
            let mut apriori_rng = ChaCha8Rng::seed_from_u64(setup.seed.wrapping_add(block).wrapping_mul(31) ^ 0xA5);
            sigmas
                .iter()
                .map(|&sigma| {
                    let apriori: Vec<f64> = gaussian_apriori(&bits, sigma, &mut apriori_rng);
                    let tail = tail.as_ref().map(|(s, p)| TailLlrs { systematic: &s[..], parity: &p[..] });
                    let out = bcjr_decode(trellis, &sys, &par, &apriori, tail)?;
                    Ok(measure_mutual_information(&out.extrinsic, &bits))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let samples = ia_grid
        .iter()
        .enumerate()
        .map(|(i, &ia)| (ia, per_block.iter().map(|b| b[i]).sum::<f64>() / setup.blocks as f64))
        .collect();
    Ok(TransferCurve { ebno_db, role, block_len: setup.block_len, samples })
}

/// Outcome of [`tunnel_open`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tunnel {
    pub open: bool,
    /// Smallest `T1(x) − T2⁻¹(x)` over the evaluated grid.
    pub min_gap: f64,
    /// Abscissa of the smallest gap.
    pub at: f64,
}

/// Inverse of a sampled, monotone-hull curve: the `I_A` at which it first reaches `target`.
fn inverse_on_grid(samples: &[(f64, f64)], target: f64) -> f64 {
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(samples.len());
    let mut best = f64::NEG_INFINITY;
    for &(a, e) in samples {
        best = best.max(e);
        hull.push((a, best));
    }
    if target <= hull[0].1 {
        return hull[0].0;
    }
    for w in hull.windows(2) {
        let ((a0, e0), (a1, e1)) = (w[0], w[1]);
        if target <= e1 && e1 > e0 {
            return a0 + (target - e0) / (e1 - e0) * (a1 - a0);
        }
    }
    // not reached on the grid: would need perfect a-priori knowledge
    1.0
}

/// Whether the iterative trajectory can pass from (0, 0) towards (1, 1): decoder 1's `I_E` must
/// exceed the a-priori input decoder 2 needs to return that much information, at every grid
/// point below `1 − eps`.
pub fn tunnel_open(curve1: &TransferCurve, curve2: &TransferCurve, eps: f64) -> Result<Tunnel> {
    if curve1.samples.len() != curve2.samples.len()
        || curve1.samples.is_empty()
        || curve1.samples.iter().zip(&curve2.samples).any(|(a, b)| (a.0 - b.0).abs() > 1e-12)
    {
        return Err(Error::GridMismatch);
    }
    let mut tunnel = Tunnel { open: true, min_gap: f64::INFINITY, at: 0.0 };
    for &(x, y1) in curve1.samples.iter().filter(|(x, _)| *x < 1.0 - eps) {
        let gap = y1 - inverse_on_grid(&curve2.samples, x);
        if gap < tunnel.min_gap {
            tunnel.min_gap = gap;
            tunnel.at = x;
        }
    }
    tunnel.open = tunnel.min_gap > 0.0;
    Ok(tunnel)
}

/// One iteration of an averaged decoding trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryStep {
    pub ia1: f64,
    pub ie1: f64,
    pub ia2: f64,
    pub ie2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub ebno_db: f64,
    pub n: usize,
    pub frames: usize,
    pub steps: Vec<TrajectoryStep>,
}

impl Trajectory {
    /// Chained form: `I_A2,k = I_E1,k` and `I_A1,k+1 = I_E2,k`.
    pub fn is_chained(&self) -> bool {
        self.steps.first().is_none_or(|s| s.ia1 == 0.0)
            && self.steps.iter().all(|s| s.ia2 == s.ie1)
            && self.steps.windows(2).all(|w| w[1].ia1 == w[0].ie2)
    }

    /// Rows `step,ia,ie`: even steps are decoder 1, odd steps decoder 2.
    pub fn to_csv(&self, comment: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(c) = comment {
            out.push_str(&format!("# {c}\n"));
        }
        out.push_str("step,ia,ie\n");
        for (k, s) in self.steps.iter().enumerate() {
            out.push_str(&format!("{},{:.6},{:.6}\n", 2 * k, s.ia1, s.ie1));
            out.push_str(&format!("{},{:.6},{:.6}\n", 2 * k + 1, s.ia2, s.ie2));
        }
        out
    }

    /// Final extrinsic information of decoder 2.
    pub fn final_ie(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.ie2)
    }
}

/// Full codec description for trajectory runs.
#[derive(Debug, Clone)]
pub struct TrajectoryConfig<'a> {
    pub trellis: &'a Trellis,
    pub pattern: PuncturePattern,
    pub n: usize,
    pub iterations: usize,
    pub interleaver: InterleaverKind,
    pub frames: usize,
    pub seed: u64,
    /// Error-free channel.
    pub noiseless: bool,
}

/// Runs iterative decoding on simulated frames and averages the extrinsic MI of both decoders
/// per iteration over frames.
pub fn decoding_trajectory(cfg: &TrajectoryConfig<'_>, ebno_db: f64) -> Result<Trajectory> {
    if cfg.frames == 0 {
        return Err(Error::InvalidArgument("at least one frame is required".into()));
    }
    let il = make_interleaver(cfg.interleaver, cfg.n)?;
    let records: Vec<Vec<(f64, f64)>> = (0..cfg.frames as u64)
        .into_par_iter()
        .map(|index| -> Result<Vec<(f64, f64)>> {
            let mut rng = frame_rng(cfg.seed, 0x7A1, index);
            let channel = (!cfg.noiseless).then_some(ebno_db);
            let (info, frame) = simulate_frame::<f64, _>(cfg.trellis, &il, &cfg.pattern, channel, &mut rng)?;
            let out = iterative_decode(&frame, cfg.trellis, &il, cfg.iterations, Some(&info))?;
            Ok(out.iterations.iter().map(|r| (r.ie1, r.ie2)).collect())
        })
        .collect::<Result<_>>()?;
    let frames = cfg.frames as f64;
    let mut steps = Vec::with_capacity(cfg.iterations);
    let mut ia1 = 0.0;
    for k in 0..cfg.iterations {
        let ie1 = records.iter().map(|r| r[k].0).sum::<f64>() / frames;
        let ie2 = records.iter().map(|r| r[k].1).sum::<f64>() / frames;
        steps.push(TrajectoryStep { ia1, ie1, ia2: ie1, ie2 });
        ia1 = ie2;
    }
    Ok(Trajectory { ebno_db, n: cfg.n, frames: cfg.frames, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trellis::{build_trellis, parse_generator_spec};

    #[test]
    fn j_endpoints_and_monotonicity() {
        assert_eq!(j_function(0.0), 0.0);
        assert!(j_function(10.0) > 0.999);
        let mut prev = 0.0;
        for i in 1..=100 {
            let j = j_function(i as f64 * 0.1);
            assert!(j > prev, "sigma {}", i as f64 * 0.1);
            prev = j;
        }
    }

    #[test]
    fn j_matches_reference_points() {
        // I for a BPSK-AWGN channel LLR equals J(sqrt(8 Es/N0)); J(2) ≈ 0.4807 is a commonly
        // tabulated value (dense trapezoid check below is the actual oracle).
        let sigma = 2.0f64;
        let mean = 0.5 * sigma * sigma;
        let steps = 200_000;
        let (a, b) = (-14.0, 14.0);
        let h = (b - a) / steps as f64;
        let mut acc = 0.0;
        for i in 0..=steps {
            let t = a + i as f64 * h;
            let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
            acc += w * (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt() * (1.0 + (-(mean + sigma * t)).exp()).log2();
        }
        assert!((j_function(sigma) - (1.0 - acc * h)).abs() < 1e-9);
    }

    #[test]
    fn j_inverse_round_trip() {
        for i in 1..100 {
            let mi = i as f64 / 100.0;
            let s = j_inverse(mi).unwrap();
            assert!((j_function(s) - mi).abs() <= 1e-6, "{mi}");
        }
        assert_eq!(j_inverse(0.0).unwrap(), 0.0);
        assert_eq!(j_inverse(1.0), Err(Error::InverseUnbounded(1.0)));
        assert!(j_inverse(1.5).is_err());
    }

    #[test]
    fn mi_estimator_limits() {
        let bits: Vec<u8> = (0..2000).map(|i| (i % 2) as u8).collect();
        assert!(measure_mutual_information(&vec![0.0f64; 2000], &bits) < 1e-12);
        let sure: Vec<f64> = bits.iter().map(|&b| if b == 0 { 40.0 } else { -40.0 }).collect();
        assert!((measure_mutual_information(&sure, &bits) - 1.0).abs() < 1e-6);
        let wrong: Vec<f32> = sure.iter().map(|&l| -l as f32).collect();
        assert_eq!(measure_mutual_information(&wrong, &bits), 0.0);
    }

    #[test]
    fn gaussian_apriori_matches_target_mi() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let bits: Vec<u8> = (0..1_000_000).map(|_| rng.random::<bool>() as u8).collect();
        let sigma = j_inverse(0.5).unwrap();
        let llrs: Vec<f64> = gaussian_apriori(&bits, sigma, &mut rng);
        assert!((measure_mutual_information(&llrs, &bits) - 0.5).abs() < 0.01);
    }

    fn curve(samples: Vec<(f64, f64)>) -> TransferCurve {
        TransferCurve { ebno_db: 0.0, role: DecoderRole::First, block_len: 1, samples }
    }

    #[test]
    fn tunnel_geometry() {
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let diagonal = curve(grid.iter().map(|&x| (x, x)).collect());
        let t = tunnel_open(&diagonal, &diagonal, 0.05).unwrap();
        assert!(!t.open);
        assert!(t.min_gap.abs() < 1e-12);

        let good = curve(grid.iter().map(|&x| (x, 0.3 + 0.7 * x)).collect());
        let t = tunnel_open(&good, &good, 0.05).unwrap();
        // gap 0.3 + 0.7x − (x − 0.3)/0.7 is smallest at the last point below 1 − eps
        assert!(t.open);
        assert!((t.min_gap - (0.93 - 0.6 / 0.7)).abs() < 1e-12);

        let crossing = curve(grid.iter().map(|&x| (x, if x < 0.5 { 0.2 + x } else { 0.45 + 0.5 * x })).collect());
        assert!(!tunnel_open(&crossing, &crossing, 0.05).unwrap().open);

        let other = curve(vec![(0.0, 0.1), (0.5, 0.6)]);
        assert_eq!(tunnel_open(&good, &other, 0.05), Err(Error::GridMismatch));
    }

    #[test]
    fn inverse_interpolation() {
        let s = vec![(0.0, 0.2), (0.5, 0.6), (1.0, 1.0)];
        assert_eq!(inverse_on_grid(&s, 0.1), 0.0);
        assert!((inverse_on_grid(&s, 0.4) - 0.25).abs() < 1e-12);
        assert_eq!(inverse_on_grid(&[(0.0, 0.1), (0.5, 0.3)], 0.9), 1.0);
    }

    #[test]
    fn noiseless_trajectory_reaches_corner() {
        let t = build_trellis(parse_generator_spec("1,5/7").unwrap());
        for pattern in [PuncturePattern::parent(), PuncturePattern::non_systematic()] {
            let cfg = TrajectoryConfig {
                trellis: &t,
                pattern,
                n: 1000,
                iterations: 2,
                interleaver: InterleaverKind::Random { seed: 3 },
                frames: 2,
                seed: 1,
                noiseless: true,
            };
            let tr = decoding_trajectory(&cfg, 0.0).unwrap();
            assert!(tr.is_chained());
            assert!(tr.steps[0].ie1 > 0.999 && tr.steps[0].ie2 > 0.999);
        }
    }

    #[test]
    fn transfer_curve_starts_at_no_prior_value() {
        let t = build_trellis(parse_generator_spec("1,5/7").unwrap());
        let setup = ExitSetup { trellis: &t, pattern: PuncturePattern::parent(), block_len: 5000, blocks: 2, seed: 4 };
        let c = transfer_characteristic(&setup, DecoderRole::First, 1.0, &[0.0, 0.5, 0.9]).unwrap();
        assert_eq!(c.samples.len(), 3);
        assert!(c.samples.iter().all(|&(_, ie)| (0.0..=1.0).contains(&ie)));
        assert!(c.samples[0].1 > 0.0);
        assert!(c.samples.windows(2).all(|w| w[1].1 >= w[0].1 - 0.005));
        assert!(transfer_characteristic(&setup, DecoderRole::First, 1.0, &[0.5, 0.4]).is_err());
    }
}

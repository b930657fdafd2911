//! Log-MAP BCJR decoder for one RSC constituent code.
//!
//! LLRs are `ln P(b = 0) / P(b = 1)`. A branch with input `u` and parity `p` has metric
//! `½ x_u (L_a + L_s) + ½ x_p L_p` with `x = 1 − 2b`. The extrinsic output uses only the parity
//! part, so `posterior = apriori + systematic + extrinsic` holds term by term.

use crate::trellis::Trellis;
use crate::{max_star, Error, Real, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SisoOutput<T> {
    pub extrinsic: Vec<T>,
    pub posterior: Vec<T>,
}

/// Channel LLRs of the termination section.
#[derive(Debug, Clone, Copy)]
pub struct TailLlrs<'a, T> {
    pub systematic: &'a [T],
    pub parity: &'a [T],
}

fn check_finite<T: Real>(xs: &[T], offset: usize) -> Result<()> {
    match xs.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::NonFinite(offset + i)),
        None => Ok(()),
    }
}

#[inline]
fn sign<T: Real>(bit: u8) -> T {
    if bit == 0 {
        T::one()
    } else {
        -T::one()
    }
}

/// Runs the forward-backward recursion over `N` information sections, plus the `ν` tail
/// sections when `tail` is given. The start state is 0; the end state is 0 when terminated and
/// unconstrained otherwise.
pub fn bcjr_decode<T: Real>(
    trellis: &Trellis,
    sys: &[T],
    par: &[T],
    apriori: &[T],
    tail: Option<TailLlrs<'_, T>>,
) -> Result<SisoOutput<T>> {
    let n = sys.len();
    if par.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: par.len() });
    }
    if apriori.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: apriori.len() });
    }
    check_finite(sys, 0)?;
    check_finite(par, n)?;
    check_finite(apriori, 2 * n)?;
    let nu = trellis.memory();
    if let Some(t) = tail {
        if t.systematic.len() != nu || t.parity.len() != nu {
            return Err(Error::LengthMismatch { expected: nu, got: t.systematic.len().min(t.parity.len()) });
        }
        check_finite(t.systematic, 3 * n)?;
        check_finite(t.parity, 3 * n + nu)?;
    }

    let states = trellis.num_states();
    let half = T::of(0.5);
    let neg_inf = T::neg_infinity();
    let sections = n + if tail.is_some() { nu } else { 0 };

    // input-side and parity-side LLR of each section
    let section = |k: usize| -> (T, T) {
        if k < n {
            (apriori[k] + sys[k], par[k])
        } else {
            let t = tail.expect("tail sections only exist when terminated");
            (t.systematic[k - n], t.parity[k - n])
        }
    };

    let mut alpha = vec![neg_inf; (sections + 1) * states];
    alpha[0] = T::zero();
    for k in 0..sections {
        let (lu, lp) = section(k);
        let (cur, next) = alpha.split_at_mut((k + 1) * states);
        let cur = &cur[k * states..];
        let next = &mut next[..states];
        for s in 0..states {
            let a = cur[s];
            if a == neg_inf {
                continue;
            }
            for u in 0..2u8 {
                let tr = trellis.step(s, u);
                let g = half * (sign::<T>(u) * lu + sign::<T>(tr.parity) * lp);
                next[tr.next] = max_star(next[tr.next], a + g);
            }
        }
        let m = next.iter().copied().fold(neg_inf, T::max);
        if m > neg_inf {
            next.iter_mut().for_each(|x| *x = *x - m);
        }
    }

    let mut beta = vec![neg_inf; (sections + 1) * states];
    if tail.is_some() {
        beta[sections * states] = T::zero();
    } else {
        beta[sections * states..].iter_mut().for_each(|b| *b = T::zero());
    }
    for k in (0..sections).rev() {
        let (lu, lp) = section(k);
        let (cur, next) = beta.split_at_mut((k + 1) * states);
        let cur = &mut cur[k * states..];
        for s in 0..states {
            let mut acc = neg_inf;
            for u in 0..2u8 {
                let tr = trellis.step(s, u);
                let g = half * (sign::<T>(u) * lu + sign::<T>(tr.parity) * lp);
                acc = max_star(acc, next[tr.next] + g);
            }
            cur[s] = acc;
        }
        let m = cur.iter().copied().fold(neg_inf, T::max);
        if m > neg_inf {
            cur.iter_mut().for_each(|x| *x = *x - m);
        }
    }

    let mut extrinsic = Vec::with_capacity(n);
    let mut posterior = Vec::with_capacity(n);
    for k in 0..n {
        let a = &alpha[k * states..(k + 1) * states];
        let b = &beta[(k + 1) * states..(k + 2) * states];
        let mut num = [neg_inf; 2];
        for s in 0..states {
            if a[s] == neg_inf {
                continue;
            }
            for u in 0..2u8 {
                let tr = trellis.step(s, u);
                let g = half * sign::<T>(tr.parity) * par[k];
                num[u as usize] = max_star(num[u as usize], a[s] + g + b[tr.next]);
            }
        }
        let le = num[0] - num[1];
        extrinsic.push(le);
        posterior.push(apriori[k] + sys[k] + le);
    }
    Ok(SisoOutput { extrinsic, posterior })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::log_sum_exp;
    use crate::trellis::{build_trellis, encode_rsc, parse_generator_spec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn trellis(text: &str) -> Trellis {
        build_trellis(parse_generator_spec(text).unwrap())
    }

    /// Bitwise MAP marginals by enumerating every input word.
    fn exhaustive_map(
        t: &Trellis,
        sys: &[f64],
        par: &[f64],
        apriori: &[f64],
        tail: Option<(&[f64], &[f64])>,
    ) -> Vec<f64> {
        let n = sys.len();
        let mut zero: Vec<Vec<f64>> = vec![Vec::new(); n];
        let mut one: Vec<Vec<f64>> = vec![Vec::new(); n];
        for word in 0u32..(1 << n) {
            let info: Vec<u8> = (0..n).map(|i| ((word >> i) & 1) as u8).collect();
            let cw = encode_rsc(t, &info, tail.is_some());
            let x = |b: u8| 1.0 - 2.0 * b as f64;
            let mut metric = 0.0;
            for i in 0..n {
                metric += 0.5 * x(info[i]) * (sys[i] + apriori[i]) + 0.5 * x(cw.parity[i]) * par[i];
            }
            if let Some((ts, tp)) = tail {
                for i in 0..t.memory() {
                    metric += 0.5 * x(cw.tail_systematic[i]) * ts[i] + 0.5 * x(cw.tail_parity[i]) * tp[i];
                }
            }
            for i in 0..n {
                if info[i] == 0 {
                    zero[i].push(metric);
                } else {
                    one[i].push(metric);
                }
            }
        }
        (0..n).map(|i| log_sum_exp(&zero[i]) - log_sum_exp(&one[i])).collect()
    }

    #[test]
    fn matches_exhaustive_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for text in ["1,5/7", "1,7/5", "1,2/3"] {
            let t = trellis(text);
            for n in [1, 3, 7, 10] {
                for terminated in [true, false] {
                    let r = |rng: &mut ChaCha8Rng, k: usize| -> Vec<f64> { (0..k).map(|_| rng.random_range(-4.0..4.0)).collect() };
                    let (sys, par, ap) = (r(&mut rng, n), r(&mut rng, n), r(&mut rng, n));
                    let (ts, tp) = (r(&mut rng, t.memory()), r(&mut rng, t.memory()));
                    let tail = terminated.then_some(TailLlrs { systematic: &ts[..], parity: &tp[..] });
                    let out = bcjr_decode(&t, &sys, &par, &ap, tail).unwrap();
                    let oracle = exhaustive_map(&t, &sys, &par, &ap, terminated.then_some((&ts[..], &tp[..])));
                    for i in 0..n {
                        assert!((out.posterior[i] - oracle[i]).abs() < 1e-9, "{text} n={n} term={terminated} i={i}");
                    }
                }
            }
        }
    }

    #[test]
    fn noiseless_recovers_info() {
        let t = trellis("1,5/7");
        let info = [1u8, 0, 1, 1, 0, 0, 1, 0, 1, 1, 1, 0];
        let cw = encode_rsc(&t, &info, true);
        let llr = |b: &u8| if *b == 0 { 20.0 } else { -20.0 };
        let sys: Vec<f64> = cw.systematic.iter().map(llr).collect();
        let par: Vec<f64> = cw.parity.iter().map(llr).collect();
        let ts: Vec<f64> = cw.tail_systematic.iter().map(llr).collect();
        let tp: Vec<f64> = cw.tail_parity.iter().map(llr).collect();
        let out = bcjr_decode(&t, &sys, &par, &vec![0.0; info.len()], Some(TailLlrs { systematic: &ts, parity: &tp })).unwrap();
        let decided: Vec<u8> = out.posterior.iter().map(|&l| (l < 0.0) as u8).collect();
        assert_eq!(decided, info);
    }

    #[test]
    fn no_information_gives_zero_extrinsic() {
        let t = trellis("1,7/5");
        let z = vec![0.0f64; 16];
        let out = bcjr_decode(&t, &z, &z, &z, None).unwrap();
        assert!(out.extrinsic.iter().all(|&e| e.abs() < 1e-12));
        let tz = vec![0.0f64; 2];
        let out = bcjr_decode(&t, &z, &z, &z, Some(TailLlrs { systematic: &tz, parity: &tz })).unwrap();
        assert!(out.extrinsic.iter().all(|&e| e.abs() < 1e-12));
    }

    #[test]
    fn rejects_bad_input() {
        let t = trellis("1,5/7");
        let z = vec![0.0f64; 4];
        let mut bad = z.clone();
        bad[2] = f64::NAN;
        assert_eq!(bcjr_decode(&t, &bad, &z, &z, None), Err(Error::NonFinite(2)));
        assert!(bcjr_decode(&t, &z, &z[..3], &z, None).is_err());
        let short = [0.0f64];
        assert!(bcjr_decode(&t, &z, &z, &z, Some(TailLlrs { systematic: &short, parity: &short })).is_err());
    }

    #[test]
    fn f32_decoder_agrees_with_f64() {
        let t = trellis("1,5/7");
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v: Vec<f64> = (0..48).map(|_| rng.random_range(-3.0..3.0)).collect();
        let (s, p, a) = (&v[0..16], &v[16..32], &v[32..48]);
        let o64 = bcjr_decode(&t, s, p, a, None).unwrap();
        let f = |x: &[f64]| x.iter().map(|&y| y as f32).collect::<Vec<f32>>();
        let o32 = bcjr_decode(&t, &f(s), &f(p), &f(a), None).unwrap();
        for (x, y) in o64.posterior.iter().zip(&o32.posterior) {
            assert!((*x as f32 - y).abs() < 1e-3);
        }
    }
}

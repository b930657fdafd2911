use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InterleaverKind {
    Identity,
    /// Uniformly random permutation drawn from a seeded generator.
    Random { seed: u64 },
}

/// A permutation of `0..N`. `interleave` reads `out[i] = x[perm[i]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interleaver {
    kind: InterleaverKind,
    perm: Vec<usize>,
}

pub fn make_interleaver(kind: InterleaverKind, n: usize) -> Result<Interleaver> {
    if n == 0 {
        return Err(Error::InvalidArgument("interleaver size must be at least 1".into()));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    if let InterleaverKind::Random { seed } = kind {
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    Ok(Interleaver { kind, perm })
}

impl Interleaver {
    /// Builds an interleaver from an explicit permutation.
    pub fn from_permutation(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        if n == 0 {
            return Err(Error::InvalidArgument("interleaver size must be at least 1".into()));
        }
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidArgument("not a permutation".into()));
            }
        }
        let kind = if perm.iter().enumerate().all(|(i, &p)| i == p) {
            InterleaverKind::Identity
        } else {
            InterleaverKind::Random { seed: 0 }
        };
        Ok(Self { kind, perm })
    }

    pub fn kind(&self) -> InterleaverKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn interleave<T: Copy>(&self, x: &[T]) -> Vec<T> {
        debug_assert_eq!(x.len(), self.perm.len());
        self.perm.iter().map(|&p| x[p]).collect()
    }

    pub fn deinterleave<T: Copy + Default>(&self, x: &[T]) -> Vec<T> {
        debug_assert_eq!(x.len(), self.perm.len());
        let mut out = vec![T::default(); x.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            out[p] = x[i];
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity() {
        let il = make_interleaver(InterleaverKind::Identity, 5).unwrap();
        assert_eq!(il.permutation(), &[0, 1, 2, 3, 4]);
    }

    #[test]
    fn random_is_reproducible_bijection() {
        let a = make_interleaver(InterleaverKind::Random { seed: 7 }, 1000).unwrap();
        let b = make_interleaver(InterleaverKind::Random { seed: 7 }, 1000).unwrap();
        assert_eq!(a, b);
        let mut sorted = a.permutation().to_vec();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..1000).collect::<Vec<_>>());
        let c = make_interleaver(InterleaverKind::Random { seed: 8 }, 1000).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn deinterleave_inverts() {
        let il = make_interleaver(InterleaverKind::Random { seed: 1 }, 64).unwrap();
        let x: Vec<u32> = (0..64).map(|i| i * 3 + 1).collect();
        assert_eq!(il.deinterleave(&il.interleave(&x)), x);
        assert!(make_interleaver(InterleaverKind::Identity, 0).is_err());
    }

    #[test]
    fn explicit_permutations() {
        assert!(Interleaver::from_permutation(vec![1, 1, 0]).is_err());
        assert!(Interleaver::from_permutation(vec![0, 3]).is_err());
        let il = Interleaver::from_permutation(vec![2, 0, 1]).unwrap();
        assert_eq!(il.interleave(&['a', 'b', 'c']), vec!['c', 'a', 'b']);
    }
}

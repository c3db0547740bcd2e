use rand::seq::SliceRandom;
use rand::RngCore;

use crate::encoding::{Canonical, Decoder, Encoder};
use crate::error::DecodeError;

/// A bijection on `[0, n)`. `map[i]` is the image of `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation { map: (0..n).collect() }
    }

    pub fn random<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut map: Vec<usize> = (0..n).collect();
        map.shuffle(rng);
        Permutation { map }
    }

    /// Returns `None` unless `map` is a bijection on `[0, map.len())`.
    pub fn from_map(map: Vec<usize>) -> Option<Self> {
        let mut seen = vec![false; map.len()];
        for &x in &map {
            if x >= map.len() || std::mem::replace(&mut seen[x], true) {
                return None;
            }
        }
        Some(Permutation { map })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn image(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (i, &j) in self.map.iter().enumerate() {
            inv[j] = i;
        }
        Permutation { map: inv }
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &Permutation) -> Self {
        assert_eq!(self.len(), first.len(), "permutation sizes differ");
        Permutation { map: first.map.iter().map(|&i| self.map[i]).collect() }
    }

    /// Moves item `i` to position `map[i]`.
    pub fn scatter<T: Clone>(&self, items: &[T]) -> Vec<T> {
        assert_eq!(items.len(), self.len(), "permutation size mismatch");
        let mut out: Vec<Option<T>> = vec![None; items.len()];
        for (i, item) in items.iter().enumerate() {
            out[self.map[i]] = Some(item.clone());
        }
        out.into_iter().map(|x| x.expect("bijection")).collect()
    }

    /// Position `j` receives item `map[j]`.
    pub fn gather<T: Clone>(&self, items: &[T]) -> Vec<T> {
        assert_eq!(items.len(), self.len(), "permutation size mismatch");
        self.map.iter().map(|&i| items[i].clone()).collect()
    }
}

impl Canonical for Permutation {
    fn encode(&self, enc: &mut Encoder<'_>) {
        enc.list(&self.map, |e, &x| {
            e.u64(x as u64);
        });
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let start = dec.offset();
        let map = dec.list(|d| d.usize())?;
        Permutation::from_map(map).ok_or_else(|| DecodeError::new(start, "not a permutation"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn scatter_and_gather_are_inverse_conventions() {
        let p = Permutation::from_map(vec![2, 0, 1]).unwrap();
        assert_eq!(p.scatter(&['a', 'b', 'c']), vec!['b', 'c', 'a']);
        assert_eq!(p.gather(&['a', 'b', 'c']), vec!['c', 'a', 'b']);
        assert_eq!(p.inverse().gather(&['a', 'b', 'c']), p.scatter(&['a', 'b', 'c']));
    }

    #[test]
    fn from_map_rejects_non_bijections() {
        assert!(Permutation::from_map(vec![0, 0]).is_none());
        assert!(Permutation::from_map(vec![0, 2]).is_none());
        assert!(Permutation::from_map(vec![]).is_some());
    }

    proptest! {
        #[test]
        fn inverse_undoes(seed in any::<u64>(), n in 1usize..40) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
            let p = Permutation::random(n, &mut rng);
            let q = Permutation::random(n, &mut rng);
            let items: Vec<usize> = (100..100 + n).collect();
            prop_assert_eq!(p.inverse().scatter(&p.scatter(&items)), items.clone());
            prop_assert_eq!(p.after(&p.inverse()), Permutation::identity(n));
            prop_assert_eq!(p.after(&q).scatter(&items), p.scatter(&q.scatter(&items)));
        }
    }
}

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::Vertex;

/// Set of infected vertices of an `n`-vertex graph, stored as a bitset.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ConfigurationRepr", into = "ConfigurationRepr")]
pub struct Configuration {
    n: usize,
    words: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct ConfigurationRepr {
    n_vertices: usize,
    infected: Vec<Vertex>,
}

impl TryFrom<ConfigurationRepr> for Configuration {
    type Error = Error;

    fn try_from(r: ConfigurationRepr) -> Result<Self> {
        Configuration::from_vertices(r.n_vertices, r.infected)
    }
}

impl From<Configuration> for ConfigurationRepr {
    fn from(c: Configuration) -> Self {
        ConfigurationRepr {
            n_vertices: c.n,
            infected: c.iter().collect(),
        }
    }
}

impl Configuration {
    pub fn empty(n: usize) -> Self {
        Configuration {
            n,
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut c = Self::empty(n);
        for (i, w) in c.words.iter_mut().enumerate() {
            let remaining = n - 64 * i;
            *w = if remaining >= 64 {
                u64::MAX
            } else {
                (1u64 << remaining) - 1
            };
        }
        c
    }

    pub fn from_vertices(n: usize, vertices: impl IntoIterator<Item = Vertex>) -> Result<Self> {
        let mut c = Self::empty(n);
        for v in vertices {
            if v >= n {
                return Err(Error::Parameter(format!(
                    "vertex {v} outside a graph with {n} vertices"
                )));
            }
            c.insert(v);
        }
        Ok(c)
    }

    /// Builds the configuration whose bit `i` of `mask` marks vertex `i`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        debug_assert!(n <= 64);
        let mut c = Self::empty(n);
        if n > 0 {
            c.words[0] = mask & Self::full(n).words[0];
        }
        c
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn contains(&self, v: Vertex) -> bool {
        self.words[v >> 6] >> (v & 63) & 1 == 1
    }

    /// Returns whether `v` was newly inserted.
    #[inline]
    pub fn insert(&mut self, v: Vertex) -> bool {
        let bit = 1u64 << (v & 63);
        let w = &mut self.words[v >> 6];
        let fresh = *w & bit == 0;
        *w |= bit;
        fresh
    }

    /// Returns whether `v` was present.
    #[inline]
    pub fn remove(&mut self, v: Vertex) -> bool {
        let bit = 1u64 << (v & 63);
        let w = &mut self.words[v >> 6];
        let present = *w & bit != 0;
        *w &= !bit;
        present
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.n
    }

    pub fn is_subset(&self, other: &Configuration) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &Configuration) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.n).filter(move |&v| self.contains(v))
    }

    pub fn max_vertex(&self) -> Option<Vertex> {
        self.words
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| 64 * i + 63 - w.leading_zeros() as usize)
    }

    /// Low 64 bits as a mask; exact for graphs with at most 64 vertices.
    pub fn mask(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_and_empty() {
        for n in [0, 1, 5, 63, 64, 65, 130] {
            assert_eq!(Configuration::full(n).len(), n);
            assert!(Configuration::empty(n).is_empty());
            assert!(Configuration::empty(n).is_subset(&Configuration::full(n)));
        }
    }

    #[test]
    fn insert_remove_max() {
        let mut c = Configuration::empty(100);
        assert!(c.insert(70));
        assert!(!c.insert(70));
        c.insert(3);
        assert_eq!(c.max_vertex(), Some(70));
        assert!(c.remove(70));
        assert_eq!(c.max_vertex(), Some(3));
        assert_eq!(c.iter().collect::<Vec<_>>(), vec![3]);
        assert!(Configuration::from_vertices(4, [4]).is_err());
    }

    #[test]
    fn json_shape() {
        let c = Configuration::from_vertices(5, [1, 3]).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(s, r#"{"n_vertices":5,"infected":[1,3]}"#);
        assert_eq!(serde_json::from_str::<Configuration>(&s).unwrap(), c);
    }
}

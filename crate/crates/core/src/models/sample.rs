use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{GibbsError, Result};

/// An observed sample reduced to its species frequencies.
///
/// `frequencies` keeps the order it was given in; `multiplicities` maps an
/// abundance level `i` to the number of species seen exactly `i` times.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSummary {
    n: usize,
    frequencies: Vec<usize>,
    multiplicities: BTreeMap<usize, usize>,
}

impl SampleSummary {
    pub fn from_frequencies(frequencies: Vec<usize>) -> Result<Self> {
        if frequencies.is_empty() {
            return Err(GibbsError::validation("a sample needs at least one species"));
        }
        if frequencies.contains(&0) {
            return Err(GibbsError::validation("species frequencies must be positive"));
        }
        let n = frequencies.iter().sum();
        let mut multiplicities = BTreeMap::new();
        for &f in &frequencies {
            *multiplicities.entry(f).or_insert(0) += 1;
        }
        Ok(SampleSummary {
            n,
            frequencies,
            multiplicities,
        })
    }

    /// Builds a sample from `level -> count`; frequencies come out sorted
    /// ascending. Zero counts are ignored.
    pub fn from_multiplicities(multiplicities: &BTreeMap<usize, usize>) -> Result<Self> {
        if multiplicities.contains_key(&0) && multiplicities[&0] > 0 {
            return Err(GibbsError::validation("abundance level 0 is not a valid level"));
        }
        let frequencies: Vec<usize> = multiplicities
            .iter()
            .filter(|(&level, _)| level > 0)
            .flat_map(|(&level, &count)| std::iter::repeat_n(level, count))
            .collect();
        Self::from_frequencies(frequencies)
    }

    /// A sample of size `n` with `j` species: `j - 1` singletons and one
    /// species holding the rest. Predictive quantities depend on a sample
    /// only through `(n, j)`, so this stands in when only those are known.
    pub fn canonical(n: usize, j: usize) -> Result<Self> {
        if j == 0 || j > n {
            return Err(GibbsError::validation(format!(
                "need 1 <= j <= n, got n = {n}, j = {j}"
            )));
        }
        let mut frequencies = vec![1; j - 1];
        frequencies.push(n - j + 1);
        Self::from_frequencies(frequencies)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of distinct species.
    pub fn j(&self) -> usize {
        self.frequencies.len()
    }

    pub fn frequencies(&self) -> &[usize] {
        &self.frequencies
    }

    pub fn multiplicities(&self) -> &BTreeMap<usize, usize> {
        &self.multiplicities
    }
}

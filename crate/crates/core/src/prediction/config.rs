use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::combinatorics::{ln_binom, ln_fact};
use crate::error::{GibbsError, Result};
use crate::models::ln_block;

/// How the new clusters of an additional sample are laid out: `k` new
/// clusters holding `s` observations, with block sizes listed in order of
/// appearance.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NewClusterConfiguration {
    composition: Vec<usize>,
}

impl NewClusterConfiguration {
    /// No new clusters.
    pub fn empty() -> Self {
        NewClusterConfiguration {
            composition: Vec::new(),
        }
    }

    pub fn new(composition: Vec<usize>) -> Result<Self> {
        if composition.contains(&0) {
            return Err(GibbsError::validation("new-cluster sizes must be positive"));
        }
        Ok(NewClusterConfiguration { composition })
    }

    /// Number of new clusters.
    pub fn k(&self) -> usize {
        self.composition.len()
    }

    /// Number of observations falling in new clusters.
    pub fn s(&self) -> usize {
        self.composition.iter().sum()
    }

    pub fn composition(&self) -> &[usize] {
        &self.composition
    }

    /// Number of set partitions of `[s]` whose blocks, ordered by least
    /// element, have exactly these sizes in this order (as a log).
    pub fn log_ordered_realizations(&self) -> f64 {
        log_ordered_realizations(&self.composition)
    }

    /// Number of set partitions of `[s]` whose block sizes form this
    /// multiset, `s! / (Π s_i! Π m_r!)` (as a log).
    pub fn log_multiset_realizations(&self) -> f64 {
        log_multiset_realizations(&self.composition)
    }
}

impl fmt::Display for NewClusterConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.composition.is_empty() {
            return f.write_str("0");
        }
        // run-length form, e.g. 32x1+1x8
        let mut parts = Vec::new();
        let mut i = 0;
        while i < self.composition.len() {
            let size = self.composition[i];
            let run = self.composition[i..].iter().take_while(|&&x| x == size).count();
            parts.push(format!("{run}x{size}"));
            i += run;
        }
        f.write_str(&parts.join("+"))
    }
}

impl FromStr for NewClusterConfiguration {
    type Err = GibbsError;

    /// Parses run-length specs such as `32x1+1x8` (32 blocks of size one
    /// and one of size eight). A bare number `8` is a single block and `0`
    /// is the empty configuration.
    fn from_str(spec: &str) -> Result<Self> {
        let bad = || GibbsError::validation(format!("bad composition spec '{spec}', expected e.g. 32x1+1x8"));
        let spec_t = spec.trim();
        if spec_t == "0" {
            return Ok(Self::empty());
        }
        let mut composition = Vec::new();
        for part in spec_t.split('+') {
            let part = part.trim();
            let (count, size) = match part.split_once(['x', 'X', '*']) {
                Some((c, s)) => (
                    c.trim().parse::<usize>().map_err(|_| bad())?,
                    s.trim().parse::<usize>().map_err(|_| bad())?,
                ),
                None => (1, part.parse::<usize>().map_err(|_| bad())?),
            };
            if size == 0 || count == 0 {
                return Err(bad());
            }
            composition.extend(std::iter::repeat_n(size, count));
        }
        Self::new(composition)
    }
}

pub(crate) fn log_ordered_realizations(composition: &[usize]) -> f64 {
    let mut left: usize = composition.iter().sum();
    let mut acc = 0.0;
    for &size in composition {
        // the block's least element is the smallest unused one; choose the rest
        acc += ln_binom(left - 1, size - 1);
        left -= size;
    }
    acc
}

pub(crate) fn log_multiset_realizations(composition: &[usize]) -> f64 {
    let s: usize = composition.iter().sum();
    let mut runs: BTreeMap<usize, usize> = BTreeMap::new();
    for &size in composition {
        *runs.entry(size).or_insert(0) += 1;
    }
    ln_fact(s) - composition.iter().map(|&x| ln_fact(x)).sum::<f64>() - runs.values().map(|&m| ln_fact(m)).sum::<f64>()
}

/// How many times more likely configuration `a` is than `b` among the
/// same number of new-cluster observations:
/// `Π (1-σ)_{a_i-1} / Π (1-σ)_{b_i-1}`.
pub fn configuration_odds(sigma: f64, a: &NewClusterConfiguration, b: &NewClusterConfiguration) -> Result<f64> {
    if !(0.0..1.0).contains(&sigma) {
        return Err(GibbsError::domain(format!("sigma must lie in [0, 1), got {sigma}")));
    }
    if a.s() != b.s() {
        return Err(GibbsError::domain(format!(
            "configurations must hold the same number of observations, got {} and {}",
            a.s(),
            b.s()
        )));
    }
    let la: f64 = a.composition().iter().map(|&x| ln_block(sigma, x)).sum();
    let lb: f64 = b.composition().iter().map(|&x| ln_block(sigma, x)).sum();
    Ok((la - lb).exp())
}

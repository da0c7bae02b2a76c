use std::collections::BTreeMap;

use serde::Serialize;

use super::FutureSampler;
use crate::error::{GibbsError, Result};
use crate::models::{GibbsModel, SampleSummary};
use crate::retrodiction::RetainedSet;

/// Largest `n + m` the enumeration accepts.
pub const ORACLE_CAP: usize = 12;

/// One outcome of the additional sample: new-cluster sizes in order of
/// appearance and the increment of every observed cluster, with its exact
/// probability (summed over all orders of arrival).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRow {
    pub k: usize,
    pub s: usize,
    pub composition: Vec<usize>,
    pub increments: Vec<usize>,
    pub prob: f64,
}

/// Exact joint law of an additional sample, by exhaustive extension of the
/// observed partition.
#[derive(Debug, Clone, Serialize)]
pub struct OracleTable {
    pub rows: Vec<OracleRow>,
}

/// Walks every sequence of `m` predictive choices from the observed
/// clusters, multiplying one-step probabilities along the way.
pub fn enumerate_conditional(model: &GibbsModel, sample: &SampleSummary, m: usize) -> Result<OracleTable> {
    if sample.n() + m > ORACLE_CAP {
        return Err(GibbsError::Resource {
            what: "enumeration oracle size n + m",
            requested: sample.n() + m,
            cap: ORACLE_CAP,
        });
    }
    let sampler = FutureSampler::new(model, sample, m)?;
    let mut leaves: BTreeMap<(Vec<usize>, Vec<usize>), f64> = BTreeMap::new();
    let mut walk = Walk {
        sampler: &sampler,
        increments: vec![0; sample.j()],
        fresh: Vec::new(),
        leaves: &mut leaves,
    };
    walk.visit(0, 1.0);
    let rows = leaves
        .into_iter()
        .map(|((composition, increments), prob)| OracleRow {
            k: composition.len(),
            s: composition.iter().sum(),
            composition,
            increments,
            prob,
        })
        .collect();
    Ok(OracleTable { rows })
}

struct Walk<'a> {
    sampler: &'a FutureSampler,
    increments: Vec<usize>,
    fresh: Vec<usize>,
    leaves: &'a mut BTreeMap<(Vec<usize>, Vec<usize>), f64>,
}

impl Walk<'_> {
    fn visit(&mut self, t: usize, prob: f64) {
        if t == self.sampler.m {
            *self
                .leaves
                .entry((self.fresh.clone(), self.increments.clone()))
                .or_insert(0.0) += prob;
            return;
        }
        let k = self.fresh.len();
        let sigma = self.sampler.sigma;
        let ratio = self.sampler.ratio[t][k];

        self.fresh.push(1);
        self.visit(t + 1, prob * self.sampler.p_new[t][k]);
        self.fresh.pop();

        for c in 0..self.increments.len() {
            let size = self.sampler.observed[c] + self.increments[c];
            self.increments[c] += 1;
            self.visit(t + 1, prob * (size as f64 - sigma) * ratio);
            self.increments[c] -= 1;
        }
        for c in 0..k {
            let size = self.fresh[c];
            self.fresh[c] += 1;
            self.visit(t + 1, prob * (size as f64 - sigma) * ratio);
            self.fresh[c] -= 1;
        }
    }
}

impl OracleTable {
    pub fn total(&self) -> f64 {
        self.rows.iter().map(|r| r.prob).sum()
    }

    /// Sums row probabilities by `key`.
    pub fn marginal<K: Ord>(&self, key: impl Fn(&OracleRow) -> K) -> BTreeMap<K, f64> {
        let mut out = BTreeMap::new();
        for row in &self.rows {
            *out.entry(key(row)).or_insert(0.0) += row.prob;
        }
        out
    }

    pub fn kl_marginal(&self) -> BTreeMap<(usize, usize), f64> {
        self.marginal(|r| (r.k, r.s))
    }

    pub fn k_marginal(&self) -> BTreeMap<usize, f64> {
        self.marginal(|r| r.k)
    }

    pub fn l_marginal(&self) -> BTreeMap<usize, f64> {
        self.marginal(|r| r.s)
    }

    /// Probability of each new-cluster composition (order of appearance).
    pub fn composition_marginal(&self) -> BTreeMap<Vec<usize>, f64> {
        self.marginal(|r| r.composition.clone())
    }

    /// Probability that no observed cluster outside `retained` grows.
    pub fn avoidance(&self, retained: &RetainedSet) -> f64 {
        self.rows
            .iter()
            .filter(|r| {
                r.increments
                    .iter()
                    .enumerate()
                    .all(|(i, &d)| d == 0 || retained.indices().contains(&i))
            })
            .map(|r| r.prob)
            .sum()
    }
}

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{FutureSampler, RngStream};
use crate::error::{GibbsError, Result};
use crate::models::{GibbsModel, SampleSummary};
use crate::prediction::{
    expected_new_observations, k_distribution, kl_joint_distribution, l_distribution, DiscreteDistribution,
    SupportPoint,
};

/// Smallest replicate count accepted by [`mc_compare`].
pub const MIN_REPS: usize = 10_000;

/// Cells expecting fewer hits than this are pooled into one tail cell.
pub const MIN_EXPECTED_COUNT: f64 = 20.0;

const CHUNK: usize = 10_000;

/// Observed against expected count for one cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellZ {
    pub label: String,
    pub observed: u64,
    pub expected: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct McReport {
    pub reps: usize,
    pub kl: Vec<CellZ>,
    pub k: Vec<CellZ>,
    pub l: Vec<CellZ>,
    /// Standardized difference between the simulated mean of `L` and
    /// `m · P(new)`.
    pub l_mean_z: f64,
    pub max_abs_z: f64,
    /// Simulated frequency of each `(K, L)` pair; serialized as a list of
    /// `{k, l, count}` since JSON keys must be strings.
    #[serde(serialize_with = "counts_as_list")]
    pub kl_counts: BTreeMap<(usize, usize), u64>,
}

fn counts_as_list<S: serde::Serializer>(
    counts: &BTreeMap<(usize, usize), u64>,
    ser: S,
) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Cell {
        k: usize,
        l: usize,
        count: u64,
    }
    ser.collect_seq(counts.iter().map(|(&(k, l), &count)| Cell { k, l, count }))
}

/// Per-cell binomial z-scores of `counts` (out of `reps`) against `dist`.
/// Cells with expected count below [`MIN_EXPECTED_COUNT`] are pooled,
/// together with any observed value outside the support, into a `rest`
/// cell, which is scored only if its own expectation is large enough.
pub fn z_scores<T: SupportPoint>(counts: &BTreeMap<T, u64>, dist: &DiscreteDistribution<T>, reps: usize) -> Vec<CellZ> {
    let reps_f = reps as f64;
    let z = |observed: u64, p: f64| {
        let expected = reps_f * p;
        (observed as f64 - expected) / (expected * (1.0 - p)).sqrt()
    };
    let mut cells = Vec::new();
    let (mut rest_obs, mut rest_p) = (0u64, 0.0);
    for (x, lp) in dist.iter() {
        let p = lp.exp();
        let observed = counts.get(&x).copied().unwrap_or(0);
        if reps_f * p >= MIN_EXPECTED_COUNT {
            cells.push(CellZ {
                label: x.render(),
                observed,
                expected: reps_f * p,
                z: z(observed, p),
            });
        } else {
            rest_obs += observed;
            rest_p += p;
        }
    }
    rest_obs += counts
        .iter()
        .filter(|(x, _)| dist.log_prob(**x) == f64::NEG_INFINITY)
        .map(|(_, c)| c)
        .sum::<u64>();
    if reps_f * rest_p >= MIN_EXPECTED_COUNT && rest_p < 1.0 {
        cells.push(CellZ {
            label: "rest".into(),
            observed: rest_obs,
            expected: reps_f * rest_p,
            z: z(rest_obs, rest_p),
        });
    }
    cells
}

/// Simulates `reps` additional samples and scores the empirical laws of
/// `(K, L)`, `K` and `L` against the analytic ones. Replicates run in
/// chunks of 10 000, chunk `c` on `rng.substream(c)`.
pub fn mc_compare(
    model: &GibbsModel,
    sample: &SampleSummary,
    m: usize,
    reps: usize,
    rng: &RngStream,
) -> Result<McReport> {
    if reps < MIN_REPS {
        return Err(GibbsError::validation(format!(
            "Monte Carlo comparison needs at least {MIN_REPS} replicates, got {reps}"
        )));
    }
    let sampler = FutureSampler::new(model, sample, m)?;
    let chunks = reps.div_ceil(CHUNK);
    // per chunk: (K, L) counts, sum of L, sum of L²
    type Partial = (BTreeMap<(usize, usize), u64>, f64, f64);
    let partial: Vec<Partial> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut stream = rng.substream(c as u64);
            let todo = CHUNK.min(reps - c * CHUNK);
            let mut counts = BTreeMap::new();
            let (mut sum_l, mut sum_l2) = (0.0, 0.0);
            for _ in 0..todo {
                let (k, l) = sampler.draw_counts(&mut stream);
                *counts.entry((k, l)).or_insert(0u64) += 1;
                sum_l += l as f64;
                sum_l2 += (l * l) as f64;
            }
            (counts, sum_l, sum_l2)
        })
        .collect();

    let mut kl_counts = BTreeMap::new();
    let (mut sum_l, mut sum_l2) = (0.0, 0.0);
    for (counts, a, b) in partial {
        for (key, c) in counts {
            *kl_counts.entry(key).or_insert(0) += c;
        }
        sum_l += a;
        sum_l2 += b;
    }
    let mut k_counts = BTreeMap::new();
    let mut l_counts = BTreeMap::new();
    for (&(k, l), &c) in &kl_counts {
        *k_counts.entry(k).or_insert(0) += c;
        *l_counts.entry(l).or_insert(0) += c;
    }

    let kl = z_scores(&kl_counts, &kl_joint_distribution(model, sample, m)?, reps);
    let k = z_scores(&k_counts, &k_distribution(model, sample, m)?, reps);
    let l = z_scores(&l_counts, &l_distribution(model, sample, m)?, reps);
    let reps_f = reps as f64;
    let mean = sum_l / reps_f;
    let var = (sum_l2 / reps_f - mean * mean).max(f64::MIN_POSITIVE);
    let l_mean_z = (mean - expected_new_observations(model, sample, m)?) / (var / reps_f).sqrt();
    let max_abs_z = kl
        .iter()
        .chain(&k)
        .chain(&l)
        .map(|c| c.z.abs())
        .fold(l_mean_z.abs(), f64::max);
    Ok(McReport {
        reps,
        kl,
        k,
        l,
        l_mean_z,
        max_abs_z,
        kl_counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_serializes() {
        let model = GibbsModel::poisson_dirichlet(0.5, 1.0).unwrap();
        let sample = SampleSummary::from_frequencies(vec![2, 1]).unwrap();
        let report = mc_compare(&model, &sample, 3, MIN_REPS, &RngStream::new(1)).unwrap();
        let v = serde_json::to_value(&report).unwrap();
        let total: u64 = v["kl_counts"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c["count"].as_u64().unwrap())
            .sum();
        assert_eq!(total, MIN_REPS as u64);
    }

    #[test]
    fn too_few_reps() {
        let model = GibbsModel::dirichlet(1.0).unwrap();
        let sample = SampleSummary::canonical(5, 2).unwrap();
        assert!(mc_compare(&model, &sample, 3, 0, &RngStream::new(1)).is_err());
        assert!(mc_compare(&model, &sample, 3, 9_999, &RngStream::new(1)).is_err());
    }

    #[test]
    fn z_scores_pool_the_tail() {
        let dist =
            DiscreteDistribution::from_log_probs(vec![0usize, 1, 2], vec![0.5f64.ln(), 0.4999f64.ln(), 0.0001f64.ln()])
                .unwrap();
        let counts: BTreeMap<usize, u64> = [(0, 5000), (1, 4990), (2, 7), (9, 3)].into();
        let cells = z_scores(&counts, &dist, 10_000);
        assert_eq!(cells.len(), 2);
        let labels: Vec<String> = z_scores(&counts, &dist, 1_000_000)
            .into_iter()
            .map(|c| c.label)
            .collect();
        assert_eq!(labels, ["0", "1", "2"]);
        let mut w = vec![0.0; 101];
        w[0] = 100f64.ln();
        let wide = DiscreteDistribution::from_log_weights((0usize..101).collect(), w).unwrap();
        let cells = z_scores(&counts, &wide, 1_000);
        assert_eq!(cells.len(), 2);
        assert_eq!(cells[1].label, "rest");
    }
}

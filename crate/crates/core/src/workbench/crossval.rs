use rand::seq::index;
use rayon::prelude::*;
use serde::Serialize;

use super::Dataset;
use crate::error::{GibbsError, Result};
use crate::fitting::fit_empirical_bayes;
use crate::models::{ModelFamily, SampleSummary};
use crate::prediction::{average_expression, k_distribution, l_distribution, HpdInterval};
use crate::simulation::RngStream;

/// What the held-out reads actually contained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HoldoutTruth {
    /// Holdout size `m = n - size`.
    pub m: usize,
    /// Species present in the holdout but absent from the sub-sample.
    pub k_true: usize,
    /// Holdout reads belonging to those species.
    pub l_true: usize,
}

/// Draws `size` of the dataset's `n` reads without replacement.
pub fn subsample(dataset: &Dataset, size: usize, rng: &mut RngStream) -> Result<(SampleSummary, HoldoutTruth)> {
    let n = dataset.n();
    if size == 0 || size >= n {
        return Err(GibbsError::validation(format!(
            "sub-sample size must lie in [1, {}], got {size}",
            n - 1
        )));
    }
    // read r belongs to the species whose cumulative range covers it
    let freqs = dataset.frequencies();
    let mut owner = Vec::with_capacity(n);
    for (species, &f) in freqs.iter().enumerate() {
        owner.extend(std::iter::repeat_n(species, f));
    }
    let mut drawn = vec![0usize; freqs.len()];
    for read in index::sample(rng, n, size) {
        drawn[owner[read]] += 1;
    }
    let (mut k_true, mut l_true) = (0, 0);
    for (&d, &f) in drawn.iter().zip(freqs) {
        if d == 0 {
            k_true += 1;
            l_true += f;
        }
    }
    let sub = SampleSummary::from_frequencies(drawn.into_iter().filter(|&d| d > 0).collect())?;
    Ok((
        sub,
        HoldoutTruth {
            m: n - size,
            k_true,
            l_true,
        },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossvalRow {
    pub replicate: usize,
    pub j: usize,
    pub sigma: f64,
    pub scale: f64,
    pub converged: bool,
    pub k_hat: f64,
    pub k_hpd: HpdInterval,
    pub l_hat: f64,
    pub l_hpd: HpdInterval,
    pub a_m: f64,
    pub a_total: f64,
    pub truth: HoldoutTruth,
    pub k_covered: bool,
    pub l_covered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossvalReport {
    pub dataset: String,
    pub family: ModelFamily,
    pub subsample_size: usize,
    pub level: f64,
    pub rows: Vec<CrossvalRow>,
    pub k_coverage: usize,
    pub l_coverage: usize,
    pub k_mean_abs_error: f64,
    pub l_mean_abs_error: f64,
}

/// Repeats: sub-sample, fit `family` by maximum EPPF, predict the holdout.
/// Replicate `i` runs on `rng.substream(i)`, so the report does not depend
/// on the number of threads.
pub fn crossval(
    dataset: &Dataset,
    subsample_size: usize,
    reps: usize,
    family: ModelFamily,
    level: f64,
    rng: &RngStream,
) -> Result<CrossvalReport> {
    if reps == 0 {
        return Err(GibbsError::validation("cross-validation needs at least one replicate"));
    }
    let rows: Vec<CrossvalRow> = (0..reps)
        .into_par_iter()
        .map(|replicate| {
            let mut stream = rng.substream(replicate as u64);
            let (sub, truth) = subsample(dataset, subsample_size, &mut stream)?;
            let fit = fit_empirical_bayes(&sub, family)?;
            let m = truth.m;
            let k_dist = k_distribution(&fit.model, &sub, m)?;
            let l_dist = l_distribution(&fit.model, &sub, m)?;
            let (k_hat, l_hat) = (k_dist.mean(), l_dist.mean());
            let (k_hpd, l_hpd) = (k_dist.hpd(level)?, l_dist.hpd(level)?);
            let (a_m, a_total) = average_expression(&sub, m, k_hat, l_hat)?;
            Ok(CrossvalRow {
                replicate,
                j: sub.j(),
                sigma: fit.model.sigma(),
                scale: fit.model.scale(),
                converged: fit.converged,
                k_hat,
                k_hpd,
                l_hat,
                l_hpd,
                a_m,
                a_total,
                truth,
                k_covered: k_hpd.contains(truth.k_true),
                l_covered: l_hpd.contains(truth.l_true),
            })
        })
        .collect::<Result<_>>()?;
    let count = rows.len() as f64;
    Ok(CrossvalReport {
        dataset: dataset.name().to_string(),
        family,
        subsample_size,
        level,
        k_coverage: rows.iter().filter(|r| r.k_covered).count(),
        l_coverage: rows.iter().filter(|r| r.l_covered).count(),
        k_mean_abs_error: rows
            .iter()
            .map(|r| (r.k_hat - r.truth.k_true as f64).abs())
            .sum::<f64>()
            / count,
        l_mean_abs_error: rows
            .iter()
            .map(|r| (r.l_hat - r.truth.l_true as f64).abs())
            .sum::<f64>()
            / count,
        rows,
    })
}

impl CrossvalReport {
    /// Aligned text table; estimates are rounded to integers here only.
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:>4} {:>6} {:>7} {:>9} {:>6} {:>14} {:>6} {:>6} {:>14} {:>6}\n",
            "rep", "j", "sigma", "scale", "K_hat", "K_hpd", "K_true", "L_hat", "L_hpd", "L_true"
        );
        for r in &self.rows {
            out += &format!(
                "{:>4} {:>6} {:>7.3} {:>9.1} {:>6.0} {:>14} {:>6} {:>6.0} {:>14} {:>6}\n",
                r.replicate,
                r.j,
                r.sigma,
                r.scale,
                r.k_hat,
                r.k_hpd.to_string(),
                r.truth.k_true,
                r.l_hat,
                r.l_hpd.to_string(),
                r.truth.l_true
            );
        }
        out += &format!(
            "coverage K {}/{}  L {}/{}   mean abs error K {:.1}  L {:.1}\n",
            self.k_coverage,
            self.rows.len(),
            self.l_coverage,
            self.rows.len(),
            self.k_mean_abs_error,
            self.l_mean_abs_error
        );
        out
    }
}

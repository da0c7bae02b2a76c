//! Backward-looking probabilities: that chosen species of the observed
//! sample receive none of the `m` additional observations.
//!
//! A query is described by the clusters that are *allowed* to be seen
//! again (the retained set); every other observed cluster must not
//! reappear. The probability depends on the retained set only through its
//! size `r` and its total frequency.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::combinatorics::{chu_vandermonde_sides, ln_binom, log_sum_exp, noncentral_scaled_row, LogCoeffTable};
use crate::error::{GibbsError, Result};
use crate::models::{ln_block, GibbsModel, SampleSummary};

/// Observed clusters allowed to receive new observations, as 0-based
/// positions in the sample's frequency vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RetainedSet {
    indices: BTreeSet<usize>,
    retained_freq_sum: usize,
}

impl RetainedSet {
    pub fn new(sample: &SampleSummary, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let indices: BTreeSet<usize> = indices.into_iter().collect();
        let j = sample.j();
        if let Some(&bad) = indices.iter().find(|&&i| i >= j) {
            return Err(GibbsError::validation(format!(
                "cluster index {bad} out of range for {j} clusters"
            )));
        }
        if indices.is_empty() {
            return Err(GibbsError::domain("at least one observed cluster must be retained"));
        }
        let retained_freq_sum = indices.iter().map(|&i| sample.frequencies()[i]).sum();
        Ok(RetainedSet {
            indices,
            retained_freq_sum,
        })
    }

    /// Retains everything except the listed clusters.
    pub fn forbidding(sample: &SampleSummary, forbidden: impl IntoIterator<Item = usize>) -> Result<Self> {
        let forbidden: BTreeSet<usize> = forbidden.into_iter().collect();
        if let Some(&bad) = forbidden.iter().find(|&&i| i >= sample.j()) {
            return Err(GibbsError::validation(format!(
                "cluster index {bad} out of range for {} clusters",
                sample.j()
            )));
        }
        Self::new(sample, (0..sample.j()).filter(|i| !forbidden.contains(i)))
    }

    /// Forbids clusters whose frequency is one of `levels`. With
    /// `count = Some(c)` only the first `c` such clusters (in sample order)
    /// are forbidden; by frequency sufficiency the choice does not matter.
    pub fn forbidding_levels(sample: &SampleSummary, levels: &[usize], count: Option<usize>) -> Result<Self> {
        let matching: Vec<usize> = sample
            .frequencies()
            .iter()
            .enumerate()
            .filter(|(_, f)| levels.contains(f))
            .map(|(i, _)| i)
            .collect();
        let take = match count {
            Some(c) if c > matching.len() => {
                return Err(GibbsError::validation(format!(
                    "asked to forbid {c} clusters but only {} have the requested levels",
                    matching.len()
                )))
            }
            Some(c) => c,
            None => matching.len(),
        };
        if take == 0 {
            return Err(GibbsError::validation(
                "no observed cluster matches the requested levels",
            ));
        }
        Self::forbidding(sample, matching.into_iter().take(take))
    }

    pub fn indices(&self) -> &BTreeSet<usize> {
        &self.indices
    }

    /// `r`, the number of retained clusters.
    pub fn r(&self) -> usize {
        self.indices.len()
    }

    pub fn retained_freq_sum(&self) -> usize {
        self.retained_freq_sum
    }
}

/// Probability that none of the next `m` observations falls in an observed
/// cluster outside `retained`. Poisson–Dirichlet and Dirichlet models use
/// the closed form; others go through [`avoidance_probability_generic`].
pub fn avoidance_probability(
    model: &GibbsModel,
    sample: &SampleSummary,
    m: usize,
    retained: &RetainedSet,
) -> Result<f64> {
    let theta = match *model {
        GibbsModel::Dirichlet { theta } | GibbsModel::PoissonDirichlet { theta, .. } => theta,
        GibbsModel::GeneralizedGamma { .. } => return avoidance_probability_generic(model, sample, m, retained),
    };
    let sigma = model.sigma();
    let (n, j, r) = (sample.n() as f64, sample.j() as f64, retained.r() as f64);
    let open = theta + (j - r) * sigma + retained.retained_freq_sum() as f64;
    // (open)_m / (θ + n)_m as a product of ratios
    let ln: f64 = (0..m).map(|i| ((open + i as f64) / (theta + n + i as f64)).ln()).sum();
    Ok(ln.exp())
}

/// The avoidance probability for any Gibbs model,
/// `Σ_k V_{n+m,j+k}/V_{n,j} · C(m,k; σ, rσ - Σ n_retained)/σ^k`.
pub fn avoidance_probability_generic(
    model: &GibbsModel,
    sample: &SampleSummary,
    m: usize,
    retained: &RetainedSet,
) -> Result<f64> {
    if m == 0 {
        return Ok(1.0);
    }
    let (n, j) = (sample.n(), sample.j());
    let sigma = model.sigma();
    let gamma = retained.r() as f64 * sigma - retained.retained_freq_sum() as f64;
    let row = noncentral_scaled_row(m, sigma, gamma)?;
    let base = model.log_weight(n, j)?.ln();
    let mut terms = Vec::with_capacity(m + 1);
    for (k, e) in row.iter().enumerate() {
        terms.push(model.log_weight(n + m, j + k)?.ln() - base + e.ln());
    }
    Ok(log_sum_exp(&terms).exp())
}

/// The avoidance probability assembled stage by stage from the full joint
/// law of the extended sample: the increments of the retained clusters are
/// summed by brute force over all their compositions, the new clusters
/// through the central coefficients, then `K` and `L` are summed out and
/// the result divided by the sample's EPPF. Exponential in `r`; meant for
/// cross-checking on small inputs.
pub fn avoidance_probability_staged(
    model: &GibbsModel,
    sample: &SampleSummary,
    m: usize,
    retained: &RetainedSet,
) -> Result<f64> {
    let (n, j) = (sample.n(), sample.j());
    let sigma = model.sigma();
    let a = vec![1.0 - sigma; retained.r()];
    let sizes: Vec<usize> = retained.indices().iter().map(|&i| sample.frequencies()[i]).collect();
    let retained_blocks: f64 = sizes.iter().map(|&x| ln_block(sigma, x)).sum();
    let all_blocks: f64 = sample.frequencies().iter().map(|&x| ln_block(sigma, x)).sum();
    let table = LogCoeffTable::build(sigma, m.max(1))?;

    let mut terms = Vec::new();
    for s in 0..=m {
        // Σ over increments λ of the retained clusters summing to m - s
        let (old, _) = chu_vandermonde_sides(&a, &sizes, m - s)?;
        let old = old.ln() - retained_blocks;
        let row = table.scaled_row(s)?;
        for (k, d) in row.iter().enumerate() {
            if d.is_zero() {
                continue;
            }
            terms.push(ln_binom(m, s) + old + model.log_weight(n + m, j + k)?.ln() + d.ln() + all_blocks);
        }
    }
    let joint = log_sum_exp(&terms);
    Ok((joint - model.eppf_log(sample.frequencies())?.ln()).exp())
}

/// Probability that the `j - r` most abundant observed species all fail to
/// reappear. Frequencies are ranked by `(frequency, position)` and the `r`
/// smallest are retained.
pub fn avoid_top_expressed(model: &GibbsModel, sample: &SampleSummary, m: usize, r: usize) -> Result<f64> {
    let retained = retain_least_expressed(sample, r)?;
    avoidance_probability(model, sample, m, &retained)
}

/// The retained set keeping the `r` least abundant clusters.
pub fn retain_least_expressed(sample: &SampleSummary, r: usize) -> Result<RetainedSet> {
    if r == 0 || r > sample.j() {
        return Err(GibbsError::domain(format!(
            "need 1 <= r <= j = {}, got r = {r}",
            sample.j()
        )));
    }
    let mut order: Vec<usize> = (0..sample.j()).collect();
    order.sort_by_key(|&i| (sample.frequencies()[i], i));
    RetainedSet::new(sample, order.into_iter().take(r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SampleSummary {
        SampleSummary::from_frequencies(vec![3, 1, 2, 1, 5]).unwrap()
    }

    #[test]
    fn trivial_cases() {
        let s = sample();
        let model = GibbsModel::poisson_dirichlet(0.4, 1.5).unwrap();
        let all = RetainedSet::new(&s, 0..5).unwrap();
        assert!((avoidance_probability(&model, &s, 7, &all).unwrap() - 1.0).abs() < 1e-14);
        assert!((avoidance_probability_generic(&model, &s, 7, &all).unwrap() - 1.0).abs() < 1e-12);
        let some = RetainedSet::new(&s, [1, 3]).unwrap();
        assert_eq!(avoidance_probability(&model, &s, 0, &some).unwrap(), 1.0);
        assert_eq!(avoidance_probability_generic(&model, &s, 0, &some).unwrap(), 1.0);
    }

    #[test]
    fn retained_set_validation() {
        let s = sample();
        assert!(RetainedSet::new(&s, [5]).is_err());
        assert!(matches!(RetainedSet::new(&s, []), Err(GibbsError::Domain(_))));
        let r = RetainedSet::forbidding_levels(&s, &[1], Some(1)).unwrap();
        assert_eq!((r.r(), r.retained_freq_sum()), (4, 11));
        assert!(RetainedSet::forbidding_levels(&s, &[1], Some(3)).is_err());
        assert!(RetainedSet::forbidding_levels(&s, &[4], None).is_err());
        let top = retain_least_expressed(&s, 2).unwrap();
        assert_eq!(top.indices().iter().copied().collect::<Vec<_>>(), vec![1, 3]);
    }

    #[test]
    fn three_routes_agree() {
        let s = sample();
        let model = GibbsModel::poisson_dirichlet(0.3, 2.0).unwrap();
        let retained = RetainedSet::new(&s, [0, 3]).unwrap();
        let a = avoidance_probability(&model, &s, 4, &retained).unwrap();
        let b = avoidance_probability_generic(&model, &s, 4, &retained).unwrap();
        let c = avoidance_probability_staged(&model, &s, 4, &retained).unwrap();
        assert!(((a - b) / a).abs() < 1e-12, "{a} {b}");
        assert!(((a - c) / a).abs() < 1e-12, "{a} {c}");
    }
}

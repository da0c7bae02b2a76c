//! Forward conditional structures for an additional sample of size `m`:
//! the number of new clusters `K`, the number of observations landing in
//! new clusters `L`, their joint law, the configuration of the new
//! clusters, and the estimators built on them.
//!
//! Every quantity depends on the observed sample only through `(n, j)`.
//! Configuration probabilities are per set-partition realization; multiply
//! by [`NewClusterConfiguration::log_ordered_realizations`] (or the
//! multiset count) to get the mass of a block-size pattern.

mod config;
mod distribution;

pub use config::{configuration_odds, NewClusterConfiguration};
pub use distribution::{hpd_interval, DiscreteDistribution, HpdInterval, SupportPoint, NORMALIZATION_TOL};

use crate::combinatorics::{ln_binom, log_sum_exp, noncentral_scaled_row, LogCoeffTable, LogValue};
use crate::error::{GibbsError, Result};
use crate::models::{ln_block, GibbsModel, SampleSummary};

/// `ln (x)_t` for `t = 0..=m`.
fn rising_prefix(x: f64, m: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(m + 1);
    out.push(0.0);
    let mut acc = 0.0;
    for t in 0..m {
        acc += (x + t as f64).ln();
        out.push(acc);
    }
    out
}

/// `ln (V_{n+m,j+k} / V_{n,j})` for `k = 0..=m`.
fn weight_ratios(model: &GibbsModel, n: usize, j: usize, m: usize) -> Result<Vec<f64>> {
    let base = model.log_weight(n, j)?.ln();
    (0..=m)
        .map(|k| Ok(model.log_weight(n + m, j + k)?.ln() - base))
        .collect()
}

fn remaining_mass(model: &GibbsModel, n: usize, j: usize) -> f64 {
    n as f64 - j as f64 * model.sigma()
}

/// `ln P(K = k, L = s, new-cluster sizes = composition | K_n = j)` for one
/// set-partition realization of the composition.
pub fn joint_config_logprob(
    model: &GibbsModel,
    sample: &SampleSummary,
    m: usize,
    cfg: &NewClusterConfiguration,
) -> Result<LogValue> {
    let (n, j) = (sample.n(), sample.j());
    let (k, s) = (cfg.k(), cfg.s());
    if s > m {
        return Err(GibbsError::domain(format!(
            "configuration holds {s} observations but m = {m}"
        )));
    }
    let sigma = model.sigma();
    let ln = model.log_weight_ratio(n + m, j + k, n, j)?
        + ln_binom(m, s)
        + crate::combinatorics::ln_rising_unchecked(remaining_mass(model, n, j), m - s)
        + cfg.composition().iter().map(|&x| ln_block(sigma, x)).sum::<f64>();
    Ok(LogValue::from_ln(ln))
}

/// Joint law of `(K, L)` on `0 <= k <= s <= m` (with `k = 0` iff `s = 0`).
pub fn kl_joint_distribution(
    model: &GibbsModel,
    sample: &SampleSummary,
    m: usize,
) -> Result<DiscreteDistribution<(usize, usize)>> {
    if m == 0 {
        return Ok(DiscreteDistribution::point_mass((0, 0)));
    }
    let (n, j) = (sample.n(), sample.j());
    let table = LogCoeffTable::build(model.sigma(), m)?;
    let ratios = weight_ratios(model, n, j, m)?;
    let rising = rising_prefix(remaining_mass(model, n, j), m);
    let mut support = Vec::new();
    let mut logs = Vec::new();
    support.push((0, 0));
    logs.push(ratios[0] + rising[m]);
    for k in 1..=m {
        for s in k..=m {
            let d = table.log_scaled(s, k)?;
            support.push((k, s));
            logs.push(ratios[k] + ln_binom(m, s) + rising[m - s] + d.ln());
        }
    }
    DiscreteDistribution::from_computed(support, logs)
}

/// Law of the number of new clusters `K`.
pub fn k_distribution(model: &GibbsModel, sample: &SampleSummary, m: usize) -> Result<DiscreteDistribution<usize>> {
    if m == 0 {
        return Ok(DiscreteDistribution::point_mass(0));
    }
    let (n, j) = (sample.n(), sample.j());
    let ratios = weight_ratios(model, n, j, m)?;
    let row = noncentral_scaled_row(m, model.sigma(), -remaining_mass(model, n, j))?;
    let logs = ratios.iter().zip(&row).map(|(r, e)| r + e.ln()).collect();
    DiscreteDistribution::from_computed((0..=m).collect(), logs)
}

/// Law of the number of observations `L` falling in new clusters. Uses
/// the closed form for the Dirichlet and Poisson–Dirichlet families and
/// [`l_distribution_generic`] otherwise.
pub fn l_distribution(model: &GibbsModel, sample: &SampleSummary, m: usize) -> Result<DiscreteDistribution<usize>> {
    let theta = match *model {
        GibbsModel::Dirichlet { theta } | GibbsModel::PoissonDirichlet { theta, .. } => theta,
        GibbsModel::GeneralizedGamma { .. } => return l_distribution_generic(model, sample, m),
    };
    if m == 0 {
        return Ok(DiscreteDistribution::point_mass(0));
    }
    let (n, j) = (sample.n(), sample.j());
    let sigma = model.sigma();
    let old = rising_prefix(remaining_mass(model, n, j), m);
    let new = rising_prefix(theta + j as f64 * sigma, m);
    let total = rising_prefix(theta + n as f64, m)[m];
    let logs = (0..=m).map(|s| ln_binom(m, s) + old[m - s] + new[s] - total).collect();
    DiscreteDistribution::from_computed((0..=m).collect(), logs)
}

/// Law of `L` for any Gibbs model, through the coefficient table.
pub fn l_distribution_generic(
    model: &GibbsModel,
    sample: &SampleSummary,
    m: usize,
) -> Result<DiscreteDistribution<usize>> {
    if m == 0 {
        return Ok(DiscreteDistribution::point_mass(0));
    }
    let logs = l_log_masses(model, sample, m)?;
    DiscreteDistribution::from_computed((0..=m).collect(), logs)
}

fn l_log_masses(model: &GibbsModel, sample: &SampleSummary, m: usize) -> Result<Vec<f64>> {
    let (n, j) = (sample.n(), sample.j());
    let table = LogCoeffTable::build(model.sigma(), m)?;
    let ratios = weight_ratios(model, n, j, m)?;
    let old = rising_prefix(remaining_mass(model, n, j), m);
    (0..=m)
        .map(|s| {
            let row = table.scaled_row(s)?;
            let inner: Vec<f64> = (0..=s).map(|k| ratios[k] + row[k].ln()).collect();
            Ok(ln_binom(m, s) + old[m - s] + log_sum_exp(&inner))
        })
        .collect()
}

/// Law of `L` given `K = k`. It involves only `σ`, not the rest of the
/// model.
pub fn l_given_k_distribution(
    sigma: f64,
    n: usize,
    j: usize,
    m: usize,
    k: usize,
) -> Result<DiscreteDistribution<usize>> {
    if k == 0 || k > m {
        return Err(GibbsError::domain(format!("need 1 <= k <= m, got k = {k}, m = {m}")));
    }
    if j == 0 || j > n {
        return Err(GibbsError::domain(format!("need 1 <= j <= n, got n = {n}, j = {j}")));
    }
    let table = LogCoeffTable::build(sigma, m)?;
    let rest = n as f64 - j as f64 * sigma;
    let row = noncentral_scaled_row(m, sigma, -rest)?;
    let old = rising_prefix(rest, m);
    let denom = row[k].ln();
    let mut logs = Vec::with_capacity(m - k + 1);
    for s in k..=m {
        logs.push(ln_binom(m, s) + old[m - s] + table.log_scaled(s, k)?.ln() - denom);
    }
    DiscreteDistribution::from_computed((k..=m).collect(), logs)
}

/// Law of `K` given `L = s`.
pub fn k_given_l_distribution(
    model: &GibbsModel,
    sample: &SampleSummary,
    m: usize,
    s: usize,
) -> Result<DiscreteDistribution<usize>> {
    if s > m {
        return Err(GibbsError::domain(format!("need s <= m, got s = {s}, m = {m}")));
    }
    if s == 0 {
        return Ok(DiscreteDistribution::point_mass(0));
    }
    let (n, j) = (sample.n(), sample.j());
    let table = LogCoeffTable::build(model.sigma(), s)?;
    let row = table.scaled_row(s)?;
    let mut logs = Vec::with_capacity(s);
    for (k, d) in row.iter().enumerate().skip(1) {
        logs.push(model.log_weight(n + m, j + k)?.ln() + d.ln());
    }
    DiscreteDistribution::from_log_weights((1..=s).collect(), logs)
}

/// Posterior mean of `K`; zero for `m = 0`.
pub fn expected_new_clusters(model: &GibbsModel, sample: &SampleSummary, m: usize) -> Result<f64> {
    Ok(k_distribution(model, sample, m)?.mean())
}

/// Posterior mean of `L`: `m` times the probability that draw `n+1` is new.
pub fn expected_new_observations(model: &GibbsModel, sample: &SampleSummary, m: usize) -> Result<f64> {
    if m == 0 {
        return Ok(0.0);
    }
    Ok(m as f64 * model.new_cluster_prob(sample.n(), sample.j())?)
}

/// Posterior mean of `L` by summing `s · P(L = s)` over the unnormalized
/// generic masses. Agrees with [`expected_new_observations`].
pub fn expected_new_observations_by_sum(model: &GibbsModel, sample: &SampleSummary, m: usize) -> Result<f64> {
    if m == 0 {
        return Ok(0.0);
    }
    let logs = l_log_masses(model, sample, m)?;
    Ok(logs.iter().enumerate().map(|(s, lp)| s as f64 * lp.exp()).sum())
}

fn check_conditional(m: usize, n: usize, j: usize, s: usize, k: usize) -> Result<()> {
    if !(1 <= k && k <= s && s <= m) {
        return Err(GibbsError::domain(format!(
            "need 1 <= k <= s <= m, got k = {k}, s = {s}, m = {m}"
        )));
    }
    if j == 0 || j > n {
        return Err(GibbsError::domain(format!("need 1 <= j <= n, got n = {n}, j = {j}")));
    }
    Ok(())
}

/// Weight `V_{s,k}(m, n, j)` of the Gibbs partition followed by the `s`
/// observations that land in new clusters. Poisson–Dirichlet and Dirichlet
/// use their closed forms; other families go through
/// [`conditional_eppf_weight_generic`].
pub fn conditional_eppf_weight(
    model: &GibbsModel,
    m: usize,
    n: usize,
    j: usize,
    s: usize,
    k: usize,
) -> Result<LogValue> {
    check_conditional(m, n, j, s, k)?;
    match *model {
        // the conditional partition is again Poisson-Dirichlet, with θ + jσ
        GibbsModel::PoissonDirichlet { sigma, theta } => {
            GibbsModel::poisson_dirichlet(sigma, theta + j as f64 * sigma)?.log_weight(s, k)
        }
        GibbsModel::Dirichlet { .. } => model.log_weight(s, k),
        GibbsModel::GeneralizedGamma { .. } => conditional_eppf_weight_generic(model, m, n, j, s, k),
    }
}

/// `V_{n+m,j+k} / Σ_i V_{n+m,j+i} C(s,i;σ)/σ^i`, evaluated directly.
pub fn conditional_eppf_weight_generic(
    model: &GibbsModel,
    m: usize,
    n: usize,
    j: usize,
    s: usize,
    k: usize,
) -> Result<LogValue> {
    check_conditional(m, n, j, s, k)?;
    let table = LogCoeffTable::build(model.sigma(), s)?;
    let row = table.scaled_row(s)?;
    let mut terms = Vec::with_capacity(s);
    for (i, d) in row.iter().enumerate().skip(1) {
        terms.push(model.log_weight(n + m, j + i)?.ln() + d.ln());
    }
    Ok(LogValue::from_ln(
        model.log_weight(n + m, j + k)?.ln() - log_sum_exp(&terms),
    ))
}

/// Probability that the `s` observations landing in new clusters form
/// this particular realization of `composition`.
pub fn conditional_config_logprob(
    model: &GibbsModel,
    sample: &SampleSummary,
    m: usize,
    composition: &NewClusterConfiguration,
) -> Result<LogValue> {
    let (k, s) = (composition.k(), composition.s());
    let w = conditional_eppf_weight(model, m, sample.n(), sample.j(), s, k)?;
    let sigma = model.sigma();
    let blocks: f64 = composition.composition().iter().map(|&x| ln_block(sigma, x)).sum();
    Ok(LogValue::from_ln(w.ln() + blocks))
}

/// Probability of one realization of `composition` given `K = k` and
/// `L = s`: `σ^k Π (1-σ)_{s_i-1} / C(s,k;σ)`.
pub fn config_given_k_l_logprob(sigma: f64, composition: &NewClusterConfiguration) -> Result<LogValue> {
    let (k, s) = (composition.k(), composition.s());
    if k == 0 {
        return Ok(LogValue::ONE);
    }
    let table = LogCoeffTable::build(sigma, s)?;
    let blocks: f64 = composition.composition().iter().map(|&x| ln_block(sigma, x)).sum();
    Ok(LogValue::from_ln(blocks - table.log_scaled(s, k)?.ln()))
}

/// Plug-in average expression levels: `A_m = E[L] / E[K]` among the new
/// genes and `A_{n+m} = (n + m) / (j + E[K])` overall.
pub fn average_expression(sample: &SampleSummary, m: usize, expected_k: f64, expected_l: f64) -> Result<(f64, f64)> {
    if !(expected_k > 0.0) {
        return Err(GibbsError::domain(format!(
            "average expression needs a positive expected number of new clusters, got {expected_k}"
        )));
    }
    let a_m = expected_l / expected_k;
    let a_total = (sample.n() + m) as f64 / (sample.j() as f64 + expected_k);
    Ok((a_m, a_total))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pd() -> GibbsModel {
        GibbsModel::poisson_dirichlet(0.34, 33.0).unwrap()
    }

    #[test]
    fn degenerate_m() {
        let s = SampleSummary::canonical(10, 4).unwrap();
        let m = pd();
        assert_eq!(k_distribution(&m, &s, 0).unwrap(), DiscreteDistribution::point_mass(0));
        assert_eq!(expected_new_observations(&m, &s, 0).unwrap(), 0.0);
        assert_eq!(expected_new_clusters(&m, &s, 0).unwrap(), 0.0);
    }

    #[test]
    fn single_draw() {
        let s = SampleSummary::canonical(100, 59).unwrap();
        let m = pd();
        let k = k_distribution(&m, &s, 1).unwrap();
        assert!((k.prob(1) - m.new_cluster_prob(100, 59).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn pd_l_closed_form_matches_generic() {
        let s = SampleSummary::canonical(100, 59).unwrap();
        let m = pd();
        let a = l_distribution(&m, &s, 60).unwrap();
        let b = l_distribution_generic(&m, &s, 60).unwrap();
        for x in 0..=60 {
            assert!((a.prob(x) - b.prob(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn conditional_boundaries() {
        let m = pd();
        let s = SampleSummary::canonical(10, 4).unwrap();
        assert!(k_given_l_distribution(&m, &s, 5, 1).unwrap().prob(1) > 1.0 - 1e-15);
        let lk = l_given_k_distribution(0.34, 10, 4, 5, 5).unwrap();
        assert_eq!(lk.support(), &[5]);
        assert!(l_given_k_distribution(0.34, 10, 4, 5, 0).is_err());
        assert!(conditional_eppf_weight(&m, 3, 10, 4, 4, 1).is_err());
        let all_single: NewClusterConfiguration = "3x1".parse().unwrap();
        assert!(config_given_k_l_logprob(0.4, &all_single).unwrap().ln().abs() < 1e-14);
    }

    #[test]
    fn configuration_given_counts_at_half() {
        let c: NewClusterConfiguration = "2+1".parse().unwrap();
        let p = config_given_k_l_logprob(0.5, &c).unwrap().value();
        assert!((p - 1.0 / 3.0).abs() < 1e-14);
        assert!((p * c.log_ordered_realizations().exp() - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn average_expression_guard() {
        let s = SampleSummary::canonical(10, 4).unwrap();
        assert!(average_expression(&s, 5, 0.0, 1.0).is_err());
        let (a, b) = average_expression(&s, 5, 2.0, 3.0).unwrap();
        assert_eq!((a, b), (1.5, 2.5));
    }
}

//! Gibbs-type weight families and the quantities built directly on them:
//! EPPF values, the law of the multiplicity table and the one-step
//! predictive rule.

mod gengamma;
mod sample;

pub use gengamma::{gg_max_n, set_gg_max_n, DEFAULT_GG_MAX_N};
pub use sample::SampleSummary;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::combinatorics::{ln_fact, ln_rising_unchecked, LogValue};
use crate::error::{GibbsError, Result};

/// The three supported weight families, without parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelFamily {
    Dirichlet,
    PoissonDirichlet,
    GeneralizedGamma,
}

impl ModelFamily {
    /// Short tag used in model specs (`dp`, `py`, `gg`).
    pub fn tag(self) -> &'static str {
        match self {
            ModelFamily::Dirichlet => "dp",
            ModelFamily::PoissonDirichlet => "py",
            ModelFamily::GeneralizedGamma => "gg",
        }
    }

    /// Name of the second parameter.
    pub fn scale_name(self) -> &'static str {
        match self {
            ModelFamily::GeneralizedGamma => "beta",
            _ => "theta",
        }
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ModelFamily::Dirichlet => "dirichlet",
            ModelFamily::PoissonDirichlet => "poisson-dirichlet",
            ModelFamily::GeneralizedGamma => "generalized-gamma",
        };
        f.write_str(name)
    }
}

impl FromStr for ModelFamily {
    type Err = GibbsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dp" | "dirichlet" => Ok(ModelFamily::Dirichlet),
            "py" | "pd" | "pitman-yor" | "poisson-dirichlet" => Ok(ModelFamily::PoissonDirichlet),
            "gg" | "generalized-gamma" => Ok(ModelFamily::GeneralizedGamma),
            other => Err(GibbsError::validation(format!("unknown model family '{other}'"))),
        }
    }
}

/// A Gibbs-type exchangeable partition with EPPF
/// `V_{n,k} Π_j (1-σ)_{n_j-1}`.
///
/// Constructed through [`GibbsModel::dirichlet`],
/// [`GibbsModel::poisson_dirichlet`] or [`GibbsModel::generalized_gamma`],
/// which enforce the parameter ranges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum GibbsModel {
    Dirichlet { theta: f64 },
    PoissonDirichlet { sigma: f64, theta: f64 },
    GeneralizedGamma { sigma: f64, beta: f64 },
}

impl GibbsModel {
    pub fn dirichlet(theta: f64) -> Result<Self> {
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(GibbsError::domain(format!("Dirichlet needs theta > 0, got {theta}")));
        }
        Ok(GibbsModel::Dirichlet { theta })
    }

    pub fn poisson_dirichlet(sigma: f64, theta: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(GibbsError::domain(format!(
                "Poisson-Dirichlet needs sigma in (0, 1), got {sigma}"
            )));
        }
        if !(theta > -sigma) || !theta.is_finite() {
            return Err(GibbsError::domain(format!(
                "Poisson-Dirichlet needs theta > -sigma, got theta = {theta}, sigma = {sigma}"
            )));
        }
        Ok(GibbsModel::PoissonDirichlet { sigma, theta })
    }

    pub fn generalized_gamma(sigma: f64, beta: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(GibbsError::domain(format!(
                "generalized gamma needs sigma in (0, 1), got {sigma}"
            )));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(GibbsError::domain(format!(
                "generalized gamma needs beta > 0, got {beta}"
            )));
        }
        Ok(GibbsModel::GeneralizedGamma { sigma, beta })
    }

    /// Builds a model of `family` from `(σ, scale)`; `σ` is ignored for
    /// the Dirichlet family.
    pub fn from_params(family: ModelFamily, sigma: f64, scale: f64) -> Result<Self> {
        match family {
            ModelFamily::Dirichlet => Self::dirichlet(scale),
            ModelFamily::PoissonDirichlet => Self::poisson_dirichlet(sigma, scale),
            ModelFamily::GeneralizedGamma => Self::generalized_gamma(sigma, scale),
        }
    }

    pub fn family(&self) -> ModelFamily {
        match self {
            GibbsModel::Dirichlet { .. } => ModelFamily::Dirichlet,
            GibbsModel::PoissonDirichlet { .. } => ModelFamily::PoissonDirichlet,
            GibbsModel::GeneralizedGamma { .. } => ModelFamily::GeneralizedGamma,
        }
    }

    /// The discount `σ`; zero for the Dirichlet family.
    pub fn sigma(&self) -> f64 {
        match *self {
            GibbsModel::Dirichlet { .. } => 0.0,
            GibbsModel::PoissonDirichlet { sigma, .. } | GibbsModel::GeneralizedGamma { sigma, .. } => sigma,
        }
    }

    /// `θ` for Dirichlet and Poisson–Dirichlet, `β` for generalized gamma.
    pub fn scale(&self) -> f64 {
        match *self {
            GibbsModel::Dirichlet { theta } | GibbsModel::PoissonDirichlet { theta, .. } => theta,
            GibbsModel::GeneralizedGamma { beta, .. } => beta,
        }
    }

    /// `ln V_{n,k}`.
    pub fn log_weight(&self, n: usize, k: usize) -> Result<LogValue> {
        if k == 0 || k > n {
            return Err(GibbsError::domain(format!(
                "weights need 1 <= k <= n, got n = {n}, k = {k}"
            )));
        }
        let ln = match *self {
            GibbsModel::Dirichlet { theta } => k as f64 * theta.ln() - ln_rising_unchecked(theta, n),
            GibbsModel::PoissonDirichlet { sigma, theta } => {
                // Π_{i=1}^{k-1} (θ + iσ) = σ^{k-1} (θ/σ + 1)_{k-1}
                (k as f64 - 1.0) * sigma.ln() + ln_rising_unchecked(theta / sigma + 1.0, k - 1)
                    - ln_rising_unchecked(theta + 1.0, n - 1)
            }
            GibbsModel::GeneralizedGamma { sigma, beta } => gengamma::log_weight(sigma, beta, n, k)?,
        };
        Ok(LogValue::from_ln(ln))
    }

    /// `ln (V_{n_num,k_num} / V_{n_den,k_den})`, always as a difference of
    /// individually evaluated logs.
    pub fn log_weight_ratio(&self, n_num: usize, k_num: usize, n_den: usize, k_den: usize) -> Result<f64> {
        Ok(self.log_weight(n_num, k_num)?.ln() - self.log_weight(n_den, k_den)?.ln())
    }

    /// `ln Π` for a partition with the given block sizes.
    pub fn eppf_log(&self, frequencies: &[usize]) -> Result<LogValue> {
        if frequencies.is_empty() || frequencies.contains(&0) {
            return Err(GibbsError::validation(
                "block sizes must be a nonempty list of positive integers",
            ));
        }
        let n: usize = frequencies.iter().sum();
        let sigma = self.sigma();
        let blocks: f64 = frequencies.iter().map(|&f| ln_block(sigma, f)).sum();
        Ok(LogValue::from_ln(self.log_weight(n, frequencies.len())?.ln() + blocks))
    }

    /// Same value as [`eppf_log`](Self::eppf_log), computed from a
    /// multiplicity table `level -> count`.
    pub fn eppf_log_multiplicities(&self, multiplicities: &BTreeMap<usize, usize>) -> Result<LogValue> {
        let (n, k) = multiplicity_totals(multiplicities)?;
        let sigma = self.sigma();
        let blocks: f64 = multiplicities
            .iter()
            .map(|(&level, &count)| count as f64 * ln_block(sigma, level))
            .sum();
        Ok(LogValue::from_ln(self.log_weight(n, k)?.ln() + blocks))
    }

    /// `ln Pr[M_n = m]`, the probability of observing exactly the
    /// multiplicity table `m` (`m[i]` species seen `i` times).
    pub fn multiplicity_log(&self, multiplicities: &BTreeMap<usize, usize>) -> Result<LogValue> {
        let (n, _) = multiplicity_totals(multiplicities)?;
        let partitions: f64 = ln_fact(n)
            - multiplicities
                .iter()
                .map(|(&level, &count)| count as f64 * ln_fact(level) + ln_fact(count))
                .sum::<f64>();
        Ok(LogValue::from_ln(
            self.eppf_log_multiplicities(multiplicities)?.ln() + partitions,
        ))
    }

    /// Probability that draw `n+1` opens a new cluster given `j` clusters so far.
    pub fn new_cluster_prob(&self, n: usize, j: usize) -> Result<f64> {
        check_state(n, j)?;
        Ok(self.log_weight_ratio(n + 1, j + 1, n, j)?.exp())
    }

    /// Probability that draw `n+1` joins a particular existing cluster of
    /// size `n_i`.
    pub fn existing_cluster_prob(&self, n: usize, j: usize, n_i: usize) -> Result<f64> {
        check_state(n, j)?;
        if n_i == 0 || n_i > n {
            return Err(GibbsError::domain(format!(
                "cluster size must lie in [1, {n}], got {n_i}"
            )));
        }
        Ok((n_i as f64 - self.sigma()) * self.log_weight_ratio(n + 1, j, n, j)?.exp())
    }

    /// `|V_{n,k} - (n - σk) V_{n+1,k} - V_{n+1,k+1}| / V_{n,k}`.
    pub fn recursion_residual(&self, n: usize, k: usize) -> Result<f64> {
        let stay = (n as f64 - self.sigma() * k as f64) * self.log_weight_ratio(n + 1, k, n, k)?.exp();
        let open = self.log_weight_ratio(n + 1, k + 1, n, k)?.exp();
        Ok((1.0 - stay - open).abs())
    }
}

/// `ln (1-σ)_{size-1}`.
#[inline]
pub(crate) fn ln_block(sigma: f64, size: usize) -> f64 {
    ln_rising_unchecked(1.0 - sigma, size - 1)
}

fn check_state(n: usize, j: usize) -> Result<()> {
    if j == 0 || j > n {
        return Err(GibbsError::domain(format!("need 1 <= j <= n, got n = {n}, j = {j}")));
    }
    Ok(())
}

fn multiplicity_totals(multiplicities: &BTreeMap<usize, usize>) -> Result<(usize, usize)> {
    if multiplicities.get(&0).copied().unwrap_or(0) > 0 {
        return Err(GibbsError::validation("abundance level 0 is not a valid level"));
    }
    let n: usize = multiplicities.iter().map(|(l, c)| l * c).sum();
    let k: usize = multiplicities.values().sum();
    if k == 0 {
        return Err(GibbsError::validation("multiplicity table is empty"));
    }
    Ok((n, k))
}

impl fmt::Display for GibbsModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GibbsModel::Dirichlet { theta } => write!(f, "dp:theta={theta}"),
            GibbsModel::PoissonDirichlet { sigma, theta } => write!(f, "py:sigma={sigma},theta={theta}"),
            GibbsModel::GeneralizedGamma { sigma, beta } => write!(f, "gg:sigma={sigma},beta={beta}"),
        }
    }
}

impl FromStr for GibbsModel {
    type Err = GibbsError;

    /// Parses `dp:theta=<v>`, `py:sigma=<v>,theta=<v>` or
    /// `gg:sigma=<v>,beta=<v>`.
    fn from_str(spec: &str) -> Result<Self> {
        let bad = |why: &str| GibbsError::validation(format!("bad model spec '{spec}': {why}"));
        let (tag, rest) = spec
            .split_once(':')
            .ok_or_else(|| bad("expected '<family>:<params>'"))?;
        let family: ModelFamily = tag.parse()?;
        let mut params = BTreeMap::new();
        for item in rest.split(',').filter(|s| !s.trim().is_empty()) {
            let (key, value) = item.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            let value: f64 = value.trim().parse().map_err(|_| bad("parameter is not a number"))?;
            if params.insert(key.trim().to_ascii_lowercase(), value).is_some() {
                return Err(bad("repeated parameter"));
            }
        }
        let mut take = |name: &str| params.remove(name).ok_or_else(|| bad(&format!("missing '{name}'")));
        let model = match family {
            ModelFamily::Dirichlet => GibbsModel::dirichlet(take("theta")?),
            ModelFamily::PoissonDirichlet => {
                let sigma = take("sigma")?;
                GibbsModel::poisson_dirichlet(sigma, take("theta")?)
            }
            ModelFamily::GeneralizedGamma => {
                let sigma = take("sigma")?;
                GibbsModel::generalized_gamma(sigma, take("beta")?)
            }
        };
        if let Some(extra) = params.keys().next() {
            return Err(bad(&format!("unexpected parameter '{extra}'")));
        }
        model.map_err(|e| bad(&e.to_string()))
    }
}

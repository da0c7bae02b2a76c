use std::fmt::{self, Debug, Write as _};

use serde::Serialize;

use crate::combinatorics::log_sum_exp;
use crate::error::{GibbsError, Result};

/// Normalization slack accepted for computed distributions.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// A value a [`DiscreteDistribution`] can be supported on.
pub trait SupportPoint: Copy + Ord + Debug + Serialize {
    /// Text used in the CSV dump (`k:s` for pairs).
    fn render(&self) -> String;
}

impl SupportPoint for usize {
    fn render(&self) -> String {
        self.to_string()
    }
}

impl SupportPoint for (usize, usize) {
    fn render(&self) -> String {
        format!("{}:{}", self.0, self.1)
    }
}

/// Finite distribution on a sorted support, stored as log-probabilities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteDistribution<T> {
    support: Vec<T>,
    log_probs: Vec<f64>,
}

impl<T: SupportPoint> DiscreteDistribution<T> {
    /// Wraps already normalized log-probabilities. The support must be
    /// strictly increasing and the total mass within
    /// [`NORMALIZATION_TOL`] of one.
    pub fn from_log_probs(support: Vec<T>, log_probs: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(GibbsError::EmptyDistribution);
        }
        if support.len() != log_probs.len() {
            return Err(GibbsError::validation("support and probabilities differ in length"));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(GibbsError::validation("support must be sorted with distinct values"));
        }
        if log_probs.iter().any(|p| p.is_nan() || *p > 1e-12) {
            return Err(GibbsError::validation("log-probabilities must be finite and at most 0"));
        }
        let total = log_sum_exp(&log_probs);
        if !(total.abs() <= NORMALIZATION_TOL) {
            return Err(GibbsError::Range(format!(
                "distribution mass {} differs from 1 by more than {NORMALIZATION_TOL:e}",
                total.exp()
            )));
        }
        Ok(DiscreteDistribution { support, log_probs })
    }

    /// Like [`from_log_probs`](Self::from_log_probs), then removes the
    /// (checked, tiny) normalization error.
    pub(crate) fn from_computed(support: Vec<T>, mut log_probs: Vec<f64>) -> Result<Self> {
        let total = log_sum_exp(&log_probs);
        if !(total.abs() <= NORMALIZATION_TOL) {
            return Err(GibbsError::Range(format!(
                "computed distribution has mass {} (log {total:e}); numerical breakdown",
                total.exp()
            )));
        }
        for p in &mut log_probs {
            *p -= total;
        }
        Self::from_log_probs(support, log_probs)
    }

    /// Normalizes nonnegative weights given as logs.
    pub fn from_log_weights(support: Vec<T>, mut log_weights: Vec<f64>) -> Result<Self> {
        let total = log_sum_exp(&log_weights);
        if !total.is_finite() {
            return Err(GibbsError::EmptyDistribution);
        }
        for w in &mut log_weights {
            *w -= total;
        }
        Self::from_log_probs(support, log_weights)
    }

    pub fn point_mass(x: T) -> Self {
        DiscreteDistribution {
            support: vec![x],
            log_probs: vec![0.0],
        }
    }

    pub fn support(&self) -> &[T] {
        &self.support
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }

    pub fn probs(&self) -> Vec<f64> {
        self.log_probs.iter().map(|p| p.exp()).collect()
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (T, f64)> + '_ {
        self.support.iter().copied().zip(self.log_probs.iter().copied())
    }

    /// `ln P(X = x)`, `-inf` off the support.
    pub fn log_prob(&self, x: T) -> f64 {
        match self.support.binary_search(&x) {
            Ok(i) => self.log_probs[i],
            Err(_) => f64::NEG_INFINITY,
        }
    }

    pub fn prob(&self, x: T) -> f64 {
        self.log_prob(x).exp()
    }

    /// Plot-ready CSV with header `value,log_prob,prob`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,log_prob,prob\n");
        for (x, lp) in self.iter() {
            let _ = writeln!(out, "{},{},{}", x.render(), sig12(lp), sig12(lp.exp()));
        }
        out
    }
}

/// 12 significant digits.
fn sig12(x: f64) -> String {
    if x.is_infinite() {
        return if x < 0.0 { "-inf".into() } else { "inf".into() };
    }
    format!("{x:.11e}")
}

impl DiscreteDistribution<usize> {
    pub fn mean(&self) -> f64 {
        self.iter().map(|(x, lp)| x as f64 * lp.exp()).sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.iter().map(|(x, lp)| (x as f64 - mean).powi(2) * lp.exp()).sum()
    }

    /// See [`hpd_interval`].
    pub fn hpd(&self, level: f64) -> Result<HpdInterval> {
        hpd_interval(self, level)
    }
}

impl DiscreteDistribution<(usize, usize)> {
    /// Marginal law of the first coordinate.
    pub fn marginal_first(&self) -> Result<DiscreteDistribution<usize>> {
        marginal(self.iter().map(|((a, _), lp)| (a, lp)))
    }

    /// Marginal law of the second coordinate.
    pub fn marginal_second(&self) -> Result<DiscreteDistribution<usize>> {
        marginal(self.iter().map(|((_, b), lp)| (b, lp)))
    }
}

fn marginal(points: impl Iterator<Item = (usize, f64)>) -> Result<DiscreteDistribution<usize>> {
    let mut groups: std::collections::BTreeMap<usize, Vec<f64>> = Default::default();
    for (x, lp) in points {
        groups.entry(x).or_default().push(lp);
    }
    let (support, logs): (Vec<_>, Vec<_>) = groups.into_iter().map(|(x, v)| (x, log_sum_exp(&v))).unzip();
    DiscreteDistribution::from_computed(support, logs)
}

/// Highest posterior density interval of a discrete distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HpdInterval {
    pub lower: usize,
    pub upper: usize,
    /// Mass actually enclosed, at least the requested level.
    pub attained_mass: f64,
}

impl HpdInterval {
    pub fn contains(&self, x: usize) -> bool {
        self.lower <= x && x <= self.upper
    }
}

impl fmt::Display for HpdInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lower, self.upper)
    }
}

/// The shortest interval `[lower, upper]` of support values holding mass
/// at least `level`; among equally short ones the smallest `lower` wins.
pub fn hpd_interval(dist: &DiscreteDistribution<usize>, level: f64) -> Result<HpdInterval> {
    if !(level > 0.0 && level < 1.0) {
        return Err(GibbsError::domain(format!("HPD level must lie in (0, 1), got {level}")));
    }
    if dist.is_empty() {
        return Err(GibbsError::EmptyDistribution);
    }
    let xs = dist.support();
    let mut prefix = Vec::with_capacity(xs.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for p in dist.probs() {
        acc += p;
        prefix.push(acc);
    }
    // guards the comparison against summation noise
    let target = level - 1e-12;
    let mut best: Option<(usize, usize)> = None;
    let mut hi = 0;
    for lo in 0..xs.len() {
        if hi < lo {
            hi = lo;
        }
        while hi < xs.len() && prefix[hi + 1] - prefix[lo] < target {
            hi += 1;
        }
        if hi == xs.len() {
            break;
        }
        let width = xs[hi] - xs[lo];
        if best.is_none_or(|(l, h)| width < xs[h] - xs[l]) {
            best = Some((lo, hi));
        }
    }
    // level < 1 and the total is 1, so the full support always qualifies
    let (lo, hi) = best.unwrap_or((0, xs.len() - 1));
    Ok(HpdInterval {
        lower: xs[lo],
        upper: xs[hi],
        attained_mass: prefix[hi + 1] - prefix[lo],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(probs: &[f64]) -> DiscreteDistribution<usize> {
        DiscreteDistribution::from_log_probs((0..probs.len()).collect(), probs.iter().map(|p| p.ln()).collect())
            .unwrap()
    }

    #[test]
    fn hpd_basic_cases() {
        let point = DiscreteDistribution::point_mass(7usize);
        let h = point.hpd(0.95).unwrap();
        assert_eq!((h.lower, h.upper), (7, 7));
        assert!((h.attained_mass - 1.0).abs() < 1e-15);

        let sym = dist(&[0.25, 0.5, 0.25]);
        let h = sym.hpd(0.5).unwrap();
        assert_eq!((h.lower, h.upper), (1, 1));

        // tie between [0,1] and [1,2]: lower endpoint wins
        let h = sym.hpd(0.7).unwrap();
        assert_eq!((h.lower, h.upper), (0, 1));
    }

    #[test]
    fn hpd_matches_brute_force() {
        let probs = [0.05, 0.1, 0.02, 0.3, 0.08, 0.2, 0.15, 0.1];
        let d = dist(&probs);
        for &level in &[0.1, 0.3, 0.5, 0.77, 0.9, 0.99] {
            let mut best = (0, probs.len() - 1);
            for lo in 0..probs.len() {
                for hi in lo..probs.len() {
                    let mass: f64 = probs[lo..=hi].iter().sum();
                    if mass >= level - 1e-12 && hi - lo < best.1 - best.0 {
                        best = (lo, hi);
                    }
                }
            }
            let h = d.hpd(level).unwrap();
            assert_eq!((h.lower, h.upper), best, "level {level}");
            assert!(h.attained_mass >= level - 1e-12);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            DiscreteDistribution::<usize>::from_log_probs(vec![], vec![]),
            Err(GibbsError::EmptyDistribution)
        ));
        assert!(DiscreteDistribution::from_log_probs(vec![1usize, 1], vec![0.5f64.ln(); 2]).is_err());
        assert!(DiscreteDistribution::from_log_probs(vec![0usize, 1], vec![0.5f64.ln(), 0.4f64.ln()]).is_err());
        assert!(dist(&[0.5, 0.5]).hpd(1.0).is_err());
    }

    #[test]
    fn csv_dump() {
        let d = dist(&[0.25, 0.75]);
        let csv = d.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("value,log_prob,prob"));
        assert_eq!(lines.next(), Some("0,-1.38629436112e0,2.50000000000e-1"));
        let pairs = DiscreteDistribution::point_mass((2usize, 3usize));
        assert!(pairs.to_csv().contains("2:3,"));
    }

    #[test]
    fn mean_and_marginals() {
        let d = DiscreteDistribution::from_log_probs(
            vec![(0usize, 0usize), (1, 1), (1, 2)],
            vec![0.2f64.ln(), 0.5f64.ln(), 0.3f64.ln()],
        )
        .unwrap();
        let k = d.marginal_first().unwrap();
        let s = d.marginal_second().unwrap();
        assert!((k.prob(1) - 0.8).abs() < 1e-14);
        assert!((s.mean() - 1.1).abs() < 1e-14);
    }
}

//! Empirical Bayes fit: maximize the EPPF of the observed sample over the
//! parameters of a model family.
//!
//! A coarse grid (σ in steps of 0.01, the scale parameter on a geometric
//! grid) picks a starting point, then Nelder–Mead refines it in
//! transformed coordinates where the constraints disappear:
//! `σ = (1-ε) logistic(u)`, `θ = e^v - σ + ε` (so `θ > -σ`), `β = e^v`.

mod simplex;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GibbsError, Result};
use crate::models::{gg_max_n, GibbsModel, ModelFamily, SampleSummary};

const EPS: f64 = 1e-6;

/// Value spread at which a single simplex pass is considered flat; close
/// to the rounding noise of the log-likelihood.
const FLAT_TOL: f64 = 1e-14;

/// Vertex spread (transformed coordinates) ending a simplex pass.
const COORD_TOL: f64 = 1e-10;

/// Grid and stopping rules for [`fit_with_options`].
#[derive(Debug, Clone, Serialize)]
pub struct FitOptions {
    pub sigma_step: f64,
    pub scale_min: f64,
    pub scale_max: f64,
    pub scale_per_decade: usize,
    /// A refinement pass gaining less than this (relative) log-likelihood
    /// ends the fit as converged.
    pub rel_tol: f64,
    /// Refinement budget; exceeding it reports `converged = false`.
    pub max_evals: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            sigma_step: 0.01,
            scale_min: 1e-2,
            scale_max: 1e5,
            scale_per_decade: 8,
            rel_tol: 1e-8,
            max_evals: 10_000,
        }
    }
}

impl FitOptions {
    /// σ values of the coarse grid: `step, 2·step, …` below one.
    pub fn sigma_grid(&self) -> Vec<f64> {
        let count = ((1.0 - 1e-9) / self.sigma_step).floor() as usize;
        (1..=count)
            .map(|i| i as f64 * self.sigma_step)
            .filter(|&s| s < 1.0)
            .collect()
    }

    /// Geometric grid for `θ` or `β`.
    pub fn scale_grid(&self) -> Vec<f64> {
        let decades = (self.scale_max / self.scale_min).log10();
        let count = (decades * self.scale_per_decade as f64).round() as usize;
        (0..=count)
            .map(|i| self.scale_min * 10f64.powf(i as f64 / self.scale_per_decade as f64))
            .collect()
    }
}

/// One likelihood evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitPoint {
    pub sigma: f64,
    pub scale: f64,
    pub log_likelihood: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub model: GibbsModel,
    pub log_likelihood: f64,
    /// Every evaluation in order: the grid first, then the refinement.
    pub trace: Vec<FitPoint>,
    pub converged: bool,
    /// The optimum sits on `σ = 0` or on the edge of the grid.
    pub boundary: bool,
}

/// Fits `family` to `sample` with the default [`FitOptions`].
pub fn fit_empirical_bayes(sample: &SampleSummary, family: ModelFamily) -> Result<FitResult> {
    fit_with_options(sample, family, &FitOptions::default())
}

fn log_likelihood(sample: &SampleSummary, family: ModelFamily, sigma: f64, scale: f64) -> f64 {
    GibbsModel::from_params(family, sigma, scale)
        .and_then(|m| m.eppf_log_multiplicities(sample.multiplicities()))
        .map(|v| v.ln())
        .unwrap_or(f64::NEG_INFINITY)
}

/// Total order used to pick the best grid point: likelihood first, then
/// smaller σ, then smaller scale.
fn better(a: &FitPoint, b: &FitPoint) -> bool {
    a.log_likelihood
        .total_cmp(&b.log_likelihood)
        .then(b.sigma.total_cmp(&a.sigma))
        .then(b.scale.total_cmp(&a.scale))
        .is_gt()
}

pub fn fit_with_options(sample: &SampleSummary, family: ModelFamily, options: &FitOptions) -> Result<FitResult> {
    if family == ModelFamily::GeneralizedGamma && sample.n() > gg_max_n() {
        return Err(GibbsError::Precision {
            what: format!(
                "generalized gamma fit at n = {} (weights are limited to n <= {})",
                sample.n(),
                gg_max_n()
            ),
            bits: 0,
        });
    }
    let sigmas = match family {
        ModelFamily::Dirichlet => vec![0.0],
        _ => options.sigma_grid(),
    };
    let scales = options.scale_grid();
    if sigmas.is_empty() || scales.is_empty() {
        return Err(GibbsError::validation("fit grid is empty"));
    }
    let grid: Vec<(f64, f64)> = sigmas
        .iter()
        .flat_map(|&s| scales.iter().map(move |&t| (s, t)))
        .collect();
    let mut trace: Vec<FitPoint> = grid
        .par_iter()
        .map(|&(sigma, scale)| FitPoint {
            sigma,
            scale,
            log_likelihood: log_likelihood(sample, family, sigma, scale),
        })
        .collect();
    let start = trace
        .iter()
        .copied()
        .reduce(|a, b| if better(&b, &a) { b } else { a })
        .expect("grid is nonempty");
    if !start.log_likelihood.is_finite() {
        return Err(GibbsError::Range(
            "log-likelihood is not finite anywhere on the fit grid".into(),
        ));
    }

    let decade_step = std::f64::consts::LN_10 / options.scale_per_decade as f64;
    let mut point = match family {
        ModelFamily::Dirichlet => vec![start.scale.ln()],
        _ => vec![logit(start.sigma / (1.0 - EPS)), to_v(family, start.sigma, start.scale)],
    };
    let steps = match family {
        ModelFamily::Dirichlet => vec![decade_step],
        _ => vec![
            options.sigma_step / (start.sigma * (1.0 - start.sigma)).max(1e-3),
            decade_step,
        ],
    };
    // Each pass runs the simplex to numerical flatness; a fresh simplex is
    // then started at the best point. The fit has converged once a pass
    // improves the log-likelihood by no more than `rel_tol`.
    let mut best = start.log_likelihood;
    let mut evaluations = 0;
    let mut converged = false;
    while evaluations < options.max_evals {
        let outcome = simplex::maximize(
            |x| {
                let (sigma, scale) = match family {
                    ModelFamily::Dirichlet => (0.0, x[0].exp()),
                    _ => from_uv(family, x[0], x[1]),
                };
                let ll = log_likelihood(sample, family, sigma, scale);
                trace.push(FitPoint {
                    sigma,
                    scale,
                    log_likelihood: ll,
                });
                ll
            },
            &point,
            &steps,
            FLAT_TOL,
            COORD_TOL,
            options.max_evals - evaluations,
        );
        evaluations += outcome.evaluations;
        let gain = outcome.value - best;
        if outcome.value >= best {
            best = outcome.value;
            point = outcome.point;
        }
        if outcome.converged && gain <= options.rel_tol * best.abs().max(1.0) {
            converged = true;
            break;
        }
    }

    let (sigma, scale) = match family {
        ModelFamily::Dirichlet => (0.0, point[0].exp()),
        _ => from_uv(family, point[0], point[1]),
    };
    let model = GibbsModel::from_params(family, sigma, scale)?;
    let log_likelihood = model.eppf_log_multiplicities(sample.multiplicities())?.ln();
    let half = options.sigma_step / 2.0;
    let boundary = (family != ModelFamily::Dirichlet && (sigma < half || sigma > 1.0 - half))
        || scale < options.scale_min
        || scale > options.scale_max;
    Ok(FitResult {
        model,
        log_likelihood,
        trace,
        converged,
        boundary,
    })
}

fn logistic(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn to_v(family: ModelFamily, sigma: f64, scale: f64) -> f64 {
    match family {
        ModelFamily::PoissonDirichlet => (scale + sigma - EPS).ln(),
        _ => scale.ln(),
    }
}

fn from_uv(family: ModelFamily, u: f64, v: f64) -> (f64, f64) {
    let sigma = (1.0 - EPS) * logistic(u);
    let scale = match family {
        ModelFamily::PoissonDirichlet => v.exp() - sigma + EPS,
        _ => v.exp(),
    };
    (sigma, scale)
}

/// Log-likelihood on a grid, `result[i][k]` at `(sigma_grid[i],
/// scale_grid[k])`. Infeasible points are errors.
pub fn likelihood_surface(
    sample: &SampleSummary,
    family: ModelFamily,
    sigma_grid: &[f64],
    scale_grid: &[f64],
) -> Result<Vec<Vec<f64>>> {
    if sigma_grid.is_empty() || scale_grid.is_empty() {
        return Err(GibbsError::validation("likelihood surface needs nonempty grids"));
    }
    sigma_grid
        .par_iter()
        .map(|&sigma| {
            scale_grid
                .iter()
                .map(|&scale| {
                    let model = GibbsModel::from_params(family, sigma, scale)?;
                    Ok(model.eppf_log_multiplicities(sample.multiplicities())?.ln())
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grids() {
        let o = FitOptions::default();
        let s = o.sigma_grid();
        assert_eq!(s.len(), 99);
        assert!((s[0] - 0.01).abs() < 1e-15 && (s[98] - 0.99).abs() < 1e-12);
        let t = o.scale_grid();
        assert_eq!(t.len(), 57);
        assert!((t[0] - 1e-2).abs() < 1e-15 && (t[56] / 1e5 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coordinates_round_trip() {
        for &(s, t) in &[(0.34, 33.0), (0.612, 741.0), (0.2, -0.1)] {
            let u = logit(s / (1.0 - EPS));
            let v = to_v(ModelFamily::PoissonDirichlet, s, t);
            let (s2, t2) = from_uv(ModelFamily::PoissonDirichlet, u, v);
            assert!((s - s2).abs() < 1e-12 && (t - t2).abs() < 1e-9 * t.abs().max(1.0));
        }
    }

    #[test]
    fn dirichlet_fit_matches_one_dimensional_optimum() {
        let sample = SampleSummary::from_frequencies(vec![5, 3, 1, 1, 2, 1, 1]).unwrap();
        let fit = fit_empirical_bayes(&sample, ModelFamily::Dirichlet).unwrap();
        assert!(fit.converged);
        // the score equation k/θ = Σ_{i<n} 1/(θ+i) at the optimum
        let theta = fit.model.scale();
        let score = 7.0 / theta - (0..14).map(|i| 1.0 / (theta + i as f64)).sum::<f64>();
        assert!(score.abs() < 1e-3, "score {score} at theta {theta}");
    }

    #[test]
    fn gg_cap_is_checked_upfront() {
        let sample = SampleSummary::canonical(gg_max_n() + 1, 3).unwrap();
        assert!(matches!(
            fit_empirical_bayes(&sample, ModelFamily::GeneralizedGamma),
            Err(GibbsError::Precision { .. })
        ));
    }
}

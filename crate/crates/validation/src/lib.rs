//! Acceptance checks for `gibbs-core`. Each criterion is a function that
//! runs the library against published reference numbers, exact enumeration
//! or exact identities, and returns an [`Outcome`] listing what went wrong.

use std::time::Instant;

use gibbs_core::combinatorics::{
    chu_vandermonde_sides, ln_binom, log_noncentral_scaled, log_rising_factorial, log_signless_stirling, log_sum_exp,
    LogCoeffTable,
};
use gibbs_core::fitting::fit_empirical_bayes;
use gibbs_core::prediction::*;
use gibbs_core::retrodiction::{
    avoidance_probability, avoidance_probability_generic, avoidance_probability_staged, RetainedSet,
};
use gibbs_core::simulation::{enumerate_conditional, mc_compare, RngStream};
use gibbs_core::workbench::{crossval, predict_report, Dataset};
use gibbs_core::{GibbsModel, ModelFamily, Result, SampleSummary};

/// Seed shared by the randomized criteria.
pub const SEED: u64 = 2026;

/// Result of one criterion.
#[derive(Debug)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub failures: Vec<String>,
    pub notes: Vec<String>,
    pub seconds: f64,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// `PASS`/`FAIL` line, followed by indented details.
    pub fn report(&self) -> String {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let mut out = format!(
            "{verdict} criterion {:>2}: {} ({:.1} s)",
            self.id, self.title, self.seconds
        );
        for f in &self.failures {
            out.push_str(&format!("\n    x {f}"));
        }
        for n in &self.notes {
            out.push_str(&format!("\n      {n}"));
        }
        out
    }
}

#[derive(Default)]
struct Checks {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn within(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        if !((got - want).abs() <= tol) {
            self.failures
                .push(format!("{what} = {got:.5}, expected {want} ± {tol}"));
        }
    }

    fn check(&mut self, ok: bool, failure: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(failure());
        }
    }

    fn note(&mut self, text: String) {
        self.notes.push(text);
    }
}

fn run(id: u8, title: &'static str, body: impl FnOnce(&mut Checks) -> Result<()>) -> Outcome {
    let start = Instant::now();
    let mut c = Checks::default();
    if let Err(e) = body(&mut c) {
        c.failures.push(format!("error: {e}"));
    }
    Outcome {
        id,
        title,
        failures: c.failures,
        notes: c.notes,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn pd(sigma: f64, theta: f64) -> GibbsModel {
    GibbsModel::poisson_dirichlet(sigma, theta).expect("valid parameters")
}

/// Every criterion, in order.
pub const CRITERIA: [fn() -> Outcome; 10] = [
    fitted_parameters,
    library_estimators,
    configuration_odds_at_estimates,
    library_unseen_probabilities,
    tomato_prediction_table,
    tomato_unseen_probabilities,
    oracle_equivalence,
    identity_suite,
    monte_carlo_gate,
    tomato_cross_validation,
];

pub fn fitted_parameters() -> Outcome {
    run(1, "empirical Bayes fits dominate the published parameters", |c| {
        for (data, sigma, theta) in [
            (Dataset::library1(), 0.34, 33.0),
            (Dataset::library2(), 0.26, 12.0),
            (Dataset::tomato(), 0.612, 741.0),
        ] {
            let name = data.name().to_string();
            let start = Instant::now();
            let fit = fit_empirical_bayes(data.summary(), ModelFamily::PoissonDirichlet)?;
            let secs = start.elapsed().as_secs_f64();
            let published = pd(sigma, theta).eppf_log_multiplicities(data.multiplicities())?.ln();
            c.check(fit.log_likelihood >= published - 1e-9, || {
                format!(
                    "{name}: log-likelihood {:.6} below the published point's {published:.6}",
                    fit.log_likelihood
                )
            });
            c.within(&format!("{name} sigma"), fit.model.sigma(), sigma, 0.03);
            let rel = fit.model.scale() / theta - 1.0;
            c.check(rel.abs() <= 0.15, || {
                format!(
                    "{name}: theta {:.2} is {:+.1}% off {theta}",
                    fit.model.scale(),
                    100.0 * rel
                )
            });
            c.check(secs < 30.0, || format!("{name}: fit took {secs:.1} s"));
            c.note(format!(
                "{name}: sigma {:.4}, theta {:.2}, log-lik {:.4} (published point {published:.4}), {secs:.2} s",
                fit.model.sigma(),
                fit.model.scale(),
                fit.log_likelihood
            ));
        }
        Ok(())
    })
}

pub fn library_estimators() -> Outcome {
    run(2, "expected new genes and average expression levels, m = 100", |c| {
        for (data, model, k, l, a_m, a_total) in [
            (Dataset::library1(), pd(0.34, 33.0), 33.0, 40.0, 1.21, 2.17),
            (Dataset::library2(), pd(0.26, 12.0), 15.0, 19.0, 1.28, 3.85),
        ] {
            let name = data.name();
            let m = 100;
            let ek = expected_new_clusters(&model, data.summary(), m)?;
            let el = expected_new_observations(&model, data.summary(), m)?;
            let (am, at) = average_expression(data.summary(), m, ek, el)?;
            c.within(&format!("{name} E[K]"), ek, k, 1.0);
            c.within(&format!("{name} E[L]"), el, l, 1.0);
            c.within(&format!("{name} A_m"), am, a_m, 0.02);
            c.within(&format!("{name} A_n+m"), at, a_total, 0.02);
            c.note(format!(
                "{name}: E[K] {ek:.3}, E[L] {el:.3}, A_m {am:.4}, A_n+m {at:.4}"
            ));
        }
        Ok(())
    })
}

pub fn configuration_odds_at_estimates() -> Outcome {
    run(3, "odds between new-gene configurations", |c| {
        for (sigma, a, b, want, tol) in [
            (0.34, "32x1+1x8", "26x1+7x2", 34346.0, 34346.0 * 0.005),
            (0.34, "32x1+1x8", "31x1+1x4+1x5", 60.0, 1.0),
            (0.26, "14x1+1x5", "11x1+4x2", 44.0, 1.0),
            (0.26, "14x1+1x5", "13x1+1x2+1x4", 5.0, 0.3),
        ] {
            let odds = configuration_odds(sigma, &a.parse()?, &b.parse()?)?;
            c.within(&format!("odds {a} : {b} at sigma {sigma}"), odds, want, tol);
            c.note(format!("{a} : {b} = {odds:.3}"));
        }
        Ok(())
    })
}

fn unseen(model: &GibbsModel, sample: &SampleSummary, m: usize, levels: &[usize], count: Option<usize>) -> Result<f64> {
    avoidance_probability(
        model,
        sample,
        m,
        &RetainedSet::forbidding_levels(sample, levels, count)?,
    )
}

pub fn library_unseen_probabilities() -> Outcome {
    run(
        4,
        "probabilities of not re-observing genes in the libraries, m = 10",
        |c| {
            type Case = (Dataset, GibbsModel, &'static str, Vec<usize>, Option<usize>, f64);
            let cases: [Case; 5] = [
                (
                    Dataset::library1(),
                    pd(0.34, 33.0),
                    "the level-10 gene",
                    vec![10],
                    None,
                    0.482,
                ),
                (
                    Dataset::library1(),
                    pd(0.34, 33.0),
                    "all 40 level-1 genes",
                    vec![1],
                    None,
                    0.118,
                ),
                (
                    Dataset::library1(),
                    pd(0.34, 33.0),
                    "10 of the level-1 genes",
                    vec![1],
                    Some(10),
                    0.611,
                ),
                (
                    Dataset::library2(),
                    pd(0.26, 12.0),
                    "the level-20 gene",
                    vec![20],
                    None,
                    0.156,
                ),
                (
                    Dataset::library2(),
                    pd(0.26, 12.0),
                    "all 20 level-1 genes",
                    vec![1],
                    None,
                    0.257,
                ),
            ];
            for (data, model, what, levels, count, want) in cases {
                let p = unseen(&model, data.summary(), 10, &levels, count)?;
                c.within(&format!("{}: {what}", data.name()), p, want, 0.002);
                c.note(format!("{}: {what}: {p:.5}", data.name()));
            }
            Ok(())
        },
    )
}

pub fn tomato_prediction_table() -> Outcome {
    run(5, "tomato predictions, HPD intervals and average expression", |c| {
        let start = Instant::now();
        let report = predict_report(&Dataset::tomato(), &pd(0.612, 741.0), &[250, 500, 750, 1000], 0.95)?;
        let secs = start.elapsed().as_secs_f64();
        let published = [
            (138.0, (122, 156), 140.0, (124, 155), 1.014, 1.445),
            (272.0, (249, 297), 279.0, (256, 302), 1.026, 1.471),
            (402.0, (373, 433), 419.0, (390, 448), 1.042, 1.498),
            (530.0, (496, 566), 558.0, (523, 593), 1.053, 1.522),
        ];
        for (row, (k, k_hpd, l, l_hpd, a_m, a_total)) in report.rows.iter().zip(published) {
            let m = row.m;
            c.within(&format!("m={m} K"), row.k_hat, k, 1.0);
            c.within(&format!("m={m} L"), row.l_hat, l, 1.0);
            c.within(
                &format!("m={m} K HPD lower"),
                row.k_hpd.lower as f64,
                k_hpd.0 as f64,
                2.0,
            );
            c.within(
                &format!("m={m} K HPD upper"),
                row.k_hpd.upper as f64,
                k_hpd.1 as f64,
                2.0,
            );
            c.within(
                &format!("m={m} L HPD lower"),
                row.l_hpd.lower as f64,
                l_hpd.0 as f64,
                2.0,
            );
            c.within(
                &format!("m={m} L HPD upper"),
                row.l_hpd.upper as f64,
                l_hpd.1 as f64,
                2.0,
            );
            c.within(&format!("m={m} A_m"), row.a_m, a_m, 0.002);
            c.within(&format!("m={m} A_n+m"), row.a_total, a_total, 0.002);
            c.note(format!(
                "m={m}: K {:.2} ({}, {}), L {:.2} ({}, {}), A_m {:.5}, A_n+m {:.5}",
                row.k_hat,
                row.k_hpd.lower,
                row.k_hpd.upper,
                row.l_hat,
                row.l_hpd.lower,
                row.l_hpd.upper,
                row.a_m,
                row.a_total
            ));
        }
        c.check(secs < 120.0, || format!("table took {secs:.1} s"));
        Ok(())
    })
}

pub fn tomato_unseen_probabilities() -> Outcome {
    run(6, "probabilities of not re-observing tomato genes", |c| {
        let data = Dataset::tomato();
        let sample = data.summary();
        let model = pd(0.612, 741.0);
        let high: Vec<usize> = data.multiplicities().keys().copied().filter(|&l| l > 10).collect();
        let genes: usize = high.iter().map(|l| data.multiplicities()[l]).sum();
        c.check(genes == 9, || format!("{genes} genes above level 10, expected 9"));
        c.check(data.multiplicities().get(&3) == Some(&71), || {
            "expected 71 level-3 genes".into()
        });
        for (what, levels, want) in [
            ("genes above level 10", high.clone(), [0.656, 0.123, 0.016]),
            ("the level-3 genes", vec![3], [0.593, 0.075, 0.006]),
        ] {
            for (m, want) in [10, 50, 100].into_iter().zip(want) {
                let p = unseen(&model, sample, m, &levels, None)?;
                c.within(&format!("{what}, m={m}"), p, want, 0.002);
                c.note(format!("{what}, m={m}: {p:.5}"));
            }
        }
        Ok(())
    })
}

/// Integer partitions of `n`, parts in decreasing order.
fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for p in (1..=rest.min(max)).rev() {
            cur.push(p);
            go(rest - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}

/// Largest absolute deviation seen, with where it happened.
#[derive(Default)]
struct Worst {
    compared: usize,
    value: f64,
    at: String,
}

impl Worst {
    fn see(&mut self, got: f64, want: f64, at: impl FnOnce() -> String) {
        self.compared += 1;
        let d = (got - want).abs();
        if !(d <= self.value) {
            self.value = if d.is_nan() { f64::INFINITY } else { d };
            self.at = at();
        }
    }
}

fn oracle_one(model: &GibbsModel, sample: &SampleSummary, m: usize, w: &mut Worst) -> Result<()> {
    let (n, j) = (sample.n(), sample.j());
    let ctx = || format!("{model} {:?} m={m}", sample.frequencies());
    let table = enumerate_conditional(model, sample, m)?;
    let kl_o = table.kl_marginal();
    let k_o = table.k_marginal();
    let l_o = table.l_marginal();

    let kl = kl_joint_distribution(model, sample, m)?;
    for (&key, &p) in &kl_o {
        w.see(kl.prob(key), p, || format!("(K,L)={key:?} {}", ctx()));
    }
    let k = k_distribution(model, sample, m)?;
    for (&x, &p) in &k_o {
        w.see(k.prob(x), p, || format!("K={x} {}", ctx()));
    }
    let l = l_distribution(model, sample, m)?;
    let lg = l_distribution_generic(model, sample, m)?;
    for (&x, &p) in &l_o {
        w.see(l.prob(x), p, || format!("L={x} {}", ctx()));
        w.see(lg.prob(x), p, || format!("generic L={x} {}", ctx()));
    }
    let mean_k: f64 = k_o.iter().map(|(&x, p)| x as f64 * p).sum();
    let mean_l: f64 = l_o.iter().map(|(&x, p)| x as f64 * p).sum();
    w.see(expected_new_clusters(model, sample, m)?, mean_k, || {
        format!("E[K] {}", ctx())
    });
    w.see(expected_new_observations(model, sample, m)?, mean_l, || {
        format!("E[L] {}", ctx())
    });
    w.see(expected_new_observations_by_sum(model, sample, m)?, mean_l, || {
        format!("E[L] by sum {}", ctx())
    });

    for kk in 1..=m {
        let d = l_given_k_distribution(model.sigma(), n, j, m, kk)?;
        for s in kk..=m {
            let p = kl_o.get(&(kk, s)).copied().unwrap_or(0.0) / k_o[&kk];
            w.see(d.prob(s), p, || format!("L={s}|K={kk} {}", ctx()));
        }
    }
    for s in 0..=m {
        let d = k_given_l_distribution(model, sample, m, s)?;
        for kk in 0..=s {
            let p = kl_o.get(&(kk, s)).copied().unwrap_or(0.0) / l_o[&s];
            w.see(d.prob(kk), p, || format!("K={kk}|L={s} {}", ctx()));
        }
    }

    for (comp, p) in table.composition_marginal() {
        let cfg = NewClusterConfiguration::new(comp)?;
        let count = cfg.log_ordered_realizations();
        let joint = joint_config_logprob(model, sample, m, &cfg)?.ln() + count;
        w.see(joint.exp(), p, || format!("joint {cfg} {}", ctx()));
        if cfg.k() == 0 {
            continue;
        }
        let (kk, s) = (cfg.k(), cfg.s());
        let given_l = conditional_config_logprob(model, sample, m, &cfg)?.ln() + count;
        w.see(given_l.exp(), p / l_o[&s], || format!("{cfg} | L {}", ctx()));
        let given_kl = config_given_k_l_logprob(model.sigma(), &cfg)?.ln() + count;
        w.see(given_kl.exp(), p / kl_o[&(kk, s)], || format!("{cfg} | K,L {}", ctx()));
        let generic = conditional_eppf_weight_generic(model, m, n, j, s, kk)?.ln();
        let fast = conditional_eppf_weight(model, m, n, j, s, kk)?.ln();
        w.see(fast.exp(), generic.exp(), || {
            format!("conditional weight s={s} k={kk} {}", ctx())
        });
    }

    for mask in 1u32..(1 << j) {
        let retained = RetainedSet::new(sample, (0..j).filter(|i| mask & (1 << i) != 0))?;
        let p = table.avoidance(&retained);
        let at = |path: &str| format!("{path} avoidance, retained mask {mask:b} {}", ctx());
        w.see(avoidance_probability(model, sample, m, &retained)?, p, || {
            at("closed-form")
        });
        w.see(avoidance_probability_generic(model, sample, m, &retained)?, p, || {
            at("generic")
        });
        w.see(avoidance_probability_staged(model, sample, m, &retained)?, p, || {
            at("staged")
        });
    }
    Ok(())
}

pub fn oracle_equivalence() -> Outcome {
    run(7, "every exact law matches enumeration for n + m <= 8", |c| {
        let models = [
            GibbsModel::dirichlet(0.7)?,
            GibbsModel::dirichlet(3.0)?,
            pd(0.3, 1.5),
            pd(0.6, -0.4),
            GibbsModel::generalized_gamma(0.3, 0.5)?,
            GibbsModel::generalized_gamma(0.7, 2.0)?,
        ];
        let mut w = Worst::default();
        for model in &models {
            for n in 1..8 {
                for p in partitions(n) {
                    let sample = SampleSummary::from_frequencies(p)?;
                    for m in 1..=8 - n {
                        oracle_one(model, &sample, m, &mut w)?;
                    }
                }
            }
        }
        c.check(w.value <= 1e-10, || format!("deviation {:.3e} at {}", w.value, w.at));
        c.note(format!("{} comparisons, largest deviation {:.2e}", w.compared, w.value));
        Ok(())
    })
}

pub fn identity_suite() -> Outcome {
    run(8, "exact identities", |c| {
        let models = [
            GibbsModel::dirichlet(0.4)?,
            GibbsModel::dirichlet(25.0)?,
            pd(0.34, 33.0),
            pd(0.8, -0.5),
            GibbsModel::generalized_gamma(0.25, 0.5)?,
            GibbsModel::generalized_gamma(0.6, 2.0)?,
        ];

        // addition rule
        let mut worst = 0.0f64;
        for model in &models {
            for n in 1..=10 {
                for p in partitions(n) {
                    let here = model.eppf_log(&p)?.ln();
                    let mut terms = Vec::new();
                    for i in 0..=p.len() {
                        let mut q = p.clone();
                        if i == p.len() {
                            q.push(1);
                        } else {
                            q[i] += 1;
                        }
                        terms.push(model.eppf_log(&q)?.ln());
                    }
                    worst = worst.max((log_sum_exp(&terms) - here).exp_m1().abs());
                }
            }
        }
        c.check(worst < 1e-10, || format!("addition rule off by {worst:.2e}"));
        c.note(format!("addition rule: {worst:.2e}"));

        // forward recursion of the weights
        let mut worst = 0.0f64;
        for model in models.iter().chain([&pd(0.612, 741.0)]) {
            let max_n = if model.family() == ModelFamily::GeneralizedGamma {
                120
            } else {
                3000
            };
            let mut n: usize = 1;
            while n < max_n {
                for k in [1, n.div_ceil(3), n.div_ceil(2), n] {
                    worst = worst.max(model.recursion_residual(n, k)?);
                }
                n = n * 3 / 2 + 1;
            }
        }
        c.check(worst < 1e-8, || format!("recursion residual {worst:.2e}"));
        c.note(format!("recursion residual: {worst:.2e}"));

        // two forms of E[L]
        let mut worst = 0.0f64;
        for model in &models {
            for (n, j, m) in [(4, 2, 6), (12, 6, 20), (30, 15, 20), (50, 50, 6), (100, 59, 20)] {
                let sample = SampleSummary::canonical(n, j)?;
                let a = expected_new_observations(model, &sample, m)?;
                let b = expected_new_observations_by_sum(model, &sample, m)?;
                worst = worst.max(((a - b) / a).abs());
            }
        }
        c.check(worst < 1e-9, || format!("E[L] forms differ by {worst:.2e}"));
        c.note(format!("E[L] forms: {worst:.2e}"));

        // normalization of the law of L
        let mut worst = 0.0f64;
        for (sigma, theta) in [(0.34, 33.0), (0.612, 741.0), (0.0, 2.5), (0.9, -0.85)] {
            for (n, j, m) in [
                (100usize, 59usize, 200usize),
                (10, 10, 40),
                (2586, 1825, 1000),
                (7, 1, 3),
            ] {
                let mut terms = Vec::with_capacity(m + 1);
                for s in 0..=m {
                    terms.push(
                        ln_binom(m, s)
                            + log_rising_factorial(n as f64 - j as f64 * sigma, m - s)?.ln()
                            + log_rising_factorial(theta + j as f64 * sigma, s)?.ln(),
                    );
                }
                let rhs = log_rising_factorial(theta + n as f64, m)?.ln();
                worst = worst.max((log_sum_exp(&terms) - rhs).exp_m1().abs());
            }
        }
        c.check(worst < 1e-10, || {
            format!("Chu-Vandermonde normalization off by {worst:.2e}")
        });
        c.note(format!("normalization of L: {worst:.2e}"));

        // quasi-conjugacy of the two-parameter family
        let mut worst = 0.0f64;
        for (sigma, theta) in [(0.34, 33.0), (0.5, -0.2), (0.612, 741.0)] {
            let model = pd(sigma, theta);
            for (m, n, j) in [(10usize, 5usize, 2usize), (40, 100, 59), (25, 12, 12)] {
                let updated = pd(sigma, theta + j as f64 * sigma);
                for s in 1..=m.min(20) {
                    for k in 1..=s {
                        let generic = conditional_eppf_weight_generic(&model, m, n, j, s, k)?.ln();
                        worst = worst.max((generic - updated.log_weight(s, k)?.ln()).abs());
                    }
                }
            }
        }
        c.check(worst < 1e-10, || format!("quasi-conjugacy off by {worst:.2e}"));
        c.note(format!("quasi-conjugacy: {worst:.2e}"));

        // multivariate Chu-Vandermonde, j <= 4 and q <= 6
        let mut worst = 0.0f64;
        let bases = [0.66, 0.5, 2.0, 1.0, 0.25, 3.5, 0.9];
        for j in 1..=4 {
            for q in 1..=6 {
                for shift in 0..bases.len() {
                    let a: Vec<f64> = (0..j).map(|i| bases[(shift + i) % bases.len()]).collect();
                    let n: Vec<usize> = (0..j).map(|i| 1 + (shift + 2 * i) % 4).collect();
                    let (lhs, rhs) = chu_vandermonde_sides(&a, &n, q)?;
                    worst = worst.max((lhs.ln() - rhs.ln()).abs());
                }
            }
        }
        c.check(worst < 1e-10, || {
            format!("multivariate Chu-Vandermonde off by {worst:.2e}")
        });
        c.note(format!("multivariate Chu-Vandermonde: {worst:.2e}"));

        // Stirling limits as sigma -> 0
        let sigma = 1e-6;
        let table = LogCoeffTable::build(sigma, 12)?;
        let mut worst = 0.0f64;
        for n in 1..=12 {
            for k in 1..=n {
                let got = table.log_scaled(n, k)?.ln();
                worst = worst.max((got - log_signless_stirling(n, k).ln()).exp_m1().abs());
                for gamma in [-0.5, -3.0] {
                    let mut terms = Vec::new();
                    for i in k..=n {
                        terms.push(
                            ln_binom(n, i)
                                + log_signless_stirling(i, k).ln()
                                + log_rising_factorial(-gamma, n - i)?.ln(),
                        );
                    }
                    let got = log_noncentral_scaled(n, k, sigma, gamma, &table)?.ln();
                    worst = worst.max((got - log_sum_exp(&terms)).exp_m1().abs());
                }
            }
        }
        c.check(worst < 1e-4, || format!("Stirling limit off by {worst:.2e}"));
        c.note(format!("Stirling limits: {worst:.2e}"));
        Ok(())
    })
}

pub fn monte_carlo_gate() -> Outcome {
    run(9, "simulated (K, L) agree with the exact laws, 10^6 replicates", |c| {
        let data = Dataset::library1();
        let start = Instant::now();
        let report = mc_compare(&pd(0.34, 33.0), data.summary(), 20, 1_000_000, &RngStream::new(SEED))?;
        let secs = start.elapsed().as_secs_f64();
        c.check(report.max_abs_z < 4.0, || format!("max |z| = {:.3}", report.max_abs_z));
        c.check(secs < 180.0, || format!("simulation took {secs:.1} s"));
        c.note(format!(
            "{} cells, max |z| {:.3}, z of mean L {:.3}, {secs:.1} s",
            report.kl.len() + report.k.len() + report.l.len(),
            report.max_abs_z,
            report.l_mean_z
        ));
        Ok(())
    })
}

pub fn tomato_cross_validation() -> Outcome {
    run(10, "tomato cross-validation, size 1000 x 10", |c| {
        let report = crossval(
            &Dataset::tomato(),
            1000,
            10,
            ModelFamily::PoissonDirichlet,
            0.95,
            &RngStream::new(SEED),
        )?;
        c.check(report.k_coverage >= 8, || {
            format!("K HPD coverage {}/10", report.k_coverage)
        });
        c.check(report.l_coverage >= 8, || {
            format!("L HPD coverage {}/10", report.l_coverage)
        });
        c.check(report.k_mean_abs_error <= 40.0, || {
            format!("K mean absolute error {:.1}", report.k_mean_abs_error)
        });
        c.check(report.l_mean_abs_error <= 40.0, || {
            format!("L mean absolute error {:.1}", report.l_mean_abs_error)
        });
        c.note(format!(
            "coverage K {}/10, L {}/10; mean absolute error K {:.1}, L {:.1}",
            report.k_coverage, report.l_coverage, report.k_mean_abs_error, report.l_mean_abs_error
        ));
        Ok(())
    })
}

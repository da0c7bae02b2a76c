//! Algebraic identities that hold exactly: addition rule, forward
//! recursion, the two forms of E[L], normalizations, quasi-conjugacy,
//! the multivariate Chu–Vandermonde formula and the σ → 0 limits.

use gibbs_core::combinatorics::{
    chu_vandermonde_sides, ln_binom, log_noncentral_coeff, log_noncentral_scaled, log_rising_factorial,
    log_signless_stirling, log_sum_exp, LogCoeffTable,
};
use gibbs_core::prediction::{conditional_eppf_weight, expected_new_observations, expected_new_observations_by_sum};
use gibbs_core::GibbsModel;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

fn families() -> Vec<GibbsModel> {
    vec![
        GibbsModel::dirichlet(0.4).unwrap(),
        GibbsModel::dirichlet(25.0).unwrap(),
        GibbsModel::poisson_dirichlet(0.34, 33.0).unwrap(),
        GibbsModel::poisson_dirichlet(0.8, -0.5).unwrap(),
        GibbsModel::generalized_gamma(0.25, 0.5).unwrap(),
        GibbsModel::generalized_gamma(0.6, 2.0).unwrap(),
    ]
}

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

#[test]
fn addition_rule() {
    for model in families() {
        for n in 1..=12 {
            for p in partitions(n) {
                let here = model.eppf_log(&p).unwrap().ln();
                let mut terms = Vec::new();
                for i in 0..p.len() {
                    let mut q = p.clone();
                    q[i] += 1;
                    terms.push(model.eppf_log(&q).unwrap().ln());
                }
                let mut q = p.clone();
                q.push(1);
                terms.push(model.eppf_log(&q).unwrap().ln());
                let rel = (log_sum_exp(&terms) - here).exp_m1().abs();
                assert!(rel < 1e-10, "{model} {p:?}: {rel:e}");
            }
        }
    }
}

#[test]
fn forward_recursion() {
    let mut models = families();
    models.push(GibbsModel::poisson_dirichlet(0.612, 741.0).unwrap());
    models.push(GibbsModel::dirichlet(1e4).unwrap());
    for model in models {
        let max_n = if model.family().tag() == "gg" { 120 } else { 3000 };
        let mut n: usize = 1;
        while n < max_n {
            for k in [1, n.div_ceil(3), n.div_ceil(2), n] {
                let r = model.recursion_residual(n, k).unwrap();
                assert!(r < 1e-8, "{model} n={n} k={k}: {r:e}");
            }
            n = n * 3 / 2 + 1;
        }
    }
}

#[test]
fn predictive_probabilities_sum_to_one() {
    for model in families() {
        let sizes = [5usize, 1, 3, 1, 2];
        let (n, j) = (12, 5);
        let total = model.new_cluster_prob(n, j).unwrap()
            + sizes
                .iter()
                .map(|&s| model.existing_cluster_prob(n, j, s).unwrap())
                .sum::<f64>();
        assert!((total - 1.0).abs() < 1e-12, "{model}: {total}");
    }
}

#[test]
fn two_forms_of_expected_new_observations() {
    for model in families() {
        let gg = model.family().tag() == "gg";
        for n in [1usize, 4, 12, 30, 50] {
            for j in [1, n.div_ceil(2), n] {
                for m in [1usize, 6, 20, 50] {
                    if gg && m > 20 && n > 12 {
                        continue;
                    }
                    let sample = gibbs_core::SampleSummary::canonical(n, j).unwrap();
                    let a = expected_new_observations(&model, &sample, m).unwrap();
                    let b = expected_new_observations_by_sum(&model, &sample, m).unwrap();
                    assert!(((a - b) / a).abs() < 1e-9, "{model} n={n} j={j} m={m}: {a} vs {b}");
                }
            }
        }
    }
}

#[test]
fn new_observation_law_is_normalized() {
    // Σ_s binom(m,s) (n-jσ)_{m-s} (θ+jσ)_s = (θ+n)_m
    for &(sigma, theta) in &[(0.34, 33.0), (0.612, 741.0), (0.0, 2.5), (0.9, -0.85)] {
        for &(n, j, m) in &[
            (100usize, 59usize, 200usize),
            (10, 10, 40),
            (2586, 1825, 1000),
            (7, 1, 3),
        ] {
            let terms: Vec<f64> = (0..=m)
                .map(|s| {
                    ln_binom(m, s)
                        + log_rising_factorial(n as f64 - j as f64 * sigma, m - s).unwrap().ln()
                        + log_rising_factorial(theta + j as f64 * sigma, s).unwrap().ln()
                })
                .collect();
            let rhs = log_rising_factorial(theta + n as f64, m).unwrap().ln();
            let rel = (log_sum_exp(&terms) - rhs).exp_m1().abs();
            assert!(rel < 1e-10, "σ={sigma} θ={theta} n={n} m={m}: {rel:e}");
        }
    }
}

#[test]
fn quasi_conjugacy() {
    for &(sigma, theta) in &[(0.34, 33.0), (0.5, -0.2), (0.612, 741.0)] {
        let model = GibbsModel::poisson_dirichlet(sigma, theta).unwrap();
        for &(m, n, j) in &[(10usize, 5usize, 2usize), (40, 100, 59), (25, 12, 12)] {
            let updated = GibbsModel::poisson_dirichlet(sigma, theta + j as f64 * sigma).unwrap();
            for s in 1..=m.min(20) {
                for k in 1..=s {
                    let generic = gibbs_core::prediction::conditional_eppf_weight_generic(&model, m, n, j, s, k)
                        .unwrap()
                        .ln();
                    let expected = updated.log_weight(s, k).unwrap().ln();
                    assert!((generic - expected).abs() < 1e-10, "σ={sigma} m={m} s={s} k={k}");
                }
            }
        }
    }
    // the generalized gamma family is not quasi-conjugate: the conditional
    // weights move with (m, n) at fixed (s, k, j)
    let gg = GibbsModel::generalized_gamma(0.5, 1.0).unwrap();
    let a = conditional_eppf_weight(&gg, 5, 6, 3, 4, 2).unwrap().ln();
    let b = conditional_eppf_weight(&gg, 12, 20, 3, 4, 2).unwrap().ln();
    assert!((a - b).abs() > 1e-6, "{a} {b}");
}

#[test]
fn multivariate_chu_vandermonde() {
    let cases: &[(&[f64], &[usize], usize)] = &[
        (&[0.66], &[4], 7),
        (&[0.5, 2.0], &[1, 3], 6),
        (&[0.66, 0.66, 0.66], &[2, 1, 5], 8),
        (&[1.0, 0.25, 3.5, 0.9], &[1, 1, 2, 7], 9),
        (&[0.388; 6], &[1, 1, 1, 2, 3, 10], 10),
    ];
    for &(a, n, q) in cases {
        let (lhs, rhs) = chu_vandermonde_sides(a, n, q).unwrap();
        assert!((lhs.ln() - rhs.ln()).abs() < 1e-10, "{a:?} {n:?} q={q}");
    }
}

#[test]
fn stirling_limits() {
    let sigma = 1e-6;
    let table = LogCoeffTable::build(sigma, 12).unwrap();
    for n in 1..=12 {
        for k in 1..=n {
            let got = table.log_scaled(n, k).unwrap().ln();
            let want = log_signless_stirling(n, k).ln();
            assert!((got - want).exp_m1().abs() < 1e-4, "n={n} k={k}");
        }
    }
    // noncentral: Σ_i binom(n,i) |s(i,k)| (-γ)_{n-i}
    for &gamma in &[-0.5, -3.0] {
        for n in 1..=12 {
            for k in 1..=n {
                let terms: Vec<f64> = (k..=n)
                    .map(|i| {
                        ln_binom(n, i)
                            + log_signless_stirling(i, k).ln()
                            + log_rising_factorial(-gamma, n - i).unwrap().ln()
                    })
                    .collect();
                let got = log_noncentral_scaled(n, k, sigma, gamma, &table).unwrap().ln();
                assert!(
                    (got - log_sum_exp(&terms)).exp_m1().abs() < 1e-4,
                    "γ={gamma} n={n} k={k}"
                );
            }
        }
    }
}

#[test]
fn stirling_row_generates_rising_factorial() {
    for &theta in &[0.5f64, 1.0, 3.0] {
        for s in 1..=10 {
            let terms: Vec<f64> = (1..=s)
                .map(|i| i as f64 * theta.ln() + log_signless_stirling(s, i).ln())
                .collect();
            let want = log_rising_factorial(theta, s).unwrap().ln();
            assert!((log_sum_exp(&terms) - want).abs() < 1e-12);
        }
    }
}

/// `(x)_n` over the rationals.
fn rising(x: &BigRational, n: usize) -> BigRational {
    let mut acc = BigRational::one();
    let mut y = x.clone();
    for _ in 0..n {
        acc *= &y;
        y += BigRational::one();
    }
    acc
}

/// Exact alternating sum `C(n,k;σ,γ) = 1/k! Σ_i (-1)^i binom(k,i) (-iσ-γ)_n`.
fn exact_coeff(n: usize, k: usize, sigma: &BigRational, gamma: &BigRational) -> BigRational {
    let mut sum = BigRational::zero();
    let mut binom = BigInt::one();
    for i in 0..=k {
        let x = -(sigma * BigRational::from_integer(BigInt::from(i))) - gamma;
        let term = BigRational::from_integer(binom.clone()) * rising(&x, n);
        if i % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        binom = binom * BigInt::from(k - i) / BigInt::from(i + 1);
    }
    let fact: BigInt = (1..=k).map(BigInt::from).product();
    sum / BigRational::from_integer(fact)
}

fn ln_rational(x: &BigRational) -> f64 {
    // scale into f64 range before taking the log
    let shift = x.numer().bits() as i64 - x.denom().bits() as i64;
    let scaled = if shift > 0 {
        x / BigRational::from_integer(BigInt::one() << shift as usize)
    } else {
        x * BigRational::from_integer(BigInt::one() << (-shift) as usize)
    };
    scaled.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

#[test]
fn coefficients_match_exact_alternating_sum() {
    for &(p, q) in &[(1i64, 2i64), (1, 3), (3, 4), (1, 10)] {
        let sigma = BigRational::new(p.into(), q.into());
        let sf = p as f64 / q as f64;
        let table = LogCoeffTable::build(sf, 30).unwrap();
        for n in 1..=30 {
            for k in 1..=n {
                let exact = exact_coeff(n, k, &sigma, &BigRational::zero());
                let got = table.log_coeff(n, k).unwrap().ln();
                assert!((got - ln_rational(&exact)).abs() < 1e-12, "σ={sf} n={n} k={k}");
            }
        }
        for &(gp, gq) in &[(-7i64, 2i64), (-40, 1)] {
            let gamma = BigRational::new(gp.into(), gq.into());
            let gf = gp as f64 / gq as f64;
            for n in 1..=20 {
                for k in 1..=n {
                    let exact = exact_coeff(n, k, &sigma, &gamma);
                    let got = log_noncentral_coeff(n, k, sf, gf, &table).unwrap().ln();
                    assert!((got - ln_rational(&exact)).abs() < 1e-11, "σ={sf} γ={gf} n={n} k={k}");
                }
            }
        }
    }
}

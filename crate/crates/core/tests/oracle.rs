//! Every exact distribution against brute-force enumeration of the
//! predictive chain, for all observed samples with n + m <= 8.

use gibbs_core::prediction::*;
use gibbs_core::retrodiction::{
    avoidance_probability, avoidance_probability_generic, avoidance_probability_staged, RetainedSet,
};
use gibbs_core::simulation::enumerate_conditional;
use gibbs_core::{GibbsModel, SampleSummary};

const TOL: f64 = 1e-10;
const MAX_TOTAL: usize = 8;

fn models() -> Vec<GibbsModel> {
    vec![
        GibbsModel::dirichlet(0.7).unwrap(),
        GibbsModel::dirichlet(3.0).unwrap(),
        GibbsModel::poisson_dirichlet(0.3, 1.5).unwrap(),
        GibbsModel::poisson_dirichlet(0.6, -0.4).unwrap(),
        GibbsModel::generalized_gamma(0.3, 0.5).unwrap(),
        GibbsModel::generalized_gamma(0.7, 2.0).unwrap(),
    ]
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

fn cases() -> Vec<(SampleSummary, usize)> {
    let mut out = Vec::new();
    for n in 1..MAX_TOTAL {
        for p in partitions(n) {
            for m in 1..=MAX_TOTAL - n {
                out.push((SampleSummary::from_frequencies(p.clone()).unwrap(), m));
            }
        }
    }
    out
}

fn close(a: f64, b: f64, what: &str) {
    assert!((a - b).abs() <= TOL, "{what}: {a} vs {b}");
}

#[test]
fn joint_and_marginal_laws() {
    for model in models() {
        for (sample, m) in cases() {
            let table = enumerate_conditional(&model, &sample, m).unwrap();
            close(table.total(), 1.0, "total");
            let ctx = format!("{model} {:?} m={m}", sample.frequencies());

            let kl = kl_joint_distribution(&model, &sample, m).unwrap();
            let kl_o = table.kl_marginal();
            assert_eq!(kl.len(), kl_o.len(), "{ctx}");
            for (&key, &p) in &kl_o {
                close(kl.prob(key), p, &format!("kl {key:?} {ctx}"));
            }
            let k = k_distribution(&model, &sample, m).unwrap();
            for (&x, &p) in &table.k_marginal() {
                close(k.prob(x), p, &format!("k={x} {ctx}"));
            }
            let l_o = table.l_marginal();
            let l = l_distribution(&model, &sample, m).unwrap();
            let lg = l_distribution_generic(&model, &sample, m).unwrap();
            for (&x, &p) in &l_o {
                close(l.prob(x), p, &format!("l={x} {ctx}"));
                close(lg.prob(x), p, &format!("generic l={x} {ctx}"));
            }

            let mean_k: f64 = table.k_marginal().iter().map(|(&x, p)| x as f64 * p).sum();
            let mean_l: f64 = l_o.iter().map(|(&x, p)| x as f64 * p).sum();
            close(expected_new_clusters(&model, &sample, m).unwrap(), mean_k, &ctx);
            close(expected_new_observations(&model, &sample, m).unwrap(), mean_l, &ctx);
            close(
                expected_new_observations_by_sum(&model, &sample, m).unwrap(),
                mean_l,
                &ctx,
            );
        }
    }
}

#[test]
fn conditional_laws() {
    for model in models() {
        for (sample, m) in cases() {
            let (n, j) = (sample.n(), sample.j());
            let table = enumerate_conditional(&model, &sample, m).unwrap();
            let kl_o = table.kl_marginal();
            let k_o = table.k_marginal();
            let l_o = table.l_marginal();
            let ctx = format!("{model} {:?} m={m}", sample.frequencies());
            for k in 1..=m {
                let d = l_given_k_distribution(model.sigma(), n, j, m, k).unwrap();
                for s in k..=m {
                    let p = kl_o.get(&(k, s)).copied().unwrap_or(0.0) / k_o[&k];
                    close(d.prob(s), p, &format!("l|k={k} s={s} {ctx}"));
                }
            }
            for s in 0..=m {
                let d = k_given_l_distribution(&model, &sample, m, s).unwrap();
                for k in 0..=s {
                    let p = kl_o.get(&(k, s)).copied().unwrap_or(0.0) / l_o[&s];
                    close(d.prob(k), p, &format!("k|l={s} k={k} {ctx}"));
                }
            }
        }
    }
}

#[test]
fn configuration_laws() {
    for model in models() {
        for (sample, m) in cases() {
            let table = enumerate_conditional(&model, &sample, m).unwrap();
            let kl_o = table.kl_marginal();
            let l_o = table.l_marginal();
            let ctx = format!("{model} {:?} m={m}", sample.frequencies());
            for (comp, p) in table.composition_marginal() {
                let cfg = NewClusterConfiguration::new(comp.clone()).unwrap();
                let count = cfg.log_ordered_realizations();
                let joint = joint_config_logprob(&model, &sample, m, &cfg).unwrap().ln() + count;
                close(joint.exp(), p, &format!("joint {cfg} {ctx}"));
                if cfg.k() == 0 {
                    continue;
                }
                let (k, s) = (cfg.k(), cfg.s());
                let given_l = conditional_config_logprob(&model, &sample, m, &cfg).unwrap().ln() + count;
                close(given_l.exp(), p / l_o[&s], &format!("config | L {cfg} {ctx}"));
                let given_kl = config_given_k_l_logprob(model.sigma(), &cfg).unwrap().ln() + count;
                close(given_kl.exp(), p / kl_o[&(k, s)], &format!("config | K,L {cfg} {ctx}"));
                let generic = conditional_eppf_weight_generic(&model, m, sample.n(), sample.j(), s, k).unwrap();
                let fast = conditional_eppf_weight(&model, m, sample.n(), sample.j(), s, k).unwrap();
                close(
                    generic.ln().exp(),
                    fast.ln().exp(),
                    &format!("conditional weight {ctx}"),
                );
            }
        }
    }
}

#[test]
fn avoidance_of_every_subset() {
    for model in models() {
        for (sample, m) in cases() {
            let j = sample.j();
            let table = enumerate_conditional(&model, &sample, m).unwrap();
            let ctx = format!("{model} {:?} m={m}", sample.frequencies());
            assert!(RetainedSet::new(&sample, []).is_err());
            for mask in 1u32..(1 << j) {
                let retained = RetainedSet::new(&sample, (0..j).filter(|i| mask & (1 << i) != 0)).unwrap();
                let p = table.avoidance(&retained);
                close(
                    avoidance_probability(&model, &sample, m, &retained).unwrap(),
                    p,
                    &format!("mask {mask:b} {ctx}"),
                );
                close(
                    avoidance_probability_generic(&model, &sample, m, &retained).unwrap(),
                    p,
                    &format!("generic mask {mask:b} {ctx}"),
                );
                close(
                    avoidance_probability_staged(&model, &sample, m, &retained).unwrap(),
                    p,
                    &format!("staged mask {mask:b} {ctx}"),
                );
            }
        }
    }
}

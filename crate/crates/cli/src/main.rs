use std::path::Path;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use gibbs_core::fitting::{fit_with_options, FitOptions};
use gibbs_core::prediction::{
    configuration_odds, k_distribution, kl_joint_distribution, l_distribution, l_given_k_distribution,
    NewClusterConfiguration,
};
use gibbs_core::retrodiction::{avoid_top_expressed, avoidance_probability, RetainedSet};
use gibbs_core::simulation::{enumerate_conditional, mc_compare, sample_future, sample_partition, RngStream};
use gibbs_core::workbench::{crossval, load_dataset, predict_report, Dataset};
use gibbs_core::{GibbsError, GibbsModel, ModelFamily, Result};

/// Prediction of new species under Gibbs-type random partitions.
#[derive(Parser)]
#[command(name = "gibbs", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Model, e.g. `py:sigma=0.612,theta=741`, `dp:theta=2`, `gg:sigma=0.5,beta=1`.
    #[arg(long, global = true)]
    model: Option<GibbsModel>,
    /// Dataset JSON file, or a bundled one: library1, library2, tomato_t1526.
    #[arg(long, global = true)]
    data: Option<String>,
    /// Additional sample size(s), comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    m: Vec<usize>,
    /// HPD level.
    #[arg(long, global = true, default_value_t = 0.95)]
    level: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Machine-readable output.
    #[arg(long, global = true, conflicts_with = "table")]
    json: bool,
    /// Aligned text output (the default).
    #[arg(long, global = true)]
    table: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Maximize the EPPF of the data over a model family.
    /// Prints JSON unless `--table` is given.
    Fit {
        #[arg(long, default_value = "py")]
        family: ModelFamily,
        /// Spacing of the coarse σ grid.
        #[arg(long, default_value_t = 0.01)]
        grid_sigma_step: f64,
    },
    /// Estimates and HPD intervals for new species and their reads.
    Predict,
    /// Probability that given observed species do not reappear.
    Unseen {
        /// Keep the r least expressed species, forbid all the others.
        #[arg(long, conflicts_with_all = ["forbid_levels", "forbid_count"])]
        retain_top_r: Option<usize>,
        /// Forbid species observed with these frequencies.
        #[arg(long, value_delimiter = ',')]
        forbid_levels: Vec<usize>,
        /// Forbid only this many of the matching species.
        #[arg(long, requires = "forbid_levels")]
        forbid_count: Option<usize>,
    },
    /// Odds of two new-species configurations with equal totals, e.g. `32x1+1x8 40x1`.
    Odds {
        first: NewClusterConfiguration,
        second: NewClusterConfiguration,
    },
    /// Draw additional samples (with --data) or partitions of [n] from the prior.
    Simulate {
        #[arg(long, default_value_t = 1)]
        reps: usize,
        /// Prior partition size when no data are given.
        #[arg(long)]
        n: Option<usize>,
        /// Score simulated (K, L) frequencies against the exact distributions.
        #[arg(long)]
        compare: bool,
        /// One CSV line per replicate instead of the summary.
        #[arg(long, conflicts_with = "compare")]
        csv: bool,
    },
    /// Compare the exact distributions with brute-force enumeration (small n + m).
    OracleCheck {
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Sub-sample, fit and predict the holdout, repeatedly.
    Crossval {
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        #[arg(long, default_value = "py")]
        family: ModelFamily,
    },
    /// CSV of an exact distribution.
    DumpDist {
        #[arg(long, value_enum, default_value_t = Which::K)]
        what: Which,
        /// Number of new species, for `l-given-k`.
        #[arg(long)]
        k: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    K,
    L,
    Kl,
    LGivenK,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

impl Global {
    fn dataset(&self) -> Result<Dataset> {
        let name = self
            .data
            .as_deref()
            .ok_or_else(|| GibbsError::Validation("--data is required".into()))?;
        if !Path::new(name).exists() {
            if let Some(d) = Dataset::fixture(name) {
                return Ok(d);
            }
        }
        load_dataset(name)
    }

    fn model(&self) -> Result<GibbsModel> {
        self.model
            .ok_or_else(|| GibbsError::Validation("--model is required".into()))
    }

    fn single_m(&self) -> Result<usize> {
        match self.m.as_slice() {
            [m] => Ok(*m),
            _ => Err(GibbsError::Validation("exactly one --m value is required".into())),
        }
    }

    fn emit(&self, value: serde_json::Value, text: impl FnOnce() -> String) {
        if self.json {
            println!("{}", serde_json::to_string_pretty(&value).expect("json output"));
        } else {
            print!("{}", text());
        }
    }
}

fn to_value(x: impl serde::Serialize) -> serde_json::Value {
    serde_json::to_value(x).expect("json output")
}

fn run(cli: Cli) -> Result<u8> {
    let g = &cli.global;
    match cli.command {
        Command::Fit {
            family,
            grid_sigma_step,
        } => {
            let data = g.dataset()?;
            let options = FitOptions {
                sigma_step: grid_sigma_step,
                ..FitOptions::default()
            };
            let fit = fit_with_options(data.summary(), family, &options)?;
            let mut params = serde_json::Map::new();
            if family != ModelFamily::Dirichlet {
                params.insert("sigma".into(), json!(fit.model.sigma()));
            }
            params.insert(family.scale_name().into(), json!(fit.model.scale()));
            let doc = json!({
                "family": family.tag(),
                "params": params,
                "log_likelihood": fit.log_likelihood,
                "converged": fit.converged,
                "boundary": fit.boundary,
            });
            if g.table {
                print!(
                    "model          {}\nlog-likelihood {:.6}\nconverged      {}\nboundary       {}\n",
                    fit.model, fit.log_likelihood, fit.converged, fit.boundary
                );
            } else {
                println!("{}", serde_json::to_string_pretty(&doc).expect("json output"));
            }
            Ok(if fit.converged { 0 } else { 4 })
        }
        Command::Predict => {
            let report = predict_report(&g.dataset()?, &g.model()?, &g.m, g.level)?;
            g.emit(to_value(&report), || report.to_table());
            Ok(0)
        }
        Command::Unseen {
            retain_top_r,
            forbid_levels,
            forbid_count,
        } => {
            let data = g.dataset()?;
            let model = g.model()?;
            let sample = data.summary();
            let mut rows = Vec::new();
            for &m in &g.m {
                let p = match retain_top_r {
                    Some(r) => avoid_top_expressed(&model, sample, m, r)?,
                    None if !forbid_levels.is_empty() => {
                        let retained = RetainedSet::forbidding_levels(sample, &forbid_levels, forbid_count)?;
                        avoidance_probability(&model, sample, m, &retained)?
                    }
                    None => {
                        return Err(GibbsError::Validation(
                            "unseen needs --retain-top-r or --forbid-levels".into(),
                        ))
                    }
                };
                rows.push((m, p));
            }
            g.emit(
                to_value(
                    rows.iter()
                        .map(|&(m, p)| json!({"m": m, "probability": p}))
                        .collect::<Vec<_>>(),
                ),
                || {
                    let mut out = format!("{:>6} {:>11}\n", "m", "probability");
                    for (m, p) in &rows {
                        out += &format!("{m:>6} {p:>11.3}\n");
                    }
                    out
                },
            );
            Ok(0)
        }
        Command::Odds { first, second } => {
            let odds = configuration_odds(g.model()?.sigma(), &first, &second)?;
            g.emit(
                json!({"first": first.to_string(), "second": second.to_string(), "odds": odds}),
                || format!("{first} : {second} = {odds:.6}\n"),
            );
            Ok(0)
        }
        Command::Simulate { reps, n, compare, csv } => {
            let model = g.model()?;
            let rng = RngStream::new(g.seed);
            if let Some(name) = &g.data {
                let data = g.dataset()?;
                let m = g.single_m()?;
                if compare {
                    let report = mc_compare(&model, data.summary(), m, reps, &rng)?;
                    g.emit(to_value(&report), || {
                        format!(
                            "{name}: {} replicates, max |z| = {:.3} (mean of L: z = {:.3})\n",
                            report.reps, report.max_abs_z, report.l_mean_z
                        )
                    });
                    return Ok(0);
                }
                let draws = (0..reps)
                    .map(|i| sample_future(&model, data.summary(), m, &mut rng.substream(i as u64)))
                    .collect::<Result<Vec<_>>>()?;
                if csv {
                    println!("replicate,k,l,new_clusters");
                    for (i, d) in draws.iter().enumerate() {
                        println!("{i},{},{},{}", d.new_clusters.k(), d.new_clusters.s(), d.new_clusters);
                    }
                    return Ok(0);
                }
                let mean_k = draws.iter().map(|d| d.new_clusters.k() as f64).sum::<f64>() / reps.max(1) as f64;
                let mean_l = draws.iter().map(|d| d.new_clusters.s() as f64).sum::<f64>() / reps.max(1) as f64;
                g.emit(
                    json!({"model": model, "dataset": data.name(), "m": m, "reps": reps, "seed": g.seed,
                           "mean_k": mean_k, "mean_l": mean_l}),
                    || format!("{reps} replicates of m = {m}: mean K {mean_k:.3}, mean L {mean_l:.3}\n"),
                );
            } else {
                let n = n.ok_or_else(|| GibbsError::Validation("simulate needs --data or --n".into()))?;
                let parts = (0..reps)
                    .map(|i| sample_partition(&model, n, &mut rng.substream(i as u64)))
                    .collect::<Result<Vec<_>>>()?;
                if csv {
                    println!("replicate,j,cluster_sizes");
                    for (i, p) in parts.iter().enumerate() {
                        let sizes: Vec<String> = p.cluster_sizes.iter().map(|s| s.to_string()).collect();
                        println!("{i},{},{}", p.j(), sizes.join(" "));
                    }
                    return Ok(0);
                }
                let mean_j = parts.iter().map(|p| p.j() as f64).sum::<f64>() / reps.max(1) as f64;
                g.emit(
                    json!({"model": model, "n": n, "reps": reps, "seed": g.seed, "mean_j": mean_j}),
                    || format!("{reps} partitions of {n}: mean number of clusters {mean_j:.3}\n"),
                );
            }
            Ok(0)
        }
        Command::OracleCheck { tol } => {
            let data = g.dataset()?;
            let model = g.model()?;
            let m = g.single_m()?;
            let sample = data.summary();
            let table = enumerate_conditional(&model, sample, m)?;
            let mut worst: f64 = 0.0;
            let kl = kl_joint_distribution(&model, sample, m)?;
            for (&key, &p) in &table.kl_marginal() {
                worst = worst.max((kl.prob(key) - p).abs());
            }
            let kd = k_distribution(&model, sample, m)?;
            for (&k, &p) in &table.k_marginal() {
                worst = worst.max((kd.prob(k) - p).abs());
            }
            let ld = l_distribution(&model, sample, m)?;
            for (&l, &p) in &table.l_marginal() {
                worst = worst.max((ld.prob(l) - p).abs());
            }
            let pass = worst <= tol;
            g.emit(json!({"max_abs_diff": worst, "tol": tol, "pass": pass}), || {
                format!(
                    "max |exact - enumerated| = {worst:.3e} ({})\n",
                    if pass { "ok" } else { "FAILED" }
                )
            });
            Ok(if pass { 0 } else { 3 })
        }
        Command::Crossval { size, reps, family } => {
            let report = crossval(&g.dataset()?, size, reps, family, g.level, &RngStream::new(g.seed))?;
            g.emit(to_value(&report), || report.to_table());
            Ok(0)
        }
        Command::DumpDist { what, k } => {
            let data = g.dataset()?;
            let model = g.model()?;
            let m = g.single_m()?;
            let sample = data.summary();
            let csv = match what {
                Which::K => k_distribution(&model, sample, m)?.to_csv(),
                Which::L => l_distribution(&model, sample, m)?.to_csv(),
                Which::Kl => kl_joint_distribution(&model, sample, m)?.to_csv(),
                Which::LGivenK => {
                    let k = k.ok_or_else(|| GibbsError::Validation("l-given-k needs --k".into()))?;
                    l_given_k_distribution(model.sigma(), sample.n(), sample.j(), m, k)?.to_csv()
                }
            };
            print!("{csv}");
            Ok(0)
        }
    }
}

//! Sequential sampling from the one-step predictive rule, conditional
//! simulation of an additional sample, the exact enumeration oracle and a
//! Monte Carlo comparison harness.

mod montecarlo;
mod oracle;

pub use montecarlo::{mc_compare, z_scores, CellZ, McReport, MIN_EXPECTED_COUNT, MIN_REPS};
pub use oracle::{enumerate_conditional, OracleRow, OracleTable, ORACLE_CAP};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{GibbsError, Result};
use crate::models::{GibbsModel, SampleSummary};
use crate::prediction::NewClusterConfiguration;

/// Deterministic random stream: ChaCha8 keyed by `seed`, on stream
/// `stream`. The `t`-th output depends only on `(seed, stream, t)`, so
/// replicates that each own a stream give the same results whatever the
/// number of worker threads.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngStream { seed, stream, rng }
    }

    /// Independent stream for replicate `index`, derived from this
    /// stream's key only (not its position).
    pub fn substream(&self, index: u64) -> RngStream {
        let key = splitmix64(self.seed ^ splitmix64(self.stream));
        RngStream::with_stream(key, index)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Number of 32-bit words consumed so far.
    pub fn counter(&self) -> u128 {
        self.rng.get_word_pos()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// A partition of `[n]`, blocks listed in order of appearance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartitionState {
    pub cluster_sizes: Vec<usize>,
}

impl PartitionState {
    pub fn n(&self) -> usize {
        self.cluster_sizes.iter().sum()
    }

    pub fn j(&self) -> usize {
        self.cluster_sizes.len()
    }
}

/// Chooses among weights `w_i` (not necessarily normalized to `total`)
/// with `u` uniform on `[0, total)`; the last index absorbs rounding.
fn pick(weights: impl Iterator<Item = f64>, mut u: f64, len: usize) -> usize {
    for (i, w) in weights.enumerate() {
        u -= w;
        if u < 0.0 {
            return i;
        }
    }
    len - 1
}

/// Draws a partition of `[n]` by running the predictive rule: draw `i+1`
/// opens a new cluster w.p. `V_{i+1,j+1}/V_{i,j}` and joins cluster `c`
/// w.p. `(n_c - σ) V_{i+1,j}/V_{i,j}`.
pub fn sample_partition(model: &GibbsModel, n: usize, rng: &mut RngStream) -> Result<PartitionState> {
    if n == 0 {
        return Err(GibbsError::domain("a partition needs n >= 1"));
    }
    let sigma = model.sigma();
    let mut sizes = vec![1usize];
    for i in 1..n {
        let j = sizes.len();
        let p_new = model.new_cluster_prob(i, j)?;
        let ratio = model.log_weight_ratio(i + 1, j, i, j)?.exp();
        let u = rng.uniform();
        if u < p_new {
            sizes.push(1);
        } else {
            let c = pick(sizes.iter().map(|&s| (s as f64 - sigma) * ratio), u - p_new, j);
            sizes[c] += 1;
        }
    }
    Ok(PartitionState { cluster_sizes: sizes })
}

/// One simulated additional sample: the new clusters (in order of
/// appearance) and the increments `Λ` of every observed cluster.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FutureDraw {
    pub new_clusters: NewClusterConfiguration,
    pub increments: Vec<usize>,
}

/// Predictive probabilities for every state reachable within `m` steps of
/// `(n, j)`, so that repeated draws cost no weight evaluations.
#[derive(Debug, Clone)]
pub struct FutureSampler {
    sigma: f64,
    m: usize,
    observed: Vec<usize>,
    /// `p_new[t][k]` and `ratio[t][k]` at state `(n + t, j + k)`.
    p_new: Vec<Vec<f64>>,
    ratio: Vec<Vec<f64>>,
}

impl FutureSampler {
    pub fn new(model: &GibbsModel, sample: &SampleSummary, m: usize) -> Result<Self> {
        let (n, j) = (sample.n(), sample.j());
        let mut p_new = Vec::with_capacity(m);
        let mut ratio = Vec::with_capacity(m);
        for t in 0..m {
            let mut row_p = Vec::with_capacity(t + 1);
            let mut row_r = Vec::with_capacity(t + 1);
            for k in 0..=t {
                row_p.push(model.new_cluster_prob(n + t, j + k)?);
                row_r.push(model.log_weight_ratio(n + t + 1, j + k, n + t, j + k)?.exp());
            }
            p_new.push(row_p);
            ratio.push(row_r);
        }
        Ok(FutureSampler {
            sigma: model.sigma(),
            m,
            observed: sample.frequencies().to_vec(),
            p_new,
            ratio,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Only `(K, L)`: skips choosing which particular cluster is joined.
    pub fn draw_counts(&self, rng: &mut RngStream) -> (usize, usize) {
        let n: usize = self.observed.iter().sum();
        let j = self.observed.len() as f64;
        let (mut k, mut l) = (0usize, 0usize);
        for t in 0..self.m {
            let u = rng.uniform();
            let p_new = self.p_new[t][k];
            if u < p_new {
                k += 1;
                l += 1;
                continue;
            }
            // total weight on observed clusters, the rest goes to new ones
            let old = (n + t - l) as f64 - j * self.sigma;
            if k > 0 && u - p_new >= old * self.ratio[t][k] {
                l += 1;
            }
        }
        (k, l)
    }

    pub fn draw(&self, rng: &mut RngStream) -> FutureDraw {
        let n: usize = self.observed.iter().sum();
        let j = self.observed.len();
        let mut increments = vec![0usize; j];
        let mut fresh: Vec<usize> = Vec::new();
        let mut added_old = 0usize;
        for t in 0..self.m {
            let k = fresh.len();
            let u = rng.uniform();
            let p_new = self.p_new[t][k];
            if u < p_new {
                fresh.push(1);
                continue;
            }
            let r = self.ratio[t][k];
            let old_total = ((n + added_old) as f64 - j as f64 * self.sigma) * r;
            let v = u - p_new;
            if v < old_total || fresh.is_empty() {
                let weights = self
                    .observed
                    .iter()
                    .zip(&increments)
                    .map(|(&f, &d)| ((f + d) as f64 - self.sigma) * r);
                let c = pick(weights, v, j);
                increments[c] += 1;
                added_old += 1;
            } else {
                let weights = fresh.iter().map(|&s| (s as f64 - self.sigma) * r);
                let c = pick(weights, v - old_total, fresh.len());
                fresh[c] += 1;
            }
        }
        FutureDraw {
            new_clusters: NewClusterConfiguration::new(fresh).expect("new clusters are nonempty"),
            increments,
        }
    }
}

/// A single draw of the additional `m`-sample, continuing the predictive
/// chain from the observed cluster sizes.
pub fn sample_future(model: &GibbsModel, sample: &SampleSummary, m: usize, rng: &mut RngStream) -> Result<FutureDraw> {
    if m == 0 {
        return Err(GibbsError::domain("the additional sample needs m >= 1"));
    }
    Ok(FutureSampler::new(model, sample, m)?.draw(rng))
}

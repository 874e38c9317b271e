//! Lloyd's K-means with Forgy, random-partition and K-means++ starts.

use std::io::Write;
use std::ops::RangeInclusive;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{squared_euclidean, Assignment, Clustering, Dataset};
use crate::error::{invalid, ClusterError, Result};
use crate::parallel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    /// k distinct data points drawn uniformly.
    Forgy,
    /// Every point dropped into a uniformly drawn cluster; centers are the
    /// resulting means.
    RandomPartition,
    PlusPlus,
}

impl std::str::FromStr for Init {
    type Err = ClusterError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forgy" => Ok(Init::Forgy),
            "random_partition" | "random-partition" => Ok(Init::RandomPartition),
            "plusplus" | "kmeans++" | "++" => Ok(Init::PlusPlus),
            other => invalid(format!("unknown init {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub k: usize,
    pub init: Init,
    pub seed: u64,
    pub max_iter: usize,
    /// Stop once the relative WCSS decrease of one iteration falls below this.
    pub tol: f64,
}

impl KMeansConfig {
    pub const DEFAULT_MAX_ITER: usize = 300;
    pub const DEFAULT_TOL: f64 = 1e-6;

    pub fn new(k: usize, init: Init, seed: u64) -> Self {
        Self {
            k,
            init,
            seed,
            max_iter: Self::DEFAULT_MAX_ITER,
            tol: Self::DEFAULT_TOL,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 {
            return invalid("k must be at least 1");
        }
        if self.k > n {
            return invalid(format!("k={} exceeds the number of points {n}", self.k));
        }
        if self.max_iter == 0 {
            return invalid("max_iter must be at least 1");
        }
        if !(self.tol >= 0.0) {
            return invalid("tol must be nonnegative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// No point changed cluster.
    Stable,
    Tolerance,
    MaxIter,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KMeansResult {
    pub centers: Vec<Vec<f64>>,
    pub clustering: Clustering,
    pub wcss: f64,
    pub iterations: usize,
    /// WCSS after the initial assignment and after every iteration.
    pub wcss_trace: Vec<f64>,
    pub stop: StopReason,
}

impl KMeansResult {
    pub fn labels(&self) -> Vec<usize> {
        self.clustering
            .assignment()
            .iter()
            .map(|a| a.cluster().expect("k-means never emits noise"))
            .collect()
    }
}

pub fn kmeans(ds: &Dataset, cfg: &KMeansConfig) -> Result<KMeansResult> {
    cfg.validate(ds.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let centers = match cfg.init {
        Init::Forgy => rand::seq::index::sample(&mut rng, ds.len(), cfg.k)
            .into_iter()
            .map(|i| ds.point(i).to_vec())
            .collect(),
        Init::RandomPartition => {
            let labels: Vec<usize> = (0..ds.len()).map(|_| rng.random_range(0..cfg.k)).collect();
            let mut centers = vec![vec![0.0; ds.dim()]; cfg.k];
            let mut labels = labels;
            update_centers(ds, &mut labels, &mut centers);
            centers
        }
        Init::PlusPlus => kmeanspp_seed_with(ds, cfg.k, &mut rng)?
            .into_iter()
            .map(|i| ds.point(i).to_vec())
            .collect(),
    };
    lloyd(ds, centers, cfg.max_iter, cfg.tol)
}

/// Runs the Lloyd iteration from the given centers.
pub fn lloyd(ds: &Dataset, mut centers: Vec<Vec<f64>>, max_iter: usize, tol: f64) -> Result<KMeansResult> {
    let k = centers.len();
    if k == 0 || k > ds.len() {
        return invalid(format!("need 1 <= k <= {}, got {k}", ds.len()));
    }
    if let Some(c) = centers.iter().find(|c| c.len() != ds.dim()) {
        return Err(ClusterError::DimensionMismatch {
            expected: ds.dim(),
            got: c.len(),
        });
    }
    let mut labels = vec![0usize; ds.len()];
    let mut wcss = assign(ds, &centers, &mut labels);
    let mut trace = vec![wcss];
    let mut iterations = 0;
    let mut stop = StopReason::MaxIter;
    let mut next = labels.clone();
    while iterations < max_iter {
        update_centers(ds, &mut labels, &mut centers);
        let new_wcss = assign(ds, &centers, &mut next);
        iterations += 1;
        trace.push(new_wcss);
        let changed = next != labels;
        std::mem::swap(&mut labels, &mut next);
        let prev = wcss;
        wcss = new_wcss;
        if !changed {
            stop = StopReason::Stable;
            break;
        }
        if prev <= 0.0 || (prev - new_wcss) / prev < tol {
            stop = StopReason::Tolerance;
            break;
        }
    }
    let assignment = labels.iter().map(|&c| Assignment::Cluster(c)).collect();
    Ok(KMeansResult {
        centers,
        clustering: Clustering::from_parts_unchecked(assignment, k),
        wcss,
        iterations,
        wcss_trace: trace,
        stop,
    })
}

/// Nearest center per point (lowest index on ties); returns the WCSS.
fn assign(ds: &Dataset, centers: &[Vec<f64>], labels: &mut [usize]) -> f64 {
    let mut best = vec![(0usize, 0.0f64); ds.len()];
    parallel::fill_indexed(&mut best, |i, slot| *slot = nearest(ds.point(i), centers));
    let mut total = 0.0;
    for (l, (c, d)) in labels.iter_mut().zip(best) {
        *l = c;
        total += d;
    }
    total
}

#[inline]
pub(crate) fn nearest(p: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centers.iter().enumerate() {
        let d = squared_euclidean(p, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Replaces every center by the mean of its members. An empty cluster takes
/// the point farthest from its own (updated) center as a singleton, and that
/// point's label is moved accordingly.
fn update_centers(ds: &Dataset, labels: &mut [usize], centers: &mut [Vec<f64>]) {
    let counts = compute_means(ds, labels, centers);
    let k = centers.len();
    let empty: Vec<usize> = (0..k).filter(|&j| counts[j] == 0).collect();
    if empty.is_empty() {
        return;
    }
    let mut counts = counts;
    let mut taken = vec![false; ds.len()];
    for j in empty {
        let mut far = (usize::MAX, -1.0);
        for i in 0..ds.len() {
            if taken[i] || counts[labels[i]] <= 1 {
                continue;
            }
            let d = squared_euclidean(ds.point(i), &centers[labels[i]]);
            if d > far.1 {
                far = (i, d);
            }
        }
        if far.0 == usize::MAX {
            far.0 = (0..ds.len()).find(|&i| !taken[i]).expect("k <= n");
        }
        let p = far.0;
        taken[p] = true;
        counts[labels[p]] -= 1;
        labels[p] = j;
        counts[j] = 1;
    }
    // Donors lost a member.
    compute_means(ds, labels, centers);
}

fn compute_means(ds: &Dataset, labels: &[usize], centers: &mut [Vec<f64>]) -> Vec<usize> {
    let mut counts = vec![0usize; centers.len()];
    for c in centers.iter_mut() {
        c.iter_mut().for_each(|v| *v = 0.0);
    }
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for (acc, v) in centers[l].iter_mut().zip(ds.point(i)) {
            *acc += v;
        }
    }
    for (c, &m) in centers.iter_mut().zip(&counts) {
        if m > 0 {
            c.iter_mut().for_each(|v| *v /= m as f64);
        }
    }
    counts
}

/// WCSS of a hard clustering around the given centers.
pub fn wcss(ds: &Dataset, centers: &[Vec<f64>], clustering: &Clustering) -> f64 {
    clustering
        .assignment()
        .iter()
        .enumerate()
        .filter_map(|(i, a)| a.cluster().map(|c| squared_euclidean(ds.point(i), &centers[c])))
        .sum()
}

pub fn kmeanspp_seed(ds: &Dataset, k: usize, seed: u64) -> Result<Vec<usize>> {
    kmeanspp_seed_with(ds, k, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// D²-weighted seeding: the first index is uniform, each further index is
/// drawn with probability proportional to its squared distance from the
/// nearest index already chosen.
pub fn kmeanspp_seed_with<R: Rng + ?Sized>(ds: &Dataset, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    if k == 0 {
        return invalid("k must be at least 1");
    }
    let distinct = count_distinct(ds);
    if distinct < k {
        return invalid(format!("k={k} exceeds the number of distinct points {distinct}"));
    }
    let n = ds.len();
    let first = rng.random_range(0..n);
    let mut chosen = vec![first];
    let mut d2: Vec<f64> = (0..n).map(|i| squared_euclidean(ds.point(i), ds.point(first))).collect();
    while chosen.len() < k {
        let dist = WeightedIndex::new(&d2)
            .map_err(|e| ClusterError::Numerical(format!("seeding weights: {e}")))?;
        let next = dist.sample(rng);
        chosen.push(next);
        let c = ds.point(next);
        for (i, w) in d2.iter_mut().enumerate() {
            let d = squared_euclidean(ds.point(i), c);
            if d < *w {
                *w = d;
            }
        }
    }
    Ok(chosen)
}

fn count_distinct(ds: &Dataset) -> usize {
    let mut keys: Vec<Vec<u64>> = ds
        .points()
        .map(|p| p.iter().map(|v| (v + 0.0).to_bits()).collect())
        .collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len()
}

/// Best WCSS over `restarts` runs for each k; restart `r` uses seed
/// `template.seed + r`.
pub fn wcss_curve(
    ds: &Dataset,
    k_range: RangeInclusive<usize>,
    template: &KMeansConfig,
    restarts: usize,
) -> Result<Vec<(usize, f64)>> {
    if k_range.is_empty() {
        return invalid("empty k range");
    }
    if *k_range.start() == 0 || *k_range.end() > ds.len() {
        return invalid(format!("k range must lie within [1, {}]", ds.len()));
    }
    let restarts = restarts.max(1);
    let mut rows = Vec::new();
    for k in k_range {
        let cfg = KMeansConfig { k, ..template.clone() };
        rows.push((k, kmeans_restarts(ds, &cfg, restarts)?.wcss));
    }
    Ok(rows)
}

/// Best of `restarts` runs by WCSS; run `r` uses seed `cfg.seed + r` and the
/// earliest run wins ties.
pub fn kmeans_restarts(ds: &Dataset, cfg: &KMeansConfig, restarts: usize) -> Result<KMeansResult> {
    if restarts == 0 {
        return invalid("restarts must be at least 1");
    }
    let mut best = kmeans(ds, cfg)?;
    for r in 1..restarts {
        let run = kmeans(
            ds,
            &KMeansConfig {
                seed: cfg.seed.wrapping_add(r as u64),
                ..cfg.clone()
            },
        )?;
        if run.wcss < best.wcss {
            best = run;
        }
    }
    Ok(best)
}

pub fn write_wcss_csv<W: Write>(rows: &[(usize, f64)], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["k", "wcss"])?;
    for (k, v) in rows {
        w.write_record(&[k.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

//! Partitioning around medoids (BUILD + SWAP) and its sampling variant CLARA.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{distance_matrix, Assignment, Clustering, Dataset, DistanceMatrix, Metric};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MedoidResult {
    /// Point indices of the medoids; cluster `c` is served by `medoids[c]`.
    pub medoids: Vec<usize>,
    pub clustering: Clustering,
    pub total_cost: f64,
    /// Cost after BUILD followed by the cost after every accepted swap.
    pub cost_trace: Vec<f64>,
    /// Accepted swaps as (removed medoid, inserted point, cost change).
    pub swaps: Vec<(usize, usize, f64)>,
}

/// Total distance of every point to its nearest medoid.
pub fn medoid_cost(dm: &DistanceMatrix, medoids: &[usize]) -> f64 {
    (0..dm.len())
        .map(|j| medoids.iter().map(|&m| dm.get(j, m)).fold(f64::INFINITY, f64::min))
        .sum()
}

/// Greedy BUILD phase: the most central point first, then repeatedly the
/// point with the largest total gain `g_i = Σ_j max(D_j - d(i, j), 0)`.
pub fn pam_build(dm: &DistanceMatrix, k: usize) -> Result<Vec<usize>> {
    let n = dm.len();
    if k == 0 || k > n {
        return invalid(format!("need 1 <= k <= {n}, got {k}"));
    }
    let mut selected = vec![false; n];
    let mut first = (0, f64::INFINITY);
    for i in 0..n {
        let total: f64 = dm.row(i).iter().sum();
        if total < first.1 {
            first = (i, total);
        }
    }
    let mut medoids = vec![first.0];
    selected[first.0] = true;
    // nearest[j] = D_j, distance to the closest selected object
    let mut nearest: Vec<f64> = dm.row(first.0).to_vec();
    while medoids.len() < k {
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for i in (0..n).filter(|&i| !selected[i]) {
            let row = dm.row(i);
            let gain: f64 = (0..n)
                .filter(|&j| !selected[j])
                .map(|j| (nearest[j] - row[j]).max(0.0))
                .sum();
            if gain > best.1 {
                best = (i, gain);
            }
        }
        let i = best.0;
        selected[i] = true;
        medoids.push(i);
        for (d, &v) in nearest.iter_mut().zip(dm.row(i)) {
            *d = d.min(v);
        }
    }
    Ok(medoids)
}

/// Distance to the nearest and second nearest medoid of every point,
/// counting coincident medoids separately.
pub fn first_second(dm: &DistanceMatrix, medoids: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let n = dm.len();
    let mut first = vec![f64::INFINITY; n];
    let mut second = vec![f64::INFINITY; n];
    for &m in medoids {
        for j in 0..n {
            let d = dm.get(j, m);
            if d < first[j] {
                second[j] = first[j];
                first[j] = d;
            } else if d < second[j] {
                second[j] = d;
            }
        }
    }
    (first, second)
}

/// Exact change in total cost when medoid `i` is replaced by non-medoid `h`.
///
/// Every object contributes: those served by `i` move to `min(d(j,h), E_j)`,
/// the others move to `h` only if it is closer. The removed medoid and the
/// inserted point are included, so the value equals the cost difference.
pub fn swap_delta(dm: &DistanceMatrix, i: usize, h: usize, nearest: &[f64], second: &[f64]) -> f64 {
    let row_i = dm.row(i);
    let row_h = dm.row(h);
    let mut t = 0.0;
    for j in 0..dm.len() {
        let dj = nearest[j];
        if row_i[j] <= dj {
            t += row_h[j].min(second[j]) - dj;
        } else {
            t += (row_h[j] - dj).min(0.0);
        }
    }
    t
}

/// SWAP phase: applies the most improving (medoid, non-medoid) exchange until
/// no exchange lowers the cost.
pub fn pam_swap(dm: &DistanceMatrix, initial: &[usize]) -> Result<MedoidResult> {
    let n = dm.len();
    validate_medoids(n, initial)?;
    let mut medoids = initial.to_vec();
    let mut is_medoid = vec![false; n];
    medoids.iter().for_each(|&m| is_medoid[m] = true);
    let mut cost = medoid_cost(dm, &medoids);
    let mut cost_trace = vec![cost];
    let mut swaps = Vec::new();

    loop {
        let (nearest, second) = first_second(dm, &medoids);
        // Positions in ascending point index so ties favour the smallest (i, h).
        let mut order: Vec<usize> = (0..medoids.len()).collect();
        order.sort_by_key(|&p| medoids[p]);
        let mut best: Option<(usize, usize, f64)> = None;
        for &pos in &order {
            let i = medoids[pos];
            for h in (0..n).filter(|&h| !is_medoid[h]) {
                let t = swap_delta(dm, i, h, &nearest, &second);
                if best.is_none_or(|b| t < b.2) {
                    best = Some((pos, h, t));
                }
            }
        }
        let Some((pos, h, t)) = best else { break };
        if t >= -1e-13 * cost.max(1.0) {
            break;
        }
        let i = medoids[pos];
        is_medoid[i] = false;
        is_medoid[h] = true;
        medoids[pos] = h;
        cost = medoid_cost(dm, &medoids);
        cost_trace.push(cost);
        swaps.push((i, h, t));
    }

    let (clustering, total_cost) = assign_to_medoids(n, &medoids, |j, m| dm.get(j, m));
    Ok(MedoidResult {
        medoids,
        clustering,
        total_cost,
        cost_trace,
        swaps,
    })
}

fn validate_medoids(n: usize, medoids: &[usize]) -> Result<()> {
    if medoids.is_empty() {
        return invalid("medoid set must be nonempty");
    }
    let mut seen = vec![false; n];
    for &m in medoids {
        if m >= n {
            return invalid(format!("medoid index {m} out of range for {n} points"));
        }
        if std::mem::replace(&mut seen[m], true) {
            return invalid(format!("medoid index {m} repeated"));
        }
    }
    Ok(())
}

/// Nearest-medoid assignment (lowest medoid position on ties); every medoid
/// is placed in its own cluster.
fn assign_to_medoids<F>(n: usize, medoids: &[usize], dist: F) -> (Clustering, f64)
where
    F: Fn(usize, usize) -> f64,
{
    let mut own = vec![usize::MAX; n];
    for (pos, &m) in medoids.iter().enumerate() {
        own[m] = pos;
    }
    let mut total = 0.0;
    let mut assignment = Vec::with_capacity(n);
    for j in 0..n {
        if own[j] != usize::MAX {
            assignment.push(Assignment::Cluster(own[j]));
            continue;
        }
        let mut best = (0, f64::INFINITY);
        for (pos, &m) in medoids.iter().enumerate() {
            let d = dist(j, m);
            if d < best.1 {
                best = (pos, d);
            }
        }
        total += best.1;
        assignment.push(Assignment::Cluster(best.0));
    }
    (Clustering::from_parts_unchecked(assignment, medoids.len()), total)
}

pub fn pam(ds: &Dataset, k: usize, metric: Metric) -> Result<MedoidResult> {
    let dm = distance_matrix(ds, metric);
    let build = pam_build(&dm, k)?;
    pam_swap(&dm, &build)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaraConfig {
    pub k: usize,
    pub num_samples: usize,
    pub sample_size: usize,
    pub seed: u64,
}

impl ClaraConfig {
    pub const DEFAULT_SAMPLES: usize = 5;

    /// Five samples of `40 + 2k` objects.
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            num_samples: Self::DEFAULT_SAMPLES,
            sample_size: Self::default_sample_size(k),
            seed,
        }
    }

    pub fn default_sample_size(k: usize) -> usize {
        40 + 2 * k
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaraResult {
    pub result: MedoidResult,
    /// Index of the winning sample.
    pub best_sample: usize,
    /// Sorted point indices of the winning sample.
    pub sample: Vec<usize>,
    /// Full-dataset cost of every candidate medoid set, in sample order.
    pub candidate_costs: Vec<f64>,
    pub candidate_medoids: Vec<Vec<usize>>,
}

/// Runs PAM on `num_samples` simple random samples and keeps the medoid set
/// with the lowest full-dataset cost (earliest sample on ties). Sample `s`
/// draws from ChaCha stream `s` of `seed`, so samples are independent of
/// evaluation order.
pub fn clara(ds: &Dataset, cfg: &ClaraConfig, metric: Metric) -> Result<ClaraResult> {
    let n = ds.len();
    if cfg.k == 0 || cfg.k > n {
        return invalid(format!("need 1 <= k <= {n}, got {}", cfg.k));
    }
    if cfg.num_samples == 0 {
        return invalid("num_samples must be at least 1");
    }
    if cfg.sample_size < cfg.k {
        return invalid(format!(
            "sample_size {} smaller than k={}",
            cfg.sample_size, cfg.k
        ));
    }
    let size = cfg.sample_size.min(n);
    let dist = |j: usize, m: usize| {
        let (a, b) = if j < m { (j, m) } else { (m, j) };
        metric.eval(ds.point(a), ds.point(b))
    };

    let mut best: Option<(usize, Vec<usize>, MedoidResult)> = None;
    let mut candidate_costs = Vec::with_capacity(cfg.num_samples);
    let mut candidate_medoids = Vec::with_capacity(cfg.num_samples);
    for s in 0..cfg.num_samples {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(s as u64);
        let mut sample = rand::seq::index::sample(&mut rng, n, size).into_vec();
        sample.sort_unstable();
        let local = pam(&ds.subset(&sample), cfg.k, metric)?;
        let medoids: Vec<usize> = local.medoids.iter().map(|&m| sample[m]).collect();
        let (clustering, cost) = assign_to_medoids(n, &medoids, dist);
        candidate_costs.push(cost);
        candidate_medoids.push(medoids.clone());
        if best.as_ref().is_none_or(|(_, _, b)| cost < b.total_cost) {
            let result = MedoidResult {
                medoids,
                clustering,
                total_cost: cost,
                cost_trace: local.cost_trace,
                swaps: local.swaps,
            };
            best = Some((s, sample, result));
        }
    }
    let (best_sample, sample, result) = best.expect("at least one sample");
    Ok(ClaraResult {
        result,
        best_sample,
        sample,
        candidate_costs,
        candidate_medoids,
    })
}

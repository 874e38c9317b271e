//! DBSCAN, k-distance curves and OPTICS orderings.
//!
//! Neighbourhoods are closed balls (`d <= eps`) and always contain the query
//! point itself. All range queries are linear scans.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::data::{Assignment, Clustering, Dataset, Metric};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DbscanConfig {
    pub eps: f64,
    pub min_pts: usize,
}

impl DbscanConfig {
    pub const DEFAULT_MIN_PTS: usize = 5;

    pub fn new(eps: f64, min_pts: usize) -> Result<Self> {
        let cfg = Self { eps, min_pts };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return invalid(format!("eps must be finite and positive, got {}", self.eps));
        }
        if self.min_pts == 0 {
            return invalid("min_pts must be at least 1");
        }
        Ok(())
    }
}

/// Rule of thumb for `min_pts` in `d` dimensions.
pub fn suggested_min_pts(d: usize) -> usize {
    if d > 2 {
        2 * d
    } else {
        DbscanConfig::DEFAULT_MIN_PTS
    }
}

fn region_query(ds: &Dataset, p: usize, eps: f64, metric: Metric, out: &mut Vec<usize>) {
    out.clear();
    let x = ds.point(p);
    for q in 0..ds.len() {
        if metric.eval(x, ds.point(q)) <= eps {
            out.push(q);
        }
    }
}

pub fn is_core(ds: &Dataset, p: usize, eps: f64, min_pts: usize, metric: Metric) -> bool {
    let x = ds.point(p);
    ds.points().filter(|q| metric.eval(x, q) <= eps).count() >= min_pts
}

/// Points are scanned in index order. Border points belong to the first
/// cluster that reaches them.
pub fn dbscan(ds: &Dataset, cfg: &DbscanConfig, metric: Metric) -> Result<Clustering> {
    cfg.validate()?;
    let n = ds.len();
    let mut label: Vec<Option<usize>> = vec![None; n];
    let mut visited = vec![false; n];
    let mut queued = vec![false; n];
    let mut k = 0;
    let mut neighbors = Vec::new();
    let mut inner = Vec::new();
    let mut queue = Vec::new();
    for p in 0..n {
        if visited[p] {
            continue;
        }
        visited[p] = true;
        region_query(ds, p, cfg.eps, metric, &mut neighbors);
        if neighbors.len() < cfg.min_pts {
            // Stays noise unless a later cluster claims it as a border point.
            continue;
        }
        let c = k;
        k += 1;
        label[p] = Some(c);
        queue.clear();
        for &q in neighbors.iter().filter(|&&q| q != p) {
            if !visited[q] && !queued[q] {
                queued[q] = true;
                queue.push(q);
            } else if label[q].is_none() {
                label[q] = Some(c);
            }
        }
        let mut head = 0;
        while head < queue.len() {
            let q = queue[head];
            head += 1;
            if label[q].is_none() {
                label[q] = Some(c);
            }
            if visited[q] {
                continue;
            }
            visited[q] = true;
            region_query(ds, q, cfg.eps, metric, &mut inner);
            if inner.len() >= cfg.min_pts {
                for &r in &inner {
                    if !visited[r] && !queued[r] {
                        queued[r] = true;
                        queue.push(r);
                    } else if label[r].is_none() {
                        label[r] = Some(c);
                    }
                }
            }
        }
    }
    let assignment = label
        .into_iter()
        .map(|l| l.map_or(Assignment::Noise, Assignment::Cluster))
        .collect();
    Ok(Clustering::from_parts_unchecked(assignment, k))
}

/// Distance of every point to its `k`-th nearest other point, sorted in
/// descending order.
pub fn kdist_curve(ds: &Dataset, k: usize, metric: Metric) -> Result<Vec<f64>> {
    let n = ds.len();
    if k == 0 || k >= n {
        return invalid(format!("k-dist needs 1 <= k < n={n}, got {k}"));
    }
    let mut out = Vec::with_capacity(n);
    let mut row = Vec::with_capacity(n - 1);
    for p in 0..n {
        row.clear();
        let x = ds.point(p);
        row.extend((0..n).filter(|&q| q != p).map(|q| metric.eval(x, ds.point(q))));
        let (_, kth, _) = row.select_nth_unstable_by(k - 1, f64::total_cmp);
        out.push(*kth);
    }
    out.sort_by(|a, b| b.total_cmp(a));
    Ok(out)
}

pub fn write_kdist_csv<W: Write>(curve: &[f64], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["rank", "kdist"])?;
    for (rank, v) in curve.iter().enumerate() {
        w.write_record(&[rank.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// One entry of an OPTICS ordering. `None` encodes an undefined distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReachRecord {
    pub point: usize,
    pub reachability: Option<f64>,
    pub core_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpticsOrdering {
    pub records: Vec<ReachRecord>,
    pub eps: f64,
    pub min_pts: usize,
}

impl OpticsOrdering {
    /// Writes `order,point,reachability,core_distance`; undefined values as `inf`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let fmt = |v: Option<f64>| v.map_or_else(|| "inf".to_string(), |x| x.to_string());
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["order", "point", "reachability", "core_distance"])?;
        for (order, r) in self.records.iter().enumerate() {
            w.write_record(&[
                order.to_string(),
                r.point.to_string(),
                fmt(r.reachability),
                fmt(r.core_distance),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Builds the reachability ordering. `eps` may be `f64::INFINITY`.
///
/// Unprocessed points are taken in index order; within an expansion the seed
/// with the smallest reachability (lowest index on ties) is emitted next.
pub fn optics(ds: &Dataset, min_pts: usize, eps: f64, metric: Metric) -> Result<OpticsOrdering> {
    if min_pts == 0 {
        return invalid("min_pts must be at least 1");
    }
    if eps.is_nan() || eps <= 0.0 {
        return invalid(format!("eps must be positive, got {eps}"));
    }
    let n = ds.len();
    let mut processed = vec![false; n];
    let mut reach: Vec<Option<f64>> = vec![None; n];
    let mut in_seeds = vec![false; n];
    let mut seeds: Vec<usize> = Vec::new();
    let mut records = Vec::with_capacity(n);
    let mut dists = vec![0.0; n];
    let mut scratch = Vec::with_capacity(n);

    // Fills `dists` with distances from p and returns its core distance.
    let mut neighborhood = |p: usize, dists: &mut [f64]| -> Option<f64> {
        let x = ds.point(p);
        scratch.clear();
        for q in 0..n {
            let d = metric.eval(x, ds.point(q));
            dists[q] = d;
            if d <= eps {
                scratch.push(d);
            }
        }
        if scratch.len() < min_pts {
            return None;
        }
        let (_, kth, _) = scratch.select_nth_unstable_by(min_pts - 1, f64::total_cmp);
        Some(*kth)
    };

    for start in 0..n {
        if processed[start] {
            continue;
        }
        let mut current = start;
        loop {
            processed[current] = true;
            let core = neighborhood(current, &mut dists);
            records.push(ReachRecord {
                point: current,
                reachability: reach[current],
                core_distance: core,
            });
            if let Some(core) = core {
                for q in 0..n {
                    if processed[q] || dists[q] > eps {
                        continue;
                    }
                    let candidate = core.max(dists[q]);
                    match reach[q] {
                        Some(r) if r <= candidate => {}
                        _ => {
                            reach[q] = Some(candidate);
                            if !in_seeds[q] {
                                in_seeds[q] = true;
                                seeds.push(q);
                            }
                        }
                    }
                }
            }
            // Pop the seed with minimal (reachability, index).
            let Some(pos) = (0..seeds.len()).min_by(|&a, &b| {
                let (qa, qb) = (seeds[a], seeds[b]);
                reach[qa]
                    .unwrap()
                    .total_cmp(&reach[qb].unwrap())
                    .then(qa.cmp(&qb))
            }) else {
                break;
            };
            current = seeds.swap_remove(pos);
            in_seeds[current] = false;
        }
    }
    Ok(OpticsOrdering {
        records,
        eps,
        min_pts,
    })
}

/// Flat clustering from a reachability ordering at a fixed threshold.
///
/// A record whose reachability exceeds the threshold (or is undefined) opens
/// a new cluster when its core distance is within the threshold and is noise
/// otherwise; every other record joins the current cluster.
pub fn extract_clusters(ord: &OpticsOrdering, threshold: f64) -> Result<Clustering> {
    if threshold.is_nan() || threshold <= 0.0 {
        return invalid(format!("threshold must be positive, got {threshold}"));
    }
    let n = ord.records.len();
    let mut assignment = vec![Assignment::Noise; n];
    let mut current: Option<usize> = None;
    let mut k = 0;
    for r in &ord.records {
        let reachable = r.reachability.is_some_and(|v| v <= threshold);
        if reachable {
            if let Some(c) = current {
                assignment[r.point] = Assignment::Cluster(c);
                continue;
            }
        }
        if r.core_distance.is_some_and(|v| v <= threshold) {
            current = Some(k);
            assignment[r.point] = Assignment::Cluster(k);
            k += 1;
        }
    }
    Ok(Clustering::from_parts_unchecked(assignment, k))
}

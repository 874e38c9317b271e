//! Agglomerative clustering driven by the Lance-Williams recurrence.
//!
//! Every linkage is expressed as an update of the distance between a freshly
//! merged cluster `I ∪ J` and any other cluster `K`, computed from the three
//! pre-merge distances and the cluster sizes. Ward's method is run on
//! squared Euclidean input, halved, so that each merge height is exactly the
//! increase in the error sum of squares caused by that merge.
//!
//! The search keeps, for every active cluster, its current nearest neighbour.
//! After a merge only the rows whose cached neighbour disappeared are
//! rescanned, which keeps typical runs near `O(n^2)` while selecting exactly
//! the same pair as a full scan (same tie-breaking).

use std::cmp::Ordering;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::data::{distance_matrix, Assignment, Clustering, Dataset, DistanceMatrix, Metric};
use crate::error::{invalid, ClusterError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Linkage {
    Single,
    Complete,
    /// Unweighted pair-group average.
    Upgma,
    Ward,
}

impl Linkage {
    /// Single, complete and average linkage produce non-decreasing merge heights.
    pub fn is_monotone(self) -> bool {
        !matches!(self, Linkage::Ward)
    }
}

impl std::str::FromStr for Linkage {
    type Err = ClusterError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            "upgma" | "average" => Ok(Linkage::Upgma),
            "ward" => Ok(Linkage::Ward),
            other => invalid(format!("unknown linkage {other:?}")),
        }
    }
}

/// One agglomeration step. Leaves are `0..n`, the node created by merge `t`
/// is `n + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    n: usize,
    merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn num_points(&self) -> usize {
        self.n
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// Writes `left,right,height,size`, one merge per row in merge order.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["left", "right", "height", "size"])?;
        for m in &self.merges {
            w.write_record(&[
                m.left.to_string(),
                m.right.to_string(),
                m.height.to_string(),
                m.size.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Distance from `I ∪ J` to `K`.
pub fn lance_williams_update(
    d_ik: f64,
    d_jk: f64,
    d_ij: f64,
    sizes: (usize, usize, usize),
    linkage: Linkage,
) -> Result<f64> {
    let (ni, nj, nk) = sizes;
    if ni + nj + nk == 0 {
        return invalid("cluster sizes must not all be zero");
    }
    if [d_ik, d_jk, d_ij].iter().any(|d| !d.is_finite() || *d < 0.0) {
        return invalid("distances must be finite and nonnegative");
    }
    Ok(lw(d_ik, d_jk, d_ij, ni as f64, nj as f64, nk as f64, linkage))
}

#[inline]
fn lw(d_ik: f64, d_jk: f64, d_ij: f64, ni: f64, nj: f64, nk: f64, linkage: Linkage) -> f64 {
    match linkage {
        Linkage::Single => d_ik.min(d_jk),
        Linkage::Complete => d_ik.max(d_jk),
        Linkage::Upgma => (ni * d_ik + nj * d_jk) / (ni + nj),
        Linkage::Ward => ((ni + nk) * d_ik + (nj + nk) * d_jk - nk * d_ij) / (ni + nj + nk),
    }
}

/// Error sum of squares around the arithmetic mean.
pub fn ess(points: &[&[f64]]) -> Result<f64> {
    let Some(first) = points.first() else {
        return invalid("ess of an empty set");
    };
    let d = first.len();
    if let Some(p) = points.iter().find(|p| p.len() != d) {
        return Err(ClusterError::DimensionMismatch {
            expected: d,
            got: p.len(),
        });
    }
    let mut centroid = vec![0.0; d];
    for p in points {
        for (c, v) in centroid.iter_mut().zip(p.iter()) {
            *c += v;
        }
    }
    let m = points.len() as f64;
    centroid.iter_mut().for_each(|c| *c /= m);
    Ok(points
        .iter()
        .map(|p| crate::data::squared_euclidean(p, &centroid))
        .sum())
}

/// Builds the full dendrogram. Ward linkage requires `SquaredEuclidean`.
pub fn agglomerate(ds: &Dataset, linkage: Linkage, metric: Metric) -> Result<Dendrogram> {
    if ds.len() < 2 {
        return invalid("agglomeration needs at least two points");
    }
    if linkage == Linkage::Ward && metric != Metric::SquaredEuclidean {
        return invalid("ward linkage requires squared euclidean base distances");
    }
    agglomerate_matrix(&distance_matrix(ds, metric), linkage)
}

/// Agglomeration over precomputed dissimilarities. For Ward, `dm` must hold
/// squared Euclidean distances.
pub fn agglomerate_matrix(dm: &DistanceMatrix, linkage: Linkage) -> Result<Dendrogram> {
    let n = dm.len();
    if n < 2 {
        return invalid("agglomeration needs at least two points");
    }
    let scale = if linkage == Linkage::Ward { 0.5 } else { 1.0 };
    let mut dist: Vec<f64> = (0..n).flat_map(|i| dm.row(i).iter().map(move |v| v * scale)).collect();

    let mut active = vec![true; n];
    let mut node: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];
    let mut nn = vec![usize::MAX; n];
    let mut nn_dist = vec![f64::INFINITY; n];

    let rescan = |a: usize, dist: &[f64], active: &[bool], node: &[usize]| -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        for b in 0..n {
            if b == a || !active[b] {
                continue;
            }
            let d = dist[a * n + b];
            if best.0 == usize::MAX || d < best.1 || (d == best.1 && node[b] < node[best.0]) {
                best = (b, d);
            }
        }
        best
    };

    for a in 0..n {
        (nn[a], nn_dist[a]) = rescan(a, &dist, &active, &node);
    }

    let mut merges = Vec::with_capacity(n - 1);
    for step in 0..n - 1 {
        // Global minimum; ties go to the lexicographically smallest (min id, max id).
        let mut best: Option<(f64, usize, usize, usize)> = None;
        for a in (0..n).filter(|&a| active[a]) {
            let (lo, hi) = minmax(node[a], node[nn[a]]);
            let cand = (nn_dist[a], lo, hi, a);
            let better = match best {
                None => true,
                Some(cur) => match cand.0.partial_cmp(&cur.0).unwrap_or(Ordering::Equal) {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => (cand.1, cand.2) < (cur.1, cur.2),
                },
            };
            if better {
                best = Some(cand);
            }
        }
        let (height, _, _, a0) = best.expect("at least two active clusters");
        let b0 = nn[a0];
        let (keep, gone) = minmax(a0, b0);
        let (ni, nj) = (size[keep] as f64, size[gone] as f64);
        let d_ij = dist[keep * n + gone];

        for k in 0..n {
            if !active[k] || k == keep || k == gone {
                continue;
            }
            let updated = lw(
                dist[keep * n + k],
                dist[gone * n + k],
                d_ij,
                ni,
                nj,
                size[k] as f64,
                linkage,
            );
            dist[keep * n + k] = updated;
            dist[k * n + keep] = updated;
        }

        let (left, right) = minmax(node[keep], node[gone]);
        merges.push(Merge {
            left,
            right,
            height,
            size: size[keep] + size[gone],
        });
        active[gone] = false;
        size[keep] += size[gone];
        node[keep] = n + step;

        if step + 1 == n - 1 {
            break;
        }
        (nn[keep], nn_dist[keep]) = rescan(keep, &dist, &active, &node);
        for k in 0..n {
            if !active[k] || k == keep {
                continue;
            }
            if nn[k] == keep || nn[k] == gone {
                (nn[k], nn_dist[k]) = rescan(k, &dist, &active, &node);
            } else if dist[k * n + keep] < nn_dist[k] {
                // The new node id is the largest so far; equal distances keep
                // the cached neighbour.
                nn[k] = keep;
                nn_dist[k] = dist[k * n + keep];
            }
        }
    }
    Ok(Dendrogram { n, merges })
}

#[inline]
fn minmax(a: usize, b: usize) -> (usize, usize) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Flat clustering with exactly `k` clusters, obtained by undoing the last
/// `k - 1` merges. Cluster ids follow the first appearance in point order.
pub fn cut(dendrogram: &Dendrogram, k: usize) -> Result<Clustering> {
    let n = dendrogram.n;
    if k == 0 || k > n {
        return invalid(format!("cut requires 1 <= k <= {n}, got {k}"));
    }
    let mut parent: Vec<usize> = (0..2 * n - 1).collect();
    for (t, m) in dendrogram.merges.iter().take(n - k).enumerate() {
        parent[m.left] = n + t;
        parent[m.right] = n + t;
    }
    let mut root_label = vec![usize::MAX; 2 * n - 1];
    let mut next = 0;
    let mut assignment = Vec::with_capacity(n);
    for leaf in 0..n {
        let mut r = leaf;
        while parent[r] != r {
            r = parent[r];
        }
        if root_label[r] == usize::MAX {
            root_label[r] = next;
            next += 1;
        }
        assignment.push(Assignment::Cluster(root_label[r]));
    }
    debug_assert_eq!(next, k);
    Ok(Clustering::from_parts_unchecked(assignment, k))
}

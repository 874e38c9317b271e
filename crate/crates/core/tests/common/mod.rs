#![allow(dead_code)]

use cluster_lab::{Assignment, Clustering, Dataset};
use proptest::prelude::*;

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn dataset(points: &[(f64, f64)]) -> Dataset {
    Dataset::new(points.iter().map(|&(x, y)| vec![x, y]).collect(), None).unwrap()
}

/// Between 2 and `max_n` points in the square [-10, 10]^2.
pub fn points(max_n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 2..=max_n)
}

/// Points on a coarse grid so that duplicates and distance ties occur.
pub fn grid_points(max_n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0..6i32, 0..6i32), 2..=max_n)
        .prop_map(|v| v.into_iter().map(|(x, y)| (x as f64, y as f64)).collect())
}

/// Within-group sum of squared distances to the group mean.
pub fn ess(ds: &Dataset, members: &[usize]) -> f64 {
    let d = ds.dim();
    let mut mean = vec![0.0; d];
    for &i in members {
        for (m, v) in mean.iter_mut().zip(ds.point(i)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= members.len() as f64);
    members
        .iter()
        .map(|&i| ds.point(i).iter().zip(&mean).map(|(v, m)| (v - m) * (v - m)).sum::<f64>())
        .sum()
}

/// Whether two labelings induce the same partition, with `None` treated as
/// its own class that must coincide exactly.
pub fn same_partition(a: &[Option<usize>], b: &[Option<usize>]) -> bool {
    use std::collections::HashMap;
    if a.len() != b.len() {
        return false;
    }
    let mut fwd = HashMap::new();
    let mut bwd = HashMap::new();
    for (x, y) in a.iter().zip(b) {
        match (x, y) {
            (None, None) => {}
            (Some(x), Some(y)) => {
                if *fwd.entry(*x).or_insert(*y) != *y || *bwd.entry(*y).or_insert(*x) != *x {
                    return false;
                }
            }
            _ => return false,
        }
    }
    true
}

pub fn options(c: &Clustering) -> Vec<Option<usize>> {
    c.assignment().iter().map(|a| a.cluster()).collect()
}

pub fn noise(c: &Clustering) -> Vec<bool> {
    c.assignment().iter().map(|a| *a == Assignment::Noise).collect()
}

pub struct UnionFind(Vec<usize>);

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut x = x;
        while self.0[x] != r {
            let next = self.0[x];
            self.0[x] = r;
            x = next;
        }
        r
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Core flags and, for core points, a component representative of the
/// graph joining cores within `eps`.
pub fn core_components(ds: &Dataset, eps: f64, min_pts: usize) -> (Vec<bool>, Vec<Option<usize>>) {
    let n = ds.len();
    let core: Vec<bool> = (0..n)
        .map(|i| (0..n).filter(|&j| euclid(ds.point(i), ds.point(j)) <= eps).count() >= min_pts)
        .collect();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if core[i] && core[j] && euclid(ds.point(i), ds.point(j)) <= eps {
                uf.union(i, j);
            }
        }
    }
    let comp = (0..n).map(|i| core[i].then(|| uf.find(i))).collect();
    (core, comp)
}

//! Shared data model: datasets, metrics, pairwise distances and clusterings.

use std::collections::BTreeSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, ClusterError, Result};
use crate::parallel;

/// `n` points in `d` dimensions, stored row-major, with optional class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    data: Vec<f64>,
    n: usize,
    d: usize,
    labels: Option<Vec<usize>>,
}

impl Dataset {
    pub fn new(points: Vec<Vec<f64>>, labels: Option<Vec<usize>>) -> Result<Self> {
        let d = match points.first() {
            Some(p) => p.len(),
            None => return invalid("dataset must contain at least one point"),
        };
        let mut data = Vec::with_capacity(points.len() * d);
        for p in &points {
            if p.len() != d {
                return Err(ClusterError::DimensionMismatch {
                    expected: d,
                    got: p.len(),
                });
            }
            data.extend_from_slice(p);
        }
        Self::from_flat(data, d, labels)
    }

    pub fn from_flat(data: Vec<f64>, d: usize, labels: Option<Vec<usize>>) -> Result<Self> {
        if d == 0 {
            return invalid("dimension must be at least 1");
        }
        if data.is_empty() || data.len() % d != 0 {
            return invalid(format!(
                "flat buffer of length {} is not a nonempty multiple of d={d}",
                data.len()
            ));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return invalid(format!("non-finite coordinate at point {}", i / d));
        }
        let n = data.len() / d;
        if let Some(labels) = &labels {
            if labels.len() != n {
                return invalid(format!("{} labels for {n} points", labels.len()));
            }
            let present: BTreeSet<usize> = labels.iter().copied().collect();
            let c = present.iter().next_back().map_or(0, |m| m + 1);
            if present.len() != c {
                return invalid("class ids must cover 0..c-1 without gaps");
            }
        }
        Ok(Self { data, n, d, labels })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.d)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn num_classes(&self) -> Option<usize> {
        self.labels
            .as_ref()
            .map(|l| l.iter().copied().max().map_or(0, |m| m + 1))
    }

    pub fn without_labels(&self) -> Self {
        Self {
            labels: None,
            ..self.clone()
        }
    }

    /// Dataset restricted to `indices`, in the given order. Labels are dropped
    /// because a subset need not contain every class.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            data.extend_from_slice(self.point(i));
        }
        Self {
            data,
            n: indices.len(),
            d: self.d,
            labels: None,
        }
    }

    /// Arithmetic mean of all points.
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.d];
        for p in self.points() {
            for (acc, v) in m.iter_mut().zip(p) {
                *acc += v;
            }
        }
        m.iter_mut().for_each(|v| *v /= self.n as f64);
        m
    }

    /// Population variance of each coordinate.
    pub fn variances(&self) -> Vec<f64> {
        let mean = self.mean();
        let mut var = vec![0.0; self.d];
        for p in self.points() {
            for ((acc, v), m) in var.iter_mut().zip(p).zip(&mean) {
                *acc += (v - m) * (v - m);
            }
        }
        var.iter_mut().for_each(|v| *v /= self.n as f64);
        var
    }

    /// Reads the `x0,...,x{d-1}[,label]` CSV format.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let mut d = 0;
        let mut has_label = false;
        for (col, name) in headers.iter().enumerate() {
            if name == "label" && col + 1 == headers.len() {
                has_label = true;
            } else if name == format!("x{col}") {
                d += 1;
            } else {
                return invalid(format!("unexpected column header {name:?} at position {col}"));
            }
        }
        if d == 0 {
            return invalid("csv has no coordinate columns");
        }
        let mut data = Vec::new();
        let mut labels = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            for col in 0..d {
                let v: f64 = rec[col].parse().map_err(|_| {
                    ClusterError::InvalidInput(format!(
                        "row {}: cannot parse {:?} as a number",
                        row + 1,
                        &rec[col]
                    ))
                })?;
                data.push(v);
            }
            if has_label {
                let l: usize = rec[d].parse().map_err(|_| {
                    ClusterError::InvalidInput(format!(
                        "row {}: cannot parse label {:?}",
                        row + 1,
                        &rec[d]
                    ))
                })?;
                labels.push(l);
            }
        }
        Self::from_flat(data, d, has_label.then_some(labels))
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (0..self.d).map(|i| format!("x{i}")).collect();
        if self.labels.is_some() {
            header.push("label".into());
        }
        w.write_record(&header)?;
        for i in 0..self.n {
            let mut row: Vec<String> = self.point(i).iter().map(|v| v.to_string()).collect();
            if let Some(labels) = &self.labels {
                row.push(labels[i].to_string());
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Euclidean,
    /// Not a metric in the strict sense: violates the triangle inequality.
    SquaredEuclidean,
    Manhattan,
}

impl Metric {
    /// Distance without the dimension check; callers guarantee equal lengths.
    #[inline]
    pub fn eval(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => squared_euclidean(a, b).sqrt(),
            Metric::SquaredEuclidean => squared_euclidean(a, b),
            Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::SquaredEuclidean => "squared_euclidean",
            Metric::Manhattan => "manhattan",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = ClusterError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "squared_euclidean" | "sqeuclidean" => Ok(Metric::SquaredEuclidean),
            "manhattan" => Ok(Metric::Manhattan),
            other => invalid(format!("unknown metric {other:?}")),
        }
    }
}

#[inline]
pub fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn distance(p: &[f64], q: &[f64], metric: Metric) -> Result<f64> {
    if p.len() != q.len() {
        return Err(ClusterError::DimensionMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    Ok(metric.eval(p, q))
}

/// Dense symmetric `n x n` matrix of pairwise distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Square submatrix over `indices`, in the given order.
    pub fn restrict(&self, indices: &[usize]) -> Self {
        let m = indices.len();
        let mut entries = Vec::with_capacity(m * m);
        for &i in indices {
            let row = self.row(i);
            entries.extend(indices.iter().map(|&j| row[j]));
        }
        Self { n: m, entries }
    }

    /// Builds a matrix from a full row-major grid, checking symmetry and the
    /// zero diagonal.
    pub fn from_entries(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return invalid(format!("expected {} entries, got {}", n * n, entries.len()));
        }
        for i in 0..n {
            if entries[i * n + i] != 0.0 {
                return invalid(format!("nonzero diagonal at {i}"));
            }
            for j in 0..i {
                let v = entries[i * n + j];
                if v != entries[j * n + i] || !(v >= 0.0) || !v.is_finite() {
                    return invalid(format!("entry ({i},{j}) is asymmetric or not a finite nonnegative value"));
                }
            }
        }
        Ok(Self { n, entries })
    }
}

pub fn distance_matrix(ds: &Dataset, metric: Metric) -> DistanceMatrix {
    let n = ds.len();
    let mut entries = vec![0.0; n * n];
    // Each worker owns whole rows; the (i, j) and (j, i) entries come from
    // the same argument order so the result is exactly symmetric.
    {
        let mut rows: Vec<&mut [f64]> = entries.chunks_mut(n).collect();
        parallel::fill_indexed(&mut rows, |i, row| {
            let p = ds.point(i);
            for (j, slot) in row.iter_mut().enumerate() {
                if j != i {
                    let (a, b) = if i < j { (p, ds.point(j)) } else { (ds.point(j), p) };
                    *slot = metric.eval(a, b);
                }
            }
        });
    }
    DistanceMatrix { n, entries }
}

/// Cluster membership of one point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Assignment {
    Cluster(usize),
    Noise,
}

impl Assignment {
    pub fn cluster(self) -> Option<usize> {
        match self {
            Assignment::Cluster(c) => Some(c),
            Assignment::Noise => None,
        }
    }

    pub fn is_noise(self) -> bool {
        matches!(self, Assignment::Noise)
    }
}

impl Serialize for Assignment {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.cluster().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Assignment {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(Option::<usize>::deserialize(d)?.map_or(Assignment::Noise, Assignment::Cluster))
    }
}

/// Per-point cluster assignment; noise points are carried as `Assignment::Noise`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clustering {
    assignment: Vec<Assignment>,
    k: usize,
}

impl Clustering {
    pub fn new(assignment: Vec<Assignment>, k: usize) -> Result<Self> {
        for (i, a) in assignment.iter().enumerate() {
            if let Assignment::Cluster(c) = a {
                if *c >= k {
                    return invalid(format!("point {i} assigned to cluster {c} but k={k}"));
                }
            }
        }
        Ok(Self { assignment, k })
    }

    /// Clustering with no noise from plain cluster ids.
    pub fn from_labels(labels: &[usize], k: usize) -> Result<Self> {
        Self::new(labels.iter().map(|&c| Assignment::Cluster(c)).collect(), k)
    }

    pub(crate) fn from_parts_unchecked(assignment: Vec<Assignment>, k: usize) -> Self {
        debug_assert!(assignment.iter().all(|a| a.cluster().is_none_or(|c| c < k)));
        Self { assignment, k }
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn assignment(&self) -> &[Assignment] {
        &self.assignment
    }

    pub fn get(&self, i: usize) -> Assignment {
        self.assignment[i]
    }

    pub fn noise_count(&self) -> usize {
        self.assignment.iter().filter(|a| a.is_noise()).count()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for c in self.assignment.iter().filter_map(|a| a.cluster()) {
            sizes[c] += 1;
        }
        sizes
    }

    /// Cluster ids with noise mapped to `None`.
    pub fn to_options(&self) -> Vec<Option<usize>> {
        self.assignment.iter().map(|a| a.cluster()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_examples() {
        let (a, b) = ([0.0, 0.0], [3.0, 4.0]);
        assert_eq!(distance(&a, &b, Metric::Euclidean).unwrap(), 5.0);
        assert_eq!(distance(&a, &b, Metric::Manhattan).unwrap(), 7.0);
        assert_eq!(distance(&[1.0, 1.0], &[1.0, 1.0], Metric::SquaredEuclidean).unwrap(), 0.0);
    }

    #[test]
    fn distance_rejects_dimension_mismatch() {
        let err = distance(&[0.0, 0.0], &[1.0], Metric::Euclidean).unwrap_err();
        assert!(matches!(err, ClusterError::DimensionMismatch { expected: 2, got: 1 }));
    }

    #[test]
    fn three_point_matrix() {
        let ds = Dataset::new(vec![vec![0.0, 0.0], vec![3.0, 0.0], vec![0.0, 4.0]], None).unwrap();
        let dm = distance_matrix(&ds, Metric::Euclidean);
        assert_eq!(dm.get(0, 1), 3.0);
        assert_eq!(dm.get(0, 2), 4.0);
        assert_eq!(dm.get(1, 2), 5.0);
        for i in 0..3 {
            assert_eq!(dm.get(i, i), 0.0);
            for j in 0..3 {
                assert_eq!(dm.get(i, j), dm.get(j, i));
            }
        }
    }

    #[test]
    fn dataset_validation() {
        assert!(Dataset::new(vec![], None).is_err());
        assert!(Dataset::new(vec![vec![1.0], vec![1.0, 2.0]], None).is_err());
        assert!(Dataset::new(vec![vec![f64::NAN]], None).is_err());
        // class 1 missing
        assert!(Dataset::new(vec![vec![0.0], vec![1.0]], Some(vec![0, 2])).is_err());
        assert!(Dataset::new(vec![vec![0.0], vec![1.0]], Some(vec![1, 0])).is_ok());
    }

    #[test]
    fn csv_with_and_without_labels() {
        let text = "x0,x1,label\n1.5,2,0\n-3,4.25,1\n";
        let ds = Dataset::read_csv(text.as_bytes()).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.dim(), 2);
        assert_eq!(ds.point(1), &[-3.0, 4.25]);
        assert_eq!(ds.labels(), Some(&[0, 1][..]));
        let mut out = Vec::new();
        ds.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);

        let unlabeled = Dataset::read_csv("x0\n1\n2\n".as_bytes()).unwrap();
        assert_eq!(unlabeled.labels(), None);
        assert!(Dataset::read_csv("a,b\n1,2\n".as_bytes()).is_err());
        assert!(Dataset::read_csv("x0,label\nfoo,0\n".as_bytes()).is_err());
    }

    #[test]
    fn clustering_rejects_out_of_range() {
        assert!(Clustering::from_labels(&[0, 1, 2], 2).is_err());
        let c = Clustering::new(vec![Assignment::Cluster(0), Assignment::Noise], 1).unwrap();
        assert_eq!(c.noise_count(), 1);
        assert_eq!(serde_json::to_string(&c.to_options()).unwrap(), "[0,null]");
    }
}

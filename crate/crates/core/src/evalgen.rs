//! Synthetic labeled datasets, matched-label accuracy and the timing harness.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::data::{Clustering, Dataset, Metric};
use crate::density::{dbscan, extract_clusters, optics, DbscanConfig};
use crate::error::{invalid, ClusterError, Result};
use crate::hierarchical::{agglomerate, cut, Linkage};
use crate::medoids::{clara, pam, ClaraConfig};
use crate::mixture::{bic_select, fit_gmm, CovType, GmmConfig};
use crate::partitional::{kmeans_restarts, Init, KMeansConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Four classes; first coordinate normal, second Poisson.
    Mixed4,
    /// Five bivariate Gaussian classes.
    Gauss5,
    /// Four classes with both coordinates Poisson.
    Poisson4,
    Custom,
}

impl Preset {
    /// Benchmark presets in table order.
    pub const BENCH: [Preset; 3] = [Preset::Mixed4, Preset::Gauss5, Preset::Poisson4];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Mixed4 => "mixed4",
            Preset::Gauss5 => "gauss5",
            Preset::Poisson4 => "poisson4",
            Preset::Custom => "custom",
        }
    }

    /// 1-based table number of a benchmark preset.
    pub fn from_number(i: usize) -> Result<Self> {
        match i {
            1 => Ok(Preset::Mixed4),
            2 => Ok(Preset::Gauss5),
            3 => Ok(Preset::Poisson4),
            _ => invalid(format!("benchmark preset must be 1, 2 or 3, got {i}")),
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = ClusterError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mixed4" | "1" => Ok(Preset::Mixed4),
            "gauss5" | "2" => Ok(Preset::Gauss5),
            "poisson4" | "3" => Ok(Preset::Poisson4),
            "custom" => Ok(Preset::Custom),
            other => invalid(format!("unknown preset {other:?}")),
        }
    }
}

/// Distribution of one coordinate within a class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum CoordDist {
    Normal { mean: f64, sd: f64 },
    Poisson { lambda: f64 },
}

impl CoordDist {
    pub fn mean(self) -> f64 {
        match self {
            CoordDist::Normal { mean, .. } => mean,
            CoordDist::Poisson { lambda } => lambda,
        }
    }

    pub fn sd(self) -> f64 {
        match self {
            CoordDist::Normal { sd, .. } => sd,
            CoordDist::Poisson { lambda } => lambda.sqrt(),
        }
    }
}

/// A class is a product of independent coordinate distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub coords: Vec<CoordDist>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub preset: Preset,
    pub n: usize,
    pub classes: Vec<ClassSpec>,
    pub seed: u64,
}

#[derive(Deserialize)]
struct PresetFile {
    classes: Vec<ClassSpec>,
}

impl Preset {
    /// Frozen class parameters shipped with the crate.
    fn config(self) -> Option<&'static str> {
        match self {
            Preset::Mixed4 => Some(include_str!("../presets/mixed4.json")),
            Preset::Gauss5 => Some(include_str!("../presets/gauss5.json")),
            Preset::Poisson4 => Some(include_str!("../presets/poisson4.json")),
            Preset::Custom => None,
        }
    }
}

impl DatasetSpec {
    /// Default class parameters of a benchmark preset.
    pub fn preset(preset: Preset, n: usize, seed: u64) -> Result<Self> {
        let Some(text) = preset.config() else {
            return invalid("custom datasets need explicit class parameters");
        };
        let file: PresetFile = serde_json::from_str(text)?;
        Ok(Self {
            preset,
            n,
            classes: file.classes,
            seed,
        })
    }

    /// Points per class: equal shares, remainder to class 0.
    pub fn class_counts(&self) -> Vec<usize> {
        let c = self.classes.len();
        let mut counts = vec![self.n / c; c];
        counts[0] += self.n % c;
        counts
    }

    fn validate(&self) -> Result<()> {
        let c = self.classes.len();
        if c == 0 {
            return invalid("at least one class is required");
        }
        if self.n < c {
            return invalid(format!("n={} is smaller than the number of classes {c}", self.n));
        }
        let d = self.classes[0].coords.len();
        if d == 0 {
            return invalid("classes need at least one coordinate");
        }
        for (i, class) in self.classes.iter().enumerate() {
            if class.coords.len() != d {
                return invalid(format!("class {i} has {} coordinates, expected {d}", class.coords.len()));
            }
            for coord in &class.coords {
                match *coord {
                    CoordDist::Normal { mean, sd } if !(sd > 0.0 && sd.is_finite() && mean.is_finite()) => {
                        return invalid(format!("class {i}: normal needs finite mean and sd > 0"));
                    }
                    CoordDist::Poisson { lambda } if !(lambda > 0.0 && lambda.is_finite()) => {
                        return invalid(format!("class {i}: poisson needs lambda > 0"));
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

enum Sampler {
    Normal(Normal<f64>),
    Poisson(Poisson<f64>),
}

/// Draws the dataset; rows are grouped by class in class order.
pub fn generate(spec: &DatasetSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let d = spec.classes[0].coords.len();
    let mut data = Vec::with_capacity(spec.n * d);
    let mut labels = Vec::with_capacity(spec.n);
    for (class, (cs, count)) in spec.classes.iter().zip(spec.class_counts()).enumerate() {
        let samplers: Vec<Sampler> = cs
            .coords
            .iter()
            .map(|c| match *c {
                CoordDist::Normal { mean, sd } => Normal::new(mean, sd)
                    .map(Sampler::Normal)
                    .map_err(|e| ClusterError::InvalidInput(e.to_string())),
                CoordDist::Poisson { lambda } => Poisson::new(lambda)
                    .map(Sampler::Poisson)
                    .map_err(|e| ClusterError::InvalidInput(e.to_string())),
            })
            .collect::<Result<_>>()?;
        for _ in 0..count {
            for s in &samplers {
                data.push(match s {
                    Sampler::Normal(dist) => dist.sample(&mut rng),
                    Sampler::Poisson(dist) => dist.sample(&mut rng),
                });
            }
            labels.push(class);
        }
    }
    Dataset::from_flat(data, d, Some(labels))
}

/// Fraction of points whose cluster maps to their class under the best
/// one-to-one matching of clusters to classes. Noise never counts as correct
/// and unmatched clusters contribute nothing.
pub fn accuracy(result: &Clustering, truth: &[usize]) -> Result<f64> {
    if result.len() != truth.len() {
        return invalid(format!(
            "clustering has {} entries but truth has {}",
            result.len(),
            truth.len()
        ));
    }
    if truth.is_empty() {
        return invalid("accuracy of an empty clustering");
    }
    let classes = truth.iter().copied().max().map_or(0, |m| m + 1);
    let k = result.k();
    let mut table = vec![vec![0i64; classes]; k];
    for (a, &t) in result.assignment().iter().zip(truth) {
        if let Some(c) = a.cluster() {
            table[c][t] += 1;
        }
    }
    let matched = max_weight_matching(&table);
    Ok(matched as f64 / truth.len() as f64)
}

/// Maximum total weight of a one-to-one matching between rows and columns of
/// a nonnegative table (Hungarian algorithm on the padded square cost matrix).
pub fn max_weight_matching(table: &[Vec<i64>]) -> i64 {
    let rows = table.len();
    let cols = table.first().map_or(0, Vec::len);
    let m = rows.max(cols);
    if m == 0 {
        return 0;
    }
    let top = table.iter().flatten().copied().max().unwrap_or(0);
    let weight = |i: usize, j: usize| if i < rows && j < cols { table[i][j] } else { 0 };
    let cost = |i: usize, j: usize| top - weight(i, j);

    // 1-based potentials formulation; p[j] is the row matched to column j.
    let mut u = vec![0i64; m + 1];
    let mut v = vec![0i64; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=m {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![i64::MAX; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=m).map(|j| weight(p[j] - 1, j - 1)).sum()
}

fn one() -> usize {
    1
}

/// Restarts of the suite's K-means++ row.
pub const KMEANSPP_RESTARTS: usize = 10;

/// One entry of a benchmark suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum AlgoConfig {
    Gmm {
        k: usize,
        cov_type: CovType,
        seed: u64,
    },
    /// Mixture whose component count is chosen by BIC over `1..=k_max`.
    GmmSelect {
        k_max: usize,
        cov_type: CovType,
        seed: u64,
        /// EM starts per candidate model; the highest likelihood is kept.
        #[serde(default = "one")]
        restarts: usize,
    },
    Kmeans {
        k: usize,
        init: Init,
        seed: u64,
        /// Independent starts; the lowest WCSS is kept.
        #[serde(default = "one")]
        restarts: usize,
    },
    Optics {
        min_pts: usize,
        /// Neighbourhood radius; absent means unbounded.
        #[serde(default)]
        eps: Option<f64>,
        threshold: f64,
    },
    Clara {
        k: usize,
        num_samples: usize,
        sample_size: usize,
        seed: u64,
    },
    Pam {
        k: usize,
        metric: Metric,
    },
    Hierarchical {
        k: usize,
        linkage: Linkage,
        metric: Metric,
    },
    Dbscan {
        eps: f64,
        min_pts: usize,
    },
}

impl AlgoConfig {
    /// Row label as used in the result tables.
    pub fn id(&self) -> String {
        match self {
            AlgoConfig::Gmm { .. } | AlgoConfig::GmmSelect { .. } => "gmm".into(),
            AlgoConfig::Kmeans { init: Init::PlusPlus, .. } => "kmeans++".into(),
            AlgoConfig::Kmeans { .. } => "kmeans".into(),
            AlgoConfig::Optics { .. } => "optics".into(),
            AlgoConfig::Clara { .. } => "clara".into(),
            AlgoConfig::Pam { .. } => "pam".into(),
            AlgoConfig::Hierarchical { linkage, .. } => match linkage {
                Linkage::Upgma => "upgma".into(),
                Linkage::Single => "single".into(),
                Linkage::Complete => "complete".into(),
                Linkage::Ward => "ward".into(),
            },
            AlgoConfig::Dbscan { .. } => "dbscan".into(),
        }
    }

    /// Parameters without the algorithm tag.
    pub fn params(&self) -> BTreeMap<String, serde_json::Value> {
        let mut map: BTreeMap<String, serde_json::Value> = match serde_json::to_value(self) {
            Ok(serde_json::Value::Object(m)) => m.into_iter().collect(),
            _ => BTreeMap::new(),
        };
        map.remove("algorithm");
        map
    }

    /// `key=value` pairs joined by `;`, keys sorted.
    pub fn config_string(&self) -> String {
        self.params()
            .iter()
            .map(|(k, v)| match v {
                serde_json::Value::String(s) => format!("{k}={s}"),
                serde_json::Value::Null => format!("{k}=inf"),
                other => format!("{k}={other}"),
            })
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn run(&self, ds: &Dataset) -> Result<Clustering> {
        match *self {
            AlgoConfig::Gmm { k, cov_type, seed } => {
                Ok(fit_gmm(ds, &GmmConfig::new(k, cov_type, seed))?.clustering)
            }
            AlgoConfig::GmmSelect {
                k_max,
                cov_type,
                seed,
                restarts,
            } => Ok(bic_select(ds, 1..=k_max, &[cov_type], seed, restarts)?.1.clustering),
            AlgoConfig::Kmeans {
                k,
                init,
                seed,
                restarts,
            } => Ok(kmeans_restarts(ds, &KMeansConfig::new(k, init, seed), restarts)?.clustering),
            AlgoConfig::Optics {
                min_pts,
                eps,
                threshold,
            } => {
                let ord = optics(ds, min_pts, eps.unwrap_or(f64::INFINITY), Metric::Euclidean)?;
                extract_clusters(&ord, threshold)
            }
            AlgoConfig::Clara {
                k,
                num_samples,
                sample_size,
                seed,
            } => {
                let cfg = ClaraConfig {
                    k,
                    num_samples,
                    sample_size,
                    seed,
                };
                Ok(clara(ds, &cfg, Metric::Euclidean)?.result.clustering)
            }
            AlgoConfig::Pam { k, metric } => Ok(pam(ds, k, metric)?.clustering),
            AlgoConfig::Hierarchical { k, linkage, metric } => cut(&agglomerate(ds, linkage, metric)?, k),
            AlgoConfig::Dbscan { eps, min_pts } => dbscan(ds, &DbscanConfig::new(eps, min_pts)?, Metric::Euclidean),
        }
    }
}

/// OPTICS reachability threshold read off the reachability plot of a preset.
pub fn preset_optics_threshold(preset: Preset) -> Option<f64> {
    match preset {
        Preset::Mixed4 => Some(4.0),
        Preset::Gauss5 => Some(1.0),
        Preset::Poisson4 => Some(6.5),
        Preset::Custom => None,
    }
}

/// (min_pts, eps) of the three DBSCAN rows of a preset.
pub fn preset_dbscan_params(preset: Preset) -> Option<[(usize, f64); 3]> {
    match preset {
        Preset::Mixed4 => Some([(3, 2.0), (4, 2.0), (5, 2.2)]),
        Preset::Gauss5 => Some([(3, 0.6), (4, 0.6), (5, 0.6)]),
        Preset::Poisson4 => Some([(3, 2.5), (4, 3.0), (5, 3.0)]),
        Preset::Custom => None,
    }
}

/// Largest component count tried by the suite's mixture model.
pub const GMM_K_MAX: usize = 9;

/// EM starts per candidate model in the suite's mixture row.
pub const GMM_RESTARTS: usize = 3;

/// Default suite of a benchmark preset: GMM, K-means, K-means++, OPTICS,
/// CLARA, PAM, UPGMA and three DBSCAN settings. The mixture picks its own
/// component count by BIC; the other partitional methods get `k`.
pub fn preset_suite(preset: Preset, k: usize, seed: u64) -> Result<Vec<AlgoConfig>> {
    let (Some(threshold), Some(db)) = (preset_optics_threshold(preset), preset_dbscan_params(preset)) else {
        return invalid("custom datasets need an explicit suite");
    };
    let mut suite = vec![
        AlgoConfig::GmmSelect {
            k_max: GMM_K_MAX.max(k),
            cov_type: CovType::Diagonal,
            seed,
            restarts: GMM_RESTARTS,
        },
        AlgoConfig::Kmeans {
            k,
            init: Init::Forgy,
            seed,
            restarts: 1,
        },
        AlgoConfig::Kmeans {
            k,
            init: Init::PlusPlus,
            seed,
            restarts: KMEANSPP_RESTARTS,
        },
        AlgoConfig::Optics {
            min_pts: DbscanConfig::DEFAULT_MIN_PTS,
            eps: None,
            threshold,
        },
        AlgoConfig::Clara {
            k,
            num_samples: 50,
            sample_size: 50,
            seed,
        },
        AlgoConfig::Pam {
            k,
            metric: Metric::Euclidean,
        },
        AlgoConfig::Hierarchical {
            k,
            linkage: Linkage::Upgma,
            metric: Metric::Euclidean,
        },
    ];
    suite.extend(db.iter().map(|&(min_pts, eps)| AlgoConfig::Dbscan { eps, min_pts }));
    Ok(suite)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub algorithm: String,
    pub config: BTreeMap<String, serde_json::Value>,
    /// Median wall-clock time of the clustering call.
    pub runtime_ms: Option<f64>,
    pub accuracy: Option<f64>,
    pub clusters: Option<usize>,
    pub noise: Option<usize>,
    pub error: Option<String>,
}

impl BenchRecord {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }

    /// `key=value` pairs joined by `;`, keys sorted.
    pub fn config_string(&self) -> String {
        self.config
            .iter()
            .map(|(k, v)| match v {
                serde_json::Value::String(s) => format!("{k}={s}"),
                serde_json::Value::Null => format!("{k}=inf"),
                other => format!("{k}={other}"),
            })
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Times every suite entry `repeats` times; accuracy is taken from the last
/// run. Failures are recorded per row.
pub fn benchmark(ds: &Dataset, suite: &[AlgoConfig], repeats: usize) -> Result<Vec<BenchRecord>> {
    if repeats == 0 {
        return invalid("repeats must be at least 1");
    }
    let Some(truth) = ds.labels() else {
        return invalid("benchmarking needs a labeled dataset");
    };
    let mut records = Vec::with_capacity(suite.len());
    for cfg in suite {
        let mut times = Vec::with_capacity(repeats);
        let mut outcome = None;
        for _ in 0..repeats {
            let start = Instant::now();
            let res = cfg.run(ds);
            times.push(start.elapsed().as_secs_f64() * 1e3);
            let failed = res.is_err();
            outcome = Some(res);
            if failed {
                break;
            }
        }
        let record = match outcome.expect("repeats >= 1") {
            Ok(clustering) => BenchRecord {
                algorithm: cfg.id(),
                config: cfg.params(),
                runtime_ms: Some(median(&mut times).max(1e-6)),
                accuracy: Some(accuracy(&clustering, truth)?),
                clusters: Some(clustering.k()),
                noise: Some(clustering.noise_count()),
                error: None,
            },
            Err(e) => BenchRecord {
                algorithm: cfg.id(),
                config: cfg.params(),
                runtime_ms: None,
                accuracy: None,
                clusters: None,
                noise: None,
                error: Some(e.to_string()),
            },
        };
        records.push(record);
    }
    Ok(records)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len();
    if m % 2 == 1 {
        values[m / 2]
    } else {
        0.5 * (values[m / 2 - 1] + values[m / 2])
    }
}

/// Writes `algorithm,config,runtime_ms,accuracy`; failed rows leave the
/// numeric fields empty.
pub fn write_bench_csv<W: Write>(records: &[BenchRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["algorithm", "config", "runtime_ms", "accuracy"])?;
    for r in records {
        w.write_record(&[
            r.algorithm.clone(),
            r.config_string(),
            r.runtime_ms.map_or_else(String::new, |v| v.to_string()),
            r.accuracy.map_or_else(String::new, |v| v.to_string()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Assignment;

    #[test]
    fn accuracy_examples() {
        let truth = [0, 0, 1, 1];
        let same = Clustering::from_labels(&truth, 2).unwrap();
        assert_eq!(accuracy(&same, &truth).unwrap(), 1.0);
        let swapped = Clustering::from_labels(&[1, 1, 0, 0], 2).unwrap();
        assert_eq!(accuracy(&swapped, &truth).unwrap(), 1.0);
        let off = Clustering::from_labels(&[0, 0, 0, 1], 2).unwrap();
        assert_eq!(accuracy(&off, &truth).unwrap(), 0.75);
        let noise = Clustering::new(vec![Assignment::Noise; 4], 0).unwrap();
        assert_eq!(accuracy(&noise, &truth).unwrap(), 0.0);
        assert!(accuracy(&same, &[0, 1]).is_err());
    }

    #[test]
    fn surplus_clusters_match_nothing() {
        let truth = [0, 0, 0, 1, 1, 1];
        let split = Clustering::from_labels(&[0, 0, 2, 1, 1, 3], 4).unwrap();
        assert!((accuracy(&split, &truth).unwrap() - 4.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn matching_rectangular_tables() {
        assert_eq!(max_weight_matching(&[vec![5, 1, 0]]), 5);
        assert_eq!(max_weight_matching(&[vec![5], vec![7], vec![2]]), 7);
        assert_eq!(max_weight_matching(&[vec![3, 3], vec![3, 0]]), 6);
        assert_eq!(max_weight_matching(&[]), 0);
    }

    #[test]
    fn mixed_preset_shape() {
        let spec = DatasetSpec::preset(Preset::Mixed4, 1000, 7).unwrap();
        let ds = generate(&spec).unwrap();
        assert_eq!(ds.len(), 1000);
        assert_eq!(ds.num_classes(), Some(4));
        assert!(ds.points().all(|p| p[1] >= 0.0 && p[1].fract() == 0.0));
        assert_eq!(generate(&spec).unwrap(), ds);
    }

    #[test]
    fn class_counts_remainder_to_first() {
        let spec = DatasetSpec::preset(Preset::Gauss5, 1003, 0).unwrap();
        assert_eq!(spec.class_counts(), vec![203, 200, 200, 200, 200]);
    }

    #[test]
    fn spec_validation() {
        assert!(generate(&DatasetSpec::preset(Preset::Gauss5, 3, 0).unwrap()).is_err());
        assert!(DatasetSpec::preset(Preset::Custom, 10, 0).is_err());
        let bad = DatasetSpec {
            preset: Preset::Custom,
            n: 10,
            classes: vec![ClassSpec {
                coords: vec![CoordDist::Normal { mean: 0.0, sd: 0.0 }],
            }],
            seed: 0,
        };
        assert!(generate(&bad).is_err());
        let bad_lambda = DatasetSpec {
            classes: vec![ClassSpec {
                coords: vec![CoordDist::Poisson { lambda: -1.0 }],
            }],
            ..bad
        };
        assert!(generate(&bad_lambda).is_err());
    }

    #[test]
    fn suite_rows() {
        for preset in Preset::BENCH {
            let suite = preset_suite(preset, 4, 1).unwrap();
            let ids: Vec<String> = suite.iter().map(AlgoConfig::id).collect();
            assert_eq!(
                ids,
                ["gmm", "kmeans", "kmeans++", "optics", "clara", "pam", "upgma", "dbscan", "dbscan", "dbscan"]
            );
        }
        let p3 = preset_suite(Preset::Poisson4, 4, 1).unwrap();
        assert_eq!(p3[7], AlgoConfig::Dbscan { eps: 2.5, min_pts: 3 });
        assert_eq!(p3[9], AlgoConfig::Dbscan { eps: 3.0, min_pts: 5 });
    }

    #[test]
    fn config_strings() {
        let cfg = AlgoConfig::Optics {
            min_pts: 5,
            eps: None,
            threshold: 6.5,
        };
        assert_eq!(cfg.config_string(), "eps=inf;min_pts=5;threshold=6.5");
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<AlgoConfig>(&json).unwrap(), cfg);
    }

    #[test]
    fn benchmark_contract_on_small_data() {
        let spec = DatasetSpec::preset(Preset::Gauss5, 60, 3).unwrap();
        let ds = generate(&spec).unwrap();
        let suite = vec![
            AlgoConfig::Kmeans {
                k: 5,
                init: Init::PlusPlus,
                seed: 1,
                restarts: 2,
            },
            AlgoConfig::Kmeans {
                k: 100,
                init: Init::Forgy,
                seed: 1,
                restarts: 1,
            },
        ];
        let rows = benchmark(&ds, &suite, 3).unwrap();
        assert_eq!(rows.len(), 2);
        let ok = &rows[0];
        assert!(ok.runtime_ms.unwrap() > 0.0);
        assert!((0.0..=1.0).contains(&ok.accuracy.unwrap()));
        assert!(rows[1].failed());
        assert!(benchmark(&ds, &suite, 0).is_err());
        assert!(benchmark(&ds.without_labels(), &suite, 1).is_err());

        let mut out = Vec::new();
        write_bench_csv(&rows, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("algorithm,config,runtime_ms,accuracy\nkmeans++,init=plus_plus;k=5;restarts=2;seed=1,"));
        assert!(text.ends_with("kmeans,init=forgy;k=100;restarts=1;seed=1,,\n"));
    }
}

//! Gaussian mixture models fitted by expectation-maximization, with BIC
//! model selection over the number of components and covariance structure.
//!
//! Densities are evaluated in log space through a Cholesky factor of each
//! covariance; mixture sums use log-sum-exp so well separated components do
//! not underflow. Covariances are stored row-major as `d * d` slices.

use std::f64::consts::PI;
use std::io::Write;
use std::ops::RangeInclusive;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::{Assignment, Clustering, Dataset};
use crate::error::{invalid, ClusterError, Result};
use crate::parallel;
use crate::partitional::{kmeanspp_seed, lloyd};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovType {
    Full,
    /// Axis-aligned ellipsoids with per-component variances.
    Diagonal,
    Spherical,
}

impl CovType {
    pub const ALL: [CovType; 3] = [CovType::Full, CovType::Diagonal, CovType::Spherical];

    pub fn name(self) -> &'static str {
        match self {
            CovType::Full => "full",
            CovType::Diagonal => "diagonal",
            CovType::Spherical => "spherical",
        }
    }
}

impl std::str::FromStr for CovType {
    type Err = ClusterError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(CovType::Full),
            "diagonal" | "diag" => Ok(CovType::Diagonal),
            "spherical" => Ok(CovType::Spherical),
            other => invalid(format!("unknown covariance type {other:?}")),
        }
    }
}

/// Number of free parameters of a `k`-component mixture in `d` dimensions.
pub fn param_count(cov_type: CovType, k: usize, d: usize) -> usize {
    let cov = match cov_type {
        CovType::Full => k * d * (d + 1) / 2,
        CovType::Diagonal => k * d,
        CovType::Spherical => k,
    };
    (k - 1) + k * d + cov
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureParams {
    pub cov_type: CovType,
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    /// Row-major `d x d` covariance of every component.
    pub covariances: Vec<Vec<f64>>,
}

impl MixtureParams {
    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    fn components(&self) -> Result<Vec<Component>> {
        self.weights
            .iter()
            .zip(&self.means)
            .zip(&self.covariances)
            .map(|((&w, m), c)| Component::new(w, m, c))
            .collect()
    }
}

/// A Gaussian prepared for repeated log-density evaluation.
struct Component {
    log_weight: f64,
    mean: Vec<f64>,
    /// Lower Cholesky factor, row-major.
    chol: Vec<f64>,
    log_norm: f64,
}

impl Component {
    fn new(weight: f64, mean: &[f64], cov: &[f64]) -> Result<Self> {
        let d = mean.len();
        if cov.len() != d * d {
            return Err(ClusterError::DimensionMismatch {
                expected: d * d,
                got: cov.len(),
            });
        }
        let factor = DMatrix::from_row_slice(d, d, cov)
            .cholesky()
            .ok_or_else(|| ClusterError::Numerical("covariance is not positive definite".into()))?;
        let l = factor.l();
        let mut chol = vec![0.0; d * d];
        let mut log_det_half = 0.0;
        for r in 0..d {
            for c in 0..=r {
                chol[r * d + c] = l[(r, c)];
            }
            log_det_half += l[(r, r)].ln();
        }
        Ok(Self {
            log_weight: weight.ln(),
            mean: mean.to_vec(),
            chol,
            log_norm: -0.5 * d as f64 * (2.0 * PI).ln() - log_det_half,
        })
    }

    /// log N(x | mean, cov) via forward substitution.
    fn log_pdf(&self, x: &[f64], work: &mut [f64]) -> f64 {
        let d = self.mean.len();
        let mut maha = 0.0;
        for r in 0..d {
            let mut v = x[r] - self.mean[r];
            for c in 0..r {
                v -= self.chol[r * d + c] * work[c];
            }
            v /= self.chol[r * d + r];
            work[r] = v;
            maha += v * v;
        }
        self.log_norm - 0.5 * maha
    }
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

pub fn gaussian_pdf(x: &[f64], mean: &[f64], cov: &[f64]) -> Result<f64> {
    if x.len() != mean.len() {
        return Err(ClusterError::DimensionMismatch {
            expected: mean.len(),
            got: x.len(),
        });
    }
    let comp = Component::new(1.0, mean, cov)?;
    Ok(comp.log_pdf(x, &mut vec![0.0; x.len()]).exp())
}

pub fn mixture_pdf(x: &[f64], params: &MixtureParams) -> Result<f64> {
    Ok(log_mixture_pdf(x, &params.components()?).exp())
}

fn log_mixture_pdf(x: &[f64], comps: &[Component]) -> f64 {
    let mut work = vec![0.0; x.len()];
    let terms: Vec<f64> = comps.iter().map(|c| c.log_weight + c.log_pdf(x, &mut work)).collect();
    log_sum_exp(&terms)
}

pub fn log_likelihood(ds: &Dataset, params: &MixtureParams) -> Result<f64> {
    check_dims(ds, params)?;
    let comps = params.components()?;
    Ok(ds.points().map(|x| log_mixture_pdf(x, &comps)).sum())
}

fn check_dims(ds: &Dataset, params: &MixtureParams) -> Result<()> {
    if params.k() == 0 {
        return invalid("mixture has no components");
    }
    if params.dim() != ds.dim() {
        return Err(ClusterError::DimensionMismatch {
            expected: ds.dim(),
            got: params.dim(),
        });
    }
    Ok(())
}

/// Posterior component probabilities, one row per point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Responsibilities {
    n: usize,
    k: usize,
    values: Vec<f64>,
}

impl Responsibilities {
    pub fn new(n: usize, k: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * k || k == 0 {
            return invalid(format!("expected {}x{} responsibilities", n, k));
        }
        Ok(Self { n, k, values })
    }

    /// One-hot rows from hard labels.
    pub fn from_labels(labels: &[usize], k: usize) -> Result<Self> {
        let mut values = vec![0.0; labels.len() * k];
        for (i, &l) in labels.iter().enumerate() {
            if l >= k {
                return invalid(format!("label {l} out of range for k={k}"));
            }
            values[i * k + l] = 1.0;
        }
        Self::new(labels.len(), k, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.k..(i + 1) * self.k]
    }

    /// Highest-responsibility component per point (lowest index on ties).
    pub fn argmax(&self) -> Vec<usize> {
        (0..self.n)
            .map(|i| {
                let row = self.row(i);
                let mut best = 0;
                for l in 1..self.k {
                    if row[l] > row[best] {
                        best = l;
                    }
                }
                best
            })
            .collect()
    }
}

pub fn e_step(ds: &Dataset, params: &MixtureParams) -> Result<Responsibilities> {
    Ok(e_step_with_ll(ds, params)?.0)
}

/// Responsibilities together with the log-likelihood they were computed at.
fn e_step_with_ll(ds: &Dataset, params: &MixtureParams) -> Result<(Responsibilities, f64)> {
    check_dims(ds, params)?;
    let comps = params.components()?;
    let (n, k) = (ds.len(), comps.len());
    let mut values = vec![0.0; n * k];
    let mut rows: Vec<(&mut [f64], f64)> = values.chunks_mut(k).map(|r| (r, 0.0)).collect();
    parallel::fill_indexed(&mut rows, |i, (row, lse)| {
        let x = ds.point(i);
        let mut work = [0.0; 16];
        let mut heap = Vec::new();
        let work: &mut [f64] = if x.len() <= work.len() {
            &mut work[..x.len()]
        } else {
            heap.resize(x.len(), 0.0);
            &mut heap
        };
        for (slot, c) in row.iter_mut().zip(&comps) {
            *slot = c.log_weight + c.log_pdf(x, work);
        }
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            total += *v;
        }
        *lse = max + total.ln();
        row.iter_mut().for_each(|v| *v /= total);
    });
    let ll: f64 = rows.iter().map(|r| r.1).sum();
    drop(rows);
    if !ll.is_finite() {
        return Err(ClusterError::Numerical("log-likelihood is not finite".into()));
    }
    Ok((Responsibilities { n, k, values }, ll))
}

/// Diagonal ridge added to every covariance: `1e-6` times the mean
/// per-coordinate variance of the data.
pub fn regularization(ds: &Dataset) -> f64 {
    let var = ds.variances();
    let lambda = 1e-6 * var.iter().sum::<f64>() / var.len() as f64;
    if lambda > 0.0 {
        lambda
    } else {
        1e-6
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MStep {
    pub params: MixtureParams,
    /// Components whose responsibility mass vanished and were reseeded.
    pub reseeded: Vec<usize>,
}

pub fn m_step(ds: &Dataset, resp: &Responsibilities, cov_type: CovType) -> Result<MStep> {
    m_step_regularized(ds, resp, cov_type, regularization(ds))
}

/// Weighted maximum-likelihood update with an explicit diagonal ridge.
pub fn m_step_regularized(
    ds: &Dataset,
    resp: &Responsibilities,
    cov_type: CovType,
    ridge: f64,
) -> Result<MStep> {
    let (n, k, d) = (ds.len(), resp.k(), ds.dim());
    if resp.n() != n {
        return invalid(format!("{} responsibility rows for {n} points", resp.n()));
    }
    if !(ridge >= 0.0) {
        return invalid("ridge must be nonnegative");
    }
    let mut mass = vec![0.0; k];
    let mut means = vec![vec![0.0; d]; k];
    for (i, x) in ds.points().enumerate() {
        for (l, &t) in resp.row(i).iter().enumerate() {
            mass[l] += t;
            for (m, v) in means[l].iter_mut().zip(x) {
                *m += t * v;
            }
        }
    }
    let floor = 1e-10 * n as f64;
    let degenerate: Vec<usize> = (0..k).filter(|&l| mass[l] < floor).collect();
    for l in 0..k {
        if mass[l] >= floor {
            means[l].iter_mut().for_each(|m| *m /= mass[l]);
        }
    }
    let mut covs = vec![vec![0.0; d * d]; k];
    let mut diff = vec![0.0; d];
    for (i, x) in ds.points().enumerate() {
        for (l, &t) in resp.row(i).iter().enumerate() {
            if t == 0.0 || mass[l] < floor {
                continue;
            }
            for (dv, (v, m)) in diff.iter_mut().zip(x.iter().zip(&means[l])) {
                *dv = v - m;
            }
            let cov = &mut covs[l];
            for r in 0..d {
                for c in 0..=r {
                    cov[r * d + c] += t * diff[r] * diff[c];
                }
            }
        }
    }
    let mut weights: Vec<f64> = mass.iter().map(|m| m / n as f64).collect();
    for l in 0..k {
        if mass[l] < floor {
            continue;
        }
        let cov = &mut covs[l];
        for r in 0..d {
            for c in 0..=r {
                cov[r * d + c] /= mass[l];
                cov[c * d + r] = cov[r * d + c];
            }
        }
        finish_covariance(cov, d, cov_type, ridge);
    }

    if !degenerate.is_empty() {
        reseed(ds, &degenerate, &mut weights, &mut means, &mut covs, cov_type, ridge)?;
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(MStep {
        params: MixtureParams {
            cov_type,
            weights,
            means,
            covariances: covs,
        },
        reseeded: degenerate,
    })
}

/// Projects onto the covariance family and adds the ridge.
fn finish_covariance(cov: &mut [f64], d: usize, cov_type: CovType, ridge: f64) {
    match cov_type {
        CovType::Full => {}
        CovType::Diagonal => {
            for r in 0..d {
                for c in 0..d {
                    if r != c {
                        cov[r * d + c] = 0.0;
                    }
                }
            }
        }
        CovType::Spherical => {
            let avg = (0..d).map(|r| cov[r * d + r]).sum::<f64>() / d as f64;
            cov.iter_mut().for_each(|v| *v = 0.0);
            (0..d).for_each(|r| cov[r * d + r] = avg);
        }
    }
    (0..d).for_each(|r| cov[r * d + r] += ridge);
}

/// Restarts collapsed components at the points the remaining mixture explains
/// worst, with the global covariance and weight `1/n`.
fn reseed(
    ds: &Dataset,
    degenerate: &[usize],
    weights: &mut [f64],
    means: &mut [Vec<f64>],
    covs: &mut [Vec<f64>],
    cov_type: CovType,
    ridge: f64,
) -> Result<()> {
    let (n, d) = (ds.len(), ds.dim());
    let healthy: Vec<Component> = (0..weights.len())
        .filter(|l| !degenerate.contains(l))
        .map(|l| Component::new(weights[l], &means[l], &covs[l]))
        .collect::<Result<_>>()?;
    let mut density: Vec<(f64, usize)> = ds
        .points()
        .enumerate()
        .map(|(i, x)| (log_mixture_pdf(x, &healthy), i))
        .collect();
    density.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mean = ds.mean();
    let mut global = vec![0.0; d * d];
    for x in ds.points() {
        for r in 0..d {
            for c in 0..d {
                global[r * d + c] += (x[r] - mean[r]) * (x[c] - mean[c]);
            }
        }
    }
    global.iter_mut().for_each(|v| *v /= n as f64);
    finish_covariance(&mut global, d, cov_type, ridge);

    for (slot, &l) in degenerate.iter().enumerate() {
        let point = density[slot.min(n - 1)].1;
        means[l] = ds.point(point).to_vec();
        covs[l] = global.clone();
        weights[l] = 1.0 / n as f64;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmConfig {
    pub k: usize,
    pub cov_type: CovType,
    pub seed: u64,
    /// Relative log-likelihood change that counts as converged.
    pub tol: f64,
    pub max_iter: usize,
}

impl GmmConfig {
    pub const DEFAULT_TOL: f64 = 1e-6;
    pub const DEFAULT_MAX_ITER: usize = 200;
    pub const MAX_RESEEDS: usize = 3;
    const INIT_LLOYD_ITERS: usize = 10;

    pub fn new(k: usize, cov_type: CovType, seed: u64) -> Self {
        Self {
            k,
            cov_type,
            seed,
            tol: Self::DEFAULT_TOL,
            max_iter: Self::DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub params: MixtureParams,
    #[serde(skip)]
    pub responsibilities: Responsibilities,
    pub log_likelihood: f64,
    pub ll_trace: Vec<f64>,
    #[serde(skip)]
    pub clustering: Clustering,
    pub iterations: usize,
    pub converged: bool,
    pub reseeds: usize,
}

/// Starting parameters: K-means++ seeds refined by a few Lloyd steps, turned
/// into hard responsibilities and one M-step.
pub fn initial_params(ds: &Dataset, cfg: &GmmConfig) -> Result<MixtureParams> {
    let seeds = kmeanspp_seed(ds, cfg.k, cfg.seed)?;
    let centers = seeds.iter().map(|&i| ds.point(i).to_vec()).collect();
    let km = lloyd(ds, centers, GmmConfig::INIT_LLOYD_ITERS, 0.0)?;
    let resp = Responsibilities::from_labels(&km.labels(), cfg.k)?;
    Ok(m_step(ds, &resp, cfg.cov_type)?.params)
}

pub fn fit_gmm(ds: &Dataset, cfg: &GmmConfig) -> Result<FitResult> {
    if cfg.k == 0 || cfg.k > ds.len() {
        return invalid(format!("need 1 <= k <= {}, got {}", ds.len(), cfg.k));
    }
    if cfg.max_iter == 0 || !(cfg.tol >= 0.0) {
        return invalid("max_iter must be positive and tol nonnegative");
    }
    let mut params = initial_params(ds, cfg)?;
    let mut trace = Vec::new();
    let mut reseeds = 0;
    let mut iterations = 0;
    let mut converged = false;
    let (resp, ll) = loop {
        let (resp, ll) = e_step_with_ll(ds, &params)?;
        if let Some(&prev) = trace.last() {
            let change: f64 = ll - prev;
            if change.abs() <= cfg.tol * ll.abs() {
                converged = true;
            }
        }
        trace.push(ll);
        if converged || iterations == cfg.max_iter {
            break (resp, ll);
        }
        let step = m_step(ds, &resp, cfg.cov_type)?;
        reseeds += step.reseeded.len();
        if reseeds > GmmConfig::MAX_RESEEDS {
            return Err(ClusterError::Degenerate(format!(
                "{reseeds} component collapses within {iterations} iterations (k={}, {})",
                cfg.k,
                cfg.cov_type.name()
            )));
        }
        params = step.params;
        iterations += 1;
    };
    let labels = resp.argmax();
    let assignment = labels.into_iter().map(Assignment::Cluster).collect();
    Ok(FitResult {
        params,
        responsibilities: resp,
        log_likelihood: ll,
        ll_trace: trace,
        clustering: Clustering::from_parts_unchecked(assignment, cfg.k),
        iterations,
        converged,
        reseeds,
    })
}

/// Bayesian information criterion in the "larger is better" orientation.
pub fn bic(log_likelihood: f64, params: usize, n: usize) -> f64 {
    2.0 * log_likelihood - params as f64 * (n as f64).ln()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BicCell {
    pub k: usize,
    pub cov_type: CovType,
    pub bic: Option<f64>,
    pub log_likelihood: Option<f64>,
    pub converged: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BicScan {
    pub cells: Vec<BicCell>,
    /// Index into `cells` of the maximizing model, if any cell succeeded.
    pub best: Option<usize>,
}

impl BicScan {
    pub fn best_cell(&self) -> Option<&BicCell> {
        self.best.map(|i| &self.cells[i])
    }

    /// Writes `k,cov_type,bic,converged`; failed cells have an empty `bic`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["k", "cov_type", "bic", "converged"])?;
        for c in &self.cells {
            w.write_record(&[
                c.k.to_string(),
                c.cov_type.name().to_string(),
                c.bic.map_or_else(String::new, |v| v.to_string()),
                c.converged.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Fits every (k, covariance type) cell, k-major. Cell `i` uses seed
/// `seed + i`. Failed fits are recorded and skipped by the selection.
pub fn bic_scan(
    ds: &Dataset,
    k_range: RangeInclusive<usize>,
    cov_types: &[CovType],
    seed: u64,
) -> Result<BicScan> {
    bic_scan_restarts(ds, k_range, cov_types, seed, 1)
}

/// [`bic_scan`] where every cell keeps the best of `restarts` EM runs by
/// log-likelihood. Run `r` of cell `i` uses seed `seed + i * restarts + r`.
pub fn bic_scan_restarts(
    ds: &Dataset,
    k_range: RangeInclusive<usize>,
    cov_types: &[CovType],
    seed: u64,
    restarts: usize,
) -> Result<BicScan> {
    Ok(scan_fits(ds, k_range, cov_types, seed, restarts)?.0)
}

/// Runs [`bic_scan_restarts`] and returns the fit of the selected cell.
pub fn bic_select(
    ds: &Dataset,
    k_range: RangeInclusive<usize>,
    cov_types: &[CovType],
    seed: u64,
    restarts: usize,
) -> Result<(BicScan, FitResult)> {
    let (scan, mut fits) = scan_fits(ds, k_range, cov_types, seed, restarts)?;
    let Some(best) = scan.best else {
        return Err(ClusterError::Degenerate("no model in the scan could be fitted".into()));
    };
    let fit = fits[best].take().expect("selected cell has a fit");
    Ok((scan, fit))
}

/// Best of `restarts` runs by final log-likelihood; run `r` uses seed
/// `cfg.seed + r` and the earliest run wins ties. Fails only if every run does.
pub fn fit_gmm_restarts(ds: &Dataset, cfg: &GmmConfig, restarts: usize) -> Result<FitResult> {
    if restarts == 0 {
        return invalid("restarts must be at least 1");
    }
    let mut best: Option<FitResult> = None;
    let mut last_err = None;
    for r in 0..restarts {
        let run = GmmConfig {
            seed: cfg.seed.wrapping_add(r as u64),
            ..cfg.clone()
        };
        match fit_gmm(ds, &run) {
            Ok(fit) => {
                if best.as_ref().is_none_or(|b| fit.log_likelihood > b.log_likelihood) {
                    best = Some(fit);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match (best, last_err) {
        (Some(fit), _) => Ok(fit),
        (None, Some(e)) => Err(e),
        (None, None) => unreachable!("at least one run"),
    }
}

type ScanFits = (BicScan, Vec<Option<FitResult>>);

fn scan_fits(
    ds: &Dataset,
    k_range: RangeInclusive<usize>,
    cov_types: &[CovType],
    seed: u64,
    restarts: usize,
) -> Result<ScanFits> {
    if k_range.is_empty() || *k_range.start() == 0 {
        return invalid("k range must be nonempty and start at 1 or above");
    }
    if cov_types.is_empty() {
        return invalid("at least one covariance type is required");
    }
    if restarts == 0 {
        return invalid("restarts must be at least 1");
    }
    let grid: Vec<(usize, CovType)> = k_range
        .flat_map(|k| cov_types.iter().map(move |&c| (k, c)))
        .collect();
    let mut fits: Vec<Option<Result<FitResult>>> = (0..grid.len()).map(|_| None).collect();
    parallel::fill_indexed(&mut fits, |i, slot| {
        let (k, cov_type) = grid[i];
        let cell_seed = seed.wrapping_add((i * restarts) as u64);
        *slot = Some(fit_gmm_restarts(ds, &GmmConfig::new(k, cov_type, cell_seed), restarts));
    });
    let mut cells = Vec::with_capacity(grid.len());
    let mut kept = Vec::with_capacity(grid.len());
    for (&(k, cov_type), fit) in grid.iter().zip(fits) {
        match fit.expect("filled") {
            Ok(fit) => {
                cells.push(BicCell {
                    k,
                    cov_type,
                    bic: Some(bic(fit.log_likelihood, param_count(cov_type, k, ds.dim()), ds.len())),
                    log_likelihood: Some(fit.log_likelihood),
                    converged: fit.converged,
                    error: None,
                });
                kept.push(Some(fit));
            }
            Err(e) => {
                cells.push(BicCell {
                    k,
                    cov_type,
                    bic: None,
                    log_likelihood: None,
                    converged: false,
                    error: Some(e.to_string()),
                });
                kept.push(None);
            }
        }
    }
    let mut best: Option<usize> = None;
    for (i, c) in cells.iter().enumerate() {
        if let Some(b) = c.bic {
            if best.is_none_or(|j| b > cells[j].bic.expect("successful cell")) {
                best = Some(i);
            }
        }
    }
    Ok((BicScan { cells, best }, kept))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn pdf_examples() {
        let p = gaussian_pdf(&[0.0], &[0.0], &[1.0]).unwrap();
        assert!(close(p, 0.398_942_280_401_432_7, 1e-14));
        let p = gaussian_pdf(&[1.0, -2.0], &[1.0, -2.0], &[1.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(close(p, 1.0 / (2.0 * PI), 1e-14));
        let p = gaussian_pdf(&[2.0, 1.0], &[0.0, 0.0], &[4.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(close(p, (-1.0f64).exp() / (4.0 * PI), 1e-14));
        assert!((p - 0.029_274_9).abs() < 1e-7);
        assert!(gaussian_pdf(&[0.0, 0.0], &[0.0, 0.0], &[1.0, 2.0, 2.0, 1.0]).is_err());
        assert!(gaussian_pdf(&[0.0], &[0.0, 0.0], &[1.0, 0.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn mixture_examples() {
        let one = MixtureParams {
            cov_type: CovType::Full,
            weights: vec![1.0],
            means: vec![vec![0.5, 0.5]],
            covariances: vec![vec![2.0, 0.3, 0.3, 1.0]],
        };
        let x = [1.0, -0.2];
        let direct = gaussian_pdf(&x, &one.means[0], &one.covariances[0]).unwrap();
        assert!(close(mixture_pdf(&x, &one).unwrap(), direct, 1e-14));

        let a = (vec![0.0, 0.0], vec![1.0, 0.0, 0.0, 1.0]);
        let b = (vec![3.0, 1.0], vec![0.5, 0.1, 0.1, 2.0]);
        let two = MixtureParams {
            cov_type: CovType::Full,
            weights: vec![0.3, 0.7],
            means: vec![a.0.clone(), b.0.clone()],
            covariances: vec![a.1.clone(), b.1.clone()],
        };
        let expected = 0.3 * gaussian_pdf(&x, &a.0, &a.1).unwrap() + 0.7 * gaussian_pdf(&x, &b.0, &b.1).unwrap();
        assert!(close(mixture_pdf(&x, &two).unwrap(), expected, 1e-13));

        let twins = MixtureParams {
            weights: vec![0.9, 0.1],
            means: vec![a.0.clone(), a.0.clone()],
            covariances: vec![a.1.clone(), a.1.clone()],
            ..two
        };
        let single = gaussian_pdf(&x, &a.0, &a.1).unwrap();
        assert!(close(mixture_pdf(&x, &twins).unwrap(), single, 1e-14));
    }

    #[test]
    fn log_likelihood_examples() {
        let params = MixtureParams {
            cov_type: CovType::Full,
            weights: vec![1.0],
            means: vec![vec![2.0, 3.0]],
            covariances: vec![vec![1.0, 0.0, 0.0, 1.0]],
        };
        let ds = Dataset::new(vec![vec![2.0, 3.0]], None).unwrap();
        let ll = log_likelihood(&ds, &params).unwrap();
        assert!(close(ll, -(2.0 * PI).ln(), 1e-14));
        assert!((ll + 1.837_877).abs() < 1e-6);

        let pts = vec![vec![0.0, 1.0], vec![2.5, 3.0], vec![1.0, 1.0]];
        let once = Dataset::new(pts.clone(), None).unwrap();
        let twice = Dataset::new([pts.clone(), pts].concat(), None).unwrap();
        let l1 = log_likelihood(&once, &params).unwrap();
        let l2 = log_likelihood(&twice, &params).unwrap();
        assert!(close(l2, 2.0 * l1, 1e-14));
    }

    #[test]
    fn e_step_examples() {
        let ds = Dataset::new(vec![vec![0.0], vec![1.0], vec![8.0]], None).unwrap();
        let single = MixtureParams {
            cov_type: CovType::Full,
            weights: vec![1.0],
            means: vec![vec![0.0]],
            covariances: vec![vec![1.0]],
        };
        let r = e_step(&ds, &single).unwrap();
        assert!((0..3).all(|i| r.row(i) == [1.0]));

        let twins = MixtureParams {
            weights: vec![0.5, 0.5],
            means: vec![vec![0.0], vec![0.0]],
            covariances: vec![vec![1.0], vec![1.0]],
            ..single.clone()
        };
        let r = e_step(&ds, &twins).unwrap();
        assert!((0..3).all(|i| r.row(i) == [0.5, 0.5]));

        let far = MixtureParams {
            weights: vec![0.5, 0.5],
            means: vec![vec![0.0], vec![8.0]],
            covariances: vec![vec![1.0], vec![1.0]],
            ..single
        };
        let r = e_step(&ds, &far).unwrap();
        assert!(r.row(0)[0] > 1.0 - 1e-6);
    }

    #[test]
    fn m_step_examples() {
        let ds = Dataset::new(
            vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![10.0, 10.0], vec![10.0, 12.0]],
            None,
        )
        .unwrap();
        let hard = Responsibilities::from_labels(&[0, 0, 1, 1], 2).unwrap();
        let p = m_step_regularized(&ds, &hard, CovType::Full, 0.0).unwrap().params;
        assert_eq!(p.weights, vec![0.5, 0.5]);
        assert_eq!(p.means, vec![vec![1.0, 0.0], vec![10.0, 11.0]]);
        assert_eq!(p.covariances[0], vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(p.covariances[1], vec![0.0, 0.0, 0.0, 1.0]);

        let uniform = Responsibilities::new(4, 2, vec![0.5; 8]).unwrap();
        let p = m_step(&ds, &uniform, CovType::Diagonal).unwrap().params;
        assert_eq!(p.means[0], ds.mean());
        assert_eq!(p.means[1], ds.mean());
    }

    #[test]
    fn projections_and_ridge() {
        let ds = Dataset::new(
            vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.5], vec![3.0, 2.5]],
            None,
        )
        .unwrap();
        let r = Responsibilities::from_labels(&[0, 0, 0, 0], 1).unwrap();
        let ridge = regularization(&ds);
        let full = m_step(&ds, &r, CovType::Full).unwrap().params.covariances[0].clone();
        let diag = m_step(&ds, &r, CovType::Diagonal).unwrap().params.covariances[0].clone();
        let sph = m_step(&ds, &r, CovType::Spherical).unwrap().params.covariances[0].clone();
        assert_eq!(diag, vec![full[0], 0.0, 0.0, full[3]]);
        let avg = (full[0] + full[3]) / 2.0 - ridge;
        assert!(close(sph[0], avg + ridge, 1e-15) && sph[1] == 0.0 && sph[0] == sph[3]);
    }

    #[test]
    fn collapsed_component_is_reseeded() {
        let ds = Dataset::new(vec![vec![0.0], vec![0.5], vec![9.0], vec![1.0]], None).unwrap();
        let r = Responsibilities::from_labels(&[0, 0, 0, 0], 2).unwrap();
        let step = m_step(&ds, &r, CovType::Full).unwrap();
        assert_eq!(step.reseeded, vec![1]);
        assert_eq!(step.params.means[1], vec![9.0]);
        assert!(close(step.params.weights.iter().sum::<f64>(), 1.0, 1e-15));
    }

    #[test]
    fn parameter_counts_and_bic() {
        assert_eq!(param_count(CovType::Full, 4, 2), 3 + 8 + 12);
        assert_eq!(param_count(CovType::Diagonal, 4, 2), 3 + 8 + 8);
        assert_eq!(param_count(CovType::Spherical, 4, 2), 3 + 8 + 4);
        assert_eq!(bic(0.0, 0, 10), 0.0);
        assert!((bic(-100.0, 5, 100) + 223.025_850_929_940_46).abs() < 1e-9);
        assert!(bic(-10.0, 6, 3) < bic(-10.0, 5, 3));
    }
}

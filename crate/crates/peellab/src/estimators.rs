//! Monte Carlo orchestration: seeded replication runner, per-lambda
//! summaries of layer statistics, CLT diagnostics, the total-layer-count
//! exponent fit, the two-way limit-constant cross-validation and the
//! normalized layer-count conjecture probe.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::floating::{self, FloatingBody};
use crate::peeling::{self, peel};
use crate::polytope::HPolytope;
use crate::rescaled::{self, RescaledPoint, ScoreKind};
use crate::sampling::{self, LimitWindow, Seed};
use crate::stats;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("need at least {need} replications, got {got}")]
    InsufficientReplications { need: usize, got: usize },
    #[error("invalid configuration: {0}")]
    BadConfig(String),
}

/// Everything needed to reproduce an experiment deterministically.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dim: usize,
    /// increasing intensity grid
    pub lambda_grid: Vec<f64>,
    /// peeling layer of interest
    pub n: u32,
    /// face dimensions to count on layer n
    pub k_list: Vec<usize>,
    /// replications per lambda (>= 2)
    pub reps: u64,
    pub seed: u64,
    /// also evaluate the floating-body sandwich event per replication
    #[serde(default)]
    pub check_sandwich: bool,
    /// override for the sandwiching constant alpha
    #[serde(default)]
    pub alpha_override: Option<f64>,
    /// limit-process window for the integral constant pipeline
    #[serde(default = "default_window_radius")]
    pub window_radius: f64,
    #[serde(default = "default_h_lo")]
    pub h_lo: f64,
    #[serde(default = "default_h_hi")]
    pub h_hi: f64,
    #[serde(default = "default_h_step")]
    pub h_step: f64,
    /// replications per quadrature node of the integral pipeline
    #[serde(default = "default_integral_reps")]
    pub integral_reps: u64,
    /// stop peeling after this many layers (never below n). Saves large
    /// amounts of work at high intensity; total_layers is then the
    /// truncated count.
    #[serde(default)]
    pub max_layers: Option<usize>,
}

fn default_window_radius() -> f64 {
    4.0
}
fn default_h_lo() -> f64 {
    -6.0
}
fn default_h_hi() -> f64 {
    3.0
}
fn default_h_step() -> f64 {
    0.25
}
fn default_integral_reps() -> u64 {
    400
}

impl ExperimentConfig {
    pub fn new(
        dim: usize,
        lambda_grid: Vec<f64>,
        n: u32,
        k_list: Vec<usize>,
        reps: u64,
        seed: u64,
    ) -> Self {
        ExperimentConfig {
            dim,
            lambda_grid,
            n,
            k_list,
            reps,
            seed,
            check_sandwich: false,
            alpha_override: None,
            window_radius: default_window_radius(),
            h_lo: default_h_lo(),
            h_hi: default_h_hi(),
            h_step: default_h_step(),
            integral_reps: default_integral_reps(),
            max_layers: None,
        }
    }

    pub fn validate(&self) -> Result<(), EstimatorError> {
        if self.dim < 2 {
            return Err(EstimatorError::BadConfig("dim must be >= 2".into()));
        }
        if self.reps < 2 {
            return Err(EstimatorError::BadConfig("reps must be >= 2".into()));
        }
        if self.lambda_grid.is_empty() {
            return Err(EstimatorError::BadConfig("lambda_grid must be nonempty".into()));
        }
        if !self.lambda_grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(EstimatorError::BadConfig("lambda_grid must be increasing".into()));
        }
        if self.lambda_grid.iter().any(|&l| l <= 0.0) {
            return Err(EstimatorError::BadConfig("lambda must be positive".into()));
        }
        if self.n == 0 {
            return Err(EstimatorError::BadConfig("n must be >= 1".into()));
        }
        if self.k_list.iter().any(|&k| k >= self.dim) {
            return Err(EstimatorError::BadConfig("k must be < dim".into()));
        }
        Ok(())
    }
}

/// One replication's record.
#[derive(Clone, Debug, Serialize)]
pub struct RepRow {
    pub lambda: f64,
    pub rep: u64,
    pub n: u32,
    /// N_{n,k,lambda} for each k in k_list (0 when the layer is absent)
    pub n_counts: Vec<u64>,
    /// defect volume V_{n,lambda} (Vol K when conv_n is empty)
    pub v_defect: f64,
    pub total_layers: u32,
    pub sandwich_event: Option<bool>,
    /// layer n absent at this replication
    pub layer_missing: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StatSummary {
    pub lambda: f64,
    pub count: u64,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    /// mean / log^{d-1} lambda
    pub normalized_mean: f64,
    /// variance / log^{d-1} lambda
    pub normalized_variance: f64,
    /// KS distance of the standardized samples against N(0,1)
    pub ks_normal: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentOutput {
    pub rows: Vec<RepRow>,
    /// per (k index in k_list, lambda): summary of N_{n,k,lambda}
    pub n_summaries: Vec<Vec<StatSummary>>,
    /// per lambda: summary of lambda * V_{n,lambda}
    pub v_summaries: Vec<StatSummary>,
    /// per lambda: summary of total layer counts
    pub layer_summaries: Vec<StatSummary>,
    pub failed_replications: u64,
}

fn summarize(lambda: f64, d: usize, samples: &[f64]) -> StatSummary {
    let n = samples.len() as u64;
    let mean = stats::mean(samples);
    let var = stats::variance(samples);
    let logpow = lambda.ln().powi(d as i32 - 1);
    let sd = var.max(0.0).sqrt();
    let ks = if n >= 2 && sd > 0.0 {
        let std: Vec<f64> = samples.iter().map(|x| (x - mean) / sd).collect();
        Some(stats::ks_one_sample(&std, stats::normal_cdf).0)
    } else {
        None
    };
    StatSummary {
        lambda,
        count: n,
        mean,
        variance: var,
        std_error: sd / (n as f64).sqrt(),
        normalized_mean: mean / logpow,
        normalized_variance: var / logpow,
        ks_normal: ks,
    }
}

/// Run all replications on all lambdas. Deterministic for a given config:
/// each replication owns stream (lambda_index * reps + rep) and results are
/// merged in sorted replication order regardless of the thread count.
pub fn run_experiment(
    k: &HPolytope,
    cfg: &ExperimentConfig,
) -> Result<ExperimentOutput, EstimatorError> {
    cfg.validate()?;
    if k.dim() != cfg.dim {
        return Err(EstimatorError::BadConfig("polytope dimension != dim".into()));
    }
    let jobs: Vec<(usize, u64)> = (0..cfg.lambda_grid.len())
        .flat_map(|li| (0..cfg.reps).map(move |r| (li, r)))
        .collect();
    let mut rows: Vec<(usize, u64, RepRow)> = jobs
        .par_iter()
        .map(|&(li, rep)| {
            let lambda = cfg.lambda_grid[li];
            let stream = li as u64 * cfg.reps + rep;
            let ps = sampling::sample_poisson(k, lambda, Seed::new(cfg.seed, stream));
            let limit = cfg.max_layers.map(|m| m.max(cfg.n as usize));
            let pr = peel(&ps, limit);
            let (n_counts, v_defect, missing) =
                match peeling::layer_stats(&pr, k, cfg.n as usize) {
                    Ok(st) => (
                        cfg.k_list.iter().map(|&kk| st.f[kk] as u64).collect(),
                        st.defect_volume,
                        false,
                    ),
                    Err(_) => {
                        // absent layer: no faces, hull empty, defect = Vol K
                        (vec![0u64; cfg.k_list.len()], k.volume(), true)
                    }
                };
            let sandwich_event = if cfg.check_sandwich {
                FloatingBody::new(k)
                    .ok()
                    .and_then(|fb| {
                        let params = floating::sandwich_params(
                            lambda,
                            cfg.dim,
                            cfg.alpha_override,
                        );
                        floating::sandwich_event(&pr, &ps, &fb, &params, cfg.n).ok()
                    })
                    .map(|o| o.event)
            } else {
                None
            };
            let row = RepRow {
                lambda,
                rep,
                n: cfg.n,
                n_counts,
                v_defect,
                total_layers: pr.total_layers(),
                sandwich_event,
                layer_missing: missing,
            };
            (li, rep, row)
        })
        .collect();
    rows.sort_by_key(|(li, rep, _)| (*li, *rep));
    let rows: Vec<RepRow> = rows.into_iter().map(|(_, _, r)| r).collect();

    let mut n_summaries = vec![Vec::new(); cfg.k_list.len()];
    let mut v_summaries = Vec::new();
    let mut layer_summaries = Vec::new();
    for (li, &lambda) in cfg.lambda_grid.iter().enumerate() {
        let chunk: Vec<&RepRow> = rows
            .iter()
            .skip(li * cfg.reps as usize)
            .take(cfg.reps as usize)
            .collect();
        for (ki, _) in cfg.k_list.iter().enumerate() {
            let samples: Vec<f64> =
                chunk.iter().map(|r| r.n_counts[ki] as f64).collect();
            n_summaries[ki].push(summarize(lambda, cfg.dim, &samples));
        }
        let v_samples: Vec<f64> = chunk.iter().map(|r| lambda * r.v_defect).collect();
        v_summaries.push(summarize(lambda, cfg.dim, &v_samples));
        let l_samples: Vec<f64> = chunk.iter().map(|r| r.total_layers as f64).collect();
        layer_summaries.push(summarize(lambda, cfg.dim, &l_samples));
    }
    Ok(ExperimentOutput {
        rows,
        n_summaries,
        v_summaries,
        layer_summaries,
        failed_replications: 0,
    })
}

/// CSV rows: lambda, rep, n, k, N, V, total_layers, sandwich_event,
/// runtime_ms. One row per (replication, k). The runtime_ms column is a
/// deterministic placeholder (0) so identical configs produce byte-identical
/// files; wall-clock timings belong to the run manifest.
pub fn rows_to_csv(cfg: &ExperimentConfig, rows: &[RepRow]) -> String {
    let mut out =
        String::from("lambda,rep,n,k,N,V,total_layers,sandwich_event,runtime_ms\n");
    for r in rows {
        for (ki, &k) in cfg.k_list.iter().enumerate() {
            let sw = match r.sandwich_event {
                Some(true) => "1",
                Some(false) => "0",
                None => "",
            };
            out.push_str(&format!(
                "{:?},{},{},{},{},{:?},{},{},0\n",
                r.lambda, r.rep, r.n, k, r.n_counts[ki], r.v_defect, r.total_layers, sw
            ));
        }
    }
    out
}

/// KS distance of the standardized samples against the standard normal.
pub fn clt_diagnostic(samples: &[f64]) -> Result<f64, EstimatorError> {
    if samples.len() < 200 {
        return Err(EstimatorError::InsufficientReplications {
            need: 200,
            got: samples.len(),
        });
    }
    let m = stats::mean(samples);
    let sd = stats::variance(samples).sqrt();
    if sd == 0.0 {
        return Ok(1.0);
    }
    let std: Vec<f64> = samples.iter().map(|x| (x - m) / sd).collect();
    Ok(stats::ks_one_sample(&std, stats::normal_cdf).0)
}

/// Least-squares slope of log(mean) against log(lambda).
pub fn fit_exponent(lambdas: &[f64], means: &[f64]) -> f64 {
    let xs: Vec<f64> = lambdas.iter().map(|l| l.ln()).collect();
    let ys: Vec<f64> = means.iter().map(|m| m.ln()).collect();
    stats::least_squares(&xs, &ys).1
}

/// Fitted exponent of E[total layer count] ~ lambda^beta over the config's
/// lambda grid.
pub fn layer_count_exponent(
    k: &HPolytope,
    cfg: &ExperimentConfig,
) -> Result<f64, EstimatorError> {
    let out = run_experiment(k, cfg)?;
    let means: Vec<f64> = out.layer_summaries.iter().map(|s| s.mean).collect();
    Ok(fit_exponent(&cfg.lambda_grid, &means))
}

/// (d-1)-dimensional volume of S(d) = {x in (-inf,1]^d : sum x_i = 0},
/// the regular (d-1)-simplex of edge length sqrt(2) d.
pub fn vol_s_simplex(d: usize) -> f64 {
    let a = (2.0f64).sqrt() * d as f64;
    let mut fact = 1.0;
    for i in 1..d {
        fact *= i as f64;
    }
    a.powi(d as i32 - 1) / fact * (d as f64 / 2f64.powi(d as i32 - 1)).sqrt()
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitConstantEstimate {
    pub n: u32,
    pub k: usize,
    pub direct_ratio: f64,
    pub integral_estimate: f64,
    pub vol_s: f64,
    /// quadrature nodes and estimated integrand values
    pub h_grid: Vec<f64>,
    pub integrand: Vec<f64>,
}

/// Trapezoid rule on a uniform grid.
pub fn trapezoid(h: f64, values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..values.len() - 1].iter().sum();
    h * (0.5 * values[0] + inner + 0.5 * values[values.len() - 1])
}

/// Two independent estimates of the layer-n constant: the direct
/// normalized ratio at the largest lambda, and
/// d^{-d+3/2} Vol_{d-1}(S(d)) * integral of E[xi((0,h),P)] e^{dh} dh
/// from the limit process.
pub fn limit_constant_two_ways(
    k: &HPolytope,
    cfg: &ExperimentConfig,
    n: u32,
    kface: usize,
) -> Result<LimitConstantEstimate, EstimatorError> {
    let d = cfg.dim;
    let mut one = cfg.clone();
    one.n = n;
    one.k_list = vec![kface];
    one.lambda_grid = vec![*cfg.lambda_grid.last().unwrap()];
    let out = run_experiment(k, &one)?;
    let f0 = k.hull().f(0) as f64;
    let direct_ratio = out.n_summaries[0][0].normalized_mean / f0;

    // integral pipeline on the limit process
    let steps = ((cfg.h_hi - cfg.h_lo) / cfg.h_step).round() as usize;
    let h_grid: Vec<f64> = (0..=steps).map(|i| cfg.h_lo + cfg.h_step * i as f64).collect();
    let win = LimitWindow::new(d, cfg.window_radius, cfg.h_lo - 2.0, cfg.h_hi + 1.0);
    let kind = if kface == 0 {
        ScoreKind::LayerIndicator { n }
    } else {
        ScoreKind::KFaceCount { n, k: kface }
    };
    let integrand: Vec<f64> = h_grid
        .par_iter()
        .enumerate()
        .map(|(j, &h0)| {
            let w0 = RescaledPoint::new(vec![0.0; d - 1], h0);
            let mut acc = 0.0;
            for r in 0..cfg.integral_reps {
                let stream = (j as u64) * cfg.integral_reps + r;
                let ps = sampling::sample_limit_process(
                    &win,
                    Seed::new(cfg.seed.wrapping_add(0x9e3779b9), stream),
                );
                let y: Vec<RescaledPoint> = (0..ps.len())
                    .map(|i| {
                        let row = ps.coords(i);
                        RescaledPoint::new(row[..d - 1].to_vec(), row[d - 1])
                    })
                    .collect();
                acc += rescaled::score_of(&w0, &y, kind);
            }
            acc / cfg.integral_reps as f64 * (d as f64 * h0).exp()
        })
        .collect();
    let integral = trapezoid(cfg.h_step, &integrand);
    let constant = (d as f64).powf(-(d as f64) + 1.5) * vol_s_simplex(d) * integral;
    Ok(LimitConstantEstimate {
        n,
        k: kface,
        direct_ratio,
        integral_estimate: constant,
        vol_s: vol_s_simplex(d),
        h_grid,
        integrand,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeRow {
    pub lambda: f64,
    pub rep: u64,
    pub layer_index: u32,
    /// lambda^{-(d-1)/(d+1)} N_{n(lambda,t),0,lambda}
    pub normalized_count: f64,
}

/// Record lambda^{-(d-1)/(d+1)} N_{n(lambda,t),0,lambda} with
/// n(lambda,t) = max(1, floor(t lambda^{2/(d+1)})) per replication.
pub fn conjecture_cs_probe(
    k: &HPolytope,
    cfg: &ExperimentConfig,
    t: f64,
) -> Result<Vec<ProbeRow>, EstimatorError> {
    cfg.validate()?;
    let d = cfg.dim as f64;
    let jobs: Vec<(usize, u64)> = (0..cfg.lambda_grid.len())
        .flat_map(|li| (0..cfg.reps).map(move |r| (li, r)))
        .collect();
    let mut rows: Vec<(usize, u64, ProbeRow)> = jobs
        .par_iter()
        .map(|&(li, rep)| {
            let lambda = cfg.lambda_grid[li];
            let n_layer = ((t * lambda.powf(2.0 / (d + 1.0))).floor() as u32).max(1);
            let stream = li as u64 * cfg.reps + rep;
            let ps = sampling::sample_poisson(k, lambda, Seed::new(cfg.seed, stream));
            let pr = peel(&ps, None);
            let count = peeling::layer_stats(&pr, k, n_layer as usize)
                .map(|st| st.f[0] as f64)
                .unwrap_or(0.0);
            let row = ProbeRow {
                lambda,
                rep,
                layer_index: n_layer,
                normalized_count: lambda.powf(-(d - 1.0) / (d + 1.0)) * count,
            };
            (li, rep, row)
        })
        .collect();
    rows.sort_by_key(|(li, rep, _)| (*li, *rep));
    Ok(rows.into_iter().map(|(_, _, r)| r).collect())
}

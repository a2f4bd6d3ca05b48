//! Command-line front end: peeling runs, sampling, Monte Carlo experiments,
//! sandwich/cap-cover checks, rescaled-model simulations and SVG reports.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use peellab::config::{self, RunManifest};
use peellab::estimators;
use peellab::floating::{self, FloatingBody};
use peellab::macbeath;
use peellab::peeling::peel;
use peellab::polytope::{self, HPolytope};
use peellab::report::{self, PlotSpec, Series};
use peellab::rescaled::{cone_peel, RescaledPoint};
use peellab::sampling::{self, LimitWindow, Seed};

#[derive(Parser)]
#[command(
    name = "peellab",
    version,
    about = "Convex hull peeling of point processes in polytopes",
    disable_help_subcommand = true
)]
struct Cli {
    /// worker threads (overrides PEELLAB_THREADS; default: logical cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Peel one Poisson sample and emit id,x1,...,layer CSV
    Peel {
        #[arg(long, default_value = "cube")]
        polytope: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
        #[arg(long)]
        max_layers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample a point process and emit it as CSV or binary
    Sample {
        #[arg(long, default_value = "cube")]
        polytope: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Poisson intensity; use --count for a binomial sample instead
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a replicated experiment from a JSON config
    Estimate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Evaluate the floating-body sandwich event on one sample
    SandwichCheck {
        #[arg(long, default_value = "cube")]
        polytope: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
        #[arg(long)]
        alpha_override: Option<f64>,
    },
    /// Dyadic Macbeath cap-cover construction and volume checks
    Capcover {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// cap volume s
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// also peel a Poisson sample restricted to each region
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate the rescaled limit model; JSONL per replication
    Rescaled {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 4.0)]
        radius: f64,
        #[arg(long, default_value_t = -4.0, allow_negative_numbers = true)]
        h_min: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        h_max: f64,
        #[arg(long, default_value_t = 10)]
        reps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo convex-position probabilities
    Convexpos {
        #[arg(long, default_value = "triangle")]
        polytope: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// comma-separated point counts
        #[arg(long, default_value = "4,5,6")]
        n_list: String,
        #[arg(long, default_value_t = 2000)]
        reps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render SVG plots from an estimate summary JSON
    Report {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // usage/help and version requests are not errors
            use clap::error::ErrorKind::*;
            let _ = e.print();
            return match e.kind() {
                DisplayHelp | DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let threads = cli
        .threads
        .or_else(|| std::env::var("PEELLAB_THREADS").ok().and_then(|v| v.parse().ok()));
    if let Some(t) = threads {
        if rayon::ThreadPoolBuilder::new().num_threads(t).build_global().is_err() {
            eprintln!("warning: thread pool already initialized");
        }
    }
    match dispatch(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(1)
        }
        Err(AppError::Runtime(msg)) => {
            eprintln!("runtime error: {msg}");
            ExitCode::from(2)
        }
    }
}

enum AppError {
    Config(String),
    Runtime(String),
}

fn cfg_err(msg: impl Into<String>) -> AppError {
    AppError::Config(msg.into())
}

fn run_err(msg: impl Into<String>) -> AppError {
    AppError::Runtime(msg.into())
}

fn builtin_polytope(name: &str, dim: usize, scale: f64) -> Result<HPolytope, AppError> {
    if dim < 2 {
        return Err(cfg_err("dim must be >= 2"));
    }
    if !(scale > 0.0) {
        return Err(cfg_err("scale must be positive"));
    }
    match name {
        "cube" | "square" => Ok(polytope::cube(dim, scale)),
        "simplex" | "triangle" => Ok(polytope::simplex(dim, scale)),
        other => Err(cfg_err(format!("unknown polytope `{other}`"))),
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), AppError> {
    match out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| run_err(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), AppError> {
    std::fs::write(path, text)
        .map_err(|e| run_err(format!("cannot write {}: {e}", path.display())))
}

fn dispatch(cmd: Cmd) -> Result<(), AppError> {
    match cmd {
        Cmd::Peel { polytope, dim, scale, lambda, seed, stream, max_layers, out } => {
            if !(lambda > 0.0) {
                return Err(cfg_err("lambda must be positive"));
            }
            let k = builtin_polytope(&polytope, dim, scale)?;
            let ps = sampling::sample_poisson(&k, lambda, Seed::new(seed, stream));
            let pr = peel(&ps, max_layers);
            let mut csv = String::from("id");
            for c in 0..dim {
                csv.push_str(&format!(",x{}", c + 1));
            }
            csv.push_str(",layer\n");
            for (id, coords) in ps.iter() {
                csv.push_str(&id.to_string());
                for &x in coords {
                    csv.push_str(&format!(",{x:?}"));
                }
                let layer = pr
                    .label
                    .get(&id)
                    .map(|l| l.to_string())
                    .unwrap_or_else(|| "".into());
                csv.push_str(&format!(",{layer}\n"));
            }
            emit(&out, &csv)
        }
        Cmd::Sample { polytope, dim, scale, lambda, count, seed, stream, format, out } => {
            let k = builtin_polytope(&polytope, dim, scale)?;
            let s = Seed::new(seed, stream);
            let ps = match (lambda, count) {
                (Some(l), None) if l > 0.0 => sampling::sample_poisson(&k, l, s),
                (None, Some(c)) => sampling::sample_binomial(&k, c, s),
                _ => return Err(cfg_err("provide exactly one of --lambda or --count")),
            };
            match format.as_str() {
                "csv" => emit(&out, &sampling::to_csv(&ps)),
                "binary" => {
                    let bytes = sampling::to_binary(&ps);
                    match &out {
                        Some(p) => std::fs::write(p, &bytes)
                            .map_err(|e| run_err(format!("cannot write {}: {e}", p.display()))),
                        None => Err(cfg_err("binary format requires --out")),
                    }
                }
                other => Err(cfg_err(format!("unknown format `{other}`"))),
            }
        }
        Cmd::Estimate { config, out_dir } => {
            let loaded = config::load_config(&config)
                .map_err(|e| cfg_err(e.to_string()))?;
            run_estimate(&loaded, &out_dir)
        }
        Cmd::SandwichCheck {
            polytope,
            dim,
            scale,
            lambda,
            n,
            seed,
            stream,
            alpha_override,
        } => {
            if lambda <= std::f64::consts::E.powf(std::f64::consts::E) {
                return Err(cfg_err("lambda must exceed e^e for the sandwich regime"));
            }
            let k = builtin_polytope(&polytope, dim, scale)?;
            let fb = FloatingBody::new(&k).map_err(|e| run_err(e.to_string()))?;
            let params = floating::sandwich_params(lambda, dim, alpha_override);
            let ps = sampling::sample_poisson(&k, lambda, Seed::new(seed, stream));
            let pr = peel(&ps, None);
            let outcome = floating::sandwich_event(&pr, &ps, &fb, &params, n)
                .map_err(|e| run_err(e.to_string()))?;
            let doc = json!({ "params": params, "outcome": outcome });
            println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
            Ok(())
        }
        Cmd::Capcover { dim, s, seed, lambda, out } => {
            if !(s > 0.0) {
                return Err(cfg_err("s must be positive"));
            }
            let report = macbeath::cap_cover_check(dim, s, Seed::new(seed, 0))
                .map_err(|e| run_err(e.to_string()))?;
            let layer_counts = match lambda {
                Some(l) if l > 0.0 => Some(
                    macbeath::layers_in_mregions(dim, l, s, Seed::new(seed, 1_000_000))
                        .map_err(|e| run_err(e.to_string()))?,
                ),
                Some(_) => return Err(cfg_err("lambda must be positive")),
                None => None,
            };
            let mut csv = String::from("levels,center,vol_k_prime,vol_k_full,layers\n");
            for (i, r) in report.regions.iter().enumerate() {
                let levels: Vec<String> = r.levels.iter().map(|k| k.to_string()).collect();
                let center: Vec<String> =
                    r.center.iter().map(|c| format!("{c:?}")).collect();
                let l_i = layer_counts
                    .as_ref()
                    .map(|ls| ls[i].layer_count.to_string())
                    .unwrap_or_default();
                csv.push_str(&format!(
                    "{},{},{:?},{:?},{}\n",
                    levels.join(";"),
                    center.join(";"),
                    r.vol_k_prime,
                    r.vol_k_full,
                    l_i
                ));
            }
            if report.threshold_warning {
                eprintln!("warning: s exceeds the covering validity threshold (2d)^(-2d)");
            }
            for v in &report.violations {
                eprintln!("violation: {v}");
            }
            emit(&out, &csv)?;
            if !report.violations.is_empty() {
                return Err(run_err("cap cover volume bounds violated"));
            }
            Ok(())
        }
        Cmd::Rescaled { dim, radius, h_min, h_max, reps, seed, out } => {
            if dim < 2 || !(radius > 0.0) || !(h_min < h_max) {
                return Err(cfg_err("need dim >= 2, radius > 0, h_min < h_max"));
            }
            let win = LimitWindow::new(dim, radius, h_min, h_max);
            let mut lines = String::new();
            for r in 0..reps {
                let ps = sampling::sample_limit_process(&win, Seed::new(seed, r));
                let y: Vec<RescaledPoint> = (0..ps.len())
                    .map(|i| {
                        let row = ps.coords(i);
                        RescaledPoint::new(row[..dim - 1].to_vec(), row[dim - 1])
                    })
                    .collect();
                let res = cone_peel(&y, 1.0);
                let mut labels: Vec<(u64, u32)> =
                    res.label.iter().map(|(&i, &l)| (i, l)).collect();
                labels.sort_unstable();
                let max_heights: Vec<f64> = res
                    .layers
                    .iter()
                    .map(|layer| {
                        layer
                            .extreme_ids
                            .iter()
                            .map(|&i| y[i as usize].h)
                            .fold(f64::NEG_INFINITY, f64::max)
                    })
                    .collect();
                let doc = json!({
                    "rep": r,
                    "window": win,
                    "labels": labels,
                    "face_counts": res.layers.iter().map(|l| l.f.clone()).collect::<Vec<_>>(),
                    "max_heights": max_heights,
                    "stalled": res.stalled,
                });
                lines.push_str(&serde_json::to_string(&doc).expect("json"));
                lines.push('\n');
            }
            emit(&out, &lines)
        }
        Cmd::Convexpos { polytope, dim, scale, n_list, reps, seed, out } => {
            let k = builtin_polytope(&polytope, dim, scale)?;
            if reps == 0 {
                return Err(cfg_err("reps must be positive"));
            }
            let mut csv = String::from("n,p,ci_lo,ci_hi\n");
            for (i, tok) in n_list.split(',').enumerate() {
                let n: usize = tok
                    .trim()
                    .parse()
                    .map_err(|_| cfg_err(format!("bad n `{tok}` in n_list")))?;
                if n < 3 {
                    return Err(cfg_err("each n must be >= 3"));
                }
                let (p, lo, hi) = macbeath::convex_position_prob(
                    &k,
                    n,
                    reps,
                    Seed::new(seed, (i as u64) * reps),
                );
                csv.push_str(&format!("{n},{p:?},{lo:?},{hi:?}\n"));
            }
            emit(&out, &csv)
        }
        Cmd::Report { input, out_dir } => run_report(&input, &out_dir),
    }
}

fn run_estimate(loaded: &config::LoadedConfig, out_dir: &Path) -> Result<(), AppError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| run_err(format!("cannot create {}: {e}", out_dir.display())))?;
    let hash = config::config_hash(&loaded.normalized);
    let tag = &hash[..8];
    let mut manifest = RunManifest::begin(hash.clone(), loaded.experiment.seed);
    let out = estimators::run_experiment(&loaded.polytope, &loaded.experiment)
        .map_err(|e| run_err(e.to_string()))?;
    let csv = estimators::rows_to_csv(&loaded.experiment, &out.rows);
    let csv_path = out_dir.join(format!("experiment_{tag}.csv"));
    write_file(&csv_path, &csv)?;
    let summary = json!({
        "config": loaded.normalized,
        "config_hash": hash,
        "n_summaries": out.n_summaries,
        "v_summaries": out.v_summaries,
        "layer_summaries": out.layer_summaries,
        "failed_replications": out.failed_replications,
    });
    let sum_path = out_dir.join(format!("summary_{tag}.json"));
    write_file(&sum_path, &serde_json::to_string_pretty(&summary).expect("json"))?;
    manifest.outputs = vec![
        csv_path.display().to_string(),
        sum_path.display().to_string(),
    ];
    manifest.finish();
    let man_path = out_dir.join(format!("manifest_{tag}.json"));
    write_file(&man_path, &serde_json::to_string_pretty(&manifest).expect("json"))?;
    println!("{}", man_path.display());
    Ok(())
}

fn pull_series(summaries: &Value, field: &str) -> Vec<(f64, f64)> {
    summaries
        .as_array()
        .map(|arr| {
            arr.iter()
                .filter_map(|s| {
                    let x = s.get("lambda")?.as_f64()?;
                    let y = s.get(field)?.as_f64()?;
                    Some((x, y))
                })
                .collect()
        })
        .unwrap_or_default()
}

fn run_report(input: &Path, out_dir: &Path) -> Result<(), AppError> {
    let text = std::fs::read_to_string(input)
        .map_err(|e| cfg_err(format!("cannot read {}: {e}", input.display())))?;
    let doc: Value =
        serde_json::from_str(&text).map_err(|e| cfg_err(format!("bad summary JSON: {e}")))?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| run_err(format!("cannot create {}: {e}", out_dir.display())))?;
    let hash = doc
        .get("config_hash")
        .and_then(|v| v.as_str())
        .unwrap_or("report")
        .to_string();
    let tag = hash[..hash.len().min(8)].to_string();
    let k_list: Vec<u64> = doc
        .pointer("/config/k_list")
        .and_then(|v| v.as_array())
        .map(|a| a.iter().filter_map(|x| x.as_u64()).collect())
        .unwrap_or_default();
    let mut outputs = Vec::new();

    let mut ratio_series = Vec::new();
    if let Some(groups) = doc.get("n_summaries").and_then(|v| v.as_array()) {
        for (ki, group) in groups.iter().enumerate() {
            let name = k_list
                .get(ki)
                .map(|k| format!("k={k}"))
                .unwrap_or_else(|| format!("series {ki}"));
            ratio_series.push(Series { name, points: pull_series(group, "normalized_mean") });
        }
    }
    if let Some(v) = doc.get("v_summaries") {
        ratio_series.push(Series {
            name: "lambda*V".into(),
            points: pull_series(v, "normalized_mean"),
        });
    }
    let ratio_svg = report::render(&PlotSpec {
        title: "normalized means vs lambda".into(),
        x_label: "lambda (log10)".into(),
        y_label: "mean / log^(d-1) lambda".into(),
        log_x: true,
        series: ratio_series,
    });
    let p1 = out_dir.join(format!("ratio_{tag}.svg"));
    write_file(&p1, &ratio_svg)?;
    outputs.push(p1.display().to_string());

    let mut ks_series = Vec::new();
    if let Some(groups) = doc.get("n_summaries").and_then(|v| v.as_array()) {
        for (ki, group) in groups.iter().enumerate() {
            let name = k_list
                .get(ki)
                .map(|k| format!("k={k}"))
                .unwrap_or_else(|| format!("series {ki}"));
            ks_series.push(Series { name, points: pull_series(group, "ks_normal") });
        }
    }
    let ks_svg = report::render(&PlotSpec {
        title: "KS distance vs lambda".into(),
        x_label: "lambda (log10)".into(),
        y_label: "KS vs standard normal".into(),
        log_x: true,
        series: ks_series,
    });
    let p2 = out_dir.join(format!("ks_{tag}.svg"));
    write_file(&p2, &ks_svg)?;
    outputs.push(p2.display().to_string());

    let mut manifest = RunManifest::begin(hash, 0);
    manifest.outputs = outputs;
    manifest.finish();
    let man_path = out_dir.join(format!("report_manifest_{tag}.json"));
    write_file(&man_path, &serde_json::to_string_pretty(&manifest).expect("json"))?;
    println!("{}", man_path.display());
    Ok(())
}

//! Experiment configuration files: JSON with defaults, key-path schema
//! errors, an order-independent config hash, and the run manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::estimators::ExperimentConfig;
use crate::polytope::{self, HPolytope};

#[derive(Debug, Error)]
#[error("config error at `{key}`: {message}")]
pub struct SchemaError {
    pub key: String,
    pub message: String,
}

fn err(key: &str, message: impl Into<String>) -> SchemaError {
    SchemaError { key: key.into(), message: message.into() }
}

/// A parsed experiment configuration: the polytope plus estimator settings.
pub struct LoadedConfig {
    pub polytope: HPolytope,
    pub experiment: ExperimentConfig,
    /// normalized JSON with defaults filled, for hashing and manifests
    pub normalized: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    polytope: Option<Value>,
    dim: Option<i64>,
    lambda_grid: Option<Vec<f64>>,
    n: Option<i64>,
    k_list: Option<Vec<i64>>,
    reps: Option<i64>,
    seed: Option<u64>,
    check_sandwich: Option<bool>,
    alpha_override: Option<f64>,
    window_radius: Option<f64>,
    h_lo: Option<f64>,
    h_hi: Option<f64>,
    h_step: Option<f64>,
    integral_reps: Option<i64>,
    max_layers: Option<i64>,
}

pub fn load_config(path: &Path) -> Result<LoadedConfig, SchemaError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| err("<file>", format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<LoadedConfig, SchemaError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| {
        // serde reports unknown/ill-typed fields with the key name
        err("<root>", e.to_string())
    })?;
    let dim = raw.dim.ok_or_else(|| err("dim", "missing"))?;
    if dim < 2 {
        return Err(err("dim", "must be >= 2"));
    }
    let dim = dim as usize;
    let lambda_grid = raw.lambda_grid.ok_or_else(|| err("lambda_grid", "missing"))?;
    if lambda_grid.is_empty() {
        return Err(err("lambda_grid", "must be nonempty"));
    }
    if !lambda_grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(err("lambda_grid", "must be strictly increasing"));
    }
    if lambda_grid.iter().any(|&l| !(l > 0.0)) {
        return Err(err("lambda_grid", "entries must be positive"));
    }
    let n = raw.n.ok_or_else(|| err("n", "missing"))?;
    if n < 1 {
        return Err(err("n", "must be >= 1"));
    }
    let reps = raw.reps.ok_or_else(|| err("reps", "missing"))?;
    if reps < 2 {
        return Err(err("reps", "must be >= 2"));
    }
    let k_list = raw.k_list.unwrap_or_else(|| vec![0]);
    let mut ks = Vec::new();
    for &k in &k_list {
        if k < 0 || k as usize >= dim {
            return Err(err("k_list", "entries must lie in [0, dim)"));
        }
        ks.push(k as usize);
    }
    let poly_spec = raw
        .polytope
        .clone()
        .unwrap_or_else(|| serde_json::json!({"builtin": "cube"}));
    let polytope = polytope_from_value(dim, &poly_spec)?;
    let mut experiment =
        ExperimentConfig::new(dim, lambda_grid, n as u32, ks, reps as u64, raw.seed.unwrap_or(0));
    experiment.check_sandwich = raw.check_sandwich.unwrap_or(false);
    experiment.alpha_override = raw.alpha_override;
    if let Some(v) = raw.window_radius {
        if !(v > 0.0) {
            return Err(err("window_radius", "must be positive"));
        }
        experiment.window_radius = v;
    }
    if let Some(v) = raw.h_lo {
        experiment.h_lo = v;
    }
    if let Some(v) = raw.h_hi {
        experiment.h_hi = v;
    }
    if experiment.h_lo >= experiment.h_hi {
        return Err(err("h_lo", "must be below h_hi"));
    }
    if let Some(v) = raw.h_step {
        if !(v > 0.0) {
            return Err(err("h_step", "must be positive"));
        }
        experiment.h_step = v;
    }
    if let Some(v) = raw.integral_reps {
        if v < 1 {
            return Err(err("integral_reps", "must be >= 1"));
        }
        experiment.integral_reps = v as u64;
    }
    if let Some(v) = raw.max_layers {
        if v < 1 {
            return Err(err("max_layers", "must be >= 1"));
        }
        experiment.max_layers = Some(v as usize);
    }
    let normalized = serde_json::json!({
        "polytope": poly_spec,
        "dim": experiment.dim,
        "lambda_grid": experiment.lambda_grid,
        "n": experiment.n,
        "k_list": experiment.k_list,
        "reps": experiment.reps,
        "seed": experiment.seed,
        "check_sandwich": experiment.check_sandwich,
        "alpha_override": experiment.alpha_override,
        "window_radius": experiment.window_radius,
        "h_lo": experiment.h_lo,
        "h_hi": experiment.h_hi,
        "h_step": experiment.h_step,
        "integral_reps": experiment.integral_reps,
        "max_layers": experiment.max_layers,
    });
    Ok(LoadedConfig { polytope, experiment, normalized })
}

fn polytope_from_value(dim: usize, spec: &Value) -> Result<HPolytope, SchemaError> {
    match spec {
        Value::String(name) => builtin(dim, name, 1.0),
        Value::Object(map) => {
            if let Some(Value::String(name)) = map.get("builtin") {
                let scale = map
                    .get("scale")
                    .map(|v| v.as_f64().ok_or_else(|| err("polytope.scale", "not a number")))
                    .transpose()?
                    .unwrap_or(1.0);
                if !(scale > 0.0) {
                    return Err(err("polytope.scale", "must be positive"));
                }
                builtin(dim, name, scale)
            } else if map.contains_key("halfspaces") {
                polytope::from_json(&spec.to_string())
                    .map_err(|e| err("polytope.halfspaces", e.to_string()))
            } else {
                Err(err("polytope", "expected `builtin` or `halfspaces`"))
            }
        }
        _ => Err(err("polytope", "expected a string or object")),
    }
}

fn builtin(dim: usize, name: &str, scale: f64) -> Result<HPolytope, SchemaError> {
    match name {
        "cube" | "square" => Ok(polytope::cube(dim, scale)),
        "simplex" | "triangle" => Ok(polytope::simplex(dim, scale)),
        other => Err(err("polytope.builtin", format!("unknown builtin `{other}`"))),
    }
}

/// Canonicalize a JSON value: objects become sorted-key maps, recursively,
/// and the result is serialized compactly. Numbers keep serde_json's
/// shortest representation.
fn canonical_string(v: &Value) -> String {
    fn canon(v: &Value) -> Value {
        match v {
            Value::Object(map) => {
                let sorted: BTreeMap<String, Value> =
                    map.iter().map(|(k, x)| (k.clone(), canon(x))).collect();
                serde_json::to_value(sorted).expect("object")
            }
            Value::Array(a) => Value::Array(a.iter().map(canon).collect()),
            other => other.clone(),
        }
    }
    canon(v).to_string()
}

/// SHA-256 of the canonicalized config: stable under key reordering.
pub fn config_hash(v: &Value) -> String {
    let mut hasher = Sha256::new();
    hasher.update(canonical_string(v).as_bytes());
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config_hash: String,
    pub seed: u64,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn begin(config_hash: String, seed: u64) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash,
            seed,
            started_unix_ms: now_ms(),
            finished_unix_ms: 0,
            outputs: Vec::new(),
        }
    }

    pub fn finish(&mut self) {
        self.finished_unix_ms = now_ms();
    }
}

fn now_ms() -> u128 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

//! Run configurations.
//!
//! A configuration starts from its defaults, is overlaid with an optional
//! TOML file (either flat or under a table named after the command), then
//! with the flags given on the command line. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thinfilm_core::wkbj::{MatchRoot, YConvention};
use thinfilm_core::StartKind;

use crate::usage;

/// Resolves a configuration of type `C` for `command`.
pub fn resolve<C, O>(command: &str, file: Option<&Path>, overrides: &O) -> anyhow::Result<C>
where
    C: DeserializeOwned + Serialize + Default,
    O: Serialize,
{
    let mut merged = serde_json::to_value(C::default())?;
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|e| crate::UsageError(format!("reading {}: {e}", path.display())))?;
        let table: toml::Table = match toml::from_str(&text) {
            Ok(t) => t,
            Err(e) => return usage(format!("parsing {}: {e}", path.display())),
        };
        let section = match table.get(command) {
            Some(toml::Value::Table(t)) => t.clone(),
            _ => table,
        };
        overlay(&mut merged, serde_json::to_value(section)?);
    }
    overlay(&mut merged, serde_json::to_value(overrides)?);
    match serde_json::from_value(merged) {
        Ok(c) => Ok(c),
        Err(e) => usage(format!("invalid {command} configuration: {e}")),
    }
}

fn overlay(base: &mut Value, top: Value) {
    if let (Value::Object(b), Value::Object(t)) = (base, top) {
        for (k, v) in t {
            if !v.is_null() {
                b.insert(k, v);
            }
        }
    }
}

/// Output directory: flag, then `THINFILM_OUT_DIR`, then the working directory.
pub fn output_dir(flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf).or_else(|| std::env::var_os(crate::OUT_DIR_ENV).map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("."))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearScanConfig {
    pub dim: u32,
    pub kind: StartKind,
    /// Explicit grid; when empty the grid is `alpha_start, alpha_start + alpha_step, …, alpha_stop`.
    pub alphas: Vec<f64>,
    pub alpha_start: f64,
    pub alpha_stop: f64,
    pub alpha_step: f64,
    pub window: [f64; 2],
    pub samples: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest tolerated fraction of failed grid points.
    pub max_fail_fraction: f64,
}

impl Default for LinearScanConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            kind: StartKind::Sh2,
            alphas: Vec::new(),
            alpha_start: 0.0137,
            alpha_stop: 3.0,
            alpha_step: 0.05,
            window: [250.0, 300.0],
            samples: 512,
            rel_tol: 1e-13,
            abs_tol: 1e-13,
            max_fail_fraction: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearEigenConfig {
    pub dims: Vec<u32>,
    pub k_max: u32,
    pub step: f64,
    pub offset: f64,
    pub coincidence: f64,
    pub x_tol: f64,
    pub window: [f64; 2],
    pub samples: usize,
}

impl Default for LinearEigenConfig {
    fn default() -> Self {
        Self { dims: vec![1], k_max: 5, step: 0.05, offset: 0.0137, coincidence: 1e-6, x_tol: 1e-11, window: [250.0, 300.0], samples: 512 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BranchConfig {
    pub ks: Vec<u32>,
    pub dims: Vec<u32>,
    /// Increasing, starting in `(0, 1e-3]`.
    pub n_grid: Vec<f64>,
    pub delta: f64,
    pub y_star: f64,
    pub threshold: f64,
    pub check_delta: bool,
    /// Factor applied to `y_*` for the matching-radius check; `0` disables it.
    pub radius_check: f64,
    pub radius_tol: f64,
}

impl Default for BranchConfig {
    fn default() -> Self {
        let d = thinfilm_core::nonlinear::BranchOptions::default();
        Self {
            ks: vec![1],
            dims: vec![1],
            n_grid: vec![1e-3, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5],
            delta: d.delta,
            y_star: d.y_star,
            threshold: d.threshold,
            check_delta: d.check_delta,
            radius_check: d.radius_check.unwrap_or(0.0),
            radius_tol: d.radius_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OscConfig {
    pub n: f64,
    pub alpha: f64,
    pub dim: u32,
    /// Integration length in the rescaled coordinate `ŝ = 4s/n`.
    pub s_hat_end: f64,
    pub ds_hat: f64,
    pub floor: f64,
    pub rel_tol: f64,
    /// Write every `stride`-th sample.
    pub stride: usize,
    /// Extra `n` values classified for periodicity (increasing).
    pub scan: Vec<f64>,
    /// Also integrate the `n = 0` rescaled limit and report its envelope slope.
    pub limit: bool,
}

impl Default for OscConfig {
    fn default() -> Self {
        Self {
            n: 0.1,
            alpha: 0.5,
            dim: 1,
            s_hat_end: 600.0,
            ds_hat: 0.05,
            floor: 1e-12,
            rel_tol: 1e-10,
            stride: 1,
            scan: Vec::new(),
            limit: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WkbjConfig {
    pub dim: u32,
    pub alpha: f64,
    /// Values of `n` for the inner/outer comparison, each in `(0, 0.05]`.
    pub ns: Vec<f64>,
    /// Overlap band `y ∈ [band₀, band₁]·n^{−1/4}`.
    pub band: [f64; 2],
    pub samples: usize,
    /// Inner constant `k₁` as `[re, im]`.
    pub k1: [f64; 2],
    pub convention: YConvention,
    pub root: MatchRoot,
}

impl Default for WkbjConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            alpha: 0.5,
            ns: vec![0.05, 0.02, 0.01],
            band: [0.5, 2.0],
            samples: 64,
            k1: [1.0, 0.0],
            convention: YConvention::Consistent,
            root: MatchRoot::Growing,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegularityConfig {
    pub n: f64,
    pub dim: u32,
    /// Branches `k = 1..=k_max` when `alphas` is empty.
    pub k_max: u32,
    /// `α_k` for `k = 1, 2, …`; when empty they are `k/2` at `n = 0` and traced otherwise.
    pub alphas: Vec<f64>,
}

impl Default for RegularityConfig {
    fn default() -> Self {
        Self { n: 0.0, dim: 1, k_max: 4, alphas: Vec::new() }
    }
}

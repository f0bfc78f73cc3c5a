//! Campaign configuration: one JSON document, with CLI flags overriding
//! individual fields.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    #[serde(default)]
    pub suites: Vec<String>,
    #[serde(default)]
    pub seeds: Seeds,
    #[serde(default)]
    pub dims: Dims,
    /// Catalog names; when empty each suite uses its own defaults.
    #[serde(default)]
    pub functions: Vec<String>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: Output,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Grid sizes for the sine split suite.
    #[serde(default = "default_lp_grids")]
    pub lp_grids: Vec<usize>,
    /// Trials per arm for the three-factor search suite.
    #[serde(default = "default_rst_trials")]
    pub rst_trials: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Seeds {
    #[serde(default)]
    pub base: u64,
    #[serde(default = "default_seed_count")]
    pub count: usize,
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds {
            base: 0,
            count: default_seed_count(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dims {
    #[serde(default = "default_dim_min")]
    pub min: usize,
    #[serde(default = "default_dim_max")]
    pub max: usize,
}

impl Default for Dims {
    fn default() -> Self {
        Dims {
            min: default_dim_min(),
            max: default_dim_max(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tolerances {
    #[serde(default = "default_rel_tol")]
    pub rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rel: default_rel_tol(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Output {
    #[serde(default = "default_out_path")]
    pub path: String,
    #[serde(default)]
    pub format: Format,
}

impl Default for Output {
    fn default() -> Self {
        Output {
            path: default_out_path(),
            format: Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

fn default_seed_count() -> usize {
    10
}
fn default_dim_min() -> usize {
    2
}
fn default_dim_max() -> usize {
    6
}
fn default_rel_tol() -> f64 {
    trace_jensen::report::DEFAULT_TOL
}
fn default_out_path() -> String {
    "report.json".to_string()
}
fn default_workers() -> usize {
    1
}
fn default_lp_grids() -> Vec<usize> {
    vec![101]
}
fn default_rst_trials() -> usize {
    1000
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            suites: Vec::new(),
            seeds: Seeds::default(),
            dims: Dims::default(),
            functions: Vec::new(),
            tolerances: Tolerances::default(),
            output: Output::default(),
            workers: default_workers(),
            lp_grids: default_lp_grids(),
            rst_trials: default_rst_trials(),
        }
    }
}

impl CampaignConfig {
    /// Structural validation; violations are config errors (exit code 4).
    pub fn validate(&self) -> Result<(), String> {
        if self.suites.is_empty() {
            return Err("empty suite list".into());
        }
        for s in &self.suites {
            if crate::suites::find(s).is_none() {
                return Err(format!("unknown suite `{s}`"));
            }
        }
        if self.seeds.count == 0 {
            return Err("seed count must be at least 1".into());
        }
        if self.dims.min < 2 || self.dims.max < self.dims.min {
            return Err(format!(
                "invalid dim range {}..{}",
                self.dims.min, self.dims.max
            ));
        }
        if self.workers == 0 {
            return Err("worker count must be at least 1".into());
        }
        if self.lp_grids.iter().any(|&n| n < 3) {
            return Err("lp grid sizes must be at least 3".into());
        }
        if self.rst_trials == 0 {
            return Err("rst trials must be at least 1".into());
        }
        if !(self.tolerances.rel.is_finite() && self.tolerances.rel >= 0.0) {
            return Err("relative tolerance must be a nonnegative number".into());
        }
        Ok(())
    }
}

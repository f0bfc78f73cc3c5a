//! Campaign execution: expands the config into cells, evaluates them on a
//! small worker pool, and writes report rows incrementally in cell order so
//! interrupted campaigns still leave valid partial output.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use trace_jensen::report::{InequalityReport, Verdict};

use crate::config::{CampaignConfig, Format};
use crate::suites::{self, SuiteSpec};

#[derive(Debug, Clone)]
pub struct CellPlan {
    pub suite: &'static str,
    pub seed: u64,
    pub dim: usize,
    pub function: Option<String>,
}

/// The cross product `suite x seed x dim x function`, with suite-specific
/// degenerate axes (the LP suite runs once per grid size, the search suite
/// once per campaign).
pub fn plan_cells(cfg: &CampaignConfig) -> Vec<CellPlan> {
    let mut cells = Vec::new();
    for suite_id in &cfg.suites {
        let spec = suites::find(suite_id).expect("validated");
        match spec.id {
            "sin_lp" => {
                for &n in &cfg.lp_grids {
                    cells.push(CellPlan {
                        suite: spec.id,
                        seed: cfg.seeds.base,
                        dim: n,
                        function: None,
                    });
                }
            }
            "rst_search" => {
                cells.push(CellPlan {
                    suite: spec.id,
                    seed: cfg.seeds.base,
                    dim: cfg.dims.max,
                    function: None,
                });
            }
            _ => {
                let functions: Vec<Option<String>> = if spec.uses_functions {
                    let names: Vec<String> = if cfg.functions.is_empty() {
                        spec.default_functions
                            .iter()
                            .map(|s| s.to_string())
                            .collect()
                    } else {
                        cfg.functions.clone()
                    };
                    names.into_iter().map(Some).collect()
                } else {
                    vec![None]
                };
                for s in 0..cfg.seeds.count {
                    for dim in cfg.dims.min..=cfg.dims.max {
                        for f in &functions {
                            cells.push(CellPlan {
                                suite: spec.id,
                                seed: cfg.seeds.base + s as u64,
                                dim,
                                function: f.clone(),
                            });
                        }
                    }
                }
            }
        }
    }
    cells
}

#[derive(Debug, Default)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub precondition_failed: usize,
    pub anomalies: Vec<serde_json::Value>,
    pub candidates: Vec<serde_json::Value>,
    pub hard_errors: Vec<String>,
}

impl Summary {
    /// Exit-code contract: 4 = config error (handled before running),
    /// 2 = anomaly (theorem-backed failure or internal error),
    /// 3 = verified search candidate, 1 = ordinary fail/precondition rows,
    /// 0 = all pass.
    pub fn exit_code(&self) -> i32 {
        if !self.anomalies.is_empty() || !self.hard_errors.is_empty() {
            2
        } else if !self.candidates.is_empty() {
            3
        } else if self.fail > 0 || self.precondition_failed > 0 {
            1
        } else {
            0
        }
    }
}

type CellResult = (usize, CellPlan, Result<Vec<InequalityReport>, String>);

/// Run the campaign, writing rows to `cfg.output.path`.
pub fn execute(cfg: &CampaignConfig) -> std::io::Result<Summary> {
    let cells = plan_cells(cfg);
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<CellResult>();

    std::thread::scope(|scope| {
        let workers = cfg.workers.min(cells.len().max(1));
        for _ in 0..workers {
            let tx = tx.clone();
            let cells = &cells;
            let next = &next;
            let cfg = cfg;
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= cells.len() {
                    break;
                }
                let cell = cells[i].clone();
                let spec = suites::find(cell.suite).expect("validated");
                let result = suites::run_cell(
                    spec,
                    cell.seed,
                    cell.dim,
                    cell.function.as_deref(),
                    cfg.tolerances.rel,
                    cfg.rst_trials,
                    (cfg.dims.min, cfg.dims.max),
                )
                .map_err(|e| e.to_string());
                let _ = tx.send((i, cell, result));
            });
        }
        drop(tx);

        let mut writer = RowWriter::create(&cfg.output.path, cfg.output.format)?;
        let mut summary = Summary::default();
        let mut pending: BTreeMap<usize, (CellPlan, Result<Vec<InequalityReport>, String>)> =
            BTreeMap::new();
        let mut next_to_write = 0usize;
        for (i, cell, result) in rx {
            pending.insert(i, (cell, result));
            while let Some((cell, result)) = pending.remove(&next_to_write) {
                record(&mut writer, &mut summary, &cell, result)?;
                next_to_write += 1;
            }
        }
        while let Some((cell, result)) = pending.remove(&next_to_write) {
            record(&mut writer, &mut summary, &cell, result)?;
            next_to_write += 1;
        }
        writer.flush()?;
        Ok(summary)
    })
}

fn record(
    writer: &mut RowWriter,
    summary: &mut Summary,
    cell: &CellPlan,
    result: Result<Vec<InequalityReport>, String>,
) -> std::io::Result<()> {
    let spec: &SuiteSpec = suites::find(cell.suite).expect("validated");
    match result {
        Err(message) => {
            summary.hard_errors.push(format!(
                "suite {} seed {} dim {}: {message}",
                cell.suite, cell.seed, cell.dim
            ));
        }
        Ok(reports) => {
            for report in reports {
                match report.verdict() {
                    Verdict::Pass => summary.pass += 1,
                    Verdict::Fail => {
                        summary.fail += 1;
                        if spec.theorem_backed {
                            summary.anomalies.push(anomaly_record(cell, &report));
                        }
                    }
                    Verdict::PreconditionFailed => summary.precondition_failed += 1,
                }
                if report.id == "rst_search" {
                    let has_candidate = report
                        .metadata
                        .as_ref()
                        .and_then(|m| m.get("candidate"))
                        .map_or(false, |c| !c.is_null());
                    if has_candidate {
                        summary.candidates.push(serde_json::json!({
                            "kind": "rst-candidate",
                            "cell": cell_json(cell),
                            "metadata": report.metadata,
                        }));
                    }
                }
                writer.write_row(&report)?;
            }
            writer.flush()?;
        }
    }
    Ok(())
}

fn anomaly_record(cell: &CellPlan, report: &InequalityReport) -> serde_json::Value {
    serde_json::json!({
        "kind": "theorem-backed-failure",
        "cell": cell_json(cell),
        "row": report.to_row(),
        "metadata": report.metadata,
    })
}

fn cell_json(cell: &CellPlan) -> serde_json::Value {
    serde_json::json!({
        "suite": cell.suite,
        "seed": cell.seed,
        "dim": cell.dim,
        "function": cell.function,
    })
}

/// Dump anomalies and search candidates (with instance manifests) next to
/// the report.
pub fn dump_anomalies(cfg: &CampaignConfig, summary: &Summary) -> std::io::Result<Option<String>> {
    if summary.anomalies.is_empty() && summary.candidates.is_empty() {
        return Ok(None);
    }
    let path = format!("{}.anomalies.json", cfg.output.path);
    let mut file = std::fs::File::create(&path)?;
    let both: Vec<&serde_json::Value> = summary
        .anomalies
        .iter()
        .chain(summary.candidates.iter())
        .collect();
    serde_json::to_writer_pretty(&mut file, &both)?;
    file.write_all(b"\n")?;
    Ok(Some(path))
}

enum RowWriter {
    Json(std::io::BufWriter<std::fs::File>),
    Csv(csv::Writer<std::fs::File>),
}

impl RowWriter {
    fn create(path: &str, format: Format) -> std::io::Result<Self> {
        let file = std::fs::File::create(path)?;
        Ok(match format {
            Format::Json => RowWriter::Json(std::io::BufWriter::new(file)),
            Format::Csv => RowWriter::Csv(csv::Writer::from_writer(file)),
        })
    }

    fn write_row(&mut self, report: &InequalityReport) -> std::io::Result<()> {
        let row = report.to_row();
        match self {
            RowWriter::Json(w) => {
                serde_json::to_writer(&mut *w, &row)?;
                w.write_all(b"\n")
            }
            RowWriter::Csv(w) => w.serialize(&row).map_err(std::io::Error::other),
        }
    }

    fn flush(&mut self) -> std::io::Result<()> {
        match self {
            RowWriter::Json(w) => w.flush(),
            RowWriter::Csv(w) => w.flush(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_code_contract() {
        let mut s = Summary::default();
        assert_eq!(s.exit_code(), 0);
        s.pass = 5;
        assert_eq!(s.exit_code(), 0);
        s.precondition_failed = 1;
        assert_eq!(s.exit_code(), 1);
        s.fail = 1;
        assert_eq!(s.exit_code(), 1);
        s.candidates
            .push(serde_json::json!({"kind": "rst-candidate"}));
        assert_eq!(s.exit_code(), 3);
        // an anomaly dominates everything: a broken build invalidates a find
        s.anomalies
            .push(serde_json::json!({"kind": "theorem-backed-failure"}));
        assert_eq!(s.exit_code(), 2);
    }

    #[test]
    fn plan_expands_cross_product() {
        let mut cfg = crate::config::CampaignConfig::default();
        cfg.suites = vec!["thm2".into(), "sin_lp".into(), "rst_search".into()];
        cfg.seeds.count = 3;
        cfg.dims.min = 2;
        cfg.dims.max = 4;
        cfg.functions = vec!["square".into(), "exp_sum".into()];
        cfg.lp_grids = vec![51, 101];
        let cells = plan_cells(&cfg);
        // thm2: 3 seeds x 3 dims x 2 functions; sin_lp: 2 grids; rst: 1
        assert_eq!(cells.len(), 18 + 2 + 1);
        assert!(cells.iter().filter(|c| c.suite == "sin_lp").count() == 2);
    }
}

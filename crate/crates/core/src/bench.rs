//! Experiment harness: independent runs per (map, optimizer), success ratios,
//! mean and lower-bound convergence, and pairwise rank-sum significance.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{Side, TreeTuple};
use crate::gridmap::{generate_map, load_map, MapError, MapRecipe, OccupancyGrid, RecipeError};
use crate::objective::default_penalty;
use crate::optimizers::{run_on_grid, ConfigError, ConvergenceTrace, OptimizerConfig, OptimizerKind};
use crate::stats::{mean_convergence, min_convergence, rank_sum_test, StatsError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Recipe(#[from] RecipeError),
    #[error("map {name}: {source}")]
    Map { name: String, source: MapError },
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("manifest: {0}")]
    Manifest(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> BenchError + '_ {
    move |source| BenchError::Io { path: path.to_path_buf(), source }
}

/// Outcome of one optimizer run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub map: String,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    pub success: bool,
    /// Final best-so-far fitness; the penalty when nothing feasible was found.
    pub best_length: f64,
    pub best_alpha: Option<f64>,
    pub best_tuple: Option<TreeTuple>,
    pub evaluations: usize,
    #[serde(skip)]
    pub trace: ConvergenceTrace,
}

/// Aggregate over the runs of one (map, optimizer) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub map: String,
    pub optimizer: OptimizerKind,
    pub runs: usize,
    pub evals: usize,
    pub base_seed: u64,
    pub penalty: f64,
    pub success_ratio: f64,
    /// Index into `records` of the shortest feasible run.
    pub best_run: Option<usize>,
    pub records: Vec<RunRecord>,
    #[serde(skip)]
    pub mean_trace: Vec<f64>,
    #[serde(skip)]
    pub min_trace: Vec<f64>,
}

impl ScenarioResult {
    pub fn final_fitnesses(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.best_length).collect()
    }

    pub fn best_record(&self) -> Option<&RunRecord> {
        self.best_run.map(|i| &self.records[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSettings {
    pub runs: usize,
    pub evals: usize,
    pub base_seed: u64,
    pub side: Side,
    pub strict_collision: bool,
}

impl Default for ScenarioSettings {
    fn default() -> Self {
        Self { runs: 20, evals: 1000, base_seed: 0, side: Side::Above, strict_collision: true }
    }
}

pub fn records_traces(records: &[RunRecord]) -> Vec<&[f64]> {
    records.iter().map(|r| r.trace.values()).collect()
}

/// `mean_convergence` over the records' traces.
pub fn mean_of_records(records: &[RunRecord]) -> Result<Vec<f64>, StatsError> {
    mean_convergence(&records_traces(records))
}

/// `min_convergence` over the records' traces.
pub fn min_of_records(records: &[RunRecord]) -> Result<Vec<f64>, StatsError> {
    min_convergence(&records_traces(records))
}

/// Runs seeds `base_seed .. base_seed + runs` (in parallel) and aggregates.
pub fn run_scenario(
    grid: &OccupancyGrid,
    optimizer: &OptimizerConfig,
    settings: &ScenarioSettings,
) -> Result<ScenarioResult, BenchError> {
    optimizer.validate()?;
    let penalty = default_penalty(grid.size());
    let records: Vec<RunRecord> = (0..settings.runs as u64)
        .into_par_iter()
        .map(|i| {
            let seed = settings.base_seed.wrapping_add(i);
            let cfg = OptimizerConfig { seed, ..optimizer.clone() };
            let r = run_on_grid(grid, settings.side, settings.strict_collision, &cfg, settings.evals)?;
            let best_length = r.best_fitness.unwrap_or(penalty);
            Ok(RunRecord {
                map: grid.name().to_string(),
                optimizer: optimizer.kind,
                seed,
                success: best_length < penalty,
                best_length,
                best_alpha: r.best_alpha,
                best_tuple: r.incumbent.map(|inc| inc.tuple),
                evaluations: r.evaluations,
                trace: r.trace,
            })
        })
        .collect::<Result<_, ConfigError>>()?;
    aggregate(grid.name(), optimizer.kind, settings, penalty, records)
}

/// Builds a scenario from finished records.
pub fn aggregate(
    map: &str,
    optimizer: OptimizerKind,
    settings: &ScenarioSettings,
    penalty: f64,
    records: Vec<RunRecord>,
) -> Result<ScenarioResult, BenchError> {
    let runs = records.len();
    let successes = records.iter().filter(|r| r.success).count();
    let success_ratio = if runs == 0 { 0.0 } else { successes as f64 / runs as f64 };
    let best_run = records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.success)
        .min_by(|(_, a), (_, b)| a.best_length.total_cmp(&b.best_length).then(a.seed.cmp(&b.seed)))
        .map(|(i, _)| i);
    let (mean_trace, min_trace) = if runs == 0 {
        (Vec::new(), Vec::new())
    } else {
        (mean_of_records(&records)?, min_of_records(&records)?)
    };
    Ok(ScenarioResult {
        map: map.to_string(),
        optimizer,
        runs,
        evals: settings.evals,
        base_seed: settings.base_seed,
        penalty,
        success_ratio,
        best_run,
        records,
        mean_trace,
        min_trace,
    })
}

/// A map in a suite: inline recipe or a `.map` file relative to the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapEntry {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recipe: Option<MapRecipe>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    /// Free-form labels; `narrow-passage` feeds the trend check.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tags: Vec<String>,
}

impl MapEntry {
    pub fn load(&self, base_dir: &Path) -> Result<OccupancyGrid, BenchError> {
        match (&self.recipe, &self.file) {
            (Some(recipe), None) => {
                let mut g = generate_map(recipe)?;
                g.set_name(self.name.clone());
                Ok(g)
            }
            (None, Some(file)) => {
                let path = base_dir.join(file);
                let text = fs::read_to_string(&path).map_err(io_err(&path))?;
                load_map(&text, self.name.clone())
                    .map_err(|source| BenchError::Map { name: self.name.clone(), source })
            }
            _ => Err(BenchError::Manifest(format!("map {} needs exactly one of recipe or file", self.name))),
        }
    }
}

pub const NARROW_PASSAGE_TAG: &str = "narrow-passage";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteManifest {
    pub name: String,
    pub maps: Vec<MapEntry>,
    pub optimizers: Vec<OptimizerConfig>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default = "default_evals")]
    pub evals: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub side: Side,
    #[serde(default = "default_true")]
    pub strict_collision: bool,
}

fn default_runs() -> usize {
    20
}

fn default_evals() -> usize {
    1000
}

fn default_true() -> bool {
    true
}

impl SuiteManifest {
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let m: Self = serde_json::from_str(text).map_err(|e| BenchError::Manifest(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.maps.is_empty() || self.optimizers.is_empty() {
            return Err(BenchError::Manifest("needs at least one map and one optimizer".into()));
        }
        let mut names: Vec<&str> = self.maps.iter().map(|m| m.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(BenchError::Manifest("duplicate map names".into()));
        }
        let mut kinds: Vec<OptimizerKind> = self.optimizers.iter().map(|o| o.kind).collect();
        kinds.sort_unstable();
        if kinds.windows(2).any(|w| w[0] == w[1]) {
            return Err(BenchError::Manifest("duplicate optimizer kinds".into()));
        }
        for o in &self.optimizers {
            o.validate()?;
        }
        Ok(())
    }

    pub fn settings(&self) -> ScenarioSettings {
        ScenarioSettings {
            runs: self.runs,
            evals: self.evals,
            base_seed: self.base_seed,
            side: self.side,
            strict_collision: self.strict_collision,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceEntry {
    pub map: String,
    pub optimizer_a: OptimizerKind,
    pub optimizer_b: OptimizerKind,
    pub u: f64,
    pub p_value: f64,
}

/// Aggregate success of SaDE versus DE/best/1/bin on narrow-passage maps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendCheck {
    pub maps: Vec<String>,
    pub sade_success: f64,
    pub debest_success: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub manifest: SuiteManifest,
    /// Map-major, in manifest order.
    pub scenarios: Vec<ScenarioResult>,
    pub significance: Vec<SignificanceEntry>,
    pub trend: Option<TrendCheck>,
}

impl SuiteReport {
    pub fn scenario(&self, map: &str, kind: OptimizerKind) -> Option<&ScenarioResult> {
        self.scenarios.iter().find(|s| s.map == map && s.optimizer == kind)
    }

    pub fn success_matrix(&self) -> BTreeMap<String, BTreeMap<OptimizerKind, f64>> {
        let mut m: BTreeMap<String, BTreeMap<OptimizerKind, f64>> = BTreeMap::new();
        for s in &self.scenarios {
            m.entry(s.map.clone()).or_default().insert(s.optimizer, s.success_ratio);
        }
        m
    }
}

/// Runs every (map, optimizer) scenario. Independent runs execute on the
/// current rayon pool; aggregation happens after all runs complete.
pub fn run_suite(manifest: &SuiteManifest, base_dir: &Path) -> Result<SuiteReport, BenchError> {
    manifest.validate()?;
    let settings = manifest.settings();
    let grids: Vec<OccupancyGrid> =
        manifest.maps.iter().map(|m| m.load(base_dir)).collect::<Result<_, _>>()?;
    let pairs: Vec<(usize, usize)> = (0..grids.len())
        .flat_map(|m| (0..manifest.optimizers.len()).map(move |o| (m, o)))
        .collect();
    let scenarios: Vec<ScenarioResult> = pairs
        .par_iter()
        .map(|&(m, o)| run_scenario(&grids[m], &manifest.optimizers[o], &settings))
        .collect::<Result<_, _>>()?;

    let mut significance = Vec::new();
    for entry in &manifest.maps {
        let on_map: Vec<&ScenarioResult> = scenarios.iter().filter(|s| s.map == entry.name).collect();
        for (i, a) in on_map.iter().enumerate() {
            for b in &on_map[i + 1..] {
                let r = rank_sum_test(&a.final_fitnesses(), &b.final_fitnesses())?;
                significance.push(SignificanceEntry {
                    map: entry.name.clone(),
                    optimizer_a: a.optimizer,
                    optimizer_b: b.optimizer,
                    u: r.u,
                    p_value: r.p_value,
                });
            }
        }
    }

    let narrow: Vec<String> = manifest
        .maps
        .iter()
        .filter(|m| m.tags.iter().any(|t| t == NARROW_PASSAGE_TAG))
        .map(|m| m.name.clone())
        .collect();
    let pooled = |kind: OptimizerKind| -> Option<f64> {
        let s: Vec<&ScenarioResult> =
            scenarios.iter().filter(|s| s.optimizer == kind && narrow.contains(&s.map)).collect();
        if s.is_empty() {
            return None;
        }
        let runs: usize = s.iter().map(|s| s.runs).sum();
        let ok: usize = s.iter().map(|s| s.records.iter().filter(|r| r.success).count()).sum();
        Some(if runs == 0 { 0.0 } else { ok as f64 / runs as f64 })
    };
    let trend = match (pooled(OptimizerKind::Sade), pooled(OptimizerKind::DeBest)) {
        (Some(sade_success), Some(debest_success)) => Some(TrendCheck {
            maps: narrow.clone(),
            sade_success,
            debest_success,
            holds: sade_success >= debest_success,
        }),
        _ => None,
    };

    Ok(SuiteReport { manifest: manifest.clone(), scenarios, significance, trend })
}

fn scenario_stem(s: &ScenarioResult) -> String {
    format!("{}__{}", s.map, s.optimizer)
}

/// Writes `contents` through a temporary sibling and renames it into place.
fn write_atomic(path: &Path, contents: &str) -> Result<(), BenchError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let tmp = path.with_extension("partial");
    fs::write(&tmp, contents).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn convergence_csv(report: &SuiteReport, pick: impl Fn(&ScenarioResult) -> &[f64]) -> String {
    let mut out = String::from("map,optimizer,evaluation_index,best_fitness\n");
    for s in &report.scenarios {
        for (i, v) in pick(s).iter().enumerate() {
            out.push_str(&format!("{},{},{},{}\n", s.map, s.optimizer, i + 1, v));
        }
    }
    out
}

pub fn success_ratio_csv(report: &SuiteReport) -> String {
    let kinds: Vec<OptimizerKind> = report.manifest.optimizers.iter().map(|o| o.kind).collect();
    let mut out = String::from("map");
    for k in &kinds {
        out.push(',');
        out.push_str(k.as_str());
    }
    out.push('\n');
    for m in &report.manifest.maps {
        out.push_str(&m.name);
        for &k in &kinds {
            let ratio = report.scenario(&m.name, k).map(|s| s.success_ratio).unwrap_or(f64::NAN);
            out.push_str(&format!(",{ratio}"));
        }
        out.push('\n');
    }
    out
}

pub fn significance_csv(report: &SuiteReport) -> String {
    let mut out = String::from("map,optimizer_a,optimizer_b,u_statistic,p_value\n");
    for e in &report.significance {
        out.push_str(&format!("{},{},{},{},{}\n", e.map, e.optimizer_a, e.optimizer_b, e.u, e.p_value));
    }
    out
}

fn runs_csv(s: &ScenarioResult) -> String {
    let mut out = String::from("evaluation_index");
    for r in &s.records {
        out.push_str(&format!(",seed_{}", r.seed));
    }
    out.push('\n');
    let len = s.records.iter().map(|r| r.trace.len()).max().unwrap_or(0);
    let padded: Vec<Vec<f64>> = s.records.iter().map(|r| r.trace.extended(len)).collect();
    for i in 0..len {
        out.push_str(&(i + 1).to_string());
        for p in &padded {
            match p.get(i) {
                Some(v) => out.push_str(&format!(",{v}")),
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

pub fn text_summary(report: &SuiteReport) -> String {
    let mut out = format!(
        "suite {}: {} maps x {} optimizers, {} runs x {} evals, base seed {}\n\n",
        report.manifest.name,
        report.manifest.maps.len(),
        report.manifest.optimizers.len(),
        report.manifest.runs,
        report.manifest.evals,
        report.manifest.base_seed
    );
    out.push_str("success ratio\n");
    out.push_str(&success_ratio_csv(report));
    out.push('\n');
    match &report.trend {
        Some(t) => out.push_str(&format!(
            "trend (narrow-passage maps {}): sade {:.3} vs debest {:.3} -> {}\n",
            t.maps.join(" "),
            t.sade_success,
            t.debest_success,
            if t.holds { "holds" } else { "REVERSED, investigate" }
        )),
        None => out.push_str("trend: not evaluated (needs sade, debest and narrow-passage maps)\n"),
    }
    out
}

#[derive(Serialize)]
struct SummaryJson<'a> {
    manifest: &'a SuiteManifest,
    success_ratio: BTreeMap<String, BTreeMap<OptimizerKind, f64>>,
    trend: &'a Option<TrendCheck>,
    significance: &'a [SignificanceEntry],
}

/// Writes the full output tree:
///
/// ```text
/// summary.json  report.txt  success_ratio.csv  significance.csv
/// mean_convergence.csv  min_convergence.csv
/// results/<map>__<optimizer>.json   traces/<map>__<optimizer>.csv
/// ```
pub fn write_report(report: &SuiteReport, out_dir: &Path) -> Result<(), BenchError> {
    for s in &report.scenarios {
        let stem = scenario_stem(s);
        let json = serde_json::to_string_pretty(s).expect("scenario serializes");
        write_atomic(&out_dir.join("results").join(format!("{stem}.json")), &(json + "\n"))?;
        write_atomic(&out_dir.join("traces").join(format!("{stem}.csv")), &runs_csv(s))?;
    }
    write_atomic(&out_dir.join("mean_convergence.csv"), &convergence_csv(report, |s| &s.mean_trace))?;
    write_atomic(&out_dir.join("min_convergence.csv"), &convergence_csv(report, |s| &s.min_trace))?;
    write_atomic(&out_dir.join("success_ratio.csv"), &success_ratio_csv(report))?;
    write_atomic(&out_dir.join("significance.csv"), &significance_csv(report))?;
    let summary = SummaryJson {
        manifest: &report.manifest,
        success_ratio: report.success_matrix(),
        trend: &report.trend,
        significance: &report.significance,
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    write_atomic(&out_dir.join("summary.json"), &(json + "\n"))?;
    write_atomic(&out_dir.join("report.txt"), &text_summary(report))?;
    Ok(())
}

//! Schedulability-ratio experiments, the case study and single-file entry points.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::gang::GangTestRegistry;
use crate::generate::{edge_tpu_suite, gen_taskset, mix_seed, Card, GenError, GenSpec, VolumeLevel};
use crate::model::{
    hyperperiod, ModelError, PartitionPlan, SchedulerKind, TaskSet, TaskSetFile, Time, DEFAULT_HORIZON_CAP,
};
use crate::partition::{sp_u, ConfigError, PartitionOutcome, PartitionerConfig};
use crate::sim::{simulate, ReleasePattern, SimError, SimTarget, SimTrace};

pub const CSV_HEADER: &str = "scenario,M,n,volume_level,norm_util,test,schedulable,total,ratio";

pub const DESK_SETS_PER_CELL: usize = 100;
pub const FULL_SETS_PER_CELL: usize = 1000;

/// Longest horizon a spot check simulates.
pub const SPOT_CHECK_HORIZON: Time = 20_000;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Generation(#[from] GenError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    Preemptive,
    NonPreemptive,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Preemptive => "preemptive",
            Scenario::NonPreemptive => "non-preemptive",
        }
    }

    pub fn default_tests(self) -> Vec<PartitionerConfig> {
        let names: &[&str] = match self {
            Scenario::Preemptive => &["SP-U(FP-P)", "SP-U(EDF-P)", "SP-G(FP-P)", "SP-B(EDF-P)"],
            Scenario::NonPreemptive => &["SP-U(FP-NP)", "SP-G(FP-NP)"],
        };
        names
            .iter()
            .map(|n| n.parse().expect("built-in test names parse"))
            .collect()
    }
}

impl std::str::FromStr for Scenario {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "preemptive" | "p" => Ok(Scenario::Preemptive),
            "non-preemptive" | "nonpreemptive" | "np" => Ok(Scenario::NonPreemptive),
            _ => Err(ExperimentError::InvalidGrid(format!("unknown scenario `{s}`"))),
        }
    }
}

pub fn default_utilizations() -> Vec<f64> {
    (1..=10).map(|k| f64::from(k) / 10.0).collect()
}

/// The synthetic parameter lattice. `n` takes each value of
/// `task_factors` times `M`.
#[derive(Debug, Clone)]
pub struct ExperimentGrid {
    pub scenario: Scenario,
    pub processors: Vec<u32>,
    pub task_factors: Vec<usize>,
    pub levels: Vec<VolumeLevel>,
    pub utilizations: Vec<f64>,
    pub sets_per_cell: usize,
    pub tests: Vec<PartitionerConfig>,
    pub seed: u64,
    /// Fraction of accepted sets re-simulated.
    pub spot_check_rate: f64,
}

impl ExperimentGrid {
    pub fn desk(scenario: Scenario, seed: u64) -> Self {
        Self {
            scenario,
            processors: vec![8, 16],
            task_factors: vec![1, 2],
            levels: VolumeLevel::ALL.to_vec(),
            utilizations: default_utilizations(),
            sets_per_cell: DESK_SETS_PER_CELL,
            tests: scenario.default_tests(),
            seed,
            spot_check_rate: 0.01,
        }
    }

    pub fn full_scale(mut self) -> Self {
        self.sets_per_cell = FULL_SETS_PER_CELL;
        self
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::InvalidGrid(m.to_string()));
        if self.sets_per_cell == 0 {
            return bad("sets_per_cell must be at least 1");
        }
        if self.utilizations.is_empty() || self.utilizations.iter().any(|&u| !(u > 0.0 && u <= 1.0)) {
            return bad("normalized utilizations must lie in (0, 1]");
        }
        if self.tests.is_empty() {
            return bad("no tests selected");
        }
        if self.processors.is_empty() || self.task_factors.is_empty() || self.levels.is_empty() {
            return bad("every grid axis needs at least one value");
        }
        if self.task_factors.contains(&0) {
            return bad("task factors must be positive");
        }
        for &m in &self.processors {
            if self.levels.iter().any(|l| l.upper(m) == 0) {
                return bad("a volume level is empty for one of the processor counts");
            }
        }
        if !(0.0..=1.0).contains(&self.spot_check_rate) {
            return bad("spot-check rate must lie in [0, 1]");
        }
        Ok(())
    }
}

/// One CSV row: `schedulable` of `total` sets accepted.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioRow {
    pub scenario: String,
    /// Processor count, or `None` in the averaged view.
    pub processors: Option<u32>,
    pub tasks: Option<usize>,
    pub volume_level: String,
    pub norm_util: f64,
    pub test: String,
    pub schedulable: usize,
    pub total: usize,
}

impl RatioRow {
    pub fn ratio(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.schedulable as f64 / self.total as f64
        }
    }

    fn csv_line(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "avg".to_string());
        format!(
            "{},{},{},{},{:.1},{},{},{},{:.4}",
            self.scenario,
            opt(self.processors.map(|m| m.to_string())),
            opt(self.tasks.map(|n| n.to_string())),
            self.volume_level,
            self.norm_util,
            self.test,
            self.schedulable,
            self.total,
            self.ratio()
        )
    }
}

pub fn rows_to_csv(rows: &[RatioRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_line());
        out.push('\n');
    }
    out
}

/// Outcome of re-simulating accepted sets.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpotCheck {
    pub checked: usize,
    /// `(test, seed)` of every accepted set that missed a deadline.
    pub failures: Vec<(String, u64)>,
}

impl SpotCheck {
    fn merge(&mut self, other: SpotCheck) {
        self.checked += other.checked;
        self.failures.extend(other.failures);
    }
}

#[derive(Debug, Clone, Default)]
pub struct GridReport {
    pub rows: Vec<RatioRow>,
    pub averaged: Vec<RatioRow>,
    pub spot_check: SpotCheck,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    processors: u32,
    tasks: usize,
    level: VolumeLevel,
    util_index: usize,
}

/// Runs every cell and test; rows come out in grid order.
pub fn evaluate_grid(grid: &ExperimentGrid, registry: &GangTestRegistry) -> Result<GridReport, ExperimentError> {
    grid.validate()?;
    let mut cells = Vec::new();
    for &processors in &grid.processors {
        for &factor in &grid.task_factors {
            for &level in &grid.levels {
                for util_index in 0..grid.utilizations.len() {
                    cells.push(Cell {
                        processors,
                        tasks: factor * processors as usize,
                        level,
                        util_index,
                    });
                }
            }
        }
    }

    let results = cells
        .par_iter()
        .map(|cell| run_cell(grid, registry, *cell))
        .collect::<Result<Vec<_>, _>>()?;

    let mut report = GridReport::default();
    for (rows, check) in results {
        report.rows.extend(rows);
        report.spot_check.merge(check);
    }
    report.averaged = average_over_platforms(&report.rows);
    Ok(report)
}

fn run_cell(
    grid: &ExperimentGrid,
    registry: &GangTestRegistry,
    cell: Cell,
) -> Result<(Vec<RatioRow>, SpotCheck), ExperimentError> {
    let util = grid.utilizations[cell.util_index];
    let mut accepted = vec![0usize; grid.tests.len()];
    let mut check = SpotCheck::default();
    for set in 0..grid.sets_per_cell {
        let seed = mix_seed(
            grid.seed,
            &[
                u64::from(cell.processors),
                cell.tasks as u64,
                cell.level as u64,
                cell.util_index as u64,
                set as u64,
            ],
        );
        let spec = GenSpec::new(cell.processors, cell.tasks, cell.level, util, seed);
        let generated = gen_taskset(&spec)?;
        for (k, test) in grid.tests.iter().enumerate() {
            let outcome = test.run(&generated.tasks, cell.processors, registry)?;
            if !outcome.accepted {
                continue;
            }
            accepted[k] += 1;
            if picked_for_spot_check(seed, k, grid.spot_check_rate) {
                check.checked += 1;
                if !spot_check(test, &outcome, &generated.tasks, cell.processors) {
                    check.failures.push((test.name(), seed));
                }
            }
        }
    }
    let rows = grid
        .tests
        .iter()
        .zip(accepted)
        .map(|(test, schedulable)| RatioRow {
            scenario: grid.scenario.as_str().to_string(),
            processors: Some(cell.processors),
            tasks: Some(cell.tasks),
            volume_level: cell.level.as_str().to_string(),
            norm_util: util,
            test: test.name(),
            schedulable,
            total: grid.sets_per_cell,
        })
        .collect();
    Ok((rows, check))
}

fn picked_for_spot_check(seed: u64, test_index: usize, rate: f64) -> bool {
    if rate <= 0.0 {
        return false;
    }
    let draw = mix_seed(seed, &[test_index as u64, 0x5eed]) as f64 / u64::MAX as f64;
    draw < rate
}

/// Re-simulates an accepted set under synchronous release and reports
/// whether it ran without a deadline miss. Bound-based acceptances are
/// checked through the FFDV plan they guarantee.
pub fn spot_check(
    test: &PartitionerConfig,
    outcome: &PartitionOutcome,
    taskset: &TaskSet,
    processors: u32,
) -> bool {
    let derived;
    let plan = match &outcome.plan {
        Some(plan) => plan,
        None => match sp_u(taskset, processors, SchedulerKind::UNI_EDF_P) {
            Ok(plan) => {
                derived = plan;
                &derived
            }
            Err(_) => return false,
        },
    };
    let horizon = hyperperiod(taskset.tasks(), DEFAULT_HORIZON_CAP)
        .finite()
        .unwrap_or(SPOT_CHECK_HORIZON)
        .min(SPOT_CHECK_HORIZON);
    match simulate(
        SimTarget::Plan(plan),
        taskset,
        test.kind,
        &ReleasePattern::synchronous(horizon),
    ) {
        Ok(trace) => trace.is_schedulable(),
        Err(_) => false,
    }
}

/// Averages each `(scenario, level, util, test)` point over `M` and `n`.
pub fn average_over_platforms(rows: &[RatioRow]) -> Vec<RatioRow> {
    let mut out: Vec<RatioRow> = Vec::new();
    for row in rows {
        let existing = out.iter_mut().find(|r| {
            r.scenario == row.scenario
                && r.volume_level == row.volume_level
                && r.norm_util == row.norm_util
                && r.test == row.test
        });
        match existing {
            Some(r) => {
                r.schedulable += row.schedulable;
                r.total += row.total;
            }
            None => out.push(RatioRow {
                processors: None,
                tasks: None,
                ..row.clone()
            }),
        }
    }
    out
}

/// Path of the averaged companion file: `grid.csv` → `grid_avg.csv`.
pub fn averaged_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("grid");
    out.with_file_name(format!("{stem}_avg.csv"))
}

/// Runs the grid and writes the per-cell CSV to `out` and the averaged
/// view next to it.
pub fn run_grid(
    grid: &ExperimentGrid,
    registry: &GangTestRegistry,
    out: &Path,
) -> Result<GridReport, ExperimentError> {
    let report = evaluate_grid(grid, registry)?;
    write_file(out, &rows_to_csv(&report.rows))?;
    write_file(&averaged_path(out), &rows_to_csv(&report.averaged))?;
    Ok(report)
}

fn write_file(path: &Path, text: &str) -> Result<(), ExperimentError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    std::fs::write(path, text).map_err(io_err(path))
}

#[derive(Debug, Clone)]
pub struct CaseStudy {
    pub card: Card,
    pub utilizations: Vec<f64>,
    pub sets_per_util: usize,
    pub tests: Vec<PartitionerConfig>,
    pub seed: u64,
    pub spot_check_rate: f64,
}

impl CaseStudy {
    pub fn new(card: Card, seed: u64) -> Self {
        Self {
            card,
            utilizations: default_utilizations(),
            sets_per_util: DESK_SETS_PER_CELL,
            tests: Scenario::NonPreemptive.default_tests(),
            seed,
            spot_check_rate: 0.01,
        }
    }
}

/// Ratios per utilization for the Edge TPU suite of one card.
pub fn evaluate_case_study(study: &CaseStudy, registry: &GangTestRegistry) -> Result<GridReport, ExperimentError> {
    if study.sets_per_util == 0 {
        return Err(ExperimentError::InvalidGrid("sets per utilization must be at least 1".into()));
    }
    if study.tests.is_empty() {
        return Err(ExperimentError::InvalidGrid("no tests selected".into()));
    }
    if study.utilizations.iter().any(|&u| !(u > 0.0 && u <= 1.0)) {
        return Err(ExperimentError::InvalidGrid("normalized utilizations must lie in (0, 1]".into()));
    }
    let processors = study.card.processors();
    let n = study.card.models().len();
    let results = study
        .utilizations
        .par_iter()
        .enumerate()
        .map(|(ui, &util)| -> Result<_, ExperimentError> {
            let mut accepted = vec![0usize; study.tests.len()];
            let mut check = SpotCheck::default();
            for set in 0..study.sets_per_util {
                let seed = mix_seed(study.seed, &[u64::from(processors), ui as u64, set as u64]);
                let generated = edge_tpu_suite(study.card, util, seed)?;
                for (k, test) in study.tests.iter().enumerate() {
                    let outcome = test.run(&generated.tasks, processors, registry)?;
                    if outcome.accepted {
                        accepted[k] += 1;
                        if picked_for_spot_check(seed, k, study.spot_check_rate) {
                            check.checked += 1;
                            if !spot_check(test, &outcome, &generated.tasks, processors) {
                                check.failures.push((test.name(), seed));
                            }
                        }
                    }
                }
            }
            let rows: Vec<RatioRow> = study
                .tests
                .iter()
                .zip(accepted)
                .map(|(test, schedulable)| RatioRow {
                    scenario: study.card.as_str().to_string(),
                    processors: Some(processors),
                    tasks: Some(n),
                    volume_level: "tpu".to_string(),
                    norm_util: util,
                    test: test.name(),
                    schedulable,
                    total: study.sets_per_util,
                })
                .collect();
            Ok((rows, check))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut report = GridReport::default();
    for (rows, check) in results {
        report.rows.extend(rows);
        report.spot_check.merge(check);
    }
    report.averaged = report.rows.clone();
    Ok(report)
}

pub fn run_case_study(
    study: &CaseStudy,
    registry: &GangTestRegistry,
    out: &Path,
) -> Result<GridReport, ExperimentError> {
    let report = evaluate_case_study(study, registry)?;
    write_file(out, &rows_to_csv(&report.rows))?;
    Ok(report)
}

/// Process exit status of `analyze`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalyzeStatus {
    Schedulable = 0,
    Unschedulable = 1,
    Malformed = 2,
}

impl AnalyzeStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// JSON report for one task set under one strategy.
pub fn analysis_report(
    file: &TaskSetFile,
    config: &PartitionerConfig,
    registry: &GangTestRegistry,
) -> Result<(bool, Value), ExperimentError> {
    let processors = file.platform.processors;
    let outcome = config.run(&file.tasks, processors, registry)?;
    let plan = match &outcome.plan {
        Some(plan) => Some(plan_report(plan, file, config, registry)?),
        None => None,
    };
    let failure = outcome
        .failure
        .as_ref()
        .map(|f| json!({ "task": f.task, "unassigned": f.unassigned }));
    let bounds = outcome.bounds.as_ref().map(|b| {
        json!({
            "thm1": b.thm1.holds,
            "thm2": b.thm2.holds,
            "thm3": b.thm3.check.holds,
            "accepted_by": b.accepted_by(),
        })
    });
    Ok((
        outcome.accepted,
        json!({
            "test": config.name(),
            "schedulable": outcome.accepted,
            "plan": plan,
            "failure": failure,
            "bounds": bounds,
        }),
    ))
}

fn plan_report(
    plan: &PartitionPlan,
    file: &TaskSetFile,
    config: &PartitionerConfig,
    registry: &GangTestRegistry,
) -> Result<Value, ExperimentError> {
    let mut doc: Value = serde_json::from_str(&plan.to_json()).expect("plan JSON is well formed");
    let mut responses = Vec::new();
    for (index, p) in plan.partitions.iter().enumerate() {
        let members = file.tasks.subset(&p.members);
        let verdict = config.partition_verdict(&members, p.volume, registry)?;
        let per_task: Vec<Value> = verdict
            .responses
            .iter()
            .flatten()
            .map(|(task, r)| json!({ "task": task, "response": r }))
            .collect();
        responses.push(json!({
            "partition": index,
            "reason": verdict.reason.code(),
            "responses": per_task,
        }));
    }
    doc["responses"] = Value::Array(responses);
    Ok(doc)
}

/// Analyzes one task-set file and prints the report to `out`; malformed
/// input is reported on `err`.
pub fn analyze_file(
    path: &Path,
    config: &PartitionerConfig,
    registry: &GangTestRegistry,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> AnalyzeStatus {
    let file = match TaskSetFile::load(path) {
        Ok(f) => f,
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", path.display());
            return AnalyzeStatus::Malformed;
        }
    };
    match analysis_report(&file, config, registry) {
        Ok((accepted, report)) => {
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("serializable"));
            if accepted {
                AnalyzeStatus::Schedulable
            } else {
                AnalyzeStatus::Unschedulable
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            AnalyzeStatus::Malformed
        }
    }
}

/// Writes `count` generated task-set files into `dir` and returns their paths.
pub fn write_generated(spec: &GenSpec, count: usize, dir: &Path) -> Result<Vec<PathBuf>, ExperimentError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut paths = Vec::with_capacity(count);
    for i in 0..count {
        let mut s = spec.clone();
        s.seed = mix_seed(spec.seed, &[i as u64]);
        let generated = gen_taskset(&s)?;
        let file = TaskSetFile::new(
            crate::model::Platform::new(generated.processors)?,
            generated.tasks,
        );
        let path = dir.join(format!("set-{i:04}.json"));
        write_file(&path, &file.to_json())?;
        paths.push(path);
    }
    Ok(paths)
}

/// How `simulate_file` lays tasks onto processors.
#[derive(Debug, Clone)]
pub enum SimulateMode {
    /// Partition with the strategy first, then simulate its plan.
    Partitioned(PartitionerConfig),
    /// All tasks share the platform under one scheduler.
    Global(SchedulerKind),
}

/// Simulates a task-set file under synchronous release. The horizon
/// defaults to the hyperperiod, capped.
pub fn simulate_file(
    path: &Path,
    mode: &SimulateMode,
    horizon: Option<Time>,
    registry: &GangTestRegistry,
) -> Result<SimTrace, ExperimentError> {
    let file = TaskSetFile::load(path)?;
    let horizon = match horizon {
        Some(h) => h,
        None => hyperperiod(file.tasks.tasks(), DEFAULT_HORIZON_CAP)
            .finite()
            .unwrap_or(DEFAULT_HORIZON_CAP),
    };
    let pattern = ReleasePattern::synchronous(horizon);
    let processors = file.platform.processors;
    let trace = match mode {
        SimulateMode::Global(kind) => simulate(SimTarget::Global { processors }, &file.tasks, *kind, &pattern)?,
        SimulateMode::Partitioned(config) => {
            let outcome = config.run(&file.tasks, processors, registry)?;
            let plan = match outcome.plan {
                Some(plan) => plan,
                None => sp_u(&file.tasks, processors, config.kind).map_err(|f| {
                    ExperimentError::InvalidGrid(format!("no plan to simulate: task {} does not fit", f.task))
                })?,
            };
            simulate(SimTarget::Plan(&plan), &file.tasks, config.kind, &pattern)?
        }
    };
    Ok(trace)
}

/// Short human summary of a report, one line per averaged point.
pub fn summary(report: &GridReport) -> String {
    let mut s = String::new();
    for row in &report.averaged {
        let _ = writeln!(
            s,
            "{:<15} {:<7} U/M={:.1} {:<12} {:>6.1}%",
            row.scenario,
            row.volume_level,
            row.norm_util,
            row.test,
            100.0 * row.ratio()
        );
    }
    let _ = writeln!(
        s,
        "spot checks: {} simulated, {} failed",
        report.spot_check.checked,
        report.spot_check.failures.len()
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_grid() -> ExperimentGrid {
        ExperimentGrid {
            processors: vec![8],
            task_factors: vec![1],
            levels: vec![VolumeLevel::High],
            utilizations: vec![0.2, 1.0],
            sets_per_cell: 5,
            ..ExperimentGrid::desk(Scenario::Preemptive, 11)
        }
    }

    #[test]
    fn zero_sets_rejected() {
        let grid = ExperimentGrid {
            sets_per_cell: 0,
            ..tiny_grid()
        };
        assert!(matches!(
            evaluate_grid(&grid, &GangTestRegistry::new()),
            Err(ExperimentError::InvalidGrid(_))
        ));
    }

    #[test]
    fn grid_is_deterministic_and_ordered() {
        let reg = GangTestRegistry::new();
        let a = rows_to_csv(&evaluate_grid(&tiny_grid(), &reg).unwrap().rows);
        let b = rows_to_csv(&evaluate_grid(&tiny_grid(), &reg).unwrap().rows);
        assert_eq!(a, b);
        let mut lines = a.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert!(lines
            .next()
            .unwrap()
            .starts_with("preemptive,8,8,high,0.2,SP-U(FP-P),"));
        assert_eq!(a.lines().count(), 1 + 2 * 4);
    }

    #[test]
    fn full_utilization_high_volume_is_near_zero() {
        let report = evaluate_grid(&tiny_grid(), &GangTestRegistry::new()).unwrap();
        let row = report
            .rows
            .iter()
            .find(|r| r.norm_util == 1.0 && r.test == "SP-U(FP-P)")
            .unwrap();
        assert!(row.ratio() <= 0.2);
    }

    #[test]
    fn averaging_sums_counts() {
        let row = |m, s| RatioRow {
            scenario: "preemptive".into(),
            processors: Some(m),
            tasks: Some(m as usize),
            volume_level: "low".into(),
            norm_util: 0.5,
            test: "SP-U(FP-P)".into(),
            schedulable: s,
            total: 10,
        };
        let avg = average_over_platforms(&[row(8, 4), row(16, 6)]);
        assert_eq!(avg.len(), 1);
        assert_eq!((avg[0].schedulable, avg[0].total), (10, 20));
        assert_eq!(avg[0].csv_line(), "preemptive,avg,avg,low,0.5,SP-U(FP-P),10,20,0.5000");
    }

    #[test]
    fn averaged_file_name() {
        assert_eq!(averaged_path(Path::new("out/grid.csv")), PathBuf::from("out/grid_avg.csv"));
    }
}

//! Task, platform and partition model shared by every analysis.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Integer time, in ticks.
pub type Time = u64;

/// Task identifier.
pub type TaskId = u32;

/// Default cap on hyperperiods and busy periods, in ticks.
pub const DEFAULT_HORIZON_CAP: Time = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("task {id}: field `{field}` must be at least 1")]
    NonPositiveField { id: TaskId, field: &'static str },
    #[error("task {id}: deadline {deadline} exceeds period {period}")]
    DeadlineExceedsPeriod {
        id: TaskId,
        deadline: Time,
        period: Time,
    },
    #[error("task {id}: wcet {wcet} exceeds deadline {deadline}")]
    WcetExceedsDeadline { id: TaskId, wcet: Time, deadline: Time },
    #[error("duplicate task id {0}")]
    DuplicateTaskId(TaskId),
    #[error("platform must have at least one processor")]
    NoProcessors,
    #[error("non-preemptive EDF is not supported")]
    NonPreemptiveEdf,
    #[error("unknown scheduler kind `{0}`")]
    UnknownSchedulerKind(String),
    #[error("malformed task-set document: {0}")]
    Parse(String),
    #[error("cannot read task-set file: {0}")]
    Io(String),
}

/// A sporadic rigid gang task `(C, T, D, m)`.
///
/// Every job needs `volume` processors simultaneously for `wcet` ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GangTask {
    pub id: TaskId,
    pub wcet: Time,
    pub period: Time,
    pub deadline: Time,
    pub volume: u32,
}

impl GangTask {
    /// Builds a task, rejecting anything outside the constrained-deadline
    /// integer model.
    pub fn new(
        id: TaskId,
        wcet: Time,
        period: Time,
        deadline: Time,
        volume: u32,
    ) -> Result<Self, ModelError> {
        validate_task(id, wcet, period, deadline, volume)
    }

    /// Implicit-deadline shorthand.
    pub fn implicit(id: TaskId, wcet: Time, period: Time, volume: u32) -> Result<Self, ModelError> {
        Self::new(id, wcet, period, period, volume)
    }

    /// Sequential utilization `C / T`.
    pub fn seq_util(&self) -> BigRational {
        BigRational::new(BigInt::from(self.wcet), BigInt::from(self.period))
    }

    /// Task utilization `m · C / T`.
    pub fn util(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.wcet) * BigInt::from(self.volume),
            BigInt::from(self.period),
        )
    }

    pub fn seq_util_f64(&self) -> f64 {
        self.wcet as f64 / self.period as f64
    }

    pub fn util_f64(&self) -> f64 {
        self.volume as f64 * self.seq_util_f64()
    }

    pub fn is_implicit(&self) -> bool {
        self.deadline == self.period
    }
}

/// Checks raw integer fields against the task model.
pub fn validate_task(
    id: TaskId,
    wcet: Time,
    period: Time,
    deadline: Time,
    volume: u32,
) -> Result<GangTask, ModelError> {
    for (field, value) in [
        ("wcet", wcet),
        ("period", period),
        ("deadline", deadline),
        ("volume", u64::from(volume)),
    ] {
        if value == 0 {
            return Err(ModelError::NonPositiveField { id, field });
        }
    }
    if deadline > period {
        return Err(ModelError::DeadlineExceedsPeriod {
            id,
            deadline,
            period,
        });
    }
    if wcet > deadline {
        return Err(ModelError::WcetExceedsDeadline { id, wcet, deadline });
    }
    Ok(GangTask {
        id,
        wcet,
        period,
        deadline,
        volume,
    })
}

/// An ordered collection of gang tasks with unique ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct TaskSet {
    tasks: Vec<GangTask>,
}

impl TaskSet {
    pub fn new(tasks: Vec<GangTask>) -> Result<Self, ModelError> {
        let mut seen = BTreeSet::new();
        for t in &tasks {
            validate_task(t.id, t.wcet, t.period, t.deadline, t.volume)?;
            if !seen.insert(t.id) {
                return Err(ModelError::DuplicateTaskId(t.id));
            }
        }
        Ok(Self { tasks })
    }

    pub fn tasks(&self) -> &[GangTask] {
        &self.tasks
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn get(&self, id: TaskId) -> Option<&GangTask> {
        self.tasks.iter().find(|t| t.id == id)
    }

    /// Total utilization `Σ m_i C_i / T_i`.
    pub fn total_util(&self) -> BigRational {
        self.tasks
            .iter()
            .fold(BigRational::from_integer(0.into()), |acc, t| acc + t.util())
    }

    /// Largest task volume, 0 for an empty set.
    pub fn max_volume(&self) -> u32 {
        self.tasks.iter().map(|t| t.volume).max().unwrap_or(0)
    }

    /// Smallest task volume, 0 for an empty set.
    pub fn min_volume(&self) -> u32 {
        self.tasks.iter().map(|t| t.volume).min().unwrap_or(0)
    }

    /// Sub-set holding the given ids, in this set's order.
    pub fn subset(&self, ids: &[TaskId]) -> Vec<GangTask> {
        self.tasks
            .iter()
            .filter(|t| ids.contains(&t.id))
            .copied()
            .collect()
    }
}

impl<'a> IntoIterator for &'a TaskSet {
    type Item = &'a GangTask;
    type IntoIter = std::slice::Iter<'a, GangTask>;

    fn into_iter(self) -> Self::IntoIter {
        self.tasks.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Platform {
    pub processors: u32,
}

impl Platform {
    pub fn new(processors: u32) -> Result<Self, ModelError> {
        if processors == 0 {
            return Err(ModelError::NoProcessors);
        }
        Ok(Self { processors })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Policy {
    Fp,
    Edf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Preemption {
    Preemptive,
    NonPreemptive,
}

/// Whether a partition runs one job at a time or lets gang jobs share it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scope {
    Uniprocessor,
    Gang,
}

/// Online scheduler used inside one partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SchedulerKind {
    policy: Policy,
    preemption: Preemption,
    scope: Scope,
}

impl SchedulerKind {
    pub fn new(policy: Policy, preemption: Preemption, scope: Scope) -> Result<Self, ModelError> {
        if policy == Policy::Edf && preemption == Preemption::NonPreemptive {
            return Err(ModelError::NonPreemptiveEdf);
        }
        Ok(Self {
            policy,
            preemption,
            scope,
        })
    }

    pub const UNI_FP_P: Self = Self::of(Policy::Fp, Preemption::Preemptive, Scope::Uniprocessor);
    pub const UNI_FP_NP: Self = Self::of(Policy::Fp, Preemption::NonPreemptive, Scope::Uniprocessor);
    pub const UNI_EDF_P: Self = Self::of(Policy::Edf, Preemption::Preemptive, Scope::Uniprocessor);
    pub const GANG_FP_P: Self = Self::of(Policy::Fp, Preemption::Preemptive, Scope::Gang);
    pub const GANG_FP_NP: Self = Self::of(Policy::Fp, Preemption::NonPreemptive, Scope::Gang);
    pub const GANG_EDF_P: Self = Self::of(Policy::Edf, Preemption::Preemptive, Scope::Gang);

    const fn of(policy: Policy, preemption: Preemption, scope: Scope) -> Self {
        Self {
            policy,
            preemption,
            scope,
        }
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn preemption(&self) -> Preemption {
        self.preemption
    }

    pub fn scope(&self) -> Scope {
        self.scope
    }

    pub fn is_preemptive(&self) -> bool {
        self.preemption == Preemption::Preemptive
    }

    /// Same policy and preemption with a different scope.
    pub fn with_scope(self, scope: Scope) -> Self {
        Self { scope, ..self }
    }
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let scope = match self.scope {
            Scope::Uniprocessor => "uni",
            Scope::Gang => "gang",
        };
        let policy = match self.policy {
            Policy::Fp => "fp",
            Policy::Edf => "edf",
        };
        let preemption = match self.preemption {
            Preemption::Preemptive => "p",
            Preemption::NonPreemptive => "np",
        };
        write!(f, "{scope}-{policy}-{preemption}")
    }
}

impl FromStr for SchedulerKind {
    type Err = ModelError;

    /// Parses `uni-fp-p`, `gang-fp-np`, `uni-edf-p` and friends.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        let parts: Vec<&str> = lower.split('-').collect();
        let unknown = || ModelError::UnknownSchedulerKind(s.to_string());
        let [scope, policy, preemption] = parts[..] else {
            return Err(unknown());
        };
        let scope = match scope {
            "uni" => Scope::Uniprocessor,
            "gang" => Scope::Gang,
            _ => return Err(unknown()),
        };
        let policy = match policy {
            "fp" => Policy::Fp,
            "edf" => Policy::Edf,
            _ => return Err(unknown()),
        };
        let preemption = match preemption {
            "p" => Preemption::Preemptive,
            "np" => Preemption::NonPreemptive,
            _ => return Err(unknown()),
        };
        Self::new(policy, preemption, scope)
    }
}

/// A disjoint group of processors and the tasks statically bound to it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    pub id: usize,
    pub volume: u32,
    #[serde(skip)]
    pub created_volume: u32,
    pub members: Vec<TaskId>,
}

impl Partition {
    pub(crate) fn open(id: usize, first: &GangTask) -> Self {
        Self {
            id,
            volume: first.volume,
            created_volume: first.volume,
            members: vec![first.id],
        }
    }
}

/// The output of a successful partitioning run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionPlan {
    pub partitions: Vec<Partition>,
    /// Processors left outside every partition (`M'`).
    pub unassigned: u32,
    /// Scheduler of each partition, index-aligned with `partitions`.
    pub kinds: Vec<SchedulerKind>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanViolation {
    #[error("partition volumes plus unassigned processors ({0}) differ from the platform size ({1})")]
    ProcessorCount(u64, u32),
    #[error("task {0} appears in more than one partition")]
    DuplicateMember(TaskId),
    #[error("task {0} is not assigned to any partition")]
    MissingTask(TaskId),
    #[error("task {0} is not part of the task set")]
    UnknownTask(TaskId),
    #[error("task {task} has volume larger than partition {partition}")]
    VolumeExceedsPartition { task: TaskId, partition: usize },
    #[error("plan has {0} partitions but {1} scheduler kinds")]
    KindCount(usize, usize),
}

#[derive(Serialize, Deserialize)]
struct PlanPartitionDoc {
    volume: u32,
    members: Vec<TaskId>,
}

#[derive(Serialize, Deserialize)]
struct PlanDoc {
    partitions: Vec<PlanPartitionDoc>,
    unassigned: u32,
}

impl PartitionPlan {
    pub fn processors_used(&self) -> u64 {
        self.partitions.iter().map(|p| u64::from(p.volume)).sum()
    }

    pub fn partition_of(&self, task: TaskId) -> Option<&Partition> {
        self.partitions.iter().find(|p| p.members.contains(&task))
    }

    /// Checks processor accounting, disjointness and coverage.
    pub fn check(&self, taskset: &TaskSet, processors: u32) -> Result<(), PlanViolation> {
        let total = self.processors_used() + u64::from(self.unassigned);
        if total != u64::from(processors) {
            return Err(PlanViolation::ProcessorCount(total, processors));
        }
        if self.kinds.len() != self.partitions.len() {
            return Err(PlanViolation::KindCount(self.partitions.len(), self.kinds.len()));
        }
        let mut seen = BTreeSet::new();
        for p in &self.partitions {
            for &id in &p.members {
                let task = taskset.get(id).ok_or(PlanViolation::UnknownTask(id))?;
                if task.volume > p.volume {
                    return Err(PlanViolation::VolumeExceedsPartition {
                        task: id,
                        partition: p.id,
                    });
                }
                if !seen.insert(id) {
                    return Err(PlanViolation::DuplicateMember(id));
                }
            }
        }
        if let Some(t) = taskset.tasks().iter().find(|t| !seen.contains(&t.id)) {
            return Err(PlanViolation::MissingTask(t.id));
        }
        Ok(())
    }

    /// Serializes as `{"partitions": [{"volume", "members"}], "unassigned"}`.
    pub fn to_json(&self) -> String {
        let doc = PlanDoc {
            partitions: self
                .partitions
                .iter()
                .map(|p| PlanPartitionDoc {
                    volume: p.volume,
                    members: p.members.clone(),
                })
                .collect(),
            unassigned: self.unassigned,
        };
        serde_json::to_string_pretty(&doc).expect("plan serialization cannot fail")
    }
}

/// Priority order by deadline monotonic; ties go to the lower task id.
///
/// Returns indices into `tasks`, highest priority first.
pub fn dm_priority_order(tasks: &[GangTask]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..tasks.len()).collect();
    order.sort_by_key(|&i| (tasks[i].deadline, tasks[i].id));
    order
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hyperperiod {
    Finite(Time),
    Overflow,
}

impl Hyperperiod {
    pub fn finite(self) -> Option<Time> {
        match self {
            Hyperperiod::Finite(h) => Some(h),
            Hyperperiod::Overflow => None,
        }
    }
}

/// LCM of all periods, or `Overflow` once it passes `cap`.
pub fn hyperperiod(tasks: &[GangTask], cap: Time) -> Hyperperiod {
    let mut h: Time = 1;
    for t in tasks {
        let g = h.gcd(&t.period);
        match (h / g).checked_mul(t.period) {
            Some(next) if next <= cap => h = next,
            _ => return Hyperperiod::Overflow,
        }
    }
    Hyperperiod::Finite(h)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTask {
    id: TaskId,
    wcet: Time,
    period: Time,
    deadline: Time,
    volume: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskSetDoc {
    platform: Platform,
    tasks: Vec<RawTask>,
}

/// A task set together with the platform it targets, as stored on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskSetFile {
    pub platform: Platform,
    pub tasks: TaskSet,
}

impl TaskSetFile {
    pub fn new(platform: Platform, tasks: TaskSet) -> Self {
        Self { platform, tasks }
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let doc: TaskSetDoc =
            serde_json::from_str(text).map_err(|e| ModelError::Parse(e.to_string()))?;
        let platform = Platform::new(doc.platform.processors)?;
        let tasks = doc
            .tasks
            .into_iter()
            .map(|r| validate_task(r.id, r.wcet, r.period, r.deadline, r.volume))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            platform,
            tasks: TaskSet::new(tasks)?,
        })
    }

    pub fn to_json(&self) -> String {
        let doc = TaskSetDoc {
            platform: self.platform,
            tasks: self
                .tasks
                .tasks()
                .iter()
                .map(|t| RawTask {
                    id: t.id,
                    wcet: t.wcet,
                    period: t.period,
                    deadline: t.deadline,
                    volume: t.volume,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("task-set serialization cannot fail")
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path).map_err(|e| ModelError::Io(e.to_string()))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(params: &[(Time, Time, Time, u32)]) -> TaskSet {
        TaskSet::new(
            params
                .iter()
                .enumerate()
                .map(|(i, &(c, t, d, m))| GangTask::new(i as TaskId, c, t, d, m).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(validate_task(1, 2, 5, 5, 1).is_ok());
        assert!(validate_task(2, 3, 6, 6, 2).is_ok());
        assert!(matches!(
            validate_task(3, 4, 3, 3, 1),
            Err(ModelError::WcetExceedsDeadline { .. })
        ));
    }

    #[test]
    fn validate_rejects_zero_and_late_deadlines() {
        assert!(matches!(
            validate_task(0, 0, 5, 5, 1),
            Err(ModelError::NonPositiveField { field: "wcet", .. })
        ));
        assert!(matches!(
            validate_task(0, 1, 5, 5, 0),
            Err(ModelError::NonPositiveField { field: "volume", .. })
        ));
        assert!(matches!(
            validate_task(0, 1, 5, 6, 1),
            Err(ModelError::DeadlineExceedsPeriod { .. })
        ));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let t = GangTask::implicit(1, 1, 4, 1).unwrap();
        assert_eq!(TaskSet::new(vec![t, t]), Err(ModelError::DuplicateTaskId(1)));
    }

    #[test]
    fn utilizations() {
        let t = GangTask::implicit(0, 3, 6, 2).unwrap();
        assert_eq!(t.seq_util(), BigRational::new(1.into(), 2.into()));
        assert_eq!(t.util(), BigRational::from_integer(1.into()));
        let s = set(&[(2, 5, 5, 1), (3, 6, 6, 2), (2, 7, 7, 2)]);
        assert_eq!(s.max_volume(), 2);
        assert_eq!(s.min_volume(), 1);
        // 2/5 + 1 + 4/7
        assert_eq!(s.total_util(), BigRational::new(69.into(), 35.into()));
    }

    #[test]
    fn dm_examples() {
        let s = set(&[(1, 5, 5, 1), (1, 6, 6, 1), (1, 7, 7, 1)]);
        assert_eq!(dm_priority_order(s.tasks()), vec![0, 1, 2]);
        let s = set(&[(1, 7, 7, 1), (1, 5, 5, 1), (1, 6, 6, 1)]);
        assert_eq!(dm_priority_order(s.tasks()), vec![1, 2, 0]);
        let s = set(&[(1, 6, 6, 1), (1, 6, 6, 1)]);
        assert_eq!(dm_priority_order(s.tasks()), vec![0, 1]);
    }

    #[test]
    fn hyperperiod_examples() {
        let s = set(&[(1, 5, 5, 1), (1, 6, 6, 1), (1, 7, 7, 1)]);
        assert_eq!(hyperperiod(s.tasks(), DEFAULT_HORIZON_CAP), Hyperperiod::Finite(210));
        let s = set(&[(1, 4, 4, 1), (1, 4, 4, 1)]);
        assert_eq!(hyperperiod(s.tasks(), DEFAULT_HORIZON_CAP), Hyperperiod::Finite(4));
        let s = set(&[(1, 9_999_991, 9_999_991, 1), (1, 9_999_989, 9_999_989, 1)]);
        assert_eq!(hyperperiod(s.tasks(), DEFAULT_HORIZON_CAP), Hyperperiod::Overflow);
    }

    #[test]
    fn scheduler_kind_parsing() {
        assert_eq!("uni-fp-p".parse::<SchedulerKind>().unwrap(), SchedulerKind::UNI_FP_P);
        assert_eq!("GANG-FP-NP".parse::<SchedulerKind>().unwrap(), SchedulerKind::GANG_FP_NP);
        assert_eq!(
            "uni-edf-np".parse::<SchedulerKind>(),
            Err(ModelError::NonPreemptiveEdf)
        );
        assert!("edf".parse::<SchedulerKind>().is_err());
        for k in [SchedulerKind::UNI_EDF_P, SchedulerKind::GANG_FP_P] {
            assert_eq!(k.to_string().parse::<SchedulerKind>().unwrap(), k);
        }
    }

    #[test]
    fn task_set_file_round_trip_and_errors() {
        let text = r#"{"platform":{"processors":3},"tasks":[
            {"id":1,"wcet":2,"period":5,"deadline":5,"volume":1},
            {"id":2,"wcet":3,"period":6,"deadline":6,"volume":2}]}"#;
        let file = TaskSetFile::from_json(text).unwrap();
        assert_eq!(file.platform.processors, 3);
        assert_eq!(file.tasks.len(), 2);
        assert_eq!(TaskSetFile::from_json(&file.to_json()).unwrap(), file);

        assert!(matches!(TaskSetFile::from_json("garbage"), Err(ModelError::Parse(_))));
        let bad = r#"{"platform":{"processors":3},"tasks":[
            {"id":1,"wcet":6,"period":5,"deadline":5,"volume":1}]}"#;
        assert!(matches!(
            TaskSetFile::from_json(bad),
            Err(ModelError::WcetExceedsDeadline { .. })
        ));
    }

    #[test]
    fn plan_check_detects_violations() {
        let s = set(&[(1, 4, 4, 2), (1, 4, 4, 1)]);
        let plan = PartitionPlan {
            partitions: vec![Partition {
                id: 0,
                volume: 2,
                created_volume: 2,
                members: vec![0, 1],
            }],
            unassigned: 1,
            kinds: vec![SchedulerKind::UNI_FP_P],
        };
        assert_eq!(plan.check(&s, 3), Ok(()));
        assert!(matches!(plan.check(&s, 4), Err(PlanViolation::ProcessorCount(3, 4))));
        let mut missing = plan.clone();
        missing.partitions[0].members.pop();
        assert_eq!(missing.check(&s, 3), Err(PlanViolation::MissingTask(1)));
        let json: serde_json::Value = serde_json::from_str(&plan.to_json()).unwrap();
        assert_eq!(json["unassigned"], 1);
        assert_eq!(json["partitions"][0]["members"], serde_json::json!([0, 1]));
    }
}

//! First-fit decreasing-volume partitioning and its SP-U / SP-G / SP-B
//! variants.

use std::cmp::Reverse;
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use thiserror::Error;

use crate::bounds::{sp_b, BoundReport};
use crate::gang::{pairwise_sequential, resolve_gang_test, GangTestHandle, GangTestRegistry};
use crate::model::{
    dm_priority_order, GangTask, ModelError, Partition, PartitionPlan, Policy, Preemption,
    SchedulerKind, Scope, TaskId, TaskSet,
};
use crate::uniproc::{
    edf_demand_test, edf_utilization_test, rta_fp_nonpreemptive, rta_fp_preemptive, unit_bound,
    Reason, SchedVerdict,
};

/// Partitioning failed: `task` fit no partition and no processors could
/// host it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("task {task} cannot be placed ({unassigned} processors left)")]
pub struct Unplaceable {
    pub task: TaskId,
    pub unassigned: u32,
}

/// FFDV processing order: volume descending, then period ascending, then id.
pub fn ffdv_order(tasks: &[GangTask]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..tasks.len()).collect();
    order.sort_by_key(|&i| (Reverse(tasks[i].volume), tasks[i].period, tasks[i].id));
    order
}

struct Open {
    partition: Partition,
    tasks: Vec<GangTask>,
}

fn first_fit<F>(
    taskset: &TaskSet,
    processors: u32,
    kind: SchedulerKind,
    mut test: F,
    grow_last: bool,
) -> Result<PartitionPlan, Unplaceable>
where
    F: FnMut(&[GangTask], u32) -> bool,
{
    let tasks = taskset.tasks();
    let mut spare = processors;
    let mut open: Vec<Open> = Vec::new();

    'tasks: for i in ffdv_order(tasks) {
        let task = tasks[i];
        for p in open.iter_mut() {
            if task.volume > p.partition.volume {
                continue;
            }
            p.tasks.push(task);
            if test(&p.tasks, p.partition.volume) {
                p.partition.members.push(task.id);
                continue 'tasks;
            }
            p.tasks.pop();
        }
        if task.volume <= spare {
            let partition = Partition::open(open.len(), &task);
            open.push(Open {
                partition,
                tasks: vec![task],
            });
            spare -= task.volume;
            continue;
        }
        if grow_last && spare > 0 {
            if let Some(last) = open.last_mut() {
                let grown = last.partition.volume + spare;
                if task.volume <= grown {
                    last.tasks.push(task);
                    if test(&last.tasks, grown) {
                        last.partition.volume = grown;
                        last.partition.members.push(task.id);
                        spare = 0;
                        continue;
                    }
                    last.tasks.pop();
                }
            }
        }
        return Err(Unplaceable {
            task: task.id,
            unassigned: spare,
        });
    }

    let kinds = vec![kind; open.len()];
    Ok(PartitionPlan {
        partitions: open.into_iter().map(|o| o.partition).collect(),
        unassigned: spare,
        kinds,
    })
}

/// First-fit decreasing volume with an arbitrary per-partition test.
///
/// `test(tasks, volume)` decides whether `tasks` are schedulable on a
/// partition of `volume` processors.
pub fn ffdv<F>(
    taskset: &TaskSet,
    processors: u32,
    kind: SchedulerKind,
    test: F,
) -> Result<PartitionPlan, Unplaceable>
where
    F: FnMut(&[GangTask], u32) -> bool,
{
    first_fit(taskset, processors, kind, test, false)
}

/// Exact uniprocessor verdict for a serialized partition, priorities
/// recomputed by deadline monotonic for this subset.
pub fn uni_test(kind: SchedulerKind, tasks: &[GangTask]) -> SchedVerdict {
    uni_test_with_bound(kind, tasks, &unit_bound())
}

fn uni_test_with_bound(kind: SchedulerKind, tasks: &[GangTask], u_b: &BigRational) -> SchedVerdict {
    let result = match (kind.policy(), kind.preemption()) {
        (Policy::Fp, Preemption::Preemptive) => rta_fp_preemptive(tasks, &dm_priority_order(tasks)),
        (Policy::Fp, Preemption::NonPreemptive) => {
            rta_fp_nonpreemptive(tasks, &dm_priority_order(tasks))
        }
        (Policy::Edf, _) => {
            if tasks.iter().all(GangTask::is_implicit) {
                edf_utilization_test(tasks, u_b)
            } else {
                edf_demand_test(tasks)
            }
        }
    };
    result.unwrap_or_else(|_| SchedVerdict::reject(Reason::Inconclusive, None))
}

/// Per-partition test of SP-G: the exact uniprocessor test when no two
/// tasks can run side by side, the gang test otherwise.
pub fn sp_g_test(
    kind: SchedulerKind,
    gang_test: &GangTestHandle,
    tasks: &[GangTask],
    volume: u32,
) -> SchedVerdict {
    let volumes: Vec<u32> = tasks.iter().map(|t| t.volume).collect();
    if pairwise_sequential(&volumes, volume) {
        uni_test(kind, tasks)
    } else {
        gang_test.run(tasks, volume, &dm_priority_order(tasks))
    }
}

/// Strict partitioning with a uniprocessor scheduler in every partition.
pub fn sp_u(
    taskset: &TaskSet,
    processors: u32,
    kind: SchedulerKind,
) -> Result<PartitionPlan, Unplaceable> {
    let kind = kind.with_scope(Scope::Uniprocessor);
    ffdv(taskset, processors, kind, |tasks, _| uni_test(kind, tasks).schedulable)
}

/// Strict partitioning with a gang scheduler in every partition, adaptive
/// test selection and a single last-partition volume increase.
pub fn sp_g(
    taskset: &TaskSet,
    processors: u32,
    kind: SchedulerKind,
    gang_test: &GangTestHandle,
) -> Result<PartitionPlan, Unplaceable> {
    let kind = kind.with_scope(Scope::Gang);
    first_fit(
        taskset,
        processors,
        kind,
        |tasks, volume| sp_g_test(kind, gang_test, tasks, volume).schedulable,
        true,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    SpU,
    SpG,
    SpB,
}

impl Variant {
    fn label(self) -> &'static str {
        match self {
            Variant::SpU => "SP-U",
            Variant::SpG => "SP-G",
            Variant::SpB => "SP-B",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("unknown test name `{0}`; expected e.g. SP-U(FP-P), SP-G(FP-NP), SP-B(EDF-P)")]
    UnknownTest(String),
    #[error("SP-B is defined for preemptive EDF only")]
    BoundNeedsEdf,
    #[error("utilization bound must lie in (0, 1]")]
    BoundOutOfRange,
    #[error("unknown gang test `{0}`")]
    UnknownGangTest(String),
    #[error(transparent)]
    Kind(#[from] ModelError),
}

/// One partitioning strategy as used by the CLI and the experiment grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionerConfig {
    pub variant: Variant,
    pub kind: SchedulerKind,
    /// Named gang test for SP-G; `None` resolves by scheduler kind.
    pub gang_test: Option<String>,
    pub u_b: BigRational,
}

impl PartitionerConfig {
    pub fn new(variant: Variant, policy: Policy, preemption: Preemption) -> Result<Self, ConfigError> {
        let scope = match variant {
            Variant::SpG => Scope::Gang,
            _ => Scope::Uniprocessor,
        };
        let kind = SchedulerKind::new(policy, preemption, scope)?;
        if variant == Variant::SpB && kind != SchedulerKind::UNI_EDF_P {
            return Err(ConfigError::BoundNeedsEdf);
        }
        Ok(Self {
            variant,
            kind,
            gang_test: None,
            u_b: unit_bound(),
        })
    }

    pub fn with_gang_test(mut self, name: impl Into<String>) -> Self {
        self.gang_test = Some(name.into());
        self
    }

    pub fn with_bound(mut self, u_b: BigRational) -> Result<Self, ConfigError> {
        if u_b <= BigRational::from_integer(0.into()) || u_b > unit_bound() {
            return Err(ConfigError::BoundOutOfRange);
        }
        self.u_b = u_b;
        Ok(self)
    }

    /// Label such as `SP-G(FP-NP)`, used as the `test` column.
    pub fn name(&self) -> String {
        let policy = match self.kind.policy() {
            Policy::Fp => "FP",
            Policy::Edf => "EDF",
        };
        let preemption = match self.kind.preemption() {
            Preemption::Preemptive => "P",
            Preemption::NonPreemptive => "NP",
        };
        format!("{}({policy}-{preemption})", self.variant.label())
    }

    fn gang_handle(&self, registry: &GangTestRegistry) -> Result<GangTestHandle, ConfigError> {
        match &self.gang_test {
            Some(name) => registry
                .get(name)
                .ok_or_else(|| ConfigError::UnknownGangTest(name.clone())),
            None => Ok(resolve_gang_test(self.kind, registry)),
        }
    }

    /// Runs the strategy on one task set.
    pub fn run(
        &self,
        taskset: &TaskSet,
        processors: u32,
        registry: &GangTestRegistry,
    ) -> Result<PartitionOutcome, ConfigError> {
        let outcome = match self.variant {
            Variant::SpU => PartitionOutcome::from_plan(sp_u(taskset, processors, self.kind)),
            Variant::SpG => {
                let handle = self.gang_handle(registry)?;
                PartitionOutcome::from_plan(sp_g(taskset, processors, self.kind, &handle))
            }
            Variant::SpB => {
                let report = sp_b(taskset, processors, &self.u_b);
                PartitionOutcome {
                    accepted: report.accepted,
                    plan: None,
                    failure: None,
                    bounds: Some(report),
                }
            }
        };
        Ok(outcome)
    }

    /// Verdict of this strategy's per-partition test on one partition.
    pub fn partition_verdict(
        &self,
        tasks: &[GangTask],
        volume: u32,
        registry: &GangTestRegistry,
    ) -> Result<SchedVerdict, ConfigError> {
        Ok(match self.variant {
            Variant::SpG => sp_g_test(self.kind, &self.gang_handle(registry)?, tasks, volume),
            _ => uni_test_with_bound(self.kind, tasks, &self.u_b),
        })
    }
}

impl fmt::Display for PartitionerConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for PartitionerConfig {
    type Err = ConfigError;

    /// Parses `SP-U(FP-P)`, `sp-g(fp-np)`, `SP-B(EDF-P)`, ...
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || ConfigError::UnknownTest(s.to_string());
        let upper = s.trim().to_ascii_uppercase();
        let (variant, rest) = upper.split_once('(').ok_or_else(unknown)?;
        let inner = rest.strip_suffix(')').ok_or_else(unknown)?;
        let variant = match variant {
            "SP-U" => Variant::SpU,
            "SP-G" => Variant::SpG,
            "SP-B" => Variant::SpB,
            _ => return Err(unknown()),
        };
        let (policy, preemption) = inner.split_once('-').ok_or_else(unknown)?;
        let policy = match policy {
            "FP" => Policy::Fp,
            "EDF" => Policy::Edf,
            _ => return Err(unknown()),
        };
        let preemption = match preemption {
            "P" => Preemption::Preemptive,
            "NP" => Preemption::NonPreemptive,
            _ => return Err(unknown()),
        };
        Self::new(variant, policy, preemption)
    }
}

/// Result of running one strategy on one task set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionOutcome {
    pub accepted: bool,
    pub plan: Option<PartitionPlan>,
    pub failure: Option<Unplaceable>,
    pub bounds: Option<BoundReport>,
}

impl PartitionOutcome {
    fn from_plan(result: Result<PartitionPlan, Unplaceable>) -> Self {
        match result {
            Ok(plan) => Self {
                accepted: true,
                plan: Some(plan),
                failure: None,
                bounds: None,
            },
            Err(f) => Self {
                accepted: false,
                plan: None,
                failure: Some(f),
                bounds: None,
            },
        }
    }
}

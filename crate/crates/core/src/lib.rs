//! Schedulability analysis for sporadic rigid gang tasks under strict
//! partitioning.
//!
//! Processors are split into disjoint partitions by a first-fit
//! decreasing-volume heuristic; each partition runs either a uniprocessor
//! scheduler (one job at a time) or a gang scheduler. The crate provides
//! the partitioners, the per-partition tests, closed-form utilization
//! bounds, a discrete-time simulator used as an oracle, a synthetic
//! workload generator and an experiment harness.

pub mod bounds;
pub mod experiment;
pub mod gang;
pub mod generate;
pub mod model;
pub mod partition;
pub mod sim;
pub mod uniproc;

pub use model::{
    dm_priority_order, hyperperiod, validate_task, GangTask, Hyperperiod, ModelError, Partition,
    PartitionPlan, Platform, Policy, Preemption, SchedulerKind, Scope, TaskId, TaskSet,
    TaskSetFile, Time,
};
pub use partition::{ffdv, sp_g, sp_u, PartitionOutcome, PartitionerConfig, Unplaceable, Variant};
pub use uniproc::{Reason, SchedVerdict};

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gangsched::model::{hyperperiod, GangTask, PartitionPlan, Preemption, SchedulerKind, TaskSet, Time};
use gangsched::sim::{simulate, ReleasePattern, SimTarget, SimTrace};

pub fn set(tasks: &[(u32, Time, Time, Time, u32)]) -> TaskSet {
    TaskSet::new(
        tasks
            .iter()
            .map(|&(id, c, t, d, m)| GangTask::new(id, c, t, d, m).unwrap())
            .collect(),
    )
    .unwrap()
}

pub fn two_partition_set() -> TaskSet {
    set(&[(1, 2, 5, 5, 1), (2, 3, 6, 6, 2), (3, 2, 7, 7, 2)])
}

pub fn unplaceable_set() -> TaskSet {
    set(&[(1, 1, 3, 3, 1), (2, 1, 4, 4, 2), (3, 3, 5, 5, 1)])
}

pub fn volume_growth_set() -> TaskSet {
    set(&[(1, 2, 10, 10, 3), (2, 2, 10, 10, 2), (3, 7, 10, 10, 2)])
}

/// Global non-preemptive gang workload on 3 processors. All deadlines are equal, so
/// priorities follow ids. Task 5 exists but is never released.
pub fn blocking_chain() -> (TaskSet, Vec<(u32, Time)>) {
    let ts = set(&[
        (1, 2, 20, 20, 2),
        (2, 3, 20, 20, 1),
        (3, 2, 20, 20, 1),
        (4, 4, 20, 20, 1),
        (5, 1, 20, 20, 1),
        (6, 2, 20, 20, 1),
        (7, 3, 20, 20, 1),
    ]);
    (ts, vec![(2, 0), (3, 0), (4, 0), (1, 1), (7, 2), (6, 3)])
}

/// Small random task set: `n ≤ max_n`, `T ≤ max_t`, volumes up to
/// `processors`, constrained deadlines allowed when `constrained`.
pub fn random_small_set(rng: &mut ChaCha8Rng, processors: u32, max_n: usize, max_t: Time, constrained: bool) -> TaskSet {
    let n = rng.gen_range(1..=max_n);
    let tasks = (0..n)
        .map(|i| {
            let period = rng.gen_range(2..=max_t);
            // skew toward light tasks so that a fair share of sets is accepted
            let heavy = rng.gen_range(1..=4);
            let wcet = rng.gen_range(1..=(period / heavy).max(1));
            let deadline = if constrained && rng.gen_bool(0.5) {
                rng.gen_range(wcet..=period)
            } else {
                period
            };
            let volume = rng.gen_range(1..=processors);
            GangTask::new(i as u32, wcet, period, deadline, volume).unwrap()
        })
        .collect();
    TaskSet::new(tasks).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn bounded_horizon(taskset: &TaskSet, cap: Time) -> Time {
    hyperperiod(taskset.tasks(), cap).finite().unwrap_or(cap).min(cap)
        + taskset.tasks().iter().map(|t| t.deadline).max().unwrap_or(0)
}

/// Simulates a plan synchronously and, for non-preemptive kinds, once more
/// per possible blocker: in each partition in turn, one task at tick 0 and
/// the rest at tick 1. Returns the first trace with a miss, if any.
pub fn resimulate(plan: &PartitionPlan, taskset: &TaskSet, kind: SchedulerKind, horizon: Time) -> Option<SimTrace> {
    let run = |pattern: ReleasePattern| {
        let trace = simulate(SimTarget::Plan(plan), taskset, kind, &pattern).unwrap();
        (!trace.is_schedulable()).then_some(trace)
    };
    if let Some(t) = run(ReleasePattern::synchronous(horizon)) {
        return Some(t);
    }
    if kind.preemption() == Preemption::NonPreemptive {
        for (pi, p) in plan.partitions.iter().enumerate() {
            for &blocker in &p.members {
                let offsets = plan.partitions.iter().enumerate().flat_map(|(qi, q)| {
                    q.members.iter().map(move |&id| {
                        let offset = if qi == pi && id != blocker { 1 } else { 0 };
                        (id, offset)
                    })
                });
                if let Some(t) = run(ReleasePattern::explicit(offsets, horizon + 1)) {
                    return Some(t);
                }
            }
        }
    }
    None
}

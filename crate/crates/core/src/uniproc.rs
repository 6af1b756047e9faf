//! Exact tests for a partition run as one serialized resource.
//!
//! A partition scheduled by a uniprocessor scheduler executes one job at a
//! time, whatever that job's volume, so only `(C, T, D)` matter here.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::model::{GangTask, TaskId, Time, DEFAULT_HORIZON_CAP};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("task set is empty")]
    EmptyTaskSet,
    #[error("busy period of task {0} exceeds the analysis cap")]
    BusyPeriodOverflow(TaskId),
    #[error("task {0} has a constrained deadline; use the demand test")]
    ConstrainedDeadlinePresent(TaskId),
    #[error("demand-test horizon exceeds the analysis cap")]
    HorizonOverflow,
    #[error("the baseline gang test does not cover non-preemptive scheduling")]
    NonPreemptiveUnsupported,
    #[error("priority order is not a permutation of the task indices")]
    InvalidPriorityOrder,
    #[error("task {task} needs {volume} processors but the partition has {partition}")]
    VolumeExceedsPartition {
        task: TaskId,
        volume: u32,
        partition: u32,
    },
}

/// Why a verdict came out the way it did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reason {
    Schedulable,
    DeadlineMiss(TaskId),
    Overload,
    UtilizationBound,
    DemandExceeded { at: Time },
    NoSoundTest,
    /// The analysis hit a horizon or busy-period cap.
    Inconclusive,
}

impl Reason {
    pub fn code(&self) -> &'static str {
        match self {
            Reason::Schedulable => "ok",
            Reason::DeadlineMiss(_) => "deadline-miss",
            Reason::Overload => "overload",
            Reason::UtilizationBound => "utilization-bound",
            Reason::DemandExceeded { .. } => "demand-exceeded",
            Reason::NoSoundTest => "no-sound-test",
            Reason::Inconclusive => "inconclusive",
        }
    }
}

/// Outcome of a schedulability test.
///
/// `responses` carries worst-case response times for tests that compute
/// them; on a negative verdict it holds whatever was established before
/// the test gave up.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchedVerdict {
    pub schedulable: bool,
    pub responses: Option<BTreeMap<TaskId, Time>>,
    pub reason: Reason,
}

impl SchedVerdict {
    pub fn accept(responses: Option<BTreeMap<TaskId, Time>>) -> Self {
        Self {
            schedulable: true,
            responses,
            reason: Reason::Schedulable,
        }
    }

    pub fn reject(reason: Reason, responses: Option<BTreeMap<TaskId, Time>>) -> Self {
        Self {
            schedulable: false,
            responses,
            reason,
        }
    }

    pub fn response(&self, id: TaskId) -> Option<Time> {
        self.responses.as_ref().and_then(|r| r.get(&id).copied())
    }
}

pub(crate) fn check_order(len: usize, order: &[usize]) -> Result<(), AnalysisError> {
    let mut seen = vec![false; len];
    if order.len() != len {
        return Err(AnalysisError::InvalidPriorityOrder);
    }
    for &i in order {
        if i >= len || std::mem::replace(&mut seen[i], true) {
            return Err(AnalysisError::InvalidPriorityOrder);
        }
    }
    Ok(())
}

fn ceil_div(a: Time, b: Time) -> Time {
    a.div_ceil(b)
}

fn seq_util_sum<'a>(tasks: impl IntoIterator<Item = &'a GangTask>) -> BigRational {
    tasks
        .into_iter()
        .fold(BigRational::zero(), |acc, t| acc + t.seq_util())
}

/// Compares `Σ C/T` with `bound`, exactly. A float estimate settles
/// clear cases; only near-ties fall back to rational arithmetic.
fn cmp_seq_util<'a>(tasks: impl IntoIterator<Item = &'a GangTask> + Clone, bound: &BigRational) -> Ordering {
    let approx: f64 = tasks.clone().into_iter().map(GangTask::seq_util_f64).sum();
    let b = crate::bounds::to_f64(bound);
    let slack = 1e-9 * b.abs().max(1.0);
    if approx < b - slack {
        Ordering::Less
    } else if approx > b + slack {
        Ordering::Greater
    } else {
        seq_util_sum(tasks).cmp(bound)
    }
}

/// Least fixed point of `R = C + Σ_hp ⌈R/T_j⌉ C_j`, or `None` once the
/// iterate passes `limit`.
pub fn fp_preemptive_response(task: &GangTask, hp: &[GangTask], limit: Time) -> Option<Time> {
    let mut r = task.wcet;
    loop {
        if r > limit {
            return None;
        }
        let next = task.wcet
            + hp
                .iter()
                .map(|j| ceil_div(r, j.period) * j.wcet)
                .sum::<Time>();
        if next == r {
            return Some(r);
        }
        r = next;
    }
}

/// Exact response-time analysis for preemptive fixed priorities.
///
/// `order` lists indices into `tasks`, highest priority first.
pub fn rta_fp_preemptive(tasks: &[GangTask], order: &[usize]) -> Result<SchedVerdict, AnalysisError> {
    if tasks.is_empty() {
        return Err(AnalysisError::EmptyTaskSet);
    }
    check_order(tasks.len(), order)?;
    let mut responses = BTreeMap::new();
    let mut hp = Vec::with_capacity(tasks.len());
    for &i in order {
        let task = &tasks[i];
        match fp_preemptive_response(task, &hp, task.deadline) {
            Some(r) => {
                responses.insert(task.id, r);
            }
            None => {
                return Ok(SchedVerdict::reject(
                    Reason::DeadlineMiss(task.id),
                    Some(responses),
                ))
            }
        }
        hp.push(*task);
    }
    Ok(SchedVerdict::accept(Some(responses)))
}

/// Result of the non-preemptive analysis for one task.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NpResponse {
    /// Worst-case response time, within the deadline.
    Bounded(Time),
    /// A job response past the deadline was found; carries it when the
    /// recurrence converged before the deadline check.
    Miss(Option<Time>),
    /// Higher-or-equal priority load saturates the processor while a
    /// lower-priority job can still block.
    Overload,
}

/// Non-preemptive fixed-priority response time of `order[pos]`.
///
/// Discrete-time blocking is `max_lp (C_k − 1)`: a lower-priority job can
/// start at the latest one tick before the critical instant.
pub fn fp_nonpreemptive_response(
    tasks: &[GangTask],
    order: &[usize],
    pos: usize,
    cap: Time,
) -> Result<NpResponse, AnalysisError> {
    let task = &tasks[order[pos]];
    let hp: Vec<&GangTask> = order[..pos].iter().map(|&j| &tasks[j]).collect();
    let blocking = order[pos + 1..]
        .iter()
        .map(|&k| tasks[k].wcet - 1)
        .max()
        .unwrap_or(0);

    let job_response = |q: Time| -> Option<Time> {
        // w + C − qT ≤ D  ⇔  w ≤ D − C + qT
        let limit = task.deadline - task.wcet + q * task.period;
        let mut w = blocking + q * task.wcet + hp.iter().map(|j| j.wcet).sum::<Time>();
        loop {
            let next = blocking
                + q * task.wcet
                + hp.iter()
                    .map(|j| (w / j.period + 1) * j.wcet)
                    .sum::<Time>();
            if next == w {
                return Some(w + task.wcet - q * task.period);
            }
            if next > limit {
                return None;
            }
            w = next;
        }
    };

    let first = match job_response(0) {
        Some(r) if r <= task.deadline => r,
        observed => return Ok(NpResponse::Miss(observed)),
    };

    let hep_util = cmp_seq_util(hp.iter().copied().chain(std::iter::once(task)), &BigRational::one());
    if hep_util == Ordering::Greater || (hep_util == Ordering::Equal && blocking > 0) {
        return Ok(NpResponse::Overload);
    }

    // Level-i busy period.
    let mut busy = blocking + task.wcet;
    loop {
        if busy > cap {
            return Err(AnalysisError::BusyPeriodOverflow(task.id));
        }
        let next = blocking
            + ceil_div(busy, task.period) * task.wcet
            + hp.iter()
                .map(|j| ceil_div(busy, j.period) * j.wcet)
                .sum::<Time>();
        if next == busy {
            break;
        }
        busy = next;
    }

    let jobs = ceil_div(busy, task.period);
    let mut worst = first;
    for q in 1..jobs {
        match job_response(q) {
            Some(r) if r <= task.deadline => worst = worst.max(r),
            observed => return Ok(NpResponse::Miss(observed)),
        }
    }
    Ok(NpResponse::Bounded(worst))
}

/// Response-time analysis for non-preemptive fixed priorities with
/// multi-job busy periods.
pub fn rta_fp_nonpreemptive(
    tasks: &[GangTask],
    order: &[usize],
) -> Result<SchedVerdict, AnalysisError> {
    rta_fp_nonpreemptive_capped(tasks, order, DEFAULT_HORIZON_CAP)
}

pub fn rta_fp_nonpreemptive_capped(
    tasks: &[GangTask],
    order: &[usize],
    cap: Time,
) -> Result<SchedVerdict, AnalysisError> {
    if tasks.is_empty() {
        return Err(AnalysisError::EmptyTaskSet);
    }
    check_order(tasks.len(), order)?;
    let mut responses = BTreeMap::new();
    for pos in 0..order.len() {
        let id = tasks[order[pos]].id;
        match fp_nonpreemptive_response(tasks, order, pos, cap)? {
            NpResponse::Bounded(r) => {
                responses.insert(id, r);
            }
            NpResponse::Miss(observed) => {
                if let Some(r) = observed {
                    responses.insert(id, r);
                }
                return Ok(SchedVerdict::reject(Reason::DeadlineMiss(id), Some(responses)));
            }
            NpResponse::Overload => {
                return Ok(SchedVerdict::reject(Reason::Overload, Some(responses)));
            }
        }
    }
    Ok(SchedVerdict::accept(Some(responses)))
}

/// Utilization-bound test for preemptive EDF: `Σ C_i/T_i ≤ u_b`.
///
/// Exact for implicit deadlines with `u_b = 1`.
pub fn edf_utilization_test(
    tasks: &[GangTask],
    u_b: &BigRational,
) -> Result<SchedVerdict, AnalysisError> {
    if let Some(t) = tasks.iter().find(|t| !t.is_implicit()) {
        return Err(AnalysisError::ConstrainedDeadlinePresent(t.id));
    }
    if cmp_seq_util(tasks, u_b) != Ordering::Greater {
        Ok(SchedVerdict::accept(None))
    } else {
        Ok(SchedVerdict::reject(Reason::UtilizationBound, None))
    }
}

/// Demand bound of `tasks` over any window of length `t`.
pub fn demand_bound(tasks: &[GangTask], t: Time) -> Time {
    tasks
        .iter()
        .filter(|task| t >= task.deadline)
        .map(|task| ((t - task.deadline) / task.period + 1) * task.wcet)
        .sum()
}

/// Processor-demand test for preemptive EDF with constrained deadlines.
///
/// Checks `dbf(t) ≤ t` at every absolute deadline inside the synchronous
/// busy period.
pub fn edf_demand_test(tasks: &[GangTask]) -> Result<SchedVerdict, AnalysisError> {
    edf_demand_test_capped(tasks, DEFAULT_HORIZON_CAP)
}

pub fn edf_demand_test_capped(tasks: &[GangTask], cap: Time) -> Result<SchedVerdict, AnalysisError> {
    if tasks.is_empty() {
        return Ok(SchedVerdict::accept(None));
    }
    if cmp_seq_util(tasks, &BigRational::one()) == Ordering::Greater {
        return Ok(SchedVerdict::reject(Reason::Overload, None));
    }
    let mut busy: Time = tasks.iter().map(|t| t.wcet).sum();
    loop {
        if busy > cap {
            return Err(AnalysisError::HorizonOverflow);
        }
        let next = tasks
            .iter()
            .map(|t| ceil_div(busy, t.period) * t.wcet)
            .sum::<Time>();
        if next == busy {
            break;
        }
        busy = next;
    }
    let mut checkpoints: Vec<Time> = tasks
        .iter()
        .flat_map(|t| {
            (0..)
                .map(move |k| t.deadline + k * t.period)
                .take_while(move |&d| d <= busy)
        })
        .collect();
    checkpoints.sort_unstable();
    checkpoints.dedup();
    for t in checkpoints {
        if demand_bound(tasks, t) > t {
            return Ok(SchedVerdict::reject(Reason::DemandExceeded { at: t }, None));
        }
    }
    Ok(SchedVerdict::accept(None))
}

/// `u_b = 1`, the exact bound for preemptive EDF.
pub fn unit_bound() -> BigRational {
    BigRational::from_integer(BigInt::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::dm_priority_order;

    fn tasks(params: &[(Time, Time, Time)]) -> Vec<GangTask> {
        params
            .iter()
            .enumerate()
            .map(|(i, &(c, t, d))| GangTask::new(i as TaskId, c, t, d, 1).unwrap())
            .collect()
    }

    fn dm(ts: &[GangTask]) -> Vec<usize> {
        dm_priority_order(ts)
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn fp_preemptive_examples() {
        let ts = tasks(&[(3, 6, 6), (2, 7, 7)]);
        let v = rta_fp_preemptive(&ts, &dm(&ts)).unwrap();
        assert!(v.schedulable);
        assert_eq!(v.response(0), Some(3));
        assert_eq!(v.response(1), Some(5));

        let ts = tasks(&[(2, 5, 5), (3, 6, 6), (2, 7, 7)]);
        let v = rta_fp_preemptive(&ts, &dm(&ts)).unwrap();
        assert!(!v.schedulable);
        assert_eq!(v.reason, Reason::DeadlineMiss(2));
        assert_eq!(v.response(1), Some(5));

        let ts = tasks(&[(4, 9, 9)]);
        let v = rta_fp_preemptive(&ts, &dm(&ts)).unwrap();
        assert_eq!(v.response(0), Some(4));
    }

    #[test]
    fn fp_preemptive_errors() {
        assert_eq!(rta_fp_preemptive(&[], &[]), Err(AnalysisError::EmptyTaskSet));
        let ts = tasks(&[(1, 4, 4), (1, 4, 4)]);
        assert_eq!(
            rta_fp_preemptive(&ts, &[0, 0]),
            Err(AnalysisError::InvalidPriorityOrder)
        );
    }

    #[test]
    fn fp_nonpreemptive_examples() {
        let ts = tasks(&[(1, 4, 4), (2, 6, 6), (2, 8, 8)]);
        let v = rta_fp_nonpreemptive(&ts, &dm(&ts)).unwrap();
        assert!(v.schedulable);
        assert_eq!(
            v.responses.unwrap().into_values().collect::<Vec<_>>(),
            vec![2, 4, 5]
        );

        let ts = tasks(&[(5, 10, 10)]);
        let v = rta_fp_nonpreemptive(&ts, &dm(&ts)).unwrap();
        assert_eq!(v.response(0), Some(5));

        let ts = tasks(&[(2, 10, 10), (9, 10, 10)]);
        let v = rta_fp_nonpreemptive(&ts, &dm(&ts)).unwrap();
        assert!(!v.schedulable);
        assert_eq!(v.reason, Reason::DeadlineMiss(1));
        assert_eq!(v.response(1), Some(11));
        // the higher-priority task is blocked for 8 ticks, finishing at 10
        assert_eq!(v.response(0), Some(10));
    }

    #[test]
    fn fp_nonpreemptive_single_job_busy_periods() {
        // w(0) = 2, R = 5; L = 5 ⇒ one job
        let ts = tasks(&[(2, 5, 5), (3, 7, 7)]);
        let order = dm(&ts);
        let r = fp_nonpreemptive_response(&ts, &order, 1, DEFAULT_HORIZON_CAP).unwrap();
        assert_eq!(r, NpResponse::Bounded(5));
        let ts = tasks(&[(3, 7, 7), (3, 8, 8)]);
        let r = fp_nonpreemptive_response(&ts, &dm(&ts), 1, DEFAULT_HORIZON_CAP).unwrap();
        // w(0) = 3, R(0) = 6; L = 6 ⇒ one job
        assert_eq!(r, NpResponse::Bounded(6));
    }

    #[test]
    fn fp_nonpreemptive_overload_and_cap() {
        let ts = tasks(&[(1, 2, 2), (1, 2, 2), (1, 3, 3)]);
        let v = rta_fp_nonpreemptive(&ts, &dm(&ts)).unwrap();
        assert!(!v.schedulable);
        let ts = tasks(&[(1, 1_000, 1_000), (999, 1_000, 1_000)]);
        assert!(matches!(
            rta_fp_nonpreemptive_capped(&ts, &dm(&ts), 100),
            Err(AnalysisError::BusyPeriodOverflow(_))
        ));
    }

    #[test]
    fn edf_utilization_examples() {
        let ts = tasks(&[(5, 10, 10), (3, 10, 10), (2, 10, 10)]);
        assert!(edf_utilization_test(&ts, &unit_bound()).unwrap().schedulable);
        let ts = tasks(&[(6, 10, 10), (5, 10, 10)]);
        let v = edf_utilization_test(&ts, &unit_bound()).unwrap();
        assert!(!v.schedulable);
        assert_eq!(v.reason.code(), "utilization-bound");
        let ts = tasks(&[(2, 10, 10)]);
        assert!(edf_utilization_test(&ts, &unit_bound()).unwrap().schedulable);
        assert!(!edf_utilization_test(&ts, &rat(1, 10)).unwrap().schedulable);
        let ts = tasks(&[(1, 4, 3)]);
        assert_eq!(
            edf_utilization_test(&ts, &unit_bound()),
            Err(AnalysisError::ConstrainedDeadlinePresent(0))
        );
    }

    #[test]
    fn edf_demand_examples() {
        let ts = tasks(&[(1, 4, 3), (2, 6, 6)]);
        assert_eq!(demand_bound(&ts, 3), 1);
        assert_eq!(demand_bound(&ts, 6), 3);
        assert_eq!(demand_bound(&ts, 7), 4);
        assert!(edf_demand_test(&ts).unwrap().schedulable);

        let ts = tasks(&[(3, 4, 3)]);
        assert_eq!(demand_bound(&ts, 3), 3);
        assert!(edf_demand_test(&ts).unwrap().schedulable);

        let ts = tasks(&[(2, 3, 2), (2, 3, 3)]);
        assert_eq!(demand_bound(&ts, 2), 2);
        assert_eq!(demand_bound(&ts, 3), 4);
        assert!(!edf_demand_test(&ts).unwrap().schedulable);
    }

    #[test]
    fn edf_demand_catches_constrained_miss_under_unit_load() {
        // Σu = 3/4 but both deadlines land at 2 with 3 units of demand.
        let ts = tasks(&[(1, 4, 2), (2, 4, 2)]);
        let v = edf_demand_test(&ts).unwrap();
        assert_eq!(v.reason, Reason::DemandExceeded { at: 2 });
    }
}

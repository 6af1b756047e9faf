//! Intra-partition gang schedulability: the serialization condition, the
//! pluggable global-gang test registry, and a conservative in-house
//! response-time test for preemptive gang FP.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::model::{GangTask, Policy, Preemption, SchedulerKind, Scope};
use crate::uniproc::{check_order, AnalysisError, Reason, SchedVerdict};

/// True iff no two tasks of `volumes` fit side by side in `partition_volume`
/// processors, i.e. every distinct pair sums to more than the partition.
///
/// Only the two smallest volumes matter.
pub fn pairwise_sequential(volumes: &[u32], partition_volume: u32) -> bool {
    let mut smallest = [u32::MAX; 2];
    for &v in volumes {
        if v < smallest[0] {
            smallest = [v, smallest[0]];
        } else if v < smallest[1] {
            smallest[1] = v;
        }
    }
    if volumes.len() < 2 {
        return true;
    }
    u64::from(smallest[0]) + u64::from(smallest[1]) > u64::from(partition_volume)
}

/// Sufficient response-time test for preemptive gang FP inside a partition
/// of `partition_volume` processors.
///
/// A task `k` whose higher-priority tasks all fit next to it never waits,
/// so `R_k = C_k`. Otherwise `k` is blocked only while at least
/// `max(M_p − m_k + 1, min_hp m_j)` processors run higher-priority work,
/// which bounds the blocked time by the higher-priority processor demand
/// divided by that count:
///
/// `R = C_k + ⌊Σ_hp m_j ⌈R/T_j⌉ C_j / max(M_p − m_k + 1, min_hp m_j)⌋`.
///
/// The demand term counts `⌈R/T_j⌉` jobs per task, which assumes every
/// higher-priority job is released inside the window (synchronous release).
pub fn baseline_gang_rta_fp(
    tasks: &[GangTask],
    partition_volume: u32,
    order: &[usize],
    preemption: Preemption,
) -> Result<SchedVerdict, AnalysisError> {
    if preemption == Preemption::NonPreemptive {
        return Err(AnalysisError::NonPreemptiveUnsupported);
    }
    if tasks.is_empty() {
        return Err(AnalysisError::EmptyTaskSet);
    }
    check_order(tasks.len(), order)?;
    if let Some(t) = tasks.iter().find(|t| t.volume > partition_volume) {
        return Err(AnalysisError::VolumeExceedsPartition {
            task: t.id,
            volume: t.volume,
            partition: partition_volume,
        });
    }

    let mut responses = BTreeMap::new();
    for (pos, &k) in order.iter().enumerate() {
        let task = &tasks[k];
        let hp: Vec<&GangTask> = order[..pos].iter().map(|&j| &tasks[j]).collect();
        let hp_volume: u64 = hp.iter().map(|j| u64::from(j.volume)).sum();
        let free_beside = u64::from(partition_volume - task.volume);

        let response = if hp_volume <= free_beside {
            Some(task.wcet)
        } else {
            let min_hp = hp.iter().map(|j| u64::from(j.volume)).min().unwrap_or(1);
            let divisor = (free_beside + 1).max(min_hp);
            let mut r = task.wcet;
            loop {
                let demand: u64 = hp
                    .iter()
                    .map(|j| u64::from(j.volume) * r.div_ceil(j.period) * j.wcet)
                    .sum();
                let next = task.wcet + demand / divisor;
                if next == r {
                    break Some(r);
                }
                if next > task.deadline {
                    break None;
                }
                r = next;
            }
        };
        match response {
            Some(r) if r <= task.deadline => {
                responses.insert(task.id, r);
            }
            _ => {
                return Ok(SchedVerdict::reject(
                    Reason::DeadlineMiss(task.id),
                    Some(responses),
                ))
            }
        }
    }
    Ok(SchedVerdict::accept(Some(responses)))
}

/// Signature of a gang test: `(tasks, partition volume, priority order)`.
pub type GangTestFn = dyn Fn(&[GangTask], u32, &[usize]) -> SchedVerdict + Send + Sync;

/// A named global-gang schedulability test.
///
/// Registered tests must be sound: an accepted task set never misses a
/// deadline under the matching gang scheduler.
#[derive(Clone)]
pub struct GangTestHandle {
    name: String,
    kinds: Vec<SchedulerKind>,
    test: Arc<GangTestFn>,
}

pub const BASELINE_GANG_TEST: &str = "baseline-gang-fp";
pub const REJECT_GANG_TEST: &str = "reject";

impl GangTestHandle {
    pub fn new<F>(name: impl Into<String>, kinds: Vec<SchedulerKind>, test: F) -> Self
    where
        F: Fn(&[GangTask], u32, &[usize]) -> SchedVerdict + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            kinds,
            test: Arc::new(test),
        }
    }

    /// The in-house preemptive gang FP test.
    pub fn baseline() -> Self {
        Self::new(BASELINE_GANG_TEST, vec![SchedulerKind::GANG_FP_P], |tasks, volume, order| {
            baseline_gang_rta_fp(tasks, volume, order, Preemption::Preemptive)
                .unwrap_or_else(|_| SchedVerdict::reject(Reason::NoSoundTest, None))
        })
    }

    /// Refuses everything; stands in where no sound test exists.
    pub fn reject() -> Self {
        Self::new(
            REJECT_GANG_TEST,
            vec![
                SchedulerKind::GANG_FP_P,
                SchedulerKind::GANG_FP_NP,
                SchedulerKind::GANG_EDF_P,
            ],
            |_, _, _| SchedVerdict::reject(Reason::NoSoundTest, None),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn applicable_kinds(&self) -> &[SchedulerKind] {
        &self.kinds
    }

    pub fn applies_to(&self, kind: SchedulerKind) -> bool {
        self.kinds.contains(&kind.with_scope(Scope::Gang))
    }

    pub fn run(&self, tasks: &[GangTask], partition_volume: u32, order: &[usize]) -> SchedVerdict {
        (self.test)(tasks, partition_volume, order)
    }
}

impl fmt::Debug for GangTestHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GangTestHandle")
            .field("name", &self.name)
            .field("kinds", &self.kinds)
            .finish_non_exhaustive()
    }
}

/// External gang tests, registered at startup.
#[derive(Debug, Clone, Default)]
pub struct GangTestRegistry {
    handles: Vec<GangTestHandle>,
}

impl GangTestRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, handle: GangTestHandle) -> &mut Self {
        self.handles.push(handle);
        self
    }

    /// Looks a test up by name, including the two built-in ones.
    pub fn get(&self, name: &str) -> Option<GangTestHandle> {
        self.handles
            .iter()
            .find(|h| h.name == name)
            .cloned()
            .or_else(|| match name {
                BASELINE_GANG_TEST => Some(GangTestHandle::baseline()),
                REJECT_GANG_TEST => Some(GangTestHandle::reject()),
                _ => None,
            })
    }

    pub fn is_empty(&self) -> bool {
        self.handles.is_empty()
    }
}

/// Picks the gang test for `kind`: the first registered test that applies,
/// else the baseline for preemptive FP, else the reject handle.
pub fn resolve_gang_test(kind: SchedulerKind, registry: &GangTestRegistry) -> GangTestHandle {
    if let Some(h) = registry.handles.iter().find(|h| h.applies_to(kind)) {
        return h.clone();
    }
    match (kind.policy(), kind.preemption()) {
        (Policy::Fp, Preemption::Preemptive) => GangTestHandle::baseline(),
        _ => GangTestHandle::reject(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{dm_priority_order, TaskId, Time};
    use crate::uniproc::rta_fp_preemptive;
    use proptest::prelude::*;

    fn gang(params: &[(Time, Time, Time, u32)]) -> Vec<GangTask> {
        params
            .iter()
            .enumerate()
            .map(|(i, &(c, t, d, m))| GangTask::new(i as TaskId, c, t, d, m).unwrap())
            .collect()
    }

    #[test]
    fn pairwise_examples() {
        assert!(pairwise_sequential(&[2, 2], 3));
        assert!(!pairwise_sequential(&[2, 2], 4));
        assert!(pairwise_sequential(&[3], 3));
        assert!(pairwise_sequential(&[], 3));
        assert!(!pairwise_sequential(&[3, 1, 2], 3));
        assert!(pairwise_sequential(&[3, 3, 2], 4));
    }

    #[test]
    fn baseline_worked_example() {
        let ts = gang(&[(2, 10, 10, 3), (2, 10, 10, 2), (7, 10, 10, 2)]);
        let v = baseline_gang_rta_fp(&ts, 4, &[0, 1, 2], Preemption::Preemptive).unwrap();
        assert!(v.schedulable);
        assert_eq!(
            v.responses.unwrap().into_values().collect::<Vec<_>>(),
            vec![2, 4, 10]
        );
    }

    #[test]
    fn baseline_shortcut_and_lone_task() {
        // hp volume 2 ≤ 4 − 2: runs side by side, R = C
        let ts = gang(&[(3, 10, 10, 2), (5, 10, 10, 2)]);
        let v = baseline_gang_rta_fp(&ts, 4, &[0, 1], Preemption::Preemptive).unwrap();
        assert_eq!(v.response(1), Some(5));

        let ts = gang(&[(5, 9, 9, 3)]);
        let v = baseline_gang_rta_fp(&ts, 3, &[0], Preemption::Preemptive).unwrap();
        assert_eq!(v.response(0), Some(5));
    }

    #[test]
    fn baseline_errors() {
        let ts = gang(&[(5, 9, 9, 3)]);
        assert_eq!(
            baseline_gang_rta_fp(&ts, 3, &[0], Preemption::NonPreemptive),
            Err(AnalysisError::NonPreemptiveUnsupported)
        );
        assert_eq!(
            baseline_gang_rta_fp(&[], 3, &[], Preemption::Preemptive),
            Err(AnalysisError::EmptyTaskSet)
        );
        assert!(matches!(
            baseline_gang_rta_fp(&ts, 2, &[0], Preemption::Preemptive),
            Err(AnalysisError::VolumeExceedsPartition { .. })
        ));
    }

    #[test]
    fn resolution() {
        let empty = GangTestRegistry::new();
        assert_eq!(resolve_gang_test(SchedulerKind::GANG_FP_P, &empty).name(), BASELINE_GANG_TEST);
        assert_eq!(resolve_gang_test(SchedulerKind::GANG_FP_NP, &empty).name(), REJECT_GANG_TEST);
        assert_eq!(resolve_gang_test(SchedulerKind::GANG_EDF_P, &empty).name(), REJECT_GANG_TEST);

        let mut reg = GangTestRegistry::new();
        reg.register(GangTestHandle::new(
            "ext-g22",
            vec![SchedulerKind::GANG_FP_P],
            |_, _, _| SchedVerdict::accept(None),
        ));
        assert_eq!(resolve_gang_test(SchedulerKind::GANG_FP_P, &reg).name(), "ext-g22");
        assert_eq!(resolve_gang_test(SchedulerKind::GANG_FP_NP, &reg).name(), REJECT_GANG_TEST);
        assert!(reg.get("ext-g22").is_some());
        assert!(reg.get(BASELINE_GANG_TEST).is_some());
        assert!(reg.get("nope").is_none());

        let ts = gang(&[(1, 4, 4, 1)]);
        assert!(!GangTestHandle::reject().run(&ts, 1, &[0]).schedulable);
    }

    fn arb_gang_set(max_volume: u32) -> impl Strategy<Value = Vec<GangTask>> {
        prop::collection::vec((1u64..=20, 1u32..=max_volume, 0u64..=10), 1..=5).prop_map(
            |raw| {
                raw.into_iter()
                    .enumerate()
                    .map(|(i, (t, m, c_frac))| {
                        let c = (t * c_frac / 10).max(1);
                        GangTask::implicit(i as TaskId, c, t, m).unwrap()
                    })
                    .collect()
            },
        )
    }

    proptest! {
        #[test]
        fn pairwise_is_order_independent(mut vols in prop::collection::vec(1u32..8, 1..7), part in 1u32..10, seed in any::<u64>()) {
            let before = pairwise_sequential(&vols, part);
            let n = vols.len();
            vols.rotate_left((seed as usize) % n);
            vols.reverse();
            prop_assert_eq!(before, pairwise_sequential(&vols, part));
            let brute = (0..n).all(|x| (x + 1..n).all(|y| vols[x] + vols[y] > part));
            prop_assert_eq!(before, brute);
        }

        #[test]
        fn baseline_matches_uniprocessor_rta_for_uniform_volume(ts in arb_gang_set(1), m in 1u32..5) {
            let ts: Vec<GangTask> = ts.into_iter().map(|t| GangTask { volume: m, ..t }).collect();
            let order = dm_priority_order(&ts);
            let gang = baseline_gang_rta_fp(&ts, m, &order, Preemption::Preemptive).unwrap();
            let uni = rta_fp_preemptive(&ts, &order).unwrap();
            prop_assert_eq!(gang, uni);
        }

        #[test]
        fn baseline_monotone_in_volume(ts in arb_gang_set(4), extra in 0u32..4) {
            let order = dm_priority_order(&ts);
            let base = ts.iter().map(|t| t.volume).max().unwrap();
            let small = baseline_gang_rta_fp(&ts, base, &order, Preemption::Preemptive).unwrap();
            let big = baseline_gang_rta_fp(&ts, base + extra, &order, Preemption::Preemptive).unwrap();
            prop_assert!(!small.schedulable || big.schedulable);
        }
    }
}

//! Discrete-time simulation of partitioned and global gang schedules.
//!
//! Time advances in unit ticks. A job released at `r` may execute in tick
//! `r`; a job that executes its last unit in tick `t` finishes at `t + 1`.
//! A job still unfinished at its absolute deadline `d` misses at tick `d`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{
    dm_priority_order, hyperperiod, GangTask, PartitionPlan, Policy, SchedulerKind, Scope, TaskId, TaskSet,
    Time, DEFAULT_HORIZON_CAP,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("simulation horizon {0} exceeds the cap")]
    HorizonOverflow(Time),
    #[error("simulation horizon must be at least one tick")]
    EmptyHorizon,
    #[error("task {task} needs {volume} processors but partition {partition} has {available}")]
    VolumeExceedsPartition {
        task: TaskId,
        volume: u32,
        partition: usize,
        available: u32,
    },
    #[error("task {0} is not part of the task set")]
    UnknownTask(TaskId),
    #[error("job of task {0} did not complete")]
    NoCompletion(TaskId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReleaseMode {
    /// Every task releases its first job at tick 0.
    Synchronous,
    /// First release per task; tasks absent from the map never release.
    Explicit(BTreeMap<TaskId, Time>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReleasePattern {
    pub mode: ReleaseMode,
    pub horizon: Time,
}

impl ReleasePattern {
    pub fn synchronous(horizon: Time) -> Self {
        Self {
            mode: ReleaseMode::Synchronous,
            horizon,
        }
    }

    pub fn explicit(offsets: impl IntoIterator<Item = (TaskId, Time)>, horizon: Time) -> Self {
        Self {
            mode: ReleaseMode::Explicit(offsets.into_iter().collect()),
            horizon,
        }
    }

    fn first_release(&self, task: TaskId) -> Option<Time> {
        match &self.mode {
            ReleaseMode::Synchronous => Some(0),
            ReleaseMode::Explicit(map) => map.get(&task).copied(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Release,
    Start,
    Finish,
    DeadlineMiss,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::Release => "release",
            EventKind::Start => "start",
            EventKind::Finish => "finish",
            EventKind::DeadlineMiss => "deadline-miss",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Event {
    pub tick: Time,
    pub kind: EventKind,
    pub task: TaskId,
    pub partition: usize,
    pub processors: u32,
}

/// One task running in one partition during one tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    pub partition: usize,
    pub task: TaskId,
    pub processors: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JobRecord {
    pub task: TaskId,
    pub partition: usize,
    pub volume: u32,
    pub release: Time,
    pub deadline: Time,
    pub start: Option<Time>,
    pub finish: Option<Time>,
}

impl JobRecord {
    pub fn response(&self) -> Option<Time> {
        self.finish.map(|f| f - self.release)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimVerdict {
    NoMiss,
    FirstMiss { task: TaskId, tick: Time },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimTrace {
    pub horizon: Time,
    /// Volume of each simulated partition, by partition id.
    pub partition_volumes: Vec<u32>,
    pub events: Vec<Event>,
    pub jobs: Vec<JobRecord>,
    pub verdict: SimVerdict,
    slots: Vec<Slot>,
    tick_start: Vec<usize>,
}

impl SimTrace {
    /// Tasks executing during `tick`, grouped by partition.
    pub fn occupancy_at(&self, tick: Time) -> &[Slot] {
        let t = tick as usize;
        if t + 1 >= self.tick_start.len() {
            return &[];
        }
        &self.slots[self.tick_start[t]..self.tick_start[t + 1]]
    }

    /// Processors busy in `partition` during `tick`.
    pub fn busy(&self, tick: Time, partition: usize) -> u32 {
        self.occupancy_at(tick)
            .iter()
            .filter(|s| s.partition == partition)
            .map(|s| s.processors)
            .sum()
    }

    pub fn is_schedulable(&self) -> bool {
        self.verdict == SimVerdict::NoMiss
    }

    /// First job of `task` in release order.
    pub fn first_job(&self, task: TaskId) -> Option<&JobRecord> {
        self.jobs
            .iter()
            .filter(|j| j.task == task)
            .min_by_key(|j| j.release)
    }

    /// Largest completed response of `task`.
    pub fn max_response(&self, task: TaskId) -> Option<Time> {
        self.jobs
            .iter()
            .filter(|j| j.task == task)
            .filter_map(JobRecord::response)
            .max()
    }

    /// Events as `tick,kind,task,partition,processors` lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tick,kind,task,partition,processors\n");
        for e in &self.events {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                e.tick,
                e.kind.as_str(),
                e.task,
                e.partition,
                e.processors
            );
        }
        out
    }
}

#[derive(Debug, Clone)]
struct Job {
    task: usize,
    release: Time,
    deadline: Time,
    remaining: Time,
    started: bool,
    missed: bool,
    record: usize,
}

/// Tick-by-tick scheduler for one partition.
pub(crate) struct PartitionSim {
    id: usize,
    volume: u32,
    kind: SchedulerKind,
    tasks: Vec<GangTask>,
    rank: Vec<usize>,
    next_release: Vec<Option<Time>>,
    pending: Vec<Job>,
}

#[derive(Default)]
pub(crate) struct Sink {
    pub events: Vec<Event>,
    pub jobs: Vec<JobRecord>,
    pub slots: Vec<Slot>,
    pub first_miss: Option<(Time, TaskId)>,
}

impl Sink {
    fn emit(&mut self, tick: Time, kind: EventKind, task: &GangTask, partition: usize) {
        self.events.push(Event {
            tick,
            kind,
            task: task.id,
            partition,
            processors: task.volume,
        });
    }
}

impl PartitionSim {
    /// `order` lists indices into `tasks`, highest priority first; it is
    /// ignored by EDF.
    pub(crate) fn new(
        id: usize,
        volume: u32,
        kind: SchedulerKind,
        tasks: Vec<GangTask>,
        order: &[usize],
        first_release: impl Fn(&GangTask) -> Option<Time>,
    ) -> Result<Self, SimError> {
        if let Some(t) = tasks.iter().find(|t| t.volume > volume) {
            return Err(SimError::VolumeExceedsPartition {
                task: t.id,
                volume: t.volume,
                partition: id,
                available: volume,
            });
        }
        let mut rank = vec![0; tasks.len()];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r;
        }
        let next_release = tasks.iter().map(first_release).collect();
        Ok(Self {
            id,
            volume,
            kind,
            tasks,
            rank,
            next_release,
            pending: Vec::new(),
        })
    }

    fn key(&self, job: &Job) -> (Time, usize, Time) {
        match self.kind.policy() {
            Policy::Fp => (self.rank[job.task] as Time, 0, job.release),
            Policy::Edf => (job.deadline, self.tasks[job.task].id as usize, job.release),
        }
    }

    fn check_misses(&mut self, t: Time, sink: &mut Sink) {
        for job in self.pending.iter_mut().filter(|j| !j.missed && j.deadline <= t) {
            job.missed = true;
            let task = &self.tasks[job.task];
            sink.emit(t, EventKind::DeadlineMiss, task, self.id);
            if sink.first_miss.is_none_or(|(tick, _)| t < tick) {
                sink.first_miss = Some((t, task.id));
            }
        }
    }

    /// Simulates tick `t`; returns whether any job executed.
    pub(crate) fn step(&mut self, t: Time, sink: &mut Sink) -> bool {
        self.check_misses(t, sink);

        for i in 0..self.tasks.len() {
            if self.next_release[i] != Some(t) {
                continue;
            }
            let task = self.tasks[i];
            sink.emit(t, EventKind::Release, &task, self.id);
            sink.jobs.push(JobRecord {
                task: task.id,
                partition: self.id,
                volume: task.volume,
                release: t,
                deadline: t + task.deadline,
                start: None,
                finish: None,
            });
            self.pending.push(Job {
                task: i,
                release: t,
                deadline: t + task.deadline,
                remaining: task.wcet,
                started: false,
                missed: false,
                record: sink.jobs.len() - 1,
            });
            self.next_release[i] = Some(t + task.period);
        }

        let selected = self.select();
        for &j in &selected {
            let job = &mut self.pending[j];
            let task = self.tasks[job.task];
            if !job.started {
                job.started = true;
                sink.jobs[job.record].start = Some(t);
                sink.emit(t, EventKind::Start, &task, self.id);
            }
            job.remaining -= 1;
            sink.slots.push(Slot {
                partition: self.id,
                task: task.id,
                processors: task.volume,
            });
            if job.remaining == 0 {
                sink.jobs[job.record].finish = Some(t + 1);
                sink.emit(t + 1, EventKind::Finish, &task, self.id);
            }
        }
        let ran = !selected.is_empty();
        self.pending.retain(|j| j.remaining > 0);
        ran
    }

    fn select(&self) -> Vec<usize> {
        let mut by_priority: Vec<usize> = (0..self.pending.len()).collect();
        by_priority.sort_by_key(|&j| self.key(&self.pending[j]));
        let in_progress = |j: &usize| self.pending[*j].started;
        let preemptive = self.kind.is_preemptive();

        match self.kind.scope() {
            Scope::Uniprocessor => {
                let pick = if preemptive {
                    by_priority.first().copied()
                } else {
                    by_priority
                        .iter()
                        .copied()
                        .find(in_progress)
                        .or_else(|| by_priority.first().copied())
                };
                pick.into_iter().collect()
            }
            Scope::Gang => {
                let mut free = self.volume;
                let mut chosen = Vec::new();
                if !preemptive {
                    for &j in by_priority.iter().filter(|j| in_progress(j)) {
                        free -= self.tasks[self.pending[j].task].volume;
                        chosen.push(j);
                    }
                }
                for &j in &by_priority {
                    if !preemptive && in_progress(&j) {
                        continue;
                    }
                    let m = self.tasks[self.pending[j].task].volume;
                    if m <= free {
                        free -= m;
                        chosen.push(j);
                    }
                }
                chosen
            }
        }
    }

    pub(crate) fn has_pending(&self) -> bool {
        !self.pending.is_empty()
    }
}

/// What to simulate: a partition plan, or all tasks on one shared pool.
#[derive(Debug, Clone, Copy)]
pub enum SimTarget<'a> {
    Plan(&'a PartitionPlan),
    Global { processors: u32 },
}

/// Simulates `taskset` over `pattern.horizon` ticks.
///
/// Partitions are independent; inside each, fixed priorities follow
/// deadline-monotonic order of that partition's members. For a plan, the
/// scope of `kind` decides between serialized and gang execution.
pub fn simulate(
    target: SimTarget<'_>,
    taskset: &TaskSet,
    kind: SchedulerKind,
    pattern: &ReleasePattern,
) -> Result<SimTrace, SimError> {
    if pattern.horizon == 0 {
        return Err(SimError::EmptyHorizon);
    }
    if pattern.horizon > DEFAULT_HORIZON_CAP {
        return Err(SimError::HorizonOverflow(pattern.horizon));
    }

    let groups: Vec<(u32, Vec<GangTask>)> = match target {
        SimTarget::Plan(plan) => plan
            .partitions
            .iter()
            .map(|p| {
                p.members
                    .iter()
                    .map(|&id| taskset.get(id).copied().ok_or(SimError::UnknownTask(id)))
                    .collect::<Result<Vec<_>, _>>()
                    .map(|members| (p.volume, members))
            })
            .collect::<Result<_, _>>()?,
        SimTarget::Global { processors } => vec![(processors, taskset.tasks().to_vec())],
    };

    let mut sims = Vec::with_capacity(groups.len());
    let mut partition_volumes = Vec::with_capacity(groups.len());
    for (id, (volume, members)) in groups.into_iter().enumerate() {
        let order = dm_priority_order(&members);
        partition_volumes.push(volume);
        sims.push(PartitionSim::new(id, volume, kind, members, &order, |t| {
            pattern.first_release(t.id)
        })?);
    }

    let mut sink = Sink::default();
    let mut tick_start = Vec::with_capacity(pattern.horizon as usize + 1);
    for t in 0..pattern.horizon {
        tick_start.push(sink.slots.len());
        for sim in sims.iter_mut() {
            sim.step(t, &mut sink);
        }
    }
    tick_start.push(sink.slots.len());
    for sim in sims.iter_mut() {
        sim.check_misses(pattern.horizon, &mut sink);
    }

    sink.events.sort_by_key(|e| e.tick);
    let verdict = match sink.first_miss {
        Some((tick, task)) => SimVerdict::FirstMiss { task, tick },
        None => SimVerdict::NoMiss,
    };
    Ok(SimTrace {
        horizon: pattern.horizon,
        partition_volumes,
        events: sink.events,
        jobs: sink.jobs,
        verdict,
        slots: sink.slots,
        tick_start,
    })
}

fn serialized_volume(tasks: &[GangTask]) -> u32 {
    tasks.iter().map(|t| t.volume).max().unwrap_or(1)
}

/// Response of the first job of `tasks[task_index]` under synchronous
/// release and preemptive fixed priorities on one serialized resource.
///
/// Gives up with `NoCompletion` if the job has not finished by its
/// deadline.
pub fn critical_instant_response(
    tasks: &[GangTask],
    order: &[usize],
    task_index: usize,
) -> Result<Time, SimError> {
    let pos = order
        .iter()
        .position(|&i| i == task_index)
        .expect("task index must appear in the priority order");
    let subset: Vec<GangTask> = order[..=pos].iter().map(|&i| tasks[i]).collect();
    let sub_order: Vec<usize> = (0..subset.len()).collect();
    let target = tasks[task_index];
    let mut sim = PartitionSim::new(
        0,
        serialized_volume(&subset),
        SchedulerKind::UNI_FP_P,
        subset,
        &sub_order,
        |_| Some(0),
    )?;
    let mut sink = Sink::default();
    for t in 0..target.deadline {
        sim.step(t, &mut sink);
        if let Some(f) = sink
            .jobs
            .iter()
            .find(|j| j.task == target.id)
            .and_then(|j| j.finish)
        {
            return Ok(f);
        }
    }
    Err(SimError::NoCompletion(target.id))
}

/// Worst simulated response of `tasks[task_index]` under non-preemptive
/// fixed priorities, over every choice of blocker.
///
/// Each scenario releases one lower-priority blocker (or none) at tick 0
/// and every higher-or-equal priority task at tick 1, then runs until the
/// processor first idles, until a late job of the task completes, or, when
/// nothing blocks past tick 1, until the first hep hyperperiod is drained.
/// Other lower-priority tasks are left out.
pub fn np_worst_response_oracle(
    tasks: &[GangTask],
    order: &[usize],
    task_index: usize,
) -> Result<Time, SimError> {
    np_worst_response_oracle_capped(tasks, order, task_index, DEFAULT_HORIZON_CAP)
}

pub fn np_worst_response_oracle_capped(
    tasks: &[GangTask],
    order: &[usize],
    task_index: usize,
    cap: Time,
) -> Result<Time, SimError> {
    let pos = order
        .iter()
        .position(|&i| i == task_index)
        .expect("task index must appear in the priority order");
    let target = tasks[task_index];
    let blockers: Vec<Option<usize>> = std::iter::once(None)
        .chain(order[pos + 1..].iter().map(|&b| Some(b)))
        .collect();

    let mut worst = 0;
    for blocker in blockers {
        let mut subset: Vec<GangTask> = order[..=pos].iter().map(|&i| tasks[i]).collect();
        let blocker_id = blocker.map(|b| tasks[b].id);
        if let Some(b) = blocker {
            // a single blocking job: its next release lies beyond any horizon
            let once = Time::MAX / 4;
            let t = tasks[b];
            subset.push(GangTask::new(t.id, t.wcet, once, once, t.volume).expect("valid single-job task"));
        }
        let sub_order: Vec<usize> = (0..subset.len()).collect();
        // Without blocking past tick 1 the schedule from tick 1 repeats every
        // hep hyperperiod, even when the processor never idles.
        let period_end = match blocker {
            Some(b) if tasks[b].wcet > 1 => None,
            _ => Some(1 + hyperperiod(&subset[..=pos], cap).finite().unwrap_or(cap)),
        };
        let mut sim = PartitionSim::new(
            0,
            serialized_volume(&subset),
            SchedulerKind::UNI_FP_NP,
            subset,
            &sub_order,
            |t| Some(if Some(t.id) == blocker_id { 0 } else { 1 }),
        )?;
        let mut sink = Sink::default();
        let mut t = 0;
        loop {
            if t > cap {
                return Err(SimError::HorizonOverflow(t));
            }
            let seen = sink.events.len();
            let ran = sim.step(t, &mut sink);
            if t >= 1 && !ran && !sim.has_pending() {
                break;
            }
            let late_finish = sink.events[seen..].iter().any(|e| {
                e.kind == EventKind::Finish
                    && e.task == target.id
                    && sink
                        .jobs
                        .iter()
                        .any(|j| j.task == target.id && j.finish == Some(e.tick) && j.deadline < e.tick)
            });
            t += 1;
            if late_finish {
                break;
            }
            if let Some(end) = period_end.filter(|&end| t >= end) {
                let open = sink
                    .jobs
                    .iter()
                    .any(|j| j.task == target.id && j.release < end && j.finish.is_none());
                if !open {
                    break;
                }
            }
        }
        let response = sink
            .jobs
            .iter()
            .filter(|j| j.task == target.id && j.release < t)
            .filter_map(JobRecord::response)
            .max()
            .ok_or(SimError::NoCompletion(target.id))?;
        worst = worst.max(response);
    }
    Ok(worst)
}

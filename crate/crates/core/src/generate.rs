//! Synthetic gang task sets and the Edge TPU case-study suites.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use thiserror::Error;

use crate::model::{GangTask, TaskId, TaskSet, Time};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("caps sum to {caps} which is below the target utilization {target}")]
    InfeasibleTarget { target: f64, caps: f64 },
    #[error("target utilization must be positive, got {0}")]
    NonPositiveTarget(f64),
    #[error("expected {expected} caps, got {got}")]
    CapCount { expected: usize, got: usize },
    #[error("caps must be positive")]
    NonPositiveCap,
    #[error("could not draw a task set with positive WCETs after {0} attempts")]
    GenerationExhausted(usize),
    #[error("invalid generation parameters: {0}")]
    InvalidSpec(String),
}

/// Draws `n` positive utilizations summing to `total` with `value_i ≤ caps_i`.
///
/// Values start as a flat Dirichlet sample scaled to `total`; any value
/// above its cap is pinned there and the rest are rescaled to absorb the
/// difference, until every cap holds.
pub fn gen_utilizations(n: usize, total: f64, caps: &[f64], seed: u64) -> Result<Vec<f64>, GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gen_utilizations_with(&mut rng, n, total, caps)
}

pub fn gen_utilizations_with<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    total: f64,
    caps: &[f64],
) -> Result<Vec<f64>, GenError> {
    if caps.len() != n {
        return Err(GenError::CapCount {
            expected: n,
            got: caps.len(),
        });
    }
    if total.is_nan() || total <= 0.0 {
        return Err(GenError::NonPositiveTarget(total));
    }
    if caps.iter().any(|&c| c.is_nan() || c <= 0.0) {
        return Err(GenError::NonPositiveCap);
    }
    let cap_sum: f64 = caps.iter().sum();
    if cap_sum < total {
        return Err(GenError::InfeasibleTarget {
            target: total,
            caps: cap_sum,
        });
    }

    let weights: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let mut pinned = vec![false; n];
    let mut values = vec![0.0; n];
    loop {
        let remaining = total
            - (0..n)
                .filter(|&i| pinned[i])
                .map(|i| caps[i])
                .sum::<f64>();
        let free_weight: f64 = (0..n).filter(|&i| !pinned[i]).map(|i| weights[i]).sum();
        if free_weight <= 0.0 {
            // every value sits at its cap
            values.copy_from_slice(caps);
            return Ok(values);
        }
        let mut clipped = false;
        for i in 0..n {
            if pinned[i] {
                values[i] = caps[i];
                continue;
            }
            values[i] = weights[i] / free_weight * remaining;
            if values[i] > caps[i] {
                pinned[i] = true;
                clipped = true;
            }
        }
        if !clipped {
            return Ok(values);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VolumeLevel {
    Low,
    Medium,
    High,
}

impl VolumeLevel {
    pub const ALL: [VolumeLevel; 3] = [VolumeLevel::Low, VolumeLevel::Medium, VolumeLevel::High];

    /// Largest volume drawn on `processors` processors:
    /// `⌈0.3M⌉`, `⌈0.6M⌉` or `M − 1`.
    pub fn upper(self, processors: u32) -> u32 {
        match self {
            VolumeLevel::Low => (3 * processors).div_ceil(10),
            VolumeLevel::Medium => (6 * processors).div_ceil(10),
            VolumeLevel::High => processors.saturating_sub(1),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            VolumeLevel::Low => "low",
            VolumeLevel::Medium => "medium",
            VolumeLevel::High => "high",
        }
    }
}

impl fmt::Display for VolumeLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VolumeLevel {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "low" => Ok(VolumeLevel::Low),
            "medium" => Ok(VolumeLevel::Medium),
            "high" | "large" => Ok(VolumeLevel::High),
            _ => Err(GenError::InvalidSpec(format!("unknown volume level `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub processors: u32,
    pub tasks: usize,
    pub level: VolumeLevel,
    /// `U / M`, in `(0, 1]`.
    pub norm_util: f64,
    pub seed: u64,
    pub period_range: (Time, Time),
}

impl GenSpec {
    pub fn new(processors: u32, tasks: usize, level: VolumeLevel, norm_util: f64, seed: u64) -> Self {
        Self {
            processors,
            tasks,
            level,
            norm_util,
            seed,
            period_range: (10, 1000),
        }
    }

    fn validate(&self) -> Result<u32, GenError> {
        let bad = |msg: &str| Err(GenError::InvalidSpec(msg.to_string()));
        if self.tasks == 0 {
            return bad("at least one task is required");
        }
        if !(self.norm_util > 0.0 && self.norm_util <= 1.0) {
            return bad("normalized utilization must lie in (0, 1]");
        }
        let (lo, hi) = self.period_range;
        if lo == 0 || lo > hi {
            return bad("period range must be a non-empty range of positive integers");
        }
        let upper = self.level.upper(self.processors);
        if upper == 0 {
            return bad("volume range is empty for this processor count");
        }
        Ok(upper)
    }
}

/// A generated task set with the utilization it was drawn for and the
/// utilization it actually has after WCET rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedSet {
    pub processors: u32,
    pub tasks: TaskSet,
    pub target_util: f64,
    pub realized_util: f64,
}

const PERIOD_DRAWS: usize = 100;
const SET_ATTEMPTS: usize = 100;

/// Draws one synthetic task set.
///
/// Utilizations come from [`gen_utilizations`] with every cap equal to the
/// level's largest volume; then per task a period from the period range,
/// a volume from `[max(1, ⌈U_i⌉), upper]`, and `C = ⌊U_i · T / m⌋`. Tasks
/// whose WCET rounds to zero redraw their period and volume; if that keeps
/// failing the whole utilization vector is redrawn. Deadlines are implicit.
pub fn gen_taskset(spec: &GenSpec) -> Result<GeneratedSet, GenError> {
    let upper = spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let target = spec.norm_util * f64::from(spec.processors);
    let caps = vec![f64::from(upper); spec.tasks];
    let (lo, hi) = spec.period_range;

    'attempt: for _ in 0..SET_ATTEMPTS {
        let utils = gen_utilizations_with(&mut rng, spec.tasks, target, &caps)?;
        let mut tasks = Vec::with_capacity(spec.tasks);
        for (i, &u) in utils.iter().enumerate() {
            let min_volume = (u.ceil() as u32).clamp(1, upper);
            let drawn = (0..PERIOD_DRAWS).find_map(|_| {
                let period = rng.gen_range(lo..=hi);
                let volume = rng.gen_range(min_volume..=upper);
                let wcet = (u * period as f64 / f64::from(volume)).floor() as Time;
                (wcet >= 1).then_some((wcet.min(period), period, volume))
            });
            let Some((wcet, period, volume)) = drawn else {
                continue 'attempt;
            };
            tasks.push(
                GangTask::implicit(i as TaskId, wcet, period, volume)
                    .expect("drawn parameters satisfy the task model"),
            );
        }
        let tasks = TaskSet::new(tasks).expect("ids are unique");
        let realized = tasks.tasks().iter().map(GangTask::util_f64).sum();
        return Ok(GeneratedSet {
            processors: spec.processors,
            tasks,
            target_util: target,
            realized_util: realized,
        });
    }
    Err(GenError::GenerationExhausted(SET_ATTEMPTS))
}

/// One Edge TPU benchmark: name, volume and worst observed execution time (ms).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TpuModel {
    pub name: &'static str,
    pub volume: u32,
    pub woet: Time,
}

pub const EDGE_TPU_MODELS: [TpuModel; 7] = [
    TpuModel { name: "Inc-1", volume: 1, woet: 6 },
    TpuModel { name: "Inc-2", volume: 2, woet: 10 },
    TpuModel { name: "Inc-3", volume: 4, woet: 15 },
    TpuModel { name: "Inc-4", volume: 6, woet: 31 },
    TpuModel { name: "Res-1", volume: 4, woet: 24 },
    TpuModel { name: "Res-2", volume: 7, woet: 44 },
    TpuModel { name: "Res-3", volume: 9, woet: 55 },
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Card {
    /// 8 Edge TPUs, first six models.
    Tpu8,
    /// 16 Edge TPUs, all seven models.
    Tpu16,
}

impl Card {
    pub fn processors(self) -> u32 {
        match self {
            Card::Tpu8 => 8,
            Card::Tpu16 => 16,
        }
    }

    pub fn models(self) -> &'static [TpuModel] {
        match self {
            Card::Tpu8 => &EDGE_TPU_MODELS[..6],
            Card::Tpu16 => &EDGE_TPU_MODELS[..],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Card::Tpu8 => "tpu8",
            Card::Tpu16 => "tpu16",
        }
    }
}

impl FromStr for Card {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "8" | "tpu8" => Ok(Card::Tpu8),
            "16" | "tpu16" => Ok(Card::Tpu16),
            _ => Err(GenError::InvalidSpec(format!("unknown card `{s}`"))),
        }
    }
}

/// Edge TPU task set: fixed `(C, m)` per model, utilizations drawn for
/// `norm_util · M` with caps `m_i`, and periods `T = ⌈C · m / U⌉` so the
/// realized load never exceeds the drawn one.
pub fn edge_tpu_suite(card: Card, norm_util: f64, seed: u64) -> Result<GeneratedSet, GenError> {
    if !(norm_util > 0.0 && norm_util <= 1.0) {
        return Err(GenError::InvalidSpec(
            "normalized utilization must lie in (0, 1]".into(),
        ));
    }
    let models = card.models();
    let processors = card.processors();
    let target = norm_util * f64::from(processors);
    let caps: Vec<f64> = models.iter().map(|m| f64::from(m.volume)).collect();
    let utils = gen_utilizations(models.len(), target, &caps, seed)?;
    let tasks = models
        .iter()
        .zip(&utils)
        .enumerate()
        .map(|(i, (model, &u))| {
            let work = (model.woet * Time::from(model.volume)) as f64;
            let period = ((work / u).ceil().min(1e12) as Time).max(model.woet);
            GangTask::implicit(i as TaskId, model.woet, period, model.volume)
                .expect("period is at least the WOET")
        })
        .collect();
    let tasks = TaskSet::new(tasks).expect("ids are unique");
    let realized = tasks.tasks().iter().map(GangTask::util_f64).sum();
    Ok(GeneratedSet {
        processors,
        tasks,
        target_util: target,
        realized_util: realized,
    })
}

/// Derives an independent seed for one grid cell.
pub fn mix_seed(base: u64, coords: &[u64]) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    coords
        .iter()
        .fold(splitmix(base), |acc, &c| splitmix(acc ^ splitmix(c)))
}

//! Closed-form admission for strict partitioning with uniprocessor
//! schedulers of utilization bound `u_b`.
//!
//! All arithmetic is exact: utilizations are `C/T` fractions and the
//! weighting function has breakpoints at sixths and thirds of `u_b`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::model::TaskSet;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("task utilization {util} lies outside [0, {u_b}]")]
pub struct DomainViolation {
    pub util: BigRational,
    pub u_b: BigRational,
}

fn frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn int(n: u32) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Piecewise weight of a task utilization on `[0, u_b]`, ranging over
/// `[0, 8/5 · u_b]`.
///
/// Offsets scale with `u_b`, so the function is continuous at `u_b/6` and
/// `u_b/3` and jumps by `3/10 · u_b` at `u_b/2`.
#[allow(clippy::result_large_err)]
pub fn weight_w(util: &BigRational, u_b: &BigRational) -> Result<BigRational, DomainViolation> {
    if util.is_negative() || util > u_b {
        return Err(DomainViolation {
            util: util.clone(),
            u_b: u_b.clone(),
        });
    }
    let w = if *util <= u_b * frac(1, 6) {
        frac(6, 5) * util
    } else if *util <= u_b * frac(1, 3) {
        frac(9, 5) * util - u_b * frac(1, 10)
    } else if *util <= u_b * frac(1, 2) {
        frac(6, 5) * util + u_b * frac(1, 10)
    } else {
        frac(6, 5) * util + u_b * frac(4, 10)
    };
    Ok(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundNote {
    None,
    /// Some task utilization exceeds `u_b`; the weighted bound does not apply.
    DomainViolation,
    /// The largest sequential utilization leaves no integer `p ≥ 2`.
    PTooSmall,
    /// The widest task needs more processors than the platform has.
    PlatformTooSmall,
}

/// Upper bound on the integer `p` of the third bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PChoice {
    Finite(BigInt),
    /// Every task has zero utilization (only the empty set).
    Unbounded,
}

/// One bound evaluation: `holds ⇔ lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundCheck {
    pub holds: bool,
    pub lhs: Option<BigRational>,
    pub rhs: BigRational,
    pub note: BoundNote,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Thm3Check {
    pub check: BoundCheck,
    pub p: Option<PChoice>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundReport {
    pub thm1: BoundCheck,
    pub thm2: BoundCheck,
    pub thm3: Thm3Check,
    pub accepted: bool,
}

impl BoundReport {
    pub fn accepted_by(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.thm1.holds {
            v.push("weighted");
        }
        if self.thm2.holds {
            v.push("volume-span");
        }
        if self.thm3.check.holds {
            v.push("max-util");
        }
        v
    }
}

fn platform_too_small(taskset: &TaskSet, processors: u32, rhs: BigRational) -> Option<BoundCheck> {
    (taskset.max_volume() > processors).then_some(BoundCheck {
        holds: false,
        lhs: None,
        rhs,
        note: BoundNote::PlatformTooSmall,
    })
}

fn headroom(taskset: &TaskSet, processors: u32) -> BigRational {
    int(processors) - int(taskset.max_volume())
}

/// Weighted bound: `Σ W(U_i) ≤ (M − m̄) · u_b`.
pub fn thm1_test(taskset: &TaskSet, processors: u32, u_b: &BigRational) -> BoundCheck {
    let rhs = headroom(taskset, processors) * u_b;
    if let Some(c) = platform_too_small(taskset, processors, rhs.clone()) {
        return c;
    }
    let mut lhs = BigRational::zero();
    for t in taskset {
        match weight_w(&t.util(), u_b) {
            Ok(w) => lhs += w,
            Err(_) => {
                return BoundCheck {
                    holds: false,
                    lhs: None,
                    rhs,
                    note: BoundNote::DomainViolation,
                }
            }
        }
    }
    BoundCheck {
        holds: lhs <= rhs,
        lhs: Some(lhs),
        rhs,
        note: BoundNote::None,
    }
}

/// Volume-span bound: `U ≤ (M − m̄ + m̲) · u_b / 2`.
pub fn thm2_test(taskset: &TaskSet, processors: u32, u_b: &BigRational) -> BoundCheck {
    let span = headroom(taskset, processors) + int(taskset.min_volume());
    let rhs = span * u_b * frac(1, 2);
    if let Some(c) = platform_too_small(taskset, processors, rhs.clone()) {
        return c;
    }
    let lhs = taskset.total_util();
    BoundCheck {
        holds: lhs <= rhs,
        lhs: Some(lhs),
        rhs,
        note: BoundNote::None,
    }
}

/// Max-utilization bound: with `p = ⌊u_b / max u_i⌋ ≥ 2`,
/// `U ≤ p/(p+1) · (M − m̄) · u_b`.
///
/// The right side grows with `p`, so the largest admissible `p` decides.
pub fn thm3_test(taskset: &TaskSet, processors: u32, u_b: &BigRational) -> Thm3Check {
    let base = headroom(taskset, processors) * u_b;
    if let Some(c) = platform_too_small(taskset, processors, base.clone()) {
        return Thm3Check { check: c, p: None };
    }
    let lhs = taskset.total_util();
    let max_u = taskset
        .tasks()
        .iter()
        .map(|t| t.seq_util())
        .max()
        .unwrap_or_else(BigRational::zero);
    if max_u.is_zero() {
        return Thm3Check {
            check: BoundCheck {
                holds: lhs <= base,
                lhs: Some(lhs),
                rhs: base,
                note: BoundNote::None,
            },
            p: Some(PChoice::Unbounded),
        };
    }
    let p = (u_b / &max_u).floor().to_integer();
    if p < BigInt::from(2) {
        return Thm3Check {
            check: BoundCheck {
                holds: false,
                lhs: Some(lhs),
                rhs: base,
                note: BoundNote::PTooSmall,
            },
            p: Some(PChoice::Finite(p)),
        };
    }
    let p_rat = BigRational::from_integer(p.clone());
    let rhs = &p_rat / (&p_rat + BigRational::one()) * base;
    Thm3Check {
        check: BoundCheck {
            holds: lhs <= rhs,
            lhs: Some(lhs),
            rhs,
            note: BoundNote::None,
        },
        p: Some(PChoice::Finite(p)),
    }
}

/// Accepts when any of the three bounds holds.
pub fn sp_b(taskset: &TaskSet, processors: u32, u_b: &BigRational) -> BoundReport {
    let thm1 = thm1_test(taskset, processors, u_b);
    let thm2 = thm2_test(taskset, processors, u_b);
    let thm3 = thm3_test(taskset, processors, u_b);
    let accepted = thm1.holds || thm2.holds || thm3.check.holds;
    BoundReport {
        thm1,
        thm2,
        thm3,
        accepted,
    }
}

/// Lossy view for reports.
pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

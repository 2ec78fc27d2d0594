//! Solution quality metrics and the Mann-Whitney U rank-sum test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::constraints::{
    check_incompatibilities, check_travel_gaps, count_trips, find_overlaps, segment_trips,
};
use crate::error::{ModelError, StatsError};
use crate::model::{signed_gap, IncompatibilityRule, Schedule};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionMetrics {
    /// Undefined (None) for fewer than two assignments.
    pub itr: Option<f64>,
    /// 0 only for an empty schedule.
    pub trips: u32,
    pub overlap_ok: bool,
    pub compatibility_ok: bool,
    pub travel_ok: bool,
    pub fully_scheduled: bool,
}

impl SolutionMetrics {
    pub fn all_constraints_ok(&self) -> bool {
        self.overlap_ok && self.compatibility_ok && self.travel_ok
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fulfillment {
    pub overlap_ok: bool,
    pub compatibility_ok: bool,
    pub travel_ok: bool,
    pub fully_scheduled: bool,
}

/// Idle minutes between consecutive appointments over the journey span.
/// Overlaps contribute zero idle time rather than a negative amount.
pub fn idle_time_ratio(schedule: &Schedule) -> Option<f64> {
    if schedule.len() < 2 {
        return None;
    }
    let sorted = schedule.chronological();
    let idle: i64 = sorted
        .windows(2)
        .map(|w| signed_gap(&w[0].slot, &w[1].slot).max(0))
        .sum();
    let first_start = sorted[0].slot.start;
    let last_end = sorted
        .iter()
        .map(|a| a.slot.end())
        .max()
        .expect("non-empty");
    Some(idle as f64 / f64::from(last_end - first_start))
}

pub fn trip_count(schedule: &Schedule) -> Result<u32, ModelError> {
    Ok(segment_trips(schedule)?.len() as u32)
}

pub fn constraint_fulfillment(
    schedule: &Schedule,
    rules: &[IncompatibilityRule],
    act_count: usize,
) -> Fulfillment {
    Fulfillment {
        overlap_ok: find_overlaps(schedule).is_empty(),
        compatibility_ok: check_incompatibilities(schedule, rules).is_empty(),
        travel_ok: check_travel_gaps(schedule).is_empty(),
        fully_scheduled: schedule.len() == act_count,
    }
}

pub fn solution_metrics(
    schedule: &Schedule,
    rules: &[IncompatibilityRule],
    act_count: usize,
) -> SolutionMetrics {
    let f = constraint_fulfillment(schedule, rules, act_count);
    SolutionMetrics {
        itr: idle_time_ratio(schedule),
        trips: count_trips(&schedule.chronological()),
        overlap_ok: f.overlap_ok,
        compatibility_ok: f.compatibility_ok,
        travel_ok: f.travel_ok,
        fully_scheduled: f.fully_scheduled,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// min(U_a, U_b)
    pub u: f64,
    pub u_a: f64,
    /// Two-sided p-value (normal approximation, tie and continuity corrected).
    pub p: f64,
}

/// Two-sided Mann-Whitney U test.
///
/// Ranks use the average rank for ties. The p-value uses the normal
/// approximation with tie-corrected variance and a 0.5 continuity
/// correction. When every value is tied the variance vanishes and p = 1.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(StatsError::NotANumber);
    }
    let n1 = a.len() as f64;
    let n2 = b.len() as f64;
    let n = n1 + n2;

    let mut pooled: Vec<(f64, bool)> = a
        .iter()
        .map(|&v| (v, true))
        .chain(b.iter().map(|&v| (v, false)))
        .collect();
    pooled.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut rank_sum_a = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i + 1;
        while j < pooled.len() && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        // 1-based ranks i+1..=j share their average
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        rank_sum_a += avg_rank * pooled[i..j].iter().filter(|(_, in_a)| *in_a).count() as f64;
        i = j;
    }

    let u_a = rank_sum_a - n1 * (n1 + 1.0) / 2.0;
    let u_b = n1 * n2 - u_a;
    let u = u_a.min(u_b);

    let mean = n1 * n2 / 2.0;
    let variance = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    let p = if variance <= 0.0 || !variance.is_finite() {
        1.0
    } else {
        let z = ((u_a - mean).abs() - 0.5).max(0.0) / variance.sqrt();
        let normal = Normal::new(0.0, 1.0).expect("standard normal");
        (2.0 * normal.sf(z)).min(1.0)
    };
    Ok(MannWhitney { u, u_a, p })
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len().is_multiple_of(2) {
        (v[mid - 1] + v[mid]) / 2.0
    } else {
        v[mid]
    })
}

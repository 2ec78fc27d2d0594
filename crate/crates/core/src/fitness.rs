//! Penalty ledger and scalar fitness.
//!
//! Fitness is `1 / (1 + total_penalty)`: 1.0 for a perfect schedule and
//! strictly decreasing as penalties grow.

use serde::{Deserialize, Serialize};

use crate::constraints::{check_incompatibilities, check_travel_gaps, count_trips, find_overlaps};
use crate::model::{signed_gap, IncompatibilityRule, Schedule, ScheduleRequest, MINUTES_PER_DAY};

pub const MISSING_SLOT_PENALTY: f64 = 1000.0;
pub const HARD_VIOLATION_PENALTY: f64 = 1000.0;
pub const TRIP_PENALTY: f64 = 100.0;
pub const TRAVEL_GAP_PENALTY: f64 = 600.0;
/// Each idle minute between appointments costs a tenth of a point.
pub const WAIT_DIVISOR: f64 = 10.0;
const BASE: f64 = 1.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PenaltyBreakdown {
    pub missing_slot: f64,
    /// Overlaps and incompatibility breaches, 1000 each.
    pub hard_violations: f64,
    pub trips: f64,
    pub travel_gap: f64,
    pub wait: f64,
    /// Whole days from the request's start date to the first appointment.
    pub lead: f64,
}

impl PenaltyBreakdown {
    pub fn total(&self) -> f64 {
        self.missing_slot
            + self.hard_violations
            + self.trips
            + self.travel_gap
            + self.wait
            + self.lead
    }

    pub fn hard_total(&self) -> f64 {
        self.missing_slot + self.hard_violations
    }

    pub fn soft_total(&self) -> f64 {
        self.trips + self.travel_gap + self.wait + self.lead
    }

    pub fn fitness(&self) -> FitnessValue {
        fitness(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FitnessValue(pub f64);

impl FitnessValue {
    pub fn score(self) -> f64 {
        self.0
    }
}

pub fn fitness(breakdown: &PenaltyBreakdown) -> FitnessValue {
    FitnessValue(BASE / (BASE + breakdown.total()))
}

pub fn compute_penalties(
    schedule: &Schedule,
    request: &ScheduleRequest,
    rules: &[IncompatibilityRule],
) -> PenaltyBreakdown {
    let sorted = schedule.chronological();
    let missing_slot = if schedule.len() != request.act_count() {
        MISSING_SLOT_PENALTY
    } else {
        0.0
    };
    let hard_count = find_overlaps(schedule).len() + check_incompatibilities(schedule, rules).len();
    let travel_count = check_travel_gaps(schedule).len();
    let wait_minutes: i64 = sorted
        .windows(2)
        .map(|w| signed_gap(&w[0].slot, &w[1].slot).max(0))
        .sum();
    let lead_days = sorted
        .first()
        .map_or(0, |a| a.slot.start / MINUTES_PER_DAY)
        .saturating_sub(request.start_date);

    PenaltyBreakdown {
        missing_slot,
        hard_violations: HARD_VIOLATION_PENALTY * hard_count as f64,
        trips: TRIP_PENALTY * f64::from(count_trips(&sorted)),
        travel_gap: TRAVEL_GAP_PENALTY * travel_count as f64,
        wait: wait_minutes as f64 / WAIT_DIVISOR,
        lead: f64::from(lead_days),
    }
}

pub fn evaluate(
    schedule: &Schedule,
    request: &ScheduleRequest,
    rules: &[IncompatibilityRule],
) -> FitnessValue {
    fitness(&compute_penalties(schedule, request, rules))
}

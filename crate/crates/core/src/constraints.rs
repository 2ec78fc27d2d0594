//! Feasibility checks over decoded schedules, trip segmentation, and the act
//! ordering used to seed the ordered GA variant.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::model::{
    signed_gap, slots_overlap, Assignment, ExamId, FacilityId, IncompatibilityRule, RuleLogic,
    Schedule,
};

/// Consecutive appointments further apart than this start a new trip.
pub const TRIP_BREAK_MINUTES: i64 = 120;
/// Minimum idle time between consecutive appointments at different facilities.
pub const TRAVEL_GAP_MINUTES: i64 = 180;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ViolationKind {
    Overlap,
    Incompatibility,
    TravelGap,
    MissingSlot,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub acts: Vec<usize>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} {:?}: {}", self.kind, self.acts, self.detail)
    }
}

/// One pairwise `Overlap` violation per unordered pair of overlapping slots.
pub fn find_overlaps(schedule: &Schedule) -> Vec<Violation> {
    let a = &schedule.assignments;
    let mut out = Vec::new();
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            if slots_overlap(&a[i].slot, &a[j].slot) {
                out.push(Violation {
                    kind: ViolationKind::Overlap,
                    acts: vec![a[i].act, a[j].act],
                    detail: format!("slots {} and {} overlap", a[i].slot.id, a[j].slot.id),
                });
            }
        }
    }
    out
}

/// Whether the slot pair `(first, second)` satisfies `rule`, where `first`
/// holds the rule's `first` exam.
pub fn rule_satisfied(rule: &IncompatibilityRule, first: &Assignment, second: &Assignment) -> bool {
    let gap = i64::from(rule.gap_minutes);
    let first_then_second = signed_gap(&first.slot, &second.slot) >= gap;
    let second_then_first = signed_gap(&second.slot, &first.slot) >= gap;
    match rule.logic {
        RuleLogic::Before => first_then_second,
        RuleLogic::After => second_then_first,
        RuleLogic::Both => first_then_second || second_then_first,
    }
}

/// One violation per failing (rule, assignment pair). Gaps run from the
/// earlier slot's end to the later slot's start.
pub fn check_incompatibilities(
    schedule: &Schedule,
    rules: &[IncompatibilityRule],
) -> Vec<Violation> {
    let a = &schedule.assignments;
    let mut out = Vec::new();
    for rule in rules {
        for x in a.iter().filter(|x| x.slot.exam == rule.first) {
            for y in a.iter().filter(|y| y.slot.exam == rule.second) {
                if !rule_satisfied(rule, x, y) {
                    out.push(Violation {
                        kind: ViolationKind::Incompatibility,
                        acts: vec![x.act, y.act],
                        detail: format!(
                            "exam {} {:?} exam {} needs {} min",
                            rule.first, rule.logic, rule.second, rule.gap_minutes
                        ),
                    });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trip {
    pub facility: FacilityId,
    pub assignments: Vec<Assignment>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripSegmentation {
    pub segments: Vec<Trip>,
}

impl TripSegmentation {
    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }
}

/// Splits the chronological schedule into trips at every facility change or
/// idle gap longer than two hours.
pub fn segment_trips(schedule: &Schedule) -> Result<TripSegmentation, ModelError> {
    let sorted = schedule.chronological();
    let Some(first) = sorted.first() else {
        return Err(ModelError::EmptySchedule);
    };
    let mut segments = vec![Trip {
        facility: first.slot.facility,
        assignments: vec![*first],
    }];
    for pair in sorted.windows(2) {
        let (prev, next) = (&pair[0], &pair[1]);
        let breaks = next.slot.facility != prev.slot.facility
            || signed_gap(&prev.slot, &next.slot) > TRIP_BREAK_MINUTES;
        if breaks {
            segments.push(Trip {
                facility: next.slot.facility,
                assignments: vec![*next],
            });
        } else {
            segments
                .last_mut()
                .expect("non-empty")
                .assignments
                .push(*next);
        }
    }
    Ok(TripSegmentation { segments })
}

/// Trip count, 0 for an empty schedule.
pub(crate) fn count_trips(sorted: &[Assignment]) -> u32 {
    if sorted.is_empty() {
        return 0;
    }
    1 + sorted
        .windows(2)
        .filter(|w| {
            w[0].slot.facility != w[1].slot.facility
                || signed_gap(&w[0].slot, &w[1].slot) > TRIP_BREAK_MINUTES
        })
        .count() as u32
}

/// Consecutive appointments at different facilities must be at least three
/// hours apart.
pub fn check_travel_gaps(schedule: &Schedule) -> Vec<Violation> {
    let sorted = schedule.chronological();
    sorted
        .windows(2)
        .filter(|w| {
            w[0].slot.facility != w[1].slot.facility
                && signed_gap(&w[0].slot, &w[1].slot) < TRAVEL_GAP_MINUTES
        })
        .map(|w| Violation {
            kind: ViolationKind::TravelGap,
            acts: vec![w[0].act, w[1].act],
            detail: format!(
                "facility {} -> {} with {} min between",
                w[0].slot.facility,
                w[1].slot.facility,
                signed_gap(&w[0].slot, &w[1].slot)
            ),
        })
        .collect()
}

/// Missing-slot violations for acts of a request that have no assignment.
pub fn find_missing(schedule: &Schedule, act_count: usize) -> Vec<Violation> {
    let assigned: BTreeSet<usize> = schedule.assignments.iter().map(|a| a.act).collect();
    (0..act_count)
        .filter(|act| !assigned.contains(act))
        .map(|act| Violation {
            kind: ViolationKind::MissingSlot,
            acts: vec![act],
            detail: format!("act {act} has no slot"),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActOrder {
    /// Permutation of act indices.
    pub order: Vec<usize>,
    /// Set when the precedence graph contained a cycle.
    pub has_cycle: bool,
}

/// Topological order of acts under the precedence implied by `Before`/`After`
/// rules, lowest request index first among ready acts.
///
/// A cycle never fails: when no act is ready, the strongly connected
/// component whose external predecessors are all placed is emitted in request
/// order and the result is flagged.
pub fn optimal_act_order(acts: &[ExamId], rules: &[IncompatibilityRule]) -> ActOrder {
    let n = acts.len();
    let mut succ = vec![BTreeSet::new(); n];
    for rule in rules {
        let (from, to) = match rule.logic {
            RuleLogic::Before => (rule.first, rule.second),
            RuleLogic::After => (rule.second, rule.first),
            RuleLogic::Both => continue,
        };
        for i in (0..n).filter(|&i| acts[i] == from) {
            for j in (0..n).filter(|&j| acts[j] == to && j != i) {
                succ[i].insert(j);
            }
        }
    }

    let mut indegree = vec![0usize; n];
    for targets in &succ {
        for &j in targets {
            indegree[j] += 1;
        }
    }

    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut has_cycle = false;
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();

    let place = |i: usize,
                 placed: &mut Vec<bool>,
                 indegree: &mut Vec<usize>,
                 ready: &mut BTreeSet<usize>,
                 order: &mut Vec<usize>| {
        placed[i] = true;
        order.push(i);
        ready.remove(&i);
        for &j in &succ[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 && !placed[j] {
                ready.insert(j);
            }
        }
    };

    while order.len() < n {
        if let Some(&i) = ready.iter().next() {
            place(i, &mut placed, &mut indegree, &mut ready, &mut order);
            continue;
        }
        has_cycle = true;
        let reach = reachability(&succ);
        let same_component = |i: usize, j: usize| i == j || (reach[i][j] && reach[j][i]);
        // A source component of the remaining graph: every unplaced
        // predecessor of its members lies inside it.
        let root = (0..n)
            .filter(|&i| !placed[i])
            .find(|&i| (0..n).all(|p| placed[p] || !succ[p].contains(&i) || same_component(p, i)))
            .expect("a finite graph always has a source component");
        let members: Vec<usize> = (0..n)
            .filter(|&j| !placed[j] && same_component(root, j))
            .collect();
        for j in members {
            // edges internal to the component are ignored from here on
            place(j, &mut placed, &mut indegree, &mut ready, &mut order);
        }
        ready.retain(|&j| !placed[j]);
    }

    ActOrder { order, has_cycle }
}

// index loops read closest to the textbook Floyd-Warshall closure
#[allow(clippy::needless_range_loop)]
fn reachability(succ: &[BTreeSet<usize>]) -> Vec<Vec<bool>> {
    let n = succ.len();
    let mut reach: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| succ[i].contains(&j)).collect())
        .collect();
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    reach
}

//! Comparison heuristics: first-come-first-served and random choice.
//! Neither checks overlaps, incompatibilities or travel time.

use std::collections::HashSet;

use rand::Rng;

use crate::ga::{decode, random_individual, SearchSpace};
use crate::model::{Assignment, Schedule, ScheduleRequest};

/// Each act, in request order, takes the earliest candidate not already
/// given to a previous act. Ties on start time go to the lower slot id.
pub fn fcfs_schedule(space: &SearchSpace, request: &ScheduleRequest) -> Schedule {
    debug_assert_eq!(space.act_count(), request.act_count());
    let mut taken = HashSet::new();
    let mut assignments = Vec::with_capacity(request.act_count());
    for (act, block) in space.per_act.iter().enumerate() {
        if let Some(slot) = block.iter().find(|s| !taken.contains(&s.id)) {
            taken.insert(slot.id);
            assignments.push(Assignment { act, slot: *slot });
        }
    }
    Schedule::new(assignments)
}

/// One uniformly drawn candidate per act; same sampler as unordered GA init.
pub fn random_schedule<R: Rng + ?Sized>(
    space: &SearchSpace,
    request: &ScheduleRequest,
    rng: &mut R,
) -> Schedule {
    let individual = random_individual(space, rng);
    decode(&individual, space, request).expect("sampled genes are in range")
}

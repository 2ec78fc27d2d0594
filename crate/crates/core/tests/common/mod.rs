//! Property suites and independent oracles shared by the `properties` and
//! `acceptance` test targets. Each suite runs a proptest `TestRunner` with
//! [`CASES`] cases and returns a description of the first failure.

#![allow(dead_code)]

use std::collections::BTreeSet;

use medsched_core::constraints::{
    check_incompatibilities, check_travel_gaps, find_overlaps, optimal_act_order, segment_trips,
};
use medsched_core::fitness::{compute_penalties, fitness, PenaltyBreakdown};
use medsched_core::ga::{crossover, decode, mutate, random_individual, Individual, SearchSpace};
use medsched_core::metrics::{idle_time_ratio, mann_whitney_u};
use medsched_core::model::{
    slots_overlap, Assignment, ExamId, FacilityId, IncompatibilityRule, PractitionerId, RoomId,
    RuleLogic, Schedule, ScheduleRequest, SlotId, TimeSlot, MINUTES_PER_DAY,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const CASES: u32 = 1000;

fn runner() -> TestRunner {
    TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    })
}

fn run<S: Strategy>(
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    runner().run(&strategy, test).map_err(|e| e.to_string())
}

// ---------------------------------------------------------------- strategies

fn arb_slot() -> impl Strategy<Value = TimeSlot> {
    (
        0u32..5,
        0u32..3,
        0u32..3,
        540u32..1170,
        prop::sample::select(vec![15u32, 30, 45, 60, 90]),
    )
        .prop_map(|(exam, facility, day, minute, duration)| TimeSlot {
            id: SlotId(0),
            exam: ExamId(exam),
            facility: FacilityId(facility),
            room: RoomId(0),
            practitioner: PractitionerId(0),
            start: day * MINUTES_PER_DAY + minute,
            duration_minutes: duration,
        })
}

/// Schedules of 1..=4 acts, one slot each, slot ids distinct.
fn arb_schedule() -> impl Strategy<Value = Schedule> {
    prop::collection::vec(arb_slot(), 1..=4).prop_map(|slots| {
        Schedule::new(
            slots
                .into_iter()
                .enumerate()
                .map(|(act, mut slot)| {
                    slot.id = SlotId(act as u32);
                    Assignment { act, slot }
                })
                .collect(),
        )
    })
}

/// Chronologically ordered, non-overlapping schedules of 2..=5 acts.
fn arb_disjoint_schedule() -> impl Strategy<Value = Schedule> {
    prop::collection::vec(
        (
            0u32..400,
            prop::sample::select(vec![15u32, 30, 45, 60, 90]),
            0u32..3,
        ),
        2..=5,
    )
    .prop_map(|parts| {
        let mut cursor = 540;
        let assignments = parts
            .into_iter()
            .enumerate()
            .map(|(act, (gap, duration, facility))| {
                let start = cursor + gap;
                cursor = start + duration;
                Assignment {
                    act,
                    slot: TimeSlot {
                        id: SlotId(act as u32),
                        exam: ExamId(act as u32),
                        facility: FacilityId(facility),
                        room: RoomId(0),
                        practitioner: PractitionerId(0),
                        start,
                        duration_minutes: duration,
                    },
                }
            })
            .collect();
        Schedule::new(assignments)
    })
}

fn arb_rules() -> impl Strategy<Value = Vec<IncompatibilityRule>> {
    prop::collection::vec(
        (
            0u32..5,
            0u32..5,
            prop::sample::select(RuleLogic::ALL.to_vec()),
            prop::sample::select(vec![30u32, 60, 1440]),
        ),
        0..6,
    )
    .prop_map(|raw| {
        raw.into_iter()
            .filter_map(|(a, b, logic, gap)| {
                IncompatibilityRule::new(ExamId(a), ExamId(b), logic, gap).ok()
            })
            .collect()
    })
}

fn request_for(schedule: &Schedule) -> ScheduleRequest {
    let mut acts: Vec<(usize, ExamId)> = schedule
        .assignments
        .iter()
        .map(|a| (a.act, a.slot.exam))
        .collect();
    acts.sort();
    ScheduleRequest::new(acts.into_iter().map(|(_, e)| e).collect(), 0).unwrap()
}

// ------------------------------------------------------------------ oracles

/// Minutes of the horizon covered by a slot.
fn minute_set(s: &TimeSlot) -> BTreeSet<u32> {
    (s.start..s.start + s.duration_minutes).collect()
}

pub fn oracle_overlap(a: &TimeSlot, b: &TimeSlot) -> bool {
    !minute_set(a).is_disjoint(&minute_set(b))
}

/// Free minutes strictly after `x` ends and before `y` starts, or `None`
/// when `y` does not start after `x` has ended.
fn free_minutes_between(x: &TimeSlot, y: &TimeSlot) -> Option<u32> {
    let x_end = x.start + x.duration_minutes;
    (y.start >= x_end).then(|| (x_end..y.start).count() as u32)
}

pub fn oracle_pair_ok(rule: &IncompatibilityRule, e1: &TimeSlot, e2: &TimeSlot) -> bool {
    let forward = free_minutes_between(e1, e2).is_some_and(|m| m >= rule.gap_minutes);
    let backward = free_minutes_between(e2, e1).is_some_and(|m| m >= rule.gap_minutes);
    match rule.logic {
        RuleLogic::Before => forward,
        RuleLogic::After => backward,
        RuleLogic::Both => forward || backward,
    }
}

/// Act pairs in (overlap, incompatibility, travel) violations.
pub type ViolationPairs = (
    Vec<(usize, usize)>,
    Vec<(usize, usize)>,
    Vec<(usize, usize)>,
);

/// Sorted (kind, act pair) triples for every violation, computed by brute force.
pub fn oracle_violations(schedule: &Schedule, rules: &[IncompatibilityRule]) -> ViolationPairs {
    let a = &schedule.assignments;
    let mut overlaps = Vec::new();
    for i in 0..a.len() {
        for j in 0..a.len() {
            if i < j && oracle_overlap(&a[i].slot, &a[j].slot) {
                overlaps.push((a[i].act, a[j].act));
            }
        }
    }
    let mut incompat = Vec::new();
    for rule in rules {
        for x in a {
            for y in a {
                if x.act != y.act
                    && x.slot.exam == rule.first
                    && y.slot.exam == rule.second
                    && !oracle_pair_ok(rule, &x.slot, &y.slot)
                {
                    incompat.push((x.act, y.act));
                }
            }
        }
    }
    // insertion sort by (start, act) to find chronological neighbours
    let mut chrono: Vec<&Assignment> = Vec::new();
    for item in a {
        let pos = chrono
            .iter()
            .position(|c| (item.slot.start, item.act) < (c.slot.start, c.act))
            .unwrap_or(chrono.len());
        chrono.insert(pos, item);
    }
    let mut travel = Vec::new();
    for k in 1..chrono.len() {
        let (p, n) = (chrono[k - 1], chrono[k]);
        let p_end = p.slot.start + p.slot.duration_minutes;
        let free = n.slot.start.saturating_sub(p_end);
        let short = n.slot.start < p_end || free < 180;
        if p.slot.facility != n.slot.facility && short {
            travel.push((p.act, n.act));
        }
    }
    overlaps.sort();
    incompat.sort();
    travel.sort();
    (overlaps, incompat, travel)
}

fn pairs(v: &[medsched_core::constraints::Violation]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = v.iter().map(|v| (v.acts[0], v.acts[1])).collect();
    out.sort();
    out
}

/// Number of (x, y) pairs with x > y, ties counting one half.
pub fn oracle_u(a: &[f64], b: &[f64]) -> f64 {
    let mut u = 0.0;
    for x in a {
        for y in b {
            if x > y {
                u += 1.0;
            } else if x == y {
                u += 0.5;
            }
        }
    }
    u
}

// ------------------------------------------------------------------- suites

pub fn overlap_symmetry() -> Result<(), String> {
    run((arb_slot(), arb_slot()), |(a, b)| {
        prop_assert_eq!(slots_overlap(&a, &b), slots_overlap(&b, &a));
        prop_assert_eq!(slots_overlap(&a, &b), oracle_overlap(&a, &b));
        Ok(())
    })
}

pub fn span_additivity() -> Result<(), String> {
    run(arb_disjoint_schedule(), |s| {
        let sorted = s.chronological();
        let first = sorted.first().unwrap().slot.start;
        let last = sorted.last().unwrap().slot.end();
        let durations: u32 = sorted.iter().map(|a| a.slot.duration_minutes).sum();
        let gaps: u32 = sorted
            .windows(2)
            .map(|w| medsched_core::model::gap_minutes(&w[0].slot, &w[1].slot).unwrap())
            .sum();
        prop_assert_eq!(last - first, durations + gaps);
        Ok(())
    })
}

pub fn trip_and_travel_thresholds() -> Result<(), String> {
    let two_slots = (0u32..400, any::<bool>(), 540u32..700);
    run(two_slots, |(gap, same_facility, start)| {
        let first = TimeSlot {
            id: SlotId(0),
            exam: ExamId(0),
            facility: FacilityId(0),
            room: RoomId(0),
            practitioner: PractitionerId(0),
            start,
            duration_minutes: 30,
        };
        let second = TimeSlot {
            id: SlotId(1),
            exam: ExamId(1),
            facility: FacilityId(if same_facility { 0 } else { 1 }),
            start: start + 30 + gap,
            ..first
        };
        let s = Schedule::new(vec![
            Assignment {
                act: 0,
                slot: first,
            },
            Assignment {
                act: 1,
                slot: second,
            },
        ]);
        let trips = segment_trips(&s).unwrap().len();
        prop_assert_eq!(trips == 1, same_facility && gap <= 120);
        let travel = check_travel_gaps(&s).len();
        prop_assert_eq!(travel == 1, !same_facility && gap < 180);
        Ok(())
    })?;
    run(arb_disjoint_schedule(), |s| {
        let sorted = s.chronological();
        let one_site = sorted.windows(2).all(|w| {
            w[0].slot.facility == w[1].slot.facility && w[1].slot.start - w[0].slot.end() <= 120
        });
        prop_assert_eq!(segment_trips(&s).unwrap().len() == 1, one_site);
        Ok(())
    })
}

pub fn violation_checkers_match_brute_force() -> Result<(), String> {
    run((arb_schedule(), arb_rules()), |(s, rules)| {
        let (overlaps, incompat, travel) = oracle_violations(&s, &rules);
        prop_assert_eq!(pairs(&find_overlaps(&s)), overlaps);
        prop_assert_eq!(pairs(&check_incompatibilities(&s, &rules)), incompat);
        prop_assert_eq!(pairs(&check_travel_gaps(&s)), travel);
        Ok(())
    })
}

pub fn fitness_monotonicity() -> Result<(), String> {
    run(
        (arb_schedule(), arb_rules(), 0usize..4, 0usize..4),
        |(s, rules, i, j)| {
            let req = request_for(&s);
            let base = fitness(&compute_penalties(&s, &req, &rules)).score();
            let n = s.len();
            if n < 2 {
                return Ok(());
            }
            let (a, b) = (i % n, (i % n + 1 + j % (n - 1)) % n);
            let (x, y) = (s.assignments[a].slot.exam, s.assignments[b].slot.exam);
            if x == y {
                return Ok(());
            }
            // a rule no schedule within the horizon can satisfy
            let mut more = rules.clone();
            more.push(IncompatibilityRule::new(x, y, RuleLogic::Both, 1_000_000).unwrap());
            let worse = fitness(&compute_penalties(&s, &req, &more)).score();
            prop_assert!(worse < base, "{worse} !< {base}");
            Ok(())
        },
    )?;
    let breakdown = || {
        (0.0f64..5000.0, 0.0f64..5000.0).prop_map(|(trips, wait)| PenaltyBreakdown {
            trips,
            wait,
            ..PenaltyBreakdown::default()
        })
    };
    run((breakdown(), breakdown()), |(a, b)| {
        let (fa, fb) = (fitness(&a).score(), fitness(&b).score());
        prop_assert!(fa > 0.0 && fa <= 1.0);
        if a.total() < b.total() {
            prop_assert!(fa > fb);
        }
        prop_assert_eq!(fa == 1.0, a.total() == 0.0);
        Ok(())
    })?;
    // a single hard violation loses to any feasible schedule with < 1000 soft penalty
    let soft = (0.0f64..250.0, 0.0f64..250.0, 0.0f64..250.0, 0.0f64..249.0);
    let hard = (0u32..2, 0u32..3, 0.0f64..3000.0);
    run(
        (soft, hard),
        |((trips, travel, wait, lead), (missing, n_hard, hard_soft))| {
            prop_assume!(missing + n_hard >= 1);
            let feasible = PenaltyBreakdown {
                trips,
                travel_gap: travel,
                wait,
                lead,
                ..PenaltyBreakdown::default()
            };
            let infeasible = PenaltyBreakdown {
                missing_slot: 1000.0 * f64::from(missing),
                hard_violations: 1000.0 * f64::from(n_hard),
                wait: hard_soft,
                ..PenaltyBreakdown::default()
            };
            prop_assert!(fitness(&infeasible).score() < fitness(&feasible).score());
            Ok(())
        },
    )
}

fn arb_space() -> impl Strategy<Value = SearchSpace> {
    prop::collection::vec(0usize..6, 1..=6).prop_map(|sizes| {
        let mut id = 0;
        SearchSpace {
            per_act: sizes
                .into_iter()
                .enumerate()
                .map(|(act, len)| {
                    (0..len)
                        .map(|k| {
                            id += 1;
                            TimeSlot {
                                id: SlotId(id),
                                exam: ExamId(act as u32),
                                facility: FacilityId(0),
                                room: RoomId(0),
                                practitioner: PractitionerId(0),
                                start: 540 + 60 * k as u32,
                                duration_minutes: 30,
                            }
                        })
                        .collect()
                })
                .collect(),
        }
    })
}

fn one_hot_valid(ind: &Individual, space: &SearchSpace) -> bool {
    let bits = ind.to_one_hot(space);
    let mut offset = 0;
    for block in &space.per_act {
        let set = bits[offset..offset + block.len()]
            .iter()
            .filter(|&&b| b)
            .count();
        offset += block.len();
        if set != usize::from(!block.is_empty()) {
            return false;
        }
    }
    Individual::from_one_hot(&bits, space).as_ref() == Some(ind)
}

pub fn one_hot_preservation() -> Result<(), String> {
    run((arb_space(), any::<u64>()), |(space, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let request = ScheduleRequest::new(
            (0..space.act_count()).map(|a| ExamId(a as u32)).collect(),
            0,
        )
        .unwrap();
        let a = random_individual(&space, &mut rng);
        let b = random_individual(&space, &mut rng);
        let (mut c1, mut c2) = crossover(&a, &b, &mut rng);
        for child in [&c1, &c2] {
            prop_assert!(one_hot_valid(child, &space));
        }
        mutate(&mut c1, &space, 1.0, &mut rng);
        mutate(&mut c2, &space, 0.5, &mut rng);
        for child in [&c1, &c2] {
            prop_assert!(one_hot_valid(child, &space));
            let decoded = decode(child, &space, &request).unwrap();
            let assigned = space.per_act.iter().filter(|b| !b.is_empty()).count();
            prop_assert_eq!(decoded.len(), assigned);
        }
        Ok(())
    })
}

pub fn itr_range() -> Result<(), String> {
    run(arb_disjoint_schedule(), |s| {
        let itr = idle_time_ratio(&s).unwrap();
        prop_assert!((0.0..1.0).contains(&itr), "itr={itr}");
        let sorted = s.chronological();
        let all_tight = sorted
            .windows(2)
            .all(|w| w[0].slot.end() == w[1].slot.start);
        prop_assert_eq!(itr == 0.0, all_tight);
        Ok(())
    })
}

pub fn mann_whitney_properties() -> Result<(), String> {
    let sample = || prop::collection::vec((0u8..8).prop_map(f64::from), 1..15);
    run((sample(), sample()), |(a, b)| {
        let ab = mann_whitney_u(&a, &b).unwrap();
        let ba = mann_whitney_u(&b, &a).unwrap();
        let n1n2 = (a.len() * b.len()) as f64;
        prop_assert!(ab.u >= 0.0 && ab.u <= n1n2);
        prop_assert_eq!(ab.u, ba.u);
        prop_assert!((ab.p - ba.p).abs() < 1e-12);
        prop_assert!(ab.p > 0.0 && ab.p <= 1.0);
        let oracle = oracle_u(&a, &b);
        prop_assert!((ab.u_a - oracle).abs() < 1e-9, "{} vs {}", ab.u_a, oracle);
        prop_assert!((ab.u - oracle.min(n1n2 - oracle)).abs() < 1e-9);
        Ok(())
    })
}

pub fn act_order_is_permutation() -> Result<(), String> {
    let acts = prop::collection::vec((0u32..5).prop_map(ExamId), 1..8);
    run((acts, arb_rules()), |(acts, rules)| {
        let order = optimal_act_order(&acts, &rules);
        let mut sorted = order.order.clone();
        sorted.sort();
        prop_assert_eq!(sorted, (0..acts.len()).collect::<Vec<_>>());
        if !order.has_cycle {
            // every precedence edge is respected
            let pos: Vec<usize> = {
                let mut p = vec![0; acts.len()];
                for (k, &i) in order.order.iter().enumerate() {
                    p[i] = k;
                }
                p
            };
            for rule in &rules {
                let (from, to) = match rule.logic {
                    RuleLogic::Before => (rule.first, rule.second),
                    RuleLogic::After => (rule.second, rule.first),
                    RuleLogic::Both => continue,
                };
                for i in 0..acts.len() {
                    for j in 0..acts.len() {
                        if i != j && acts[i] == from && acts[j] == to {
                            prop_assert!(pos[i] < pos[j]);
                        }
                    }
                }
            }
        }
        Ok(())
    })
}

/// Name and runner of every property suite.
pub type Suite = fn() -> Result<(), String>;

pub fn suites() -> Vec<(&'static str, Suite)> {
    vec![
        ("overlap symmetry", overlap_symmetry),
        ("span additivity", span_additivity),
        (
            "trip/travel thresholds at 120/180 min",
            trip_and_travel_thresholds,
        ),
        (
            "brute-force violation equivalence",
            violation_checkers_match_brute_force,
        ),
        ("fitness monotonicity and dominance", fitness_monotonicity),
        ("one-hot preservation", one_hot_preservation),
        ("ITR in [0,1)", itr_range),
        (
            "Mann-Whitney range/symmetry/oracle",
            mann_whitney_properties,
        ),
        ("act order is a permutation", act_order_is_permutation),
    ]
}

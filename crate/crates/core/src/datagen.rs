//! Seeded generator for the synthetic scheduling world: exam catalog,
//! incompatibility rules, slot inventory and patient requests.
//!
//! All randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded from
//! [`WorldConfig::seed`]; each generator uses its own stream so that, for
//! example, changing the rule count does not reshuffle the slot inventory.
//! Output is reproducible for a given build and seed.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, GenerateError};
use crate::model::{
    ExamId, ExamType, Facility, FacilityId, IncompatibilityRule, PractitionerId, RoomId, RuleLogic,
    ScheduleRequest, SlotId, Specialty, TimeSlot, MINUTES_PER_DAY,
};

const STREAM_RULES: u64 = 1;
const STREAM_SLOTS: u64 = 2;
const STREAM_REQUEST: u64 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorldConfig {
    pub seed: u64,
    pub horizon_days: u32,
    pub facilities: u32,
    pub rooms_per_facility: u32,
    /// Minutes of day at which rooms open.
    pub day_open: u32,
    pub day_close: u32,
    pub practitioner_pool: u32,
    pub rule_count: usize,
    pub specialties: Vec<Specialty>,
    pub exams_per_specialty: u32,
    pub duration_choices: Vec<u32>,
    pub gap_choices: Vec<u32>,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            horizon_days: 30,
            facilities: 4,
            rooms_per_facility: 3,
            day_open: 9 * 60,
            day_close: 21 * 60,
            practitioner_pool: 4,
            rule_count: 15,
            specialties: Specialty::ALL.to_vec(),
            exams_per_specialty: 10,
            duration_choices: vec![15, 30, 45, 60, 90],
            gap_choices: vec![30, 60, 1440],
        }
    }
}

impl WorldConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("horizon_days", self.horizon_days),
            ("facilities", self.facilities),
            ("rooms_per_facility", self.rooms_per_facility),
            ("practitioner_pool", self.practitioner_pool),
            ("exams_per_specialty", self.exams_per_specialty),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(ConfigError::invalid(format!("{name} must be positive")));
            }
        }
        if self.specialties.is_empty() {
            return Err(ConfigError::invalid("at least one specialty is required"));
        }
        if self.day_open >= self.day_close || self.day_close > MINUTES_PER_DAY {
            return Err(ConfigError::invalid(format!(
                "opening hours [{}, {}) are not a valid window within one day",
                self.day_open, self.day_close
            )));
        }
        if self.duration_choices.is_empty() || self.duration_choices.contains(&0) {
            return Err(ConfigError::invalid(
                "duration_choices must be non-empty and positive",
            ));
        }
        if self.gap_choices.is_empty() {
            return Err(ConfigError::invalid("gap_choices must be non-empty"));
        }
        Ok(())
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

/// A complete generated world, as persisted in `world.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct World {
    pub config: WorldConfig,
    pub exams: Vec<ExamType>,
    pub rules: Vec<IncompatibilityRule>,
    pub facilities: Vec<Facility>,
    pub slots: Vec<TimeSlot>,
}

impl World {
    pub fn generate(config: WorldConfig) -> Result<Self, GenerateError> {
        let exams = generate_catalog(&config)?;
        let rules = generate_rules(&exams, &config)?;
        let facilities = generate_facilities(&config)?;
        let slots = generate_slots(&exams, &config)?;
        Ok(Self {
            config,
            exams,
            rules,
            facilities,
            slots,
        })
    }
}

pub fn generate_catalog(config: &WorldConfig) -> Result<Vec<ExamType>, ConfigError> {
    config.validate()?;
    let mut exams =
        Vec::with_capacity(config.specialties.len() * config.exams_per_specialty as usize);
    for &specialty in &config.specialties {
        for n in 1..=config.exams_per_specialty {
            exams.push(ExamType {
                id: ExamId(exams.len() as u32),
                name: format!("{} exam {n}", specialty.name()),
                specialty,
            });
        }
    }
    Ok(exams)
}

pub fn generate_facilities(config: &WorldConfig) -> Result<Vec<Facility>, ConfigError> {
    config.validate()?;
    Ok((0..config.facilities)
        .map(|f| Facility {
            id: FacilityId(f),
            name: format!("Health center {}", f + 1),
            rooms: (0..config.rooms_per_facility)
                .map(|r| RoomId(f * config.rooms_per_facility + r))
                .collect(),
        })
        .collect())
}

/// Draws `rule_count` rules over distinct ordered exam pairs. `(A, B)` and
/// `(B, A)` may both appear; the same ordered pair never appears twice.
pub fn generate_rules(
    catalog: &[ExamType],
    config: &WorldConfig,
) -> Result<Vec<IncompatibilityRule>, GenerateError> {
    config.validate()?;
    if config.rule_count == 0 {
        return Ok(Vec::new());
    }
    if catalog.is_empty() {
        return Err(GenerateError::EmptyCatalog);
    }
    let n = catalog.len();
    let available = n * (n - 1);
    if config.rule_count > available {
        return Err(GenerateError::TooManyRules {
            requested: config.rule_count,
            available,
        });
    }

    let mut rng = config.rng(STREAM_RULES);
    let mut used = HashSet::with_capacity(config.rule_count);
    let mut rules = Vec::with_capacity(config.rule_count);
    while rules.len() < config.rule_count {
        let first = catalog[rng.gen_range(0..n)].id;
        let second = catalog[rng.gen_range(0..n)].id;
        if first == second || !used.insert((first, second)) {
            continue;
        }
        let logic = RuleLogic::ALL[rng.gen_range(0..RuleLogic::ALL.len())];
        let gap_minutes = *config
            .gap_choices
            .choose(&mut rng)
            .expect("validated non-empty");
        rules.push(IncompatibilityRule {
            first,
            second,
            logic,
            gap_minutes,
        });
    }
    Ok(rules)
}

/// Packs each (day, facility, room) back-to-back from opening time. Each slot
/// draws a duration, practitioner and exam uniformly; a room-day ends at the
/// first drawn duration that would run past closing time.
pub fn generate_slots(
    catalog: &[ExamType],
    config: &WorldConfig,
) -> Result<Vec<TimeSlot>, GenerateError> {
    config.validate()?;
    if catalog.is_empty() {
        return Err(GenerateError::EmptyCatalog);
    }
    let mut rng = config.rng(STREAM_SLOTS);
    let mut slots = Vec::new();
    for day in 0..config.horizon_days {
        let day_base = day * MINUTES_PER_DAY;
        for f in 0..config.facilities {
            for r in 0..config.rooms_per_facility {
                let room = RoomId(f * config.rooms_per_facility + r);
                let mut cursor = config.day_open;
                loop {
                    let duration = *config
                        .duration_choices
                        .choose(&mut rng)
                        .expect("validated non-empty");
                    if cursor + duration > config.day_close {
                        break;
                    }
                    let practitioner = PractitionerId(rng.gen_range(0..config.practitioner_pool));
                    let exam = catalog[rng.gen_range(0..catalog.len())].id;
                    slots.push(TimeSlot {
                        id: SlotId(slots.len() as u32),
                        exam,
                        facility: FacilityId(f),
                        room,
                        practitioner,
                        start: day_base + cursor,
                        duration_minutes: duration,
                    });
                    cursor += duration;
                }
            }
        }
    }
    Ok(slots)
}

/// Request of `n_acts` distinct exams starting on day 0, seeded from the world seed.
pub fn generate_request(
    catalog: &[ExamType],
    config: &WorldConfig,
    n_acts: usize,
) -> Result<ScheduleRequest, GenerateError> {
    sample_request(catalog, config.seed, n_acts)
}

/// Request of `n_acts` distinct exams drawn uniformly without replacement.
pub fn sample_request(
    catalog: &[ExamType],
    seed: u64,
    n_acts: usize,
) -> Result<ScheduleRequest, GenerateError> {
    if n_acts == 0 || n_acts > catalog.len() {
        return Err(GenerateError::ActCount {
            requested: n_acts,
            max: catalog.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(STREAM_REQUEST);
    let mut ids: Vec<ExamId> = catalog.iter().map(|e| e.id).collect();
    let (chosen, _) = ids.partial_shuffle(&mut rng, n_acts);
    Ok(ScheduleRequest::new(chosen.to_vec(), 0).expect("n_acts >= 1"))
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;

    fn default_world() -> World {
        World::generate(WorldConfig::with_seed(42)).unwrap()
    }

    #[test]
    fn catalog_has_fifty_exams_ten_per_specialty() {
        let catalog = generate_catalog(&WorldConfig::default()).unwrap();
        assert_eq!(catalog.len(), 50);
        for s in Specialty::ALL {
            assert_eq!(catalog.iter().filter(|e| e.specialty == s).count(), 10);
        }
        let ids: HashSet<_> = catalog.iter().map(|e| e.id).collect();
        assert_eq!(ids.len(), 50);
    }

    #[test]
    fn catalog_is_deterministic() {
        let cfg = WorldConfig::with_seed(9);
        assert_eq!(
            generate_catalog(&cfg).unwrap(),
            generate_catalog(&cfg).unwrap()
        );
    }

    #[test]
    fn zero_specialties_rejected() {
        let cfg = WorldConfig {
            specialties: vec![],
            ..WorldConfig::default()
        };
        assert!(generate_catalog(&cfg).is_err());
        assert!(World::generate(cfg).is_err());
    }

    #[test]
    fn invalid_hours_rejected() {
        let cfg = WorldConfig {
            day_open: 600,
            day_close: 600,
            ..WorldConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn default_rules() {
        let world = default_world();
        assert_eq!(world.rules.len(), 15);
        let mut pairs = HashSet::new();
        for rule in &world.rules {
            assert!([30, 60, 1440].contains(&rule.gap_minutes));
            assert_ne!(rule.first, rule.second);
            assert!(pairs.insert((rule.first, rule.second)));
        }
    }

    #[test]
    fn zero_rules() {
        let cfg = WorldConfig {
            rule_count: 0,
            ..WorldConfig::default()
        };
        let catalog = generate_catalog(&cfg).unwrap();
        assert!(generate_rules(&catalog, &cfg).unwrap().is_empty());
    }

    #[test]
    fn too_many_rules_is_an_error() {
        let cfg = WorldConfig {
            specialties: vec![Specialty::Radiology],
            exams_per_specialty: 3,
            rule_count: 7,
            ..WorldConfig::default()
        };
        let catalog = generate_catalog(&cfg).unwrap();
        assert_eq!(
            generate_rules(&catalog, &cfg),
            Err(GenerateError::TooManyRules {
                requested: 7,
                available: 6
            })
        );
        // exactly exhausting every ordered pair works
        let cfg = WorldConfig {
            rule_count: 6,
            ..cfg
        };
        let rules = generate_rules(&catalog, &cfg).unwrap();
        assert_eq!(rules.len(), 6);
    }

    #[test]
    fn rule_logic_is_uniform() {
        // One rule per seed, 10^4 seeds; each logic count ~ Binomial(n, 1/3).
        let n = 10_000;
        let base = WorldConfig {
            rule_count: 1,
            ..WorldConfig::default()
        };
        let catalog = generate_catalog(&base).unwrap();
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for seed in 0..n {
            let cfg = WorldConfig {
                seed,
                ..base.clone()
            };
            let rule = generate_rules(&catalog, &cfg).unwrap()[0];
            *counts.entry(format!("{:?}", rule.logic)).or_default() += 1;
        }
        let p = 1.0 / 3.0;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        assert_eq!(counts.len(), 3);
        for (logic, c) in counts {
            let dev = (c as f64 - n as f64 * p).abs();
            assert!(
                dev <= 3.0 * sigma,
                "{logic}: {c} deviates {dev} > 3σ={}",
                3.0 * sigma
            );
        }
    }

    #[test]
    fn slots_cover_every_day_and_facility() {
        let world = default_world();
        let seen: HashSet<(u32, FacilityId)> =
            world.slots.iter().map(|s| (s.day(), s.facility)).collect();
        assert_eq!(seen.len(), 30 * 4);
    }

    #[test]
    fn room_days_are_packed_without_overlap() {
        let world = default_world();
        let mut by_room_day: BTreeMap<(RoomId, u32), Vec<TimeSlot>> = BTreeMap::new();
        for s in &world.slots {
            assert!(s.minute_of_day() >= 540);
            assert!(s.minute_of_day() + s.duration_minutes <= 1260);
            assert!([15, 30, 45, 60, 90].contains(&s.duration_minutes));
            by_room_day.entry((s.room, s.day())).or_default().push(*s);
        }
        assert_eq!(by_room_day.len(), 30 * 12);
        for slots in by_room_day.values() {
            let total: u32 = slots.iter().map(|s| s.duration_minutes).sum();
            assert!(total <= 720);
            // all-90 worst case packs floor(720/90) = 8 slots
            assert!(slots.len() >= 8);
            assert_eq!(slots[0].minute_of_day(), 540);
            for w in slots.windows(2) {
                assert_eq!(w[0].end(), w[1].start, "back-to-back packing");
            }
        }
    }

    #[test]
    fn duration_frequencies_are_near_uniform() {
        let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
        let mut total = 0;
        for seed in 0..3 {
            let world = World::generate(WorldConfig::with_seed(seed)).unwrap();
            for s in &world.slots {
                *counts.entry(s.duration_minutes).or_default() += 1;
                total += 1;
            }
        }
        assert!(total >= 10_000);
        for (d, c) in counts {
            let freq = c as f64 / total as f64;
            assert!((freq - 0.2).abs() <= 0.02, "duration {d}: {freq}");
        }
    }

    #[test]
    fn world_is_deterministic() {
        let a = serde_json::to_string(&default_world()).unwrap();
        let b = serde_json::to_string(&default_world()).unwrap();
        assert_eq!(a, b);
        let other =
            serde_json::to_string(&World::generate(WorldConfig::with_seed(43)).unwrap()).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn requests() {
        let cfg = WorldConfig::with_seed(5);
        let catalog = generate_catalog(&cfg).unwrap();

        let one = generate_request(&catalog, &cfg, 1).unwrap();
        assert_eq!(one.acts.len(), 1);
        assert_eq!(one.start_date, 0);
        assert!(one.preferred_facilities.is_none());

        let five = generate_request(&catalog, &cfg, 5).unwrap();
        assert_eq!(five, generate_request(&catalog, &cfg, 5).unwrap());
        let distinct: HashSet<_> = five.acts.iter().collect();
        assert_eq!(distinct.len(), 5);

        let all = generate_request(&catalog, &cfg, 50).unwrap();
        let distinct: HashSet<_> = all.acts.iter().collect();
        assert_eq!(distinct.len(), 50);

        assert!(generate_request(&catalog, &cfg, 0).is_err());
        assert!(generate_request(&catalog, &cfg, 51).is_err());
    }
}

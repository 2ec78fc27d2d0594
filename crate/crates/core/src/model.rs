//! Domain vocabulary: exams, incompatibility rules, facilities, slots,
//! requests and schedules.
//!
//! Time is an integer count of minutes since day 0, 00:00 of the planning
//! horizon. Slot intervals are half-open: `[start, end)`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

pub const MINUTES_PER_DAY: u32 = 24 * 60;

macro_rules! id_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(
            Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_newtype!(
    /// Identifier of an exam type, unique within a catalog.
    ExamId
);
id_newtype!(FacilityId);
id_newtype!(
    /// Room identifier, unique across the whole world (not per facility).
    RoomId
);
id_newtype!(PractitionerId);
id_newtype!(SlotId);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Specialty {
    Radiology,
    Cardiology,
    Dermatology,
    GeneralPractice,
    Gastroenterology,
}

impl Specialty {
    pub const ALL: [Specialty; 5] = [
        Specialty::Radiology,
        Specialty::Cardiology,
        Specialty::Dermatology,
        Specialty::GeneralPractice,
        Specialty::Gastroenterology,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Specialty::Radiology => "Radiology",
            Specialty::Cardiology => "Cardiology",
            Specialty::Dermatology => "Dermatology",
            Specialty::GeneralPractice => "General Practice",
            Specialty::Gastroenterology => "Gastroenterology",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExamType {
    pub id: ExamId,
    pub name: String,
    pub specialty: Specialty,
}

/// How an incompatibility rule constrains the order of its two exams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleLogic {
    /// `first` must finish at least `gap` minutes before `second` starts.
    Before,
    /// `second` must finish at least `gap` minutes before `first` starts.
    After,
    /// Either order, separated by at least `gap` minutes.
    Both,
}

impl RuleLogic {
    pub const ALL: [RuleLogic; 3] = [RuleLogic::Before, RuleLogic::After, RuleLogic::Both];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IncompatibilityRule {
    pub first: ExamId,
    pub second: ExamId,
    pub logic: RuleLogic,
    pub gap_minutes: u32,
}

impl IncompatibilityRule {
    pub fn new(
        first: ExamId,
        second: ExamId,
        logic: RuleLogic,
        gap_minutes: u32,
    ) -> Result<Self, ModelError> {
        if first == second {
            return Err(ModelError::SelfRule(first));
        }
        Ok(Self {
            first,
            second,
            logic,
            gap_minutes,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Facility {
    pub id: FacilityId,
    pub name: String,
    pub rooms: Vec<RoomId>,
}

/// One bookable interval in the inventory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimeSlot {
    pub id: SlotId,
    pub exam: ExamId,
    pub facility: FacilityId,
    pub room: RoomId,
    pub practitioner: PractitionerId,
    /// Minutes since the start of the horizon.
    pub start: u32,
    pub duration_minutes: u32,
}

impl TimeSlot {
    pub fn end(&self) -> u32 {
        self.start + self.duration_minutes
    }

    pub fn day(&self) -> u32 {
        self.start / MINUTES_PER_DAY
    }

    pub fn minute_of_day(&self) -> u32 {
        self.start % MINUTES_PER_DAY
    }
}

/// Half-open interval intersection test.
pub fn slots_overlap(a: &TimeSlot, b: &TimeSlot) -> bool {
    a.start < b.end() && b.start < a.end()
}

/// Idle minutes between two slots; `earlier` must end no later than `later` starts.
pub fn gap_minutes(earlier: &TimeSlot, later: &TimeSlot) -> Result<u32, ModelError> {
    later
        .start
        .checked_sub(earlier.end())
        .ok_or(ModelError::Unsorted {
            earlier: earlier.id,
            later: later.id,
        })
}

/// Signed `later.start - earlier.end`; negative when the slots overlap.
pub(crate) fn signed_gap(earlier: &TimeSlot, later: &TimeSlot) -> i64 {
    i64::from(later.start) - i64::from(earlier.end())
}

/// Formats an absolute minute offset as `d<day>T<minute-of-day>`.
pub fn format_instant(minute: u32) -> String {
    format!("d{}T{}", minute / MINUTES_PER_DAY, minute % MINUTES_PER_DAY)
}

pub fn parse_instant(text: &str) -> Option<u32> {
    let rest = text.strip_prefix('d')?;
    let (day, minute) = rest.split_once('T')?;
    let day: u32 = day.parse().ok()?;
    let minute: u32 = minute.parse().ok()?;
    if minute >= MINUTES_PER_DAY {
        return None;
    }
    day.checked_mul(MINUTES_PER_DAY)?.checked_add(minute)
}

#[derive(Serialize, Deserialize)]
struct SlotRecord {
    id: SlotId,
    exam: ExamId,
    facility: FacilityId,
    room: RoomId,
    practitioner: PractitionerId,
    start: String,
    start_minute: u32,
    end_minute: u32,
    duration_minutes: u32,
}

impl Serialize for TimeSlot {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        SlotRecord {
            id: self.id,
            exam: self.exam,
            facility: self.facility,
            room: self.room,
            practitioner: self.practitioner,
            start: format_instant(self.start),
            start_minute: self.start,
            end_minute: self.end(),
            duration_minutes: self.duration_minutes,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TimeSlot {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;

        let rec = SlotRecord::deserialize(deserializer)?;
        let parsed = parse_instant(&rec.start)
            .ok_or_else(|| D::Error::custom(format!("bad instant {:?}", rec.start)))?;
        if parsed != rec.start_minute {
            return Err(D::Error::custom(format!(
                "slot {}: start {:?} disagrees with start_minute {}",
                rec.id, rec.start, rec.start_minute
            )));
        }
        if rec.end_minute != rec.start_minute + rec.duration_minutes {
            return Err(D::Error::custom(format!(
                "slot {}: end_minute is not start_minute + duration_minutes",
                rec.id
            )));
        }
        Ok(TimeSlot {
            id: rec.id,
            exam: rec.exam,
            facility: rec.facility,
            room: rec.room,
            practitioner: rec.practitioner,
            start: rec.start_minute,
            duration_minutes: rec.duration_minutes,
        })
    }
}

/// A patient's booking request: one act per entry of `acts`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleRequest {
    pub acts: Vec<ExamId>,
    /// Day index (0-based) from which slots may be booked.
    pub start_date: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preferred_facilities: Option<BTreeSet<FacilityId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preferred_practitioners: Option<BTreeSet<PractitionerId>>,
}

impl ScheduleRequest {
    pub fn new(acts: Vec<ExamId>, start_date: u32) -> Result<Self, ModelError> {
        if acts.is_empty() {
            return Err(ModelError::EmptyRequest);
        }
        Ok(Self {
            acts,
            start_date,
            preferred_facilities: None,
            preferred_practitioners: None,
        })
    }

    pub fn with_facilities(mut self, facilities: impl IntoIterator<Item = FacilityId>) -> Self {
        self.preferred_facilities = Some(facilities.into_iter().collect());
        self
    }

    pub fn with_practitioners(
        mut self,
        practitioners: impl IntoIterator<Item = PractitionerId>,
    ) -> Self {
        self.preferred_practitioners = Some(practitioners.into_iter().collect());
        self
    }

    pub fn act_count(&self) -> usize {
        self.acts.len()
    }

    /// Whether `slot` passes the date and preference filters (exam type not checked).
    pub fn admits(&self, slot: &TimeSlot) -> bool {
        slot.day() >= self.start_date
            && self
                .preferred_facilities
                .as_ref()
                .is_none_or(|set| set.contains(&slot.facility))
            && self
                .preferred_practitioners
                .as_ref()
                .is_none_or(|set| set.contains(&slot.practitioner))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub act: usize,
    pub slot: TimeSlot,
}

/// Slots assigned to the acts of a request. Acts without a slot are absent.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub assignments: Vec<Assignment>,
}

impl Schedule {
    pub fn new(assignments: Vec<Assignment>) -> Self {
        Self { assignments }
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Assignments ordered by slot start, ties by act index.
    pub fn chronological(&self) -> Vec<Assignment> {
        let mut sorted = self.assignments.clone();
        sorted.sort_by_key(|a| (a.slot.start, a.act));
        sorted
    }

    /// Checks that every act has at most one slot and every slot's exam
    /// matches the requested act.
    pub fn validate(&self, request: &ScheduleRequest) -> Result<(), ModelError> {
        let mut seen = vec![false; request.acts.len()];
        for a in &self.assignments {
            let Some(expected) = request.acts.get(a.act) else {
                return Err(ModelError::UnknownAct(a.act));
            };
            if std::mem::replace(&mut seen[a.act], true) {
                return Err(ModelError::DuplicateAct(a.act));
            }
            if a.slot.exam != *expected {
                return Err(ModelError::ExamMismatch {
                    act: a.act,
                    expected: *expected,
                    found: a.slot.exam,
                });
            }
        }
        Ok(())
    }
}

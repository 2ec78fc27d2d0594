//! Multi-appointment medical scheduling with a genetic algorithm.
//!
//! A request lists exams a patient needs; the world offers a 30-day inventory
//! of bookable slots across several health centers and a set of pairwise
//! incompatibility rules (ordering plus mandatory gaps). The GA picks one slot
//! per exam, trading off hard feasibility (no overlaps, rules respected)
//! against patient burden (trips, idle time, days until the first visit).
//!
//! Modules:
//! - [`model`]: shared vocabulary and time arithmetic
//! - [`datagen`]: seeded synthetic worlds and requests
//! - [`constraints`]: feasibility checks and trip segmentation
//! - [`fitness`]: penalty ledger and scalar fitness
//! - [`ga`]: encoding, operators and the generational loop
//! - [`baselines`]: FCFS and random choice
//! - [`metrics`]: idle time ratio, trip counts, Mann-Whitney U
//! - [`bench`]: single solves and multi-trial comparisons
//! - [`io`]: JSON/CSV persistence

pub mod baselines;
pub mod bench;
pub mod constraints;
pub mod datagen;
pub mod error;
pub mod fitness;
pub mod ga;
pub mod io;
pub mod metrics;
pub mod model;

pub use error::{BenchError, ConfigError, GenerateError, ModelError, SolveError, StatsError};

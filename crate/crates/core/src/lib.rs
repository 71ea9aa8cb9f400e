//! Joint leader selection and follower association for UE-centric
//! distributed learning.
//!
//! - [`model`]: instances (LII/LXI scores), assignments, objective and
//!   constraint checks.
//! - [`optimal`]: exact exhaustive search, a brute-force oracle and
//!   configuration counts.
//! - [`protocol`]: the two-phase distributed algorithm as per-UE state
//!   machines with capacity and edge-server fallback.
//! - [`harness`]: seeded episodes, message accounting and the benchmark
//!   pipeline.

pub mod error;
pub mod harness;
pub mod model;
pub mod optimal;
pub mod protocol;
pub mod rng;
pub mod score;

pub use error::{HarnessError, ModelError, ProtocolError, SolveError};
pub use model::{Assignment, Capacities, Instance, Mode, UeId};
pub use protocol::{run_episode, EpisodeOutcome, ProtocolConfig};
pub use score::{Score, Threshold};

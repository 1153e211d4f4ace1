//! Synthesis of small single-qubit rotations over Clifford+T with
//! non-deterministic gearbox circuits and a mantissa/exponent split.
//!
//! * [`ring`]: exact arithmetic in Z[i, 1/√2] and Z[√2]/√2^m.
//! * [`exact`]: exact unitaries and T-optimal exact synthesis of gate words.
//! * [`columns`]: breadth-first enumeration of reachable unitary columns.
//! * [`gearbox`]: gearbox angle algebra and static T accounting.
//! * [`sim`]: state-vector oracle for gearbox circuits.
//! * [`cost`]: analytic moments and Monte-Carlo cost of retry processes.
//! * [`float_synth`]: the floating-point rotation pipeline.
//! * [`search`]: minimal off-diagonal entries at a given optimal T-count.
//! * [`fit`]: log-linear least-squares fits.
//! * [`report`]: CSV emitters for tables and figure data.
//! * [`expr`]: angle expressions such as `pi/2^16`.
//! * [`reference`]: published values kept apart from computed ones.

pub mod columns;
pub mod cost;
pub mod error;
pub mod exact;
pub mod expr;
pub mod fit;
pub mod float_synth;
pub mod gearbox;
pub mod reference;
pub mod report;
pub mod ring;
pub mod search;
pub mod sim;

pub use error::{Error, Result};

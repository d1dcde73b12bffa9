//! Verification toolkit for the CANDO optrode-control state machine.
//!
//! The crate carries two executable views of the same controller:
//!
//! * [`op_model`] is an operational model. A record of state, event, command,
//!   flags, packet and byte counters is advanced by a control loop that runs
//!   each state's operation and then looks up the successor in a transition
//!   table.
//! * [`req`] is a round-based requirements engine. A data dictionary,
//!   named definitions and template-typed requirements are evaluated over
//!   start/end-of-round snapshots.
//!
//! [`gen`] translates an FSM description into a requirements model, and
//! [`trace`] runs both views for every initial command and diffs the traces.
//! [`fsm`] holds the structural invariant checks and [`spec_io`] the textual
//! `.fsm` format and the bundled controller description.

pub mod fsm;
pub mod gen;
pub mod op_model;
pub mod report;
pub mod req;
pub mod spec_io;
pub mod trace;
pub mod violation;

pub use fsm::{CommandId, EventId, FsmTable, Roster, StateId, StateKind, StateMap};
pub use spec_io::{load_bundled_cando, parse_spec, serialize_spec, SpecDocument};
pub use violation::{Violation, ViolationCode};

/// Maximum number of bytes in one packet transfer.
pub const PACKET_LENGTH: u32 = 3;
/// Maximum number of completed transmissions per command.
pub const MAX_COUNT: u32 = 2;

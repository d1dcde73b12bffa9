//! Executable operational model of the optrode controller.
//!
//! One call to [`step`] is one turn of the control loop: the successor of the
//! current state is looked up with the current event, then the entered
//! state's operation runs and sets the next event. A run therefore records,
//! per round, the state just entered together with the event its operation
//! produced.

use serde::Serialize;
use thiserror::Error;

use crate::fsm::{
    self, CommandId, EventId, FsmError, StateId, StateKind, CHIP_RST, CMD_FINISH, CONT,
    ERROR_EVENT, ERROR_STATE, GET_CMD, GET_CMD_E, SPI_RX_FINISH, SPI_TX_FINISH,
};
use crate::spec_io::SpecDocument;
use crate::trace::{Engine, PacketStyle, Termination, Trace, TraceMeta, TraceRow};
use crate::violation::{Violation, ViolationCode};
use crate::{MAX_COUNT, PACKET_LENGTH};

/// Symbols a packet's data field may carry.
pub const PACKET_DATA_SYMBOLS: [&str; 8] = [
    "LED_addr",
    "NO_LED_ADDR",
    "DAC_value",
    "diag_delay",
    "mem_len",
    "constructed_data",
    "fs_ratio_to_clk",
    "rec_config",
];

/// The only packet address symbol.
pub const OPTRODE_ADDR: &str = "Optrode_addr";

/// A bus packet. Every field may be nil.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Packet {
    pub addr: Option<String>,
    pub cmd: Option<String>,
    pub data: Option<String>,
}

impl Packet {
    pub fn is_empty(&self) -> bool {
        self.addr.is_none() && self.cmd.is_none() && self.data.is_none()
    }
}

/// The operational record advanced by the control loop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModelState {
    pub current_st: StateId,
    pub current_evt: EventId,
    pub current_cmd: CommandId,
    pub command_finish_flag: bool,
    pub optrode_tx_finish: bool,
    pub optrode_rx_finish: bool,
    pub s_packet: Option<Packet>,
    pub bytes_received: u32,
    pub bytes_sent: u32,
    pub tx_cnt: u32,
}

impl ModelState {
    fn check_bounds(&self) -> Result<(), OpError> {
        if self.bytes_sent > PACKET_LENGTH || self.bytes_received > PACKET_LENGTH {
            return Err(OpError::Invariant(format!(
                "byte counters ({}, {}) exceed PACKET_LENGTH {PACKET_LENGTH}",
                self.bytes_sent, self.bytes_received
            )));
        }
        if self.tx_cnt > MAX_COUNT {
            return Err(OpError::Invariant(format!(
                "tx_cnt {} exceeds MAX_COUNT {MAX_COUNT}",
                self.tx_cnt
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepOutcome {
    pub next: ModelState,
    pub fired_op: String,
    pub post_violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OpError {
    #[error(transparent)]
    Fsm(#[from] FsmError),
    #[error("no packet template for creator state `{0}`")]
    MissingPacketTemplate(String),
    #[error("state invariant broken: {0}")]
    Invariant(String),
    #[error("max_rounds must be at least 1")]
    ZeroBudget,
    #[error("round {round}: {source}")]
    AtRound {
        round: u32,
        #[source]
        source: Box<OpError>,
    },
}

pub fn init_model(spec: &SpecDocument, cmd: &str) -> Result<ModelState, OpError> {
    if !spec.roster.has_command(cmd) {
        return Err(FsmError::UnknownCommand(cmd.to_owned()).into());
    }
    Ok(ModelState {
        current_st: spec.initial.state.clone(),
        current_evt: spec.initial.event.clone(),
        current_cmd: CommandId::from(cmd),
        command_finish_flag: false,
        optrode_tx_finish: false,
        optrode_rx_finish: false,
        s_packet: None,
        bytes_received: 0,
        bytes_sent: 0,
        tx_cnt: 0,
    })
}

/// Successor lookup with the command table: under CONT, `get_cmd` goes to the
/// stage-one creator dispatched for the current command.
pub fn next_state(
    spec: &SpecDocument,
    event: &str,
    state: &str,
    cmd: &str,
) -> Result<StateId, FsmError> {
    if state == GET_CMD && event == CONT {
        if let Some(target) = spec.dispatch.get(cmd) {
            return Ok(target.clone());
        }
    }
    fsm::lookup_next(&spec.fsm, event, state).cloned()
}

/// Runs the operation of `m.current_st`. Returns the updated record and the
/// name of the operation executed.
pub fn state_operation(
    spec: &SpecDocument,
    m: &ModelState,
) -> Result<(ModelState, String), OpError> {
    m.check_bounds()?;
    let state = m.current_st.as_str();
    let kind = fsm::classify(&spec.roster, state)?;
    let mut n = m.clone();
    let op = match (state, kind) {
        (CMD_FINISH, _) => {
            n.command_finish_flag = true;
            n.current_evt = EventId::from(CONT);
            "finish_command"
        }
        (CHIP_RST, _) => {
            n.command_finish_flag = false;
            n.optrode_tx_finish = false;
            n.optrode_rx_finish = false;
            n.s_packet = None;
            n.bytes_received = 0;
            n.bytes_sent = 0;
            n.tx_cnt = 0;
            n.current_evt = EventId::from(GET_CMD_E);
            "reset_chip"
        }
        (_, StateKind::CreatorStage1) => {
            let t = template(spec, state)?;
            n.s_packet = Some(Packet {
                addr: t.addr.clone(),
                cmd: Some(t.cmd.clone().unwrap_or_else(|| m.current_cmd.to_string())),
                data: t.data.clone(),
            });
            n.current_evt = EventId::from(CONT);
            "create_packet_stage1"
        }
        (_, StateKind::CreatorStage2) | (_, StateKind::Creator) => {
            let t = template(spec, state)?;
            n.s_packet.get_or_insert_with(Packet::default).data = t.data.clone();
            n.current_evt = EventId::from(CONT);
            "create_packet_stage2"
        }
        (_, StateKind::Send) => {
            if m.bytes_sent < PACKET_LENGTH {
                n.bytes_sent += 1;
                n.optrode_tx_finish = false;
                n.current_evt = EventId::from(SPI_TX_FINISH);
                "send_byte"
            } else if m.tx_cnt < MAX_COUNT {
                n.optrode_tx_finish = true;
                n.tx_cnt += 1;
                n.bytes_sent = 0;
                n.current_evt = EventId::from(CONT);
                "send_complete"
            } else {
                n.optrode_tx_finish = true;
                n.bytes_sent = 0;
                n.current_evt = EventId::from(ERROR_EVENT);
                "send_overflow"
            }
        }
        (_, StateKind::Receive) => {
            if m.bytes_received < PACKET_LENGTH {
                n.bytes_received += 1;
                n.optrode_rx_finish = false;
                n.current_evt = EventId::from(SPI_RX_FINISH);
                "receive_byte"
            } else {
                n.optrode_rx_finish = true;
                n.bytes_received = 0;
                n.current_evt = EventId::from(CONT);
                "receive_complete"
            }
        }
        // start, get_cmd and error_ only signal continuation.
        _ => {
            n.current_evt = EventId::from(CONT);
            "continue"
        }
    };
    Ok((n, format!("{op}({state})")))
}

fn template<'a>(spec: &'a SpecDocument, state: &str) -> Result<&'a Packet, OpError> {
    spec.packets
        .get(state)
        .ok_or_else(|| OpError::MissingPacketTemplate(state.to_owned()))
}

/// Post-condition contract of a state operation, strengthened to name the
/// exact resulting event and the change of `tx_cnt` for every branch.
pub fn postcondition(kind: StateKind, before: &ModelState, after: &ModelState) -> Vec<Violation> {
    let state = before.current_st.as_str();
    let (event, tx_cnt) = match (state, kind) {
        (CHIP_RST, _) => (GET_CMD_E, 0),
        (CMD_FINISH, _) => (CONT, before.tx_cnt),
        (_, StateKind::Send) if before.bytes_sent < PACKET_LENGTH => (SPI_TX_FINISH, before.tx_cnt),
        (_, StateKind::Send) if before.tx_cnt < MAX_COUNT => (CONT, before.tx_cnt + 1),
        (_, StateKind::Send) => (ERROR_EVENT, before.tx_cnt),
        (_, StateKind::Receive) if before.bytes_received < PACKET_LENGTH => {
            (SPI_RX_FINISH, before.tx_cnt)
        }
        _ => (CONT, before.tx_cnt),
    };
    let mut out = Vec::new();
    if after.current_evt != event {
        out.push(
            Violation::new(
                ViolationCode::PostCondition,
                format!(
                    "operation of {state} must end with event {event}, got {}",
                    after.current_evt
                ),
            )
            .at(Some(after.current_evt.as_str()), Some(state), None),
        );
    }
    if after.tx_cnt != tx_cnt {
        out.push(
            Violation::new(
                ViolationCode::PostCondition,
                format!(
                    "operation of {state} must leave tx_cnt = {tx_cnt}, got {}",
                    after.tx_cnt
                ),
            )
            .at(None, Some(state), None),
        );
    }
    out
}

pub fn step(spec: &SpecDocument, m: &ModelState) -> Result<StepOutcome, OpError> {
    let target = next_state(
        spec,
        m.current_evt.as_str(),
        m.current_st.as_str(),
        m.current_cmd.as_str(),
    )?;
    let entered = ModelState {
        current_st: target,
        ..m.clone()
    };
    let (next, fired_op) = state_operation(spec, &entered)?;
    let kind = fsm::classify(&spec.roster, entered.current_st.as_str())?;
    let post_violations = postcondition(kind, &entered, &next);
    Ok(StepOutcome {
        next,
        fired_op,
        post_violations,
    })
}

pub fn trace_row(round: u32, m: &ModelState) -> TraceRow {
    TraceRow {
        round,
        state: m.current_st.to_string(),
        event: m.current_evt.to_string(),
        command: m.current_cmd.to_string(),
        packet: m.s_packet.clone().unwrap_or_default(),
        bytes_sent: m.bytes_sent,
        bytes_received: m.bytes_received,
        tx_cnt: m.tx_cnt,
        tx_finish: m.optrode_tx_finish,
        rx_finish: m.optrode_rx_finish,
        cmd_finish: m.command_finish_flag,
        attribution: Default::default(),
    }
}

/// Runs the control loop for `cmd`, one row per round starting with the
/// initial record. Stops when the finish flag is set, when `error_` is
/// entered, or after `max_rounds` rows.
pub fn run(spec: &SpecDocument, cmd: &str, max_rounds: u32) -> Result<Trace, OpError> {
    if max_rounds == 0 {
        return Err(OpError::ZeroBudget);
    }
    let mut m = init_model(spec, cmd)?;
    let mut rows = vec![trace_row(0, &m)];
    let termination = loop {
        if m.command_finish_flag {
            break Termination::CmdFinish;
        }
        if m.current_st == ERROR_STATE {
            break Termination::Error;
        }
        if rows.len() as u32 >= max_rounds {
            break Termination::Budget;
        }
        let round = rows.len() as u32;
        let out = step(spec, &m).map_err(|e| OpError::AtRound {
            round,
            source: Box::new(e),
        })?;
        m = out.next;
        rows.push(trace_row(round, &m));
    };
    Ok(Trace {
        meta: TraceMeta {
            engine: Some(Engine::Ops),
            command: Some(cmd.to_owned()),
            termination: Some(termination),
        },
        packet_style: PacketStyle::Composite,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec_io::load_bundled_cando;

    fn at(spec: &SpecDocument, state: &str, bytes_sent: u32) -> ModelState {
        let mut m = init_model(spec, "LED_ON_C").unwrap();
        m.current_st = StateId::from(state);
        m.bytes_sent = bytes_sent;
        m
    }

    #[test]
    fn init_values() {
        let spec = load_bundled_cando();
        let m = init_model(&spec, "LED_ON_C").unwrap();
        assert_eq!(m.current_st, "start");
        assert_eq!(m.current_evt, "CONT");
        assert_eq!(m.bytes_sent, 0);
        assert_eq!(m.s_packet, None);
        assert!(!m.command_finish_flag && !m.optrode_tx_finish && !m.optrode_rx_finish);
    }

    #[test]
    fn init_rejects_unknown_command() {
        let spec = load_bundled_cando();
        assert_eq!(
            init_model(&spec, "NOPE_C"),
            Err(OpError::Fsm(FsmError::UnknownCommand("NOPE_C".into())))
        );
    }

    #[test]
    fn send_byte_then_complete() {
        let spec = load_bundled_cando();
        let (n, _) = state_operation(&spec, &at(&spec, "send_packet_6", 2)).unwrap();
        assert_eq!((n.bytes_sent, n.current_evt.as_str()), (3, SPI_TX_FINISH));
        let (n, _) = state_operation(&spec, &at(&spec, "send_packet_6", 3)).unwrap();
        assert_eq!(n.bytes_sent, 0);
        assert!(n.optrode_tx_finish);
        assert_eq!(n.current_evt, CONT);
        assert_eq!(n.tx_cnt, 1);
    }

    #[test]
    fn send_past_max_count_raises_error_event() {
        let spec = load_bundled_cando();
        let mut m = at(&spec, "send_packet_6", 3);
        m.tx_cnt = MAX_COUNT;
        let (n, _) = state_operation(&spec, &m).unwrap();
        assert_eq!(n.current_evt, ERROR_EVENT);
        assert_eq!(n.tx_cnt, MAX_COUNT);
        assert!(postcondition(StateKind::Send, &m, &n).is_empty());
    }

    #[test]
    fn cmd_finish_sets_flag() {
        let spec = load_bundled_cando();
        let (n, _) = state_operation(&spec, &at(&spec, CMD_FINISH, 0)).unwrap();
        assert!(n.command_finish_flag);
    }

    #[test]
    fn creator_without_template_fails() {
        let mut spec = load_bundled_cando();
        spec.packets.remove("set_vLED");
        assert_eq!(
            state_operation(&spec, &at(&spec, "set_vLED", 0)).unwrap_err(),
            OpError::MissingPacketTemplate("set_vLED".into())
        );
    }

    #[test]
    fn step_examples() {
        let spec = load_bundled_cando();
        let mut m = at(&spec, "set_vLED", 0);
        assert_eq!(step(&spec, &m).unwrap().next.current_st, "send_packet_6");

        m.current_st = StateId::from("send_packet_6");
        m.current_evt = EventId::from(SPI_TX_FINISH);
        m.bytes_sent = 1;
        assert_eq!(step(&spec, &m).unwrap().next.current_st, "send_packet_6");

        m.current_st = StateId::from("receive_packet_27");
        m.current_evt = EventId::from(CONT);
        m.bytes_sent = 0;
        let out = step(&spec, &m).unwrap();
        assert_eq!(out.next.current_st, CMD_FINISH);
        assert!(out.post_violations.is_empty());
    }

    #[test]
    fn budget_of_one_row() {
        let spec = load_bundled_cando();
        let t = run(&spec, "LED_ON_C", 1).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.meta.termination, Some(Termination::Budget));
        assert_eq!(run(&spec, "LED_ON_C", 0), Err(OpError::ZeroBudget));
    }

    #[test]
    fn led_on_packet_contents() {
        let spec = load_bundled_cando();
        let t = run(&spec, "LED_ON_C", 500).unwrap();
        let row = t.rows.iter().find(|r| r.state == "set_vLED").unwrap();
        assert_eq!(row.packet.addr.as_deref(), Some(OPTRODE_ADDR));
        assert_eq!(row.packet.cmd.as_deref(), Some("LED_ON_C"));
        assert_eq!(row.packet.data.as_deref(), Some("LED_addr"));
        let row = t.rows.iter().find(|r| r.state == "set_sDac").unwrap();
        assert_eq!(row.packet.data.as_deref(), Some("DAC_value"));
        assert_eq!(t.rows.last().unwrap().tx_cnt, 2);
    }
}

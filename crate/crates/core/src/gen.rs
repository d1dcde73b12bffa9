//! Translation of an FSM description into a requirements model.
//!
//! States become modes of one exclusive component `fsm`; everything else is
//! a signal. Each table entry becomes a Trigger On Event requirement whose
//! trigger is a from-state definition conjoined with an event definition.
//! State operations become Case requirements keyed on the state being
//! entered, and counter updates go through `next_*` shadow signals that a
//! commit requirement copies back within the same round.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::fsm::{
    StateKind, CHIP_RST, CMD_FINISH, CONT, ERROR_EVENT, ERROR_STATE, GET_CMD, GET_CMD_E,
    SPI_RX_FINISH, SPI_TX_FINISH, START,
};
use crate::op_model::{Packet, OPTRODE_ADDR, PACKET_DATA_SYMBOLS};
use crate::req::{
    run_reqs, BinOp, CaseBranch, ConstantDef, DataDictionary, Definition, Effect, Env, Expr,
    HaltPolicy, ModeDef, ModelError, Requirement, RequirementsModel, Response, RunEnd, SignalDef,
    Template, TimePoint, TypeDef, TypeKind, Value,
};
use crate::spec_io::SpecDocument;
use crate::trace::{Engine, EngineRun, PacketStyle, Termination, Trace, TraceMeta, TraceRow};
use crate::{MAX_COUNT, PACKET_LENGTH};

/// Name of the mode component holding the FSM state.
pub const FSM_COMPONENT: &str = "fsm";

/// Artifact counts reported for the manually built model, for comparison.
pub const REFERENCE_COUNTS: GenCounts = GenCounts {
    data_records: 26,
    definitions: 105,
    requirements: 113,
};

pub mod sig {
    pub const CURRENT_EVENT: &str = "current_event";
    pub const CURRENT_COMMAND: &str = "current_command";
    pub const CMD_FINISH_FLAG: &str = "command_finish_flag";
    pub const TX_FINISH: &str = "optrode_TX_finish";
    pub const RX_FINISH: &str = "optrode_RX_finish";
    pub const BYTES_SENT: &str = "bytes_sent";
    pub const BYTES_RECEIVED: &str = "bytes_received";
    pub const TX_CNT: &str = "tx_cnt";
    pub const PACKET_ADDR: &str = "packet_addr";
    pub const PACKET_CMD: &str = "packet_cmd";
    pub const PACKET_DATA: &str = "packet_data";
    pub const NEXT_BYTES_SENT: &str = "next_bytes_sent";
    pub const NEXT_BYTES_RECEIVED: &str = "next_bytes_received";
    pub const NEXT_TX_CNT: &str = "next_tx_cnt";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GenCounts {
    pub data_records: usize,
    pub definitions: usize,
    pub requirements: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GenReport {
    pub counts: GenCounts,
    /// (event, from, to) → transition requirement id.
    #[serde(skip)]
    pub id_index: BTreeMap<(String, String, String), String>,
}

impl GenReport {
    /// Generated counts next to the reference counts.
    pub fn summary(&self) -> String {
        let c = self.counts;
        let r = REFERENCE_COUNTS;
        format!(
            "data records: {} (reference {})\ndefinitions: {} (reference {})\nrequirements: {} (reference {})\n",
            c.data_records, r.data_records, c.definitions, r.definitions, c.requirements, r.requirements
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("no packet template for creator state `{0}`")]
    MissingPacketTemplate(String),
    #[error("unknown command `{0}`")]
    UnknownCommand(String),
    #[error("generated model is invalid: {0}")]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedModel {
    pub model: RequirementsModel,
    pub report: GenReport,
}

fn from_def(s: &str) -> String {
    format!("from_{s}")
}

fn to_def(s: &str) -> String {
    format!("to_{s}")
}

fn evt_def(e: &str) -> String {
    format!("evt_{e}")
}

fn enter_def(s: &str) -> String {
    format!("enter_{s}")
}

fn from(s: &str) -> Expr {
    Expr::r(from_def(s))
}

fn to(s: &str) -> Expr {
    Expr::r(to_def(s))
}

fn evt(e: &str) -> Expr {
    Expr::r(evt_def(e))
}

fn kinds_present(spec: &SpecDocument) -> Vec<StateKind> {
    StateKind::ALL
        .into_iter()
        .filter(|k| spec.roster.states_of_kind(*k).next().is_some())
        .collect()
}

/// Group definition over the members of `kind` on one side (`from`/`to`/`enter`),
/// or `false` when the kind has no members.
fn group(spec: &SpecDocument, side: &str, kind: StateKind) -> Expr {
    if spec.roster.states_of_kind(kind).next().is_some() {
        Expr::r(format!("{side}_any_{}", kind.as_str()))
    } else {
        Expr::Bool(false)
    }
}

fn creators(spec: &SpecDocument, side: &str) -> Expr {
    Expr::any(
        [
            StateKind::Creator,
            StateKind::CreatorStage1,
            StateKind::CreatorStage2,
        ]
        .into_iter()
        .filter(|k| spec.roster.states_of_kind(*k).next().is_some())
        .map(|k| group(spec, side, k)),
    )
}

fn ty(name: &str, kind: TypeKind) -> TypeDef {
    TypeDef {
        name: name.into(),
        kind,
    }
}

fn signal(name: &str, ty: &str, bounds: Option<(i64, i64)>, initial: Value) -> SignalDef {
    SignalDef {
        name: name.into(),
        ty: ty.into(),
        min: bounds.map(|b| b.0),
        max: bounds.map(|b| b.1),
        initial,
    }
}

fn push_unique(v: &mut Vec<String>, s: &str) {
    if !v.iter().any(|x| x == s) {
        v.push(s.to_owned());
    }
}

pub fn gen_dictionary(spec: &SpecDocument) -> DataDictionary {
    let events: Vec<String> = spec.roster.event_ids().map(|e| e.to_string()).collect();
    let mut commands: Vec<String> = spec.roster.command_ids().map(|c| c.to_string()).collect();
    let mut addrs = vec![OPTRODE_ADDR.to_owned()];
    let mut data: Vec<String> = PACKET_DATA_SYMBOLS.iter().map(|s| s.to_string()).collect();
    for p in spec.packets.values() {
        if let Some(a) = &p.addr {
            push_unique(&mut addrs, a);
        }
        if let Some(c) = &p.cmd {
            push_unique(&mut commands, c);
        }
        if let Some(d) = &p.data {
            push_unique(&mut data, d);
        }
    }
    let pl = i64::from(PACKET_LENGTH);
    let mc = i64::from(MAX_COUNT);
    let zero = Value::Int(0);
    let f = Value::Bool(false);
    DataDictionary {
        types: vec![
            ty("Flag", TypeKind::Bool),
            ty(
                "Bytes",
                TypeKind::Int {
                    min: Some(0),
                    max: Some(pl),
                },
            ),
            ty(
                "Count",
                TypeKind::Int {
                    min: Some(0),
                    max: Some(mc),
                },
            ),
            ty("Event", TypeKind::Enum(events)),
            ty("Command", TypeKind::Enum(commands)),
            ty("Address", TypeKind::Enum(addrs)),
            ty("PacketData", TypeKind::Enum(data)),
        ],
        constants: vec![
            ConstantDef {
                name: "PACKET_LENGTH".into(),
                ty: "int".into(),
                value: Value::Int(pl),
                min: Some(1),
                max: None,
                tolerance: None,
            },
            ConstantDef {
                name: "MAX_COUNT".into(),
                ty: "int".into(),
                value: Value::Int(mc),
                min: Some(1),
                max: None,
                tolerance: None,
            },
        ],
        signals: vec![
            signal(
                sig::CURRENT_EVENT,
                "Event",
                None,
                Value::Sym(spec.initial.event.to_string()),
            ),
            signal(sig::CURRENT_COMMAND, "Command", None, Value::Nil),
            signal(sig::CMD_FINISH_FLAG, "Flag", None, f.clone()),
            signal(sig::TX_FINISH, "Flag", None, f.clone()),
            signal(sig::RX_FINISH, "Flag", None, f),
            signal(sig::BYTES_SENT, "Bytes", Some((0, pl)), zero.clone()),
            signal(sig::BYTES_RECEIVED, "Bytes", Some((0, pl)), zero.clone()),
            signal(sig::TX_CNT, "Count", Some((0, mc)), zero.clone()),
            signal(sig::PACKET_ADDR, "Address", None, Value::Nil),
            signal(sig::PACKET_CMD, "Command", None, Value::Nil),
            signal(sig::PACKET_DATA, "PacketData", None, Value::Nil),
            signal(sig::NEXT_BYTES_SENT, "Bytes", Some((0, pl)), zero.clone()),
            signal(
                sig::NEXT_BYTES_RECEIVED,
                "Bytes",
                Some((0, pl)),
                zero.clone(),
            ),
            signal(sig::NEXT_TX_CNT, "Count", Some((0, mc)), zero),
        ],
        modes: vec![ModeDef {
            component: FSM_COMPONENT.into(),
            modes: spec.roster.state_ids().map(|s| s.to_string()).collect(),
            initial: vec![spec.initial.state.to_string()],
        }],
    }
}

/// From/to definitions per state, from/to groups per non-empty kind, and
/// the send and receive identity-map definitions.
pub fn gen_definitions(spec: &SpecDocument) -> Vec<Definition> {
    let mut out = Vec::new();
    for s in spec.roster.state_ids() {
        let s = s.as_str();
        out.push(Definition::new(
            from_def(s),
            format!("The fsm is in state {s} at the start of the round"),
            Expr::mode_at(FSM_COMPONENT, s, TimePoint::Start),
        ));
        out.push(Definition::new(
            to_def(s),
            format!("The fsm is in state {s} at the end of the round"),
            Expr::mode_at(FSM_COMPONENT, s, TimePoint::End),
        ));
    }
    for k in kinds_present(spec) {
        let members: Vec<&str> = spec.roster.states_of_kind(k).map(|s| s.as_str()).collect();
        for (side, when) in [("from", "start"), ("to", "end")] {
            out.push(Definition::new(
                format!("{side}_any_{}", k.as_str()),
                format!(
                    "The fsm is in a {} state at the {when} of the round",
                    k.as_str()
                ),
                Expr::any(members.iter().map(|s| Expr::r(format!("{side}_{s}")))),
            ));
        }
    }
    for k in [StateKind::Send, StateKind::Receive] {
        out.push(Definition::new(
            format!("idmap_{}", k.as_str()),
            format!(
                "Every {} state held at the start of the round is held at its end",
                k.as_str()
            ),
            Expr::all(
                spec.roster
                    .states_of_kind(k)
                    .map(|s| Expr::implies(from(s.as_str()), to(s.as_str()))),
            ),
        ));
    }
    out
}

/// Number of definitions [`gen_definitions`] yields.
pub fn definition_count(spec: &SpecDocument) -> usize {
    2 * spec.roster.states.len() + 2 * kinds_present(spec).len() + 2
}

/// Commands `get_cmd` dispatches to a state other than the table's own
/// CONT successor, in roster order.
fn dispatch_terms(spec: &SpecDocument) -> Vec<(String, String)> {
    spec.roster
        .command_ids()
        .filter_map(|c| {
            spec.dispatch
                .get(c.as_str())
                .map(|t| (c.to_string(), t.to_string()))
        })
        .collect()
}

fn command_is(c: &str) -> Expr {
    Expr::eq(Expr::r(sig::CURRENT_COMMAND), Expr::sym(c))
}

/// Event definitions and, per state T, `enter_T`: the start-of-round
/// condition under which the table moves the fsm into T.
pub fn gen_support_definitions(spec: &SpecDocument) -> Vec<Definition> {
    let mut out: Vec<Definition> = spec
        .roster
        .event_ids()
        .map(|e| {
            Definition::new(
                evt_def(e.as_str()),
                format!("The current event is {e}"),
                Expr::eq(Expr::r(sig::CURRENT_EVENT), Expr::sym(e.as_str())),
            )
        })
        .collect();
    let dispatch = dispatch_terms(spec);
    let mut terms: BTreeMap<String, Vec<Expr>> = BTreeMap::new();
    for (e, s, t) in ordered_entries(spec) {
        let base = Expr::and(from(&s), evt(&e));
        if s == GET_CMD && e == CONT && !dispatch.is_empty() {
            for (c, target) in &dispatch {
                terms
                    .entry(target.clone())
                    .or_default()
                    .push(Expr::and(base.clone(), command_is(c)));
            }
            let undispatched = Expr::not(Expr::any(dispatch.iter().map(|(c, _)| command_is(c))));
            terms
                .entry(t)
                .or_default()
                .push(Expr::and(base, undispatched));
        } else {
            terms.entry(t).or_default().push(base);
        }
    }
    for s in spec.roster.state_ids() {
        let s = s.as_str();
        out.push(Definition::new(
            enter_def(s),
            format!("The fsm enters state {s} in this round"),
            Expr::any(terms.remove(s).unwrap_or_default()),
        ));
    }
    for k in [StateKind::Send, StateKind::Receive] {
        out.push(Definition::new(
            format!("enter_any_{}", k.as_str()),
            format!("The fsm enters a {} state in this round", k.as_str()),
            Expr::any(
                spec.roster
                    .states_of_kind(k)
                    .map(|s| Expr::r(enter_def(s.as_str()))),
            ),
        ));
    }
    out
}

/// Table entries ordered by event roster index, then source roster index.
fn ordered_entries(spec: &SpecDocument) -> Vec<(String, String, String)> {
    let mut v: Vec<(usize, usize, String, String, String)> = spec
        .fsm
        .entries()
        .map(|(e, s, t)| {
            (
                spec.roster.event_index(e.as_str()).unwrap_or(usize::MAX),
                spec.roster.state_index(s.as_str()).unwrap_or(usize::MAX),
                e.to_string(),
                s.to_string(),
                t.to_string(),
            )
        })
        .collect();
    v.sort();
    v.into_iter().map(|(_, _, e, s, t)| (e, s, t)).collect()
}

/// Transition requirement id: one-based event index, then two-digit
/// one-based source state index.
pub fn transition_id(spec: &SpecDocument, event: &str, from: &str) -> String {
    let e = spec.roster.event_index(event).map_or(0, |i| i + 1);
    let s = spec.roster.state_index(from).map_or(0, |i| i + 1);
    format!("{e}.{s:02}")
}

fn activate(t: &str) -> Effect {
    Effect::Activate {
        component: FSM_COMPONENT.into(),
        mode: t.into(),
    }
}

fn assign(target: &str, value: Expr) -> Effect {
    Effect::Assign {
        target: target.into(),
        value,
    }
}

fn set_event(e: &str) -> Effect {
    assign(sig::CURRENT_EVENT, Expr::sym(e))
}

fn sym_or_nil(v: &Option<String>) -> Expr {
    v.as_ref().map_or(Expr::Nil, |s| Expr::sym(s.as_str()))
}

fn req(id: impl Into<String>, title: impl Into<String>, template: Template) -> Requirement {
    Requirement {
        id: id.into(),
        title: title.into(),
        template,
    }
}

fn when(id: &str, title: &str, guard: Expr, required: Expr) -> Requirement {
    req(id, title, Template::When { guard, required })
}

fn trigger(
    id: &str,
    title: &str,
    trigger: Expr,
    effects: Vec<Effect>,
    within: Option<u32>,
) -> Requirement {
    req(
        id,
        title,
        Template::TriggerOnEvent {
            trigger,
            response: Response::Effects(effects),
            within,
            at_some_point: false,
        },
    )
}

fn lt(name: &str, bound: &str) -> Expr {
    Expr::bin(BinOp::Lt, Expr::r(name), Expr::r(bound))
}

fn plus_one(name: &str) -> Expr {
    Expr::bin(BinOp::Add, Expr::r(name), Expr::Int(1))
}

fn op_branches(
    spec: &SpecDocument,
    state: &str,
    kind: StateKind,
) -> Result<Vec<CaseBranch>, GenError> {
    use sig::*;
    let branch = |condition: Expr, effects: Vec<Effect>| CaseBranch { condition, effects };
    let template = |s: &str| -> Result<&Packet, GenError> {
        spec.packets
            .get(s)
            .ok_or_else(|| GenError::MissingPacketTemplate(s.to_owned()))
    };
    Ok(match (state, kind) {
        (CMD_FINISH, _) => vec![branch(
            Expr::Bool(true),
            vec![assign(CMD_FINISH_FLAG, Expr::Bool(true)), set_event(CONT)],
        )],
        (CHIP_RST, _) => vec![branch(
            Expr::Bool(true),
            vec![
                assign(CMD_FINISH_FLAG, Expr::Bool(false)),
                assign(TX_FINISH, Expr::Bool(false)),
                assign(RX_FINISH, Expr::Bool(false)),
                assign(PACKET_ADDR, Expr::Nil),
                assign(PACKET_CMD, Expr::Nil),
                assign(PACKET_DATA, Expr::Nil),
                assign(NEXT_BYTES_RECEIVED, Expr::Int(0)),
                assign(NEXT_BYTES_SENT, Expr::Int(0)),
                assign(NEXT_TX_CNT, Expr::Int(0)),
                set_event(GET_CMD_E),
            ],
        )],
        (_, StateKind::CreatorStage1) => {
            let t = template(state)?;
            let cmd = t
                .cmd
                .as_ref()
                .map_or(Expr::r(CURRENT_COMMAND), |c| Expr::sym(c.as_str()));
            vec![branch(
                Expr::Bool(true),
                vec![
                    assign(PACKET_ADDR, sym_or_nil(&t.addr)),
                    assign(PACKET_CMD, cmd),
                    assign(PACKET_DATA, sym_or_nil(&t.data)),
                    set_event(CONT),
                ],
            )]
        }
        (_, StateKind::CreatorStage2) | (_, StateKind::Creator) => {
            let t = template(state)?;
            vec![branch(
                Expr::Bool(true),
                vec![assign(PACKET_DATA, sym_or_nil(&t.data)), set_event(CONT)],
            )]
        }
        (_, StateKind::Send) => vec![
            branch(
                lt(BYTES_SENT, "PACKET_LENGTH"),
                vec![
                    assign(NEXT_BYTES_SENT, plus_one(BYTES_SENT)),
                    assign(NEXT_TX_CNT, Expr::r(TX_CNT)),
                    assign(TX_FINISH, Expr::Bool(false)),
                    set_event(SPI_TX_FINISH),
                ],
            ),
            branch(
                lt(TX_CNT, "MAX_COUNT"),
                vec![
                    assign(NEXT_BYTES_SENT, Expr::Int(0)),
                    assign(NEXT_TX_CNT, plus_one(TX_CNT)),
                    assign(TX_FINISH, Expr::Bool(true)),
                    set_event(CONT),
                ],
            ),
            branch(
                Expr::Bool(true),
                vec![
                    assign(NEXT_BYTES_SENT, Expr::Int(0)),
                    assign(NEXT_TX_CNT, Expr::r(TX_CNT)),
                    assign(TX_FINISH, Expr::Bool(true)),
                    set_event(ERROR_EVENT),
                ],
            ),
        ],
        (_, StateKind::Receive) => vec![
            branch(
                lt(BYTES_RECEIVED, "PACKET_LENGTH"),
                vec![
                    assign(NEXT_BYTES_RECEIVED, plus_one(BYTES_RECEIVED)),
                    assign(RX_FINISH, Expr::Bool(false)),
                    set_event(SPI_RX_FINISH),
                ],
            ),
            branch(
                Expr::Bool(true),
                vec![
                    assign(NEXT_BYTES_RECEIVED, Expr::Int(0)),
                    assign(RX_FINISH, Expr::Bool(true)),
                    set_event(CONT),
                ],
            ),
        ],
        _ => vec![branch(Expr::Bool(true), vec![set_event(CONT)])],
    })
}

fn event_is(e: &str) -> Expr {
    Expr::eq(Expr::r(sig::CURRENT_EVENT), Expr::sym(e))
}

fn tx_cnt_is(e: Expr) -> Expr {
    Expr::eq(Expr::r(sig::TX_CNT), e)
}

fn old(name: &str) -> Expr {
    Expr::Old(name.into())
}

/// Exact resulting event and `tx_cnt` of the operation of `state`.
fn postcondition(state: &str, kind: StateKind) -> Expr {
    use sig::*;
    let same = || tx_cnt_is(old(TX_CNT));
    let outcome = |e: &str, tx: Expr| Expr::and(event_is(e), tx);
    let old_lt = |name: &str, bound: &str| Expr::bin(BinOp::Lt, old(name), Expr::r(bound));
    match (state, kind) {
        (CHIP_RST, _) => outcome(GET_CMD_E, tx_cnt_is(Expr::Int(0))),
        (CMD_FINISH, _) => outcome(CONT, same()),
        (_, StateKind::Send) => Expr::all([
            Expr::implies(
                old_lt(BYTES_SENT, "PACKET_LENGTH"),
                outcome(SPI_TX_FINISH, same()),
            ),
            Expr::implies(
                Expr::and(
                    Expr::not(old_lt(BYTES_SENT, "PACKET_LENGTH")),
                    old_lt(TX_CNT, "MAX_COUNT"),
                ),
                outcome(
                    CONT,
                    tx_cnt_is(Expr::bin(BinOp::Add, old(TX_CNT), Expr::Int(1))),
                ),
            ),
            Expr::implies(
                Expr::and(
                    Expr::not(old_lt(BYTES_SENT, "PACKET_LENGTH")),
                    Expr::not(old_lt(TX_CNT, "MAX_COUNT")),
                ),
                outcome(ERROR_EVENT, same()),
            ),
        ]),
        (_, StateKind::Receive) => Expr::all([
            Expr::implies(
                old_lt(BYTES_RECEIVED, "PACKET_LENGTH"),
                outcome(SPI_RX_FINISH, same()),
            ),
            Expr::implies(
                Expr::not(old_lt(BYTES_RECEIVED, "PACKET_LENGTH")),
                outcome(CONT, same()),
            ),
        ]),
        _ => outcome(CONT, same()),
    }
}

fn constraint_monitors(spec: &SpecDocument) -> Vec<Requirement> {
    use StateKind::*;
    let has = |s: &str| spec.roster.has_state(s);
    let has_event = |e: &str| spec.roster.has_event(e);
    let to_any = |names: &[&str]| Expr::any(names.iter().filter(|s| has(s)).map(|s| to(s)));
    let mut out = Vec::new();
    if has(START) {
        out.push(when(
            "CK.1.2",
            "start only maps to get_cmd or error_",
            from(START),
            to_any(&[GET_CMD, ERROR_STATE]),
        ));
    }
    if has(CHIP_RST) {
        out.push(when(
            "CK.1.3",
            "chip_rst only maps to get_cmd or error_",
            from(CHIP_RST),
            to_any(&[GET_CMD, ERROR_STATE]),
        ));
    }
    if has(ERROR_STATE) {
        out.push(when(
            "CK.1.4",
            "error_ only maps to get_cmd, error_ or chip_rst",
            from(ERROR_STATE),
            to_any(&[GET_CMD, ERROR_STATE, CHIP_RST]),
        ));
    }
    if has(CMD_FINISH) {
        out.push(when(
            "CK.1.5",
            "cmd_finish only maps to error_",
            from(CMD_FINISH),
            to_any(&[ERROR_STATE]),
        ));
    }
    let to_error = to_any(&[ERROR_STATE]);
    out.push(when(
        "CK.1.6",
        "packet creators only map to send states or error_",
        creators(spec, "from"),
        Expr::or(group(spec, "to", Send), to_error.clone()),
    ));
    out.push(when(
        "CK.1.7",
        "receive states only map to stage-two creators, cmd_finish or error_",
        group(spec, "from", Receive),
        Expr::any([
            group(spec, "to", CreatorStage2),
            to_any(&[CMD_FINISH, ERROR_STATE]),
            Expr::r("idmap_receive"),
        ]),
    ));
    if has(GET_CMD) {
        out.push(when(
            "CK.1.8",
            "get_cmd only maps to stage-one creators or error_",
            from(GET_CMD),
            Expr::or(group(spec, "to", CreatorStage1), to_error),
        ));
    }
    if has_event(CONT) {
        out.push(when(
            "CK.2",
            "under CONT send states map to receive states",
            Expr::and(group(spec, "from", Send), evt(CONT)),
            group(spec, "to", Receive),
        ));
    }
    if has_event(SPI_TX_FINISH) {
        out.push(when(
            "CK.3",
            "under SPI_TX_FINISH send states map to themselves",
            Expr::and(group(spec, "from", Send), evt(SPI_TX_FINISH)),
            Expr::r("idmap_send"),
        ));
    }
    if has_event(SPI_RX_FINISH) {
        out.push(when(
            "CK.4",
            "under SPI_RX_FINISH receive states map to themselves",
            Expr::and(group(spec, "from", Receive), evt(SPI_RX_FINISH)),
            Expr::r("idmap_receive"),
        ));
    }
    if has_event(CONT) {
        out.push(when(
            "CK.5",
            "under CONT packet creators map to send states",
            Expr::and(creators(spec, "from"), evt(CONT)),
            group(spec, "to", Send),
        ));
        let other_errors: Vec<Expr> = spec
            .roster
            .states_of_kind(Error)
            .filter(|s| s.as_str() != ERROR_STATE)
            .map(|s| from(s.as_str()))
            .collect();
        if !other_errors.is_empty() && has(ERROR_STATE) {
            out.push(when(
                "CK.6",
                "under CONT error states map to error_",
                Expr::and(Expr::any(other_errors), evt(CONT)),
                to(ERROR_STATE),
            ));
        }
        out.push(when(
            "CK.11",
            "under CONT receive states map to stage-two creators or cmd_finish",
            Expr::and(group(spec, "from", Receive), evt(CONT)),
            Expr::or(group(spec, "to", CreatorStage2), to_any(&[CMD_FINISH])),
        ));
    }
    out
}

fn named_transitions(spec: &SpecDocument) -> Vec<Requirement> {
    [
        ("TR.7", CONT, START, GET_CMD),
        ("TR.8", CONT, ERROR_STATE, CHIP_RST),
        ("TR.9", GET_CMD_E, ERROR_STATE, GET_CMD),
        ("TR.10", GET_CMD_E, CHIP_RST, GET_CMD),
    ]
    .into_iter()
    .filter(|(_, e, s, t)| {
        spec.roster.has_event(e) && spec.roster.has_state(s) && spec.roster.has_state(t)
    })
    .map(|(id, e, s, t)| {
        trigger(
            id,
            &format!("under {e} {s} maps to {t}"),
            Expr::and(from(s), evt(e)),
            vec![activate(t)],
            None,
        )
    })
    .collect()
}

fn state_num(spec: &SpecDocument, s: &str) -> String {
    format!("{:02}", spec.roster.state_index(s).map_or(0, |i| i + 1))
}

pub fn gen_requirements(spec: &SpecDocument) -> Result<(Vec<Requirement>, GenReport), GenError> {
    let mut reqs = Vec::new();
    let mut id_index = BTreeMap::new();
    let dispatch = dispatch_terms(spec);

    for (e, s, t) in ordered_entries(spec) {
        let id = transition_id(spec, &e, &s);
        let title = format!("{s} to {t}");
        let trig = Expr::and(from(&s), evt(&e));
        let r = if s == GET_CMD && e == CONT && !dispatch.is_empty() {
            let mut branches: Vec<CaseBranch> = dispatch
                .iter()
                .map(|(c, target)| CaseBranch {
                    condition: command_is(c),
                    effects: vec![activate(target)],
                })
                .collect();
            branches.push(CaseBranch {
                condition: Expr::Bool(true),
                effects: vec![activate(&t)],
            });
            req(
                id.clone(),
                title,
                Template::Case {
                    guard: trig,
                    branches,
                    total: true,
                },
            )
        } else {
            trigger(&id, &title, trig, vec![activate(&t)], None)
        };
        reqs.push(r);
        id_index.insert((e, s, t), id);
    }

    reqs.push(req(
        "MS.01",
        "the fsm has exactly one active state",
        Template::ModeSet {
            component: FSM_COMPONENT.into(),
            exclusive: true,
        },
    ));
    if spec.roster.has_state(START) {
        reqs.push(req(
            "EV.01",
            "no state maps to start",
            Template::Every {
                required: Expr::not(to(START)),
            },
        ));
    }
    reqs.extend(constraint_monitors(spec));
    reqs.extend(named_transitions(spec));

    for (i, s) in spec.roster.states.iter().enumerate() {
        let state = s.id.as_str();
        reqs.push(req(
            format!("OP.{:02}", i + 1),
            format!("operation of {state}"),
            Template::Case {
                guard: Expr::r(enter_def(state)),
                branches: op_branches(spec, state, s.kind)?,
                total: true,
            },
        ));
    }

    let commits = [
        (
            "CM.01",
            sig::BYTES_SENT,
            sig::NEXT_BYTES_SENT,
            StateKind::Send,
        ),
        ("CM.02", sig::TX_CNT, sig::NEXT_TX_CNT, StateKind::Send),
        (
            "CM.03",
            sig::BYTES_RECEIVED,
            sig::NEXT_BYTES_RECEIVED,
            StateKind::Receive,
        ),
    ];
    for (id, target, source, kind) in commits {
        let mut guard = Expr::r(format!("enter_any_{}", kind.as_str()));
        if spec.roster.has_state(CHIP_RST) {
            guard = Expr::or(guard, Expr::r(enter_def(CHIP_RST)));
        }
        reqs.push(trigger(
            id,
            &format!("{target} takes {source}"),
            guard,
            vec![Effect::Sync {
                target: target.into(),
                source: source.into(),
            }],
            Some(0),
        ));
    }

    for s in &spec.roster.states {
        let state = s.id.as_str();
        reqs.push(when(
            &format!("PC.{}", state_num(spec, state)),
            &format!("outcome of {state}"),
            Expr::r(enter_def(state)),
            postcondition(state, s.kind),
        ));
    }

    let report = GenReport {
        counts: GenCounts {
            data_records: 0,
            definitions: 0,
            requirements: reqs.len(),
        },
        id_index,
    };
    Ok((reqs, report))
}

/// Builds and validates the full requirements model for `spec`.
pub fn generate_model(spec: &SpecDocument) -> Result<GeneratedModel, GenError> {
    let dictionary = gen_dictionary(spec);
    let mut definitions = gen_definitions(spec);
    definitions.extend(gen_support_definitions(spec));
    let (requirements, mut report) = gen_requirements(spec)?;
    report.counts.data_records = dictionary.record_count();
    report.counts.definitions = definitions.len();
    let model = RequirementsModel::new(dictionary, definitions, requirements)?;
    Ok(GeneratedModel { model, report })
}

/// Initial environment of a run for `cmd`.
pub fn initial_env(model: &RequirementsModel, cmd: &str) -> Env {
    let mut env = Env::initial(model);
    env.set_signal(sig::CURRENT_COMMAND, Value::sym(cmd));
    env
}

/// Whether a run of the generated model is over: the finish flag is set or
/// the fsm is in `error_`.
pub fn run_finished(env: &Env) -> bool {
    env.signal(sig::CMD_FINISH_FLAG) == &Value::Bool(true)
        || env.mode_active(FSM_COMPONENT, ERROR_STATE)
}

fn sym_opt(v: &Value) -> Option<String> {
    v.as_sym().map(str::to_owned)
}

fn nat(v: &Value) -> u32 {
    v.as_int().and_then(|i| u32::try_from(i).ok()).unwrap_or(0)
}

/// Trace field a record of the generated model is observed as.
pub fn trace_field(record: &str) -> Option<&'static str> {
    use sig::*;
    Some(match record {
        FSM_COMPONENT => "state",
        CURRENT_EVENT => "event",
        CURRENT_COMMAND => "command",
        PACKET_ADDR => "packet_addr",
        PACKET_CMD => "packet_cmd",
        PACKET_DATA => "packet_data",
        BYTES_SENT => "bytes_sent",
        BYTES_RECEIVED => "bytes_received",
        TX_CNT => "tx_cnt",
        TX_FINISH => "tx_finish",
        RX_FINISH => "rx_finish",
        CMD_FINISH_FLAG => "cmd_finish",
        _ => return None,
    })
}

/// Projects an environment of the generated model onto a trace row.
pub fn project(round: u32, env: &Env, changes: Option<&BTreeMap<String, Vec<String>>>) -> TraceRow {
    use sig::*;
    let state = match env.modes.get(FSM_COMPONENT) {
        Some(set) => set.iter().cloned().collect::<Vec<_>>().join("|"),
        None => String::new(),
    };
    let attribution = changes
        .map(|c| {
            c.iter()
                .filter_map(|(rec, ids)| trace_field(rec).map(|f| (f.to_owned(), ids.clone())))
                .collect()
        })
        .unwrap_or_default();
    TraceRow {
        round,
        state,
        event: env.signal(CURRENT_EVENT).as_sym().unwrap_or("").to_owned(),
        command: env
            .signal(CURRENT_COMMAND)
            .as_sym()
            .unwrap_or("")
            .to_owned(),
        packet: Packet {
            addr: sym_opt(env.signal(PACKET_ADDR)),
            cmd: sym_opt(env.signal(PACKET_CMD)),
            data: sym_opt(env.signal(PACKET_DATA)),
        },
        bytes_sent: nat(env.signal(BYTES_SENT)),
        bytes_received: nat(env.signal(BYTES_RECEIVED)),
        tx_cnt: nat(env.signal(TX_CNT)),
        tx_finish: env.signal(TX_FINISH) == &Value::Bool(true),
        rx_finish: env.signal(RX_FINISH) == &Value::Bool(true),
        cmd_finish: env.signal(CMD_FINISH_FLAG) == &Value::Bool(true),
        attribution,
    }
}

/// Runs the generated model for `cmd`, halting on the first violation.
pub fn run_generated(
    spec: &SpecDocument,
    model: &RequirementsModel,
    cmd: &str,
    max_rounds: u32,
) -> Result<EngineRun, GenError> {
    if !spec.roster.has_command(cmd) {
        return Err(GenError::UnknownCommand(cmd.to_owned()));
    }
    let run = run_reqs(
        model,
        initial_env(model, cmd),
        run_finished,
        max_rounds,
        HaltPolicy::Halt,
    );
    let rows = run
        .envs
        .iter()
        .enumerate()
        .map(|(r, env)| project(r as u32, env, r.checked_sub(1).map(|i| &run.changes[i])))
        .collect();
    let last = run.envs.last().expect("run has an initial environment");
    let termination = match run.end {
        RunEnd::Stopped if last.signal(sig::CMD_FINISH_FLAG) == &Value::Bool(true) => {
            Termination::CmdFinish
        }
        RunEnd::Stopped => Termination::Error,
        RunEnd::Budget => Termination::Budget,
        RunEnd::Violation => Termination::Violation,
    };
    Ok(EngineRun {
        trace: Trace {
            meta: TraceMeta {
                engine: Some(Engine::Reqs),
                command: Some(cmd.to_owned()),
                termination: Some(termination),
            },
            packet_style: PacketStyle::Split,
            rows,
        },
        violations: run.violations,
    })
}

/// Ids of every generated requirement, for attribution closure checks.
pub fn requirement_ids(model: &RequirementsModel) -> BTreeSet<&str> {
    model.requirements().iter().map(|r| r.id.as_str()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec_io::load_bundled_cando;

    #[test]
    fn dictionary_shape() {
        let spec = load_bundled_cando();
        let d = gen_dictionary(&spec);
        assert_eq!(d.modes.len(), 1);
        assert_eq!(d.modes[0].modes.len(), 34);
        let bs = d.signals.iter().find(|s| s.name == "bytes_sent").unwrap();
        assert_eq!((bs.min, bs.max), (Some(0), Some(3)));
        let tx = d.signals.iter().find(|s| s.name == "tx_cnt").unwrap();
        assert_eq!((tx.min, tx.max), (Some(0), Some(2)));
        assert_eq!(d.signals.len(), 14);
    }

    #[test]
    fn definition_formula() {
        let spec = load_bundled_cando();
        assert_eq!(gen_definitions(&spec).len(), definition_count(&spec));
        assert_eq!(definition_count(&spec), 2 * 34 + 2 * 6 + 2);
    }

    #[test]
    fn transition_title_and_id() {
        let spec = load_bundled_cando();
        let (reqs, report) = gen_requirements(&spec).unwrap();
        let id = &report.id_index[&("CONT".into(), "set_vLED".into(), "send_packet_6".into())];
        assert_eq!(id, "1.06");
        let r = reqs.iter().find(|r| &r.id == id).unwrap();
        assert_eq!(r.title, "set_vLED to send_packet_6");
        assert_eq!(report.id_index.len(), 714);
    }

    #[test]
    fn empty_table_yields_structural_requirements_only() {
        let mut spec = load_bundled_cando();
        spec.fsm = Default::default();
        spec.roster.states.retain(|s| s.id == START);
        spec.dispatch.clear();
        spec.packets.clear();
        let (reqs, report) = gen_requirements(&spec).unwrap();
        assert!(report.id_index.is_empty());
        assert!(reqs
            .iter()
            .any(|r| matches!(r.template, Template::ModeSet { .. })));
        assert!(reqs
            .iter()
            .any(|r| matches!(r.template, Template::Every { .. })));
        assert!(!reqs
            .iter()
            .any(|r| matches!(r.template, Template::TriggerOnEvent { .. })
                && r.id.starts_with(char::is_numeric)));
    }

    #[test]
    fn model_validates() {
        let spec = load_bundled_cando();
        let g = generate_model(&spec).unwrap();
        assert_eq!(g.report.counts.requirements, g.model.requirements().len());
        assert!(g.report.counts.requirements >= 113);
    }
}

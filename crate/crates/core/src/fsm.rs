//! FSM data model and the structural invariant checks.
//!
//! A [`FsmTable`] maps every event to a [`StateMap`]. The checks here never
//! stop at the first problem: each returns the full list of [`Violation`]s,
//! sorted by (constraint, event, from).

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::violation::{sort_violations, Violation, ViolationCode};

macro_rules! id_type {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                $name(s.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_owned())
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }

        impl PartialEq<str> for $name {
            fn eq(&self, other: &str) -> bool {
                self.0 == other
            }
        }

        impl PartialEq<&str> for $name {
            fn eq(&self, other: &&str) -> bool {
                self.0 == *other
            }
        }
    };
}

id_type!(
    /// Name of an FSM state, e.g. `set_vLED`.
    StateId
);
id_type!(
    /// Name of an FSM event, e.g. `CONT`.
    EventId
);
id_type!(
    /// Name of a controller command, e.g. `LED_ON_C`.
    CommandId
);

pub const START: &str = "start";
pub const GET_CMD: &str = "get_cmd";
pub const CMD_FINISH: &str = "cmd_finish";
pub const ERROR_STATE: &str = "error_";
pub const CHIP_RST: &str = "chip_rst";

pub const CONT: &str = "CONT";
pub const ERROR_EVENT: &str = "ERROR";
pub const SPI_TX_FINISH: &str = "SPI_TX_FINISH";
pub const SPI_RX_FINISH: &str = "SPI_RX_FINISH";
pub const GET_CMD_E: &str = "GET_CMD_E";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum StateKind {
    Send,
    Receive,
    Creator,
    CreatorStage1,
    CreatorStage2,
    Error,
    /// The distinguished `start`, `get_cmd` and `cmd_finish` states.
    Control,
}

impl StateKind {
    pub const ALL: [StateKind; 7] = [
        StateKind::Send,
        StateKind::Receive,
        StateKind::Creator,
        StateKind::CreatorStage1,
        StateKind::CreatorStage2,
        StateKind::Error,
        StateKind::Control,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StateKind::Send => "send",
            StateKind::Receive => "receive",
            StateKind::Creator => "creator",
            StateKind::CreatorStage1 => "creator_stage1",
            StateKind::CreatorStage2 => "creator_stage2",
            StateKind::Error => "error",
            StateKind::Control => "control",
        }
    }

    pub fn parse(s: &str) -> Option<StateKind> {
        StateKind::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// Creator, stage-one creator or stage-two creator.
    pub fn is_packet_creator(self) -> bool {
        matches!(
            self,
            StateKind::Creator | StateKind::CreatorStage1 | StateKind::CreatorStage2
        )
    }
}

impl fmt::Display for StateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StateEntry {
    pub id: StateId,
    pub kind: StateKind,
    /// Not taken from the source model; filled in to complete the roster.
    pub synthetic: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Entry<Id> {
    pub id: Id,
    pub synthetic: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Roster {
    pub states: Vec<StateEntry>,
    pub events: Vec<Entry<EventId>>,
    pub commands: Vec<Entry<CommandId>>,
}

impl Roster {
    pub fn state(&self, s: &str) -> Option<&StateEntry> {
        self.states.iter().find(|e| e.id == s)
    }

    pub fn kind_of(&self, s: &str) -> Option<StateKind> {
        self.state(s).map(|e| e.kind)
    }

    pub fn state_index(&self, s: &str) -> Option<usize> {
        self.states.iter().position(|e| e.id == s)
    }

    pub fn event_index(&self, e: &str) -> Option<usize> {
        self.events.iter().position(|x| x.id == e)
    }

    pub fn has_state(&self, s: &str) -> bool {
        self.state(s).is_some()
    }

    pub fn has_event(&self, e: &str) -> bool {
        self.events.iter().any(|x| x.id == e)
    }

    pub fn has_command(&self, c: &str) -> bool {
        self.commands.iter().any(|x| x.id == c)
    }

    pub fn state_ids(&self) -> impl Iterator<Item = &StateId> + '_ {
        self.states.iter().map(|e| &e.id)
    }

    pub fn event_ids(&self) -> impl Iterator<Item = &EventId> + '_ {
        self.events.iter().map(|e| &e.id)
    }

    pub fn command_ids(&self) -> impl Iterator<Item = &CommandId> + '_ {
        self.commands.iter().map(|e| &e.id)
    }

    pub fn states_of_kind(&self, kind: StateKind) -> impl Iterator<Item = &StateId> + '_ {
        self.states
            .iter()
            .filter(move |e| e.kind == kind)
            .map(|e| &e.id)
    }
}

/// Successor map for one event. Role predicates such as [`is_total`] and
/// [`is_id_map`] are checked over this type rather than stored separately.
pub type StateMap = BTreeMap<StateId, StateId>;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FsmTable {
    pub per_event: BTreeMap<EventId, StateMap>,
}

impl FsmTable {
    pub fn insert(&mut self, event: &str, from: &str, to: &str) -> Option<StateId> {
        self.per_event
            .entry(EventId::from(event))
            .or_default()
            .insert(StateId::from(from), StateId::from(to))
    }

    pub fn get(&self, event: &str, from: &str) -> Option<&StateId> {
        self.per_event.get(event).and_then(|m| m.get(from))
    }

    /// Number of (event, from) entries.
    pub fn len(&self) -> usize {
        self.per_event.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All entries as (event, from, to), events alphabetical then from alphabetical.
    pub fn entries(&self) -> impl Iterator<Item = (&EventId, &StateId, &StateId)> + '_ {
        self.per_event
            .iter()
            .flat_map(|(e, m)| m.iter().map(move |(s, t)| (e, s, t)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FsmError {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("unknown command `{0}`")]
    UnknownCommand(String),
    #[error("no transition for event `{event}` from state `{state}`")]
    MissingTransition { event: String, state: String },
}

pub fn classify(roster: &Roster, s: &str) -> Result<StateKind, FsmError> {
    roster
        .kind_of(s)
        .ok_or_else(|| FsmError::UnknownState(s.to_owned()))
}

pub fn lookup_next<'a>(fsm: &'a FsmTable, e: &str, s: &str) -> Result<&'a StateId, FsmError> {
    fsm.get(e, s).ok_or_else(|| FsmError::MissingTransition {
        event: e.to_owned(),
        state: s.to_owned(),
    })
}

/// The map has an entry for every state in the roster.
pub fn is_total(roster: &Roster, sm: &StateMap) -> bool {
    roster.state_ids().all(|s| sm.contains_key(s.as_str()))
}

/// Every entry maps a state to itself.
pub fn is_id_map(sm: &StateMap) -> bool {
    sm.iter().all(|(s, t)| s == t)
}

/// Every key of the map has the given kind.
pub fn keys_of_kind(roster: &Roster, sm: &StateMap, kind: StateKind) -> bool {
    sm.keys().all(|s| roster.kind_of(s.as_str()) == Some(kind))
}

/// Checks the eight per-entry StateMap constraints C1.1 to C1.8.
///
/// A receive state mapping to itself is accepted under C1.7: the identity
/// maps demanded by C4 would otherwise break the StateMap invariant.
pub fn check_statemap(roster: &Roster, sm: &StateMap) -> Result<Vec<Violation>, FsmError> {
    let mut out = Vec::new();
    for (s, t) in sm {
        let sk = classify(roster, s.as_str())?;
        let tk = classify(roster, t.as_str())?;
        let (s, t) = (s.as_str(), t.as_str());
        let mut fire = |code: ViolationCode, msg: &str| {
            out.push(Violation::new(code, format!("{s} -> {t}: {msg}")).at(None, Some(s), Some(t)));
        };
        if t == START {
            fire(ViolationCode::C1_1, "no state may map to start");
        }
        if s == START && !matches!(t, GET_CMD | ERROR_STATE) {
            fire(ViolationCode::C1_2, "start only maps to get_cmd or error_");
        }
        if s == CHIP_RST && !matches!(t, GET_CMD | ERROR_STATE) {
            fire(
                ViolationCode::C1_3,
                "chip_rst only maps to get_cmd or error_",
            );
        }
        if s == ERROR_STATE && !matches!(t, GET_CMD | ERROR_STATE | CHIP_RST) {
            fire(
                ViolationCode::C1_4,
                "error_ only maps to get_cmd, error_ or chip_rst",
            );
        }
        if s == CMD_FINISH && t != ERROR_STATE {
            fire(ViolationCode::C1_5, "cmd_finish only maps to error_");
        }
        if sk.is_packet_creator() && !(tk == StateKind::Send || t == ERROR_STATE) {
            fire(
                ViolationCode::C1_6,
                "packet creators only map to send states or error_",
            );
        }
        if sk == StateKind::Receive
            && !(tk == StateKind::CreatorStage2 || t == CMD_FINISH || t == ERROR_STATE || s == t)
        {
            fire(
                ViolationCode::C1_7,
                "receive states only map to stage-two creators, cmd_finish or error_",
            );
        }
        if s == GET_CMD && !(tk == StateKind::CreatorStage1 || t == ERROR_STATE) {
            fire(
                ViolationCode::C1_8,
                "get_cmd only maps to stage-one creators or error_",
            );
        }
    }
    sort_violations(&mut out);
    Ok(out)
}

/// Runs [`check_statemap`] over every event map, tagging each violation with its event.
pub fn check_all_statemaps(roster: &Roster, fsm: &FsmTable) -> Result<Vec<Violation>, FsmError> {
    let mut out = Vec::new();
    for (e, sm) in &fsm.per_event {
        for mut v in check_statemap(roster, sm)? {
            v.event = Some(e.to_string());
            out.push(v);
        }
    }
    sort_violations(&mut out);
    Ok(out)
}

/// Totality: every roster event has a map, and every map covers every roster state.
pub fn check_totality(roster: &Roster, fsm: &FsmTable) -> Vec<Violation> {
    let mut out = Vec::new();
    for e in roster.event_ids() {
        match fsm.per_event.get(e.as_str()) {
            None => out.push(
                Violation::new(
                    ViolationCode::Totality,
                    format!("event {e} has no state map (domain read as the event set, not the state set)"),
                )
                .at(Some(e.as_str()), None, None),
            ),
            Some(sm) => {
                for s in roster.state_ids() {
                    if !sm.contains_key(s.as_str()) {
                        out.push(
                            Violation::new(
                                ViolationCode::Totality,
                                format!("state map for {e} is not total: {s} is missing"),
                            )
                            .at(
                                Some(e.as_str()),
                                Some(s.as_str()),
                                None,
                            ),
                        );
                    }
                }
            }
        }
    }
    sort_violations(&mut out);
    out
}

/// Checks the event-specific constraints C2 to C12.
///
/// Named-state rules (C7 to C10) take precedence over kind-class rules for
/// their states. For `error_` under CONT or GET_CMD_E, a successor outside
/// `{error_, override target}` is reported as C12 (the state escaped the error
/// region); staying in `error_` when the override demands otherwise is C8/C9.
pub fn check_cando(roster: &Roster, fsm: &FsmTable) -> Vec<Violation> {
    use ViolationCode::*;

    let mut out = Vec::new();
    let kind = |s: &str| roster.kind_of(s);
    for (e, sm) in &fsm.per_event {
        let e = e.as_str();
        for (s, t) in sm {
            let (s, t) = (s.as_str(), t.as_str());
            let (Some(sk), Some(tk)) = (kind(s), kind(t)) else {
                continue;
            };
            let breach: Option<(ViolationCode, &str)> = match e {
                CONT => {
                    if s == START {
                        (t != GET_CMD).then_some((C7, "under CONT start maps to get_cmd"))
                    } else if s == ERROR_STATE {
                        match t {
                            CHIP_RST => None,
                            ERROR_STATE => Some((C8, "under CONT error_ maps to chip_rst")),
                            _ => Some((C12, "under CONT error_ stays in error_ unless overridden")),
                        }
                    } else if sk == StateKind::Error {
                        (t != ERROR_STATE).then_some((C6, "under CONT error states map to error_"))
                    } else if sk == StateKind::Send {
                        (tk != StateKind::Receive)
                            .then_some((C2, "under CONT send states map to receive states"))
                    } else if sk.is_packet_creator() {
                        (tk != StateKind::Send)
                            .then_some((C5, "under CONT packet creators map to send states"))
                    } else if sk == StateKind::Receive {
                        (!(tk == StateKind::CreatorStage2 || t == CMD_FINISH)).then_some((
                            C11,
                            "under CONT receive states map to stage-two creators or cmd_finish",
                        ))
                    } else {
                        None
                    }
                }
                GET_CMD_E => {
                    if s == ERROR_STATE {
                        match t {
                            GET_CMD => None,
                            ERROR_STATE => Some((C9, "under GET_CMD_E error_ maps to get_cmd")),
                            _ => Some((
                                C12,
                                "under GET_CMD_E error_ stays in error_ unless overridden",
                            )),
                        }
                    } else if s == CHIP_RST {
                        (t != GET_CMD).then_some((C10, "under GET_CMD_E chip_rst maps to get_cmd"))
                    } else {
                        None
                    }
                }
                SPI_TX_FINISH => (sk == StateKind::Send && s != t)
                    .then_some((C3, "under SPI_TX_FINISH send states map to themselves")),
                SPI_RX_FINISH => (sk == StateKind::Receive && s != t)
                    .then_some((C4, "under SPI_RX_FINISH receive states map to themselves")),
                _ => None,
            };
            if let Some((code, msg)) = breach {
                out.push(Violation::new(code, format!("{s} -> {t}: {msg}")).at(
                    Some(e),
                    Some(s),
                    Some(t),
                ));
            }
        }
    }
    sort_violations(&mut out);
    out
}

/// Checks the distinguished members of the roster: the control and error
/// states must exist with the right kinds, and the named events must exist.
pub fn check_roster(roster: &Roster) -> Vec<Violation> {
    let mut out = Vec::new();
    let expect = [
        (START, StateKind::Control),
        (GET_CMD, StateKind::Control),
        (CMD_FINISH, StateKind::Control),
        (ERROR_STATE, StateKind::Error),
        (CHIP_RST, StateKind::Error),
    ];
    for (name, kind) in expect {
        match roster.kind_of(name) {
            None => out.push(
                Violation::new(ViolationCode::Roster, format!("missing state {name}")).at(
                    None,
                    Some(name),
                    None,
                ),
            ),
            Some(k) if k != kind => out.push(
                Violation::new(
                    ViolationCode::Roster,
                    format!("state {name} has kind {k}, expected {kind}"),
                )
                .at(None, Some(name), None),
            ),
            Some(_) => {}
        }
    }
    for st in &roster.states {
        if st.kind == StateKind::Control && !matches!(st.id.as_str(), START | GET_CMD | CMD_FINISH)
        {
            out.push(
                Violation::new(
                    ViolationCode::Roster,
                    format!(
                        "control kind is reserved for start, get_cmd and cmd_finish, not {}",
                        st.id
                    ),
                )
                .at(None, Some(st.id.as_str()), None),
            );
        }
    }
    for name in [CONT, ERROR_EVENT, SPI_TX_FINISH, SPI_RX_FINISH, GET_CMD_E] {
        if !roster.has_event(name) {
            out.push(
                Violation::new(ViolationCode::Roster, format!("missing event {name}")).at(
                    Some(name),
                    None,
                    None,
                ),
            );
        }
    }
    sort_violations(&mut out);
    out
}

/// States reachable from `from` using only the given events (including `from`).
pub fn reachable(fsm: &FsmTable, from: &str, events: &BTreeSet<EventId>) -> BTreeSet<StateId> {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(StateId::from(from));
    queue.push_back(StateId::from(from));
    while let Some(s) = queue.pop_front() {
        for e in events {
            if let Some(t) = fsm.get(e.as_str(), s.as_str()) {
                if seen.insert(t.clone()) {
                    queue.push_back(t.clone());
                }
            }
        }
    }
    seen
}

/// Roster states not reachable from `start` under all roster events.
pub fn unreachable_states(roster: &Roster, fsm: &FsmTable) -> Vec<StateId> {
    let events: BTreeSet<EventId> = roster.event_ids().cloned().collect();
    let seen = reachable(fsm, START, &events);
    roster
        .state_ids()
        .filter(|s| !seen.contains(*s))
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roster() -> Roster {
        let st = |id: &str, kind| StateEntry {
            id: id.into(),
            kind,
            synthetic: false,
        };
        Roster {
            states: vec![
                st(START, StateKind::Control),
                st(GET_CMD, StateKind::Control),
                st(CMD_FINISH, StateKind::Control),
                st(ERROR_STATE, StateKind::Error),
                st(CHIP_RST, StateKind::Error),
                st("set_vLED", StateKind::CreatorStage1),
                st("set_sDac", StateKind::CreatorStage2),
                st("send_packet_6", StateKind::Send),
                st("receive_packet_28", StateKind::Receive),
            ],
            events: vec![],
            commands: vec![],
        }
    }

    fn map(pairs: &[(&str, &str)]) -> StateMap {
        pairs
            .iter()
            .map(|(a, b)| (StateId::from(*a), StateId::from(*b)))
            .collect()
    }

    fn codes(v: &[Violation]) -> Vec<ViolationCode> {
        v.iter().map(|v| v.code).collect()
    }

    #[test]
    fn classify_known_and_unknown() {
        let r = roster();
        assert_eq!(classify(&r, "set_vLED"), Ok(StateKind::CreatorStage1));
        assert_eq!(classify(&r, "set_sDac"), Ok(StateKind::CreatorStage2));
        assert_eq!(classify(&r, "error_"), Ok(StateKind::Error));
        assert_eq!(
            classify(&r, "nope"),
            Err(FsmError::UnknownState("nope".into()))
        );
    }

    #[test]
    fn get_cmd_to_start_fires_both_rules() {
        let v = check_statemap(&roster(), &map(&[(GET_CMD, START)])).unwrap();
        assert_eq!(codes(&v), vec![ViolationCode::C1_1, ViolationCode::C1_8]);
    }

    #[test]
    fn empty_map_is_vacuously_fine() {
        assert!(check_statemap(&roster(), &StateMap::new())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn cmd_finish_to_get_cmd_is_c1_5() {
        let v = check_statemap(&roster(), &map(&[(CMD_FINISH, GET_CMD)])).unwrap();
        assert_eq!(codes(&v), vec![ViolationCode::C1_5]);
    }

    #[test]
    fn receive_self_loop_is_accepted() {
        let r = roster();
        let sm = map(&[("receive_packet_28", "receive_packet_28")]);
        assert!(check_statemap(&r, &sm).unwrap().is_empty());
        assert!(is_id_map(&sm));
        assert!(keys_of_kind(&r, &sm, StateKind::Receive));
    }

    #[test]
    fn unknown_state_in_map_is_an_error() {
        let err = check_statemap(&roster(), &map(&[(START, "bogus")])).unwrap_err();
        assert_eq!(err, FsmError::UnknownState("bogus".into()));
    }

    #[test]
    fn lookup_missing_transition() {
        let mut fsm = FsmTable::default();
        fsm.insert(CONT, "set_vLED", "send_packet_6");
        assert_eq!(
            lookup_next(&fsm, CONT, "set_vLED").unwrap(),
            "send_packet_6"
        );
        assert_eq!(
            lookup_next(&fsm, CONT, "set_sDac"),
            Err(FsmError::MissingTransition {
                event: CONT.into(),
                state: "set_sDac".into()
            })
        );
    }

    #[test]
    fn reachable_without_events_is_singleton() {
        let mut fsm = FsmTable::default();
        fsm.insert(CONT, CMD_FINISH, ERROR_STATE);
        let r = reachable(&fsm, CMD_FINISH, &BTreeSet::new());
        assert_eq!(
            r.into_iter().collect::<Vec<_>>(),
            vec![StateId::from(CMD_FINISH)]
        );
    }

    #[test]
    fn error_precedence_under_cont() {
        let r = roster();
        let mut fsm = FsmTable::default();
        fsm.insert(CONT, ERROR_STATE, CHIP_RST);
        assert!(check_cando(&r, &fsm).is_empty());
        fsm.insert(CONT, ERROR_STATE, ERROR_STATE);
        assert_eq!(codes(&check_cando(&r, &fsm)), vec![ViolationCode::C8]);
        fsm.insert(CONT, ERROR_STATE, GET_CMD);
        assert_eq!(codes(&check_cando(&r, &fsm)), vec![ViolationCode::C12]);
    }

    #[test]
    fn roster_check_flags_missing_named_members() {
        let v = check_roster(&Roster::default());
        assert!(v.iter().all(|v| v.code == ViolationCode::Roster));
        assert_eq!(v.len(), 10);
    }
}

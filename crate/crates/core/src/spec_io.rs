//! The `.fsm` text format, the bundled CANDO description, and trace CSV files.
//!
//! ```text
//! # comment
//! states {
//!   start: control
//!   set_vLED: creator_stage1
//!   send_packet_2: send synthetic
//! }
//! events {
//!   CONT
//! }
//! commands {
//!   LED_ON_C
//! }
//! initial start CONT
//! dispatch LED_ON_C -> set_vLED
//! packet set_vLED addr=Optrode_addr cmd=nil data=LED_addr
//! transition CONT set_vLED -> send_packet_6
//! ```
//!
//! Parsing is purely syntactic: names are not checked against the roster.
//! Duplicate definitions are rejected.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::Path;

use thiserror::Error;

use crate::fsm::{
    CommandId, Entry, EventId, FsmTable, Roster, StateEntry, StateId, StateKind, CONT, START,
};
use crate::op_model::Packet;
use crate::trace::{PacketStyle, Trace, TraceMeta, TraceRow};
use crate::violation::{sort_violations, Violation, ViolationCode};

const BUNDLED_CANDO: &str = include_str!("../data/cando.fsm");

/// Where a run starts: the seed state and event of the operational record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitialSeed {
    pub state: StateId,
    pub event: EventId,
}

impl Default for InitialSeed {
    fn default() -> Self {
        InitialSeed {
            state: StateId::from(START),
            event: EventId::from(CONT),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpecDocument {
    pub roster: Roster,
    pub fsm: FsmTable,
    /// Command table consulted by `get_cmd`.
    pub dispatch: BTreeMap<CommandId, StateId>,
    /// Packet lookup table for creator states. A `None` command field in a
    /// stage-one template means "the current command".
    pub packets: BTreeMap<StateId, Packet>,
    pub initial: InitialSeed,
}

impl SpecDocument {
    /// Document-level checks the parser leaves out: dispatch targets must be
    /// stage-one creators and packet templates must belong to creator states.
    pub fn check_tables(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (c, s) in &self.dispatch {
            if !self.roster.has_command(c.as_str()) {
                out.push(Violation::new(
                    ViolationCode::Roster,
                    format!("dispatch names unknown command {c}"),
                ));
            }
            if self.roster.kind_of(s.as_str()) != Some(StateKind::CreatorStage1) {
                out.push(
                    Violation::new(
                        ViolationCode::Roster,
                        format!("dispatch {c} -> {s}: target is not a stage-one creator"),
                    )
                    .at(None, None, Some(s.as_str())),
                );
            }
        }
        for s in self.packets.keys() {
            if !self
                .roster
                .kind_of(s.as_str())
                .is_some_and(StateKind::is_packet_creator)
            {
                out.push(
                    Violation::new(
                        ViolationCode::Roster,
                        format!("packet template for {s}, which is not a creator state"),
                    )
                    .at(None, Some(s.as_str()), None),
                );
            }
        }
        sort_violations(&mut out);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}\n  | {snippet}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub snippet: String,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{source}")]
    Parse {
        path: String,
        #[source]
        source: ParseError,
    },
    #[error("{path}: {message}")]
    Csv { path: String, message: String },
}

pub fn load_bundled_cando() -> SpecDocument {
    parse_spec(BUNDLED_CANDO).expect("bundled CANDO spec must parse")
}

/// The bundled description in its canonical text form.
pub fn bundled_cando_text() -> &'static str {
    BUNDLED_CANDO
}

pub fn read_spec_file(path: &Path) -> Result<SpecDocument, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_spec(&text).map_err(|source| LoadError::Parse {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    States,
    Events,
    Commands,
}

impl Section {
    fn name(self) -> &'static str {
        match self {
            Section::States => "states",
            Section::Events => "events",
            Section::Commands => "commands",
        }
    }
}

struct Line<'a> {
    number: usize,
    raw: &'a str,
    /// (1-based column, token)
    tokens: Vec<(usize, &'a str)>,
}

impl<'a> Line<'a> {
    fn new(number: usize, raw: &'a str) -> Self {
        let body = raw.split('#').next().unwrap_or("");
        let mut tokens = Vec::new();
        let mut start = None;
        for (i, ch) in body.char_indices() {
            if ch.is_whitespace() {
                if let Some(s) = start.take() {
                    tokens.push((s + 1, &body[s..i]));
                }
            } else if start.is_none() {
                start = Some(i);
            }
        }
        if let Some(s) = start {
            tokens.push((s + 1, &body[s..]));
        }
        Line {
            number,
            raw,
            tokens,
        }
    }

    fn err(&self, column: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.number,
            column,
            message: message.into(),
            snippet: self.raw.to_owned(),
        }
    }

    fn end_column(&self) -> usize {
        self.raw.trim_end().chars().count() + 1
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn ident<'a>(
    line: &Line<'a>,
    tok: Option<&(usize, &'a str)>,
    what: &str,
) -> Result<&'a str, ParseError> {
    match tok {
        None => Err(line.err(line.end_column(), format!("expected {what}"))),
        Some(&(col, t)) if !is_ident(t) => Err(line.err(col, format!("invalid {what} `{t}`"))),
        Some(&(_, t)) => Ok(t),
    }
}

fn expect_arrow(line: &Line<'_>, tok: Option<&(usize, &str)>) -> Result<(), ParseError> {
    match tok {
        Some((_, "->")) => Ok(()),
        Some(&(col, t)) => Err(line.err(col, format!("expected `->`, found `{t}`"))),
        None => Err(line.err(line.end_column(), "expected `->`")),
    }
}

fn expect_end(line: &Line<'_>, tok: Option<&(usize, &str)>) -> Result<(), ParseError> {
    match tok {
        None => Ok(()),
        Some(&(col, t)) => Err(line.err(col, format!("unexpected `{t}`"))),
    }
}

fn optional_symbol(line: &Line<'_>, col: usize, value: &str) -> Result<Option<String>, ParseError> {
    if value == "nil" {
        Ok(None)
    } else if is_ident(value) {
        Ok(Some(value.to_owned()))
    } else {
        Err(line.err(col, format!("invalid symbol `{value}`")))
    }
}

/// Parses a `.fsm` document. LF and CRLF line endings are accepted.
pub fn parse_spec(text: &str) -> Result<SpecDocument, ParseError> {
    let mut doc = SpecDocument::default();
    let mut seen_sections: BTreeMap<&'static str, usize> = BTreeMap::new();
    let mut open: Option<(Section, usize)> = None;
    let mut seen_initial = false;
    let mut last_line = 1;

    for (idx, raw) in text.lines().enumerate() {
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let line = Line::new(idx + 1, raw);
        last_line = idx + 1;
        let mut toks = line.tokens.iter();
        let Some(&(col, head)) = toks.next() else {
            continue;
        };

        if let Some((section, _)) = open {
            if head == "}" {
                expect_end(&line, toks.next())?;
                open = None;
                continue;
            }
            match section {
                Section::States => {
                    let body = raw.split('#').next().unwrap_or("");
                    let Some(colon) = body.find(':') else {
                        return Err(line.err(col, "expected `name: kind`"));
                    };
                    let name = body[..colon].trim();
                    if !is_ident(name) {
                        return Err(line.err(col, format!("invalid state name `{name}`")));
                    }
                    let rest = Line::new(line.number, raw);
                    let mut rest_toks = rest.tokens.iter().filter(|(c, _)| *c > colon + 1);
                    let kind_tok = rest_toks.next();
                    let kind_name = ident(&line, kind_tok, "state kind")?;
                    let Some(kind) = StateKind::parse(kind_name) else {
                        return Err(line.err(
                            kind_tok.map_or(col, |t| t.0),
                            format!("unknown state kind `{kind_name}`"),
                        ));
                    };
                    let synthetic = parse_synthetic(&line, rest_toks.next(), rest_toks.next())?;
                    if doc.roster.has_state(name) {
                        return Err(line.err(col, format!("duplicate state `{name}`")));
                    }
                    doc.roster.states.push(StateEntry {
                        id: StateId::from(name),
                        kind,
                        synthetic,
                    });
                }
                Section::Events | Section::Commands => {
                    let name = ident(&line, Some(&(col, head)), "name")?;
                    let synthetic = parse_synthetic(&line, toks.next(), toks.next())?;
                    if section == Section::Events {
                        if doc.roster.has_event(name) {
                            return Err(line.err(col, format!("duplicate event `{name}`")));
                        }
                        doc.roster.events.push(Entry {
                            id: EventId::from(name),
                            synthetic,
                        });
                    } else {
                        if doc.roster.has_command(name) {
                            return Err(line.err(col, format!("duplicate command `{name}`")));
                        }
                        doc.roster.commands.push(Entry {
                            id: CommandId::from(name),
                            synthetic,
                        });
                    }
                }
            }
            continue;
        }

        match head {
            "states" | "events" | "commands" | "states{" | "events{" | "commands{" => {
                let name = head.trim_end_matches('{');
                let section = match name {
                    "states" => Section::States,
                    "events" => Section::Events,
                    _ => Section::Commands,
                };
                if let Some(first) = seen_sections.get(section.name()) {
                    return Err(line.err(
                        col,
                        format!("duplicate {name} section (first on line {first})"),
                    ));
                }
                seen_sections.insert(section.name(), line.number);
                let mut rest: Vec<&(usize, &str)> = toks.collect();
                if !head.ends_with('{') {
                    match rest.first() {
                        Some((_, t)) if t.starts_with('{') => {
                            let (c, t) = *rest[0];
                            let after = &t[1..];
                            if after.is_empty() {
                                rest.remove(0);
                            } else if after == "}" {
                                rest.remove(0);
                                expect_end(&line, rest.first().copied())?;
                                continue;
                            } else {
                                return Err(line.err(c + 1, format!("unexpected `{after}`")));
                            }
                        }
                        Some(&&(c, t)) => {
                            return Err(line.err(c, format!("expected `{{`, found `{t}`")))
                        }
                        None => return Err(line.err(line.end_column(), "expected `{`")),
                    }
                }
                match rest.first() {
                    None => open = Some((section, line.number)),
                    Some((_, "}")) => expect_end(&line, rest.get(1).copied())?,
                    Some(&&(c, t)) => return Err(line.err(c, format!("unexpected `{t}`"))),
                }
            }
            "transition" => {
                let e = ident(&line, toks.next(), "event")?;
                let from_tok = toks.next();
                let from = ident(&line, from_tok, "source state")?;
                expect_arrow(&line, toks.next())?;
                let to = ident(&line, toks.next(), "target state")?;
                expect_end(&line, toks.next())?;
                if let Some(prev) = doc.fsm.get(e, from) {
                    return Err(line.err(
                        col,
                        format!("duplicate transition for {e} from {from} (already -> {prev})"),
                    ));
                }
                doc.fsm.insert(e, from, to);
            }
            "dispatch" => {
                let c = ident(&line, toks.next(), "command")?;
                expect_arrow(&line, toks.next())?;
                let s = ident(&line, toks.next(), "state")?;
                expect_end(&line, toks.next())?;
                if doc.dispatch.contains_key(c) {
                    return Err(line.err(col, format!("duplicate dispatch for {c}")));
                }
                doc.dispatch.insert(CommandId::from(c), StateId::from(s));
            }
            "packet" => {
                let s = ident(&line, toks.next(), "state")?;
                let mut packet = Packet::default();
                let mut seen = [false; 3];
                for &(c, t) in toks {
                    let Some((key, value)) = t.split_once('=') else {
                        return Err(line.err(c, format!("expected `field=value`, found `{t}`")));
                    };
                    let slot = match key {
                        "addr" => 0,
                        "cmd" => 1,
                        "data" => 2,
                        _ => return Err(line.err(c, format!("unknown packet field `{key}`"))),
                    };
                    if seen[slot] {
                        return Err(line.err(c, format!("duplicate packet field `{key}`")));
                    }
                    seen[slot] = true;
                    let v = optional_symbol(&line, c + key.len() + 1, value)?;
                    match slot {
                        0 => packet.addr = v,
                        1 => packet.cmd = v,
                        _ => packet.data = v,
                    }
                }
                if doc.packets.contains_key(s) {
                    return Err(line.err(col, format!("duplicate packet template for {s}")));
                }
                doc.packets.insert(StateId::from(s), packet);
            }
            "initial" => {
                if seen_initial {
                    return Err(line.err(col, "duplicate initial line"));
                }
                seen_initial = true;
                let s = ident(&line, toks.next(), "state")?;
                let e = ident(&line, toks.next(), "event")?;
                expect_end(&line, toks.next())?;
                doc.initial = InitialSeed {
                    state: StateId::from(s),
                    event: EventId::from(e),
                };
            }
            other => return Err(line.err(col, format!("unexpected `{other}`"))),
        }
    }

    if let Some((section, start)) = open {
        let raw = text.lines().nth(start - 1).unwrap_or("");
        return Err(ParseError {
            line: last_line.max(start),
            column: 1,
            message: format!(
                "unterminated {} section opened on line {start}",
                section.name()
            ),
            snippet: raw.trim_end_matches('\r').to_owned(),
        });
    }
    for section in [Section::States, Section::Events, Section::Commands] {
        if !seen_sections.contains_key(section.name()) {
            return Err(ParseError {
                line: 1,
                column: 1,
                message: format!("missing {} section", section.name()),
                snippet: text
                    .lines()
                    .next()
                    .unwrap_or("")
                    .trim_end_matches('\r')
                    .to_owned(),
            });
        }
    }
    Ok(doc)
}

fn parse_synthetic(
    line: &Line<'_>,
    tok: Option<&(usize, &str)>,
    extra: Option<&(usize, &str)>,
) -> Result<bool, ParseError> {
    let synthetic = match tok {
        None => false,
        Some((_, "synthetic")) => true,
        Some(&(c, t)) => return Err(line.err(c, format!("unexpected `{t}`"))),
    };
    expect_end(line, extra)?;
    Ok(synthetic)
}

fn sym(v: &Option<String>) -> &str {
    v.as_deref().unwrap_or("nil")
}

/// Ranks ids by roster position, falling back to name order for ids outside the roster.
fn roster_order<'a, T: Ord + fmt::Display + 'a>(
    keys: impl Iterator<Item = &'a T>,
    position: impl Fn(&T) -> Option<usize>,
) -> Vec<&'a T> {
    let mut v: Vec<&T> = keys.collect();
    v.sort_by(|a, b| {
        (position(a).unwrap_or(usize::MAX), *a).cmp(&(position(b).unwrap_or(usize::MAX), *b))
    });
    v
}

/// Canonical text form. Roster sections keep roster order; transitions are
/// grouped by event in alphabetical order, sources in roster order.
pub fn serialize_spec(doc: &SpecDocument) -> String {
    let mut out = String::new();
    out.push_str("states {\n");
    for s in &doc.roster.states {
        let _ = writeln!(
            out,
            "  {}: {}{}",
            s.id,
            s.kind,
            if s.synthetic { " synthetic" } else { "" }
        );
    }
    out.push_str("}\nevents {\n");
    for e in &doc.roster.events {
        let _ = writeln!(
            out,
            "  {}{}",
            e.id,
            if e.synthetic { " synthetic" } else { "" }
        );
    }
    out.push_str("}\ncommands {\n");
    for c in &doc.roster.commands {
        let _ = writeln!(
            out,
            "  {}{}",
            c.id,
            if c.synthetic { " synthetic" } else { "" }
        );
    }
    out.push_str("}\n");
    if doc.initial != InitialSeed::default() {
        let _ = writeln!(out, "initial {} {}", doc.initial.state, doc.initial.event);
    }
    let cmd_pos = |c: &CommandId| doc.roster.commands.iter().position(|x| x.id == *c);
    for c in roster_order(doc.dispatch.keys(), cmd_pos) {
        let _ = writeln!(out, "dispatch {c} -> {}", doc.dispatch[c]);
    }
    let state_pos = |s: &StateId| doc.roster.state_index(s.as_str());
    for s in roster_order(doc.packets.keys(), state_pos) {
        let p = &doc.packets[s];
        let _ = writeln!(
            out,
            "packet {s} addr={} cmd={} data={}",
            sym(&p.addr),
            sym(&p.cmd),
            sym(&p.data)
        );
    }
    for (e, sm) in &doc.fsm.per_event {
        for s in roster_order(sm.keys(), state_pos) {
            let _ = writeln!(out, "transition {e} {s} -> {}", sm[s]);
        }
    }
    out
}

/// Exact CSV header of trace files.
pub const TRACE_HEADER: [&str; 14] = [
    "round",
    "state",
    "event",
    "command",
    "packet_addr",
    "packet_cmd",
    "packet_data",
    "bytes_sent",
    "bytes_received",
    "tx_cnt",
    "tx_finish",
    "rx_finish",
    "cmd_finish",
    "attribution",
];

fn encode_attribution(row: &TraceRow) -> String {
    row.attribution
        .iter()
        .flat_map(|(field, ids)| ids.iter().map(move |id| format!("{field}={id}")))
        .collect::<Vec<_>>()
        .join(";")
}

/// Writes a trace as CSV. Nil values are empty cells; attribution is a
/// `;`-separated list of `field=requirement-id` pairs.
pub fn write_trace_csv(trace: &Trace) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(TRACE_HEADER).expect("in-memory write");
    for r in &trace.rows {
        let opt = |v: &Option<String>| v.clone().unwrap_or_default();
        w.write_record([
            r.round.to_string(),
            r.state.clone(),
            r.event.clone(),
            r.command.clone(),
            opt(&r.packet.addr),
            opt(&r.packet.cmd),
            opt(&r.packet.data),
            r.bytes_sent.to_string(),
            r.bytes_received.to_string(),
            r.tx_cnt.to_string(),
            r.tx_finish.to_string(),
            r.rx_finish.to_string(),
            r.cmd_finish.to_string(),
            encode_attribution(r),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct CsvError {
    pub line: usize,
    pub message: String,
}

/// Reads a trace CSV. The header must match [`TRACE_HEADER`] exactly.
pub fn read_trace_csv(text: &str) -> Result<Trace, CsvError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes());
    let mut records = rdr.records();
    let header = match records.next() {
        Some(Ok(h)) => h,
        Some(Err(e)) => {
            return Err(CsvError {
                line: 1,
                message: e.to_string(),
            })
        }
        None => {
            return Err(CsvError {
                line: 1,
                message: "empty file".into(),
            })
        }
    };
    if header.iter().ne(TRACE_HEADER.iter().copied()) {
        return Err(CsvError {
            line: 1,
            message: format!("header must be `{}`", TRACE_HEADER.join(",")),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in records.enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| CsvError {
            line,
            message: e.to_string(),
        })?;
        let bad = |message: String| CsvError { line, message };
        if rec.len() != TRACE_HEADER.len() {
            return Err(bad(format!(
                "expected {} fields, found {}",
                TRACE_HEADER.len(),
                rec.len()
            )));
        }
        let nat = |idx: usize| -> Result<u32, CsvError> {
            rec[idx].parse().map_err(|_| {
                bad(format!(
                    "{} is not a natural number: `{}`",
                    TRACE_HEADER[idx], &rec[idx]
                ))
            })
        };
        let flag = |idx: usize| -> Result<bool, CsvError> {
            rec[idx].parse().map_err(|_| {
                bad(format!(
                    "{} is not a boolean: `{}`",
                    TRACE_HEADER[idx], &rec[idx]
                ))
            })
        };
        let opt = |idx: usize| (!rec[idx].is_empty()).then(|| rec[idx].to_owned());
        let mut attribution: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for part in rec[13].split(';').filter(|p| !p.is_empty()) {
            let (field, id) = part
                .split_once('=')
                .ok_or_else(|| bad(format!("malformed attribution `{part}`")))?;
            attribution
                .entry(field.to_owned())
                .or_default()
                .push(id.to_owned());
        }
        rows.push(TraceRow {
            round: nat(0)?,
            state: rec[1].to_owned(),
            event: rec[2].to_owned(),
            command: rec[3].to_owned(),
            packet: Packet {
                addr: opt(4),
                cmd: opt(5),
                data: opt(6),
            },
            bytes_sent: nat(7)?,
            bytes_received: nat(8)?,
            tx_cnt: nat(9)?,
            tx_finish: flag(10)?,
            rx_finish: flag(11)?,
            cmd_finish: flag(12)?,
            attribution,
        });
    }
    Ok(Trace {
        meta: TraceMeta::default(),
        packet_style: PacketStyle::Split,
        rows,
    })
}

pub fn read_trace_file(path: &Path) -> Result<Trace, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_trace_csv(&text).map_err(|e| LoadError::Csv {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_transition_line() {
        let doc = parse_spec(
            "states {\n}\nevents {\n}\ncommands {\n}\ntransition CONT set_vLED -> send_packet_6\n",
        )
        .unwrap();
        assert_eq!(doc.fsm.len(), 1);
        assert_eq!(doc.fsm.get("CONT", "set_vLED").unwrap(), "send_packet_6");
    }

    #[test]
    fn empty_input_reports_missing_states() {
        let err = parse_spec("").unwrap_err();
        assert_eq!((err.line, err.column), (1, 1));
        assert_eq!(err.message, "missing states section");
    }

    #[test]
    fn duplicate_transition_names_the_line() {
        let text = "states {}\nevents {}\ncommands {}\ntransition CONT set_vLED -> send_packet_6\ntransition CONT set_vLED -> send_packet_6\n";
        let err = parse_spec(text).unwrap_err();
        assert_eq!(err.line, 5);
        assert_eq!(err.column, 1);
        assert!(err.message.contains("duplicate transition"));
        assert_eq!(err.snippet, "transition CONT set_vLED -> send_packet_6");
    }

    #[test]
    fn empty_roster_serializes_to_three_sections() {
        assert_eq!(
            serialize_spec(&SpecDocument::default()),
            "states {\n}\nevents {\n}\ncommands {\n}\n"
        );
    }

    #[test]
    fn one_transition_serializes_to_one_line() {
        let mut doc = SpecDocument::default();
        doc.fsm.insert("CONT", "a", "b");
        let text = serialize_spec(&doc);
        assert_eq!(
            text.lines().filter(|l| l.starts_with("transition")).count(),
            1
        );
    }

    #[test]
    fn crlf_is_accepted() {
        let text =
            "states {\r\n  start: control\r\n}\r\nevents {\r\n  CONT\r\n}\r\ncommands {\r\n}\r\n";
        let doc = parse_spec(text).unwrap();
        assert_eq!(doc.roster.states.len(), 1);
    }

    #[test]
    fn bundled_tables_are_consistent() {
        let doc = load_bundled_cando();
        assert!(doc.check_tables().is_empty());
        assert_eq!(doc.dispatch.len(), 17);
    }

    #[test]
    fn csv_rejects_wrong_header() {
        let err = read_trace_csv("round,state\n0,start\n").unwrap_err();
        assert_eq!(err.line, 1);
    }
}

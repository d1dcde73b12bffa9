//! Traces, per-command trace generation and field-mapped diffing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::gen::{self, GenError};
use crate::op_model::{self, OpError, Packet};
use crate::spec_io::SpecDocument;
use crate::violation::Violation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Engine {
    Ops,
    Reqs,
}

impl Engine {
    pub fn as_str(self) -> &'static str {
        match self {
            Engine::Ops => "ops",
            Engine::Reqs => "reqs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Termination {
    CmdFinish,
    Error,
    Budget,
    Violation,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::CmdFinish => "cmd_finish",
            Termination::Error => "error",
            Termination::Budget => "budget",
            Termination::Violation => "violation",
        }
    }
}

/// How a trace's source represents the packet: one composite value or
/// three separate fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PacketStyle {
    Composite,
    Split,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TraceMeta {
    pub engine: Option<Engine>,
    pub command: Option<String>,
    pub termination: Option<Termination>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRow {
    pub round: u32,
    pub state: String,
    pub event: String,
    pub command: String,
    pub packet: Packet,
    pub bytes_sent: u32,
    pub bytes_received: u32,
    pub tx_cnt: u32,
    pub tx_finish: bool,
    pub rx_finish: bool,
    pub cmd_finish: bool,
    /// Requirement ids responsible for each changed field.
    pub attribution: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub meta: TraceMeta,
    pub packet_style: PacketStyle,
    pub rows: Vec<TraceRow>,
}

impl Trace {
    /// States in row order with consecutive repeats collapsed.
    pub fn distinct_states(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in &self.rows {
            if out.last() != Some(&r.state.as_str()) {
                out.push(&r.state);
            }
        }
        out
    }
}

/// Splits composite fields into component fields before comparison.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FieldMap {
    pub pairs: Vec<(String, Vec<String>)>,
}

impl FieldMap {
    /// `packet` → `packet_addr`, `packet_cmd`, `packet_data`.
    pub fn packet() -> Self {
        FieldMap {
            pairs: vec![(
                "packet".into(),
                vec![
                    "packet_addr".into(),
                    "packet_cmd".into(),
                    "packet_data".into(),
                ],
            )],
        }
    }

    fn splits_packet(&self) -> bool {
        self.pairs.iter().any(|(c, _)| c == "packet")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiffEntry {
    pub round: u32,
    pub field: String,
    pub left: String,
    pub right: String,
}

/// Fields excluded from equivalence diffs by default.
pub const DEFAULT_IGNORE: [&str; 2] = ["tx_finish", "rx_finish"];

fn nil(v: &Option<String>) -> String {
    v.clone().unwrap_or_else(|| "nil".into())
}

fn observe(trace: &Trace, row: &TraceRow, fm: &FieldMap) -> Vec<(&'static str, String)> {
    let mut obs = vec![
        ("state", row.state.clone()),
        ("event", row.event.clone()),
        ("command", row.command.clone()),
    ];
    if trace.packet_style == PacketStyle::Split || fm.splits_packet() {
        obs.push(("packet_addr", nil(&row.packet.addr)));
        obs.push(("packet_cmd", nil(&row.packet.cmd)));
        obs.push(("packet_data", nil(&row.packet.data)));
    } else {
        obs.push((
            "packet",
            format!(
                "({}, {}, {})",
                nil(&row.packet.addr),
                nil(&row.packet.cmd),
                nil(&row.packet.data)
            ),
        ));
    }
    obs.extend([
        ("bytes_sent", row.bytes_sent.to_string()),
        ("bytes_received", row.bytes_received.to_string()),
        ("tx_cnt", row.tx_cnt.to_string()),
        ("tx_finish", row.tx_finish.to_string()),
        ("rx_finish", row.rx_finish.to_string()),
        ("cmd_finish", row.cmd_finish.to_string()),
    ]);
    obs
}

/// Compares two traces row by row after applying `fm`. Attribution and
/// fields in `ignore` are not compared. A length mismatch adds one entry on
/// field `length` after the common prefix.
pub fn diff(a: &Trace, b: &Trace, fm: &FieldMap, ignore: &BTreeSet<String>) -> Vec<DiffEntry> {
    let mut out = Vec::new();
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        let oa: BTreeMap<_, _> = observe(a, ra, fm).into_iter().collect();
        let ob: BTreeMap<_, _> = observe(b, rb, fm).into_iter().collect();
        let fields: Vec<&str> = observe(a, ra, fm)
            .into_iter()
            .map(|(f, _)| f)
            .chain(observe(b, rb, fm).into_iter().map(|(f, _)| f))
            .collect();
        let mut seen = BTreeSet::new();
        for f in fields {
            if !seen.insert(f) || ignore.contains(f) {
                continue;
            }
            let missing = String::from("<absent>");
            let l = oa.get(f).unwrap_or(&missing);
            let r = ob.get(f).unwrap_or(&missing);
            if l != r {
                out.push(DiffEntry {
                    round: ra.round,
                    field: f.to_owned(),
                    left: l.clone(),
                    right: r.clone(),
                });
            }
        }
    }
    if a.rows.len() != b.rows.len() {
        out.push(DiffEntry {
            round: a.rows.len().min(b.rows.len()) as u32,
            field: "length".into(),
            left: a.rows.len().to_string(),
            right: b.rows.len().to_string(),
        });
    }
    out
}

pub fn default_ignore() -> BTreeSet<String> {
    DEFAULT_IGNORE.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("max_rounds must be at least 1")]
    ZeroBudget,
    #[error("command {command}: {source}")]
    Ops {
        command: String,
        #[source]
        source: OpError,
    },
    #[error(transparent)]
    Gen(#[from] GenError),
}

/// Output of one engine for one command.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EngineRun {
    pub trace: Trace,
    pub violations: Vec<Violation>,
}

/// Runs `engine` once per roster command, in parallel.
pub fn trace_all(
    spec: &SpecDocument,
    engine: Engine,
    max_rounds: u32,
) -> Result<BTreeMap<String, EngineRun>, TraceError> {
    if max_rounds == 0 {
        return Err(TraceError::ZeroBudget);
    }
    let generated = match engine {
        Engine::Reqs => Some(gen::generate_model(spec)?),
        Engine::Ops => None,
    };
    let commands: Vec<String> = spec.roster.command_ids().map(|c| c.to_string()).collect();
    let results: Vec<Result<(String, EngineRun), TraceError>> = std::thread::scope(|s| {
        let handles: Vec<_> = commands
            .iter()
            .map(|cmd| {
                let generated = generated.as_ref();
                s.spawn(move || {
                    let run = match generated {
                        None => op_model::run(spec, cmd, max_rounds)
                            .map(|trace| EngineRun {
                                trace,
                                violations: Vec::new(),
                            })
                            .map_err(|source| TraceError::Ops {
                                command: cmd.clone(),
                                source,
                            })?,
                        Some(g) => gen::run_generated(spec, &g.model, cmd, max_rounds)?,
                    };
                    Ok((cmd.clone(), run))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("trace worker panicked"))
            .collect()
    });
    results.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommandResult {
    pub command: String,
    pub pass: bool,
    pub ops_rows: usize,
    pub reqs_rows: usize,
    pub ops_termination: Option<Termination>,
    pub reqs_termination: Option<Termination>,
    pub diffs: Vec<DiffEntry>,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivalenceReport {
    pub max_rounds: u32,
    pub pass: bool,
    pub commands: Vec<CommandResult>,
}

/// Runs both engines for every command and diffs each pair with the packet
/// field map, ignoring the transfer flags. A command passes when its diff
/// is empty and the requirements run recorded no violation.
pub fn equivalence_report(
    spec: &SpecDocument,
    max_rounds: u32,
) -> Result<EquivalenceReport, TraceError> {
    let ops = trace_all(spec, Engine::Ops, max_rounds)?;
    let reqs = trace_all(spec, Engine::Reqs, max_rounds)?;
    let fm = FieldMap::packet();
    let ignore = default_ignore();
    let commands: Vec<CommandResult> = ops
        .iter()
        .map(|(cmd, o)| {
            let r = &reqs[cmd];
            let diffs = diff(&o.trace, &r.trace, &fm, &ignore);
            CommandResult {
                command: cmd.clone(),
                pass: diffs.is_empty() && r.violations.is_empty(),
                ops_rows: o.trace.rows.len(),
                reqs_rows: r.trace.rows.len(),
                ops_termination: o.trace.meta.termination,
                reqs_termination: r.trace.meta.termination,
                diffs,
                violations: r.violations.clone(),
            }
        })
        .collect();
    Ok(EquivalenceReport {
        max_rounds,
        pass: commands.iter().all(|c| c.pass),
        commands,
    })
}

impl EquivalenceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let passed = self.commands.iter().filter(|c| c.pass).count();
        writeln!(s, "# Trace equivalence").unwrap();
        writeln!(s).unwrap();
        writeln!(
            s,
            "{passed}/{} commands pass (max_rounds {}): {}",
            self.commands.len(),
            self.max_rounds,
            if self.pass { "PASS" } else { "FAIL" }
        )
        .unwrap();
        writeln!(s).unwrap();
        writeln!(
            s,
            "| command | result | ops rows | reqs rows | ops end | reqs end |"
        )
        .unwrap();
        writeln!(s, "|---|---|---|---|---|---|").unwrap();
        let end = |t: Option<Termination>| t.map_or("-", Termination::as_str);
        for c in &self.commands {
            writeln!(
                s,
                "| {} | {} | {} | {} | {} | {} |",
                c.command,
                if c.pass { "pass" } else { "FAIL" },
                c.ops_rows,
                c.reqs_rows,
                end(c.ops_termination),
                end(c.reqs_termination)
            )
            .unwrap();
        }
        for c in self.commands.iter().filter(|c| !c.pass) {
            writeln!(s, "\n## {}\n", c.command).unwrap();
            for d in &c.diffs {
                writeln!(
                    s,
                    "- round {} `{}`: {} vs {}",
                    d.round, d.field, d.left, d.right
                )
                .unwrap();
            }
            for v in &c.violations {
                writeln!(s, "- {v}").unwrap();
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(round: u32, state: &str) -> TraceRow {
        TraceRow {
            round,
            state: state.into(),
            event: "CONT".into(),
            command: "LED_ON_C".into(),
            packet: Packet::default(),
            bytes_sent: 0,
            bytes_received: 0,
            tx_cnt: 0,
            tx_finish: false,
            rx_finish: false,
            cmd_finish: false,
            attribution: BTreeMap::new(),
        }
    }

    fn trace(style: PacketStyle, states: &[&str]) -> Trace {
        Trace {
            meta: TraceMeta::default(),
            packet_style: style,
            rows: states
                .iter()
                .enumerate()
                .map(|(i, s)| row(i as u32, s))
                .collect(),
        }
    }

    #[test]
    fn identical_traces_have_no_diff() {
        let t = trace(PacketStyle::Composite, &["start", "get_cmd"]);
        assert!(diff(&t, &t, &FieldMap::default(), &BTreeSet::new()).is_empty());
    }

    #[test]
    fn composite_vs_split_packet() {
        let mut a = trace(PacketStyle::Composite, &["set_vLED"]);
        let mut b = trace(PacketStyle::Split, &["set_vLED"]);
        let p = Packet {
            addr: Some("Optrode_addr".into()),
            cmd: Some("LED_ON_C".into()),
            data: Some("LED_addr".into()),
        };
        a.rows[0].packet = p.clone();
        b.rows[0].packet = p;
        assert!(diff(&a, &b, &FieldMap::packet(), &BTreeSet::new()).is_empty());
        let unmapped = diff(&a, &b, &FieldMap::default(), &BTreeSet::new());
        assert_eq!(unmapped.len(), 4);
        assert_eq!(unmapped[0].field, "packet");
    }

    #[test]
    fn state_mismatch_is_one_entry() {
        let a = trace(PacketStyle::Split, &["a", "b", "c", "d", "e"]);
        let b = trace(PacketStyle::Split, &["a", "b", "c", "d", "x"]);
        assert_eq!(
            diff(&a, &b, &FieldMap::packet(), &BTreeSet::new()),
            vec![DiffEntry {
                round: 4,
                field: "state".into(),
                left: "e".into(),
                right: "x".into()
            }]
        );
    }

    #[test]
    fn length_mismatch_is_single_entry() {
        let a = trace(PacketStyle::Split, &["a", "b", "c"]);
        let b = trace(PacketStyle::Split, &["a"]);
        let d = diff(&a, &b, &FieldMap::packet(), &BTreeSet::new());
        assert_eq!(d.len(), 1);
        assert_eq!((d[0].round, d[0].field.as_str()), (1, "length"));
    }

    #[test]
    fn ignore_and_attribution() {
        let a = trace(PacketStyle::Split, &["a"]);
        let mut b = a.clone();
        b.rows[0].tx_finish = true;
        b.rows[0]
            .attribution
            .insert("state".into(), vec!["1.01".into()]);
        assert!(diff(&a, &b, &FieldMap::packet(), &default_ignore()).is_empty());
        assert_eq!(diff(&a, &b, &FieldMap::packet(), &BTreeSet::new()).len(), 1);
    }

    #[test]
    fn distinct_states_collapses_repeats() {
        let t = trace(PacketStyle::Split, &["a", "a", "b", "a"]);
        assert_eq!(t.distinct_states(), vec!["a", "b", "a"]);
    }
}

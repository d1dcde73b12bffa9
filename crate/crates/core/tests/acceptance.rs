//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use cando_core::fsm::{self, check_all_statemaps, check_cando, check_totality, lookup_next};
use cando_core::gen::{self, generate_model, initial_env, FSM_COMPONENT};
use cando_core::op_model;
use cando_core::report::render_markdown;
use cando_core::req::{fire_round, run_reqs, Env, HaltPolicy, Value};
use cando_core::spec_io::bundled_cando_text;
use cando_core::trace::equivalence_report;
use cando_core::{load_bundled_cando, parse_spec, serialize_spec, SpecDocument, ViolationCode};

type Outcome = Result<String, String>;

type Criterion = (&'static str, fn() -> Outcome);

/// Expected code, event, from, to.
type Mutation<'a> = (ViolationCode, &'a str, &'a str, &'a str);

const MAX_ROUNDS: u32 = 500;

fn vled_command(spec: &SpecDocument) -> String {
    spec.dispatch
        .iter()
        .find(|(_, s)| s.as_str() == "set_vLED")
        .map(|(c, _)| c.to_string())
        .expect("a command dispatches to set_vLED")
}

fn all_violations(spec: &SpecDocument) -> Vec<cando_core::Violation> {
    let mut v = check_all_statemaps(&spec.roster, &spec.fsm).expect("roster covers table");
    v.extend(check_totality(&spec.roster, &spec.fsm));
    v.extend(check_cando(&spec.roster, &spec.fsm));
    v
}

fn c1_reference_trace() -> Outcome {
    let spec = load_bundled_cando();
    let cmd = vled_command(&spec);
    let t0 = Instant::now();
    let trace = op_model::run(&spec, &cmd, MAX_ROUNDS).map_err(|e| e.to_string())?;
    let elapsed = t0.elapsed();
    let expected = [
        "start",
        "get_cmd",
        "set_vLED",
        "send_packet_6",
        "receive_packet_28",
        "set_sDac",
        "send_packet_3",
        "receive_packet_27",
        "cmd_finish",
    ];
    let got = trace.distinct_states();
    if got != expected {
        return Err(format!("distinct states {got:?}"));
    }
    if elapsed >= Duration::from_secs(1) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!(
        "{cmd}: {} rows, {} distinct states, {elapsed:?}",
        trace.rows.len(),
        got.len()
    ))
}

fn c2_constraint_catalogue() -> Outcome {
    use ViolationCode::*;
    let base = load_bundled_cando();
    let clean = all_violations(&base);
    if !clean.is_empty() {
        return Err(format!("unmutated table has {} violations", clean.len()));
    }
    let sel = "LED_OFF_E";
    let mutations: [Mutation; 19] = [
        (C1_1, sel, "send_packet_2", "start"),
        (C1_2, sel, "start", "send_packet_3"),
        (C1_3, sel, "chip_rst", "send_packet_3"),
        (C1_4, sel, "error_", "send_packet_3"),
        (C1_5, sel, "cmd_finish", "get_cmd"),
        (C1_6, sel, "set_vLED", "receive_packet_28"),
        (C1_7, sel, "receive_packet_24", "send_packet_3"),
        (C1_8, sel, "get_cmd", "send_packet_3"),
        (C2, "CONT", "send_packet_6", "set_sDac"),
        (C3, "SPI_TX_FINISH", "send_packet_6", "send_packet_3"),
        (C4, "SPI_RX_FINISH", "receive_packet_28", "cmd_finish"),
        (C5, "CONT", "set_vLED", "error_"),
        (C6, "CONT", "chip_rst", "get_cmd"),
        (C7, "CONT", "start", "error_"),
        (C8, "CONT", "error_", "error_"),
        (C9, "GET_CMD_E", "error_", "error_"),
        (C10, "GET_CMD_E", "chip_rst", "error_"),
        (C11, "CONT", "receive_packet_28", "error_"),
        (C12, "CONT", "error_", "get_cmd"),
    ];
    let mut failures = Vec::new();
    for (code, e, s, t) in mutations {
        let mut spec = base.clone();
        spec.fsm.insert(e, s, t);
        let codes: BTreeSet<ViolationCode> = all_violations(&spec).iter().map(|v| v.code).collect();
        if codes != BTreeSet::from([code]) {
            failures.push(format!("{code} ({e}, {s} -> {t}) gave {codes:?}"));
        }
    }
    if failures.is_empty() {
        Ok("19 targeted mutations plus the clean table".into())
    } else {
        Err(failures.join("; "))
    }
}

fn c3_totality() -> Outcome {
    let spec = load_bundled_cando();
    let (e, s) = (spec.roster.events.len(), spec.roster.states.len());
    if (e, s) != (21, 34) {
        return Err(format!("roster is {e} events x {s} states"));
    }
    if spec.fsm.len() != 714 {
        return Err(format!("{} transitions", spec.fsm.len()));
    }
    let v = check_totality(&spec.roster, &spec.fsm);
    if !v.is_empty() {
        return Err(format!("{} totality violations", v.len()));
    }
    Ok("21 x 34 = 714 transitions".into())
}

fn c4_equivalence() -> Outcome {
    let spec = load_bundled_cando();
    let t0 = Instant::now();
    let report = equivalence_report(&spec, MAX_ROUNDS).map_err(|e| e.to_string())?;
    let elapsed = t0.elapsed();
    let diffs: usize = report.commands.iter().map(|c| c.diffs.len()).sum();
    if report.commands.len() != 17 || !report.pass || diffs != 0 {
        let failing: Vec<&str> = report
            .commands
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.command.as_str())
            .collect();
        return Err(format!(
            "{} commands, {diffs} diffs, failing {failing:?}\n{}",
            report.commands.len(),
            report.to_markdown()
        ));
    }
    if elapsed >= Duration::from_secs(10) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("17/17 commands, 0 diffs, {elapsed:?}"))
}

fn c5_oracle() -> Outcome {
    let spec = load_bundled_cando();
    let g = generate_model(&spec).map_err(|e| e.to_string())?;
    let cmd = vled_command(&spec);
    let mut cases = 0;
    let mut failures = Vec::new();
    for e in spec.roster.event_ids() {
        for s in spec.roster.state_ids() {
            let mut env = initial_env(&g.model, &cmd);
            env.set_mode(FSM_COMPONENT, s.as_str());
            env.set_signal(gen::sig::CURRENT_EVENT, Value::sym(e.as_str()));
            let out = fire_round(&g.model, &env, None);
            let expected =
                lookup_next(&spec.fsm, e.as_str(), s.as_str()).map_err(|x| x.to_string())?;
            let got = out.end_env.sole_mode(FSM_COMPONENT);
            if got != Some(expected.as_str()) {
                failures.push(format!("({e}, {s}): {got:?} vs {expected}"));
            }
            cases += 1;
        }
    }
    if failures.is_empty() && cases == 714 {
        Ok(format!("{cases} (event, state) cases agree"))
    } else {
        Err(format!(
            "{cases} cases, {} disagree: {:?}",
            failures.len(),
            &failures[..failures.len().min(5)]
        ))
    }
}

fn reqs_runs(spec: &SpecDocument) -> Result<Vec<(String, Vec<Env>)>, String> {
    let g = generate_model(spec).map_err(|e| e.to_string())?;
    Ok(spec
        .roster
        .command_ids()
        .map(|c| {
            let run = run_reqs(
                &g.model,
                initial_env(&g.model, c.as_str()),
                gen::run_finished,
                MAX_ROUNDS,
                HaltPolicy::Collect,
            );
            (c.to_string(), run.envs)
        })
        .collect())
}

fn c6_invariants() -> Outcome {
    let spec = load_bundled_cando();
    let mut rounds = 0;
    for (cmd, envs) in reqs_runs(&spec)? {
        for env in &envs {
            let int = |n: &str| env.signal(n).as_int().unwrap_or(-1);
            let (bs, br, tx) = (
                int(gen::sig::BYTES_SENT),
                int(gen::sig::BYTES_RECEIVED),
                int(gen::sig::TX_CNT),
            );
            if !(0..=3).contains(&bs) || !(0..=3).contains(&br) || !(0..=2).contains(&tx) {
                return Err(format!(
                    "{cmd} round {}: counters ({bs}, {br}, {tx})",
                    env.round
                ));
            }
            let active = env.modes.get(FSM_COMPONENT).map_or(0, BTreeSet::len);
            if active != 1 {
                return Err(format!("{cmd} round {}: {active} active states", env.round));
            }
            rounds += 1;
        }
        let trace = op_model::run(&spec, &cmd, MAX_ROUNDS).map_err(|e| e.to_string())?;
        if let Some(r) = trace
            .rows
            .iter()
            .find(|r| r.bytes_sent > 3 || r.bytes_received > 3 || r.tx_cnt > 2)
        {
            return Err(format!(
                "{cmd} ops round {}: counters out of range",
                r.round
            ));
        }
    }
    Ok(format!(
        "17 commands, {rounds} requirement-engine boundaries checked"
    ))
}

fn c7_self_loops() -> Outcome {
    let spec = load_bundled_cando();
    let mut checked = 0;
    for (cmd, envs) in reqs_runs(&spec)? {
        for w in envs.windows(2) {
            let ev = w[0].signal(gen::sig::CURRENT_EVENT).as_sym().unwrap_or("");
            if ev == fsm::SPI_TX_FINISH || ev == fsm::SPI_RX_FINISH {
                checked += 1;
                let (a, b) = (w[0].sole_mode(FSM_COMPONENT), w[1].sole_mode(FSM_COMPONENT));
                if a != b {
                    return Err(format!(
                        "{cmd} round {}: {a:?} -> {b:?} under {ev}",
                        w[0].round
                    ));
                }
            }
        }
    }
    if checked == 0 {
        return Err("no SPI_*_FINISH rounds observed".into());
    }
    Ok(format!("{checked} SPI_*_FINISH rounds keep their state"))
}

fn c8_round_trip_and_golden() -> Outcome {
    let text = bundled_cando_text();
    let spec = parse_spec(text).map_err(|e| e.to_string())?;
    let again = parse_spec(&serialize_spec(&spec)).map_err(|e| e.to_string())?;
    if again != spec {
        return Err("parse(serialize(spec)) differs".into());
    }
    if serialize_spec(&again) != serialize_spec(&spec) {
        return Err("serialization is not stable".into());
    }
    let a = render_markdown(&generate_model(&spec).map_err(|e| e.to_string())?.model);
    let b = render_markdown(&generate_model(&spec).map_err(|e| e.to_string())?.model);
    if a != b {
        return Err("report output differs between runs".into());
    }
    if !a.contains("1.06: set_vLED to send_packet_6") {
        return Err("report lacks the set_vLED transition title".into());
    }
    Ok(format!(
        "round trip holds; report is {} bytes and stable",
        a.len()
    ))
}

fn c9_scale() -> Outcome {
    let spec = load_bundled_cando();
    let g = generate_model(&spec).map_err(|e| e.to_string())?;
    let c = g.report.counts;
    let line = format!(
        "records {} vs 26, definitions {} vs 105, requirements {} vs 113",
        c.data_records, c.definitions, c.requirements
    );
    if c.data_records == 0 || c.definitions == 0 || c.requirements == 0 {
        return Err(line);
    }
    Ok(line)
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("reference trace reproduction", c1_reference_trace),
        ("constraint catalogue", c2_constraint_catalogue),
        ("totality", c3_totality),
        ("cross-engine equivalence", c4_equivalence),
        ("exhaustive transition oracle", c5_oracle),
        ("invariant preservation", c6_invariants),
        ("self-loop law", c7_self_loops),
        ("round trip and golden report", c8_round_trip_and_golden),
        ("generation scale", c9_scale),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

//! `cando`: check, simulate, compare and report on a CANDO FSM specification.
//!
//! Exit codes: 0 success, 1 violations or differences found, 2 the input
//! could not be loaded, 3 bad usage.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cando_core::fsm::{check_all_statemaps, check_cando, check_roster, check_totality};
use cando_core::gen::{self, generate_model};
use cando_core::report::{self, Format};
use cando_core::req::serialize_req;
use cando_core::spec_io::{read_spec_file, read_trace_file, write_trace_csv};
use cando_core::trace::{default_ignore, diff, equivalence_report, FieldMap};
use cando_core::violation::sort_violations;
use cando_core::{load_bundled_cando, op_model, SpecDocument};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

const OK: u8 = 0;
const FOUND: u8 = 1;
const LOAD: u8 = 2;
const USAGE: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "cando",
    version,
    about = "Verification toolkit for the CANDO optrode controller FSM"
)]
struct Cli {
    /// Specification file; the bundled CANDO table is used when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    spec: Option<PathBuf>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run every structural check and list the violations.
    Check,
    /// Run one command through an engine and emit its trace as CSV.
    Simulate {
        #[arg(long)]
        command: String,
        #[arg(long, value_enum, default_value_t = EngineArg::Ops)]
        engine: EngineArg,
        #[arg(long, default_value_t = 500, value_parser = clap::value_parser!(u32).range(1..))]
        max_rounds: u32,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare two trace CSV files row by row.
    Diff {
        a: PathBuf,
        b: PathBuf,
        /// Fields to leave out, comma separated. Defaults to tx_finish,rx_finish.
        #[arg(long, value_delimiter = ',')]
        ignore: Option<Vec<String>>,
    },
    /// Check that both engines agree on every command.
    Verify {
        #[arg(long, default_value_t = 500, value_parser = clap::value_parser!(u32).range(1..))]
        max_rounds: u32,
        #[arg(long, value_enum, default_value_t = VerifyFormat::Md)]
        format: VerifyFormat,
    },
    /// Render the generated requirements.
    Report {
        #[arg(long, value_enum, default_value_t = ReportFormat::Md)]
        format: ReportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum EngineArg {
    Ops,
    Reqs,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum VerifyFormat {
    Md,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ReportFormat {
    Md,
    Html,
    /// Plain `.req` text of the model.
    Req,
}

fn load(spec: Option<&Path>) -> Result<SpecDocument, u8> {
    match spec {
        None => Ok(load_bundled_cando()),
        Some(p) => read_spec_file(p).map_err(|e| {
            eprintln!("error: {e}");
            LOAD
        }),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), u8> {
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(p) => fs::write(p, text).map_err(|e| {
            eprintln!("error: cannot write {}: {e}", p.display());
            LOAD
        }),
    }
}

fn check(spec: &SpecDocument) -> Result<u8, u8> {
    let mut v = check_roster(&spec.roster);
    v.extend(spec.check_tables());
    match check_all_statemaps(&spec.roster, &spec.fsm) {
        Ok(found) => v.extend(found),
        Err(e) => {
            eprintln!("error: {e}");
            return Err(LOAD);
        }
    }
    v.extend(check_totality(&spec.roster, &spec.fsm));
    v.extend(check_cando(&spec.roster, &spec.fsm));
    sort_violations(&mut v);
    for x in &v {
        println!("{x}");
    }
    println!("{} transitions, {} violation(s)", spec.fsm.len(), v.len());
    Ok(if v.is_empty() { OK } else { FOUND })
}

fn simulate(
    spec: &SpecDocument,
    command: &str,
    engine: EngineArg,
    max_rounds: u32,
    out: Option<&Path>,
) -> Result<u8, u8> {
    if !spec.roster.has_command(command) {
        eprintln!("error: unknown command `{command}`");
        return Err(USAGE);
    }
    let (trace, violations) = match engine {
        EngineArg::Ops => {
            let t = op_model::run(spec, command, max_rounds).map_err(|e| {
                eprintln!("error: {e}");
                LOAD
            })?;
            (t, Vec::new())
        }
        EngineArg::Reqs => {
            let g = generate_model(spec).map_err(|e| {
                eprintln!("error: {e}");
                LOAD
            })?;
            let run = gen::run_generated(spec, &g.model, command, max_rounds).map_err(|e| {
                eprintln!("error: {e}");
                LOAD
            })?;
            (run.trace, run.violations)
        }
    };
    emit(&write_trace_csv(&trace), out)?;
    for v in &violations {
        eprintln!("{v}");
    }
    if let Some(t) = trace.meta.termination {
        eprintln!("{} rounds, terminated by {}", trace.rows.len(), t.as_str());
    }
    Ok(if violations.is_empty() { OK } else { FOUND })
}

fn diff_files(a: &Path, b: &Path, ignore: Option<Vec<String>>) -> Result<u8, u8> {
    let read = |p: &Path| {
        read_trace_file(p).map_err(|e| {
            eprintln!("error: {e}");
            LOAD
        })
    };
    let (ta, tb) = (read(a)?, read(b)?);
    let ignore: BTreeSet<String> = match ignore {
        None => default_ignore(),
        Some(v) => v.into_iter().filter(|s| !s.is_empty()).collect(),
    };
    let d = diff(&ta, &tb, &FieldMap::packet(), &ignore);
    for x in &d {
        println!("round {}: {}: {} != {}", x.round, x.field, x.left, x.right);
    }
    println!("{} difference(s)", d.len());
    Ok(if d.is_empty() { OK } else { FOUND })
}

fn verify(spec: &SpecDocument, max_rounds: u32, format: VerifyFormat) -> Result<u8, u8> {
    let r = equivalence_report(spec, max_rounds).map_err(|e| {
        eprintln!("error: {e}");
        LOAD
    })?;
    match format {
        VerifyFormat::Md => print!("{}", r.to_markdown()),
        VerifyFormat::Json => println!("{}", r.to_json()),
    }
    Ok(if r.pass { OK } else { FOUND })
}

fn render(spec: &SpecDocument, format: ReportFormat, out: Option<&Path>) -> Result<u8, u8> {
    let g = generate_model(spec).map_err(|e| {
        eprintln!("error: {e}");
        LOAD
    })?;
    let text = match format {
        ReportFormat::Md => report::render(&g.model, Format::Markdown),
        ReportFormat::Html => report::render(&g.model, Format::Html),
        ReportFormat::Req => serialize_req(&g.model),
    };
    emit(&text, out)?;
    eprintln!("{}", g.report.summary());
    Ok(OK)
}

fn run(cli: Cli) -> Result<u8, u8> {
    if let Cmd::Diff { a, b, ignore } = cli.command {
        return diff_files(&a, &b, ignore);
    }
    let spec = load(cli.spec.as_deref())?;
    match cli.command {
        Cmd::Check => check(&spec),
        Cmd::Simulate {
            command,
            engine,
            max_rounds,
            out,
        } => simulate(&spec, &command, engine, max_rounds, out.as_deref()),
        Cmd::Verify { max_rounds, format } => verify(&spec, max_rounds, format),
        Cmd::Report { format, out } => render(&spec, format, out.as_deref()),
        Cmd::Diff { .. } => unreachable!("handled before loading a spec"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => OK,
                _ => USAGE,
            };
            return ExitCode::from(code);
        }
    };
    ExitCode::from(run(cli).unwrap_or_else(|code| code))
}

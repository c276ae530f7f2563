//! Command-line front end: argument parsing, command dispatch and report
//! rendering. The binary is a thin wrapper around [`run`].

pub mod args;
pub mod commands;
pub mod report;

use args::{Cli, Format};
use clap::Parser;
use commands::{run_command, Failure};
use report::{flatten_csv, Obj, SCHEMA};
use serde_json::Value;
use std::io::Write;
use std::time::Instant;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_UNSUPPORTED: u8 = 3;

fn emit(text: &str, out: Option<&std::path::Path>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn render_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

/// Parses `argv` and runs the command; returns the process exit status.
pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let start = Instant::now();
    let out = cli.opts.out.as_deref();
    match run_command(&cli.command, &cli.opts) {
        Ok(mut o) => {
            for w in &o.warnings {
                eprintln!("warning: {w}");
            }
            if cli.opts.timing {
                if let Value::Object(m) = &mut o.report {
                    m.insert(
                        "timing".into(),
                        Obj::new().set("runtime_ms", report::num(start.elapsed().as_secs_f64() * 1e3)).into(),
                    );
                }
            }
            let text = match (cli.opts.format, &o.table) {
                (Format::Json, _) => render_json(&o.report),
                (Format::Csv, Some(t)) => t.to_csv(),
                (Format::Csv, None) => flatten_csv(&o.report),
            };
            if let Err(e) = emit(&text, out) {
                eprintln!("error: cannot write report: {e}");
                return EXIT_USAGE;
            }
            if o.pass {
                EXIT_OK
            } else {
                EXIT_FAILED
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Unsupported(reason)) => {
            eprintln!("error: {reason}");
            let v: Value = Obj::new().set("schema", SCHEMA).set("error", "unsupported").set("reason", reason).into();
            let _ = emit(&render_json(&v), out);
            EXIT_UNSUPPORTED
        }
    }
}

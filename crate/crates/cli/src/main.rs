//! Command-line driver: validates algebra presentations, computes compatible
//! Cartan metrics (kernel path), minimizes orbit volume over the fixed set
//! (descent path), cross-checks both, and serves the built-in catalog.
//!
//! Exit codes: 0 = every certificate passed; 1 = certified failure (the input
//! is provably outside the domain, e.g. not semisimple); 2 = numerical
//! non-certification (a search or a gate failed); 3 = input error.

mod report;

use std::io::{IsTerminal, Read, Write};

use clap::{Parser, Subcommand};

use mostow::catalog;
use mostow::document::{self, DocumentError, PresentationDocument};
use report::{Flags, Outcome, Pipeline};

const EXIT_INPUT_ERROR: i32 = 3;

#[derive(Parser)]
#[command(
    name = "mostow",
    version,
    about = "Compatible Cartan decompositions and totally geodesic orbits in SL(n,R)/SO(n)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Relative tolerance for rank decisions and certificates.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,

    /// Seed for the deterministic interior-point and sampling searches.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Maximum accepted descent steps for the minimizer.
    #[arg(long, global = true, default_value_t = 1000)]
    max_iter: usize,

    /// Human-readable report with stage timings instead of JSON.
    #[arg(long, global = true, conflicts_with = "json")]
    pretty: bool,

    /// JSON report on standard output (the default).
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check shape, independence, bracket closure, semisimplicity, and the
    /// declared split's Killing signs.
    Validate { file: String },
    /// Kernel path: compatible metric S, orbit certificate at S⁻¹, and the
    /// normal triple system.
    Decompose { file: String },
    /// Descent path: minimize the orbit-volume objective over the fixed set.
    Minimize { file: String },
    /// Full pipeline: both paths, cross-checks, and the variational f(t)
    /// suite along seeded normal geodesics.
    Verify { file: String },
    /// Emit a built-in presentation document, or list all entries.
    Catalog { name: Option<String> },
}

fn main() {
    let cli = Cli::parse();
    let flags = Flags { tol: cli.tol, seed: cli.seed, max_iter: cli.max_iter };
    let code = match &cli.command {
        Command::Catalog { name } => run_catalog(name.as_deref(), cli.pretty),
        Command::Validate { file } => run_pipeline("validate", file, &flags, cli.pretty),
        Command::Decompose { file } => run_pipeline("decompose", file, &flags, cli.pretty),
        Command::Minimize { file } => run_pipeline("minimize", file, &flags, cli.pretty),
        Command::Verify { file } => run_pipeline("verify", file, &flags, cli.pretty),
    };
    std::process::exit(code);
}

fn use_color() -> bool {
    std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty())
        && std::io::stdout().is_terminal()
}

fn input_error(message: impl std::fmt::Display) -> i32 {
    eprintln!("error: {message}");
    EXIT_INPUT_ERROR
}

fn read_input(file: &str) -> Result<Vec<u8>, String> {
    if file == "-" {
        let mut buf = Vec::new();
        std::io::stdin()
            .read_to_end(&mut buf)
            .map_err(|e| format!("reading standard input: {e}"))?;
        Ok(buf)
    } else {
        std::fs::read(file).map_err(|e| format!("reading {file}: {e}"))
    }
}

fn load_document(file: &str) -> Result<(Vec<u8>, PresentationDocument), String> {
    let bytes = read_input(file)?;
    let doc = document::parse_presentation(&bytes).map_err(|e| match e {
        DocumentError::Parse { .. } | DocumentError::Schema { .. } => e.to_string(),
    })?;
    Ok((bytes, doc))
}

fn run_pipeline(command: &str, file: &str, flags: &Flags, pretty: bool) -> i32 {
    let (bytes, doc) = match load_document(file) {
        Ok(x) => x,
        Err(e) => return input_error(e),
    };
    let mut pipeline = Pipeline::new(command, &bytes, &doc, flags, pretty);

    if let Some(split) = pipeline.run_validate(&doc) {
        match command {
            "validate" => {}
            "decompose" => {
                pipeline.run_decompose(&split, false);
            }
            "minimize" => {
                pipeline.run_minimize(&split);
            }
            "verify" => {
                let kernel = pipeline.run_decompose(&split, true);
                if let Some(p_star) = pipeline.run_minimize(&split) {
                    let base = kernel
                        .as_ref()
                        .map(|(_, base, kernel_dim)| (base, *kernel_dim));
                    pipeline.run_cross_check(&split, &p_star, base);
                }
            }
            _ => unreachable!("commands are enumerated by the parser"),
        }
    }

    let (report, outcome) = pipeline.finish();
    let rendered = if pretty {
        report::render_pretty(&report, use_color())
    } else {
        let mut json =
            serde_json::to_string_pretty(&report).expect("report serialization is infallible");
        json.push('\n');
        json
    };
    if write_stdout(rendered.as_bytes()).is_err() {
        return EXIT_INPUT_ERROR;
    }
    if outcome != Outcome::Pass {
        for failure in &report.failures {
            eprintln!("{}: {failure}", report.outcome);
        }
    }
    outcome.exit_code()
}

fn run_catalog(name: Option<&str>, pretty: bool) -> i32 {
    match name {
        Some(name) => match catalog::catalog_entry(name) {
            Some(doc) => {
                let text = document::emit_presentation(&doc);
                if write_stdout(text.as_bytes()).is_err() {
                    return EXIT_INPUT_ERROR;
                }
                0
            }
            None => {
                let known: Vec<String> = catalog::catalog()
                    .iter()
                    .filter_map(|d| d.name.clone())
                    .collect();
                input_error(format!(
                    "unknown catalog entry {name:?}; known entries: {}",
                    known.join(", ")
                ))
            }
        },
        None => {
            let entries = catalog::catalog();
            let text = if pretty {
                let mut s = String::from("built-in presentations:\n");
                for d in &entries {
                    s.push_str(&format!(
                        "  {:<20} n = {}, dim = {}\n",
                        d.name.as_deref().unwrap_or("(unnamed)"),
                        d.n,
                        d.dim()
                    ));
                }
                s
            } else {
                #[derive(serde::Serialize)]
                struct Entry<'a> {
                    name: &'a str,
                    n: usize,
                    dim: usize,
                }
                let rows: Vec<Entry> = entries
                    .iter()
                    .map(|d| Entry {
                        name: d.name.as_deref().unwrap_or(""),
                        n: d.n,
                        dim: d.dim(),
                    })
                    .collect();
                let mut json = serde_json::to_string_pretty(&rows)
                    .expect("catalog serialization is infallible");
                json.push('\n');
                json
            };
            if write_stdout(text.as_bytes()).is_err() {
                return EXIT_INPUT_ERROR;
            }
            0
        }
    }
}

/// Writes to stdout, reporting broken pipes and disk errors on stderr.
fn write_stdout(bytes: &[u8]) -> Result<(), ()> {
    let mut out = std::io::stdout().lock();
    out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| {
        eprintln!("error: writing report: {e}");
    })
}

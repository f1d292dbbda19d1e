use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kstab_core::caserunner::{
    load_case, load_corpus, render_table, run_case, run_corpus, CorpusReport, Family, RunOptions, Verdict,
};

#[derive(Parser)]
#[command(name = "kstab", version, about = "Exact S-invariants and β for the case corpus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a single case file.
    Compute {
        #[arg(long)]
        case: PathBuf,
        #[arg(long)]
        json: bool,
        /// Also evaluate the numeric midpoint oracle.
        #[arg(long)]
        oracle: bool,
    },
    /// Run every case in a corpus directory against its expected values.
    Verify {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_parser = parse_family)]
        family: Option<Family>,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        oracle: bool,
    },
    /// List the cases of a corpus directory.
    List {
        #[arg(long)]
        corpus: PathBuf,
    },
}

fn parse_family(s: &str) -> Result<Family, String> {
    Family::parse(s).ok_or_else(|| format!("unknown family {s:?}, expected I, II or III"))
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize")
}

fn compute(path: &Path, as_json: bool, oracle: bool) -> u8 {
    let case = match load_case(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            return 2;
        }
    };
    let report = run_case(&case, RunOptions { oracle });
    let code = match report.verdict {
        Verdict::Match | Verdict::AnomalousInformational => 0,
        Verdict::Mismatch | Verdict::Error => 1,
    };
    if as_json {
        emit(&format!("{}\n", json(&report)));
    } else {
        let mut text = render_table(&CorpusReport {
            cases: vec![report.clone()],
            load_failures: vec![],
        });
        for (k, v) in &report.computed {
            let want = report.expected.get(k).map(|e| format!("   expected {e}")).unwrap_or_default();
            text += &format!("  {k:<30} {v}{want}\n");
        }
        for (k, v) in &report.printed {
            text += &format!("  {k:<30} printed {v}\n");
        }
        emit(&text);
    }
    code
}

fn verify(dir: &Path, family: Option<Family>, as_json: bool, oracle: bool) -> u8 {
    match run_corpus(dir, family, RunOptions { oracle }) {
        Ok(report) => {
            if as_json {
                emit(&format!("{}\n", json(&report)));
            } else {
                emit(&render_table(&report));
            }
            report.exit_code() as u8
        }
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            2
        }
    }
}

fn list(dir: &Path) -> u8 {
    match load_corpus(dir) {
        Ok((cases, failures)) => {
            let text: String = cases
                .iter()
                .map(|c| format!("{:<28} {:<4} {:<9} {}\n", c.id, c.family, c.kind, c.path.display()))
                .collect();
            emit(&text);
            for f in &failures {
                eprintln!("{}: [{}] {}", f.path.display(), f.code, f.message);
            }
            if failures.is_empty() {
                0
            } else {
                2
            }
        }
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            2
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Compute { case, json, oracle } => compute(&case, json, oracle),
        Command::Verify {
            corpus,
            family,
            json,
            oracle,
        } => verify(&corpus, family, json, oracle),
        Command::List { corpus } => list(&corpus),
    };
    ExitCode::from(code)
}

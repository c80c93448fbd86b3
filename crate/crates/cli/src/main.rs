use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vogue_core::fixture::{make_fixture, FixtureParams, Regime};
use vogue_core::pipeline::{run, PipelineConfig, PipelineError, Stage};

#[derive(Parser)]
#[command(name = "vogue", version, about = "Detect vogue term pairs and model their diffusion across institutions")]
struct Cli {
    /// Log verbosity (-v info, -vv debug); RUST_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline, or one stage of it, from a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// all, network, backbone, vogue, diffusion, journals or regress.
        #[arg(long, default_value = "all")]
        stage: Stage,
        /// Artifact directory, overriding the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads, overriding the config (0 = all cores).
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write a synthetic corpus with planted vogue pairs and a ready config.
    Fixture {
        #[arg(long, default_value = "fixture")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// hierarchical or niche.
        #[arg(long, default_value = "hierarchical")]
        regime: Regime,
        #[arg(long)]
        schools: Option<usize>,
        #[arg(long)]
        docs_per_school: Option<usize>,
        #[arg(long)]
        vogue_pairs: Option<usize>,
        #[arg(long)]
        foundation_pairs: Option<usize>,
    },
    /// Pretty-print an artifact (CSV, JSON, JSONL or DOT).
    Inspect {
        path: PathBuf,
        /// Rows to show for tables.
        #[arg(long, default_value_t = 40)]
        limit: usize,
    },
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
}

fn run_pipeline(
    config: &Path,
    stage: Stage,
    out: Option<PathBuf>,
    threads: Option<usize>,
    seed: Option<u64>,
) -> Result<(), PipelineError> {
    let mut cfg = PipelineConfig::load(config)?;
    if let Some(out) = out {
        cfg.out = out;
    }
    if let Some(t) = threads {
        cfg.threads = t;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let report = run(&cfg, stage)?;
    let names = |v: &[Stage]| v.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ");
    println!("ran: {}", if report.ran.is_empty() { "-".into() } else { names(&report.ran) });
    if !report.skipped.is_empty() {
        println!("up to date: {}", names(&report.skipped));
    }
    println!("artifacts in {}", cfg.out.display());
    Ok(())
}

fn print_table(text: &str, limit: usize, w: &mut impl Write) -> io::Result<()> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(text.as_bytes());
    let rows: Vec<Vec<String>> = rdr
        .records()
        .filter_map(Result::ok)
        .map(|r| r.iter().map(String::from).collect())
        .collect();
    let shown = &rows[..rows.len().min(limit + 1)];
    let cols = shown.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| shown.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    for (i, row) in shown.iter().enumerate() {
        let line: Vec<String> = row.iter().zip(&widths).map(|(s, &wd)| format!("{s:<wd$}")).collect();
        writeln!(w, "{}", line.join("  ").trim_end())?;
        if i == 0 {
            writeln!(w, "{}", widths.iter().map(|&wd| "-".repeat(wd)).collect::<Vec<_>>().join("  "))?;
        }
    }
    if rows.len() > shown.len() {
        writeln!(w, "... {} more rows", rows.len() - shown.len())?;
    }
    Ok(())
}

fn inspect(path: &Path, limit: usize) -> Result<(), PipelineError> {
    let text = fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let stdout = io::stdout();
    let mut w = stdout.lock();
    let bad = |e: &dyn std::fmt::Display| PipelineError::Validation(format!("{}: {e}", path.display()));
    let res = match ext {
        "csv" => print_table(&text, limit, &mut w),
        "json" => {
            let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| bad(&e))?;
            writeln!(w, "{}", serde_json::to_string_pretty(&v).unwrap_or_default())
        }
        "jsonl" => text.lines().take(limit).try_for_each(|l| {
            let v: serde_json::Value = serde_json::from_str(l).unwrap_or(serde_json::Value::String(l.into()));
            writeln!(w, "{}", serde_json::to_string_pretty(&v).unwrap_or_default())
        }),
        "dot" => {
            let nodes = text.lines().filter(|l| l.contains('[') && !l.contains("->") && !l.contains("--")).count();
            let edges = text.lines().filter(|l| l.contains("->") || l.contains("--")).count();
            writeln!(w, "{nodes} nodes, {edges} edges").and_then(|()| w.write_all(text.as_bytes()))
        }
        _ => return Err(PipelineError::Config(format!("cannot inspect {}: unknown extension", path.display()))),
    };
    // a closed pipe (e.g. `| head`) is not an error
    match res {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(PipelineError::Internal(e.to_string())),
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.verbose);
    let result = match cli.command {
        Command::Run {
            config,
            stage,
            out,
            threads,
            seed,
        } => run_pipeline(&config, stage, out, threads, seed),
        Command::Fixture {
            out,
            seed,
            regime,
            schools,
            docs_per_school,
            vogue_pairs,
            foundation_pairs,
        } => {
            let d = FixtureParams::default();
            let params = FixtureParams {
                seed,
                regime,
                schools: schools.unwrap_or(d.schools),
                docs_per_school: docs_per_school.unwrap_or(d.docs_per_school),
                vogue_pairs: vogue_pairs.unwrap_or(d.vogue_pairs),
                foundation_pairs: foundation_pairs.unwrap_or(d.foundation_pairs),
                ..d
            };
            make_fixture(&params)
                .write_to(&out)
                .map(|()| println!("fixture written to {}; run with --config {}", out.display(), out.join("vogue.conf").display()))
                .map_err(|e| PipelineError::io(&out, e))
        }
        Command::Inspect { path, limit } => inspect(&path, limit),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};

use fermion_rg::config::{load_config, Format, Mode};
use fermion_rg::report::to_json_text;
use fermion_rg::run::{run, Outcome};
use fermion_rg::Error;

const EXIT_VIOLATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Verify,
    Bounds,
    Greens,
    Scaling,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Verify => Mode::Verify,
            ModeArg::Bounds => Mode::Bounds,
            ModeArg::Greens => Mode::Greens,
            ModeArg::Scaling => Mode::Scaling,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

/// Property suites, bound reports and Green's function studies for a gapped
/// lattice fermion model.
#[derive(Debug, Parser)]
#[command(name = "fermion-rg", version)]
struct Cli {
    /// Run mode; falls back to `run.mode` of the config.
    #[arg(value_enum)]
    mode: Option<ModeArg>,
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `run.out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format (overrides `run.format`).
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Root seed (overrides `run.seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Smallness parameter (overrides `run.epsilon`).
    #[arg(long)]
    epsilon: Option<f64>,
}

fn write(path: &Path, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn emit(outcome: &Outcome, dir: &Path, format: Format, seconds: f64) -> Result<Vec<PathBuf>, String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    let mode = outcome.mode.as_str();
    let mut written = Vec::new();
    match format {
        Format::Json => {
            let p = dir.join(format!("{mode}.json"));
            write(&p, &to_json_text(&outcome.report))?;
            written.push(p);
        }
        Format::Csv => {
            for t in &outcome.tables {
                let p = dir.join(format!("{}.csv", t.name));
                write(&p, &t.to_csv().map_err(|e| e.to_string())?)?;
                written.push(p);
            }
        }
    }
    let timing = dir.join(format!("{mode}.timing.json"));
    write(&timing, &format!("{{\n  \"mode\": \"{mode}\",\n  \"wall_seconds\": {seconds:.3}\n}}\n"))?;
    Ok(written)
}

fn print_summary(outcome: &Outcome) {
    if let Some(suites) = outcome.report.get("suites").and_then(|s| s.as_array()) {
        for s in suites {
            let name = s["suite"].as_str().unwrap_or("");
            for c in s["checks"].as_array().into_iter().flatten() {
                let verdict = if c["passed"].as_bool() == Some(true) { "pass" } else { "FAIL" };
                println!("{verdict} {name}/{} worst={}", c["name"].as_str().unwrap_or(""), c["worst"].as_str().unwrap_or(""));
            }
        }
    }
    let verdict = if outcome.passed { "passed" } else { "FAILED" };
    println!("{}: {verdict}", outcome.mode.as_str());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load_config(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let Some(mode) = cli.mode.map(Mode::from).or(cfg.raw.run.mode) else {
        eprintln!("config error at run.mode: no mode given on the command line or in the config");
        return ExitCode::from(EXIT_CONFIG);
    };
    let seed = cli.seed.unwrap_or(cfg.raw.run.seed);
    let epsilon = cli.epsilon.unwrap_or(cfg.raw.run.epsilon);
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        eprintln!("config error at run.epsilon: must be positive");
        return ExitCode::from(EXIT_CONFIG);
    }
    let format = match cli.format {
        Some(FormatArg::Json) => Format::Json,
        Some(FormatArg::Csv) => Format::Csv,
        None => cfg.raw.run.format,
    };
    let out = cli.out.unwrap_or_else(|| PathBuf::from(&cfg.raw.run.out));

    let start = Instant::now();
    let outcome = match run(&cfg, mode, seed, epsilon) {
        Ok(o) => o,
        Err(e @ Error::Config { .. }) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
        Err(e) => {
            eprintln!("{} failed: {e}", mode.as_str());
            return ExitCode::from(EXIT_RUNTIME);
        }
    };
    let seconds = start.elapsed().as_secs_f64();
    match emit(&outcome, &out, format, seconds) {
        Ok(paths) => {
            print_summary(&outcome);
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    }
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VIOLATION)
    }
}

//! `lab`: seeded experiments, formula grids and the acceptance suite.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use tacnode::aztec::scaling_weight;
use tacnode::gue::DEFAULT_ATTEMPT_CAP;
use tacnode::rng::configure_threads_from_env;
use tacnode::suite::{run_criterion, Fault, SuiteConfig, CRITERIA};
use tacnode::ModelParams;

use output::{emit, Format, Table};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error(transparent)]
    Model(#[from] tacnode::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

#[derive(Parser, Debug)]
#[command(name = "lab", version, about = "Coupled GUE minors, tacnode kernels and double Aztec diamonds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Common {
    /// size n of the model (levels ρ−n..=n)
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// overlap ρ, 1 <= ρ <= n
    #[arg(long, default_value_t = 1)]
    rho: usize,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    #[arg(long, default_value_t = 20240601)]
    seed: u64,
    /// samples, Monte Carlo points or chains, depending on the command
    #[arg(long)]
    trials: Option<u64>,
    /// output file; stdout when absent. A `<out>.meta.json` sidecar is written next to it
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// report wall time on stderr
    #[arg(long)]
    #[serde(skip)]
    timing: bool,
}

impl Common {
    fn params(&self) -> Result<ModelParams, LabError> {
        Ok(ModelParams::new(self.n, self.rho, self.beta)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum KernelChoice {
    Tac,
    Minor,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the tacnode or minor kernel on a (u, z) × (u, z) grid
    KernelGrid {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = KernelChoice::Tac)]
        kernel: KernelChoice,
        /// levels as lo:hi or a single level; all levels by default
        #[arg(long)]
        levels: Option<String>,
        /// z grid as min,max,count
        #[arg(long, default_value = "-2,2,5", allow_hyphen_values = true)]
        z: String,
    },
    /// Rejection-sample coupled GUE pairs and print their interlacing chains
    SampleGue {
        #[command(flatten)]
        common: Common,
        /// attempt cap per accepted sample
        #[arg(long, default_value_t = DEFAULT_ATTEMPT_CAP)]
        cap: u64,
    },
    /// Glauber-dynamics samples of the double Aztec diamond
    SampleAztec {
        #[command(flatten)]
        common: Common,
        /// vertical weight; defaults to the scaling weight for β
        #[arg(long)]
        a: Option<f64>,
        /// flip attempts per chain (default 2000 per cell)
        #[arg(long)]
        steps: Option<u64>,
    },
    /// Exact enumeration of all tilings of a small double diamond
    EnumerateAztec {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        /// draw only this tiling in SVG mode
        #[arg(long)]
        index: Option<usize>,
    },
    /// One-level density at level u, or the joint density of (x, y)
    Density {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        u: i32,
        /// comma-separated level point; repeat for several
        #[arg(long, allow_hyphen_values = true)]
        z: Vec<String>,
        #[arg(long, allow_hyphen_values = true, requires = "y")]
        x: Option<String>,
        #[arg(long, allow_hyphen_values = true, requires = "x")]
        y: Option<String>,
    },
    /// Closed-form cone volume against Monte Carlo
    Volume {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true, requires = "y")]
        x: Option<String>,
        #[arg(long, allow_hyphen_values = true, requires = "x")]
        y: Option<String>,
        /// sampled feasible pairs when x, y are not given
        #[arg(long, default_value_t = 3)]
        pairs: usize,
    },
    /// Integrate the level-n volume over the cone and compare with level n+1
    InductionCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        pairs: usize,
        /// Gauss-Legendre order per panel
        #[arg(long, default_value_t = 12)]
        order: usize,
    },
    /// Run the acceptance suite
    Verify {
        #[command(flatten)]
        common: Common,
        /// print the criteria and exit
        #[arg(long)]
        list: bool,
        /// inject a fault, e.g. gamma-sign
        #[arg(long)]
        fault: Option<String>,
        /// comma-separated criterion ids; all by default
        #[arg(long)]
        criteria: Option<String>,
        /// fail on known deviations too
        #[arg(long)]
        strict: bool,
    },
}

fn main() -> ExitCode {
    configure_threads_from_env();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn meta(command: &str, common: &Common, extra: Value) -> Value {
    json!({
        "tool": "lab",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "seed": common.seed,
        "config": { "common": common, "options": extra },
    })
}

fn finish(common: &Common, fmt: Format, table: &Table, svg: Option<String>, meta: Value, start: Instant) -> Result<ExitCode, LabError> {
    let payload = match fmt {
        Format::Csv => table.to_csv()?,
        Format::Json => table.to_json(&meta)?,
        Format::Svg => svg.ok_or_else(|| LabError::Usage("svg output is only available for the aztec commands".into()))?.into_bytes(),
    };
    let secs = start.elapsed().as_secs_f64();
    emit(common.out.as_deref(), &payload, &meta, secs)?;
    if common.timing {
        eprintln!("wall time {secs:.3}s");
    }
    Ok(ExitCode::SUCCESS)
}

fn run(command: Command) -> Result<ExitCode, LabError> {
    let start = Instant::now();
    match command {
        Command::KernelGrid { common, kernel, levels, z } => {
            let p = common.params()?;
            let levels = match &levels {
                Some(s) => commands::parse_levels(s)?,
                None if kernel == KernelChoice::Minor => (1..=p.n as i32).collect(),
                None => p.levels().collect(),
            };
            let zs = commands::parse_grid(&z)?;
            let t = commands::kernel_grid(p, kernel, &levels, &zs)?;
            let m = meta("kernel-grid", &common, json!({ "kernel": kernel, "levels": levels, "z": z }));
            finish(&common, common.format.unwrap_or(Format::Csv), &t, None, m, start)
        }
        Command::SampleGue { common, cap } => {
            let samples = common.trials.unwrap_or(1000);
            let t = commands::sample_gue(common.params()?, samples, common.seed, cap)?;
            let m = meta("sample-gue", &common, json!({ "samples": samples, "cap": cap }));
            finish(&common, common.format.unwrap_or(Format::Csv), &t, None, m, start)
        }
        Command::SampleAztec { common, a, steps } => {
            let p = common.params()?;
            let a = a.unwrap_or_else(|| scaling_weight(p.n, p.beta));
            let count = common.trials.unwrap_or(1);
            let out = commands::sample_aztec(p, a, count, steps, common.seed)?;
            let m = meta("sample-aztec", &common, json!({ "a": a, "chains": count, "steps": out.table.summary["steps_per_chain"] }));
            let svg = commands::contact_sheet(&out.svgs, 4, &m.to_string());
            finish(&common, common.format.unwrap_or(Format::Svg), &out.table, Some(svg), m, start)
        }
        Command::EnumerateAztec { common, a, index } => {
            let out = commands::enumerate_aztec(common.params()?, a, index)?;
            let m = meta("enumerate-aztec", &common, json!({ "a": a, "index": index }));
            let svg = commands::contact_sheet(&out.svgs, 8, &m.to_string());
            finish(&common, common.format.unwrap_or(Format::Csv), &out.table, Some(svg), m, start)
        }
        Command::Density { common, u, z, x, y } => {
            let zs: Vec<Vec<f64>> = z.iter().map(|s| commands::parse_vector(s)).collect::<Result<_, _>>()?;
            let xy = match (&x, &y) {
                (Some(x), Some(y)) => Some((commands::parse_vector(x)?, commands::parse_vector(y)?)),
                _ => None,
            };
            let t = commands::density(common.params()?, u, &zs, xy)?;
            let m = meta("density", &common, json!({ "u": u, "z": z, "x": x, "y": y }));
            finish(&common, common.format.unwrap_or(Format::Csv), &t, None, m, start)
        }
        Command::Volume { common, x, y, pairs } => {
            let xy = match (&x, &y) {
                (Some(x), Some(y)) => Some((commands::parse_vector(x)?, commands::parse_vector(y)?)),
                _ => None,
            };
            let samples = common.trials.unwrap_or(1_000_000);
            let t = commands::volume(common.params()?, xy, pairs, samples, common.seed)?;
            let m = meta("volume", &common, json!({ "x": x, "y": y, "pairs": pairs, "samples": samples }));
            finish(&common, common.format.unwrap_or(Format::Csv), &t, None, m, start)
        }
        Command::InductionCheck { common, pairs, order } => {
            let t = commands::induction(common.params()?, pairs, order, common.seed)?;
            let m = meta("induction-check", &common, json!({ "pairs": pairs, "order": order }));
            finish(&common, common.format.unwrap_or(Format::Csv), &t, None, m, start)
        }
        Command::Verify { common, list, fault, criteria, strict } => verify(&common, list, fault, criteria, strict, start),
    }
}

fn verify(common: &Common, list: bool, fault: Option<String>, criteria: Option<String>, strict: bool, start: Instant) -> Result<ExitCode, LabError> {
    if list {
        for c in CRITERIA {
            let kind = if c.hard { "hard" } else { "informational" };
            println!("{:>2}  {:<13} {}", c.id, kind, c.title);
        }
        return Ok(ExitCode::SUCCESS);
    }
    let fault: Option<Fault> = fault.as_deref().map(str::parse).transpose()?;
    let ids: Vec<u8> = match &criteria {
        Some(s) => s
            .split(',')
            .map(|t| t.trim().parse::<u8>().map_err(|_| LabError::Usage(format!("bad criterion id '{t}'"))))
            .collect::<Result<_, _>>()?,
        None => CRITERIA.iter().map(|c| c.id).collect(),
    };
    let cfg = SuiteConfig { seed: common.seed, fault };
    let fmt = common.format.unwrap_or(if common.out.is_some() { Format::Json } else { Format::Csv });
    let json_to_stdout = fmt == Format::Json && common.out.is_none();
    let mut reports = Vec::new();
    let mut failing = Vec::new();
    for id in ids {
        let rep = run_criterion(id, &cfg)?;
        if !json_to_stdout {
            println!("{}", rep.summary());
        }
        let bad = if strict { !rep.passed } else { !rep.unexpected_failures().is_empty() };
        if bad && rep.hard {
            failing.push(rep.id);
        }
        reports.push(rep);
    }
    let m = meta("verify", common, json!({ "fault": fault, "criteria": criteria, "strict": strict }));
    let doc = json!({ "meta": m, "failing": failing, "passed": failing.is_empty(), "criteria": reports });
    if common.out.is_some() || json_to_stdout {
        let mut bytes = serde_json::to_vec_pretty(&doc)?;
        bytes.push(b'\n');
        emit(common.out.as_deref(), &bytes, &m, start.elapsed().as_secs_f64())?;
    }
    if common.timing {
        eprintln!("wall time {:.3}s", start.elapsed().as_secs_f64());
    }
    if failing.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        if !json_to_stdout {
            let ids: Vec<String> = failing.iter().map(u8::to_string).collect();
            println!("failing criteria: {}", ids.join(", "));
        }
        Ok(ExitCode::from(1))
    }
}

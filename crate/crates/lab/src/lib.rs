//! Experiment runner for the `flathilbert` verification routines.
//!
//! Each command reads a strict JSON config, runs one pipeline, and writes a
//! run directory with CSV/JSON data and a `manifest.json`.

pub mod config;
pub mod experiments;
pub mod output;
pub mod par;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

pub use config::{CommandName, ConfigError, ExperimentConfig};
pub use experiments::Outcome;

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    /// A check ran to completion and missed its threshold.
    pub const CHECK_FAILED: i32 = 1;
    pub const CONFIG: i32 = 2;
    /// Nonconvergence left a check without enough data.
    pub const NUMERIC: i32 = 3;
    pub const IO: i32 = 4;
}

#[derive(Debug)]
pub struct RunReport {
    pub exit_code: i32,
    pub out_dir: PathBuf,
    pub outcome: Option<Outcome>,
    /// Human-readable one-liner for stderr.
    pub message: String,
}

fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Validates, runs and writes one command. Never panics on bad input; the
/// exit code says what happened.
pub fn run_command(command: CommandName, cfg: &ExperimentConfig, out: Option<&Path>) -> RunReport {
    let out_dir = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(format!("runs/{}", command.as_str())));
    let fail = |code, message: String| RunReport { exit_code: code, out_dir: out_dir.clone(), outcome: None, message };

    let params = match cfg.resolve(command) {
        Ok(p) => p,
        Err(e) => return fail(exit::CONFIG, e.to_string()),
    };
    let started = now_unix();
    let clock = Instant::now();
    let result = experiments::run(&params);
    let wall = clock.elapsed().as_secs_f64();

    let mut echo = serde_json::to_value(cfg).unwrap_or_default();
    if let Some(obj) = echo.as_object_mut() {
        obj.insert("command".into(), command.as_str().into());
    }
    let (outcome, code, status) = match result {
        Ok(o) => {
            let (code, status) = if o.numeric_failure.is_some() {
                (exit::NUMERIC, "numeric-failure")
            } else if o.passed() {
                (exit::PASS, "pass")
            } else {
                (exit::CHECK_FAILED, "check-failed")
            };
            (o, code, status)
        }
        Err(e) => {
            let o = Outcome { numeric_failure: Some(e.0.clone()), ..Default::default() };
            (o, exit::NUMERIC, "numeric-failure")
        }
    };
    let files = match output::write_artifacts(&out_dir, &outcome) {
        Ok(f) => f,
        Err(e) => return fail(exit::IO, format!("cannot write {}: {e}", out_dir.display())),
    };
    let manifest = output::Manifest {
        tool: "fhlab",
        command: command.as_str().to_string(),
        library_version: flathilbert::VERSION,
        config: echo,
        started_unix: started,
        wall_time_s: wall,
        status: status.to_string(),
        exit_code: code,
        numeric_failure: outcome.numeric_failure.clone(),
        checks: outcome.checks.iter().map(Into::into).collect(),
        summary: outcome.summary.clone(),
        files,
    };
    if let Err(e) = output::write_manifest(&out_dir, &manifest) {
        return fail(exit::IO, format!("cannot write manifest in {}: {e}", out_dir.display()));
    }
    let report = out_dir.join(output::MANIFEST);
    let message = match code {
        exit::PASS => format!("{}: all checks passed; see {}", command.as_str(), report.display()),
        exit::NUMERIC => format!(
            "{}: numerical nonconvergence: {}; report at {}",
            command.as_str(),
            outcome.numeric_failure.as_deref().unwrap_or(""),
            report.display()
        ),
        _ => {
            let failed: Vec<&str> = outcome.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
            format!("{}: failed checks {}; report at {}", command.as_str(), failed.join(", "), report.display())
        }
    };
    RunReport { exit_code: code, out_dir, outcome: Some(outcome), message }
}

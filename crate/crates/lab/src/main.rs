use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use flathilbert_lab::{config, run_command, CommandName};
use serde::Serialize;
use serde_json::{Map, Value};

/// Numerical verification lab for Hilbert transforms along variable flat curves.
#[derive(Parser)]
#[command(name = "fhlab", version, about)]
#[command(after_help = "Exit codes: 0 all checks pass, 1 a check failed, 2 invalid config, \
3 numerical nonconvergence, 4 I/O error.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify curves against (i)-(iv), CWW, CZ, wCZ, (D) and (ID).
    #[command(after_help = "Outputs:
  conditions.csv  curve, condition, status, witness_t, witness_value
  constants.csv   curve, c1, lambda_d, eps0, cz_lambda, wcz_lambda, zero_steps_ii
Without --curve the whole built-in corpus is checked.")]
    CheckCurve(RunArgs),
    /// Measure the exceptional sets E_k of a polynomial.
    #[command(after_help = "Outputs:
  ek.csv   k, measure, term (= measure^alpha), intervals (lo:hi;...)
  ek.json  interval lists per k")]
    EkMeasure(RunArgs),
    /// Random sweep of the Υ monotonicity and 2/C1 bound.
    #[command(after_help = "Outputs:
  upsilon.csv  sample, curve, omega, k, x, y, z, upsilon, bound
Requires a seed.")]
    UpsilonSweep(RunArgs),
    /// Normalized |J^r| envelopes over k and |x-y|.
    #[command(after_help = "Outputs:
  jr.csv  k, dist, case, jr_abs, normalized, converged, panels
case is case1 (ratio), case2 (slope), empty or none.
A config key `sweep`, a JSON array of {\"k\", \"x\", \"y\", \"r\"} records, replaces the
generated grid of k <= k_max, x = 0, y = 2^-j (j < dist_levels), r = 2.")]
    JrBounds(RunArgs),
    /// Schur row integrals of the TT* kernels and their decay in k.
    #[command(after_help = "Outputs:
  rows.csv  k, y, row_integral, unconverged_count, samples, phase_off_integral
  fit.json  log2 slope fit over converged levels")]
    KernelDecay(RunArgs),
    /// Operator-norm uniformity of the discretized S_u.
    #[command(after_help = "Outputs:
  sweep.csv    n, coeff_id, coeffs, u, norm, converged, iterations
  summary.csv  n, cells, excluded, min, max, ratio
Requires a seed.")]
    OpnormSweep(RunArgs),
    /// Direct versus Fourier-sliced 2D application.
    #[command(after_help = "Outputs:
  plancherel.csv  sample, poly, direct, sliced, rel_diff, tail_mass, f_norm
Requires a seed.")]
    PlancherelCheck(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON config; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run directory (default: the config's `output`, else runs/<command>).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    knobs: Knobs,
}

/// Flag versions of the config keys.
#[derive(Args, Serialize)]
struct Knobs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    threads: Option<usize>,
    /// Built-in curve name.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    curve: Option<String>,
    /// Coefficients, constant term first, e.g. "1,0,1".
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    poly: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    grid_lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    grid_hi: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    grid_points: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    c1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    k_max: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    resolution: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    z_points: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    u: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    max_panels: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    dist_levels: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    trend_tol: Option<f64>,
    /// Row anchors, comma-separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    ys: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    row_geometric: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    row_uniform: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    row_d_min: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    min_points: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    slope_slack: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    degrees: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    u_values: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    extent: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    step: Option<f64>,
    /// auto, power, dense or lanczos.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    norm_method: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    norm_tol: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    max_iter: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    max_ratio: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    hilbert_tol: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n1: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n2: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    a1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    a2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    agreement_tol: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match cli.command {
        Command::CheckCurve(a) => (CommandName::CheckCurve, a),
        Command::EkMeasure(a) => (CommandName::EkMeasure, a),
        Command::UpsilonSweep(a) => (CommandName::UpsilonSweep, a),
        Command::JrBounds(a) => (CommandName::JrBounds, a),
        Command::KernelDecay(a) => (CommandName::KernelDecay, a),
        Command::OpnormSweep(a) => (CommandName::OpnormSweep, a),
        Command::PlancherelCheck(a) => (CommandName::PlancherelCheck, a),
    };
    let overrides: Map<String, Value> = match serde_json::to_value(&args.knobs) {
        Ok(Value::Object(m)) => m,
        _ => Map::new(),
    };
    let cfg = match &args.config {
        Some(path) => config::load(path, &overrides),
        None => config::parse("{}", &overrides),
    };
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(flathilbert_lab::exit::CONFIG as u8);
        }
    };
    let report = run_command(name, &cfg, args.out.as_deref());
    if report.exit_code == 0 {
        println!("{}", report.message);
    } else {
        eprintln!("{}", report.message);
    }
    ExitCode::from(report.exit_code as u8)
}

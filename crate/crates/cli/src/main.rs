use std::f64::consts::TAU;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use adqfi_core::eigensystem::level as eigen_level;
use adqfi_core::sweep::{all_columns, evaluate_point, to_csv, to_json, PRESETS};
use adqfi_core::{
    adiabatic_margin, evolve, figure_preset, qfi_from_trajectory, run_sweep, spectral_invariants, verify, Level,
    ModelParams, Probe, SweepSpec,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

/// Adiabatic quantum estimation of a rotating field's azimuth.
#[derive(Parser)]
#[command(name = "adqfi", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Every QFI (two-qubit, qubit A, qubit B) for all four levels at one parameter point.
    Point {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Evaluate a parameter sweep from a figure preset or a JSON spec file.
    Sweep(SweepArgs),
    /// Adiabaticity margin for a field rotating at rate `phi_dot`.
    Adiabatic {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, allow_negative_numbers = true)]
        phi_dot: f64,
        #[arg(long, default_value_t = adqfi_core::adiabatic::DEFAULT_MARGIN_TARGET)]
        margin_target: f64,
    },
    /// RK4 evolution of an instantaneous eigenstate while the field rotates.
    Evolve(EvolveArgs),
    /// Run the seeded property battery. Exits 1 on any hard failure.
    Verify {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        draws: usize,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        format: ReportFormat,
        /// Also write the JSON report to this file.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long = "J", alias = "j", allow_negative_numbers = true)]
    j: f64,
    #[arg(long = "D", alias = "d", allow_negative_numbers = true)]
    d: f64,
    #[arg(long = "B1", alias = "b1", allow_negative_numbers = true)]
    b1: f64,
    #[arg(long = "B2", alias = "b2", allow_negative_numbers = true)]
    b2: f64,
    /// Polar angle of the rotating field, in [0, π].
    #[arg(long)]
    theta: f64,
    /// Initial azimuth.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    phi: f64,
}

impl ParamArgs {
    fn build(&self) -> adqfi_core::Result<ModelParams> {
        ModelParams::new(self.j, self.d, self.b1, self.b2, self.theta, self.phi)
    }
}

#[derive(Args)]
struct SweepArgs {
    /// One of fig1, fig2a, fig2b, fig3, fig4, fig5, fig6a, fig6b, fig7.
    #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
    preset: Option<String>,
    /// JSON file with a sweep spec (see docs/sweep_spec.md).
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    stop: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = DataFormat::Csv)]
    format: DataFormat,
}

#[derive(Args)]
struct EvolveArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Rotation rate; defaults to 1e-3 times the smallest level spacing.
    #[arg(long, allow_negative_numbers = true)]
    omega: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    revolutions: f64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=4))]
    level: u8,
    /// Fixed step count; the default resolves both the level phases and the rotation.
    #[arg(long)]
    steps: Option<usize>,
    /// Also estimate the QFI of the evolved state at the end of the run.
    #[arg(long)]
    qfi: bool,
    /// Write the sampled fidelity trace as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DataFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

const DEFAULT_OMEGA_FRACTION: f64 = 1e-3;

enum Failure {
    Input(String),
    Verification,
}

impl From<adqfi_core::Error> for Failure {
    fn from(e: adqfi_core::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Point { params } => point(&params.build()?),
        Command::Sweep(args) => sweep(args),
        Command::Adiabatic { params, phi_dot, margin_target } => adiabatic(&params.build()?, phi_dot, margin_target),
        Command::Evolve(args) => evolve_cmd(args),
        Command::Verify { seed, draws, format, json } => {
            let report = verify(seed, draws)?;
            let encoded = report.to_json();
            match format {
                ReportFormat::Text => emit(&report.to_text())?,
                ReportFormat::Json => emit(&format!("{encoded}\n"))?,
            }
            if let Some(path) = json {
                write(&path, &format!("{encoded}\n"))?;
            }
            if report.hard_failures() > 0 {
                return Err(Failure::Verification);
            }
            Ok(())
        }
    }
}

/// Print to stdout; a reader that hung up early (`| head`) is not an error.
fn emit(body: &str) -> Result<(), Failure> {
    match io::stdout().lock().write_all(body.as_bytes()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Failure::Input(format!("cannot write output: {e}"))),
        _ => Ok(()),
    }
}

fn pretty(v: &Value) -> String {
    format!("{}\n", serde_json::to_string_pretty(v).expect("plain JSON values"))
}

fn write(path: &PathBuf, body: &str) -> Result<(), Failure> {
    fs::write(path, body).map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
}

/// JSON number, or the string "inf"/"-inf"/"nan" where JSON has no literal.
fn number(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn point(params: &ModelParams) -> Result<(), Failure> {
    let inv = spectral_invariants(params)?;
    let (entries, flag) = evaluate_point(params, &all_columns());
    let mut levels = Vec::new();
    for l in Level::ALL {
        let mut qfis = serde_json::Map::new();
        for e in entries.iter().filter(|e| e.level == l) {
            qfis.insert(
                probe_key(e.probe).into(),
                json!({ "value": e.value, "method": e.method }),
            );
        }
        let source = eigen_level(params, l).ok().map(|e| e.source);
        levels.push(json!({ "level": l, "xi": inv.eigenvalue(l), "source": source, "qfi": qfis }));
    }
    let out = json!({
        "params": params,
        "min_gap": inv.min_gap(),
        "fallback": flag,
        "levels": levels,
    });
    emit(&pretty(&out))
}

fn probe_key(p: Probe) -> &'static str {
    match p {
        Probe::TwoQubit => "two-qubit",
        Probe::A => "A",
        Probe::B => "B",
    }
}

fn sweep(args: SweepArgs) -> Result<(), Failure> {
    let mut spec: SweepSpec = match (&args.preset, &args.spec) {
        (Some(name), _) => figure_preset(name).map_err(|e| Failure::Input(format!("{e}; known presets: {}", PRESETS.join(", "))))?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?
        }
        (None, None) => unreachable!("clap requires --preset or --spec"),
    };
    if let Some(n) = args.points {
        spec.points = n;
    }
    if let Some(x) = args.start {
        spec.start = x;
    }
    if let Some(x) = args.stop {
        spec.stop = x;
    }
    let records = run_sweep(&spec)?;
    let body = match args.format {
        DataFormat::Csv => to_csv(&spec, &records),
        DataFormat::Json => format!("{}\n", to_json(&spec, &records)),
    };
    match &args.out {
        Some(path) => write(path, &body),
        None => emit(&body),
    }
}

fn adiabatic(params: &ModelParams, phi_dot: f64, margin_target: f64) -> Result<(), Failure> {
    let r = adiabatic_margin(params, phi_dot, margin_target)?;
    let out = json!({
        "params": params,
        "phi_dot": number(r.phi_dot),
        "margin_target": number(r.margin_target),
        "unit_coupling_ratio": number(r.unit_coupling_ratio),
        "max_coupling_ratio": number(r.max_coupling_ratio),
        "min_gap": number(r.min_gap),
        "margin": number(r.margin),
        "max_phi_dot": number(r.max_phi_dot),
        "adiabatic": r.is_adiabatic(),
        "note": "level spacings and coupling moduli do not depend on the azimuth, so this margin holds for the whole run",
    });
    emit(&pretty(&out))
}

fn evolve_cmd(args: EvolveArgs) -> Result<(), Failure> {
    let params = args.params.build()?;
    let level = Level::new(args.level)?;
    let min_gap = spectral_invariants(&params)?.min_gap();
    let (omega, omega_note) = match args.omega {
        Some(w) => (w, "given"),
        None => (DEFAULT_OMEGA_FRACTION * min_gap, "default: 1e-3 x min_gap"),
    };
    if !(omega.is_finite() && omega != 0.0) {
        return Err(Failure::Input(format!("omega must be finite and nonzero, got {omega}")));
    }
    if !(args.revolutions > 0.0 && args.revolutions.is_finite()) {
        return Err(Failure::Input(format!("revolutions must be positive, got {}", args.revolutions)));
    }
    let t_final = args.revolutions * TAU / omega.abs();
    let steps = match args.steps {
        Some(n) => n,
        None => adqfi_core::dynamics::default_steps(&params, omega, t_final)?,
    };
    let report = adiabatic_margin(&params, omega.abs(), adqfi_core::adiabatic::DEFAULT_MARGIN_TARGET)?;
    let tr = evolve(&params, omega, t_final, steps, level)?;

    let mut out = json!({
        "params": params,
        "level": level,
        "omega": omega,
        "omega_source": omega_note,
        "revolutions": args.revolutions,
        "t_final": tr.t_final,
        "steps": tr.steps,
        "min_gap": min_gap,
        "adiabatic_margin": number(report.margin),
        "min_fidelity": tr.min_fidelity,
        "final_fidelity": tr.fidelities.last().copied(),
        "max_norm_drift": tr.max_norm_drift,
    });
    if args.qfi {
        if omega < 0.0 {
            return Err(Failure::Input("--qfi needs a positive omega".into()));
        }
        let probe = params.phi() + omega * t_final;
        let q = qfi_from_trajectory(&params, omega, level, probe)?;
        let closed = |p| adqfi_core::qfi(&params, level, p).map(|v| v.value);
        out["trajectory_qfi"] = json!({
            "two_qubit": q.two_qubit,
            "qubit_a": q.qubit_a,
            "qubit_b": q.qubit_b,
            "adiabatic_two_qubit": closed(Probe::TwoQubit)?,
            "adiabatic_qubit_a": closed(Probe::A)?,
            "adiabatic_qubit_b": closed(Probe::B)?,
        });
    }
    if let Some(path) = &args.out {
        let mut csv = String::from("t,fidelity\n");
        for (t, f) in tr.times.iter().zip(&tr.fidelities) {
            csv.push_str(&format!("{:.16e},{:.16e}\n", t, f));
        }
        write(path, &csv)?;
    }
    emit(&pretty(&out))
}

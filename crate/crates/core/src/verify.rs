//! Seeded property battery over the model.
//!
//! Hard checks are exact identities or oracle agreements and fail the run.
//! Soft checks reproduce qualitative numerical observations; they report
//! `warn` instead of failing.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::eigensystem::{analytic_level, numeric_level, numeric_spectrum, spectral_invariants};
use crate::error::{Error, Result};
use crate::metrology::{qfi, qfi_pure_oracle, qfi_spectral, reduce, Method, Probe, Subsystem, DEFAULT_DELTA};
use crate::model::{Level, ModelParams};
use crate::sweep::figure_preset;

pub const EIGEN_TOL: f64 = 1e-10;
pub const ORACLE_TOL: f64 = 1e-6;
pub const SYMMETRY_TOL: f64 = 1e-9;
pub const ORDER_TOL: f64 = 1e-9;
pub const POLAR_TOL: f64 = 1e-12;
pub const PRODUCT_LAW_TOL: f64 = 1e-8;
pub const PAIR_SPREAD_TOL: f64 = 0.1;
pub const SATURATION_TOL: f64 = 0.01;
/// Strong coupling: J at least ten times every other energy scale.
pub const STRONG_COUPLING: f64 = 20.0;
pub const WEAK_SCALE: f64 = 2.0;

/// Denominator floor for relative comparisons: round-off on an O(1) QFI.
/// Only values that vanish identically fall below it.
pub const REL_FLOOR: f64 = 1e-15;

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(REL_FLOOR)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Hard,
    Soft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Warn,
    Fail,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Warn => "WARN",
            Status::Fail => "FAIL",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub severity: Severity,
    pub status: Status,
    pub samples: usize,
    /// Largest violation measure observed; the check passes when ≤ `tolerance`.
    pub worst: f64,
    pub tolerance: f64,
    /// Points that could not be evaluated, or for the ordering claims the
    /// points breaking the claim. Any nonzero count fails the check.
    pub violations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckResult {
    fn from_worst(name: &str, severity: Severity, samples: usize, worst: f64, tolerance: f64, violations: usize) -> Self {
        let ok = worst <= tolerance && violations == 0;
        let status = match (ok, severity) {
            (true, _) => Status::Pass,
            (false, Severity::Hard) => Status::Fail,
            (false, Severity::Soft) => Status::Warn,
        };
        CheckResult { name: name.into(), severity, status, samples, worst, tolerance, violations, note: None }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn line(&self) -> String {
        format!(
            "{} [{}] {}: worst={:.3e} tol={:.1e} samples={} violations={}",
            self.status.label(),
            match self.severity {
                Severity::Hard => "hard",
                Severity::Soft => "soft",
            },
            self.name,
            self.worst,
            self.tolerance,
            self.samples,
            self.violations
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub draws: usize,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn hard_failures(&self) -> usize {
        self.checks.iter().filter(|c| c.status == Status::Fail).count()
    }

    pub fn warnings(&self) -> usize {
        self.checks.iter().filter(|c| c.status == Status::Warn).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is always serializable")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("verification: seed={} draws={}\n", self.seed, self.draws);
        for c in &self.checks {
            let _ = writeln!(out, "{}", c.line());
            if let Some(n) = &c.note {
                let _ = writeln!(out, "    {n}");
            }
        }
        let _ = writeln!(out, "hard failures: {}, warnings: {}", self.hard_failures(), self.warnings());
        out
    }
}

/// Deterministic generator for check number `stream` of a given seed.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `J, D, B1, B2 ∈ [-5, 5]`, `θ ∈ [0.1, π − 0.1]`, `φ ∈ [0, 2π)`.
pub fn random_params(rng: &mut impl Rng) -> ModelParams {
    let mut u = |a: f64, b: f64| rng.random_range(a..b);
    let (j, d, b1, b2) = (u(-5.0, 5.0), u(-5.0, 5.0), u(-5.0, 5.0), u(-5.0, 5.0));
    let (theta, phi) = (u(0.1, PI - 0.1), u(0.0, TAU));
    ModelParams::new(j, d, b1, b2, theta, phi).expect("sampled in range")
}

/// Gap of a soft ordering claim `lhs ≥ rhs`: positive when violated.
fn shortfall(lhs: f64, rhs: f64) -> f64 {
    (rhs - lhs).max(0.0)
}

fn all_qfis(params: &ModelParams) -> Result<[[f64; 4]; 3]> {
    let mut out = [[0.0; 4]; 3];
    for (pi, probe) in Probe::ALL.iter().enumerate() {
        for l in Level::ALL {
            out[pi][usize::from(l.get() - 1)] = qfi(params, l, *probe)?.value;
        }
    }
    Ok(out)
}

/// Draw params until the spectrum is nondegenerate.
fn draw_valid(rng: &mut impl Rng, mut make: impl FnMut(&mut dyn FnMut(f64, f64) -> f64) -> ModelParams) -> ModelParams {
    loop {
        let p = make(&mut |a, b| rng.random_range(a..b));
        if numeric_spectrum(&p).is_ok() {
            return p;
        }
    }
}

pub fn check_eigenvalues(seed: u64, draws: usize) -> CheckResult {
    let mut rng = rng_for(seed, 1);
    let mut worst: f64 = 0.0;
    let mut violations = 0;
    for _ in 0..draws {
        let p = random_params(&mut rng);
        match (spectral_invariants(&p), numeric_spectrum(&p)) {
            (Ok(inv), Ok(num)) => {
                for l in Level::ALL {
                    let e = (inv.eigenvalue(l) - num.levels[usize::from(l.get() - 1)].xi).abs() / p.scale();
                    worst = worst.max(e);
                }
            }
            _ => violations += 1,
        }
    }
    CheckResult::from_worst("eigenvalues: closed form vs numeric (relative to scale)", Severity::Hard, draws, worst, EIGEN_TOL, violations)
}

pub fn check_eigenvectors(seed: u64, draws: usize) -> CheckResult {
    let mut rng = rng_for(seed, 2);
    let mut worst: f64 = 0.0;
    let mut samples = 0;
    let mut skipped = 0;
    for _ in 0..draws {
        let p = random_params(&mut rng);
        for l in Level::ALL {
            match (analytic_level(&p, l), numeric_level(&p, l)) {
                (Ok(a), Ok(n)) => {
                    samples += 1;
                    worst = worst.max(1.0 - a.vector.dotc(&n.vector).norm());
                }
                _ => skipped += 1,
            }
        }
    }
    CheckResult::from_worst("eigenvectors: 1 - |<analytic|numeric>|", Severity::Hard, samples, worst, EIGEN_TOL, 0)
        .with_note(format!("{skipped} ill-conditioned levels use the numeric route only"))
}

pub fn check_two_qubit_oracle(seed: u64, draws: usize) -> CheckResult {
    let mut rng = rng_for(seed, 3);
    let mut worst: f64 = 0.0;
    let mut samples = 0;
    let mut errors = 0;
    while samples < draws * 4 {
        let p = random_params(&mut rng);
        for l in Level::ALL {
            let Ok(closed) = qfi(&p, l, Probe::TwoQubit) else { continue };
            if closed.method != Method::ClosedForm {
                continue;
            }
            let oracle = qfi_pure_oracle(|x| Ok(numeric_level(&p.with_phi(x)?, l)?.vector), p.phi(), DEFAULT_DELTA);
            match oracle {
                Ok(o) => worst = worst.max(rel_diff(closed.value, o)),
                Err(_) => errors += 1,
            }
            samples += 1;
        }
    }
    CheckResult::from_worst("two-qubit QFI: closed form vs fidelity oracle", Severity::Hard, samples, worst, ORACLE_TOL, errors)
}

pub fn check_one_qubit_oracle(seed: u64, draws: usize) -> CheckResult {
    let mut rng = rng_for(seed, 4);
    let mut worst: f64 = 0.0;
    let mut samples = 0;
    let mut errors = 0;
    while samples < draws * 8 {
        let p = random_params(&mut rng);
        for l in Level::ALL {
            if analytic_level(&p, l).is_err() {
                continue;
            }
            for keep in [Subsystem::A, Subsystem::B] {
                let closed = qfi(&p, l, keep.probe()).expect("analytic level");
                let rho_at = |x: f64| reduce(&numeric_level(&p.with_phi(x)?, l)?.vector, keep);
                match qfi_spectral(rho_at, p.phi(), DEFAULT_DELTA) {
                    Ok(o) => worst = worst.max(rel_diff(closed.value, o)),
                    Err(_) => errors += 1,
                }
                samples += 1;
            }
        }
    }
    CheckResult::from_worst("one-qubit QFI (A and B): closed form vs spectral oracle", Severity::Hard, samples, worst, ORACLE_TOL, errors)
}

/// Compare every QFI at `p` against the same quantity at `transform(p)`.
fn symmetry_check(name: &str, seed: u64, stream: u64, draws: usize, transform: impl Fn(&ModelParams) -> ModelParams) -> CheckResult {
    let mut rng = rng_for(seed, stream);
    let mut worst: f64 = 0.0;
    let mut samples = 0;
    while samples < draws {
        let p = random_params(&mut rng);
        let q = transform(&p);
        let (Ok(a), Ok(b)) = (all_qfis(&p), all_qfis(&q)) else { continue };
        for pi in 0..3 {
            for li in 0..4 {
                worst = worst.max(rel_diff(a[pi][li], b[pi][li]));
            }
        }
        samples += 1;
    }
    CheckResult::from_worst(name, Severity::Hard, samples, worst, SYMMETRY_TOL, 0)
}

pub fn check_symmetries(seed: u64, draws: usize) -> Vec<CheckResult> {
    let set = |p: &ModelParams, j: f64, d: f64, b1: f64, theta: f64| {
        ModelParams::new(j, d, b1, p.b2(), theta, p.phi()).expect("transformed params stay valid")
    };
    vec![
        symmetry_check("symmetry: J <-> D", seed, 10, draws, |p| set(p, p.d(), p.j(), p.b1(), p.theta())),
        symmetry_check("symmetry: J -> -J", seed, 11, draws, |p| set(p, -p.j(), p.d(), p.b1(), p.theta())),
        symmetry_check("symmetry: D -> -D", seed, 12, draws, |p| set(p, p.j(), -p.d(), p.b1(), p.theta())),
        symmetry_check("symmetry: (B1, theta) -> (-B1, pi - theta)", seed, 13, draws, |p| {
            set(p, p.j(), p.d(), -p.b1(), PI - p.theta())
        }),
        symmetry_check("azimuth independence: phi -> phi + 0.37", seed, 14, draws, |p| {
            p.with_phi(p.phi() + 0.37).expect("any phi is valid")
        }),
    ]
}

pub fn check_monotonicity(seed: u64, draws: usize) -> CheckResult {
    let mut rng = rng_for(seed, 20);
    let mut worst: f64 = 0.0;
    let mut samples = 0;
    while samples < draws {
        let Ok(q) = all_qfis(&random_params(&mut rng)) else { continue };
        for ((two, a), b) in q[0].iter().zip(&q[1]).zip(&q[2]) {
            worst = worst.max(shortfall(*two, a.max(*b)));
        }
        samples += 1;
    }
    CheckResult::from_worst("two-qubit QFI >= max(qubit A, qubit B)", Severity::Hard, samples, worst, ORDER_TOL, 0)
}

pub fn check_pure_bound(seed: u64, draws: usize) -> CheckResult {
    let mut rng = rng_for(seed, 21);
    let mut worst: f64 = 0.0;
    let mut samples = 0;
    while samples < draws {
        let Ok(q) = all_qfis(&random_params(&mut rng)) else { continue };
        for row in q {
            for v in row {
                worst = worst.max(v - 4.0);
            }
        }
        samples += 1;
    }
    CheckResult::from_worst("every QFI <= 4", Severity::Hard, samples, worst.max(0.0), ORDER_TOL, 0)
}

pub fn check_polar_field(seed: u64, draws: usize) -> CheckResult {
    let mut rng = rng_for(seed, 30);
    let mut worst: f64 = 0.0;
    let mut samples = 0;
    while samples < draws {
        let p = random_params(&mut rng).with(crate::model::Param::Theta, 0.0).expect("θ = 0 is valid");
        let Ok(q) = all_qfis(&p) else { continue };
        worst = q.iter().flatten().fold(worst, |w, v| w.max(v.abs()));
        samples += 1;
    }
    CheckResult::from_worst("theta = 0: every QFI vanishes", Severity::Hard, samples, worst, POLAR_TOL, 0)
}

/// `J = D = 0`, `B1 = 1`, `B2 = 2.5` on a 50-point θ grid over `[0, π]`.
pub fn check_decoupled(points: usize) -> Vec<CheckResult> {
    let mut worst_two: f64 = 0.0;
    let mut worst_a: f64 = 0.0;
    let mut errors = 0;
    for i in 0..points {
        let theta = PI * i as f64 / (points - 1) as f64;
        let p = ModelParams::new(0.0, 0.0, 1.0, 2.5, theta, 0.0).expect("grid in range");
        match all_qfis(&p) {
            Ok(q) => {
                for (two, a) in q[0].iter().zip(&q[1]) {
                    worst_two = worst_two.max((two - theta.sin().powi(2)).abs());
                    worst_a = worst_a.max(a.abs());
                }
            }
            Err(_) => errors += 1,
        }
    }
    vec![
        CheckResult::from_worst("J = D = 0: two-qubit QFI = sin^2(theta)", Severity::Hard, points, worst_two, PRODUCT_LAW_TOL, errors),
        CheckResult::from_worst("J = D = 0: qubit A QFI = 0", Severity::Hard, points, worst_a, POLAR_TOL, errors),
    ]
}

fn ordering_check(
    name: &str,
    seed: u64,
    stream: u64,
    draws: usize,
    mut make: impl FnMut(&mut dyn FnMut(f64, f64) -> f64) -> ModelParams,
    a_should_win: impl Fn(Level) -> bool,
) -> CheckResult {
    let mut rng = rng_for(seed, stream);
    let mut worst: f64 = 0.0;
    let mut violations = 0;
    for _ in 0..draws {
        let p = draw_valid(&mut rng, &mut make);
        let Ok(q) = all_qfis(&p) else { continue };
        for l in Level::ALL {
            let (a, b) = (q[1][usize::from(l.get() - 1)], q[2][usize::from(l.get() - 1)]);
            let miss = if a_should_win(l) { shortfall(a, b) } else { shortfall(b, a) };
            if miss > ORDER_TOL {
                violations += 1;
            }
            worst = worst.max(miss);
        }
    }
    let mut r = CheckResult::from_worst(name, Severity::Soft, draws, worst, ORDER_TOL, 0);
    if violations > 0 {
        r.status = Status::Warn;
        r.violations = violations;
    }
    r
}

pub fn check_regime_claims(seed: u64, draws: usize) -> Vec<CheckResult> {
    let theta = |u: &mut dyn FnMut(f64, f64) -> f64| u(0.1, PI - 0.1);
    let a_wins = |_: Level| true;
    let b_wins_outer = |l: Level| !l.is_outer();
    vec![
        ordering_check("regime (a): B1 = 0 gives qfi_A >= qfi_B", seed, 40, draws, |u| {
            ModelParams::new(u(-5.0, 5.0), u(-5.0, 5.0), 0.0, u(-5.0, 5.0), theta(u), 0.0).unwrap()
        }, a_wins),
        ordering_check("regime (a): J = 20 gives qfi_A >= qfi_B", seed, 41, draws, |u| {
            let w = WEAK_SCALE;
            ModelParams::new(STRONG_COUPLING, u(-w, w), u(-w, w), u(-w, w), theta(u), 0.0).unwrap()
        }, a_wins)
        .with_note("strong coupling read as J >= 10x every other scale"),
        ordering_check("regime (a): D = 20 gives qfi_A >= qfi_B", seed, 42, draws, |u| {
            let w = WEAK_SCALE;
            ModelParams::new(u(-w, w), STRONG_COUPLING, u(-w, w), u(-w, w), theta(u), 0.0).unwrap()
        }, a_wins)
        .with_note("strong coupling read as D >= 10x every other scale"),
        ordering_check("regime (b): J = 0, B1 = B2 gives qfi_B >= qfi_A (j=1,2), reverse (j=3,4)", seed, 43, draws, |u| {
            let b = u(-5.0, 5.0);
            ModelParams::new(0.0, u(-5.0, 5.0), b, b, theta(u), 0.0).unwrap()
        }, b_wins_outer),
        ordering_check("regime (b): D = 0, B1 = B2 gives qfi_B >= qfi_A (j=1,2), reverse (j=3,4)", seed, 44, draws, |u| {
            let b = u(-5.0, 5.0);
            ModelParams::new(u(-5.0, 5.0), 0.0, b, b, theta(u), 0.0).unwrap()
        }, b_wins_outer),
    ]
}

/// `θ = π/2, J = 1.3, B1 = 1, D = 0`: level-1 QFI barely moves from B2 = 40 to 80.
pub fn check_saturation() -> Result<CheckResult> {
    let at = |b2: f64| -> Result<f64> {
        let p = ModelParams::new(1.3, 0.0, 1.0, b2, FRAC_PI_2, 0.0)?;
        Ok(qfi(&p, Level::new(1)?, Probe::TwoQubit)?.value)
    };
    let (q40, q80) = (at(40.0)?, at(80.0)?);
    let change = (q40 - q80).abs() / q80;
    Ok(CheckResult::from_worst("fig3 saturation: |QFI1(B2=40) - QFI1(B2=80)| / QFI1(B2=80)", Severity::Soft, 2, change, SATURATION_TOL, 0)
        .with_note(format!("QFI1(40) = {q40:.6}, QFI1(80) = {q80:.6}")))
}

/// Evaluate all four levels for one probe over every point of a preset grid.
fn preset_levels(name: &str, probe: Probe) -> Result<Vec<[f64; 4]>> {
    let mut spec = figure_preset(name)?;
    spec.levels = Level::ALL.to_vec();
    spec.probes = vec![probe];
    let records = crate::sweep::run_sweep(&spec)?;
    Ok(records
        .iter()
        .filter_map(|r| {
            let vals: Option<Vec<f64>> = r.entries.iter().map(|e| e.value).collect();
            vals.map(|v| [v[0], v[1], v[2], v[3]])
        })
        .collect())
}

pub fn check_level_pairs() -> Result<CheckResult> {
    let rows = preset_levels("fig1", Probe::TwoQubit)?;
    let worst = rows.iter().map(|q| (q[0] - q[1]).abs().max((q[2] - q[3]).abs())).fold(0.0, f64::max);
    Ok(CheckResult::from_worst("fig1 grid: |QFI1 - QFI2|, |QFI3 - QFI4|", Severity::Soft, rows.len(), worst, PAIR_SPREAD_TOL, 0))
}

pub fn check_qubit_a_levels() -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    let mut samples = 0;
    for name in ["fig4", "fig5", "fig6a", "fig6b", "fig7"] {
        for q in preset_levels(name, Probe::A)? {
            let hi = q.iter().copied().fold(f64::MIN, f64::max);
            let lo = q.iter().copied().fold(f64::MAX, f64::min);
            worst = worst.max(hi - lo);
            samples += 1;
        }
    }
    Ok(CheckResult::from_worst("fig4-7 grids: spread of qfi_A over levels", Severity::Soft, samples, worst, PAIR_SPREAD_TOL, 0))
}

/// Run the full battery. Single-threaded apart from the preset sweeps, whose
/// output order is fixed, so the report is reproducible byte for byte.
pub fn verify(seed: u64, draws: usize) -> Result<VerificationReport> {
    if draws < 100 {
        return Err(Error::InvalidInput(format!("verify needs at least 100 draws, got {draws}")));
    }
    let mut checks = vec![
        check_eigenvalues(seed, draws),
        check_eigenvectors(seed, draws),
        check_two_qubit_oracle(seed, draws),
        check_one_qubit_oracle(seed, draws),
    ];
    checks.extend(check_symmetries(seed, draws));
    checks.push(check_monotonicity(seed, draws));
    checks.push(check_pure_bound(seed, draws));
    checks.push(check_polar_field(seed, draws));
    checks.extend(check_decoupled(50));
    checks.extend(check_regime_claims(seed, draws));
    checks.push(check_saturation()?);
    checks.push(check_level_pairs()?);
    checks.push(check_qubit_a_levels()?);
    Ok(VerificationReport { seed, draws, checks })
}

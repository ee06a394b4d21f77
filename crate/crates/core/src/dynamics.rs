//! Direct integration of `i ∂ₜψ = H(t) ψ` with `φ(t) = φ₀ + ω t`.
//!
//! Used to check that a state prepared in an instantaneous eigenstate
//! follows it, and that the QFI of the evolved state agrees with the
//! adiabatic closed forms. Only overlap moduli are compared, so the
//! dynamical and geometric phases never need to be computed.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;

use crate::adiabatic::{adiabatic_margin, DEFAULT_MARGIN_TARGET};
use crate::eigensystem::{level as instantaneous_level, spectral_invariants, EigenLevel};
use crate::error::{Error, Result};
use crate::metrology::{qfi_pure_oracle, qfi_spectral, reduce, Subsystem, DEFAULT_DELTA};
use crate::model::{Level, Matrix4c, ModelParams, RotatingHamiltonian, Vector4c, C64};

/// Single-step norm drift that aborts the integration.
pub const MAX_STEP_DRIFT: f64 = 1e-9;
/// Default bound on `ξ₁ Δt`; keeps the RK4 norm drift near 1e-12 per step.
pub const PHASE_PER_STEP: f64 = 0.02;
pub const MIN_STEPS_PER_REVOLUTION: usize = 10_000;
/// Upper bound on stored samples per trajectory; fidelity is still checked every step.
pub const MAX_SAMPLES: usize = 2048;

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub level: Level,
    pub omega: f64,
    pub t_final: f64,
    pub steps: usize,
    /// Sampled times (every `stride`-th step, always including both ends).
    pub times: Vec<f64>,
    #[serde(skip)]
    pub states: Vec<Vector4c>,
    /// `|⟨ξⱼ(t)|ψ(t)⟩|²` at the sampled times.
    pub fidelities: Vec<f64>,
    /// Minimum fidelity over every integration step.
    pub min_fidelity: f64,
    /// Largest norm correction applied by per-step renormalization.
    pub max_norm_drift: f64,
    #[serde(skip)]
    pub final_state: Vector4c,
}

/// Step count for a run of length `t_final`: at most [`PHASE_PER_STEP`] of
/// phase per step on the fastest level and at least
/// [`MIN_STEPS_PER_REVOLUTION`] per revolution of the field.
pub fn default_steps(params: &ModelParams, omega: f64, t_final: f64) -> Result<usize> {
    let xi_max = spectral_invariants(params)?.xi[0];
    let by_phase = (t_final * xi_max / PHASE_PER_STEP).ceil();
    let by_turns = (omega.abs() * t_final / TAU * MIN_STEPS_PER_REVOLUTION as f64).ceil();
    Ok(by_phase.max(by_turns).max(100.0) as usize)
}

struct Propagation {
    final_state: Vector4c,
    min_fidelity: f64,
    max_norm_drift: f64,
    samples: Vec<(f64, Vector4c, f64)>,
}

fn propagate(
    params: &ModelParams,
    omega: f64,
    t_final: f64,
    steps: usize,
    start: &EigenLevel,
    stride: Option<usize>,
) -> Result<Propagation> {
    let h = RotatingHamiltonian::new(params);
    let phi0 = params.phi();
    let dt = t_final / steps as f64;
    let minus_i = C64::new(0.0, -1.0);
    let rhs = |m: &Matrix4c, v: &Vector4c| (m * v) * minus_i;

    let mut psi = start.vector;
    let mut min_fidelity: f64 = 1.0;
    let mut max_norm_drift: f64 = 0.0;
    let mut samples = Vec::new();
    if stride.is_some() {
        samples.push((0.0, psi, 1.0));
    }

    for s in 0..steps {
        let t = s as f64 * dt;
        let h0 = h.at(phi0 + omega * t);
        let hm = h.at(phi0 + omega * (t + 0.5 * dt));
        let h1 = h.at(phi0 + omega * (t + dt));
        let half = C64::new(0.5 * dt, 0.0);
        let full = C64::new(dt, 0.0);

        let k1 = rhs(&h0, &psi);
        let k2 = rhs(&hm, &(psi + k1 * half));
        let k3 = rhs(&hm, &(psi + k2 * half));
        let k4 = rhs(&h1, &(psi + k3 * full));
        psi += (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0);

        let norm = psi.norm();
        let drift = (norm - 1.0).abs();
        if drift > MAX_STEP_DRIFT {
            return Err(Error::StepTooCoarse { drift });
        }
        max_norm_drift = max_norm_drift.max(drift);
        psi /= C64::new(norm, 0.0);

        let t_next = (s + 1) as f64 * dt;
        let target = start.rotated(omega * t_next).vector;
        let fidelity = target.dotc(&psi).norm_sqr();
        min_fidelity = min_fidelity.min(fidelity);

        if let Some(k) = stride {
            if (s + 1) % k == 0 || s + 1 == steps {
                samples.push((t_next, psi, fidelity));
            }
        }
    }

    Ok(Propagation { final_state: psi, min_fidelity, max_norm_drift, samples })
}

/// Fixed-step RK4 run starting in the instantaneous eigenstate `level`.
pub fn evolve(params: &ModelParams, omega: f64, t_final: f64, steps: usize, level: Level) -> Result<Trajectory> {
    if steps < 100 {
        return Err(Error::InvalidInput(format!("need at least 100 steps, got {steps}")));
    }
    if !(t_final.is_finite() && t_final >= 0.0 && omega.is_finite()) {
        return Err(Error::InvalidInput(format!("invalid run: omega = {omega}, t_final = {t_final}")));
    }
    let start = instantaneous_level(params, level)?;
    let stride = steps.div_ceil(MAX_SAMPLES).max(1);
    let run = propagate(params, omega, t_final, steps, &start, Some(stride))?;

    let mut times = Vec::with_capacity(run.samples.len());
    let mut states = Vec::with_capacity(run.samples.len());
    let mut fidelities = Vec::with_capacity(run.samples.len());
    for (t, psi, f) in run.samples {
        times.push(t);
        states.push(psi);
        fidelities.push(f);
    }
    Ok(Trajectory {
        level,
        omega,
        t_final,
        steps,
        times,
        states,
        fidelities,
        min_fidelity: run.min_fidelity,
        max_norm_drift: run.max_norm_drift,
        final_state: run.final_state,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryQfi {
    pub two_qubit: f64,
    pub qubit_a: f64,
    pub qubit_b: f64,
    /// Time at which the field reaches the probed azimuth.
    pub t_star: f64,
    pub steps: usize,
    pub margin: f64,
    /// Smallest eigenstate fidelity seen on the unshifted run.
    pub min_fidelity: f64,
}

/// QFI of the evolved state at the moment the field reaches `phi_probe`.
///
/// The unknown azimuth shifts the whole field trajectory, so the state at
/// `φ + δ` is obtained by rerunning the evolution from `φ₀ + δ` over the
/// same time `t* = (phi_probe − φ₀)/ω`. Two-qubit QFI uses
/// [`qfi_pure_oracle`]; the single-qubit values use [`qfi_spectral`] on the
/// partial traces.
pub fn qfi_from_trajectory(params: &ModelParams, omega: f64, level: Level, phi_probe: f64) -> Result<TrajectoryQfi> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidInput(format!("omega must be positive, got {omega}")));
    }
    let report = adiabatic_margin(params, omega, DEFAULT_MARGIN_TARGET)?;
    if !report.is_adiabatic() {
        return Err(Error::NotAdiabatic { margin: report.margin, target: report.margin_target });
    }
    let t_star = (phi_probe - params.phi()) / omega;
    if !(t_star >= 0.0 && t_star.is_finite()) {
        return Err(Error::InvalidInput(format!("phi_probe {phi_probe} precedes the starting azimuth {}", params.phi())));
    }
    let steps = default_steps(params, omega, t_star)?;

    let run_from = |probe: f64| -> Result<Propagation> {
        let shifted = params.with_phi(probe - omega * t_star)?;
        let start = instantaneous_level(&shifted, level)?;
        propagate(&shifted, omega, t_star, steps, &start, None)
    };

    // Same expressions as the finite-difference stencils, so lookups hit exactly.
    let delta = DEFAULT_DELTA;
    let half = 0.5 * delta;
    let stencil = [phi_probe, phi_probe + delta, phi_probe + half, phi_probe - delta, phi_probe - half];
    let runs: Vec<(f64, Propagation)> = stencil
        .par_iter()
        .map(|&x| run_from(x).map(|r| (x, r)))
        .collect::<Result<_>>()?;

    let state_at = |x: f64| -> Result<Vector4c> {
        match runs.iter().find(|(key, _)| key.to_bits() == x.to_bits()) {
            Some((_, r)) => Ok(r.final_state),
            None => Ok(run_from(x)?.final_state),
        }
    };

    let two_qubit = qfi_pure_oracle(state_at, phi_probe, delta)?;
    let qubit_a = qfi_spectral(|x| reduce(&state_at(x)?, Subsystem::A), phi_probe, delta)?;
    let qubit_b = qfi_spectral(|x| reduce(&state_at(x)?, Subsystem::B), phi_probe, delta)?;

    Ok(TrajectoryQfi {
        two_qubit,
        qubit_a,
        qubit_b,
        t_star,
        steps,
        margin: report.margin,
        min_fidelity: runs[0].1.min_fidelity,
    })
}

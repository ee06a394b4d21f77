//! Adiabaticity check for a field rotating at constant rate `φ̇`.
//!
//! With `Ḣ = φ̇ ∂H/∂φ` the condition compares
//! `max |⟨ξₖ|Ḣ|ξⱼ⟩ / (ξⱼ − ξₖ)|` against `min |ξⱼ − ξₖ|` over the run. The
//! eigenvalues do not depend on φ and the eigenvectors only pick up diagonal
//! phases, so every modulus involved is constant in time: one evaluation at
//! the current azimuth covers the whole interval `[0, T]`, and `T` enters
//! only through `φ̇ = Δφ / T`.

use serde::Serialize;

use crate::eigensystem::{levels, EPS_GAP};
use crate::error::{Error, Result};
use crate::model::{d_hamiltonian_d_phi, ModelParams};

pub const DEFAULT_MARGIN_TARGET: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdiabaticReport {
    pub phi_dot: f64,
    pub margin_target: f64,
    /// `max_{k≠j} |⟨ξₖ|∂H/∂φ|ξⱼ⟩ / (ξⱼ − ξₖ)|`, i.e. the coupling ratio per unit `φ̇`.
    pub unit_coupling_ratio: f64,
    pub max_coupling_ratio: f64,
    pub min_gap: f64,
    /// `min_gap / max_coupling_ratio`; infinite when the ratio vanishes.
    pub margin: f64,
    /// Largest `φ̇` keeping `margin ≥ margin_target`; infinite when `∂H/∂φ` does not couple levels.
    pub max_phi_dot: f64,
}

impl AdiabaticReport {
    pub fn is_adiabatic(&self) -> bool {
        self.margin >= self.margin_target
    }
}

pub fn adiabatic_margin(params: &ModelParams, phi_dot: f64, margin_target: f64) -> Result<AdiabaticReport> {
    if !(phi_dot >= 0.0 && phi_dot.is_finite()) {
        return Err(Error::InvalidInput(format!("phi_dot must be finite and ≥ 0, got {phi_dot}")));
    }
    if !(margin_target > 1.0 && margin_target.is_finite()) {
        return Err(Error::InvalidInput(format!("margin_target must exceed 1, got {margin_target}")));
    }

    let states = levels(params)?;
    let dh = d_hamiltonian_d_phi(params);

    let mut min_gap = f64::INFINITY;
    let mut unit_ratio: f64 = 0.0;
    for (j, sj) in states.iter().enumerate() {
        let column = dh.apply(&sj.vector);
        for (k, sk) in states.iter().enumerate() {
            if j == k {
                continue;
            }
            let gap = (sj.xi - sk.xi).abs();
            if gap <= EPS_GAP * params.scale() {
                return Err(Error::DegenerateSpectrum { min_gap: gap });
            }
            min_gap = min_gap.min(gap);
            unit_ratio = unit_ratio.max(sk.vector.dotc(&column).norm() / gap);
        }
    }

    let max_coupling_ratio = phi_dot * unit_ratio;
    let margin = if max_coupling_ratio > 0.0 { min_gap / max_coupling_ratio } else { f64::INFINITY };
    let max_phi_dot = if unit_ratio > 0.0 { min_gap / (margin_target * unit_ratio) } else { f64::INFINITY };

    Ok(AdiabaticReport {
        phi_dot,
        margin_target,
        unit_coupling_ratio: unit_ratio,
        max_coupling_ratio,
        min_gap,
        margin,
        max_phi_dot,
    })
}

//! Quantum Fisher information for the field azimuth.
//!
//! Closed forms are evaluated from the level coefficients. Where those are
//! ill-conditioned the numeric eigenvector is used with the exact phase
//! generator. The finite-difference estimators ([`qfi_pure_oracle`],
//! [`qfi_spectral`]) work on any smooth family of states and are kept as
//! independent checks.

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::eigensystem::{analytic_level, numeric_level, LevelCoefficients};
use crate::error::{Error, Result};
use crate::model::{Level, Matrix2c, ModelParams, Vector4c, C64};

/// Support cutoff: eigenvalue pairs with `pᵢ + pₖ` below this are dropped.
pub const EPS_SLD: f64 = 1e-12;
/// Matrix elements of `∂ρ` outside the support larger than this are an error.
pub const SUPPORT_LEAK_TOL: f64 = 1e-8;
/// Default finite-difference step in φ.
pub const DEFAULT_DELTA: f64 = 1e-4;

const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Probe {
    #[serde(rename = "two-qubit")]
    TwoQubit,
    A,
    B,
}

impl Probe {
    pub const ALL: [Probe; 3] = [Probe::TwoQubit, Probe::A, Probe::B];

    pub fn label(self) -> &'static str {
        match self {
            Probe::TwoQubit => "two_qubit",
            Probe::A => "A",
            Probe::B => "B",
        }
    }
}

impl std::str::FromStr for Probe {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-qubit" | "two_qubit" | "AB" => Ok(Probe::TwoQubit),
            "A" => Ok(Probe::A),
            "B" => Ok(Probe::B),
            other => Err(Error::InvalidInput(format!("unknown probe `{other}`"))),
        }
    }
}

/// Which qubit survives a partial trace. `A` is spin 1 (static field), `B`
/// is spin 2 (rotating field).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

impl Subsystem {
    pub fn probe(self) -> Probe {
        match self {
            Subsystem::A => Probe::A,
            Subsystem::B => Probe::B,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    /// Numeric eigenvector with the exact azimuthal phase generator.
    Generator,
    Spectral,
    FidelityOracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QfiValue {
    pub value: f64,
    pub level: Level,
    pub probe: Probe,
    pub method: Method,
}

/// Single-qubit density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix2(Matrix2c);

impl DensityMatrix2 {
    pub fn new(m: Matrix2c) -> Result<Self> {
        let herm = (m - m.adjoint()).norm();
        if herm > 1e-12 {
            return Err(Error::InvalidInput(format!("density matrix is not Hermitian (defect {herm:e})")));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("density matrix trace is {tr}")));
        }
        let rho = DensityMatrix2(hermitize(&m));
        let e = SymmetricEigen::new(rho.0);
        let lo = e.eigenvalues[0].min(e.eigenvalues[1]);
        if lo < -1e-12 {
            return Err(Error::InvalidInput(format!("density matrix has negative eigenvalue {lo:e}")));
        }
        Ok(rho)
    }

    pub fn pure(psi: &nalgebra::Vector2<C64>) -> Result<Self> {
        check_norm(psi.norm())?;
        DensityMatrix2::new(psi * psi.adjoint())
    }

    pub fn matrix(&self) -> &Matrix2c {
        &self.0
    }

    /// Ascending eigenvalues, clamped at zero, with eigenvectors as columns.
    pub fn eigen(&self) -> ([f64; 2], Matrix2c) {
        let e = SymmetricEigen::new(self.0);
        let (lo, hi) = if e.eigenvalues[0] <= e.eigenvalues[1] { (0, 1) } else { (1, 0) };
        let mut u = Matrix2c::zeros();
        u.set_column(0, &e.eigenvectors.column(lo));
        u.set_column(1, &e.eigenvectors.column(hi));
        ([e.eigenvalues[lo].max(0.0), e.eigenvalues[hi].max(0.0)], u)
    }
}

fn hermitize(m: &Matrix2c) -> Matrix2c {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

fn check_norm(norm: f64) -> Result<()> {
    if (norm - 1.0).abs() > NORM_TOL {
        Err(Error::NonNormalizedInput { norm })
    } else {
        Ok(())
    }
}

/// `(F, M, G, P) = P·(f, m, g, 1)` and their squared norm `S`. Written over
/// these the closed forms never divide by `P`, which is where they lose
/// digits when `P` is small.
fn numerators(c: &LevelCoefficients) -> ([C64; 4], f64) {
    let a = [c.f * c.p, c.m * c.p, c.g * c.p, c.p];
    (a, a.iter().map(|x| x.norm_sqr()).sum())
}

/// `4|N|²(|g|² + |m|² + 4|f|² − |N|²(|g|² + |m|² + 2|f|²)²)`, evaluated as
/// `4 Σ wₖ (Gₖ − ⟨G⟩)²` over the basis weights of `N(f, m, g, 1)`.
pub fn two_qubit_closed_form(c: &LevelCoefficients) -> f64 {
    let (a, s) = numerators(c);
    let w = a.map(|x| x.norm_sqr() / s);
    weighted_variance(&w)
}

/// `4|N|⁴|m + f g*|²` for qubit A, `4|N|⁴|f m* + g|²` for qubit B.
pub fn one_qubit_closed_form(c: &LevelCoefficients, keep: Subsystem) -> f64 {
    let ([f, m, g, p], s) = numerators(c);
    let coherence = match keep {
        Subsystem::A => m * p.conj() + f * g.conj(),
        Subsystem::B => f * m.conj() + g * p.conj(),
    };
    4.0 * coherence.norm_sqr() / (s * s)
}

/// `4 Var(G)` for basis weights `w`, with `G = diag(2, 1, 1, 0)` the generator of `U(φ)`.
fn weighted_variance(w: &[f64; 4]) -> f64 {
    const G: [f64; 4] = [2.0, 1.0, 1.0, 0.0];
    let mean: f64 = w.iter().zip(G).map(|(w, g)| w * g).sum();
    4.0 * w.iter().zip(G).map(|(w, g)| w * (g - mean).powi(2)).sum::<f64>()
}

/// QFI of the two-qubit adiabatic state `j`. φ-independent.
pub fn qfi_two_qubit(params: &ModelParams, level: Level) -> Result<QfiValue> {
    let (value, method) = match analytic_level(params, level) {
        Ok(e) => (two_qubit_closed_form(&e.coefficients.expect("analytic level")), Method::ClosedForm),
        Err(Error::DegenerateCoefficients { .. }) => {
            (weighted_variance(&numeric_level(params, level)?.vector.map(|a| a.norm_sqr()).into()), Method::Generator)
        }
        Err(e) => return Err(e),
    };
    Ok(QfiValue { value, level, probe: Probe::TwoQubit, method })
}

/// QFI carried by one qubit of the adiabatic state `j`. φ-independent.
pub fn qfi_one_qubit(params: &ModelParams, level: Level, keep: Subsystem) -> Result<QfiValue> {
    let (value, method) = match analytic_level(params, level) {
        Ok(e) => (one_qubit_closed_form(&e.coefficients.expect("analytic level"), keep), Method::ClosedForm),
        Err(Error::DegenerateCoefficients { .. }) => {
            let rho = reduce(&numeric_level(params, level)?.vector, keep)?;
            (qfi_from_derivative(&rho, &phase_derivative(&rho))?, Method::Generator)
        }
        Err(e) => return Err(e),
    };
    Ok(QfiValue { value, level, probe: keep.probe(), method })
}

/// Each qubit picks up `e^{-iφ}` on spin up, so `∂ρ = −i[diag(1, 0), ρ]`.
fn phase_derivative(rho: &DensityMatrix2) -> Matrix2c {
    let c = rho.matrix()[(0, 1)] * C64::new(0.0, -1.0);
    Matrix2c::new(C64::new(0.0, 0.0), c, c.conj(), C64::new(0.0, 0.0))
}

pub fn qfi(params: &ModelParams, level: Level, probe: Probe) -> Result<QfiValue> {
    match probe {
        Probe::TwoQubit => qfi_two_qubit(params, level),
        Probe::A => qfi_one_qubit(params, level, Subsystem::A),
        Probe::B => qfi_one_qubit(params, level, Subsystem::B),
    }
}

/// `1 − |⟨a|b⟩|` for unit vectors, without cancellation.
fn infidelity(a: &Vector4c, b: &Vector4c) -> f64 {
    let ov = a.dotc(b);
    let perp = (b - a * ov).norm_squared();
    perp / (1.0 + ov.norm())
}

/// Pure-state QFI from the overlap decay `8(1 − |⟨ψ(φ)|ψ(φ+δ)⟩|)/δ²`,
/// Richardson-extrapolated over `δ` and `δ/2`.
///
/// Depends only on overlap moduli, so the phase convention of `state_at` is
/// irrelevant as long as it is normalized.
pub fn qfi_pure_oracle<F>(state_at: F, phi: f64, delta: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<Vector4c>,
{
    check_delta(delta)?;
    let fetch = |x: f64| -> Result<Vector4c> {
        let v = state_at(x)?;
        check_norm(v.norm())?;
        Ok(v)
    };
    let half = 0.5 * delta;
    let center = fetch(phi)?;
    let full = 8.0 * infidelity(&center, &fetch(phi + delta)?) / (delta * delta);
    let halved = 8.0 * infidelity(&center, &fetch(phi + half)?) / (half * half);
    Ok((2.0 * halved - full).max(0.0))
}

fn check_delta(delta: f64) -> Result<()> {
    if (1e-6..=1e-2).contains(&delta) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("finite-difference step must lie in [1e-6, 1e-2], got {delta}")))
    }
}

/// Partial trace of a two-qubit pure state.
pub fn reduce(state: &Vector4c, keep: Subsystem) -> Result<DensityMatrix2> {
    check_norm(state.norm())?;
    // Basis index = 2·(spin 1) + (spin 2).
    let amp = |a: usize, b: usize| state[2 * a + b];
    let m = Matrix2c::from_fn(|r, c| match keep {
        Subsystem::A => amp(r, 0) * amp(c, 0).conj() + amp(r, 1) * amp(c, 1).conj(),
        Subsystem::B => amp(0, r) * amp(0, c).conj() + amp(1, r) * amp(1, c).conj(),
    });
    let tr = m.trace().re;
    DensityMatrix2::new(m / C64::new(tr, 0.0))
}

fn check_derivative(drho: &Matrix2c) -> Result<()> {
    let herm = (drho - drho.adjoint()).norm();
    let tr = drho.trace().norm();
    if herm > 1e-10 || tr > 1e-10 {
        return Err(Error::InvalidInput(format!(
            "derivative must be Hermitian and traceless (defects {herm:e}, {tr:e})"
        )));
    }
    Ok(())
}

/// `∂ρ` in the eigenbasis of ρ, with eigenvalues. Errors if a dropped
/// (off-support) element is not negligible.
fn eigenbasis_derivative(rho: &DensityMatrix2, drho: &Matrix2c) -> Result<([f64; 2], Matrix2c, Matrix2c)> {
    let (p, u) = rho.eigen();
    let x = u.adjoint() * drho * u;
    for i in 0..2 {
        for k in 0..2 {
            if p[i] + p[k] < EPS_SLD && x[(i, k)].norm() > SUPPORT_LEAK_TOL {
                return Err(Error::ZeroSupportDerivative { magnitude: x[(i, k)].norm() });
            }
        }
    }
    Ok((p, u, x))
}

/// Symmetric logarithmic derivative `L` with `∂ρ = ½(Lρ + ρL)`, restricted
/// to the support of ρ.
pub fn sld(rho: &DensityMatrix2, drho: &Matrix2c) -> Result<Matrix2c> {
    check_derivative(drho)?;
    let (p, u, x) = eigenbasis_derivative(rho, drho)?;
    let l = Matrix2c::from_fn(|i, k| {
        let s = p[i] + p[k];
        if s < EPS_SLD {
            C64::default()
        } else {
            x[(i, k)] * (2.0 / s)
        }
    });
    Ok(u * l * u.adjoint())
}

/// `Σᵢₖ 2|⟨i|∂ρ|k⟩|² / (pᵢ + pₖ)` over the support.
pub fn qfi_from_derivative(rho: &DensityMatrix2, drho: &Matrix2c) -> Result<f64> {
    check_derivative(drho)?;
    let (p, _, x) = eigenbasis_derivative(rho, drho)?;
    let mut total = 0.0;
    for i in 0..2 {
        for k in 0..2 {
            let s = p[i] + p[k];
            if s >= EPS_SLD {
                total += 2.0 * x[(i, k)].norm_sqr() / s;
            }
        }
    }
    Ok(total)
}

/// QFI of a one-qubit family from its spectral decomposition.
///
/// `∂ρ` is a central difference at `δ` and `δ/2`, Richardson-combined.
pub fn qfi_spectral<F>(rho_at: F, phi: f64, delta: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<DensityMatrix2>,
{
    check_delta(delta)?;
    let half = 0.5 * delta;
    let diff = |h: f64, plus: f64, minus: f64| -> Result<Matrix2c> {
        Ok((rho_at(plus)?.matrix() - rho_at(minus)?.matrix()) / C64::new(2.0 * h, 0.0))
    };
    let coarse = diff(delta, phi + delta, phi - delta)?;
    let fine = diff(half, phi + half, phi - half)?;
    let drho = hermitize(&((fine * C64::new(4.0, 0.0) - coarse) / C64::new(3.0, 0.0)));
    let tr = drho.trace() * C64::new(0.5, 0.0);
    let drho = drho - Matrix2c::identity() * tr;
    qfi_from_derivative(&rho_at(phi)?, &drho)
}

/// Cramér–Rao bound `1/√(N F)` on the standard deviation of an unbiased
/// estimator after `n` repetitions; infinite when `f = 0`.
pub fn cramer_rao(f: f64, n: u64) -> f64 {
    assert!(f >= 0.0 && n >= 1, "cramer_rao needs F ≥ 0 and N ≥ 1");
    if f == 0.0 {
        f64::INFINITY
    } else {
        1.0 / (n as f64 * f).sqrt()
    }
}

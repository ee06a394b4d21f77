//! Two-spin XX Hamiltonian with a z-axis Dzyaloshinskii–Moriya term.
//!
//! Spin 1 sits in a static field `B1 ẑ`; spin 2 sees a field of magnitude
//! `B2` along `n̂ = (sinθ cosφ, sinθ sinφ, cosθ)`. The azimuth `φ` is the
//! quantity being estimated. Units are ħ = 1 and the field symbols absorb
//! the gyromagnetic factors.
//!
//! All matrices use the product basis `{↑↑, ↑↓, ↓↑, ↓↓}` with spin 1 as the
//! leading tensor factor.

use std::f64::consts::{PI, TAU};
use std::fmt;

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Matrix4c = Matrix4<C64>;
pub type Vector4c = Vector4<C64>;
pub type Matrix2c = Matrix2<C64>;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

fn pauli_x() -> Matrix2c {
    Matrix2c::new(ZERO, ONE, ONE, ZERO)
}

fn pauli_y() -> Matrix2c {
    Matrix2c::new(ZERO, -I, I, ZERO)
}

fn pauli_z() -> Matrix2c {
    Matrix2c::new(ONE, ZERO, ZERO, -ONE)
}

fn kron(a: &Matrix2c, b: &Matrix2c) -> Matrix4c {
    Matrix4c::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// One of the four adiabatic levels, numbered 1..=4 so that
/// `ξ₁ ≥ ξ₃ ≥ 0 ≥ ξ₄ ≥ ξ₂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Level(u8);

impl Level {
    pub const ALL: [Level; 4] = [Level(1), Level(2), Level(3), Level(4)];

    pub fn new(j: u8) -> Result<Self> {
        if (1..=4).contains(&j) {
            Ok(Level(j))
        } else {
            Err(Error::InvalidInput(format!("level must be 1..=4, got {j}")))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub(crate) fn index(self) -> usize {
        usize::from(self.0 - 1)
    }

    /// Levels 1 and 2 form the outer pair `±ξ₁`.
    pub fn is_outer(self) -> bool {
        self.0 <= 2
    }
}

impl TryFrom<u8> for Level {
    type Error = Error;
    fn try_from(j: u8) -> Result<Self> {
        Level::new(j)
    }
}

impl From<Level> for u8 {
    fn from(l: Level) -> u8 {
        l.0
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Named scalar parameter of the model, used by sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Param {
    J,
    D,
    B1,
    B2,
    #[serde(rename = "theta")]
    Theta,
    #[serde(rename = "phi")]
    Phi,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::J => "J",
            Param::D => "D",
            Param::B1 => "B1",
            Param::B2 => "B2",
            Param::Theta => "theta",
            Param::Phi => "phi",
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Param {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "J" => Param::J,
            "D" => Param::D,
            "B1" => Param::B1,
            "B2" => Param::B2,
            "theta" => Param::Theta,
            "phi" => Param::Phi,
            other => return Err(Error::InvalidInput(format!("unknown parameter `{other}`"))),
        })
    }
}

#[derive(Deserialize)]
struct RawParams {
    #[serde(rename = "J")]
    j: f64,
    #[serde(rename = "D")]
    d: f64,
    #[serde(rename = "B1")]
    b1: f64,
    #[serde(rename = "B2")]
    b2: f64,
    theta: f64,
    #[serde(default)]
    phi: f64,
}

/// The six numbers fixing one model instance.
///
/// Always finite, with `theta ∈ [0, π]` and `phi` wrapped into `[0, 2π)`.
/// Couplings and field magnitudes may take either sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct ModelParams {
    #[serde(rename = "J")]
    j: f64,
    #[serde(rename = "D")]
    d: f64,
    #[serde(rename = "B1")]
    b1: f64,
    #[serde(rename = "B2")]
    b2: f64,
    theta: f64,
    phi: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        ModelParams::new(r.j, r.d, r.b1, r.b2, r.theta, r.phi)
    }
}

fn wrap_angle(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

impl ModelParams {
    pub fn new(j: f64, d: f64, b1: f64, b2: f64, theta: f64, phi: f64) -> Result<Self> {
        for (name, v) in [("J", j), ("D", d), ("B1", b1), ("B2", b2), ("theta", theta), ("phi", phi)] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite, got {v}")));
            }
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidParams(format!("theta must lie in [0, π], got {theta}")));
        }
        Ok(ModelParams { j, d, b1, b2, theta, phi: wrap_angle(phi) })
    }

    pub fn j(&self) -> f64 {
        self.j
    }
    pub fn d(&self) -> f64 {
        self.d
    }
    pub fn b1(&self) -> f64 {
        self.b1
    }
    pub fn b2(&self) -> f64 {
        self.b2
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn get(&self, p: Param) -> f64 {
        match p {
            Param::J => self.j,
            Param::D => self.d,
            Param::B1 => self.b1,
            Param::B2 => self.b2,
            Param::Theta => self.theta,
            Param::Phi => self.phi,
        }
    }

    /// Copy with one parameter replaced, re-validated.
    pub fn with(&self, p: Param, value: f64) -> Result<Self> {
        let mut v = [self.j, self.d, self.b1, self.b2, self.theta, self.phi];
        let slot = match p {
            Param::J => 0,
            Param::D => 1,
            Param::B1 => 2,
            Param::B2 => 3,
            Param::Theta => 4,
            Param::Phi => 5,
        };
        v[slot] = value;
        ModelParams::new(v[0], v[1], v[2], v[3], v[4], v[5])
    }

    pub fn with_phi(&self, phi: f64) -> Result<Self> {
        self.with(Param::Phi, phi)
    }

    /// `max(|J|, |D|, |B1|, |B2|, 1)`; all conditioning thresholds are relative to it.
    pub fn scale(&self) -> f64 {
        self.j.abs().max(self.d.abs()).max(self.b1.abs()).max(self.b2.abs()).max(1.0)
    }

    /// `d = 2(J + iD)`, the hopping amplitude between `↑↓` and `↓↑`.
    pub fn hopping(&self) -> C64 {
        C64::new(2.0 * self.j, 2.0 * self.d)
    }
}

/// 4×4 complex Hermitian matrix. Only the upper triangle is taken from the
/// source; the lower triangle is its conjugate and the diagonal is real, so
/// conjugate symmetry holds exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianOperator4(Matrix4c);

impl HermitianOperator4 {
    pub fn from_upper(m: &Matrix4c) -> Self {
        let h = Matrix4c::from_fn(|r, c| match r.cmp(&c) {
            std::cmp::Ordering::Less => m[(r, c)],
            std::cmp::Ordering::Equal => C64::new(m[(r, r)].re, 0.0),
            std::cmp::Ordering::Greater => m[(c, r)].conj(),
        });
        HermitianOperator4(h)
    }

    pub fn matrix(&self) -> &Matrix4c {
        &self.0
    }

    /// Zero-based entry access.
    pub fn entry(&self, r: usize, c: usize) -> C64 {
        self.0[(r, c)]
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// Operator 2-norm bound: the Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn apply(&self, v: &Vector4c) -> Vector4c {
        self.0 * v
    }
}

/// `J(σ₁ˣσ₂ˣ + σ₁ʸσ₂ʸ) + B₁σ₁ᶻ + B₂ n̂·σ⃗₂ + D(σ⃗₁ × σ⃗₂)ᶻ`, assembled from
/// Pauli tensor products.
pub fn build_hamiltonian(params: &ModelParams) -> HermitianOperator4 {
    let (sx, sy, sz) = (pauli_x(), pauli_y(), pauli_z());
    let id = Matrix2c::identity();
    let (st, ct) = params.theta.sin_cos();
    let (sp, cp) = params.phi.sin_cos();
    let re = |x: f64| C64::new(x, 0.0);

    let exchange = (kron(&sx, &sx) + kron(&sy, &sy)) * re(params.j);
    let static_field = kron(&sz, &id) * re(params.b1);
    let rotating = (kron(&id, &sx) * re(st * cp) + kron(&id, &sy) * re(st * sp) + kron(&id, &sz) * re(ct))
        * re(params.b2);
    let dm = (kron(&sx, &sy) - kron(&sy, &sx)) * re(params.d);

    HermitianOperator4::from_upper(&(exchange + static_field + rotating + dm))
}

/// `∂H/∂φ`; only spin 2's transverse field depends on the azimuth.
pub fn d_hamiltonian_d_phi(params: &ModelParams) -> HermitianOperator4 {
    let amp = C64::new(0.0, -params.b2 * params.theta.sin()) * C64::from_polar(1.0, -params.phi);
    let mut m = Matrix4c::zeros();
    m[(0, 1)] = amp;
    m[(2, 3)] = amp;
    HermitianOperator4::from_upper(&m)
}

/// φ-independent and φ-dependent pieces of the Hamiltonian, for cheap
/// re-evaluation along a time-dependent azimuth.
///
/// `H(φ) = static + b·(e^{-iφ} R + e^{iφ} R†)` with `R` the raising pattern
/// on spin 2 and `b = B₂ sinθ`.
#[derive(Debug, Clone, Copy)]
pub struct RotatingHamiltonian {
    static_part: Matrix4c,
    transverse: f64,
}

impl RotatingHamiltonian {
    pub fn new(params: &ModelParams) -> Self {
        let h = build_hamiltonian(params);
        let mut static_part = *h.matrix();
        for (r, c) in [(0, 1), (1, 0), (2, 3), (3, 2)] {
            static_part[(r, c)] = ZERO;
        }
        RotatingHamiltonian { static_part, transverse: params.b2 * params.theta.sin() }
    }

    pub fn at(&self, phi: f64) -> Matrix4c {
        let mut m = self.static_part;
        let off = C64::from_polar(self.transverse, -phi);
        m[(0, 1)] = off;
        m[(2, 3)] = off;
        m[(1, 0)] = off.conj();
        m[(3, 2)] = off.conj();
        m
    }
}

/// Diagonal phases `(e^{-2iΔ}, e^{-iΔ}, e^{-iΔ}, 1)` carrying level vectors
/// from azimuth `φ` to `φ + Δ`.
pub fn azimuth_phases(delta: f64) -> Vector4c {
    let p = C64::from_polar(1.0, -delta);
    Vector4c::new(p * p, p, p, ONE)
}

//! Instantaneous eigenvalues and eigenvectors of the Hamiltonian.
//!
//! Two independent routes are provided. [`analytic_level`] evaluates the
//! closed-form spectrum and the `f, m, g, P` coefficients; it refuses to
//! answer where those expressions lose precision. [`numeric_level`]
//! diagonalizes the matrix numerically and fixes each eigenvector's phase
//! deterministically. [`level`] picks the first route and falls back to the
//! second.

use nalgebra::SymmetricEigen;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{azimuth_phases, build_hamiltonian, Level, ModelParams, Vector4c, C64};

/// Minimum `|Pⱼ|`, relative to `scale³`. The closed-form QFI carries a
/// relative error of roughly `1e-15 · scale³ / |Pⱼ|`, so this keeps it near 1e-10.
pub const EPS_P: f64 = 1e-5;
/// Minimum `|B₂ sinθ| |d|`, relative to `scale³`.
pub const EPS_COUPLING: f64 = 1e-10;
/// Minimum level spacing, relative to `scale`.
pub const EPS_GAP: f64 = 1e-9;
/// Radicands above `-RADICAND_TOL · scaleⁿ` are treated as rounding noise and clamped to zero.
pub const RADICAND_TOL: f64 = 1e-12;

/// Components with modulus above this anchor the gauge on the fourth amplitude.
const FOURTH_COMPONENT_ANCHOR: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralInvariants {
    /// `|d|² = 4(J² + D²)`.
    pub abs_d_sq: f64,
    /// The nonnegative quantity written `|ξ|²`; it is itself a square root.
    pub xi_norm_sq: f64,
    /// `[ξ₁, ξ₂, ξ₃, ξ₄]` with `ξ₂ = -ξ₁`, `ξ₄ = -ξ₃`.
    pub xi: [f64; 4],
}

impl SpectralInvariants {
    pub fn eigenvalue(&self, level: Level) -> f64 {
        self.xi[level.index()]
    }

    /// Smallest spacing between any two of the four eigenvalues.
    pub fn min_gap(&self) -> f64 {
        let [x1, _, x3, _] = self.xi;
        (2.0 * x3).min(x1 - x3)
    }
}

pub fn spectral_invariants(params: &ModelParams) -> Result<SpectralInvariants> {
    let (b1, b2) = (params.b1(), params.b2());
    let (st, ct) = params.theta().sin_cos();
    let scale = params.scale();
    let dd = params.hopping().norm_sqr();

    // Both radicands are rearranged into sums of squares, so neither cancels:
    // −4cos²θ|d|²B₂² − 8cosθ|d|²B₁B₂ + |d|⁴ + 4|d|²B₂² + 16B₁²B₂²
    //   = (|d|² − 4B₁B₂cosθ)² + 4B₂²sin²θ(|d|² + 4B₁²),
    // and ξ₁²ξ₃² = (B₁² − B₂²)² + |d|²(B₁ + B₂cosθ)² gives ξ₃ without the
    // difference under its square root.
    let inner = (dd - 4.0 * b1 * b2 * ct).powi(2) + 4.0 * (b2 * st).powi(2) * (dd + 4.0 * b1 * b1);
    let xi_norm_sq = clamped_sqrt(inner, scale.powi(4), "|ξ|²")?;

    let base = 2.0 * dd + 4.0 * b1 * b1 + 4.0 * b2 * b2;
    let x1 = 0.5 * clamped_sqrt(base + 2.0 * xi_norm_sq, scale.powi(2), "ξ₁")?;
    let product = ((b1 - b2) * (b1 + b2)).hypot(dd.sqrt() * (b1 + b2 * ct));
    let x3 = if x1 > 0.0 { product / x1 } else { 0.0 };

    Ok(SpectralInvariants { abs_d_sq: dd, xi_norm_sq, xi: [x1, -x1, x3, -x3] })
}

fn clamped_sqrt(radicand: f64, scale: f64, which: &'static str) -> Result<f64> {
    if radicand < -RADICAND_TOL * scale {
        return Err(Error::RadicandNegative { which, value: radicand });
    }
    Ok(radicand.max(0.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LevelSource {
    Analytic,
    NumericFallback,
}

/// Closed-form coefficients of one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelCoefficients {
    pub f: C64,
    pub m: C64,
    pub g: C64,
    /// Common denominator `Pⱼ`.
    pub p: C64,
    /// Normalization `Nⱼ = (|f|² + |m|² + |g|² + 1)^{-1/2}`.
    pub n: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenLevel {
    pub level: Level,
    pub xi: f64,
    /// Present only for [`LevelSource::Analytic`].
    pub coefficients: Option<LevelCoefficients>,
    pub vector: Vector4c,
    pub source: LevelSource,
}

impl EigenLevel {
    /// The same level at azimuth `phi + delta`.
    ///
    /// The azimuth enters the eigenvectors only through diagonal phases, so
    /// this is exact for either source.
    pub fn rotated(&self, delta: f64) -> EigenLevel {
        EigenLevel { vector: self.vector.component_mul(&azimuth_phases(delta)), ..*self }
    }
}

/// Closed-form level `j`.
///
/// Fails with [`Error::DegenerateCoefficients`] where the closed form is 0/0
/// or ill-conditioned (`θ ∈ {0, π}`, `d = 0`, `B₂ = 0`, small `Pⱼ`), and with
/// [`Error::DegenerateSpectrum`] when two eigenvalues collide.
pub fn analytic_level(params: &ModelParams, level: Level) -> Result<EigenLevel> {
    let inv = spectral_invariants(params)?;
    let scale = params.scale();
    let min_gap = inv.min_gap();
    if min_gap <= EPS_GAP * scale {
        return Err(Error::DegenerateSpectrum { min_gap });
    }

    let (b1, b2) = (params.b1(), params.b2());
    let (st, ct) = params.theta().sin_cos();
    let d = params.hopping();
    let dd = inv.abs_d_sq;
    let xn = inv.xi_norm_sq;
    let xi = inv.eigenvalue(level);
    let cube = scale.powi(3);

    if (b2 * st).abs() * dd.sqrt() <= EPS_COUPLING * cube {
        return Err(Error::DegenerateCoefficients {
            level: level.get(),
            reason: "transverse field or hopping vanishes",
        });
    }

    // The outer pair (1, 2) and the inner pair (3, 4) differ in the sign of |ξ|².
    let (p, g_num) = if level.is_outer() {
        let p = 4.0 * b2 * (xn / 4.0 - dd / 4.0 + b1 * (b1 - xi)) * ct + (b1 - xi) * (xn - dd) + 4.0 * b1 * b2 * b2;
        (p, 4.0 * b1 * b1 - 4.0 * b1 * xi + dd + xn)
    } else {
        let p =
            4.0 * b2 * (-xn / 4.0 - dd / 4.0 + b1 * (b1 - xi)) * ct + (xi - b1) * (xn + dd) + 4.0 * b1 * b2 * b2;
        (p, 4.0 * b1 * b1 - 4.0 * b1 * xi + dd - xn)
    };
    if p.abs() <= EPS_P * cube {
        return Err(Error::DegenerateCoefficients { level: level.get(), reason: "denominator P is too small" });
    }

    let f = d * (-2.0 * b2 * b2 * st * st / p);
    let m = d * (2.0 * b2 * st * (b2 * ct + b1 - xi) / p);
    let g = C64::new(-b2 * st * g_num / p, 0.0);
    let n = 1.0 / (f.norm_sqr() + m.norm_sqr() + g.norm_sqr() + 1.0).sqrt();

    // Normalized from the numerators `P·(f, m, g, 1)`, which stay accurate when `P` is small.
    let phase = C64::from_polar(1.0, -params.phi());
    let (fp, mp, gp) = (f * p, m * p, g * p);
    let norm = (fp.norm_sqr() + mp.norm_sqr() + gp.norm_sqr() + p * p).sqrt();
    let vector = Vector4c::new(fp * phase * phase, mp * phase, gp * phase, C64::new(p, 0.0)) * C64::new(p.signum() / norm, 0.0);

    Ok(EigenLevel {
        level,
        xi,
        coefficients: Some(LevelCoefficients { f, m, g, p: C64::new(p, 0.0), n }),
        vector,
        source: LevelSource::Analytic,
    })
}

/// Numerically diagonalized spectrum, with levels labelled by proximity to
/// the closed-form eigenvalues.
#[derive(Debug, Clone, Copy)]
pub struct NumericSpectrum {
    pub levels: [EigenLevel; 4],
    pub min_gap: f64,
}

pub fn numeric_spectrum(params: &ModelParams) -> Result<NumericSpectrum> {
    let h = build_hamiltonian(params);
    let eig = SymmetricEigen::new(*h.matrix());

    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let min_gap = order.windows(2).map(|w| eig.eigenvalues[w[1]] - eig.eigenvalues[w[0]]).fold(f64::INFINITY, f64::min);
    if min_gap <= EPS_GAP * params.scale() {
        return Err(Error::DegenerateSpectrum { min_gap });
    }

    let inv = spectral_invariants(params)?;
    let levels = Level::ALL.map(|level| {
        let target = inv.eigenvalue(level);
        let k = (0..4)
            .min_by(|&a, &b| (eig.eigenvalues[a] - target).abs().total_cmp(&(eig.eigenvalues[b] - target).abs()))
            .expect("four eigenvalues");
        EigenLevel {
            level,
            xi: eig.eigenvalues[k],
            coefficients: None,
            vector: fix_gauge(eig.eigenvectors.column(k).into_owned()),
            source: LevelSource::NumericFallback,
        }
    });
    Ok(NumericSpectrum { levels, min_gap })
}

/// Numerically diagonalized level `j`.
pub fn numeric_level(params: &ModelParams, level: Level) -> Result<EigenLevel> {
    Ok(numeric_spectrum(params)?.levels[level.index()])
}

/// Unit-normalize and rotate the phase so that the anchor component is real
/// and positive. The anchor is the fourth amplitude when it is not small,
/// otherwise the largest one.
pub fn fix_gauge(v: Vector4c) -> Vector4c {
    let v = v.normalize();
    let anchor = if v[3].norm() > FOURTH_COMPONENT_ANCHOR {
        3
    } else {
        (0..4).max_by(|&a, &b| v[a].norm().total_cmp(&v[b].norm())).expect("four components")
    };
    let z = v[anchor];
    let mut out = v * (z.conj() / z.norm());
    out[anchor] = C64::new(out[anchor].re, 0.0);
    out
}

/// Closed-form level where well-conditioned, numeric otherwise.
pub fn level(params: &ModelParams, level: Level) -> Result<EigenLevel> {
    match analytic_level(params, level) {
        Err(Error::DegenerateCoefficients { .. }) => numeric_level(params, level),
        other => other,
    }
}

/// All four levels with per-level fallback.
pub fn levels(params: &ModelParams) -> Result<[EigenLevel; 4]> {
    let mut numeric: Option<NumericSpectrum> = None;
    let mut out = Vec::with_capacity(4);
    for l in Level::ALL {
        match analytic_level(params, l) {
            Ok(e) => out.push(e),
            Err(Error::DegenerateCoefficients { .. }) => {
                if numeric.is_none() {
                    numeric = Some(numeric_spectrum(params)?);
                }
                out.push(numeric.as_ref().expect("just filled").levels[l.index()]);
            }
            Err(e) => return Err(e),
        }
    }
    Ok([out[0], out[1], out[2], out[3]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::HermitianOperator4;
    use std::f64::consts::FRAC_PI_4;

    fn p(j: f64, d: f64, b1: f64, b2: f64, theta: f64, phi: f64) -> ModelParams {
        ModelParams::new(j, d, b1, b2, theta, phi).unwrap()
    }

    fn reference() -> ModelParams {
        p(1.3, 0.7, 1.0, 3.0, FRAC_PI_4, 0.9)
    }

    fn residual(h: &HermitianOperator4, e: &EigenLevel) -> f64 {
        (h.apply(&e.vector) - e.vector * C64::new(e.xi, 0.0)).norm()
    }

    #[test]
    fn invariants_match_printed_radicands() {
        for q in [reference(), p(-2.0, 0.3, 4.5, -1.2, 2.8, 0.0), p(0.1, -4.0, -0.5, 0.7, 0.2, 1.0)] {
            let (b1, b2, ct) = (q.b1(), q.b2(), q.theta().cos());
            let dd = 4.0 * (q.j() * q.j() + q.d() * q.d());
            let xn = (-4.0 * ct * ct * dd * b2 * b2 - 8.0 * ct * dd * b1 * b2 + dd * dd + 4.0 * dd * b2 * b2
                + 16.0 * b1 * b1 * b2 * b2)
                .sqrt();
            let base = 2.0 * dd + 4.0 * b1 * b1 + 4.0 * b2 * b2;
            let inv = spectral_invariants(&q).unwrap();
            assert!((inv.xi_norm_sq - xn).abs() < 1e-12 * xn);
            assert!((inv.xi[0] - 0.5 * (base + 2.0 * xn).sqrt()).abs() < 1e-12 * inv.xi[0]);
            assert!((inv.xi[2] - 0.5 * (base - 2.0 * xn).sqrt()).abs() < 1e-10 * inv.xi[0]);
        }
    }

    #[test]
    fn decoupled_spectrum() {
        let inv = spectral_invariants(&p(0.0, 0.0, 1.0, 2.0, 0.7, 0.0)).unwrap();
        assert_eq!(inv.abs_d_sq, 0.0);
        assert!((inv.xi_norm_sq - 8.0).abs() < 1e-14);
        for (a, b) in inv.xi.iter().zip([3.0, -3.0, 1.0, -1.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn eigenvalues_come_in_opposite_pairs() {
        let inv = spectral_invariants(&reference()).unwrap();
        assert_eq!(inv.xi[1], -inv.xi[0]);
        assert_eq!(inv.xi[3], -inv.xi[2]);
        assert!(inv.xi[0] >= inv.xi[2] && inv.xi[2] >= 0.0);
    }

    #[test]
    fn closed_form_eigenvalues_match_numeric() {
        let q = reference();
        let inv = spectral_invariants(&q).unwrap();
        let num = numeric_spectrum(&q).unwrap();
        for l in Level::ALL {
            assert!((inv.eigenvalue(l) - num.levels[l.index()].xi).abs() < 1e-10 * q.scale());
        }
    }

    #[test]
    fn analytic_rejects_polar_field() {
        for l in Level::ALL {
            let err = analytic_level(&p(1.3, 0.7, 1.0, 3.0, 0.0, 0.2), l).unwrap_err();
            assert!(matches!(err, Error::DegenerateCoefficients { .. }), "{err:?}");
        }
    }

    #[test]
    fn analytic_rejects_zero_hopping() {
        let err = analytic_level(&p(0.0, 0.0, 1.0, 3.0, 1.0, 0.2), Level::new(1).unwrap()).unwrap_err();
        assert!(matches!(err, Error::DegenerateCoefficients { .. }));
    }

    #[test]
    fn collision_at_zero_is_degenerate_spectrum() {
        // J = D = 0, B1 = B2, θ = 0: levels ↑↓ and ↓↑ both sit at 0.
        let q = p(0.0, 0.0, 1.0, 1.0, 0.0, 0.0);
        assert!(matches!(analytic_level(&q, Level::new(3).unwrap()), Err(Error::DegenerateSpectrum { .. })));
        assert!(matches!(numeric_level(&q, Level::new(3).unwrap()), Err(Error::DegenerateSpectrum { .. })));
    }

    #[test]
    fn analytic_level_properties() {
        let q = reference();
        let h = build_hamiltonian(&q);
        for l in Level::ALL {
            let e = analytic_level(&q, l).unwrap();
            let c = e.coefficients.unwrap();
            assert!((e.vector.norm() - 1.0).abs() < 1e-12);
            assert!((e.vector[3].re - c.n).abs() < 1e-15 && e.vector[3].im == 0.0);
            assert!(residual(&h, &e) <= 1e-9 * (1.0 + h.norm()));
        }
    }

    #[test]
    fn analytic_and_numeric_vectors_agree_componentwise() {
        let q = reference();
        let l = Level::new(1).unwrap();
        let a = analytic_level(&q, l).unwrap();
        let n = numeric_level(&q, l).unwrap();
        assert!(n.vector[3].norm() > FOURTH_COMPONENT_ANCHOR);
        for k in 0..4 {
            assert!((a.vector[k] - n.vector[k]).norm() < 1e-8, "component {k}");
        }
        for l in Level::ALL {
            let a = analytic_level(&q, l).unwrap();
            let n = numeric_level(&q, l).unwrap();
            assert!((a.vector.dotc(&n.vector).norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn numeric_diagonal_case() {
        let e = numeric_level(&p(0.0, 0.0, 1.0, 2.0, 0.0, 0.0), Level::new(1).unwrap()).unwrap();
        assert!((e.xi - 3.0).abs() < 1e-14);
        assert!((e.vector - Vector4c::new(C64::new(1.0, 0.0), C64::default(), C64::default(), C64::default())).norm() < 1e-14);
    }

    #[test]
    fn fallback_is_used_only_when_needed() {
        let l = Level::new(2).unwrap();
        assert_eq!(level(&reference(), l).unwrap().source, LevelSource::Analytic);
        assert_eq!(level(&p(0.0, 0.0, 1.0, 2.0, 0.4, 0.0), l).unwrap().source, LevelSource::NumericFallback);
    }

    #[test]
    fn gauge_prefers_fourth_component() {
        let v = Vector4c::new(C64::new(0.0, 0.9), C64::default(), C64::default(), C64::new(0.0, -0.2));
        let g = fix_gauge(v);
        assert!(g[3].im == 0.0 && g[3].re > 0.0);
        let v = Vector4c::new(C64::new(0.0, 0.9), C64::default(), C64::default(), C64::new(0.0, -0.05));
        let g = fix_gauge(v);
        assert!(g[0].im == 0.0 && g[0].re > 0.0);
    }

    #[test]
    fn rotated_level_matches_recomputed() {
        let q = reference();
        for l in Level::ALL {
            let a = analytic_level(&q, l).unwrap();
            let direct = analytic_level(&q.with_phi(q.phi() + 0.37).unwrap(), l).unwrap();
            assert!((a.rotated(0.37).vector - direct.vector).norm() < 1e-14);
        }
    }
}

//! Effective material tensors of the foil winding.
//!
//! The layered conductor/insulation microstructure is replaced by diagonal
//! tensors in the local (α, β, γ) frame: arithmetic/harmonic mixing for the
//! reluctivity and conductivity, and an effective layer permittivity
//! ε_hom = ε_i / (1 − λ) that concentrates the insulation permittivity on the
//! full foil pitch.

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MaterialError {
    #[error("fill factor must lie strictly between 0 and 1, got {0}")]
    FillFactorRange(f64),
    #[error("conductor thickness {d_c} must be positive and smaller than foil thickness {d_f}")]
    InvalidFoilGeometry { d_c: f64, d_f: f64 },
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("insulation conductivity is assumed to vanish, got {0}")]
    ConductiveInsulation(f64),
}

/// Constituent properties of the foil: conductor (`_c`) and insulation (`_i`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoilMaterials {
    /// Conductor reluctivity, 1/(H/m).
    pub nu_c: f64,
    /// Insulation reluctivity, 1/(H/m).
    pub nu_i: f64,
    /// Conductor conductivity, S/m.
    pub sigma_c: f64,
    /// Insulation conductivity, S/m; the model assumes 0.
    pub sigma_i: f64,
    /// Conductor permittivity, F/m. Stored for documentation; the homogenized
    /// model only ever uses the insulation permittivity.
    pub eps_c: f64,
    /// Insulation permittivity, F/m.
    pub eps_i: f64,
    /// Fill factor d_c/d_f.
    pub fill_factor: f64,
}

impl FoilMaterials {
    pub fn new(
        nu_c: f64,
        nu_i: f64,
        sigma_c: f64,
        eps_c: f64,
        eps_i: f64,
        fill_factor: f64,
    ) -> Result<Self, MaterialError> {
        let m = FoilMaterials {
            nu_c,
            nu_i,
            sigma_c,
            sigma_i: 0.0,
            eps_c,
            eps_i,
            fill_factor,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), MaterialError> {
        if !(self.fill_factor > 0.0 && self.fill_factor < 1.0) {
            return Err(MaterialError::FillFactorRange(self.fill_factor));
        }
        for (name, value) in [
            ("nu_c", self.nu_c),
            ("nu_i", self.nu_i),
            ("sigma_c", self.sigma_c),
            ("eps_i", self.eps_i),
        ] {
            if !(value > 0.0) {
                return Err(MaterialError::NonPositive { name, value });
            }
        }
        if self.sigma_i != 0.0 {
            return Err(MaterialError::ConductiveInsulation(self.sigma_i));
        }
        Ok(())
    }
}

/// Homogenized diagonal tensors in the local frame: `_perp` acts across the
/// turns (α), `_par` along them (β, γ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogenizedTensors {
    pub nu_perp: f64,
    pub nu_par: f64,
    pub sigma_perp: f64,
    pub sigma_par: f64,
    pub eps_hom: f64,
}

/// Fill factor λ = d_c / d_f.
pub fn fill_factor(d_c: f64, d_f: f64) -> Result<f64, MaterialError> {
    if !(d_c > 0.0 && d_c < d_f) {
        return Err(MaterialError::InvalidFoilGeometry { d_c, d_f });
    }
    Ok(d_c / d_f)
}

/// Mixing rules for the winding block.
///
/// Perpendicular to the turns the reluctivity averages arithmetically and the
/// conductivity harmonically; parallel to the turns the roles swap. With
/// σ_i = 0 the harmonic mean degenerates, so σ_perp is set to zero exactly
/// instead of evaluating the division.
pub fn mix(materials: &FoilMaterials) -> HomogenizedTensors {
    let l = materials.fill_factor;
    let nu_perp = l * materials.nu_c + (1.0 - l) * materials.nu_i;
    let nu_par = 1.0 / (l / materials.nu_c + (1.0 - l) / materials.nu_i);
    let sigma_perp = if materials.sigma_i == 0.0 {
        0.0
    } else {
        1.0 / (l / materials.sigma_c + (1.0 - l) / materials.sigma_i)
    };
    let sigma_par = l * materials.sigma_c + (1.0 - l) * materials.sigma_i;
    let eps_hom = materials.eps_i / (1.0 - l);
    HomogenizedTensors {
        nu_perp,
        nu_par,
        sigma_perp,
        sigma_par,
        eps_hom,
    }
}

/// Skin depth δ = sqrt(2 / (ω μ_c σ_c)) at frequency `f`.
///
/// The homogenization assumes d_c ≪ δ; callers compare the returned depth
/// against the conductor thickness to emit assumption warnings.
pub fn skin_depth(f: f64, mu_c: f64, sigma_c: f64) -> Result<f64, MaterialError> {
    for (name, value) in [("f", f), ("mu_c", mu_c), ("sigma_c", sigma_c)] {
        if !(value > 0.0) {
            return Err(MaterialError::NonPositive { name, value });
        }
    }
    Ok((2.0 / (2.0 * PI * f * mu_c * sigma_c)).sqrt())
}

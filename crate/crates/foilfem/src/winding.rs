//! Foil winding geometry: local (α, β, γ) frame, winding function and the
//! composition of the spline basis with the inverse coordinate map.
//!
//! Only straight ("tube type") windings are supported: the winding mapping is
//! affine per symmetry mode, so extracting the local across-turns coordinate
//! α reduces to one axis-aligned coordinate shift. α runs from −D/2 to D/2
//! across the winding; β is the out-of-plane current direction (z in
//! Cartesian mode, φ in axisymmetric mode); γ spans the winding height.

use std::f64::consts::TAU;

use thiserror::Error;

use crate::bspline::BSplineBasis;
use crate::mesh::{Mesh, Rect, RegionTag, SymmetryMode};

/// Geometric tolerance for "inside the winding" point queries, meters.
pub const GEOM_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum WindingError {
    #[error("turn count must exceed 1, got {0}")]
    TurnCount(usize),
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("fill factor must lie strictly between 0 and 1, got {0}")]
    FillFactor(f64),
    #[error("point ({0}, {1}) outside the winding rectangle")]
    OutsideWinding(f64, f64),
    #[error("winding rectangle extends to non-positive radius r = {0}")]
    NonPositiveRadius(f64),
    #[error("winding-tagged triangle {0} extends outside the winding rectangle")]
    StrayTriangle(usize),
    #[error("winding rectangle is {got_w} × {got_h} m but thickness × height is {want_w} × {want_h} m")]
    RectMismatch {
        got_w: f64,
        got_h: f64,
        want_w: f64,
        want_h: f64,
    },
}

/// Mesh axis carrying the across-turns coordinate α.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaAxis {
    /// First mesh coordinate: x in Cartesian mode, r in axisymmetric mode.
    Horizontal,
}

/// Local coordinate frame of the winding: α across the turns, β out of
/// plane, γ along the winding height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame {
    pub alpha_axis: AlphaAxis,
    /// Mesh coordinate of α = 0 (the winding center plane).
    pub alpha_center: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
}

/// Foil winding description: turn count, bulk dimensions, fill factor and
/// placement in mesh coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoilWindingSpec {
    turns: usize,
    thickness: f64,
    height: f64,
    fill_factor: f64,
    rect: Rect,
}

impl FoilWindingSpec {
    /// `rect` is the winding rectangle in mesh coordinates; its horizontal
    /// extent must equal `thickness` (D) and its vertical extent `height`.
    pub fn new(
        turns: usize,
        thickness: f64,
        height: f64,
        fill_factor: f64,
        rect: Rect,
    ) -> Result<Self, WindingError> {
        if turns < 2 {
            return Err(WindingError::TurnCount(turns));
        }
        for (name, value) in [("thickness", thickness), ("height", height)] {
            if !(value > 0.0) {
                return Err(WindingError::NonPositive { name, value });
            }
        }
        if !(fill_factor > 0.0 && fill_factor < 1.0) {
            return Err(WindingError::FillFactor(fill_factor));
        }
        let spec = FoilWindingSpec {
            turns,
            thickness,
            height,
            fill_factor,
            rect,
        };
        if (rect.width() - thickness).abs() > GEOM_TOL || (rect.height() - height).abs() > GEOM_TOL
        {
            return Err(WindingError::RectMismatch {
                got_w: rect.width(),
                got_h: rect.height(),
                want_w: thickness,
                want_h: height,
            });
        }
        Ok(spec)
    }

    pub fn turns(&self) -> usize {
        self.turns
    }

    /// Winding thickness D = N·d_f.
    pub fn thickness(&self) -> f64 {
        self.thickness
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn fill_factor(&self) -> f64 {
        self.fill_factor
    }

    pub fn rect(&self) -> Rect {
        self.rect
    }

    /// Foil pitch d_f = D/N.
    pub fn d_f(&self) -> f64 {
        self.thickness / self.turns as f64
    }

    /// Conductor thickness d_c = λ·d_f.
    pub fn d_c(&self) -> f64 {
        self.fill_factor * self.d_f()
    }

    /// Insulation thickness d_i = (1 − λ)·d_f.
    pub fn d_i(&self) -> f64 {
        (1.0 - self.fill_factor) * self.d_f()
    }

    pub fn local_frame(&self) -> LocalFrame {
        LocalFrame {
            alpha_axis: AlphaAxis::Horizontal,
            alpha_center: 0.5 * (self.rect.min[0] + self.rect.max[0]),
            alpha_min: -0.5 * self.thickness,
            alpha_max: 0.5 * self.thickness,
        }
    }

    /// Warnings for modeling assumptions that the given geometry strains.
    pub fn assumption_warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.d_f() > self.height / 10.0 {
            w.push(format!(
                "foil pitch d_f = {:.3e} m is not small against the winding height {:.3e} m; \
                 the thin-foil assumption d_f << h is strained",
                self.d_f(),
                self.height
            ));
        }
        w
    }

    pub fn contains(&self, point: [f64; 2]) -> bool {
        self.rect.contains(point, GEOM_TOL)
    }

    /// α component of the inverse winding mapping: the across-turns
    /// coordinate of a mesh point, in [−D/2, D/2].
    pub fn local_alpha(&self, point: [f64; 2]) -> Result<f64, WindingError> {
        if !self.contains(point) {
            return Err(WindingError::OutsideWinding(point[0], point[1]));
        }
        let frame = self.local_frame();
        let alpha = point[0] - frame.alpha_center;
        Ok(alpha.clamp(frame.alpha_min, frame.alpha_max))
    }

    /// Mesh coordinate (x or r) of a given α.
    pub fn alpha_to_coord(&self, alpha: f64) -> f64 {
        self.local_frame().alpha_center + alpha
    }

    /// Check that every winding-tagged triangle lies inside the declared
    /// rectangle (tolerance 1e-12 m) and, in axisymmetric mode, at positive
    /// radius.
    pub fn check_mesh(&self, mesh: &Mesh, symmetry: &SymmetryMode) -> Result<(), WindingError> {
        if matches!(symmetry, SymmetryMode::Axisymmetric) && self.rect.min[0] <= 0.0 {
            return Err(WindingError::NonPositiveRadius(self.rect.min[0]));
        }
        for t in mesh.triangles_in_region(RegionTag::FoilWinding) {
            for p in mesh.triangle_nodes(t) {
                if !self.rect.contains(p, GEOM_TOL) {
                    return Err(WindingError::StrayTriangle(t));
                }
            }
        }
        Ok(())
    }
}

/// Out-of-plane (β) component of the winding function χ at a point:
/// 1/ℓ_z inside the winding in Cartesian mode, 1/(2πr) in axisymmetric mode,
/// zero outside. The line integral of χ along one current path is 1.
pub fn winding_function(
    spec: &FoilWindingSpec,
    symmetry: &SymmetryMode,
    point: [f64; 2],
) -> Result<f64, WindingError> {
    if !spec.contains(point) {
        return Ok(0.0);
    }
    match symmetry {
        SymmetryMode::Cartesian2D { length } => Ok(1.0 / length),
        SymmetryMode::Axisymmetric => {
            if point[0] <= 0.0 {
                return Err(WindingError::NonPositiveRadius(point[0]));
            }
            Ok(1.0 / (TAU * point[0]))
        }
    }
}

/// Voltage-function basis field ξ_j at a mesh point: the spline composed with
/// the inverse winding mapping inside the winding, zero outside.
pub fn voltage_basis_field(
    spec: &FoilWindingSpec,
    basis: &BSplineBasis,
    j: usize,
    point: [f64; 2],
) -> f64 {
    if !spec.contains(point) {
        return 0.0;
    }
    let alpha = spec
        .local_alpha(point)
        .expect("contains() checked")
        .clamp(basis.alpha_min(), basis.alpha_max());
    basis.eval(j, alpha).expect("alpha clamped into interval")
}

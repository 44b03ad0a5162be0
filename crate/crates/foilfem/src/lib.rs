//! Frequency-domain finite-element simulation of foil windings.
//!
//! The crate models a foil winding as a homogenized anisotropic block coupled
//! to the surrounding magnetoquasistatic field through a continuous per-turn
//! voltage function discretized with quadratic B-splines. Two winding models
//! are available: the standard (resistive-inductive) one and a capacitive
//! extension that adds displacement currents across the insulation layers and
//! thereby reproduces the self-resonances of the winding.
//!
//! The building blocks, bottom up:
//!
//! - [`mesh`]: structured triangular mesh generation for rectangle layouts,
//!   MSH 2.2 import/export, region and boundary tagging;
//! - [`homogenization`]: mixing rules for the effective reluctivity,
//!   conductivity and permittivity of the layered winding;
//! - [`bspline`]: quadratic B-spline basis on a uniform open knot vector;
//! - [`winding`]: winding geometry, local (α, β, γ) frame and winding function;
//! - [`assembly`]: all sparse matrices and vectors of the coupled block system;
//! - [`solver`]: direct complex solves, single frequency or sweep, under
//!   current or voltage drive;
//! - [`postprocess`]: voltage/current profiles, impedance, flux contours, CSV;
//! - [`oracle`]: independent reference models (analytic resistance and
//!   capacitance, magnetostatic inductance extraction, resolved RLC ladder);
//! - [`presets`]: ready-made example models (Cartesian winding in a box,
//!   axisymmetric pot inductor, resolved-turn desk model).

pub mod assembly;
pub mod bspline;
pub mod homogenization;
pub mod mesh;
pub mod oracle;
pub mod postprocess;
pub mod presets;
pub mod quadrature;
pub mod solver;
pub mod sparse;
pub mod winding;

/// Vacuum permeability, H/m (2019 SI).
pub const MU_0: f64 = 1.256_637_062_12e-6;

/// Vacuum permittivity, F/m (2019 SI).
pub const EPS_0: f64 = 8.854_187_812_8e-12;

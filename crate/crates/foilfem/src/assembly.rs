//! Assembly of the coupled field/winding block system.
//!
//! Field unknowns are first-order nodal coefficients of A_z (Cartesian mode)
//! or of the stream function ψ = r·A_φ (axisymmetric mode). Voltage-function
//! unknowns are the B-spline coefficients. The assembled blocks, with
//! n_a field and n_u spline unknowns:
//!
//! - stiffness (n_a×n_a): curl-curl reduction with the anisotropic winding
//!   reluctivity rotated into the scalar weak form;
//! - mass (n_a×n_a): conductivity-weighted, supported on the winding only;
//! - coupling (n_a×n_u): conductivity-weighted product of spline and nodal
//!   shape functions with the winding-function factors of both reductions;
//! - conductance, cap_grad, cap_mass (n_u×n_u) and turn_weights (n_u): the
//!   winding-only blocks, assembled as 1D integrals along α with closed-form
//!   slice measures (the winding cross-section is a rectangle resolved by
//!   the mesh);
//! - source (n_a): load vector of an impressed out-of-plane current density.
//!
//! The α-direction quadrature is segmented at every spline breakpoint and
//! every mesh line crossing the winding, with a 4-point Gauss rule per
//! segment and direction. On meshes that resolve the winding faces this makes
//! the spline-by-shape-function integrals exact in Cartesian mode and lets
//! postprocessing reproduce the assembled winding equation to machine
//! precision in both modes.

use std::f64::consts::TAU;

use thiserror::Error;

use crate::bspline::BSplineBasis;
use crate::homogenization::HomogenizedTensors;
use crate::mesh::{Mesh, MeshError, RegionTag, SymmetryMode};
use crate::quadrature::{map_gauss, triangle_points, QuadratureLevel};
use crate::sparse::CsrMatrix;
use crate::winding::{FoilWindingSpec, WindingError, GEOM_TOL};

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("no material assigned to region {0:?}")]
    MissingMaterial(RegionTag),
    #[error(
        "spline interval [{basis_min}, {basis_max}] does not match the winding α-extent [{alpha_min}, {alpha_max}]"
    )]
    BasisMismatch {
        basis_min: f64,
        basis_max: f64,
        alpha_min: f64,
        alpha_max: f64,
    },
    #[error("homogenized permittivity must be non-negative, got {0}")]
    InvalidPermittivity(f64),
    #[error(transparent)]
    Winding(#[from] WindingError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Isotropic non-conducting bulk material (air, yoke).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsoMaterial {
    /// Reluctivity, 1/(H/m).
    pub nu: f64,
}

/// Region → material map. The winding region carries the homogenized tensors;
/// all other regions are isotropic and non-conducting.
#[derive(Debug, Clone, Copy, Default)]
pub struct MaterialSet {
    pub air: Option<IsoMaterial>,
    pub yoke: Option<IsoMaterial>,
    pub winding: Option<HomogenizedTensors>,
}

impl MaterialSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_air(mut self, nu: f64) -> Self {
        self.air = Some(IsoMaterial { nu });
        self
    }

    pub fn with_yoke(mut self, nu: f64) -> Self {
        self.yoke = Some(IsoMaterial { nu });
        self
    }

    pub fn with_winding(mut self, tensors: HomogenizedTensors) -> Self {
        self.winding = Some(tensors);
        self
    }

    fn winding_tensors(&self) -> Result<&HomogenizedTensors, AssemblyError> {
        self.winding
            .as_ref()
            .ok_or(AssemblyError::MissingMaterial(RegionTag::FoilWinding))
    }

    /// (ν on the α-gradient, ν on the γ-gradient, σ along β) of a region.
    ///
    /// Rotating the diagonal winding tensor diag(ν_perp, ν_par, ν_par) on
    /// (α, β, γ) into the scalar weak form swaps the in-plane entries: the
    /// flux component B_γ = −∂A/∂α carries ν_par and B_α = ∂A/∂γ carries
    /// ν_perp.
    fn coefficients(&self, region: RegionTag) -> Result<(f64, f64, f64), AssemblyError> {
        match region {
            RegionTag::Air => self
                .air
                .map(|m| (m.nu, m.nu, 0.0))
                .ok_or(AssemblyError::MissingMaterial(RegionTag::Air)),
            RegionTag::Yoke => self
                .yoke
                .map(|m| (m.nu, m.nu, 0.0))
                .ok_or(AssemblyError::MissingMaterial(RegionTag::Yoke)),
            RegionTag::FoilWinding => {
                let t = self.winding_tensors()?;
                Ok((t.nu_par, t.nu_perp, t.sigma_par))
            }
        }
    }
}

/// The assembled block system plus constraint and symmetry metadata.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    pub coupling: CsrMatrix,
    pub conductance: CsrMatrix,
    pub cap_grad: CsrMatrix,
    pub cap_mass: CsrMatrix,
    pub turn_weights: Vec<f64>,
    pub source: Vec<f64>,
    /// Sorted node indices with homogeneous Dirichlet constraints.
    pub dirichlet: Vec<usize>,
    pub symmetry: SymmetryMode,
}

impl AssembledSystem {
    pub fn n_field(&self) -> usize {
        self.stiffness.nrows()
    }

    pub fn n_voltage(&self) -> usize {
        self.conductance.nrows()
    }
}

/// Shape-function gradients (constant per triangle) and the triangle area.
pub(crate) fn shape_gradients(p: [[f64; 2]; 3]) -> ([[f64; 2]; 3], f64) {
    let two_a =
        (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    let g = [
        [(p[1][1] - p[2][1]) / two_a, (p[2][0] - p[1][0]) / two_a],
        [(p[2][1] - p[0][1]) / two_a, (p[0][0] - p[2][0]) / two_a],
        [(p[0][1] - p[1][1]) / two_a, (p[1][0] - p[0][0]) / two_a],
    ];
    (g, 0.5 * two_a)
}

/// Barycentric coordinates of `q` in the triangle `p`.
pub(crate) fn barycentric(p: [[f64; 2]; 3], q: [f64; 2]) -> [f64; 3] {
    let two_a =
        (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    let l0 = ((p[1][0] - q[0]) * (p[2][1] - q[1]) - (p[2][0] - q[0]) * (p[1][1] - q[1])) / two_a;
    let l1 = ((p[2][0] - q[0]) * (p[0][1] - q[1]) - (p[0][0] - q[0]) * (p[2][1] - q[1])) / two_a;
    [l0, l1, 1.0 - l0 - l1]
}

/// Stiffness and mass blocks of the field equation.
pub fn assemble_field(
    mesh: &Mesh,
    materials: &MaterialSet,
    symmetry: &SymmetryMode,
    level: QuadratureLevel,
) -> Result<(CsrMatrix, CsrMatrix), AssemblyError> {
    symmetry.validate()?;
    let n = mesh.node_count();
    let mut k_trip: Vec<(usize, usize, f64)> = Vec::new();
    let mut m_trip: Vec<(usize, usize, f64)> = Vec::new();
    let tri_rule = triangle_points(level.tri_subdivision());

    for t in 0..mesh.triangle_count() {
        let pts = mesh.triangle_nodes(t);
        let ids = mesh.triangles()[t];
        let (grads, area) = shape_gradients(pts);
        let (nu_ag, nu_gg, sigma) = materials.coefficients(mesh.regions()[t])?;

        match symmetry {
            SymmetryMode::Cartesian2D { length } => {
                // exact closed forms: constant gradients, affine shape functions
                for i in 0..3 {
                    for j in 0..3 {
                        let k_ij = length
                            * area
                            * (nu_ag * grads[i][0] * grads[j][0]
                                + nu_gg * grads[i][1] * grads[j][1]);
                        k_trip.push((ids[i], ids[j], k_ij));
                        if sigma > 0.0 {
                            let m_ij =
                                sigma * length * area / 12.0 * if i == j { 2.0 } else { 1.0 };
                            m_trip.push((ids[i], ids[j], m_ij));
                        }
                    }
                }
            }
            SymmetryMode::Axisymmetric => {
                // 1/r weights integrated with strictly interior points
                let mut inv_r = 0.0;
                let mut mass_q = [[0.0f64; 3]; 3];
                for &(bary, w) in &tri_rule {
                    let r = bary[0] * pts[0][0] + bary[1] * pts[1][0] + bary[2] * pts[2][0];
                    inv_r += w / r;
                    if sigma > 0.0 {
                        for i in 0..3 {
                            for j in 0..3 {
                                mass_q[i][j] += w * bary[i] * bary[j] / r;
                            }
                        }
                    }
                }
                for i in 0..3 {
                    for j in 0..3 {
                        let k_ij = TAU
                            * area
                            * inv_r
                            * (nu_ag * grads[i][0] * grads[j][0]
                                + nu_gg * grads[i][1] * grads[j][1]);
                        k_trip.push((ids[i], ids[j], k_ij));
                        if sigma > 0.0 {
                            m_trip.push((ids[i], ids[j], TAU * sigma * area * mass_q[i][j]));
                        }
                    }
                }
            }
        }
    }

    Ok((
        CsrMatrix::from_triplets(n, n, &k_trip),
        CsrMatrix::from_triplets(n, n, &m_trip),
    ))
}

/// α positions (relative to the winding center) where the integrands along
/// the across-turns direction change character: spline breakpoints plus every
/// distinct mesh line crossing the winding.
pub fn alpha_breakpoints(mesh: &Mesh, spec: &FoilWindingSpec, basis: &BSplineBasis) -> Vec<f64> {
    let frame = spec.local_frame();
    let mut breaks = basis.breakpoints();
    for t in mesh.triangles_in_region(RegionTag::FoilWinding) {
        for p in mesh.triangle_nodes(t) {
            let a = (p[0] - frame.alpha_center).clamp(frame.alpha_min, frame.alpha_max);
            breaks.push(a);
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let tol = GEOM_TOL.max(1e-14 * spec.thickness());
    breaks.dedup_by(|a, b| (*a - *b).abs() <= tol);
    breaks
}

fn check_basis(spec: &FoilWindingSpec, basis: &BSplineBasis) -> Result<(), AssemblyError> {
    let frame = spec.local_frame();
    let tol = 1e-12 * spec.thickness().max(1.0);
    if (basis.alpha_min() - frame.alpha_min).abs() > tol
        || (basis.alpha_max() - frame.alpha_max).abs() > tol
    {
        return Err(AssemblyError::BasisMismatch {
            basis_min: basis.alpha_min(),
            basis_max: basis.alpha_max(),
            alpha_min: frame.alpha_min,
            alpha_max: frame.alpha_max,
        });
    }
    Ok(())
}

/// Intersection of the vertical line x = `x` with a triangle that properly
/// straddles it: the (γ_lo, γ_hi) interval.
pub(crate) fn vertical_cut(pts: [[f64; 2]; 3], x: f64) -> Option<(f64, f64)> {
    let mut ys: Vec<f64> = Vec::with_capacity(2);
    for k in 0..3 {
        let p = pts[k];
        let q = pts[(k + 1) % 3];
        if (p[0] - x) * (q[0] - x) < 0.0 {
            let t = (x - p[0]) / (q[0] - p[0]);
            ys.push(p[1] + t * (q[1] - p[1]));
        }
    }
    if ys.len() != 2 {
        return None;
    }
    let (lo, hi) = (ys[0].min(ys[1]), ys[0].max(ys[1]));
    (hi > lo).then_some((lo, hi))
}

/// Field-to-voltage coupling block.
pub fn assemble_coupling(
    mesh: &Mesh,
    spec: &FoilWindingSpec,
    basis: &BSplineBasis,
    tensors: &HomogenizedTensors,
    symmetry: &SymmetryMode,
    level: QuadratureLevel,
) -> Result<CsrMatrix, AssemblyError> {
    symmetry.validate()?;
    check_basis(spec, basis)?;
    spec.check_mesh(mesh, symmetry)?;
    let frame = spec.local_frame();
    let breaks = alpha_breakpoints(mesh, spec, basis);
    let gauss = level.gauss_1d();
    let sigma = tensors.sigma_par;
    let n = mesh.node_count();
    let n_u = basis.len();
    let mut trip: Vec<(usize, usize, f64)> = Vec::new();

    if sigma != 0.0 {
        for t in mesh.triangles_in_region(RegionTag::FoilWinding) {
            let pts = mesh.triangle_nodes(t);
            let ids = mesh.triangles()[t];
            let a_lo = pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min) - frame.alpha_center;
            let a_hi =
                pts.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max) - frame.alpha_center;

            for seg in breaks.windows(2) {
                let s0 = seg[0].max(a_lo);
                let s1 = seg[1].min(a_hi);
                if s1 - s0 <= 0.0 {
                    continue;
                }
                for &gp in gauss {
                    let (alpha_q, w_a) = map_gauss(gp, s0, s1);
                    let x_q = frame.alpha_center + alpha_q;
                    let Some((y_lo, y_hi)) = vertical_cut(pts, x_q) else {
                        continue;
                    };
                    let (first, xi, _) = basis.nonzero_at(alpha_q);
                    for &gq in gauss {
                        let (y_q, w_g) = map_gauss(gq, y_lo, y_hi);
                        let bary = barycentric(pts, [x_q, y_q]);
                        let weight = match symmetry {
                            SymmetryMode::Cartesian2D { .. } => sigma * w_a * w_g,
                            SymmetryMode::Axisymmetric => sigma * w_a * w_g / x_q,
                        };
                        for i in 0..3 {
                            for (dj, &xi_j) in xi.iter().enumerate() {
                                let j = first + dj;
                                if j < n_u {
                                    trip.push((ids[i], j, weight * bary[i] * xi_j));
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    Ok(CsrMatrix::from_triplets(n, n_u, &trip))
}

/// Winding-only blocks: conductance G, capacitive blocks C′ (gradient form,
/// non-symmetric, assembled exactly as written) and C″ (mass form), and the
/// per-turn weight vector P with Σ P_i = N.
pub fn assemble_winding(
    mesh: &Mesh,
    spec: &FoilWindingSpec,
    basis: &BSplineBasis,
    tensors: &HomogenizedTensors,
    symmetry: &SymmetryMode,
    level: QuadratureLevel,
) -> Result<(CsrMatrix, CsrMatrix, CsrMatrix, Vec<f64>), AssemblyError> {
    symmetry.validate()?;
    check_basis(spec, basis)?;
    let eps = tensors.eps_hom;
    if eps < 0.0 {
        return Err(AssemblyError::InvalidPermittivity(eps));
    }
    let sigma = tensors.sigma_par;
    let d_f = spec.d_f();
    let h = spec.height();
    let frame = spec.local_frame();
    let breaks = alpha_breakpoints(mesh, spec, basis);
    let gauss = level.gauss_1d();
    let n_u = basis.len();

    let mut g_trip: Vec<(usize, usize, f64)> = Vec::new();
    let mut cg_trip: Vec<(usize, usize, f64)> = Vec::new();
    let mut cm_trip: Vec<(usize, usize, f64)> = Vec::new();
    let mut p = vec![0.0; n_u];

    for seg in breaks.windows(2) {
        if seg[1] - seg[0] <= 0.0 {
            continue;
        }
        for &gp in gauss {
            let (alpha_q, w) = map_gauss(gp, seg[0], seg[1]);
            let (first, xi, dxi) = basis.nonzero_at(alpha_q);
            // slice measures of the two reductions
            let (g_w, c_w) = match symmetry {
                SymmetryMode::Cartesian2D { length } => (
                    // G: (1/ℓ_z)·σ ∫ ξξ dA = σ h/ℓ_z per unit α
                    sigma * h / length,
                    // C blocks: ℓ_z·ε·h per unit α
                    eps * length * h,
                ),
                SymmetryMode::Axisymmetric => {
                    let r = frame.alpha_center + alpha_q;
                    (sigma * h / (TAU * r), eps * TAU * r * h)
                }
            };
            for di in 0..3 {
                let i = first + di;
                if i >= n_u {
                    continue;
                }
                p[i] += w * xi[di] / d_f;
                for dj in 0..3 {
                    let j = first + dj;
                    if j >= n_u {
                        continue;
                    }
                    g_trip.push((i, j, w * g_w * xi[dj] * xi[di]));
                    if eps != 0.0 {
                        cg_trip.push((i, j, w * c_w / (2.0 * d_f) * dxi[dj] * xi[di]));
                        cm_trip.push((i, j, w * c_w / (d_f * d_f) * xi[dj] * xi[di]));
                    }
                }
            }
        }
    }

    Ok((
        CsrMatrix::from_triplets(n_u, n_u, &g_trip),
        CsrMatrix::from_triplets(n_u, n_u, &cg_trip),
        CsrMatrix::from_triplets(n_u, n_u, &cm_trip),
        p,
    ))
}

/// Load vector of an impressed out-of-plane current density, given per
/// triangle (A/m²). Region-wise sources map to per-triangle values upstream.
pub fn assemble_source(
    mesh: &Mesh,
    current_density: &[f64],
    symmetry: &SymmetryMode,
) -> Result<Vec<f64>, AssemblyError> {
    symmetry.validate()?;
    assert_eq!(current_density.len(), mesh.triangle_count());
    let mut j_s = vec![0.0; mesh.node_count()];
    for t in 0..mesh.triangle_count() {
        let js = current_density[t];
        if js == 0.0 {
            continue;
        }
        let area = mesh.signed_area(t);
        let w = match symmetry {
            // ∫ J_s N_i ℓ_z dA with ∫ N_i dA = A/3
            SymmetryMode::Cartesian2D { length } => js * length * area / 3.0,
            // ∫ J_s (N_i/r) 2πr dr dz = 2π J_s ∫ N_i dr dz
            SymmetryMode::Axisymmetric => js * TAU * area / 3.0,
        };
        for &node in &mesh.triangles()[t] {
            j_s[node] += w;
        }
    }
    Ok(j_s)
}

/// Assemble the full system with homogeneous Dirichlet constraints on every
/// tagged boundary node and a zero impressed source.
pub fn assemble_system(
    mesh: &Mesh,
    spec: &FoilWindingSpec,
    basis: &BSplineBasis,
    materials: &MaterialSet,
    symmetry: &SymmetryMode,
    level: QuadratureLevel,
) -> Result<AssembledSystem, AssemblyError> {
    let tensors = *materials.winding_tensors()?;
    let (stiffness, mass) = assemble_field(mesh, materials, symmetry, level)?;
    let coupling = assemble_coupling(mesh, spec, basis, &tensors, symmetry, level)?;
    let (conductance, cap_grad, cap_mass, turn_weights) =
        assemble_winding(mesh, spec, basis, &tensors, symmetry, level)?;
    let source = vec![0.0; mesh.node_count()];
    Ok(AssembledSystem {
        stiffness,
        mass,
        coupling,
        conductance,
        cap_grad,
        cap_mass,
        turn_weights,
        source,
        dirichlet: mesh.boundary_nodes(),
        symmetry: *symmetry,
    })
}

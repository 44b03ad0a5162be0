//! Ready-made example models: the Cartesian foil winding in a flux-wall box
//! and the axisymmetric pot inductor, plus the small resolved-turn desk model
//! used for oracle cross-validation. The presets build everything a solve
//! needs (mesh, winding spec, spline basis, homogenized materials, assembled
//! system) from a handful of physical parameters.

use thiserror::Error;

use crate::assembly::{assemble_system, AssembledSystem, AssemblyError, MaterialSet};
use crate::bspline::{BSplineBasis, SplineError};
use crate::homogenization::{mix, FoilMaterials, HomogenizedTensors, MaterialError};
use crate::mesh::{
    generate_rect_layout, generate_rect_layout_graded, LayoutRect, Mesh, MeshError, Rect,
    RegionTag, SymmetryMode,
};
use crate::oracle::ResolvedTurnParams;
use crate::postprocess::PostContext;
use crate::quadrature::QuadratureLevel;
use crate::winding::{FoilWindingSpec, WindingError};
use crate::{EPS_0, MU_0};

#[derive(Debug, Error)]
pub enum BuildError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Winding(#[from] WindingError),
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Spline(#[from] SplineError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
}

/// A fully assembled foil winding model.
pub struct FoilWindingModel {
    pub mesh: Mesh,
    pub symmetry: SymmetryMode,
    pub winding: FoilWindingSpec,
    pub basis: BSplineBasis,
    pub materials: FoilMaterials,
    pub tensors: HomogenizedTensors,
    pub system: AssembledSystem,
}

impl FoilWindingModel {
    /// Build from a prepared mesh and winding description.
    pub fn build(
        mesh: Mesh,
        symmetry: SymmetryMode,
        winding: FoilWindingSpec,
        materials: FoilMaterials,
        mu_yoke_rel: f64,
        n_splines: usize,
    ) -> Result<Self, BuildError> {
        materials.validate()?;
        let tensors = mix(&materials);
        let frame = winding.local_frame();
        let basis = BSplineBasis::new(n_splines, frame.alpha_min, frame.alpha_max)?;
        let material_set = MaterialSet::new()
            .with_air(1.0 / MU_0)
            .with_yoke(1.0 / (mu_yoke_rel * MU_0))
            .with_winding(tensors);
        let system = assemble_system(
            &mesh,
            &winding,
            &basis,
            &material_set,
            &symmetry,
            QuadratureLevel::Standard,
        )?;
        Ok(FoilWindingModel {
            mesh,
            symmetry,
            winding,
            basis,
            materials,
            tensors,
            system,
        })
    }

    pub fn post_context(&self) -> PostContext<'_> {
        PostContext {
            mesh: &self.mesh,
            spec: &self.winding,
            basis: &self.basis,
            tensors: &self.tensors,
            symmetry: &self.symmetry,
        }
    }
}

/// Cartesian 2D foil winding centered in a flux-wall box.
#[derive(Debug, Clone, Copy)]
pub struct CartesianExampleParams {
    /// Air margin between winding and box boundary, m.
    pub margin: f64,
    /// Winding thickness D, m.
    pub thickness: f64,
    /// Winding height h, m.
    pub height: f64,
    /// Out-of-plane model length ℓ_z, m.
    pub length: f64,
    pub turns: usize,
    pub fill_factor: f64,
    /// Conductor conductivity, S/m.
    pub sigma_c: f64,
    /// Insulation relative permittivity.
    pub eps_i_rel: f64,
    /// Conductor relative permittivity.
    pub eps_c_rel: f64,
    pub n_splines: usize,
    /// Target mesh edge length, m.
    pub target_h: f64,
}

impl Default for CartesianExampleParams {
    /// Foil winding in a box: D = 1 cm, h = 2 cm, ℓ_z = 30 cm, N = 500,
    /// λ = 95 %, σ_c = 60 MS/m, ε_i = 10 ε₀, 10 splines; the mesh target
    /// gives roughly 20 k elements.
    fn default() -> Self {
        CartesianExampleParams {
            margin: 0.01,
            thickness: 0.01,
            height: 0.02,
            length: 0.3,
            turns: 500,
            fill_factor: 0.95,
            sigma_c: 60e6,
            eps_i_rel: 10.0,
            eps_c_rel: 1.0,
            n_splines: 10,
            target_h: 3.5e-4,
        }
    }
}

impl CartesianExampleParams {
    /// Small resolved-scale variant (10 turns, high-ε insulation) used for
    /// cross-validation against the resolved-turn ladder network. The large
    /// ε_i places the first resonance far below the in-foil skin-effect
    /// corner, where the constant-parameter ladder is a valid reference.
    pub fn desk_n10() -> Self {
        CartesianExampleParams {
            margin: 0.02,
            thickness: 1e-3,
            height: 0.02,
            length: 0.3,
            turns: 10,
            fill_factor: 0.95,
            sigma_c: 60e6,
            eps_i_rel: 1000.0,
            eps_c_rel: 1.0,
            n_splines: 7,
            target_h: 5.0e-4,
        }
    }

    /// Matching resolved-turn geometry for the oracle.
    pub fn resolved(&self) -> ResolvedTurnParams {
        ResolvedTurnParams {
            turns: self.turns,
            thickness: self.thickness,
            height: self.height,
            fill_factor: self.fill_factor,
            margin: self.margin,
            center: [0.0, 0.0],
            target_h: self.target_h,
        }
    }
}

/// Build the Cartesian box example.
pub fn cartesian_example(p: &CartesianExampleParams) -> Result<FoilWindingModel, BuildError> {
    let d = p.thickness;
    let h = p.height;
    let m = p.margin;
    let layout = vec![
        LayoutRect::new([-d / 2.0, -h / 2.0], [d / 2.0, h / 2.0], RegionTag::FoilWinding),
        LayoutRect::new([-d / 2.0 - m, -h / 2.0 - m], [-d / 2.0, h / 2.0 + m], RegionTag::Air),
        LayoutRect::new([d / 2.0, -h / 2.0 - m], [d / 2.0 + m, h / 2.0 + m], RegionTag::Air),
        LayoutRect::new([-d / 2.0, -h / 2.0 - m], [d / 2.0, -h / 2.0], RegionTag::Air),
        LayoutRect::new([-d / 2.0, h / 2.0], [d / 2.0, h / 2.0 + m], RegionTag::Air),
    ];
    let mesh = generate_rect_layout(&layout, p.target_h)?;
    let winding = FoilWindingSpec::new(
        p.turns,
        d,
        h,
        p.fill_factor,
        Rect::new([-d / 2.0, -h / 2.0], [d / 2.0, h / 2.0]),
    )?;
    let materials = FoilMaterials::new(
        1.0 / MU_0,
        1.0 / MU_0,
        p.sigma_c,
        p.eps_c_rel * EPS_0,
        p.eps_i_rel * EPS_0,
        p.fill_factor,
    )?;
    FoilWindingModel::build(
        mesh,
        SymmetryMode::Cartesian2D { length: p.length },
        winding,
        materials,
        1.0,
        p.n_splines,
    )
}

/// Axisymmetric pot inductor: cylindrical yoke with center limb (air gap in
/// the middle), winding window and outer shell, the foil winding centered in
/// the window. The outer core dimensions and the uniform wall thickness
/// define the window: r ∈ [d_y, R − d_y], |z| ≤ H/2 − d_y.
#[derive(Debug, Clone, Copy)]
pub struct PotInductorParams {
    /// Outer core radius R, m.
    pub core_radius: f64,
    /// Outer core height H, m.
    pub core_height: f64,
    /// Yoke wall thickness (center limb radius, shell and plate thickness), m.
    pub yoke_thickness: f64,
    /// Air gap height in the center limb, m.
    pub air_gap: f64,
    /// Corner rounding radius of the window corners, m (chamfer-approximated).
    pub corner_radius: f64,
    /// Winding thickness D, m.
    pub winding_thickness: f64,
    /// Winding height h, m.
    pub winding_height: f64,
    /// Radial offset of the winding center from the window center, m.
    pub radial_offset: f64,
    /// Air margin around the core, m.
    pub margin: f64,
    pub turns: usize,
    pub fill_factor: f64,
    pub sigma_c: f64,
    pub eps_i_rel: f64,
    pub eps_c_rel: f64,
    /// Yoke relative permeability.
    pub mu_yoke_rel: f64,
    pub n_splines: usize,
    pub target_h: f64,
}

impl Default for PotInductorParams {
    /// Pot inductor: outer core 40 mm radius × 80 mm height, walls 10 mm,
    /// 4 mm air gap, 2 mm corner radius, winding 14 mm × 50 mm with 500
    /// turns at λ = 95 %, μ_yoke = 1000 μ₀, 7 splines; the mesh target gives
    /// roughly 50 k elements.
    fn default() -> Self {
        PotInductorParams {
            core_radius: 0.04,
            core_height: 0.08,
            yoke_thickness: 0.01,
            air_gap: 0.004,
            corner_radius: 0.002,
            winding_thickness: 0.014,
            winding_height: 0.05,
            radial_offset: 0.0,
            margin: 0.02,
            turns: 500,
            fill_factor: 0.95,
            sigma_c: 60e6,
            eps_i_rel: 10.0,
            eps_c_rel: 1.0,
            mu_yoke_rel: 1000.0,
            n_splines: 7,
            target_h: 5.4e-4,
        }
    }
}

/// Build the pot inductor example.
pub fn pot_inductor(p: &PotInductorParams) -> Result<FoilWindingModel, BuildError> {
    let d_y = p.yoke_thickness;
    let w = p.core_radius - 2.0 * d_y; // window width
    let h_w = p.core_height - 2.0 * d_y; // window height
    let g = p.air_gap;
    let r_c = p.corner_radius;
    let s = r_c / 2.0; // chamfer step
    let shell_r = d_y + w; // inner radius of the outer shell
    let r_out = shell_r + d_y;
    let half_core = h_w / 2.0 + d_y;
    let m = p.margin;

    let r_center = d_y + w / 2.0 + p.radial_offset;
    let wr = Rect::new(
        [r_center - p.winding_thickness / 2.0, -p.winding_height / 2.0],
        [r_center + p.winding_thickness / 2.0, p.winding_height / 2.0],
    );

    let mut r_breaks = vec![
        0.0,
        d_y,
        d_y + s,
        d_y + 2.0 * s,
        wr.min[0],
        wr.max[0],
        shell_r - 2.0 * s,
        shell_r - s,
        shell_r,
        r_out,
        r_out + m,
    ];
    let mut z_breaks = vec![
        -half_core - m,
        -half_core,
        -h_w / 2.0,
        -h_w / 2.0 + s,
        -h_w / 2.0 + 2.0 * s,
        -wr.height() / 2.0,
        -g / 2.0,
        g / 2.0,
        wr.height() / 2.0,
        h_w / 2.0 - 2.0 * s,
        h_w / 2.0 - s,
        h_w / 2.0,
        half_core,
        half_core + m,
    ];
    r_breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    r_breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    z_breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    z_breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let in_yoke = |r: f64, z: f64| -> bool {
        let az = z.abs();
        // top and bottom plates
        if r <= r_out && az >= h_w / 2.0 && az <= half_core {
            return true;
        }
        // center limb with air gap
        if r <= d_y && az >= g / 2.0 && az <= h_w / 2.0 {
            return true;
        }
        // outer shell
        if (shell_r..=r_out).contains(&r) && az <= h_w / 2.0 {
            return true;
        }
        // chamfer fillets at the four window corners; the tolerance keeps
        // cell centers that land exactly on the 45° line on the yoke side
        let tol = 1e-12;
        if az <= h_w / 2.0 {
            let dz = h_w / 2.0 - az;
            if r >= d_y && (r - d_y) + dz <= r_c + tol {
                return true;
            }
            if r <= shell_r && (shell_r - r) + dz <= r_c + tol {
                return true;
            }
        }
        false
    };

    let mut layout = Vec::new();
    for rw in r_breaks.windows(2) {
        for zw in z_breaks.windows(2) {
            let c = [0.5 * (rw[0] + rw[1]), 0.5 * (zw[0] + zw[1])];
            let tag = if wr.contains(c, 0.0) {
                RegionTag::FoilWinding
            } else if in_yoke(c[0], c[1]) {
                RegionTag::Yoke
            } else {
                RegionTag::Air
            };
            layout.push(LayoutRect::new([rw[0], zw[0]], [rw[1], zw[1]], tag));
        }
    }

    let mesh = generate_rect_layout_graded(&layout, p.target_h)?;
    let winding = FoilWindingSpec::new(
        p.turns,
        p.winding_thickness,
        p.winding_height,
        p.fill_factor,
        wr,
    )?;
    let materials = FoilMaterials::new(
        1.0 / MU_0,
        1.0 / MU_0,
        p.sigma_c,
        p.eps_c_rel * EPS_0,
        p.eps_i_rel * EPS_0,
        p.fill_factor,
    )?;
    FoilWindingModel::build(
        mesh,
        SymmetryMode::Axisymmetric,
        winding,
        materials,
        p.mu_yoke_rel,
        p.n_splines,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cartesian_example_scales_to_target() {
        let p = CartesianExampleParams {
            target_h: 1.2e-3,
            ..Default::default()
        };
        let model = cartesian_example(&p).unwrap();
        model.mesh.validate().unwrap();
        // winding region area is D·h
        let a = model.mesh.region_area(RegionTag::FoilWinding);
        assert!((a - 0.01 * 0.02).abs() / (0.01 * 0.02) < 1e-12);
        assert_eq!(model.basis.len(), 10);
        assert_eq!(model.system.n_voltage(), 10);
        assert_eq!(model.system.n_field(), model.mesh.node_count());
        // flux walls everywhere, no axis
        assert!(model
            .mesh
            .boundary_edges()
            .iter()
            .all(|e| e.tag == crate::mesh::BoundaryTag::FluxWall));
    }

    #[test]
    fn pot_inductor_geometry_sanity() {
        let p = PotInductorParams {
            target_h: 2.0e-3,
            ..Default::default()
        };
        let model = pot_inductor(&p).unwrap();
        model.mesh.validate().unwrap();
        // all radii non-negative
        assert!(model.mesh.nodes().iter().all(|n| n[0] >= 0.0));
        // axis boundary present
        assert!(model
            .mesh
            .boundary_edges()
            .iter()
            .any(|e| e.tag == crate::mesh::BoundaryTag::Axis));
        // winding area
        let a = model.mesh.region_area(RegionTag::FoilWinding);
        let want = 0.014 * 0.05;
        assert!((a - want).abs() / want < 1e-12);
        // yoke area: plates + limb (minus gap) + shell + 4 chamfer staircases
        // (3 cells of s² each at step s = 1 mm); window is 20 mm × 60 mm
        let plates = 2.0 * 0.04 * 0.01;
        let limb = 0.01 * (0.06 - 0.004);
        let shell = 0.01 * 0.06;
        let chamfers = 4.0 * 3.0 * 1e-3 * 1e-3;
        let want = plates + limb + shell + chamfers;
        let got = model.mesh.region_area(RegionTag::Yoke);
        assert!(
            (got - want).abs() / want < 1e-9,
            "yoke area {got} vs {want}"
        );
    }

    #[test]
    fn default_meshes_hit_documented_sizes() {
        let cart = cartesian_example(&CartesianExampleParams::default()).unwrap();
        let n = cart.mesh.triangle_count();
        assert!((15_000..30_000).contains(&n), "cartesian elements: {n}");

        let pot = pot_inductor(&PotInductorParams::default()).unwrap();
        let n = pot.mesh.triangle_count();
        assert!((35_000..70_000).contains(&n), "pot elements: {n}");
    }
}

//! TOML configuration: schema, validation and model construction.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use foilfem::mesh::{
    generate_rect_layout, read_msh, LayoutRect, Mesh, MshTagMap, Rect, RegionTag, SymmetryMode,
};
use foilfem::presets::{
    cartesian_example, pot_inductor, CartesianExampleParams, FoilWindingModel, PotInductorParams,
};
use foilfem::winding::FoilWindingSpec;

/// Error with enough context for a line-addressed diagnostic.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// "standard" | "capacitive" | "both"
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    pub geometry: GeometryConfig,
    pub symmetry: SymmetryConfig,
    pub winding: WindingConfig,
    pub materials: MaterialsConfig,
    #[serde(default)]
    pub drive: DriveConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
}

fn default_model() -> String {
    "both".into()
}

fn default_output_dir() -> String {
    "out".into()
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    /// "cartesian_box" | "pot_inductor" | "layout" | "msh"
    pub kind: String,
    pub target_h: f64,
    /// cartesian_box: air margin around the winding; pot_inductor: air
    /// margin around the core; layout/msh: unused.
    #[serde(default)]
    pub margin: Option<f64>,
    // pot inductor parameters
    #[serde(default)]
    pub core_radius: Option<f64>,
    #[serde(default)]
    pub core_height: Option<f64>,
    #[serde(default)]
    pub yoke_thickness: Option<f64>,
    #[serde(default)]
    pub air_gap: Option<f64>,
    #[serde(default)]
    pub corner_radius: Option<f64>,
    #[serde(default)]
    pub radial_offset: Option<f64>,
    // explicit layout
    #[serde(default)]
    pub rect: Vec<RectConfig>,
    // external mesh
    #[serde(default)]
    pub path: Option<String>,
    #[serde(default)]
    pub region_names: Option<HashMap<String, String>>,
    #[serde(default)]
    pub boundary_names: Option<HashMap<String, String>>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RectConfig {
    pub min: [f64; 2],
    pub max: [f64; 2],
    /// "air" | "yoke" | "foil_winding"
    pub region: String,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetryConfig {
    /// "cartesian" | "axisymmetric"
    pub mode: String,
    /// Out-of-plane length ℓ_z, m (cartesian only).
    #[serde(default)]
    pub length: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct WindingConfig {
    pub turns: usize,
    pub fill_factor: f64,
    /// Winding thickness D, m.
    pub thickness: f64,
    /// Winding height h, m.
    pub height: f64,
    pub n_splines: usize,
    /// Winding rectangle center in mesh coordinates; required for
    /// layout/msh geometries, derived for the presets.
    #[serde(default)]
    pub center: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialsConfig {
    /// Conductor conductivity, S/m.
    pub sigma_conductor: f64,
    /// Insulation relative permittivity.
    pub eps_insulation_rel: f64,
    #[serde(default = "one")]
    pub eps_conductor_rel: f64,
    #[serde(default = "one")]
    pub mu_yoke_rel: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    /// "current" | "voltage"
    pub kind: String,
    pub amplitude: f64,
}

impl Default for DriveConfig {
    fn default() -> Self {
        DriveConfig {
            kind: "current".into(),
            amplitude: 1.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub f_min: f64,
    pub f_max: f64,
    pub points: usize,
    /// "log" | "linear"
    #[serde(default = "default_spacing")]
    pub spacing: String,
}

fn default_spacing() -> String {
    "log".into()
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            f_min: 0.01,
            f_max: 1e6,
            points: 49,
            spacing: "log".into(),
        }
    }
}

impl Config {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| err(format!("cannot read {}: {e}", path.display())))?;
        let cfg: Config = toml::from_str(&text)
            .map_err(|e| err(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match self.model.as_str() {
            "standard" | "capacitive" | "both" => {}
            other => return Err(err(format!("[model]: unknown selector \"{other}\""))),
        }
        match self.symmetry.mode.as_str() {
            "cartesian" => {
                let l = self
                    .symmetry
                    .length
                    .ok_or_else(|| err("[symmetry]: cartesian mode needs `length`"))?;
                if !(l > 0.0) {
                    return Err(err("[symmetry]: length must be positive"));
                }
            }
            "axisymmetric" => {}
            other => return Err(err(format!("[symmetry]: unknown mode \"{other}\""))),
        }
        if self.winding.n_splines < 3 {
            return Err(err("[winding]: n_splines must be at least 3"));
        }
        for (name, v) in [
            ("[winding] thickness", self.winding.thickness),
            ("[winding] height", self.winding.height),
            ("[geometry] target_h", self.geometry.target_h),
            ("[materials] sigma_conductor", self.materials.sigma_conductor),
            ("[materials] eps_insulation_rel", self.materials.eps_insulation_rel),
            ("[drive] amplitude", self.drive.amplitude),
        ] {
            if !(v > 0.0) {
                return Err(err(format!("{name} must be positive, got {v}")));
            }
        }
        match self.drive.kind.as_str() {
            "current" | "voltage" => {}
            other => return Err(err(format!("[drive]: unknown kind \"{other}\""))),
        }
        match self.sweep.spacing.as_str() {
            "log" | "linear" => {}
            other => return Err(err(format!("[sweep]: unknown spacing \"{other}\""))),
        }
        if self.sweep.points < 1 || !(self.sweep.f_min > 0.0) || self.sweep.f_max < self.sweep.f_min
        {
            return Err(err("[sweep]: need points ≥ 1 and 0 < f_min ≤ f_max"));
        }
        Ok(())
    }

    pub fn symmetry_mode(&self) -> SymmetryMode {
        match self.symmetry.mode.as_str() {
            "cartesian" => SymmetryMode::Cartesian2D {
                length: self.symmetry.length.unwrap_or(1.0),
            },
            _ => SymmetryMode::Axisymmetric,
        }
    }

    pub fn sweep_frequencies(&self) -> Vec<f64> {
        let s = &self.sweep;
        if s.points == 1 {
            return vec![s.f_min];
        }
        (0..s.points)
            .map(|k| {
                let t = k as f64 / (s.points - 1) as f64;
                match s.spacing.as_str() {
                    "linear" => s.f_min + (s.f_max - s.f_min) * t,
                    _ => s.f_min * (s.f_max / s.f_min).powf(t),
                }
            })
            .collect()
    }

    /// Which winding models a run covers, with their labels.
    pub fn models(&self) -> Vec<(&'static str, foilfem::solver::ModelKind)> {
        match self.model.as_str() {
            "standard" => vec![("standard", foilfem::solver::ModelKind::Standard)],
            "capacitive" => vec![("capacitive", foilfem::solver::ModelKind::Capacitive)],
            _ => vec![
                ("standard", foilfem::solver::ModelKind::Standard),
                ("capacitive", foilfem::solver::ModelKind::Capacitive),
            ],
        }
    }

    /// Build the assembled model this configuration describes.
    pub fn build_model(&self) -> Result<FoilWindingModel, ConfigError> {
        let build_err = |e: foilfem::presets::BuildError| err(format!("model build failed: {e}"));
        match self.geometry.kind.as_str() {
            "cartesian_box" => {
                if self.symmetry.mode != "cartesian" {
                    return Err(err("[geometry]: cartesian_box needs [symmetry] mode = \"cartesian\""));
                }
                let p = CartesianExampleParams {
                    margin: self
                        .geometry
                        .margin
                        .ok_or_else(|| err("[geometry]: cartesian_box needs `margin`"))?,
                    thickness: self.winding.thickness,
                    height: self.winding.height,
                    length: self.symmetry.length.unwrap(),
                    turns: self.winding.turns,
                    fill_factor: self.winding.fill_factor,
                    sigma_c: self.materials.sigma_conductor,
                    eps_i_rel: self.materials.eps_insulation_rel,
                    eps_c_rel: self.materials.eps_conductor_rel,
                    n_splines: self.winding.n_splines,
                    target_h: self.geometry.target_h,
                };
                cartesian_example(&p).map_err(build_err)
            }
            "pot_inductor" => {
                if self.symmetry.mode != "axisymmetric" {
                    return Err(err(
                        "[geometry]: pot_inductor needs [symmetry] mode = \"axisymmetric\"",
                    ));
                }
                let need = |field: Option<f64>, name: &str| {
                    field.ok_or_else(|| err(format!("[geometry]: pot_inductor needs `{name}`")))
                };
                let p = PotInductorParams {
                    core_radius: need(self.geometry.core_radius, "core_radius")?,
                    core_height: need(self.geometry.core_height, "core_height")?,
                    yoke_thickness: need(self.geometry.yoke_thickness, "yoke_thickness")?,
                    air_gap: need(self.geometry.air_gap, "air_gap")?,
                    corner_radius: need(self.geometry.corner_radius, "corner_radius")?,
                    winding_thickness: self.winding.thickness,
                    winding_height: self.winding.height,
                    radial_offset: self.geometry.radial_offset.unwrap_or(0.0),
                    margin: need(self.geometry.margin, "margin")?,
                    turns: self.winding.turns,
                    fill_factor: self.winding.fill_factor,
                    sigma_c: self.materials.sigma_conductor,
                    eps_i_rel: self.materials.eps_insulation_rel,
                    eps_c_rel: self.materials.eps_conductor_rel,
                    mu_yoke_rel: self.materials.mu_yoke_rel,
                    n_splines: self.winding.n_splines,
                    target_h: self.geometry.target_h,
                };
                pot_inductor(&p).map_err(build_err)
            }
            "layout" | "msh" => {
                let mesh = self.build_mesh()?;
                let center = self.winding.center.ok_or_else(|| {
                    err("[winding]: layout/msh geometries need `center = [x, y]`")
                })?;
                let rect = Rect::new(
                    [
                        center[0] - self.winding.thickness / 2.0,
                        center[1] - self.winding.height / 2.0,
                    ],
                    [
                        center[0] + self.winding.thickness / 2.0,
                        center[1] + self.winding.height / 2.0,
                    ],
                );
                let spec = FoilWindingSpec::new(
                    self.winding.turns,
                    self.winding.thickness,
                    self.winding.height,
                    self.winding.fill_factor,
                    rect,
                )
                .map_err(|e| err(format!("[winding]: {e}")))?;
                let materials = foilfem::homogenization::FoilMaterials::new(
                    1.0 / foilfem::MU_0,
                    1.0 / foilfem::MU_0,
                    self.materials.sigma_conductor,
                    self.materials.eps_conductor_rel * foilfem::EPS_0,
                    self.materials.eps_insulation_rel * foilfem::EPS_0,
                    self.winding.fill_factor,
                )
                .map_err(|e| err(format!("[materials]: {e}")))?;
                FoilWindingModel::build(
                    mesh,
                    self.symmetry_mode(),
                    spec,
                    materials,
                    self.materials.mu_yoke_rel,
                    self.winding.n_splines,
                )
                .map_err(build_err)
            }
            other => Err(err(format!("[geometry]: unknown kind \"{other}\""))),
        }
    }

    fn build_mesh(&self) -> Result<Mesh, ConfigError> {
        match self.geometry.kind.as_str() {
            "layout" => {
                if self.geometry.rect.is_empty() {
                    return Err(err("[geometry]: layout kind needs [[geometry.rect]] entries"));
                }
                let mut rects = Vec::new();
                for r in &self.geometry.rect {
                    let region = parse_region(&r.region)?;
                    rects.push(LayoutRect::new(r.min, r.max, region));
                }
                generate_rect_layout(&rects, self.geometry.target_h)
                    .map_err(|e| err(format!("[geometry]: {e}")))
            }
            "msh" => {
                let path = self
                    .geometry
                    .path
                    .as_ref()
                    .ok_or_else(|| err("[geometry]: msh kind needs `path`"))?;
                let text = std::fs::read_to_string(path)
                    .map_err(|e| err(format!("[geometry]: cannot read {path}: {e}")))?;
                let mut map = MshTagMap::default();
                if let Some(names) = &self.geometry.region_names {
                    map.regions.clear();
                    for (name, tag) in names {
                        map.regions.insert(name.clone(), parse_region(tag)?);
                    }
                }
                if let Some(names) = &self.geometry.boundary_names {
                    map.boundaries.clear();
                    for (name, tag) in names {
                        let tag = match tag.as_str() {
                            "flux_wall" => foilfem::mesh::BoundaryTag::FluxWall,
                            "axis" => foilfem::mesh::BoundaryTag::Axis,
                            other => {
                                return Err(err(format!(
                                    "[geometry]: unknown boundary tag \"{other}\""
                                )))
                            }
                        };
                        map.boundaries.insert(name.clone(), tag);
                    }
                }
                read_msh(&text, &map).map_err(|e| err(format!("[geometry]: {e}")))
            }
            _ => unreachable!(),
        }
    }
}

fn parse_region(name: &str) -> Result<RegionTag, ConfigError> {
    match name {
        "air" => Ok(RegionTag::Air),
        "yoke" => Ok(RegionTag::Yoke),
        "foil_winding" => Ok(RegionTag::FoilWinding),
        other => Err(err(format!("unknown region tag \"{other}\""))),
    }
}

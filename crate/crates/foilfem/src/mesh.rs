//! Triangular meshes with region and boundary tags.
//!
//! Generated meshes come from axis-aligned rectangle layouts: the union of
//! all rectangle bounds forms a coarse grid, every coarse interval is
//! subdivided to the target edge length, and each cell is split into two
//! counter-clockwise triangles. Every rectangle boundary is therefore resolved
//! exactly by mesh lines, which the winding coupling relies on. External
//! meshes are read from ASCII MSH 2.2.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io;

use thiserror::Error;

/// Region of a triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegionTag {
    Air,
    Yoke,
    FoilWinding,
}

impl RegionTag {
    pub fn name(self) -> &'static str {
        match self {
            RegionTag::Air => "air",
            RegionTag::Yoke => "yoke",
            RegionTag::FoilWinding => "foil_winding",
        }
    }
}

/// Tag of a boundary edge. `Axis` marks edges on x = 0 (the rotation axis in
/// axisymmetric mode); in Cartesian mode the tag is inert since both kinds
/// receive the same homogeneous Dirichlet treatment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    FluxWall,
    Axis,
}

impl BoundaryTag {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryTag::FluxWall => "flux_wall",
            BoundaryTag::Axis => "axis",
        }
    }
}

/// Symmetry reduction of the 3D problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SymmetryMode {
    /// Planar 2D model extruded by `length` (ℓ_z) out of plane.
    Cartesian2D { length: f64 },
    /// Solid of revolution; mesh coordinates are (r, z).
    Axisymmetric,
}

impl SymmetryMode {
    pub fn validate(&self) -> Result<(), MeshError> {
        if let SymmetryMode::Cartesian2D { length } = self {
            if !(*length > 0.0) {
                return Err(MeshError::Geometry(format!(
                    "out-of-plane length must be positive, got {length}"
                )));
            }
        }
        Ok(())
    }
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Rect {
    pub fn new(min: [f64; 2], max: [f64; 2]) -> Self {
        Rect { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }

    pub fn height(&self) -> f64 {
        self.max[1] - self.min[1]
    }

    pub fn center(&self) -> [f64; 2] {
        [
            0.5 * (self.min[0] + self.max[0]),
            0.5 * (self.min[1] + self.max[1]),
        ]
    }

    pub fn contains(&self, p: [f64; 2], tol: f64) -> bool {
        p[0] >= self.min[0] - tol
            && p[0] <= self.max[0] + tol
            && p[1] >= self.min[1] - tol
            && p[1] <= self.max[1] + tol
    }
}

/// Rectangle with its region tag, the input of the structured mesher.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutRect {
    pub rect: Rect,
    pub region: RegionTag,
}

impl LayoutRect {
    pub fn new(min: [f64; 2], max: [f64; 2], region: RegionTag) -> Self {
        LayoutRect {
            rect: Rect::new(min, max),
            region,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub tag: BoundaryTag,
}

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("tagging error: {0}")]
    Tagging(String),
    #[error("mesh is not conforming: {0}")]
    NotConforming(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Immutable triangulated 2D domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    regions: Vec<RegionTag>,
    boundary_edges: Vec<BoundaryEdge>,
}

impl Mesh {
    pub fn new(
        nodes: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        regions: Vec<RegionTag>,
        boundary_edges: Vec<BoundaryEdge>,
    ) -> Result<Self, MeshError> {
        assert_eq!(triangles.len(), regions.len());
        let mesh = Mesh {
            nodes,
            triangles,
            regions,
            boundary_edges,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn regions(&self) -> &[RegionTag] {
        &self.regions
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_nodes(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    /// Signed area of triangle `t` (positive for counter-clockwise).
    pub fn signed_area(&self, t: usize) -> f64 {
        let [p, q, r] = self.triangle_nodes(t);
        0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangle_count()).map(|t| self.signed_area(t)).sum()
    }

    pub fn region_area(&self, tag: RegionTag) -> f64 {
        (0..self.triangle_count())
            .filter(|&t| self.regions[t] == tag)
            .map(|t| self.signed_area(t))
            .sum()
    }

    pub fn triangles_in_region(&self, tag: RegionTag) -> impl Iterator<Item = usize> + '_ {
        (0..self.triangle_count()).filter(move |&t| self.regions[t] == tag)
    }

    /// Sorted, deduplicated node indices that lie on tagged boundary edges.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .boundary_edges
            .iter()
            .flat_map(|e| e.nodes.iter().copied())
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Edge census: map from sorted node pair to number of adjacent triangles.
    fn edge_counts(&self) -> BTreeMap<(usize, usize), usize> {
        let mut counts = BTreeMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                let key = (a.min(b), a.max(b));
                *counts.entry(key).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Check structural invariants: positive triangle areas, every node used,
    /// conforming edges (interior shared by exactly 2 triangles, boundary by 1).
    pub fn validate(&self) -> Result<(), MeshError> {
        for t in 0..self.triangle_count() {
            let a = self.signed_area(t);
            if !(a > 0.0) {
                return Err(MeshError::Geometry(format!(
                    "triangle {t} has non-positive signed area {a}"
                )));
            }
        }
        let mut used = vec![false; self.node_count()];
        for tri in &self.triangles {
            for &n in tri {
                if n >= self.node_count() {
                    return Err(MeshError::Geometry(format!("node index {n} out of range")));
                }
                used[n] = true;
            }
        }
        if let Some(orphan) = used.iter().position(|&u| !u) {
            return Err(MeshError::Geometry(format!(
                "node {orphan} belongs to no triangle"
            )));
        }
        for (&(a, b), &count) in self.edge_counts().iter() {
            if count > 2 {
                return Err(MeshError::NotConforming(format!(
                    "edge ({a}, {b}) shared by {count} triangles"
                )));
            }
        }
        // tagged boundary edges must actually be boundary
        let counts = self.edge_counts();
        for e in &self.boundary_edges {
            let key = (e.nodes[0].min(e.nodes[1]), e.nodes[0].max(e.nodes[1]));
            match counts.get(&key) {
                Some(1) => {}
                Some(n) => {
                    return Err(MeshError::NotConforming(format!(
                        "tagged boundary edge {key:?} touches {n} triangles"
                    )))
                }
                None => {
                    return Err(MeshError::Geometry(format!(
                        "tagged boundary edge {key:?} not part of the mesh"
                    )))
                }
            }
        }
        Ok(())
    }

    /// Number of interior edges (shared by 2) and boundary edges (shared by 1).
    pub fn edge_census(&self) -> (usize, usize) {
        let counts = self.edge_counts();
        let interior = counts.values().filter(|&&c| c == 2).count();
        let boundary = counts.values().filter(|&&c| c == 1).count();
        (interior, boundary)
    }
}

fn merge_breaks(values: &mut Vec<f64>, tol: f64) {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values.dedup_by(|a, b| (*a - *b).abs() <= tol);
}

/// Generate a conforming structured triangulation of a rectangle layout.
///
/// Rectangles may touch along edges but must not overlap. Every rectangle
/// boundary becomes a grid line; cells covered by no rectangle are left out
/// of the mesh. Boundary edges on x = 0 are tagged [`BoundaryTag::Axis`],
/// all other outer edges [`BoundaryTag::FluxWall`].
///
/// `target_h` must not exceed the smallest rectangle dimension; use
/// [`generate_rect_layout_graded`] for layouts with intentionally thin
/// feature rectangles.
pub fn generate_rect_layout(rects: &[LayoutRect], target_h: f64) -> Result<Mesh, MeshError> {
    generate_layout_impl(rects, target_h, true)
}

/// Like [`generate_rect_layout`] but without the minimum-feature check:
/// rectangles thinner than `target_h` are resolved with a single cell across.
/// Used for layouts that mix a coarse global target with thin features
/// (resolved conductor turns, chamfer steps).
pub fn generate_rect_layout_graded(
    rects: &[LayoutRect],
    target_h: f64,
) -> Result<Mesh, MeshError> {
    generate_layout_impl(rects, target_h, false)
}

fn generate_layout_impl(
    rects: &[LayoutRect],
    target_h: f64,
    strict: bool,
) -> Result<Mesh, MeshError> {
    if rects.is_empty() {
        return Err(MeshError::Geometry("empty layout".into()));
    }
    if !(target_h > 0.0) {
        return Err(MeshError::Resolution(format!(
            "target_h must be positive, got {target_h}"
        )));
    }
    let mut scale: f64 = 0.0;
    for lr in rects {
        let r = lr.rect;
        if !(r.width() > 0.0 && r.height() > 0.0) {
            return Err(MeshError::Geometry(format!(
                "degenerate rectangle {:?}",
                r
            )));
        }
        scale = scale.max(r.width()).max(r.height());
        scale = scale
            .max(r.min[0].abs())
            .max(r.max[0].abs())
            .max(r.min[1].abs())
            .max(r.max[1].abs());
    }
    let tol = 1e-12 * scale;

    if strict {
        let min_dim = rects
            .iter()
            .map(|lr| lr.rect.width().min(lr.rect.height()))
            .fold(f64::INFINITY, f64::min);
        if target_h > min_dim * (1.0 + 1e-12) {
            return Err(MeshError::Resolution(format!(
                "target_h = {target_h} exceeds smallest rectangle dimension {min_dim}"
            )));
        }
    }

    for (i, a) in rects.iter().enumerate() {
        for b in rects.iter().skip(i + 1) {
            let ox = (a.rect.max[0].min(b.rect.max[0])) - (a.rect.min[0].max(b.rect.min[0]));
            let oy = (a.rect.max[1].min(b.rect.max[1])) - (a.rect.min[1].max(b.rect.min[1]));
            if ox > tol && oy > tol {
                return Err(MeshError::Geometry(format!(
                    "rectangles {i} and {} overlap",
                    rects.iter().position(|r| std::ptr::eq(r, b)).unwrap()
                )));
            }
        }
    }

    let mut x_breaks: Vec<f64> = rects
        .iter()
        .flat_map(|lr| [lr.rect.min[0], lr.rect.max[0]])
        .collect();
    let mut y_breaks: Vec<f64> = rects
        .iter()
        .flat_map(|lr| [lr.rect.min[1], lr.rect.max[1]])
        .collect();
    merge_breaks(&mut x_breaks, tol);
    merge_breaks(&mut y_breaks, tol);

    let subdivide = |breaks: &[f64]| -> Vec<f64> {
        let mut lines = Vec::new();
        for w in breaks.windows(2) {
            let len = w[1] - w[0];
            let n = ((len / target_h - 1e-9).ceil() as usize).max(1);
            for k in 0..n {
                lines.push(if k == 0 {
                    w[0]
                } else {
                    w[0] + len * k as f64 / n as f64
                });
            }
        }
        lines.push(*breaks.last().unwrap());
        lines
    };
    let xs = subdivide(&x_breaks);
    let ys = subdivide(&y_breaks);
    let nx = xs.len() - 1;
    let ny = ys.len() - 1;

    let region_of = |cx: f64, cy: f64| -> Option<RegionTag> {
        rects
            .iter()
            .find(|lr| lr.rect.contains([cx, cy], tol))
            .map(|lr| lr.region)
    };

    let mut grid_id: Vec<Option<usize>> = vec![None; (nx + 1) * (ny + 1)];
    let mut nodes: Vec<[f64; 2]> = Vec::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    let mut regions: Vec<RegionTag> = Vec::new();

    let node_at = |grid_id: &mut Vec<Option<usize>>,
                       nodes: &mut Vec<[f64; 2]>,
                       i: usize,
                       j: usize|
     -> usize {
        let key = j * (nx + 1) + i;
        if let Some(id) = grid_id[key] {
            return id;
        }
        let id = nodes.len();
        nodes.push([xs[i], ys[j]]);
        grid_id[key] = Some(id);
        id
    };

    for j in 0..ny {
        for i in 0..nx {
            let cx = 0.5 * (xs[i] + xs[i + 1]);
            let cy = 0.5 * (ys[j] + ys[j + 1]);
            let Some(tag) = region_of(cx, cy) else {
                continue;
            };
            let n00 = node_at(&mut grid_id, &mut nodes, i, j);
            let n10 = node_at(&mut grid_id, &mut nodes, i + 1, j);
            let n11 = node_at(&mut grid_id, &mut nodes, i + 1, j + 1);
            let n01 = node_at(&mut grid_id, &mut nodes, i, j + 1);
            triangles.push([n00, n10, n11]);
            regions.push(tag);
            triangles.push([n00, n11, n01]);
            regions.push(tag);
        }
    }

    if triangles.is_empty() {
        return Err(MeshError::Geometry("layout produced no cells".into()));
    }

    // boundary edges: those shared by exactly one triangle
    let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
    for tri in &triangles {
        for k in 0..3 {
            let a = tri[k];
            let b = tri[(k + 1) % 3];
            *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    let mut boundary_edges: Vec<BoundaryEdge> = counts
        .iter()
        .filter(|&(_, &c)| c == 1)
        .map(|(&(a, b), _)| {
            let on_axis = nodes[a][0].abs() <= tol && nodes[b][0].abs() <= tol;
            BoundaryEdge {
                nodes: [a, b],
                tag: if on_axis {
                    BoundaryTag::Axis
                } else {
                    BoundaryTag::FluxWall
                },
            }
        })
        .collect();
    boundary_edges.sort_by_key(|e| (e.nodes[0].min(e.nodes[1]), e.nodes[0].max(e.nodes[1])));

    Mesh::new(nodes, triangles, regions, boundary_edges)
}

/// Name → tag mapping for MSH physical groups.
#[derive(Debug, Clone)]
pub struct MshTagMap {
    pub regions: HashMap<String, RegionTag>,
    pub boundaries: HashMap<String, BoundaryTag>,
}

impl Default for MshTagMap {
    fn default() -> Self {
        let mut regions = HashMap::new();
        regions.insert("air".into(), RegionTag::Air);
        regions.insert("yoke".into(), RegionTag::Yoke);
        regions.insert("foil_winding".into(), RegionTag::FoilWinding);
        let mut boundaries = HashMap::new();
        boundaries.insert("flux_wall".into(), BoundaryTag::FluxWall);
        boundaries.insert("axis".into(), BoundaryTag::Axis);
        MshTagMap {
            regions,
            boundaries,
        }
    }
}

/// Read an ASCII MSH 2.2 mesh. 3-node triangles become elements, 2-node lines
/// become tagged boundary edges; any other element type is a format error.
pub fn read_msh(text: &str, map: &MshTagMap) -> Result<Mesh, MeshError> {
    let mut lines = text.lines().map(str::trim);

    let mut physical_names: HashMap<i64, String> = HashMap::new();
    let mut node_ids: HashMap<i64, usize> = HashMap::new();
    let mut nodes: Vec<[f64; 2]> = Vec::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    let mut regions: Vec<RegionTag> = Vec::new();
    let mut boundary_edges: Vec<BoundaryEdge> = Vec::new();

    let bad = |msg: &str| MeshError::Format(msg.to_string());

    while let Some(line) = lines.next() {
        match line {
            "$MeshFormat" => {
                let fmt = lines.next().ok_or_else(|| bad("truncated $MeshFormat"))?;
                let version = fmt.split_whitespace().next().unwrap_or("");
                if version != "2.2" {
                    return Err(MeshError::Format(format!(
                        "unsupported MSH version {version}, expected 2.2"
                    )));
                }
                expect_section_end(&mut lines, "$EndMeshFormat")?;
            }
            "$PhysicalNames" => {
                let count: usize = parse_next(&mut lines, "$PhysicalNames count")?;
                for _ in 0..count {
                    let l = lines.next().ok_or_else(|| bad("truncated $PhysicalNames"))?;
                    let mut parts = l.splitn(3, ' ');
                    let _dim: i64 = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| bad("bad physical name line"))?;
                    let id: i64 = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| bad("bad physical name id"))?;
                    let name = parts
                        .next()
                        .ok_or_else(|| bad("missing physical name"))?
                        .trim()
                        .trim_matches('"')
                        .to_string();
                    physical_names.insert(id, name);
                }
                expect_section_end(&mut lines, "$EndPhysicalNames")?;
            }
            "$Nodes" => {
                let count: usize = parse_next(&mut lines, "$Nodes count")?;
                for _ in 0..count {
                    let l = lines.next().ok_or_else(|| bad("truncated $Nodes"))?;
                    let mut p = l.split_whitespace();
                    let id: i64 = p
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| bad("bad node id"))?;
                    let x: f64 = p
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| bad("bad node x"))?;
                    let y: f64 = p
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| bad("bad node y"))?;
                    node_ids.insert(id, nodes.len());
                    nodes.push([x, y]);
                }
                expect_section_end(&mut lines, "$EndNodes")?;
            }
            "$Elements" => {
                let count: usize = parse_next(&mut lines, "$Elements count")?;
                for _ in 0..count {
                    let l = lines.next().ok_or_else(|| bad("truncated $Elements"))?;
                    let fields: Vec<i64> = l
                        .split_whitespace()
                        .map(|s| s.parse())
                        .collect::<Result<_, _>>()
                        .map_err(|_| bad("bad element line"))?;
                    if fields.len() < 3 {
                        return Err(bad("element line too short"));
                    }
                    let etype = fields[1];
                    let ntags = fields[2] as usize;
                    let physical = if ntags > 0 { Some(fields[3]) } else { None };
                    let node_field = &fields[3 + ntags..];
                    let resolve = |id: i64| -> Result<usize, MeshError> {
                        node_ids
                            .get(&id)
                            .copied()
                            .ok_or_else(|| MeshError::Format(format!("unknown node id {id}")))
                    };
                    match etype {
                        2 => {
                            if node_field.len() != 3 {
                                return Err(bad("triangle needs 3 nodes"));
                            }
                            let tag = lookup_region(physical, &physical_names, map)?;
                            let tri =
                                [resolve(node_field[0])?, resolve(node_field[1])?, resolve(node_field[2])?];
                            triangles.push(tri);
                            regions.push(tag);
                        }
                        1 => {
                            if node_field.len() != 2 {
                                return Err(bad("line element needs 2 nodes"));
                            }
                            let tag = lookup_boundary(physical, &physical_names, map)?;
                            boundary_edges.push(BoundaryEdge {
                                nodes: [resolve(node_field[0])?, resolve(node_field[1])?],
                                tag,
                            });
                        }
                        other => {
                            return Err(MeshError::Format(format!(
                                "unsupported element type {other} (only 3-node triangles and 2-node lines)"
                            )))
                        }
                    }
                }
                expect_section_end(&mut lines, "$EndElements")?;
            }
            "" => {}
            other if other.starts_with('$') && !other.starts_with("$End") => {
                // skip unknown section
                let end = format!("$End{}", &other[1..]);
                for l in lines.by_ref() {
                    if l == end {
                        break;
                    }
                }
            }
            _ => {}
        }
    }

    if triangles.is_empty() {
        return Err(MeshError::Format("no triangles in MSH input".into()));
    }

    // drop orphan nodes, remap indices
    let mut used = vec![false; nodes.len()];
    for tri in &triangles {
        for &n in tri {
            used[n] = true;
        }
    }
    let mut remap = vec![usize::MAX; nodes.len()];
    let mut packed = Vec::with_capacity(nodes.len());
    for (i, &u) in used.iter().enumerate() {
        if u {
            remap[i] = packed.len();
            packed.push(nodes[i]);
        }
    }
    for tri in &mut triangles {
        for n in tri.iter_mut() {
            *n = remap[*n];
        }
    }
    boundary_edges.retain(|e| used[e.nodes[0]] && used[e.nodes[1]]);
    for e in &mut boundary_edges {
        e.nodes = [remap[e.nodes[0]], remap[e.nodes[1]]];
    }
    let nodes = packed;

    // normalize orientation to counter-clockwise
    for tri in &mut triangles {
        let [p, q, r] = [nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]];
        let area2 = (q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]);
        if area2 < 0.0 {
            tri.swap(1, 2);
        }
    }

    Mesh::new(nodes, triangles, regions, boundary_edges)
}

fn lookup_region(
    physical: Option<i64>,
    names: &HashMap<i64, String>,
    map: &MshTagMap,
) -> Result<RegionTag, MeshError> {
    let id = physical.ok_or_else(|| MeshError::Tagging("triangle without physical tag".into()))?;
    let name = names
        .get(&id)
        .ok_or_else(|| MeshError::Tagging(format!("no physical name for id {id}")))?;
    map.regions
        .get(name)
        .copied()
        .ok_or_else(|| MeshError::Tagging(format!("unknown region physical name \"{name}\"")))
}

fn lookup_boundary(
    physical: Option<i64>,
    names: &HashMap<i64, String>,
    map: &MshTagMap,
) -> Result<BoundaryTag, MeshError> {
    let id = physical.ok_or_else(|| MeshError::Tagging("line without physical tag".into()))?;
    let name = names
        .get(&id)
        .ok_or_else(|| MeshError::Tagging(format!("no physical name for id {id}")))?;
    map.boundaries
        .get(name)
        .copied()
        .ok_or_else(|| MeshError::Tagging(format!("unknown boundary physical name \"{name}\"")))
}

fn parse_next<'a, T: std::str::FromStr>(
    lines: &mut impl Iterator<Item = &'a str>,
    what: &str,
) -> Result<T, MeshError> {
    lines
        .next()
        .and_then(|l| l.split_whitespace().next())
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| MeshError::Format(format!("missing or invalid {what}")))
}

fn expect_section_end<'a>(
    lines: &mut impl Iterator<Item = &'a str>,
    end: &str,
) -> Result<(), MeshError> {
    match lines.next() {
        Some(l) if l == end => Ok(()),
        other => Err(MeshError::Format(format!(
            "expected {end}, got {other:?}"
        ))),
    }
}

/// Write the mesh as ASCII MSH 2.2 with physical names for every tag present.
/// Coordinates use the shortest round-trip float representation.
pub fn write_msh(mesh: &Mesh) -> String {
    let mut out = String::new();
    out.push_str("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n");

    let mut region_ids: BTreeMap<RegionTag, i64> = BTreeMap::new();
    for &r in mesh.regions() {
        let next = region_ids.len() as i64 + 1;
        region_ids.entry(r).or_insert(next);
    }
    let mut boundary_ids: BTreeMap<BoundaryTag, i64> = BTreeMap::new();
    for e in mesh.boundary_edges() {
        let next = (region_ids.len() + boundary_ids.len()) as i64 + 1;
        boundary_ids.entry(e.tag).or_insert(next);
    }

    let _ = writeln!(
        out,
        "$PhysicalNames\n{}",
        region_ids.len() + boundary_ids.len()
    );
    for (tag, id) in &region_ids {
        let _ = writeln!(out, "2 {id} \"{}\"", tag.name());
    }
    for (tag, id) in &boundary_ids {
        let _ = writeln!(out, "1 {id} \"{}\"", tag.name());
    }
    out.push_str("$EndPhysicalNames\n");

    let _ = writeln!(out, "$Nodes\n{}", mesh.node_count());
    for (i, n) in mesh.nodes().iter().enumerate() {
        let _ = writeln!(out, "{} {} {} 0", i + 1, n[0], n[1]);
    }
    out.push_str("$EndNodes\n");

    let _ = writeln!(
        out,
        "$Elements\n{}",
        mesh.triangle_count() + mesh.boundary_edges().len()
    );
    let mut eid = 1;
    for e in mesh.boundary_edges() {
        let pid = boundary_ids[&e.tag];
        let _ = writeln!(
            out,
            "{eid} 1 2 {pid} {pid} {} {}",
            e.nodes[0] + 1,
            e.nodes[1] + 1
        );
        eid += 1;
    }
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let pid = region_ids[&mesh.regions()[t]];
        let _ = writeln!(
            out,
            "{eid} 2 2 {pid} {pid} {} {} {}",
            tri[0] + 1,
            tri[1] + 1,
            tri[2] + 1
        );
        eid += 1;
    }
    out.push_str("$EndElements\n");
    out
}

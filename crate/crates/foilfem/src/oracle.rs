//! Independent reference models for verification.
//!
//! None of these share code with the homogenized solve path: the DC
//! resistance and inter-turn capacitances are closed forms, the inductance
//! matrix comes from magnetostatic solves on a mesh that resolves every turn,
//! and the ladder network performs plain nodal analysis. Cross-validating the
//! homogenized capacitive model against the ladder checks both down to the
//! regime where their shared assumptions (thin foil, no in-turn skin effect)
//! hold.

use std::f64::consts::TAU;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use num_complex::Complex64;
use thiserror::Error;

use crate::assembly::{assemble_field, assemble_source, MaterialSet};
use crate::homogenization::HomogenizedTensors;
use crate::mesh::{
    generate_rect_layout_graded, LayoutRect, Mesh, MeshError, Rect, RegionTag, SymmetryMode,
};
use crate::winding::FoilWindingSpec;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("resolved-turn models are desk-scale only: {0} turns exceeds 20")]
    TooManyTurns(usize),
    #[error("turn rectangles {0} and {1} overlap")]
    OverlappingTurns(usize, usize),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("singular system: {0}")]
    Singular(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Assembly(#[from] crate::assembly::AssemblyError),
}

/// Per-turn resistance, inter-turn capacitances and full inductance matrix of
/// a resolved winding.
#[derive(Debug, Clone)]
pub struct LadderNetwork {
    /// Per-turn series resistance, Ω (N entries).
    pub resistances: Vec<f64>,
    /// Inter-turn capacitances, F (N − 1 entries).
    pub capacitances: Vec<f64>,
    /// Inductance matrix, H (N×N, symmetric positive semidefinite).
    pub inductance: Vec<Vec<f64>>,
}

impl LadderNetwork {
    pub fn turns(&self) -> usize {
        self.resistances.len()
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        let n = self.turns();
        if self.capacitances.len() + 1 != n || self.inductance.len() != n {
            return Err(OracleError::Geometry(
                "inconsistent ladder dimensions".into(),
            ));
        }
        if self.resistances.iter().any(|&r| !(r > 0.0)) {
            return Err(OracleError::Geometry("non-positive resistance".into()));
        }
        if self.capacitances.iter().any(|&c| !(c > 0.0)) {
            return Err(OracleError::Geometry("non-positive capacitance".into()));
        }
        let scale = self
            .inductance
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            for j in 0..n {
                if (self.inductance[i][j] - self.inductance[j][i]).abs() > 1e-8 * scale {
                    return Err(OracleError::Geometry("inductance matrix asymmetric".into()));
                }
            }
        }
        let dense = faer::Mat::<f64>::from_fn(n, n, |i, j| self.inductance[i][j]);
        let evd = dense
            .self_adjoint_eigen(faer::Side::Lower)
            .map_err(|e| OracleError::Singular(format!("{e:?}")))?;
        for k in 0..n {
            if evd.S()[k] < -1e-10 * scale {
                return Err(OracleError::Geometry(format!(
                    "inductance matrix indefinite (λ = {})",
                    evd.S()[k]
                )));
            }
        }
        Ok(())
    }
}

/// Series DC resistance of the winding: every turn's path length over its
/// conducting cross-section.
pub fn dc_resistance(spec: &FoilWindingSpec, symmetry: &SymmetryMode, sigma_c: f64) -> f64 {
    let n = spec.turns();
    let section = sigma_c * spec.d_c() * spec.height();
    match symmetry {
        SymmetryMode::Cartesian2D { length } => n as f64 * length / section,
        SymmetryMode::Axisymmetric => {
            let frame = spec.local_frame();
            let d_f = spec.d_f();
            (0..n)
                .map(|k| {
                    let r_mid = frame.alpha_center + frame.alpha_min + (k as f64 + 0.5) * d_f;
                    TAU * r_mid / section
                })
                .sum()
        }
    }
}

/// Parallel-plate capacitance of each of the N − 1 insulation gaps.
pub fn interturn_capacitances(
    spec: &FoilWindingSpec,
    symmetry: &SymmetryMode,
    eps_i: f64,
) -> Vec<f64> {
    let n = spec.turns();
    let d_i = spec.d_i();
    let h = spec.height();
    match symmetry {
        SymmetryMode::Cartesian2D { length } => {
            vec![eps_i * h * length / d_i; n - 1]
        }
        SymmetryMode::Axisymmetric => {
            let frame = spec.local_frame();
            let d_f = spec.d_f();
            (1..n)
                .map(|k| {
                    let r_gap = frame.alpha_center + frame.alpha_min + k as f64 * d_f;
                    eps_i * h * TAU * r_gap / d_i
                })
                .collect()
        }
    }
}

/// Geometry of a resolved-turn desk model: every conductor is its own
/// rectangle, centered in its foil pitch, inside an air box with the given
/// margin.
#[derive(Debug, Clone, Copy)]
pub struct ResolvedTurnParams {
    pub turns: usize,
    /// Winding thickness D, m.
    pub thickness: f64,
    /// Winding height h, m.
    pub height: f64,
    pub fill_factor: f64,
    /// Air margin around the winding envelope, m.
    pub margin: f64,
    /// Center of the winding envelope in mesh coordinates.
    pub center: [f64; 2],
    /// Target edge length outside the turn structure, m.
    pub target_h: f64,
}

/// Build the resolved-turn mesh (conductors tagged as winding region, gaps
/// and surroundings as air) and return it with the conductor rectangles.
pub fn resolved_turn_mesh(params: &ResolvedTurnParams) -> Result<(Mesh, Vec<Rect>), OracleError> {
    let n = params.turns;
    if n > 20 {
        return Err(OracleError::TooManyTurns(n));
    }
    if n < 2 {
        return Err(OracleError::Geometry("need at least 2 turns".into()));
    }
    let d_f = params.thickness / n as f64;
    let d_c = params.fill_factor * d_f;
    let d_i = d_f - d_c;
    let x0 = params.center[0] - params.thickness / 2.0;
    let y0 = params.center[1] - params.height / 2.0;
    let y1 = params.center[1] + params.height / 2.0;

    let turn_rects: Vec<Rect> = (0..n)
        .map(|k| {
            let lo = x0 + k as f64 * d_f + d_i / 2.0;
            Rect::new([lo, y0], [lo + d_c, y1])
        })
        .collect();
    for (i, a) in turn_rects.iter().enumerate() {
        for (j, b) in turn_rects.iter().enumerate().skip(i + 1) {
            if a.max[0] > b.min[0] && b.max[0] > a.min[0] {
                return Err(OracleError::OverlappingTurns(i, j));
            }
        }
    }

    // classified coarse grid: every feature line becomes a break
    let mut x_breaks = vec![x0 - params.margin, x0];
    for r in &turn_rects {
        x_breaks.push(r.min[0]);
        x_breaks.push(r.max[0]);
    }
    x_breaks.push(x0 + params.thickness);
    x_breaks.push(x0 + params.thickness + params.margin);
    x_breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    x_breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let y_breaks = [y0 - params.margin, y0, y1, y1 + params.margin];

    let mut layout = Vec::new();
    for xw in x_breaks.windows(2) {
        for yw in y_breaks.windows(2) {
            let c = [0.5 * (xw[0] + xw[1]), 0.5 * (yw[0] + yw[1])];
            let tag = if turn_rects.iter().any(|r| r.contains(c, 0.0)) {
                RegionTag::FoilWinding
            } else {
                RegionTag::Air
            };
            layout.push(LayoutRect::new([xw[0], yw[0]], [xw[1], yw[1]], tag));
        }
    }
    let mesh = generate_rect_layout_graded(&layout, params.target_h)?;
    Ok((mesh, turn_rects))
}

fn turn_triangles(mesh: &Mesh, turns: &[Rect]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); turns.len()];
    for t in 0..mesh.triangle_count() {
        let pts = mesh.triangle_nodes(t);
        let c = [
            (pts[0][0] + pts[1][0] + pts[2][0]) / 3.0,
            (pts[0][1] + pts[1][1] + pts[2][1]) / 3.0,
        ];
        for (k, r) in turns.iter().enumerate() {
            if r.contains(c, 0.0) {
                out[k].push(t);
                break;
            }
        }
    }
    out
}

/// Inductance matrix of resolved turns by N magnetostatic unit-current
/// solves; entry (k, m) is the flux linkage of turn m for unit current in
/// turn k. The mesh is assumed non-magnetic with uniform reluctivity `nu`.
pub fn magnetostatic_inductances(
    mesh: &Mesh,
    turns: &[Rect],
    symmetry: &SymmetryMode,
    nu: f64,
) -> Result<Vec<Vec<f64>>, OracleError> {
    let n = turns.len();
    if n > 20 {
        return Err(OracleError::TooManyTurns(n));
    }
    for (i, a) in turns.iter().enumerate() {
        for (j, b) in turns.iter().enumerate().skip(i + 1) {
            let ox = a.max[0].min(b.max[0]) - a.min[0].max(b.min[0]);
            let oy = a.max[1].min(b.max[1]) - a.min[1].max(b.min[1]);
            if ox > 0.0 && oy > 0.0 {
                return Err(OracleError::OverlappingTurns(i, j));
            }
        }
    }

    let mats = MaterialSet::new().with_air(nu).with_yoke(nu).with_winding(HomogenizedTensors {
        nu_perp: nu,
        nu_par: nu,
        sigma_perp: 0.0,
        sigma_par: 0.0,
        eps_hom: 0.0,
    });
    let (stiffness, _) = assemble_field(mesh, &mats, symmetry, Default::default())?;
    let by_turn = turn_triangles(mesh, turns);
    let areas: Vec<f64> = by_turn
        .iter()
        .map(|tris| tris.iter().map(|&t| mesh.signed_area(t)).sum())
        .collect();
    if areas.iter().any(|&a| !(a > 0.0)) {
        return Err(OracleError::Geometry(
            "a turn rectangle contains no triangles".into(),
        ));
    }

    // unit-current sources, one column per turn
    let n_nodes = mesh.node_count();
    let mut rhs_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut js = vec![0.0; mesh.triangle_count()];
        for &t in &by_turn[k] {
            js[t] = 1.0 / areas[k];
        }
        rhs_cols.push(assemble_source(mesh, &js, symmetry)?);
    }

    // eliminate Dirichlet nodes and factorize once
    let boundary = mesh.boundary_nodes();
    let mut is_dir = vec![false; n_nodes];
    for &b in &boundary {
        is_dir[b] = true;
    }
    let mut free = vec![None; n_nodes];
    let mut n_free = 0;
    for i in 0..n_nodes {
        if !is_dir[i] {
            free[i] = Some(n_free);
            n_free += 1;
        }
    }
    let mut trip: Vec<Triplet<usize, usize, f64>> = Vec::new();
    for (i, j, v) in stiffness.iter() {
        if let (Some(fi), Some(fj)) = (free[i], free[j]) {
            trip.push(Triplet::new(fi, fj, v));
        }
    }
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n_free, n_free, &trip)
        .map_err(|e| OracleError::Singular(format!("{e:?}")))?;
    let lu = mat
        .sp_lu()
        .map_err(|e| OracleError::Singular(format!("{e:?}")))?;
    let b = faer::Mat::<f64>::from_fn(n_free, n, |i, k| {
        let mut v = 0.0;
        for (node, f) in free.iter().enumerate() {
            if *f == Some(i) {
                v = rhs_cols[k][node];
                break;
            }
        }
        v
    });
    let x = lu.solve(&b);

    // flux linkages: (weight/A_m)·Σ ∫ field dA per turn
    let mut l = vec![vec![0.0; n]; n];
    for k in 0..n {
        let mut field = vec![0.0; n_nodes];
        for (node, f) in free.iter().enumerate() {
            if let Some(fi) = *f {
                field[node] = x[(fi, k)];
            }
        }
        for m in 0..n {
            let mut integral = 0.0;
            for &t in &by_turn[m] {
                let ids = mesh.triangles()[t];
                let mean = (field[ids[0]] + field[ids[1]] + field[ids[2]]) / 3.0;
                integral += mesh.signed_area(t) * mean;
            }
            let weight = match symmetry {
                SymmetryMode::Cartesian2D { length } => *length,
                SymmetryMode::Axisymmetric => TAU,
            };
            l[k][m] = weight * integral / areas[m];
        }
    }
    Ok(l)
}

/// Terminal impedance of the ladder network at angular frequency ω.
///
/// Each turn is split into two half-branches tapped at its midpoint; the
/// inter-turn capacitor C_k connects the midpoints of turns k and k+1, which
/// realizes the mean-potential-difference approximation of the displacement
/// field exactly. Modified nodal analysis with half-branch currents as
/// unknowns carries the full mutual-inductance coupling.
pub fn ladder_impedance(net: &LadderNetwork, omega: f64) -> Result<Complex64, OracleError> {
    let n = net.turns();
    let jw = Complex64::new(0.0, omega);
    // unknowns: e_0..e_{N-1} | m_1..m_N | J1_1..J1_N | J2_1..J2_N
    let e = |k: usize| k; // k in 0..N (e_N grounded, not an unknown)
    let m = |k: usize| n + (k - 1); // k in 1..=N
    let j1 = |k: usize| 2 * n + (k - 1);
    let j2 = |k: usize| 3 * n + (k - 1);
    let dim = 4 * n;
    let mut a = faer::Mat::<Complex64>::zeros(dim, dim);
    let mut b = faer::Mat::<Complex64>::zeros(dim, 1);
    let current = Complex64::ONE;

    // KCL at e_0: J1_1 = I
    a[(0, j1(1))] = Complex64::ONE;
    b[(0, 0)] = current;
    // KCL at e_k, k = 1..N-1: J1_{k+1} − J2_k = 0
    for k in 1..n {
        a[(k, j1(k + 1))] = Complex64::ONE;
        a[(k, j2(k))] = -Complex64::ONE;
    }
    // KCL at m_k: J1_k − J2_k − Σ jωC (V_mk − V_mnb) = 0
    for k in 1..=n {
        let row = m(k);
        a[(row, j1(k))] = Complex64::ONE;
        a[(row, j2(k))] = -Complex64::ONE;
        if k < n {
            let c = jw * net.capacitances[k - 1];
            a[(row, m(k))] -= c;
            a[(row, m(k + 1))] += c;
        }
        if k > 1 {
            let c = jw * net.capacitances[k - 2];
            a[(row, m(k))] -= c;
            a[(row, m(k - 1))] += c;
        }
    }
    // branch equations; the EMF of each half-branch is half the turn EMF with
    // the turn current taken as the average of its two halves
    for k in 1..=n {
        let row1 = j1(k);
        let row2 = j2(k);
        // V(e_{k-1}) − V(m_k) − (R_k/2) J1_k − jω Σ (L[k][m]/2)(J1_m+J2_m)/2 = 0
        a[(row1, e(k - 1))] = Complex64::ONE;
        a[(row1, m(k))] = -Complex64::ONE;
        a[(row1, j1(k))] -= net.resistances[k - 1] / 2.0;
        // V(m_k) − V(e_k) − (R_k/2) J2_k − ... = 0 (e_N grounded)
        a[(row2, m(k))] = Complex64::ONE;
        if k < n {
            a[(row2, e(k))] = -Complex64::ONE;
        }
        a[(row2, j2(k))] -= net.resistances[k - 1] / 2.0;
        for mm in 1..=n {
            let emf = jw * (net.inductance[k - 1][mm - 1] / 2.0) * 0.5;
            a[(row1, j1(mm))] -= emf;
            a[(row1, j2(mm))] -= emf;
            a[(row2, j1(mm))] -= emf;
            a[(row2, j2(mm))] -= emf;
        }
    }

    let lu = a.partial_piv_lu();
    let x = lu.solve(&b);
    let v0 = x[(e(0), 0)];
    if !v0.is_finite() {
        return Err(OracleError::Singular(format!(
            "ladder solve returned non-finite terminal voltage at ω = {omega}"
        )));
    }
    Ok(v0 / current)
}

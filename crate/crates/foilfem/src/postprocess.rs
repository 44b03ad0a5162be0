//! Derived quantities of a solved frequency point: the voltage-function
//! profile Φ(α), the conductive and capacitive current profiles across the
//! winding, terminal voltage and impedance, flux-line contours and the CSV
//! writers for all of them.
//!
//! The current profiles evaluate the same integrands with the same Gauss
//! segmentation as the assembly, so projecting their sum defect onto the
//! spline basis reproduces the residual of the assembled winding equation to
//! machine precision. That projection is the discrete form of the statement
//! that conductive plus capacitive current approximate the terminal current
//! at every position across the winding.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::io::{self, Write};

use num_complex::Complex64;
use thiserror::Error;

use crate::assembly::{alpha_breakpoints, barycentric};
use crate::bspline::{BSplineBasis, SplineError};
use crate::homogenization::HomogenizedTensors;
use crate::mesh::{Mesh, RegionTag, SymmetryMode};
use crate::quadrature::{map_gauss, GAUSS_2, GAUSS_4};
use crate::solver::{ModelKind, Solution, SolveError};
use crate::winding::FoilWindingSpec;

#[derive(Debug, Error)]
pub enum PostError {
    #[error(transparent)]
    Spline(#[from] SplineError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("sample α = {0} outside the winding interval")]
    SampleOutside(f64),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Everything needed to evaluate winding-domain quantities of a solution.
#[derive(Clone, Copy)]
pub struct PostContext<'a> {
    pub mesh: &'a Mesh,
    pub spec: &'a FoilWindingSpec,
    pub basis: &'a BSplineBasis,
    pub tensors: &'a HomogenizedTensors,
    pub symmetry: &'a SymmetryMode,
}

/// One point of an impedance sweep in reporting form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpedancePoint {
    pub f_hz: f64,
    pub z: Complex64,
}

impl ImpedancePoint {
    pub fn magnitude(&self) -> f64 {
        self.z.norm()
    }

    /// Phase in degrees, in (−180°, 180°]. No unwrapping.
    pub fn phase_deg(&self) -> f64 {
        let mut p = self.z.im.atan2(self.z.re).to_degrees();
        if p <= -180.0 {
            p += 360.0;
        }
        p
    }
}

/// Conductive and capacitive current samples across the winding.
#[derive(Debug, Clone)]
pub struct CurrentProfiles {
    pub alphas: Vec<f64>,
    pub conductive: Vec<Complex64>,
    pub capacitive: Vec<Complex64>,
}

impl CurrentProfiles {
    /// max over samples of |I_cond + I_cap − I| / |I|.
    pub fn max_sum_deviation(&self, terminal_current: Complex64) -> f64 {
        let scale = terminal_current.norm();
        self.conductive
            .iter()
            .zip(&self.capacitive)
            .map(|(&c, &k)| (c + k - terminal_current).norm() / scale)
            .fold(0.0, f64::max)
    }
}

/// Terminal voltage recomputed from the coefficients: U = Pᵀu.
pub fn terminal_voltage(turn_weights: &[f64], sol: &Solution) -> Complex64 {
    turn_weights
        .iter()
        .zip(&sol.voltage_coeffs)
        .map(|(&p, &u)| u * p)
        .sum()
}

/// Impedance Z = U/I.
pub fn impedance(sol: &Solution) -> Result<Complex64, PostError> {
    Ok(sol.impedance()?)
}

/// Voltage-function profile Φ(α) = Σ_j u_j ξ̂_j(α).
pub fn voltage_profile(
    basis: &BSplineBasis,
    sol: &Solution,
    alphas: &[f64],
) -> Result<Vec<Complex64>, PostError> {
    let mut out = Vec::with_capacity(alphas.len());
    for &a in alphas {
        if a < basis.alpha_min() || a > basis.alpha_max() {
            return Err(PostError::SampleOutside(a));
        }
        let (first, vals, _) = basis.nonzero_at(a);
        let mut phi = Complex64::ZERO;
        for (d, &v) in vals.iter().enumerate() {
            if first + d < basis.len() {
                phi += sol.voltage_coeffs[first + d] * v;
            }
        }
        out.push(phi);
    }
    Ok(out)
}

fn voltage_value_and_deriv(basis: &BSplineBasis, sol: &Solution, alpha: f64) -> (Complex64, Complex64) {
    let (first, vals, ders) = basis.nonzero_at(alpha);
    let mut phi = Complex64::ZERO;
    let mut dphi = Complex64::ZERO;
    for d in 0..3 {
        if first + d < basis.len() {
            phi += sol.voltage_coeffs[first + d] * vals[d];
            dphi += sol.voltage_coeffs[first + d] * ders[d];
        }
    }
    (phi, dphi)
}

/// ∫ field dγ along the vertical line through the winding at mesh coordinate
/// `x`, with the linear interpolant integrated exactly per triangle cut.
fn line_integral(mesh: &Mesh, field: &[Complex64], x: f64) -> Complex64 {
    let mut total = Complex64::ZERO;
    for t in mesh.triangles_in_region(RegionTag::FoilWinding) {
        let pts = mesh.triangle_nodes(t);
        let Some((y_lo, y_hi)) = crate::assembly::vertical_cut(pts, x) else {
            continue;
        };
        let ids = mesh.triangles()[t];
        for &gp in GAUSS_2.iter() {
            let (y, w) = map_gauss(gp, y_lo, y_hi);
            let bary = barycentric(pts, [x, y]);
            let mut v = Complex64::ZERO;
            for k in 0..3 {
                v += field[ids[k]] * bary[k];
            }
            total += v * w;
        }
    }
    total
}

/// Nudge a sample α off winding faces and interior mesh lines so the vertical
/// cut through the triangulation is proper.
fn nudged_alpha(ctx: &PostContext, alpha: f64) -> f64 {
    let eps = 1e-9 * ctx.spec.thickness();
    let lo = ctx.basis.alpha_min();
    let hi = ctx.basis.alpha_max();
    let mut a = alpha.clamp(lo + eps, hi - eps);
    for b in alpha_breakpoints(ctx.mesh, ctx.spec, ctx.basis) {
        if (a - b).abs() < eps {
            a = if b < 0.5 * (lo + hi) { b + eps } else { b - eps };
        }
    }
    a
}

fn check_samples(ctx: &PostContext, alphas: &[f64]) -> Result<(), PostError> {
    for &a in alphas {
        if a < ctx.basis.alpha_min() - 1e-12 || a > ctx.basis.alpha_max() + 1e-12 {
            return Err(PostError::SampleOutside(a));
        }
    }
    Ok(())
}

/// Conductive current across the winding at the given α samples:
/// the slice integral of σ_par (−jωA + Φχ)·χ scaled by the foil pitch.
pub fn conductive_current_profile(
    ctx: &PostContext,
    sol: &Solution,
    alphas: &[f64],
) -> Result<Vec<Complex64>, PostError> {
    check_samples(ctx, alphas)?;
    let jw = Complex64::new(0.0, sol.omega);
    let d_f = ctx.spec.d_f();
    let sigma = ctx.tensors.sigma_par;
    let h = ctx.spec.height();
    let center = ctx.spec.local_frame().alpha_center;
    let mut out = Vec::with_capacity(alphas.len());
    for &alpha_raw in alphas {
        let alpha = nudged_alpha(ctx, alpha_raw);
        let x = center + alpha;
        let (phi, _) = voltage_value_and_deriv(ctx.basis, sol, alpha);
        let val = match ctx.symmetry {
            SymmetryMode::Cartesian2D { length } => {
                // d_f σ ∫ (−jω A_z + Φ/ℓ_z) dγ
                let a_int = line_integral(ctx.mesh, &sol.field, x);
                d_f * sigma * (-jw * a_int + phi * (h / length))
            }
            SymmetryMode::Axisymmetric => {
                // field is ψ = r·A_φ with r constant along the cut
                let psi_int = line_integral(ctx.mesh, &sol.field, x);
                d_f * sigma * (-jw * psi_int / x + phi * (h / (TAU * x)))
            }
        };
        out.push(val);
    }
    Ok(out)
}

/// Capacitive current across the winding at the given α samples:
/// jω ε_hom (½ Φ′ + Φ/d_f) times the slice area.
pub fn capacitive_current_profile(
    ctx: &PostContext,
    sol: &Solution,
    alphas: &[f64],
) -> Result<Vec<Complex64>, PostError> {
    check_samples(ctx, alphas)?;
    if sol.model == ModelKind::Standard {
        return Ok(vec![Complex64::ZERO; alphas.len()]);
    }
    let jw = Complex64::new(0.0, sol.omega);
    let d_f = ctx.spec.d_f();
    let eps = ctx.tensors.eps_hom;
    let h = ctx.spec.height();
    let center = ctx.spec.local_frame().alpha_center;
    let mut out = Vec::with_capacity(alphas.len());
    for &alpha_raw in alphas {
        let alpha = alpha_raw.clamp(ctx.basis.alpha_min(), ctx.basis.alpha_max());
        let (phi, dphi) = voltage_value_and_deriv(ctx.basis, sol, alpha);
        let slice_area = match ctx.symmetry {
            SymmetryMode::Cartesian2D { length } => length * h,
            SymmetryMode::Axisymmetric => TAU * (center + alpha) * h,
        };
        out.push(jw * eps * (dphi * 0.5 + phi / d_f) * slice_area);
    }
    Ok(out)
}

/// Both current profiles at the given samples.
pub fn current_profiles(
    ctx: &PostContext,
    sol: &Solution,
    alphas: &[f64],
) -> Result<CurrentProfiles, PostError> {
    Ok(CurrentProfiles {
        alphas: alphas.to_vec(),
        conductive: conductive_current_profile(ctx, sol, alphas)?,
        capacitive: capacitive_current_profile(ctx, sol, alphas)?,
    })
}

/// Default profile abscissae: Greville points of the basis plus `n_uniform`
/// uniform samples, sorted and deduplicated.
pub fn default_sample_points(basis: &BSplineBasis, n_uniform: usize) -> Vec<f64> {
    let mut pts: Vec<f64> = (0..basis.len()).map(|i| basis.greville(i)).collect();
    let (lo, hi) = (basis.alpha_min(), basis.alpha_max());
    for k in 0..n_uniform {
        pts.push(lo + (hi - lo) * k as f64 / (n_uniform.max(2) - 1) as f64);
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-15 * (hi - lo).abs());
    pts
}

/// Greville abscissae only.
pub fn greville_points(basis: &BSplineBasis) -> Vec<f64> {
    (0..basis.len()).map(|i| basis.greville(i)).collect()
}

/// Projection of the current-condition defect I_cond(α) + I_cap(α) − I onto
/// every spline test function with the assembly quadrature, relative to
/// ‖P·I‖₂. Recomputed from the solution fields, independent of the solver's
/// own residual.
pub fn kirchhoff_projection_residual(
    ctx: &PostContext,
    sol: &Solution,
    turn_weights: &[f64],
) -> f64 {
    let breaks = alpha_breakpoints(ctx.mesh, ctx.spec, ctx.basis);
    let d_f = ctx.spec.d_f();
    let n_u = ctx.basis.len();
    let mut res = vec![Complex64::ZERO; n_u];
    for seg in breaks.windows(2) {
        if seg[1] - seg[0] <= 0.0 {
            continue;
        }
        for &gp in GAUSS_4.iter() {
            let (alpha_q, w) = map_gauss(gp, seg[0], seg[1]);
            let i_cond = conductive_current_profile(ctx, sol, &[alpha_q]).expect("inside");
            let i_cap = capacitive_current_profile(ctx, sol, &[alpha_q]).expect("inside");
            let defect = i_cond[0] + i_cap[0] - sol.terminal_current;
            let (first, vals, _) = ctx.basis.nonzero_at(alpha_q);
            for (d, &v) in vals.iter().enumerate() {
                if first + d < n_u {
                    res[first + d] += defect * (w * v / d_f);
                }
            }
        }
    }
    let num: f64 = res.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = turn_weights
        .iter()
        .map(|&p| (sol.terminal_current * p).norm_sqr())
        .sum::<f64>()
        .sqrt();
    num / den
}

/// A single iso-contour polyline.
#[derive(Debug, Clone)]
pub struct Contour {
    pub level: f64,
    pub points: Vec<[f64; 2]>,
    pub closed: bool,
}

/// Marching-triangles extraction of `n_levels` uniformly spaced iso-contours
/// of a nodal scalar field, between its min and max (exclusive). A constant
/// field yields no contours.
pub fn flux_contours(mesh: &Mesh, nodal: &[f64], n_levels: usize) -> Vec<Contour> {
    assert_eq!(nodal.len(), mesh.node_count());
    let min = nodal.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = nodal.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(max > min) || n_levels == 0 {
        return Vec::new();
    }
    let bbox = mesh
        .nodes()
        .iter()
        .fold([f64::INFINITY, f64::NEG_INFINITY], |acc, p| {
            [acc[0].min(p[0]).min(p[1]), acc[1].max(p[0]).max(p[1])]
        });
    let quantum = 1e-9 * (bbox[1] - bbox[0]).max(1e-300);

    let mut contours = Vec::new();
    for k in 0..n_levels {
        let level = min + (max - min) * (k + 1) as f64 / (n_levels + 1) as f64;
        let mut segments: Vec<([f64; 2], [f64; 2])> = Vec::new();
        for t in 0..mesh.triangle_count() {
            let pts = mesh.triangle_nodes(t);
            let ids = mesh.triangles()[t];
            let vals = [nodal[ids[0]], nodal[ids[1]], nodal[ids[2]]];
            let mut crossings: Vec<[f64; 2]> = Vec::new();
            for e in 0..3 {
                let (a, b) = (e, (e + 1) % 3);
                // vertices exactly on the level count as the high side
                let sa = vals[a] >= level;
                let sb = vals[b] >= level;
                if sa != sb {
                    let t_par = (level - vals[a]) / (vals[b] - vals[a]);
                    crossings.push([
                        pts[a][0] + t_par * (pts[b][0] - pts[a][0]),
                        pts[a][1] + t_par * (pts[b][1] - pts[a][1]),
                    ]);
                }
            }
            if crossings.len() == 2 {
                let d = ((crossings[0][0] - crossings[1][0]).powi(2)
                    + (crossings[0][1] - crossings[1][1]).powi(2))
                .sqrt();
                if d > quantum {
                    segments.push((crossings[0], crossings[1]));
                }
            }
        }
        contours.extend(stitch_segments(&segments, level, quantum));
    }
    contours
}

fn quantize(p: [f64; 2], q: f64) -> (i64, i64) {
    ((p[0] / q).round() as i64, (p[1] / q).round() as i64)
}

fn stitch_segments(segments: &[([f64; 2], [f64; 2])], level: f64, q: f64) -> Vec<Contour> {
    // adjacency of quantized endpoints
    let mut adj: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (s, seg) in segments.iter().enumerate() {
        adj.entry(quantize(seg.0, q)).or_default().push(s);
        adj.entry(quantize(seg.1, q)).or_default().push(s);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();

    // prefer open chains (start at degree-1 endpoints), then closed loops
    let mut starts: Vec<usize> = Vec::new();
    let mut keys: Vec<&(i64, i64)> = adj.keys().collect();
    keys.sort();
    for key in keys {
        let segs = &adj[key];
        if segs.len() == 1 {
            starts.push(segs[0]);
        }
    }
    starts.extend(0..segments.len());

    for &start in &starts {
        if used[start] {
            continue;
        }
        used[start] = true;
        let mut points = vec![segments[start].0, segments[start].1];
        // extend forward from the tail
        loop {
            let tail = *points.last().unwrap();
            let key = quantize(tail, q);
            let next = adj
                .get(&key)
                .and_then(|list| list.iter().find(|&&s| !used[s]).copied());
            let Some(s) = next else { break };
            used[s] = true;
            let (a, b) = segments[s];
            if quantize(a, q) == key {
                points.push(b);
            } else {
                points.push(a);
            }
        }
        // extend backward from the head
        loop {
            let head = points[0];
            let key = quantize(head, q);
            let next = adj
                .get(&key)
                .and_then(|list| list.iter().find(|&&s| !used[s]).copied());
            let Some(s) = next else { break };
            used[s] = true;
            let (a, b) = segments[s];
            if quantize(a, q) == key {
                points.insert(0, b);
            } else {
                points.insert(0, a);
            }
        }
        let closed = points.len() > 2
            && quantize(points[0], q) == quantize(*points.last().unwrap(), q);
        out.push(Contour {
            level,
            points,
            closed,
        });
    }
    out
}

// ---------------------------------------------------------------------------
// CSV writers. Floats use the shortest representation that round-trips, so a
// re-read reproduces the values bit-exactly; complex values are (re, im)
// column pairs. Every file starts with a documented header row.
// ---------------------------------------------------------------------------

/// One labeled impedance row of a sweep file.
pub struct SweepRow<'a> {
    pub f_hz: f64,
    pub model: &'a str,
    pub z: Complex64,
}

pub fn write_sweep_csv(w: &mut impl Write, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(w, "f_hz,model,z_re_ohm,z_im_ohm,z_abs_ohm,z_phase_deg")?;
    for r in rows {
        let p = ImpedancePoint {
            f_hz: r.f_hz,
            z: r.z,
        };
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.f_hz,
            r.model,
            r.z.re,
            r.z.im,
            p.magnitude(),
            p.phase_deg()
        )?;
    }
    Ok(())
}

pub fn write_voltage_profile_csv(
    w: &mut impl Write,
    alphas: &[f64],
    phi: &[Complex64],
) -> io::Result<()> {
    writeln!(w, "alpha_m,phi_re_v,phi_im_v")?;
    for (a, v) in alphas.iter().zip(phi) {
        writeln!(w, "{},{},{}", a, v.re, v.im)?;
    }
    Ok(())
}

pub fn write_current_profiles_csv(
    w: &mut impl Write,
    profiles: &CurrentProfiles,
) -> io::Result<()> {
    writeln!(
        w,
        "alpha_m,i_cond_re_a,i_cond_im_a,i_cap_re_a,i_cap_im_a,i_sum_re_a,i_sum_im_a"
    )?;
    for ((a, c), k) in profiles
        .alphas
        .iter()
        .zip(&profiles.conductive)
        .zip(&profiles.capacitive)
    {
        let s = c + k;
        writeln!(w, "{},{},{},{},{},{},{}", a, c.re, c.im, k.re, k.im, s.re, s.im)?;
    }
    Ok(())
}

/// Contours of both field parts with a polyline-id column.
pub fn write_contours_csv(
    w: &mut impl Write,
    parts: &[(&str, &[Contour])],
) -> io::Result<()> {
    writeln!(w, "field_part,polyline,level,x_m,y_m")?;
    for (part, contours) in parts {
        for (id, c) in contours.iter().enumerate() {
            for p in &c.points {
                writeln!(w, "{},{},{},{},{}", part, id, c.level, p[0], p[1])?;
            }
        }
    }
    Ok(())
}

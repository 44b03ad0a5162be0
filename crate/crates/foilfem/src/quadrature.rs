//! Gauss rules used by assembly and postprocessing.
//!
//! The 1D rules integrate the B-spline products along the across-turns
//! coordinate; the triangle rules integrate the field matrices. All triangle
//! points are strictly interior so that 1/r weights in axisymmetric mode are
//! never evaluated on an element edge (which may touch the axis).

/// 4-point Gauss-Legendre rule on [-1, 1]; exact for degree ≤ 7.
pub const GAUSS_4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_85),
    (-0.339_981_043_584_856_26, 0.652_145_154_862_546_2),
    (0.339_981_043_584_856_26, 0.652_145_154_862_546_2),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_85),
];

/// 8-point Gauss-Legendre rule on [-1, 1]; exact for degree ≤ 15.
pub const GAUSS_8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
];

/// 2-point Gauss-Legendre rule on [-1, 1]; exact for degree ≤ 3.
pub const GAUSS_2: [(f64, f64); 2] = [
    (-0.577_350_269_189_625_7, 1.0),
    (0.577_350_269_189_625_7, 1.0),
];

/// Degree-5 triangle rule (7 points, barycentric, weights summing to 1).
/// All points are strictly interior.
pub const TRI_DEG5: [([f64; 3], f64); 7] = [
    (
        [
            0.333_333_333_333_333_3,
            0.333_333_333_333_333_3,
            0.333_333_333_333_333_3,
        ],
        0.225,
    ),
    (
        [
            0.059_715_871_789_77,
            0.470_142_064_105_115,
            0.470_142_064_105_115,
        ],
        0.132_394_152_788_506_2,
    ),
    (
        [
            0.470_142_064_105_115,
            0.059_715_871_789_77,
            0.470_142_064_105_115,
        ],
        0.132_394_152_788_506_2,
    ),
    (
        [
            0.470_142_064_105_115,
            0.470_142_064_105_115,
            0.059_715_871_789_77,
        ],
        0.132_394_152_788_506_2,
    ),
    (
        [
            0.797_426_985_353_087_4,
            0.101_286_507_323_456_34,
            0.101_286_507_323_456_34,
        ],
        0.125_939_180_544_827_16,
    ),
    (
        [
            0.101_286_507_323_456_34,
            0.797_426_985_353_087_4,
            0.101_286_507_323_456_34,
        ],
        0.125_939_180_544_827_16,
    ),
    (
        [
            0.101_286_507_323_456_34,
            0.101_286_507_323_456_34,
            0.797_426_985_353_087_4,
        ],
        0.125_939_180_544_827_16,
    ),
];

/// Quadrature accuracy selector. `Refined` doubles the effective order
/// (8-point Gauss segments, 4-fold triangle subdivision) and exists so tests
/// can confirm the standard level is already converged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuadratureLevel {
    #[default]
    Standard,
    Refined,
}

impl QuadratureLevel {
    pub fn gauss_1d(self) -> &'static [(f64, f64)] {
        match self {
            QuadratureLevel::Standard => &GAUSS_4,
            QuadratureLevel::Refined => &GAUSS_8,
        }
    }

    /// Number of uniform sub-triangles each element is split into before the
    /// degree-5 rule is applied.
    pub fn tri_subdivision(self) -> usize {
        match self {
            QuadratureLevel::Standard => 1,
            QuadratureLevel::Refined => 2,
        }
    }
}

/// Map a [-1, 1] rule point to (position, weight) on [a, b].
#[inline]
pub fn map_gauss(point: (f64, f64), a: f64, b: f64) -> (f64, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (mid + half * point.0, half * point.1)
}

/// Quadrature points of a triangle (subdivided `n × n`-fold), returned as
/// (barycentric-in-parent, weight-fraction-of-area).
pub fn triangle_points(subdiv: usize) -> Vec<([f64; 3], f64)> {
    if subdiv <= 1 {
        return TRI_DEG5.to_vec();
    }
    // Uniform refinement of the reference triangle into subdiv² children,
    // each mapped copy of the degree-5 rule weighted by 1/subdiv².
    let n = subdiv;
    let mut pts = Vec::new();
    let frac = 1.0 / (n * n) as f64;
    let corner =
        |i: usize, j: usize| -> [f64; 3] { barycentric_of_grid(i as f64 / n as f64, j as f64 / n as f64) };
    for i in 0..n {
        for j in 0..(n - i) {
            // upward child
            push_mapped(&mut pts, corner(i, j), corner(i + 1, j), corner(i, j + 1), frac);
            // downward child
            if j < n - i - 1 {
                push_mapped(
                    &mut pts,
                    corner(i + 1, j),
                    corner(i + 1, j + 1),
                    corner(i, j + 1),
                    frac,
                );
            }
        }
    }
    pts
}

fn barycentric_of_grid(u: f64, v: f64) -> [f64; 3] {
    [1.0 - u - v, u, v]
}

fn push_mapped(
    out: &mut Vec<([f64; 3], f64)>,
    a: [f64; 3],
    b: [f64; 3],
    c: [f64; 3],
    frac: f64,
) {
    for &(l, w) in TRI_DEG5.iter() {
        let bary = [
            l[0] * a[0] + l[1] * b[0] + l[2] * c[0],
            l[0] * a[1] + l[1] * b[1] + l[2] * c[1],
            l[0] * a[2] + l[1] * b[2] + l[2] * c[2],
        ];
        out.push((bary, w * frac));
    }
}

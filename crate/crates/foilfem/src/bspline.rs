//! Quadratic B-spline basis on an open uniform knot vector.
//!
//! The basis discretizes the per-turn voltage function over the across-turns
//! interval of the winding. Degree 2 with a clamped (open) knot vector gives
//! C¹ continuity inside the interval; the first and last functions
//! interpolate the interval ends, which pins the voltage function values at
//! the winding faces.

use thiserror::Error;

const DEGREE: usize = 2;

#[derive(Debug, Error, PartialEq)]
pub enum SplineError {
    #[error("basis needs at least 3 functions for degree 2, got {0}")]
    DegreeInfeasible(usize),
    #[error("invalid interval [{0}, {1}]")]
    InvalidInterval(f64, f64),
    #[error("evaluation point {point} outside interval [{min}, {max}]")]
    OutOfInterval { point: f64, min: f64, max: f64 },
    #[error("basis index {0} out of range (n = {1})")]
    IndexOutOfRange(usize, usize),
}

/// Quadratic B-spline basis with `n` functions on [α_min, α_max].
///
/// The knot vector has n + 3 entries: the ends repeated 3 times, the
/// n − 3 interior knots uniformly spaced.
#[derive(Debug, Clone, PartialEq)]
pub struct BSplineBasis {
    n: usize,
    alpha_min: f64,
    alpha_max: f64,
    knots: Vec<f64>,
}

impl BSplineBasis {
    pub fn new(n: usize, alpha_min: f64, alpha_max: f64) -> Result<Self, SplineError> {
        if n < 3 {
            return Err(SplineError::DegreeInfeasible(n));
        }
        if !(alpha_min < alpha_max) || !alpha_min.is_finite() || !alpha_max.is_finite() {
            return Err(SplineError::InvalidInterval(alpha_min, alpha_max));
        }
        let mut knots = Vec::with_capacity(n + 3);
        knots.extend([alpha_min; 3]);
        let spans = n - 2; // number of nonzero knot spans
        for k in 1..spans {
            let t = k as f64 / spans as f64;
            knots.push(alpha_min + (alpha_max - alpha_min) * t);
        }
        knots.extend([alpha_max; 3]);
        debug_assert_eq!(knots.len(), n + 3);
        Ok(BSplineBasis {
            n,
            alpha_min,
            alpha_max,
            knots,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn alpha_min(&self) -> f64 {
        self.alpha_min
    }

    pub fn alpha_max(&self) -> f64 {
        self.alpha_max
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Distinct break points of the piecewise polynomial (knots without
    /// repetitions), from α_min to α_max inclusive.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = vec![self.alpha_min];
        b.extend(self.knots[3..self.n].iter().copied());
        b.push(self.alpha_max);
        b
    }

    /// Greville abscissa of basis function `i`: the knot average where the
    /// function's influence is concentrated.
    pub fn greville(&self, i: usize) -> f64 {
        (self.knots[i + 1] + self.knots[i + 2]) / DEGREE as f64
    }

    /// ∫ ξ̂_i dα over the whole interval (closed form for B-splines).
    pub fn integral(&self, i: usize) -> f64 {
        (self.knots[i + 3] - self.knots[i]) / (DEGREE + 1) as f64
    }

    fn check_inside(&self, alpha: f64) -> Result<(), SplineError> {
        if alpha < self.alpha_min || alpha > self.alpha_max || alpha.is_nan() {
            return Err(SplineError::OutOfInterval {
                point: alpha,
                min: self.alpha_min,
                max: self.alpha_max,
            });
        }
        Ok(())
    }

    /// Knot span index s with knots[s] ≤ α < knots[s+1]; evaluation at knots
    /// uses the right-sided limit except at α_max (left-sided).
    fn span(&self, alpha: f64) -> usize {
        let last = self.n - 1; // last nonzero span start index
        if alpha >= self.alpha_max {
            return last;
        }
        let mut s = self
            .knots
            .partition_point(|&k| k <= alpha)
            .saturating_sub(1);
        s = s.clamp(DEGREE, last);
        s
    }

    /// Values and derivatives of the three basis functions that are nonzero
    /// on the span containing α. Returns (first index, values, derivatives).
    pub fn nonzero_at(&self, alpha: f64) -> (usize, [f64; 3], [f64; 3]) {
        let s = self.span(alpha);
        let k = &self.knots;

        // Degree-1 functions restricted to span s (the two hat pieces):
        //   B_{s-1,1} = (k[s+1] - a) / (k[s+1] - k[s])
        //   B_{s,1}   = (a - k[s])   / (k[s+1] - k[s])
        let h = k[s + 1] - k[s];
        let b1_left = (k[s + 1] - alpha) / h;
        let b1_right = (alpha - k[s]) / h;

        // One more Cox-de Boor step for degree 2. Repeated knots only enter
        // through these denominators, both positive for a valid span index.
        let d_a = k[s + 1] - k[s - 1];
        let d_b = k[s + 2] - k[s];

        let vals = [
            (k[s + 1] - alpha) / d_a * b1_left,
            (alpha - k[s - 1]) / d_a * b1_left + (k[s + 2] - alpha) / d_b * b1_right,
            (alpha - k[s]) / d_b * b1_right,
        ];

        // B'_{i,2} = 2/(k[i+2]-k[i]) B_{i,1} - 2/(k[i+3]-k[i+1]) B_{i+1,1};
        // on this span B_{s-2,1} = B_{s+1,1} = 0.
        let deg = DEGREE as f64;
        let ders = [
            -deg / d_a * b1_left,
            deg / d_a * b1_left - deg / d_b * b1_right,
            deg / d_b * b1_right,
        ];

        (s - 2, vals, ders)
    }

    /// Value of basis function `i` at α (Cox-de Boor).
    pub fn eval(&self, i: usize, alpha: f64) -> Result<f64, SplineError> {
        self.check_index(i)?;
        self.check_inside(alpha)?;
        let (first, vals, _) = self.nonzero_at(alpha);
        Ok(if i >= first && i < first + 3 {
            vals[i - first]
        } else {
            0.0
        })
    }

    /// Derivative dξ̂_i/dα at α (units 1/m when α is in meters).
    pub fn eval_deriv(&self, i: usize, alpha: f64) -> Result<f64, SplineError> {
        self.check_index(i)?;
        self.check_inside(alpha)?;
        let (first, _, ders) = self.nonzero_at(alpha);
        Ok(if i >= first && i < first + 3 {
            ders[i - first]
        } else {
            0.0
        })
    }

    fn check_index(&self, i: usize) -> Result<(), SplineError> {
        if i >= self.n {
            return Err(SplineError::IndexOutOfRange(i, self.n));
        }
        Ok(())
    }
}

//! Periodic material coefficient fields `(A(y), n(y))` on the unit cell
//! Y = (0,1)², their `x/ε` rescalings, bounds, and the named presets used
//! throughout the experiments.
//!
//! Fields are evaluation maps plus metadata. Piecewise presets follow the
//! convention that points on a discontinuity take the "outside" value, so
//! pointwise evaluation is deterministic and mesh-independent.

use crate::error::{Error, Result};

/// 2×2 symmetric matrix as row-major fixed array.
pub type Mat2 = [[f64; 2]; 2];

pub const IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

/// Uniform coefficient bounds (smallest/largest eigenvalue of A, range of n).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub a_min: f64,
    pub a_max: f64,
    pub n_min: f64,
    pub n_max: f64,
}

/// Structural tag for a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Constant,
    SmoothFormula,
    PiecewiseCellwise,
}

/// The A(y) component of a field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum APart {
    Identity,
    /// A = a·I.
    Constant(f64),
    /// Eq-style diagonal: (1/3)·diag(sin²(2πy₂)+1, cos²(2πy₁)+1).
    SinCos,
    /// T·SinCos·Tᵀ with T the clockwise rotation by 1 radian.
    Rotated,
    /// 2×2 checkerboard of half-cells: a1 on the (0,0)/(1,1) squares,
    /// a2 on the others, both isotropic.
    Checkerboard { a1: f64, a2: f64 },
    /// A = I inside the disk of given radius centered at (1/2, 1/2),
    /// a_out·I outside.
    Voids { radius: f64, a_out: f64 },
    /// Isotropic two-phase layering in y₁: a1 on [0, 1/2), a2 on [1/2, 1).
    /// Test oracle field with a 1-D analytic cell solution.
    LayeredIso { a1: f64, a2: f64 },
}

/// The n(y) component of a field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NPart {
    One,
    Constant(f64),
    /// sin²(2πy₁) + cos²(2πy₂) + 2 (mean 3).
    SinCos,
    /// sin²(2πy₁) + 2 (mean 5/2).
    Layered,
    /// n1 on the (0,0)/(1,1) half-cell squares, n2 on the others.
    Checkerboard { n1: f64, n2: f64 },
    /// n = 1 inside the disk of given radius centered at (1/2, 1/2),
    /// n_out outside (mean n_out − (n_out−1)·π·radius²).
    Voids { radius: f64, n_out: f64 },
}

/// A periodic coefficient pair with its rescaling factor and bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    pub a_part: APart,
    pub n_part: NPart,
    /// Period length; evaluation maps x through y = (x/ε) mod 1.
    pub epsilon: f64,
    pub kind: FieldKind,
    pub bounds: Bounds,
}

const ROT_ANGLE: f64 = 1.0; // radians, clockwise

fn rotation_cw() -> Mat2 {
    let (s, c) = ROT_ANGLE.sin_cos();
    [[c, s], [-s, c]]
}

fn wrap(t: f64) -> f64 {
    let f = t - t.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

impl APart {
    fn eval(&self, y: [f64; 2]) -> Mat2 {
        match *self {
            APart::Identity => IDENTITY,
            APart::Constant(a) => [[a, 0.0], [0.0, a]],
            APart::SinCos => {
                let d1 = ((2.0 * std::f64::consts::PI * y[1]).sin().powi(2) + 1.0) / 3.0;
                let d2 = ((2.0 * std::f64::consts::PI * y[0]).cos().powi(2) + 1.0) / 3.0;
                [[d1, 0.0], [0.0, d2]]
            }
            APart::Rotated => {
                let a = APart::SinCos.eval(y);
                let t = rotation_cw();
                // T A Tᵀ
                let ta = [
                    [
                        t[0][0] * a[0][0] + t[0][1] * a[1][0],
                        t[0][0] * a[0][1] + t[0][1] * a[1][1],
                    ],
                    [
                        t[1][0] * a[0][0] + t[1][1] * a[1][0],
                        t[1][0] * a[0][1] + t[1][1] * a[1][1],
                    ],
                ];
                [
                    [
                        ta[0][0] * t[0][0] + ta[0][1] * t[0][1],
                        ta[0][0] * t[1][0] + ta[0][1] * t[1][1],
                    ],
                    [
                        ta[1][0] * t[0][0] + ta[1][1] * t[0][1],
                        ta[1][0] * t[1][0] + ta[1][1] * t[1][1],
                    ],
                ]
            }
            APart::Checkerboard { a1, a2 } => {
                let a = if checker_first(y) { a1 } else { a2 };
                [[a, 0.0], [0.0, a]]
            }
            APart::Voids { radius, a_out } => {
                if inside_void(y, radius) {
                    IDENTITY
                } else {
                    [[a_out, 0.0], [0.0, a_out]]
                }
            }
            APart::LayeredIso { a1, a2 } => {
                let a = if y[0] < 0.5 { a1 } else { a2 };
                [[a, 0.0], [0.0, a]]
            }
        }
    }

    fn bounds(&self) -> (f64, f64) {
        match *self {
            APart::Identity => (1.0, 1.0),
            APart::Constant(a) => (a, a),
            APart::SinCos | APart::Rotated => (1.0 / 3.0, 2.0 / 3.0),
            APart::Checkerboard { a1, a2 } => (a1.min(a2), a1.max(a2)),
            APart::Voids { a_out, .. } => (a_out.min(1.0), a_out.max(1.0)),
            APart::LayeredIso { a1, a2 } => (a1.min(a2), a1.max(a2)),
        }
    }

    fn is_constant(&self) -> bool {
        matches!(self, APart::Identity | APart::Constant(_))
    }

    fn is_piecewise(&self) -> bool {
        matches!(
            self,
            APart::Checkerboard { .. } | APart::Voids { .. } | APart::LayeredIso { .. }
        )
    }
}

impl NPart {
    fn eval(&self, y: [f64; 2]) -> f64 {
        match *self {
            NPart::One => 1.0,
            NPart::Constant(n) => n,
            NPart::SinCos => {
                (2.0 * std::f64::consts::PI * y[0]).sin().powi(2)
                    + (2.0 * std::f64::consts::PI * y[1]).cos().powi(2)
                    + 2.0
            }
            NPart::Layered => (2.0 * std::f64::consts::PI * y[0]).sin().powi(2) + 2.0,
            NPart::Checkerboard { n1, n2 } => {
                if checker_first(y) {
                    n1
                } else {
                    n2
                }
            }
            NPart::Voids { radius, n_out } => {
                if inside_void(y, radius) {
                    1.0
                } else {
                    n_out
                }
            }
        }
    }

    fn bounds(&self) -> (f64, f64) {
        match *self {
            NPart::One => (1.0, 1.0),
            NPart::Constant(n) => (n, n),
            NPart::SinCos => (2.0, 4.0),
            NPart::Layered => (2.0, 3.0),
            NPart::Checkerboard { n1, n2 } => (n1.min(n2), n1.max(n2)),
            NPart::Voids { n_out, .. } => (n_out.min(1.0), n_out.max(1.0)),
        }
    }

    fn is_constant(&self) -> bool {
        matches!(self, NPart::One | NPart::Constant(_))
    }

    fn is_piecewise(&self) -> bool {
        matches!(self, NPart::Checkerboard { .. } | NPart::Voids { .. })
    }
}

/// Lower-left / upper-right half-cell squares of the 2×2 checkerboard.
fn checker_first(y: [f64; 2]) -> bool {
    let q1 = if y[0] < 0.5 { 0 } else { 1 };
    let q2 = if y[1] < 0.5 { 0 } else { 1 };
    (q1 + q2) % 2 == 0
}

/// Strict interior of the void disk; the circle itself takes the outside value.
fn inside_void(y: [f64; 2], radius: f64) -> bool {
    let dx = y[0] - 0.5;
    let dy = y[1] - 0.5;
    dx * dx + dy * dy < radius * radius
}

impl CoefficientField {
    pub fn new(a_part: APart, n_part: NPart) -> Result<Self> {
        let (a_min, a_max) = a_part.bounds();
        let (n_min, n_max) = n_part.bounds();
        if a_min <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "A must be uniformly positive definite (a_min = {a_min})"
            )));
        }
        if n_min <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "n must be uniformly positive (n_min = {n_min})"
            )));
        }
        let kind = if a_part.is_constant() && n_part.is_constant() {
            FieldKind::Constant
        } else if a_part.is_piecewise() || n_part.is_piecewise() {
            FieldKind::PiecewiseCellwise
        } else {
            FieldKind::SmoothFormula
        };
        Ok(CoefficientField {
            a_part,
            n_part,
            epsilon: 1.0,
            kind,
            bounds: Bounds {
                a_min,
                a_max,
                n_min,
                n_max,
            },
        })
    }

    pub fn constant(a: f64, n: f64) -> Result<Self> {
        CoefficientField::new(APart::Constant(a), NPart::Constant(n))
    }

    /// Evaluate (A, n) at a point, wrapping through the period.
    pub fn evaluate(&self, p: [f64; 2]) -> (Mat2, f64) {
        let y = [wrap(p[0] / self.epsilon), wrap(p[1] / self.epsilon)];
        (self.a_part.eval(y), self.n_part.eval(y))
    }

    /// Evaluate only A.
    pub fn a_at(&self, p: [f64; 2]) -> Mat2 {
        let y = [wrap(p[0] / self.epsilon), wrap(p[1] / self.epsilon)];
        self.a_part.eval(y)
    }

    /// Evaluate only n.
    pub fn n_at(&self, p: [f64; 2]) -> f64 {
        let y = [wrap(p[0] / self.epsilon), wrap(p[1] / self.epsilon)];
        self.n_part.eval(y)
    }

    /// Field evaluating `A(x/ε), n(x/ε)`. Bounds are unchanged. The factor
    /// composes: rescaling an ε-field by ε' yields period ε·ε'.
    pub fn rescale(&self, epsilon: f64) -> Result<Self> {
        if epsilon <= 0.0 || !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "rescale needs epsilon > 0, got {epsilon}"
            )));
        }
        let mut f = self.clone();
        f.epsilon = self.epsilon * epsilon;
        Ok(f)
    }

    /// True when A ≡ I.
    pub fn a_is_identity(&self) -> bool {
        matches!(self.a_part, APart::Identity) |
            matches!(self.a_part, APart::Constant(a) if a == 1.0)
    }

    /// True when n ≡ 1.
    pub fn n_is_one(&self) -> bool {
        matches!(self.n_part, NPart::One) | matches!(self.n_part, NPart::Constant(n) if n == 1.0)
    }

    /// Mean of n over the unit cell by high-order quadrature:
    /// tensor Gauss–Legendre for smooth formulas, adaptive quadtree with
    /// exact linear-cut leaves for the piecewise presets.
    pub fn mean_n(&self) -> f64 {
        match self.n_part {
            NPart::One => 1.0,
            NPart::Constant(n) => n,
            NPart::SinCos | NPart::Layered => {
                let (nodes, weights) = gauss_legendre_01(48);
                let mut sum = 0.0;
                for (i, &x) in nodes.iter().enumerate() {
                    for (j, &y) in nodes.iter().enumerate() {
                        sum += weights[i] * weights[j] * self.n_part.eval([x, y]);
                    }
                }
                sum
            }
            NPart::Checkerboard { n1, n2 } => {
                quadtree_mean(|y| self.n_part.eval(y), &checker_classify(n1, n2), 11)
            }
            NPart::Voids { radius, n_out } => quadtree_mean(
                |y| self.n_part.eval(y),
                &void_classify(radius, 1.0, n_out),
                11,
            ),
        }
    }
}

/// Named presets; the names appear verbatim in the CLI config schema.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    Constant { a: f64, n: f64 },
    SinCosN,
    SinCosA,
    RotatedA,
    LayeredN,
    Checkerboard { a1: f64, a2: f64, n1: f64, n2: f64 },
    Voids { n_out: f64, a_out: f64 },
}

impl Preset {
    /// Default checkerboard values: A = I, n ∈ {2, 5} giving n_h = 7/2.
    pub const CHECKERBOARD_DEFAULT: Preset = Preset::Checkerboard {
        a1: 1.0,
        a2: 1.0,
        n1: 2.0,
        n2: 5.0,
    };

    /// Default voids: radius 1/4, n_out = 5, a_out = 1/2.
    pub const VOIDS_DEFAULT: Preset = Preset::Voids {
        n_out: 5.0,
        a_out: 0.5,
    };

    pub const VOID_RADIUS: f64 = 0.25;

    pub fn field(&self) -> Result<CoefficientField> {
        match *self {
            Preset::Constant { a, n } => CoefficientField::constant(a, n),
            Preset::SinCosN => CoefficientField::new(APart::Identity, NPart::SinCos),
            Preset::SinCosA => CoefficientField::new(APart::SinCos, NPart::SinCos),
            Preset::RotatedA => CoefficientField::new(APart::Rotated, NPart::Layered),
            Preset::LayeredN => CoefficientField::new(APart::Identity, NPart::Layered),
            Preset::Checkerboard { a1, a2, n1, n2 } => CoefficientField::new(
                if a1 == 1.0 && a2 == 1.0 {
                    APart::Identity
                } else {
                    APart::Checkerboard { a1, a2 }
                },
                NPart::Checkerboard { n1, n2 },
            ),
            Preset::Voids { n_out, a_out } => CoefficientField::new(
                if a_out == 1.0 {
                    APart::Identity
                } else {
                    APart::Voids {
                        radius: Preset::VOID_RADIUS,
                        a_out,
                    }
                },
                NPart::Voids {
                    radius: Preset::VOID_RADIUS,
                    n_out,
                },
            ),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Constant { .. } => "constant",
            Preset::SinCosN => "sincos-n",
            Preset::SinCosA => "sincos-A",
            Preset::RotatedA => "rotated-A",
            Preset::LayeredN => "layered-n",
            Preset::Checkerboard { .. } => "checkerboard",
            Preset::Voids { .. } => "voids",
        }
    }
}

/// Region classification of an axis-aligned cell for adaptive quadrature.
enum Region {
    Pure(f64),
    Mixed,
}

type Classifier<'a> = dyn Fn([f64; 2], f64) -> Region + 'a;

fn checker_classify(n1: f64, n2: f64) -> impl Fn([f64; 2], f64) -> Region {
    move |lo, size| {
        // pure when the cell stays within one half-cell square
        let hi = [lo[0] + size, lo[1] + size];
        let q = |a: f64, b: f64| -> Option<usize> {
            if b <= 0.5 {
                Some(0)
            } else if a >= 0.5 {
                Some(1)
            } else {
                None
            }
        };
        match (q(lo[0], hi[0]), q(lo[1], hi[1])) {
            (Some(q1), Some(q2)) => Region::Pure(if (q1 + q2) % 2 == 0 { n1 } else { n2 }),
            _ => Region::Mixed,
        }
    }
}

fn void_classify(radius: f64, inside: f64, outside: f64) -> impl Fn([f64; 2], f64) -> Region {
    move |lo, size| {
        let c = [lo[0] + 0.5 * size, lo[1] + 0.5 * size];
        let d = ((c[0] - 0.5).powi(2) + (c[1] - 0.5).powi(2)).sqrt();
        let half_diag = size * std::f64::consts::FRAC_1_SQRT_2;
        if d + half_diag < radius {
            Region::Pure(inside)
        } else if d - half_diag > radius {
            Region::Pure(outside)
        } else {
            Region::Mixed
        }
    }
}

/// Adaptive quadtree mean over the unit square. Mixed leaves at maximum
/// depth are split by the linearized interface (polygon clipping), which
/// leaves only the curvature error O(4^{-depth}).
fn quadtree_mean(
    eval: impl Fn([f64; 2]) -> f64 + Copy,
    classify: &Classifier,
    max_depth: usize,
) -> f64 {
    fn recurse(
        eval: impl Fn([f64; 2]) -> f64 + Copy,
        classify: &Classifier,
        lo: [f64; 2],
        size: f64,
        depth: usize,
    ) -> f64 {
        match classify(lo, size) {
            Region::Pure(v) => v * size * size,
            Region::Mixed if depth == 0 => leaf_mixed(eval, lo, size),
            Region::Mixed => {
                let h = 0.5 * size;
                let mut sum = 0.0;
                for dx in 0..2 {
                    for dy in 0..2 {
                        sum += recurse(
                            eval,
                            classify,
                            [lo[0] + dx as f64 * h, lo[1] + dy as f64 * h],
                            h,
                            depth - 1,
                        );
                    }
                }
                sum
            }
        }
    }
    recurse(eval, classify, [0.0, 0.0], 1.0, max_depth)
}

/// Mixed leaf: linearize the circular interface through the cell and clip.
/// Works for the void geometry; the checkerboard never reaches a mixed
/// leaf because its interfaces are dyadic lines.
fn leaf_mixed(eval: impl Fn([f64; 2]) -> f64, lo: [f64; 2], size: f64) -> f64 {
    let c = [lo[0] + 0.5 * size, lo[1] + 0.5 * size];
    let dx = c[0] - 0.5;
    let dy = c[1] - 0.5;
    let d = (dx * dx + dy * dy).sqrt();
    if d == 0.0 {
        return eval(c) * size * size;
    }
    let normal = [dx / d, dy / d];
    // sample representative inside/outside values just off the interface
    let inside_val = eval([0.5 + normal[0] * d * 0.5, 0.5 + normal[1] * d * 0.5]);
    let far = d.max(1e-9) + size; // safely outside
    let outside_val = eval([0.5 + normal[0] * far, 0.5 + normal[1] * far]);
    // half-plane normal·(p - 0.5) <= radius_effective; approximate the circle
    // by its tangent line at the nearest point: normal·p <= normal·q where q
    // is on the circle along the normal direction
    let radius_like = {
        // distance from (0.5,0.5) to the circle along normal = radius
        // the tangent line: normal·(p - center) = radius
        // recover radius from the classify geometry via eval transition:
        // find t in [0, d + size] where eval flips; bisect a few times
        let f = |t: f64| eval([0.5 + normal[0] * t, 0.5 + normal[1] * t]);
        let target = f(0.0);
        let mut a = 0.0;
        let mut b = d + size;
        if f(b) == target {
            // no transition along the ray; treat as pure
            return eval(c) * size * size;
        }
        for _ in 0..60 {
            let mid = 0.5 * (a + b);
            if f(mid) == target {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    };
    let inside_area = clip_square_halfplane(lo, size, normal, radius_like);
    inside_val * inside_area + outside_val * (size * size - inside_area)
}

/// Area of {p in square : normal·(p - (1/2,1/2)) <= offset}.
fn clip_square_halfplane(lo: [f64; 2], size: f64, normal: [f64; 2], offset: f64) -> f64 {
    let mut poly = vec![
        [lo[0], lo[1]],
        [lo[0] + size, lo[1]],
        [lo[0] + size, lo[1] + size],
        [lo[0], lo[1] + size],
    ];
    let inside = |p: [f64; 2]| normal[0] * (p[0] - 0.5) + normal[1] * (p[1] - 0.5) <= offset;
    let mut out: Vec<[f64; 2]> = Vec::with_capacity(8);
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let ia = inside(a);
        let ib = inside(b);
        if ia {
            out.push(a);
        }
        if ia != ib {
            let fa = normal[0] * (a[0] - 0.5) + normal[1] * (a[1] - 0.5) - offset;
            let fb = normal[0] * (b[0] - 0.5) + normal[1] * (b[1] - 0.5) - offset;
            let t = fa / (fa - fb);
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    poly = out;
    if poly.len() < 3 {
        return 0.0;
    }
    let mut area = 0.0;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        area += a[0] * b[1] - b[0] * a[1];
    }
    0.5 * area.abs()
}

/// Gauss–Legendre nodes/weights on [0, 1] by Newton iteration on P_n.
pub fn gauss_legendre_01(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // initial guess (Chebyshev-like)
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        nodes[n - 1 - i] = 0.5 * (x + 1.0);
        weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = pk;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd_check(a: Mat2, a_min: f64, a_max: f64) {
        assert!((a[0][1] - a[1][0]).abs() < 1e-12, "A not symmetric");
        // eigenvalues of a symmetric 2x2
        let tr = a[0][0] + a[1][1];
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        let l1 = tr / 2.0 - disc;
        let l2 = tr / 2.0 + disc;
        assert!(l1 >= a_min - 1e-10, "eigenvalue {l1} below a_min {a_min}");
        assert!(l2 <= a_max + 1e-10, "eigenvalue {l2} above a_max {a_max}");
    }

    #[test]
    fn evaluate_trivial_examples() {
        let f = CoefficientField::constant(1.0, 3.0).unwrap();
        let (a, n) = f.evaluate([0.3, 0.7]);
        assert_eq!(a, IDENTITY);
        assert_eq!(n, 3.0);

        let f = Preset::SinCosN.field().unwrap();
        let (_, n) = f.evaluate([0.25, 0.0]);
        assert!((n - 4.0).abs() < 1e-14);

        let f = Preset::SinCosA.field().unwrap();
        let (a, _) = f.evaluate([0.0, 0.25]);
        assert!((a[0][0] - 2.0 / 3.0).abs() < 1e-14);
        assert!((a[1][1] - 2.0 / 3.0).abs() < 1e-14);
        assert_eq!(a[0][1], 0.0);
    }

    #[test]
    fn rescale_definition_and_bounds() {
        let f = Preset::SinCosN.field().unwrap();
        let half = f.rescale(0.5).unwrap();
        let (_, n) = half.evaluate([0.125, 0.0]);
        assert!((n - 4.0).abs() < 1e-14);
        assert_eq!(half.bounds, f.bounds);

        let c = CoefficientField::constant(2.0, 7.0).unwrap();
        let cr = c.rescale(0.1).unwrap();
        for p in [[0.0, 0.0], [0.33, 0.91], [5.2, -1.7]] {
            assert_eq!(c.evaluate(p), cr.evaluate(p));
        }
        assert!(f.rescale(0.0).is_err());
        assert!(f.rescale(-1.0).is_err());
    }

    #[test]
    fn rescale_wrapping_idempotent() {
        // rescale(rescale(f, eps), 1) equals rescale(f, eps) pointwise
        let f = Preset::SinCosN.field().unwrap();
        let a = f.rescale(1.0 / 3.0).unwrap();
        let b = a.rescale(1.0).unwrap();
        for i in 0..17 {
            for j in 0..17 {
                let p = [i as f64 / 16.0, j as f64 / 16.0];
                let (ma, na) = a.evaluate(p);
                let (mb, nb) = b.evaluate(p);
                assert_eq!(na, nb);
                assert_eq!(ma, mb);
            }
        }
    }

    #[test]
    fn all_presets_respect_bounds_on_random_samples() {
        let presets = [
            Preset::Constant { a: 0.5, n: 1.5 },
            Preset::SinCosN,
            Preset::SinCosA,
            Preset::RotatedA,
            Preset::LayeredN,
            Preset::CHECKERBOARD_DEFAULT,
            Preset::VOIDS_DEFAULT,
        ];
        // deterministic quasi-random samples (R2 sequence)
        let g = 1.324_717_957_244_746; // plastic constant
        let (ax, ay) = (1.0 / g, 1.0 / (g * g));
        for preset in presets {
            let f = preset.field().unwrap();
            let b = f.bounds;
            let mut p = [0.5, 0.5];
            for _ in 0..10_000 {
                p = [(p[0] + ax) % 1.0, (p[1] + ay) % 1.0];
                let (a, n) = f.evaluate(p);
                spd_check(a, b.a_min, b.a_max);
                assert!(n >= b.n_min - 1e-12 && n <= b.n_max + 1e-12);
            }
        }
    }

    #[test]
    fn rotated_preset_is_similarity_of_sincos() {
        let rot = Preset::RotatedA.field().unwrap();
        let plain = Preset::SinCosA.field().unwrap();
        // eigenvalues agree pointwise (similarity transform)
        for p in [[0.1, 0.2], [0.7, 0.9], [0.45, 0.05]] {
            let (ar, _) = rot.evaluate(p);
            let (ap, _) = plain.evaluate(p);
            let tr_r = ar[0][0] + ar[1][1];
            let tr_p = ap[0][0] + ap[1][1];
            let det_r = ar[0][0] * ar[1][1] - ar[0][1] * ar[1][0];
            let det_p = ap[0][0] * ap[1][1] - ap[0][1] * ap[1][0];
            assert!((tr_r - tr_p).abs() < 1e-13);
            assert!((det_r - det_p).abs() < 1e-13);
        }
    }

    #[test]
    fn analytic_means() {
        let tol_smooth = 1e-10;
        assert!((Preset::SinCosN.field().unwrap().mean_n() - 3.0).abs() < tol_smooth);
        assert!((Preset::LayeredN.field().unwrap().mean_n() - 2.5).abs() < tol_smooth);
        assert!(
            (Preset::CHECKERBOARD_DEFAULT.field().unwrap().mean_n() - 3.5).abs() < tol_smooth
        );
        let voids = Preset::VOIDS_DEFAULT.field().unwrap();
        let exact = 5.0 - std::f64::consts::PI / 4.0;
        assert!(
            (voids.mean_n() - exact).abs() < 1e-6,
            "voids mean {} vs {}",
            voids.mean_n(),
            exact
        );
    }

    #[test]
    fn preset_field_classification() {
        assert_eq!(
            CoefficientField::constant(1.0, 2.0).unwrap().kind,
            FieldKind::Constant
        );
        assert_eq!(
            Preset::SinCosN.field().unwrap().kind,
            FieldKind::SmoothFormula
        );
        assert_eq!(
            Preset::VOIDS_DEFAULT.field().unwrap().kind,
            FieldKind::PiecewiseCellwise
        );
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre_01(8);
        // integral of t^7 over [0,1] = 1/8
        let s: f64 = x.iter().zip(&w).map(|(&t, &wi)| wi * t.powi(7)).sum();
        assert!((s - 0.125).abs() < 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
    }
}

//! Fractional-linear transformations of the Riemann sphere.
//!
//! Maps are stored as determinant-one lifts. Loxodromic maps expose their
//! attracting/repelling fixed points and the multiplier `q` with `0 < |q| < 1`,
//! related to the map by `(m(z) - a)/(m(z) - b) = q (z - a)/(z - b)`.

use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// `|q|` must stay below `1 - LOXODROMIC_MARGIN`.
pub const LOXODROMIC_MARGIN: f64 = 1e-9;

/// A point of the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    Finite(Complex64),
    Infinity,
}

impl Point {
    pub fn finite(re: f64, im: f64) -> Self {
        Point::Finite(Complex64::new(re, im))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Point::Infinity)
    }

    pub fn as_finite(&self) -> Option<Complex64> {
        match *self {
            Point::Finite(z) => Some(z),
            Point::Infinity => None,
        }
    }

    /// Chordal distance on the unit sphere; well defined at infinity.
    pub fn chordal_distance(&self, other: &Point) -> f64 {
        match (*self, *other) {
            (Point::Infinity, Point::Infinity) => 0.0,
            (Point::Finite(z), Point::Infinity) | (Point::Infinity, Point::Finite(z)) => {
                2.0 / (1.0 + z.norm_sqr()).sqrt()
            }
            (Point::Finite(z), Point::Finite(w)) => {
                2.0 * (z - w).norm() / ((1.0 + z.norm_sqr()).sqrt() * (1.0 + w.norm_sqr()).sqrt())
            }
        }
    }

    pub fn is_real(&self, tol: f64) -> bool {
        match self {
            Point::Infinity => true,
            Point::Finite(z) => z.im.abs() <= tol * (1.0 + z.re.abs()),
        }
    }
}

impl From<Complex64> for Point {
    fn from(z: Complex64) -> Self {
        Point::Finite(z)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Finite(z) => write!(f, "{}", z),
            Point::Infinity => write!(f, "inf"),
        }
    }
}

// Finite points serialize as `[re, im]`, infinity as the string "inf".
impl Serialize for Point {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Point::Finite(z) => [z.re, z.im].serialize(serializer),
            Point::Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Pair([f64; 2]),
            Tag(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Pair([re, im]) => Ok(Point::finite(re, im)),
            Repr::Tag(s) if s == "inf" || s == "infinity" => Ok(Point::Infinity),
            Repr::Tag(s) => Err(serde::de::Error::custom(format!(
                "expected [re, im] or \"inf\", got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Counterclockwise,
    Clockwise,
}

/// An oriented circle. The disk it bounds is the side to the left of the
/// orientation: the interior for counterclockwise, the exterior (containing
/// infinity) for clockwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Complex64,
    pub radius: f64,
    pub orientation: Orientation,
}

impl Circle {
    pub fn new(center: Complex64, radius: f64) -> Self {
        assert!(radius > 0.0 && radius.is_finite(), "circle radius must be positive");
        Circle {
            center,
            radius,
            orientation: Orientation::Counterclockwise,
        }
    }

    pub fn exterior(center: Complex64, radius: f64) -> Self {
        Circle {
            orientation: Orientation::Clockwise,
            ..Circle::new(center, radius)
        }
    }

    pub fn bounds_interior(&self) -> bool {
        self.orientation == Orientation::Counterclockwise
    }

    /// Point at angle `theta` (radians) on the circle.
    pub fn point_at(&self, theta: f64) -> Complex64 {
        self.center + Complex64::from_polar(self.radius, theta)
    }

    pub fn sample(&self, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|k| self.point_at(std::f64::consts::TAU * (k as f64 + 0.25) / n as f64))
            .collect()
    }

    /// Signed distance of `p` into the disk; positive inside.
    pub fn depth(&self, p: &Point) -> f64 {
        match (p, self.bounds_interior()) {
            (Point::Infinity, true) => f64::NEG_INFINITY,
            (Point::Infinity, false) => f64::INFINITY,
            (Point::Finite(z), true) => self.radius - (z - self.center).norm(),
            (Point::Finite(z), false) => (z - self.center).norm() - self.radius,
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.depth(p) > 0.0
    }

    /// Distance from `z` to the circle itself.
    pub fn distance_to_boundary(&self, z: Complex64) -> f64 {
        ((z - self.center).norm() - self.radius).abs()
    }

    /// Gap between the two closed disks; negative when they intersect.
    pub fn disk_gap(&self, other: &Circle) -> f64 {
        let dist = (self.center - other.center).norm();
        match (self.bounds_interior(), other.bounds_interior()) {
            (true, true) => dist - self.radius - other.radius,
            (true, false) => other.radius - dist - self.radius,
            (false, true) => self.radius - dist - other.radius,
            // two exterior disks both contain infinity
            (false, false) => f64::NEG_INFINITY,
        }
    }
}

/// A Moebius map stored as a determinant-one matrix `((a, b), (c, d))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MoebiusMap {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
}

/// Square root with nonnegative real part; ties broken toward nonnegative
/// imaginary part.
fn canonical_sqrt(z: Complex64) -> Complex64 {
    let s = z.sqrt();
    if s.re < 0.0 || (s.re == 0.0 && s.im < 0.0) {
        -s
    } else {
        s
    }
}

impl MoebiusMap {
    /// Builds the map from any invertible matrix, rescaling to determinant one.
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let det = a * d - b * c;
        let scale = a.norm().max(b.norm()).max(c.norm()).max(d.norm());
        if !det.is_finite() || scale == 0.0 || det.norm() < 1e-200 * scale * scale
        {
            return Err(Error::DegenerateFixedPoints(
                "matrix is singular".to_string(),
            ));
        }
        let k = canonical_sqrt(det).inv();
        Ok(MoebiusMap {
            a: a * k,
            b: b * k,
            c: c * k,
            d: d * k,
        })
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn identity() -> Self {
        MoebiusMap {
            a: Complex64::one(),
            b: Complex64::zero(),
            c: Complex64::zero(),
            d: Complex64::one(),
        }
    }

    /// `z -> q z`.
    pub fn scaling(q: Complex64) -> Result<Self> {
        Self::new(q, Complex64::zero(), Complex64::zero(), Complex64::one())
    }

    /// The loxodromic map with attracting fixed point `alpha`, repelling
    /// fixed point `beta` and multiplier `q`, i.e. `V diag(1, q) V^{-1}` with
    /// `V = ((alpha, beta), (1, 1))`.
    pub fn from_fixed_points(alpha: Point, beta: Point, q: Complex64) -> Result<Self> {
        if alpha.chordal_distance(&beta) < 1e-12 {
            return Err(Error::DegenerateFixedPoints(format!("{alpha} and {beta}")));
        }
        let modulus = q.norm();
        if !(modulus > 0.0 && modulus < 1.0 - LOXODROMIC_MARGIN) {
            return Err(Error::NotLoxodromic { modulus });
        }
        let one = Complex64::one();
        let zero = Complex64::zero();
        match (alpha, beta) {
            (Point::Finite(al), Point::Finite(be)) => {
                let s = (al - be).inv();
                Self::new(
                    (al - q * be) * s,
                    (q - one) * al * be * s,
                    (one - q) * s,
                    (q * al - be) * s,
                )
            }
            // z -> q z + alpha (1 - q)
            (Point::Finite(al), Point::Infinity) => Self::new(q, al * (one - q), zero, one),
            // z -> beta + (z - beta) / q
            (Point::Infinity, Point::Finite(be)) => Self::new(one, be * (q - one), zero, q),
            (Point::Infinity, Point::Infinity) => unreachable!("checked distinct above"),
        }
    }

    /// The map sending `z1, z2, z3` to `0, 1, infinity`.
    pub fn through_three_points(z1: Point, z2: Point, z3: Point) -> Result<Self> {
        let one = Complex64::one();
        let zero = Complex64::zero();
        match (z1, z2, z3) {
            (Point::Infinity, Point::Finite(b), Point::Finite(c)) => Self::new(zero, -(b - c), -one, c),
            (Point::Finite(a), Point::Infinity, Point::Finite(c)) => Self::new(one, -a, one, -c),
            (Point::Finite(a), Point::Finite(b), Point::Infinity) => Self::new(-one, a, zero, -(b - a)),
            (Point::Finite(a), Point::Finite(b), Point::Finite(c)) => {
                Self::new(b - c, -a * (b - c), b - a, -c * (b - a))
            }
            _ => Err(Error::DegenerateFixedPoints(
                "three-point normalization needs distinct points".to_string(),
            )),
        }
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }
    pub fn b(&self) -> Complex64 {
        self.b
    }
    pub fn c(&self) -> Complex64 {
        self.c
    }
    pub fn d(&self) -> Complex64 {
        self.d
    }

    pub fn trace(&self) -> Complex64 {
        self.a + self.d
    }

    /// Trace of `self ∘ other` without forming the product.
    #[inline]
    pub fn trace_of_product(&self, other: &MoebiusMap) -> Complex64 {
        self.a * other.a + self.b * other.c + self.c * other.b + self.d * other.d
    }

    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn inverse(&self) -> Self {
        MoebiusMap {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    /// `self ∘ other`. Both factors have determinant one, so the product
    /// does too up to rounding; recomputing it would cancel catastrophically
    /// for long words.
    pub fn compose(&self, other: &MoebiusMap) -> Self {
        MoebiusMap {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    pub fn conjugate_by(&self, n: &MoebiusMap) -> Self {
        n.compose(self).compose(&n.inverse())
    }

    pub fn power(&self, k: u32) -> Self {
        (0..k).fold(MoebiusMap::identity(), |acc, _| acc.compose(self))
    }

    pub fn apply(&self, p: Point) -> Point {
        match p {
            Point::Infinity => {
                if self.c == Complex64::zero() {
                    Point::Infinity
                } else {
                    Point::Finite(self.a / self.c)
                }
            }
            Point::Finite(z) => {
                let den = self.c * z + self.d;
                if den == Complex64::zero() {
                    Point::Infinity
                } else {
                    Point::Finite((self.a * z + self.b) / den)
                }
            }
        }
    }

    /// Applies the map to a finite point known not to be the pole.
    #[inline]
    pub fn apply_finite(&self, z: Complex64) -> Complex64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    /// Derivative `1 / (c z + d)^2` at a finite point.
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let den = self.c * z + self.d;
        (den * den).inv()
    }

    pub fn max_entry_distance(&self, other: &MoebiusMap) -> f64 {
        let direct = self
            .entries()
            .iter()
            .zip(other.entries().iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        let flipped = self
            .entries()
            .iter()
            .zip(other.entries().iter())
            .map(|(x, y)| (x + y).norm())
            .fold(0.0, f64::max);
        direct.min(flipped)
    }

    /// Equality as elements of PSL2: entries agree up to a common sign.
    pub fn approx_eq(&self, other: &MoebiusMap, tol: f64) -> bool {
        self.max_entry_distance(other) < tol
    }

    /// The multiplier with `|q| < 1`, from `q + 1/q + 2 = trace^2`.
    pub fn multiplier(&self) -> Result<Complex64> {
        let t = self.trace();
        multiplier_from_trace_squared(t * t)
    }

    /// Attracting and repelling fixed points.
    pub fn fixed_points(&self) -> Result<(Point, Point)> {
        // checks loxodromicity
        self.multiplier()?;
        let t = self.trace();
        let disc = (t * t - 4.0).sqrt();
        let l1 = (t + disc) * 0.5;
        let l2 = (t - disc) * 0.5;
        let (big, small) = if l1.norm() >= l2.norm() { (l1, l2) } else { (l2, l1) };
        Ok((self.eigen_point(big), self.eigen_point(small)))
    }

    /// Projective point of the eigenvector for `lambda`.
    fn eigen_point(&self, lambda: Complex64) -> Point {
        let u = (self.b, lambda - self.a);
        let v = (lambda - self.d, self.c);
        let nu = u.0.norm_sqr() + u.1.norm_sqr();
        let nv = v.0.norm_sqr() + v.1.norm_sqr();
        let (num, den) = if nu >= nv { u } else { v };
        if den.norm() <= 1e-15 * num.norm() {
            Point::Infinity
        } else {
            Point::Finite(num / den)
        }
    }

    /// The circle `|c z + d| = 1`.
    pub fn isometric_circle(&self) -> Result<Circle> {
        let scale = self.a.norm().max(self.d.norm()).max(1.0);
        if self.c.norm() <= 1e-14 * scale {
            return Err(Error::FixesInfinity);
        }
        Ok(Circle::new(-self.d / self.c, 1.0 / self.c.norm()))
    }

    /// Image of an oriented circle. `None` if the image is a line (the
    /// circle passes through the pole of the map).
    pub fn map_circle(&self, circle: &Circle) -> Option<Circle> {
        let pts: Vec<Point> = (0..3)
            .map(|k| self.apply(Point::Finite(circle.point_at(std::f64::consts::TAU * k as f64 / 3.0))))
            .collect();
        let zs: Vec<Complex64> = pts.iter().map(|p| p.as_finite()).collect::<Option<_>>()?;
        let (center, radius) = circumcircle(zs[0], zs[1], zs[2])?;
        // The disk side follows the image of a point inside the original disk.
        let inside = match circle.orientation {
            Orientation::Counterclockwise => Point::Finite(circle.center),
            Orientation::Clockwise => Point::Infinity,
        };
        let orientation = match self.apply(inside) {
            Point::Infinity => Orientation::Clockwise,
            Point::Finite(w) => {
                if (w - center).norm() < radius {
                    Orientation::Counterclockwise
                } else {
                    Orientation::Clockwise
                }
            }
        };
        Some(Circle {
            center,
            radius,
            orientation,
        })
    }
}

/// Solves `q + 1/q + 2 = t2` for the root with `|q| < 1`.
pub fn multiplier_from_trace_squared(t2: Complex64) -> Result<Complex64> {
    let u = t2 - 2.0;
    if u.norm_sqr() > 1e10 {
        // q = 1/(u - q); two fixed-point steps leave a relative error
        // of order |q|^4 < 1e-20
        let q0 = u.inv();
        return Ok((u - (u - q0).inv()).inv());
    }
    let s = (u * u - 4.0).sqrt();
    // larger root Q of Q^2 - u Q + 1 = 0 without cancellation; q = 1/Q
    let big = if (u + s).norm() >= (u - s).norm() { (u + s) * 0.5 } else { (u - s) * 0.5 };
    let q = big.inv();
    let modulus = q.norm();
    if !modulus.is_finite() || modulus >= 1.0 - LOXODROMIC_MARGIN || modulus == 0.0 {
        return Err(Error::NotLoxodromic { modulus });
    }
    Ok(q)
}

fn circumcircle(z1: Complex64, z2: Complex64, z3: Complex64) -> Option<(Complex64, f64)> {
    let w = (z3 - z1) / (z2 - z1);
    if !w.is_finite() || w.im.abs() < 1e-14 * w.norm().max(1.0) {
        return None;
    }
    // center relative to z1: (z2 - z1) * (w - |w|^2) / (w - conj(w))
    let c = (z2 - z1) * (w - w.norm_sqr()) / (w - w.conj()) + z1;
    Some((c, (z1 - c).norm()))
}

impl Mul for MoebiusMap {
    type Output = MoebiusMap;
    fn mul(self, rhs: MoebiusMap) -> MoebiusMap {
        self.compose(&rhs)
    }
}

impl fmt::Display for MoebiusMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(({}, {}), ({}, {}))", self.a, self.b, self.c, self.d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(p: Point, q: Point, tol: f64) -> bool {
        p.chordal_distance(&q) < tol
    }

    #[test]
    fn compose_with_identity_and_inverse() {
        let m = MoebiusMap::new(c(1.0, 2.0), c(0.5, 0.0), c(-0.3, 0.1), c(2.0, -1.0)).unwrap();
        assert!(MoebiusMap::identity().compose(&m).approx_eq(&m, 1e-14));
        assert!(m.compose(&m.inverse()).approx_eq(&MoebiusMap::identity(), 1e-12));
    }

    #[test]
    fn compose_hand_product() {
        let m1 = MoebiusMap::from_real(1.0, 1.0, 0.0, 1.0).unwrap();
        let m2 = MoebiusMap::from_real(1.0, 0.0, 1.0, 1.0).unwrap();
        let expected = MoebiusMap::from_real(2.0, 1.0, 1.0, 1.0).unwrap();
        assert!((m1 * m2).approx_eq(&expected, 1e-15));
        assert!(((m1 * m2).determinant() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn diagonal_map_fixed_points() {
        let m = MoebiusMap::scaling(c(0.3, 0.1)).unwrap();
        let (a, b) = m.fixed_points().unwrap();
        assert!(close(a, Point::finite(0.0, 0.0), 1e-14));
        assert_eq!(b, Point::Infinity);
        assert!((m.multiplier().unwrap() - c(0.3, 0.1)).norm() < 1e-14);
    }

    #[test]
    fn conjugated_fixed_points() {
        let m = MoebiusMap::scaling(c(0.2, -0.05)).unwrap();
        let n = MoebiusMap::new(c(1.0, 0.5), c(2.0, 0.0), c(0.3, -0.2), c(1.0, 1.0)).unwrap();
        let (a, b) = m.conjugate_by(&n).fixed_points().unwrap();
        assert!(close(a, n.apply(Point::finite(0.0, 0.0)), 1e-10));
        assert!(close(b, n.apply(Point::Infinity), 1e-10));
    }

    #[test]
    fn real_matrix_multiplier_and_fixed_points() {
        let m = MoebiusMap::from_real(2.0, 1.0, 1.0, 1.0).unwrap();
        let q = m.multiplier().unwrap();
        let expected = (7.0 - 3.0 * 5f64.sqrt()) / 2.0;
        assert!((q - expected).norm() < 1e-14);
        assert!((expected - 0.145898).abs() < 1e-6);
        // eigenvector oracle: m fixes z where z^2 - z - 1 = 0; the point with
        // |c z + d| > 1 is attracting.
        let r1 = (1.0 + 5f64.sqrt()) / 2.0;
        let r2 = (1.0 - 5f64.sqrt()) / 2.0;
        let (a, b) = m.fixed_points().unwrap();
        assert!(close(a, Point::finite(r1, 0.0), 1e-12));
        assert!(close(b, Point::finite(r2, 0.0), 1e-12));
        assert!(m.derivative(c(r1, 0.0)).norm() < 1.0);
        assert!(m.derivative(c(r2, 0.0)).norm() > 1.0);
    }

    #[test]
    fn inverse_has_same_multiplier() {
        let m = MoebiusMap::from_fixed_points(Point::finite(0.2, 1.0), Point::finite(-1.0, 0.0), c(0.1, 0.3))
            .unwrap();
        let q = m.multiplier().unwrap();
        let qi = m.inverse().multiplier().unwrap();
        assert!((q - qi).norm() < 1e-12);
        let (a, b) = m.fixed_points().unwrap();
        let (ai, bi) = m.inverse().fixed_points().unwrap();
        assert!(close(a, bi, 1e-12) && close(b, ai, 1e-12));
    }

    #[test]
    fn from_fixed_points_round_trips() {
        let cases = [
            (Point::finite(0.0, 0.0), Point::Infinity, c(0.4, 0.0)),
            (Point::finite(0.0, 0.0), Point::finite(1.0, 0.0), c(0.1, 0.0)),
            (Point::finite(0.0, 1.0), Point::finite(0.0, -1.0), c(0.2, 0.1)),
            (Point::Infinity, Point::finite(2.0, 1.0), c(-0.3, 0.2)),
            (Point::finite(3.0, -1.0), Point::Infinity, c(0.01, -0.02)),
        ];
        for (alpha, beta, q) in cases {
            let m = MoebiusMap::from_fixed_points(alpha, beta, q).unwrap();
            let (a, b) = m.fixed_points().unwrap();
            assert!(close(a, alpha, 1e-12), "{a} vs {alpha}");
            assert!(close(b, beta, 1e-12), "{b} vs {beta}");
            assert!((m.multiplier().unwrap() - q).norm() < 1e-12);
        }
        let m = MoebiusMap::from_fixed_points(Point::finite(0.0, 0.0), Point::Infinity, c(0.25, 0.0)).unwrap();
        assert!(m.approx_eq(&MoebiusMap::scaling(c(0.25, 0.0)).unwrap(), 1e-15));
    }

    #[test]
    fn degenerate_and_non_loxodromic_inputs() {
        let p = Point::finite(1.0, 1.0);
        assert!(matches!(
            MoebiusMap::from_fixed_points(p, p, c(0.1, 0.0)),
            Err(Error::DegenerateFixedPoints(_))
        ));
        // rotation: elliptic
        let rot = MoebiusMap::new(c(0.0, 1.0), Complex64::zero(), Complex64::zero(), c(0.0, -1.0)).unwrap();
        assert!(matches!(rot.multiplier(), Err(Error::NotLoxodromic { .. })));
        // parabolic
        let par = MoebiusMap::from_real(1.0, 1.0, 0.0, 1.0).unwrap();
        assert!(matches!(par.fixed_points(), Err(Error::NotLoxodromic { .. })));
        // |q| just inside the unit circle is rejected
        let near = MoebiusMap::scaling(c(1.0 - 1e-10, 0.0)).unwrap();
        assert!(near.multiplier().is_err());
    }

    #[test]
    fn isometric_circle_of_inversion() {
        let m = MoebiusMap::from_real(0.0, -1.0, 1.0, 0.0).unwrap();
        let circle = m.isometric_circle().unwrap();
        assert!(circle.center.norm() < 1e-15);
        assert!((circle.radius - 1.0).abs() < 1e-15);
        assert_eq!(
            MoebiusMap::scaling(c(0.5, 0.0)).unwrap().isometric_circle(),
            Err(Error::FixesInfinity)
        );
    }

    #[test]
    fn isometric_circle_mapping_property() {
        let m = MoebiusMap::from_fixed_points(Point::finite(1.0, 0.5), Point::finite(-1.0, 0.2), c(0.05, 0.02))
            .unwrap();
        let src = m.isometric_circle().unwrap();
        let dst = m.inverse().isometric_circle().unwrap();
        for z in src.sample(16) {
            let w = m.apply_finite(z);
            assert!(dst.distance_to_boundary(w) < 1e-10);
            // |m'| = 1 on the isometric circle
            assert!((m.derivative(z).norm() - 1.0).abs() < 1e-10);
        }
        // exterior goes to interior
        let outside = src.center + Complex64::new(src.radius * 3.0, 0.0);
        assert!(dst.contains(&Point::Finite(m.apply_finite(outside))));
        assert!(dst.contains(&m.apply(Point::Infinity)));
    }

    #[test]
    fn map_circle_tracks_disk_side() {
        let m = MoebiusMap::from_real(0.0, 1.0, 1.0, 0.0).unwrap(); // z -> 1/z
        let unit = Circle::new(Complex64::new(2.0, 0.0), 1.0);
        let img = m.map_circle(&unit).unwrap();
        // the disk |z-2|<1 maps to the disk |w-2/3|<1/3
        assert!((img.center - Complex64::new(2.0 / 3.0, 0.0)).norm() < 1e-12);
        assert!((img.radius - 1.0 / 3.0).abs() < 1e-12);
        assert!(img.bounds_interior());
        let around_origin = Circle::new(Complex64::zero(), 0.5);
        let img = m.map_circle(&around_origin).unwrap();
        assert_eq!(img.orientation, Orientation::Clockwise);
        assert!((img.radius - 2.0).abs() < 1e-12);
    }

    #[test]
    fn point_serde_forms() {
        let p: Point = serde_json_like("[1.5, -2.0]");
        assert_eq!(p, Point::finite(1.5, -2.0));
        let q: Point = serde_json_like("\"inf\"");
        assert_eq!(q, Point::Infinity);
    }

    // Tiny JSON reader for the two shapes above; keeps serde_json out of the
    // library's dependency list.
    fn serde_json_like(s: &str) -> Point {
        use serde::de::value::{SeqDeserializer, StrDeserializer};
        use serde::de::IntoDeserializer;
        let s = s.trim();
        if let Some(inner) = s.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
            let xs: Vec<f64> = inner.split(',').map(|x| x.trim().parse().unwrap()).collect();
            let de: SeqDeserializer<_, serde::de::value::Error> = SeqDeserializer::new(xs.into_iter());
            Point::deserialize(de).unwrap()
        } else {
            let tag = s.trim_matches('"');
            let de: StrDeserializer<serde::de::value::Error> = tag.into_deserializer();
            Point::deserialize(de).unwrap()
        }
    }
}

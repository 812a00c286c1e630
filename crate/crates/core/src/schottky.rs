//! Marked Schottky groups.
//!
//! Generator `i` (1-based) is loxodromic with attracting fixed point
//! `alpha_i`, repelling fixed point `alpha_{-i}` and multiplier `q_i`. The
//! fundamental circles are indexed by signed letters: `C_i` bounds the disk
//! `D_i` around `alpha_i`, and `gamma_i` maps the complement of `D_{-i}` onto
//! the closure of `D_i`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freegroup::{self, ConjClass, ReducedWord};
use crate::moebius::{Circle, MoebiusMap, Point};

/// Boundary samples used for the mapping-condition check.
pub const CIRCLE_SAMPLES: usize = 32;
/// Tolerance of the mapping-condition check, relative to the target radius.
pub const CIRCLE_TOLERANCE: f64 = 1e-9;
/// Grid size of the radius search for the concentric pair.
pub const RADIUS_GRID: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GeneratorSpec {
    Matrix { matrix: [[Complex64; 2]; 2] },
    FixedPoints { alpha: Point, beta: Point, q: Complex64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub generators: Vec<GeneratorSpec>,
    /// Circles `[C_1, C_-1, C_2, C_-2, ...]`; computed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circles: Option<Vec<Circle>>,
    /// Fail with `CirclesOverlap`/`NoValidRadius` instead of reporting.
    #[serde(default)]
    pub strict: bool,
    /// Require a real (Fuchsian) group.
    #[serde(default)]
    pub real: bool,
}

impl GroupSpec {
    pub fn from_fixed_points(gens: &[(Point, Point, Complex64)]) -> Self {
        GroupSpec {
            generators: gens
                .iter()
                .map(|&(alpha, beta, q)| GeneratorSpec::FixedPoints { alpha, beta, q })
                .collect(),
            circles: None,
            strict: false,
            real: false,
        }
    }

    pub fn strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    pub fn genus(&self) -> usize {
        self.generators.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Generator {
    pub map: MoebiusMap,
    pub attracting: Point,
    pub repelling: Point,
    pub multiplier: Complex64,
}

/// Fundamental circles with their validity report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CircleSet {
    /// `[C_1, C_-1, C_2, C_-2, ...]`
    pub circles: Vec<Circle>,
    /// Smallest gap between two of the closed disks; negative on overlap.
    pub margin: f64,
    /// Largest relative deviation of `gamma_i(C_-i)` from `C_i`.
    pub mapping_residual: f64,
    /// Every generator sends a point outside `D_-i` into `D_i`.
    pub sides_ok: bool,
    /// Every fixed point lies in its own disk.
    pub fixed_points_inside: bool,
}

impl CircleSet {
    pub fn get(&self, letter: i32) -> &Circle {
        &self.circles[circle_index(letter)]
    }

    pub fn is_valid(&self) -> bool {
        self.margin > 0.0 && self.mapping_residual < CIRCLE_TOLERANCE && self.sides_ok && self.fixed_points_inside
    }
}

#[inline]
pub fn circle_index(letter: i32) -> usize {
    freegroup::letter_key(letter) as usize
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchottkyGroup {
    generators: Vec<Generator>,
    circles: Option<CircleSet>,
    circle_error: Option<String>,
    is_real: bool,
}

fn fixed_points_from_spec(g: &GeneratorSpec) -> Result<(Point, Point, Complex64)> {
    match *g {
        GeneratorSpec::FixedPoints { alpha, beta, q } => Ok((alpha, beta, q)),
        GeneratorSpec::Matrix { matrix } => {
            let m = MoebiusMap::new(matrix[0][0], matrix[0][1], matrix[1][0], matrix[1][1])?;
            let (a, b) = m.fixed_points()?;
            Ok((a, b, m.multiplier()?))
        }
    }
}

impl SchottkyGroup {
    pub fn build(spec: &GroupSpec) -> Result<Self> {
        if spec.generators.is_empty() {
            return Err(Error::InvalidSpec("at least one generator is required".into()));
        }
        let mut generators = Vec::with_capacity(spec.generators.len());
        for g in &spec.generators {
            let (alpha, beta, q) = fixed_points_from_spec(g)?;
            // Rebuilding from (alpha, beta, q) keeps normalized placements exact.
            let map = match g {
                GeneratorSpec::Matrix { matrix } => {
                    MoebiusMap::new(matrix[0][0], matrix[0][1], matrix[1][0], matrix[1][1])?
                }
                GeneratorSpec::FixedPoints { .. } => MoebiusMap::from_fixed_points(alpha, beta, q)?,
            };
            generators.push(Generator {
                map,
                attracting: alpha,
                repelling: beta,
                multiplier: q,
            });
        }
        let pts: Vec<Point> = generators.iter().flat_map(|g| [g.attracting, g.repelling]).collect();
        for (i, p) in pts.iter().enumerate() {
            for r in &pts[i + 1..] {
                if p.chordal_distance(r) < 1e-10 {
                    return Err(Error::DegenerateFixedPoints(format!("{p} and {r}")));
                }
            }
        }
        let is_real = generators.iter().all(|g| {
            g.multiplier.im.abs() <= 1e-12
                && g.multiplier.re > 0.0
                && g.attracting.is_real(1e-12)
                && g.repelling.is_real(1e-12)
        });
        if spec.real && !is_real {
            return Err(Error::InvalidSpec(
                "group flagged real but multipliers or fixed points are not real".into(),
            ));
        }
        let mut group = SchottkyGroup {
            generators,
            circles: None,
            circle_error: None,
            is_real,
        };
        let circles = match &spec.circles {
            Some(cs) => {
                if cs.len() != 2 * group.genus() {
                    return Err(Error::DimensionMismatch {
                        expected: 2 * group.genus(),
                        got: cs.len(),
                    });
                }
                Ok(group.assess_circles(cs.clone()))
            }
            None => group.fundamental_circles(),
        };
        match circles {
            Ok(set) => {
                if spec.strict && !set.is_valid() {
                    return Err(Error::CirclesOverlap { margin: set.margin });
                }
                group.circles = Some(set);
            }
            Err(e) => {
                if spec.strict {
                    return Err(e);
                }
                group.circle_error = Some(e.to_string());
            }
        }
        Ok(group)
    }

    /// Convenience constructor from `(alpha, beta, q)` triples.
    pub fn from_fixed_points(gens: &[(Point, Point, Complex64)]) -> Result<Self> {
        Self::build(&GroupSpec::from_fixed_points(gens))
    }

    pub fn genus(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    /// Generator for a signed letter; negative letters give inverses.
    pub fn generator_map(&self, letter: i32) -> MoebiusMap {
        let g = &self.generators[letter.unsigned_abs() as usize - 1];
        if letter > 0 {
            g.map
        } else {
            g.map.inverse()
        }
    }

    /// Fixed point `alpha_letter`: attracting for positive letters, repelling for negative.
    pub fn fixed_point(&self, letter: i32) -> Point {
        let g = &self.generators[letter.unsigned_abs() as usize - 1];
        if letter > 0 {
            g.attracting
        } else {
            g.repelling
        }
    }

    pub fn multipliers(&self) -> Vec<Complex64> {
        self.generators.iter().map(|g| g.multiplier).collect()
    }

    pub fn is_real(&self) -> bool {
        self.is_real
    }

    pub fn circles(&self) -> Option<&CircleSet> {
        self.circles.as_ref()
    }

    pub fn require_circles(&self) -> Result<&CircleSet> {
        self.circles.as_ref().ok_or(Error::CirclesRequired)
    }

    pub fn circle_error(&self) -> Option<&str> {
        self.circle_error.as_deref()
    }

    /// The equivalent spec in fixed-point form.
    pub fn to_spec(&self) -> GroupSpec {
        GroupSpec {
            generators: self
                .generators
                .iter()
                .map(|g| GeneratorSpec::FixedPoints {
                    alpha: g.attracting,
                    beta: g.repelling,
                    q: g.multiplier,
                })
                .collect(),
            circles: None,
            strict: false,
            real: self.is_real,
        }
    }

    /// Same fixed points, multipliers scaled by `t`.
    pub fn with_scaled_multipliers(&self, t: f64) -> Result<Self> {
        let gens: Vec<(Point, Point, Complex64)> = self
            .generators
            .iter()
            .map(|g| (g.attracting, g.repelling, g.multiplier * t))
            .collect();
        Self::from_fixed_points(&gens)
    }

    /// Same group with generators permuted: generator `k` of the result is
    /// generator `order[k]` (1-based) of `self`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let gens: Vec<(Point, Point, Complex64)> = order
            .iter()
            .map(|&i| {
                let g = &self.generators[i - 1];
                (g.attracting, g.repelling, g.multiplier)
            })
            .collect();
        Self::from_fixed_points(&gens)
    }

    /// Conjugates so that `alpha_1 = 0`, `alpha_-1 = inf` and (for g >= 2)
    /// `alpha_2 = 1`. Returns the conjugating map `N` (new generators are
    /// `N gamma_i N^{-1}`).
    pub fn normalize(&self) -> Result<(SchottkyGroup, MoebiusMap)> {
        let a1 = self.fixed_point(1);
        let b1 = self.fixed_point(-1);
        let n = if self.genus() >= 2 {
            MoebiusMap::through_three_points(a1, self.fixed_point(2), b1)?
        } else {
            match (a1, b1) {
                (Point::Finite(a), Point::Finite(b)) => {
                    MoebiusMap::new(1.0.into(), -a, 1.0.into(), -b)?
                }
                (Point::Finite(a), Point::Infinity) => {
                    MoebiusMap::new(1.0.into(), -a, 0.0.into(), 1.0.into())?
                }
                (Point::Infinity, Point::Finite(b)) => {
                    MoebiusMap::new(0.0.into(), 1.0.into(), 1.0.into(), -b)?
                }
                _ => unreachable!("fixed points are distinct"),
            }
        };
        let mut gens = Vec::with_capacity(self.genus());
        for (idx, g) in self.generators.iter().enumerate() {
            let mut alpha = n.apply(g.attracting);
            let mut beta = n.apply(g.repelling);
            // pin the normalized points exactly
            if idx == 0 {
                alpha = Point::finite(0.0, 0.0);
                beta = Point::Infinity;
            } else if idx == 1 {
                alpha = Point::finite(1.0, 0.0);
            }
            if let (Point::Finite(z), true) = (&mut beta, self.is_real) {
                z.im = 0.0;
            }
            if let (Point::Finite(z), true) = (&mut alpha, self.is_real) {
                z.im = 0.0;
            }
            gens.push((alpha, beta, g.multiplier));
        }
        let spec = GroupSpec {
            real: false,
            ..GroupSpec::from_fixed_points(&gens)
        };
        Ok((SchottkyGroup::build(&spec)?, n))
    }

    pub fn is_normalized(&self) -> bool {
        let zero = Point::finite(0.0, 0.0);
        let one = Point::finite(1.0, 0.0);
        self.fixed_point(1).chordal_distance(&zero) < 1e-12
            && self.fixed_point(-1) == Point::Infinity
            && (self.genus() < 2 || self.fixed_point(2).chordal_distance(&one) < 1e-12)
    }

    pub fn evaluate_word(&self, w: &ReducedWord) -> MoebiusMap {
        self.evaluate_letters(w.letters())
    }

    pub fn evaluate_letters(&self, letters: &[i32]) -> MoebiusMap {
        letters
            .iter()
            .fold(MoebiusMap::identity(), |acc, &x| acc.compose(&self.generator_map(x)))
    }

    pub fn class_multiplier(&self, c: &ConjClass) -> Result<Complex64> {
        self.evaluate_word(c.rep()).multiplier()
    }

    /// Builds the fundamental circles: isometric circles, or a concentric
    /// pair around `0` for a generator fixing `{0, inf}`.
    pub fn fundamental_circles(&self) -> Result<CircleSet> {
        let g = self.genus();
        let mut circles: Vec<Option<Circle>> = vec![None; 2 * g];
        let mut concentric: Option<usize> = None;
        for (idx, gen) in self.generators.iter().enumerate() {
            let i = idx as i32 + 1;
            match gen.map.inverse().isometric_circle() {
                Ok(ci) => {
                    circles[circle_index(i)] = Some(ci);
                    circles[circle_index(-i)] = Some(gen.map.isometric_circle()?);
                }
                Err(Error::FixesInfinity) => {
                    let zero = Point::finite(0.0, 0.0);
                    let fixes_origin = gen.attracting.chordal_distance(&zero) < 1e-14
                        && gen.repelling == Point::Infinity;
                    if !fixes_origin || concentric.is_some() {
                        return Err(Error::NoValidRadius);
                    }
                    concentric = Some(idx);
                }
                Err(e) => return Err(e),
            }
        }
        let Some(idx) = concentric else {
            let set = circles.into_iter().map(|c| c.expect("filled")).collect();
            return Ok(self.assess_circles(set));
        };
        // Radius search on a geometric grid between |q| and 1; keep the
        // candidate with the largest disjointness margin.
        let i = idx as i32 + 1;
        let qabs = self.generators[idx].multiplier.norm();
        let mut best: Option<CircleSet> = None;
        for step in 0..RADIUS_GRID {
            let frac = (step as f64 + 0.5) / RADIUS_GRID as f64;
            let r = qabs.powf(1.0 - frac);
            let mut trial = circles.clone();
            trial[circle_index(i)] = Some(Circle::new(Complex64::new(0.0, 0.0), r));
            trial[circle_index(-i)] = Some(Circle::exterior(Complex64::new(0.0, 0.0), r / qabs));
            let set = self.assess_circles(trial.into_iter().map(|c| c.expect("filled")).collect());
            if best.as_ref().map_or(true, |b| set.margin > b.margin) {
                best = Some(set);
            }
        }
        let best = best.expect("grid is nonempty");
        if best.margin <= 0.0 {
            return Err(Error::NoValidRadius);
        }
        Ok(best)
    }

    fn assess_circles(&self, circles: Vec<Circle>) -> CircleSet {
        let mut margin = f64::INFINITY;
        for a in 0..circles.len() {
            for b in a + 1..circles.len() {
                margin = margin.min(circles[a].disk_gap(&circles[b]));
            }
        }
        let mut residual: f64 = 0.0;
        let mut sides_ok = true;
        let mut inside = true;
        for idx in 0..self.genus() {
            let i = idx as i32 + 1;
            let map = self.generator_map(i);
            let src = &circles[circle_index(-i)];
            let dst = &circles[circle_index(i)];
            for z in src.sample(CIRCLE_SAMPLES) {
                match map.apply(Point::Finite(z)) {
                    Point::Finite(w) => residual = residual.max(dst.distance_to_boundary(w) / dst.radius),
                    Point::Infinity => residual = f64::INFINITY,
                }
            }
            // a point just outside D_-i must land in D_i
            let probe = if src.bounds_interior() {
                src.center + Complex64::new(src.radius * 1.5, 0.0)
            } else {
                src.center + Complex64::new(src.radius / 1.5, 0.0)
            };
            sides_ok &= dst.contains(&map.apply(Point::Finite(probe)));
            inside &= dst.contains(&self.fixed_point(i)) && src.contains(&self.fixed_point(-i));
        }
        CircleSet {
            circles,
            margin,
            mapping_residual: residual,
            sides_ok,
            fixed_points_inside: inside,
        }
    }

    /// Heuristic estimate of the exponent of convergence.
    ///
    /// Nested disks `D_w = w'(D_last)` are generated for reduced words up to
    /// `max_len`; for each trial exponent `s` the growth rate of
    /// `Z_l(s) = sum_{|w| = l} radius(D_w)^s` is fitted by least squares over
    /// `l = 2..=max_len`, and the estimate is the `s` where the fitted slope
    /// of `log Z_l(s)` crosses zero.
    pub fn delta_estimate(&self, max_len: usize) -> Result<f64> {
        let set = self.require_circles()?;
        if max_len < 3 {
            return Err(Error::FitFailed("need max_len >= 3".into()));
        }
        let log_radii: Vec<Vec<f64>> = self
            .nested_radii(set, max_len)
            .into_iter()
            .map(|rs| rs.into_iter().map(f64::ln).collect())
            .collect();
        let slope = |s: f64| -> f64 {
            let pts: Vec<(f64, f64)> = log_radii
                .iter()
                .enumerate()
                .skip(1)
                .map(|(l, lr)| {
                    let z: f64 = lr.iter().map(|x| (s * x).exp()).sum();
                    ((l + 1) as f64, z.ln())
                })
                .collect();
            least_squares_slope(&pts)
        };
        // slope is decreasing in s; bracket the root on [0, 2]
        let (mut lo, mut hi) = (0.0, 2.0);
        if slope(lo) <= 0.0 {
            return Ok(0.0);
        }
        if slope(hi) > 0.0 {
            return Ok(hi);
        }
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if slope(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Chordal diameters of nested disks by word length (index 0 = length 1).
    /// The spherical metric keeps disks accumulating at infinity small.
    fn nested_radii(&self, set: &CircleSet, max_len: usize) -> Vec<Vec<f64>> {
        let alpha = freegroup::alphabet(self.genus());
        let mut out: Vec<Vec<f64>> = vec![Vec::new(); max_len];
        // (first letter of the word, map of all but the last letter, last letter)
        let mut frontier: Vec<(MoebiusMap, i32)> = alpha.iter().map(|&x| (MoebiusMap::identity(), x)).collect();
        for (level, bucket) in out.iter_mut().enumerate() {
            for (prefix, last) in &frontier {
                let disk = set.get(*last);
                if let Some(img) = prefix.map_circle(disk) {
                    bucket.push(spherical_diameter(&img));
                }
            }
            if level + 1 == max_len {
                break;
            }
            let mut next = Vec::with_capacity(frontier.len() * (alpha.len() - 1));
            for (prefix, last) in &frontier {
                let p = prefix.compose(&self.generator_map(*last));
                for &x in &alpha {
                    if x != -*last {
                        next.push((p, x));
                    }
                }
            }
            frontier = next;
        }
        out
    }
}

/// Chordal distance between the two points of `c` on the line through `0`
/// and its center; by symmetry these are diametrically opposite on the sphere.
fn spherical_diameter(c: &Circle) -> f64 {
    let dir = if c.center.norm() > 0.0 { c.center / c.center.norm() } else { Complex64::new(1.0, 0.0) };
    let a = Point::Finite(c.center + dir * c.radius);
    let b = Point::Finite(c.center - dir * c.radius);
    a.chordal_distance(&b)
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freegroup::{enumerate_classes, reduce};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn genus_two() -> SchottkyGroup {
        SchottkyGroup::from_fixed_points(&[
            (Point::finite(0.0, 0.0), Point::Infinity, c(0.05, 0.0)),
            (Point::finite(1.0, 0.0), Point::finite(2.0, 0.0), c(0.03, 0.0)),
        ])
        .unwrap()
    }

    fn generic_genus_two() -> SchottkyGroup {
        SchottkyGroup::from_fixed_points(&[
            (Point::finite(-1.5, 0.2), Point::finite(1.5, -0.1), c(0.02, 0.01)),
            (Point::finite(0.3, 1.6), Point::finite(-0.2, -1.4), c(0.015, -0.01)),
        ])
        .unwrap()
    }

    #[test]
    fn genus_one_build() {
        let g = SchottkyGroup::from_fixed_points(&[(Point::finite(0.0, 0.0), Point::Infinity, c(0.1, 0.0))])
            .unwrap();
        assert!(g.generator_map(1).approx_eq(&MoebiusMap::scaling(c(0.1, 0.0)).unwrap(), 1e-15));
        let set = g.circles().unwrap();
        assert!(set.is_valid(), "{set:?}");
        // concentric pair: C_1 = |z| = r, C_-1 = |z| = r/|q|
        let (c1, cm1) = (set.get(1), set.get(-1));
        assert!((cm1.radius - c1.radius / 0.1).abs() < 1e-12);
        assert!(g.is_real());
    }

    #[test]
    fn genus_two_build_and_product_multiplier() {
        let g = genus_two();
        assert!(g.circles().unwrap().is_valid());
        let cls = ConjClass::of_word(&reduce(&[1, 2], 2).unwrap()).unwrap();
        let q = g.class_multiplier(&cls).unwrap();
        assert!(q.norm().is_finite() && q.norm() < 0.03);
    }

    #[test]
    fn overlapping_circles_strict() {
        let spec = GroupSpec::from_fixed_points(&[
            (Point::finite(0.0, 0.0), Point::finite(1.0, 0.0), c(0.5, 0.0)),
            (Point::finite(0.2, 0.0), Point::finite(0.8, 0.0), c(0.6, 0.0)),
        ])
        .strict(true);
        assert!(matches!(
            SchottkyGroup::build(&spec),
            Err(Error::CirclesOverlap { .. }) | Err(Error::NoValidRadius)
        ));
        // non-strict build reports instead of failing
        let g = SchottkyGroup::build(&spec.strict(false)).unwrap();
        assert!(!g.circles().unwrap().is_valid());
    }

    #[test]
    fn degenerate_spec() {
        let p = Point::finite(1.0, 0.0);
        let err = SchottkyGroup::from_fixed_points(&[
            (Point::finite(0.0, 0.0), Point::Infinity, c(0.1, 0.0)),
            (p, Point::Infinity, c(0.1, 0.0)),
        ]);
        assert!(matches!(err, Err(Error::DegenerateFixedPoints(_))));
    }

    #[test]
    fn matrix_generators() {
        let m = MoebiusMap::from_fixed_points(Point::finite(0.5, 0.5), Point::finite(-2.0, 0.0), c(0.04, 0.01))
            .unwrap();
        let [a, b, cc, d] = m.entries();
        let spec = GroupSpec {
            generators: vec![GeneratorSpec::Matrix {
                matrix: [[a * 3.0, b * 3.0], [cc * 3.0, d * 3.0]],
            }],
            circles: None,
            strict: true,
            real: false,
        };
        let g = SchottkyGroup::build(&spec).unwrap();
        assert!((g.multipliers()[0] - c(0.04, 0.01)).norm() < 1e-12);
        assert!(g.fixed_point(1).chordal_distance(&Point::finite(0.5, 0.5)) < 1e-12);
    }

    #[test]
    fn normalize_examples() {
        let g = genus_two();
        assert!(g.is_normalized());
        let (_, n) = g.normalize().unwrap();
        assert!(n.approx_eq(&MoebiusMap::identity(), 1e-14));

        let h = generic_genus_two();
        let (hn, n) = h.normalize().unwrap();
        assert!(hn.is_normalized());
        assert!(hn.fixed_point(2).chordal_distance(&Point::finite(1.0, 0.0)) < 1e-12);
        for (a, b) in h.multipliers().iter().zip(hn.multipliers()) {
            assert!((a - b).norm() < 1e-12);
        }
        // conjugator realizes the change
        for i in 1..=2 {
            let conj = h.generator_map(i).conjugate_by(&n);
            assert!(conj.approx_eq(&hn.generator_map(i), 1e-9));
        }
        assert!(hn.circles().unwrap().is_valid());
    }

    #[test]
    fn evaluate_word_paths_agree() {
        let g = generic_genus_two();
        let w = reduce(&[1, 2], 2).unwrap();
        let (x, y) = (g.evaluate_word(&w), g.generator_map(1).compose(&g.generator_map(2)));
        assert!(x.approx_eq(&y, 1e-10), "{:?} {:?} {:?}", w.letters(), x, y);
        assert!(g.evaluate_letters(&[1, -1]).approx_eq(&MoebiusMap::identity(), 1e-12));
        assert!(g.evaluate_letters(&[2]).approx_eq(&g.generator_map(2), 1e-15));
    }

    #[test]
    fn class_multipliers_of_generators() {
        let g = generic_genus_two();
        for i in 1..=2i32 {
            for s in [i, -i] {
                let cls = ConjClass::of_word(&reduce(&[s], 2).unwrap()).unwrap();
                let q = g.class_multiplier(&cls).unwrap();
                assert!((q - g.multipliers()[i as usize - 1]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn rotation_invariance_of_class_multiplier() {
        let g = generic_genus_two();
        for cls in enumerate_classes(2, 6) {
            let q0 = g.class_multiplier(&cls).unwrap();
            for k in 1..cls.len() {
                let q = g.evaluate_word(&cls.rep().rotation(k)).multiplier().unwrap();
                assert!((q - q0).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn real_group_has_real_positive_multipliers() {
        let g = genus_two();
        for cls in enumerate_classes(2, 6) {
            let q = g.class_multiplier(&cls).unwrap();
            assert!(q.im.abs() < 1e-14 && q.re > 0.0 && q.re < 1.0);
        }
    }

    #[test]
    fn isometric_circles_map_correctly() {
        let g = SchottkyGroup::from_fixed_points(&[(Point::finite(1.0, 0.3), Point::finite(-0.5, 0.0), c(0.05, 0.0))])
            .unwrap();
        let set = g.circles().unwrap();
        let map = g.generator_map(1);
        for z in set.get(-1).sample(32) {
            let w = map.apply_finite(z);
            assert!(set.get(1).distance_to_boundary(w) < 1e-10);
        }
        assert!(set.is_valid());
    }

    #[test]
    fn delta_estimates() {
        let g1 = SchottkyGroup::from_fixed_points(&[(Point::finite(0.0, 0.0), Point::Infinity, c(0.1, 0.0))])
            .unwrap();
        assert!(g1.delta_estimate(6).unwrap() < 0.05);
        let small = SchottkyGroup::from_fixed_points(&[
            (Point::finite(0.0, 0.0), Point::Infinity, c(0.01, 0.0)),
            (Point::finite(1.0, 0.0), Point::finite(2.0, 0.0), c(0.01, 0.0)),
        ])
        .unwrap();
        let d_small = small.delta_estimate(7).unwrap();
        assert!(d_small < 0.5, "{d_small}");
        let big = genus_two();
        let d_big = big.delta_estimate(7).unwrap();
        assert!(d_big > d_small, "{d_big} vs {d_small}");
    }
}

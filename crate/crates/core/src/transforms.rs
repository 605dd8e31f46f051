//! Rigid transforms that generate β-sheet 2 from β-sheet 1 and stack strands
//! along the fibril axis.
//!
//! A transform maps `p ↦ R·p + t`. Composition follows function notation:
//! `AffineTransform::compose(outer, inner)` applies `inner` first.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::structure::{Chain, Structure};
use crate::Point;

const ORTHO_TOL: f64 = 1e-9;

/// Stacking distance between equivalent strands along the fibril axis, Å.
pub const STACK_RISE: f64 = 9.59;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineTransform {
    rotation: Matrix3<f64>,
    translation: Point,
}

/// Direction of a stacking shift along +z / -z.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StackDirection {
    Up,
    Down,
}

fn sheet_flip() -> Matrix3<f64> {
    Matrix3::from_diagonal(&Point::new(-1.0, 1.0, -1.0))
}

impl AffineTransform {
    /// Builds a transform, checking that `rotation` is a proper rotation.
    pub fn new(rotation: Matrix3<f64>, translation: Point) -> Result<Self> {
        let gram = rotation.transpose() * rotation - Matrix3::identity();
        if gram.amax() > ORTHO_TOL {
            return Err(Error::Argument(format!(
                "rotation is not orthogonal (max |RᵀR - I| = {:.3e})",
                gram.amax()
            )));
        }
        let det = rotation.determinant();
        if (det - 1.0).abs() > ORTHO_TOL {
            return Err(Error::Argument(format!(
                "rotation is not proper (det = {det})"
            )));
        }
        if !translation.iter().all(|v| v.is_finite()) {
            return Err(Error::Argument("translation is not finite".into()));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Point::zeros(),
        }
    }

    pub fn translation_only(t: Point) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: t,
        }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Point {
        &self.translation
    }

    pub fn apply_point(&self, p: &Point) -> Point {
        self.rotation * p + self.translation
    }

    pub fn apply_points(&self, points: &[Point]) -> Vec<Point> {
        points.iter().map(|p| self.apply_point(p)).collect()
    }

    /// Copy of `chain` with every position transformed and the id replaced by `new_id`.
    pub fn apply_chain(&self, chain: &Chain, new_id: char) -> Chain {
        let mut out = chain.clone().with_id(new_id);
        for residue in &mut out.residues {
            for atom in &mut residue.atoms {
                atom.position = self.apply_point(&atom.position);
            }
        }
        out
    }

    /// Copy of `s` with every position transformed. Chain ids are kept.
    pub fn apply_structure(&self, s: &Structure) -> Structure {
        Structure {
            title: s.title.clone(),
            chains: s.chains.iter().map(|c| self.apply_chain(c, c.id)).collect(),
        }
    }

    /// `outer ∘ inner`: the result applies `inner` first, then `outer`.
    pub fn compose(outer: &Self, inner: &Self) -> Self {
        Self {
            rotation: outer.rotation * inner.rotation,
            translation: outer.rotation * inner.translation + outer.translation,
        }
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// Row-major rotation followed by the translation: 12 numbers.
    pub fn to_row_major(&self) -> [f64; 12] {
        let r = &self.rotation;
        let t = &self.translation;
        [
            r[(0, 0)], r[(0, 1)], r[(0, 2)],
            r[(1, 0)], r[(1, 1)], r[(1, 2)],
            r[(2, 0)], r[(2, 1)], r[(2, 2)],
            t.x, t.y, t.z,
        ]
    }

    pub fn from_row_major(v: &[f64]) -> Result<Self> {
        if v.len() != 12 {
            return Err(Error::Argument(format!(
                "a transform needs 12 numbers, got {}",
                v.len()
            )));
        }
        let rotation = Matrix3::from_row_slice(&v[..9]);
        Self::new(rotation, Point::new(v[9], v[10], v[11]))
    }
}

/// Whitespace-separated 12-number form. Uses the shortest representation that
/// parses back to the same `f64`, so text round trips are exact.
impl fmt::Display for AffineTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.to_row_major().iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

impl FromStr for AffineTransform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let values = s
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::Argument(format!("bad number {t:?} in transform")))
            })
            .collect::<Result<Vec<f64>>>()?;
        Self::from_row_major(&values)
    }
}

/// Sheet-2 generating transform read off the template: diag(-1, 1, -1) and
/// t = (-20.5865, 9.48, 0).
pub fn template_sheet_transform() -> AffineTransform {
    AffineTransform {
        rotation: sheet_flip(),
        translation: Point::new(-20.5865, 9.48, 0.0),
    }
}

/// Sheet-2 transform after contact optimization: diag(-1, 1, -1) and
/// t = (-20.2788, -0.0821, 0.5609).
pub fn optimized_sheet_transform() -> AffineTransform {
    AffineTransform {
        rotation: sheet_flip(),
        translation: Point::new(-20.2788, -0.0821, 0.5609),
    }
}

/// Pure translation by ±[`STACK_RISE`] along z.
pub fn stack_transform(direction: StackDirection) -> AffineTransform {
    let dz = match direction {
        StackDirection::Up => STACK_RISE,
        StackDirection::Down => -STACK_RISE,
    };
    AffineTransform::translation_only(Point::new(0.0, 0.0, dz))
}

/// Mean translation fitted to (source, image) pairs under a fixed rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct SheetTranslationFit {
    pub translation: Point,
    /// Per pair: (image − R·source) − translation.
    pub deviations: Vec<Point>,
}

impl SheetTranslationFit {
    pub fn max_deviation(&self) -> f64 {
        self.deviations.iter().map(|d| d.norm()).fold(0.0, f64::max)
    }

    pub fn rms_deviation(&self) -> f64 {
        let n = self.deviations.len() as f64;
        (self.deviations.iter().map(|d| d.norm_squared()).sum::<f64>() / n).sqrt()
    }
}

/// Averages `image − R·source` over all pairs.
pub fn derive_sheet_translation(
    pairs: &[(Point, Point)],
    rotation: &Matrix3<f64>,
) -> Result<SheetTranslationFit> {
    if pairs.is_empty() {
        return Err(Error::Argument(
            "at least one (source, image) pair is required".into(),
        ));
    }
    // Validates orthogonality.
    AffineTransform::new(*rotation, Point::zeros())?;
    let offsets: Vec<Point> = pairs
        .iter()
        .map(|(src, img)| img - rotation * src)
        .collect();
    let mean = offsets.iter().fold(Point::zeros(), |acc, o| acc + o) / pairs.len() as f64;
    Ok(SheetTranslationFit {
        translation: mean,
        deviations: offsets.iter().map(|o| o - mean).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn template_transform_examples() {
        let t = template_sheet_transform();
        assert_eq!(t.apply_point(&Point::zeros()), Point::new(-20.5865, 9.48, 0.0));
        let p = t.apply_point(&Point::new(1.0, 1.0, 1.0));
        assert_relative_eq!(p, Point::new(-21.5865, 10.48, -1.0), epsilon = 1e-12);
    }

    #[test]
    fn template_transform_twice_is_a_y_shift() {
        // R² = I and R·t + t = (0, 2·9.48, 0).
        let t = template_sheet_transform();
        let p = Point::new(3.25, -1.5, 7.0);
        let twice = t.apply_point(&t.apply_point(&p));
        assert_relative_eq!(twice, p + Point::new(0.0, 18.96, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn optimized_transform_examples() {
        let t = optimized_sheet_transform();
        assert_eq!(
            t.apply_point(&Point::zeros()),
            Point::new(-20.2788, -0.0821, 0.5609)
        );
        assert_eq!(t.rotation(), template_sheet_transform().rotation());
        let p = t.apply_point(&Point::new(-10.0, 5.0, 0.0));
        assert_relative_eq!(p, Point::new(-10.2788, 4.9179, 0.5609), epsilon = 1e-12);
    }

    #[test]
    fn sheet_rotations_are_exact_involutions() {
        for t in [template_sheet_transform(), optimized_sheet_transform()] {
            let r = t.rotation();
            assert_eq!(r * r, Matrix3::identity());
            assert_eq!(r.transpose() * r, Matrix3::identity());
            assert_eq!(r.determinant(), 1.0);
        }
    }

    #[test]
    fn stacking() {
        let up = stack_transform(StackDirection::Up);
        let down = stack_transform(StackDirection::Down);
        assert_eq!(up.apply_point(&Point::zeros()), Point::new(0.0, 0.0, 9.59));
        assert_eq!(down.apply_point(&Point::new(0.0, 0.0, 9.59)), Point::zeros());
        assert_eq!(AffineTransform::compose(&up, &down), AffineTransform::identity());
    }

    #[test]
    fn rejects_improper_or_skewed_rotation() {
        let reflect = Matrix3::from_diagonal(&Point::new(-1.0, 1.0, 1.0));
        assert!(AffineTransform::new(reflect, Point::zeros()).is_err());
        let mut skew = Matrix3::identity();
        skew[(0, 1)] = 1e-6;
        assert!(AffineTransform::new(skew, Point::zeros()).is_err());
    }

    #[test]
    fn text_form_round_trips_exactly() {
        let t = optimized_sheet_transform();
        let back: AffineTransform = t.to_string().parse().unwrap();
        assert_eq!(back, t);
        assert_eq!(back.translation().x, -20.2788);
        assert!("1 0 0 0 1 0 0 0 1 0 0".parse::<AffineTransform>().is_err());
    }

    #[test]
    fn derive_single_pair() {
        let r = *optimized_sheet_transform().rotation();
        let img = Point::new(-20.2788, -0.0821, 0.5609);
        let fit = derive_sheet_translation(&[(Point::zeros(), img)], &r).unwrap();
        assert_eq!(fit.translation, img);
        assert_eq!(fit.max_deviation(), 0.0);
    }

    #[test]
    fn derive_symmetric_pairs() {
        let r = Matrix3::identity();
        let c = Point::new(2.0, -1.0, 0.5);
        let pairs = [
            (Point::zeros(), c + Point::new(1.0, 0.0, 0.0)),
            (Point::zeros(), c - Point::new(1.0, 0.0, 0.0)),
        ];
        let fit = derive_sheet_translation(&pairs, &r).unwrap();
        assert_relative_eq!(fit.translation, c, epsilon = 1e-15);
        for d in &fit.deviations {
            assert_relative_eq!(d.norm(), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn derive_rejects_empty() {
        assert!(derive_sheet_translation(&[], &Matrix3::identity()).is_err());
    }

    fn rotation_from(axis: Point, angle: f64) -> Matrix3<f64> {
        let axis = nalgebra::Unit::new_normalize(axis);
        *nalgebra::Rotation3::from_axis_angle(&axis, angle).matrix()
    }

    fn point() -> impl Strategy<Value = Point> {
        (-50.0..50.0f64, -50.0..50.0f64, -50.0..50.0f64).prop_map(|(x, y, z)| Point::new(x, y, z))
    }

    fn transform() -> impl Strategy<Value = AffineTransform> {
        (point(), -3.0..3.0f64, point()).prop_filter_map("degenerate axis", |(axis, angle, t)| {
            (axis.norm() > 1e-3)
                .then(|| AffineTransform::new(rotation_from(axis, angle), t).unwrap())
        })
    }

    proptest! {
        #[test]
        fn rigid_motion_preserves_distances(t in transform(), a in point(), b in point()) {
            let d0 = (a - b).norm();
            let d1 = (t.apply_point(&a) - t.apply_point(&b)).norm();
            prop_assert!((d0 - d1).abs() <= 1e-9);
        }

        #[test]
        fn composition_is_sequential_application(t1 in transform(), t2 in transform(), p in point()) {
            let seq = t2.apply_point(&t1.apply_point(&p));
            let comp = AffineTransform::compose(&t2, &t1).apply_point(&p);
            prop_assert!((seq - comp).amax() <= 1e-9);
            let back = t1.inverse().apply_point(&t1.apply_point(&p));
            prop_assert!((back - p).amax() <= 1e-9);
        }

        #[test]
        fn constructed_rotations_are_orthogonal(t in transform()) {
            let r = t.rotation();
            prop_assert!((r.transpose() * r - Matrix3::identity()).amax() <= 1e-9);
            prop_assert!((r.determinant() - 1.0).abs() <= 1e-9);
        }
    }
}

//! Contact-print area from digitized boundary polygons.
//!
//! A stamped fingerprint is digitized into an ordered pixel-space
//! boundary; the printed reference bar calibrates pixels to centimeters,
//! and the polygon area comes from the shoelace sum.

use serde::Serialize;

use crate::error::{Error, Result};

/// Default physical length of the printed reference bar, cm.
pub const DEFAULT_SCALE_BAR_CM: f64 = 5.0;

/// A digitized contact print: the boundary polygon in pixel coordinates
/// and the reference bar that calibrates the scan.
///
/// The boundary is assumed simple; self-intersections are not rejected
/// (the shoelace sum still evaluates), but mixed-orientation contributions
/// can be detected with [`ContactPrint::has_mixed_orientation`].
#[derive(Debug, Clone, Serialize)]
pub struct ContactPrint {
    pub boundary_px: Vec<[f64; 2]>,
    pub scale_bar_px: f64,
    pub scale_bar_cm: f64,
}

impl ContactPrint {
    pub fn new(boundary_px: Vec<[f64; 2]>, scale_bar_px: f64, scale_bar_cm: f64) -> Result<Self> {
        if boundary_px.len() < 3 {
            return Err(Error::InvalidArgument(format!(
                "polygon needs at least 3 vertices, got {}",
                boundary_px.len()
            )));
        }
        if boundary_px
            .iter()
            .any(|p| !p[0].is_finite() || !p[1].is_finite())
        {
            return Err(Error::InvalidArgument("non-finite vertex".into()));
        }
        if !scale_bar_px.is_finite() || scale_bar_px <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "scale bar must be positive, got {scale_bar_px} px"
            )));
        }
        if !scale_bar_cm.is_finite() || scale_bar_cm <= 0.0 {
            return Err(Error::InvalidArgument(
                "scale bar length in cm must be positive".into(),
            ));
        }
        Ok(Self {
            boundary_px,
            scale_bar_px,
            scale_bar_cm,
        })
    }

    /// Centimeters per pixel.
    pub fn pixel_scale(&self) -> f64 {
        self.scale_bar_cm / self.scale_bar_px
    }

    /// Signed shoelace sum in px² (twice the signed area).
    fn shoelace_signed_px2(&self) -> f64 {
        let v = &self.boundary_px;
        let n = v.len();
        let mut sum = 0.0;
        for i in 0..n {
            let j = (i + 1) % n;
            sum += v[i][0] * v[j][1] - v[j][0] * v[i][1];
        }
        sum
    }

    /// Polygon area in cm²: the absolute shoelace area scaled by the
    /// squared pixel size.
    pub fn area_cm2(&self) -> f64 {
        let px2 = self.shoelace_signed_px2().abs() / 2.0;
        let s = self.pixel_scale();
        px2 * s * s
    }

    /// True when centroid-referenced cross terms disagree in sign — a
    /// heuristic flag for self-intersecting (or strongly concave)
    /// boundaries worth a second look in the digitizer.
    pub fn has_mixed_orientation(&self) -> bool {
        let v = &self.boundary_px;
        let n = v.len() as f64;
        let cx = v.iter().map(|p| p[0]).sum::<f64>() / n;
        let cy = v.iter().map(|p| p[1]).sum::<f64>() / n;
        let mut pos = false;
        let mut neg = false;
        for i in 0..v.len() {
            let j = (i + 1) % v.len();
            let cross =
                (v[i][0] - cx) * (v[j][1] - cy) - (v[j][0] - cx) * (v[i][1] - cy);
            if cross > 0.0 {
                pos = true;
            } else if cross < 0.0 {
                neg = true;
            }
        }
        pos && neg
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn square(side: f64) -> Vec<[f64; 2]> {
        vec![[0.0, 0.0], [side, 0.0], [side, side], [0.0, side]]
    }

    #[test]
    fn pixel_scale_values() {
        let p = ContactPrint::new(square(1.0), 500.0, 5.0).unwrap();
        assert_abs_diff_eq!(p.pixel_scale(), 0.01, epsilon = 1e-15);
        let p = ContactPrint::new(square(1.0), 250.0, 5.0).unwrap();
        assert_abs_diff_eq!(p.pixel_scale(), 0.02, epsilon = 1e-15);
        assert!(ContactPrint::new(square(1.0), 0.0, 5.0).is_err());
    }

    #[test]
    fn unit_square_and_triangle() {
        let p = ContactPrint::new(square(1.0), 1.0, 1.0).unwrap();
        assert_eq!(p.area_cm2(), 1.0);
        let tri = vec![[0.0, 0.0], [4.0, 0.0], [0.0, 3.0]];
        let p = ContactPrint::new(tri, 1.0, 1.0).unwrap();
        assert_eq!(p.area_cm2(), 6.0);
    }

    #[test]
    fn print_scale_magnitudes() {
        // A 200 px square at 0.01 cm/px covers 4 cm².
        let p = ContactPrint::new(square(200.0), 500.0, 5.0).unwrap();
        assert_abs_diff_eq!(p.area_cm2(), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn too_few_vertices_rejected() {
        assert!(ContactPrint::new(vec![[0.0, 0.0], [1.0, 0.0]], 1.0, 1.0).is_err());
    }

    #[test]
    fn figure_eight_flags_mixed_orientation() {
        let bow = vec![[0.0, 0.0], [2.0, 2.0], [2.0, 0.0], [0.0, 2.0]];
        let p = ContactPrint::new(bow, 1.0, 1.0).unwrap();
        assert!(p.has_mixed_orientation());
        let p = ContactPrint::new(square(2.0), 1.0, 1.0).unwrap();
        assert!(!p.has_mixed_orientation());
    }

    fn random_convex(rng: &mut impl Rng, n: usize) -> Vec<[f64; 2]> {
        // Points on a random ellipse in angular order are convex.
        let a = rng.gen_range(1.0..50.0);
        let b = rng.gen_range(1.0..50.0);
        let mut angles: Vec<f64> = (0..n)
            .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
            .collect();
        angles.sort_by(|x, y| x.partial_cmp(y).unwrap());
        angles.dedup_by(|x, y| (*x - *y).abs() < 1e-6);
        angles
            .iter()
            .map(|&th| [a * th.cos(), b * th.sin()])
            .collect()
    }

    #[test]
    fn convex_centroid_triangulation_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let n = rng.gen_range(3..12);
            let poly = random_convex(&mut rng, n);
            if poly.len() < 3 {
                continue;
            }
            let print = ContactPrint::new(poly.clone(), 1.0, 1.0).unwrap();
            let n = poly.len() as f64;
            let cx = poly.iter().map(|p| p[0]).sum::<f64>() / n;
            let cy = poly.iter().map(|p| p[1]).sum::<f64>() / n;
            let mut fan = 0.0;
            for i in 0..poly.len() {
                let j = (i + 1) % poly.len();
                let ax = poly[i][0] - cx;
                let ay = poly[i][1] - cy;
                let bx = poly[j][0] - cx;
                let by = poly[j][1] - cy;
                fan += 0.5 * (ax * by - bx * ay).abs();
            }
            assert_abs_diff_eq!(print.area_cm2(), fan, epsilon = 1e-9 * fan.max(1.0));
        }
    }

    proptest! {
        #[test]
        fn invariances(
            mut poly in proptest::collection::vec(
                (-100.0..100.0f64, -100.0..100.0f64), 3..12),
            shift in (-50.0..50.0f64, -50.0..50.0f64),
            rotate_by in 0usize..11,
            scale in 0.1..8.0f64,
        ) {
            let verts: Vec<[f64; 2]> = poly.drain(..).map(|(x, y)| [x, y]).collect();
            let print = ContactPrint::new(verts.clone(), 1.0, 1.0).unwrap();
            let base = print.area_cm2();

            let k = rotate_by % verts.len();
            let mut rotated = verts[k..].to_vec();
            rotated.extend_from_slice(&verts[..k]);
            let rot = ContactPrint::new(rotated, 1.0, 1.0).unwrap();
            prop_assert!((rot.area_cm2() - base).abs() < 1e-9 * base.max(1.0));

            let reversed: Vec<[f64; 2]> = verts.iter().rev().cloned().collect();
            let rev = ContactPrint::new(reversed, 1.0, 1.0).unwrap();
            prop_assert!((rev.area_cm2() - base).abs() < 1e-9 * base.max(1.0));

            let shifted: Vec<[f64; 2]> = verts
                .iter()
                .map(|p| [p[0] + shift.0, p[1] + shift.1])
                .collect();
            let tr = ContactPrint::new(shifted, 1.0, 1.0).unwrap();
            prop_assert!((tr.area_cm2() - base).abs() < 1e-7 * base.max(1.0));

            let scaled: Vec<[f64; 2]> = verts
                .iter()
                .map(|p| [p[0] * scale, p[1] * scale])
                .collect();
            let sc = ContactPrint::new(scaled, 1.0, 1.0).unwrap();
            prop_assert!(
                (sc.area_cm2() - base * scale * scale).abs()
                    < 1e-9 * (base * scale * scale).max(1.0)
            );
        }
    }
}

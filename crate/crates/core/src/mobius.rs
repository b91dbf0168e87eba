//! Disk automorphisms and the pseudo-hyperbolic metric.
//!
//! Everything here is a pure function of its inputs. The `*_c` helpers take
//! raw [`Complex64`] values and skip the disk check; they are what the inner
//! loops of the quadrature and Carleson tests call.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points with modulus above this are accepted but flagged: weights such as
/// `(1-|z|^2)^(p-2)` amplify roundoff there.
pub const NEAR_BOUNDARY: f64 = 1.0 - 1e-14;

/// A point of the open unit disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct DiskPoint(Complex64);

impl DiskPoint {
    pub const ORIGIN: DiskPoint = DiskPoint(Complex64::new(0.0, 0.0));

    pub fn new(re: f64, im: f64) -> Result<Self> {
        Self::from_complex(Complex64::new(re, im))
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NonFinite { what: "disk point" });
        }
        let modulus = z.norm();
        if modulus >= 1.0 {
            return Err(Error::OutsideDisk {
                re: z.re,
                im: z.im,
                modulus,
            });
        }
        Ok(DiskPoint(z))
    }

    pub fn from_polar(r: f64, theta: f64) -> Result<Self> {
        Self::from_complex(Complex64::from_polar(r, theta))
    }

    /// Real point `x`, for the radial families.
    pub fn real(x: f64) -> Result<Self> {
        Self::new(x, 0.0)
    }

    /// Wraps a value already known to lie in the disk. Values that rounded
    /// onto the circle are pulled back by one ulp.
    pub(crate) fn clamp_inside(z: Complex64) -> Self {
        let m = z.norm();
        if m < 1.0 {
            DiskPoint(z)
        } else {
            DiskPoint(z * ((1.0 - f64::EPSILON) / m))
        }
    }

    #[inline]
    pub fn value(self) -> Complex64 {
        self.0
    }

    #[inline]
    pub fn modulus(self) -> f64 {
        self.0.norm()
    }

    /// `1 - |z|^2`, computed as `(1-|z|)(1+|z|)`.
    #[inline]
    pub fn one_minus_sq(self) -> f64 {
        one_minus_sq_c(self.0)
    }

    pub fn is_near_boundary(self) -> bool {
        self.modulus() > NEAR_BOUNDARY
    }

    /// Dyadic generation of the point: the `k` with `2^-(k+1) < 1-|z| <= 2^-k`.
    pub fn generation(self) -> u32 {
        generation_of(self.0)
    }

    /// Argument normalised to `[0, 1)` turns.
    pub fn turns(self) -> f64 {
        let t = self.0.arg() / std::f64::consts::TAU;
        let t = if t < 0.0 { t + 1.0 } else { t };
        if t >= 1.0 {
            0.0
        } else {
            t
        }
    }
}

impl From<DiskPoint> for Complex64 {
    fn from(p: DiskPoint) -> Self {
        p.0
    }
}

impl From<DiskPoint> for [f64; 2] {
    fn from(p: DiskPoint) -> Self {
        [p.0.re, p.0.im]
    }
}

impl TryFrom<[f64; 2]> for DiskPoint {
    type Error = Error;
    fn try_from(v: [f64; 2]) -> Result<Self> {
        DiskPoint::new(v[0], v[1])
    }
}

/// The rotation `z -> e^{i theta} z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rotation {
    theta: f64,
}

impl Rotation {
    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::NonFinite { what: "rotation angle" });
        }
        Ok(Rotation { theta })
    }

    pub fn theta(self) -> f64 {
        self.theta
    }

    pub fn factor(self) -> Complex64 {
        Complex64::from_polar(1.0, self.theta)
    }

    pub fn apply(self, z: DiskPoint) -> DiskPoint {
        DiskPoint::clamp_inside(z.value() * self.factor())
    }

    pub fn inverse(self) -> Rotation {
        Rotation { theta: -self.theta }
    }
}

/// `sigma_a(z) = (a - z) / (1 - conj(a) z)`: the involutive automorphism
/// swapping `0` and `a`.
pub fn mobius_transform(a: DiskPoint, z: DiskPoint) -> DiskPoint {
    DiskPoint::clamp_inside(sigma_c(a.0, z.0))
}

/// `rho(a, z) = |a - z| / |1 - conj(a) z|`.
pub fn pseudo_hyperbolic(a: DiskPoint, z: DiskPoint) -> f64 {
    rho_c(a.0, z.0)
}

/// `(1-|a|^2)(1-|z|^2)/|1-conj(a) z|^2`, which equals `1 - |sigma_a(z)|^2`
/// without the cancellation of the direct form.
pub fn invariant_weight(a: DiskPoint, z: DiskPoint) -> f64 {
    invariant_weight_c(a.0, z.0)
}

/// Hyperbolic distance `atanh(rho)`, the radius used for hyperbolic disks.
pub fn hyperbolic_distance(a: DiskPoint, z: DiskPoint) -> f64 {
    rho_c(a.0, z.0).min(1.0 - f64::EPSILON).atanh()
}

#[inline]
pub fn sigma_c(a: Complex64, z: Complex64) -> Complex64 {
    (a - z) / (1.0 - a.conj() * z)
}

/// `|1 - conj(a) z|^2`, through `|a - z|^2 + (1-|a|^2)(1-|z|^2)` so that
/// two nearby points close to the circle do not cancel.
#[inline]
pub fn kernel_sq_c(a: Complex64, z: Complex64) -> f64 {
    (a - z).norm_sqr() + one_minus_sq_c(a) * one_minus_sq_c(z)
}

#[inline]
pub fn rho_c(a: Complex64, z: Complex64) -> f64 {
    let num = (a - z).norm_sqr();
    let den = num + one_minus_sq_c(a) * one_minus_sq_c(z);
    if den == 0.0 {
        return 1.0;
    }
    (num / den).sqrt().min(1.0)
}

#[inline]
pub fn one_minus_sq_c(z: Complex64) -> f64 {
    let m = z.norm();
    (1.0 - m) * (1.0 + m)
}

#[inline]
pub fn invariant_weight_c(a: Complex64, z: Complex64) -> f64 {
    let w = one_minus_sq_c(a) * one_minus_sq_c(z);
    w / ((a - z).norm_sqr() + w)
}

/// `sigma_a'(z) = (|a|^2 - 1) / (1 - conj(a) z)^2`.
#[inline]
pub fn sigma_derivative_c(a: Complex64, z: Complex64) -> Complex64 {
    let d = 1.0 - a.conj() * z;
    Complex64::new(a.norm_sqr() - 1.0, 0.0) / (d * d)
}

pub(crate) fn generation_of(z: Complex64) -> u32 {
    let gap = 1.0 - z.norm();
    if gap > 0.5 {
        return 0;
    }
    // Radii computed as 1 - 2^-k (possibly through polar form, which moves
    // the modulus by an ulp or two) must land on generation k.
    let g = (-gap.log2() + 1e-9).floor();
    if g.is_finite() {
        g.max(0.0) as u32
    } else {
        u32::MAX
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p(re: f64, im: f64) -> DiskPoint {
        DiskPoint::new(re, im).unwrap()
    }

    #[test]
    fn rejects_points_outside() {
        assert!(DiskPoint::new(1.0, 0.0).is_err());
        assert!(DiskPoint::new(0.8, 0.6).is_err());
        assert!(DiskPoint::new(f64::NAN, 0.0).is_err());
        assert!(DiskPoint::new(0.999, 0.0).is_ok());
    }

    #[test]
    fn flags_points_hugging_the_circle() {
        assert!(p(1.0 - 1e-15, 0.0).is_near_boundary());
        assert!(!p(1.0 - 1e-12, 0.0).is_near_boundary());
    }

    #[test]
    fn transform_examples() {
        let a = p(0.3, -0.2);
        assert_abs_diff_eq!(mobius_transform(a, DiskPoint::ORIGIN).value().re, 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(mobius_transform(a, a).modulus(), 0.0, epsilon = 1e-15);
        let v = mobius_transform(p(0.5, 0.0), p(-0.5, 0.0)).value();
        assert_abs_diff_eq!(v.re, 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn metric_examples() {
        let z = p(0.1, 0.7);
        assert_abs_diff_eq!(pseudo_hyperbolic(DiskPoint::ORIGIN, z), z.modulus(), epsilon = 1e-15);
        assert_eq!(pseudo_hyperbolic(z, z), 0.0);
        assert_abs_diff_eq!(pseudo_hyperbolic(p(0.5, 0.0), p(0.75, 0.0)), 0.4, epsilon = 1e-15);
    }

    #[test]
    fn weight_examples() {
        let z = p(0.4, 0.3);
        assert_abs_diff_eq!(invariant_weight(DiskPoint::ORIGIN, z), 1.0 - 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(invariant_weight(z, z), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(invariant_weight(p(0.5, 0.0), p(-0.5, 0.0)), 0.36, epsilon = 1e-15);
        assert_abs_diff_eq!(0.75 * 0.75 / (1.25 * 1.25), 0.36, epsilon = 1e-15);
    }

    #[test]
    fn generations_of_dyadic_radii() {
        for k in 0..40 {
            let z = Complex64::new(1.0 - 0.5f64.powi(k), 0.0);
            assert_eq!(generation_of(z), k as u32, "k = {k}");
        }
        assert_eq!(generation_of(Complex64::new(0.3, 0.0)), 0);
        assert_eq!(generation_of(Complex64::new(0.6, 0.0)), 1);
    }

    #[test]
    fn rotation_round_trip() {
        let r = Rotation::new(1.2).unwrap();
        let z = p(0.3, 0.4);
        let back = r.inverse().apply(r.apply(z));
        assert_abs_diff_eq!(back.value().re, 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(back.value().im, 0.4, epsilon = 1e-15);
        assert!(Rotation::new(f64::INFINITY).is_err());
    }

    #[test]
    fn turns_are_normalised() {
        assert_eq!(p(0.5, 0.0).turns(), 0.0);
        assert_abs_diff_eq!(p(0.0, 0.5).turns(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(p(0.0, -0.5).turns(), 0.75, epsilon = 1e-15);
    }

    #[test]
    fn json_is_a_pair() {
        let z = p(0.25, -0.5);
        let s = serde_json::to_string(&z).unwrap();
        assert_eq!(s, "[0.25,-0.5]");
        let back: DiskPoint = serde_json::from_str(&s).unwrap();
        assert_eq!(back, z);
        assert!(serde_json::from_str::<DiskPoint>("[1.0,0.0]").is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn point() -> impl Strategy<Value = DiskPoint> {
            (0.0f64..0.999, 0.0f64..std::f64::consts::TAU)
                .prop_map(|(r, t)| DiskPoint::from_polar(r, t).unwrap())
        }

        proptest! {
            #[test]
            fn garnett_identity(a in point(), z in point()) {
                let rho = pseudo_hyperbolic(a, z);
                prop_assert!((invariant_weight(a, z) + rho * rho - 1.0).abs() <= 1e-12);
            }

            #[test]
            fn involution(a in point(), z in point()) {
                let back = mobius_transform(a, mobius_transform(a, z));
                prop_assert!((back.value() - z.value()).norm() <= 1e-12);
            }

            #[test]
            fn metric_is_invariant(a in point(), z in point(), c in point()) {
                let lhs = pseudo_hyperbolic(mobius_transform(c, a), mobius_transform(c, z));
                prop_assert!((lhs - pseudo_hyperbolic(a, z)).abs() <= 1e-12);
            }

            #[test]
            fn metric_is_symmetric(a in point(), z in point()) {
                prop_assert!((pseudo_hyperbolic(a, z) - pseudo_hyperbolic(z, a)).abs() <= 1e-15);
            }

            #[test]
            fn strong_triangle(a in point(), w in point(), z in point()) {
                let (x, y) = (pseudo_hyperbolic(a, w), pseudo_hyperbolic(w, z));
                prop_assert!(pseudo_hyperbolic(a, z) <= (x + y) / (1.0 + x * y) + 1e-12);
            }

            #[test]
            fn derivative_matches_difference(a in point(), z in point()) {
                let h = 1e-6 * (1.0 - z.modulus());
                let zc = z.value();
                let fd = (sigma_c(a.value(), zc + h) - sigma_c(a.value(), zc - h)) / (2.0 * h);
                let d = sigma_derivative_c(a.value(), zc);
                prop_assert!((fd - d).norm() <= 1e-5 * d.norm().max(1.0));
            }
        }
    }
}

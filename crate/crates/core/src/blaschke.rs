//! Finite Blaschke products.
//!
//! A zero at the origin contributes the factor `z`; every other zero `a`
//! contributes `(|a|/a)(a - z)/(1 - conj(a) z)`, normalised so that the
//! factor is positive at the origin.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::carleson::{kernel_constant, weights_from_sequence, CarlesonReport};
use crate::classify::{Classification, Thresholds};
use crate::error::{param, Error, Result};
use crate::mobius::{rho_c, DiskPoint};
use crate::net::SamplingNet;
use crate::sequences::DiskSequence;

/// Above this many zeros the product is accumulated in log form.
pub const LOG_FORM_THRESHOLD: usize = 64;

/// Pseudo-hyperbolic guard radius around zeros for the log-derivative.
pub const ZERO_GUARD: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlaschkeProduct {
    zeros: Vec<DiskPoint>,
}

/// One normalised factor and its derivative.
#[inline]
pub fn factor(a: Complex64, z: Complex64) -> Complex64 {
    if a == Complex64::new(0.0, 0.0) {
        return z;
    }
    let unit = a.norm() / a;
    unit * (a - z) / (1.0 - a.conj() * z)
}

#[inline]
pub fn factor_derivative(a: Complex64, z: Complex64) -> Complex64 {
    if a == Complex64::new(0.0, 0.0) {
        return Complex64::new(1.0, 0.0);
    }
    let unit = a.norm() / a;
    let d = 1.0 - a.conj() * z;
    unit * (a.norm_sqr() - 1.0) / (d * d)
}

impl BlaschkeProduct {
    /// An empty zero list is the constant function 1.
    pub fn new(zeros: Vec<DiskPoint>) -> Self {
        BlaschkeProduct { zeros }
    }

    pub fn from_sequence(seq: &DiskSequence) -> Self {
        BlaschkeProduct::new(seq.points().to_vec())
    }

    pub fn zeros(&self) -> &[DiskPoint] {
        &self.zeros
    }

    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    /// `sum (1 - |a_k|)` of the zero list.
    pub fn blaschke_sum(&self) -> f64 {
        crate::numeric::compensated_sum(self.zeros.iter().map(|a| 1.0 - a.modulus()))
    }

    /// Value at `z` with `|z| <= 1`.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        check_closed_disk(z)?;
        Ok(self.eval_unchecked(z))
    }

    pub fn eval_unchecked(&self, z: Complex64) -> Complex64 {
        if self.zeros.len() <= LOG_FORM_THRESHOLD {
            self.zeros
                .iter()
                .fold(Complex64::new(1.0, 0.0), |acc, a| acc * factor(a.value(), z))
        } else {
            let mut log = Complex64::new(0.0, 0.0);
            for a in &self.zeros {
                let f = factor(a.value(), z);
                if f == Complex64::new(0.0, 0.0) {
                    return f;
                }
                log += f.ln();
            }
            log.exp()
        }
    }

    /// Product-rule derivative through prefix and suffix products, so it
    /// stays exact at and near the zeros.
    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        check_closed_disk(z)?;
        Ok(self.derivative_unchecked(z))
    }

    pub fn derivative_unchecked(&self, z: Complex64) -> Complex64 {
        let n = self.zeros.len();
        if n == 0 {
            return Complex64::new(0.0, 0.0);
        }
        let f: Vec<Complex64> = self.zeros.iter().map(|a| factor(a.value(), z)).collect();
        let mut suffix = vec![Complex64::new(1.0, 0.0); n + 1];
        for k in (0..n).rev() {
            suffix[k] = suffix[k + 1] * f[k];
        }
        let mut prefix = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(0.0, 0.0);
        for k in 0..n {
            sum += prefix * factor_derivative(self.zeros[k].value(), z) * suffix[k + 1];
            prefix *= f[k];
        }
        sum
    }

    /// `B'/B = sum (|z_n|^2 - 1) / ((z_n - z)(1 - conj(z_n) z))`.
    pub fn log_derivative(&self, z: DiskPoint) -> Result<Complex64> {
        let zc = z.value();
        for (index, a) in self.zeros.iter().enumerate() {
            if rho_c(a.value(), zc) <= ZERO_GUARD {
                return Err(Error::NearZero { index });
            }
        }
        Ok(self.log_derivative_unchecked(zc))
    }

    #[inline]
    pub fn log_derivative_unchecked(&self, z: Complex64) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        for a in &self.zeros {
            let a = a.value();
            sum += (a.norm_sqr() - 1.0) / ((a - z) * (1.0 - a.conj() * z));
        }
        sum
    }

    /// Zeros rotated by `e^{i theta}`.
    pub fn rotated(&self, theta: f64) -> BlaschkeProduct {
        let r = Complex64::from_polar(1.0, theta);
        BlaschkeProduct::new(
            self.zeros
                .iter()
                .map(|a| DiskPoint::clamp_inside(a.value() * r))
                .collect(),
        )
    }
}

fn check_closed_disk(z: Complex64) -> Result<()> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::NonFinite { what: "evaluation point" });
    }
    if z.norm() > 1.0 + 1e-12 {
        return Err(Error::OutsideDisk {
            re: z.re,
            im: z.im,
            modulus: z.norm(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerMembershipReport {
    pub p: f64,
    pub s: f64,
    pub degree: usize,
    pub blaschke_sum: f64,
    pub carleson: CarlesonReport,
    /// Plain-language reading of the verdict.
    pub statement: String,
}

/// The product belongs to `F(p, p-2, s)` exactly when its zeros carry an
/// `s`-Carleson measure, i.e. when `sup_a sum (1 - |sigma_a(z_k)|^2)^s` is
/// finite. That supremum is estimated with the kernel form at `t = s`.
pub fn inner_membership_test(
    b: &BlaschkeProduct,
    p: f64,
    s: f64,
    net: &SamplingNet,
    thresholds: &Thresholds,
) -> Result<InnerMembershipReport> {
    if !(s > 0.0 && s < 1.0) {
        return Err(param(format!("inner membership needs 0 < s < 1, got s={s}")));
    }
    let lower = s.max(1.0 - s);
    if !(p > lower) || !p.is_finite() {
        return Err(param(format!(
            "inner membership needs p > max(s, 1-s) = {lower}, got p={p}"
        )));
    }
    let carleson = match DiskSequence::new(b.zeros().to_vec(), "zeros") {
        Ok(seq) => kernel_constant(&weights_from_sequence(&seq, s)?, s, s, net, thresholds)?,
        Err(_) => kernel_constant(&crate::carleson::PointMassMeasure::empty(), s, s, net, thresholds)?,
    };
    let statement = match carleson.classification {
        Classification::Bounded => format!("B belongs to F({p}, {}, {s})", p - 2.0),
        Classification::Divergent => format!("B does not belong to F({p}, {}, {s})", p - 2.0),
        Classification::Inconclusive => "membership undecided at this truncation".to_string(),
    };
    Ok(InnerMembershipReport {
        p,
        s,
        degree: b.degree(),
        blaschke_sum: b.blaschke_sum(),
        carleson,
        statement,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::NetConfig;
    use crate::sequences::{gen_clustered, gen_radial};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::TAU;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bp(z: &[(f64, f64)]) -> BlaschkeProduct {
        BlaschkeProduct::new(z.iter().map(|&(a, b)| DiskPoint::new(a, b).unwrap()).collect())
    }

    #[test]
    fn eval_examples() {
        let b = bp(&[(0.5, 0.0)]);
        assert_eq!(b.eval(c(0.5, 0.0)).unwrap(), c(0.0, 0.0));
        assert_abs_diff_eq!(b.eval(c(0.0, 0.0)).unwrap().re, 0.5, epsilon = 1e-15);
        for k in 0..16 {
            let z = Complex64::from_polar(1.0, TAU * k as f64 / 16.0);
            assert_abs_diff_eq!(b.eval(z).unwrap().norm(), 1.0, epsilon = 1e-12);
        }
        assert!(b.eval(c(1.5, 0.0)).is_err());
        assert_eq!(BlaschkeProduct::new(vec![]).eval(c(0.3, 0.0)).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn derivative_examples() {
        let b = bp(&[(0.5, 0.0)]);
        assert_abs_diff_eq!(b.derivative(c(0.0, 0.0)).unwrap().re, -0.75, epsilon = 1e-15);
        let id = bp(&[(0.0, 0.0)]);
        assert_eq!(id.derivative(c(0.3, -0.2)).unwrap(), c(1.0, 0.0));
        let two = bp(&[(0.5, 0.0), (-0.5, 0.0)]);
        let h = 1e-5;
        let fd = (two.eval(c(h, 0.0)).unwrap() - two.eval(c(-h, 0.0)).unwrap()) / (2.0 * h);
        assert!((fd - two.derivative(c(0.0, 0.0)).unwrap()).norm() < 1e-8);
    }

    #[test]
    fn derivative_at_a_zero_is_finite() {
        // B = b_{0.5} b_{-0.5}: B'(0.5) = b'_{0.5}(0.5) b_{-0.5}(0.5).
        let b = bp(&[(0.5, 0.0), (-0.5, 0.0)]);
        let expect = factor_derivative(c(0.5, 0.0), c(0.5, 0.0)) * factor(c(-0.5, 0.0), c(0.5, 0.0));
        assert!((b.derivative(c(0.5, 0.0)).unwrap() - expect).norm() < 1e-15);
    }

    #[test]
    fn log_derivative_examples() {
        let b = bp(&[(0.5, 0.0)]);
        assert_abs_diff_eq!(b.log_derivative(DiskPoint::ORIGIN).unwrap().re, -1.5, epsilon = 1e-15);
        let id = bp(&[(0.0, 0.0)]);
        assert_abs_diff_eq!(id.log_derivative(DiskPoint::real(0.5).unwrap()).unwrap().re, 2.0, epsilon = 1e-15);
        let two = bp(&[(0.3, 0.0), (0.0, -0.4)]);
        let z = c(0.1, 0.1);
        let ratio = two.derivative(z).unwrap() / two.eval(z).unwrap();
        let ld = two.log_derivative(DiskPoint::from_complex(z).unwrap()).unwrap();
        assert!((ld - ratio).norm() <= 1e-10 * ratio.norm());
        let err = two.log_derivative(DiskPoint::new(0.0, -0.4).unwrap()).unwrap_err();
        assert_eq!(err, Error::NearZero { index: 1 });
    }

    #[test]
    fn log_form_agrees_with_direct_product() {
        let seq = gen_clustered(0.5, 0.7, 8).unwrap();
        assert!(seq.len() > LOG_FORM_THRESHOLD);
        let b = BlaschkeProduct::from_sequence(&seq);
        for z in [c(0.1, 0.2), c(-0.7, 0.3), c(0.95, 0.01)] {
            let direct = seq.points().iter().fold(c(1.0, 0.0), |acc, a| acc * factor(a.value(), z));
            let v = b.eval(z).unwrap();
            assert!((v - direct).norm() <= 1e-12, "{v} vs {direct}");
        }
        assert_eq!(b.eval(seq.points()[70].value()).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn inner_membership_examples() {
        let cfg = NetConfig { levels: 16, ..NetConfig::default() };
        let zero = BlaschkeProduct::new(vec![DiskPoint::ORIGIN]);
        let net = SamplingNet::build(&cfg, zero.zeros(), &[]).unwrap();
        let r = inner_membership_test(&zero, 0.6, 0.5, &net, &Thresholds::default()).unwrap();
        assert_eq!(r.carleson.classification, Classification::Bounded);
        assert_abs_diff_eq!(r.carleson.constant, 1.0, epsilon = 1e-15);

        let radial = BlaschkeProduct::from_sequence(&gen_radial(0.5, 20).unwrap());
        let net = SamplingNet::build(&NetConfig { levels: 20, ..cfg }, radial.zeros(), &[]).unwrap();
        let r = inner_membership_test(&radial, 0.6, 0.5, &net, &Thresholds::default()).unwrap();
        assert_eq!(r.carleson.classification, Classification::Bounded, "{:?}", r.carleson);

        let clustered = BlaschkeProduct::from_sequence(&gen_clustered(0.5, 0.9, 10).unwrap());
        let net = SamplingNet::build(&NetConfig { levels: 10, ..cfg }, clustered.zeros(), &[]).unwrap();
        let r = inner_membership_test(&clustered, 0.6, 0.5, &net, &Thresholds::default()).unwrap();
        assert_eq!(r.carleson.classification, Classification::Divergent);

        assert!(inner_membership_test(&zero, 0.5, 0.5, &net, &Thresholds::default()).is_err());
        assert!(inner_membership_test(&zero, 0.9, 1.0, &net, &Thresholds::default()).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn zeros() -> impl Strategy<Value = Vec<DiskPoint>> {
            proptest::collection::vec((0.0f64..0.97, 0.0f64..TAU), 1..8)
                .prop_map(|v| v.into_iter().map(|(r, t)| DiskPoint::from_polar(r, t).unwrap()).collect())
        }

        proptest! {
            #[test]
            fn modulus_bounded_and_unimodular_on_circle(z in zeros(), r in 0.0f64..1.0, t in 0.0f64..TAU) {
                let b = BlaschkeProduct::new(z);
                prop_assert!(b.eval(Complex64::from_polar(r, t)).unwrap().norm() <= 1.0 + 1e-12);
                prop_assert!((b.eval(Complex64::from_polar(1.0, t)).unwrap().norm() - 1.0).abs() <= 1e-12);
            }

            #[test]
            fn vanishes_exactly_at_zeros(z in zeros()) {
                let b = BlaschkeProduct::new(z.clone());
                for a in z {
                    prop_assert_eq!(b.eval(a.value()).unwrap(), Complex64::new(0.0, 0.0));
                }
            }

            #[test]
            fn log_derivative_matches_ratio(z in zeros(), r in 0.0f64..0.95, t in 0.0f64..TAU) {
                let b = BlaschkeProduct::new(z);
                let w = Complex64::from_polar(r, t);
                let v = b.eval(w).unwrap();
                prop_assume!(v.norm() > 1e-8);
                let ratio = b.derivative(w).unwrap() / v;
                let ld = b.log_derivative(DiskPoint::from_complex(w).unwrap()).unwrap();
                prop_assert!((ld - ratio).norm() <= 1e-10 * ratio.norm().max(1.0));
            }

            #[test]
            fn rotation_equivariance(z in zeros(), theta in 0.0f64..TAU, r in 0.0f64..1.0, t in 0.0f64..TAU) {
                let b = BlaschkeProduct::new(z);
                let w = Complex64::from_polar(r, t);
                let lhs = b.rotated(theta).eval(w).unwrap();
                let rhs = b.eval(w * Complex64::from_polar(1.0, -theta)).unwrap();
                prop_assert!((lhs - rhs).norm() <= 1e-12);
            }

            #[test]
            fn derivative_matches_difference(z in zeros(), r in 0.0f64..0.9, t in 0.0f64..TAU) {
                let b = BlaschkeProduct::new(z);
                let w = Complex64::from_polar(r, t);
                let h = 1e-6;
                let fd = (b.eval(w + h).unwrap() - b.eval(w - h).unwrap()) / (2.0 * h);
                let d = b.derivative(w).unwrap();
                prop_assert!((fd - d).norm() <= 1e-6 * d.norm().max(1.0));
            }
        }
    }
}

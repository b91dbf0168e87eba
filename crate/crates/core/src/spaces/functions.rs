//! Analytic functions on the disk with closed-form derivatives.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::blaschke::BlaschkeProduct;
use crate::error::{param, Result};
use crate::mobius::{sigma_c, sigma_derivative_c};

/// A function analytic in the disk, described so that it can be serialized
/// and evaluated together with its derivative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnalyticFunction {
    Constant { value: Complex64 },
    /// `coefficient * z^power`.
    Monomial { coefficient: Complex64, power: u32 },
    /// Polynomial `sum c_k z^k` with user-given coefficients.
    UserSeries { coefficients: Vec<Complex64> },
    /// `log(1 / (1 - z))` on the principal branch.
    LogBranch,
    /// `f_a(z) = (1 - |a|^2)^(s/p) / (1 - conj(a) z)^(2s/p)`.
    TestFnA { a: Complex64, p: f64, s: f64 },
    Blaschke { product: BlaschkeProduct },
    /// `factor * inner`.
    Scaled { factor: Complex64, inner: Box<AnalyticFunction> },
    /// `inner(sigma_b(z)) - inner(b)`.
    MobiusComposed { inner: Box<AnalyticFunction>, b: Complex64 },
}

impl AnalyticFunction {
    pub fn constant(value: Complex64) -> Self {
        AnalyticFunction::Constant { value }
    }

    pub fn monomial(coefficient: Complex64, power: u32) -> Self {
        AnalyticFunction::Monomial { coefficient, power }
    }

    pub fn identity() -> Self {
        Self::monomial(Complex64::new(1.0, 0.0), 1)
    }

    pub fn series(coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(param("series coefficients must be finite"));
        }
        Ok(AnalyticFunction::UserSeries { coefficients })
    }

    pub fn test_fn(a: Complex64, p: f64, s: f64) -> Result<Self> {
        let f = AnalyticFunction::TestFnA { a, p, s };
        f.validate()?;
        Ok(f)
    }

    pub fn blaschke(product: BlaschkeProduct) -> Self {
        AnalyticFunction::Blaschke { product }
    }

    pub fn scaled(self, factor: Complex64) -> Self {
        AnalyticFunction::Scaled { factor, inner: Box::new(self) }
    }

    /// `self ∘ sigma_b - self(b)`, the function appearing in the Möbius
    /// invariance of the `F(p, p-2, s)` seminorm.
    pub fn composed_with_sigma(self, b: Complex64) -> Result<Self> {
        let f = AnalyticFunction::MobiusComposed { inner: Box::new(self), b };
        f.validate()?;
        Ok(f)
    }

    /// Kind tag used in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            AnalyticFunction::Constant { .. } => "constant",
            AnalyticFunction::Monomial { .. } => "monomial",
            AnalyticFunction::UserSeries { .. } => "user_series",
            AnalyticFunction::LogBranch => "log_branch",
            AnalyticFunction::TestFnA { .. } => "test_fn_a",
            AnalyticFunction::Blaschke { .. } => "blaschke",
            AnalyticFunction::Scaled { .. } => "scaled",
            AnalyticFunction::MobiusComposed { .. } => "mobius_composed",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AnalyticFunction::TestFnA { a, p, s } => {
                if !(a.norm() < 1.0) {
                    return Err(param("test function parameter a must lie in the open disk"));
                }
                if !(*p > 0.0 && p.is_finite() && s.is_finite()) {
                    return Err(param("test function needs p > 0 and finite s"));
                }
                Ok(())
            }
            AnalyticFunction::Scaled { inner, .. } => inner.validate(),
            AnalyticFunction::MobiusComposed { inner, b } => {
                if !(b.norm() < 1.0) {
                    return Err(param("composition point b must lie in the open disk"));
                }
                inner.validate()
            }
            _ => Ok(()),
        }
    }

    /// Value at an interior point. `LogBranch` returns a non-finite value at
    /// `z = 1`, which is outside the open disk.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        match self {
            AnalyticFunction::Constant { value } => *value,
            AnalyticFunction::Monomial { coefficient, power } => coefficient * z.powu(*power),
            AnalyticFunction::UserSeries { coefficients } => {
                coefficients.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
            }
            AnalyticFunction::LogBranch => -(one - z).ln(),
            AnalyticFunction::TestFnA { a, p, s } => {
                let e = 2.0 * s / p;
                (1.0 - a.norm_sqr()).powf(s / p) * (one - a.conj() * z).powf(-e)
            }
            AnalyticFunction::Blaschke { product } => product.eval_unchecked(z),
            AnalyticFunction::Scaled { factor, inner } => factor * inner.eval(z),
            AnalyticFunction::MobiusComposed { inner, b } => inner.eval(sigma_c(*b, z)) - inner.eval(*b),
        }
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        match self {
            AnalyticFunction::Constant { .. } => zero,
            AnalyticFunction::Monomial { coefficient, power } => match power {
                0 => zero,
                k => coefficient * *k as f64 * z.powu(k - 1),
            },
            AnalyticFunction::UserSeries { coefficients } => coefficients
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(zero, |acc, (k, c)| acc * z + c * k as f64),
            AnalyticFunction::LogBranch => one / (one - z),
            AnalyticFunction::TestFnA { a, p, s } => {
                let e = 2.0 * s / p;
                (1.0 - a.norm_sqr()).powf(s / p) * e * a.conj() * (one - a.conj() * z).powf(-e - 1.0)
            }
            AnalyticFunction::Blaschke { product } => product.derivative_unchecked(z),
            AnalyticFunction::Scaled { factor, inner } => factor * inner.derivative(z),
            AnalyticFunction::MobiusComposed { inner, b } => {
                inner.derivative(sigma_c(*b, z)) * sigma_derivative_c(*b, z)
            }
        }
    }

    /// Points of the closed disk near which `f'` varies fast; quadrature
    /// grids and sampling nets refine towards them.
    pub fn hints(&self) -> Vec<Complex64> {
        match self {
            AnalyticFunction::LogBranch => vec![Complex64::new(1.0, 0.0)],
            AnalyticFunction::TestFnA { a, .. } => vec![*a],
            AnalyticFunction::Blaschke { product } => product.zeros().iter().map(|z| z.value()).collect(),
            AnalyticFunction::Scaled { inner, .. } => inner.hints(),
            // sigma_b is an involution, so structure at h moves to sigma_b(h).
            AnalyticFunction::MobiusComposed { inner, b } => {
                let mut h: Vec<Complex64> = inner.hints().into_iter().map(|h| sigma_c(*b, h)).collect();
                h.push(Complex64::new(0.0, 0.0));
                h
            }
            _ => Vec::new(),
        }
    }

    /// Whether the function extends continuously to the closed disk, in
    /// which case `eval` may be called on the unit circle.
    pub fn continuous_on_closure(&self) -> bool {
        match self {
            AnalyticFunction::LogBranch => false,
            AnalyticFunction::Scaled { inner, .. } | AnalyticFunction::MobiusComposed { inner, .. } => {
                inner.continuous_on_closure()
            }
            _ => true,
        }
    }

    /// Whether the function is known to be constant.
    pub fn is_constant(&self) -> bool {
        match self {
            AnalyticFunction::Constant { .. } => true,
            AnalyticFunction::Monomial { coefficient, power } => *power == 0 || coefficient.norm() == 0.0,
            AnalyticFunction::UserSeries { coefficients } => coefficients.iter().skip(1).all(|c| c.norm() == 0.0),
            AnalyticFunction::TestFnA { a, s, .. } => a.norm() == 0.0 || *s == 0.0,
            AnalyticFunction::Blaschke { product } => product.degree() == 0,
            AnalyticFunction::Scaled { factor, inner } => factor.norm() == 0.0 || inner.is_constant(),
            AnalyticFunction::MobiusComposed { inner, .. } => inner.is_constant(),
            AnalyticFunction::LogBranch => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mobius::DiskPoint;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn corpus() -> Vec<AnalyticFunction> {
        let b = BlaschkeProduct::new(vec![
            DiskPoint::new(0.5, 0.1).unwrap(),
            DiskPoint::ORIGIN,
            DiskPoint::new(-0.3, -0.6).unwrap(),
        ]);
        vec![
            AnalyticFunction::constant(c(2.0, -1.0)),
            AnalyticFunction::monomial(c(0.5, 2.0), 3),
            AnalyticFunction::series(vec![c(1.0, 0.0), c(-2.0, 1.0), c(0.0, 0.0), c(0.25, 0.5)]).unwrap(),
            AnalyticFunction::LogBranch,
            AnalyticFunction::test_fn(c(0.6, -0.3), 2.0, 0.5).unwrap(),
            AnalyticFunction::blaschke(b.clone()),
            AnalyticFunction::blaschke(b.clone()).scaled(c(0.0, 3.0)),
            AnalyticFunction::blaschke(b).composed_with_sigma(c(0.2, 0.4)).unwrap(),
            AnalyticFunction::LogBranch.composed_with_sigma(c(-0.5, 0.0)).unwrap(),
        ]
    }

    #[test]
    fn closed_form_values() {
        let z = c(0.3, 0.4);
        assert_eq!(AnalyticFunction::identity().eval(z), z);
        assert_eq!(AnalyticFunction::identity().derivative(z), c(1.0, 0.0));
        let log = AnalyticFunction::LogBranch;
        assert!((log.eval(c(0.5, 0.0)) - c(2f64.ln(), 0.0)).norm() < 1e-15);
        let f0 = AnalyticFunction::test_fn(c(0.0, 0.0), 2.0, 0.5).unwrap();
        assert_eq!(f0.eval(z), c(1.0, 0.0));
        assert!(f0.is_constant());
        let poly = AnalyticFunction::series(vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]).unwrap();
        assert!((poly.eval(z) - (1.0 + 2.0 * z + 3.0 * z * z)).norm() < 1e-15);
        assert!((poly.derivative(z) - (2.0 + 6.0 * z)).norm() < 1e-15);
    }

    #[test]
    fn composition_vanishes_at_origin() {
        for f in corpus() {
            let g = f.clone().composed_with_sigma(c(0.3, -0.2)).unwrap();
            assert!(g.eval(c(0.0, 0.0)).norm() < 1e-14, "{}", f.kind());
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(AnalyticFunction::test_fn(c(1.0, 0.0), 2.0, 0.5).is_err());
        assert!(AnalyticFunction::test_fn(c(0.5, 0.0), 0.0, 0.5).is_err());
        assert!(AnalyticFunction::identity().composed_with_sigma(c(0.0, 1.0)).is_err());
        assert!(AnalyticFunction::series(vec![c(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn serde_round_trip() {
        for f in corpus() {
            let text = serde_json::to_string(&f).unwrap();
            let back: AnalyticFunction = serde_json::from_str(&text).unwrap();
            assert_eq!(back, f);
        }
    }

    proptest! {
        #[test]
        fn derivative_matches_finite_differences(r in 0.0f64..0.9, theta in 0.0f64..std::f64::consts::TAU) {
            let z = Complex64::from_polar(r, theta);
            for f in corpus() {
                let h = 1e-5;
                let fd = (f.eval(z + h) - f.eval(z - h)) / (2.0 * h);
                let d = f.derivative(z);
                let scale = d.norm().max(1e-3);
                prop_assert!((fd - d).norm() / scale < 1e-6, "{} at {}: {} vs {}", f.kind(), z, fd, d);
            }
        }
    }
}

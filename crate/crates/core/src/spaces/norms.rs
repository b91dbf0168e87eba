//! Norms, seminorms and membership tests.
//!
//! Integral norms go through [`DiskGrid`]; suprema over the disk go through
//! a [`SamplingNet`] and the growth classifier, exactly as the Carleson
//! tests do, so that verdicts from both modules are comparable.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::carleson::{bps_carleson_ratio, Atom, CarlesonReport, PointMassMeasure};
use crate::classify::{classify, running_max, Classification, LevelValue, Thresholds};
use crate::error::{param, Result};
use crate::mobius::{kernel_sq_c, DiskPoint};
use crate::net::{NetConfig, SamplingNet};

use super::functions::AnalyticFunction;
use super::quadrature::{DiskGrid, GridSpec, QuadResult, QuadratureConfig, Verdict};

/// Exponents of the spaces `B_p(s)` and `F(p, p-2, s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceParams {
    pub p: f64,
    pub s: f64,
    /// Auxiliary exponent used by some Carleson-type tests.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
}

impl SpaceParams {
    pub fn new(p: f64, s: f64) -> Self {
        SpaceParams { p, s, t: None }
    }

    fn finite(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p.is_finite() && self.s.is_finite()) {
            return Err(param(format!("need finite p > 0 and finite s, got p={}, s={}", self.p, self.s)));
        }
        Ok(())
    }

    /// `B_p(s)` is nontrivial only for `s > 1 - p`: otherwise the weighted
    /// integral of `|f'|^p` is finite only for constant `f`.
    pub fn validate_bps(&self) -> Result<()> {
        self.finite()?;
        if !(self.s > 1.0 - self.p) {
            return Err(param(format!(
                "B_p(s) needs s > 1 - p (otherwise only constants have finite norm), got p={}, s={}",
                self.p, self.s
            )));
        }
        Ok(())
    }

    pub fn validate_fpps(&self) -> Result<()> {
        self.finite()?;
        if !(self.p + self.s > 1.0 && self.s > 0.0) {
            return Err(param(format!(
                "F(p, p-2, s) needs p + s > 1 and s > 0, got p={}, s={}",
                self.p, self.s
            )));
        }
        Ok(())
    }

    /// The range `0 < s < 1`, `max(s, 1-s) < p <= 1` of the interpolation
    /// equivalences.
    pub fn validate_interpolation(&self) -> Result<()> {
        self.finite()?;
        let (p, s) = (self.p, self.s);
        if !(s > 0.0 && s < 1.0 && p > s.max(1.0 - s) && p <= 1.0) {
            return Err(param(format!(
                "need 0 < s < 1 and max(s, 1-s) < p <= 1, got p={p}, s={s}"
            )));
        }
        Ok(())
    }

    /// Boundary exponent `p - 2 + s` of the Besov weight.
    pub fn weight_exponent(&self) -> f64 {
        self.p - 2.0 + self.s
    }
}

fn grid_spec(f: &AnalyticFunction, extra: &[Complex64]) -> GridSpec {
    let mut hints = f.hints();
    hints.extend_from_slice(extra);
    GridSpec::hints(hints)
}

/// Boundary exponent of `|f'|^p (1-|z|^2)^alpha`: known when `f'` stays
/// bounded up to the circle.
fn tail_exponent(f: &AnalyticFunction, alpha: f64) -> Option<f64> {
    f.continuous_on_closure().then_some(alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BpsNormReport {
    pub value: f64,
    /// `|f(0)|`.
    pub at_origin: f64,
    /// `∫ |f'|^p (1-|z|^2)^(p-2+s) dA`.
    pub integral: f64,
    pub quadrature: QuadResult,
    pub verdict: Verdict,
    pub config_echo: QuadratureConfig,
}

/// `|f(0)| + (∫ |f'|^p (1-|z|^2)^(p-2+s) dA)^(1/p)`.
pub fn bps_norm(f: &AnalyticFunction, params: &SpaceParams, config: &QuadratureConfig) -> Result<BpsNormReport> {
    params.validate_bps()?;
    f.validate()?;
    let at_origin = f.eval(Complex64::new(0.0, 0.0)).norm();
    let (p, alpha) = (params.p, params.weight_exponent());
    let grid = DiskGrid::build(config, &grid_spec(f, &[]))?;
    let quadrature = if f.is_constant() {
        grid.integrate(|_| 0.0, Some(alpha))
    } else {
        grid.integrate(|n| f.derivative(n.z).norm().powf(p) * n.one_minus_sq.powf(alpha), tail_exponent(f, alpha))
    };
    let integral = quadrature.value;
    Ok(BpsNormReport {
        value: at_origin + integral.max(0.0).powf(1.0 / p),
        at_origin,
        integral,
        verdict: quadrature.verdict,
        quadrature,
        config_echo: *config,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeminormReport {
    /// Estimated supremum, after the final root where one applies.
    pub value: f64,
    pub classification: Classification,
    pub slope: f64,
    /// Truncated supremum of the underlying quantity by level.
    pub per_level: Vec<LevelValue>,
    pub witness: DiskPoint,
    /// Sample points whose integral did not meet the convergence test.
    pub inconclusive_points: usize,
    pub samples: usize,
    pub config_echo: Option<QuadratureConfig>,
}

/// The `a`-net used for suprema of `F(p, p-2, s)` type integrals: the
/// origin, coarse rings, and rays towards every structure point of `f`.
pub fn fpps_net(f: &AnalyticFunction, levels: u32) -> Result<SamplingNet> {
    let hints = f.hints();
    let anchors: Vec<DiskPoint> = hints.iter().filter_map(|&h| DiskPoint::from_complex(h).ok()).collect();
    let directions: Vec<f64> = hints.iter().filter(|h| h.norm() >= 1.0).map(|h| h.arg()).collect();
    let config = NetConfig {
        levels,
        density: 1,
        ring_cap: 8,
        rays: true,
    };
    SamplingNet::build(&config, &anchors, &directions)
}

/// `sup_a ∫ |f'|^p (1-|z|^2)^(p-2) (1-|sigma_a(z)|^2)^s dA`, to the power
/// `1/p`, over the points of `net`.
///
/// Each sample point gets its own grid refined towards `a`, so the sample
/// integrals are independent jobs.
pub fn fpps_seminorm(
    f: &AnalyticFunction,
    params: &SpaceParams,
    net: &SamplingNet,
    config: &QuadratureConfig,
    thresholds: &Thresholds,
) -> Result<SeminormReport> {
    params.validate_fpps()?;
    f.validate()?;
    if net.is_empty() {
        return Err(param("sampling net must be nonempty"));
    }
    let (p, s) = (params.p, params.s);
    let alpha = params.weight_exponent();
    let constant = f.is_constant();
    let results: Vec<Result<QuadResult>> = net
        .points()
        .par_iter()
        .map(|np| {
            let a = np.point.value();
            if constant {
                return Ok(DiskGrid::build(config, &GridSpec::default())?.integrate(|_| 0.0, Some(alpha)));
            }
            let grid = DiskGrid::build(config, &grid_spec(f, &[a]))?;
            let scale = np.point.one_minus_sq().powf(s);
            Ok(grid.integrate(
                |n| {
                    let w = n.one_minus_sq.powf(alpha) * scale / kernel_sq_c(a, n.z).powf(s);
                    f.derivative(n.z).norm().powf(p) * w
                },
                tail_exponent(f, alpha),
            ))
        })
        .collect();
    let results: Vec<QuadResult> = results.into_iter().collect::<Result<_>>()?;
    let values: Vec<f64> = results.iter().map(|r| r.value).collect();
    let inconclusive_points = results.iter().filter(|r| !r.converged()).count();
    let mut report = leveled_report(net, &values, thresholds);
    report.value = report.value.max(0.0).powf(1.0 / p);
    report.inconclusive_points = inconclusive_points;
    report.config_echo = Some(*config);
    Ok(report)
}

/// Per-level running supremum of per-point values, classified.
fn leveled_report(net: &SamplingNet, values: &[f64], thresholds: &Thresholds) -> SeminormReport {
    let depth = net.max_level() as usize + 1;
    let mut per_level = vec![f64::NEG_INFINITY; depth];
    let mut best = (f64::NEG_INFINITY, DiskPoint::ORIGIN);
    for (np, &v) in net.points().iter().zip(values) {
        let l = np.level as usize;
        per_level[l] = per_level[l].max(v);
        if v > best.0 || v.is_nan() {
            best = (v, np.point);
        }
    }
    let mut levels: Vec<LevelValue> = per_level
        .iter()
        .enumerate()
        .map(|(l, &v)| LevelValue {
            level: l as u32,
            value: if v == f64::NEG_INFINITY { 0.0 } else { v },
        })
        .collect();
    running_max(&mut levels);
    let fit = classify(&levels, thresholds);
    SeminormReport {
        value: levels.last().map(|l| l.value).unwrap_or(0.0),
        classification: fit.classification,
        slope: fit.slope,
        per_level: levels,
        witness: best.1,
        inconclusive_points: 0,
        samples: net.len(),
        config_echo: None,
    }
}

/// A net with rays towards the structure points of `f`, suited to suprema
/// of `f` and `f'`.
pub fn function_net(f: &AnalyticFunction, config: &NetConfig) -> Result<SamplingNet> {
    let hints = f.hints();
    let anchors: Vec<DiskPoint> = hints.iter().filter_map(|&h| DiskPoint::from_complex(h).ok()).collect();
    let directions: Vec<f64> = hints.iter().filter(|h| h.norm() >= 1.0).map(|h| h.arg()).collect();
    SamplingNet::build(config, &anchors, &directions)
}

/// `max (1-|z|^2) |f'(z)|` over the net.
pub fn bloch_seminorm(f: &AnalyticFunction, net: &SamplingNet, thresholds: &Thresholds) -> Result<SeminormReport> {
    f.validate()?;
    if net.is_empty() {
        return Err(param("sampling net must be nonempty"));
    }
    let values: Vec<f64> = net
        .points()
        .par_iter()
        .map(|np| np.point.one_minus_sq() * f.derivative(np.point.value()).norm())
        .collect();
    Ok(leveled_report(net, &values, thresholds))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HinfReport {
    pub value: f64,
    pub classification: Classification,
    /// Classification of the interior samples alone.
    pub net: SeminormReport,
    /// Maximum of `|f|` on the unit circle, for functions continuous on the
    /// closed disk. By the maximum principle it is the supremum.
    pub boundary_max: Option<f64>,
}

/// Boundary samples used when `f` is continuous on the closed disk.
pub const BOUNDARY_SAMPLES: usize = 4096;

/// `sup |f|` over the net, completed by the boundary maximum when `f`
/// extends continuously to the circle.
pub fn hinf_norm(f: &AnalyticFunction, net: &SamplingNet, thresholds: &Thresholds) -> Result<HinfReport> {
    f.validate()?;
    if net.is_empty() {
        return Err(param("sampling net must be nonempty"));
    }
    let values: Vec<f64> = net.points().par_iter().map(|np| f.eval(np.point.value()).norm()).collect();
    let interior = leveled_report(net, &values, thresholds);
    if !f.continuous_on_closure() {
        return Ok(HinfReport {
            value: interior.value,
            classification: interior.classification,
            net: interior,
            boundary_max: None,
        });
    }
    let mut angles: Vec<f64> = (0..BOUNDARY_SAMPLES)
        .map(|k| std::f64::consts::TAU * k as f64 / BOUNDARY_SAMPLES as f64)
        .collect();
    angles.extend(f.hints().iter().filter(|h| h.norm() > 0.0).map(|h| h.arg()));
    let boundary = angles
        .par_iter()
        .map(|&t| f.eval(Complex64::from_polar(1.0, t)).norm())
        .reduce(|| 0.0, f64::max);
    Ok(HinfReport {
        value: boundary.max(interior.value),
        classification: if boundary.is_finite() {
            Classification::Bounded
        } else {
            Classification::Divergent
        },
        net: interior,
        boundary_max: Some(boundary),
    })
}

/// `||f_a||_{B_p(s)}` for each `a`, with `f_a(z) = (1-|a|^2)^(s/p) / (1-conj(a) z)^(2s/p)`.
pub fn test_function_norms(
    a_list: &[DiskPoint],
    params: &SpaceParams,
    config: &QuadratureConfig,
) -> Result<Vec<BpsNormReport>> {
    let (p, s) = (params.p, params.s);
    if !(p > 1.0 && s > 0.0 && s <= 1.0) {
        return Err(param(format!("test functions need p > 1 and 0 < s <= 1, got p={p}, s={s}")));
    }
    a_list
        .iter()
        .map(|a| bps_norm(&AnalyticFunction::test_fn(a.value(), p, s)?, params, config))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Membership {
    Member,
    NotMember,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierReport {
    pub verdict: Membership,
    pub hinf: HinfReport,
    /// Carleson ratio of `|g'|^p (1-|z|^2)^(p-2+s) dA` discretized on the
    /// grid cells.
    pub carleson: CarlesonReport,
    /// The same ratio on a grid one boundary level coarser.
    pub carleson_coarse: f64,
    /// Relative change of the ratio between the two grids.
    pub discretization_change: f64,
    pub config_echo: QuadratureConfig,
}

fn cell_measure(g: &AnalyticFunction, params: &SpaceParams, config: &QuadratureConfig) -> Result<PointMassMeasure> {
    let grid = DiskGrid::build(config, &grid_spec(g, &[]))?;
    let (p, alpha) = (params.p, params.weight_exponent());
    let density = grid.evaluate(|n| g.derivative(n.z).norm().powf(p) * n.one_minus_sq.powf(alpha));
    let masses = grid.cell_sums(&density);
    let atoms = grid
        .cells()
        .iter()
        .zip(masses)
        .filter(|(_, m)| *m > 0.0)
        .map(|(c, m)| {
            Ok(Atom {
                point: DiskPoint::from_complex(c.center)?,
                weight: m,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    PointMassMeasure::new(atoms)
}

/// `g` multiplies `B_p(s)` exactly when it is bounded and
/// `|g'|^p (1-|z|^2)^(p-2+s) dA` is a Carleson measure for `B_p(s)`.
pub fn multiplier_test(
    g: &AnalyticFunction,
    params: &SpaceParams,
    config: &QuadratureConfig,
    net_config: &NetConfig,
    thresholds: &Thresholds,
) -> Result<MultiplierReport> {
    params.validate_fpps()?;
    params.validate_bps()?;
    g.validate()?;
    let net = function_net(g, net_config)?;
    let hinf = hinf_norm(g, &net, thresholds)?;
    let s = params.s.min(1.0);
    let fine = cell_measure(g, params, config)?;
    let carleson = bps_carleson_ratio(&fine, s, &net, thresholds)?;
    let coarse_config = QuadratureConfig {
        boundary_levels: config.boundary_levels.saturating_sub(1).max(3),
        hint_margin: config.hint_margin.saturating_sub(1),
        ..*config
    };
    let coarse = bps_carleson_ratio(&cell_measure(g, params, &coarse_config)?, s, &net, thresholds)?;
    let discretization_change = if carleson.constant > 0.0 {
        (carleson.constant - coarse.constant).abs() / carleson.constant
    } else {
        coarse.constant.abs()
    };
    let verdict = match (hinf.classification, carleson.classification) {
        (Classification::Divergent, _) | (_, Classification::Divergent) => Membership::NotMember,
        (Classification::Bounded, Classification::Bounded) => Membership::Member,
        _ => Membership::Inconclusive,
    };
    Ok(MultiplierReport {
        verdict,
        hinf,
        carleson,
        carleson_coarse: coarse.constant,
        discretization_change,
        config_echo: *config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blaschke::BlaschkeProduct;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn th() -> Thresholds {
        Thresholds::default()
    }

    fn factor(a: f64) -> AnalyticFunction {
        AnalyticFunction::blaschke(BlaschkeProduct::new(vec![DiskPoint::real(a).unwrap()]))
    }

    #[test]
    fn parameter_ranges() {
        assert!(SpaceParams::new(1.0, 0.0).validate_bps().is_err());
        assert!(SpaceParams::new(1.0, 0.5).validate_bps().is_ok());
        assert!(SpaceParams::new(0.5, 0.4).validate_fpps().is_err());
        assert!(SpaceParams::new(0.6, 0.5).validate_interpolation().is_ok());
        assert!(SpaceParams::new(0.4, 0.5).validate_interpolation().is_err());
        assert!(SpaceParams::new(1.2, 0.5).validate_interpolation().is_err());
    }

    #[test]
    fn bps_closed_forms() {
        let k = bps_norm(&AnalyticFunction::constant(c(3.0, 4.0)), &SpaceParams::new(1.0, 0.5), &cfg()).unwrap();
        assert_eq!(k.value, 5.0);
        let id = bps_norm(&AnalyticFunction::identity(), &SpaceParams::new(1.0, 1.0), &cfg()).unwrap();
        assert!(rel(id.value, 1.0) < 1e-9, "{}", id.value);
        let sq = AnalyticFunction::monomial(c(1.0, 0.0), 2);
        let v = bps_norm(&sq, &SpaceParams::new(2.0, 1.0), &cfg()).unwrap();
        assert!(rel(v.value, (2.0f64 / 3.0).sqrt()) < 1e-9, "{}", v.value);
        assert!(v.verdict == Verdict::Converged);
    }

    #[test]
    fn bps_singular_weight() {
        // ∫ (1-|z|^2)^(p-2+s) dA = 1 / (p - 1 + s) for f(z) = z.
        let params = SpaceParams::new(0.8, 0.5);
        let v = bps_norm(&AnalyticFunction::identity(), &params, &cfg()).unwrap();
        let exact = (1.0f64 / (0.8 - 1.0 + 0.5)).powf(1.0 / 0.8);
        assert!(rel(v.value, exact) < 1e-6, "{} vs {exact}", v.value);
    }

    #[test]
    fn bps_is_homogeneous() {
        let f = factor(0.7);
        let params = SpaceParams::new(1.0, 0.5);
        let a = bps_norm(&f, &params, &cfg()).unwrap().value;
        let b = bps_norm(&f.clone().scaled(c(0.0, -2.5)), &params, &cfg()).unwrap().value;
        assert!(rel(b, 2.5 * a) < 1e-10, "{b} vs {a}");
    }

    #[test]
    fn fpps_identity_at_origin() {
        // At a = 0 the integral is ∫ (1-|z|^2)^(p-2+s) dA = 1 / (p - 1 + s).
        let params = SpaceParams::new(1.0, 0.5);
        let net = SamplingNet::from_points(&[DiskPoint::ORIGIN]).unwrap();
        let r = fpps_seminorm(&AnalyticFunction::identity(), &params, &net, &cfg(), &th()).unwrap();
        assert!(rel(r.value, 2.0) < 1e-8, "{}", r.value);
    }

    #[test]
    fn fpps_constants_and_log() {
        let params = SpaceParams::new(1.0, 0.5);
        let k = AnalyticFunction::constant(c(1.0, 1.0));
        let net = fpps_net(&k, 8).unwrap();
        assert_eq!(fpps_seminorm(&k, &params, &net, &cfg(), &th()).unwrap().value, 0.0);
        let log = AnalyticFunction::LogBranch;
        let net = fpps_net(&log, 10).unwrap();
        let r = fpps_seminorm(&log, &params, &net, &cfg(), &th()).unwrap();
        assert_eq!(r.classification, Classification::Bounded, "{r:?}");
    }

    #[test]
    fn bloch_examples() {
        let net = function_net(&factor(0.9), &NetConfig::default()).unwrap();
        let b = bloch_seminorm(&factor(0.9), &net, &th()).unwrap();
        assert!((b.value - 1.0).abs() < 1e-12 && (b.witness.value() - c(0.9, 0.0)).norm() < 1e-15);
        let id = bloch_seminorm(&AnalyticFunction::identity(), &net, &th()).unwrap();
        assert_eq!(id.value, 1.0);
        let k = bloch_seminorm(&AnalyticFunction::constant(c(1.0, 0.0)), &net, &th()).unwrap();
        assert_eq!(k.value, 0.0);
    }

    #[test]
    fn hinf_examples() {
        let net = SamplingNet::build(&NetConfig::default(), &[], &[0.0]).unwrap();
        let id = hinf_norm(&AnalyticFunction::identity(), &net, &th()).unwrap();
        assert!((id.value - 1.0).abs() < 1e-15);
        let zeros: Vec<DiskPoint> = [(0.5, 0.2), (-0.7, 0.1), (0.0, 0.95)]
            .iter()
            .map(|&(x, y)| DiskPoint::new(x, y).unwrap())
            .collect();
        let b = hinf_norm(&AnalyticFunction::blaschke(BlaschkeProduct::new(zeros)), &net, &th()).unwrap();
        assert!((b.value - 1.0).abs() < 1e-10);
        assert_eq!(b.classification, Classification::Bounded);
        let log = hinf_norm(&AnalyticFunction::LogBranch, &net, &th()).unwrap();
        assert_eq!(log.classification, Classification::Divergent);
    }

    #[test]
    fn test_functions_stay_bounded() {
        let params = SpaceParams::new(2.0, 0.5);
        let a: Vec<DiskPoint> = [0.0, 0.9, 0.99].iter().map(|&x| DiskPoint::real(x).unwrap()).collect();
        let r = test_function_norms(&a, &params, &cfg()).unwrap();
        assert!(rel(r[0].value, 1.0) < 1e-12);
        let ratio = r[2].value / r[1].value;
        assert!((0.5..=2.0).contains(&ratio), "{ratio}");
        assert!(test_function_norms(&a, &SpaceParams::new(1.0, 0.5), &cfg()).is_err());
    }

    #[test]
    fn multiplier_examples() {
        let params = SpaceParams::new(1.0, 0.5);
        let net = NetConfig { levels: 10, ..NetConfig::default() };
        let k = multiplier_test(&AnalyticFunction::constant(c(2.0, 0.0)), &params, &cfg(), &net, &th()).unwrap();
        assert_eq!(k.verdict, Membership::Member);
        let b = multiplier_test(&factor(0.5), &params, &cfg(), &net, &th()).unwrap();
        assert_eq!(b.verdict, Membership::Member, "{:?}", b.carleson);
        let log = multiplier_test(&AnalyticFunction::LogBranch, &params, &cfg(), &net, &th()).unwrap();
        assert_eq!(log.verdict, Membership::NotMember);
    }
}

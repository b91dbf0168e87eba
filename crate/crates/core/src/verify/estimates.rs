//! Two classical integral estimates checked by quadrature.
//!
//! The first is the three-regime growth of
//! `I_{c,t}(z) = ∫ (1-|w|^2)^t / |1 - conj(z) w|^(2+t+c) dA(w)` as `|z| → 1`:
//! bounded for `c < 0`, logarithmic for `c = 0` and of order
//! `(1-|z|^2)^-c` for `c > 0`. The second is the two-kernel bound
//! `∫ (1-|w|^2)^s / (|1 - conj(w) z|^r |1 - conj(w) ζ|^t) dA(w)
//!  <= C (1-|z|^2)^(2+s-r) / |1 - conj(ζ) z|^t`, where the empirical `C` is
//! the maximum ratio over sampled pairs and must be stable under grid
//! refinement.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{classify, linear_fit, Classification, LevelValue, Thresholds};
use crate::error::{param, Result};
use crate::mobius::{kernel_sq_c, one_minus_sq_c, sigma_c, DiskPoint};
use crate::spaces::quadrature::{integrate_disk, GridSpec, QuadratureConfig};

/// Exponent tolerance of the power regime.
pub const ZHU_EXPONENT_TOL: f64 = 0.05;
/// Allowed spread of `I / log(2/(1-|z|^2))` in the logarithmic regime.
pub const ZHU_LOG_BRACKET: f64 = 3.0;
/// Samples used by the exponent fit.
const FIT_WINDOW: usize = 4;
/// Largest relative change of the empirical constant under refinement.
pub const FORELLI_RUDIN_STABILITY: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZhuCase {
    Bounded,
    Logarithmic,
    Power,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZhuSample {
    pub z: DiskPoint,
    pub one_minus_sq: f64,
    pub value: f64,
    pub converged: bool,
    /// `value / log(2/(1-|z|^2))`.
    pub log_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZhuReport {
    pub c: f64,
    pub t: f64,
    pub case: ZhuCase,
    pub samples: Vec<ZhuSample>,
    /// Least-squares slope of `ln I` against `ln(1/(1-|z|^2))` over the
    /// outermost samples.
    pub fitted_exponent: f64,
    /// `max / min` of the log ratios.
    pub log_ratio_spread: f64,
    pub classification: Classification,
    pub converged: bool,
    pub pass: bool,
}

/// Radii `1 - 2^-j` for `j = 1..=levels` on the positive axis.
pub fn zhu_samples(levels: u32) -> Vec<DiskPoint> {
    (1..=levels.min(crate::sequences::LEVEL_CAP))
        .map(|j| DiskPoint::real(1.0 - 0.5f64.powi(j as i32)).expect("inside the disk"))
        .collect()
}

fn zhu_integral(z: Complex64, c: f64, t: f64, config: &QuadratureConfig) -> Result<(f64, bool)> {
    let half = 0.5 * (2.0 + t + c);
    let r = integrate_disk(
        |n| n.one_minus_sq.powf(t) / kernel_sq_c(z, n.z).powf(half),
        config,
        &GridSpec::hints(vec![z]),
        Some(t),
    )?;
    Ok((r.value, r.converged()))
}

pub fn validate_zhu_estimate(c: f64, t: f64, z_samples: &[DiskPoint], config: &QuadratureConfig) -> Result<ZhuReport> {
    if !(t > -1.0) || !t.is_finite() || !c.is_finite() {
        return Err(param(format!("need finite c and t > -1, got c={c}, t={t}")));
    }
    if z_samples.len() < 2 {
        return Err(param("at least two sample points are needed"));
    }
    config.validate()?;
    let mut ordered = z_samples.to_vec();
    ordered.sort_by(|a, b| b.one_minus_sq().total_cmp(&a.one_minus_sq()));
    let samples: Vec<ZhuSample> = ordered
        .par_iter()
        .map(|&z| {
            let (value, converged) = zhu_integral(z.value(), c, t, config)?;
            let one_minus_sq = z.one_minus_sq();
            Ok(ZhuSample {
                z,
                one_minus_sq,
                value,
                converged,
                log_ratio: value / (2.0 / one_minus_sq).ln(),
            })
        })
        .collect::<Result<_>>()?;

    let tail = &samples[samples.len().saturating_sub(FIT_WINDOW)..];
    let x: Vec<f64> = tail.iter().map(|s| -s.one_minus_sq.ln()).collect();
    let y: Vec<f64> = tail.iter().map(|s| s.value.ln()).collect();
    let fitted_exponent = linear_fit(&x, &y).map(|(slope, _)| slope).unwrap_or(f64::NAN);
    let ratios = samples.iter().map(|s| s.log_ratio);
    let spread = ratios.clone().fold(0.0, f64::max) / ratios.fold(f64::INFINITY, f64::min);
    let levels: Vec<LevelValue> = samples
        .iter()
        .enumerate()
        .map(|(k, s)| LevelValue { level: k as u32, value: s.value })
        .collect();
    let classification = classify(&levels, &Thresholds::default()).classification;
    let converged = samples.iter().all(|s| s.converged);
    let (case, pass) = if c < 0.0 {
        (ZhuCase::Bounded, classification == Classification::Bounded)
    } else if c == 0.0 {
        (ZhuCase::Logarithmic, spread <= ZHU_LOG_BRACKET)
    } else {
        (ZhuCase::Power, (fitted_exponent - c).abs() <= ZHU_EXPONENT_TOL)
    };
    Ok(ZhuReport {
        c,
        t,
        case,
        samples,
        fitted_exponent,
        log_ratio_spread: spread,
        classification,
        converged,
        pass: pass && converged,
    })
}

/// Seeded `(z, ζ)` pairs: the first half independent, the second half
/// pseudo-hyperbolically close (`ζ = σ_z(v)` with `|v| <= 1/2`). Moduli of
/// `z` reach `1 - 2^-12`.
pub fn forelli_rudin_pairs(count: usize, seed: u64) -> Vec<(DiskPoint, DiskPoint)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point = |rng: &mut ChaCha8Rng| {
        let depth: f64 = rng.gen_range(0.0..12.0);
        let r = 1.0 - 0.5f64.powf(depth);
        Complex64::from_polar(r, std::f64::consts::TAU * rng.gen::<f64>())
    };
    (0..count)
        .map(|k| {
            let z = point(&mut rng);
            let zeta = if k < count / 2 {
                point(&mut rng)
            } else {
                let v = Complex64::from_polar(0.5 * rng.gen::<f64>(), std::f64::consts::TAU * rng.gen::<f64>());
                sigma_c(z, v)
            };
            (
                DiskPoint::from_complex(z).expect("inside the disk"),
                DiskPoint::from_complex(zeta).expect("inside the disk"),
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRatio {
    pub z: DiskPoint,
    pub zeta: DiskPoint,
    pub ratio: f64,
    pub refined_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForelliRudinReport {
    pub s: f64,
    pub r: f64,
    pub t: f64,
    pub pairs: usize,
    /// Empirical constant at the configured grid.
    pub max_ratio: f64,
    /// Empirical constant one boundary level deeper.
    pub refined_max_ratio: f64,
    pub relative_change: f64,
    pub witness: Option<PairRatio>,
    pub unconverged: usize,
    pub stable: bool,
}

fn forelli_rudin_ratio(z: Complex64, zeta: Complex64, s: f64, r: f64, t: f64, config: &QuadratureConfig) -> Result<(f64, bool)> {
    let lhs = integrate_disk(
        |n| n.one_minus_sq.powf(s) / (kernel_sq_c(z, n.z).powf(0.5 * r) * kernel_sq_c(zeta, n.z).powf(0.5 * t)),
        config,
        &GridSpec::hints(vec![z, zeta]),
        Some(s),
    )?;
    let rhs = one_minus_sq_c(z).powf(2.0 + s - r) / kernel_sq_c(zeta, z).powf(0.5 * t);
    Ok((lhs.value / rhs, lhs.converged()))
}

pub fn validate_forelli_rudin(
    s: f64,
    r: f64,
    t: f64,
    pairs: &[(DiskPoint, DiskPoint)],
    config: &QuadratureConfig,
) -> Result<ForelliRudinReport> {
    if !(s > -1.0 && r > 0.0 && t > 0.0 && t < s + 2.0 && s + 2.0 < r) {
        return Err(param(format!("need s > -1, r > 0, t > 0 and t < s + 2 < r, got s={s}, r={r}, t={t}")));
    }
    if pairs.is_empty() {
        return Err(param("at least one pair is needed"));
    }
    config.validate()?;
    // Past the depth of a pair the shell sums halve only to leading order;
    // the next term decays by a quarter per shell and needs a few extra
    // shells before the tail-corrected sum settles at the tolerance.
    let config = &QuadratureConfig {
        hint_margin: config.hint_margin + 4,
        ..*config
    };
    let refined = config.refined();
    let rows: Vec<(PairRatio, bool)> = pairs
        .par_iter()
        .map(|&(z, zeta)| {
            let (ratio, ok) = forelli_rudin_ratio(z.value(), zeta.value(), s, r, t, config)?;
            let (refined_ratio, ok2) = forelli_rudin_ratio(z.value(), zeta.value(), s, r, t, &refined)?;
            Ok((PairRatio { z, zeta, ratio, refined_ratio }, ok && ok2))
        })
        .collect::<Result<_>>()?;
    let max_ratio = rows.iter().map(|(p, _)| p.ratio).fold(0.0, f64::max);
    let refined_max_ratio = rows.iter().map(|(p, _)| p.refined_ratio).fold(0.0, f64::max);
    let witness = rows
        .iter()
        .map(|(p, _)| p)
        .max_by(|a, b| a.ratio.total_cmp(&b.ratio))
        .cloned();
    let relative_change = (refined_max_ratio - max_ratio).abs() / max_ratio.max(f64::MIN_POSITIVE);
    Ok(ForelliRudinReport {
        s,
        r,
        t,
        pairs: pairs.len(),
        max_ratio,
        refined_max_ratio,
        relative_change,
        witness,
        unconverged: rows.iter().filter(|(_, ok)| !ok).count(),
        stable: max_ratio.is_finite() && relative_change < FORELLI_RUDIN_STABILITY,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Power series of `I_{c,t}(x)` for real `x`: with `λ = (2+t+c)/2`,
    /// `I = Σ [(λ)_n / n!]^2 B(n+1, t+1) x^(2n)`.
    fn zhu_series(x: f64, c: f64, t: f64) -> f64 {
        let lambda = 0.5 * (2.0 + t + c);
        // n = 0 term: B(1, t+1) = 1/(t+1).
        let mut coef = 1.0; // (λ)_n / n!
        let mut beta = 1.0 / (t + 1.0); // B(n+1, t+1)
        let mut power = 1.0;
        let mut sum = 0.0;
        for n in 0..200_000u32 {
            let term = coef * coef * beta * power;
            sum += term;
            if term < 1e-17 * sum && n > 10 {
                break;
            }
            let nf = n as f64;
            coef *= (lambda + nf) / (nf + 1.0);
            beta *= (nf + 1.0) / (nf + t + 2.0);
            power *= x * x;
        }
        sum
    }

    #[test]
    fn zhu_integral_matches_series() {
        let cfg = QuadratureConfig::default();
        for &(c, t) in &[(-0.5, 0.0), (0.0, 0.5), (1.0, 0.0), (1.5, 0.5)] {
            for &x in &[0.0, 0.5, 0.9, 0.99] {
                let (v, ok) = zhu_integral(Complex64::new(x, 0.0), c, t, &cfg).unwrap();
                let exact = zhu_series(x, c, t);
                assert!(ok);
                assert!((v - exact).abs() / exact < 1e-6, "c={c} t={t} x={x}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn zhu_regimes() {
        let cfg = QuadratureConfig::default();
        let z = zhu_samples(14);
        let r = validate_zhu_estimate(1.0, 0.0, &z, &cfg).unwrap();
        assert!(r.pass, "{}", r.fitted_exponent);
        let r = validate_zhu_estimate(-0.5, 0.0, &z, &cfg).unwrap();
        assert!(r.pass && r.classification == Classification::Bounded);
        let r = validate_zhu_estimate(0.0, 0.5, &z, &cfg).unwrap();
        assert!(r.pass, "{}", r.log_ratio_spread);
        assert!(validate_zhu_estimate(0.0, -1.0, &z, &cfg).is_err());
    }

    #[test]
    fn forelli_rudin_origin_pair() {
        let o = DiskPoint::ORIGIN;
        let r = validate_forelli_rudin(0.5, 3.0, 1.5, &[(o, o)], &QuadratureConfig::default()).unwrap();
        assert!((r.max_ratio - 1.0 / 1.5).abs() < 1e-9);
        assert!(r.stable);
    }

    #[test]
    fn forelli_rudin_constraints_and_pairs() {
        let o = DiskPoint::ORIGIN;
        let cfg = QuadratureConfig::default();
        assert!(validate_forelli_rudin(0.0, 1.5, 1.0, &[(o, o)], &cfg).is_err());
        assert!(validate_forelli_rudin(0.0, 2.5, 2.5, &[(o, o)], &cfg).is_err());
        let pairs = forelli_rudin_pairs(20, 3);
        assert_eq!(pairs, forelli_rudin_pairs(20, 3));
        for (z, zeta) in &pairs[10..] {
            assert!(crate::mobius::pseudo_hyperbolic(*z, *zeta) <= 0.5 + 1e-9);
        }
        let r = validate_forelli_rudin(0.0, 2.5, 1.0, &pairs, &cfg).unwrap();
        assert!(r.stable, "{r:?}");
    }
}

//! Multipliers of `B_p(s)` against `F(p, p-2, s) ∩ H^∞`.
//!
//! For every function of the family the multiplier test (boundedness plus
//! the Carleson condition on `|g'|^p (1-|z|^2)^(p-2+s) dA`) is compared with
//! the intersection test (the `F(p, p-2, s)` seminorm and the sup norm, each
//! classified separately).

use serde::{Deserialize, Serialize};

use crate::classify::{Classification, Thresholds};
use crate::error::{param, Result};
use crate::net::NetConfig;
use crate::spaces::{fpps_net, fpps_seminorm, function_net, hinf_norm, multiplier_test, AnalyticFunction, Membership, QuadratureConfig, SpaceParams};

use super::{Condition, EquivalenceReport, FamilyMeta};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prop22Config {
    pub quadrature: QuadratureConfig,
    /// Net for the sup norm and the Carleson ratio.
    pub net: NetConfig,
    /// Depth of the `a`-net of the seminorm.
    pub seminorm_levels: u32,
    pub thresholds: Thresholds,
}

impl Default for Prop22Config {
    fn default() -> Self {
        Prop22Config {
            quadrature: QuadratureConfig {
                rel_tol: 1e-4,
                ..QuadratureConfig::default()
            },
            net: NetConfig {
                levels: 10,
                ..NetConfig::default()
            },
            seminorm_levels: 10,
            thresholds: Thresholds::default(),
        }
    }
}

fn as_classification(m: Membership) -> Classification {
    match m {
        Membership::Member => Classification::Bounded,
        Membership::NotMember => Classification::Divergent,
        Membership::Inconclusive => Classification::Inconclusive,
    }
}

/// One report per function of the family.
pub fn check_prop22(g_family: &[AnalyticFunction], p: f64, s: f64, config: &Prop22Config) -> Result<Vec<EquivalenceReport>> {
    if !(p > 0.0 && p <= 1.0 && s > 1.0 - p && s <= 1.0) {
        return Err(param(format!("need 0 < p <= 1 and 1 - p < s <= 1, got p={p}, s={s}")));
    }
    let params = SpaceParams::new(p, s);
    let th = &config.thresholds;
    g_family
        .iter()
        .map(|g| {
            let mult = multiplier_test(g, &params, &config.quadrature, &config.net, th)?;
            let semi = fpps_seminorm(g, &params, &fpps_net(g, config.seminorm_levels)?, &config.quadrature, th)?;
            let hinf = hinf_norm(g, &function_net(g, &config.net)?, th)?;
            let both = match (semi.classification, hinf.classification) {
                (Classification::Bounded, Classification::Bounded) => Classification::Bounded,
                (Classification::Divergent, _) | (_, Classification::Divergent) => Classification::Divergent,
                _ => Classification::Inconclusive,
            };
            let multiplier = Condition {
                name: "multiplier".to_string(),
                classification: as_classification(mult.verdict),
                converged: mult.discretization_change < 0.1,
                skipped: false,
                slope: mult.carleson.slope,
                per_level: mult.carleson.levels.clone(),
                detail: serde_json::to_value(&mult).unwrap_or(serde_json::Value::Null),
            };
            let intersection = Condition {
                name: "fpps_and_hinf".to_string(),
                classification: both,
                // An unbounded function settles the intersection whatever
                // the seminorm quadrature reports.
                converged: semi.inconclusive_points == 0 || hinf.classification == Classification::Divergent,
                skipped: false,
                slope: semi.slope,
                per_level: semi.per_level.clone(),
                detail: serde_json::json!({ "seminorm": semi, "hinf": hinf }),
            };
            let mut notes = Vec::new();
            if !multiplier.converged {
                notes.push(format!(
                    "Carleson ratio moved by {:.3} between grid levels",
                    mult.discretization_change
                ));
            }
            Ok(EquivalenceReport::new(
                "prop22",
                FamilyMeta::named(g.kind()),
                serde_json::json!({ "p": p, "s": s, "function": g }),
                vec![multiplier, intersection],
                notes,
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blaschke::BlaschkeProduct;
    use crate::mobius::DiskPoint;
    use num_complex::Complex64;

    #[test]
    fn examples_agree() {
        let family = vec![
            AnalyticFunction::constant(Complex64::new(1.5, -0.5)),
            AnalyticFunction::blaschke(BlaschkeProduct::new(vec![
                DiskPoint::real(0.5).unwrap(),
                DiskPoint::new(0.0, -0.75).unwrap(),
            ])),
            AnalyticFunction::LogBranch,
        ];
        let reports = check_prop22(&family, 1.0, 0.5, &Prop22Config::default()).unwrap();
        let expected = [Classification::Bounded, Classification::Bounded, Classification::Divergent];
        for (r, want) in reports.iter().zip(expected) {
            assert!(r.consistent, "{}: {:?}", r.family.label, r.conditions.iter().map(|c| c.classification).collect::<Vec<_>>());
            assert_eq!(r.conditions[0].classification, want, "{}", r.family.label);
        }
    }

    #[test]
    fn parameter_range() {
        let f = [AnalyticFunction::identity()];
        assert!(check_prop22(&f, 1.2, 0.5, &Prop22Config::default()).is_err());
        assert!(check_prop22(&f, 0.6, 0.3, &Prop22Config::default()).is_err());
    }
}

//! Interpolating sequences for `F(p, p-2, s) ∩ H^∞`.
//!
//! Conditions compared: (c) separation plus the box form of the
//! `s`-Carleson condition, (d) separation plus the kernel form with
//! exponents `(s, t)`, and, when (c) holds, a constructive surrogate for
//! (b): seeded interpolation problems on the leading nodes are solved with
//! perturbed Blaschke products whose membership is then tested.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::carleson::{box_constant, kernel_constant, kernel_constant_on_ladder, weights_from_sequence};
use crate::classify::{Classification, LevelValue, Thresholds};
use crate::earl::{earl_interpolate_with, EarlConfig, InterpolationProblem};
use crate::error::{param, Result};
use crate::net::{NetConfig, SamplingNet};
use crate::sequences::DiskSequence;
use crate::spaces::SpaceParams;

use super::{box_generations, sequence_net_config, Condition, EquivalenceReport, FamilyMeta};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem21Config {
    pub net: NetConfig,
    pub thresholds: Thresholds,
    pub earl: EarlConfig,
    /// Number of leading nodes handed to the interpolation solver; the
    /// trials differ only in their target values.
    pub subset_size: usize,
    pub seed: u64,
}

impl Default for Theorem21Config {
    fn default() -> Self {
        Theorem21Config {
            net: NetConfig::default(),
            thresholds: Thresholds::default(),
            // The certificate floor grows with the amplification of deep
            // node sets, so the default solver tolerance is relaxed here.
            earl: EarlConfig {
                tol: 1e-9,
                ..EarlConfig::default()
            },
            subset_size: 12,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Trial {
    nodes: usize,
    delta: f64,
    outcome: std::result::Result<TrialSuccess, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TrialSuccess {
    max_residual: f64,
    max_perturbation: f64,
    amplification: f64,
    iterations: usize,
    membership: Classification,
    membership_slope: f64,
    membership_levels: Vec<LevelValue>,
}

fn trial(seq: &DiskSequence, index: u64, params: &SpaceParams, net_config: &NetConfig, config: &Theorem21Config) -> Result<Trial> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index));
    // The leading section: the `subset_size` shallowest nodes, matching the
    // generation truncation used by every ladder. Deeper nodes are out of
    // reach of a double-precision certificate: a zero stored as a double
    // sits within about 1e-16 / (1 - |z|) of its target in the
    // pseudo-hyperbolic metric, and the scale multiplies that error.
    let mut chosen: Vec<usize> = (0..seq.len()).collect();
    chosen.sort_by(|&i, &j| seq.points()[j].one_minus_sq().total_cmp(&seq.points()[i].one_minus_sq()).then(i.cmp(&j)));
    chosen.truncate(config.subset_size);
    chosen.sort_unstable();
    let nodes = DiskSequence::new(chosen.iter().map(|&i| seq.points()[i]).collect(), "subset")?;
    let values: Vec<Complex64> = (0..nodes.len())
        .map(|_| {
            let r = rng.gen::<f64>().sqrt();
            Complex64::from_polar(r, std::f64::consts::TAU * rng.gen::<f64>())
        })
        .collect();
    let problem = InterpolationProblem::new(nodes, values)?;
    let delta = problem.delta();
    let outcome = match earl_interpolate_with(&problem, &config.earl) {
        Ok(sol) => {
            // Membership of the perturbed product: the kernel form at t = s on
            // its zeros, laddered by the generations of the original nodes.
            let net = SamplingNet::build(net_config, sol.perturbed_zeros.points(), &[])?;
            let ladder: Vec<u32> = problem.nodes.points().iter().map(|p| p.generation()).collect();
            let mu = weights_from_sequence(&sol.perturbed_zeros, params.s)?;
            let membership = kernel_constant_on_ladder(&mu, &ladder, params.s, params.s, &net, &config.thresholds)?;
            Ok(TrialSuccess {
                max_residual: sol.max_residual,
                max_perturbation: sol.max_perturbation,
                amplification: sol.amplification,
                iterations: sol.iterations,
                membership: membership.classification,
                membership_slope: membership.slope,
                membership_levels: membership.levels,
            })
        }
        Err(e) => Err(e.to_string()),
    };
    Ok(Trial {
        nodes: problem.nodes.len(),
        delta,
        outcome,
    })
}

pub fn check_theorem21(
    seq: &DiskSequence,
    p: f64,
    s: f64,
    t: f64,
    trials: usize,
    config: &Theorem21Config,
) -> Result<EquivalenceReport> {
    let params = SpaceParams { p, s, t: Some(t) };
    params.validate_interpolation()?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(param(format!("t must be positive, got {t}")));
    }
    let th = &config.thresholds;
    let family = FamilyMeta::of(seq);
    let separated = !family.separation.as_ref().is_some_and(|r| r.duplicates);
    let net_config = sequence_net_config(seq, &config.net);
    let mut notes = vec!["condition (a) is exercised through the interpolation surrogate (b)".to_string()];

    let (c, d) = if separated {
        let mu = weights_from_sequence(seq, s)?;
        let boxes = box_constant(&mu, s, box_generations(seq), th)?;
        let net = SamplingNet::build(&net_config, seq.points(), &[])?;
        let kernel = kernel_constant(&mu, s, t, &net, th)?;
        (Condition::from_carleson("c", &boxes), Condition::from_carleson("d", &kernel))
    } else {
        notes.push("NOT SEPARATED: the sequence has coincident points".to_string());
        let failed = |name: &str| Condition {
            classification: Classification::Divergent,
            skipped: false,
            ..Condition::skipped(name, "not separated")
        };
        (failed("c"), failed("d"))
    };

    let b = if c.classification == Classification::Bounded {
        let runs: Vec<Trial> = (0..trials as u64)
            .map(|k| trial(seq, k, &params, &net_config, config))
            .collect::<Result<_>>()?;
        let failures = runs.iter().filter(|r| r.outcome.is_err()).count();
        let divergent = runs
            .iter()
            .filter(|r| matches!(&r.outcome, Ok(ok) if ok.membership == Classification::Divergent))
            .count();
        let all_bounded = runs
            .iter()
            .all(|r| matches!(&r.outcome, Ok(ok) if ok.membership == Classification::Bounded));
        let classification = if divergent > 0 {
            Classification::Divergent
        } else if all_bounded {
            Classification::Bounded
        } else {
            Classification::Inconclusive
        };
        if failures > 0 {
            notes.push(format!("{failures} of {trials} interpolation trials failed"));
        }
        Condition {
            name: "b".to_string(),
            classification,
            converged: failures == 0,
            skipped: trials == 0,
            slope: 0.0,
            per_level: Vec::new(),
            detail: serde_json::to_value(&runs).unwrap_or(serde_json::Value::Null),
        }
    } else {
        Condition::skipped("b", "interpolation step skipped: condition (c) does not hold")
    };

    Ok(EquivalenceReport::new(
        "theorem21",
        family,
        serde_json::json!({ "p": p, "s": s, "t": t, "trials": trials, "seed": config.seed }),
        vec![c, d, b],
        notes,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mobius::DiskPoint;
    use crate::sequences::{gen_clustered, gen_radial};

    #[test]
    fn radial_family_is_consistent() {
        let r = check_theorem21(&gen_radial(0.5, 12).unwrap(), 0.6, 0.5, 1.0, 3, &Theorem21Config::default()).unwrap();
        assert!(r.consistent, "{r:#?}");
        for c in &r.conditions {
            assert_eq!(c.classification, Classification::Bounded, "{}", c.name);
        }
    }

    #[test]
    fn clustered_family_is_consistent() {
        let r = check_theorem21(&gen_clustered(0.5, 0.9, 8).unwrap(), 0.6, 0.5, 1.0, 3, &Theorem21Config::default()).unwrap();
        assert!(r.consistent);
        assert_eq!(r.condition("c").unwrap().classification, Classification::Divergent);
        assert!(r.condition("b").unwrap().skipped);
    }

    #[test]
    fn duplicates_fail_every_condition() {
        let p = DiskPoint::real(0.5).unwrap();
        let seq = DiskSequence::new(vec![p, p], "dup").unwrap();
        let r = check_theorem21(&seq, 0.6, 0.5, 1.0, 3, &Theorem21Config::default()).unwrap();
        assert!(r.consistent);
        assert!(r.notes.iter().any(|n| n.contains("NOT SEPARATED")));
        assert_eq!(r.condition("d").unwrap().classification, Classification::Divergent);
    }

    #[test]
    fn parameter_range() {
        let seq = gen_radial(0.5, 4).unwrap();
        assert!(check_theorem21(&seq, 0.4, 0.5, 1.0, 1, &Theorem21Config::default()).is_err());
        assert!(check_theorem21(&seq, 0.6, 0.5, 0.0, 1, &Theorem21Config::default()).is_err());
    }
}

//! Constructive interpolation by perturbed Blaschke products.
//!
//! Given uniformly separated nodes `z_n` and bounded values `a_n`, the
//! solver looks for zeros `ζ_n` with `ρ(z_n, ζ_n) <= δ/3` and a constant `C`
//! such that `f = C · B_ζ` interpolates, `f(z_n) = a_n`.
//!
//! Each zero is written as `ζ_n = σ_{z_n}(v_n)`, so that `|v_n|` is exactly
//! the pseudo-hyperbolic perturbation and the constraint is a disk
//! constraint on `v_n`. Splitting `B_ζ(z_n)` into the own factor and the
//! product `P_n` of the others, the own factor equals `-(ζ_n/|ζ_n|)^-1 λ_n v_n`
//! with `λ_n` unimodular, which gives the fixed-point map
//! `v_n ← -a_n / (C P_n) · (ζ_n/|ζ_n|) · conj(λ_n)`.
//! The map contracts when `|a_n| / (C P_n)` is small, which is what the
//! choice of `C` guarantees. Every solution is re-certified by evaluating
//! the product independently.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::blaschke::{factor, BlaschkeProduct};
use crate::error::{param, Error, Result};
use crate::mobius::{rho_c, DiskPoint};
use crate::sequences::DiskSequence;

/// Default node cap: the solver is dense in the number of nodes.
pub const NODE_CAP: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpolationProblem {
    pub nodes: DiskSequence,
    pub values: Vec<Complex64>,
}

impl InterpolationProblem {
    pub fn new(nodes: DiskSequence, values: Vec<Complex64>) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(Error::LengthMismatch {
                left: nodes.len(),
                right: values.len(),
            });
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite { what: "interpolation values" });
        }
        Ok(InterpolationProblem { nodes, values })
    }

    /// Uniform separation constant of the nodes.
    pub fn delta(&self) -> f64 {
        self.nodes.uniform_separation_constant()
    }

    /// `sup_n |a_n|`.
    pub fn value_bound(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EarlConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub node_cap: usize,
    /// Initial damping of the fixed-point step, halved whenever the
    /// residual grows.
    pub damping: f64,
    /// Target fraction of the `δ/3` budget for the first scale guess.
    pub budget_fraction: f64,
    /// Number of times the scale may be doubled after a failed solve.
    pub scale_attempts: u32,
}

impl Default for EarlConfig {
    fn default() -> Self {
        EarlConfig {
            tol: 1e-10,
            max_iter: 2000,
            node_cap: NODE_CAP,
            damping: 0.5,
            budget_fraction: 0.9,
            scale_attempts: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EarlSolution {
    pub perturbed_zeros: DiskSequence,
    /// The constant `C · M` in front of the product.
    pub scale: Complex64,
    /// `|scale · B_ζ(z_n) - a_n|` by independent evaluation.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    /// `max_n ρ(z_n, ζ_n)`.
    pub max_perturbation: f64,
    pub delta: f64,
    /// `|scale| / sup |a_n|`: how much the values had to be shrunk for the
    /// iteration to contract. Heuristic, not an optimal constant.
    pub amplification: f64,
    pub iterations: usize,
}

/// Solves with default settings apart from `tol` and `max_iter`.
pub fn earl_interpolate(problem: &InterpolationProblem, tol: f64, max_iter: usize) -> Result<EarlSolution> {
    earl_interpolate_with(
        problem,
        &EarlConfig {
            tol,
            max_iter,
            ..EarlConfig::default()
        },
    )
}

struct Attempt {
    v: Vec<Complex64>,
    /// Fixed-point image of `v`.
    targets: Vec<Complex64>,
    scale: Complex64,
    residual: f64,
    iterations: usize,
}

pub fn earl_interpolate_with(problem: &InterpolationProblem, config: &EarlConfig) -> Result<EarlSolution> {
    if !(config.tol > 0.0) || config.max_iter == 0 || !(config.damping > 0.0 && config.damping <= 1.0) {
        return Err(param("need tol > 0, max_iter > 0 and damping in (0, 1]"));
    }
    let n = problem.nodes.len();
    if n == 0 {
        return Err(Error::Empty("interpolation nodes"));
    }
    if n > config.node_cap {
        return Err(Error::Cap {
            what: "interpolation nodes",
            count: n,
            cap: config.node_cap,
        });
    }
    let delta = problem.delta();
    if !(delta > 0.0) {
        return Err(Error::NotUniformlySeparated);
    }
    let z = problem.nodes.values();
    let a = &problem.values;
    let budget = delta / 3.0;
    let bound = problem.value_bound();

    let mut best: Option<Attempt> = None;
    if bound == 0.0 {
        best = Some(solve(&z, a, Complex64::new(1.0, 0.0).norm(), budget, config));
    } else {
        // Own-factor size needed at node n is |a_n| / (C |P_n|), and
        // |P_n| >= δ_n at the start; aim for a fraction of the budget.
        let start = (0..n)
            .map(|k| {
                let dk: f64 = (0..n).filter(|&m| m != k).map(|m| rho_c(z[m], z[k])).product();
                a[k].norm() / dk
            })
            .fold(0.0, f64::max)
            / (config.budget_fraction * budget);
        let mut modulus = start;
        for _ in 0..=config.scale_attempts {
            let attempt = solve(&z, a, modulus, budget, config);
            let done = attempt.residual <= config.tol;
            if best.as_ref().is_none_or(|b| attempt.residual < b.residual) {
                best = Some(attempt);
            }
            if done {
                break;
            }
            modulus *= 2.0;
        }
    }
    let best = best.expect("at least one attempt");
    let zeros: Vec<DiskPoint> = z
        .iter()
        .zip(&best.v)
        .map(|(&zn, &vn)| DiskPoint::clamp_inside(crate::mobius::sigma_c(zn, vn)))
        .collect();
    let perturbed = DiskSequence::new(zeros, "perturbed zeros")?;

    // Certificate: fresh evaluation, independent of the solver's products.
    let product = BlaschkeProduct::from_sequence(&perturbed);
    let mut residuals = Vec::with_capacity(n);
    for (zn, an) in z.iter().zip(a) {
        residuals.push((best.scale * product.eval(*zn)? - an).norm());
    }
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    let max_perturbation = z
        .iter()
        .zip(perturbed.points())
        .map(|(&zn, zeta)| rho_c(zn, zeta.value()))
        .fold(0.0, f64::max);
    if max_residual > config.tol {
        return Err(Error::NonConvergence {
            iterations: best.iterations,
            best_residual: max_residual,
        });
    }
    if max_perturbation > budget * (1.0 + 1e-9) {
        return Err(Error::ConstraintViolation {
            max_perturbation,
            allowed: budget,
        });
    }
    Ok(EarlSolution {
        perturbed_zeros: perturbed,
        scale: best.scale,
        residuals,
        max_residual,
        max_perturbation,
        delta,
        amplification: if bound > 0.0 { best.scale.norm() / bound } else { 1.0 },
        iterations: best.iterations,
    })
}

/// Damped fixed-point iteration at a fixed scale modulus.
fn solve(z: &[Complex64], a: &[Complex64], modulus: f64, budget: f64, config: &EarlConfig) -> Attempt {
    let n = z.len();
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    // A node at the origin sees a positive own factor |ζ|, so it fixes the
    // phase of the scale; otherwise the phase is absorbed by the zeros.
    let anchor = z.iter().position(|&zn| zn == zero).filter(|&k| a[k] != zero);

    let mut v = vec![zero; n];
    // The factor of a zero at the origin changes phase discontinuously as
    // the zero leaves it, so the anchor starts at its expected offset.
    if let Some(k) = anchor {
        let dk: f64 = (0..n).filter(|&m| m != k).map(|m| z[m].norm()).product();
        v[k] = -Complex64::new((a[k].norm() / (modulus * dk)).min(budget), 0.0);
    }
    let mut damping = config.damping;
    let mut best = Attempt {
        v: v.clone(),
        targets: v.clone(),
        scale: Complex64::new(modulus, 0.0),
        residual: f64::INFINITY,
        iterations: 0,
    };
    for iteration in 1..=config.max_iter {
        let zeta: Vec<Complex64> = z.iter().zip(&v).map(|(&zn, &vn)| crate::mobius::sigma_c(zn, vn)).collect();
        let mut own = vec![zero; n];
        let mut others = vec![one; n];
        for k in 0..n {
            for m in 0..n {
                let f = factor(zeta[m], z[k]);
                if m == k {
                    own[k] = f;
                } else {
                    others[k] *= f;
                }
            }
        }
        let phase = match anchor {
            Some(k) => {
                let t = a[k] / others[k];
                t / t.norm()
            }
            None => one,
        };
        let scale = phase * modulus;
        let residual = (0..n)
            .map(|k| (scale * own[k] * others[k] - a[k]).norm())
            .fold(0.0, f64::max);
        if !residual.is_finite() {
            break;
        }
        if residual < best.residual {
            let targets: Vec<Complex64> = (0..n)
                .map(|k| {
                    let w = a[k] / (scale * others[k]);
                    let unit = if zeta[k] == zero { one } else { zeta[k] / zeta[k].norm() };
                    let lambda = (one - z[k].conj() * zeta[k]) / (one - zeta[k].conj() * z[k]);
                    let target = -w * unit * lambda.conj();
                    if target.norm() > budget {
                        target * (budget / target.norm())
                    } else {
                        target
                    }
                })
                .collect();
            best = Attempt {
                v: v.clone(),
                targets,
                scale,
                residual,
                iterations: iteration,
            };
            if residual <= config.tol {
                break;
            }
        } else {
            // Step again from the best iterate, with a shorter step.
            damping *= 0.5;
            if damping < 1e-10 {
                break;
            }
        }
        for k in 0..n {
            v[k] = best.v[k] + damping * (best.targets[k] - best.v[k]);
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioRange {
    pub min: f64,
    pub max: f64,
}

impl RatioRange {
    fn empty() -> Self {
        RatioRange {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }

    fn add(&mut self, x: f64) {
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    fn within(&self, c: f64) -> bool {
        self.min >= 1.0 / c && self.max <= c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparabilityReport {
    /// `(1 - |ζ_n|) / (1 - |z_n|)`.
    pub gap_ratio: RatioRange,
    /// `|1 - conj(z_n) ζ_n| / (1 - |z_n|)`.
    pub kernel_to_gap: RatioRange,
    /// `|1 - conj(z_n) ζ_n| / sqrt((1 - |z_n|^2)(1 - |ζ_n|^2))`.
    pub kernel_to_weights: RatioRange,
    /// `|1 - conj(z_n) w| / |1 - conj(ζ_n) w|` over the sample points `w`.
    pub kernel_shift: RatioRange,
    pub max_perturbation: f64,
    /// Bracket `c` with every ratio expected in `[1/c, c]`.
    pub bracket: f64,
    pub within_bracket: bool,
}

/// A bracket depending only on the perturbation bound `r < 1`, large enough
/// for all four ratios.
pub fn comparability_bracket(r: f64) -> f64 {
    2.0 * (1.0 + r) / ((1.0 - r) * (1.0 - r * r).sqrt())
}

/// Checks that a perturbation of the nodes leaves the boundary-distance
/// quantities comparable, with the `w`-ratio sampled on the circle, on
/// a few rings and at the nodes and zeros themselves.
pub fn verify_perturbation_comparabilities(nodes: &DiskSequence, zeros: &DiskSequence) -> Result<ComparabilityReport> {
    if nodes.len() != zeros.len() {
        return Err(Error::LengthMismatch {
            left: nodes.len(),
            right: zeros.len(),
        });
    }
    let z = nodes.values();
    let zeta = zeros.values();
    let mut samples: Vec<Complex64> = Vec::new();
    for j in 0..=12 {
        let r = if j == 12 { 1.0 } else { 1.0 - 0.5f64.powi(j) };
        for k in 0..64 {
            samples.push(Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / 64.0));
        }
    }
    samples.extend(z.iter().chain(&zeta));

    let mut report = ComparabilityReport {
        gap_ratio: RatioRange::empty(),
        kernel_to_gap: RatioRange::empty(),
        kernel_to_weights: RatioRange::empty(),
        kernel_shift: RatioRange::empty(),
        max_perturbation: 0.0,
        bracket: 0.0,
        within_bracket: true,
    };
    for (&zn, &en) in z.iter().zip(&zeta) {
        let gz = 1.0 - zn.norm();
        let ge = 1.0 - en.norm();
        let k = (1.0 - zn.conj() * en).norm();
        report.gap_ratio.add(ge / gz);
        report.kernel_to_gap.add(k / gz);
        report.kernel_to_weights.add(k / (crate::mobius::one_minus_sq_c(zn) * crate::mobius::one_minus_sq_c(en)).sqrt());
        for &w in &samples {
            report.kernel_shift.add((1.0 - zn.conj() * w).norm() / (1.0 - en.conj() * w).norm());
        }
        report.max_perturbation = report.max_perturbation.max(rho_c(zn, en));
    }
    report.bracket = comparability_bracket(report.max_perturbation);
    report.within_bracket = [
        report.gap_ratio,
        report.kernel_to_gap,
        report.kernel_to_weights,
        report.kernel_shift,
    ]
    .iter()
    .all(|r| r.within(report.bracket));
    Ok(report)
}

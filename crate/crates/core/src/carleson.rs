//! Carleson-type tests for point-mass measures.
//!
//! Three estimators of the same supremum are provided: the dyadic box ratio,
//! the kernel form and the Besov-space ratio. Each is evaluated on a ladder of
//! truncation levels. At level `ℓ` only atoms of generation at most `ℓ` and
//! boxes or sample points of level at most `ℓ` take part, except that the
//! deepest level always sees every atom. The ladder is what the growth
//! classifier reads.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{classify, Classification, GrowthFit, LevelValue, Thresholds};
use crate::error::{param, Error, Result};
use crate::mobius::{kernel_sq_c, one_minus_sq_c, DiskPoint};
use crate::net::SamplingNet;
use crate::sequences::DiskSequence;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub point: DiskPoint,
    pub weight: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PointMassMeasure {
    atoms: Vec<Atom>,
}

impl PointMassMeasure {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        for a in &atoms {
            if !a.weight.is_finite() {
                return Err(Error::NonFinite { what: "atom weight" });
            }
            if a.weight < 0.0 {
                return Err(param(format!("atom weights must be nonnegative, got {}", a.weight)));
            }
        }
        Ok(PointMassMeasure { atoms })
    }

    pub fn empty() -> Self {
        PointMassMeasure::default()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn push(&mut self, point: DiskPoint, weight: f64) -> Result<()> {
        if !weight.is_finite() || weight < 0.0 {
            return Err(param("atom weight must be finite and nonnegative"));
        }
        self.atoms.push(Atom { point, weight });
        Ok(())
    }

    pub fn total_mass(&self) -> f64 {
        crate::numeric::compensated_sum(self.atoms.iter().map(|a| a.weight))
    }

    /// Every weight multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> PointMassMeasure {
        PointMassMeasure {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    point: a.point,
                    weight: a.weight * lambda,
                })
                .collect(),
        }
    }

    pub fn max_generation(&self) -> u32 {
        self.atoms.iter().map(|a| a.point.generation()).max().unwrap_or(0)
    }
}

/// `sum (1 - |z_n|^2)^s delta_{z_n}`.
pub fn weights_from_sequence(seq: &DiskSequence, s: f64) -> Result<PointMassMeasure> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(param(format!("Carleson exponent s must be positive, got {s}")));
    }
    PointMassMeasure::new(
        seq.points()
            .iter()
            .map(|&p| Atom {
                point: p,
                weight: p.one_minus_sq().powf(s),
            })
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Dyadic arc `[index 2^-g, (index + 1) 2^-g)` in turns.
    Box {
        generation: u32,
        index: u64,
        start_turn: f64,
        end_turn: f64,
    },
    /// Sample point realising the supremum.
    Point { point: DiskPoint, level: u32 },
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarlesonReport {
    pub test: String,
    pub constant: f64,
    pub witness: Witness,
    pub classification: Classification,
    pub slope: f64,
    pub tail_ratio: Option<f64>,
    pub extrapolated: f64,
    pub levels: Vec<LevelValue>,
}

impl CarlesonReport {
    pub(crate) fn from_levels(test: &str, levels: Vec<LevelValue>, witness: Witness, thresholds: &Thresholds) -> Self {
        let fit: GrowthFit = classify(&levels, thresholds);
        CarlesonReport {
            test: test.to_string(),
            constant: levels.last().map(|l| l.value).unwrap_or(0.0),
            witness,
            classification: fit.classification,
            slope: fit.slope,
            tail_ratio: fit.tail_ratio,
            extrapolated: fit.extrapolated,
            levels,
        }
    }

    fn empty(test: &str) -> Self {
        CarlesonReport {
            test: test.to_string(),
            constant: 0.0,
            witness: Witness::None,
            classification: Classification::Bounded,
            slope: 0.0,
            tail_ratio: None,
            extrapolated: 0.0,
            levels: vec![LevelValue { level: 0, value: 0.0 }],
        }
    }
}

/// `sup_I mu(S(I)) / |I|^s` over dyadic arcs of generation `0..=max_generation`.
///
/// The box `S(I)` contains the atoms with `1 - |I| <= |z|` and argument in
/// `I`; the inner edge is closed so that an atom on a dyadic radius belongs to
/// the boxes of its own generation.
pub fn box_constant(
    mu: &PointMassMeasure,
    s: f64,
    max_generation: u32,
    thresholds: &Thresholds,
) -> Result<CarlesonReport> {
    if !(s > 0.0) {
        return Err(param(format!("Carleson exponent s must be positive, got {s}")));
    }
    if max_generation == 0 || max_generation > 60 {
        return Err(param("max_generation must lie in 1..=60"));
    }
    if mu.is_empty() {
        return Ok(CarlesonReport::empty("box"));
    }
    let mut order: Vec<(u32, f64, f64)> = mu
        .atoms()
        .iter()
        .filter(|a| a.weight > 0.0)
        .map(|a| (a.point.generation(), a.point.turns(), a.weight))
        .collect();
    order.sort_by_key(|a| a.0);

    let mut boxes: BTreeMap<(u32, u64), f64> = BTreeMap::new();
    let mut best = 0.0f64;
    let mut witness = Witness::None;
    let mut levels = Vec::with_capacity(max_generation as usize + 1);
    let mut next = 0usize;
    for level in 0..=max_generation {
        let deepest = level == max_generation;
        while next < order.len() && (deepest || order[next].0 <= level) {
            let (gen, turn, w) = order[next];
            for g in 0..=gen.min(max_generation) {
                let count = 1u64 << g;
                let index = ((turn * count as f64) as u64).min(count - 1);
                let mass = boxes.entry((g, index)).or_insert(0.0);
                *mass += w;
                let ratio = *mass / 0.5f64.powf(g as f64 * s);
                if ratio > best {
                    best = ratio;
                    witness = Witness::Box {
                        generation: g,
                        index,
                        start_turn: index as f64 / count as f64,
                        end_turn: (index + 1) as f64 / count as f64,
                    };
                }
            }
            next += 1;
        }
        levels.push(LevelValue { level, value: best });
    }
    Ok(CarlesonReport::from_levels("box", levels, witness, thresholds))
}

/// Supremum over net points `a` of `prefactor(a) * sum_n kernel(a, z_n) w_n`,
/// laid out by truncation level.
pub(crate) fn leveled_sup<P, K>(test: &str, mu: &PointMassMeasure, net: &SamplingNet, prefactor: P, kernel: K, thresholds: &Thresholds) -> CarlesonReport
where
    P: Fn(Complex64) -> f64 + Sync,
    K: Fn(Complex64, Complex64) -> f64 + Sync,
{
    let atom_levels: Vec<u32> = mu.atoms().iter().map(|a| a.point.generation()).collect();
    leveled_sup_on(test, mu, &atom_levels, net, prefactor, kernel, thresholds)
}

/// [`leveled_sup`] with the truncation level of every atom given explicitly.
fn leveled_sup_on<P, K>(
    test: &str,
    mu: &PointMassMeasure,
    atom_levels: &[u32],
    net: &SamplingNet,
    prefactor: P,
    kernel: K,
    thresholds: &Thresholds,
) -> CarlesonReport
where
    P: Fn(Complex64) -> f64 + Sync,
    K: Fn(Complex64, Complex64) -> f64 + Sync,
{
    // Like the box ladder, this one ends two generations past the deepest
    // atom; net points below that are folded into the last level. Without
    // the cut a deep net would append a flat tail that reads as BOUNDED.
    let deepest_atom = atom_levels.iter().copied().max().unwrap_or(0);
    let top = net.max_level().max(deepest_atom).min(deepest_atom + 2);
    let depth = top as usize + 1;
    let atoms: Vec<(Complex64, f64, usize)> = mu
        .atoms()
        .iter()
        .zip(atom_levels)
        .map(|(a, &l)| (a.point.value(), a.weight, l as usize))
        .collect();

    // For every sample point: its cumulative sums by atom generation.
    let per_point: Vec<Vec<f64>> = net
        .points()
        .par_iter()
        .map(|np| {
            let a = np.point.value();
            let pre = prefactor(a);
            let mut by_level = vec![0.0f64; depth];
            for &(z, w, l) in &atoms {
                by_level[l] += w * kernel(a, z);
            }
            let mut acc = 0.0;
            for v in by_level.iter_mut() {
                acc += *v;
                *v = acc * pre;
            }
            by_level
        })
        .collect();

    let mut levels = Vec::with_capacity(depth);
    let mut witness = Witness::None;
    for level in 0..depth {
        let mut best = 0.0f64;
        let mut arg = None;
        for (i, np) in net.points().iter().enumerate() {
            let included = np.level as usize <= level || level + 1 == depth;
            if included && per_point[i][level] > best {
                best = per_point[i][level];
                arg = Some(i);
            }
        }
        if level + 1 == depth {
            if let Some(i) = arg {
                let np = net.points()[i];
                witness = Witness::Point {
                    point: np.point,
                    level: np.level,
                };
            }
        }
        levels.push(LevelValue { level: level as u32, value: best });
    }
    crate::classify::running_max(&mut levels);
    CarlesonReport::from_levels(test, levels, witness, thresholds)
}

/// Value at one point of the kernel form
/// `(1-|a|^2)^t sum w_n / |1 - conj(a) z_n|^(s+t)`.
pub fn kernel_value(mu: &PointMassMeasure, s: f64, t: f64, a: DiskPoint) -> f64 {
    let a = a.value();
    let half = 0.5 * (s + t);
    one_minus_sq_c(a).powf(t)
        * crate::numeric::compensated_sum(
            mu.atoms()
                .iter()
                .map(|at| at.weight / kernel_sq_c(a, at.point.value()).powf(half)),
        )
}

/// Supremum of the kernel form over the net.
pub fn kernel_constant(
    mu: &PointMassMeasure,
    s: f64,
    t: f64,
    net: &SamplingNet,
    thresholds: &Thresholds,
) -> Result<CarlesonReport> {
    if !(s > 0.0 && t > 0.0) {
        return Err(param(format!("kernel exponents must be positive, got s={s}, t={t}")));
    }
    if net.is_empty() {
        return Err(param("sampling net must be nonempty"));
    }
    if mu.is_empty() {
        return Ok(CarlesonReport::empty("kernel"));
    }
    let half = 0.5 * (s + t);
    Ok(leveled_sup(
        "kernel",
        mu,
        net,
        |a| one_minus_sq_c(a).powf(t),
        |a, z| kernel_sq_c(a, z).powf(-half),
        thresholds,
    ))
}

/// [`kernel_constant`] with a prescribed truncation level for every atom.
///
/// A small perturbation of a sequence can move points across dyadic radii;
/// indexing the ladder by the unperturbed generations keeps its levels
/// comparable with those of the original sequence.
pub fn kernel_constant_on_ladder(
    mu: &PointMassMeasure,
    atom_levels: &[u32],
    s: f64,
    t: f64,
    net: &SamplingNet,
    thresholds: &Thresholds,
) -> Result<CarlesonReport> {
    if atom_levels.len() != mu.len() {
        return Err(param("one ladder level per atom is required"));
    }
    if !(s > 0.0 && t > 0.0) {
        return Err(param(format!("kernel exponents must be positive, got s={s}, t={t}")));
    }
    if net.is_empty() {
        return Err(param("sampling net must be nonempty"));
    }
    if mu.is_empty() {
        return Ok(CarlesonReport::empty("kernel"));
    }
    let half = 0.5 * (s + t);
    Ok(leveled_sup_on(
        "kernel",
        mu,
        atom_levels,
        net,
        |a| one_minus_sq_c(a).powf(t),
        |a, z| kernel_sq_c(a, z).powf(-half),
        thresholds,
    ))
}

/// `sup_z (1-|z|^2)^(2-s) sum w_n / |1 - conj(w_n) z|^2` over the samples.
pub fn bps_carleson_ratio(
    mu: &PointMassMeasure,
    s: f64,
    samples: &SamplingNet,
    thresholds: &Thresholds,
) -> Result<CarlesonReport> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(param(format!("Besov ratio needs 0 < s <= 1, got {s}")));
    }
    if samples.is_empty() {
        return Err(param("sample set must be nonempty"));
    }
    if mu.is_empty() {
        return Ok(CarlesonReport::empty("bps_ratio"));
    }
    Ok(leveled_sup(
        "bps_ratio",
        mu,
        samples,
        |z| one_minus_sq_c(z).powf(2.0 - s),
        |z, w| 1.0 / kernel_sq_c(z, w),
        thresholds,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mobius::invariant_weight;
    use crate::net::NetConfig;
    use crate::sequences::{gen_clustered, gen_radial};
    use approx::assert_abs_diff_eq;

    fn th() -> Thresholds {
        Thresholds::default()
    }

    fn single(re: f64, im: f64, w: f64) -> PointMassMeasure {
        PointMassMeasure::new(vec![Atom {
            point: DiskPoint::new(re, im).unwrap(),
            weight: w,
        }])
        .unwrap()
    }

    /// Independent oracle: every dyadic box of every generation, full measure.
    fn brute_box(mu: &PointMassMeasure, s: f64, g_max: u32) -> f64 {
        let mut best = 0.0f64;
        for g in 0..=g_max {
            let len = 0.5f64.powi(g as i32);
            for j in 0..(1u64 << g) {
                let (lo, hi) = (j as f64 * len, (j + 1) as f64 * len);
                let mass: f64 = mu
                    .atoms()
                    .iter()
                    .filter(|a| {
                        let t = a.point.turns();
                        a.point.modulus() >= 1.0 - len - 1e-12 && t >= lo && t < hi
                    })
                    .map(|a| a.weight)
                    .sum();
                best = best.max(mass / len.powf(s));
            }
        }
        best
    }

    #[test]
    fn weights_examples() {
        let z = DiskSequence::new(vec![DiskPoint::ORIGIN], "").unwrap();
        assert_eq!(weights_from_sequence(&z, 0.5).unwrap().atoms()[0].weight, 1.0);
        let h = DiskSequence::new(vec![DiskPoint::real(0.5).unwrap()], "").unwrap();
        assert_eq!(weights_from_sequence(&h, 1.0).unwrap().atoms()[0].weight, 0.75);
        let r = weights_from_sequence(&gen_radial(0.5, 3).unwrap(), 0.5).unwrap();
        let expect = [0.75f64.sqrt(), (1.0 - 0.5625f64).sqrt(), (1.0 - 0.765625f64).sqrt()];
        for (a, e) in r.atoms().iter().zip(expect) {
            assert_abs_diff_eq!(a.weight, e, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(expect[0], 0.8660254037844386, epsilon = 1e-15);
        assert_abs_diff_eq!(expect[1], 0.6614378277661477, epsilon = 1e-15);
        assert_abs_diff_eq!(expect[2], 0.4841229182759271, epsilon = 1e-15);
        assert!(weights_from_sequence(&z, 0.0).is_err());
    }

    #[test]
    fn negative_weights_are_rejected() {
        assert!(PointMassMeasure::new(vec![Atom { point: DiskPoint::ORIGIN, weight: -1.0 }]).is_err());
    }

    #[test]
    fn single_atom_box() {
        let mu = single(0.5, 0.0, 0.75f64.sqrt());
        let r = box_constant(&mu, 0.5, 6, &th()).unwrap();
        assert_abs_diff_eq!(r.constant, 1.5f64.sqrt(), epsilon = 1e-14);
        assert_eq!(
            r.witness,
            Witness::Box { generation: 1, index: 0, start_turn: 0.0, end_turn: 0.5 }
        );
        assert_eq!(r.classification, Classification::Bounded);
    }

    #[test]
    fn empty_measure_is_zero() {
        let mu = PointMassMeasure::empty();
        assert_eq!(box_constant(&mu, 0.5, 4, &th()).unwrap().constant, 0.0);
        let net = SamplingNet::from_points(&[DiskPoint::ORIGIN]).unwrap();
        assert_eq!(bps_carleson_ratio(&mu, 0.5, &net, &th()).unwrap().constant, 0.0);
    }

    #[test]
    fn box_matches_brute_force() {
        let seq = gen_clustered(0.5, 0.6, 6).unwrap();
        let mu = weights_from_sequence(&seq, 0.5).unwrap();
        let r = box_constant(&mu, 0.5, 8, &th()).unwrap();
        assert_abs_diff_eq!(r.constant, brute_box(&mu, 0.5, 8), epsilon = 1e-12);
        let seq = gen_radial(0.5, 12).unwrap();
        let mu = weights_from_sequence(&seq, 0.3).unwrap();
        let r = box_constant(&mu, 0.3, 14, &th()).unwrap();
        assert_abs_diff_eq!(r.constant, brute_box(&mu, 0.3, 14), epsilon = 1e-12);
    }

    #[test]
    fn radial_family_is_bounded_by_box() {
        let mu = weights_from_sequence(&gen_radial(0.5, 20).unwrap(), 0.5).unwrap();
        let r = box_constant(&mu, 0.5, 20, &th()).unwrap();
        assert_eq!(r.classification, Classification::Bounded, "{r:?}");
        // Oracle: the unit box holds every atom, and the geometric tail of the
        // box over [0, 2^-g) is sum_{n >= g} (2^-n (2 - 2^-n))^(1/2) / 2^(-g/2).
        let exact: f64 = (1..=20).map(|n| (0.5f64.powi(n) * (2.0 - 0.5f64.powi(n))).sqrt()).sum();
        assert!(r.constant >= exact - 1e-12);
    }

    #[test]
    fn clustered_family_diverges_in_every_test() {
        let seq = gen_clustered(0.5, 0.9, 10).unwrap();
        let mu = weights_from_sequence(&seq, 0.5).unwrap();
        let b = box_constant(&mu, 0.5, 10, &th()).unwrap();
        assert_eq!(b.classification, Classification::Divergent, "{b:?}");
        let net = SamplingNet::build(&NetConfig { levels: 10, ..NetConfig::default() }, seq.points(), &[]).unwrap();
        let k = kernel_constant(&mu, 0.5, 0.5, &net, &th()).unwrap();
        assert_eq!(k.classification, Classification::Divergent, "{k:?}");
    }

    #[test]
    fn slow_growth_below_s_still_diverges() {
        // growth 0.3 < s: the box over the nested arcs still gains
        // 2^(0.3 k) points of weight ~2^(-k/2) against |I|^(1/2) = 2^(-k/2).
        let seq = gen_clustered(0.5, 0.3, 10).unwrap();
        let mu = weights_from_sequence(&seq, 0.5).unwrap();
        let b = box_constant(&mu, 0.5, 10, &th()).unwrap();
        assert_eq!(b.classification, Classification::Divergent, "{b:?}");
    }

    #[test]
    fn kernel_equals_sigma_form_when_t_is_s() {
        let seq = gen_radial(0.6, 12).unwrap();
        for s in [0.3, 0.5, 0.8] {
            let mu = weights_from_sequence(&seq, s).unwrap();
            for a in [DiskPoint::ORIGIN, DiskPoint::new(0.3, -0.7).unwrap(), DiskPoint::real(0.99).unwrap()] {
                let sigma: f64 = seq.points().iter().map(|&z| invariant_weight(a, z).powf(s)).sum();
                assert!((kernel_value(&mu, s, s, a) - sigma).abs() <= 1e-10 * sigma.max(1.0));
            }
        }
    }

    #[test]
    fn kernel_single_atom_at_origin() {
        let mu = single(0.0, 0.0, 1.0);
        let net = SamplingNet::from_points(&[DiskPoint::ORIGIN]).unwrap();
        let r = kernel_constant(&mu, 0.5, 0.5, &net, &th()).unwrap();
        assert_abs_diff_eq!(r.constant, 1.0, epsilon = 1e-15);
        assert!(kernel_constant(&mu, 0.5, 0.0, &net, &th()).is_err());
    }

    #[test]
    fn bps_ratio_examples() {
        let mu = single(0.0, 0.0, 1.0);
        let net = SamplingNet::build(&NetConfig::default(), &[], &[0.0]).unwrap();
        let r = bps_carleson_ratio(&mu, 0.5, &net, &th()).unwrap();
        assert!(r.constant <= 1.0 + 1e-15);
        assert_eq!(r.classification, Classification::Bounded);
        let seq = gen_radial(0.5, 25).unwrap();
        let mu = weights_from_sequence(&seq, 0.5).unwrap();
        let net = SamplingNet::build(&NetConfig { levels: 25, ..NetConfig::default() }, seq.points(), &[]).unwrap();
        let r = bps_carleson_ratio(&mu, 0.5, &net, &th()).unwrap();
        assert_eq!(r.classification, Classification::Bounded, "{r:?}");
    }

    #[test]
    fn adding_an_atom_never_decreases() {
        let seq = gen_radial(0.5, 10).unwrap();
        let mu = weights_from_sequence(&seq, 0.5).unwrap();
        let mut more = mu.clone();
        more.push(DiskPoint::new(0.1, 0.9).unwrap(), 0.2).unwrap();
        let net = SamplingNet::build(&NetConfig { levels: 10, ..NetConfig::default() }, seq.points(), &[]).unwrap();
        let (a, b) = (
            box_constant(&mu, 0.5, 12, &th()).unwrap().constant,
            box_constant(&more, 0.5, 12, &th()).unwrap().constant,
        );
        assert!(b >= a);
        let (a, b) = (
            kernel_constant(&mu, 0.5, 1.0, &net, &th()).unwrap().constant,
            kernel_constant(&more, 0.5, 1.0, &net, &th()).unwrap().constant,
        );
        assert!(b >= a);
    }

    #[test]
    fn scaling_is_exact() {
        let seq = gen_clustered(0.5, 0.5, 5).unwrap();
        let mu = weights_from_sequence(&seq, 0.5).unwrap();
        let big = mu.scaled(4.0);
        let net = SamplingNet::build(&NetConfig { levels: 6, ..NetConfig::default() }, seq.points(), &[]).unwrap();
        let b0 = box_constant(&mu, 0.5, 8, &th()).unwrap().constant;
        let b1 = box_constant(&big, 0.5, 8, &th()).unwrap().constant;
        assert_eq!(b1, 4.0 * b0);
        let k0 = kernel_constant(&mu, 0.5, 0.7, &net, &th()).unwrap().constant;
        let k1 = kernel_constant(&big, 0.5, 0.7, &net, &th()).unwrap().constant;
        assert!((k1 - 4.0 * k0).abs() <= 1e-15 * k1);
        let r0 = bps_carleson_ratio(&mu, 0.5, &net, &th()).unwrap().constant;
        let r1 = bps_carleson_ratio(&big, 0.5, &net, &th()).unwrap().constant;
        assert!((r1 - 4.0 * r0).abs() <= 1e-15 * r1);
    }
}

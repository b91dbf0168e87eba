use diskinterp::blaschke::BlaschkeProduct;
use diskinterp::carleson::{box_constant, kernel_value, weights_from_sequence, PointMassMeasure};
use diskinterp::classify::{Classification, Thresholds};
use diskinterp::earl::{earl_interpolate, InterpolationProblem};
use diskinterp::sequences::{gen_radial, gen_random_separated, DiskSequence};
use diskinterp::spaces::{integrate_disk, GridSpec, QuadratureConfig};
use diskinterp::verify::{check_theorem32, Theorem32Config};
use diskinterp::{Complex64, DiskPoint, Rotation};
use proptest::prelude::*;

#[test]
fn product_at_the_origin_is_the_product_of_moduli() {
    let zeros = gen_random_separated(20, 0.1, 0.95, 11).unwrap();
    let product = BlaschkeProduct::from_sequence(&zeros);
    let expected: f64 = zeros.points().iter().map(|p| p.modulus()).product();
    let value = product.eval(Complex64::new(0.0, 0.0)).unwrap();
    assert!((value.re - expected).abs() <= 1e-14 && value.im.abs() <= 1e-14, "{value} vs {expected}");
}

#[test]
fn radial_moments_of_area_measure() {
    let config = QuadratureConfig::default();
    let spec = GridSpec { hints: vec![], singular: vec![] };
    for k in 1..=6 {
        let r = integrate_disk(|n| n.z.norm_sqr().powi(k), &config, &spec, None).unwrap();
        let exact = 1.0 / (k as f64 + 1.0);
        // The boundary shells are summed with a tail extrapolation, so even
        // polynomials are only as exact as the configured tolerance.
        assert!((r.value - exact).abs() <= config.rel_tol * exact, "k={k}: {} vs {exact}", r.value);
        assert!(r.converged());
    }
}

#[test]
fn interpolant_reproduces_the_data_under_direct_evaluation() {
    let nodes = gen_random_separated(8, 0.3, 0.9, 2).unwrap();
    let values: Vec<Complex64> = (0..8).map(|k| Complex64::from_polar(0.5, 0.7 * k as f64)).collect();
    let problem = InterpolationProblem::new(nodes.clone(), values.clone()).unwrap();
    let sol = earl_interpolate(&problem, 1e-10, 2000).unwrap();

    // Rebuild the interpolant factor by factor instead of trusting the
    // solver's own product.
    for (z, a) in nodes.values().iter().zip(&values) {
        let mut f = sol.scale;
        for zeta in sol.perturbed_zeros.values() {
            let unit = if zeta.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { zeta.norm() / zeta };
            f *= unit * (zeta - z) / (1.0 - zeta.conj() * z);
        }
        assert!((f - a).norm() <= 1e-9, "{f} vs {a}");
    }
    assert!(sol.max_perturbation <= sol.delta / 3.0 * (1.0 + 1e-9));
}

#[test]
fn radial_sequence_is_consistent_across_the_membership_sides() {
    let zeros = gen_radial(0.5, 8).unwrap();
    let report = check_theorem32(&zeros, 0.8, 0.5, &Theorem32Config::default()).unwrap();
    assert!(report.consistent, "{:?}", report.notes);
    assert!(report.converged);
}

#[test]
fn single_atom_box_constant_by_hand() {
    // One atom at r = 3/4 with weight w: the generation-g box over it has
    // side 2^-g and contains the atom while 1 - 2^-g <= 3/4, so g <= 2.
    let mut mu = PointMassMeasure::empty();
    mu.push(DiskPoint::real(0.75).unwrap(), 0.3).unwrap();
    let report = box_constant(&mu, 0.5, 12, &Thresholds::default()).unwrap();
    let expected = 0.3 / 0.25f64.sqrt();
    assert!((report.constant - expected).abs() <= 1e-14, "{} vs {expected}", report.constant);
    assert_eq!(report.classification, Classification::Bounded);
}

fn disk_point() -> impl Strategy<Value = DiskPoint> {
    (0.0f64..0.97, 0.0f64..std::f64::consts::TAU).prop_map(|(r, t)| DiskPoint::from_polar(r, t).unwrap())
}

fn rotate(seq: &DiskSequence, rot: Rotation) -> DiskSequence {
    DiskSequence::new(seq.points().iter().map(|&p| rot.apply(p)).collect(), "rotated").unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_value_is_rotation_invariant(seed in 0u64..1000, a in disk_point(), theta in 0.0f64..std::f64::consts::TAU) {
        let seq = gen_random_separated(10, 0.2, 0.95, seed).unwrap();
        let rot = Rotation::new(theta).unwrap();
        let mu = weights_from_sequence(&seq, 0.5).unwrap();
        let mu_rot = weights_from_sequence(&rotate(&seq, rot), 0.5).unwrap();
        let before = kernel_value(&mu, 0.5, 0.5, a);
        let after = kernel_value(&mu_rot, 0.5, 0.5, rot.apply(a));
        prop_assert!((before - after).abs() <= 1e-10 * before.max(1e-300));
    }

    #[test]
    fn kernel_value_is_linear_in_the_measure(seed in 0u64..1000, a in disk_point(), lambda in 0.01f64..100.0) {
        let seq = gen_random_separated(10, 0.2, 0.95, seed).unwrap();
        let mu = weights_from_sequence(&seq, 0.7).unwrap();
        let base = kernel_value(&mu, 0.7, 0.7, a);
        let scaled = kernel_value(&mu.scaled(lambda), 0.7, 0.7, a);
        prop_assert!((scaled - lambda * base).abs() <= 1e-12 * lambda * base);
    }

    #[test]
    fn adding_an_atom_never_lowers_the_box_constant(seed in 0u64..1000, extra in disk_point(), w in 0.0f64..1.0) {
        let seq = gen_random_separated(8, 0.2, 0.95, seed).unwrap();
        let mu = weights_from_sequence(&seq, 0.5).unwrap();
        let mut more = mu.clone();
        more.push(extra, w).unwrap();
        let th = Thresholds::default();
        let a = box_constant(&mu, 0.5, 16, &th).unwrap().constant;
        let b = box_constant(&more, 0.5, 16, &th).unwrap().constant;
        prop_assert!(b >= a * (1.0 - 1e-15));
    }
}

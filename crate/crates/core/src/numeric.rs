//! Small numerical helpers shared by the modules.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

/// Neumaier-compensated sum, evaluated in the iterator's order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Gauss-Legendre nodes and weights mapped to `[0, 1]`.
pub fn gauss_legendre_unit(order: usize) -> Vec<(f64, f64)> {
    let order = NonZeroUsize::new(order.max(1)).expect("order is positive");
    GaussLegendre::new(order)
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let v = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(v), 2.0);
        assert_eq!(v.iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn unit_rule_integrates_polynomials() {
        let rule = gauss_legendre_unit(6);
        for k in 0..12 {
            let v: f64 = rule.iter().map(|(x, w)| w * x.powi(k)).sum();
            assert!((v - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "k = {k}");
        }
    }
}

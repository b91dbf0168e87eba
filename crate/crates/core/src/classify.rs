//! Growth classification of a quantity observed at increasing levels.
//!
//! A supremum over the disk cannot be decided numerically. What can be
//! observed is how the truncated supremum behaves as the truncation level
//! grows. The classifier fits that behaviour and returns one of three
//! verdicts, always together with the data it used.
//!
//! The fit works in two steps. First the increments of the tail window are
//! fitted by a geometric law `Δ_ℓ ≈ C q^ℓ`; when `q` is clearly below one the
//! remaining tail `Δ q / (1 - q)` is added to each value, which turns a
//! geometrically converging sequence into an almost constant one. Second the
//! slope of `ln v` against `ln(ℓ + 1)` is measured on the extrapolated values.
//! Linear growth gives slope one, exponential growth gives a large slope and
//! a convergent sequence gives a slope near zero.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    Bounded,
    Divergent,
    Inconclusive,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Bounded => "BOUNDED",
            Classification::Divergent => "DIVERGENT",
            Classification::Inconclusive => "INCONCLUSIVE",
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Slope thresholds of the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Slopes strictly below this are BOUNDED.
    pub bounded: f64,
    /// Slopes strictly above this are DIVERGENT.
    pub divergent: f64,
    /// Geometric tails are only extrapolated when the fitted increment ratio
    /// is below this value.
    pub max_tail_ratio: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            bounded: 0.02,
            divergent: 0.1,
            max_tail_ratio: 0.95,
        }
    }
}

/// One observation: the quantity at a truncation or refinement level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelValue {
    pub level: u32,
    pub value: f64,
}

/// Result of a fit, with everything needed to redo it by hand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub classification: Classification,
    pub slope: f64,
    /// Fitted geometric ratio of the increments, if there were enough.
    pub tail_ratio: Option<f64>,
    /// Tail-corrected value at the deepest level.
    pub extrapolated: f64,
    /// Number of trailing levels used by the fit.
    pub window: usize,
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Smallest power-law decay exponent of the increments whose tail is
/// extrapolated.
const MIN_POWER_DECAY: f64 = 1.5;

pub fn classify(levels: &[LevelValue], thresholds: &Thresholds) -> GrowthFit {
    let last = levels.last().map(|l| l.value).unwrap_or(0.0);
    let trivial = |classification| GrowthFit {
        classification,
        slope: 0.0,
        tail_ratio: None,
        extrapolated: last,
        window: levels.len(),
    };
    if levels.iter().any(|l| !l.value.is_finite()) {
        return GrowthFit {
            classification: Classification::Divergent,
            slope: f64::INFINITY,
            tail_ratio: None,
            extrapolated: f64::INFINITY,
            window: levels.len(),
        };
    }
    if levels.len() < 2 || levels.iter().all(|l| l.value == 0.0) {
        return trivial(Classification::Bounded);
    }

    let n = levels.len();
    let window = n.min(3.max(n.div_ceil(2)));
    let tail = &levels[n - window..];

    // Increment law over the window (the increment into the first window
    // level is included so that a 3-level window still has 3 increments).
    let start = (n - window).max(1);
    let mut inc_x = Vec::new();
    let mut inc_y = Vec::new();
    let scale = tail.iter().fold(0.0f64, |m, l| m.max(l.value.abs()));
    for i in start..n {
        let d = levels[i].value - levels[i - 1].value;
        if d > 1e-14 * scale {
            inc_x.push(levels[i].level as f64);
            inc_y.push(d.ln());
        }
    }
    let all_flat = (start..n).all(|i| (levels[i].value - levels[i - 1].value).abs() <= 1e-14 * scale);
    if all_flat {
        return trivial(Classification::Bounded);
    }

    let fit = linear_fit(&inc_x, &inc_y);
    let tail_ratio = fit.map(|(b, _)| b.exp());
    // Increments decaying like a power of the level (harmonic-type series)
    // must not be summed as if they were geometric: that would hide
    // logarithmic and power-law growth.
    let log_x: Vec<f64> = inc_x.iter().map(|l| (l + 1.0).ln()).collect();
    let power = linear_fit(&log_x, &inc_y);
    let geometric_wins = match (fit, power) {
        (Some(g), Some(p)) => residual(&inc_x, &inc_y, g) <= residual(&log_x, &inc_y, p),
        (Some(_), None) => true,
        _ => false,
    };
    let extrapolate = |l: &LevelValue| -> f64 {
        match fit {
            Some((b, c)) if geometric_wins && b.exp() < thresholds.max_tail_ratio => {
                let q = b.exp();
                let d = (c + b * l.level as f64).exp();
                l.value + d * q / (1.0 - q)
            }
            // Summable power law `Δ_k ≈ C (k + 1)^-β`: the remaining tail is
            // about `Δ_k (k + 1) / (β - 1)`. Only clearly summable decay
            // qualifies, so harmonic-type growth stays visible.
            _ => match power {
                Some((b, c)) if !geometric_wins && -b >= MIN_POWER_DECAY => {
                    let k1 = l.level as f64 + 1.0;
                    let d = (c + b * k1.ln()).exp();
                    l.value + d * k1 / (-b - 1.0)
                }
                _ => l.value,
            },
        }
    };

    let mut x = Vec::with_capacity(window);
    let mut y = Vec::with_capacity(window);
    for l in tail {
        let v = extrapolate(l);
        if v > 0.0 {
            x.push((l.level as f64 + 1.0).ln());
            y.push(v.ln());
        }
    }
    let slope = linear_fit(&x, &y).map(|(b, _)| b).unwrap_or(0.0);
    let classification = if slope < thresholds.bounded {
        Classification::Bounded
    } else if slope > thresholds.divergent {
        Classification::Divergent
    } else {
        Classification::Inconclusive
    };
    GrowthFit {
        classification,
        slope,
        tail_ratio,
        extrapolated: tail.last().map(extrapolate).unwrap_or(last),
        window,
    }
}

fn residual(x: &[f64], y: &[f64], (b, c): (f64, f64)) -> f64 {
    x.iter().zip(y).map(|(x, y)| (y - c - b * x).powi(2)).sum()
}

/// Turns per-level raw maxima into a running maximum, so that the series
/// describes the truncated supremum.
pub fn running_max(levels: &mut [LevelValue]) {
    let mut m = f64::NEG_INFINITY;
    for l in levels.iter_mut() {
        m = m.max(l.value);
        l.value = m;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(f: impl Fn(f64) -> f64, n: u32) -> Vec<LevelValue> {
        (0..n)
            .map(|l| LevelValue {
                level: l,
                value: f(l as f64),
            })
            .collect()
    }

    fn verdict(f: impl Fn(f64) -> f64, n: u32) -> Classification {
        classify(&series(f, n), &Thresholds::default()).classification
    }

    #[test]
    fn degenerate_inputs_are_bounded() {
        assert_eq!(verdict(|_| 0.0, 10), Classification::Bounded);
        assert_eq!(verdict(|_| 3.0, 1), Classification::Bounded);
        assert_eq!(verdict(|_| 3.0, 12), Classification::Bounded);
    }

    #[test]
    fn geometric_convergence_is_bounded() {
        // Rates as slow as 2^-0.2 per level must still be recognised.
        for rate in [0.3f64, 0.5, 0.7, 0.87] {
            let f = move |l: f64| 5.0 * (1.0 - rate.powf(l + 1.0));
            assert_eq!(verdict(f, 12), Classification::Bounded, "rate {rate}");
        }
    }

    #[test]
    fn summable_power_increments_are_bounded() {
        // Partial sums of Σ (j + 1)^-β for β = 2 and 3.
        for beta in [2.0f64, 3.0] {
            let f = move |l: f64| (0..=l as u32).map(|j| (j as f64 + 1.0).powf(-beta)).sum::<f64>();
            assert_eq!(verdict(f, 14), Classification::Bounded, "beta {beta}");
        }
    }

    #[test]
    fn growth_is_divergent() {
        assert_eq!(verdict(|l| 1.0 + l, 12), Classification::Divergent);
        assert_eq!(verdict(|l| 2f64.powf(0.4 * l), 10), Classification::Divergent);
        assert_eq!(verdict(|l| (l + 2.0).ln(), 12), Classification::Divergent);
        assert_eq!(verdict(|l| 1.0 + l.sqrt(), 14), Classification::Divergent);
    }

    #[test]
    fn infinite_values_are_divergent() {
        let mut s = series(|l| l, 5);
        s[4].value = f64::INFINITY;
        assert_eq!(classify(&s, &Thresholds::default()).classification, Classification::Divergent);
    }

    #[test]
    fn slope_is_reported_and_reproducible() {
        let s = series(|l| 1.0 + l, 12);
        let a = classify(&s, &Thresholds::default());
        let b = classify(&s, &Thresholds::default());
        assert_eq!(a, b);
        assert!(a.slope > 0.5 && a.slope < 1.2, "{}", a.slope);
    }

    #[test]
    fn running_max_is_monotone() {
        let mut s = series(|l| if (l as u32).is_multiple_of(2) { l } else { 0.0 }, 6);
        running_max(&mut s);
        let v: Vec<f64> = s.iter().map(|l| l.value).collect();
        assert_eq!(v, vec![0.0, 0.0, 2.0, 2.0, 4.0, 4.0]);
    }

    #[test]
    fn linear_fit_recovers_a_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let (b, c) = linear_fit(&x, &y).unwrap();
        assert!((b - 2.0).abs() < 1e-15 && (c - 1.0).abs() < 1e-15);
        assert!(linear_fit(&[1.0], &[1.0]).is_none());
    }
}

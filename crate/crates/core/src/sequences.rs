//! Finite disk sequences: separation statistics, generators and file formats.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::mobius::{rho_c, sigma_c, DiskPoint};
use crate::numeric::compensated_sum;

/// Two points closer than this in the pseudo-hyperbolic metric are duplicates.
pub const DUPLICATE_RHO: f64 = 1e-13;

/// Upper bound on the number of points a generator may emit.
pub const POINT_CAP: usize = 200_000;

/// Deepest level a generator may place points on; beyond this `1 - 2^-k`
/// is no longer resolved in double precision.
pub const LEVEL_CAP: u32 = 48;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskSequence {
    points: Vec<DiskPoint>,
    #[serde(default)]
    label: String,
}

impl DiskSequence {
    pub fn new(points: Vec<DiskPoint>, label: impl Into<String>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("disk sequence"));
        }
        Ok(DiskSequence {
            points,
            label: label.into(),
        })
    }

    pub fn from_complex(points: &[Complex64], label: impl Into<String>) -> Result<Self> {
        let pts = points
            .iter()
            .map(|&z| DiskPoint::from_complex(z))
            .collect::<Result<Vec<_>>>()?;
        Self::new(pts, label)
    }

    pub fn points(&self) -> &[DiskPoint] {
        &self.points
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.points.iter().map(|p| p.value()).collect()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Deepest dyadic generation present.
    pub fn max_generation(&self) -> u32 {
        self.points.iter().map(|p| p.generation()).max().unwrap_or(0)
    }

    /// Points of generation at most `level`, or `None` if there are none.
    pub fn truncated(&self, level: u32) -> Option<DiskSequence> {
        let pts: Vec<DiskPoint> = self
            .points
            .iter()
            .copied()
            .filter(|p| p.generation() <= level)
            .collect();
        DiskSequence::new(pts, self.label.clone()).ok()
    }

    pub fn has_duplicates(&self) -> bool {
        self.separation_constant() < DUPLICATE_RHO
    }

    /// Whether any point is close enough to the circle to be flagged.
    pub fn near_boundary(&self) -> bool {
        self.points.iter().any(|p| p.is_near_boundary())
    }

    /// `min_{n != k} rho(z_n, z_k)`, or 1 for a single point.
    pub fn separation_constant(&self) -> f64 {
        let z = self.values();
        if z.len() < 2 {
            return 1.0;
        }
        (0..z.len())
            .into_par_iter()
            .map(|m| {
                z[m + 1..]
                    .iter()
                    .map(|&w| rho_c(z[m], w))
                    .fold(1.0f64, f64::min)
            })
            .reduce(|| 1.0, f64::min)
    }

    /// `inf_m prod_{n != m} rho(z_m, z_n)`, evaluated as the exponential of
    /// a sum of logarithms. Duplicates give 0.
    pub fn uniform_separation_constant(&self) -> f64 {
        let z = self.values();
        if z.len() < 2 {
            return 1.0;
        }
        let min_log = (0..z.len())
            .into_par_iter()
            .map(|m| {
                let mut logs = Vec::with_capacity(z.len() - 1);
                for (n, &w) in z.iter().enumerate() {
                    if n == m {
                        continue;
                    }
                    let r = rho_c(z[m], w);
                    if r < DUPLICATE_RHO {
                        return f64::NEG_INFINITY;
                    }
                    logs.push(r.ln());
                }
                compensated_sum(logs)
            })
            .reduce(|| 0.0, f64::min);
        min_log.exp()
    }

    /// `sum (1 - |z_n|)`.
    pub fn blaschke_sum(&self) -> f64 {
        compensated_sum(self.points.iter().map(|p| 1.0 - p.modulus()))
    }

    pub fn separation_report(&self) -> SeparationReport {
        let separation = self.separation_constant();
        let uniform_separation = self.uniform_separation_constant().min(separation);
        SeparationReport {
            separation,
            uniform_separation,
            blaschke_sum: self.blaschke_sum(),
            duplicates: separation < DUPLICATE_RHO,
            singleton: self.len() < 2,
            near_boundary: self.near_boundary(),
        }
    }

    /// The image of every point under `sigma_c`.
    pub fn mapped_by(&self, c: DiskPoint) -> DiskSequence {
        DiskSequence {
            points: self
                .points
                .iter()
                .map(|&p| crate::mobius::mobius_transform(c, p))
                .collect(),
            label: self.label.clone(),
        }
    }

    /// Line format: one `re im` pair per line, `#` starts a comment.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if !self.label.is_empty() {
            out.push_str(&format!("# {}\n", self.label));
        }
        for p in &self.points {
            let z = p.value();
            out.push_str(&format!("{:.16e} {:.16e}\n", z.re, z.im));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        let mut label = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let (body, comment) = match raw.find('#') {
                Some(k) => (&raw[..k], Some(raw[k + 1..].trim())),
                None => (raw, None),
            };
            if let Some(c) = comment {
                if label.is_empty() && points.is_empty() && body.trim().is_empty() {
                    label = c.to_string();
                }
            }
            let fields: Vec<&str> = body.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if fields.len() != 2 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected `re im`, found {} fields", fields.len()),
                });
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|e| Error::Parse {
                    line: line_no,
                    message: format!("bad number {s:?}: {e}"),
                })
            };
            let p = DiskPoint::new(parse(fields[0])?, parse(fields[1])?).map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            points.push(p);
        }
        DiskSequence::new(points, label)
    }

    /// JSON array of `[re, im]` pairs with 17-digit floats.
    pub fn to_json(&self) -> String {
        crate::report::to_json_string(&self.points).expect("points serialize")
    }

    /// Accepts a bare array of pairs or an object with `points` and `label`.
    pub fn from_json(text: &str) -> Result<Self> {
        let parse_err = |e: serde_json::Error| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        };
        let value: serde_json::Value = serde_json::from_str(text).map_err(parse_err)?;
        if value.is_array() {
            let points: Vec<DiskPoint> = serde_json::from_value(value).map_err(parse_err)?;
            DiskSequence::new(points, "")
        } else {
            serde_json::from_value(value).map_err(parse_err)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub separation: f64,
    pub uniform_separation: f64,
    pub blaschke_sum: f64,
    pub duplicates: bool,
    /// A single point has no pairs; its constants are reported as 1.
    pub singleton: bool,
    pub near_boundary: bool,
}

fn dyadic_radius(k: u32) -> f64 {
    1.0 - 0.5f64.powi(k as i32)
}

fn check_levels(levels: u32) -> Result<()> {
    if levels == 0 {
        return Err(param("levels must be at least 1"));
    }
    if levels > LEVEL_CAP {
        return Err(Error::Cap {
            what: "levels",
            count: levels as usize,
            cap: LEVEL_CAP as usize,
        });
    }
    Ok(())
}

/// Points spread evenly inside the arc `[start, start + length)` (in turns)
/// at radius `r`.
fn arc_points(out: &mut Vec<DiskPoint>, r: f64, start: f64, length: f64, count: usize) {
    for i in 0..count {
        let turn = start + length * (i as f64 + 0.5) / count as f64;
        out.push(DiskPoint::clamp_inside(Complex64::from_polar(r, TAU * turn)));
    }
}

fn checked_count(total: usize, add: f64) -> Result<usize> {
    if !add.is_finite() || total as f64 + add > POINT_CAP as f64 {
        return Err(Error::Cap {
            what: "points",
            count: (total as f64 + add).min(usize::MAX as f64) as usize,
            cap: POINT_CAP,
        });
    }
    Ok(add as usize)
}

/// `z_n = 1 - q^n` for `n = 1..=count`.
pub fn gen_radial(q: f64, count: usize) -> Result<DiskSequence> {
    if !(q > 0.0 && q < 1.0) {
        return Err(param(format!("radial ratio q must lie in (0, 1), got {q}")));
    }
    if count == 0 {
        return Err(param("radial count must be at least 1"));
    }
    let points = (1..=count)
        .map(|n| DiskPoint::real(1.0 - q.powi(n as i32)))
        .take_while(|p| p.is_ok())
        .collect::<Result<Vec<_>>>()?;
    if points.len() < count {
        return Err(param(format!(
            "q^n underflows the disk resolution before n = {count}"
        )));
    }
    DiskSequence::new(points, format!("radial q={q} n={count}"))
}

/// Level `k` carries `ceil(2^(growth k))` points at radius `1 - 2^-k`,
/// evenly spaced inside the arc `[0, 2^-k)` turns.
///
/// `s_target` is only used to label the family. Any `growth >= 0` makes the
/// box ratio over the nested arcs grow like `2^(growth k)`, so the family is
/// never `s`-Carleson.
pub fn gen_clustered(s_target: f64, growth: f64, levels: u32) -> Result<DiskSequence> {
    if !(s_target > 0.0 && s_target < 1.0) {
        return Err(param(format!("s_target must lie in (0, 1), got {s_target}")));
    }
    if !(growth >= 0.0) || !growth.is_finite() {
        return Err(param(format!("growth must be a finite nonnegative number, got {growth}")));
    }
    check_levels(levels)?;
    let mut points = Vec::new();
    for k in 1..=levels {
        let n = checked_count(points.len(), (growth * k as f64).exp2().ceil())?;
        let len = 0.5f64.powi(k as i32);
        arc_points(&mut points, dyadic_radius(k), 0.0, len, n);
    }
    DiskSequence::new(
        points,
        format!("clustered s={s_target} growth={growth} levels={levels}"),
    )
}

/// Tuning of the candidate family used for the strict-inclusion experiment.
///
/// Level `k` receives `ceil(scale * 2^(s k) / k^log_power)` points on the
/// radius `1 - 2^-k`, spread over the arc `[0, 2^(-arc_exponent k))` turns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BwyCalibration {
    pub scale: f64,
    pub log_power: f64,
    pub arc_exponent: f64,
}

impl Default for BwyCalibration {
    /// Nested arcs of length `2^-k` with `k^2` damping and unit scale.
    fn default() -> Self {
        BwyCalibration {
            scale: 1.0,
            log_power: 2.0,
            arc_exponent: 1.0,
        }
    }
}

impl BwyCalibration {
    /// `ceil(2^(s k))` points spread over the whole circle. Every box then
    /// gains the same mass per level, so the `s`-box ratio of the unit box
    /// grows linearly with depth, while the `k^-2` factor in the
    /// log-tempered sum keeps that sum bounded, and any exponent `t > s`
    /// turns the per-level mass into a geometric series.
    pub fn full_circle() -> Self {
        BwyCalibration {
            scale: 1.0,
            log_power: 0.0,
            arc_exponent: 0.0,
        }
    }
}

/// Candidate for a sequence that is not `s`-Carleson but satisfies the
/// log-tempered bound. Nothing here guarantees either property; the Carleson
/// and log-tempered tests decide.
pub fn gen_bwy_candidate(s: f64, levels: u32, calibration: &BwyCalibration) -> Result<DiskSequence> {
    if !(s > 0.0 && s < 1.0) {
        return Err(param(format!("s must lie in (0, 1), got {s}")));
    }
    if !(calibration.scale > 0.0) || !calibration.scale.is_finite() {
        return Err(param("calibration scale must be positive"));
    }
    if !calibration.log_power.is_finite() || !calibration.arc_exponent.is_finite() || calibration.arc_exponent < 0.0 {
        return Err(param("calibration exponents must be finite, arc exponent nonnegative"));
    }
    check_levels(levels)?;
    let mut points = Vec::new();
    for k in 1..=levels {
        let kf = k as f64;
        let raw = calibration.scale * (s * kf).exp2() / kf.powf(calibration.log_power);
        let n = checked_count(points.len(), raw.ceil().max(1.0))?;
        let len = (-calibration.arc_exponent * kf).exp2().min(1.0);
        arc_points(&mut points, dyadic_radius(k), 0.0, len, n);
    }
    DiskSequence::new(
        points,
        format!(
            "bwy-candidate s={s} levels={levels} scale={} log_power={} arc_exponent={}",
            calibration.scale, calibration.log_power, calibration.arc_exponent
        ),
    )
}

/// `z_n = (1 - 2^-n) e^{i theta_n}` with `theta_n = (-1)^n spread 2^-n`:
/// a sequence tending to 1 inside a Stolz angle.
pub fn gen_stolz(count: usize, spread: f64) -> Result<DiskSequence> {
    if count == 0 || count > LEVEL_CAP as usize {
        return Err(param(format!("Stolz count must lie in 1..={LEVEL_CAP}")));
    }
    if !spread.is_finite() || spread < 0.0 {
        return Err(param("Stolz spread must be finite and nonnegative"));
    }
    let points = (1..=count)
        .map(|n| {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let theta = sign * spread * 0.5f64.powi(n as i32);
            DiskPoint::clamp_inside(Complex64::from_polar(dyadic_radius(n as u32), theta))
        })
        .collect();
    DiskSequence::new(points, format!("stolz n={count} spread={spread}"))
}

/// Radial sequence `1 - q^n` where each point is moved by a seeded random
/// pseudo-hyperbolic displacement of size at most `amplitude`.
pub fn gen_perturbed_radial(q: f64, count: usize, amplitude: f64, seed: u64) -> Result<DiskSequence> {
    if !(0.0..0.5).contains(&amplitude) {
        return Err(param("perturbation amplitude must lie in [0, 0.5)"));
    }
    let base = gen_radial(q, count)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = base
        .points()
        .iter()
        .map(|p| {
            let r = amplitude * rng.gen::<f64>();
            let v = Complex64::from_polar(r, TAU * rng.gen::<f64>());
            // rho(p, sigma_p(v)) = |v|.
            DiskPoint::clamp_inside(sigma_c(p.value(), v))
        })
        .collect();
    DiskSequence::new(
        points,
        format!("perturbed-radial q={q} n={count} amplitude={amplitude} seed={seed}"),
    )
}

/// Seeded random points with pairwise `rho >= min_rho`, radii drawn so that
/// `1 - |z|` is log-uniform on `[1 - max_radius, 1]`.
pub fn gen_random_separated(count: usize, min_rho: f64, max_radius: f64, seed: u64) -> Result<DiskSequence> {
    if count == 0 {
        return Err(param("count must be at least 1"));
    }
    if !(min_rho > 0.0 && min_rho < 1.0) || !(max_radius > 0.0 && max_radius < 1.0) {
        return Err(param("min_rho and max_radius must lie in (0, 1)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = (1.0 - max_radius).ln();
    let mut pts: Vec<Complex64> = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while pts.len() < count {
        attempts += 1;
        if attempts > 100_000 {
            return Err(param(format!(
                "could not place {count} points with separation {min_rho} (placed {})",
                pts.len()
            )));
        }
        let gap = (lo * rng.gen::<f64>()).exp();
        let z = Complex64::from_polar(1.0 - gap, TAU * rng.gen::<f64>());
        if pts.iter().all(|&w| rho_c(z, w) >= min_rho) {
            pts.push(z);
        }
    }
    DiskSequence::from_complex(
        &pts,
        format!("random-separated n={count} rho>={min_rho} seed={seed}"),
    )
}

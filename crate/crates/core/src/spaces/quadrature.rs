//! Area quadrature on the unit disk with respect to the normalised measure
//! `dA = r dr dθ / π`.
//!
//! The disk is cut into radial shells `[0, 1/2]` and `[1 - 2^-j, 1 - 2^-(j+1)]`.
//! Each shell is split into angular panels, bisected near the hint points
//! where the integrand varies on the scale `|1 - conj(h) z|`, and every
//! panel carries a tensor Gauss-Legendre rule. The part of the disk beyond
//! the last shell is accounted for by a geometric tail fitted to the last
//! shell contributions.
//!
//! Integrable point singularities are removed with a smooth partition of
//! unity: around each singular point `c` a bump `χ` of radius `R` is
//! integrated in local polar coordinates `z = c + R v^2 e^{iφ}`, which
//! cancels singularities up to `|z - c|^-p` for `p < 2`, while the global
//! rule sees the integrand multiplied by `1 - Σχ`. Cells overlapping a bump
//! are subdivided until they are comparable to the bump.
//!
//! A grid is built once and reused: integrands are evaluated per node, so
//! one grid serves many parameters, truncation levels and masks.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::LevelValue;
use crate::error::{param, Result};
use crate::numeric::gauss_legendre_unit;

/// Deepest shell the grid will build; `1 - 2^-48` is still exact in `f64`.
pub const MAX_SHELLS: u32 = 48;

/// Smallest distance from a singular point at which local nodes are placed.
const LOCAL_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Minimum number of radial shells.
    pub boundary_levels: u32,
    /// Angular panels per shell before refinement.
    pub angular_base: usize,
    /// Maximum number of quadtree splits of a cell towards a singular point.
    pub zero_refinement_depth: u32,
    /// Relative agreement required between the last two tail-corrected
    /// shell estimates.
    pub rel_tol: f64,
    pub radial_order: usize,
    pub angular_order: usize,
    /// Shells added beyond the deepest hint or singular point.
    pub hint_margin: u32,
    /// A panel is bisected while wider than this multiple of its distance
    /// scale to the nearest hint.
    pub refinement_factor: f64,
    /// Gauss-Legendre order on each dyadic panel of the local radial rule.
    pub local_radial_order: usize,
    pub local_angular_order: usize,
    /// Number of dyadic panels `[2^-(i+1), 2^-i]` in the local radial
    /// variable; the innermost remainder carries one more panel.
    pub local_panels: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            boundary_levels: 20,
            angular_base: 16,
            zero_refinement_depth: 10,
            rel_tol: 1e-6,
            radial_order: 8,
            angular_order: 6,
            hint_margin: 12,
            refinement_factor: 0.75,
            local_radial_order: 8,
            local_angular_order: 24,
            local_panels: 40,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.boundary_levels < 3 || self.boundary_levels > MAX_SHELLS {
            return Err(param(format!("boundary_levels must lie in 3..={MAX_SHELLS}")));
        }
        if self.angular_base < 2 || self.radial_order == 0 || self.angular_order == 0 {
            return Err(param("angular_base must be at least 2 and rule orders positive"));
        }
        if self.local_radial_order == 0 || self.local_angular_order == 0 || self.local_panels == 0 {
            return Err(param("local rule orders must be positive"));
        }
        if !(self.rel_tol > 0.0) {
            return Err(param("rel_tol must be positive"));
        }
        if !(self.refinement_factor > 0.0) {
            return Err(param("refinement_factor must be positive"));
        }
        Ok(())
    }

    /// The same configuration one boundary level deeper.
    pub fn refined(&self) -> QuadratureConfig {
        QuadratureConfig {
            boundary_levels: (self.boundary_levels + 1).min(MAX_SHELLS),
            hint_margin: self.hint_margin + 1,
            ..*self
        }
    }
}

/// Where the integrand has structure.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GridSpec {
    /// Points of the closed disk near which the integrand varies fast.
    pub hints: Vec<Complex64>,
    /// Interior points carrying an integrable singularity.
    pub singular: Vec<Complex64>,
}

impl GridSpec {
    pub fn hints(hints: Vec<Complex64>) -> Self {
        GridSpec {
            hints,
            singular: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridNode {
    pub z: Complex64,
    /// `1 - |z|^2`, computed from the radial coordinate without cancellation.
    pub one_minus_sq: f64,
    pub weight: f64,
    pub shell: u32,
    pub cell: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub center: Complex64,
    pub one_minus_sq: f64,
    pub shell: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Converged,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub verdict: Verdict,
    /// Tail-corrected estimate using shells `0..=level`.
    pub per_level: Vec<LevelValue>,
    pub tail_ratio: f64,
    pub shells: u32,
}

impl QuadResult {
    pub fn converged(&self) -> bool {
        self.verdict == Verdict::Converged
    }
}

#[derive(Debug, Clone)]
pub struct DiskGrid {
    nodes: Vec<GridNode>,
    cells: Vec<GridCell>,
    shells: u32,
    rel_tol: f64,
}

struct Bump {
    c: Complex64,
    radius: f64,
    shell: u32,
}

/// `ψ(u) = 1 - S(u)` on `[0, 1]`, with `S` the septic smoothstep: equal to 1
/// at the centre, 0 at the rim, three continuous derivatives.
fn bump_profile(u: f64) -> f64 {
    if u >= 1.0 {
        return 0.0;
    }
    let u4 = u * u * u * u;
    1.0 - u4 * (35.0 - 84.0 * u + 70.0 * u * u - 20.0 * u * u * u)
}

fn shell_bounds(j: u32) -> (f64, f64, f64, f64) {
    // (r0, r1, 1 - r0, 1 - r1)
    if j == 0 {
        (0.0, 0.5, 1.0, 0.5)
    } else {
        let g0 = 0.5f64.powi(j as i32);
        let g1 = 0.5 * g0;
        (1.0 - g0, 1.0 - g1, g0, g1)
    }
}

fn shell_of_gap(gap: f64) -> u32 {
    if gap > 0.5 {
        0
    } else {
        (-gap.log2() + 1e-9).floor().max(1.0) as u32
    }
}

fn depth_of(z: Complex64) -> u32 {
    let gap = 1.0 - z.norm();
    if gap <= 0.0 {
        u32::MAX
    } else {
        shell_of_gap(gap)
    }
}

/// Angular distance from `theta` to the panel `[a, b]` on the circle.
fn angle_to_panel(theta: f64, a: f64, b: f64) -> f64 {
    let t = (theta - a).rem_euclid(TAU);
    let w = b - a;
    if t <= w {
        0.0
    } else {
        (t - w).min(TAU - t)
    }
}

impl DiskGrid {
    pub fn build(config: &QuadratureConfig, spec: &GridSpec) -> Result<DiskGrid> {
        config.validate()?;
        for h in spec.hints.iter().chain(&spec.singular) {
            if !h.re.is_finite() || !h.im.is_finite() || h.norm() > 1.0 + 1e-12 {
                return Err(param("grid hints must lie in the closed unit disk"));
            }
        }
        let mut singular: Vec<Complex64> = spec.singular.clone();
        singular.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        singular.dedup();
        if singular.iter().any(|c| c.norm() >= 1.0) {
            return Err(param("singular points must lie in the open disk"));
        }

        let deepest = spec
            .hints
            .iter()
            .filter(|h| h.norm() < 1.0)
            .chain(&singular)
            .map(|&h| depth_of(h))
            .max()
            .unwrap_or(0);
        let shells = config
            .boundary_levels
            .max(deepest.saturating_add(config.hint_margin))
            .min(MAX_SHELLS);

        let bumps = make_bumps(&singular);
        let radial = gauss_legendre_unit(config.radial_order);
        let angular = gauss_legendre_unit(config.angular_order);

        // Hint data: argument and modulus.
        let hints: Vec<(f64, f64)> = spec
            .hints
            .iter()
            .chain(&singular)
            .map(|h| (h.arg(), h.norm().min(1.0)))
            .collect();

        let per_shell: Vec<(Vec<GridNode>, Vec<GridCell>)> = (0..shells)
            .into_par_iter()
            .map(|j| build_shell(j, config, &hints, &bumps, &radial, &angular))
            .collect();

        let mut nodes = Vec::new();
        let mut cells = Vec::new();
        for (mut n, c) in per_shell {
            let offset = cells.len() as u32;
            for node in &mut n {
                node.cell += offset;
            }
            nodes.extend(n);
            cells.extend(c);
        }
        let local_base = gauss_legendre_unit(config.local_radial_order);
        for b in bumps.iter().filter(|b| b.shell < shells) {
            let local = local_radial_rule(&local_base, config.local_panels, b.radius);
            let cell = cells.len() as u32;
            let m = b.c.norm();
            cells.push(GridCell {
                center: b.c,
                one_minus_sq: (1.0 - m) * (1.0 + m),
                shell: b.shell,
            });
            let n_phi = config.local_angular_order;
            let dphi = TAU / n_phi as f64;
            for &(v, wv) in &local {
                let u = b.radius * v * v;
                let chi = bump_profile(v * v);
                let w = wv * dphi * 2.0 * b.radius * b.radius * v * v * v / PI * chi;
                for k in 0..n_phi {
                    let phi = dphi * (k as f64 + 0.5);
                    let z = b.c + Complex64::from_polar(u, phi);
                    let r = z.norm();
                    nodes.push(GridNode {
                        z,
                        one_minus_sq: (1.0 - r) * (1.0 + r),
                        weight: w,
                        shell: b.shell,
                        cell,
                    });
                }
            }
        }
        Ok(DiskGrid {
            nodes,
            cells,
            shells,
            rel_tol: config.rel_tol,
        })
    }

    pub fn nodes(&self) -> &[GridNode] {
        &self.nodes
    }

    pub fn cells(&self) -> &[GridCell] {
        &self.cells
    }

    pub fn shells(&self) -> u32 {
        self.shells
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Evaluates `f` at every node, in parallel; order is preserved.
    pub fn evaluate<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn(&GridNode) -> f64 + Sync + Send,
    {
        self.nodes.par_iter().map(f).collect()
    }

    /// Per-shell sums of `weight * value`.
    pub fn shell_sums(&self, values: &[f64]) -> Vec<f64> {
        let mut sums = vec![0.0; self.shells as usize];
        for (n, v) in self.nodes.iter().zip(values) {
            sums[n.shell as usize] += n.weight * v;
        }
        sums
    }

    /// Integral of pre-evaluated node values; `boundary_exponent` is the
    /// exponent `α` of `(1 - |z|)^α` that the integrand follows near the
    /// circle, when known.
    pub fn integrate_values(&self, values: &[f64], boundary_exponent: Option<f64>) -> QuadResult {
        integrate_shells(&self.shell_sums(values), boundary_exponent, self.rel_tol)
    }

    pub fn integrate<F>(&self, f: F, boundary_exponent: Option<f64>) -> QuadResult
    where
        F: Fn(&GridNode) -> f64 + Sync + Send,
    {
        self.integrate_values(&self.evaluate(f), boundary_exponent)
    }

    /// Sum of `weight * value` per cell, for turning an integrand into atoms.
    pub fn cell_sums(&self, values: &[f64]) -> Vec<f64> {
        let mut sums = vec![0.0; self.cells.len()];
        for (n, v) in self.nodes.iter().zip(values) {
            sums[n.cell as usize] += n.weight * v;
        }
        sums
    }
}

fn make_bumps(singular: &[Complex64]) -> Vec<Bump> {
    singular
        .iter()
        .enumerate()
        .filter_map(|(i, &c)| {
            let nearest = singular
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i)
                .map(|(_, &d)| (c - d).norm())
                .fold(f64::INFINITY, f64::min);
            let m = c.norm();
            let radius = (0.5 * (1.0 - m)).min(0.45 * nearest);
            (radius > 0.0).then(|| Bump {
                c,
                radius,
                shell: shell_of_gap(1.0 - m),
            })
        })
        .collect()
}

/// Nodes and weights on `[0, 1]` for the local radial variable `v`, graded
/// dyadically towards `v = 0`. With `u = R v^2` the singular factor
/// `u^(1-p)` becomes `v^(3-2p)`, which is smooth on every dyadic panel, and
/// the innermost panel holds a fraction `2^-(panels (4 - 2p))` of the mass.
///
/// Grading stops once `R v^2` would approach the rounding level of the
/// centre, so that no node collapses onto the singular point itself.
fn local_radial_rule(base: &[(f64, f64)], panels: u32, radius: f64) -> Vec<(f64, f64)> {
    let representable = (0.5 * (radius / LOCAL_FLOOR).log2()).floor().max(1.0) as u32;
    let panels = panels.min(representable);
    let mut rule = Vec::with_capacity(base.len() * (panels as usize + 1));
    for i in 0..=panels {
        let hi = 0.5f64.powi(i as i32);
        let lo = if i == panels { 0.0 } else { 0.5 * hi };
        rule.extend(base.iter().map(|&(x, w)| (lo + (hi - lo) * x, (hi - lo) * w)));
    }
    rule
}

/// Angular panels of one shell: uniform base panels, bisected near hints.
fn shell_panels(j: u32, config: &QuadratureConfig, hints: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let (_, r1, _, _) = shell_bounds(j);
    let base = TAU / config.angular_base as f64;
    let kappa = config.refinement_factor;
    // Only hints whose scale is below the base width can cause splits.
    let active: Vec<(f64, f64)> = hints
        .iter()
        .map(|&(arg, m)| (arg, 1.0 - m * r1))
        .filter(|&(_, scale)| kappa * scale < base)
        .collect();
    let min_width = TAU * 0.5f64.powi(50);
    let mut out = Vec::new();
    let mut stack: Vec<(f64, f64)> = (0..config.angular_base)
        .rev()
        .map(|k| (k as f64 * base, (k + 1) as f64 * base))
        .collect();
    while let Some((a, b)) = stack.pop() {
        let width = b - a;
        let split = width > min_width
            && active
                .iter()
                .any(|&(arg, scale)| width > kappa * (scale + angle_to_panel(arg, a, b)));
        if split {
            let m = 0.5 * (a + b);
            stack.push((m, b));
            stack.push((a, m));
        } else {
            out.push((a, b));
        }
    }
    out
}

struct CellBox {
    r0: f64,
    r1: f64,
    g0: f64,
    g1: f64,
    t0: f64,
    t1: f64,
}

impl CellBox {
    fn size(&self) -> f64 {
        (self.r1 - self.r0).max(self.r1 * (self.t1 - self.t0))
    }

    fn meets(&self, b: &Bump) -> bool {
        let m = b.c.norm();
        if m + b.radius < self.r0 || m - b.radius > self.r1 {
            return false;
        }
        if m <= b.radius {
            return true;
        }
        let half = (b.radius / m).min(1.0).asin();
        angle_to_panel(b.c.arg(), self.t0, self.t1) <= half * 1.0000001
    }
}

fn build_shell(
    j: u32,
    config: &QuadratureConfig,
    hints: &[(f64, f64)],
    bumps: &[Bump],
    radial: &[(f64, f64)],
    angular: &[(f64, f64)],
) -> (Vec<GridNode>, Vec<GridCell>) {
    let (r0, r1, g0, g1) = shell_bounds(j);
    let near: Vec<&Bump> = bumps
        .iter()
        .filter(|b| {
            let m = b.c.norm();
            m + b.radius >= r0 && m - b.radius <= r1
        })
        .collect();
    let mut nodes = Vec::new();
    let mut cells = Vec::new();
    for (t0, t1) in shell_panels(j, config, hints) {
        let cell = CellBox { r0, r1, g0, g1, t0, t1 };
        let meeting: Vec<&Bump> = near.iter().copied().filter(|b| cell.meets(b)).collect();
        emit_cell(cell, &meeting, 0, j, config, radial, angular, &mut nodes, &mut cells);
    }
    (nodes, cells)
}

#[allow(clippy::too_many_arguments)]
fn emit_cell(
    cell: CellBox,
    bumps: &[&Bump],
    depth: u32,
    shell: u32,
    config: &QuadratureConfig,
    radial: &[(f64, f64)],
    angular: &[(f64, f64)],
    nodes: &mut Vec<GridNode>,
    cells: &mut Vec<GridCell>,
) {
    let min_radius = bumps.iter().map(|b| b.radius).fold(f64::INFINITY, f64::min);
    if !bumps.is_empty() && depth < config.zero_refinement_depth && cell.size() > 0.25 * min_radius {
        let rm = 0.5 * (cell.r0 + cell.r1);
        let gm = 0.5 * (cell.g0 + cell.g1);
        let tm = 0.5 * (cell.t0 + cell.t1);
        let halves = [
            (cell.r0, rm, cell.g0, gm),
            (rm, cell.r1, gm, cell.g1),
        ];
        for &(ra, rb, ga, gb) in &halves {
            for &(ta, tb) in &[(cell.t0, tm), (tm, cell.t1)] {
                let child = CellBox { r0: ra, r1: rb, g0: ga, g1: gb, t0: ta, t1: tb };
                let meeting: Vec<&Bump> = bumps.iter().copied().filter(|b| child.meets(b)).collect();
                emit_cell(child, &meeting, depth + 1, shell, config, radial, angular, nodes, cells);
            }
        }
        return;
    }
    let index = cells.len() as u32;
    let (rc, gc) = (0.5 * (cell.r0 + cell.r1), 0.5 * (cell.g0 + cell.g1));
    let tc = 0.5 * (cell.t0 + cell.t1);
    cells.push(GridCell {
        center: Complex64::from_polar(rc, tc),
        one_minus_sq: gc * (2.0 - gc),
        shell,
    });
    let dr = cell.r1 - cell.r0;
    let dt = cell.t1 - cell.t0;
    for &(x, wx) in radial {
        // Interpolate the gap rather than the radius: near the circle the
        // gap carries the significant digits.
        let gap = cell.g0 + (cell.g1 - cell.g0) * x;
        let r = 1.0 - gap;
        let omsq = gap * (2.0 - gap);
        for &(y, wy) in angular {
            let theta = cell.t0 + dt * y;
            let z = Complex64::from_polar(r, theta);
            let mut weight = wx * wy * dr * dt * r / PI;
            if !bumps.is_empty() {
                let chi: f64 = bumps
                    .iter()
                    .map(|b| bump_profile((z - b.c).norm() / b.radius))
                    .sum();
                weight *= 1.0 - chi;
            }
            nodes.push(GridNode {
                z,
                one_minus_sq: omsq,
                weight,
                shell,
                cell: index,
            });
        }
    }
}

/// Tail-corrected estimates from per-shell contributions.
pub fn integrate_shells(sums: &[f64], boundary_exponent: Option<f64>, rel_tol: f64) -> QuadResult {
    let n = sums.len();
    let fixed_q = boundary_exponent.map(|a| (-(a + 1.0)).exp2());
    let estimate = |level: usize| -> (f64, f64) {
        let partial: f64 = sums[..=level].iter().sum();
        let last = sums[level];
        let q = match fixed_q {
            Some(q) => q,
            None if level >= 2 && sums[level - 1] != 0.0 => {
                let ratio = last / sums[level - 1];
                if ratio.is_finite() && ratio > 0.0 {
                    ratio.min(0.98)
                } else {
                    0.0
                }
            }
            None => 0.0,
        };
        let q = if q < 1.0 { q } else { 0.98 };
        (partial + last * q / (1.0 - q), q)
    };
    let mut per_level = Vec::with_capacity(n);
    let mut q_last = 0.0;
    for level in 2..n {
        let (v, q) = estimate(level);
        q_last = q;
        per_level.push(LevelValue { level: level as u32, value: v });
    }
    let value = per_level.last().map(|l| l.value).unwrap_or_else(|| sums.iter().sum());
    let verdict = if per_level.len() >= 2 {
        let prev = per_level[per_level.len() - 2].value;
        let scale = value.abs().max(prev.abs());
        if (value - prev).abs() <= rel_tol * scale || scale == 0.0 {
            Verdict::Converged
        } else {
            Verdict::Inconclusive
        }
    } else {
        Verdict::Inconclusive
    };
    QuadResult {
        value,
        verdict,
        per_level,
        tail_ratio: q_last,
        shells: n as u32,
    }
}

/// Builds a grid for `spec` and integrates `f` on it.
pub fn integrate_disk<F>(f: F, config: &QuadratureConfig, spec: &GridSpec, boundary_exponent: Option<f64>) -> Result<QuadResult>
where
    F: Fn(&GridNode) -> f64 + Sync + Send,
{
    let grid = DiskGrid::build(config, spec)?;
    Ok(grid.integrate(f, boundary_exponent))
}

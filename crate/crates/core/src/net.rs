//! Sampling nets for suprema over the disk.
//!
//! A net is a finite set of disk points, each tagged with the dyadic level
//! `floor(-log2(1 - |a|))` at which it enters the truncated supremum. It is
//! built from three layers: staggered rings at radii `1 - 2^-j`, the anchor
//! points themselves (atoms or zeros), and radial rays through every anchor
//! direction, where suprema over `a` concentrate.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::mobius::{generation_of, DiskPoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetConfig {
    /// Deepest ring and ray level `j` (radius `1 - 2^-j`).
    pub levels: u32,
    /// Ring `j` carries `density * 2^j` angles before capping.
    pub density: usize,
    pub ring_cap: usize,
    /// Whether to add radial rays through the anchors.
    pub rays: bool,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            levels: 14,
            density: 8,
            ring_cap: 256,
            rays: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetPoint {
    pub point: DiskPoint,
    pub level: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingNet {
    points: Vec<NetPoint>,
}

impl SamplingNet {
    /// Net from explicit points, levels assigned by generation.
    pub fn from_points(points: &[DiskPoint]) -> Result<Self> {
        if points.is_empty() {
            return Err(param("sampling net must be nonempty"));
        }
        Ok(SamplingNet {
            points: points
                .iter()
                .map(|&p| NetPoint {
                    point: p,
                    level: p.generation(),
                })
                .collect(),
        })
    }

    /// The origin, the rings, the anchors and (optionally) rays through the
    /// anchors and through the extra boundary directions (angles in radians).
    pub fn build(config: &NetConfig, anchors: &[DiskPoint], directions: &[f64]) -> Result<Self> {
        if config.density == 0 || config.ring_cap == 0 {
            return Err(param("net density and ring cap must be positive"));
        }
        let mut points = vec![NetPoint {
            point: DiskPoint::ORIGIN,
            level: 0,
        }];
        for j in 1..=config.levels {
            let n = config
                .density
                .saturating_mul(1usize << j.min(40))
                .min(config.ring_cap);
            let r = 1.0 - 0.5f64.powi(j as i32);
            let offset = if j % 2 == 1 { 0.5 } else { 0.0 };
            for k in 0..n {
                let theta = TAU * (k as f64 + offset) / n as f64;
                points.push(NetPoint {
                    point: DiskPoint::clamp_inside(Complex64::from_polar(r, theta)),
                    level: j,
                });
            }
        }
        for &a in anchors {
            points.push(NetPoint {
                point: a,
                level: a.generation(),
            });
        }
        if config.rays {
            let mut dirs: Vec<f64> = anchors
                .iter()
                .filter(|a| a.modulus() > 0.0)
                .map(|a| a.value().arg())
                .chain(directions.iter().copied())
                .collect();
            dirs.sort_by(f64::total_cmp);
            dirs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
            for theta in dirs {
                for j in 1..=config.levels {
                    let r = 1.0 - 0.5f64.powi(j as i32);
                    points.push(NetPoint {
                        point: DiskPoint::clamp_inside(Complex64::from_polar(r, theta)),
                        level: j,
                    });
                }
            }
        }
        Ok(SamplingNet { points })
    }

    pub fn points(&self) -> &[NetPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max_level(&self) -> u32 {
        self.points.iter().map(|p| p.level).max().unwrap_or(0)
    }

    /// The subnet of points at level at most `level`.
    pub fn truncated(&self, level: u32) -> SamplingNet {
        SamplingNet {
            points: self.points.iter().copied().filter(|p| p.level <= level).collect(),
        }
    }
}

/// Level of a raw complex point, as used for net and atom truncation.
pub fn level_of(z: Complex64) -> u32 {
    generation_of(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rings_have_expected_sizes() {
        let cfg = NetConfig {
            levels: 6,
            density: 8,
            ring_cap: 128,
            rays: false,
        };
        let net = SamplingNet::build(&cfg, &[], &[]).unwrap();
        // 1 + 16 + 32 + 64 + 128 + 128 + 128
        assert_eq!(net.len(), 1 + 16 + 32 + 64 + 128 * 3);
        assert_eq!(net.max_level(), 6);
        for p in net.points() {
            assert_eq!(p.level, p.point.generation());
        }
    }

    #[test]
    fn anchors_and_rays_are_included() {
        let cfg = NetConfig {
            levels: 5,
            density: 1,
            ring_cap: 1,
            rays: true,
        };
        let a = DiskPoint::from_polar(0.9, 1.0).unwrap();
        let net = SamplingNet::build(&cfg, &[a, a], &[0.0]).unwrap();
        assert!(net.points().iter().any(|p| p.point == a));
        let on_ray = net
            .points()
            .iter()
            .filter(|p| p.point.modulus() > 0.0 && (p.point.value().arg() - 1.0).abs() < 1e-12)
            .count();
        // Two copies of the anchor plus five ray points (duplicate direction merged).
        assert_eq!(on_ray, 7);
    }

    #[test]
    fn explicit_points_and_truncation() {
        assert!(SamplingNet::from_points(&[]).is_err());
        let pts = [DiskPoint::ORIGIN, DiskPoint::real(0.75).unwrap()];
        let net = SamplingNet::from_points(&pts).unwrap();
        assert_eq!(net.truncated(1).len(), 1);
        assert_eq!(net.truncated(2).len(), 2);
    }
}

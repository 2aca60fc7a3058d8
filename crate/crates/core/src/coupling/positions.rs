use rand::Rng;
use serde::{Deserialize, Serialize};

use super::density::DensityProfile;
use crate::{rng, Error, Result, Vec2};

/// One atomic ensemble: trap center (µm) and density profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinSite {
    pub position: Vec2,
    pub density: DensityProfile,
}

impl SpinSite {
    pub fn new(position: Vec2) -> Self {
        Self { position, density: DensityProfile::default() }
    }
}

/// Randomized rectilinear layout: an n_x × n_y grid of pitch (d_x, d_y)
/// whose center is jittered uniformly within (w_cx, w_cy) and whose rows and
/// columns are jittered independently within (w_x, w_y). All lengths in µm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PositionGroupParams {
    pub n_x: usize,
    pub n_y: usize,
    pub d_x: f64,
    pub d_y: f64,
    pub w_cx: f64,
    pub w_cy: f64,
    pub w_x: f64,
    pub w_y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PositionGroup {
    A,
    B,
    C,
    D,
}

impl PositionGroup {
    pub fn params(self) -> PositionGroupParams {
        let p = |n_x, n_y, d_x, d_y, w_cx, w_cy, w_x, w_y| PositionGroupParams { n_x, n_y, d_x, d_y, w_cx, w_cy, w_x, w_y };
        match self {
            PositionGroup::A => p(4, 4, 62.0, 62.0, 14.0, 14.0, 6.0, 6.0),
            PositionGroup::B => p(3, 4, 85.0, 62.0, 18.0, 14.0, 18.0, 6.0),
            PositionGroup::C => p(2, 4, 130.0, 62.0, 26.0, 14.0, 50.0, 6.0),
            PositionGroup::D => p(4, 2, 62.0, 124.0, 14.0, 14.0, 6.0, 6.0),
        }
    }
}

impl PositionGroupParams {
    pub fn n(&self) -> usize {
        self.n_x * self.n_y
    }

    pub fn validate(&self) -> Result<()> {
        if self.n() == 0 {
            return Err(Error::InvalidParameter("position group has no sites".into()));
        }
        let lengths = [self.d_x, self.d_y, self.w_cx, self.w_cy, self.w_x, self.w_y];
        if lengths.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter("pitches and widths must be finite and nonnegative".into()));
        }
        Ok(())
    }
}

/// Experimental layout constraints enforced by rejection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PositionConstraints {
    /// µm
    pub min_separation: f64,
    /// µm
    pub max_radius: f64,
    pub max_attempts: usize,
}

impl Default for PositionConstraints {
    fn default() -> Self {
        Self { min_separation: 40.0, max_radius: 150.0, max_attempts: 1000 }
    }
}

impl PositionConstraints {
    pub fn satisfied(&self, pts: &[Vec2]) -> bool {
        let r2 = self.max_radius * self.max_radius;
        let s2 = self.min_separation * self.min_separation;
        pts.iter().all(|p| p[0] * p[0] + p[1] * p[1] <= r2)
            && pts.iter().enumerate().all(|(i, p)| {
                pts[i + 1..].iter().all(|q| (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) >= s2)
            })
    }
}

fn jitter(rng: &mut impl Rng, width: f64) -> f64 {
    if width > 0.0 {
        rng.random_range(-width / 2.0..=width / 2.0)
    } else {
        0.0
    }
}

/// Sites ordered row-major: index k sits in column k mod n_x and row k / n_x.
pub fn sample_positions(
    params: &PositionGroupParams,
    constraints: &PositionConstraints,
    density: DensityProfile,
    seed: u64,
) -> Result<Vec<SpinSite>> {
    params.validate()?;
    let mut rng = rng::seeded(seed);
    for _ in 0..constraints.max_attempts {
        let xc = jitter(&mut rng, params.w_cx);
        let yc = jitter(&mut rng, params.w_cy);
        let xs: Vec<f64> = (0..params.n_x)
            .map(|i| xc + (i as f64 - (params.n_x as f64 - 1.0) / 2.0) * params.d_x + jitter(&mut rng, params.w_x))
            .collect();
        let ys: Vec<f64> = (0..params.n_y)
            .map(|j| yc + (j as f64 - (params.n_y as f64 - 1.0) / 2.0) * params.d_y + jitter(&mut rng, params.w_y))
            .collect();
        let pts: Vec<Vec2> = ys.iter().flat_map(|&y| xs.iter().map(move |&x| [x, y])).collect();
        if constraints.satisfied(&pts) {
            return Ok(pts.into_iter().map(|position| SpinSite { position, density }).collect());
        }
    }
    Err(Error::ConstraintUnsatisfiable { attempts: constraints.max_attempts })
}

/// The published 4 × 4 layout of the J1 realization.
pub fn j1_fixture() -> Vec<SpinSite> {
    const XS: [f64; 4] = [-97.15, -36.3, 25.2, 85.1];
    const YS: [f64; 4] = [-93.4, -28.9, 32.3, 97.3];
    YS.iter().flat_map(|&y| XS.iter().map(move |&x| SpinSite::new([x, y]))).collect()
}

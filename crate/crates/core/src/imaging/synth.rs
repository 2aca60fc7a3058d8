use num_complex::Complex64;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::model::{FieldModel, ImagingGrid};
use crate::coupling::SpinSite;
use crate::optics::{CavityGeometry, ComplexFieldImage};
use crate::{rng, Error, Result};

/// Additive complex Gaussian pixel noise at a given ratio of mean signal
/// power to mean noise power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub snr_db: f64,
    pub seed: u64,
}

/// Steady-state emitted field Σ_i s_i ∫ ρ_i(r′) G^η(r, r′) dr′ on the grid,
/// multiplied by `scale`.
pub fn synthesize_field(
    spins: &[f64],
    sites: &[SpinSite],
    geom: &CavityGeometry,
    grid: &ImagingGrid,
    scale: f64,
    noise: Option<NoiseSpec>,
) -> Result<ComplexFieldImage> {
    if spins.len() != sites.len() {
        return Err(Error::DimensionMismatch { expected: sites.len(), found: spins.len() });
    }
    let mut image = grid.blank(geom)?;
    let model = FieldModel::new(&image, geom)?;
    for site in sites {
        site.density.validate()?;
        model.check_coverage(site.position, &site.density)?;
    }
    let mut field = vec![0.0; model.len()];
    for (site, &s) in sites.iter().zip(spins) {
        if s != 0.0 {
            model.accumulate(&mut field, site.position, &site.density, s * scale, true);
        }
    }
    for (z, v) in image.data_mut().iter_mut().zip(&field) {
        *z = Complex64::new(*v, 0.0);
    }
    if let Some(spec) = noise {
        let mean_power = image.power() / field.len() as f64;
        let sigma = (mean_power / 10f64.powf(spec.snr_db / 10.0) / 2.0).sqrt();
        let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidParameter(format!("noise: {e}")))?;
        let mut rng = rng::seeded(spec.seed);
        for z in image.data_mut() {
            *z += Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
        }
    }
    Ok(image)
}

use serde::{Deserialize, Serialize};

use super::PosteriorSamples;
use crate::error::{Error, Result};
use crate::grid::{linspace, GridDensity};
use crate::specfun::norm_pdf;
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum Bandwidth {
    /// 0.9 · min(sd, IQR/1.34) · n^(−1/5).
    #[default]
    Silverman,
    Fixed { h: f64 },
}

fn quantile_sorted(xs: &[f64], p: f64) -> f64 {
    let pos = p * (xs.len() - 1) as f64;
    let i = pos.floor() as usize;
    let f = pos - i as f64;
    if i + 1 < xs.len() {
        xs[i] + f * (xs[i + 1] - xs[i])
    } else {
        xs[i]
    }
}

impl Bandwidth {
    pub fn resolve(&self, values: &[f64]) -> Result<f64> {
        match *self {
            Bandwidth::Fixed { h } if h > 0.0 && h.is_finite() => Ok(h),
            Bandwidth::Fixed { h } => Err(Error::Usage(format!("kde bandwidth must be positive, got {h}"))),
            Bandwidth::Silverman => {
                if values.len() < 2 {
                    return Err(Error::Numeric("Silverman bandwidth needs at least two samples".into()));
                }
                let sd = stats::var(values).sqrt();
                let mut sorted = values.to_vec();
                sorted.sort_by(f64::total_cmp);
                let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
                let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
                let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
                if !(spread > 1e-12 * scale) {
                    return Err(Error::Numeric(
                        "samples have zero spread; Silverman bandwidth is undefined, pass a fixed bandwidth".into(),
                    ));
                }
                Ok(0.9 * spread * (values.len() as f64).powf(-0.2))
            }
        }
    }
}

/// Gaussian-kernel density of `values` evaluated on `grid`, normalized there.
pub fn kde_1d(values: &[f64], bw: Bandwidth, grid: Vec<f64>) -> Result<GridDensity> {
    if values.is_empty() {
        return Err(Error::Usage("kde needs at least one sample".into()));
    }
    let h = bw.resolve(values)?;
    let n = values.len() as f64;
    let dens: Vec<f64> =
        grid.iter().map(|&x| values.iter().map(|&v| norm_pdf((x - v) / h)).sum::<f64>() / (n * h)).collect();
    GridDensity::new(grid, dens)?.normalize()
}

/// KDE of a scalar transform of the posterior draws, on 2001 points spanning
/// the samples plus four bandwidths on either side.
pub fn kde_from_samples<T>(samples: &PosteriorSamples, transform: T, bw: Bandwidth) -> Result<GridDensity>
where
    T: Fn(f64, f64) -> f64,
{
    let values: Vec<f64> = samples.draws.iter().map(|&(a, b)| transform(a, b)).collect();
    let h = bw.resolve(&values)?;
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min) - 4.0 * h;
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 4.0 * h;
    kde_1d(&values, Bandwidth::Fixed { h }, linspace(lo, hi, 2001))
}

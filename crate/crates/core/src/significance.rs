//! White-noise significance test for IMFs with Monte-Carlo percentile bands.

use rayon::prelude::*;

use crate::decompose;
use crate::emd::{gaussian_noise, trial_rng, EemdConfig, SiftConfig};
use crate::envelope::zero_crossings;
use crate::error::{EmdError, Result};
use crate::signal::{Decomposition, SampledSignal, Variant};

pub const MIN_TRIALS: usize = 50;
pub const DEFAULT_TRIALS: usize = 100;

/// Width of a period bin in log2 units (half an octave).
const BIN_WIDTH_LOG2: f64 = 0.5;

/// Bins with fewer points are dropped from the band.
const MIN_BIN_POINTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    Inside,
    Above,
    Below,
    /// The component has no zero crossings.
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SignificancePoint {
    /// Seconds; NaN when not applicable.
    pub mean_period: f64,
    pub energy_density: f64,
    pub placement: Placement,
}

impl SignificancePoint {
    pub fn inside_bounds(&self) -> bool {
        self.placement == Placement::Inside
    }
}

/// `2 · duration / zero_crossings` and the per-sample mean of `x²`.
pub fn imf_statistics(imf: &SampledSignal) -> Result<SignificancePoint> {
    if imf.len() < 8 {
        return Err(EmdError::InsufficientData {
            needed: 8,
            got: imf.len(),
        });
    }
    let zc = zero_crossings(imf.samples());
    if zc == 0 {
        return Err(EmdError::PeriodUndefined);
    }
    let n = imf.len() as f64;
    Ok(SignificancePoint {
        mean_period: 2.0 * imf.duration() / zc as f64,
        energy_density: imf.samples().iter().map(|v| v * v).sum::<f64>() / n,
        placement: Placement::NotApplicable,
    })
}

/// 5th and 95th percentiles of IMF energy density as functions of mean
/// period, for unit-variance white noise.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ConfidenceBand {
    /// Ascending, in seconds at `sample_rate`.
    pub period_grid: Vec<f64>,
    pub lower_5th: Vec<f64>,
    pub upper_95th: Vec<f64>,
    pub ensemble_size: usize,
    pub noise_length: usize,
    pub sample_rate: f64,
    pub variant: Variant,
}

impl ConfidenceBand {
    /// Percentile curves at `period` (seconds at the band's rate), linear in
    /// log-log coordinates. Past either end of the grid the end bin's E·T
    /// percentiles are kept.
    pub fn bounds_at(&self, period: f64) -> (f64, f64) {
        let g = &self.period_grid;
        let last = g.len() - 1;
        let end = |k: usize| {
            let s = g[k] / period;
            (self.lower_5th[k] * s, self.upper_95th[k] * s)
        };
        if period <= g[0] {
            return end(0);
        }
        if period >= g[last] {
            return end(last);
        }
        let k = g.partition_point(|&p| p <= period) - 1;
        let w = (period.ln() - g[k].ln()) / (g[k + 1].ln() - g[k].ln());
        let lerp = |a: f64, b: f64| (a.ln() + w * (b.ln() - a.ln())).exp();
        (
            lerp(self.lower_5th[k], self.lower_5th[k + 1]),
            lerp(self.upper_95th[k], self.upper_95th[k + 1]),
        )
    }
}

/// Type-7 (linear interpolation) quantile of sorted data.
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn unit_variance(x: &SampledSignal) -> SampledSignal {
    let sd = x.std_dev();
    if sd > 0.0 {
        x.scale(1.0 / sd)
    } else {
        x.clone()
    }
}

/// Band at 1 Hz with default sifting.
pub fn white_noise_band(length: usize, decomposer: Variant, trials: usize, seed: u64) -> Result<ConfidenceBand> {
    white_noise_band_with(
        length,
        1.0,
        decomposer,
        trials,
        seed,
        &SiftConfig::default(),
        &EemdConfig::default(),
    )
}

/// Decomposes `trials` seeded white-noise records (rescaled to unit sample
/// variance), pools the (period, energy density) pairs of every IMF and
/// reports percentiles of E·T per half-octave period bin, divided by the
/// bin's mean period.
pub fn white_noise_band_with(
    length: usize,
    sample_rate: f64,
    decomposer: Variant,
    trials: usize,
    seed: u64,
    sift: &SiftConfig,
    ensemble: &EemdConfig,
) -> Result<ConfidenceBand> {
    if trials < MIN_TRIALS {
        return Err(EmdError::InvalidConfig(format!(
            "at least {MIN_TRIALS} trials are needed, got {trials}"
        )));
    }
    if length < 8 {
        return Err(EmdError::InsufficientData { needed: 8, got: length });
    }
    let per_trial: Vec<Vec<(f64, f64)>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let noise = gaussian_noise(&mut trial_rng(seed, t), length, 1.0);
            let x = unit_variance(&SampledSignal::new(noise, sample_rate)?);
            let d = decompose(&x, decomposer, sift, ensemble)?;
            Ok(d.imfs
                .iter()
                .filter_map(|imf| imf_statistics(imf).ok())
                .map(|p| (p.mean_period, p.energy_density))
                .collect())
        })
        .collect::<Result<_>>()?;

    let points: Vec<(f64, f64)> = per_trial
        .into_iter()
        .flatten()
        .filter(|&(_, e)| e > 0.0)
        .collect();
    let bin_of = |p: f64| (p.log2() / BIN_WIDTH_LOG2).floor() as i64;
    let mut bins: std::collections::BTreeMap<i64, Vec<(f64, f64)>> = Default::default();
    for &(p, e) in &points {
        bins.entry(bin_of(p)).or_default().push((p, e));
    }

    let mut band = ConfidenceBand {
        period_grid: Vec::new(),
        lower_5th: Vec::new(),
        upper_95th: Vec::new(),
        ensemble_size: trials,
        noise_length: length,
        sample_rate,
        variant: decomposer,
    };
    for members in bins.values().filter(|m| m.len() >= MIN_BIN_POINTS) {
        let log_mean = members.iter().map(|(p, _)| p.ln()).sum::<f64>() / members.len() as f64;
        let period = log_mean.exp();
        // percentiles of E·T, which white-noise IMFs keep near constant
        let mut product: Vec<f64> = members.iter().map(|&(p, e)| p * e).collect();
        product.sort_by(f64::total_cmp);
        band.period_grid.push(period);
        band.lower_5th.push(quantile_sorted(&product, 0.05) / period);
        band.upper_95th.push(quantile_sorted(&product, 0.95) / period);
    }
    if band.period_grid.is_empty() {
        return Err(EmdError::InsufficientData {
            needed: MIN_BIN_POINTS,
            got: points.len(),
        });
    }
    Ok(band)
}

/// Places every IMF of `d` relative to `band` after scaling the
/// decomposition so the reconstructed signal has unit variance. Periods are
/// compared in samples, so the band may come from a different sample rate.
pub fn significance_test(d: &Decomposition, band: &ConfidenceBand) -> Result<Vec<SignificancePoint>> {
    let sd = d.reconstruct().std_dev();
    if !(sd > 0.0) {
        return Err(EmdError::InvalidSignal("signal has zero variance".into()));
    }
    let rate_ratio = d.sample_rate() / band.sample_rate;
    d.imfs
        .iter()
        .map(|imf| match imf_statistics(&imf.scale(1.0 / sd)) {
            Ok(mut p) => {
                let (lo, hi) = band.bounds_at(p.mean_period * rate_ratio);
                p.placement = if p.energy_density > hi {
                    Placement::Above
                } else if p.energy_density < lo {
                    Placement::Below
                } else {
                    Placement::Inside
                };
                Ok(p)
            }
            Err(EmdError::PeriodUndefined) => Ok(SignificancePoint {
                mean_period: f64::NAN,
                energy_density: imf.samples().iter().map(|v| v * v).sum::<f64>() / (imf.len() as f64 * sd * sd),
                placement: Placement::NotApplicable,
            }),
            Err(e) => Err(e),
        })
        .collect()
}

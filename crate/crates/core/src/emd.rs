//! Sifting, the IMF test, EMD and ensemble EMD.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::envelope::{extrema_of, mean_envelope_of, mean_envelope_with, zero_crossings};
use crate::error::{EmdError, Result};
use crate::signal::{Decomposition, SampledSignal, Variant};

/// Hard ceiling on extracted modes when `max_imfs` is 0.
pub(crate) const IMF_CEILING: usize = 100;

/// Envelope-mean tolerance of the IMF test, as a fraction of `max|x|`.
pub const IMF_MEAN_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiftConfig {
    /// Cauchy-type stop: Σ(h_{k-1} - h_k)² / Σ h_{k-1}² ≤ threshold.
    pub sd_threshold: f64,
    pub max_sift_iterations: usize,
    /// 0 means unlimited.
    pub max_imfs: usize,
}

impl Default for SiftConfig {
    fn default() -> Self {
        Self {
            sd_threshold: 0.2,
            max_sift_iterations: 100,
            max_imfs: 0,
        }
    }
}

impl SiftConfig {
    pub fn new(sd_threshold: f64, max_sift_iterations: usize, max_imfs: usize) -> Result<Self> {
        let cfg = Self {
            sd_threshold,
            max_sift_iterations,
            max_imfs,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sd_threshold.is_finite() && self.sd_threshold > 0.0) {
            return Err(EmdError::InvalidConfig(format!(
                "sd_threshold must be positive, got {}",
                self.sd_threshold
            )));
        }
        if self.max_sift_iterations < 1 {
            return Err(EmdError::InvalidConfig(
                "max_sift_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn imf_limit(&self) -> usize {
        if self.max_imfs == 0 {
            IMF_CEILING
        } else {
            self.max_imfs
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EemdConfig {
    /// Noise standard deviation as a fraction of the signal's.
    pub noise_stddev_ratio: f64,
    pub ensemble_size: usize,
    pub rng_seed: u64,
}

impl Default for EemdConfig {
    fn default() -> Self {
        Self {
            noise_stddev_ratio: 0.2,
            ensemble_size: 100,
            rng_seed: 0,
        }
    }
}

impl EemdConfig {
    pub fn new(noise_stddev_ratio: f64, ensemble_size: usize, rng_seed: u64) -> Result<Self> {
        let cfg = Self {
            noise_stddev_ratio,
            ensemble_size,
            rng_seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_stddev_ratio.is_finite() && self.noise_stddev_ratio >= 0.0) {
            return Err(EmdError::InvalidConfig(format!(
                "noise_stddev_ratio must be non-negative, got {}",
                self.noise_stddev_ratio
            )));
        }
        if self.ensemble_size == 0 {
            return Err(EmdError::InvalidConfig("ensemble_size must be at least 1".into()));
        }
        Ok(())
    }
}

/// Extrema/zero-crossing balance plus a near-zero envelope mean.
pub fn is_imf(x: &SampledSignal) -> bool {
    if x.len() < 3 {
        return false;
    }
    match mean_envelope_of(x.samples()) {
        Ok(mean) => imf_conditions(x.samples(), &mean),
        Err(_) => false,
    }
}

pub(crate) fn imf_conditions(x: &[f64], mean: &[f64]) -> bool {
    let ext = extrema_of(x).count() as i64;
    let zc = zero_crossings(x) as i64;
    if (ext - zc).abs() > 1 {
        return false;
    }
    let peak = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mean_peak = mean.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    mean_peak <= IMF_MEAN_TOLERANCE * peak
}

/// True when the signal is a trend: too few extrema for another mode.
pub(crate) fn is_residue_like(x: &[f64]) -> bool {
    let ext = extrema_of(x);
    ext.maxima.is_empty() || ext.minima.is_empty() || ext.count() < 3
}

/// Extracts one IMF by repeated envelope-mean subtraction.
///
/// Returns `(imf, residue)` with `residue = x - imf`.
pub fn sift_one_imf(x: &SampledSignal, cfg: &SiftConfig) -> Result<(SampledSignal, SampledSignal)> {
    cfg.validate()?;
    let h = sift_samples(x.samples(), cfg)?;
    let residue: Vec<f64> = x.samples().iter().zip(&h).map(|(a, b)| a - b).collect();
    Ok((SampledSignal::derived(x, h), SampledSignal::derived(x, residue)))
}

pub(crate) fn sift_samples(x: &[f64], cfg: &SiftConfig) -> Result<Vec<f64>> {
    let mut h = x.to_vec();
    let mut iterations = 0;
    loop {
        let ext = extrema_of(&h);
        let mean = match mean_envelope_with(&h, &ext) {
            Ok(m) => m,
            Err(EmdError::NoEnvelope) if iterations > 0 => break,
            Err(e) => return Err(e),
        };
        if iterations > 0 && imf_conditions(&h, &mean) {
            break;
        }
        if iterations == cfg.max_sift_iterations {
            break;
        }
        let prev_energy: f64 = h.iter().map(|v| v * v).sum();
        let change: f64 = mean.iter().map(|v| v * v).sum();
        h.iter_mut().zip(&mean).for_each(|(a, m)| *a -= m);
        iterations += 1;
        if prev_energy == 0.0 || change / prev_energy <= cfg.sd_threshold {
            break;
        }
    }
    Ok(h)
}

pub fn emd(x: &SampledSignal, cfg: &SiftConfig) -> Result<Decomposition> {
    cfg.validate()?;
    let mut residue = x.samples().to_vec();
    let mut imfs = Vec::new();
    while imfs.len() < cfg.imf_limit() && !is_residue_like(&residue) {
        let h = match sift_samples(&residue, cfg) {
            Ok(h) => h,
            Err(EmdError::NoEnvelope) => break,
            Err(e) => return Err(e),
        };
        residue.iter_mut().zip(&h).for_each(|(r, v)| *r -= v);
        imfs.push(SampledSignal::derived(x, h));
    }
    Decomposition::new(imfs, SampledSignal::derived(x, residue), Variant::Emd)
}

/// Trials decomposed concurrently per batch; bounds peak memory.
const EEMD_BATCH: usize = 16;

/// Seeded per-trial generator: stream `trial` of the ChaCha8 keyed by `seed`.
pub(crate) fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub(crate) fn gaussian_noise(rng: &mut ChaCha8Rng, n: usize, sigma: f64) -> Vec<f64> {
    if sigma == 0.0 {
        return vec![0.0; n];
    }
    let normal = Normal::new(0.0, sigma).expect("sigma is finite and non-negative");
    (0..n).map(|_| normal.sample(rng)).collect()
}

/// Ensemble EMD. Shorter trial IMF lists are zero-padded before averaging.
pub fn eemd(x: &SampledSignal, scfg: &SiftConfig, ecfg: &EemdConfig) -> Result<Decomposition> {
    scfg.validate()?;
    ecfg.validate()?;
    let n = x.len();
    let sigma = ecfg.noise_stddev_ratio * x.std_dev();
    let mut imf_sums: Vec<Vec<f64>> = Vec::new();
    let mut residue_sum = vec![0.0; n];

    let trials: Vec<u64> = (0..ecfg.ensemble_size as u64).collect();
    for batch in trials.chunks(EEMD_BATCH) {
        let results: Vec<Result<Decomposition>> = batch
            .par_iter()
            .map(|&trial| {
                let mut rng = trial_rng(ecfg.rng_seed, trial);
                let noise = gaussian_noise(&mut rng, n, sigma);
                let noisy: Vec<f64> = x.samples().iter().zip(&noise).map(|(a, b)| a + b).collect();
                emd(&SampledSignal::derived(x, noisy), scfg)
            })
            .collect();
        for d in results {
            let d = d?;
            while imf_sums.len() < d.imfs.len() {
                imf_sums.push(vec![0.0; n]);
            }
            for (acc, imf) in imf_sums.iter_mut().zip(&d.imfs) {
                acc.iter_mut().zip(imf.samples()).for_each(|(a, v)| *a += v);
            }
            residue_sum
                .iter_mut()
                .zip(d.residue.samples())
                .for_each(|(a, v)| *a += v);
        }
    }
    let count = ecfg.ensemble_size as f64;
    let imfs = imf_sums
        .into_iter()
        .map(|s| SampledSignal::derived(x, s.into_iter().map(|v| v / count).collect()))
        .collect();
    let residue = SampledSignal::derived(x, residue_sum.into_iter().map(|v| v / count).collect());
    Decomposition::new(imfs, residue, Variant::Eemd)
}

//! Multivariate EMD: projections of the signal onto quasi-uniform
//! directions on the (n-1)-sphere drive the multivariate envelopes.

use rayon::prelude::*;

use crate::emd::{self, SiftConfig};
use crate::envelope::{envelope_through, extrema_of};
use crate::error::{EmdError, Result};
use crate::signal::{Decomposition, SampledSignal};

/// Default number of projection directions.
pub const DEFAULT_DIRECTIONS: usize = 64;

/// Sifting stops once `max|mean envelope| ≤ STOP_RATIO · max|mode|` over all
/// channels.
pub const STOP_RATIO: f64 = 0.075;

/// Channels of equal length and sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateSignal {
    channels: Vec<SampledSignal>,
}

impl MultivariateSignal {
    /// A single channel is accepted; MEMD then reduces to univariate EMD.
    pub fn new(channels: Vec<SampledSignal>) -> Result<Self> {
        let first = channels
            .first()
            .ok_or_else(|| EmdError::Dimension("multivariate signal needs a channel".into()))?;
        for c in &channels[1..] {
            first.check_compatible(c)?;
        }
        Ok(Self { channels })
    }

    pub fn channels(&self) -> &[SampledSignal] {
        &self.channels
    }

    pub fn channel(&self, j: usize) -> &SampledSignal {
        &self.channels[j]
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels[0].is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.channels.iter().fold(0.0_f64, |m, c| m.max(c.max_abs()))
    }

    fn from_rows(like: &MultivariateSignal, rows: Vec<Vec<f64>>) -> Self {
        Self {
            channels: rows
                .into_iter()
                .zip(&like.channels)
                .map(|(r, c)| SampledSignal::derived(c, r))
                .collect(),
        }
    }

    pub fn sub(&self, other: &MultivariateSignal) -> Result<MultivariateSignal> {
        if self.channel_count() != other.channel_count() {
            return Err(EmdError::Dimension(format!(
                "{} channels vs {}",
                self.channel_count(),
                other.channel_count()
            )));
        }
        let channels = self
            .channels
            .iter()
            .zip(&other.channels)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { channels })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    directions: Vec<Vec<f64>>,
}

impl DirectionSet {
    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    pub fn count(&self) -> usize {
        self.directions.len()
    }

    pub fn dimension(&self) -> usize {
        self.directions[0].len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateDecomposition {
    pub imfs: Vec<MultivariateSignal>,
    pub residue: MultivariateSignal,
}

impl MultivariateDecomposition {
    /// Univariate view of channel `j`, tagged with `variant`.
    pub fn channel(&self, j: usize, variant: crate::signal::Variant) -> Decomposition {
        Decomposition {
            imfs: self.imfs.iter().map(|m| m.channel(j).clone()).collect(),
            residue: self.residue.channel(j).clone(),
            variant,
            dc_constant: 0.0,
        }
    }

    pub fn channel_count(&self) -> usize {
        self.residue.channel_count()
    }

    pub(crate) fn from_channels(per_channel: &[Decomposition]) -> Result<Self> {
        let modes = per_channel[0].imfs.len();
        if per_channel.iter().any(|d| d.imfs.len() != modes) {
            return Err(EmdError::Dimension("channel mode counts differ".into()));
        }
        let imfs = (0..modes)
            .map(|k| MultivariateSignal::new(per_channel.iter().map(|d| d.imfs[k].clone()).collect()))
            .collect::<Result<Vec<_>>>()?;
        let residue = MultivariateSignal::new(per_channel.iter().map(|d| d.residue.clone()).collect())?;
        Ok(Self { imfs, residue })
    }
}

/// Radical inverse of `k` in `base` (van der Corput).
pub(crate) fn radical_inverse(mut k: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while k > 0 {
        out += (k % base) as f64 * f;
        k /= base;
        f *= inv;
    }
    out
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(count);
    let mut c = 2u64;
    while primes.len() < count {
        if primes.iter().all(|p| !c.is_multiple_of(*p)) {
            primes.push(c);
        }
        c += 1;
    }
    primes
}

/// `k` quasi-uniform unit vectors in `n` dimensions from the Hammersley set
/// on `[0,1]^(n-1)`: first coordinate `k/K`, the rest radical inverses in
/// successive prime bases. Coordinates map linearly to `n-2` polar angles
/// in `[0, π]` and one azimuth in `[0, 2π)`.
pub fn hammersley_directions(n: usize, k: usize) -> Result<DirectionSet> {
    if n < 2 {
        return Err(EmdError::Dimension(format!(
            "direction vectors need at least 2 dimensions, got {n}"
        )));
    }
    if k < 1 {
        return Err(EmdError::InvalidConfig("direction count must be at least 1".into()));
    }
    let primes = first_primes(n.saturating_sub(2));
    let directions = (0..k)
        .map(|idx| {
            let mut u = Vec::with_capacity(n - 1);
            u.push(idx as f64 / k as f64);
            u.extend(primes.iter().map(|&p| radical_inverse(idx as u64, p)));
            let angles: Vec<f64> = u
                .iter()
                .enumerate()
                .map(|(j, &v)| {
                    if j + 1 == n - 1 {
                        2.0 * std::f64::consts::PI * v
                    } else {
                        std::f64::consts::PI * v
                    }
                })
                .collect();
            spherical_to_cartesian(&angles)
        })
        .collect();
    Ok(DirectionSet { directions })
}

fn spherical_to_cartesian(angles: &[f64]) -> Vec<f64> {
    let n = angles.len() + 1;
    let mut d = Vec::with_capacity(n);
    let mut sin_prod = 1.0;
    for &a in angles {
        d.push(sin_prod * a.cos());
        sin_prod *= a.sin();
    }
    d.push(sin_prod);
    let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
    d.iter_mut().for_each(|v| *v /= norm);
    d
}

pub fn project(x: &MultivariateSignal, d: &[f64]) -> Result<SampledSignal> {
    if d.len() != x.channel_count() {
        return Err(EmdError::Dimension(format!(
            "direction has {} components but signal has {} channels",
            d.len(),
            x.channel_count()
        )));
    }
    Ok(SampledSignal::derived(x.channel(0), project_rows(&rows_of(x), d)))
}

fn rows_of(x: &MultivariateSignal) -> Vec<&[f64]> {
    x.channels.iter().map(|c| c.samples()).collect()
}

fn project_rows(rows: &[&[f64]], d: &[f64]) -> Vec<f64> {
    let n = rows[0].len();
    let mut p = vec![0.0; n];
    for (row, &w) in rows.iter().zip(d) {
        p.iter_mut().zip(row.iter()).for_each(|(acc, v)| *acc += w * v);
    }
    p
}

/// Per-direction mean envelopes of every channel, averaged over the
/// directions whose projection has both maxima and minima.
fn mean_envelope_rows(rows: &[&[f64]], dirs: &DirectionSet) -> Result<Vec<Vec<f64>>> {
    let n = rows[0].len();
    let per_dir: Vec<Option<Vec<Vec<f64>>>> = dirs
        .directions
        .par_iter()
        .map(|d| -> Result<Option<Vec<Vec<f64>>>> {
            let p = project_rows(rows, d);
            let ext = extrema_of(&p);
            if ext.maxima.is_empty() || ext.minima.is_empty() {
                return Ok(None);
            }
            let maxima = ext.max_indices();
            let minima = ext.min_indices();
            let mut out = Vec::with_capacity(rows.len());
            for row in rows {
                let upper = envelope_through(&maxima, row)?;
                let lower = envelope_through(&minima, row)?;
                out.push(upper.iter().zip(&lower).map(|(u, l)| 0.5 * (u + l)).collect());
            }
            Ok(Some(out))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut acc = vec![vec![0.0; n]; rows.len()];
    let mut used = 0usize;
    for e in per_dir.into_iter().flatten() {
        used += 1;
        for (a, r) in acc.iter_mut().zip(e) {
            a.iter_mut().zip(r).for_each(|(x, y)| *x += y);
        }
    }
    if used == 0 {
        return Err(EmdError::NoEnvelope);
    }
    let scale = 1.0 / used as f64;
    acc.iter_mut().for_each(|r| r.iter_mut().for_each(|v| *v *= scale));
    Ok(acc)
}

pub fn multivariate_mean_envelope(
    x: &MultivariateSignal,
    dirs: &DirectionSet,
) -> Result<MultivariateSignal> {
    if dirs.dimension() != x.channel_count() {
        return Err(EmdError::Dimension(format!(
            "directions are {}-dimensional but signal has {} channels",
            dirs.dimension(),
            x.channel_count()
        )));
    }
    let rows = mean_envelope_rows(&rows_of(x), dirs)?;
    Ok(MultivariateSignal::from_rows(x, rows))
}

fn residue_like(rows: &[&[f64]], dirs: &DirectionSet) -> bool {
    dirs.directions.iter().all(|d| {
        let ext = extrema_of(&project_rows(rows, d));
        ext.maxima.is_empty() || ext.minima.is_empty() || ext.count() < 3
    })
}

/// One multivariate mode by repeated mean-envelope subtraction.
pub(crate) fn sift_multivariate(
    x: &MultivariateSignal,
    dirs: &DirectionSet,
    cfg: &SiftConfig,
) -> Result<MultivariateSignal> {
    let mut mode: Vec<Vec<f64>> = x.channels.iter().map(|c| c.samples().to_vec()).collect();
    let mut iterations = 0;
    loop {
        let rows: Vec<&[f64]> = mode.iter().map(|r| r.as_slice()).collect();
        let mean = match mean_envelope_rows(&rows, dirs) {
            Ok(m) => m,
            Err(EmdError::NoEnvelope) if iterations > 0 => break,
            Err(e) => return Err(e),
        };
        let mode_peak = max_abs_rows(&mode);
        let mean_peak = max_abs_rows(&mean);
        if iterations > 0 && mean_peak <= STOP_RATIO * mode_peak {
            break;
        }
        if iterations == cfg.max_sift_iterations {
            break;
        }
        for (m, e) in mode.iter_mut().zip(&mean) {
            m.iter_mut().zip(e).for_each(|(a, b)| *a -= b);
        }
        iterations += 1;
    }
    Ok(MultivariateSignal::from_rows(x, mode))
}

fn max_abs_rows(rows: &[Vec<f64>]) -> f64 {
    rows.iter()
        .flat_map(|r| r.iter())
        .fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub(crate) fn check_directions(x: &MultivariateSignal, k: usize) -> Result<DirectionSet> {
    hammersley_directions(x.channel_count(), k)
}

/// Multivariate EMD with `k` projection directions.
pub fn memd(x: &MultivariateSignal, k: usize, cfg: &SiftConfig) -> Result<MultivariateDecomposition> {
    cfg.validate()?;
    if x.channel_count() == 1 {
        let d = emd::emd(x.channel(0), cfg)?;
        return MultivariateDecomposition::from_channels(&[d]);
    }
    let dirs = check_directions(x, k)?;
    let mut residue = x.clone();
    let mut imfs = Vec::new();
    while imfs.len() < cfg.imf_limit() {
        if residue_like(&rows_of(&residue), &dirs) {
            break;
        }
        let mode = match sift_multivariate(&residue, &dirs, cfg) {
            Ok(m) => m,
            Err(EmdError::NoEnvelope) => break,
            Err(e) => return Err(e),
        };
        residue = residue.sub(&mode)?;
        imfs.push(mode);
    }
    Ok(MultivariateDecomposition { imfs, residue })
}

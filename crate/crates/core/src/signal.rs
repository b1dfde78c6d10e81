//! Sampled signals, decompositions and the discrete inner product.
//!
//! Integrals over the record are realized with the rectangle rule,
//! `∫ a(t) b(t) dt ≈ Δt · Σ aᵢ bᵢ`, so the inner product is a scaled dot
//! product and orthogonality produced by Gram-Schmidt holds to machine
//! precision.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{EmdError, Result};

/// A uniformly sampled, finite, real time series.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    samples: Vec<f64>,
    sample_rate: f64,
    t0: f64,
}

impl SampledSignal {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        Self::with_start(samples, sample_rate, 0.0)
    }

    pub fn with_start(samples: Vec<f64>, sample_rate: f64, t0: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(EmdError::InsufficientData {
                needed: 2,
                got: samples.len(),
            });
        }
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(EmdError::InvalidSignal(format!(
                "sample rate must be finite and positive, got {sample_rate}"
            )));
        }
        if !t0.is_finite() {
            return Err(EmdError::InvalidSignal("start time must be finite".into()));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(EmdError::InvalidSignal(format!(
                "sample {i} is not finite ({})",
                samples[i]
            )));
        }
        Ok(Self {
            samples,
            sample_rate,
            t0,
        })
    }

    /// Builds a signal sharing `like`'s rate and start time. Used for values
    /// derived from already-validated signals.
    pub(crate) fn derived(like: &SampledSignal, samples: Vec<f64>) -> Self {
        debug_assert_eq!(samples.len(), like.len());
        Self {
            samples,
            sample_rate: like.sample_rate,
            t0: like.t0,
        }
    }

    pub fn zeros_like(like: &SampledSignal) -> Self {
        Self::derived(like, vec![0.0; like.len()])
    }

    pub fn constant_like(like: &SampledSignal, value: f64) -> Self {
        Self::derived(like, vec![value; like.len()])
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    /// Sampling interval Δt in seconds.
    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    /// Record duration T = N / fs.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn time(&self, index: usize) -> f64 {
        self.t0 + index as f64 / self.sample_rate
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn std_dev(&self) -> f64 {
        let m = self.mean();
        let var = self.samples.iter().map(|v| (v - m) * (v - m)).sum::<f64>()
            / self.samples.len() as f64;
        var.sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.samples.iter().all(|&v| v == 0.0)
    }

    /// Errors unless `other` has the same length and sample rate.
    pub fn check_compatible(&self, other: &SampledSignal) -> Result<()> {
        if self.len() != other.len() {
            return Err(EmdError::Dimension(format!(
                "length {} vs {}",
                self.len(),
                other.len()
            )));
        }
        if self.sample_rate != other.sample_rate {
            return Err(EmdError::Dimension(format!(
                "sample rate {} vs {}",
                self.sample_rate, other.sample_rate
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &SampledSignal) -> Result<SampledSignal> {
        self.check_compatible(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &SampledSignal) -> Result<SampledSignal> {
        self.check_compatible(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn scale(&self, factor: f64) -> SampledSignal {
        self.map(|v| v * factor)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> SampledSignal {
        Self::derived(self, self.samples.iter().map(|&v| f(v)).collect())
    }

    pub(crate) fn zip_with(&self, other: &SampledSignal, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::derived(
            self,
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }
}

/// Discrete `∫₀ᵀ a(t) b(t) dt` as `Δt · Σ aᵢ bᵢ`.
pub fn inner_product(a: &SampledSignal, b: &SampledSignal) -> Result<f64> {
    a.check_compatible(b)?;
    Ok(dot(a.samples(), b.samples()) * a.dt())
}

/// Signal energy `E_x = ⟨x, x⟩`.
pub fn energy(x: &SampledSignal) -> f64 {
    dot(x.samples(), x.samples()) * x.dt()
}

/// Returns `(x - m, m)` where `m` is the sample mean.
pub fn remove_mean(x: &SampledSignal) -> (SampledSignal, f64) {
    let m = x.mean();
    let mut centered: Vec<f64> = x.samples().iter().map(|v| v - m).collect();
    // second pass removes the rounding left by the first
    let drift = centered.iter().sum::<f64>() / centered.len() as f64;
    centered.iter_mut().for_each(|v| *v -= drift);
    (SampledSignal::derived(x, centered), m + drift)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Elementwise sum of equally shaped signals.
pub fn sum_signals(parts: &[SampledSignal]) -> Result<SampledSignal> {
    let first = parts
        .first()
        .ok_or_else(|| EmdError::Dimension("cannot sum an empty component list".into()))?;
    let mut acc = first.samples().to_vec();
    for p in &parts[1..] {
        first.check_compatible(p)?;
        acc.iter_mut().zip(p.samples()).for_each(|(a, b)| *a += b);
    }
    Ok(SampledSignal::derived(first, acc))
}

/// The algorithm (and post-processing ordering) that produced a decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Variant {
    Emd,
    Eemd,
    Epemd,
    Memd,
    Epmemd,
    Oimf,
    Foimf,
    Roimf,
    Fouimf,
    Rouimf,
}

impl Variant {
    pub const ALL: [Variant; 10] = [
        Variant::Emd,
        Variant::Eemd,
        Variant::Epemd,
        Variant::Memd,
        Variant::Epmemd,
        Variant::Oimf,
        Variant::Foimf,
        Variant::Roimf,
        Variant::Fouimf,
        Variant::Rouimf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Emd => "EMD",
            Variant::Eemd => "EEMD",
            Variant::Epemd => "EPEMD",
            Variant::Memd => "MEMD",
            Variant::Epmemd => "EPMEMD",
            Variant::Oimf => "OIMF",
            Variant::Foimf => "FOIMF",
            Variant::Roimf => "ROIMF",
            Variant::Fouimf => "FOUIMF",
            Variant::Rouimf => "ROUIMF",
        }
    }

    /// Whether components sum back to the source exactly (up to rounding).
    pub fn is_exact(self) -> bool {
        self != Variant::Eemd
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = EmdError;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| EmdError::InvalidConfig(format!("unknown variant '{s}'")))
    }
}

/// IMFs (highest frequency first) plus residue and an optional DC constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub imfs: Vec<SampledSignal>,
    pub residue: SampledSignal,
    pub variant: Variant,
    /// Constant split off by the mean-removed orderings; zero otherwise.
    pub dc_constant: f64,
}

impl Decomposition {
    pub fn new(imfs: Vec<SampledSignal>, residue: SampledSignal, variant: Variant) -> Result<Self> {
        for imf in &imfs {
            residue.check_compatible(imf)?;
        }
        Ok(Self {
            imfs,
            residue,
            variant,
            dc_constant: 0.0,
        })
    }

    /// IMFs followed by the residue.
    pub fn components(&self) -> Vec<SampledSignal> {
        let mut out = self.imfs.clone();
        out.push(self.residue.clone());
        out
    }

    pub fn len(&self) -> usize {
        self.residue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residue.is_empty()
    }

    pub fn sample_rate(&self) -> f64 {
        self.residue.sample_rate()
    }

    /// `Σ imfs + residue + dc_constant`.
    pub fn reconstruct(&self) -> SampledSignal {
        let mut acc = self.residue.samples().to_vec();
        for imf in &self.imfs {
            acc.iter_mut().zip(imf.samples()).for_each(|(a, b)| *a += b);
        }
        if self.dc_constant != 0.0 {
            acc.iter_mut().for_each(|a| *a += self.dc_constant);
        }
        SampledSignal::derived(&self.residue, acc)
    }

    /// `max|x - reconstruct()| / max|x|` (absolute when x is zero).
    pub fn completeness_error(&self, x: &SampledSignal) -> Result<f64> {
        x.check_compatible(&self.residue)?;
        let rec = self.reconstruct();
        let err = x
            .samples()
            .iter()
            .zip(rec.samples())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        let scale = x.max_abs();
        Ok(if scale > 0.0 { err / scale } else { err })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sig(v: &[f64], rate: f64) -> SampledSignal {
        SampledSignal::new(v.to_vec(), rate).unwrap()
    }

    #[test]
    fn rejects_invalid_signals() {
        assert!(SampledSignal::new(vec![1.0], 1.0).is_err());
        assert!(SampledSignal::new(vec![1.0, 2.0], 0.0).is_err());
        assert!(SampledSignal::new(vec![1.0, 2.0], f64::INFINITY).is_err());
        assert!(SampledSignal::new(vec![1.0, f64::NAN], 1.0).is_err());
        assert!(SampledSignal::new(vec![f64::INFINITY, 0.0], 1.0).is_err());
    }

    #[test]
    fn inner_product_examples() {
        assert_eq!(inner_product(&sig(&[1.0, 0.0], 1.0), &sig(&[0.0, 1.0], 1.0)).unwrap(), 0.0);
        assert_eq!(inner_product(&sig(&[1.0, 1.0], 2.0), &sig(&[1.0, 1.0], 2.0)).unwrap(), 1.0);
    }

    #[test]
    fn harmonics_are_orthogonal_over_full_periods() {
        let fs = 256.0;
        let a: Vec<f64> = (0..256).map(|i| (2.0 * PI * 4.0 * i as f64 / fs).sin()).collect();
        let b: Vec<f64> = (0..256).map(|i| (2.0 * PI * 8.0 * i as f64 / fs).sin()).collect();
        let mut oracle = 0.0;
        for i in 0..256 {
            oracle += a[i] * b[i] / fs;
        }
        let ip = inner_product(&sig(&a, fs), &sig(&b, fs)).unwrap();
        assert!(ip.abs() < 1e-10);
        assert!((ip - oracle).abs() < 1e-12);
    }

    #[test]
    fn inner_product_mismatch_is_dimension_error() {
        let r = inner_product(&sig(&[1.0, 2.0], 1.0), &sig(&[1.0, 2.0, 3.0], 1.0));
        assert!(matches!(r, Err(EmdError::Dimension(_))));
        let r = inner_product(&sig(&[1.0, 2.0], 1.0), &sig(&[1.0, 2.0], 2.0));
        assert!(matches!(r, Err(EmdError::Dimension(_))));
    }

    #[test]
    fn energy_examples() {
        assert_eq!(energy(&sig(&[0.0, 0.0, 0.0], 1.0)), 0.0);
        assert_eq!(energy(&sig(&[3.0, 4.0], 1.0)), 25.0);
        // ten periods of a 1 Hz sine over 10 s: ∫ sin² = T/2 = 5
        let fs = 100.0;
        let x: Vec<f64> = (0..1000).map(|i| (2.0 * PI * i as f64 / fs).sin()).collect();
        let e = energy(&sig(&x, fs));
        let oracle: f64 = x.iter().map(|v| v * v).sum::<f64>() / fs;
        assert!((e - 5.0).abs() / 5.0 < 1e-6);
        assert!((e - oracle).abs() / oracle < 1e-12);
    }

    #[test]
    fn remove_mean_examples() {
        let (c, m) = remove_mean(&sig(&[5.0, 5.0, 5.0], 1.0));
        assert_eq!(m, 5.0);
        assert!(c.samples().iter().all(|v| *v == 0.0));
        let (c, m) = remove_mean(&sig(&[1.0, -1.0], 1.0));
        assert_eq!(m, 0.0);
        assert_eq!(c.samples(), &[1.0, -1.0]);

        let n = 777;
        let x: Vec<f64> = (0..n).map(|i| (0.1 * i as f64).sin() + 2.5).collect();
        let direct = x.iter().sum::<f64>() / n as f64;
        let (c, m) = remove_mean(&sig(&x, 10.0));
        assert!((m - direct).abs() < 1e-12);
        assert!((m - 2.5).abs() < 1.0 / (n as f64 * 0.05_f64.sin()));
        let residual_mean = c.samples().iter().sum::<f64>() / n as f64;
        assert!(residual_mean.abs() < 1e-12 * c.max_abs());
    }

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
            assert_eq!(v.name().to_lowercase().parse::<Variant>().unwrap(), v);
        }
        assert!("nope".parse::<Variant>().is_err());
    }

    #[test]
    fn completeness_of_manual_split() {
        let x = sig(&[1.0, 2.0, 3.0, 4.0], 1.0);
        let a = sig(&[0.5, 0.5, 0.5, 0.5], 1.0);
        let r = x.sub(&a).unwrap();
        let d = Decomposition::new(vec![a], r, Variant::Emd).unwrap();
        assert!(d.completeness_error(&x).unwrap() < 1e-15);
    }
}

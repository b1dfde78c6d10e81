//! Deterministic benchmark signals.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::emd::{emd, gaussian_noise, trial_rng, SiftConfig};
use crate::epemd::epemd;
use crate::error::{EmdError, Result};
use crate::memd::MultivariateSignal;
use crate::metrics::ortho_report;
use crate::signal::SampledSignal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignalKind {
    /// Σ_{i=1}^{20} [A2 sin 2π(50−i)t + A1 sin 2π(1+i)t]
    LowPass,
    /// Σ_{i=1}^{20} [A2 sin 2π(50−i)t + A1 sin 2π(15+i)t + A2 sin 2π(1+i)t]
    BandPass,
    /// Σ_{i=1}^{20} [A1 sin 2π(50−i)t + A2 sin 2π(1+i)t]
    HighPass,
    /// Σ_{i=1}^{20} [A1 sin 2π(50−i)t + A2 sin 2π(15+i)t + A1 sin 2π i t]
    BandStop,
    /// Σ_{i=1}^{50} A1 sin 2π i t
    AllPass,
    /// (1 + A2 sin 2π3t) · A1 sin 2π20t
    Am,
    /// A1 sin((2π·10 + 5 sin 2π3t) · t), with the bracket multiplied by t
    /// exactly as written in the benchmark definition.
    Fm,
    /// Standard normal white noise.
    WhiteNoise,
    /// Linear chirp of amplitude A1 from 0.1 Hz to 50 Hz over the record.
    Chirp,
    /// Linear chirp 100 → 200 Hz over 0.3 s at 10 kHz, with `pad` zeros on
    /// each side.
    ChirpZeroPadded,
    /// Σ_{f ∈ {4,8,16,32}} sin 2πft plus N(0, σ²) noise per channel.
    Multitone4,
    /// Σ_{f=1}^{50} 100 sin 2πft, used by the sampling-rate sweep.
    HarmonicSum,
}

impl SignalKind {
    pub const ALL: [SignalKind; 12] = [
        SignalKind::LowPass,
        SignalKind::BandPass,
        SignalKind::HighPass,
        SignalKind::BandStop,
        SignalKind::AllPass,
        SignalKind::Am,
        SignalKind::Fm,
        SignalKind::WhiteNoise,
        SignalKind::Chirp,
        SignalKind::ChirpZeroPadded,
        SignalKind::Multitone4,
        SignalKind::HarmonicSum,
    ];

    /// The nine-signal leakage suite.
    pub const SUITE: [SignalKind; 9] = [
        SignalKind::LowPass,
        SignalKind::BandPass,
        SignalKind::HighPass,
        SignalKind::BandStop,
        SignalKind::AllPass,
        SignalKind::Am,
        SignalKind::Fm,
        SignalKind::WhiteNoise,
        SignalKind::Chirp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SignalKind::LowPass => "lp",
            SignalKind::BandPass => "bp",
            SignalKind::HighPass => "hp",
            SignalKind::BandStop => "bs",
            SignalKind::AllPass => "ap",
            SignalKind::Am => "am",
            SignalKind::Fm => "fm",
            SignalKind::WhiteNoise => "wgn",
            SignalKind::Chirp => "chirp",
            SignalKind::ChirpZeroPadded => "chirp-vd",
            SignalKind::Multitone4 => "multitone4",
            SignalKind::HarmonicSum => "harmonic-sum",
        }
    }
}

impl fmt::Display for SignalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SignalKind {
    type Err = EmdError;

    fn from_str(s: &str) -> Result<Self> {
        SignalKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| EmdError::InvalidConfig(format!("unknown signal kind '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalSpec {
    pub kind: SignalKind,
    pub a1: f64,
    pub a2: f64,
    pub sample_rate: f64,
    pub duration: f64,
    pub seed: u64,
    /// Noise σ for `Multitone4`.
    pub noise_std: f64,
    /// Zeros added on each side of `ChirpZeroPadded`.
    pub pad: usize,
}

impl SignalSpec {
    /// Preset parameters for each kind: A1 = 100, A2 = 1, Fs = 150 Hz, 10 s
    /// for the leakage suite; 0.3 s at 10 kHz with 50 zeros of padding for
    /// the zero-padded chirp; 512 Hz over 4 s for the four-tone signal.
    pub fn preset(kind: SignalKind) -> Self {
        let base = Self {
            kind,
            a1: 100.0,
            a2: 1.0,
            sample_rate: 150.0,
            duration: 10.0,
            seed: 0,
            noise_std: 0.1,
            pad: 50,
        };
        match kind {
            SignalKind::ChirpZeroPadded => Self {
                a1: 1.0,
                sample_rate: 10_000.0,
                duration: 0.3,
                ..base
            },
            SignalKind::Multitone4 => Self {
                a1: 1.0,
                sample_rate: 512.0,
                duration: 4.0,
                ..base
            },
            SignalKind::HarmonicSum => Self {
                sample_rate: 105.0,
                ..base
            },
            _ => base,
        }
    }

    pub fn with_rate(self, sample_rate: f64) -> Self {
        Self { sample_rate, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(EmdError::InvalidConfig(format!(
                "duration must be positive, got {}",
                self.duration
            )));
        }
        if !(self.sample_rate.is_finite() && self.sample_rate > 0.0) {
            return Err(EmdError::InvalidConfig(format!(
                "sample rate must be positive, got {}",
                self.sample_rate
            )));
        }
        if self.sample_count() < 2 {
            return Err(EmdError::InvalidConfig("spec yields fewer than 2 samples".into()));
        }
        Ok(())
    }

    /// Samples on `t = j / fs` for `j < round(duration · fs)`.
    pub fn sample_count(&self) -> usize {
        (self.duration * self.sample_rate).round() as usize
    }
}

fn sines(t: f64, terms: impl Iterator<Item = (f64, f64)>) -> f64 {
    terms.map(|(a, f)| a * (2.0 * PI * f * t).sin()).sum()
}

fn sample_at(spec: &SignalSpec, t: f64) -> f64 {
    let (a1, a2) = (spec.a1, spec.a2);
    match spec.kind {
        SignalKind::LowPass => sines(
            t,
            (1..=20).flat_map(|i| [(a2, (50 - i) as f64), (a1, (1 + i) as f64)]),
        ),
        SignalKind::BandPass => sines(
            t,
            (1..=20).flat_map(|i| [(a2, (50 - i) as f64), (a1, (15 + i) as f64), (a2, (1 + i) as f64)]),
        ),
        SignalKind::HighPass => sines(
            t,
            (1..=20).flat_map(|i| [(a1, (50 - i) as f64), (a2, (1 + i) as f64)]),
        ),
        SignalKind::BandStop => sines(
            t,
            (1..=20).flat_map(|i| [(a1, (50 - i) as f64), (a2, (15 + i) as f64), (a1, i as f64)]),
        ),
        SignalKind::AllPass => sines(t, (1..=50).map(|i| (a1, i as f64))),
        SignalKind::Am => (1.0 + a2 * (2.0 * PI * 3.0 * t).sin()) * (a1 * (2.0 * PI * 20.0 * t).sin()),
        SignalKind::Fm => a1 * ((2.0 * PI * 10.0 + 5.0 * (2.0 * PI * 3.0 * t).sin()) * t).sin(),
        SignalKind::Chirp => chirp(a1, 0.1, 50.0, spec.duration, t),
        SignalKind::ChirpZeroPadded => chirp(a1, 100.0, 200.0, spec.duration, t),
        SignalKind::Multitone4 => sines(t, [4.0, 8.0, 16.0, 32.0].into_iter().map(|f| (1.0, f))),
        SignalKind::HarmonicSum => sines(t, (1..=50).map(|f| (100.0, f as f64))),
        SignalKind::WhiteNoise => unreachable!("noise is generated separately"),
    }
}

/// `a · sin(2π (f0 t + (f1 − f0) t² / 2T))`: instantaneous frequency rises
/// linearly from `f0` to `f1` over `T`.
fn chirp(a: f64, f0: f64, f1: f64, duration: f64, t: f64) -> f64 {
    a * (2.0 * PI * (f0 * t + (f1 - f0) * t * t / (2.0 * duration))).sin()
}

/// Channel 0 of the spec.
pub fn generate(spec: &SignalSpec) -> Result<SampledSignal> {
    generate_channel(spec, 0)
}

/// Noise kinds draw from an independent stream per channel.
pub fn generate_channel(spec: &SignalSpec, channel: u64) -> Result<SampledSignal> {
    spec.validate()?;
    let n = spec.sample_count();
    let fs = spec.sample_rate;
    let samples = match spec.kind {
        SignalKind::WhiteNoise => gaussian_noise(&mut trial_rng(spec.seed, channel), n, 1.0),
        SignalKind::Multitone4 => {
            let noise = gaussian_noise(&mut trial_rng(spec.seed, channel), n, spec.noise_std);
            (0..n)
                .map(|j| sample_at(spec, j as f64 / fs) + noise[j])
                .collect()
        }
        SignalKind::ChirpZeroPadded => {
            let mut v = vec![0.0; spec.pad];
            v.extend((0..n).map(|j| sample_at(spec, j as f64 / fs)));
            v.extend(std::iter::repeat_n(0.0, spec.pad));
            v
        }
        _ => (0..n).map(|j| sample_at(spec, j as f64 / fs)).collect(),
    };
    SampledSignal::new(samples, fs)
}

pub fn generate_multivariate(spec: &SignalSpec, channels: usize) -> Result<MultivariateSignal> {
    MultivariateSignal::new(
        (0..channels as u64)
            .map(|c| generate_channel(spec, c))
            .collect::<Result<Vec<_>>>()?,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub fs: f64,
    pub io_t_emd: f64,
    pub io_t_epemd: f64,
}

/// IO_T of EMD and EPEMD on the 10 s harmonic sum at each sampling rate.
pub fn sweep_io_t(fs_list: &[f64], cfg: &SiftConfig) -> Result<Vec<SweepRow>> {
    if let Some(&bad) = fs_list.iter().find(|&&fs| !(fs > 100.0)) {
        return Err(EmdError::Aliasing(bad));
    }
    fs_list
        .par_iter()
        .map(|&fs| {
            let x = generate(&SignalSpec::preset(SignalKind::HarmonicSum).with_rate(fs))?;
            let plain = ortho_report(&x, &emd(&x, cfg)?)?;
            let preserving = ortho_report(&x, &epemd(&x, cfg)?)?;
            Ok(SweepRow {
                fs,
                io_t_emd: plain.io_total,
                io_t_epemd: preserving.io_total,
            })
        })
        .collect()
}

//! Hilbert spectral analysis: analytic signal, instantaneous attributes,
//! the Hilbert (time-frequency-energy) spectrum and its marginal.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{EmdError, Result};
use crate::signal::{Decomposition, SampledSignal};

pub const DEFAULT_FREQ_BINS: usize = 256;

/// How instantaneous frequency is derived from the analytic signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IfMethod {
    /// Central differences of the unwrapped phase.
    #[default]
    PhaseDifference,
    /// `(ŷ' y − ŷ y') / (y² + ŷ²)` with central-difference derivatives.
    Quotient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticAttributes {
    pub amplitude: Vec<f64>,
    /// Unwrapped, radians.
    pub phase: Vec<f64>,
    /// Hz.
    pub inst_freq: Vec<f64>,
}

/// Discrete analytic signal `y + j ŷ` by the frequency-domain method:
/// positive frequencies doubled, negative zeroed, DC and Nyquist kept.
pub fn analytic(x: &SampledSignal) -> Result<Vec<Complex64>> {
    if x.len() < 8 {
        return Err(EmdError::InsufficientData {
            needed: 8,
            got: x.len(),
        });
    }
    let n = x.len();
    let mut buf: Vec<Complex64> = x.samples().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    for (k, v) in buf.iter_mut().enumerate() {
        let w = if k == 0 || (n.is_multiple_of(2) && k == half) {
            1.0
        } else if k <= (n - 1) / 2 {
            2.0
        } else {
            0.0
        };
        *v *= w;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
    Ok(buf)
}

/// Imaginary part of the analytic signal.
pub fn hilbert_transform(x: &SampledSignal) -> Result<SampledSignal> {
    let z = analytic(x)?;
    Ok(SampledSignal::derived(x, z.iter().map(|c| c.im).collect()))
}

pub fn analytic_signal(x: &SampledSignal) -> Result<AnalyticAttributes> {
    analytic_signal_with(x, IfMethod::PhaseDifference)
}

pub fn analytic_signal_with(x: &SampledSignal, method: IfMethod) -> Result<AnalyticAttributes> {
    let z = analytic(x)?;
    let amplitude: Vec<f64> = z.iter().map(|c| c.norm()).collect();
    let phase = unwrap(&z.iter().map(|c| c.im.atan2(c.re)).collect::<Vec<_>>());
    let fs = x.sample_rate();
    let inst_freq = match method {
        IfMethod::PhaseDifference => derivative(&phase)
            .into_iter()
            .map(|d| d * fs / (2.0 * PI))
            .collect(),
        IfMethod::Quotient => {
            let re: Vec<f64> = z.iter().map(|c| c.re).collect();
            let im: Vec<f64> = z.iter().map(|c| c.im).collect();
            let dre = derivative(&re);
            let dim = derivative(&im);
            (0..z.len())
                .map(|i| {
                    let den = re[i] * re[i] + im[i] * im[i];
                    if den == 0.0 {
                        0.0
                    } else {
                        (dim[i] * re[i] - im[i] * dre[i]) / den * fs / (2.0 * PI)
                    }
                })
                .collect()
        }
    };
    Ok(AnalyticAttributes {
        amplitude,
        phase,
        inst_freq,
    })
}

fn unwrap(phase: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phase.len());
    let mut offset = 0.0;
    let mut prev = phase[0];
    out.push(prev);
    for &p in &phase[1..] {
        let mut d = p - prev;
        while d > PI {
            d -= 2.0 * PI;
            offset -= 2.0 * PI;
        }
        while d < -PI {
            d += 2.0 * PI;
            offset += 2.0 * PI;
        }
        out.push(p + offset);
        prev = p;
    }
    out
}

/// Per-sample derivative: central differences inside, one-sided at the ends.
fn derivative(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut d = vec![0.0; n];
    d[0] = v[1] - v[0];
    d[n - 1] = v[n - 1] - v[n - 2];
    for i in 1..n - 1 {
        d[i] = 0.5 * (v[i + 1] - v[i - 1]);
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    pub n_freq_bins: usize,
    /// Time columns; `None` gives one column per sample.
    pub n_time_bins: Option<usize>,
    pub if_method: IfMethod,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            n_freq_bins: DEFAULT_FREQ_BINS,
            n_time_bins: None,
            if_method: IfMethod::PhaseDifference,
        }
    }
}

/// Squared instantaneous amplitude accumulated on a linear frequency axis
/// from 0 to Nyquist.
#[derive(Debug, Clone, PartialEq)]
pub struct HilbertSpectrum {
    /// Bin centers, Hz.
    pub freq_bins: Vec<f64>,
    /// Column centers, s.
    pub time_bins: Vec<f64>,
    /// `energy[f][t]`: sum of a² over the samples landing in the cell.
    pub energy: Vec<Vec<f64>>,
    pub marginal: Vec<f64>,
    pub bin_width: f64,
    /// Sampling interval used for time integration.
    pub dt: f64,
    /// Samples whose instantaneous frequency was negative (clipped to bin 0).
    pub negative_freq_samples: usize,
}

impl HilbertSpectrum {
    pub fn total_energy(&self) -> f64 {
        self.energy.iter().flatten().sum::<f64>() * self.dt
    }

    /// Index of the strongest frequency bin in each time column, `None` for
    /// empty columns.
    pub fn ridge(&self) -> Vec<Option<usize>> {
        let cols = self.time_bins.len();
        (0..cols)
            .map(|t| {
                let mut best: Option<(usize, f64)> = None;
                for (f, row) in self.energy.iter().enumerate() {
                    let e = row[t];
                    if e > 0.0 && best.is_none_or(|(_, b)| e > b) {
                        best = Some((f, e));
                    }
                }
                best.map(|(f, _)| f)
            })
            .collect()
    }
}

pub fn hilbert_spectrum(d: &Decomposition, n_freq_bins: usize) -> Result<HilbertSpectrum> {
    hilbert_spectrum_with(
        d,
        &SpectrumOptions {
            n_freq_bins,
            ..SpectrumOptions::default()
        },
    )
}

/// The residue is excluded.
pub fn hilbert_spectrum_with(d: &Decomposition, opts: &SpectrumOptions) -> Result<HilbertSpectrum> {
    if opts.n_freq_bins == 0 {
        return Err(EmdError::InvalidConfig("need at least one frequency bin".into()));
    }
    let n = d.len();
    let cols = opts.n_time_bins.unwrap_or(n);
    if cols == 0 || cols > n {
        return Err(EmdError::InvalidConfig(format!(
            "time bin count must be in 1..={n}, got {cols}"
        )));
    }
    let fs = d.sample_rate();
    let nyquist = fs / 2.0;
    let width = nyquist / opts.n_freq_bins as f64;
    let dt = 1.0 / fs;
    let t0 = d.residue.t0();
    let freq_bins = (0..opts.n_freq_bins).map(|b| (b as f64 + 0.5) * width).collect();
    let time_bins = (0..cols)
        .map(|c| {
            let start = c * n / cols;
            let end = (c + 1) * n / cols;
            t0 + 0.5 * (start + end - 1) as f64 * dt
        })
        .collect();
    let mut energy = vec![vec![0.0; cols]; opts.n_freq_bins];
    let mut negative = 0;
    for imf in &d.imfs {
        let attrs = analytic_signal_with(imf, opts.if_method)?;
        for i in 0..n {
            let f = attrs.inst_freq[i];
            let bin = if f < 0.0 {
                negative += 1;
                0
            } else {
                ((f / width) as usize).min(opts.n_freq_bins - 1)
            };
            energy[bin][i * cols / n] += attrs.amplitude[i] * attrs.amplitude[i];
        }
    }
    let marginal = energy.iter().map(|row| row.iter().sum::<f64>() * dt).collect();
    Ok(HilbertSpectrum {
        freq_bins,
        time_bins,
        energy,
        marginal,
        bin_width: width,
        dt,
        negative_freq_samples: negative,
    })
}

/// `h(f) = ∫ H(f, t) dt` per frequency bin.
pub fn marginal_spectrum(h: &HilbertSpectrum) -> Vec<f64> {
    h.energy.iter().map(|row| row.iter().sum::<f64>() * h.dt).collect()
}

//! Local extrema, natural cubic splines and the upper/lower envelopes used
//! by sifting.
//!
//! Envelope knots live on the sample-index axis. Before fitting, the two
//! extrema nearest each end of the record are mirrored about the end
//! sample so the splines cover the whole record without extrapolation.

use crate::error::{EmdError, Result};
use crate::signal::SampledSignal;

/// Strict interior extrema, each as `(index, value)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExtremaSet {
    pub maxima: Vec<(usize, f64)>,
    pub minima: Vec<(usize, f64)>,
}

impl ExtremaSet {
    pub fn count(&self) -> usize {
        self.maxima.len() + self.minima.len()
    }

    pub fn max_indices(&self) -> Vec<usize> {
        self.maxima.iter().map(|&(i, _)| i).collect()
    }

    pub fn min_indices(&self) -> Vec<usize> {
        self.minima.iter().map(|&(i, _)| i).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopePair {
    pub upper: SampledSignal,
    pub lower: SampledSignal,
    pub mean: SampledSignal,
}

pub fn detect_extrema(x: &SampledSignal) -> Result<ExtremaSet> {
    if x.len() < 3 {
        return Err(EmdError::InsufficientData {
            needed: 3,
            got: x.len(),
        });
    }
    Ok(extrema_of(x.samples()))
}

/// Plateaus collapse to their center sample; a plateau touching either end
/// of the record is never an extremum.
pub(crate) fn extrema_of(x: &[f64]) -> ExtremaSet {
    let n = x.len();
    let mut set = ExtremaSet::default();
    if n < 3 {
        return set;
    }
    let mut i = 1;
    while i < n && x[i] == x[0] {
        i += 1;
    }
    while i < n - 1 {
        let mut j = i;
        while j + 1 < n && x[j + 1] == x[i] {
            j += 1;
        }
        if j == n - 1 {
            break;
        }
        let (left, here, right) = (x[i - 1], x[i], x[j + 1]);
        let center = (i + j) / 2;
        if here > left && here > right {
            set.maxima.push((center, here));
        } else if here < left && here < right {
            set.minima.push((center, here));
        }
        i = j + 1;
    }
    set
}

/// Number of sign changes, ignoring exact zeros between opposite signs.
pub(crate) fn zero_crossings(x: &[f64]) -> usize {
    let mut count = 0;
    let mut last_sign = 0i8;
    for &v in x {
        let s = if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            0
        };
        if s != 0 {
            if last_sign != 0 && s != last_sign {
                count += 1;
            }
            last_sign = s;
        }
    }
    count
}

/// Natural cubic spline (zero second derivative at both end knots).
#[derive(Debug, Clone)]
pub struct NaturalSpline {
    t: Vec<f64>,
    v: Vec<f64>,
    m: Vec<f64>,
}

impl NaturalSpline {
    pub fn new(t: &[f64], v: &[f64]) -> Result<Self> {
        if t.len() != v.len() {
            return Err(EmdError::InvalidKnots(format!(
                "{} abscissae but {} values",
                t.len(),
                v.len()
            )));
        }
        if t.len() < 2 {
            return Err(EmdError::InvalidKnots(format!(
                "need at least 2 knots, got {}",
                t.len()
            )));
        }
        if t.iter().chain(v).any(|x| !x.is_finite()) {
            return Err(EmdError::InvalidKnots("non-finite knot".into()));
        }
        if let Some(w) = t.windows(2).position(|w| w[1] <= w[0]) {
            return Err(EmdError::InvalidKnots(format!(
                "abscissae not strictly increasing at knot {}",
                w + 1
            )));
        }
        let n = t.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm on the interior second derivatives.
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut upper = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for r in 0..k {
                let i = r + 1;
                let h0 = t[i] - t[i - 1];
                let h1 = t[i + 1] - t[i];
                diag[r] = 2.0 * (h0 + h1);
                upper[r] = h1;
                rhs[r] = 6.0 * ((v[i + 1] - v[i]) / h1 - (v[i] - v[i - 1]) / h0);
            }
            for r in 1..k {
                let lower = t[r + 1] - t[r];
                let w = lower / diag[r - 1];
                diag[r] -= w * upper[r - 1];
                rhs[r] -= w * rhs[r - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for r in (0..k - 1).rev() {
                m[r + 1] = (rhs[r] - upper[r] * m[r + 2]) / diag[r];
            }
        }
        Ok(Self {
            t: t.to_vec(),
            v: v.to_vec(),
            m,
        })
    }

    /// Second derivatives at the knots.
    pub fn second_derivatives(&self) -> &[f64] {
        &self.m
    }

    fn eval_segment(&self, seg: usize, x: f64) -> f64 {
        let (t0, t1) = (self.t[seg], self.t[seg + 1]);
        let h = t1 - t0;
        let a = (t1 - x) / h;
        let b = (x - t0) / h;
        a * self.v[seg]
            + b * self.v[seg + 1]
            + ((a * a * a - a) * self.m[seg] + (b * b * b - b) * self.m[seg + 1]) * h * h / 6.0
    }

    fn segment_of(&self, x: f64) -> usize {
        let last = self.t.len() - 2;
        self.t.partition_point(|&k| k <= x).saturating_sub(1).min(last)
    }

    /// Points outside the knot range use the nearest end segment's cubic.
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_segment(self.segment_of(x), x)
    }

    /// Evaluates at `0, 1, …, n-1`, walking segments forward.
    pub fn eval_indices(&self, n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n);
        let last = self.t.len() - 2;
        let mut seg = self.segment_of(0.0);
        for i in 0..n {
            let x = i as f64;
            while seg < last && self.t[seg + 1] <= x {
                seg += 1;
            }
            out.push(self.eval_segment(seg, x));
        }
        out
    }
}

pub fn cubic_spline(knots_t: &[f64], knots_v: &[f64], query_t: &[f64]) -> Result<Vec<f64>> {
    let spline = NaturalSpline::new(knots_t, knots_v)?;
    Ok(query_t.iter().map(|&q| spline.eval(q)).collect())
}

/// Knot positions after mirroring the two extrema nearest each end about
/// the end samples, paired with the sample index each knot takes its value
/// from.
pub(crate) fn mirrored_knots(indices: &[usize], n: usize) -> (Vec<f64>, Vec<usize>) {
    let last = (n - 1) as f64;
    let k = indices.len();
    let take = k.min(2);
    let mut pos = Vec::with_capacity(k + 2 * take);
    let mut src = Vec::with_capacity(k + 2 * take);
    for &i in indices[..take].iter().rev() {
        pos.push(-(i as f64));
        src.push(i);
    }
    for &i in indices {
        pos.push(i as f64);
        src.push(i);
    }
    for &i in indices[k - take..].iter().rev() {
        pos.push(2.0 * last - i as f64);
        src.push(i);
    }
    (pos, src)
}

/// Spline through `values[src]` at the mirrored knot positions, evaluated
/// at every sample index.
pub(crate) fn envelope_through(indices: &[usize], values: &[f64]) -> Result<Vec<f64>> {
    let n = values.len();
    let (pos, src) = mirrored_knots(indices, n);
    let knot_values: Vec<f64> = src.iter().map(|&i| values[i]).collect();
    Ok(NaturalSpline::new(&pos, &knot_values)?.eval_indices(n))
}

/// Mean envelope of raw samples; `NoEnvelope` when either extrema list is
/// empty.
pub(crate) fn mean_envelope_of(x: &[f64]) -> Result<Vec<f64>> {
    let ext = extrema_of(x);
    mean_envelope_with(x, &ext)
}

pub(crate) fn mean_envelope_with(x: &[f64], ext: &ExtremaSet) -> Result<Vec<f64>> {
    if ext.maxima.is_empty() || ext.minima.is_empty() {
        return Err(EmdError::NoEnvelope);
    }
    let upper = envelope_through(&ext.max_indices(), x)?;
    let lower = envelope_through(&ext.min_indices(), x)?;
    Ok(upper
        .iter()
        .zip(&lower)
        .map(|(u, l)| 0.5 * (u + l))
        .collect())
}

pub fn build_envelopes(x: &SampledSignal) -> Result<EnvelopePair> {
    let ext = detect_extrema(x)?;
    if ext.maxima.is_empty() || ext.minima.is_empty() {
        return Err(EmdError::NoEnvelope);
    }
    let upper = envelope_through(&ext.max_indices(), x.samples())?;
    let lower = envelope_through(&ext.min_indices(), x.samples())?;
    let mean = upper
        .iter()
        .zip(&lower)
        .map(|(u, l)| (u + l) / 2.0)
        .collect();
    Ok(EnvelopePair {
        upper: SampledSignal::derived(x, upper),
        lower: SampledSignal::derived(x, lower),
        mean: SampledSignal::derived(x, mean),
    })
}

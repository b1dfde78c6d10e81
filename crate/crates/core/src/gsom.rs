//! Gram-Schmidt orthogonalization of decomposition components under the
//! different input orderings (OIMF, FOIMF, ROIMF, FOUIMF, ROUIMF).

use crate::emd::is_imf;
use crate::error::{EmdError, Result};
use crate::signal::{dot, remove_mean, Decomposition, SampledSignal, Variant};

/// An input whose orthogonalized remainder keeps at most this fraction of
/// its own energy is treated as linearly dependent.
pub const DEPENDENCE_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct GsomResult {
    /// `pᵢ = cᵢ sᵢ`, in input order.
    pub orthogonal_components: Vec<SampledSignal>,
    /// Raw orthogonal basis `sᵢ`.
    pub basis: Vec<SampledSignal>,
    /// Lower unitriangular; row `k` holds the projections removed from input `k`.
    pub coefficient_matrix: Vec<Vec<f64>>,
    /// `cᵢ = Σ_{k≥i} c_{ki}`.
    pub column_sums: Vec<f64>,
    pub dc_constant: f64,
}

/// Modified Gram-Schmidt with one re-orthogonalization pass. Projection
/// coefficients of both passes accumulate into the coefficient matrix, so
/// `y_k = s_k + Σ_{i<k} c_{ki} s_i` holds for the recorded values.
pub fn gram_schmidt(inputs: &[SampledSignal]) -> Result<GsomResult> {
    let n = inputs.len();
    if n == 0 {
        return Err(EmdError::Dimension("no inputs to orthogonalize".into()));
    }
    for s in &inputs[1..] {
        inputs[0].check_compatible(s)?;
    }
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut norms: Vec<f64> = Vec::with_capacity(n);
    let mut coeffs = vec![vec![0.0; n]; n];
    for (k, y) in inputs.iter().enumerate() {
        let mut v = y.samples().to_vec();
        for _pass in 0..2 {
            for i in 0..k {
                let c = dot(&v, &basis[i]) / norms[i];
                v.iter_mut().zip(&basis[i]).for_each(|(a, b)| *a -= c * b);
                coeffs[k][i] += c;
            }
        }
        let own = dot(y.samples(), y.samples());
        let left = dot(&v, &v);
        if left == 0.0 || left <= DEPENDENCE_RATIO * own {
            return Err(EmdError::RankDeficient { index: k });
        }
        coeffs[k][k] = 1.0;
        basis.push(v);
        norms.push(left);
    }
    let column_sums: Vec<f64> = (0..n).map(|i| (i..n).map(|k| coeffs[k][i]).sum()).collect();
    let like = &inputs[0];
    let orthogonal_components = basis
        .iter()
        .zip(&column_sums)
        .map(|(s, &c)| SampledSignal::derived(like, s.iter().map(|v| c * v).collect()))
        .collect();
    Ok(GsomResult {
        orthogonal_components,
        basis: basis.into_iter().map(|s| SampledSignal::derived(like, s)).collect(),
        coefficient_matrix: coeffs,
        column_sums,
        dc_constant: 0.0,
    })
}

/// Re-expresses a decomposition through Gram-Schmidt under the ordering
/// implied by `variant`:
///
/// - `Oimf`: IMFs only, highest to lowest frequency; residue kept as is.
/// - `Foimf`: IMFs then residue.
/// - `Roimf`: residue then IMFs from lowest to highest frequency.
/// - `Fouimf` / `Rouimf`: as the F/R orderings after removing every
///   component's mean; the means are collected in `dc_constant`.
///
/// The output keeps the IMF-first layout of the input.
pub fn orthogonal_variants(d: &Decomposition, variant: Variant) -> Result<Decomposition> {
    let n = d.imfs.len();
    let (centered, means): (Vec<SampledSignal>, f64) = match variant {
        Variant::Fouimf | Variant::Rouimf => {
            let mut total = 0.0;
            let parts = d
                .components()
                .iter()
                .map(|c| {
                    let (z, m) = remove_mean(c);
                    total += m;
                    z
                })
                .collect();
            (parts, total)
        }
        Variant::Oimf | Variant::Foimf | Variant::Roimf => (d.components(), 0.0),
        other => {
            return Err(EmdError::InvalidConfig(format!(
                "{other} is not a Gram-Schmidt ordering"
            )))
        }
    };
    let dc_constant = d.dc_constant + means;

    let (imfs, residue) = match variant {
        Variant::Oimf => {
            if n == 0 {
                (Vec::new(), d.residue.clone())
            } else {
                let g = gram_schmidt(&centered[..n])?;
                (g.orthogonal_components, d.residue.clone())
            }
        }
        Variant::Foimf | Variant::Fouimf => {
            let mut g = gram_schmidt(&centered)?.orthogonal_components;
            let residue = g.pop().expect("residue is always present");
            (g, residue)
        }
        _ => {
            // residue first, then IMFs from lowest to highest frequency
            let order: Vec<SampledSignal> = centered.iter().rev().cloned().collect();
            let mut g = gram_schmidt(&order)
                .map_err(|e| match e {
                    EmdError::RankDeficient { index } => EmdError::RankDeficient { index: n - index },
                    other => other,
                })?
                .orthogonal_components;
            g.reverse();
            let residue = g.pop().expect("residue is always present");
            (g, residue)
        }
    };
    Ok(Decomposition {
        imfs,
        residue,
        variant,
        dc_constant,
    })
}

/// Runs the IMF test on every component.
pub fn imf_property_report(components: &[SampledSignal]) -> Vec<bool> {
    components.iter().map(is_imf).collect()
}

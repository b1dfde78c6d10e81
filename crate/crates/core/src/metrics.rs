//! Orthogonality and energy-leakage diagnostics.
//!
//! Components are the IMFs, the residue and, when nonzero, the DC constant
//! as one more (constant) component.

use serde::Serialize;

use crate::error::{EmdError, Result};
use crate::signal::{dot, energy, Decomposition, SampledSignal};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrthoReport {
    /// Symmetric Gram matrix `E_jk = ⟨y_j, y_k⟩`; the diagonal holds the
    /// component energies.
    pub leakage_matrix: Vec<Vec<f64>>,
    /// `IO_T = Σ_{j≠k} E_jk / E_x`.
    pub io_total: f64,
    /// `IO_jk = E_jk / (E_j + E_k)` off the diagonal, zero on it.
    pub io_pairs: Vec<Vec<f64>>,
    /// `(E_x − E_emd) / E_x × 100`, signed.
    pub pee: f64,
    /// `E_emd`, the summed component energies.
    pub total_component_energy: f64,
    pub signal_energy: f64,
    pub component_energies: Vec<f64>,
    /// Energy of the summed components.
    pub reconstructed_energy: f64,
    /// IO_T and Pee against the summed components rather than the source;
    /// identical to the above for exact decompositions.
    pub io_total_reconstructed: f64,
    pub pee_reconstructed: f64,
    /// `max|x − Σ components| / max|x|`.
    pub reconstruction_error: f64,
}

fn report_components(d: &Decomposition) -> Vec<SampledSignal> {
    let mut comps = d.components();
    if d.dc_constant != 0.0 {
        comps.push(SampledSignal::constant_like(&d.residue, d.dc_constant));
    }
    comps
}

pub fn ortho_report(x: &SampledSignal, d: &Decomposition) -> Result<OrthoReport> {
    let comps = report_components(d);
    for c in &comps {
        x.check_compatible(c)?;
    }
    let e_x = energy(x);
    if e_x == 0.0 {
        return Err(EmdError::UndefinedRatio("signal energy is zero".into()));
    }
    let dt = x.dt();
    let n = comps.len();
    let mut gram = vec![vec![0.0; n]; n];
    for j in 0..n {
        for k in j..n {
            let v = dot(comps[j].samples(), comps[k].samples()) * dt;
            gram[j][k] = v;
            gram[k][j] = v;
        }
    }
    let energies: Vec<f64> = (0..n).map(|j| gram[j][j]).collect();
    let e_emd: f64 = energies.iter().sum();
    let mut cross = 0.0;
    let mut io_pairs = vec![vec![0.0; n]; n];
    for j in 0..n {
        for k in 0..n {
            if j == k {
                continue;
            }
            cross += gram[j][k];
            let den = energies[j] + energies[k];
            io_pairs[j][k] = if den > 0.0 { gram[j][k] / den } else { 0.0 };
        }
    }
    let rec = d.reconstruct();
    let e_rec = energy(&rec);
    let err = x
        .samples()
        .iter()
        .zip(rec.samples())
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    let (io_rec, pee_rec) = if e_rec > 0.0 {
        (cross / e_rec, (e_rec - e_emd) / e_rec * 100.0)
    } else {
        (0.0, 0.0)
    };
    Ok(OrthoReport {
        leakage_matrix: gram,
        io_total: cross / e_x,
        io_pairs,
        pee: (e_x - e_emd) / e_x * 100.0,
        total_component_energy: e_emd,
        signal_energy: e_x,
        component_energies: energies,
        reconstructed_energy: e_rec,
        io_total_reconstructed: io_rec,
        pee_reconstructed: pee_rec,
        reconstruction_error: err / x.max_abs(),
    })
}

/// `|Pee − 100·IO_T|`, both taken against the summed components so the
/// identity holds for inexact (ensemble) decompositions too.
pub fn pee_identity_check(report: &OrthoReport) -> f64 {
    (report.pee_reconstructed - 100.0 * report.io_total_reconstructed).abs()
}

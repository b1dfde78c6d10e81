//! Energy-preserving EMD.
//!
//! Each stage extracts one IMF `y` from the working signal, then removes
//! from it its projection onto the stage residue `r`:
//!
//! ```text
//! α = ⟨y, r⟩ / ⟨r, r⟩,   c = y − α r,   r' = (1 + α) r
//! ```
//!
//! `c ⟂ r'` and `c + r' = y + r`. Recursing on `r'` yields components with
//! `cᵢ ⟂ Σ_{j>i} cⱼ`, which is enough for the component energies to sum to
//! the signal energy even though the components are not pairwise
//! orthogonal.

use crate::emd::{is_residue_like, sift_samples, SiftConfig};
use crate::error::{EmdError, Result};
use crate::memd::{check_directions, sift_multivariate, MultivariateDecomposition, MultivariateSignal};
use crate::signal::{dot, energy, inner_product, sum_signals, Decomposition, SampledSignal, Variant};

/// A residue with energy at or below this fraction of the reference energy
/// counts as zero and is not orthogonalized against.
pub const ZERO_RESIDUE_RATIO: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct LinoepStage {
    pub alpha: f64,
    pub epimf: SampledSignal,
    pub residue_out: SampledSignal,
    /// False when the residue was treated as zero and passed through.
    pub orthogonalized: bool,
}

/// Orthogonalizes an IMF against its residue; the zero-residue gate is
/// relative to the energy of `imf + residue`.
pub fn orthogonalize_stage(imf: &SampledSignal, residue: &SampledSignal) -> Result<LinoepStage> {
    let reference = energy(&imf.add(residue)?);
    orthogonalize_gated(imf, residue, reference)
}

pub(crate) fn orthogonalize_gated(
    imf: &SampledSignal,
    residue: &SampledSignal,
    reference_energy: f64,
) -> Result<LinoepStage> {
    imf.check_compatible(residue)?;
    let rr = dot(residue.samples(), residue.samples());
    let rr_energy = rr * residue.dt();
    if rr == 0.0 || rr_energy <= ZERO_RESIDUE_RATIO * reference_energy {
        return Ok(LinoepStage {
            alpha: 0.0,
            epimf: imf.clone(),
            residue_out: residue.clone(),
            orthogonalized: false,
        });
    }
    let alpha = dot(imf.samples(), residue.samples()) / rr;
    let epimf = imf.zip_with(residue, |y, r| y - alpha * r);
    let residue_out = residue.scale(1.0 + alpha);
    Ok(LinoepStage {
        alpha,
        epimf,
        residue_out,
        orthogonalized: true,
    })
}

pub fn epemd(x: &SampledSignal, cfg: &SiftConfig) -> Result<Decomposition> {
    cfg.validate()?;
    let reference = energy(x);
    let mut working = x.clone();
    let mut components = Vec::new();
    while components.len() < cfg.imf_limit() && !is_residue_like(working.samples()) {
        let h = match sift_samples(working.samples(), cfg) {
            Ok(h) => h,
            Err(EmdError::NoEnvelope) => break,
            Err(e) => return Err(e),
        };
        let r: Vec<f64> = working.samples().iter().zip(&h).map(|(a, b)| a - b).collect();
        let stage = orthogonalize_gated(
            &SampledSignal::derived(x, h),
            &SampledSignal::derived(x, r),
            reference,
        )?;
        components.push(stage.epimf);
        working = stage.residue_out;
    }
    Decomposition::new(components, working, Variant::Epemd)
}

/// Tolerance of [`verify_linoep`], relative to the total energy.
pub const LINOEP_TOLERANCE: f64 = 1e-9;

/// Checks the chain condition `xᵢ ⟂ Σ_{j>i} xⱼ` and the energy identity
/// `E(Σ xᵢ) = Σ E(xᵢ)`.
pub fn verify_linoep(components: &[SampledSignal]) -> Result<bool> {
    if components.len() < 2 {
        return Err(EmdError::Dimension(format!(
            "need at least 2 components, got {}",
            components.len()
        )));
    }
    let total = sum_signals(components)?;
    let energies: Vec<f64> = components.iter().map(energy).collect();
    let e_total = energies.iter().sum::<f64>().max(energy(&total));
    if e_total == 0.0 {
        return Ok(true);
    }
    let tol = LINOEP_TOLERANCE * e_total;
    let mut tail = SampledSignal::zeros_like(&components[0]);
    for i in (0..components.len() - 1).rev() {
        tail = tail.add(&components[i + 1])?;
        if inner_product(&components[i], &tail)?.abs() > tol {
            return Ok(false);
        }
    }
    Ok((energies.iter().sum::<f64>() - energy(&total)).abs() <= tol)
}

/// Energy-preserving MEMD: each multivariate mode is orthogonalized against
/// its residue channel by channel.
pub fn epmemd(x: &MultivariateSignal, k: usize, cfg: &SiftConfig) -> Result<MultivariateDecomposition> {
    cfg.validate()?;
    if x.channel_count() == 1 {
        let d = epemd(x.channel(0), cfg)?;
        return MultivariateDecomposition::from_channels(&[d]);
    }
    let dirs = check_directions(x, k)?;
    let references: Vec<f64> = x.channels().iter().map(energy).collect();
    let mut working = x.clone();
    let mut imfs = Vec::new();
    while imfs.len() < cfg.imf_limit() {
        let projections_exhausted = dirs.directions().iter().all(|d| {
            crate::memd::project(&working, d)
                .map(|p| is_residue_like(p.samples()))
                .unwrap_or(true)
        });
        if projections_exhausted {
            break;
        }
        let mode = match sift_multivariate(&working, &dirs, cfg) {
            Ok(m) => m,
            Err(EmdError::NoEnvelope) => break,
            Err(e) => return Err(e),
        };
        let residue = working.sub(&mode)?;
        let mut epimf = Vec::with_capacity(x.channel_count());
        let mut next = Vec::with_capacity(x.channel_count());
        for j in 0..x.channel_count() {
            let stage = orthogonalize_gated(mode.channel(j), residue.channel(j), references[j])?;
            epimf.push(stage.epimf);
            next.push(stage.residue_out);
        }
        imfs.push(MultivariateSignal::new(epimf)?);
        working = MultivariateSignal::new(next)?;
    }
    Ok(MultivariateDecomposition {
        imfs,
        residue: working,
    })
}

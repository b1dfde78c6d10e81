//! Empirical mode decomposition with energy-preserving and orthogonalizing
//! variants, Hilbert spectral analysis and leakage metrics.

pub mod cli;
pub mod emd;
pub mod envelope;
pub mod epemd;
pub mod error;
pub mod gsom;
pub mod hsa;
pub mod memd;
pub mod metrics;
pub mod siggen;
pub mod signal;
pub mod significance;

pub use emd::{eemd, emd, is_imf, sift_one_imf, EemdConfig, SiftConfig};
pub use envelope::{build_envelopes, cubic_spline, detect_extrema, EnvelopePair, ExtremaSet};
pub use epemd::{epemd, epmemd, orthogonalize_stage, verify_linoep, LinoepStage};
pub use error::{EmdError, Result};
pub use gsom::{gram_schmidt, imf_property_report, orthogonal_variants, GsomResult};
pub use hsa::{
    analytic_signal, hilbert_spectrum, hilbert_spectrum_with, marginal_spectrum, AnalyticAttributes,
    HilbertSpectrum, IfMethod, SpectrumOptions,
};
pub use memd::{hammersley_directions, memd, MultivariateDecomposition, MultivariateSignal};
pub use metrics::{ortho_report, pee_identity_check, OrthoReport};
pub use signal::{energy, inner_product, remove_mean, Decomposition, SampledSignal, Variant};
pub use significance::{
    imf_statistics, significance_test, white_noise_band, ConfidenceBand, Placement, SignificancePoint,
};

/// Decomposes a univariate signal with any variant. The Gram-Schmidt
/// orderings post-process a plain EMD; the multivariate variants reduce to
/// their univariate counterparts on a single channel.
pub fn decompose(
    x: &SampledSignal,
    variant: Variant,
    sift: &SiftConfig,
    ensemble: &EemdConfig,
) -> Result<Decomposition> {
    match variant {
        Variant::Emd | Variant::Memd => {
            let mut d = emd(x, sift)?;
            d.variant = variant;
            Ok(d)
        }
        Variant::Epemd | Variant::Epmemd => {
            let mut d = epemd(x, sift)?;
            d.variant = variant;
            Ok(d)
        }
        Variant::Eemd => eemd(x, sift, ensemble),
        ordering => orthogonal_variants(&emd(x, sift)?, ordering),
    }
}

use serde::{Deserialize, Serialize};

/// A degeneracy convention that fired while scoring one stride.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "flag", rename_all = "snake_case")]
pub enum Flag {
    /// Channel-mean map is constant; SFC set to 0.
    SfcConstant,
    /// Silhouette undefined for this k (single cluster or too few points); S_k set to 0.
    SilhouetteDegenerate { k: usize },
    /// All pixels share one feature vector; PCA map set to 0.5.
    PcaConstant,
    /// No edge centerlines at this resolution; EC and NC set to 0.
    NoCenterlines,
    /// Gradient map sums to zero; EC and NC set to 0.
    ZeroGradient,
    /// Spectrum has no energy outside DC; FC set to 0.
    ZeroSpectrum,
    /// Shifted NCC never fell below tau; r_tau set to the cap radius.
    NoDecorrelation,
}

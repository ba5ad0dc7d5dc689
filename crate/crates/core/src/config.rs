//! Numerical tolerances and limits shared across the crate.

/// Largest total source count for which exhaustive enumeration over all
/// `2^bits` outcomes is attempted by default (about 10^6 outcomes).
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

/// Hard ceiling on enumeration; outcomes are indexed by a `u64` and the
/// working tables must fit in memory.
pub const MAX_ENUMERATION_BITS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Symmetry, Toeplitz and block-structure checks, and distinct-value
    /// merging in covariance histograms.
    pub structural: f64,
    /// Entrywise agreement between empirical and exact covariance at 10^6
    /// samples.
    pub monte_carlo_covariance: f64,
    /// Per-constraint slack in achievable-region membership.
    pub region_slack: f64,
}

pub const TOLERANCES: Tolerances = Tolerances {
    structural: 1e-12,
    monte_carlo_covariance: 3e-3,
    region_slack: 1e-12,
};

impl Default for Tolerances {
    fn default() -> Self {
        TOLERANCES
    }
}

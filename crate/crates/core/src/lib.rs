//! Spectral analysis of non-reversible finite Markov chains through their
//! two Metropolis-Hastings reversiblizations.
//!
//! Given a kernel `P` with stationary distribution `π`, the first MH kernel
//! `M1` keeps `min(p, p*)` off the diagonal and the second, signed, kernel
//! `M2` keeps `max(p, p*)`. Both are self-adjoint in `L²(π)` and sandwich
//! `P` in the Peskun order, so their spectra bound quantities of `P` that are
//! otherwise hard to reach: mixing times, variances, metastability and
//! conductance.

pub mod bounds;
pub mod eigen;
pub mod error;
pub mod expansion;
pub mod kernel;
pub mod metastability;
pub mod models;
pub mod reversiblize;
pub mod spectra;

pub use error::{MhError, Result};
pub use kernel::{
    is_reversible, kernel_power, stationary_distribution, time_reversal, weighted_inner_product,
    OperatorKind, PiOperator, ProbabilityVector, RateGenerator, SignedKernel, StochasticKernel,
};
pub use reversiblize::{
    acceptance_region, additive_reversiblization, generator_mh_pair, mh_first, mh_second,
    multiplicative_reversiblization,
};
pub use spectra::{
    mh_spectral_gap, pseudo_spectral_gap, right_spectral_gap, self_adjoint_spectrum,
    GapScanResult, ScanOptions, SpectrumReport,
};

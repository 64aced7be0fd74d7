//! Space-time convolution kernels, their resolvents, and Gronwall-lemma checks.

pub mod grid;
pub mod picard;
pub mod resolvent;
pub mod scalar;
pub mod verify;

pub use grid::{convolve_st, convolve_st_direct, Convolver, GridField, Sampling, SpaceTimeGrid};
pub use picard::{picard_verify, PicardReport};
pub use resolvent::{
    convolution_powers, j_kernel, resolvent_alternative, resolvent_closed, resolvent_prefactor,
    resolvent_series, sample_j, sample_resolvent, sum_series, truncation_half_width, KernelVariant,
    Variant,
};
pub use scalar::{gronwall_scalar, gronwall_scalar_with, ScalarBound, ScalarOptions};
pub use verify::{compare_series, series_suite, SeriesComparison, INTERIOR_SIGMAS};

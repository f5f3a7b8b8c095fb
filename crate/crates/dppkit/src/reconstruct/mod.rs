//! Symbol recovery from intensities, and value distributions from harmonic-mean data.

mod fclass;
mod moments;
mod recover;

pub use fclass::{check_f_class, FClassReport};
pub use moments::{
    hm_inverse, hm_inverse_fn, moments_from_hm, value_distribution_from_moments, ValueDistribution, HM_NODES, MAX_MOMENTS, NU_BINS,
};
pub use recover::{
    coefficients_csv, gauge_normalize, predicted_rho, recover_symbol, recover_symbol_from_samples, CoefficientSe,
    CorrelationOracle, FnOracle, GaugeNormalForm, SampleRecovery,
};

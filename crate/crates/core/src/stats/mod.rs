//! Seeded parallel sampling and empirical diagnostics.

mod empirical;
mod rng;
mod sample;

pub use empirical::{
    covariance_and_se, empirical_cdf, empirical_charfn, gaussian_check, independence_check, joint_cf_gap,
    ks_to_cdf, ks_two_sample, mc_standard_error, mean_and_se, EmpiricalCdf, Pairs, LATTICE_AXIS,
};
pub use rng::{RngSpec, StreamRng};
pub use sample::SampleSet;

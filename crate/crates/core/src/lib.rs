//! Distribution of Z = Σₙ λₙ(ηₙ − 1), an infinite weighted sum of centered
//! i.i.d. gamma variables with shape r and mean 1.
//!
//! Z is split as X_M + Y_M at a truncation level M. The finite head X_M is
//! inverted exactly from its characteristic function; the tail Y_M is
//! approximated by an Edgeworth expansion in the cumulants of
//! Ỹ_M = Y_M / σ_M, whose normal approximation error is controlled by a
//! Berry-Esseen bound. A Monte-Carlo sampler provides independent ground
//! truth.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the usual double-precision instantiation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cumulants;
pub mod edgeworth;
pub mod error;
pub mod finite_sum;
pub mod io;
pub mod levy;
pub mod mc;
pub mod pipeline;
pub mod quadrature;
pub mod scalar;
pub mod special;
pub mod table;
pub mod weights;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use cumulants::{be_condition_ratio, berry_esseen_bound, cumulants, sigma_m, TailCumulants};
pub use edgeworth::{build_expansion, enumerate_eta, hermite, EdgeworthExpansion, IndexVector};
pub use finite_sum::{invert_to_table, HeadCf};
pub use levy::{cumulant_via_integral, re_log_cf, LevyTailDensity};
pub use mc::{ks_distance, sample_z, SampleBatch, SampleMode};
pub use pipeline::{m_robustness, z_cdf, PipelineConfig};
pub use table::DistributionTable;
pub use weights::{make_power_law_normalized, zeta, GammaSumSpec, SpecFile, WeightSequence};

pub type GammaSumSpec64 = GammaSumSpec<f64>;
pub type GammaSumSpec32 = GammaSumSpec<f32>;
pub type WeightSequence64 = WeightSequence<f64>;
pub type TailCumulants64 = TailCumulants<f64>;
pub type EdgeworthExpansion64 = EdgeworthExpansion<f64>;
pub type LevyTailDensity64 = LevyTailDensity<f64>;
pub type HeadCf64 = HeadCf<f64>;
pub type DistributionTable64 = DistributionTable<f64>;
pub type PipelineConfig64 = PipelineConfig<f64>;
pub type SampleBatch64 = SampleBatch<f64>;

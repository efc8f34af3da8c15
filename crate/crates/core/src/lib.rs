//! Robin eigenvalues of the rectangle `[0, 1] × [0, L]`.
//!
//! Eigenvalues separate as `Λ = k_n(σ)² + k_m(σL)² / L²`, where `k_n(σ)` is the
//! root of the one-dimensional secular equation in `[nπ, (n+1)π)`. On top of
//! the solver sit sorted enumeration, Robin–Neumann gap statistics, a
//! multiplicity scan, pair correlation of the unfolded spectrum and the
//! arithmetic used to construct exact degeneracies.
//!
//! Every routine is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the scalar to `f64`.

pub mod diophantine;
pub mod error;
pub mod gaps;
pub mod numeric;
pub mod paircorr;
pub mod real;
pub mod secular;
pub mod spectrum;

pub use error::{Error, Result};
pub use real::Real;

pub type Frequency = secular::Frequency<f64>;
pub type ScaledFrequency = secular::ScaledFrequency<f64>;
pub type RobinParameter = secular::RobinParameter<f64>;
pub type Rectangle = spectrum::Rectangle<f64>;
pub type EigenRecord = spectrum::EigenRecord<f64>;
pub type SortedSpectrum = spectrum::SortedSpectrum<f64>;
pub type WeylReport = spectrum::WeylReport<f64>;
pub type MultiplicityCluster = spectrum::MultiplicityCluster<f64>;
pub type MultTolerance = spectrum::MultTolerance<f64>;
pub type GapRecord = gaps::GapRecord<f64>;
pub type MeanGapLaw = gaps::MeanGapLaw<f64>;
pub type PointGap = gaps::PointGap<f64>;
pub type GapBounds = gaps::GapBounds<f64>;
pub type Kernel = paircorr::Kernel<f64>;
pub type MeanSpacing = paircorr::MeanSpacing<f64>;
pub type PairCorrResult = paircorr::PairCorrResult<f64>;
pub type SpacingHistogram = paircorr::SpacingHistogram<f64>;
pub type ContinuedFraction = diophantine::ContinuedFraction<f64>;
pub type TripleWitness = diophantine::TripleWitness<f64>;
pub type CrossingResult = diophantine::CrossingResult<f64>;
pub type TripleCrossing = diophantine::TripleCrossing<f64>;

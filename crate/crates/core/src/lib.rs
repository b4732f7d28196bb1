//! Endogenous sparse recovery for subspace clustering: orthogonal matching
//! pursuit over the data points, the geometry that certifies exact feature
//! selection, spectral clustering of the resulting affinity, synthetic unions
//! of subspaces and the Monte Carlo harness that measures all of it.

pub mod clustering;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod numerics;
pub mod selection;
pub mod synth;

pub use clustering::{Affinity, Partition};
pub use error::{Error, Result};
pub use experiments::{GridSpec, Method, PhaseGrid, SecondAxis};
pub use geometry::{CrossSpectrum, EfsCertificate, SubspaceBasis};
pub use numerics::Mat;
pub use selection::{FeatureSet, StoppingRule};
pub use synth::{CoefficientModel, Ensemble, SpectrumShape, UnionSpec};

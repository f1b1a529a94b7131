//! Regression Monte Carlo for Bermudan options, with the closed-form moment
//! and worst-case error analysis that governs how many paths a basis of a
//! given size needs.

pub mod basis;
pub mod experiments;
pub mod linalg;
pub mod moments;
pub mod paths;
pub mod regression;
pub mod rng;
pub mod scalar;
pub mod special;
pub mod stats;

pub use basis::{eval_basis, hermite, BasisFamily, BasisSpec};
pub use paths::{sample_paths, ExerciseGrid, PathBatch, ProcessKind};
pub use rng::{derive_stream, SeedCoordinates};
pub use scalar::Scalar;
pub use moments::{gram_analysis, GramAnalysis};
pub use regression::{price_bermudan, project, CoefficientSet, PathMode, PayoffKind, PayoffSpec, PricerConfig};

/// Double-precision forms of the generic types.
pub type Gram = GramAnalysis<f64>;
pub type BoundReport = moments::BoundReport<f64>;
pub type CriticalCurve = moments::CriticalCurve<f64>;
pub type MseSetting = moments::MseSetting<f64>;

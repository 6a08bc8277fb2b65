//! Detection of the sub-cones that carry extremal mass in multivariate data,
//! via truncation regions (`method1`) or overlapping cone-shaped regions
//! (`method2`), each combined with censored tail fits.

pub mod cone;
pub mod error;
pub mod evaluation;
pub mod experiment;
pub mod io;
pub mod margins;
pub mod mass;
pub mod method1;
pub mod method2;
pub mod simulators;
pub mod tail_fit;
pub mod theory;

pub use cone::ConeId;
pub use error::{Error, ErrorKind, Result};
pub use evaluation::{hellinger, roc_curve, RocCurve, StabilityTable, Violation};
pub use margins::{SampleMatrix, TruncatedMatrix};
pub use mass::MassDistribution;
pub use method1::{fit, fit_method1, sparsify, ConeFit, FitConfig, FitResult, Method};
pub use method2::fit_method2;
pub use simulators::{CorrelationMatrix, Family, MaxMixtureSpec};
pub use tail_fit::TailFit;
pub use theory::{TauModel, TauValue};

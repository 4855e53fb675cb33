//! Numerical laboratory for the scale-free functional
//! F_q(Ω) = P(Ω)·T(Ω)^q / |Ω|^{2q+1/2} on planar domains with holes and slits.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod contour;
pub mod distance;
pub mod domain;
pub mod error;
pub mod families;
pub mod functionals;
pub mod geometry;
pub mod hausdorff;
pub mod optimizer;
pub mod output;
pub mod parallel;
pub mod raster;
pub mod report;
pub mod torsion;

pub use distance::DistanceField;
pub use domain::{MeasureReport, PlanarDomain};
pub use error::{Error, LoopKind, Result};
pub use geometry::{Point, Segment};
pub use parallel::ParallelProfile;
pub use raster::{RasterMask, TopologyReport};
pub use report::InequalityReport;

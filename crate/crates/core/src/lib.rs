pub mod bounds;
pub mod boxdim;
pub mod curve;
pub mod digits;
pub mod error;
pub mod fit;
pub mod fourier;
pub mod grid;
pub mod group;
pub mod inflation;

pub use bounds::{tabulate, BoundReport, Scenario};
pub use boxdim::{rasterize, SetGenerator};
pub use curve::{ParametricCurve, Polynomial};
pub use digits::DigitCantorSpec;
pub use error::{Error, Result};
pub use fit::{fit_dimension, LogLogFit};
pub use grid::{diffset_cells, sumset_cells, CellSet};
pub use group::{best_gamma, GammaCertificate, GroupSubset};
pub use inflation::{build_inflation, build_transport, InflationMapSpec, TransportPlan};
pub use fourier::{cantor_transform, curve_transform, DecayFit, MeasureTransform};

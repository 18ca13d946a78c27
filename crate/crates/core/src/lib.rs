pub mod class;
pub mod geometry;
pub mod io;
pub mod raster;
pub mod depth;
pub mod openlabel;
pub mod frustum;
pub mod eval;
pub mod heads;
pub mod synth;
pub mod pipeline;

mod error;
pub use error::{Error, EXIT_IO, EXIT_NOT_CONVERGED, EXIT_VALIDATION};

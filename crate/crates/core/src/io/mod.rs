//! Binary and image interchange formats.
//!
//! * `PCLB` point clouds: magic `PCLB`, u32 LE point count, u8 fields per
//!   point (3 = xyz, 4 = xyz + intensity), then f32 LE records.
//! * `DMAP` rasters: magic `DMAP`, u32 LE width, u32 LE height, then f32 LE
//!   row-major values; NaN marks invalid cells.
//! * 16-bit grayscale PNG depth with a meters-per-unit scale (0 = invalid).
//! * 8-bit RGB heatmap PNG with a fixed color ramp.

mod dmap;
mod pclb;
mod png_io;

pub use dmap::{decode_dmap, encode_dmap, read_dmap, write_dmap};
pub use pclb::{decode_point_cloud, encode_pclb, read_point_cloud, write_point_cloud, LoadedCloud};
pub use png_io::{
    heatmap_color, read_depth_png16, read_gray_png, write_depth_png16, write_heatmap_png, DEFAULT_PNG_SCALE,
};

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("truncated {what} at byte offset {offset}")]
    Truncated { what: &'static str, offset: usize },
    #[error("{0}")]
    Invalid(String),
    #[error("line {line}: {message}")]
    Text { line: usize, message: String },
    #[error("png: {0}")]
    Png(String),
}

impl FormatError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        FormatError::Io { path: path.into(), source }
    }
}

pub(crate) fn read_bytes(path: &std::path::Path) -> Result<Vec<u8>, FormatError> {
    std::fs::read(path).map_err(|e| FormatError::io(path, e))
}

pub(crate) fn write_bytes(path: &std::path::Path, bytes: &[u8]) -> Result<(), FormatError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| FormatError::io(parent, e))?;
        }
    }
    std::fs::write(path, bytes).map_err(|e| FormatError::io(path, e))
}

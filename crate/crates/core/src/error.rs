use crate::depth::DepthError;
use crate::eval::EvalError;
use crate::frustum::FrustumError;
use crate::geometry::GeometryError;
use crate::heads::HeadError;
use crate::io::FormatError;
use crate::openlabel::OpenLabelError;

/// Crate-level error with the CLI exit-code mapping.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    OpenLabel(#[from] OpenLabelError),
    #[error(transparent)]
    Depth(#[from] DepthError),
    #[error(transparent)]
    Frustum(#[from] FrustumError),
    #[error(transparent)]
    Head(#[from] HeadError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

impl Error {
    /// 1 validation, 2 IO/format, 3 numerical non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Format(_) => EXIT_IO,
            Error::OpenLabel(OpenLabelError::Format(_) | OpenLabelError::Json { .. }) => EXIT_IO,
            Error::Frustum(FrustumError::Format(_) | FrustumError::DetectionLine { .. }) => EXIT_IO,
            Error::Head(HeadError::Format(_) | HeadError::Record { .. }) => EXIT_IO,
            Error::Depth(DepthError::NotConverged { .. }) => EXIT_NOT_CONVERGED,
            _ => EXIT_VALIDATION,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(Error::Config("x".into()).exit_code(), 1);
        assert_eq!(Error::Eval(EvalError::UnknownFrames(vec!["a".into()])).exit_code(), 1);
        assert_eq!(Error::Format(FormatError::Invalid("x".into())).exit_code(), 2);
        assert_eq!(Error::Depth(DepthError::NotConverged { iterations: 3, residual: 1.0 }).exit_code(), 3);
        assert_eq!(Error::Depth(DepthError::NoKnownPixels).exit_code(), 1);
    }
}

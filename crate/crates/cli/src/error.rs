use ldx_core::Error;

/// Error reported on standard error as `CODE: message`.
#[derive(Debug, thiserror::Error)]
#[error("{code}: {message}")]
pub struct CliError {
    pub code: &'static str,
    pub exit: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            code: "E_CONFIG",
            exit: 2,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError {
            code: "E_IO",
            exit: 1,
            message: message.into(),
        }
    }

    pub fn verify(message: impl Into<String>) -> Self {
        CliError {
            code: "E_VERIFY",
            exit: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let (code, exit) = match &e {
            Error::Parse(_) | Error::InvalidInput(_) => ("E_CONFIG", 2),
            Error::WrongRegime { .. }
            | Error::DegenerateAssumption { .. }
            | Error::NoRealTheta { .. }
            | Error::FrameDegenerate { .. } => ("E_REGIME", 3),
            Error::IrregularCurve { .. } | Error::NotSpacelikeHypersurface { .. } | Error::BadDirectNormal { .. } => {
                ("E_CURVE", 1)
            }
            _ => ("E_DOMAIN", 1),
        };
        CliError {
            code,
            exit,
            message: format!("{}: {e}", e.kind()),
        }
    }
}

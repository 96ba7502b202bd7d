use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("duplicate name `{0}`")]
    DuplicateName(String),

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("`{0}` is not a rational literal")]
    BadCoefficient(String),

    #[error("invalid ring: {0}")]
    InvalidRing(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid parameter for preset `{name}`: {reason}")]
    PresetParameter { name: String, reason: String },

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("golden table: {0}")]
    Golden(String),
}

impl Error {
    pub(crate) fn from_json(err: &serde_json::Error) -> Self {
        Error::Syntax {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}

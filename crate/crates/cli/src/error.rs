use levi_core::expr::ParseError;
use levi_core::hypersurface::GeometryError;
use levi_core::strata::StrataError;
use levi_core::submanifold::SubmanifoldError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("syntax error in `{what}` at offset {offset}: {message}\n  {source_text}\n  {caret}")]
    Syntax {
        what: String,
        message: String,
        source_text: String,
        offset: usize,
        caret: String,
    },
    #[error("no data: {0}")]
    NoData(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Syntax { .. } => 2,
            CliError::NoData(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub fn syntax(what: &str, source: &str, err: &ParseError) -> Self {
        let column = source
            .char_indices()
            .take_while(|(i, _)| *i < err.offset)
            .count();
        CliError::Syntax {
            what: what.to_string(),
            message: err.kind.to_string(),
            source_text: source.to_string(),
            offset: err.offset,
            caret: format!("{}^", " ".repeat(column)),
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::NotRealValued { .. }
            | GeometryError::InvalidTolerance(_)
            | GeometryError::DimensionMismatch { .. }
            | GeometryError::VariableOutOfSpace(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<StrataError> for CliError {
    fn from(e: StrataError) -> Self {
        match e {
            StrataError::Geometry(g) => g.into(),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<SubmanifoldError> for CliError {
    fn from(e: SubmanifoldError) -> Self {
        match e {
            SubmanifoldError::NoPoints => CliError::NoData(e.to_string()),
            SubmanifoldError::Geometry(g) => g.into(),
            SubmanifoldError::Strata(s) => s.into(),
            SubmanifoldError::Eval(_) | SubmanifoldError::Invariant(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<levi_core::invariants::InvariantError> for CliError {
    fn from(e: levi_core::invariants::InvariantError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SystemError {
    #[error("matrix {name} is {got_rows}x{got_cols}, expected {want_rows}x{want_cols}")]
    Dimension {
        name: &'static str,
        got_rows: usize,
        got_cols: usize,
        want_rows: usize,
        want_cols: usize,
    },
    #[error("mode and channel counts must be positive (n={n}, m={m}, l={l})")]
    EmptySystem { n: usize, m: usize, l: usize },
    #[error("matrix {0} contains a non-finite entry")]
    NonFinite(&'static str),
    #[error("passive structure needs as many outputs as inputs (l={l}, m={m})")]
    ChannelMismatch { l: usize, m: usize },
    #[error("no Hurwitz draw after {attempts} attempts")]
    GeneratorBudget { attempts: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("malformed JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("row {row} of {name} has {got} entries, expected {want}")]
    Ragged {
        name: &'static str,
        row: usize,
        got: usize,
        want: usize,
    },
    #[error(transparent)]
    System(#[from] SystemError),
}

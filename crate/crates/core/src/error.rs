use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("photon cutoff too small for mean photon number {mean}: need n_max >= {required}")]
    Truncation { mean: f64, required: usize },

    #[error("{name} = {value} is out of range (expected {expected})")]
    OutOfRange {
        name: String,
        value: f64,
        expected: &'static str,
    },

    #[error("unknown subsystem `{0}`")]
    UnknownSubsystem(String),

    #[error("subsystem `{label}` is not a {expected}")]
    WrongKind { label: String, expected: &'static str },

    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),

    #[error("conditioning on a zero-probability event: {0}")]
    ZeroProbability(String),

    #[error("g2 is undefined for a state without photons")]
    UndefinedG2,

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error(
        "node {node}: dark count {dc} is below the floor {floor} set by dephasing and readout errors"
    )]
    DarkCountBudget { node: usize, dc: f64, floor: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_unit(name: &str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: name.to_string(),
            value,
            expected: "[0, 1]",
        })
    }
}

pub(crate) fn check_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: name.to_string(),
            value,
            expected: "> 0",
        })
    }
}

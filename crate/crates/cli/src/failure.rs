use std::fmt;

/// Failure classes and their process exit codes.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Solver(String),
    Missing(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Missing(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Solver(m) => write!(f, "solver failure: {m}"),
            Failure::Missing(m) => write!(f, "missing input: {m}"),
        }
    }
}

impl From<quench_core::Error> for Failure {
    fn from(e: quench_core::Error) -> Self {
        use quench_core::Error as E;
        match &e {
            E::MissingData(_) => Failure::Missing(e.to_string()),
            E::Io(io) if io.kind() == std::io::ErrorKind::NotFound => Failure::Missing(e.to_string()),
            E::InvalidGeometry(_) | E::IncompatibleGeometry(_) | E::OutOfDomain { .. } => {
                Failure::Config(e.to_string())
            }
            _ => Failure::Solver(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Solver(format!("i/o: {e}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Solver(format!("json: {e}"))
    }
}

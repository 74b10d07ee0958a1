use std::fmt;

use cameral_core::cameral::CameralError;
use cameral_core::geomobs::GeomError;
use cameral_core::invariants::InvariantError;
use cameral_core::rootsys::RootSystemError;
use cameral_core::swdiff::SwError;
use serde::Serialize;

/// Failure class, which fixes the process exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Validation,
    Numerical,
    Genericity,
}

impl Kind {
    pub fn exit_code(self) -> i32 {
        match self {
            Kind::Validation => 1,
            Kind::Numerical => 2,
            Kind::Genericity => 3,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

impl CliError {
    pub fn new(kind: Kind, message: impl Into<String>) -> Self {
        CliError {
            kind,
            message: message.into(),
            source: None,
            line: None,
            column: None,
        }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self::new(Kind::Validation, message)
    }

    /// Malformed JSON, annotated with where it came from and the position.
    pub fn json(source: &str, e: &serde_json::Error) -> Self {
        CliError {
            kind: Kind::Validation,
            message: format!("{source}: {e}"),
            source: Some(source.to_string()),
            line: Some(e.line()),
            column: Some(e.column()),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn invariant_kind(e: &InvariantError) -> Kind {
    match e {
        InvariantError::DegenerateChart => Kind::Genericity,
        InvariantError::ArityMismatch { .. } => Kind::Validation,
        InvariantError::DegenerateJacobian(_) | InvariantError::DiscriminantUnsolvable(_) => Kind::Numerical,
    }
}

fn cameral_kind(e: &CameralError) -> Kind {
    match e {
        CameralError::ArityMismatch { .. }
        | CameralError::TooCloseToBranch { .. }
        | CameralError::InvalidGenus(_)
        | CameralError::RootSystem(_) => Kind::Validation,
        CameralError::NotGeneric(_) => Kind::Genericity,
        CameralError::Invariant(i) => invariant_kind(i),
        CameralError::NearDiscriminant(_)
        | CameralError::StepUnderflow(_)
        | CameralError::NewtonDivergence(_)
        | CameralError::RetriesExhausted(_)
        | CameralError::SheetCollision
        | CameralError::RootFinder(_) => Kind::Numerical,
    }
}

fn sw_kind(e: &SwError) -> Kind {
    match e {
        SwError::ArityMismatch { .. } | SwError::NearRamification(_) | SwError::StepOutOfRange(_) => {
            Kind::Validation
        }
        SwError::NoLocalCoordinate(_) | SwError::RamificationNotFound(_) => Kind::Genericity,
        SwError::OracleDiverged | SwError::ContourDiverged(_) => Kind::Numerical,
        SwError::Cameral(c) => cameral_kind(c),
    }
}

fn geom_kind(e: &GeomError) -> Kind {
    match e {
        GeomError::ResidueUnstable(_) | GeomError::MeshNotConverged(_) => Kind::Numerical,
        GeomError::WrongGroup(_) | GeomError::PairingNotInvariant | GeomError::PairingShape { .. } => {
            Kind::Validation
        }
        GeomError::Sw(s) => sw_kind(s),
        GeomError::Invariant(i) => invariant_kind(i),
    }
}

impl From<CameralError> for CliError {
    fn from(e: CameralError) -> Self {
        CliError::new(cameral_kind(&e), e.to_string())
    }
}

impl From<SwError> for CliError {
    fn from(e: SwError) -> Self {
        CliError::new(sw_kind(&e), e.to_string())
    }
}

impl From<GeomError> for CliError {
    fn from(e: GeomError) -> Self {
        CliError::new(geom_kind(&e), e.to_string())
    }
}

impl From<InvariantError> for CliError {
    fn from(e: InvariantError) -> Self {
        CliError::new(invariant_kind(&e), e.to_string())
    }
}

impl From<RootSystemError> for CliError {
    fn from(e: RootSystemError) -> Self {
        CliError::validation(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::validation(e.to_string())
    }
}

use thiserror::Error;

/// Every failure the engine can report.
///
/// Messages carry the offending point or divisor, formatted at the point of
/// failure, so the type stays independent of the scalar parameter.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("DivisionByZeroSeries: divisor series is zero")]
    DivisionByZeroSeries,
    #[error("EmptyPrecision: {0}")]
    EmptyPrecision(String),
    #[error("OddLeadingOrder: cannot take square root of series with lead {0}")]
    OddLeadingOrder(i32),
    #[error("BranchMismatch: branch {branch} does not square to leading coefficient {lead}")]
    BranchMismatch { branch: String, lead: String },
    #[error("NonzeroResidue: coefficient of z^-1 is {0}")]
    NonzeroResidue(String),

    #[error("NotSquarefree: P has a repeated root near {0}")]
    NotSquarefree(String),
    #[error("WrongDegreeParity: deg P = {0} is not odd")]
    WrongDegreeParity(usize),
    #[error("DegreeTooSmall: deg P = {0} gives genus 0")]
    DegreeTooSmall(usize),
    #[error("NotOnCurve: point {0} does not satisfy y^2 = P(x)")]
    NotOnCurve(String),
    #[error("BranchPoint: {0} is a branch point")]
    BranchPoint(String),

    #[error("InadmissibleSupport: {0}")]
    InadmissibleSupport(String),
    #[error("RankDeficiency: {0}")]
    RankDeficiency(String),
    #[error("SpecialDivisor: {0}")]
    SpecialDivisor(String),
    #[error("NotSecondKind: {0}")]
    NotSecondKind(String),
    #[error("IllConditioned: {0}")]
    IllConditioned(String),

    #[error("DivisorsNotDisjoint: {0}")]
    DivisorsNotDisjoint(String),
    #[error("AllZeroPrincipalParts: all principal parts at D0 vanish")]
    AllZeroPrincipalParts,
    #[error("UnderdeterminedPrincipalParts: {0}")]
    UnderdeterminedPrincipalParts(String),
    #[error("Collision: {0}")]
    Collision(String),
    #[error("BranchApproach: {0}")]
    BranchApproach(String),
    #[error("SpecialDivisorOnPath: {0}")]
    SpecialDivisorOnPath(String),
    #[error("UnknownSample: {0}")]
    UnknownSample(usize),

    #[error("SingularMatrix: {0}")]
    SingularMatrix(String),
}

impl Error {
    /// Whether the error reflects a numerical breakdown rather than invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DivisionByZeroSeries
                | Error::EmptyPrecision(_)
                | Error::RankDeficiency(_)
                | Error::IllConditioned(_)
                | Error::UnderdeterminedPrincipalParts(_)
                | Error::Collision(_)
                | Error::BranchApproach(_)
                | Error::SpecialDivisorOnPath(_)
                | Error::SingularMatrix(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

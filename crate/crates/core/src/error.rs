use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("morphism source/target mismatch: {0}")]
    SourceTargetMismatch(String),
    #[error("symbol kind or arity clash on `{0}`")]
    KindClash(String),
    #[error("name `{0}` already used in the language")]
    NameCollision(String),
    #[error("invalid language: {0}")]
    InvalidLanguage(String),
    #[error("invalid morphism: {0}")]
    InvalidMorphism(String),
    #[error("language mismatch: {0}")]
    LanguageMismatch(String),
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error("subset not closed: {0}")]
    NotClosed(String),
    #[error("invalid fragment: {0}")]
    InvalidFragment(String),
    #[error("structure is not a member of the fragment: {0}")]
    NotAMember(String),
    #[error("composite is not a K-embedding: {0}")]
    CompositionNotK(String),
    #[error("not a strong substructure: {0}")]
    NotStrongSubstructure(String),
    #[error("structure budget of {budget} exceeded while enumerating {what}")]
    SizeBoundExceeded { budget: usize, what: String },
    #[error("arrows are not composable: {0}")]
    ObjectMismatch(String),
    #[error("fragment does not satisfy LRP: {0}")]
    LrpNotSatisfied(String),
    #[error("the candidate pool is empty")]
    EmptyCandidatePool,
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

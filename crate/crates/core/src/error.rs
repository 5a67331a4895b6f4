use num_bigint::BigInt;
use thiserror::Error;

/// Errors raised by rule materialization and the analyses built on it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FusionError {
    #[error("generator evaluation failed at level {level}: {reason}")]
    GeneratorEval { level: usize, reason: String },
    #[error("level {level}, supertile {supertile}: child index {child} out of range")]
    InvalidChildIndex {
        level: usize,
        supertile: String,
        child: usize,
    },
    #[error("level {level} is not defined by this rule")]
    LevelNotDefined { level: usize },
    #[error("supertile index {index} out of range at level {level}")]
    NoSuchSupertile { level: usize, index: usize },
    #[error("expansion would produce {count} pieces, above the cap of {cap}")]
    ExpansionTooLarge { count: BigInt, cap: u64 },
    #[error("coordinate overflow while placing tiles (level {level})")]
    CoordinateOverflow { level: usize },
    #[error("operation requires a {expected}-dimensional rule")]
    WrongDimension { expected: usize },
    #[error("malformed rule: all-zero column {column} in transition matrix M({from},{to})")]
    ZeroColumn {
        from: usize,
        to: usize,
        column: usize,
    },
    #[error("no strongly primitive induction found up to level {horizon}")]
    NotStronglyPrimitive { horizon: usize },
    #[error("rule is not of constant length at level {level}")]
    NotConstantLength { level: usize },
    #[error("rule does not have unit tile geometry")]
    NotUnitGeometry,
    #[error("no supertiles at level {level}; raise the horizon")]
    HorizonTooSmall { level: usize },
    #[error("hull computation limited to dimension 8, got {dim}")]
    DimensionTooHigh { dim: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = FusionError> = std::result::Result<T, E>;

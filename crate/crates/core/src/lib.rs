//! Exact computations on fusion tilings: rules and their levels, transition
//! matrices, invariant measures, eigenvalue and coincidence tests,
//! complexity, and first cohomology of one-dimensional hulls.

pub mod cohomology;
pub mod engine;
pub mod entropy;
pub mod error;
pub mod matrix;
pub mod measures;
pub mod rule;
pub mod ruledsl;
pub mod scalar;
pub mod spectral;
pub mod verdict;

pub use error::{FusionError, Result};
pub use matrix::IntMatrix;
pub use rule::{
    validate, Composition, FusionRule, Level, LevelSource, Limits, Placement, Prototile, Run,
    Shape, SupertileDef, ValidationReport, Violation,
};
pub use ruledsl::{catalog, parse_rule, parse_rule_str, print_rule, ParseError, RuleSource};
pub use scalar::Scalar;
pub use verdict::Verdict;

//! Integer expressions in the level index `n`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum IntExpr {
    Lit(BigInt),
    Level,
    Add(Box<IntExpr>, Box<IntExpr>),
    Sub(Box<IntExpr>, Box<IntExpr>),
    Mul(Box<IntExpr>, Box<IntExpr>),
    Pow(Box<IntExpr>, Box<IntExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalError {
    NegativeExponent,
    /// Intermediate value exceeded the configured bit bound.
    TooLarge {
        bits: u64,
    },
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::NegativeExponent => f.write_str("negative exponent"),
            EvalError::TooLarge { bits } => write!(f, "value exceeds {bits} bits"),
        }
    }
}

impl IntExpr {
    pub fn lit<T: Into<BigInt>>(v: T) -> Self {
        IntExpr::Lit(v.into())
    }

    pub fn add(a: IntExpr, b: IntExpr) -> Self {
        IntExpr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: IntExpr, b: IntExpr) -> Self {
        IntExpr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: IntExpr, b: IntExpr) -> Self {
        IntExpr::Mul(Box::new(a), Box::new(b))
    }

    pub fn pow(a: IntExpr, b: IntExpr) -> Self {
        IntExpr::Pow(Box::new(a), Box::new(b))
    }

    pub fn mentions_level(&self) -> bool {
        match self {
            IntExpr::Lit(_) => false,
            IntExpr::Level => true,
            IntExpr::Add(a, b) | IntExpr::Sub(a, b) | IntExpr::Mul(a, b) | IntExpr::Pow(a, b) => {
                a.mentions_level() || b.mentions_level()
            }
        }
    }

    /// Evaluates at level `n`, refusing any intermediate wider than `bit_bound`.
    pub fn eval(&self, n: u64, bit_bound: u64) -> Result<BigInt, EvalError> {
        let check = |v: BigInt| {
            if v.bits() > bit_bound {
                Err(EvalError::TooLarge { bits: bit_bound })
            } else {
                Ok(v)
            }
        };
        match self {
            IntExpr::Lit(v) => check(v.clone()),
            IntExpr::Level => Ok(BigInt::from(n)),
            IntExpr::Add(a, b) => check(a.eval(n, bit_bound)? + b.eval(n, bit_bound)?),
            IntExpr::Sub(a, b) => check(a.eval(n, bit_bound)? - b.eval(n, bit_bound)?),
            IntExpr::Mul(a, b) => check(a.eval(n, bit_bound)? * b.eval(n, bit_bound)?),
            IntExpr::Pow(a, b) => {
                let base = a.eval(n, bit_bound)?;
                let exp = b.eval(n, bit_bound)?;
                if exp.is_negative() {
                    return Err(EvalError::NegativeExponent);
                }
                if base.is_zero() || base.magnitude() == &1u32.into() {
                    return Ok(if exp.is_zero() {
                        BigInt::from(1)
                    } else if base.is_negative() && (&exp % 2u32) == BigInt::from(1) {
                        base
                    } else {
                        base.abs()
                    });
                }
                let e = exp
                    .to_u64()
                    .ok_or(EvalError::TooLarge { bits: bit_bound })?;
                // |base| >= 2, so the result has at least e bits
                if e > bit_bound {
                    return Err(EvalError::TooLarge { bits: bit_bound });
                }
                if (base.bits() - 1).saturating_mul(e) > bit_bound {
                    return Err(EvalError::TooLarge { bits: bit_bound });
                }
                check(num_traits::pow(base, e as usize))
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            IntExpr::Add(..) | IntExpr::Sub(..) => 1,
            IntExpr::Mul(..) => 2,
            IntExpr::Pow(..) => 3,
            IntExpr::Lit(v) if v.is_negative() => 0,
            IntExpr::Lit(_) | IntExpr::Level => 4,
        }
    }
}

impl fmt::Display for IntExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn side(f: &mut fmt::Formatter<'_>, e: &IntExpr, min: u8) -> fmt::Result {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            IntExpr::Lit(v) => write!(f, "{v}"),
            IntExpr::Level => f.write_str("n"),
            IntExpr::Add(a, b) => {
                side(f, a, 1)?;
                f.write_str("+")?;
                side(f, b, 2)
            }
            IntExpr::Sub(a, b) => {
                side(f, a, 1)?;
                f.write_str("-")?;
                side(f, b, 2)
            }
            IntExpr::Mul(a, b) => {
                side(f, a, 2)?;
                f.write_str("*")?;
                side(f, b, 3)
            }
            IntExpr::Pow(a, b) => {
                // right associative
                side(f, a, 4)?;
                f.write_str("^")?;
                side(f, b, 3)
            }
        }
    }
}

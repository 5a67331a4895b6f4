//! Three-valued verdicts for asymptotic claims checked at a finite horizon.

use std::fmt;

/// Outcome of checking an asymptotic property up to some horizon.
///
/// `Holds` and `Fails` always come with the certificate that justified them.
#[derive(Clone, Debug, PartialEq)]
pub enum Verdict<H, F> {
    Holds(H),
    Fails(F),
    Inconclusive { horizon: usize, reason: String },
}

impl<H, F> Verdict<H, F> {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds(_))
    }

    pub fn fails(&self) -> bool {
        matches!(self, Verdict::Fails(_))
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(self, Verdict::Inconclusive { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Holds(_) => "holds",
            Verdict::Fails(_) => "fails",
            Verdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

impl<H, F> fmt::Display for Verdict<H, F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Inconclusive { horizon, reason } => {
                write!(f, "inconclusive at horizon {horizon}: {reason}")
            }
            other => f.write_str(other.label()),
        }
    }
}

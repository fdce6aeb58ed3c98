//! Base-`n` Cantor sets described by an admissible digit set.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// The set of all sums `Σ_{j≥1} s_j n^{-j}` with every `s_j` drawn from `digits`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawDigitSpec", into = "RawDigitSpec")]
pub struct DigitCantorSpec {
    base: u32,
    digits: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDigitSpec {
    n: u32,
    digits: Vec<u32>,
}

impl TryFrom<RawDigitSpec> for DigitCantorSpec {
    type Error = crate::Error;

    fn try_from(raw: RawDigitSpec) -> Result<Self> {
        DigitCantorSpec::new(raw.n, raw.digits)
    }
}

impl From<DigitCantorSpec> for RawDigitSpec {
    fn from(spec: DigitCantorSpec) -> Self {
        RawDigitSpec {
            n: spec.base,
            digits: spec.digits,
        }
    }
}

impl DigitCantorSpec {
    /// Digits may be given in any order; duplicates are rejected.
    pub fn new(base: u32, digits: impl IntoIterator<Item = u32>) -> Result<Self> {
        if base < 2 {
            return Err(invalid("n", format!("base must be ≥ 2, got {base}")));
        }
        let mut digits: Vec<u32> = digits.into_iter().collect();
        digits.sort_unstable();
        if digits.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("digits", "duplicate digit"));
        }
        if let Some(&bad) = digits.iter().find(|&&s| s >= base) {
            return Err(invalid(
                "digits",
                format!("digit {bad} out of range for base {base}"),
            ));
        }
        if digits.first() != Some(&0) {
            return Err(invalid("digits", "digit set must contain 0"));
        }
        Ok(Self { base, digits })
    }

    /// The classical middle-thirds set, digits {0, 2} in base 3.
    pub fn middle_thirds() -> Self {
        Self {
            base: 3,
            digits: vec![0, 2],
        }
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// `log|S| / log n`, which is both the Hausdorff and the Minkowski dimension.
    pub fn dimension(&self) -> f64 {
        (self.digits.len() as f64).ln() / (self.base as f64).ln()
    }

    /// Largest digit, used in truncation bounds.
    pub fn max_digit(&self) -> u32 {
        *self.digits.last().expect("digit set is never empty")
    }
}

impl fmt::Display for DigitCantorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits: Vec<String> = self.digits.iter().map(u32::to_string).collect();
        write!(f, "{}:{}", self.base, digits.join(","))
    }
}

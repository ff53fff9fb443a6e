//! Inversion, retrograde and retrograde inversion of pitch signals.

use std::fmt;

use crate::error::{Error, Result};
use crate::signal::mean;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VariationKind {
    Prime,
    Inversion,
    Retrograde,
    RetrogradeInversion,
}

impl VariationKind {
    pub const ALL: [VariationKind; 4] = [
        VariationKind::Prime,
        VariationKind::Inversion,
        VariationKind::Retrograde,
        VariationKind::RetrogradeInversion,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    fn bits(self) -> (bool, bool) {
        match self {
            VariationKind::Prime => (false, false),
            VariationKind::Inversion => (true, false),
            VariationKind::Retrograde => (false, true),
            VariationKind::RetrogradeInversion => (true, true),
        }
    }

    fn from_bits(inverted: bool, reversed: bool) -> Self {
        match (inverted, reversed) {
            (false, false) => VariationKind::Prime,
            (true, false) => VariationKind::Inversion,
            (false, true) => VariationKind::Retrograde,
            (true, true) => VariationKind::RetrogradeInversion,
        }
    }

    /// Applying `self` after `other`.
    pub fn compose(self, other: VariationKind) -> VariationKind {
        let (i1, r1) = self.bits();
        let (i2, r2) = other.bits();
        VariationKind::from_bits(i1 ^ i2, r1 ^ r2)
    }

    pub fn reverses_time(self) -> bool {
        self.bits().1
    }

    pub fn apply(self, signal: &[f64]) -> Result<Vec<f64>> {
        match self {
            VariationKind::Prime => {
                if signal.is_empty() {
                    return Err(Error::EmptyVector);
                }
                Ok(signal.to_vec())
            }
            VariationKind::Inversion => invert(signal),
            VariationKind::Retrograde => retrograde(signal),
            VariationKind::RetrogradeInversion => retrograde_inversion(signal),
        }
    }
}

impl fmt::Display for VariationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VariationKind::Prime => "prime",
            VariationKind::Inversion => "inversion",
            VariationKind::Retrograde => "retrograde",
            VariationKind::RetrogradeInversion => "retrograde_inversion",
        })
    }
}

/// Reflection about the mean pitch: `2 * mean - x`.
pub fn invert(signal: &[f64]) -> Result<Vec<f64>> {
    if signal.is_empty() {
        return Err(Error::EmptyVector);
    }
    let axis = 2.0 * mean(signal);
    Ok(signal.iter().map(|v| axis - v).collect())
}

pub fn retrograde(signal: &[f64]) -> Result<Vec<f64>> {
    if signal.is_empty() {
        return Err(Error::EmptyVector);
    }
    Ok(signal.iter().rev().copied().collect())
}

pub fn retrograde_inversion(signal: &[f64]) -> Result<Vec<f64>> {
    invert(&retrograde(signal)?)
}

//! Uniformly sampled pitch signals.

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::ingest::NoteSequence;

/// Samples per quarter note.
pub type Rate = Rational64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RestPolicy {
    /// Rest samples take the value 0.
    RepresentZero,
    /// Rest samples repeat the preceding pitch (the first pitch for a leading rest).
    Remove,
}

impl fmt::Display for RestPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RestPolicy::RepresentZero => "represent",
            RestPolicy::Remove => "remove",
        })
    }
}

impl FromStr for RestPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "represent" | "zero" => Ok(RestPolicy::RepresentZero),
            "remove" => Ok(RestPolicy::Remove),
            other => Err(Error::InvalidConfig(format!("unknown rest policy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PitchSignal {
    samples: Vec<f64>,
    rate: Rate,
    rest_policy: RestPolicy,
}

impl PitchSignal {
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn rate(&self) -> Rate {
        self.rate
    }

    pub fn rest_policy(&self) -> RestPolicy {
        self.rest_policy
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

fn ceil_index(t: Rational64) -> usize {
    t.ceil().to_integer().max(0) as usize
}

/// Samples the piecewise-constant pitch function of `seq` at `rate` samples
/// per quarter note. Sample `t` reads the note whose half-open span contains
/// time `t / rate`.
pub fn sample_pitch_signal(seq: &NoteSequence, rate: Rate, policy: RestPolicy) -> Result<PitchSignal> {
    if rate <= Rate::zero() {
        return Err(Error::InvalidRate);
    }
    if policy == RestPolicy::Remove && seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    let len = ceil_index(seq.total_duration() * rate);
    if len == 0 {
        return Err(Error::ZeroDuration);
    }

    let mut slots: Vec<Option<u8>> = vec![None; len];
    for e in seq.events() {
        let start = ceil_index(e.onset * rate).min(len);
        let end = ceil_index(e.end() * rate).min(len);
        for slot in &mut slots[start..end] {
            *slot = Some(e.pitch);
        }
    }

    let samples = match policy {
        RestPolicy::RepresentZero => slots
            .iter()
            .map(|s| s.map_or(0.0, f64::from))
            .collect(),
        RestPolicy::Remove => {
            let first = f64::from(seq.events()[0].pitch);
            let mut held = first;
            slots
                .iter()
                .map(|s| {
                    if let Some(p) = s {
                        held = f64::from(*p);
                    }
                    held
                })
                .collect()
        }
    };
    Ok(PitchSignal {
        samples,
        rate,
        rest_policy: policy,
    })
}

/// Samples `seq` to exactly `n` samples spread over its total duration.
pub fn resample_to_length(seq: &NoteSequence, n: usize, policy: RestPolicy) -> Result<PitchSignal> {
    if n == 0 {
        return Err(Error::InvalidRate);
    }
    let total = seq.total_duration();
    if total <= Rational64::zero() {
        return Err(Error::ZeroDuration);
    }
    let rate = Rational64::from_integer(n as i64) / total;
    let signal = sample_pitch_signal(seq, rate, policy)?;
    debug_assert_eq!(signal.len(), n);
    Ok(signal)
}

/// A mean-free vector cut from a signal.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSegmentVector {
    pub values: Vec<f64>,
    pub start: usize,
    pub len: usize,
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Subtracts the mean.
pub fn mean_normalize(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::EmptyVector);
    }
    let mu = mean(values);
    Ok(values.iter().map(|v| v - mu).collect())
}

pub fn normalize_segment(values: &[f64], start: usize) -> Result<NormalizedSegmentVector> {
    Ok(NormalizedSegmentVector {
        values: mean_normalize(values)?,
        start,
        len: values.len(),
    })
}

/// Alternative rest handling for zero-represented rests: the mean is taken over
/// the sounding samples only, and rest samples stay at zero afterwards.
pub fn mean_normalize_keep_rests(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::EmptyVector);
    }
    let sounding: Vec<f64> = values.iter().copied().filter(|v| *v != 0.0).collect();
    if sounding.is_empty() {
        return Ok(values.to_vec());
    }
    let mu = mean(&sounding);
    Ok(values
        .iter()
        .map(|&v| if v == 0.0 { 0.0 } else { v - mu })
        .collect())
}

/// Converts a quarter-note duration to a whole number of samples, if it is one.
pub fn qn_to_samples(qn: f64, rate: Rate) -> Option<usize> {
    let samples = qn * rate.to_f64()?;
    let rounded = samples.round();
    ((samples - rounded).abs() < 1e-9 && rounded >= 0.0).then_some(rounded as usize)
}

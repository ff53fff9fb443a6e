//! Local Boundary Detection Model.
//!
//! Three interval profiles (absolute pitch interval, inter-onset interval and
//! rest) are turned into boundary strengths by the change rule
//! `r_i = |x_i - x_{i+1}| / (x_i + x_{i+1})` and the proximity rule
//! `s_i = x_i * (r_{i-1} + r_i)`, max-normalized, weighted and normalized
//! again.

use num_traits::ToPrimitive;

use super::BoundarySet;
use crate::error::{Error, Result};
use crate::ingest::NoteSequence;
use crate::signal::Rate;

/// Weights of the pitch, inter-onset and rest profiles.
pub const LBDM_WEIGHTS: [f64; 3] = [0.25, 0.5, 0.25];

fn profile_strengths(x: &[f64]) -> Vec<f64> {
    let change: Vec<f64> = x
        .windows(2)
        .map(|w| {
            let denom = w[0] + w[1];
            if denom == 0.0 {
                0.0
            } else {
                (w[0] - w[1]).abs() / denom
            }
        })
        .collect();
    let mut s: Vec<f64> = (0..x.len())
        .map(|i| {
            let before = if i > 0 { change[i - 1] } else { 0.0 };
            let after = change.get(i).copied().unwrap_or(0.0);
            x[i] * (before + after)
        })
        .collect();
    normalize_max(&mut s);
    s
}

fn normalize_max(values: &mut [f64]) {
    let max = values.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        values.iter_mut().for_each(|v| *v /= max);
    }
}

/// Combined boundary strength in `[0, 1]` for each transition; entry `i`
/// belongs to the boundary between note `i` and note `i + 1`.
pub fn lbdm_strengths(seq: &NoteSequence) -> Vec<f64> {
    let ev = seq.events();
    if ev.len() < 2 {
        return Vec::new();
    }
    let qn = |r: num_rational::Rational64| r.to_f64().unwrap_or(0.0);
    let pitch: Vec<f64> = ev
        .windows(2)
        .map(|w| (f64::from(w[1].pitch) - f64::from(w[0].pitch)).abs())
        .collect();
    let ioi: Vec<f64> = ev.windows(2).map(|w| qn(w[1].onset - w[0].onset)).collect();
    let rest: Vec<f64> = ev
        .windows(2)
        .map(|w| qn(w[1].onset - w[0].end()).max(0.0))
        .collect();

    let profiles = [profile_strengths(&pitch), profile_strengths(&ioi), profile_strengths(&rest)];
    let mut combined: Vec<f64> = (0..pitch.len())
        .map(|i| {
            LBDM_WEIGHTS
                .iter()
                .zip(&profiles)
                .map(|(w, p)| w * p[i])
                .sum()
        })
        .collect();
    normalize_max(&mut combined);
    combined
}

/// A boundary at the onset sample of every note preceded by a transition
/// stronger than `threshold`.
pub fn lbdm_boundaries(seq: &NoteSequence, threshold: f64, rate: Rate) -> Result<BoundarySet> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::ThresholdOutOfRange(threshold));
    }
    let len = (seq.total_duration() * rate).ceil().to_integer().max(0) as usize;
    let strengths = lbdm_strengths(seq);
    let events = seq.events();
    let interior = strengths
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > threshold)
        .map(|(i, _)| (events[i + 1].onset * rate).ceil().to_integer().max(0) as usize);
    Ok(BoundarySet::from_interior(len, interior))
}

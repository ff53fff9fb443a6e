//! Boundary detection, segment cutting and length equalization.

mod lbdm;

use std::fmt;
use std::str::FromStr;

pub use lbdm::{lbdm_boundaries, lbdm_strengths, LBDM_WEIGHTS};

use crate::error::{Error, Result};
use crate::signal::{qn_to_samples, Rate};
use crate::wavelet::CoefficientSignal;

/// Coefficients at or below this magnitude count as exact zeros.
pub const ZERO_TOLERANCE: f64 = 1e-12;

/// Strictly increasing sample indices starting at 0 and ending at the signal
/// length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundarySet(Vec<usize>);

impl BoundarySet {
    /// Adds the default boundaries at 0 and `len` to the given interior
    /// indices. Out-of-range and duplicate indices are dropped.
    pub fn from_interior(len: usize, interior: impl IntoIterator<Item = usize>) -> Self {
        let mut indices: Vec<usize> = interior.into_iter().filter(|&i| i > 0 && i < len).collect();
        indices.push(0);
        indices.push(len);
        indices.sort_unstable();
        indices.dedup();
        BoundarySet(indices)
    }

    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.len() < 2 || indices[0] != 0 {
            return Err(Error::InvalidBoundaries(
                "a boundary set needs 0 and the signal length".into(),
            ));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidBoundaries("indices not strictly increasing".into()));
        }
        Ok(BoundarySet(indices))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    /// Length of the signal the set was built for.
    pub fn signal_len(&self) -> usize {
        *self.0.last().expect("boundary set is never empty")
    }

    pub fn segment_count(&self) -> usize {
        self.0.len() - 1
    }

    pub fn spans(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.windows(2).map(|w| (w[0], w[1]))
    }

    /// The boundaries of the time-reversed signal.
    pub fn reversed(&self) -> Self {
        let len = self.signal_len();
        BoundarySet(self.0.iter().rev().map(|&i| len - i).collect())
    }

    /// Restricts the set to `[start, end)` and re-bases it at `start`.
    pub fn restrict(&self, start: usize, end: usize) -> Self {
        BoundarySet::from_interior(
            end - start,
            self.0.iter().filter(|&&i| i > start && i < end).map(|&i| i - start),
        )
    }
}

fn sign(x: f64) -> i8 {
    if x.abs() <= ZERO_TOLERANCE {
        0
    } else if x > 0.0 {
        1
    } else {
        -1
    }
}

/// Boundaries where the coefficients change sign (at the first sample of the
/// new sign) or vanish.
pub fn zero_crossing_boundaries(coeffs: &[f64]) -> Result<BoundarySet> {
    if coeffs.is_empty() {
        return Err(Error::EmptyVector);
    }
    let signs: Vec<i8> = coeffs.iter().map(|&c| sign(c)).collect();
    let interior = (0..coeffs.len()).filter(|&i| signs[i] == 0 || (i > 0 && signs[i - 1] * signs[i] < 0));
    Ok(BoundarySet::from_interior(coeffs.len(), interior))
}

/// Boundaries at strict interior local maxima; a plateau maximum yields one
/// boundary at its first sample. Negative maxima count.
pub fn local_maxima_boundaries(coeffs: &[f64]) -> Result<BoundarySet> {
    if coeffs.is_empty() {
        return Err(Error::EmptyVector);
    }
    let mut interior = Vec::new();
    let mut i = 1;
    while i + 1 < coeffs.len() {
        if coeffs[i - 1] < coeffs[i] {
            let mut j = i;
            while j + 1 < coeffs.len() && coeffs[j + 1] == coeffs[i] {
                j += 1;
            }
            if j + 1 < coeffs.len() && coeffs[j + 1] < coeffs[i] {
                interior.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    Ok(BoundarySet::from_interior(coeffs.len(), interior))
}

pub fn zero_crossings(coeffs: &CoefficientSignal) -> Result<BoundarySet> {
    zero_crossing_boundaries(&coeffs.values)
}

pub fn local_maxima(coeffs: &CoefficientSignal) -> Result<BoundarySet> {
    local_maxima_boundaries(&coeffs.values)
}

/// Boundaries every `step` samples; a shorter tail stays a segment of its own.
pub fn constant_boundaries_samples(len: usize, step: usize) -> Result<BoundarySet> {
    if step == 0 {
        return Err(Error::NonIntegralStep(0.0));
    }
    Ok(BoundarySet::from_interior(len, (step..len).step_by(step)))
}

pub fn constant_boundaries(len: usize, rate: Rate, step_qn: f64) -> Result<BoundarySet> {
    let step = qn_to_samples(step_qn, rate)
        .filter(|&s| s > 0)
        .ok_or_else(|| Error::NonIntegralStep(step_qn * num_traits::ToPrimitive::to_f64(&rate).unwrap_or(f64::NAN)))?;
    constant_boundaries_samples(len, step)
}

/// Where a segment came from: corpus item, voice/part, and section or
/// variation index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SourceId {
    pub item: usize,
    pub part: usize,
    pub section: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub values: Vec<f64>,
    pub start: usize,
    pub source: SourceId,
    pub label: Option<usize>,
}

pub fn cut_segments(values: &[f64], boundaries: &BoundarySet, source: SourceId) -> Result<Vec<Segment>> {
    if boundaries.signal_len() != values.len() {
        return Err(Error::LengthMismatch(boundaries.signal_len(), values.len()));
    }
    Ok(boundaries
        .spans()
        .map(|(a, b)| Segment {
            values: values[a..b].to_vec(),
            start: a,
            source,
            label: None,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Equalization {
    ZeroPad,
    Interpolate,
}

impl fmt::Display for Equalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Equalization::ZeroPad => "pad",
            Equalization::Interpolate => "interpolate",
        })
    }
}

impl FromStr for Equalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pad" | "zero-pad" | "zeropad" => Ok(Equalization::ZeroPad),
            "interpolate" | "interp" => Ok(Equalization::Interpolate),
            other => Err(Error::InvalidConfig(format!("unknown equalization `{other}`"))),
        }
    }
}

/// Equal-length rows stored contiguously, with the provenance of each row.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentMatrix {
    width: usize,
    data: Vec<f64>,
    pub sources: Vec<SourceId>,
    pub labels: Vec<Option<usize>>,
    pub method: Equalization,
}

impl SegmentMatrix {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rows(&self) -> usize {
        self.sources.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.width..(i + 1) * self.width]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.width.max(1)).take(self.rows())
    }

    fn build(segments: &[Segment], width: usize, method: Equalization, fill: impl Fn(&[f64], &mut [f64])) -> Self {
        let mut data = vec![0.0; segments.len() * width];
        for (seg, row) in segments.iter().zip(data.chunks_exact_mut(width.max(1))) {
            fill(&seg.values, row);
        }
        SegmentMatrix {
            width,
            data,
            sources: segments.iter().map(|s| s.source).collect(),
            labels: segments.iter().map(|s| s.label).collect(),
            method,
        }
    }
}

pub fn max_segment_len(segments: &[Segment]) -> usize {
    segments.iter().map(|s| s.values.len()).max().unwrap_or(0)
}

/// Pads every segment with trailing zeros to `target_len`, or to the longest
/// segment when no target is given.
pub fn equalize_zero_pad(segments: &[Segment], target_len: Option<usize>) -> Result<SegmentMatrix> {
    if segments.is_empty() {
        return Err(Error::EmptyVector);
    }
    let longest = max_segment_len(segments);
    let width = target_len.unwrap_or(longest);
    if longest > width {
        return Err(Error::SegmentTooLong {
            len: longest,
            target: width,
        });
    }
    Ok(SegmentMatrix::build(segments, width, Equalization::ZeroPad, |v, row| {
        row[..v.len()].copy_from_slice(v)
    }))
}

/// Nearest-neighbour resize: output sample `j` reads input index
/// `round((j + 0.5) * len / target - 0.5)`, clamped to the input.
pub fn resize_nearest(values: &[f64], target: usize) -> Vec<f64> {
    let len = values.len();
    if len == target {
        return values.to_vec();
    }
    let ratio = len as f64 / target as f64;
    (0..target)
        .map(|j| {
            let x = ((j as f64 + 0.5) * ratio - 0.5).round();
            values[(x.max(0.0) as usize).min(len - 1)]
        })
        .collect()
}

pub fn equalize_interpolate(segments: &[Segment], target_len: Option<usize>) -> Result<SegmentMatrix> {
    if segments.is_empty() {
        return Err(Error::EmptyVector);
    }
    let width = target_len.unwrap_or_else(|| max_segment_len(segments));
    if width == 0 || segments.iter().any(|s| s.values.is_empty()) {
        return Err(Error::EmptyVector);
    }
    Ok(SegmentMatrix::build(segments, width, Equalization::Interpolate, |v, row| {
        row.copy_from_slice(&resize_nearest(v, width))
    }))
}

pub fn equalize(segments: &[Segment], method: Equalization, target_len: Option<usize>) -> Result<SegmentMatrix> {
    match method {
        Equalization::ZeroPad => equalize_zero_pad(segments, target_len),
        Equalization::Interpolate => equalize_interpolate(segments, target_len),
    }
}

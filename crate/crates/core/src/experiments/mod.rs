//! End-to-end classification protocols: section-of-origin identification on
//! two-part works, and leave-one-out tune-family classification.

pub mod bach;
pub mod folk;
pub mod report;
pub mod synthetic;

use std::fmt;
use std::str::FromStr;

use crate::classifier::Metric;
use crate::error::{Error, Result};
use crate::segmentation::{
    constant_boundaries, cut_segments, local_maxima_boundaries, zero_crossing_boundaries, BoundarySet,
    Equalization, Segment, SourceId,
};
use crate::signal::{mean_normalize, mean_normalize_keep_rests, Rate, RestPolicy};
use crate::wavelet::{haar_transform, WaveletScale};

pub use bach::{load_bach_corpus, run_bach_experiment, split_bach_sections, BachReport, BachWork};
pub use folk::{
    grid_search, load_folk_corpus, run_folk_segmented, run_folk_unsegmented, FolkCorpus, FolkReport, FolkSong,
    GridCell, GridReport, GridSpace,
};
pub use synthetic::{generate_tune_families, TuneFamilyParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Representation {
    /// Mean-normalized pitch signal segments.
    Pitch,
    /// Haar coefficients at a single scale.
    Wavelet,
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Representation::Pitch => "vr",
            Representation::Wavelet => "wr",
        })
    }
}

impl FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vr" | "pitch" => Ok(Representation::Pitch),
            "wr" | "wavelet" => Ok(Representation::Wavelet),
            other => Err(Error::InvalidConfig(format!("unknown representation `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentationMethod {
    None,
    ZeroCrossing { scale_qn: f64 },
    LocalMaxima { scale_qn: f64 },
    Constant { step_qn: f64 },
    Lbdm { threshold: f64 },
}

impl SegmentationMethod {
    /// Builds a method from its name and the parameters given alongside it;
    /// a parameter that does not belong to the method is an error.
    pub fn from_parts(
        name: &str,
        scale_qn: Option<f64>,
        step_qn: Option<f64>,
        threshold: Option<f64>,
    ) -> Result<Self> {
        let stray = |what: &str| Err(Error::InvalidConfig(format!("{what} does not apply to segmentation `{name}`")));
        let missing = |what: &str| Error::InvalidConfig(format!("segmentation `{name}` needs {what}"));
        match name {
            "none" => match (scale_qn, step_qn, threshold) {
                (None, None, None) => Ok(SegmentationMethod::None),
                _ => stray("a segmentation parameter"),
            },
            "ws-zc" | "ws-max" => {
                if step_qn.is_some() {
                    return stray("--step-qn");
                }
                if threshold.is_some() {
                    return stray("--threshold");
                }
                let scale_qn = scale_qn.ok_or_else(|| missing("--seg-scale-qn"))?;
                Ok(if name == "ws-zc" {
                    SegmentationMethod::ZeroCrossing { scale_qn }
                } else {
                    SegmentationMethod::LocalMaxima { scale_qn }
                })
            }
            "const" => {
                if scale_qn.is_some() || threshold.is_some() {
                    return stray("a scale or threshold");
                }
                Ok(SegmentationMethod::Constant {
                    step_qn: step_qn.ok_or_else(|| missing("--step-qn"))?,
                })
            }
            "lbdm" => {
                if scale_qn.is_some() || step_qn.is_some() {
                    return stray("a scale or step");
                }
                Ok(SegmentationMethod::Lbdm {
                    threshold: threshold.ok_or_else(|| missing("--threshold"))?,
                })
            }
            other => Err(Error::InvalidConfig(format!("unknown segmentation `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SegmentationMethod::None => "none",
            SegmentationMethod::ZeroCrossing { .. } => "ws-zc",
            SegmentationMethod::LocalMaxima { .. } => "ws-max",
            SegmentationMethod::Constant { .. } => "const",
            SegmentationMethod::Lbdm { .. } => "lbdm",
        }
    }

    pub fn param(&self) -> Option<f64> {
        match *self {
            SegmentationMethod::None => None,
            SegmentationMethod::ZeroCrossing { scale_qn } | SegmentationMethod::LocalMaxima { scale_qn } => {
                Some(scale_qn)
            }
            SegmentationMethod::Constant { step_qn } => Some(step_qn),
            SegmentationMethod::Lbdm { threshold } => Some(threshold),
        }
    }
}

/// Every parameter of a single experiment cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub representation: Representation,
    /// Scale of the wavelet representation when it is not tied to the
    /// segmentation scale.
    pub rep_scale_qn: f64,
    pub segmentation: SegmentationMethod,
    pub rest_policy: RestPolicy,
    /// Samples per quarter note.
    pub rate: u32,
    /// Resample whole melodies to this many samples instead of using `rate`.
    pub fixed_length: Option<usize>,
    /// Wavelet support in samples for fixed-length signals.
    pub rep_support_samples: usize,
    pub equalization: Equalization,
    pub metric: Metric,
    pub k: usize,
    /// Length of the classifier material taken from each work.
    pub prefix_qn: f64,
    pub contrapuntal: bool,
    /// Normalize over sounding samples only and keep rests at zero.
    pub keep_rests_in_normalization: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            representation: Representation::Wavelet,
            rep_scale_qn: 1.0,
            segmentation: SegmentationMethod::ZeroCrossing { scale_qn: 1.0 },
            rest_policy: RestPolicy::RepresentZero,
            rate: 8,
            fixed_length: None,
            rep_support_samples: 2,
            equalization: Equalization::ZeroPad,
            metric: Metric::CityBlock,
            k: 1,
            prefix_qn: 16.0,
            contrapuntal: false,
            keep_rests_in_normalization: false,
        }
    }
}

impl ExperimentConfig {
    pub fn rate(&self) -> Rate {
        Rate::from_integer(i64::from(self.rate))
    }

    pub fn validate(&self) -> Result<()> {
        if self.rate == 0 {
            return Err(Error::InvalidConfig("rate must be positive".into()));
        }
        if !(1..=5).contains(&self.k) {
            return Err(Error::InvalidConfig(format!("k = {} outside 1..5", self.k)));
        }
        if self.keep_rests_in_normalization && self.rest_policy != RestPolicy::RepresentZero {
            return Err(Error::InvalidConfig(
                "rest-preserving normalization needs rests represented as zeros".into(),
            ));
        }
        if let Some(n) = self.fixed_length {
            if n == 0 {
                return Err(Error::InvalidConfig("fixed length must be positive".into()));
            }
            if self.segmentation != SegmentationMethod::None {
                return Err(Error::InvalidConfig("fixed-length signals are classified unsegmented".into()));
            }
            if self.representation == Representation::Wavelet {
                WaveletScale::from_support(self.rep_support_samples)?;
            }
            return Ok(());
        }
        self.pipeline().map(|_| ())
    }

    pub(crate) fn pipeline(&self) -> Result<SpanPipeline> {
        let rate = self.rate();
        let representation = match self.representation {
            Representation::Pitch => None,
            Representation::Wavelet => Some(WaveletScale::from_qn(self.rep_scale_qn, rate)?),
        };
        let segmenter = match self.segmentation {
            SegmentationMethod::None => Segmenter::Whole,
            SegmentationMethod::ZeroCrossing { scale_qn } => Segmenter::ZeroCrossing(WaveletScale::from_qn(scale_qn, rate)?),
            SegmentationMethod::LocalMaxima { scale_qn } => Segmenter::LocalMaxima(WaveletScale::from_qn(scale_qn, rate)?),
            SegmentationMethod::Constant { step_qn } => {
                constant_boundaries(1, rate, step_qn)?;
                Segmenter::Constant(step_qn)
            }
            SegmentationMethod::Lbdm { threshold } => {
                if !(0.0..=1.0).contains(&threshold) {
                    return Err(Error::ThresholdOutOfRange(threshold));
                }
                Segmenter::Lbdm
            }
        };
        Ok(SpanPipeline {
            representation,
            segmenter,
            rate,
            keep_rests: self.keep_rests_in_normalization,
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Segmenter {
    Whole,
    ZeroCrossing(WaveletScale),
    LocalMaxima(WaveletScale),
    Constant(f64),
    Lbdm,
}

/// Representation, segmentation and normalization applied to one span of a
/// pitch signal.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SpanPipeline {
    representation: Option<WaveletScale>,
    segmenter: Segmenter,
    rate: Rate,
    keep_rests: bool,
}

impl SpanPipeline {
    pub(crate) fn needs_lbdm(&self) -> bool {
        matches!(self.segmenter, Segmenter::Lbdm)
    }

    /// Cuts `pitch` into representation segments. `lbdm` holds the note-level
    /// boundaries of this span when LBDM segmentation is selected.
    pub(crate) fn run(&self, pitch: &[f64], lbdm: Option<&BoundarySet>, source: SourceId) -> Result<Vec<Segment>> {
        let len = pitch.len();
        let rep = match self.representation {
            Some(scale) => haar_transform(pitch, scale)?,
            None => pitch.to_vec(),
        };
        let boundaries = match self.segmenter {
            Segmenter::Whole => BoundarySet::from_interior(len, []),
            Segmenter::ZeroCrossing(scale) => {
                if Some(scale) == self.representation {
                    zero_crossing_boundaries(&rep)?
                } else {
                    zero_crossing_boundaries(&haar_transform(pitch, scale)?)?
                }
            }
            Segmenter::LocalMaxima(scale) => {
                if Some(scale) == self.representation {
                    local_maxima_boundaries(&rep)?
                } else {
                    local_maxima_boundaries(&haar_transform(pitch, scale)?)?
                }
            }
            Segmenter::Constant(step_qn) => constant_boundaries(len, self.rate, step_qn)?,
            Segmenter::Lbdm => lbdm
                .cloned()
                .ok_or_else(|| Error::InvalidConfig("LBDM boundaries missing for span".into()))?,
        };
        let mut segments = cut_segments(&rep, &boundaries, source)?;
        if self.representation.is_none() {
            for seg in &mut segments {
                seg.values = if self.keep_rests {
                    mean_normalize_keep_rests(&seg.values)?
                } else {
                    mean_normalize(&seg.values)?
                };
            }
        }
        Ok(segments)
    }
}

/// Mean and sample standard deviation (n - 1 denominator).
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// One classified item, for re-scoring and inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub item_id: String,
    pub truth: String,
    pub predicted: String,
    pub nearest_distance: f64,
}

impl TraceRow {
    pub fn is_correct(&self) -> bool {
        self.truth == self.predicted
    }
}

/// Runs `f` on a dedicated pool of `jobs` threads, or on the global pool.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match jobs {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        _ => f(),
    }
}

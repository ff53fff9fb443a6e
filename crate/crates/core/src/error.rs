use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("not a standard MIDI file")]
    NotStandardMidi,
    #[error("SMPTE time division is not supported")]
    SmpteDivision,
    #[error("format-2 (sequential) MIDI files are not supported")]
    SequentialFormat,
    #[error("malformed MIDI data: {0}")]
    MalformedMidi(String),
    #[error("voice {0} has no notes")]
    EmptyVoice(String),
    #[error("note sequence cannot be encoded at division {0}: {1}")]
    NotEncodable(u16, String),

    #[error("sample rate must be positive")]
    InvalidRate,
    #[error("empty note sequence: no pitch to substitute for rests")]
    EmptySequence,
    #[error("note sequence has zero duration")]
    ZeroDuration,
    #[error("empty vector")]
    EmptyVector,

    #[error("wavelet support must be an even number of samples >= 2, got {0}")]
    InvalidSupport(String),

    #[error("invalid boundary set: {0}")]
    InvalidBoundaries(String),
    #[error("step of {0} samples is not a positive integer")]
    NonIntegralStep(f64),
    #[error("threshold {0} outside [0, 1]")]
    ThresholdOutOfRange(f64),
    #[error("segment of length {len} exceeds target length {target}")]
    SegmentTooLong { len: usize, target: usize },

    #[error("vector lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("empty classifier corpus")]
    EmptyCorpus,
    #[error("k must be at least 1")]
    InvalidK,
    #[error("no predictions to vote on")]
    NoPredictions,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("work {0} is not longer than the {1} qn exposition")]
    WorkTooShort(String, f64),
    #[error("corpus error: {0}")]
    Corpus(String),
    #[error("malformed CSV at line {line}: {msg}")]
    Csv { line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

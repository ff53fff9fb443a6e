//! Python bindings: melodies, pitch signals, Haar coefficients, boundaries,
//! kNN and the two experiment protocols.

use std::path::PathBuf;

use melowave::classifier::{knn_predict, LabeledCorpus, Metric};
use melowave::contrapuntal::VariationKind;
use melowave::experiments::{self, ExperimentConfig, Representation, SegmentationMethod, TraceRow};
use melowave::ingest::{self, NoteEvent, Qn, VoiceSelector};
use melowave::segmentation::{self, Equalization};
use melowave::signal::{self, Rate, RestPolicy};
use melowave::wavelet::{self, WaveletScale};
use num_rational::Ratio;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

fn err(e: melowave::Error) -> PyErr {
    match e {
        melowave::Error::Io { .. } => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = melowave::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

fn qn(x: f64) -> PyResult<Qn> {
    Ratio::approximate_float(x).ok_or_else(|| PyValueError::new_err(format!("{x} is not a representable time")))
}

fn rate(r: u32) -> Rate {
    Rate::from_integer(i64::from(r))
}

/// A monophonic melody with times in quarter notes.
#[pyclass(name = "NoteSequence", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyNoteSequence(ingest::NoteSequence);

#[pymethods]
impl PyNoteSequence {
    /// Builds a melody from `(onset_qn, duration_qn, pitch)` triples.
    #[new]
    #[pyo3(signature = (notes, total_duration=None))]
    fn new(notes: Vec<(f64, f64, u8)>, total_duration: Option<f64>) -> PyResult<Self> {
        let events = notes
            .into_iter()
            .map(|(o, d, p)| Ok(NoteEvent::new(qn(o)?, qn(d)?, p)))
            .collect::<PyResult<Vec<_>>>()?;
        let mut seq = ingest::NoteSequence::new(events);
        if let Some(t) = total_duration {
            seq = seq.with_total_duration(qn(t)?);
        }
        Ok(PyNoteSequence(seq))
    }

    /// `(onset_qn, duration_qn, pitch)` for every note.
    fn notes(&self) -> Vec<(f64, f64, u8)> {
        self.0.events().iter().map(|e| (to_f64(e.onset), to_f64(e.duration), e.pitch)).collect()
    }

    #[getter]
    fn total_duration(&self) -> f64 {
        to_f64(self.0.total_duration())
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("NoteSequence({} notes, {} qn)", self.0.len(), self.total_duration())
    }
}

fn to_f64(q: Qn) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// Reads one voice (`"t0"`, `"c1"`, ...) of a MIDI file; the first voice by default.
#[pyfunction]
#[pyo3(signature = (path, voice=None))]
fn read_midi(path: PathBuf, voice: Option<&str>) -> PyResult<PyNoteSequence> {
    let bytes = std::fs::read(&path).map_err(|e| PyOSError::new_err(format!("{}: {e}", path.display())))?;
    let score = ingest::parse_standard_midi(&bytes).map_err(err)?;
    let selector = match voice {
        Some(v) => parse::<VoiceSelector>(v)?,
        None => *score
            .voices()
            .first()
            .ok_or_else(|| PyValueError::new_err("file has no notes"))?,
    };
    ingest::extract_voice(&score, selector).map(PyNoteSequence).map_err(err)
}

/// Writes a melody as a format-0 MIDI file.
#[pyfunction]
#[pyo3(signature = (seq, path, division=480))]
fn write_midi(seq: &PyNoteSequence, path: PathBuf, division: u16) -> PyResult<()> {
    let bytes = ingest::write_standard_midi(&seq.0, division).map_err(err)?;
    std::fs::write(&path, bytes).map_err(|e| PyOSError::new_err(format!("{}: {e}", path.display())))
}

#[pyfunction]
#[pyo3(signature = (seq, rate=8, rests="represent"))]
fn pitch_signal(seq: &PyNoteSequence, rate: u32, rests: &str) -> PyResult<Vec<f64>> {
    Ok(signal::sample_pitch_signal(&seq.0, self::rate(rate), parse(rests)?)
        .map_err(err)?
        .into_samples())
}

#[pyfunction]
#[pyo3(signature = (seq, length, rests="represent"))]
fn resample(seq: &PyNoteSequence, length: usize, rests: &str) -> PyResult<Vec<f64>> {
    Ok(signal::resample_to_length(&seq.0, length, parse(rests)?)
        .map_err(err)?
        .into_samples())
}

#[pyfunction]
fn mean_normalize(values: Vec<f64>) -> PyResult<Vec<f64>> {
    signal::mean_normalize(&values).map_err(err)
}

/// Haar coefficients at every shift, for a scale in quarter notes.
#[pyfunction]
#[pyo3(signature = (values, scale_qn, rate=8))]
fn haar(values: Vec<f64>, scale_qn: f64, rate: u32) -> PyResult<Vec<f64>> {
    let scale = WaveletScale::from_qn(scale_qn, self::rate(rate)).map_err(err)?;
    wavelet::haar_transform(&values, scale).map_err(err)
}

/// Haar coefficients for an even support given in samples.
#[pyfunction]
fn haar_support(values: Vec<f64>, support: usize) -> PyResult<Vec<f64>> {
    let scale = WaveletScale::from_support(support).map_err(err)?;
    wavelet::haar_transform(&values, scale).map_err(err)
}

/// Absolute coefficients, one row per scale.
#[pyfunction]
#[pyo3(signature = (values, scales_qn, rate=8))]
fn scalogram(py: Python<'_>, values: Vec<f64>, scales_qn: Vec<f64>, rate: u32) -> PyResult<Vec<Vec<f64>>> {
    let scales = scales_qn
        .iter()
        .map(|&s| WaveletScale::from_qn(s, self::rate(rate)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    py.detach(|| wavelet::scalogram(&values, &scales)).map_err(err)
}

#[pyfunction]
fn zero_crossings(coefficients: Vec<f64>) -> PyResult<Vec<usize>> {
    Ok(segmentation::zero_crossing_boundaries(&coefficients).map_err(err)?.indices().to_vec())
}

#[pyfunction]
fn local_maxima(coefficients: Vec<f64>) -> PyResult<Vec<usize>> {
    Ok(segmentation::local_maxima_boundaries(&coefficients).map_err(err)?.indices().to_vec())
}

#[pyfunction]
fn constant_boundaries(length: usize, step: usize) -> PyResult<Vec<usize>> {
    Ok(segmentation::constant_boundaries_samples(length, step).map_err(err)?.indices().to_vec())
}

#[pyfunction]
#[pyo3(signature = (seq, threshold, rate=8))]
fn lbdm_boundaries(seq: &PyNoteSequence, threshold: f64, rate: u32) -> PyResult<Vec<usize>> {
    Ok(segmentation::lbdm_boundaries(&seq.0, threshold, self::rate(rate))
        .map_err(err)?
        .indices()
        .to_vec())
}

/// Boundary strength of each transition between consecutive notes.
#[pyfunction]
fn lbdm_strengths(seq: &PyNoteSequence) -> Vec<f64> {
    segmentation::lbdm_strengths(&seq.0)
}

/// `"P"`, `"I"`, `"R"` or `"RI"` applied to a signal.
#[pyfunction]
fn variation(values: Vec<f64>, kind: &str) -> PyResult<Vec<f64>> {
    let kind = match kind {
        "P" => Some(VariationKind::Prime),
        "I" => Some(VariationKind::Inversion),
        "R" => Some(VariationKind::Retrograde),
        "RI" => Some(VariationKind::RetrogradeInversion),
        _ => None,
    }
    .ok_or_else(|| PyValueError::new_err(format!("unknown variation `{kind}`")))?;
    kind.apply(&values).map_err(err)
}

/// Label of `query` among `rows`, and the distance to the nearest row of that label.
#[pyfunction]
#[pyo3(signature = (rows, labels, query, k=1, metric="euclidean"))]
fn knn(rows: Vec<Vec<f64>>, labels: Vec<usize>, query: Vec<f64>, k: usize, metric: &str) -> PyResult<(usize, f64)> {
    if rows.len() != labels.len() {
        return Err(PyValueError::new_err("rows and labels differ in length"));
    }
    let width = rows.first().map_or(0, Vec::len);
    let mut corpus = LabeledCorpus::new(width);
    for (i, (r, &l)) in rows.iter().zip(&labels).enumerate() {
        corpus.push(r, l, i).map_err(err)?;
    }
    let p = knn_predict(&query, &corpus, k, parse::<Metric>(metric)?).map_err(err)?;
    Ok((p.label, p.winning_distance()))
}

/// Songs labeled with tune families.
#[pyclass(name = "FolkCorpus", frozen)]
struct PyFolkCorpus(experiments::FolkCorpus);

#[pymethods]
impl PyFolkCorpus {
    /// A seeded synthetic corpus of tune families.
    #[staticmethod]
    #[pyo3(signature = (seed, families=26, min_variants=10, max_variants=15))]
    fn synthetic(seed: u64, families: usize, min_variants: usize, max_variants: usize) -> PyResult<Self> {
        let params = experiments::TuneFamilyParams {
            families,
            min_variants,
            max_variants,
            ..Default::default()
        };
        experiments::generate_tune_families(&params, seed).map(PyFolkCorpus).map_err(err)
    }

    /// Songs in `directory` listed in a `filename,family` manifest.
    #[staticmethod]
    fn load(directory: PathBuf, labels: PathBuf) -> PyResult<Self> {
        experiments::load_folk_corpus(&directory, &labels).map(PyFolkCorpus).map_err(err)
    }

    #[getter]
    fn families(&self) -> Vec<String> {
        self.0.families.clone()
    }

    /// `(id, family, melody)` for every song.
    fn songs(&self) -> Vec<(String, String, PyNoteSequence)> {
        self.0
            .songs
            .iter()
            .map(|s| (s.id.clone(), self.0.families[s.family].clone(), PyNoteSequence(s.melody.clone())))
            .collect()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

type Trace = Vec<(String, String, String, f64)>;

fn trace_tuples(rows: Vec<TraceRow>) -> Trace {
    rows.into_iter()
        .map(|r| (r.item_id, r.truth, r.predicted, r.nearest_distance))
        .collect()
}

fn segmentation_of(seg: &str, scale_qn: Option<f64>, step_qn: Option<f64>, threshold: Option<f64>) -> PyResult<SegmentationMethod> {
    SegmentationMethod::from_parts(seg, scale_qn, step_qn, threshold).map_err(err)
}

/// Leave-one-out tune-family accuracy and the per-song trace.
///
/// With `seg="none"` whole melodies are resampled to `length` samples and the
/// wavelet representation uses `support` samples.
#[pyfunction]
#[pyo3(signature = (
    corpus, rep="wr", seg="ws-max", scale_qn=Some(1.0), threshold=None, step_qn=None,
    equalize="pad", metric="cityblock", k=1, rests="remove", rate=8, length=1024, support=16,
))]
#[allow(clippy::too_many_arguments)]
fn run_folk(
    py: Python<'_>,
    corpus: &PyFolkCorpus,
    rep: &str,
    seg: &str,
    scale_qn: Option<f64>,
    threshold: Option<f64>,
    step_qn: Option<f64>,
    equalize: &str,
    metric: &str,
    k: usize,
    rests: &str,
    rate: u32,
    length: usize,
    support: usize,
) -> PyResult<(f64, Trace)> {
    let representation: Representation = parse(rep)?;
    let rest_policy: RestPolicy = parse(rests)?;
    let metric: Metric = parse(metric)?;
    let report = if seg == "none" {
        let config = ExperimentConfig {
            representation,
            segmentation: SegmentationMethod::None,
            rest_policy,
            fixed_length: Some(length),
            rep_support_samples: support,
            metric,
            k,
            ..Default::default()
        };
        py.detach(|| experiments::run_folk_unsegmented(&corpus.0, &config))
    } else {
        let ws = seg.starts_with("ws-");
        let config = ExperimentConfig {
            representation,
            rep_scale_qn: if ws { scale_qn.unwrap_or(1.0) } else { 1.0 },
            segmentation: segmentation_of(seg, scale_qn.filter(|_| ws), step_qn, threshold)?,
            rest_policy,
            rate,
            equalization: parse::<Equalization>(equalize)?,
            metric,
            k,
            ..Default::default()
        };
        py.detach(|| experiments::run_folk_segmented(&corpus.0, &config))
    }
    .map_err(err)?;
    Ok((report.accuracy, trace_tuples(report.trace)))
}

/// Section-of-origin accuracies, their mean and sample standard deviation,
/// for a directory of two-part works.
#[pyfunction]
#[pyo3(signature = (
    corpus, rep="wr", seg="ws-zc", scale_qn=Some(1.0), threshold=None, step_qn=None,
    equalize="pad", metric="cityblock", rests="represent", prefix_qn=16.0, contrapuntal=false,
))]
#[allow(clippy::too_many_arguments)]
fn run_bach(
    py: Python<'_>,
    corpus: PathBuf,
    rep: &str,
    seg: &str,
    scale_qn: Option<f64>,
    threshold: Option<f64>,
    step_qn: Option<f64>,
    equalize: &str,
    metric: &str,
    rests: &str,
    prefix_qn: f64,
    contrapuntal: bool,
) -> PyResult<(Vec<f64>, f64, f64)> {
    let ws = seg.starts_with("ws-");
    let config = ExperimentConfig {
        representation: parse(rep)?,
        segmentation: segmentation_of(seg, scale_qn.filter(|_| ws), step_qn, threshold)?,
        equalization: parse(equalize)?,
        metric: parse(metric)?,
        rest_policy: parse(rests)?,
        prefix_qn,
        contrapuntal,
        ..Default::default()
    };
    let works = experiments::load_bach_corpus(&corpus, None).map_err(err)?;
    let r = py.detach(|| experiments::run_bach_experiment(&works, &config)).map_err(err)?;
    Ok((r.section_accuracies, r.mean, r.std))
}

#[pymodule]
fn pymelowave(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNoteSequence>()?;
    m.add_class::<PyFolkCorpus>()?;
    m.add_function(wrap_pyfunction!(read_midi, m)?)?;
    m.add_function(wrap_pyfunction!(write_midi, m)?)?;
    m.add_function(wrap_pyfunction!(pitch_signal, m)?)?;
    m.add_function(wrap_pyfunction!(resample, m)?)?;
    m.add_function(wrap_pyfunction!(mean_normalize, m)?)?;
    m.add_function(wrap_pyfunction!(haar, m)?)?;
    m.add_function(wrap_pyfunction!(haar_support, m)?)?;
    m.add_function(wrap_pyfunction!(scalogram, m)?)?;
    m.add_function(wrap_pyfunction!(zero_crossings, m)?)?;
    m.add_function(wrap_pyfunction!(local_maxima, m)?)?;
    m.add_function(wrap_pyfunction!(constant_boundaries, m)?)?;
    m.add_function(wrap_pyfunction!(lbdm_boundaries, m)?)?;
    m.add_function(wrap_pyfunction!(lbdm_strengths, m)?)?;
    m.add_function(wrap_pyfunction!(variation, m)?)?;
    m.add_function(wrap_pyfunction!(knn, m)?)?;
    m.add_function(wrap_pyfunction!(run_folk, m)?)?;
    m.add_function(wrap_pyfunction!(run_bach, m)?)?;
    Ok(())
}

//! Tune-family classification with leave-one-out cross validation.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use super::{ExperimentConfig, Representation, SegmentationMethod, TraceRow};
use crate::classifier::{nearest_neighbors, vote, LabeledCorpus, Metric, Neighbor, Prediction};
use crate::error::{Error, Result};
use crate::ingest::{extract_voice, parse_standard_midi, NoteSequence};
use crate::segmentation::{equalize, lbdm_boundaries, max_segment_len, Equalization, Segment, SourceId};
use crate::signal::{mean_normalize, mean_normalize_keep_rests, resample_to_length, sample_pitch_signal, RestPolicy};
use crate::wavelet::{haar_transform, WaveletScale};

/// Length of whole-melody signals.
pub const FIXED_LENGTH: usize = 1 << 10;

#[derive(Debug, Clone, PartialEq)]
pub struct FolkSong {
    pub id: String,
    pub family: usize,
    pub melody: NoteSequence,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FolkCorpus {
    pub songs: Vec<FolkSong>,
    pub families: Vec<String>,
}

impl FolkCorpus {
    /// Adds a song, registering its family name on first use.
    pub fn push(&mut self, id: impl Into<String>, family: &str, melody: NoteSequence) {
        let family = match self.families.iter().position(|f| f == family) {
            Some(i) => i,
            None => {
                self.families.push(family.to_string());
                self.families.len() - 1
            }
        };
        self.songs.push(FolkSong {
            id: id.into(),
            family,
            melody,
        });
    }

    pub fn len(&self) -> usize {
        self.songs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.songs.is_empty()
    }
}

/// Loads the songs listed in a `filename,family` manifest from `dir`. Each
/// song is the first voice of its MIDI file.
pub fn load_folk_corpus(dir: &Path, manifest: &Path) -> Result<FolkCorpus> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(manifest)
        .map_err(|e| csv_error(manifest, e))?;
    let mut corpus = FolkCorpus::default();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(manifest, e))?;
        let (Some(file), Some(family)) = (record.get(0), record.get(1)) else {
            return Err(Error::Csv {
                line: line + 2,
                msg: "expected `filename,family`".into(),
            });
        };
        let path = dir.join(file);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let score = parse_standard_midi(&bytes)?;
        let voice = *score
            .voices()
            .first()
            .ok_or_else(|| Error::Corpus(format!("{file}: no notes")))?;
        corpus.push(file, family, extract_voice(&score, voice)?);
    }
    if corpus.is_empty() {
        return Err(Error::Corpus(format!("{} lists no songs", manifest.display())));
    }
    Ok(corpus)
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    let msg = e.to_string();
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        _ => Error::Csv { line, msg },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FolkReport {
    pub accuracy: f64,
    pub trace: Vec<TraceRow>,
}

fn report(corpus: &FolkCorpus, outcomes: &[(usize, f64)]) -> FolkReport {
    let trace: Vec<TraceRow> = corpus
        .songs
        .iter()
        .zip(outcomes)
        .map(|(song, &(predicted, distance))| TraceRow {
            item_id: song.id.clone(),
            truth: corpus.families[song.family].clone(),
            predicted: corpus.families[predicted].clone(),
            nearest_distance: distance,
        })
        .collect();
    let correct = corpus
        .songs
        .iter()
        .zip(outcomes)
        .filter(|(s, o)| s.family == o.0)
        .count();
    FolkReport {
        accuracy: correct as f64 / corpus.len() as f64,
        trace,
    }
}

/// Whole melodies resampled to a fixed length, classified against all other
/// songs.
pub fn run_folk_unsegmented(corpus: &FolkCorpus, config: &ExperimentConfig) -> Result<FolkReport> {
    let config = ExperimentConfig {
        fixed_length: Some(config.fixed_length.unwrap_or(FIXED_LENGTH)),
        segmentation: SegmentationMethod::None,
        ..config.clone()
    };
    config.validate()?;
    if corpus.len() < 2 {
        return Err(Error::Corpus("leave-one-out needs at least two songs".into()));
    }
    let n = config.fixed_length.unwrap_or(FIXED_LENGTH);
    let scale = match config.representation {
        Representation::Wavelet => Some(WaveletScale::from_support(config.rep_support_samples)?),
        Representation::Pitch => None,
    };
    let vectors = corpus
        .songs
        .par_iter()
        .map(|song| {
            let signal = resample_to_length(&song.melody, n, config.rest_policy)?;
            match scale {
                Some(s) => haar_transform(signal.samples(), s),
                None if config.keep_rests_in_normalization => mean_normalize_keep_rests(signal.samples()),
                None => mean_normalize(signal.samples()),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut classifier = LabeledCorpus::new(n);
    for (i, (v, song)) in vectors.iter().zip(&corpus.songs).enumerate() {
        classifier.push(v, song.family, i)?;
    }
    let outcomes = vectors
        .par_iter()
        .enumerate()
        .map(|(i, v)| {
            let neighbors = nearest_neighbors(v, &classifier, config.k, config.metric, Some(i))?;
            let p = Prediction::from_neighbors(neighbors, config.k)?;
            Ok((p.label, p.winning_distance()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(report(corpus, &outcomes))
}

/// Segments of every song, labeled with the family; `source.item` is the song index.
fn song_segments(corpus: &FolkCorpus, config: &ExperimentConfig) -> Result<Vec<Vec<Segment>>> {
    config.validate()?;
    let pipeline = config.pipeline()?;
    corpus
        .songs
        .par_iter()
        .enumerate()
        .map(|(item, song)| {
            let signal = sample_pitch_signal(&song.melody, config.rate(), config.rest_policy)?;
            let lbdm = match config.segmentation {
                SegmentationMethod::Lbdm { threshold } => Some(lbdm_boundaries(&song.melody, threshold, config.rate())?),
                _ => None,
            };
            let source = SourceId { item, ..SourceId::default() };
            let mut segs = pipeline.run(signal.samples(), lbdm.as_ref(), source)?;
            assert!(!segs.is_empty(), "default boundaries always give a segment");
            for s in &mut segs {
                s.label = Some(song.family);
            }
            Ok(segs)
        })
        .collect()
}

/// Leave-one-out over songs for every `k` in `ks` at once.
fn loo_segmented(
    corpus: &FolkCorpus,
    segments: &[Vec<Segment>],
    equalization: Equalization,
    metric: Metric,
    ks: &[usize],
) -> Result<Vec<FolkReport>> {
    let kmax = ks.iter().copied().max().ok_or(Error::InvalidK)?;
    if ks.contains(&0) {
        return Err(Error::InvalidK);
    }
    let flat: Vec<Segment> = segments.iter().flatten().cloned().collect();
    let target = max_segment_len(&flat);
    let classifier = LabeledCorpus::from_matrix(&equalize(&flat, equalization, Some(target))?)?;

    // per song: (predicted family, distance) for each k
    let per_song: Vec<Vec<(usize, f64)>> = segments
        .par_iter()
        .enumerate()
        .map(|(song, segs)| {
            let queries = equalize(segs, equalization, Some(target))?;
            let neighbor_lists: Vec<Vec<Neighbor>> = queries
                .iter_rows()
                .map(|q| nearest_neighbors(q, &classifier, kmax, metric, Some(song)))
                .collect::<Result<_>>()?;
            debug_assert!(neighbor_lists
                .iter()
                .flatten()
                .all(|n| classifier.group(n.row) != song));
            ks.iter()
                .map(|&k| {
                    let predictions = neighbor_lists
                        .iter()
                        .map(|n| Prediction::from_neighbors(n.clone(), k))
                        .collect::<Result<Vec<_>>>()?;
                    let family = vote(&predictions)?;
                    let distance = predictions
                        .iter()
                        .filter(|p| p.label == family)
                        .map(Prediction::winning_distance)
                        .fold(f64::INFINITY, f64::min);
                    Ok((family, distance))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    Ok((0..ks.len())
        .map(|ki| {
            let outcomes: Vec<(usize, f64)> = per_song.iter().map(|o| o[ki]).collect();
            report(corpus, &outcomes)
        })
        .collect())
}

/// Songs cut into segments; each held-out song is labeled by a vote over its
/// segments, classified against the segments of all other songs.
pub fn run_folk_segmented(corpus: &FolkCorpus, config: &ExperimentConfig) -> Result<FolkReport> {
    if config.segmentation == SegmentationMethod::None || config.fixed_length.is_some() {
        return Err(Error::InvalidConfig("segmented run needs a segmentation method and a sample rate".into()));
    }
    if corpus.len() < 2 {
        return Err(Error::Corpus("leave-one-out needs at least two songs".into()));
    }
    let segments = song_segments(corpus, config)?;
    let mut reports = loo_segmented(corpus, &segments, config.equalization, config.metric, &[config.k])?;
    Ok(reports.remove(0))
}

/// The parameter space of the segmented folk experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpace {
    pub representations: Vec<Representation>,
    /// Local-maxima segmentation scales; wavelet-represented cells use the
    /// same scale for the representation.
    pub ws_scales_qn: Vec<f64>,
    pub lbdm_thresholds: Vec<f64>,
    pub equalizations: Vec<Equalization>,
    pub metrics: Vec<Metric>,
    pub ks: Vec<usize>,
    /// Wavelet representation scale for LBDM-segmented cells.
    pub lbdm_rep_scale_qn: f64,
    pub rate: u32,
    pub rest_policy: RestPolicy,
}

impl Default for GridSpace {
    fn default() -> Self {
        GridSpace {
            representations: vec![Representation::Wavelet, Representation::Pitch],
            ws_scales_qn: (0..8).map(|i| f64::from(1u32 << i)).collect(),
            lbdm_thresholds: (1..=8).map(|i| f64::from(i) / 10.0).collect(),
            equalizations: vec![Equalization::ZeroPad, Equalization::Interpolate],
            metrics: vec![Metric::CityBlock, Metric::Euclidean],
            ks: (1..=5).collect(),
            lbdm_rep_scale_qn: 1.0,
            rate: 8,
            rest_policy: RestPolicy::Remove,
        }
    }
}

impl GridSpace {
    pub fn cell_count(&self) -> usize {
        self.representations.len()
            * (self.ws_scales_qn.len() + self.lbdm_thresholds.len())
            * self.equalizations.len()
            * self.metrics.len()
            * self.ks.len()
    }

    fn segmentations(&self) -> Vec<SegmentationMethod> {
        self.ws_scales_qn
            .iter()
            .map(|&scale_qn| SegmentationMethod::LocalMaxima { scale_qn })
            .chain(self.lbdm_thresholds.iter().map(|&threshold| SegmentationMethod::Lbdm { threshold }))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub representation: Representation,
    pub segmentation: SegmentationMethod,
    pub equalization: Equalization,
    pub metric: Metric,
    pub k: usize,
    /// Accuracy, or the error that stopped this cell.
    pub accuracy: std::result::Result<f64, String>,
    pub trace: Vec<TraceRow>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GridReport {
    pub cells: Vec<GridCell>,
}

impl GridReport {
    pub fn find(
        &self,
        representation: Representation,
        segmentation: SegmentationMethod,
        equalization: Equalization,
        metric: Metric,
        k: usize,
    ) -> Option<&GridCell> {
        self.cells.iter().find(|c| {
            c.representation == representation
                && c.segmentation == segmentation
                && c.equalization == equalization
                && c.metric == metric
                && c.k == k
        })
    }
}

/// Evaluates every cell of `space`. Cells are emitted in a fixed order:
/// representation, segmentation, equalization, metric, k.
pub fn grid_search(corpus: &FolkCorpus, space: &GridSpace) -> GridReport {
    let mut cells = Vec::with_capacity(space.cell_count());
    for &representation in &space.representations {
        for segmentation in space.segmentations() {
            let rep_scale_qn = match segmentation {
                SegmentationMethod::LocalMaxima { scale_qn } => scale_qn,
                _ => space.lbdm_rep_scale_qn,
            };
            let config = ExperimentConfig {
                representation,
                rep_scale_qn,
                segmentation,
                rest_policy: space.rest_policy,
                rate: space.rate,
                fixed_length: None,
                ..ExperimentConfig::default()
            };
            let segments = if corpus.len() < 2 {
                Err(Error::Corpus("leave-one-out needs at least two songs".into()))
            } else {
                song_segments(corpus, &config)
            };
            for &equalization in &space.equalizations {
                for &metric in &space.metrics {
                    let reports = segments
                        .as_ref()
                        .map_err(|e| e.to_string())
                        .and_then(|s| loo_segmented(corpus, s, equalization, metric, &space.ks).map_err(|e| e.to_string()));
                    for (ki, &k) in space.ks.iter().enumerate() {
                        let (accuracy, trace) = match &reports {
                            Ok(r) => (Ok(r[ki].accuracy), r[ki].trace.clone()),
                            Err(e) => (Err(e.clone()), Vec::new()),
                        };
                        cells.push(GridCell {
                            representation,
                            segmentation,
                            equalization,
                            metric,
                            k,
                            accuracy,
                            trace,
                        });
                    }
                }
            }
        }
    }
    GridReport { cells }
}

/// Family counts, for summaries.
pub fn family_sizes(corpus: &FolkCorpus) -> HashMap<usize, usize> {
    let mut sizes = HashMap::new();
    for s in &corpus.songs {
        *sizes.entry(s.family).or_insert(0) += 1;
    }
    sizes
}

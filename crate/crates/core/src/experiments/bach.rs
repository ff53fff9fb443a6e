//! Parent-work identification for sections of two-part works.
//!
//! Classifier material is the opening of every part (4, 8 or 16 qn); the
//! music after a fixed 16 qn exposition is split into three sections of equal
//! sample count. Each section's segments from both parts are classified by
//! kNN and the section takes the majority work.

use std::fs;
use std::ops::Range;
use std::path::Path;

use rayon::prelude::*;

use super::{mean_and_std, ExperimentConfig, SpanPipeline, TraceRow};
use crate::classifier::{nearest_neighbors, vote_by, LabeledCorpus, Prediction};
use crate::contrapuntal::VariationKind;
use crate::error::{Error, Result};
use crate::ingest::{extract_voice, parse_standard_midi, NoteSequence, ScoreModel, VoiceSelector};
use crate::segmentation::{equalize, lbdm_boundaries, max_segment_len, BoundarySet, Segment, SourceId};
use crate::signal::{qn_to_samples, sample_pitch_signal};

/// Length of the exposition; test sections start after it.
pub const EXPOSITION_QN: f64 = 16.0;
pub const SECTION_COUNT: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct BachWork {
    pub name: String,
    /// Monophonic parts sharing one total duration.
    pub parts: Vec<NoteSequence>,
}

impl BachWork {
    pub fn from_score(name: impl Into<String>, score: &ScoreModel, voices: Option<&[VoiceSelector]>) -> Result<Self> {
        let name = name.into();
        let selectors: Vec<VoiceSelector> = match voices {
            Some(v) => v.to_vec(),
            None => score.voices().into_iter().take(2).collect(),
        };
        if selectors.len() < 2 {
            return Err(Error::Corpus(format!("{name}: expected two parts, found {}", selectors.len())));
        }
        let parts = selectors
            .iter()
            .map(|&s| extract_voice(score, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(BachWork::from_parts(name, parts))
    }

    pub fn from_parts(name: impl Into<String>, parts: Vec<NoteSequence>) -> Self {
        let total = parts.iter().map(|p| p.total_duration()).max().unwrap_or_default();
        BachWork {
            name: name.into(),
            parts: parts.into_iter().map(|p| p.with_total_duration(total)).collect(),
        }
    }
}

/// Reads every `.mid`/`.midi` file of `dir` in file-name order; each file is one work.
pub fn load_bach_corpus(dir: &Path, voices: Option<&[VoiceSelector]>) -> Result<Vec<BachWork>> {
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| e.eq_ignore_ascii_case("mid") || e.eq_ignore_ascii_case("midi"))
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Corpus(format!("no MIDI files in {}", dir.display())));
    }
    paths
        .iter()
        .map(|p| {
            let bytes = fs::read(p).map_err(|e| Error::io(p, e))?;
            let score = parse_standard_midi(&bytes)?;
            let name = p.file_stem().and_then(|s| s.to_str()).unwrap_or("work").to_string();
            BachWork::from_score(name, &score, voices)
        })
        .collect()
}

/// The three test spans of a part of `len` samples at `rate` samples per qn.
/// The remainder of the division goes to the last section.
pub fn split_bach_sections(len: usize, rate: u32) -> Result<[Range<usize>; SECTION_COUNT]> {
    let start = (EXPOSITION_QN * f64::from(rate)) as usize;
    if len <= start || len - start < SECTION_COUNT {
        return Err(Error::WorkTooShort(format!("{len} samples"), EXPOSITION_QN));
    }
    let base = (len - start) / SECTION_COUNT;
    Ok([
        start..start + base,
        start + base..start + 2 * base,
        start + 2 * base..len,
    ])
}

struct PreparedPart {
    signal: Vec<f64>,
    lbdm: Option<BoundarySet>,
}

fn prepare(works: &[BachWork], config: &ExperimentConfig, pipeline: &SpanPipeline) -> Result<Vec<Vec<PreparedPart>>> {
    let threshold = match config.segmentation {
        super::SegmentationMethod::Lbdm { threshold } => Some(threshold),
        _ => None,
    };
    works
        .iter()
        .map(|work| {
            work.parts
                .iter()
                .map(|part| {
                    let signal = sample_pitch_signal(part, config.rate(), config.rest_policy)?.into_samples();
                    let lbdm = match threshold {
                        Some(t) if pipeline.needs_lbdm() => Some(lbdm_boundaries(part, t, config.rate())?),
                        _ => None,
                    };
                    Ok(PreparedPart { signal, lbdm })
                })
                .collect()
        })
        .collect()
}

fn variations(config: &ExperimentConfig) -> &'static [VariationKind] {
    if config.contrapuntal {
        &VariationKind::ALL
    } else {
        &VariationKind::ALL[..1]
    }
}

/// Class label of work `item` under variation `kind`.
fn class_label(config: &ExperimentConfig, item: usize, kind: VariationKind) -> usize {
    if config.contrapuntal {
        item * VariationKind::ALL.len() + kind.index()
    } else {
        item
    }
}

fn work_of_class(config: &ExperimentConfig, label: usize) -> usize {
    if config.contrapuntal {
        label / VariationKind::ALL.len()
    } else {
        label
    }
}

fn classifier_segments(
    prepared: &[Vec<PreparedPart>],
    config: &ExperimentConfig,
    pipeline: &SpanPipeline,
) -> Result<Vec<Segment>> {
    let prefix_len = qn_to_samples(config.prefix_qn, config.rate())
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidConfig(format!("prefix of {} qn", config.prefix_qn)))?;
    let mut out = Vec::new();
    for (item, parts) in prepared.iter().enumerate() {
        for (p, part) in parts.iter().enumerate() {
            let end = prefix_len.min(part.signal.len());
            let span = &part.signal[..end];
            let lbdm = part.lbdm.as_ref().map(|b| b.restrict(0, end));
            for &kind in variations(config) {
                let values = kind.apply(span)?;
                let boundaries = lbdm
                    .as_ref()
                    .map(|b| if kind.reverses_time() { b.reversed() } else { b.clone() });
                let source = SourceId {
                    item,
                    part: p,
                    section: kind.index(),
                };
                for mut seg in pipeline.run(&values, boundaries.as_ref(), source)? {
                    seg.label = Some(class_label(config, item, kind));
                    out.push(seg);
                }
            }
        }
    }
    Ok(out)
}

/// Segments of every test section, indexed `[work][section]`, both parts pooled.
fn test_segments(
    works: &[BachWork],
    prepared: &[Vec<PreparedPart>],
    config: &ExperimentConfig,
    pipeline: &SpanPipeline,
) -> Result<Vec<Vec<Vec<Segment>>>> {
    prepared
        .iter()
        .enumerate()
        .map(|(item, parts)| {
            let mut sections: Vec<Vec<Segment>> = vec![Vec::new(); SECTION_COUNT];
            for (p, part) in parts.iter().enumerate() {
                let ranges = split_bach_sections(part.signal.len(), config.rate)
                    .map_err(|_| Error::WorkTooShort(works[item].name.clone(), EXPOSITION_QN))?;
                for (s, range) in ranges.into_iter().enumerate() {
                    let lbdm = part.lbdm.as_ref().map(|b| b.restrict(range.start, range.end));
                    let source = SourceId { item, part: p, section: s };
                    let mut segs = pipeline.run(&part.signal[range], lbdm.as_ref(), source)?;
                    for seg in &mut segs {
                        seg.label = Some(item);
                    }
                    sections[s].extend(segs);
                }
            }
            Ok(sections)
        })
        .collect()
}

/// Classifier built from the openings of all works.
#[derive(Debug, Clone)]
pub struct BachClassifier {
    pub corpus: LabeledCorpus,
    pub class_count: usize,
}

pub fn build_bach_classifier(works: &[BachWork], config: &ExperimentConfig) -> Result<BachClassifier> {
    config.validate()?;
    let pipeline = config.pipeline()?;
    let prepared = prepare(works, config, &pipeline)?;
    let segments = classifier_segments(&prepared, config, &pipeline)?;
    let matrix = equalize(&segments, config.equalization, None)?;
    Ok(BachClassifier {
        corpus: LabeledCorpus::from_matrix(&matrix)?,
        class_count: works.len() * variations(config).len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BachReport {
    pub section_accuracies: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub trace: Vec<TraceRow>,
}

pub fn run_bach_experiment(works: &[BachWork], config: &ExperimentConfig) -> Result<BachReport> {
    config.validate()?;
    if config.fixed_length.is_some() {
        return Err(Error::InvalidConfig("the section experiment samples at a fixed rate".into()));
    }
    if works.is_empty() {
        return Err(Error::Corpus("no works".into()));
    }
    let pipeline = config.pipeline()?;
    let prepared = prepare(works, config, &pipeline)?;
    let train = classifier_segments(&prepared, config, &pipeline)?;
    let tests = test_segments(works, &prepared, config, &pipeline)?;

    let target = tests
        .iter()
        .flatten()
        .map(|s| max_segment_len(s))
        .chain(std::iter::once(max_segment_len(&train)))
        .max()
        .unwrap_or(0);
    let corpus = LabeledCorpus::from_matrix(&equalize(&train, config.equalization, Some(target))?)?;

    let cells: Vec<(usize, usize)> = (0..works.len())
        .flat_map(|i| (0..SECTION_COUNT).map(move |s| (i, s)))
        .collect();
    let outcomes: Vec<(usize, f64)> = cells
        .par_iter()
        .map(|&(i, s)| {
            let segments = &tests[i][s];
            let queries = equalize(segments, config.equalization, Some(target))?;
            let predictions = queries
                .iter_rows()
                .map(|q| {
                    let neighbors = nearest_neighbors(q, &corpus, config.k, config.metric, None)?;
                    Prediction::from_neighbors(neighbors, config.k)
                })
                .collect::<Result<Vec<_>>>()?;
            let winner = vote_by(&predictions, |l| work_of_class(config, l))?;
            let nearest = predictions
                .iter()
                .filter(|p| work_of_class(config, p.label) == winner)
                .map(Prediction::winning_distance)
                .fold(f64::INFINITY, f64::min);
            Ok((winner, nearest))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut correct = [0usize; SECTION_COUNT];
    let mut trace = Vec::with_capacity(cells.len());
    for (&(i, s), &(winner, nearest)) in cells.iter().zip(&outcomes) {
        if winner == i {
            correct[s] += 1;
        }
        trace.push(TraceRow {
            item_id: format!("{}:section{}", works[i].name, s + 1),
            truth: works[i].name.clone(),
            predicted: works[winner].name.clone(),
            nearest_distance: nearest,
        });
    }
    let section_accuracies: Vec<f64> = correct.iter().map(|&c| c as f64 / works.len() as f64).collect();
    let (mean, std) = mean_and_std(&section_accuracies);
    Ok(BachReport {
        section_accuracies,
        mean,
        std,
        trace,
    })
}

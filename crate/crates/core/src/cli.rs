//! The `melowave` command line.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::classifier::{knn_predict, LabeledCorpus, Metric};
use crate::contrapuntal::VariationKind;
use crate::error::{Error, Result};
use crate::experiments::folk::csv_error;
use crate::experiments::report::{write_bach_report, write_folk_report, write_grid_report, write_grid_trace, write_trace};
use crate::experiments::{
    generate_tune_families, grid_search, load_bach_corpus, load_folk_corpus, run_bach_experiment,
    run_folk_segmented, run_folk_unsegmented, with_jobs, ExperimentConfig, FolkCorpus, GridSpace, Representation,
    SegmentationMethod, TuneFamilyParams,
};
use crate::ingest::{extract_voice, parse_standard_midi, write_standard_midi, NoteSequence, VoiceSelector};
use crate::segmentation::{
    constant_boundaries, cut_segments, lbdm_boundaries, local_maxima_boundaries, zero_crossing_boundaries,
    Equalization, SourceId,
};
use crate::signal::{resample_to_length, sample_pitch_signal, PitchSignal, Rate, RestPolicy};
use crate::wavelet::{haar_transform, scalogram, WaveletScale};

#[derive(Debug, Parser)]
#[command(name = "melowave", version, about = "Wavelet segmentation and kNN classification of symbolic melodies")]
#[command(args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the notes of one voice as `onset_qn,duration_qn,pitch_midi`.
    Ingest(IngestArgs),
    /// Sample one voice into a pitch signal.
    Signal(SignalArgs),
    /// Haar wavelet coefficients of a pitch signal.
    Cwt(CwtArgs),
    /// Boundary indices of a pitch signal.
    Segment(SegmentArgs),
    /// Prime, inversion, retrograde and retrograde inversion of a pitch signal.
    Variations(VariationsArgs),
    /// Label query vectors with k nearest neighbours.
    Classify(ClassifyArgs),
    /// Run a classification experiment.
    #[command(subcommand)]
    Exp(ExpCommand),
    /// Grid search over the folk experiment; same as `exp folk --grid`.
    Grid(FolkArgs),
    /// Write a seeded synthetic tune-family corpus as MIDI files plus a manifest.
    SynthFolk(SynthFolkArgs),
}

#[derive(Debug, Subcommand)]
enum ExpCommand {
    /// Identify the parent work of sections of two-part works.
    Bach(BachArgs),
    /// Tune-family classification with leave-one-out.
    Folk(FolkArgs),
}

#[derive(Debug, Args)]
struct Output {
    /// Write the result here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MidiInput {
    /// Standard MIDI file.
    input: PathBuf,
    /// Voice to read: `tN` for track N or `cN` for channel N. Defaults to the first voice.
    #[arg(long)]
    voice: Option<VoiceSelector>,
}

#[derive(Debug, Args)]
struct Sampling {
    /// Samples per quarter note.
    #[arg(long, default_value_t = 8)]
    rate: u32,
    /// Rest handling: `represent` (rests become 0) or `remove` (hold the neighbouring pitch).
    #[arg(long, default_value = "represent")]
    rests: RestPolicy,
}

#[derive(Debug, Args)]
struct IngestArgs {
    #[command(flatten)]
    input: MidiInput,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct SignalArgs {
    #[command(flatten)]
    input: MidiInput,
    #[command(flatten)]
    sampling: Sampling,
    /// Resample the whole melody to exactly N samples instead of using `--rate`.
    #[arg(long)]
    length: Option<usize>,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct CwtArgs {
    #[command(flatten)]
    input: MidiInput,
    #[command(flatten)]
    sampling: Sampling,
    /// Wavelet scale in quarter notes.
    #[arg(long, required_unless_present = "scalogram", conflicts_with = "scalogram")]
    scale_qn: Option<f64>,
    /// Emit absolute coefficients for several scales, one row per scale.
    #[arg(long, requires = "scales")]
    scalogram: bool,
    /// Comma-separated scales in quarter notes for `--scalogram`.
    #[arg(long, value_delimiter = ',')]
    scales: Vec<f64>,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct SegmentArgs {
    #[command(flatten)]
    input: MidiInput,
    #[command(flatten)]
    sampling: Sampling,
    /// `ws-zc`, `ws-max`, `const` or `lbdm`.
    #[arg(long)]
    method: String,
    /// Wavelet scale for `ws-zc` and `ws-max`.
    #[arg(long)]
    scale_qn: Option<f64>,
    /// Segment length for `const`.
    #[arg(long)]
    step_qn: Option<f64>,
    /// Boundary-strength threshold for `lbdm`.
    #[arg(long)]
    threshold: Option<f64>,
    /// Also write each segment as `segment_NNN.csv` into this directory.
    #[arg(long)]
    segments_dir: Option<PathBuf>,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct VariationsArgs {
    #[command(flatten)]
    input: MidiInput,
    #[command(flatten)]
    sampling: Sampling,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    /// Labeled vectors: a `label` column plus one numeric column per dimension.
    #[arg(long)]
    corpus: PathBuf,
    /// Query vectors with the same numeric columns; a `label` column is ignored.
    #[arg(long)]
    queries: PathBuf,
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// `euclidean` or `cityblock`.
    #[arg(long, default_value = "euclidean")]
    metric: Metric,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct Shared {
    /// Write per-item predictions (`item_id,true,predicted,nearest_distance`) here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, env = "MELOWAVE_JOBS")]
    jobs: Option<usize>,
    /// Key-value file (`key = value` per line) holding any of these flags; command-line flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct BachArgs {
    /// Directory with one MIDI file per work.
    #[arg(long)]
    corpus: PathBuf,
    /// Classifier material per part, in quarter notes.
    #[arg(long, default_value_t = 16.0)]
    prefix_qn: f64,
    /// `wr` (wavelet) or `vr` (pitch).
    #[arg(long, default_value = "wr")]
    rep: Representation,
    /// Wavelet representation scale.
    #[arg(long, default_value_t = 1.0)]
    rep_scale_qn: f64,
    /// `ws-zc`, `ws-max`, `const`, `lbdm` or `none`.
    #[arg(long, default_value = "ws-zc")]
    seg: String,
    /// Segmentation scale for `ws-zc`/`ws-max`; 1 when omitted.
    #[arg(long)]
    seg_scale_qn: Option<f64>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    step_qn: Option<f64>,
    #[arg(long, default_value = "cityblock")]
    metric: Metric,
    /// `pad` or `interpolate`.
    #[arg(long, default_value = "pad")]
    equalize: Equalization,
    #[arg(long, default_value = "represent")]
    rests: RestPolicy,
    /// Normalize pitch segments over sounding samples only, keeping rests at zero.
    #[arg(long)]
    keep_rests: bool,
    /// Add inversion, retrograde and retrograde-inversion classes.
    #[arg(long)]
    contrapuntal: bool,
    /// Comma-separated voices (`tN`/`cN`) forming the two parts.
    #[arg(long, value_delimiter = ',')]
    voices: Vec<VoiceSelector>,
    #[arg(long, default_value_t = 8)]
    rate: u32,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[command(flatten)]
    shared: Shared,
}

#[derive(Debug, Args)]
struct FolkArgs {
    /// Directory holding the songs listed in `--labels`.
    #[arg(long, requires = "labels", required_unless_present = "synthetic")]
    corpus: Option<PathBuf>,
    /// Manifest CSV with `filename,family` rows.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Use a generated tune-family corpus with this seed instead of `--corpus`.
    #[arg(long, conflicts_with = "corpus")]
    synthetic: Option<u64>,
    /// Classify whole melodies resampled to `--length` samples.
    #[arg(long, conflicts_with = "grid")]
    unsegmented: bool,
    /// Evaluate every cell of the parameter grid.
    #[arg(long)]
    grid: bool,
    #[arg(long, default_value = "wr")]
    rep: Representation,
    /// Wavelet representation scale; defaults to the segmentation scale for `ws-*`, else 1.
    #[arg(long)]
    rep_scale_qn: Option<f64>,
    /// Wavelet support in samples for `--unsegmented`.
    #[arg(long, default_value_t = 16)]
    rep_support: usize,
    /// Samples per melody for `--unsegmented`.
    #[arg(long, default_value_t = crate::experiments::folk::FIXED_LENGTH)]
    length: usize,
    /// `ws-max`, `ws-zc`, `const` or `lbdm`.
    #[arg(long, default_value = "ws-max")]
    seg: String,
    /// Segmentation scale for `ws-*`; 1 when omitted.
    #[arg(long)]
    seg_scale_qn: Option<f64>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    step_qn: Option<f64>,
    #[arg(long, default_value = "pad")]
    equalize: Equalization,
    #[arg(long, default_value = "cityblock")]
    metric: Metric,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value = "remove")]
    rests: RestPolicy,
    #[arg(long, default_value_t = 8)]
    rate: u32,
    /// Grid: comma-separated local-maxima scales in quarter notes.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0])]
    scales: Vec<f64>,
    /// Grid: comma-separated LBDM thresholds.
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8])]
    thresholds: Vec<f64>,
    /// Grid: comma-separated neighbour counts.
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 3, 4, 5])]
    ks: Vec<usize>,
    #[command(flatten)]
    shared: Shared,
}

#[derive(Debug, Args)]
struct SynthFolkArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory to create; receives one MIDI file per song and `labels.csv`.
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 26)]
    families: usize,
    #[arg(long, default_value_t = 10)]
    min_variants: usize,
    #[arg(long, default_value_t = 15)]
    max_variants: usize,
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match merge_config_file(argv) {
        Ok(a) => a,
        Err(e) => return fail(&e),
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let text = e.to_string();
            let line = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("melowave: {}", line.trim());
            return 2;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => fail(&e),
    }
}

fn fail(e: &Error) -> i32 {
    eprintln!("melowave: error: {e}");
    1
}

/// Splices `key = value` lines from a `--config` file in front of the
/// command-line flags so that later occurrences on the command line win.
fn merge_config_file(mut argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    let mut i = 1;
    while i < argv.len() {
        let arg = argv[i].to_string_lossy().into_owned();
        if arg == "--config" && i + 1 < argv.len() {
            path = Some(PathBuf::from(argv.remove(i + 1)));
            argv.remove(i);
        } else if let Some(p) = arg.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
            argv.remove(i);
        } else {
            i += 1;
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut injected = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::InvalidConfig(format!("{}:{}: expected `key = value`", path.display(), n + 1))
        })?;
        let key = key.trim().trim_start_matches("--");
        match value.trim() {
            "true" => injected.push(OsString::from(format!("--{key}"))),
            "false" => {}
            v => {
                injected.push(OsString::from(format!("--{key}")));
                injected.push(OsString::from(v));
            }
        }
    }
    let at = argv
        .iter()
        .skip(1)
        .position(|a| a.to_string_lossy().starts_with('-'))
        .map_or(argv.len(), |p| p + 1);
    argv.splice(at..at, injected);
    Ok(argv)
}

fn emit(out: &Output, bytes: &[u8]) -> Result<()> {
    match &out.output {
        Some(path) => fs::write(path, bytes).map_err(|e| Error::io(path, e)),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn read_voice(input: &MidiInput) -> Result<NoteSequence> {
    let bytes = fs::read(&input.input).map_err(|e| Error::io(&input.input, e))?;
    let score = parse_standard_midi(&bytes)?;
    for w in &score.warnings {
        eprintln!("melowave: warning: {}: {w}", input.input.display());
    }
    let voice = match input.voice {
        Some(v) => v,
        None => *score
            .voices()
            .first()
            .ok_or_else(|| Error::EmptyVoice(format!("in {}", input.input.display())))?,
    };
    extract_voice(&score, voice)
}

fn sampled(input: &MidiInput, sampling: &Sampling) -> Result<(NoteSequence, PitchSignal)> {
    let seq = read_voice(input)?;
    if sampling.rate == 0 {
        return Err(Error::InvalidRate);
    }
    let signal = sample_pitch_signal(&seq, Rate::from_integer(i64::from(sampling.rate)), sampling.rests)?;
    Ok((seq, signal))
}

fn index_value_csv(header: &str, values: &[f64]) -> String {
    let mut s = format!("{header}\n");
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(s, "{i},{v}");
    }
    s
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Ingest(a) => ingest(a),
        Command::Signal(a) => signal(a),
        Command::Cwt(a) => cwt(a),
        Command::Segment(a) => segment(a),
        Command::Variations(a) => variations(a),
        Command::Classify(a) => classify(a),
        Command::Exp(ExpCommand::Bach(a)) => bach(a),
        Command::Exp(ExpCommand::Folk(a)) => folk(a),
        Command::Grid(mut a) => {
            a.grid = true;
            folk(a)
        }
        Command::SynthFolk(a) => synth_folk(a),
    }
}

fn ingest(a: IngestArgs) -> Result<()> {
    use num_traits::ToPrimitive;
    let seq = read_voice(&a.input)?;
    let mut s = String::from("onset_qn,duration_qn,pitch_midi\n");
    for e in seq.events() {
        let onset = e.onset.to_f64().unwrap_or(f64::NAN);
        let duration = e.duration.to_f64().unwrap_or(f64::NAN);
        let _ = writeln!(s, "{onset},{duration},{}", e.pitch);
    }
    emit(&a.out, s.as_bytes())
}

fn signal(a: SignalArgs) -> Result<()> {
    let signal = match a.length {
        Some(n) => resample_to_length(&read_voice(&a.input)?, n, a.sampling.rests)?,
        None => sampled(&a.input, &a.sampling)?.1,
    };
    emit(&a.out, index_value_csv("index,value", signal.samples()).as_bytes())
}

fn cwt(a: CwtArgs) -> Result<()> {
    let (_, signal) = sampled(&a.input, &a.sampling)?;
    let rate = signal.rate();
    if let Some(scale_qn) = a.scale_qn {
        let coeffs = haar_transform(signal.samples(), WaveletScale::from_qn(scale_qn, rate)?)?;
        return emit(&a.out, index_value_csv("shift,coefficient", &coeffs).as_bytes());
    }
    let scales = a
        .scales
        .iter()
        .map(|&s| WaveletScale::from_qn(s, rate))
        .collect::<Result<Vec<_>>>()?;
    let rows = scalogram(signal.samples(), &scales)?;
    let mut s = String::from("scale_qn");
    for u in 0..signal.len() {
        let _ = write!(s, ",{u}");
    }
    s.push('\n');
    for (scale, row) in a.scales.iter().zip(rows) {
        let _ = write!(s, "{scale}");
        for v in row {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    emit(&a.out, s.as_bytes())
}

fn segment(a: SegmentArgs) -> Result<()> {
    let (seq, signal) = sampled(&a.input, &a.sampling)?;
    let rate = signal.rate();
    let method = SegmentationMethod::from_parts(&a.method, a.scale_qn, a.step_qn, a.threshold)?;
    let values = signal.samples();
    let boundaries = match method {
        SegmentationMethod::ZeroCrossing { scale_qn } => {
            zero_crossing_boundaries(&haar_transform(values, WaveletScale::from_qn(scale_qn, rate)?)?)?
        }
        SegmentationMethod::LocalMaxima { scale_qn } => {
            local_maxima_boundaries(&haar_transform(values, WaveletScale::from_qn(scale_qn, rate)?)?)?
        }
        SegmentationMethod::Constant { step_qn } => constant_boundaries(values.len(), rate, step_qn)?,
        SegmentationMethod::Lbdm { threshold } => lbdm_boundaries(&seq, threshold, rate)?,
        SegmentationMethod::None => {
            return Err(Error::InvalidConfig("`segment` needs a method other than `none`".into()))
        }
    };
    if let Some(dir) = &a.segments_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (i, seg) in cut_segments(values, &boundaries, SourceId::default())?.iter().enumerate() {
            let mut s = String::from("sample_index,value\n");
            for (j, v) in seg.values.iter().enumerate() {
                let _ = writeln!(s, "{},{v}", seg.start + j);
            }
            write_file(&dir.join(format!("segment_{i:03}.csv")), s.as_bytes())?;
        }
    }
    let mut s = String::from("boundary_sample_index\n");
    for b in boundaries.indices() {
        let _ = writeln!(s, "{b}");
    }
    emit(&a.out, s.as_bytes())
}

fn variations(a: VariationsArgs) -> Result<()> {
    let (_, signal) = sampled(&a.input, &a.sampling)?;
    let variants = VariationKind::ALL
        .iter()
        .map(|k| k.apply(signal.samples()))
        .collect::<Result<Vec<_>>>()?;
    let mut s = String::from("index,P,I,R,RI\n");
    for i in 0..signal.len() {
        let _ = write!(s, "{i}");
        for v in &variants {
            let _ = write!(s, ",{}", v[i]);
        }
        s.push('\n');
    }
    emit(&a.out, s.as_bytes())
}

type Vectors = (Vec<Vec<f64>>, Option<Vec<String>>);

/// Rows of a numeric CSV and, when present, the `label` column.
fn read_vectors(path: &Path) -> Result<Vectors> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let label_col = headers.iter().position(|h| h == "label");
    let mut rows = Vec::new();
    let mut labels = label_col.map(|_| Vec::new());
    for (n, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let mut row = Vec::with_capacity(record.len());
        for (c, field) in record.iter().enumerate() {
            if Some(c) == label_col {
                if let Some(l) = labels.as_mut() {
                    l.push(field.to_string());
                }
                continue;
            }
            row.push(field.parse::<f64>().map_err(|_| Error::Csv {
                line: n + 2,
                msg: format!("`{field}` is not a number"),
            })?);
        }
        rows.push(row);
    }
    Ok((rows, labels))
}

fn classify(a: ClassifyArgs) -> Result<()> {
    let (rows, labels) = read_vectors(&a.corpus)?;
    let labels = labels.ok_or_else(|| Error::Csv {
        line: 1,
        msg: format!("{} has no `label` column", a.corpus.display()),
    })?;
    let width = rows.first().map(Vec::len).ok_or(Error::EmptyCorpus)?;
    let mut names: Vec<String> = Vec::new();
    let mut corpus = LabeledCorpus::new(width);
    for (i, (row, label)) in rows.iter().zip(&labels).enumerate() {
        let id = match names.iter().position(|n| n == label) {
            Some(id) => id,
            None => {
                names.push(label.clone());
                names.len() - 1
            }
        };
        corpus.push(row, id, i)?;
    }
    let (queries, _) = read_vectors(&a.queries)?;
    let mut s = String::from("query_index,predicted_label,nearest_distance\n");
    for (i, q) in queries.iter().enumerate() {
        let p = knn_predict(q, &corpus, a.k, a.metric)?;
        let _ = writeln!(s, "{i},{},{}", names[p.label], p.winning_distance());
    }
    emit(&a.out, s.as_bytes())
}

fn ws_default(seg: &str, scale: Option<f64>) -> Option<f64> {
    match seg {
        "ws-zc" | "ws-max" => scale.or(Some(1.0)),
        _ => scale,
    }
}

fn bach(a: BachArgs) -> Result<()> {
    let segmentation =
        SegmentationMethod::from_parts(&a.seg, ws_default(&a.seg, a.seg_scale_qn), a.step_qn, a.threshold)?;
    let config = ExperimentConfig {
        representation: a.rep,
        rep_scale_qn: a.rep_scale_qn,
        segmentation,
        rest_policy: a.rests,
        rate: a.rate,
        fixed_length: None,
        equalization: a.equalize,
        metric: a.metric,
        k: a.k,
        prefix_qn: a.prefix_qn,
        contrapuntal: a.contrapuntal,
        keep_rests_in_normalization: a.keep_rests,
        ..ExperimentConfig::default()
    };
    config.validate()?;
    let voices = (!a.voices.is_empty()).then_some(a.voices.as_slice());
    let works = load_bach_corpus(&a.corpus, voices)?;
    let report = with_jobs(a.shared.jobs, || run_bach_experiment(&works, &config))?;
    let mut buf = Vec::new();
    write_bach_report(&mut buf, &report).map_err(|e| Error::io("<buffer>", e))?;
    if let Some(path) = &a.shared.trace {
        let mut t = Vec::new();
        write_trace(&mut t, &report.trace).map_err(|e| Error::io(path, e))?;
        write_file(path, &t)?;
    }
    emit(&a.shared.out, &buf)
}

fn folk_corpus(a: &FolkArgs) -> Result<FolkCorpus> {
    match (a.synthetic, &a.corpus, &a.labels) {
        (Some(seed), _, _) => generate_tune_families(&TuneFamilyParams::default(), seed),
        (None, Some(dir), Some(labels)) => load_folk_corpus(dir, labels),
        _ => Err(Error::InvalidConfig("give --corpus with --labels, or --synthetic".into())),
    }
}

fn folk(a: FolkArgs) -> Result<()> {
    let corpus = folk_corpus(&a)?;
    let mut buf = Vec::new();
    let mut trace = Vec::new();
    let buffer_err = |e| Error::io("<buffer>", e);
    if a.grid {
        let space = GridSpace {
            ws_scales_qn: a.scales.clone(),
            lbdm_thresholds: a.thresholds.clone(),
            ks: a.ks.clone(),
            lbdm_rep_scale_qn: a.rep_scale_qn.unwrap_or(1.0),
            rate: a.rate,
            rest_policy: a.rests,
            ..GridSpace::default()
        };
        let report = with_jobs(a.shared.jobs, || grid_search(&corpus, &space));
        write_grid_report(&mut buf, &report).map_err(buffer_err)?;
        write_grid_trace(&mut trace, &report).map_err(buffer_err)?;
    } else {
        let config = if a.unsegmented {
            ExperimentConfig {
                representation: a.rep,
                segmentation: SegmentationMethod::None,
                rest_policy: a.rests,
                fixed_length: Some(a.length),
                rep_support_samples: a.rep_support,
                metric: a.metric,
                k: a.k,
                ..ExperimentConfig::default()
            }
        } else {
            let scale = ws_default(&a.seg, a.seg_scale_qn);
            let segmentation = SegmentationMethod::from_parts(&a.seg, scale, a.step_qn, a.threshold)?;
            ExperimentConfig {
                representation: a.rep,
                rep_scale_qn: a.rep_scale_qn.or(scale).unwrap_or(1.0),
                segmentation,
                rest_policy: a.rests,
                rate: a.rate,
                equalization: a.equalize,
                metric: a.metric,
                k: a.k,
                ..ExperimentConfig::default()
            }
        };
        let report = with_jobs(a.shared.jobs, || {
            if a.unsegmented {
                run_folk_unsegmented(&corpus, &config)
            } else {
                run_folk_segmented(&corpus, &config)
            }
        })?;
        write_folk_report(&mut buf, &config, &report).map_err(buffer_err)?;
        write_trace(&mut trace, &report.trace).map_err(buffer_err)?;
    }
    if let Some(path) = &a.shared.trace {
        write_file(path, &trace)?;
    }
    emit(&a.shared.out, &buf)
}

fn synth_folk(a: SynthFolkArgs) -> Result<()> {
    let params = TuneFamilyParams {
        families: a.families,
        min_variants: a.min_variants,
        max_variants: a.max_variants,
        ..TuneFamilyParams::default()
    };
    let corpus = generate_tune_families(&params, a.seed)?;
    fs::create_dir_all(&a.out_dir).map_err(|e| Error::io(&a.out_dir, e))?;
    let mut manifest = String::from("filename,family\n");
    for song in &corpus.songs {
        let file = format!("{}.mid", song.id);
        write_file(&a.out_dir.join(&file), &write_standard_midi(&song.melody, 480)?)?;
        let _ = writeln!(manifest, "{file},{}", corpus.families[song.family]);
    }
    write_file(&a.out_dir.join("labels.csv"), manifest.as_bytes())
}

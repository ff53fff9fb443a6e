//! Standard MIDI File ingestion.
//!
//! Byte-level decoding is delegated to `midly`; this module pairs note-on and
//! note-off messages into raw events, converts tick timing to quarter notes and
//! reduces a selected voice to a monophonic line.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use midly::num::{u15, u28, u4, u7};
use midly::{Format, Header, MetaMessage, MidiMessage, Smf, Timing, TrackEvent, TrackEventKind};
use num_rational::Rational64;
use num_traits::Zero;

use crate::error::{Error, Result};

/// Quarter-note time, kept exact until sampling.
pub type Qn = Rational64;

/// A note-on/note-off pair as found in the file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawNote {
    pub onset_ticks: u64,
    pub duration_ticks: u64,
    pub pitch: u8,
    pub channel: u8,
    pub track: usize,
}

/// All note events of a file with their tick timing.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreModel {
    /// Ticks per quarter note.
    pub division: u16,
    pub track_count: usize,
    pub notes: Vec<RawNote>,
    /// Diagnostics for events that were dropped while pairing notes.
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VoiceSelector {
    Track(usize),
    Channel(u8),
}

impl FromStr for VoiceSelector {
    type Err = Error;

    /// `t2` selects track 2, `c9` channel 9.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("voice `{s}` is not of the form tN or cN"));
        let (kind, n) = s.split_at_checked(1).ok_or_else(bad)?;
        match kind {
            "t" => n.parse().map(VoiceSelector::Track).map_err(|_| bad()),
            "c" => n.parse().ok().filter(|&c: &u8| c < 16).map(VoiceSelector::Channel).ok_or_else(bad),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for VoiceSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VoiceSelector::Track(t) => write!(f, "track {t}"),
            VoiceSelector::Channel(c) => write!(f, "channel {c}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoteEvent {
    pub onset: Qn,
    pub duration: Qn,
    pub pitch: u8,
}

impl NoteEvent {
    pub fn new(onset: Qn, duration: Qn, pitch: u8) -> Self {
        NoteEvent {
            onset,
            duration,
            pitch,
        }
    }

    pub fn end(&self) -> Qn {
        self.onset + self.duration
    }
}

/// A monophonic melody: note events with pairwise disjoint time spans.
#[derive(Debug, Clone, PartialEq)]
pub struct NoteSequence {
    events: Vec<NoteEvent>,
    total_duration: Qn,
}

impl NoteSequence {
    /// Builds a sequence from arbitrary events, applying the monophonic
    /// reduction. The total duration is the end of the last note.
    pub fn new(events: Vec<NoteEvent>) -> Self {
        let events = monophonic_reduce(events);
        let total_duration = events.iter().map(NoteEvent::end).max().unwrap_or_else(Qn::zero);
        NoteSequence {
            events,
            total_duration,
        }
    }

    /// Back-to-back notes given as `(pitch, duration)` pairs.
    pub fn from_steps(steps: &[(u8, Qn)]) -> Self {
        let mut onset = Qn::zero();
        let mut events = Vec::with_capacity(steps.len());
        for &(pitch, duration) in steps {
            events.push(NoteEvent::new(onset, duration, pitch));
            onset += duration;
        }
        NoteSequence::new(events)
    }

    /// Extends (never shrinks) the total duration; the extra time is a rest.
    pub fn with_total_duration(mut self, total: Qn) -> Self {
        if total > self.total_duration {
            self.total_duration = total;
        }
        self
    }

    pub fn events(&self) -> &[NoteEvent] {
        &self.events
    }

    pub fn total_duration(&self) -> Qn {
        self.total_duration
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }
}

/// Sorts events by onset and truncates every note still sounding at the next
/// onset. Of several notes sharing one onset only the highest survives.
pub fn monophonic_reduce(mut events: Vec<NoteEvent>) -> Vec<NoteEvent> {
    events.retain(|e| e.duration > Qn::zero());
    events.sort_by(|a, b| a.onset.cmp(&b.onset).then(a.pitch.cmp(&b.pitch)));
    let mut out: Vec<NoteEvent> = Vec::with_capacity(events.len());
    for e in events {
        while out.last().is_some_and(|last| last.onset == e.onset) {
            out.pop();
        }
        if let Some(last) = out.last_mut() {
            if last.end() > e.onset {
                last.duration = e.onset - last.onset;
            }
        }
        out.push(e);
    }
    out
}

pub fn parse_standard_midi(bytes: &[u8]) -> Result<ScoreModel> {
    if bytes.len() < 4 || &bytes[..4] != b"MThd" {
        return Err(Error::NotStandardMidi);
    }
    let smf = Smf::parse(bytes).map_err(|e| Error::MalformedMidi(e.to_string()))?;
    let division = match smf.header.timing {
        Timing::Metrical(d) if d.as_int() > 0 => d.as_int(),
        Timing::Metrical(_) => return Err(Error::MalformedMidi("zero division".into())),
        Timing::Timecode(..) => return Err(Error::SmpteDivision),
    };
    if smf.header.format == Format::Sequential {
        return Err(Error::SequentialFormat);
    }

    let mut notes = Vec::new();
    let mut warnings = Vec::new();
    for (track_index, track) in smf.tracks.iter().enumerate() {
        let mut tick: u64 = 0;
        // (channel, key) -> queue of (onset tick, event index)
        let mut open: HashMap<(u8, u8), VecDeque<u64>> = HashMap::new();
        for event in track {
            tick += u64::from(event.delta.as_int());
            let TrackEventKind::Midi { channel, message } = event.kind else {
                continue;
            };
            let channel = channel.as_int();
            let (key, is_on) = match message {
                MidiMessage::NoteOn { key, vel } => (key.as_int(), vel.as_int() > 0),
                MidiMessage::NoteOff { key, .. } => (key.as_int(), false),
                _ => continue,
            };
            let queue = open.entry((channel, key)).or_default();
            if is_on {
                queue.push_back(tick);
            } else if let Some(onset) = queue.pop_front() {
                if tick > onset {
                    notes.push(RawNote {
                        onset_ticks: onset,
                        duration_ticks: tick - onset,
                        pitch: key,
                        channel,
                        track: track_index,
                    });
                } else {
                    warnings.push(format!(
                        "track {track_index}: zero-length note {key} at tick {onset} dropped"
                    ));
                }
            }
        }
        let mut dangling: Vec<_> = open
            .into_iter()
            .flat_map(|((channel, key), q)| q.into_iter().map(move |t| (t, channel, key)))
            .collect();
        dangling.sort_unstable();
        for (onset, channel, key) in dangling {
            warnings.push(format!(
                "track {track_index}: unmatched note-on (channel {channel}, pitch {key}, tick {onset}) dropped"
            ));
        }
    }
    notes.sort_by_key(|n| (n.track, n.onset_ticks, n.pitch, n.channel));
    Ok(ScoreModel {
        division,
        track_count: smf.tracks.len(),
        notes,
        warnings,
    })
}

impl ScoreModel {
    /// Voices carrying notes, in file order: non-empty tracks when the notes
    /// are spread across tracks, otherwise the channels of the single track.
    pub fn voices(&self) -> Vec<VoiceSelector> {
        let tracks: BTreeSet<usize> = self.notes.iter().map(|n| n.track).collect();
        if tracks.len() > 1 {
            return tracks.into_iter().map(VoiceSelector::Track).collect();
        }
        let channels: BTreeSet<u8> = self.notes.iter().map(|n| n.channel).collect();
        if channels.len() > 1 {
            channels.into_iter().map(VoiceSelector::Channel).collect()
        } else {
            tracks.into_iter().map(VoiceSelector::Track).collect()
        }
    }

    /// End of the last note over all voices, in quarter notes.
    pub fn end_qn(&self) -> Qn {
        let end = self
            .notes
            .iter()
            .map(|n| n.onset_ticks + n.duration_ticks)
            .max()
            .unwrap_or(0);
        ticks_to_qn(end, self.division)
    }
}

fn ticks_to_qn(ticks: u64, division: u16) -> Qn {
    Qn::new(ticks as i64, i64::from(division))
}

pub fn extract_voice(score: &ScoreModel, selector: VoiceSelector) -> Result<NoteSequence> {
    let events: Vec<NoteEvent> = score
        .notes
        .iter()
        .filter(|n| match selector {
            VoiceSelector::Track(t) => n.track == t,
            VoiceSelector::Channel(c) => n.channel == c,
        })
        .map(|n| {
            NoteEvent::new(
                ticks_to_qn(n.onset_ticks, score.division),
                ticks_to_qn(n.duration_ticks, score.division),
                n.pitch,
            )
        })
        .collect();
    if events.is_empty() {
        return Err(Error::EmptyVoice(selector.to_string()));
    }
    Ok(NoteSequence::new(events))
}

fn encode_track(seq: &NoteSequence, division: u16, channel: u8) -> Result<Vec<TrackEvent<'static>>> {
    let to_ticks = |q: Qn| -> Result<u64> {
        let t = q * Qn::from_integer(i64::from(division));
        if !t.is_integer() || t < Qn::zero() {
            return Err(Error::NotEncodable(division, format!("time {q} qn")));
        }
        Ok(t.to_integer() as u64)
    };
    let mut timed: Vec<(u64, bool, u8)> = Vec::with_capacity(seq.len() * 2);
    for e in seq.events() {
        if e.pitch > 127 {
            return Err(Error::NotEncodable(division, format!("pitch {}", e.pitch)));
        }
        timed.push((to_ticks(e.onset)?, true, e.pitch));
        timed.push((to_ticks(e.end())?, false, e.pitch));
    }
    // note-offs before note-ons at the same tick
    timed.sort_by_key(|&(t, on, _)| (t, on));

    let delta_of = |d: u64| {
        u32::try_from(d)
            .ok()
            .and_then(u28::try_from)
            .ok_or_else(|| Error::NotEncodable(division, "delta time too large".into()))
    };
    let mut track = Vec::with_capacity(timed.len() + 1);
    let mut last = 0u64;
    for (t, on, pitch) in timed {
        let delta = delta_of(t - last)?;
        last = t;
        let key = u7::new(pitch);
        let message = if on {
            MidiMessage::NoteOn { key, vel: u7::new(64) }
        } else {
            MidiMessage::NoteOff { key, vel: u7::new(0) }
        };
        track.push(TrackEvent {
            delta,
            kind: TrackEventKind::Midi {
                channel: u4::new(channel & 0x0f),
                message,
            },
        });
    }
    track.push(TrackEvent {
        delta: delta_of(to_ticks(seq.total_duration())?.saturating_sub(last))?,
        kind: TrackEventKind::Meta(MetaMessage::EndOfTrack),
    });
    Ok(track)
}

fn write_smf(format: Format, tracks: Vec<Vec<TrackEvent<'static>>>, division: u16) -> Result<Vec<u8>> {
    let division15 = u15::try_from(division)
        .filter(|d| d.as_int() > 0)
        .ok_or_else(|| Error::NotEncodable(division, "division out of range".into()))?;
    let mut smf = Smf::new(Header::new(format, Timing::Metrical(division15)));
    smf.tracks = tracks;
    let mut out = Vec::new();
    smf.write_std(&mut out)
        .map_err(|e| Error::NotEncodable(division, e.to_string()))?;
    Ok(out)
}

/// Encodes a sequence as a single-track format-0 file at the given division.
pub fn write_standard_midi(seq: &NoteSequence, division: u16) -> Result<Vec<u8>> {
    write_smf(Format::SingleTrack, vec![encode_track(seq, division, 0)?], division)
}

/// Encodes several parts as a format-1 file with one track per part.
pub fn write_standard_midi_parts(parts: &[NoteSequence], division: u16) -> Result<Vec<u8>> {
    let tracks = parts
        .iter()
        .enumerate()
        .map(|(i, p)| encode_track(p, division, i as u8))
        .collect::<Result<Vec<_>>>()?;
    write_smf(Format::Parallel, tracks, division)
}

//! Seeded generator of labeled tune families, for exercising the folk-tune
//! protocol when no real corpus is available.
//!
//! Each family is a sequence of one-bar motifs. Variants transpose the whole
//! tune, nudge single pitches, split or merge notes inside a bar and now and
//! then swap, drop or repeat a bar.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::folk::FolkCorpus;
use crate::error::{Error, Result};
use crate::ingest::{NoteSequence, Qn};

#[derive(Debug, Clone, PartialEq)]
pub struct TuneFamilyParams {
    pub families: usize,
    pub min_variants: usize,
    pub max_variants: usize,
    pub bars: usize,
    /// Distinct motifs per family.
    pub motifs: usize,
    /// Largest transposition in semitones, either direction.
    pub max_transpose: i32,
    /// Chance of moving a single note by one or two semitones.
    pub pitch_noise: f64,
    /// Chance per bar of splitting or merging notes.
    pub retime: f64,
    /// Chance per bar of swapping, dropping or repeating it.
    pub form_change: f64,
}

impl Default for TuneFamilyParams {
    fn default() -> Self {
        TuneFamilyParams {
            families: 26,
            min_variants: 10,
            max_variants: 15,
            bars: 8,
            motifs: 4,
            max_transpose: 5,
            pitch_noise: 0.1,
            retime: 0.3,
            form_change: 0.1,
        }
    }
}

/// Durations in eighth notes; each pattern fills one 4/4 bar.
const BAR_RHYTHMS: &[&[u32]] = &[
    &[2, 2, 2, 2],
    &[1, 1, 2, 2, 2],
    &[2, 1, 1, 2, 2],
    &[3, 1, 2, 2],
    &[2, 2, 1, 1, 1, 1],
    &[4, 2, 2],
    &[1, 1, 1, 1, 2, 2],
    &[2, 2, 4],
    &[3, 1, 3, 1],
    &[1, 1, 1, 1, 1, 1, 2],
];

const MAJOR: [i32; 7] = [0, 2, 4, 5, 7, 9, 11];

/// One note: pitch and length in eighths.
type Note = (i32, u32);
type Bar = Vec<Note>;

fn degree_pitch(tonic: i32, degree: i32) -> i32 {
    let octave = degree.div_euclid(7);
    tonic + 12 * octave + MAJOR[degree.rem_euclid(7) as usize]
}

fn motif(rng: &mut ChaCha8Rng, tonic: i32) -> Bar {
    let rhythm = BAR_RHYTHMS.choose(rng).expect("non-empty rhythm table");
    let mut degree: i32 = rng.gen_range(0..7);
    rhythm
        .iter()
        .map(|&len| {
            let step = [-3, -2, -1, -1, 1, 1, 2, 3, 4][rng.gen_range(0..9)];
            degree = (degree + step).clamp(-3, 10);
            (degree_pitch(tonic, degree), len)
        })
        .collect()
}

fn retime(rng: &mut ChaCha8Rng, bar: &mut Bar) {
    if rng.gen_bool(0.5) {
        let splittable: Vec<usize> = (0..bar.len()).filter(|&i| bar[i].1 >= 2).collect();
        if let Some(&i) = splittable.choose(rng) {
            let (pitch, len) = bar[i];
            let head = len / 2;
            bar[i] = (pitch, head);
            bar.insert(i + 1, (pitch, len - head));
        }
    } else if bar.len() > 1 {
        let i = rng.gen_range(0..bar.len() - 1);
        let (_, next) = bar.remove(i + 1);
        bar[i].1 += next;
    }
}

fn variant(rng: &mut ChaCha8Rng, params: &TuneFamilyParams, motifs: &[Bar], form: &[usize]) -> Vec<Note> {
    let mut bars: Vec<Bar> = form.iter().map(|&m| motifs[m].clone()).collect();
    let mut i = 0;
    while i < bars.len() {
        if rng.gen_bool(params.form_change) {
            match rng.gen_range(0..3) {
                0 => bars[i] = motifs.choose(rng).expect("motifs").clone(),
                1 if bars.len() > 1 => {
                    bars.remove(i);
                    continue;
                }
                _ => {
                    let copy = bars[i].clone();
                    bars.insert(i, copy);
                    i += 1;
                }
            }
        }
        i += 1;
    }
    let shift = rng.gen_range(-params.max_transpose..=params.max_transpose);
    let mut notes = Vec::new();
    for mut bar in bars {
        if rng.gen_bool(params.retime) {
            retime(rng, &mut bar);
        }
        for (pitch, len) in bar {
            let mut pitch = pitch + shift;
            if rng.gen_bool(params.pitch_noise) {
                let delta = rng.gen_range(1..=2);
                pitch += if rng.gen_bool(0.5) { delta } else { -delta };
            }
            notes.push((pitch.clamp(0, 127), len));
        }
    }
    notes
}

/// Builds a labeled corpus of synthetic tune families. The same seed and
/// parameters always give the same corpus.
pub fn generate_tune_families(params: &TuneFamilyParams, seed: u64) -> Result<FolkCorpus> {
    if params.families == 0
        || params.bars == 0
        || params.motifs == 0
        || params.min_variants == 0
        || params.min_variants > params.max_variants
    {
        return Err(Error::InvalidConfig("tune-family parameters describe an empty corpus".into()));
    }
    for p in [params.pitch_noise, params.retime, params.form_change] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidConfig(format!("probability {p} outside [0, 1]")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut corpus = FolkCorpus::default();
    for family in 0..params.families {
        let tonic = rng.gen_range(55..=67);
        let motifs: Vec<Bar> = (0..params.motifs).map(|_| motif(&mut rng, tonic)).collect();
        let form: Vec<usize> = (0..params.bars).map(|_| rng.gen_range(0..params.motifs)).collect();
        let name = format!("family{family:02}");
        let count = rng.gen_range(params.min_variants..=params.max_variants);
        for v in 0..count {
            let notes = variant(&mut rng, params, &motifs, &form);
            let steps: Vec<(u8, Qn)> = notes
                .into_iter()
                .map(|(p, len)| (p as u8, Qn::new(i64::from(len), 2)))
                .collect();
            corpus.push(format!("{name}_{v:02}"), &name, NoteSequence::from_steps(&steps));
        }
    }
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rhythms_fill_a_bar() {
        for r in BAR_RHYTHMS {
            assert_eq!(r.iter().sum::<u32>(), 8);
        }
    }

    #[test]
    fn default_shape() {
        let c = generate_tune_families(&TuneFamilyParams::default(), 3).unwrap();
        assert_eq!(c.families.len(), 26);
        let sizes = super::super::folk::family_sizes(&c);
        assert!(sizes.values().all(|&n| (10..=15).contains(&n)));
        assert!(c.songs.iter().all(|s| !s.melody.is_empty()));
    }

    #[test]
    fn seeded() {
        let p = TuneFamilyParams::default();
        assert_eq!(generate_tune_families(&p, 9).unwrap(), generate_tune_families(&p, 9).unwrap());
        assert_ne!(generate_tune_families(&p, 9).unwrap(), generate_tune_families(&p, 10).unwrap());
    }
}

//! Reference implementations used as oracles. They favour obviousness over
//! speed and share no code with the library.

#![allow(dead_code)]

use melowave::ingest::{NoteSequence, Qn};
use melowave::experiments::BachWork;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The signal followed by its reflections, cycling
/// `v0 .. v[n-1] v[n-2] .. v1` until at least `want` samples exist.
pub fn reflected(values: &[f64], want: usize) -> Vec<f64> {
    let mut cycle = values.to_vec();
    if values.len() > 1 {
        cycle.extend(values[1..values.len() - 1].iter().rev());
    }
    cycle.iter().copied().cycle().take(want).collect()
}

/// Direct inner product of the Haar vector with the window starting at each shift.
pub fn naive_haar(values: &[f64], support: usize) -> Vec<f64> {
    let ext = reflected(values, values.len() + support);
    let psi: Vec<f64> = (0..support)
        .map(|l| if l < support / 2 { 1.0 } else { -1.0 } / (support as f64).sqrt())
        .collect();
    (0..values.len())
        .map(|u| psi.iter().enumerate().map(|(l, p)| p * ext[u + l]).sum())
        .collect()
}

pub fn window_mean(ext: &[f64], from: usize, to: usize) -> f64 {
    ext[from..to].iter().sum::<f64>() / (to - from) as f64
}

pub fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

pub fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Sorts every row by (distance, row), takes the first `k` and returns the
/// majority label; among tied labels the one met first in that order wins.
pub fn knn_oracle(rows: &[Vec<f64>], labels: &[usize], query: &[f64], k: usize, cityblock: bool) -> usize {
    let mut order: Vec<(f64, usize)> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| (if cityblock { l1(query, r) } else { l2(query, r) }, i))
        .collect();
    order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let top = &order[..k.min(order.len())];
    let count = |label: usize| top.iter().filter(|(_, i)| labels[*i] == label).count();
    let best = top.iter().map(|(_, i)| count(labels[*i])).max().unwrap();
    top.iter().map(|(_, i)| labels[*i]).find(|&l| count(l) == best).unwrap()
}

/// Monophonic line of eighths and quarters drawn around `center`.
pub fn random_line(rng: &mut ChaCha8Rng, center: i32, total_eighths: u32) -> NoteSequence {
    let mut steps = Vec::new();
    let mut used = 0;
    let mut pitch = center;
    while used < total_eighths {
        let len = rng.gen_range(1..=2).min(total_eighths - used);
        pitch = (pitch + rng.gen_range(-4..=4)).clamp(center - 12, center + 12);
        steps.push((pitch as u8, Qn::new(i64::from(len), 2)));
        used += len;
    }
    NoteSequence::from_steps(&steps)
}

/// Two-part works whose sections restate their exposition material with
/// small changes, so section-of-origin is learnable.
pub fn synthetic_two_part_works(count: usize, seed: u64) -> Vec<BachWork> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|w| {
            let parts = [72, 52]
                .iter()
                .map(|&center| {
                    let theme = random_line(&mut rng, center, 32);
                    let mut steps: Vec<(u8, Qn)> = Vec::new();
                    for rep in 0..5 {
                        let shift = if rep == 0 { 0 } else { rng.gen_range(-5..=5) };
                        for e in theme.events() {
                            steps.push(((i32::from(e.pitch) + shift) as u8, e.duration));
                        }
                    }
                    NoteSequence::from_steps(&steps)
                })
                .collect();
            BachWork::from_parts(format!("work{w:02}"), parts)
        })
        .collect()
}

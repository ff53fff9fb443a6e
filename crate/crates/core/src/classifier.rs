//! k-nearest-neighbour classification and segment voting.
//!
//! Neighbours are ordered by distance, with equal distances ordered by corpus
//! row. A tie between the most frequent classes among the `k` nearest is
//! resolved in favour of the tied class owning the nearest neighbour, which
//! makes `k = 1` and `k = 2` always agree.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::segmentation::SegmentMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Euclidean,
    CityBlock,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch(a.len(), b.len()));
        }
        Ok(self.distance_unchecked(a, b))
    }

    #[inline]
    fn distance_unchecked(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Metric::CityBlock => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Euclidean => "euclidean",
            Metric::CityBlock => "cityblock",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "cityblock" | "city-block" | "manhattan" => Ok(Metric::CityBlock),
            other => Err(Error::InvalidConfig(format!("unknown metric `{other}`"))),
        }
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> Result<f64> {
    Metric::Euclidean.distance(a, b)
}

pub fn cityblock(a: &[f64], b: &[f64]) -> Result<f64> {
    Metric::CityBlock.distance(a, b)
}

/// Labeled equal-length vectors. `groups` tags each row with the item it was
/// cut from so that leave-one-out folds can exclude a whole item.
#[derive(Debug, Clone)]
pub struct LabeledCorpus {
    width: usize,
    data: Vec<f64>,
    labels: Vec<usize>,
    groups: Vec<usize>,
}

impl LabeledCorpus {
    pub fn new(width: usize) -> Self {
        LabeledCorpus {
            width,
            data: Vec::new(),
            labels: Vec::new(),
            groups: Vec::new(),
        }
    }

    pub fn push(&mut self, row: &[f64], label: usize, group: usize) -> Result<()> {
        if row.len() != self.width {
            return Err(Error::LengthMismatch(self.width, row.len()));
        }
        self.data.extend_from_slice(row);
        self.labels.push(label);
        self.groups.push(group);
        Ok(())
    }

    /// Rows of `matrix` with their labels; the group of each row is its source item.
    pub fn from_matrix(matrix: &SegmentMatrix) -> Result<Self> {
        let mut corpus = LabeledCorpus::new(matrix.width());
        for i in 0..matrix.rows() {
            let label = matrix.labels[i]
                .ok_or_else(|| Error::Corpus(format!("row {i} has no label")))?;
            corpus.push(matrix.row(i), label, matrix.sources[i].item)?;
        }
        Ok(corpus)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.width..(i + 1) * self.width]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn group(&self, i: usize) -> usize {
        self.groups[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub row: usize,
    pub label: usize,
    pub distance: f64,
}

impl Neighbor {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.distance
            .total_cmp(&other.distance)
            .then(self.row.cmp(&other.row))
    }
}

struct HeapEntry(Neighbor);

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.key_cmp(&other.0)
    }
}

/// The `count` nearest rows, ascending, skipping rows whose group is `exclude_group`.
pub fn nearest_neighbors(
    query: &[f64],
    corpus: &LabeledCorpus,
    count: usize,
    metric: Metric,
    exclude_group: Option<usize>,
) -> Result<Vec<Neighbor>> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if count == 0 {
        return Err(Error::InvalidK);
    }
    if query.len() != corpus.width {
        return Err(Error::LengthMismatch(query.len(), corpus.width));
    }
    let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::with_capacity(count + 1);
    for row in 0..corpus.len() {
        if exclude_group == Some(corpus.groups[row]) {
            continue;
        }
        let candidate = Neighbor {
            row,
            label: corpus.labels[row],
            distance: metric.distance_unchecked(query, corpus.row(row)),
        };
        if heap.len() < count {
            heap.push(HeapEntry(candidate));
        } else if heap
            .peek()
            .is_some_and(|worst| candidate.key_cmp(&worst.0) == Ordering::Less)
        {
            heap.pop();
            heap.push(HeapEntry(candidate));
        }
    }
    if heap.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(heap.into_sorted_vec().into_iter().map(|e| e.0).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: usize,
    /// Nearest neighbours in ascending order of distance.
    pub neighbors: Vec<Neighbor>,
}

impl Prediction {
    /// Majority label among the first `k` neighbours with the nearest-point
    /// tie break.
    pub fn from_neighbors(neighbors: Vec<Neighbor>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidK);
        }
        if neighbors.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let voters = &neighbors[..k.min(neighbors.len())];
        // (label, votes) in order of first appearance
        let mut tally: Vec<(usize, usize)> = Vec::new();
        for n in voters {
            match tally.iter_mut().find(|(l, _)| *l == n.label) {
                Some(entry) => entry.1 += 1,
                None => tally.push((n.label, 1)),
            }
        }
        let top = tally.iter().map(|t| t.1).max().unwrap_or(0);
        // first appearance in ascending-distance order = owner of the nearest point
        let label = tally.iter().find(|t| t.1 == top).map(|t| t.0).unwrap_or(voters[0].label);
        Ok(Prediction { label, neighbors })
    }

    /// Distance to the nearest neighbour carrying the predicted label.
    pub fn winning_distance(&self) -> f64 {
        self.neighbors
            .iter()
            .find(|n| n.label == self.label)
            .map_or(f64::INFINITY, |n| n.distance)
    }

    pub fn nearest_distance(&self) -> f64 {
        self.neighbors.first().map_or(f64::INFINITY, |n| n.distance)
    }
}

pub fn knn_predict(query: &[f64], corpus: &LabeledCorpus, k: usize, metric: Metric) -> Result<Prediction> {
    if k == 0 {
        return Err(Error::InvalidK);
    }
    Prediction::from_neighbors(nearest_neighbors(query, corpus, k, metric, None)?, k)
}

/// Majority over per-segment predictions, with labels first mapped through
/// `class_of`. Ties go to the class whose supporting predictions have the
/// smallest winning distances, compared nearest first; a complete tie goes to
/// the class predicted first.
pub fn vote_by(predictions: &[Prediction], class_of: impl Fn(usize) -> usize) -> Result<usize> {
    if predictions.is_empty() {
        return Err(Error::NoPredictions);
    }
    // (class, winning distances) in order of first appearance
    let mut tally: Vec<(usize, Vec<f64>)> = Vec::new();
    for p in predictions {
        let class = class_of(p.label);
        let d = p.winning_distance();
        match tally.iter_mut().find(|(c, _)| *c == class) {
            Some(entry) => entry.1.push(d),
            None => tally.push((class, vec![d])),
        }
    }
    let top = tally.iter().map(|t| t.1.len()).max().unwrap_or(0);
    let mut tied: Vec<(usize, Vec<f64>)> = tally.into_iter().filter(|t| t.1.len() == top).collect();
    for (_, d) in &mut tied {
        d.sort_by(f64::total_cmp);
    }
    let mut best = 0;
    for i in 1..tied.len() {
        let ord = tied[i]
            .1
            .iter()
            .zip(&tied[best].1)
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal);
        if ord == Ordering::Less {
            best = i;
        }
    }
    Ok(tied[best].0)
}

pub fn vote(predictions: &[Prediction]) -> Result<usize> {
    vote_by(predictions, |l| l)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(rows: &[(&[f64], usize)]) -> LabeledCorpus {
        let mut c = LabeledCorpus::new(rows[0].0.len());
        for (i, (r, l)) in rows.iter().enumerate() {
            c.push(r, *l, i).unwrap();
        }
        c
    }

    fn prediction(label: usize, distance: f64) -> Prediction {
        Prediction {
            label,
            neighbors: vec![Neighbor { row: 0, label, distance }],
        }
    }

    #[test]
    fn distance_examples() {
        assert_eq!(euclidean(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(cityblock(&[1.0, 2.0], &[4.0, 6.0]).unwrap(), 7.0);
        assert_eq!(euclidean(&[1.5, 2.5], &[1.5, 2.5]).unwrap(), 0.0);
        assert_eq!(euclidean(&[2.0], &[-3.0]).unwrap(), cityblock(&[2.0], &[-3.0]).unwrap());
        assert!(matches!(euclidean(&[1.0], &[1.0, 2.0]), Err(Error::LengthMismatch(1, 2))));
    }

    #[test]
    fn nearest_wins_with_k1() {
        let c = corpus(&[(&[0.0], 0), (&[10.0], 1)]);
        assert_eq!(knn_predict(&[1.0], &c, 1, Metric::Euclidean).unwrap().label, 0);
    }

    #[test]
    fn equal_distances_follow_insertion_order() {
        // A at -1 and B at 1 are both at distance 1 from 0; A was inserted first.
        let c = corpus(&[(&[-1.0], 0), (&[1.0], 1), (&[1.5], 0)]);
        let p = knn_predict(&[0.0], &c, 1, Metric::Euclidean).unwrap();
        assert_eq!(p.label, 0);
        assert_eq!(p.neighbors[0].row, 0);
    }

    #[test]
    fn majority_among_k() {
        let c = corpus(&[(&[0.0], 0), (&[1.0], 0), (&[0.5], 1), (&[9.0], 1)]);
        assert_eq!(knn_predict(&[0.2], &c, 3, Metric::CityBlock).unwrap().label, 0);
    }

    #[test]
    fn modal_tie_goes_to_nearest_point() {
        // k = 2: one A (nearest) and one B; a third B behind does not count.
        let c = corpus(&[(&[0.0], 0), (&[1.0], 1), (&[1.1], 1)]);
        let p2 = knn_predict(&[0.1], &c, 2, Metric::Euclidean).unwrap();
        let p1 = knn_predict(&[0.1], &c, 1, Metric::Euclidean).unwrap();
        assert_eq!(p2.label, 0);
        assert_eq!(p1.label, p2.label);
    }

    #[test]
    fn errors() {
        let c = LabeledCorpus::new(1);
        assert!(matches!(knn_predict(&[0.0], &c, 1, Metric::Euclidean), Err(Error::EmptyCorpus)));
        let c = corpus(&[(&[0.0], 0)]);
        assert!(matches!(knn_predict(&[0.0], &c, 0, Metric::Euclidean), Err(Error::InvalidK)));
        assert!(knn_predict(&[0.0, 1.0], &c, 1, Metric::Euclidean).is_err());
        assert!(matches!(vote(&[]), Err(Error::NoPredictions)));
    }

    #[test]
    fn excluded_group_is_skipped() {
        let c = corpus(&[(&[0.0], 0), (&[5.0], 1)]);
        let n = nearest_neighbors(&[0.0], &c, 1, Metric::Euclidean, Some(0)).unwrap();
        assert_eq!(n[0].row, 1);
    }

    #[test]
    fn vote_examples() {
        assert_eq!(vote(&[prediction(0, 1.0), prediction(0, 2.0), prediction(1, 0.1)]).unwrap(), 0);
        assert_eq!(vote(&[prediction(0, 0.5), prediction(1, 0.9)]).unwrap(), 0);
        assert_eq!(vote(&[prediction(1, 0.9), prediction(0, 0.5)]).unwrap(), 0);
        assert_eq!(vote(&[prediction(3, 4.0)]).unwrap(), 3);
    }

    #[test]
    fn vote_tie_extends_outward() {
        let votes = [
            prediction(0, 0.5),
            prediction(1, 0.5),
            prediction(0, 2.0),
            prediction(1, 1.0),
        ];
        assert_eq!(vote(&votes).unwrap(), 1);
    }

    #[test]
    fn vote_by_merges_mapped_classes() {
        // labels 0..4 are variations of class 0, 4..8 of class 1
        let votes = [prediction(0, 1.0), prediction(5, 1.0), prediction(2, 1.0)];
        assert_eq!(vote_by(&votes, |l| l / 4).unwrap(), 0);
    }
}

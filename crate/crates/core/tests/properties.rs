mod common;

use common::{knn_oracle, naive_haar, reflected, window_mean};
use melowave::classifier::{knn_predict, nearest_neighbors, LabeledCorpus, Metric};
use melowave::contrapuntal::VariationKind;
use melowave::ingest::{
    extract_voice, monophonic_reduce, parse_standard_midi, write_standard_midi, NoteEvent, NoteSequence, Qn,
    VoiceSelector,
};
use melowave::segmentation::{
    constant_boundaries_samples, cut_segments, equalize, equalize_interpolate, equalize_zero_pad, lbdm_boundaries,
    local_maxima_boundaries, zero_crossing_boundaries, BoundarySet, Equalization, Segment, SourceId,
};
use melowave::signal::{mean, mean_normalize, resample_to_length, sample_pitch_signal, Rate, RestPolicy};
use melowave::wavelet::{haar_transform, WaveletScale};
use proptest::prelude::*;

fn q(n: i64, d: i64) -> Qn {
    Qn::new(n, d)
}

/// Notes on a sixteenth grid, each optionally preceded by a rest.
fn melody() -> impl Strategy<Value = NoteSequence> {
    prop::collection::vec((0u8..=127, 1i64..=8, 0i64..=4, any::<bool>()), 1..40).prop_map(|notes| {
        let mut onset = q(0, 1);
        let mut events = Vec::new();
        for (pitch, len, gap, rest) in notes {
            if rest {
                onset += q(gap, 4);
            }
            events.push(NoteEvent::new(onset, q(len, 4), pitch));
            onset += q(len, 4);
        }
        NoteSequence::new(events)
    })
}

fn signal(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0u8..=127).prop_map(f64::from), 1..max_len)
}

fn support() -> impl Strategy<Value = usize> {
    (1usize..=40).prop_map(|h| 2 * h)
}

fn rate(r: i64) -> Rate {
    Rate::from_integer(r)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn midi_round_trip(seq in melody()) {
        let bytes = write_standard_midi(&seq, 480).unwrap();
        let score = parse_standard_midi(&bytes).unwrap();
        let back = extract_voice(&score, VoiceSelector::Track(0)).unwrap();
        prop_assert_eq!(back.events(), seq.events());
    }

    #[test]
    fn monophonic_reduction_is_idempotent(
        raw in prop::collection::vec((0i64..64, 1i64..16, 0u8..=127), 1..30)
    ) {
        let events: Vec<NoteEvent> = raw.iter().map(|&(o, d, p)| NoteEvent::new(q(o, 4), q(d, 4), p)).collect();
        let once = monophonic_reduce(events);
        prop_assert_eq!(monophonic_reduce(once.clone()), once.clone());
        for w in once.windows(2) {
            prop_assert!(w[0].onset <= w[1].onset);
            prop_assert!(w[0].end() <= w[1].onset);
        }
        let seq = NoteSequence::new(once);
        prop_assert!(seq.events().iter().all(|e| e.end() <= seq.total_duration()));
    }

    #[test]
    fn signal_length_and_values(seq in melody(), r in 1i64..=16) {
        let total = seq.total_duration();
        let exact = total * Qn::from_integer(r);
        let expected = exact.ceil().to_integer() as usize;
        let pitches: Vec<f64> = seq.events().iter().map(|e| f64::from(e.pitch)).collect();

        let zero = sample_pitch_signal(&seq, rate(r), RestPolicy::RepresentZero).unwrap();
        prop_assert_eq!(zero.len(), expected);
        prop_assert!(zero.samples().iter().all(|&v| v == 0.0 || pitches.contains(&v)));

        let removed = sample_pitch_signal(&seq, rate(r), RestPolicy::Remove).unwrap();
        prop_assert_eq!(removed.len(), expected);
        prop_assert!(removed.samples().iter().all(|v| pitches.contains(v)));
        if !pitches.contains(&0.0) {
            prop_assert!(removed.samples().iter().all(|&v| v != 0.0));
        }
    }

    #[test]
    fn resampling_onto_the_same_grid_is_identity(seq in melody(), r in 1i64..=8) {
        let direct = sample_pitch_signal(&seq, rate(r), RestPolicy::RepresentZero).unwrap();
        let exact = seq.total_duration() * Qn::from_integer(r);
        prop_assume!(exact.is_integer());
        let resampled = resample_to_length(&seq, direct.len(), RestPolicy::RepresentZero).unwrap();
        prop_assert_eq!(resampled.samples(), direct.samples());
    }

    #[test]
    fn mean_normalization(v in signal(200)) {
        let once = mean_normalize(&v).unwrap();
        prop_assert!(mean(&once).abs() <= 1e-9);
        let twice = mean_normalize(&once).unwrap();
        for (a, b) in once.iter().zip(&twice) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn haar_matches_direct_evaluation(v in signal(300), m in support()) {
        let fast = haar_transform(&v, WaveletScale::from_support(m).unwrap()).unwrap();
        let slow = naive_haar(&v, m);
        prop_assert_eq!(fast.len(), v.len());
        for (a, b) in fast.iter().zip(&slow) {
            prop_assert!((a - b).abs() <= 1e-9, "{} vs {}", a, b);
        }
    }

    #[test]
    fn haar_is_linear(
        pair in (1usize..200).prop_flat_map(|n| (
            prop::collection::vec(-100.0f64..100.0, n),
            prop::collection::vec(-100.0f64..100.0, n),
        )),
        a in -4.0f64..4.0,
        b in -4.0f64..4.0,
        m in support(),
    ) {
        let (x, y) = pair;
        let s = WaveletScale::from_support(m).unwrap();
        let mix: Vec<f64> = x.iter().zip(&y).map(|(x, y)| a * x + b * y).collect();
        let (cx, cy, cm) = (haar_transform(&x, s).unwrap(), haar_transform(&y, s).unwrap(), haar_transform(&mix, s).unwrap());
        for i in 0..x.len() {
            prop_assert!((cm[i] - (a * cx[i] + b * cy[i])).abs() <= 1e-9);
        }
    }

    #[test]
    fn haar_ignores_transposition(v in signal(200), shift in -60.0f64..60.0, m in support()) {
        let s = WaveletScale::from_support(m).unwrap();
        let moved: Vec<f64> = v.iter().map(|x| x + shift).collect();
        let (a, b) = (haar_transform(&v, s).unwrap(), haar_transform(&moved, s).unwrap());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn haar_peaks_where_a_fall_sits_mid_window(
        h in 1u8..=127, drop in 1u8..=127, half in 1usize..=16, extra_a in 0usize..20, extra_b in 0usize..20,
    ) {
        let l = h.saturating_sub(drop);
        prop_assume!(l < h);
        let (a, b) = (half + extra_a, half + extra_b);
        let v: Vec<f64> = std::iter::repeat_n(f64::from(h), a).chain(std::iter::repeat_n(f64::from(l), b)).collect();
        let w = haar_transform(&v, WaveletScale::from_support(2 * half).unwrap()).unwrap();
        let peak = w[a - half];
        prop_assert!(w.iter().all(|&c| c <= peak + 1e-12));
        prop_assert!((peak - f64::from(h - l) * (half as f64 / 2.0).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn boundary_sets_are_well_formed(v in signal(300), m in support(), step in 1usize..40) {
        let w = haar_transform(&v, WaveletScale::from_support(m).unwrap()).unwrap();
        let sets = [
            zero_crossing_boundaries(&w).unwrap(),
            local_maxima_boundaries(&w).unwrap(),
            constant_boundaries_samples(v.len(), step).unwrap(),
        ];
        for set in &sets {
            let idx = set.indices();
            prop_assert_eq!(idx[0], 0);
            prop_assert_eq!(*idx.last().unwrap(), v.len());
            prop_assert!(idx.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn lbdm_boundaries_are_well_formed(seq in melody(), threshold in 0.0f64..=1.0, r in 1i64..=8) {
        let len = sample_pitch_signal(&seq, rate(r), RestPolicy::RepresentZero).unwrap().len();
        let set = lbdm_boundaries(&seq, threshold, rate(r)).unwrap();
        let idx = set.indices();
        prop_assert_eq!(idx[0], 0);
        prop_assert_eq!(*idx.last().unwrap(), len);
        prop_assert!(idx.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn exact_zero_boundaries_split_equal_means(v in signal(120), half in 1usize..=12) {
        let m = 2 * half;
        let w = haar_transform(&v, WaveletScale::from_support(m).unwrap()).unwrap();
        let ext = reflected(&v, v.len() + m);
        for &i in zero_crossing_boundaries(&w).unwrap().indices() {
            if i < v.len() && w[i].abs() <= 1e-12 {
                let d = window_mean(&ext, i, i + half) - window_mean(&ext, i + half, i + m);
                prop_assert!(d.abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn local_maxima_are_peaks_of_mean_difference(v in signal(120), half in 1usize..=12) {
        let m = 2 * half;
        let w = haar_transform(&v, WaveletScale::from_support(m).unwrap()).unwrap();
        let ext = reflected(&v, v.len() + m);
        let diff = |i: usize| window_mean(&ext, i, i + half) - window_mean(&ext, i + half, i + m);
        let set = local_maxima_boundaries(&w).unwrap();
        let idx = set.indices();
        for &i in &idx[1..idx.len() - 1] {
            prop_assert!(diff(i) > diff(i - 1) + 1e-12 || w[i] > w[i - 1]);
            // the plateau, if any, ends in a strict descent
            let mut j = i + 1;
            while j < v.len() && w[j] == w[i] {
                j += 1;
            }
            prop_assert!(j < v.len());
            prop_assert!(diff(i) > diff(j) - 1e-12 && w[i] > w[j]);
        }
    }

    #[test]
    fn cutting_then_concatenating_restores_the_signal(v in signal(300), cuts in prop::collection::vec(1usize..300, 0..20)) {
        let set = BoundarySet::from_interior(v.len(), cuts.into_iter().filter(|&c| c < v.len()));
        let segs = cut_segments(&v, &set, SourceId::default()).unwrap();
        let joined: Vec<f64> = segs.iter().flat_map(|s| s.values.clone()).collect();
        prop_assert_eq!(joined, v);
    }

    #[test]
    fn equalization_keeps_what_it_must(
        lens in prop::collection::vec(1usize..40, 1..10),
        extra in 0usize..30,
    ) {
        let segs: Vec<Segment> = lens
            .iter()
            .enumerate()
            .map(|(i, &n)| Segment {
                values: (0..n).map(|j| (i * 100 + j) as f64).collect(),
                start: 0,
                source: SourceId::default(),
                label: Some(i),
            })
            .collect();
        let longest = *lens.iter().max().unwrap();
        let target = longest + extra;
        let padded = equalize_zero_pad(&segs, None).unwrap();
        prop_assert_eq!(padded.width(), longest);
        for (row, s) in padded.iter_rows().zip(&segs) {
            prop_assert_eq!(&row[..s.values.len()], &s.values[..]);
            prop_assert!(row[s.values.len()..].iter().all(|&x| x == 0.0));
        }
        let resized = equalize_interpolate(&segs, Some(target)).unwrap();
        for (row, s) in resized.iter_rows().zip(&segs) {
            prop_assert_eq!(row.len(), target);
            prop_assert_eq!(row[0], s.values[0]);
            if target > 1 {
                prop_assert_eq!(row[target - 1], *s.values.last().unwrap());
            }
        }
    }

    #[test]
    fn same_boundaries_same_classification(v in signal(200), half in 1usize..=8, seed_cut in 1usize..200) {
        // a boundary set found by one segmenter, rebuilt by hand, must classify identically
        let w = haar_transform(&v, WaveletScale::from_support(2 * half).unwrap()).unwrap();
        let found = local_maxima_boundaries(&w).unwrap();
        let rebuilt = BoundarySet::new(found.indices().to_vec()).unwrap();
        let run = |set: &BoundarySet| {
            let segs = cut_segments(&v, set, SourceId::default()).unwrap();
            let matrix = equalize(&segs, Equalization::ZeroPad, None).unwrap();
            let mut corpus = LabeledCorpus::new(matrix.width());
            for (i, row) in matrix.iter_rows().enumerate() {
                corpus.push(row, i % 3, i).unwrap();
            }
            let query: Vec<f64> = (0..matrix.width()).map(|j| ((j + seed_cut) % 7) as f64).collect();
            knn_predict(&query, &corpus, 1, Metric::CityBlock).unwrap()
        };
        prop_assert_eq!(run(&found), run(&rebuilt));
    }

    #[test]
    fn variations_keep_length_and_deviation_sizes(v in signal(100)) {
        let mu = mean(&v);
        let mut base: Vec<f64> = v.iter().map(|x| (x - mu).abs()).collect();
        base.sort_by(f64::total_cmp);
        for kind in VariationKind::ALL {
            let out = kind.apply(&v).unwrap();
            prop_assert_eq!(out.len(), v.len());
            let mo = mean(&out);
            let mut dev: Vec<f64> = out.iter().map(|x| (x - mo).abs()).collect();
            dev.sort_by(f64::total_cmp);
            for (a, b) in dev.iter().zip(&base) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn inversion_negates_coefficients(v in signal(200), m in support()) {
        let s = WaveletScale::from_support(m).unwrap();
        let inv = VariationKind::Inversion.apply(&v).unwrap();
        let (a, b) = (haar_transform(&v, s).unwrap(), haar_transform(&inv, s).unwrap());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x + y).abs() <= 1e-9);
        }
    }

    #[test]
    fn knn_matches_exhaustive_sort(
        rows in prop::collection::vec(prop::collection::vec(0i32..6, 4), 1..80),
        classes in 1usize..8,
        query in prop::collection::vec(0i32..6, 4),
        k in 1usize..=5,
        cityblock in any::<bool>(),
    ) {
        // small integer coordinates force many exact distance ties
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&x| f64::from(x)).collect()).collect();
        let labels: Vec<usize> = (0..rows.len()).map(|i| (i * 7 + i / 3) % classes).collect();
        let query: Vec<f64> = query.iter().map(|&x| f64::from(x)).collect();
        let mut corpus = LabeledCorpus::new(4);
        for (i, r) in rows.iter().enumerate() {
            corpus.push(r, labels[i], i).unwrap();
        }
        let metric = if cityblock { Metric::CityBlock } else { Metric::Euclidean };
        let p = knn_predict(&query, &corpus, k, metric).unwrap();
        prop_assert_eq!(p.label, knn_oracle(&rows, &labels, &query, k, cityblock));
        prop_assert!(p.neighbors.windows(2).all(|w| w[0].distance <= w[1].distance));
    }

    #[test]
    fn knn_ignores_uniform_scaling(
        rows in prop::collection::vec(prop::collection::vec(-50.0f64..50.0, 3), 1..60),
        query in prop::collection::vec(-50.0f64..50.0, 3),
        k in 1usize..=5,
        factor in prop::sample::select(vec![0.5, 2.0, 4.0, 8.0]),
    ) {
        let build = |scale: f64| {
            let mut c = LabeledCorpus::new(3);
            for (i, r) in rows.iter().enumerate() {
                c.push(&r.iter().map(|x| x * scale).collect::<Vec<_>>(), i % 4, i).unwrap();
            }
            c
        };
        let scaled_query: Vec<f64> = query.iter().map(|x| x * factor).collect();
        for metric in [Metric::CityBlock, Metric::Euclidean] {
            let a = knn_predict(&query, &build(1.0), k, metric).unwrap();
            let b = knn_predict(&scaled_query, &build(factor), k, metric).unwrap();
            prop_assert_eq!(a.label, b.label);
        }
    }

    #[test]
    fn excluded_group_never_appears(
        groups in prop::collection::vec(0usize..5, 2..60),
        held_out in 0usize..5,
    ) {
        prop_assume!(groups.iter().any(|&g| g != held_out));
        let mut c = LabeledCorpus::new(2);
        for (i, &g) in groups.iter().enumerate() {
            c.push(&[i as f64, g as f64], g, g).unwrap();
        }
        let n = nearest_neighbors(&[0.0, held_out as f64], &c, 5, Metric::Euclidean, Some(held_out)).unwrap();
        prop_assert!(n.iter().all(|x| c.group(x.row) != held_out));
    }
}

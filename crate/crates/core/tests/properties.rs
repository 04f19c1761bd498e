//! Property tests for the structural invariants: matrix symmetry and
//! decomposition, window monotonicity, shift/scale invariance, permutation
//! marginals, BH ordering, asymmetry symmetry, support anti-monotonicity
//! and detection validity.

mod common;

use proptest::prelude::*;

use tagmotif::rng::{shuffle, SplitMix64};
use tagmotif::{
    asymmetry, benjamini_hochberg, count_cooccurrence, count_following,
    count_minimal_occurrences, load_registry, match_template, parse_stream, score_matrix,
    serialize_stream, AsymmetryStat, Episode, TagEvent, TagStream,
};

const K: usize = 5;

/// Events on a ¼-second grid so additions and ties are exact.
fn grid_events() -> impl Strategy<Value = Vec<TagEvent>> {
    prop::collection::vec((0..K, 0u32..4_000), 0..150).prop_map(|pairs| {
        pairs
            .into_iter()
            .map(|(tag, q)| TagEvent::point(tag, q as f64 * 0.25))
            .collect()
    })
}

fn stream_of(events: Vec<TagEvent>, span: f64) -> TagStream {
    TagStream::from_events(events, Some(span), K).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn cooccurrence_matrix_is_symmetric(events in grid_events(), dt in 1u32..400) {
        let stream = stream_of(events, 1_500.0);
        let m = count_cooccurrence(&stream, dt as f64 * 0.25).unwrap();
        for i in 0..K {
            for j in 0..K {
                prop_assert_eq!(m.cell(i, j), m.cell(j, i));
            }
        }
    }

    #[test]
    fn following_decomposes_cooccurrence(events in grid_events(), w in 1u32..400) {
        let window = w as f64 * 0.25;
        let stream = stream_of(events, 1_500.0);
        let cooc = count_cooccurrence(&stream, window).unwrap();
        let foll = count_following(&stream, window).unwrap();
        for i in 0..K {
            for j in 0..K {
                if i == j { continue; }
                let simultaneous = common::brute_simultaneous(&stream, i, j);
                prop_assert_eq!(
                    cooc.cell(i, j),
                    foll.cell(i, j) + foll.cell(j, i) + simultaneous,
                    "cell ({}, {})", i, j
                );
            }
        }
    }

    #[test]
    fn widening_windows_never_lose_pairs(events in grid_events(), a in 1u32..200, b in 1u32..200) {
        let (small, large) = (a.min(b) as f64 * 0.25, a.max(b) as f64 * 0.25);
        let stream = stream_of(events, 1_500.0);
        let cs = count_cooccurrence(&stream, small).unwrap();
        let cl = count_cooccurrence(&stream, large).unwrap();
        let fs = count_following(&stream, small).unwrap();
        let fl = count_following(&stream, large).unwrap();
        for idx in 0..K * K {
            prop_assert!(cs.counts()[idx] <= cl.counts()[idx]);
            prop_assert!(fs.counts()[idx] <= fl.counts()[idx]);
        }
    }

    #[test]
    fn matrices_are_shift_invariant(events in grid_events(), shift_q in 0u32..40_000, w in 1u32..400) {
        let window = w as f64 * 0.25;
        let shift = shift_q as f64 * 0.25;
        let stream = stream_of(events.clone(), 1_500.0);
        let shifted_events: Vec<TagEvent> = events
            .into_iter()
            .map(|mut e| { e.timestamp += shift; e })
            .collect();
        let shifted = stream_of(shifted_events, 1_500.0 + shift);
        let (ca, cb) = (
            count_cooccurrence(&stream, window).unwrap(),
            count_cooccurrence(&shifted, window).unwrap(),
        );
        prop_assert_eq!(ca.counts(), cb.counts());
        let (fa, fb) = (
            count_following(&stream, window).unwrap(),
            count_following(&shifted, window).unwrap(),
        );
        prop_assert_eq!(fa.counts(), fb.counts());
    }

    #[test]
    fn scores_are_time_scale_invariant(events in grid_events(), exp in -2i32..=3, w in 1u32..400) {
        // powers of two scale every quantity exactly, so z and p must be
        // bit-identical
        let scale = (2f64).powi(exp);
        let window = w as f64 * 0.25;
        let base = stream_of(events.clone(), 1_500.0);
        let scaled_events: Vec<TagEvent> = events
            .into_iter()
            .map(|mut e| { e.timestamp *= scale; e })
            .collect();
        let scaled = stream_of(scaled_events, 1_500.0 * scale);
        for kind in 0..2 {
            let (mb, ms) = if kind == 0 {
                (
                    count_cooccurrence(&base, window).unwrap(),
                    count_cooccurrence(&scaled, window * scale).unwrap(),
                )
            } else {
                (
                    count_following(&base, window).unwrap(),
                    count_following(&scaled, window * scale).unwrap(),
                )
            };
            prop_assert_eq!(mb.counts(), ms.counts());
            let sb = score_matrix(&mb, 0.01).unwrap();
            let ss = score_matrix(&ms, 0.01).unwrap();
            for (cb, cs) in sb.cells().iter().zip(ss.cells()) {
                prop_assert_eq!(cb.observed, cs.observed);
                prop_assert_eq!(cb.expected.to_bits(), cs.expected.to_bits());
                prop_assert_eq!(cb.z.to_bits(), cs.z.to_bits());
                prop_assert_eq!(cb.p.to_bits(), cs.p.to_bits());
                prop_assert_eq!(cb.flagged, cs.flagged);
            }
        }
    }

    #[test]
    fn label_permutation_preserves_marginals(events in grid_events(), seed in any::<u64>()) {
        let stream = stream_of(events, 1_500.0);
        let mut labels: Vec<usize> = stream.events().iter().map(|e| e.tag).collect();
        shuffle(&mut labels, &mut SplitMix64::new(seed));
        let permuted = stream.with_tags(&labels).unwrap();
        prop_assert_eq!(stream.per_tag_counts(), permuted.per_tag_counts());
        prop_assert_eq!(stream.len(), permuted.len());
    }

    #[test]
    fn relabeling_tags_permutes_scores(events in grid_events(), seed in any::<u64>()) {
        // permute the tag alphabet: cell (σi, σj) of the relabeled stream
        // must carry exactly cell (i, j) of the original
        let mut perm: Vec<usize> = (0..K).collect();
        shuffle(&mut perm, &mut SplitMix64::new(seed));
        let relabeled_events: Vec<TagEvent> = events
            .iter()
            .map(|e| TagEvent { tag: perm[e.tag], ..e.clone() })
            .collect();
        let base = stream_of(events, 1_500.0);
        let relabeled = stream_of(relabeled_events, 1_500.0);
        let sb = score_matrix(&count_following(&base, 30.0).unwrap(), 0.01).unwrap();
        let sr = score_matrix(&count_following(&relabeled, 30.0).unwrap(), 0.01).unwrap();
        for r in 0..K {
            for c in 0..K {
                let orig = sb.cell(r, c);
                let moved = sr.cell(perm[r], perm[c]);
                prop_assert_eq!(orig.observed, moved.observed);
                prop_assert_eq!(orig.expected.to_bits(), moved.expected.to_bits());
                prop_assert_eq!(orig.p.to_bits(), moved.p.to_bits());
            }
        }
    }

    #[test]
    fn bh_q_values_are_well_formed(ps in prop::collection::vec(0.0f64..=1.0, 1..60)) {
        let q = benjamini_hochberg(&ps);
        let mut order: Vec<usize> = (0..ps.len()).collect();
        order.sort_by(|&a, &b| ps[a].total_cmp(&ps[b]));
        for w in order.windows(2) {
            prop_assert!(q[w[0]] <= q[w[1]]);
        }
        for (&p, &qv) in ps.iter().zip(&q) {
            prop_assert!(qv >= p);
            prop_assert!(qv <= 1.0);
        }
    }

    #[test]
    fn asymmetry_is_symmetric_under_swap(a in 0u64..5_000, b in 0u64..5_000) {
        let ab = AsymmetryStat::from_counts(0, 1, a, b);
        let ba = AsymmetryStat::from_counts(0, 1, b, a);
        prop_assert_eq!(ab.p.to_bits(), ba.p.to_bits());
        prop_assert_eq!(ab.ratio.to_bits(), ba.ratio.to_bits());
        prop_assert!(ab.ratio >= 1.0);
        prop_assert!(ab.p >= 0.0 && ab.p <= 1.0);
        if a == b {
            prop_assert_eq!(ab.p, 1.0);
        }
    }

    #[test]
    fn support_is_anti_monotone_under_prefix_extension(
        events in grid_events(),
        chain in prop::collection::vec(0..K, 2..5),
        w in 4u32..200,
    ) {
        let delta = w as f64 * 0.25;
        let stream = stream_of(events, 1_500.0);
        let full = Episode::uniform(chain.clone(), delta).unwrap();
        let support = count_minimal_occurrences(&stream, &full).unwrap();
        for cut in 2..chain.len() {
            let prefix = Episode::uniform(chain[..cut].to_vec(), delta).unwrap();
            let prefix_support = count_minimal_occurrences(&stream, &prefix).unwrap();
            prop_assert!(
                support <= prefix_support,
                "chain {:?} support {} > prefix[..{}] support {}",
                chain, support, cut, prefix_support
            );
        }
    }

    #[test]
    fn detections_are_disjoint_and_delay_valid(
        events in grid_events(),
        chain in prop::collection::vec(0..K, 2..4),
        w in 4u32..200,
    ) {
        let delta = w as f64 * 0.25;
        let stream = stream_of(events, 1_500.0);
        let episode = Episode::uniform(chain, delta).unwrap();
        let detections = match_template(&stream, &episode).unwrap();
        let mut used = std::collections::BTreeSet::new();
        let mut last_start = f64::NEG_INFINITY;
        for d in &detections {
            prop_assert!(d.start >= last_start);
            last_start = d.start;
            prop_assert!(d.end - d.start <= episode.horizon());
            prop_assert_eq!(d.event_indices.len(), episode.len());
            for (step, &idx) in d.event_indices.iter().enumerate() {
                prop_assert!(used.insert(idx), "event {} reused", idx);
                prop_assert_eq!(stream.events()[idx].tag, episode.chain[step]);
                if step > 0 {
                    let gap = stream.events()[idx].timestamp
                        - stream.events()[d.event_indices[step - 1]].timestamp;
                    prop_assert!(gap > 0.0 && gap <= episode.step_delays[step - 1]);
                }
            }
        }
    }

    #[test]
    fn asymmetry_pairs_cover_upper_triangle(events in grid_events()) {
        let stream = stream_of(events, 1_500.0);
        let following = count_following(&stream, 30.0).unwrap();
        let stats = asymmetry(&following).unwrap();
        prop_assert_eq!(stats.len(), K * (K - 1) / 2);
        for s in &stats {
            prop_assert!(s.i < s.j);
            prop_assert_eq!(s.n_ij, following.cell(s.j, s.i));
            prop_assert_eq!(s.n_ji, following.cell(s.i, s.j));
        }
    }

    #[test]
    fn parse_serialize_round_trips(events in grid_events()) {
        let registry = load_registry(
            &(0..K).map(|i| format!("things/n{i}\n")).collect::<String>(),
        ).unwrap();
        let stream = stream_of(events, 1_500.0);
        let text = serialize_stream(&stream, &registry);
        prop_assert_eq!(parse_stream(&text, &registry).unwrap(), stream);
    }
}

//! Definition-level oracles for the acceptance suite.

#![allow(dead_code)]

use std::collections::BTreeSet;

use tagmotif::rng::SplitMix64;
use tagmotif::{Episode, TagEvent, TagStream};

/// Random stream of `n` point events, timestamps on a ¼-second grid.
pub fn random_stream(rng: &mut SplitMix64, k: usize, n: usize, span: f64) -> TagStream {
    let units = (span * 4.0) as u64;
    let events = (0..n)
        .map(|_| {
            TagEvent::point(
                rng.below(k as u64) as usize,
                rng.below(units.max(1)) as f64 * 0.25,
            )
        })
        .collect();
    TagStream::from_events(events, Some(span), k).unwrap()
}

/// O(n²) co-occurrence counts straight from the definition.
pub fn brute_cooccurrence(stream: &TagStream, dt: f64) -> Vec<u64> {
    let k = stream.k();
    let events = stream.events();
    let mut counts = vec![0u64; k * k];
    for a in 0..events.len() {
        for b in 0..a {
            if events[a].source != events[b].source {
                continue;
            }
            if (events[a].timestamp - events[b].timestamp).abs() <= dt {
                let (i, j) = (events[a].tag, events[b].tag);
                if i == j {
                    counts[i * k + i] += 1;
                } else {
                    counts[i * k + j] += 1;
                    counts[j * k + i] += 1;
                }
            }
        }
    }
    counts
}

/// O(n²) ordered-following counts; cell `[follower][first]`.
pub fn brute_following(stream: &TagStream, delta: f64) -> Vec<u64> {
    let k = stream.k();
    let events = stream.events();
    let mut counts = vec![0u64; k * k];
    for a in 0..events.len() {
        for b in 0..events.len() {
            if a == b || events[a].source != events[b].source {
                continue;
            }
            let gap = events[a].timestamp - events[b].timestamp;
            if gap > 0.0 && gap <= delta {
                counts[events[a].tag * k + events[b].tag] += 1;
            }
        }
    }
    counts
}

/// Number of exactly-simultaneous (i, j) event pairs, i ≠ j.
pub fn brute_simultaneous(stream: &TagStream, i: usize, j: usize) -> u64 {
    let events = stream.events();
    let mut count = 0;
    for a in 0..events.len() {
        for b in 0..a {
            if events[a].source != events[b].source {
                continue;
            }
            let tags = (events[a].tag, events[b].tag);
            if events[a].timestamp == events[b].timestamp && (tags == (i, j) || tags == (j, i)) {
                count += 1;
            }
        }
    }
    count
}

/// Minimal-occurrence count from the definition: every occurrence window by
/// exhaustive extension, keeping windows that contain no other window.
pub fn brute_minimal_occurrences(stream: &TagStream, episode: &Episode) -> u64 {
    let events = stream.events();
    let mut windows: BTreeSet<(u64, u64)> = BTreeSet::new();
    fn extend(
        events: &[TagEvent],
        episode: &Episode,
        partial: &mut Vec<usize>,
        windows: &mut BTreeSet<(u64, u64)>,
    ) {
        if partial.len() == episode.chain.len() {
            let start = events[partial[0]].timestamp;
            let end = events[*partial.last().unwrap()].timestamp;
            windows.insert((start.to_bits(), end.to_bits()));
            return;
        }
        let prev_t = events[*partial.last().unwrap()].timestamp;
        let delay = episode.step_delays[partial.len() - 1];
        for cand in (partial.last().unwrap() + 1)..events.len() {
            let t = events[cand].timestamp;
            if t > prev_t + delay {
                break;
            }
            if t > prev_t && events[cand].tag == episode.chain[partial.len()] {
                partial.push(cand);
                extend(events, episode, partial, windows);
                partial.pop();
            }
        }
    }
    for head in 0..events.len() {
        if events[head].tag == episode.chain[0] {
            extend(events, episode, &mut vec![head], &mut windows);
        }
    }
    let windows: Vec<(f64, f64)> = windows
        .into_iter()
        .map(|(s, e)| (f64::from_bits(s), f64::from_bits(e)))
        .collect();
    windows
        .iter()
        .filter(|&&(s, e)| {
            !windows
                .iter()
                .any(|&(s2, e2)| (s2, e2) != (s, e) && s2 >= s && e2 <= e)
        })
        .count() as u64
}

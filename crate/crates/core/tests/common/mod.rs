//! Brute-force oracles and random-input helpers shared by the integration
//! tests. Everything here re-derives results from definitions, independent
//! of the library's counting paths.

#![allow(dead_code)]

use std::collections::BTreeSet;

use tagmotif::rng::SplitMix64;
use tagmotif::{Episode, TagEvent, TagStream};

/// Random stream of `n` point events with uniform tags. Timestamps land on
/// a 1/8-second grid so exact comparisons (ties, shifts) are meaningful.
pub fn random_stream(rng: &mut SplitMix64, k: usize, n: usize, span: f64) -> TagStream {
    random_stream_with_sources(rng, k, n, span, 0)
}

/// Like [`random_stream`], with events spread over `sources` labeled
/// sources when `sources > 0`.
pub fn random_stream_with_sources(
    rng: &mut SplitMix64,
    k: usize,
    n: usize,
    span: f64,
    sources: usize,
) -> TagStream {
    let units = (span * 8.0) as u64;
    let events = (0..n)
        .map(|_| {
            let mut e = TagEvent::point(
                rng.below(k as u64) as usize,
                rng.below(units.max(1)) as f64 * 0.125,
            );
            if sources > 0 {
                e.source = Some(format!("s{}", rng.below(sources as u64)));
            }
            e
        })
        .collect();
    TagStream::from_events(events, Some(span), k).unwrap()
}

fn same_source(a: &TagEvent, b: &TagEvent) -> bool {
    a.source == b.source
}

/// O(n²) co-occurrence counts straight from the definition.
pub fn brute_cooccurrence(stream: &TagStream, dt: f64) -> Vec<u64> {
    let k = stream.k();
    let events = stream.events();
    let mut counts = vec![0u64; k * k];
    for a in 0..events.len() {
        for b in 0..a {
            if !same_source(&events[a], &events[b]) {
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
            if a == b || !same_source(&events[a], &events[b]) {
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
            if !same_source(&events[a], &events[b]) {
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

/// Linear-scan run segmentation from the definition: walk same-tag events
/// per source, splitting whenever the next start exceeds the running end by
/// more than `gap`.
pub fn brute_runs(stream: &TagStream, tag: usize, gap: f64) -> Vec<(f64, f64, usize)> {
    let mut out = Vec::new();
    for (_, idxs) in stream.source_groups() {
        let mut events = idxs
            .iter()
            .map(|&i| &stream.events()[i])
            .filter(|e| e.tag == tag);
        let Some(first) = events.next() else { continue };
        let (mut start, mut end, mut len) = (first.timestamp, first.end(), 1usize);
        for e in events {
            if e.timestamp - end <= gap {
                end = end.max(e.end());
                len += 1;
            } else {
                out.push((start, end, len));
                (start, end, len) = (e.timestamp, e.end(), 1);
            }
        }
        out.push((start, end, len));
    }
    out
}

/// Every occurrence window of an episode, by exhaustive extension, one set
/// per source (each source is its own timeline).
fn all_occurrence_windows(stream: &TagStream, episode: &Episode) -> Vec<BTreeSet<(u64, u64)>> {
    let mut per_source = Vec::new();
    for (_, idxs) in stream.source_groups() {
        let mut windows = BTreeSet::new();
        let events: Vec<&TagEvent> = idxs.iter().map(|&i| &stream.events()[i]).collect();
        for (pos, head) in events.iter().enumerate() {
            if head.tag != episode.chain[0] {
                continue;
            }
            let mut partial = vec![pos];
            extend_all(&events, episode, &mut partial, &mut windows);
        }
        per_source.push(windows);
    }
    per_source
}

fn extend_all(
    events: &[&TagEvent],
    episode: &Episode,
    partial: &mut Vec<usize>,
    windows: &mut BTreeSet<(u64, u64)>,
) {
    let depth = partial.len();
    if depth == episode.chain.len() {
        let start = events[partial[0]].timestamp;
        let end = events[*partial.last().unwrap()].timestamp;
        windows.insert((start.to_bits(), end.to_bits()));
        assert!(windows.len() < 2_000_000, "oracle stream too dense");
        return;
    }
    let prev_t = events[*partial.last().unwrap()].timestamp;
    let delay = episode.step_delays[depth - 1];
    for cand in (partial.last().unwrap() + 1)..events.len() {
        let t = events[cand].timestamp;
        if t > prev_t + delay {
            break;
        }
        if t <= prev_t || events[cand].tag != episode.chain[depth] {
            continue;
        }
        partial.push(cand);
        extend_all(events, episode, partial, windows);
        partial.pop();
    }
}

/// Minimal-occurrence count from the definition: enumerate every occurrence
/// window, then keep the windows that contain no other window of the same
/// source.
pub fn brute_minimal_occurrences(stream: &TagStream, episode: &Episode) -> u64 {
    all_occurrence_windows(stream, episode)
        .into_iter()
        .map(|set| {
            let windows: Vec<(f64, f64)> = set
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
        })
        .sum()
}

/// Template-independent enumeration of node tuples matching a motif shape:
/// loops over all tuples of distinct graph nodes and checks required edges.
pub fn brute_motifs(
    nodes: &[usize],
    edges: &BTreeSet<(usize, usize)>,
    pattern: &tagmotif::MotifPattern,
) -> Vec<Vec<usize>> {
    use tagmotif::MotifPattern::*;
    let has = |u: usize, v: usize| edges.contains(&(u, v));
    let mut out = Vec::new();
    match *pattern {
        Edge => {
            for &u in nodes {
                for &v in nodes {
                    if u != v && has(u, v) {
                        out.push(vec![u, v]);
                    }
                }
            }
        }
        TwoPath => {
            for &u in nodes {
                for &v in nodes {
                    for &w in nodes {
                        if u != v && v != w && u != w && has(u, v) && has(v, w) {
                            out.push(vec![u, v, w]);
                        }
                    }
                }
            }
        }
        Loop2 => {
            for &u in nodes {
                for &v in nodes {
                    if u < v && has(u, v) && has(v, u) {
                        out.push(vec![u, v]);
                    }
                }
            }
        }
        Loop3 => {
            for &u in nodes {
                for &v in nodes {
                    for &w in nodes {
                        if u < v
                            && u < w
                            && v != w
                            && has(u, v)
                            && has(v, w)
                            && has(w, u)
                        {
                            out.push(vec![u, v, w]);
                        }
                    }
                }
            }
        }
        FanOut(m) => {
            for &u in nodes {
                let targets: Vec<usize> = nodes
                    .iter()
                    .copied()
                    .filter(|&v| v != u && has(u, v))
                    .collect();
                let mut pick = vec![];
                pick_combos(&targets, m, 0, &mut pick, &mut |combo: &[usize]| {
                    let mut t = vec![u];
                    t.extend_from_slice(combo);
                    out.push(t);
                });
            }
        }
    }
    out.sort();
    out
}

fn pick_combos<F: FnMut(&[usize])>(
    items: &[usize],
    m: usize,
    from: usize,
    pick: &mut Vec<usize>,
    emit: &mut F,
) {
    if pick.len() == m {
        emit(pick);
        return;
    }
    for i in from..items.len() {
        pick.push(items[i]);
        pick_combos(items, m, i + 1, pick, emit);
        pick.pop();
    }
}

/// Extracts the directed edge set from DOT text.
pub fn parse_dot_edges(dot: &str) -> BTreeSet<(usize, usize)> {
    dot.lines()
        .filter_map(|line| {
            let (lhs, rhs) = line.trim().split_once("->")?;
            let to = rhs.trim().split_whitespace().next()?;
            Some((
                lhs.trim().parse().expect("numeric node id"),
                to.trim().parse().expect("numeric node id"),
            ))
        })
        .collect()
}

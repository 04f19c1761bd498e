//! Level-wise serial-episode mining over minimal occurrences, and the
//! label-permutation significance test.

use serde::{Deserialize, Serialize};

use crate::events::{TagId, TagStream};
use crate::rng::{shuffle, SplitMix64};

use super::{Episode, EpisodeError};

/// Mining result for one frequent chain.
///
/// `empirical_p` stays unset until [`episode_significance`] fills it in;
/// mining itself runs no permutations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeStats {
    pub episode: Episode,
    pub minimal_occurrences: u64,
    pub empirical_p: Option<f64>,
    pub per_source_counts: Vec<(Option<String>, u64)>,
}

/// Per-source event times grouped by tag, the counting engine's whole view
/// of a stream.
struct SourceView {
    source: Option<String>,
    per_tag: Vec<Vec<f64>>,
}

fn source_views(stream: &TagStream) -> Vec<SourceView> {
    let labels: Vec<TagId> = stream.events().iter().map(|e| e.tag).collect();
    source_views_with_labels(stream, &labels)
}

fn source_views_with_labels(stream: &TagStream, labels: &[TagId]) -> Vec<SourceView> {
    stream
        .source_groups()
        .into_iter()
        .map(|(source, idxs)| {
            let mut per_tag = vec![Vec::new(); stream.k()];
            for idx in idxs {
                per_tag[labels[idx]].push(stream.events()[idx].timestamp);
            }
            SourceView {
                source: source.map(str::to_string),
                per_tag,
            }
        })
        .collect()
}

/// An occurrence window candidate: the time it ends at and the latest start
/// an occurrence ending there can have.
type Ending = (f64, f64);

/// Extends prefix endings by one chain step: for every event of `tag`, the
/// best (latest-start) prefix ending in the window `[t − delay, t)` yields a
/// candidate ending at `t`. Sliding-window maximum over a monotone deque.
fn extend_endings(prev: &[Ending], times: &[f64], delay: f64) -> Vec<Ending> {
    let mut out = Vec::new();
    let mut deque: std::collections::VecDeque<Ending> = std::collections::VecDeque::new();
    let mut ptr = 0usize;
    for &t in times {
        while ptr < prev.len() && prev[ptr].0 < t {
            let (et, ls) = prev[ptr];
            while deque.back().is_some_and(|&(_, bls)| bls <= ls) {
                deque.pop_back();
            }
            deque.push_back((et, ls));
            ptr += 1;
        }
        while deque.front().is_some_and(|&(fet, _)| fet < t - delay) {
            deque.pop_front();
        }
        if let Some(&(_, ls)) = deque.front() {
            out.push((t, ls));
        }
    }
    out
}

/// Counts minimal windows among ending candidates: group ends at the same
/// time to their best start, then keep windows whose start strictly exceeds
/// every earlier candidate's (a window contains an earlier candidate exactly
/// when its start does not).
fn count_minimal(endings: &[Ending]) -> u64 {
    let mut count = 0u64;
    let mut best = f64::NEG_INFINITY;
    let mut i = 0usize;
    while i < endings.len() {
        let end = endings[i].0;
        let mut start = endings[i].1;
        let mut j = i + 1;
        while j < endings.len() && endings[j].0 == end {
            start = start.max(endings[j].1);
            j += 1;
        }
        if start > best {
            count += 1;
            best = start;
        }
        i = j;
    }
    count
}

fn chain_endings(view: &SourceView, chain: &[TagId], delays: &[f64]) -> Vec<Ending> {
    let mut cur: Vec<Ending> = view.per_tag[chain[0]].iter().map(|&t| (t, t)).collect();
    for (step, &tag) in chain.iter().enumerate().skip(1) {
        if cur.is_empty() {
            return cur;
        }
        cur = extend_endings(&cur, &view.per_tag[tag], delays[step - 1]);
    }
    cur
}

fn validate_chain(chain: &[TagId], k: usize) -> Result<(), EpisodeError> {
    for &tag in chain {
        if tag >= k {
            return Err(EpisodeError::UnknownTag { tag, k });
        }
    }
    Ok(())
}

/// Number of minimal occurrences of an episode in a stream, summed over
/// sources.
pub fn count_minimal_occurrences(
    stream: &TagStream,
    episode: &Episode,
) -> Result<u64, EpisodeError> {
    validate_chain(&episode.chain, stream.k())?;
    let views = source_views(stream);
    Ok(views
        .iter()
        .map(|v| count_minimal(&chain_endings(v, &episode.chain, &episode.step_delays)))
        .sum())
}

/// Level-wise mining of all chains of length `2..=max_len` with at least
/// `min_support` minimal occurrences, every inter-step gap within `delta`.
///
/// Only chains whose prefix met the support threshold are extended; support
/// is anti-monotone under prefix extension, so no frequent chain is missed.
/// Results come back sorted by (length, chain).
pub fn mine_episodes(
    stream: &TagStream,
    max_len: usize,
    delta: f64,
    min_support: u64,
) -> Result<Vec<EpisodeStats>, EpisodeError> {
    if max_len < 2 {
        return Err(EpisodeError::ChainTooShort(max_len));
    }
    if !(delta > 0.0) {
        return Err(EpisodeError::NonPositiveDelay);
    }
    let min_support = min_support.max(1);
    let k = stream.k();
    let views = source_views(stream);

    // Frequent chains of the current length with their per-source endings.
    struct Frontier {
        chain: Vec<TagId>,
        endings: Vec<Vec<Ending>>,
    }

    let mut frontier: Vec<Frontier> = (0..k)
        .filter(|&tag| stream.per_tag_counts()[tag] >= min_support)
        .map(|tag| Frontier {
            chain: vec![tag],
            endings: views
                .iter()
                .map(|v| v.per_tag[tag].iter().map(|&t| (t, t)).collect())
                .collect(),
        })
        .collect();

    let mut results = Vec::new();
    for len in 2..=max_len {
        let mut next = Vec::new();
        for parent in &frontier {
            for tag in 0..k {
                let endings: Vec<Vec<Ending>> = parent
                    .endings
                    .iter()
                    .zip(&views)
                    .map(|(prev, v)| extend_endings(prev, &v.per_tag[tag], delta))
                    .collect();
                let per_source: Vec<(Option<String>, u64)> = endings
                    .iter()
                    .zip(&views)
                    .map(|(e, v)| (v.source.clone(), count_minimal(e)))
                    .filter(|&(_, c)| c > 0)
                    .collect();
                let total: u64 = per_source.iter().map(|&(_, c)| c).sum();
                if total < min_support {
                    continue;
                }
                let mut chain = parent.chain.clone();
                chain.push(tag);
                results.push(EpisodeStats {
                    episode: Episode::uniform(chain.clone(), delta)?,
                    minimal_occurrences: total,
                    empirical_p: None,
                    per_source_counts: per_source,
                });
                if len < max_len {
                    next.push(Frontier { chain, endings });
                }
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    results.sort_by(|a, b| {
        a.episode
            .chain
            .len()
            .cmp(&b.episode.chain.len())
            .then_with(|| a.episode.chain.cmp(&b.episode.chain))
    });
    Ok(results)
}

/// Empirical p-value of an episode's support under the label-permutation
/// null: timestamps stay fixed, tag labels are shuffled across events, so
/// per-tag counts and the temporal profile are preserved exactly.
///
/// Returns `(1 + #{permutations with count ≥ observed}) / (R + 1)`,
/// deterministic for a given seed.
pub fn episode_significance(
    stream: &TagStream,
    episode: &Episode,
    permutations: u32,
    seed: u64,
) -> Result<f64, EpisodeError> {
    if permutations < 19 {
        return Err(EpisodeError::TooFewPermutations(permutations));
    }
    validate_chain(&episode.chain, stream.k())?;
    let observed = count_minimal_occurrences(stream, episode)?;
    let mut labels: Vec<TagId> = stream.events().iter().map(|e| e.tag).collect();
    let mut rng = SplitMix64::new(seed);
    let mut hits = 0u32;
    for _ in 0..permutations {
        shuffle(&mut labels, &mut rng);
        let views = source_views_with_labels(stream, &labels);
        let count: u64 = views
            .iter()
            .map(|v| count_minimal(&chain_endings(v, &episode.chain, &episode.step_delays)))
            .sum();
        if count >= observed {
            hits += 1;
        }
    }
    Ok((1.0 + hits as f64) / (permutations as f64 + 1.0))
}

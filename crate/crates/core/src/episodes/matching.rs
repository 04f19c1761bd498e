//! Template matching: earliest-match detection of episode occurrences, in
//! batch over a whole stream and incrementally over an arriving one.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::events::{TagEvent, TagId, TagStream};

use super::{Episode, EpisodeError};

/// One matched occurrence of an episode template.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub label: String,
    pub start: f64,
    pub end: f64,
    pub event_indices: Vec<usize>,
}

fn episode_label(episode: &Episode) -> String {
    episode.label.clone().unwrap_or_else(|| {
        episode
            .chain
            .iter()
            .map(|t| t.to_string())
            .collect::<Vec<_>>()
            .join("-")
    })
}

/// Scans the stream for occurrences of `episode`, consuming matched events.
///
/// Heads are visited in time order; from each head the earliest events
/// satisfying the tag and step-delay constraints are taken, backtracking to
/// the next-earliest candidate when a step cannot be completed. Matched
/// events are never reused across detections. Matches never span sources.
pub fn match_template(
    stream: &TagStream,
    episode: &Episode,
) -> Result<Vec<Detection>, EpisodeError> {
    for &tag in &episode.chain {
        if tag >= stream.k() {
            return Err(EpisodeError::UnknownTag {
                tag,
                k: stream.k(),
            });
        }
    }
    let events = stream.events();
    let label = episode_label(episode);

    // Per-source, per-tag event indices in time order.
    let groups = stream.source_groups();
    let mut group_of = vec![0usize; events.len()];
    let mut per_tag: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); stream.k()]; groups.len()];
    for (g, (_, idxs)) in groups.iter().enumerate() {
        for &i in idxs {
            group_of[i] = g;
            per_tag[g][events[i].tag].push(i);
        }
    }

    let mut consumed = vec![false; events.len()];
    let mut detections = Vec::new();
    for head in 0..events.len() {
        if consumed[head] || events[head].tag != episode.chain[0] {
            continue;
        }
        let mut chosen = vec![head];
        if extend_earliest(
            episode,
            events,
            &per_tag[group_of[head]],
            &consumed,
            &mut chosen,
        ) {
            for &i in &chosen {
                consumed[i] = true;
            }
            detections.push(Detection {
                label: label.clone(),
                start: events[head].timestamp,
                end: events[*chosen.last().unwrap()].timestamp,
                event_indices: chosen,
            });
        }
    }
    Ok(detections)
}

/// Depth-first completion of a partial match, trying candidates for each
/// step in time order. `chosen` holds the head on entry and the full match
/// on success.
fn extend_earliest(
    episode: &Episode,
    events: &[TagEvent],
    per_tag: &[Vec<usize>],
    consumed: &[bool],
    chosen: &mut Vec<usize>,
) -> bool {
    let pos = chosen.len();
    if pos == episode.chain.len() {
        return true;
    }
    let prev_t = events[*chosen.last().unwrap()].timestamp;
    let delay = episode.step_delays[pos - 1];
    let tag = episode.chain[pos];
    let list = &per_tag[tag];
    let from = list.partition_point(|&i| events[i].timestamp <= prev_t);
    for &cand in &list[from..] {
        if events[cand].timestamp > prev_t + delay {
            break;
        }
        if consumed[cand] || chosen.contains(&cand) {
            continue;
        }
        chosen.push(cand);
        if extend_earliest(episode, events, per_tag, consumed, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// Incremental matcher over a time-ordered event feed.
///
/// An event can serve as a match head; the head's outcome is only fixed once
/// the feed has moved past its delay horizon, so heads are resolved in time
/// order as the horizon passes and matched events are consumed exactly as in
/// [`match_template`]. Only events within the horizon are retained.
pub struct StreamingMatcher {
    episode: Episode,
    label: String,
    horizon: f64,
    buffer: VecDeque<BufferedEvent>,
    fed: usize,
}

struct BufferedEvent {
    index: usize,
    tag: TagId,
    timestamp: f64,
    source: Option<String>,
    consumed: bool,
    head_resolved: bool,
}

impl StreamingMatcher {
    pub fn new(episode: Episode) -> Self {
        let label = episode_label(&episode);
        let horizon = episode.horizon();
        StreamingMatcher {
            episode,
            label,
            horizon,
            buffer: VecDeque::new(),
            fed: 0,
        }
    }

    pub fn episode(&self) -> &Episode {
        &self.episode
    }

    /// Earliest start any still-unreported detection can have, given the
    /// last fed timestamp.
    pub fn frontier(&self, now: f64) -> f64 {
        now - self.horizon
    }

    /// Feeds the next event (timestamps must be non-decreasing) and returns
    /// the detections whose outcome became final.
    pub fn push(&mut self, event: &TagEvent) -> Vec<Detection> {
        let index = self.fed;
        self.fed += 1;
        let out = self.resolve_up_to(event.timestamp);
        self.buffer.push_back(BufferedEvent {
            index,
            tag: event.tag,
            timestamp: event.timestamp,
            source: event.source.clone(),
            consumed: false,
            head_resolved: false,
        });
        out
    }

    /// Resolves every remaining head; call at end of input.
    pub fn finish(&mut self) -> Vec<Detection> {
        let out = self.resolve_up_to(f64::INFINITY);
        self.buffer.clear();
        out
    }

    fn resolve_up_to(&mut self, now: f64) -> Vec<Detection> {
        let mut detections = Vec::new();
        for pos in 0..self.buffer.len() {
            let e = &self.buffer[pos];
            if e.head_resolved {
                continue;
            }
            if e.timestamp + self.horizon >= now {
                break;
            }
            self.buffer[pos].head_resolved = true;
            if self.buffer[pos].consumed || self.buffer[pos].tag != self.episode.chain[0] {
                continue;
            }
            let mut chosen = vec![pos];
            if self.extend(&mut chosen) {
                let start = self.buffer[chosen[0]].timestamp;
                let end = self.buffer[*chosen.last().unwrap()].timestamp;
                let event_indices: Vec<usize> =
                    chosen.iter().map(|&p| self.buffer[p].index).collect();
                for &p in &chosen {
                    self.buffer[p].consumed = true;
                }
                detections.push(Detection {
                    label: self.label.clone(),
                    start,
                    end,
                    event_indices,
                });
            }
        }
        // Resolved events older than the horizon can no longer participate.
        while self
            .buffer
            .front()
            .is_some_and(|e| e.head_resolved && e.timestamp + self.horizon < now)
        {
            self.buffer.pop_front();
        }
        detections
    }

    fn extend(&self, chosen: &mut Vec<usize>) -> bool {
        let pos = chosen.len();
        if pos == self.episode.chain.len() {
            return true;
        }
        let prev = &self.buffer[*chosen.last().unwrap()];
        let prev_t = prev.timestamp;
        let delay = self.episode.step_delays[pos - 1];
        let tag = self.episode.chain[pos];
        let source = &self.buffer[chosen[0]].source;
        for cand in (chosen[0] + 1)..self.buffer.len() {
            let e = &self.buffer[cand];
            if e.timestamp > prev_t + delay {
                break;
            }
            if e.timestamp <= prev_t
                || e.tag != tag
                || e.consumed
                || e.source != *source
                || chosen.contains(&cand)
            {
                continue;
            }
            chosen.push(cand);
            if self.extend(chosen) {
                return true;
            }
            chosen.pop();
        }
        false
    }
}

//! Pair-count matrices and run segmentation.
//!
//! Two k×k matrices are computed over a stream: the symmetric co-occurrence
//! matrix (unordered event pairs within `dt` of each other, repetitions on
//! the diagonal) and the following matrix (ordered pairs separated by
//! `0 < Δt ≤ δ`, rows are the follower tag, columns the first tag). Both use
//! a sweep over the sorted stream with a trailing window instead of an
//! all-pairs scan. Events from different sources are never paired.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::{TagEvent, TagId, TagStream};

#[derive(Debug, Error, PartialEq)]
pub enum MatrixError {
    #[error("window must be positive, got {0}")]
    NonPositiveWindow(f64),
    #[error("tag index {tag} out of range for k={k}")]
    UnknownTag { tag: TagId, k: usize },
    #[error("cannot merge matrices: {0}")]
    MergeMismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    Cooccurrence,
    Following,
}

/// Stream facts the null model needs: observation span, per-tag counts and
/// the total event count. For multi-source streams the span is the sum of
/// the per-source observation lengths, so that summed counts stay consistent
/// with the independence expectation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamMeta {
    pub span: f64,
    pub per_tag_counts: Vec<u64>,
    pub total_events: u64,
}

impl StreamMeta {
    fn of(stream: &TagStream) -> Self {
        let groups = stream.source_groups().len().max(1);
        StreamMeta {
            span: stream.span() * groups as f64,
            per_tag_counts: stream.per_tag_counts().to_vec(),
            total_events: stream.len() as u64,
        }
    }
}

/// A k×k matrix of raw pair counts with the metadata of the stream it was
/// counted on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCountMatrix {
    pub kind: MatrixKind,
    pub window: f64,
    k: usize,
    counts: Vec<u64>,
    pub meta: StreamMeta,
}

impl PairCountMatrix {
    fn zeroed(kind: MatrixKind, window: f64, stream: &TagStream) -> Self {
        let k = stream.k();
        PairCountMatrix {
            kind,
            window,
            k,
            counts: vec![0; k * k],
            meta: StreamMeta::of(stream),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn cell(&self, row: TagId, col: TagId) -> u64 {
        self.counts[row * self.k + col]
    }

    fn cell_mut(&mut self, row: TagId, col: TagId) -> &mut u64 {
        &mut self.counts[row * self.k + col]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Sums another matrix into this one. Spans and per-tag counts add, so
    /// the merged matrix still scores against a single independence null.
    pub fn merge(&mut self, other: &PairCountMatrix) -> Result<(), MatrixError> {
        if self.kind != other.kind {
            return Err(MatrixError::MergeMismatch("kind differs".to_string()));
        }
        if self.window != other.window {
            return Err(MatrixError::MergeMismatch(format!(
                "window {} vs {}",
                self.window, other.window
            )));
        }
        if self.k != other.k {
            return Err(MatrixError::MergeMismatch(format!(
                "tag count {} vs {}",
                self.k, other.k
            )));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.meta.span += other.meta.span;
        self.meta.total_events += other.meta.total_events;
        for (a, b) in self
            .meta
            .per_tag_counts
            .iter_mut()
            .zip(&other.meta.per_tag_counts)
        {
            *a += b;
        }
        Ok(())
    }
}

/// Counts unordered pairs of distinct events within `dt` of each other.
///
/// For i≠j each pair is recorded symmetrically in both cells; the diagonal
/// holds the number of unordered same-tag pairs (repetitions).
pub fn count_cooccurrence(stream: &TagStream, dt: f64) -> Result<PairCountMatrix, MatrixError> {
    if !(dt > 0.0) {
        return Err(MatrixError::NonPositiveWindow(dt));
    }
    let mut m = PairCountMatrix::zeroed(MatrixKind::Cooccurrence, dt, stream);
    for (_, idxs) in stream.source_groups() {
        sweep_cooccurrence(stream.events(), &idxs, dt, &mut m);
    }
    Ok(m)
}

fn sweep_cooccurrence(events: &[TagEvent], idxs: &[usize], dt: f64, m: &mut PairCountMatrix) {
    let mut lo = 0usize;
    for a in 0..idxs.len() {
        let ta = events[idxs[a]].timestamp;
        while events[idxs[lo]].timestamp < ta - dt {
            lo += 1;
        }
        let tag_a = events[idxs[a]].tag;
        for b in lo..a {
            let tag_b = events[idxs[b]].tag;
            if tag_a == tag_b {
                *m.cell_mut(tag_a, tag_a) += 1;
            } else {
                *m.cell_mut(tag_a, tag_b) += 1;
                *m.cell_mut(tag_b, tag_a) += 1;
            }
        }
    }
}

/// Counts ordered pairs with `0 < t_follower − t_first ≤ delta`.
///
/// Cell `[j][i]` (row = follower, column = first tag) holds the number of
/// pairs where a tag-i event is followed by a tag-j event. Simultaneous
/// events are never counted here.
pub fn count_following(stream: &TagStream, delta: f64) -> Result<PairCountMatrix, MatrixError> {
    if !(delta > 0.0) {
        return Err(MatrixError::NonPositiveWindow(delta));
    }
    let mut m = PairCountMatrix::zeroed(MatrixKind::Following, delta, stream);
    for (_, idxs) in stream.source_groups() {
        sweep_following(stream.events(), &idxs, delta, &mut m);
    }
    Ok(m)
}

fn sweep_following(events: &[TagEvent], idxs: &[usize], delta: f64, m: &mut PairCountMatrix) {
    let mut lo = 0usize;
    for a in 0..idxs.len() {
        let ta = events[idxs[a]].timestamp;
        while events[idxs[lo]].timestamp < ta - delta {
            lo += 1;
        }
        let follower = events[idxs[a]].tag;
        for b in lo..a {
            if events[idxs[b]].timestamp < ta {
                *m.cell_mut(follower, events[idxs[b]].tag) += 1;
            }
        }
    }
}

/// A maximal burst of same-tag events: consecutive events whose gap (from
/// the end of the running burst, durations included) stays within `gap`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Run {
    pub tag: TagId,
    pub start: f64,
    pub end: f64,
    pub length: usize,
    pub source: Option<String>,
}

/// Merges consecutive events of `tag` into runs. Runs never span sources and
/// come back time-ordered (per source, groups concatenated in source order).
pub fn segment_runs(stream: &TagStream, tag: TagId, gap: f64) -> Result<Vec<Run>, MatrixError> {
    if !(gap > 0.0) {
        return Err(MatrixError::NonPositiveWindow(gap));
    }
    if tag >= stream.k() {
        return Err(MatrixError::UnknownTag {
            tag,
            k: stream.k(),
        });
    }
    let mut runs = Vec::new();
    for (source, idxs) in stream.source_groups() {
        let mut current: Option<Run> = None;
        for &i in &idxs {
            let e = &stream.events()[i];
            if e.tag != tag {
                continue;
            }
            match current.as_mut() {
                Some(run) if e.timestamp - run.end <= gap => {
                    run.end = run.end.max(e.end());
                    run.length += 1;
                }
                _ => {
                    if let Some(done) = current.take() {
                        runs.push(done);
                    }
                    current = Some(Run {
                        tag,
                        start: e.timestamp,
                        end: e.end(),
                        length: 1,
                        source: source.map(str::to_string),
                    });
                }
            }
        }
        if let Some(done) = current.take() {
            runs.push(done);
        }
    }
    Ok(runs)
}

/// Renders a count matrix as CSV with tag-name headers on both axes.
pub fn matrix_to_csv(m: &PairCountMatrix, names: &[String]) -> String {
    let mut out = String::from("tag");
    for n in names {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for r in 0..m.k() {
        out.push_str(&names[r]);
        for c in 0..m.k() {
            out.push(',');
            out.push_str(&m.cell(r, c).to_string());
        }
        out.push('\n');
    }
    out
}

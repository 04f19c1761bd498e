//! Event data model, stream parsing and the tag registry.
//!
//! The event-log format is one record per line, `timestamp,tag[,duration][,source]`,
//! with an optional `#span=<seconds>` header and `#` comment lines. The taxonomy
//! format is one `/`-separated path per line whose leaf segment is the tag name.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a tag in the registry, `0..k`.
pub type TagId = usize;

#[derive(Debug, Error, PartialEq)]
pub enum StreamError {
    #[error("line {line}: malformed record: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: unknown tag {name:?}")]
    UnknownTag { line: usize, name: String },
    #[error("line {line}: negative timestamp")]
    NegativeTimestamp { line: usize },
    #[error("line {line}: duplicate #span header")]
    DuplicateHeader { line: usize },
    #[error("span {span} is smaller than the last event timestamp {last}")]
    SpanTooSmall { span: f64, last: f64 },
    #[error("invalid event: {0}")]
    InvalidEvent(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum RegistryError {
    #[error("taxonomy file declares no tags")]
    Empty,
    #[error("duplicate tag name {0:?}")]
    DuplicateTag(String),
    #[error("line {line}: malformed taxonomy path: {reason}")]
    MalformedPath { line: usize, reason: String },
}

/// One timestamped tag instance.
///
/// `duration` is kept only for run segmentation; all pair counting treats
/// events as points at their start time. `source` identifies the environment
/// (home) the event was recorded in; counting never pairs events across
/// sources.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagEvent {
    pub tag: TagId,
    pub timestamp: f64,
    pub duration: Option<f64>,
    pub source: Option<String>,
}

impl TagEvent {
    pub fn point(tag: TagId, timestamp: f64) -> Self {
        TagEvent {
            tag,
            timestamp,
            duration: None,
            source: None,
        }
    }

    /// End of the event on the time axis: start plus duration when present.
    pub fn end(&self) -> f64 {
        self.timestamp + self.duration.unwrap_or(0.0)
    }
}

/// A validated, time-sorted sequence of tag events.
///
/// Events are ordered by timestamp, ties broken by tag index and then input
/// order. `span` is the observation length in seconds and may exceed the last
/// timestamp. `per_tag_counts[i]` is the number of events carrying tag `i`.
/// `epoch` is an optional ISO-8601 instant that second 0 corresponds to; it
/// only feeds reporting, never the math.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagStream {
    events: Vec<TagEvent>,
    span: f64,
    k: usize,
    per_tag_counts: Vec<u64>,
    #[serde(default)]
    epoch: Option<String>,
}

impl TagStream {
    /// Builds a stream from unordered events, sorting and validating them.
    /// `span` of `None` means "use the last event timestamp" (0 when empty).
    pub fn from_events(
        mut events: Vec<TagEvent>,
        span: Option<f64>,
        k: usize,
    ) -> Result<Self, StreamError> {
        for e in &events {
            if e.tag >= k {
                return Err(StreamError::InvalidEvent(format!(
                    "tag index {} out of range for k={}",
                    e.tag, k
                )));
            }
            if !e.timestamp.is_finite() || e.timestamp < 0.0 {
                return Err(StreamError::InvalidEvent(format!(
                    "timestamp {} is not a non-negative finite number",
                    e.timestamp
                )));
            }
            if let Some(d) = e.duration {
                if !d.is_finite() || d < 0.0 {
                    return Err(StreamError::InvalidEvent(format!(
                        "duration {d} is not a non-negative finite number"
                    )));
                }
            }
        }
        // Stable, so events equal in (timestamp, tag) keep input order.
        events.sort_by(|a, b| {
            a.timestamp
                .total_cmp(&b.timestamp)
                .then(a.tag.cmp(&b.tag))
        });
        let last = events.last().map(|e| e.timestamp).unwrap_or(0.0);
        let span = span.unwrap_or(last);
        if span < last {
            return Err(StreamError::SpanTooSmall { span, last });
        }
        let mut per_tag_counts = vec![0u64; k];
        for e in &events {
            per_tag_counts[e.tag] += 1;
        }
        Ok(TagStream {
            events,
            span,
            k,
            per_tag_counts,
            epoch: None,
        })
    }

    pub fn with_epoch(mut self, epoch: Option<String>) -> Self {
        self.epoch = epoch;
        self
    }

    pub fn events(&self) -> &[TagEvent] {
        &self.events
    }

    pub fn span(&self) -> f64 {
        self.span
    }

    /// ISO-8601 instant second 0 maps to, when the log declared one.
    pub fn epoch(&self) -> Option<&str> {
        self.epoch.as_deref()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn per_tag_counts(&self) -> &[u64] {
        &self.per_tag_counts
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Event indices grouped by source, in deterministic source order.
    /// Within a group the indices stay time-sorted. Streams without any
    /// source annotation yield a single group.
    pub fn source_groups(&self) -> Vec<(Option<&str>, Vec<usize>)> {
        let mut groups: BTreeMap<Option<&str>, Vec<usize>> = BTreeMap::new();
        for (idx, e) in self.events.iter().enumerate() {
            groups.entry(e.source.as_deref()).or_default().push(idx);
        }
        if groups.is_empty() {
            return vec![(None, Vec::new())];
        }
        groups.into_iter().collect()
    }

    /// Returns a copy of the stream with every event's tag replaced by
    /// `labels[i]` for event i. Used by the permutation null.
    pub fn with_tags(&self, labels: &[TagId]) -> Result<Self, StreamError> {
        if labels.len() != self.events.len() {
            return Err(StreamError::InvalidEvent(format!(
                "label vector length {} does not match event count {}",
                labels.len(),
                self.events.len()
            )));
        }
        let events = self
            .events
            .iter()
            .zip(labels)
            .map(|(e, &tag)| TagEvent { tag, ..e.clone() })
            .collect();
        Ok(Self::from_events(events, Some(self.span), self.k)?.with_epoch(self.epoch.clone()))
    }
}

/// Flattened tag taxonomy: unique leaf names plus the parent category path
/// each tag was declared under. The hierarchy only feeds report labeling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagRegistry {
    names: Vec<String>,
    parents: Vec<Option<String>>,
    #[serde(skip)]
    by_name: HashMap<String, TagId>,
}

impl TagRegistry {
    pub fn new(entries: Vec<(String, Option<String>)>) -> Result<Self, RegistryError> {
        if entries.is_empty() {
            return Err(RegistryError::Empty);
        }
        let mut names = Vec::with_capacity(entries.len());
        let mut parents = Vec::with_capacity(entries.len());
        let mut by_name = HashMap::new();
        for (name, parent) in entries {
            if by_name.insert(name.clone(), names.len()).is_some() {
                return Err(RegistryError::DuplicateTag(name));
            }
            names.push(name);
            parents.push(parent);
        }
        Ok(TagRegistry {
            names,
            parents,
            by_name,
        })
    }

    /// Registry with generated names `t00`, `t01`, ... — used for synthetic
    /// streams.
    pub fn synthetic(k: usize) -> Self {
        let entries = (0..k)
            .map(|i| (format!("t{i:02}"), Some("synthetic".to_string())))
            .collect();
        Self::new(entries).expect("generated names are unique and non-empty")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, tag: TagId) -> &str {
        &self.names[tag]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn parent(&self, tag: TagId) -> Option<&str> {
        self.parents[tag].as_deref()
    }

    pub fn index_of(&self, name: &str) -> Option<TagId> {
        self.by_name.get(name).copied()
    }
}

/// Parses a taxonomy file into a registry.
///
/// One path per line, segments separated by `/`, leaf segment is the tag
/// name. Blank lines and `#` comments are skipped.
pub fn load_registry(text: &str) -> Result<TagRegistry, RegistryError> {
    let mut entries = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let segments: Vec<&str> = line.split('/').collect();
        if segments.iter().any(|s| s.trim().is_empty()) {
            return Err(RegistryError::MalformedPath {
                line: lineno + 1,
                reason: "empty path segment".to_string(),
            });
        }
        let name = segments.last().unwrap().trim().to_string();
        let parent = if segments.len() > 1 {
            Some(
                segments[..segments.len() - 1]
                    .iter()
                    .map(|s| s.trim())
                    .collect::<Vec<_>>()
                    .join("/"),
            )
        } else {
            None
        };
        entries.push((name, parent));
    }
    TagRegistry::new(entries)
}

/// Parses an event log against a registry.
///
/// Records may appear in any time order; the returned stream is sorted.
/// The optional `#span=<seconds>` header fixes the observation length,
/// otherwise the last timestamp is used.
pub fn parse_stream(text: &str, registry: &TagRegistry) -> Result<TagStream, StreamError> {
    let mut events = Vec::new();
    let mut span: Option<f64> = None;
    let mut epoch: Option<String> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = lineno + 1;
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("#span=") {
            if span.is_some() {
                return Err(StreamError::DuplicateHeader { line: lineno });
            }
            let value: f64 = rest.trim().parse().map_err(|_| StreamError::MalformedLine {
                line: lineno,
                reason: format!("bad span value {rest:?}"),
            })?;
            if !value.is_finite() || value < 0.0 {
                return Err(StreamError::MalformedLine {
                    line: lineno,
                    reason: "span must be a non-negative finite number".to_string(),
                });
            }
            span = Some(value);
            continue;
        }
        if let Some(rest) = line.strip_prefix("#epoch=") {
            if epoch.is_some() {
                return Err(StreamError::DuplicateHeader { line: lineno });
            }
            epoch = Some(rest.trim().to_string());
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        events.push(parse_record(line, lineno, registry)?);
    }
    let last = events
        .iter()
        .map(|e| e.timestamp)
        .fold(f64::NEG_INFINITY, f64::max);
    if let Some(s) = span {
        if !events.is_empty() && s < last {
            return Err(StreamError::SpanTooSmall { span: s, last });
        }
    }
    Ok(TagStream::from_events(events, span, registry.len())?.with_epoch(epoch))
}

fn parse_record(
    line: &str,
    lineno: usize,
    registry: &TagRegistry,
) -> Result<TagEvent, StreamError> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() < 2 || fields.len() > 4 {
        return Err(StreamError::MalformedLine {
            line: lineno,
            reason: format!("expected 2..4 comma-separated fields, got {}", fields.len()),
        });
    }
    let timestamp: f64 = fields[0]
        .trim()
        .parse()
        .map_err(|_| StreamError::MalformedLine {
            line: lineno,
            reason: format!("bad timestamp {:?}", fields[0]),
        })?;
    if !timestamp.is_finite() {
        return Err(StreamError::MalformedLine {
            line: lineno,
            reason: "timestamp must be finite".to_string(),
        });
    }
    if timestamp < 0.0 {
        return Err(StreamError::NegativeTimestamp { line: lineno });
    }
    let name = fields[1].trim();
    let tag = registry
        .index_of(name)
        .ok_or_else(|| StreamError::UnknownTag {
            line: lineno,
            name: name.to_string(),
        })?;
    let duration = match fields.get(2).map(|s| s.trim()) {
        None | Some("") => None,
        Some(field) => {
            let d: f64 = field.parse().map_err(|_| StreamError::MalformedLine {
                line: lineno,
                reason: format!("bad duration {field:?}"),
            })?;
            if !d.is_finite() || d < 0.0 {
                return Err(StreamError::MalformedLine {
                    line: lineno,
                    reason: "duration must be non-negative and finite".to_string(),
                });
            }
            Some(d)
        }
    };
    let source = match fields.get(3).map(|s| s.trim()) {
        None | Some("") => None,
        Some(s) => Some(s.to_string()),
    };
    Ok(TagEvent {
        tag,
        timestamp,
        duration,
        source,
    })
}

/// Writes a stream back to the event-log format. `parse_stream` of the
/// output reproduces the stream exactly.
pub fn serialize_stream(stream: &TagStream, registry: &TagRegistry) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "#span={}", stream.span());
    for e in stream.events() {
        let _ = write!(out, "{},{}", e.timestamp, registry.name(e.tag));
        match (&e.duration, &e.source) {
            (None, None) => {}
            (Some(d), None) => {
                let _ = write!(out, ",{d}");
            }
            (None, Some(s)) => {
                let _ = write!(out, ",,{s}");
            }
            (Some(d), Some(s)) => {
                let _ = write!(out, ",{d},{s}");
            }
        }
        out.push('\n');
    }
    out
}

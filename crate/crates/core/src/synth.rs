//! Synthetic tag streams with known ground truth: independent Poisson
//! backgrounds plus planted episode chains and planted run-boundary
//! associations. All sampling runs on the portable splitmix64 generator
//! (see [`crate::rng`]), so a config and seed reproduce the exact stream.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::{TagEvent, TagId, TagStream};
use crate::rng::SplitMix64;

pub use crate::rng::{shuffle, SplitMix64 as Rng64};

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

/// One episode chain to plant: `count` instances at uniform start times,
/// each step gap drawn uniformly from `[gap_min, gap_max)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedEpisode {
    pub label: String,
    pub chain: Vec<TagId>,
    pub count: u64,
    pub gap_min: f64,
    pub gap_max: f64,
    /// Matching delay the chain is meant to be found with; gap bounds must
    /// stay within it.
    pub step_max_delay: f64,
}

/// A planted before/after imbalance of trigger events around run ends:
/// `run_ends` runs of `run_tag` are laid out in evenly jittered slots, and
/// each end receives a trigger in the window before it with probability
/// `base_prob × lift` and after it with probability `base_prob`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedBoundary {
    pub run_tag: TagId,
    pub trigger_tag: TagId,
    pub lift: f64,
    pub run_ends: u64,
    pub run_events: u32,
    pub run_event_gap: f64,
    pub window: f64,
    pub base_prob: f64,
}

/// Generative description of a synthetic stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub tags: usize,
    pub span: f64,
    pub background_rates: Vec<f64>,
    #[serde(default)]
    pub planted_episodes: Vec<PlantedEpisode>,
    #[serde(default)]
    pub planted_boundary: Option<PlantedBoundary>,
    pub seed: u64,
}

impl SynthConfig {
    /// A flat background with no plants.
    pub fn background_only(tags: usize, span: f64, rate_per_tag: f64, seed: u64) -> Self {
        SynthConfig {
            tags,
            span,
            background_rates: vec![rate_per_tag; tags],
            planted_episodes: Vec::new(),
            planted_boundary: None,
            seed,
        }
    }

    /// The scale of the reference corpus: 50 tags, ~5 months of recording,
    /// ~319,204 tag instances with a linear ramp of per-tag rates.
    pub fn paper_scale(seed: u64) -> Self {
        let tags = 50usize;
        let span = 13_000_000.0;
        let total_target = 319_204.0;
        let weight_sum: f64 = (1..=tags).map(|w| w as f64).sum();
        let background_rates = (1..=tags)
            .map(|w| w as f64 / weight_sum * total_target / span)
            .collect();
        SynthConfig {
            tags,
            span,
            background_rates,
            planted_episodes: Vec::new(),
            planted_boundary: None,
            seed,
        }
    }

    fn validate(&self) -> Result<(), SynthError> {
        let fail = |msg: String| Err(SynthError::InvalidConfig(msg));
        if self.tags == 0 {
            return fail("tags must be at least 1".into());
        }
        if !(self.span > 0.0) {
            return fail(format!("span must be positive, got {}", self.span));
        }
        if self.background_rates.len() != self.tags {
            return fail(format!(
                "expected {} background rates, got {}",
                self.tags,
                self.background_rates.len()
            ));
        }
        if self
            .background_rates
            .iter()
            .any(|r| !r.is_finite() || *r < 0.0)
        {
            return fail("background rates must be non-negative and finite".into());
        }
        for p in &self.planted_episodes {
            if p.chain.len() < 2 {
                return fail(format!("planted chain {:?} is too short", p.label));
            }
            if p.chain.iter().any(|&t| t >= self.tags) {
                return fail(format!("planted chain {:?} uses an unknown tag", p.label));
            }
            if !(p.gap_min > 0.0 && p.gap_min <= p.gap_max && p.gap_max <= p.step_max_delay) {
                return fail(format!(
                    "planted chain {:?} needs 0 < gap_min ≤ gap_max ≤ step_max_delay",
                    p.label
                ));
            }
            let horizon = p.gap_max * (p.chain.len() - 1) as f64;
            if horizon >= self.span {
                return fail(format!("planted chain {:?} does not fit the span", p.label));
            }
        }
        if let Some(b) = &self.planted_boundary {
            if b.run_tag >= self.tags || b.trigger_tag >= self.tags {
                return fail("planted boundary uses an unknown tag".into());
            }
            if b.run_tag == b.trigger_tag {
                return fail("boundary run and trigger tags must differ".into());
            }
            if !(b.lift > 0.0) || !(b.window > 0.0) || b.run_events == 0 {
                return fail("boundary lift, window and run_events must be positive".into());
            }
            if !(0.0..=1.0).contains(&b.base_prob) || b.base_prob * b.lift > 1.0 {
                return fail("boundary probabilities must stay within [0, 1]".into());
            }
            if b.run_ends == 0 {
                return fail("boundary needs at least one run".into());
            }
            if !(b.run_event_gap >= 0.0) {
                return fail("run_event_gap must be non-negative".into());
            }
            let run_len = b.run_event_gap * (b.run_events - 1) as f64;
            let slot = self.span / b.run_ends as f64;
            if slot <= run_len + 2.0 * b.window + 2.0 {
                return fail("span too small for the requested boundary runs".into());
            }
        }
        Ok(())
    }
}

/// One planted episode instance with its events' final stream indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedInstance {
    pub label: String,
    pub start: f64,
    pub end: f64,
    pub event_indices: Vec<usize>,
}

/// Machine-readable labels for everything the generator planted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct GroundTruth {
    pub instances: Vec<PlantedInstance>,
    pub boundary_run_ends: Vec<f64>,
}

/// Poisson draw by chunked CDF inversion: pure f64 arithmetic plus one
/// `exp`, portable and O(mean).
pub fn poisson(rng: &mut SplitMix64, mean: f64) -> u64 {
    if !(mean > 0.0) {
        return 0;
    }
    let mut total = 0u64;
    let mut remaining = mean;
    while remaining > 400.0 {
        total += poisson_small(rng, 400.0);
        remaining -= 400.0;
    }
    total + poisson_small(rng, remaining)
}

fn poisson_small(rng: &mut SplitMix64, mean: f64) -> u64 {
    let u = rng.next_f64();
    let mut p = (-mean).exp();
    let mut cum = p;
    let mut k = 0u64;
    // The walk ends long before this bound; it only guards the tail where
    // floating-point accumulation could stall below u.
    let cap = (mean as u64 + 1) * 20 + 100;
    while u >= cum && k < cap {
        k += 1;
        p *= mean / k as f64;
        cum += p;
    }
    k
}

enum Origin {
    Free,
    Instance { idx: usize },
}

/// Generates the stream and its ground truth. Deterministic in the seed:
/// per-tag backgrounds, planted chains and the boundary layout each draw
/// from generators forked off the master in a fixed order.
pub fn generate(config: &SynthConfig) -> Result<(TagStream, GroundTruth), SynthError> {
    config.validate()?;
    let mut master = SplitMix64::new(config.seed);
    let mut events: Vec<(f64, TagId, Origin)> = Vec::new();

    for tag in 0..config.tags {
        let mut rng = master.fork();
        let mean = config.background_rates[tag] * config.span;
        let n = poisson(&mut rng, mean);
        for _ in 0..n {
            events.push((rng.uniform(0.0, config.span), tag, Origin::Free));
        }
    }

    let mut instances = Vec::new();
    for planted in &config.planted_episodes {
        let mut rng = master.fork();
        let horizon = planted.gap_max * (planted.chain.len() - 1) as f64;
        for _ in 0..planted.count {
            let start = rng.uniform(0.0, config.span - horizon);
            let idx = instances.len();
            let mut t = start;
            for (step, &tag) in planted.chain.iter().enumerate() {
                if step > 0 {
                    t += rng.uniform(planted.gap_min, planted.gap_max);
                }
                events.push((t, tag, Origin::Instance { idx }));
            }
            instances.push(PlantedInstance {
                label: planted.label.clone(),
                start,
                end: t,
                event_indices: Vec::new(),
            });
        }
    }

    let mut boundary_run_ends = Vec::new();
    if let Some(b) = &config.planted_boundary {
        let mut rng = master.fork();
        let run_len = b.run_event_gap * (b.run_events - 1) as f64;
        let slot = config.span / b.run_ends as f64;
        let margin = b.window + 1.0;
        let usable = slot - run_len - 2.0 * margin;
        let pre_prob = b.base_prob * b.lift;
        for run in 0..b.run_ends {
            let start = run as f64 * slot + margin + rng.next_f64() * usable;
            for ev in 0..b.run_events {
                events.push((start + ev as f64 * b.run_event_gap, b.run_tag, Origin::Free));
            }
            let end = start + run_len;
            boundary_run_ends.push(end);
            if rng.next_f64() < pre_prob {
                // trigger in (end − window, end]
                events.push((end - rng.next_f64() * b.window, b.trigger_tag, Origin::Free));
            }
            if rng.next_f64() < b.base_prob {
                // trigger in [end, end + window)
                events.push((end + rng.next_f64() * b.window, b.trigger_tag, Origin::Free));
            }
        }
    }

    // Final stream order; TagStream re-sorts stably with the same key, so
    // the indices recorded here survive.
    let mut order: Vec<usize> = (0..events.len()).collect();
    order.sort_by(|&a, &b| {
        events[a]
            .0
            .total_cmp(&events[b].0)
            .then(events[a].1.cmp(&events[b].1))
            .then(a.cmp(&b))
    });
    let mut stream_events = Vec::with_capacity(events.len());
    for (final_idx, &orig) in order.iter().enumerate() {
        let (t, tag, ref origin) = events[orig];
        if let Origin::Instance { idx } = *origin {
            instances[idx].event_indices.push(final_idx);
        }
        stream_events.push(TagEvent::point(tag, t));
    }

    let stream = TagStream::from_events(stream_events, Some(config.span), config.tags)
        .map_err(|e| SynthError::InvalidConfig(e.to_string()))?;
    Ok((
        stream,
        GroundTruth {
            instances,
            boundary_run_ends,
        },
    ))
}

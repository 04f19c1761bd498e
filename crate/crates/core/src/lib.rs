//! Discovers human activities in streams of timestamped discrete sound-tags
//! by mining overexpressed temporal motifs.
//!
//! The pipeline: parse a tag-event log ([`events`]), count windowed
//! co-occurrence and ordered-following pair matrices with sweep-line kernels
//! ([`matrices`]), score cells against an independence null and test
//! directional asymmetry and run-boundary association ([`stats`]), then
//! build the significant-edge graph, mine frequent ordered chains and match
//! activity templates ([`episodes`]). [`synth`] generates streams with
//! planted activities as the ground-truth oracle for all of it.

pub mod episodes;
pub mod events;
pub mod matrices;
pub mod rng;
pub mod stats;
pub mod synth;

pub use episodes::{
    build_graph, count_minimal_occurrences, episode_significance, export_dot, find_motifs,
    match_template, mine_episodes, Detection, Episode, EpisodeStats, MotifGraph, MotifPattern,
    StreamingMatcher,
};
pub use events::{load_registry, parse_stream, serialize_stream, TagEvent, TagId, TagRegistry, TagStream};
pub use matrices::{
    count_cooccurrence, count_following, matrix_to_csv, segment_runs, MatrixKind,
    PairCountMatrix, Run, StreamMeta,
};
pub use stats::{
    asymmetry, benjamini_hochberg, boundary_association, expected_cooccurrence,
    expected_following, score_matrix, AsymmetryStat, BoundaryStat, Direction, EdgeStat,
    ScoredMatrix,
};
pub use synth::{generate, GroundTruth, PlantedBoundary, PlantedEpisode, SynthConfig};

//! Command implementations behind the `tagmotif` binary: ingest event logs,
//! compute and score pair matrices, mine episodes, detect activity
//! templates (batch or streaming), synthesize benchmark streams and emit a
//! human-readable report.
//!
//! Commands write machine-readable artifacts (CSV, JSON, DOT) under an
//! output directory; everything is a deterministic function of the inputs,
//! the configuration and the seed.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use tagmotif::{
    asymmetry, boundary_association, build_graph, count_cooccurrence, count_following,
    episode_significance, export_dot, find_motifs, match_template, mine_episodes, score_matrix,
    segment_runs, AsymmetryStat, Detection, Episode, EpisodeStats, MatrixKind, MotifPattern,
    PairCountMatrix, ScoredMatrix, StreamingMatcher, SynthConfig, TagEvent, TagRegistry,
    TagStream,
};

/// Everything a pipeline run needs; subcommands fill the fields they use.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub registry: PathBuf,
    pub dt: f64,
    pub delta: f64,
    pub gap: Option<f64>,
    pub alpha: f64,
    pub max_len: usize,
    pub min_support: u64,
    pub permutations: u32,
    pub seed: u64,
    pub significance_top: usize,
    pub out_dir: PathBuf,
}

impl RunConfig {
    pub fn gap(&self) -> f64 {
        self.gap.unwrap_or(self.dt)
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.delta > 0.0 && self.gap() > 0.0) {
            bail!("dt, delta and gap must all be positive");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            bail!("alpha must lie strictly between 0 and 1");
        }
        if self.inputs.is_empty() {
            bail!("at least one input file is required");
        }
        Ok(())
    }
}

pub fn load_registry_file(path: &Path) -> Result<TagRegistry> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading registry {}", path.display()))?;
    tagmotif::load_registry(&text).with_context(|| format!("parsing registry {}", path.display()))
}

fn parse_input(path: &Path, registry: &TagRegistry) -> Result<TagStream> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading events {}", path.display()))?;
    tagmotif::parse_stream(&text, registry)
        .with_context(|| format!("parsing events {}", path.display()))
}

/// Parses every input as its own stream (one file per environment).
pub fn load_streams(config: &RunConfig, registry: &TagRegistry) -> Result<Vec<TagStream>> {
    config
        .inputs
        .iter()
        .map(|p| parse_input(p, registry))
        .collect()
}

/// Combines several input files into one stream for mining/detection,
/// tagging each file's events with the file stem as source so temporal
/// structure never crosses files.
pub fn combined_stream(config: &RunConfig, registry: &TagRegistry) -> Result<TagStream> {
    let streams = load_streams(config, registry)?;
    if streams.len() == 1 {
        return Ok(streams.into_iter().next().unwrap());
    }
    let mut events = Vec::new();
    let mut span = 0.0f64;
    for (path, stream) in config.inputs.iter().zip(streams) {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "input".to_string());
        span = span.max(stream.span());
        for e in stream.events() {
            let mut e = e.clone();
            e.source = Some(match &e.source {
                Some(s) => format!("{stem}:{s}"),
                None => stem.clone(),
            });
            events.push(e);
        }
    }
    Ok(TagStream::from_events(events, Some(span), registry.len())?)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn float_matrix_csv(k: usize, names: &[String], cell: impl Fn(usize, usize) -> f64) -> String {
    let mut out = String::from("tag");
    for n in names {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for r in 0..k {
        out.push_str(&names[r]);
        for c in 0..k {
            out.push(',');
            out.push_str(&format!("{}", cell(r, c)));
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct MatrixSidecar<'a> {
    kind: MatrixKind,
    window: f64,
    span: f64,
    total_events: u64,
    per_tag_counts: &'a [u64],
}

#[derive(Serialize)]
struct FlaggedEdge<'a> {
    kind: MatrixKind,
    i_name: &'a str,
    j_name: &'a str,
    #[serde(flatten)]
    stat: tagmotif::EdgeStat,
}

/// Artifacts of the matrices stage, reused by mine and report.
pub struct MatricesArtifacts {
    pub cooccurrence: PairCountMatrix,
    pub following: PairCountMatrix,
    pub cooc_scored: ScoredMatrix,
    pub following_scored: ScoredMatrix,
    pub asymmetry: Vec<AsymmetryStat>,
}

pub fn compute_matrices(config: &RunConfig, registry: &TagRegistry) -> Result<MatricesArtifacts> {
    config.validate()?;
    let streams = load_streams(config, registry)?;
    let mut cooccurrence = count_cooccurrence(&streams[0], config.dt)?;
    let mut following = count_following(&streams[0], config.delta)?;
    for stream in &streams[1..] {
        cooccurrence.merge(&count_cooccurrence(stream, config.dt)?)?;
        following.merge(&count_following(stream, config.delta)?)?;
    }
    let cooc_scored = score_matrix(&cooccurrence, config.alpha)?;
    let following_scored = score_matrix(&following, config.alpha)?;
    let asym = asymmetry(&following)?;
    Ok(MatricesArtifacts {
        cooccurrence,
        following,
        cooc_scored,
        following_scored,
        asymmetry: asym,
    })
}

/// `matrices` command: count, score and export both matrices.
pub fn cmd_matrices(config: &RunConfig, registry: &TagRegistry) -> Result<MatricesArtifacts> {
    let artifacts = compute_matrices(config, registry)?;
    fs::create_dir_all(&config.out_dir)
        .with_context(|| format!("creating {}", config.out_dir.display()))?;
    let names = registry.names();
    let out = |name: &str| config.out_dir.join(name);

    for (matrix, scored, stem) in [
        (
            &artifacts.cooccurrence,
            &artifacts.cooc_scored,
            "cooccurrence",
        ),
        (&artifacts.following, &artifacts.following_scored, "following"),
    ] {
        write_file(
            &out(&format!("{stem}.csv")),
            &tagmotif::matrix_to_csv(matrix, names),
        )?;
        let sidecar = MatrixSidecar {
            kind: matrix.kind,
            window: matrix.window,
            span: matrix.meta.span,
            total_events: matrix.meta.total_events,
            per_tag_counts: &matrix.meta.per_tag_counts,
        };
        write_file(
            &out(&format!("{stem}_meta.json")),
            &serde_json::to_string_pretty(&sidecar)?,
        )?;
        let k = matrix.k();
        write_file(
            &out(&format!("{stem}_z.csv")),
            &float_matrix_csv(k, names, |r, c| scored.cell(r, c).z),
        )?;
        write_file(
            &out(&format!("{stem}_q.csv")),
            &float_matrix_csv(k, names, |r, c| scored.cell(r, c).q),
        )?;
    }

    let mut edges: Vec<FlaggedEdge> = Vec::new();
    for (scored, kind) in [
        (&artifacts.cooc_scored, MatrixKind::Cooccurrence),
        (&artifacts.following_scored, MatrixKind::Following),
    ] {
        let k = scored.k();
        for r in 0..k {
            for c in 0..k {
                if kind == MatrixKind::Cooccurrence && r > c {
                    continue; // symmetric: report each pair once
                }
                let stat = scored.cell(r, c);
                if stat.flagged {
                    edges.push(FlaggedEdge {
                        kind,
                        i_name: registry.name(stat.i),
                        j_name: registry.name(stat.j),
                        stat: stat.clone(),
                    });
                }
            }
        }
    }
    edges.sort_by(|a, b| {
        a.stat
            .q
            .total_cmp(&b.stat.q)
            .then_with(|| (a.kind == MatrixKind::Following).cmp(&(b.kind == MatrixKind::Following)))
            .then_with(|| (a.stat.i, a.stat.j).cmp(&(b.stat.i, b.stat.j)))
    });
    let report = serde_json::json!({
        "alpha": config.alpha,
        "flagged": edges.len(),
        "edges": edges,
    });
    write_file(&out("flagged_edges.json"), &serde_json::to_string_pretty(&report)?)?;
    Ok(artifacts)
}

#[derive(Serialize)]
struct EpisodeRecord<'a> {
    chain: Vec<&'a str>,
    chain_ids: &'a [usize],
    step_max_delay: f64,
    support: u64,
    empirical_p: Option<f64>,
    per_source_counts: Vec<SourceCount<'a>>,
}

#[derive(Serialize)]
struct SourceCount<'a> {
    source: &'a Option<String>,
    count: u64,
}

fn episode_record<'a>(stats: &'a EpisodeStats, registry: &'a TagRegistry) -> EpisodeRecord<'a> {
    EpisodeRecord {
        chain: stats
            .episode
            .chain
            .iter()
            .map(|&t| registry.name(t))
            .collect(),
        chain_ids: &stats.episode.chain,
        step_max_delay: stats.episode.step_delays[0],
        support: stats.minimal_occurrences,
        empirical_p: stats.empirical_p,
        per_source_counts: stats
            .per_source_counts
            .iter()
            .map(|(source, count)| SourceCount {
                source,
                count: *count,
            })
            .collect(),
    }
}

pub struct MineArtifacts {
    pub episodes: Vec<EpisodeStats>,
    pub graph: tagmotif::MotifGraph,
}

/// `mine` command: frequent episodes with permutation significance for the
/// top chains, the significant-edge graph as DOT, and optional motif
/// enumerations.
pub fn cmd_mine(
    config: &RunConfig,
    registry: &TagRegistry,
    patterns: &[MotifPattern],
) -> Result<MineArtifacts> {
    config.validate()?;
    let artifacts = compute_matrices(config, registry)?;
    let stream = combined_stream(config, registry)?;
    let mut episodes = mine_episodes(&stream, config.max_len, config.delta, config.min_support)?;

    // Permutation tests are costly; run them on the most interesting chains
    // (longest, then highest support).
    let mut order: Vec<usize> = (0..episodes.len()).collect();
    order.sort_by_key(|&i| {
        (
            std::cmp::Reverse(episodes[i].episode.chain.len()),
            std::cmp::Reverse(episodes[i].minimal_occurrences),
            episodes[i].episode.chain.clone(),
        )
    });
    for &i in order.iter().take(config.significance_top) {
        let p = episode_significance(
            &stream,
            &episodes[i].episode,
            config.permutations,
            config.seed,
        )?;
        episodes[i].empirical_p = Some(p);
    }

    let graph = build_graph(
        &artifacts.cooc_scored,
        &artifacts.following_scored,
        &artifacts.asymmetry,
        config.alpha,
        registry.names(),
    )?;

    fs::create_dir_all(&config.out_dir)?;
    let records: Vec<EpisodeRecord> = episodes
        .iter()
        .map(|s| episode_record(s, registry))
        .collect();
    write_file(
        &config.out_dir.join("episodes.json"),
        &serde_json::to_string_pretty(&records)?,
    )?;
    write_file(&config.out_dir.join("motif_graph.dot"), &export_dot(&graph))?;

    if !patterns.is_empty() {
        let mut motifs = BTreeMap::new();
        for pattern in patterns {
            let tuples = find_motifs(&graph, pattern);
            let named: Vec<Vec<&str>> = tuples
                .iter()
                .map(|t| t.iter().map(|&n| registry.name(n)).collect())
                .collect();
            motifs.insert(format!("{pattern:?}"), named);
        }
        write_file(
            &config.out_dir.join("motifs.json"),
            &serde_json::to_string_pretty(&motifs)?,
        )?;
    }
    Ok(MineArtifacts { episodes, graph })
}

/// One episode template as read from the templates JSON file.
#[derive(Debug, Deserialize)]
struct TemplateSpec {
    label: String,
    chain: Vec<String>,
    #[serde(default)]
    step_max_delay: Option<f64>,
    #[serde(default)]
    step_max_delays: Option<Vec<f64>>,
}

/// Loads and validates a templates file against the registry.
pub fn load_templates(path: &Path, registry: &TagRegistry) -> Result<Vec<Episode>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading templates {}", path.display()))?;
    let specs: Vec<TemplateSpec> =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    specs
        .into_iter()
        .map(|spec| {
            let chain: Vec<usize> = spec
                .chain
                .iter()
                .map(|name| {
                    registry
                        .index_of(name)
                        .with_context(|| format!("template {:?}: unknown tag {name:?}", spec.label))
                })
                .collect::<Result<_>>()?;
            let delays = match (&spec.step_max_delays, spec.step_max_delay) {
                (Some(steps), _) => steps.clone(),
                (None, Some(d)) => vec![d; chain.len().saturating_sub(1)],
                (None, None) => bail!(
                    "template {:?}: step_max_delay or step_max_delays is required",
                    spec.label
                ),
            };
            Ok(Episode::new(chain, delays, Some(spec.label.clone()))
                .with_context(|| format!("template {:?}", spec.label))?)
        })
        .collect()
}

#[derive(Serialize)]
struct DetectionRecord<'a> {
    label: &'a str,
    start: f64,
    end: f64,
    events: &'a [usize],
}

fn write_detection(out: &mut impl Write, d: &Detection) -> Result<()> {
    let record = DetectionRecord {
        label: &d.label,
        start: d.start,
        end: d.end,
        events: &d.event_indices,
    };
    serde_json::to_writer(&mut *out, &record)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Batch detection: parse the whole input, match every template, emit
/// detections as JSON lines ordered by (start, end, template).
pub fn detect_batch(
    stream: &TagStream,
    templates: &[Episode],
    out: &mut impl Write,
) -> Result<usize> {
    let mut all: Vec<(f64, f64, usize, Detection)> = Vec::new();
    for (idx, episode) in templates.iter().enumerate() {
        for d in match_template(stream, episode)? {
            all.push((d.start, d.end, idx, d));
        }
    }
    all.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    for (_, _, _, d) in &all {
        write_detection(out, d)?;
    }
    Ok(all.len())
}

/// Streaming detection over an event-log reader: events feed incremental
/// matchers line by line and each detection is emitted as soon as its
/// outcome is final, in exactly the batch order.
pub fn detect_watch(
    reader: impl BufRead,
    registry: &TagRegistry,
    templates: &[Episode],
    out: &mut impl Write,
) -> Result<usize> {
    let mut matchers: Vec<StreamingMatcher> = templates
        .iter()
        .map(|e| StreamingMatcher::new(e.clone()))
        .collect();
    let max_horizon = templates
        .iter()
        .map(|e| e.horizon())
        .fold(0.0f64, f64::max);
    let mut pending: Vec<(f64, f64, usize, Detection)> = Vec::new();
    let mut emitted = 0usize;
    let mut last_time = f64::NEG_INFINITY;
    // events at the same timestamp are reordered by tag index, matching the
    // sort order batch parsing applies
    let mut tie_group: Vec<TagEvent> = Vec::new();
    let mut saw_span_header = false;

    let flush_group = |group: &mut Vec<TagEvent>,
                           matchers: &mut [StreamingMatcher],
                           pending: &mut Vec<(f64, f64, usize, Detection)>|
     -> Result<()> {
        group.sort_by_key(|e| e.tag);
        for event in group.drain(..) {
            for (idx, matcher) in matchers.iter_mut().enumerate() {
                for d in matcher.push(&event) {
                    pending.push((d.start, d.end, idx, d));
                }
            }
        }
        Ok(())
    };

    for (lineno, line) in reader.lines().enumerate() {
        let line = line.context("reading event stream")?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(header) = trimmed.strip_prefix("#span=") {
            if saw_span_header {
                bail!("line {}: duplicate #span header", lineno + 1);
            }
            header
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|s| s.is_finite() && *s >= 0.0)
                .with_context(|| format!("line {}: bad span value", lineno + 1))?;
            saw_span_header = true;
            continue;
        }
        if trimmed.starts_with('#') {
            continue;
        }
        let event = parse_watch_record(trimmed, lineno + 1, registry)?;
        if event.timestamp < last_time {
            bail!(
                "line {}: watch mode needs non-decreasing timestamps",
                lineno + 1
            );
        }
        if event.timestamp > last_time {
            flush_group(&mut tie_group, &mut matchers, &mut pending)?;
            // a detection is final once no matcher can still produce an
            // earlier-starting one; matchers have been fed up to last_time
            let frontier = last_time - max_horizon;
            pending.sort_by(|a, b| {
                a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2))
            });
            let ready = pending.partition_point(|d| d.0 < frontier);
            for (_, _, _, d) in pending.drain(..ready) {
                write_detection(out, &d)?;
                emitted += 1;
            }
            last_time = event.timestamp;
        }
        tie_group.push(event);
    }
    flush_group(&mut tie_group, &mut matchers, &mut pending)?;
    for (idx, matcher) in matchers.iter_mut().enumerate() {
        for d in matcher.finish() {
            pending.push((d.start, d.end, idx, d));
        }
    }
    pending.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
    for (_, _, _, d) in pending.drain(..) {
        write_detection(out, &d)?;
        emitted += 1;
    }
    Ok(emitted)
}

/// Parses a single watch-mode record: same grammar as the batch format.
fn parse_watch_record(line: &str, lineno: usize, registry: &TagRegistry) -> Result<TagEvent> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() < 2 || fields.len() > 4 {
        bail!("line {lineno}: expected 2..4 fields");
    }
    let timestamp: f64 = fields[0]
        .trim()
        .parse()
        .with_context(|| format!("line {lineno}: bad timestamp"))?;
    if !timestamp.is_finite() || timestamp < 0.0 {
        bail!("line {lineno}: timestamp must be non-negative and finite");
    }
    let name = fields[1].trim();
    let tag = registry
        .index_of(name)
        .with_context(|| format!("line {lineno}: unknown tag {name:?}"))?;
    let duration = match fields.get(2).map(|s| s.trim()) {
        None | Some("") => None,
        Some(f) => Some(
            f.parse::<f64>()
                .ok()
                .filter(|d| d.is_finite() && *d >= 0.0)
                .with_context(|| format!("line {lineno}: bad duration"))?,
        ),
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

/// `synth` command: generate a stream plus sidecars from a JSON config.
pub fn cmd_synth(
    config_path: &Path,
    out_events: &Path,
    out_truth: &Path,
    out_registry: Option<&Path>,
) -> Result<()> {
    let text = fs::read_to_string(config_path)
        .with_context(|| format!("reading config {}", config_path.display()))?;
    let config: SynthConfig =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", config_path.display()))?;
    let (stream, truth) = tagmotif::generate(&config)?;
    let registry = TagRegistry::synthetic(config.tags);
    write_file(out_events, &tagmotif::serialize_stream(&stream, &registry))?;
    write_file(out_truth, &serde_json::to_string_pretty(&truth)?)?;
    if let Some(path) = out_registry {
        let taxonomy: String = registry
            .names()
            .iter()
            .map(|n| format!("synthetic/{n}\n"))
            .collect();
        write_file(path, &taxonomy)?;
    }
    Ok(())
}

/// `report` command: a human-readable summary; the machine-readable files
/// stay with `matrices` and `mine`.
pub fn cmd_report(
    config: &RunConfig,
    registry: &TagRegistry,
    boundary: Option<(&str, &str)>,
) -> Result<PathBuf> {
    let artifacts = compute_matrices(config, registry)?;
    let stream = combined_stream(config, registry)?;
    let episodes = mine_episodes(&stream, config.max_len, config.delta, config.min_support)?;

    let mut md = String::new();
    md.push_str("# Tag-stream motif report\n\n");
    md.push_str(&format!(
        "- inputs: {}\n- events: {}\n- tags: {}\n- span: {} s\n- windows: dt={} s, delta={} s, gap={} s\n- alpha: {}\n\n",
        config.inputs.len(),
        artifacts.cooccurrence.meta.total_events,
        registry.len(),
        artifacts.cooccurrence.meta.span,
        config.dt,
        config.delta,
        config.gap(),
        config.alpha,
    ));

    let mut flagged: Vec<(&'static str, &tagmotif::EdgeStat)> = Vec::new();
    for r in 0..registry.len() {
        for c in 0..registry.len() {
            if c >= r {
                let stat = artifacts.cooc_scored.cell(r, c);
                if stat.flagged {
                    flagged.push(("cooccurrence", stat));
                }
            }
            let stat = artifacts.following_scored.cell(r, c);
            if stat.flagged {
                flagged.push(("following", stat));
            }
        }
    }
    flagged.sort_by(|a, b| a.1.q.total_cmp(&b.1.q));
    md.push_str("## Overexpressed pairs\n\n");
    md.push_str("| kind | first | second | observed | expected | z | q |\n");
    md.push_str("|---|---|---|---|---|---|---|\n");
    for (kind, stat) in flagged.iter().take(25) {
        md.push_str(&format!(
            "| {} | {} | {} | {} | {:.4} | {:.2} | {:.3e} |\n",
            kind,
            registry.name(stat.i),
            registry.name(stat.j),
            stat.observed,
            stat.expected,
            stat.z,
            stat.q
        ));
    }
    md.push_str(&format!("\n({} flagged cells in total)\n\n", flagged.len()));

    md.push_str("## Direction asymmetries\n\n");
    let mut asyms: Vec<&AsymmetryStat> = artifacts
        .asymmetry
        .iter()
        .filter(|a| a.n_ij + a.n_ji >= 10)
        .collect();
    asyms.sort_by(|a, b| a.p.total_cmp(&b.p));
    md.push_str("| first→second | count | second→first | count | ratio | p |\n");
    md.push_str("|---|---|---|---|---|---|\n");
    for a in asyms.iter().take(15) {
        md.push_str(&format!(
            "| {}→{} | {} | {}→{} | {} | {:.3} | {:.3e} |\n",
            registry.name(a.i),
            registry.name(a.j),
            a.n_ij,
            registry.name(a.j),
            registry.name(a.i),
            a.n_ji,
            a.ratio,
            a.p
        ));
    }

    md.push_str("\n## Frequent episodes\n\n");
    md.push_str("| chain | support |\n|---|---|\n");
    let mut by_support: Vec<&EpisodeStats> = episodes.iter().collect();
    by_support.sort_by_key(|s| {
        (
            std::cmp::Reverse(s.episode.chain.len()),
            std::cmp::Reverse(s.minimal_occurrences),
        )
    });
    for s in by_support.iter().take(20) {
        let chain: Vec<&str> = s.episode.chain.iter().map(|&t| registry.name(t)).collect();
        md.push_str(&format!(
            "| {} | {} |\n",
            chain.join(" → "),
            s.minimal_occurrences
        ));
    }
    md.push_str(&format!("\n({} frequent episodes in total)\n", episodes.len()));

    if let Some((run_name, trigger_name)) = boundary {
        let run_tag = registry
            .index_of(run_name)
            .with_context(|| format!("unknown run tag {run_name:?}"))?;
        let trigger_tag = registry
            .index_of(trigger_name)
            .with_context(|| format!("unknown trigger tag {trigger_name:?}"))?;
        let runs = segment_runs(&stream, run_tag, config.gap())?;
        let triggers: Vec<TagEvent> = stream
            .events()
            .iter()
            .filter(|e| e.tag == trigger_tag)
            .cloned()
            .collect();
        let stat = boundary_association(&runs, &triggers, config.delta, stream.span())?;
        md.push_str(&format!(
            "\n## Run-boundary association: {run_name} ends around {trigger_name}\n\n\
             - runs: {}\n- ends just after a trigger: {}\n- ends just before a trigger: {}\n\
             - lift: {}\n- p: {:.3e}\n",
            runs.len(),
            stat.ends_after_trigger,
            stat.ends_before_trigger,
            stat.lift,
            stat.p
        ));
    }

    fs::create_dir_all(&config.out_dir)?;
    let path = config.out_dir.join("report.md");
    write_file(&path, &md)?;
    Ok(path)
}

//! The directed graph of significant pair relations and pattern search over
//! it.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::events::TagId;
use crate::matrices::MatrixKind;
use crate::stats::{AsymmetryStat, EdgeStat, ScoredMatrix};

use super::EpisodeError;

/// A directed edge `from → to` carrying the cell stat that flagged it and,
/// for proper edges, the directional-imbalance stat of the unordered pair
/// (stored with `i < j`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotifEdge {
    pub from: TagId,
    pub to: TagId,
    pub stat: EdgeStat,
    pub asym: Option<AsymmetryStat>,
}

/// Directed graph over tags whose edges are all flagged at `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotifGraph {
    k: usize,
    labels: Vec<String>,
    pub alpha: f64,
    pub edges: Vec<MotifEdge>,
    nodes: Vec<TagId>,
}

impl MotifGraph {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Tags that participate in at least one edge, ascending.
    pub fn nodes(&self) -> &[TagId] {
        &self.nodes
    }

    pub fn label(&self, tag: TagId) -> &str {
        &self.labels[tag]
    }

    pub fn has_edge(&self, from: TagId, to: TagId) -> bool {
        self.edges.iter().any(|e| e.from == from && e.to == to)
    }
}

fn pair_index(i: TagId, j: TagId, k: usize) -> usize {
    debug_assert!(i < j);
    i * k - i * (i + 1) / 2 + (j - i - 1)
}

/// Builds the motif graph from scored matrices computed on the same stream
/// and windows.
///
/// A directed edge i→j exists wherever the following cell (row j, column i)
/// is flagged at `alpha`. A flagged co-occurrence pair with no flagged
/// direction contributes a bidirectional edge pair carrying the
/// co-occurrence stat. Diagonal flags become self-loops.
pub fn build_graph(
    cooc: &ScoredMatrix,
    following: &ScoredMatrix,
    asym: &[AsymmetryStat],
    alpha: f64,
    labels: &[String],
) -> Result<MotifGraph, EpisodeError> {
    let k = cooc.k();
    if following.k() != k {
        return Err(EpisodeError::MismatchedK(k, following.k()));
    }
    if labels.len() != k {
        return Err(EpisodeError::MismatchedK(k, labels.len()));
    }
    if asym.len() != k * (k - 1) / 2 {
        return Err(EpisodeError::MismatchedK(k * (k - 1) / 2, asym.len()));
    }
    debug_assert_eq!(cooc.kind, MatrixKind::Cooccurrence);
    debug_assert_eq!(following.kind, MatrixKind::Following);

    let pair_asym = |a: TagId, b: TagId| -> Option<AsymmetryStat> {
        if a == b {
            None
        } else {
            Some(asym[pair_index(a.min(b), a.max(b), k)].clone())
        }
    };
    let direction_flagged =
        |from: TagId, to: TagId| -> bool { following.cell(to, from).q <= alpha };

    let mut edges = Vec::new();
    for from in 0..k {
        for to in 0..k {
            if direction_flagged(from, to) {
                edges.push(MotifEdge {
                    from,
                    to,
                    stat: following.cell(to, from).clone(),
                    asym: pair_asym(from, to),
                });
            }
        }
    }
    for i in 0..k {
        for j in i..k {
            if cooc.cell(i, j).q > alpha {
                continue;
            }
            if direction_flagged(i, j) || direction_flagged(j, i) {
                continue;
            }
            edges.push(MotifEdge {
                from: i,
                to: j,
                stat: cooc.cell(i, j).clone(),
                asym: pair_asym(i, j),
            });
            if i != j {
                edges.push(MotifEdge {
                    from: j,
                    to: i,
                    stat: cooc.cell(i, j).clone(),
                    asym: pair_asym(i, j),
                });
            }
        }
    }
    edges.sort_by(|a, b| (a.from, a.to).cmp(&(b.from, b.to)));
    let nodes: Vec<TagId> = edges
        .iter()
        .flat_map(|e| [e.from, e.to])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    Ok(MotifGraph {
        k,
        labels: labels.to_vec(),
        alpha,
        edges,
        nodes,
    })
}

/// Directed-edge templates searchable in a motif graph. Tuples range over
/// distinct nodes; self-loops never participate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum MotifPattern {
    /// A single directed edge (u, v).
    Edge,
    /// A directed path (u, v, w) of two edges.
    TwoPath,
    /// A mutual pair u→v and v→u, reported once as (u, v) with u < v.
    Loop2,
    /// A directed 3-cycle (u, v, w), reported with the smallest node first.
    Loop3,
    /// A hub with edges to m distinct targets, reported as (hub, sorted targets).
    FanOut(usize),
}

impl FromStr for MotifPattern {
    type Err = EpisodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "edge" => Ok(MotifPattern::Edge),
            "two-path" => Ok(MotifPattern::TwoPath),
            "loop-2" => Ok(MotifPattern::Loop2),
            "loop-3" => Ok(MotifPattern::Loop3),
            other => {
                if let Some(m) = other.strip_prefix("fan-out-") {
                    if let Ok(m) = m.parse::<usize>() {
                        if m >= 1 {
                            return Ok(MotifPattern::FanOut(m));
                        }
                    }
                }
                Err(EpisodeError::UnknownPattern(other.to_string()))
            }
        }
    }
}

/// Exhaustively enumerates node tuples matching the pattern, in
/// lexicographic order.
pub fn find_motifs(graph: &MotifGraph, pattern: &MotifPattern) -> Vec<Vec<TagId>> {
    let adj: BTreeSet<(TagId, TagId)> = graph
        .edges
        .iter()
        .filter(|e| e.from != e.to)
        .map(|e| (e.from, e.to))
        .collect();
    let nodes = graph.nodes();
    let has = |u: TagId, v: TagId| adj.contains(&(u, v));
    let mut out = Vec::new();
    match *pattern {
        MotifPattern::Edge => {
            for &(u, v) in &adj {
                out.push(vec![u, v]);
            }
        }
        MotifPattern::TwoPath => {
            for &u in nodes {
                for &v in nodes {
                    if v == u || !has(u, v) {
                        continue;
                    }
                    for &w in nodes {
                        if w != u && w != v && has(v, w) {
                            out.push(vec![u, v, w]);
                        }
                    }
                }
            }
        }
        MotifPattern::Loop2 => {
            for &u in nodes {
                for &v in nodes {
                    if u < v && has(u, v) && has(v, u) {
                        out.push(vec![u, v]);
                    }
                }
            }
        }
        MotifPattern::Loop3 => {
            for &u in nodes {
                for &v in nodes {
                    if v <= u || !has(u, v) {
                        continue;
                    }
                    for &w in nodes {
                        if w > u && w != v && has(v, w) && has(w, u) {
                            out.push(vec![u, v, w]);
                        }
                    }
                }
            }
        }
        MotifPattern::FanOut(m) => {
            for &u in nodes {
                let targets: Vec<TagId> = nodes
                    .iter()
                    .copied()
                    .filter(|&v| v != u && has(u, v))
                    .collect();
                if targets.len() >= m && m >= 1 {
                    let mut pick = Vec::with_capacity(m);
                    combinations(&targets, m, 0, &mut pick, &mut |combo| {
                        let mut tuple = Vec::with_capacity(m + 1);
                        tuple.push(u);
                        tuple.extend_from_slice(combo);
                        out.push(tuple);
                    });
                }
            }
        }
    }
    out.sort();
    out
}

fn combinations<F: FnMut(&[TagId])>(
    items: &[TagId],
    m: usize,
    from: usize,
    pick: &mut Vec<TagId>,
    emit: &mut F,
) {
    if pick.len() == m {
        emit(pick);
        return;
    }
    for i in from..items.len() {
        pick.push(items[i]);
        combinations(items, m, i + 1, pick, emit);
        pick.pop();
    }
}

/// Renders the graph in DOT format: numeric node ids with name labels,
/// edges labeled with the pair's direction ratio and the flagged cell's
/// q-value. Node and edge order is deterministic.
pub fn export_dot(graph: &MotifGraph) -> String {
    let mut out = String::from("digraph motifs {\n");
    for &n in graph.nodes() {
        let _ = writeln!(out, "  {} [label=\"{}\"];", n, graph.label(n));
    }
    for e in &graph.edges {
        let ratio = match &e.asym {
            Some(a) => format!("{:.3}", a.ratio),
            None => "-".to_string(),
        };
        let _ = writeln!(
            out,
            "  {} -> {} [label=\"ratio={} q={:.3e}\"];",
            e.from, e.to, ratio, e.stat.q
        );
    }
    out.push_str("}\n");
    out
}

//! Significance scoring of count matrices against an independence null.
//!
//! The null model is a homogeneous independent Poisson process per tag with
//! intensity `N_i / span`, conditioned on the observed per-tag counts. Under
//! it, for a window small relative to the span, the expected number of
//! unordered co-occurring pairs is `N_i·N_j·(2·dt/span)` (same-tag:
//! `N_i·(N_i−1)/2 · 2·dt/span`) and the expected number of ordered following
//! pairs is `N_i·N_j·(δ/span)` (same-tag: `N_i·(N_i−1)·δ/span`).
//!
//! Cells get an exact two-sided Poisson p-value below an expectation of 50
//! and a continuity-corrected normal approximation above, then a
//! Benjamini–Hochberg correction over all tested cells. Directional
//! imbalance between the two orders of a pair is tested with an exact
//! binomial.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, Normal, Poisson};
use thiserror::Error;

use crate::events::{TagEvent, TagId};
use crate::matrices::{MatrixKind, PairCountMatrix, Run};

/// Expectation above which the normal approximation replaces the exact
/// Poisson tail.
pub const NORMAL_APPROX_THRESHOLD: f64 = 50.0;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("span must be positive, got {0}")]
    NonPositiveSpan(f64),
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("expected a {expected:?} matrix, got {got:?}")]
    KindMismatch {
        expected: MatrixKind,
        got: MatrixKind,
    },
    #[error("window must be positive, got {0}")]
    NonPositiveWindow(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Undirected,
    /// Tag `i` occurs first, tag `j` follows.
    IThenJ,
}

/// Observed/expected comparison for one matrix cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeStat {
    pub i: TagId,
    pub j: TagId,
    pub direction: Direction,
    pub observed: u64,
    pub expected: f64,
    pub z: f64,
    pub p: f64,
    pub q: f64,
    pub flagged: bool,
}

/// Expected co-occurrence count under the independence null.
pub fn expected_cooccurrence(
    n_i: u64,
    n_j: u64,
    span: f64,
    dt: f64,
    same_tag: bool,
) -> Result<f64, StatsError> {
    if !(span > 0.0) {
        return Err(StatsError::NonPositiveSpan(span));
    }
    if !(dt > 0.0) {
        return Err(StatsError::NonPositiveWindow(dt));
    }
    let pairs = if same_tag {
        n_i as f64 * (n_i as f64 - 1.0) / 2.0
    } else {
        n_i as f64 * n_j as f64
    };
    Ok(pairs * (2.0 * dt / span))
}

/// Expected ordered following count under the independence null.
pub fn expected_following(
    n_i: u64,
    n_j: u64,
    span: f64,
    delta: f64,
    same_tag: bool,
) -> Result<f64, StatsError> {
    if !(span > 0.0) {
        return Err(StatsError::NonPositiveSpan(span));
    }
    if !(delta > 0.0) {
        return Err(StatsError::NonPositiveWindow(delta));
    }
    // Same tag: each of the N·(N−1)/2 unordered pairs yields exactly one
    // ordered pair (the later event follows) and lands in-window with
    // probability 2δ/span, giving N·(N−1)·δ/span.
    let value = if same_tag {
        n_i as f64 * (n_i as f64 - 1.0) * (delta / span)
    } else {
        n_i as f64 * n_j as f64 * (delta / span)
    };
    Ok(value)
}

/// Exact two-sided Poisson p-value: doubled smaller tail, capped at 1.
pub fn poisson_p_exact(observed: u64, expected: f64) -> f64 {
    if expected <= 0.0 {
        return if observed == 0 { 1.0 } else { 0.0 };
    }
    let d = Poisson::new(expected).expect("positive mean");
    let lower = d.cdf(observed);
    let upper = if observed == 0 { 1.0 } else { d.sf(observed - 1) };
    (2.0 * lower.min(upper)).min(1.0)
}

/// Normal approximation of the two-sided Poisson p-value, with continuity
/// correction and a one-term skewness (Edgeworth) correction so the branch
/// stays within 0.01 of the exact tail at the seam.
pub fn poisson_p_normal(observed: u64, expected: f64) -> f64 {
    if expected <= 0.0 {
        return if observed == 0 { 1.0 } else { 0.0 };
    }
    let lower = poisson_cdf_normal(observed as f64, expected);
    let upper = 1.0 - poisson_cdf_normal(observed as f64 - 1.0, expected);
    (2.0 * lower.min(upper)).min(1.0)
}

/// Skew-corrected normal approximation of `P(X ≤ x)` for `X ~ Poisson(μ)`:
/// `Φ(z) − φ(z)·(z² − 1)/(6√μ)` with `z = (x + ½ − μ)/√μ`.
fn poisson_cdf_normal(x: f64, mean: f64) -> f64 {
    let sigma = mean.sqrt();
    let z = (x + 0.5 - mean) / sigma;
    let std = Normal::standard();
    let phi = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    (std.cdf(z) - phi * (z * z - 1.0) / (6.0 * sigma)).clamp(0.0, 1.0)
}

fn poisson_two_sided(observed: u64, expected: f64) -> f64 {
    if expected < NORMAL_APPROX_THRESHOLD {
        poisson_p_exact(observed, expected)
    } else {
        poisson_p_normal(observed, expected)
    }
}

/// Exact two-sided binomial test of `x` successes in `n` trials at
/// success probability ½.
pub fn binomial_two_sided_half(x: u64, n: u64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let small = x.min(n - x);
    if 2 * small == n {
        return 1.0;
    }
    let d = Binomial::new(0.5, n).expect("valid binomial");
    (2.0 * d.cdf(small)).min(1.0)
}

/// Benjamini–Hochberg step-up q-values. `q[i]` is the smallest FDR level at
/// which hypothesis `i` would be rejected.
pub fn benjamini_hochberg(p_values: &[f64]) -> Vec<f64> {
    let m = p_values.len();
    if m == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]));
    let mut q = vec![0.0; m];
    let mut running = 1.0f64;
    for rank in (0..m).rev() {
        let idx = order[rank];
        let adjusted = p_values[idx] * m as f64 / (rank + 1) as f64;
        running = running.min(adjusted);
        // the multiply/divide round trip can land an ulp below p; q ≥ p
        // holds in exact arithmetic
        q[idx] = running.max(p_values[idx]);
    }
    q
}

/// A fully scored matrix: one `EdgeStat` per cell, BH-corrected together.
///
/// Co-occurrence matrices are symmetric, so only the upper triangle plus the
/// diagonal enter the correction; both mirror cells share the same stat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredMatrix {
    pub kind: MatrixKind,
    pub window: f64,
    pub alpha: f64,
    k: usize,
    cells: Vec<EdgeStat>,
}

impl ScoredMatrix {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn cell(&self, row: TagId, col: TagId) -> &EdgeStat {
        &self.cells[row * self.k + col]
    }

    pub fn cells(&self) -> &[EdgeStat] {
        &self.cells
    }

    pub fn flagged(&self) -> impl Iterator<Item = &EdgeStat> {
        self.cells.iter().filter(|c| c.flagged)
    }
}

/// Scores every cell of a count matrix against the independence null.
pub fn score_matrix(matrix: &PairCountMatrix, alpha: f64) -> Result<ScoredMatrix, StatsError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::InvalidAlpha(alpha));
    }
    let k = matrix.k();
    let meta = &matrix.meta;
    let degenerate = meta.total_events == 0;
    if !(meta.span > 0.0) && !degenerate {
        return Err(StatsError::NonPositiveSpan(meta.span));
    }

    // (row, col) cells entering the multiple-testing correction.
    let tested: Vec<(TagId, TagId)> = match matrix.kind {
        MatrixKind::Cooccurrence => (0..k)
            .flat_map(|i| (i..k).map(move |j| (i, j)))
            .collect(),
        MatrixKind::Following => (0..k)
            .flat_map(|r| (0..k).map(move |c| (r, c)))
            .collect(),
    };

    let mut raw = Vec::with_capacity(tested.len());
    for &(row, col) in &tested {
        let observed = matrix.cell(row, col);
        let expected = if degenerate {
            0.0
        } else {
            match matrix.kind {
                MatrixKind::Cooccurrence => expected_cooccurrence(
                    meta.per_tag_counts[row],
                    meta.per_tag_counts[col],
                    meta.span,
                    matrix.window,
                    row == col,
                )?,
                // row = follower j, column = first tag i
                MatrixKind::Following => expected_following(
                    meta.per_tag_counts[col],
                    meta.per_tag_counts[row],
                    meta.span,
                    matrix.window,
                    row == col,
                )?,
            }
        };
        let (z, p) = if expected == 0.0 {
            if observed == 0 {
                (0.0, 1.0)
            } else {
                (f64::INFINITY, 0.0)
            }
        } else {
            (
                (observed as f64 - expected) / expected.sqrt(),
                poisson_two_sided(observed, expected),
            )
        };
        raw.push((row, col, observed, expected, z, p));
    }

    let q = benjamini_hochberg(&raw.iter().map(|r| r.5).collect::<Vec<_>>());

    let placeholder = EdgeStat {
        i: 0,
        j: 0,
        direction: Direction::Undirected,
        observed: 0,
        expected: 0.0,
        z: 0.0,
        p: 1.0,
        q: 1.0,
        flagged: false,
    };
    let mut cells = vec![placeholder; k * k];
    for (idx, &(row, col, observed, expected, z, p)) in raw.iter().enumerate() {
        let stat = match matrix.kind {
            MatrixKind::Cooccurrence => EdgeStat {
                i: row,
                j: col,
                direction: Direction::Undirected,
                observed,
                expected,
                z,
                p,
                q: q[idx],
                flagged: q[idx] <= alpha,
            },
            MatrixKind::Following => EdgeStat {
                i: col,
                j: row,
                direction: Direction::IThenJ,
                observed,
                expected,
                z,
                p,
                q: q[idx],
                flagged: q[idx] <= alpha,
            },
        };
        if matrix.kind == MatrixKind::Cooccurrence && row != col {
            cells[col * k + row] = stat.clone();
        }
        cells[row * k + col] = stat;
    }

    Ok(ScoredMatrix {
        kind: matrix.kind,
        window: matrix.window,
        alpha,
        k,
        cells,
    })
}

/// Directional imbalance between the two orders of an unordered tag pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymmetryStat {
    pub i: TagId,
    pub j: TagId,
    /// Count of i-then-j orderings.
    pub n_ij: u64,
    /// Count of j-then-i orderings.
    pub n_ji: u64,
    /// Larger direction count over the smaller; 1 when both are zero,
    /// infinite when only one direction was observed.
    pub ratio: f64,
    /// Exact two-sided binomial p-value under equal direction probability.
    pub p: f64,
}

impl AsymmetryStat {
    pub fn from_counts(i: TagId, j: TagId, n_ij: u64, n_ji: u64) -> Self {
        let ratio = if n_ij == 0 && n_ji == 0 {
            1.0
        } else if n_ij.min(n_ji) == 0 {
            f64::INFINITY
        } else {
            n_ij.max(n_ji) as f64 / n_ij.min(n_ji) as f64
        };
        AsymmetryStat {
            i,
            j,
            n_ij,
            n_ji,
            ratio,
            p: binomial_two_sided_half(n_ij, n_ij + n_ji),
        }
    }
}

/// Tests every unordered pair (i<j) of a following matrix for directional
/// imbalance.
pub fn asymmetry(following: &PairCountMatrix) -> Result<Vec<AsymmetryStat>, StatsError> {
    if following.kind != MatrixKind::Following {
        return Err(StatsError::KindMismatch {
            expected: MatrixKind::Following,
            got: following.kind,
        });
    }
    let k = following.k();
    let mut out = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in (i + 1)..k {
            // cell[row=follower][col=first]: i-then-j lives at [j][i]
            let n_ij = following.cell(j, i);
            let n_ji = following.cell(i, j);
            out.push(AsymmetryStat::from_counts(i, j, n_ij, n_ji));
        }
    }
    Ok(out)
}

/// Before/after contrast of trigger events around run ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryStat {
    /// Run ends with a trigger in `(end − delta, end]` — the run stopped
    /// just after a trigger.
    pub ends_after_trigger: u64,
    /// Run ends with a trigger in `[end, end + delta)` — the run stopped
    /// just before a trigger.
    pub ends_before_trigger: u64,
    /// Null expectation of either side: half the informative ends.
    pub expected: f64,
    /// `ends_after_trigger / ends_before_trigger`; 1 when both are zero.
    pub lift: f64,
    /// Exact two-sided binomial p-value on the two counts.
    pub p: f64,
}

/// Counts how often runs of one tag end just after versus just before a
/// trigger event of another tag, pairing only within the same source.
pub fn boundary_association(
    runs: &[Run],
    triggers: &[TagEvent],
    delta: f64,
    span: f64,
) -> Result<BoundaryStat, StatsError> {
    if !(delta > 0.0) {
        return Err(StatsError::NonPositiveWindow(delta));
    }
    if !(span > 0.0) {
        return Err(StatsError::NonPositiveSpan(span));
    }
    let mut after = 0u64;
    let mut before = 0u64;
    for run in runs {
        let same_source = |t: &&TagEvent| t.source == run.source;
        if triggers
            .iter()
            .filter(same_source)
            .any(|t| t.timestamp > run.end - delta && t.timestamp <= run.end)
        {
            after += 1;
        }
        if triggers
            .iter()
            .filter(same_source)
            .any(|t| t.timestamp >= run.end && t.timestamp < run.end + delta)
        {
            before += 1;
        }
    }
    let lift = if after == 0 && before == 0 {
        1.0
    } else if before == 0 {
        f64::INFINITY
    } else {
        after as f64 / before as f64
    };
    Ok(BoundaryStat {
        ends_after_trigger: after,
        ends_before_trigger: before,
        expected: (after + before) as f64 / 2.0,
        lift,
        p: binomial_two_sided_half(after, after + before),
    })
}

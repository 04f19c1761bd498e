//! Monte-Carlo verification of the closed-form null expectations: simulate
//! uniform independent event times and compare mean pair counts against the
//! formulas. Simulation count is chosen so the CLT bound is far inside the
//! asserted tolerance.

use tagmotif::rng::SplitMix64;
use tagmotif::{expected_cooccurrence, expected_following};

const SIMS: usize = 50_000;

fn sorted_uniforms(rng: &mut SplitMix64, n: usize, span: f64) -> Vec<f64> {
    let mut xs: Vec<f64> = (0..n).map(|_| rng.uniform(0.0, span)).collect();
    xs.sort_by(f64::total_cmp);
    xs
}

/// Mean unordered cross-pair count with |t_a − t_b| ≤ dt.
fn mc_cross_cooccurrence(n_i: usize, n_j: usize, span: f64, dt: f64, seed: u64) -> f64 {
    let mut rng = SplitMix64::new(seed);
    let mut total = 0u64;
    for _ in 0..SIMS {
        let a = sorted_uniforms(&mut rng, n_i, span);
        let b = sorted_uniforms(&mut rng, n_j, span);
        let mut lo = 0usize;
        let mut hi = 0usize;
        for &t in &a {
            while lo < b.len() && b[lo] < t - dt {
                lo += 1;
            }
            while hi < b.len() && b[hi] <= t + dt {
                hi += 1;
            }
            total += (hi - lo) as u64;
        }
    }
    total as f64 / SIMS as f64
}

/// Mean same-tag unordered pair count with |t_a − t_b| ≤ dt.
fn mc_same_cooccurrence(n: usize, span: f64, dt: f64, seed: u64) -> f64 {
    let mut rng = SplitMix64::new(seed);
    let mut total = 0u64;
    for _ in 0..SIMS {
        let xs = sorted_uniforms(&mut rng, n, span);
        let mut lo = 0usize;
        for (idx, &t) in xs.iter().enumerate() {
            while xs[lo] < t - dt {
                lo += 1;
            }
            total += (idx - lo) as u64;
        }
    }
    total as f64 / SIMS as f64
}

/// Mean ordered cross-pair count with 0 < t_b − t_a ≤ delta (b follows a).
fn mc_cross_following(n_first: usize, n_follow: usize, span: f64, delta: f64, seed: u64) -> f64 {
    let mut rng = SplitMix64::new(seed);
    let mut total = 0u64;
    for _ in 0..SIMS {
        let firsts = sorted_uniforms(&mut rng, n_first, span);
        let followers = sorted_uniforms(&mut rng, n_follow, span);
        let mut lo = 0usize;
        let mut hi = 0usize;
        for &t in &followers {
            while lo < firsts.len() && firsts[lo] < t - delta {
                lo += 1;
            }
            while hi < firsts.len() && firsts[hi] < t {
                hi += 1;
            }
            total += (hi - lo) as u64;
        }
    }
    total as f64 / SIMS as f64
}

/// Mean same-tag ordered pair count with 0 < Δ ≤ delta: every unordered
/// pair of distinct times yields exactly one ordered pair.
fn mc_same_following(n: usize, span: f64, delta: f64, seed: u64) -> f64 {
    mc_same_cooccurrence(n, span, delta, seed)
}

// The spec-scale configuration: N_i=100, N_j=200, T=10⁶ s, window 60 s.
// With 5·10⁴ simulations the standard error of each mean is below 0.01,
// so the ±0.05 assertions are >5σ safe.

#[test]
fn cross_cooccurrence_expectation_is_2_4() {
    let mc = mc_cross_cooccurrence(100, 200, 1e6, 60.0, 0xA1);
    assert!((mc - 2.4).abs() <= 0.05, "monte carlo {mc}");
    let formula = expected_cooccurrence(100, 200, 1e6, 60.0, false).unwrap();
    assert!((formula - 2.4).abs() < 1e-9);
    assert!((mc - formula).abs() <= 0.05);
}

#[test]
fn same_tag_cooccurrence_expectation_is_0_594() {
    let mc = mc_same_cooccurrence(100, 1e6, 60.0, 0xA2);
    assert!((mc - 0.594).abs() <= 0.05, "monte carlo {mc}");
    let formula = expected_cooccurrence(100, 100, 1e6, 60.0, true).unwrap();
    assert!((formula - 0.594).abs() < 1e-9);
    assert!((mc - formula).abs() <= 0.05);
}

#[test]
fn cross_following_expectation_is_1_2() {
    let mc = mc_cross_following(100, 200, 1e6, 60.0, 0xA3);
    assert!((mc - 1.2).abs() <= 0.05, "monte carlo {mc}");
    let formula = expected_following(100, 200, 1e6, 60.0, false).unwrap();
    assert!((formula - 1.2).abs() < 1e-9);
    assert!((mc - formula).abs() <= 0.05);
}

#[test]
fn same_tag_following_expectation_is_0_594() {
    // decides between the candidate same-tag formulas: N(N−1)·δ/T ≈ 0.594
    // fits the simulation, N(N−1)/2·δ/T ≈ 0.297 does not
    let mc = mc_same_following(100, 1e6, 60.0, 0xA4);
    assert!((mc - 0.594).abs() <= 0.05, "monte carlo {mc}");
    assert!((mc - 0.297).abs() > 0.2);
    let formula = expected_following(100, 100, 1e6, 60.0, true).unwrap();
    assert!((formula - 0.594).abs() < 1e-9);
    assert!((mc - formula).abs() <= 0.05);
}

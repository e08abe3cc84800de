//! Cross-module invariants and report-only comparisons: staged-refinement
//! structure, the parity-staged distributional identity, and diagnostics the
//! asymptotic statements only justify in the limit (printed, not asserted).

use statrs::distribution::{ChiSquared, ContinuousCDF};

use koutcube::connectivity::{minimal_disconnected_sets, CutQuery};
use koutcube::experiments::{chi_square_two_sample, trial_seed};
use koutcube::hypercube::{Dimension, Parity};
use koutcube::sampler::{
    derive_key, extend_half, sample_kout, sample_one_out, staged_sample, KOutSample, Seed,
    SplitMix64, UndirectedView,
};
use koutcube::structure::{components, cycle_census, pair_statistic, trajectory};
use koutcube::walk::{exact_distribution, WalkParams};

fn dim(n: u32) -> Dimension {
    Dimension::new(n).unwrap()
}

/// Minimal L-disconnected sets refine monotonically along the staged build:
/// every minimal set of G2 minus L is exactly a union of minimal sets of G1
/// minus L, and those of G1 refine over G0 the same way.
#[test]
fn staged_minimal_sets_refine() {
    let n = dim(6);
    let k = 3u32;
    for t in 0..20u64 {
        let staged = staged_sample(n, k, |_| vec![false; 64], Seed::new(derive_key(&[83, t])))
            .unwrap();
        let g0 = staged.g0().graph().clone();
        let g1 = staged.g1();
        let g2_sample = staged.g2();
        let mut rng = SplitMix64::derive(&[84, t]);
        let removed: Vec<u32> = (0..k - 1).map(|_| rng.next_below(64)).collect();
        let Ok(cut) = CutQuery::new(removed, n) else {
            continue; // collided draw; the next trial covers it
        };
        let census2 = minimal_disconnected_sets(&g2_sample.undirected(), &cut);
        let census1 = minimal_disconnected_sets(&g1.undirected(), &cut);
        let census0 = minimal_disconnected_sets(&g0.undirected(), &cut);
        for (coarse, fine) in [(&census2, &census1), (&census1, &census0)] {
            for big in coarse.sets() {
                let mut covered = 0usize;
                for small in fine.sets() {
                    let inside = small
                        .iter()
                        .filter(|v| big.binary_search(v).is_ok())
                        .count();
                    assert!(
                        inside == 0 || inside == small.len(),
                        "a finer minimal set straddles a coarser one (trial {t})"
                    );
                    covered += if inside == small.len() { inside } else { 0 };
                }
                assert_eq!(covered, big.len(), "union must recover the set (trial {t})");
            }
        }
    }
}

/// Chained even-then-odd half extensions of a 1-out base are distributed as
/// the direct 2-out sampler: pooled degree histograms pass a two-sample
/// chi-square at p > 0.01.
#[test]
fn parity_staged_matches_direct_two_out() {
    let n = dim(8);
    let trials = 2000u64;
    let mut staged_hist = std::collections::BTreeMap::new();
    let mut direct_hist = std::collections::BTreeMap::new();
    for t in 0..trials {
        let staged_seed = Seed::new(derive_key(&[91, t]));
        let base = sample_one_out(n, staged_seed).to_kout().into_graph();
        let half = extend_half(&base, Parity::Even, staged_seed).unwrap();
        let full = extend_half(&half, Parity::Odd, staged_seed).unwrap();
        let staged = KOutSample::try_from(full).unwrap();
        accumulate(&staged.undirected(), &mut staged_hist);

        let direct_seed = Seed::new(derive_key(&[92, t]));
        let direct = sample_kout(n, 2, direct_seed).unwrap();
        accumulate(&direct.undirected(), &mut direct_hist);
    }
    let (stat, df) = chi_square_two_sample(&staged_hist, &direct_hist);
    let p = 1.0 - ChiSquared::new(df as f64).unwrap().cdf(stat);
    assert!(
        p > 0.01,
        "chi-square {stat:.3} with df {df} gives p = {p:.5}; staged {staged_hist:?} direct {direct_hist:?}"
    );
    println!("parity-staged vs direct 2-out: chi2 {stat:.3}, df {df}, p {p:.3}");
}

fn accumulate(view: &UndirectedView, hist: &mut std::collections::BTreeMap<u32, u64>) {
    for v in view.n().vertices() {
        *hist.entry(view.degree(v)).or_insert(0) += 1;
    }
}

/// Report-only: the same-component pair statistic per vertex grows
/// polynomially in n at k = 1; the proof-side expectation bound is
/// (n^2 + 1)^2 per vertex.
#[test]
fn pair_statistic_growth_report() {
    for n_raw in [10u32, 12, 14] {
        let n = dim(n_raw);
        let trials = 200u64;
        let mut total = 0.0f64;
        for t in 0..trials {
            let fmap = sample_one_out(n, Seed::new(trial_seed(77, n_raw, 1, t)));
            let summary = components(&fmap.to_kout().undirected());
            total += pair_statistic(&summary) as f64;
        }
        let per_vertex = total / trials as f64 / n.vertex_count() as f64;
        let proof_bound = ((n_raw as f64).powi(2) + 1.0).powi(2);
        println!(
            "pair statistic at n={n_raw}, k=1: Z'/2^n = {per_vertex:.1} (proof-side bound {proof_bound:.0}, ratio {:.4})",
            per_vertex / proof_bound
        );
    }
}

/// Report-only: orbit coordinate-difference sizes |L_i(v)| against the
/// comparison walk at matched n. The coupling argument says the walk hits 0
/// at least as often as the orbit distance does before a cycle closes.
#[test]
fn orbit_walk_coupling_report() {
    let n_raw = 10u32;
    let n = dim(n_raw);
    let steps = 16usize;
    let trials = 4000u64;
    let mut orbit_mean = vec![0.0f64; steps + 1];
    let mut orbit_zero = vec![0u64; steps + 1];
    for t in 0..trials {
        let fmap = sample_one_out(n, Seed::new(derive_key(&[95, t])));
        let view = trajectory(&fmap, 0, steps);
        for (i, &l) in view.lsizes().iter().enumerate() {
            orbit_mean[i] += l as f64;
            orbit_zero[i] += (l == 0) as u64;
        }
    }
    let dist = exact_distribution(&WalkParams::with_horizon(n_raw, steps).unwrap()).unwrap();
    println!("step | orbit mean |L_i| | walk mean | orbit P(L=0) | walk P(L=0)");
    for i in (0..=steps).step_by(2) {
        let walk_mean: f64 = dist
            .step(i)
            .iter()
            .enumerate()
            .map(|(s, &m)| s as f64 * m)
            .sum();
        println!(
            "{i:4} | {:16.3} | {walk_mean:9.3} | {:12.4} | {:10.4}",
            orbit_mean[i] / trials as f64,
            orbit_zero[i] as f64 / trials as f64,
            dist.p_zero(i)
        );
    }
}

/// Max-tail observations at several n; the n^2 bound is asymptotic, so
/// excesses are logged rather than asserted.
#[test]
fn max_tail_report_across_sizes() {
    let mut violations = 0u64;
    for n_raw in [8u32, 12, 16] {
        let n = dim(n_raw);
        let mut worst = 0u32;
        for t in 0..100u64 {
            let fmap = sample_one_out(n, Seed::new(trial_seed(96, n_raw, 1, t)));
            let tail = cycle_census(&fmap).max_tail();
            worst = worst.max(tail);
            if tail > n_raw * n_raw {
                violations += 1;
                println!("tail bound exceeded: n={n_raw} trial={t} tail={tail}");
            }
        }
        println!("max tail at n={n_raw} over 100 trials: {worst} (n^2 = {})", n_raw * n_raw);
    }
    println!("tail bound violations: {violations}");
}

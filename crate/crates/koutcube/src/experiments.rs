//! Seeded Monte Carlo trial runner with deterministic parallelism.
//!
//! Each trial's seed is derived from `(master, n, k, trial)`, so the record
//! stream is identical for any worker count; trials inside one `(n, k)` cell
//! run in parallel and are emitted in `(n, k, trial)` order.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connectivity::{
    active_set, degree_census, is_connected, subcube_component_scan, vertex_connectivity,
    k_one, k_zero, ACTIVE_SET_CAP_LIMIT, KCONN_VERTEX_LIMIT,
};
use crate::hypercube::Dimension;
use crate::sampler::{
    derive_key, sample_kout, sample_one_out, staged_sample, KOutSample, Seed, TAG_TRIAL,
};
use crate::structure::{components, cycle_census, pair_statistic};
use crate::{Error, Result};

pub const DEFAULT_ACTIVE_CAP: u32 = 8;

/// Which per-trial analyses to run and record.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MetricSelection {
    /// component_count, giant_fraction, second_fraction, Z_prime
    pub components: bool,
    /// two_cycles, longer_cycles, max_tail (k = 1 only)
    pub cycles: bool,
    /// connected
    pub connectivity: bool,
    /// kappa (desk-scale flow computation)
    pub kconn: bool,
    /// degree_k_count
    pub degrees: bool,
    /// subcube_hits
    pub subcube: bool,
}

/// Canonical metric column order for tabular output.
pub const METRIC_NAMES: [&str; 11] = [
    "component_count",
    "giant_fraction",
    "second_fraction",
    "Z_prime",
    "two_cycles",
    "longer_cycles",
    "max_tail",
    "connected",
    "kappa",
    "degree_k_count",
    "subcube_hits",
];

impl MetricSelection {
    /// The metric keys this selection produces, in canonical order.
    pub fn metric_names(&self) -> Vec<&'static str> {
        let mut names = Vec::new();
        if self.components {
            names.extend(["component_count", "giant_fraction", "second_fraction", "Z_prime"]);
        }
        if self.cycles {
            names.extend(["two_cycles", "longer_cycles", "max_tail"]);
        }
        if self.connectivity {
            names.push("connected");
        }
        if self.kconn {
            names.push("kappa");
        }
        if self.degrees {
            names.push("degree_k_count");
        }
        if self.subcube {
            names.push("subcube_hits");
        }
        names
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub ns: Vec<u32>,
    pub ks: Vec<u32>,
    pub trials: u64,
    pub master_seed: u64,
    pub metrics: MetricSelection,
    /// Ceiling passed to the vertex-connectivity computation (defaults to n).
    pub kconn_ceiling: Option<u32>,
    /// Size cap used by active-set based staged analyses.
    pub active_cap: u32,
}

impl ExperimentConfig {
    pub fn new(
        name: impl Into<String>,
        ns: Vec<u32>,
        ks: Vec<u32>,
        trials: u64,
        master_seed: u64,
        metrics: MetricSelection,
    ) -> Self {
        ExperimentConfig {
            name: name.into(),
            ns,
            ks,
            trials,
            master_seed,
            metrics,
            kconn_ceiling: None,
            active_cap: DEFAULT_ACTIVE_CAP,
        }
    }

    /// Checks every (n, k) cell before any trial runs.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        if self.ns.is_empty() || self.ks.is_empty() {
            return Err(Error::InvalidParameter("empty n or k list".into()));
        }
        if self.active_cap > ACTIVE_SET_CAP_LIMIT {
            return Err(Error::InvalidParameter(format!(
                "active cap {} above limit {ACTIVE_SET_CAP_LIMIT}",
                self.active_cap
            )));
        }
        for &n in &self.ns {
            let dim = Dimension::new(n)?;
            for &k in &self.ks {
                if k < 1 || k > n {
                    return Err(Error::InvalidParameter(format!(
                        "infeasible pair n = {n}, k = {k}"
                    )));
                }
                if self.metrics.cycles && k != 1 {
                    return Err(Error::InvalidParameter(format!(
                        "cycle metrics need k = 1, got k = {k}"
                    )));
                }
            }
            if self.metrics.kconn {
                if dim.vertex_count() > KCONN_VERTEX_LIMIT {
                    return Err(Error::InvalidParameter(format!(
                        "kappa metric is capped at {KCONN_VERTEX_LIMIT} vertices, got 2^{n}"
                    )));
                }
                if let Some(c) = self.kconn_ceiling {
                    if c < 1 || c > n {
                        return Err(Error::InvalidParameter(format!(
                            "kconn ceiling {c} out of range 1..={n}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// One seeded trial outcome; the unit of the results stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub experiment: String,
    pub n: u32,
    pub k: u32,
    pub trial: u64,
    pub seed: u64,
    pub metrics: BTreeMap<String, f64>,
}

impl TrialRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("record serialization cannot fail")
    }

    pub fn from_json(line: &str) -> Result<Self> {
        serde_json::from_str(line).map_err(|e| Error::Parse(format!("bad trial record: {e}")))
    }
}

/// Runs the full grid, emitting records in `(n, k, trial)` order. `threads`
/// is the rayon worker count (0 = default); it never changes the output.
pub fn run<F>(config: &ExperimentConfig, threads: usize, mut emit: F) -> Result<()>
where
    F: FnMut(&TrialRecord),
{
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    for &n in &config.ns {
        for &k in &config.ks {
            let records: Vec<TrialRecord> = pool.install(|| {
                (0..config.trials)
                    .into_par_iter()
                    .map(|trial| run_trial(config, n, k, trial))
                    .collect()
            });
            for record in &records {
                emit(record);
            }
        }
    }
    Ok(())
}

/// Convenience wrapper collecting the stream into memory.
pub fn run_collect(config: &ExperimentConfig, threads: usize) -> Result<Vec<TrialRecord>> {
    let mut out = Vec::new();
    run(config, threads, |r| out.push(r.clone()))?;
    Ok(out)
}

pub fn trial_seed(master: u64, n: u32, k: u32, trial: u64) -> u64 {
    derive_key(&[master, TAG_TRIAL, n as u64, k as u64, trial])
}

fn run_trial(config: &ExperimentConfig, n_raw: u32, k: u32, trial: u64) -> TrialRecord {
    let n = Dimension::new(n_raw).expect("validated");
    let seed_value = trial_seed(config.master_seed, n_raw, k, trial);
    let seed = Seed::new(seed_value);
    let sel = config.metrics;
    let mut metrics = BTreeMap::new();

    let sample: KOutSample = if k == 1 {
        let fmap = sample_one_out(n, seed);
        if sel.cycles {
            let census = cycle_census(&fmap);
            metrics.insert("two_cycles".into(), census.two_cycles() as f64);
            metrics.insert("longer_cycles".into(), census.longer_cycles() as f64);
            metrics.insert("max_tail".into(), census.max_tail() as f64);
        }
        fmap.to_kout()
    } else {
        sample_kout(n, k, seed).expect("validated")
    };
    let view = sample.undirected();

    if sel.components || sel.connectivity {
        let summary = components(&view);
        if sel.components {
            metrics.insert("component_count".into(), summary.count() as f64);
            metrics.insert("giant_fraction".into(), summary.giant_fraction());
            metrics.insert("second_fraction".into(), summary.second_fraction());
            metrics.insert("Z_prime".into(), pair_statistic(&summary) as f64);
        }
        if sel.connectivity {
            metrics.insert("connected".into(), summary.is_connected() as u64 as f64);
        }
    }
    if sel.kconn {
        let ceiling = config.kconn_ceiling.unwrap_or(n_raw);
        let kappa = vertex_connectivity(&view, ceiling).expect("validated cap");
        metrics.insert("kappa".into(), kappa as f64);
    }
    if sel.degrees {
        metrics.insert(
            "degree_k_count".into(),
            degree_census(&sample).degree_k_count() as f64,
        );
    }
    if sel.subcube {
        metrics.insert(
            "subcube_hits".into(),
            subcube_component_scan(&sample).len() as f64,
        );
    }

    TrialRecord {
        experiment: config.name.clone(),
        n: n_raw,
        k,
        trial,
        seed: seed_value,
        metrics,
    }
}

/// Wilson 95% score interval for a binomial rate; stable near 0 and 1.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.96f64;
    let m = trials as f64;
    let p = successes as f64 / m;
    let z2 = z * z;
    let denom = 1.0 + z2 / m;
    let center = (p + z2 / (2.0 * m)) / denom;
    let half = z * (p * (1.0 - p) / m + z2 / (4.0 * m * m)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Aggregated statistics for one `(n, k, metric)` group. The Wilson interval
/// is present only for metrics whose observed values are all 0 or 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub n: u32,
    pub k: u32,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub wilson: Option<(f64, f64)>,
    pub min: f64,
    pub max: f64,
    pub count: u64,
}

/// Exact group-by `(n, k, metric)` fold over a record stream.
pub fn summarize(records: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(u32, u32, String), Vec<f64>> = BTreeMap::new();
    for record in records {
        for (metric, &value) in &record.metrics {
            groups
                .entry((record.n, record.k, metric.clone()))
                .or_default()
                .push(value);
        }
    }
    groups
        .into_iter()
        .map(|((n, k, metric), values)| {
            let count = values.len() as u64;
            let mean = values.iter().sum::<f64>() / count as f64;
            let std = if count > 1 {
                (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count as f64 - 1.0))
                    .sqrt()
            } else {
                0.0
            };
            let bernoulli = values.iter().all(|&v| v == 0.0 || v == 1.0);
            let wilson = bernoulli.then(|| {
                let successes = values.iter().filter(|&&v| v == 1.0).count() as u64;
                wilson_interval(successes, count)
            });
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            SummaryRow {
                n,
                k,
                metric,
                mean,
                std,
                wilson,
                min,
                max,
                count,
            }
        })
        .collect()
}

/// CSV rendering with the stable header
/// `n,k,metric,mean,std,wilson_lo,wilson_hi,min,max,count`.
pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("n,k,metric,mean,std,wilson_lo,wilson_hi,min,max,count\n");
    for row in rows {
        let (lo, hi) = match row.wilson {
            Some((lo, hi)) => (lo.to_string(), hi.to_string()),
            None => (String::new(), String::new()),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            row.n, row.k, row.metric, row.mean, row.std, lo, hi, row.min, row.max, row.count
        ));
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub k: u32,
    pub connected: u64,
    pub trials: u64,
    pub rate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
}

/// Empirical connectivity-rate curve over a k range, with the threshold
/// labels k0 and k1 for the swept n.
#[derive(Debug, Clone, Serialize)]
pub struct SweepCurve {
    pub n: u32,
    pub k0: Option<f64>,
    pub k1: Option<u32>,
    pub points: Vec<SweepPoint>,
}

pub fn threshold_sweep(
    n: u32,
    k_lo: u32,
    k_hi: u32,
    trials: u64,
    master_seed: u64,
    threads: usize,
) -> Result<SweepCurve> {
    if k_lo < 1 || k_lo > k_hi || k_hi > n {
        return Err(Error::InvalidParameter(format!(
            "bad sweep range {k_lo}..={k_hi} for n = {n}"
        )));
    }
    let config = ExperimentConfig::new(
        "threshold_sweep",
        vec![n],
        (k_lo..=k_hi).collect(),
        trials,
        master_seed,
        MetricSelection {
            connectivity: true,
            ..Default::default()
        },
    );
    let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
    run(&config, threads, |record| {
        if record.metrics["connected"] == 1.0 {
            *counts.entry(record.k).or_insert(0) += 1;
        }
    })?;
    let points = (k_lo..=k_hi)
        .map(|k| {
            let connected = counts.get(&k).copied().unwrap_or(0);
            let (wilson_lo, wilson_hi) = wilson_interval(connected, trials);
            SweepPoint {
                k,
                connected,
                trials,
                rate: connected as f64 / trials as f64,
                wilson_lo,
                wilson_hi,
            }
        })
        .collect();
    Ok(SweepCurve {
        n,
        k0: k_zero(n),
        k1: k_one(n),
        points,
    })
}

/// Pearson chi-square statistic comparing two histograms over the same bins,
/// with adjacent-bin pooling until every expected cell count reaches 5.
/// Returns `(statistic, degrees of freedom)`; df = 0 means the tables were
/// degenerate (at most one pooled bin) and the distributions cannot differ.
pub fn chi_square_two_sample(a: &BTreeMap<u32, u64>, b: &BTreeMap<u32, u64>) -> (f64, usize) {
    let keys: Vec<u32> = a.keys().chain(b.keys()).copied().collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let mut cells: Vec<(u64, u64)> = keys
        .iter()
        .map(|k| (a.get(k).copied().unwrap_or(0), b.get(k).copied().unwrap_or(0)))
        .collect();
    let total_a: u64 = cells.iter().map(|c| c.0).sum();
    let total_b: u64 = cells.iter().map(|c| c.1).sum();
    let grand = (total_a + total_b) as f64;
    if grand == 0.0 {
        return (0.0, 0);
    }
    // pool adjacent bins until expected counts are adequate
    let min_expected = |cell: &(u64, u64)| {
        let col = (cell.0 + cell.1) as f64;
        (col * total_a as f64 / grand).min(col * total_b as f64 / grand)
    };
    let mut i = 0;
    while i < cells.len() {
        if min_expected(&cells[i]) < 5.0 && cells.len() > 1 {
            let (ca, cb) = cells.remove(i);
            let j = if i == cells.len() { i - 1 } else { i };
            cells[j].0 += ca;
            cells[j].1 += cb;
            i = i.saturating_sub(1);
        } else {
            i += 1;
        }
    }
    if cells.len() < 2 {
        return (0.0, 0);
    }
    let mut stat = 0.0;
    for (ca, cb) in &cells {
        let col = (ca + cb) as f64;
        let ea = col * total_a as f64 / grand;
        let eb = col * total_b as f64 / grand;
        stat += (*ca as f64 - ea).powi(2) / ea + (*cb as f64 - eb).powi(2) / eb;
    }
    (stat, cells.len() - 1)
}

/// 2x2 chi-square for two binomial counts; 0 when a margin is degenerate.
pub fn chi_square_rates(success_a: u64, trials_a: u64, success_b: u64, trials_b: u64) -> f64 {
    let table = [
        [success_a as f64, (trials_a - success_a) as f64],
        [success_b as f64, (trials_b - success_b) as f64],
    ];
    let grand = (trials_a + trials_b) as f64;
    let col_totals = [table[0][0] + table[1][0], table[0][1] + table[1][1]];
    let row_totals = [trials_a as f64, trials_b as f64];
    let mut stat = 0.0;
    for (row, &row_total) in table.iter().zip(&row_totals) {
        for (&observed, &col_total) in row.iter().zip(&col_totals) {
            let expected = row_total * col_total / grand;
            if expected == 0.0 {
                return 0.0;
            }
            stat += (observed - expected).powi(2) / expected;
        }
    }
    stat
}

/// Side-by-side comparison of the staged three-phase build against the
/// direct sampler at the same (n, k): pooled degree histograms, connectivity
/// counts, and the chi-square statistics for both.
#[derive(Debug, Clone)]
pub struct StagedComparison {
    pub n: u32,
    pub k: u32,
    pub trials: u64,
    pub cap: u32,
    pub staged_degrees: BTreeMap<u32, u64>,
    pub direct_degrees: BTreeMap<u32, u64>,
    pub staged_connected: u64,
    pub direct_connected: u64,
    pub degree_chi_square: f64,
    pub degree_df: usize,
    pub connectivity_chi_square: f64,
}

const ARM_STAGED: u64 = 0xA;
const ARM_DIRECT: u64 = 0xB;

pub fn staged_comparison(
    n_raw: u32,
    k: u32,
    trials: u64,
    cap: u32,
    master_seed: u64,
) -> Result<StagedComparison> {
    let n = Dimension::new(n_raw)?;
    if k < 2 || k > n_raw {
        return Err(Error::InvalidParameter(format!(
            "staged comparison needs 2 <= k <= n, got k = {k}"
        )));
    }
    let mut staged_degrees = BTreeMap::new();
    let mut direct_degrees = BTreeMap::new();
    let mut staged_connected = 0u64;
    let mut direct_connected = 0u64;
    for trial in 0..trials {
        let staged_seed = Seed::new(derive_key(&[master_seed, ARM_STAGED, trial]));
        let staged = staged_sample(
            n,
            k,
            |g0| {
                active_set(g0, cap)
                    .expect("cap validated by caller scale")
                    .membership(n)
            },
            staged_seed,
        )?;
        let g2 = staged.g2();
        accumulate_degrees(&g2, &mut staged_degrees);
        staged_connected += is_connected(&g2.undirected()) as u64;

        let direct_seed = Seed::new(derive_key(&[master_seed, ARM_DIRECT, trial]));
        let direct = sample_kout(n, k, direct_seed)?;
        accumulate_degrees(&direct, &mut direct_degrees);
        direct_connected += is_connected(&direct.undirected()) as u64;
    }
    let (degree_chi_square, degree_df) = chi_square_two_sample(&staged_degrees, &direct_degrees);
    let connectivity_chi_square =
        chi_square_rates(staged_connected, trials, direct_connected, trials);
    Ok(StagedComparison {
        n: n_raw,
        k,
        trials,
        cap,
        staged_degrees,
        direct_degrees,
        staged_connected,
        direct_connected,
        degree_chi_square,
        degree_df,
        connectivity_chi_square,
    })
}

fn accumulate_degrees(sample: &KOutSample, hist: &mut BTreeMap<u32, u64>) {
    let view = sample.undirected();
    for v in sample.n().vertices() {
        *hist.entry(view.degree(v)).or_insert(0) += 1;
    }
}

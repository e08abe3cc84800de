//! The biased comparison walk on `{0, ..., n}`: from state `L` it steps down
//! with probability `L/n` and up otherwise, starting at 0. The module offers
//! Monte Carlo simulation and an exact forward dynamic program over the
//! chain, including the absorbing variant that prices the event "the walk
//! revisits 0 at some even time inside a window".
//!
//! The walk's `n` is a plain integer, not a cube [`Dimension`]: the chain
//! has `n + 1` states, so nothing here needs `2^n` storage and the cube's
//! memory cap does not apply.
//!
//! [`Dimension`]: crate::hypercube::Dimension

use crate::sampler::{derive_key, Seed, SplitMix64, TAG_WALK};
use crate::{Error, Result};

const WORK_LIMIT: u64 = 200_000_000;

/// Kahan-compensated accumulator; the DP adds ~1e6 terms at n = 100 and the
/// compensation keeps drift below 1e-12.
#[derive(Debug, Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum
    }
}

fn kahan_sum(values: &[f64]) -> f64 {
    let mut acc = Kahan::default();
    for &v in values {
        acc.add(v);
    }
    acc.value()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkParams {
    n: u32,
    horizon: usize,
}

impl WalkParams {
    /// Default horizon 2n^2 steps: enough to cover the window of even times
    /// `2l` with `l` up to `n^2`.
    pub fn new(n: u32) -> Result<Self> {
        let nn = n as usize;
        Self::with_horizon(n, 2 * nn * nn)
    }

    pub fn with_horizon(n: u32, horizon: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("walk needs n >= 1".into()));
        }
        if horizon == 0 {
            return Err(Error::InvalidParameter("horizon must be >= 1".into()));
        }
        Ok(WalkParams { n, horizon })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }
}

/// One sampled trajectory: `horizon + 1` states starting at 0.
pub fn simulate_walk(params: &WalkParams, seed: Seed) -> Vec<u32> {
    let n = params.n;
    let mut rng = SplitMix64::derive(&[seed.master, TAG_WALK, n as u64]);
    let mut states = Vec::with_capacity(params.horizon + 1);
    let mut l = 0u32;
    states.push(l);
    for _ in 0..params.horizon {
        // down with probability l/n, exact
        if rng.next_below(n) < l {
            l -= 1;
        } else {
            l += 1;
        }
        states.push(l);
    }
    states
}

/// Exact per-step state distributions plus the window-hit probability.
#[derive(Debug, Clone)]
pub struct WalkDistribution {
    params: WalkParams,
    steps: Vec<Vec<f64>>,
    window: (usize, usize),
    window_hit_probability: f64,
    window_survivor_mass: f64,
}

impl WalkDistribution {
    pub fn params(&self) -> &WalkParams {
        &self.params
    }

    /// Distribution over states `0..=n` at the given step (no absorption).
    pub fn step(&self, i: usize) -> &[f64] {
        &self.steps[i]
    }

    pub fn steps(&self) -> &[Vec<f64>] {
        &self.steps
    }

    pub fn p_zero(&self, step: usize) -> f64 {
        self.steps[step][0]
    }

    /// Inclusive range of `l` for which the even times `2l` feed the
    /// window-hit accumulator.
    pub fn window(&self) -> (usize, usize) {
        self.window
    }

    /// P(the walk is at 0 at some even time `2l` with `l` in the window),
    /// each trajectory counted once via an absorbing accumulator.
    pub fn window_hit_probability(&self) -> f64 {
        self.window_hit_probability
    }

    /// Mass left in the absorbing chain after the horizon; together with the
    /// hit probability it accounts for all probability.
    pub fn window_survivor_mass(&self) -> f64 {
        self.window_survivor_mass
    }

    /// Largest deviation of any per-step mass total from 1.
    pub fn max_conservation_error(&self) -> f64 {
        self.steps
            .iter()
            .map(|p| (kahan_sum(p) - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

fn advance(p: &[f64], n: usize) -> Vec<f64> {
    let nf = n as f64;
    let mut q = vec![0.0f64; n + 1];
    for (s, &mass) in p.iter().enumerate() {
        if mass == 0.0 {
            continue;
        }
        if s > 0 {
            q[s - 1] += mass * s as f64 / nf;
        }
        if s < n {
            q[s + 1] += mass * (n - s) as f64 / nf;
        }
    }
    q
}

/// Forward DP over the chain. The window runs over `l` in
/// `[ceil(n/4), min(n^2, horizon/2)]`; at each even step `2l` inside it, the
/// mass sitting at state 0 moves into the absorbed accumulator, so the union
/// event is counted exactly once.
pub fn exact_distribution(params: &WalkParams) -> Result<WalkDistribution> {
    let n = params.n as usize;
    let h = params.horizon;
    let work = (n as u64 + 1) * (h as u64 + 1);
    if work > WORK_LIMIT {
        return Err(Error::BudgetExceeded(format!(
            "walk DP needs {work} cell updates, limit is {WORK_LIMIT}"
        )));
    }
    let window_lo = n.div_ceil(4);
    let window_hi = (n * n).min(h / 2);
    let mut cur = vec![0.0f64; n + 1];
    cur[0] = 1.0;
    let mut steps = Vec::with_capacity(h + 1);
    steps.push(cur.clone());
    let mut absorb_cur = cur.clone();
    let mut absorbed = Kahan::default();
    for i in 1..=h {
        cur = advance(&cur, n);
        absorb_cur = advance(&absorb_cur, n);
        if i % 2 == 0 {
            let ell = i / 2;
            if ell >= window_lo && ell <= window_hi {
                absorbed.add(absorb_cur[0]);
                absorb_cur[0] = 0.0;
            }
        }
        steps.push(cur.clone());
    }
    Ok(WalkDistribution {
        params: *params,
        steps,
        window: (window_lo, window_hi),
        window_hit_probability: absorbed.value(),
        window_survivor_mass: kahan_sum(&absorb_cur),
    })
}

/// Empirical frequency of `L_{2l} = 0` for each requested `l`, over
/// independently seeded runs.
pub fn zero_hit_frequencies(n: u32, ells: &[usize], runs: u64, seed: Seed) -> Vec<f64> {
    let max_ell = ells.iter().copied().max().unwrap_or(0);
    let params = WalkParams::with_horizon(n, (2 * max_ell).max(1)).expect("positive horizon");
    let mut hits = vec![0u64; ells.len()];
    for run in 0..runs {
        let run_seed = Seed::new(derive_key(&[seed.master, TAG_WALK, run]));
        let states = simulate_walk(&params, run_seed);
        for (slot, &ell) in ells.iter().enumerate() {
            if states[2 * ell] == 0 {
                hits[slot] += 1;
            }
        }
    }
    hits.iter().map(|&h| h as f64 / runs as f64).collect()
}

/// Exact checks of the chain's tail inequalities for one n:
///
/// * window: P(some `l` in `[ceil(n/4), n^2]` has `L_{2l} = 0`) <= n^-4;
/// * early: P(`L_{floor(n/5)}` <= ceil(n/20)) <= exp(-1e-3 n);
/// * conditional: worst case over start states `s >= ceil(n/20)` of
///   P(`L_gap` <= ceil(n/20) | `L_0 = s`), with `gap = max(1, floor(n/40))`,
///   also <= exp(-1e-3 n). The chain is time-homogeneous, so the worst case
///   over states dominates the conditional bound at every time index.
///
/// Non-integer bounds are floored for step indices and ceiled for state
/// thresholds; both roundings make the checked probability no smaller than
/// the stated one.
#[derive(Debug, Clone, Copy)]
pub struct InequalityReport {
    pub n: u32,
    pub window_hit_probability: f64,
    pub window_bound: f64,
    pub early_step: usize,
    pub early_threshold: u32,
    pub early_probability: f64,
    pub conditional_gap: usize,
    pub conditional_threshold: u32,
    pub conditional_worst: f64,
    pub chernoff_bound: f64,
}

impl InequalityReport {
    pub fn window_ok(&self) -> bool {
        self.window_hit_probability <= self.window_bound
    }

    pub fn early_ok(&self) -> bool {
        self.early_probability <= self.chernoff_bound
    }

    pub fn conditional_ok(&self) -> bool {
        self.conditional_worst <= self.chernoff_bound
    }

    pub fn all_ok(&self) -> bool {
        self.window_ok() && self.early_ok() && self.conditional_ok()
    }
}

pub fn inequality_report(n: u32) -> Result<InequalityReport> {
    let params = WalkParams::new(n)?;
    let dist = exact_distribution(&params)?;
    let nn = n as usize;
    let early_step = nn / 5;
    let threshold = nn.div_ceil(20);
    let early_probability = kahan_sum(&dist.step(early_step)[..=threshold.min(nn)]);
    let gap = (nn / 40).max(1);
    let mut worst = 0.0f64;
    for s0 in threshold..=nn {
        let mut p = vec![0.0f64; nn + 1];
        p[s0] = 1.0;
        for _ in 0..gap {
            p = advance(&p, nn);
        }
        worst = worst.max(kahan_sum(&p[..=threshold.min(nn)]));
    }
    Ok(InequalityReport {
        n,
        window_hit_probability: dist.window_hit_probability(),
        window_bound: (n as f64).powi(-4),
        early_step,
        early_threshold: threshold as u32,
        early_probability,
        conditional_gap: gap,
        conditional_threshold: threshold as u32,
        conditional_worst: worst,
        chernoff_bound: (-(1e-3) * n as f64).exp(),
    })
}

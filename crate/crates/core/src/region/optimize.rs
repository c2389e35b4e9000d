//! Power-allocation search over the achievable region.
//!
//! The achievable region is a union over every feasible allocation; this
//! module maximizes a weighted sum rate over that union numerically. The
//! bounds have kinks wherever a lattice rate clamps at zero, so the search is
//! derivative-free: coordinate ascent with a halving step from several
//! starts. Starts run independently and the best one wins, ties going to the
//! lowest start index, so the result depends only on the seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::RegionError;
use crate::exec::{derive_seed, Execution};
use crate::model::{ChannelConfig, RateTuple, User, PAIRS};

use super::bounds::evaluate;
use super::powers::{Allocation, DownlinkPowers, FreeUplinkPowers, UplinkPowers};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OptimizerOptions {
    /// Total number of objective evaluations, the baseline included.
    pub budget: usize,
    pub seed: u64,
    pub restarts: usize,
    pub execution: Execution,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions { budget: 10_000, seed: 0, restarts: 8, execution: Execution::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub allocation: Allocation,
    pub uplink: UplinkPowers,
    pub rates: RateTuple,
    pub objective: f64,
    pub baseline_objective: f64,
    pub evaluations: usize,
}

fn validate_weights(weights: &[f64; 6]) -> Result<(), RegionError> {
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || weights.iter().all(|w| *w == 0.0) {
        return Err(RegionError::InvalidWeights);
    }
    Ok(())
}

/// Weighted sum rate of an allocation after projecting it onto the budget.
pub fn objective(cfg: &ChannelConfig, weights: &[f64; 6], alloc: &Allocation) -> (Allocation, f64) {
    let a = alloc.project(cfg);
    let up = a.coupled(cfg).expect("projected powers are valid");
    let rates = evaluate(cfg, &up, &a.downlink).rates;
    (a, rates.weighted_sum(weights))
}

/// Uni-directional streams only, powers proportional to the weights.
pub fn weighted_uni_start(cfg: &ChannelConfig, weights: &[f64; 6]) -> Allocation {
    let mut up = RateTuple::zero();
    let mut down = RateTuple::zero();
    let total: f64 = weights.iter().sum();
    for sender in User::ALL {
        let own: f64 = PAIRS.iter().zip(weights).filter(|((i, _), _)| *i == sender).map(|(_, w)| w).sum();
        for ((i, j), w) in PAIRS.iter().zip(weights) {
            if *i == sender && own > 0.0 {
                up.set_rate(*i, *j, cfg.p * w / own);
            }
        }
    }
    for ((i, j), w) in PAIRS.iter().zip(weights) {
        down.set_rate(*i, *j, cfg.p * w / total);
    }
    let uplink = FreeUplinkPowers {
        p12u: up.r12,
        p13u: up.r13,
        p21u: up.r21,
        p23u: up.r23,
        p31u: up.r31,
        p32u: up.r32,
        ..Default::default()
    };
    let downlink = DownlinkPowers {
        t12: down.r12,
        t13: down.r13,
        t21: down.r21,
        t23: down.r23,
        t31: down.r31,
        t32: down.r32,
        ..Default::default()
    };
    Allocation { uplink, downlink }.project(cfg)
}

const INITIAL_STEP: f64 = 0.25;
const MIN_STEP: f64 = 1e-7;

fn ascend(
    cfg: &ChannelConfig,
    weights: &[f64; 6],
    start: Allocation,
    budget: usize,
    rng: &mut ChaCha8Rng,
) -> (Allocation, f64, usize) {
    let (mut best, mut value) = objective(cfg, weights, &start);
    let mut evals = 1;
    let mut step = INITIAL_STEP;
    let mut coords: Vec<usize> = (0..Allocation::DIM).collect();
    while evals < budget && step > MIN_STEP {
        coords.shuffle(rng);
        let mut improved = false;
        'sweep: for &i in &coords {
            let x = best.to_vec();
            for delta in [step * cfg.p, -step * cfg.p] {
                if evals >= budget {
                    break 'sweep;
                }
                let mut y = x.clone();
                y[i] = (y[i] + delta).max(0.0);
                if y[i] == x[i] {
                    continue;
                }
                let (cand, v) = objective(cfg, weights, &Allocation::from_slice(&y));
                evals += 1;
                if v > value {
                    best = cand;
                    value = v;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    (best, value, evals)
}

/// Maximizes `sum_ij w_ij R_ij` over feasible power allocations.
///
/// Start 0 is the bi-directional equal split, start 1 spends everything on
/// uni-directional streams in proportion to the weights, the remaining
/// starts are random. A budget of one evaluates the first start only.
pub fn maximize_objective(
    cfg: &ChannelConfig,
    weights: &[f64; 6],
    opts: &OptimizerOptions,
) -> Result<Optimum, RegionError> {
    validate_weights(weights)?;
    let baseline = Allocation::bi_only_equal_split(cfg);
    let (_, baseline_objective) = objective(cfg, weights, &baseline);

    let remaining = opts.budget.saturating_sub(1);
    let (best, evaluations) = if remaining == 0 {
        (baseline, 1)
    } else {
        let restarts = opts.restarts.clamp(1, remaining);
        let runs = opts.execution.map(restarts, |r| {
            let share = remaining / restarts + usize::from(r < remaining % restarts);
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, 1, r as u64));
            let start = match r {
                0 => baseline,
                1 => weighted_uni_start(cfg, weights),
                _ => Allocation::random(cfg, &mut rng),
            };
            ascend(cfg, weights, start, share, &mut rng)
        });
        let evals = 1 + runs.iter().map(|r| r.2).sum::<usize>();
        let winner = runs
            .into_iter()
            .reduce(|acc, run| if run.1 > acc.1 { run } else { acc })
            .expect("at least one start");
        (winner.0, evals)
    };

    let uplink = best.coupled(cfg)?;
    let rates = evaluate(cfg, &uplink, &best.downlink).rates;
    Ok(Optimum {
        allocation: best,
        uplink,
        rates,
        objective: rates.weighted_sum(weights),
        baseline_objective,
        evaluations,
    })
}

/// One optimized direction of a region sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub weights: [f64; 6],
    pub rates: RateTuple,
    pub objective: f64,
}

/// Weight vectors for a sweep: the six unit vectors, the all-ones vector,
/// then seeded uniform draws.
pub fn weight_directions(count: usize, seed: u64) -> Vec<[f64; 6]> {
    let mut out: Vec<[f64; 6]> = (0..6)
        .map(|k| std::array::from_fn(|i| if i == k { 1.0 } else { 0.0 }))
        .collect();
    out.push([1.0; 6]);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 2, 0));
    while out.len() < count {
        out.push(std::array::from_fn(|_| rng.random::<f64>()));
    }
    out.truncate(count);
    out
}

/// Optimizes every direction; each gets `opts` with its own derived seed.
pub fn sweep_region(
    cfg: &ChannelConfig,
    directions: &[[f64; 6]],
    opts: &OptimizerOptions,
) -> Result<Vec<SweepPoint>, RegionError> {
    directions
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let o = OptimizerOptions { seed: derive_seed(opts.seed, 3, k as u64), ..*opts };
            let best = maximize_objective(cfg, w, &o)?;
            Ok(SweepPoint { weights: *w, rates: best.rates, objective: best.objective })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg_a() -> ChannelConfig {
        ChannelConfig::new(1.0, 1.0, 1.0, 100.0).unwrap()
    }

    #[test]
    fn budget_one_returns_baseline() {
        let opts = OptimizerOptions { budget: 1, ..Default::default() };
        let best = maximize_objective(&cfg_a(), &[1.0; 6], &opts).unwrap();
        assert_eq!(best.allocation, Allocation::bi_only_equal_split(&cfg_a()));
        assert_eq!(best.objective, best.baseline_objective);
        assert_eq!(best.evaluations, 1);
    }

    #[test]
    fn dominates_baseline_and_respects_budget() {
        let opts = OptimizerOptions { budget: 2_000, seed: 3, ..Default::default() };
        let best = maximize_objective(&cfg_a(), &[1.0; 6], &opts).unwrap();
        assert!(best.objective >= best.baseline_objective);
        assert!(best.evaluations <= 2_000);
    }

    #[test]
    fn single_weight_concentrates_on_that_message() {
        let c = ChannelConfig::new(1.5, 1.0, 0.6, 50.0).unwrap();
        let w = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let opts = OptimizerOptions { budget: 3_000, seed: 11, ..Default::default() };
        let best = maximize_objective(&c, &w, &opts).unwrap();
        let (_, uni_only) = objective(&c, &w, &weighted_uni_start(&c, &w));
        assert!(uni_only > 0.0);
        assert!(best.objective >= uni_only);
        assert!(best.rates.r12 > 0.0);
    }

    #[test]
    fn deterministic_across_execution_modes() {
        let c = ChannelConfig::new(2.0, 1.0, 0.5, 30.0).unwrap();
        let w = [1.0, 2.0, 0.5, 1.0, 0.0, 1.0];
        let seq = OptimizerOptions { budget: 1_500, seed: 42, restarts: 5, execution: Execution::Sequential };
        let par = OptimizerOptions { execution: Execution::Parallel, ..seq };
        assert_eq!(maximize_objective(&c, &w, &seq).unwrap(), maximize_objective(&c, &w, &par).unwrap());
    }

    #[test]
    fn tiny_power_gives_nearly_zero_rates() {
        let c = ChannelConfig::new(1.0, 1.0, 1.0, 1e-12).unwrap();
        let best = maximize_objective(&c, &[1.0; 6], &OptimizerOptions { budget: 200, ..Default::default() }).unwrap();
        assert!(best.rates.to_array().iter().all(|r| *r < 1e-9));
    }

    #[test]
    fn weights_are_validated() {
        let opts = OptimizerOptions::default();
        assert!(maximize_objective(&cfg_a(), &[0.0; 6], &opts).is_err());
        assert!(maximize_objective(&cfg_a(), &[1.0, -1.0, 0.0, 0.0, 0.0, 0.0], &opts).is_err());
    }

    #[test]
    fn directions() {
        let d = weight_directions(9, 1);
        assert_eq!(d.len(), 9);
        assert_eq!(d[2], [0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(d[6], [1.0; 6]);
        assert_eq!(weight_directions(9, 1), d);
        assert_eq!(weight_directions(3, 1).len(), 3);
    }
}

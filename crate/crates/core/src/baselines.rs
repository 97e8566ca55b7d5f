//! Reference allocators: the step-wise backoff heuristics, the unilateral
//! variants of the SCA optimiser and an exhaustive grid search used as an
//! oracle on small instances.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::LargeScaleCsi;
use crate::error::{Error, Result};
use crate::metrics::{ergodic_rate_approx, min_radar_sinr};
use crate::optimizer::{allocate, feasibility_probe, AllocateOptions, SolveReport, Variant};
use crate::scenario::{validate_allocation, PowerAllocation, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackoffScheme {
    /// Every node on the reduced side backs off by the same amount.
    EqualBackoff,
    /// Nodes back off in proportion to the interference they cause.
    ChannelPriority,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineOptions {
    /// Δ_P in watts.
    pub step_w: f64,
    pub max_steps: usize,
    pub scheme: BackoffScheme,
}

impl BaselineOptions {
    pub fn new(scheme: BackoffScheme) -> Self {
        Self { step_w: 0.5, max_steps: 100_000, scheme }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineOutcome {
    pub alloc: PowerAllocation,
    pub rate_ap: f64,
    pub steps: usize,
    /// Whether the rate requirement is met at `alloc`.
    pub rate_met: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Radar,
    Bs,
}

fn reduce(p: &mut [f64], weights: &[f64], step: f64) {
    for (x, w) in p.iter_mut().zip(weights) {
        *x = (*x - step * w).max(0.0);
    }
}

fn shares(v: Vec<f64>) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    if total > 0.0 {
        v.into_iter().map(|x| x / total).collect()
    } else {
        vec![0.0; v.len()]
    }
}

/// Step-wise backoff from the equal split: radars back off while the rate is
/// short of the requirement, BSs back off while it is exceeded.
///
/// Stops once the rate is met with an excess no larger than the rate change
/// of the last step. Two direction reversals halve the step, and so does a
/// BS step that would fall below the requirement (the step is then retried),
/// so the loop never leaves the feasible side once it has reached it.
pub fn algorithm2(scenario: &Scenario, csi: &LargeScaleCsi, opts: &BaselineOptions) -> Result<BaselineOutcome> {
    if !(opts.step_w > 0.0) {
        return Err(Error::InvalidArgument("step_w must be positive".into()));
    }
    let limits = &scenario.limits;
    let (m_c, m_r, n_c) = (csi.m_c(), csi.m_r(), scenario.n_c());
    let noise = limits.noise_power;
    let probe = feasibility_probe(scenario, csi)?;
    if limits.r_req > probe * (1.0 + 1e-9) + 1e-12 {
        return Err(Error::InfeasibleRate { required: limits.r_req, achievable: probe });
    }

    let mut alloc = PowerAllocation::equal_split(m_c, m_r, limits);
    let rate = |a: &PowerAllocation| ergodic_rate_approx(a, csi, n_c, noise);
    let mut r = rate(&alloc)?;
    let mut step = opts.step_w;
    let min_step = opts.step_w * 1e-12;
    let mut last: Option<Side> = None;
    let mut reversals = 0;
    let mut last_change = 0.0;
    let mut steps = 0;

    while steps < opts.max_steps && step >= min_step {
        if r >= limits.r_req && (r - limits.r_req <= last_change || r == limits.r_req) {
            break;
        }
        let side = if r < limits.r_req { Side::Radar } else { Side::Bs };
        match side {
            Side::Radar if alloc.total_r() == 0.0 => break,
            Side::Bs if alloc.total_c() == 0.0 => break,
            _ => {}
        }
        if let Some(prev) = last {
            if prev != side {
                reversals += 1;
                if reversals == 2 {
                    step *= 0.5;
                    reversals = 0;
                }
            }
        }
        last = Some(side);
        let mut trial = alloc.clone();
        match side {
            Side::Radar => {
                let w = match opts.scheme {
                    BackoffScheme::EqualBackoff => vec![1.0 / m_r as f64; m_r],
                    BackoffScheme::ChannelPriority => {
                        shares(alloc.p_r.iter().zip(&csi.l_r_to_c).map(|(p, l)| p * l).collect())
                    }
                };
                reduce(&mut trial.p_r, &w, step);
            }
            Side::Bs => {
                let w = match opts.scheme {
                    BackoffScheme::EqualBackoff => vec![1.0 / m_c as f64; m_c],
                    BackoffScheme::ChannelPriority => shares(
                        (0..m_c).map(|j| alloc.p_c[j] * csi.l_c_to_r[j].iter().sum::<f64>()).collect(),
                    ),
                };
                reduce(&mut trial.p_c, &w, step);
            }
        }
        let r_new = rate(&trial)?;
        steps += 1;
        if side == Side::Bs && r_new < limits.r_req {
            step *= 0.5;
            continue;
        }
        last_change = (r_new - r).abs();
        alloc = trial;
        r = r_new;
    }
    Ok(BaselineOutcome { rate_met: r >= limits.r_req, alloc, rate_ap: r, steps })
}

/// SCA over BS powers only, radars at equal split.
pub fn unilateral_c(
    scenario: &Scenario,
    csi: &LargeScaleCsi,
    opts: &AllocateOptions,
) -> Result<(PowerAllocation, SolveReport)> {
    allocate(scenario, csi, &AllocateOptions { variant: Variant::CommOnly, ..opts.clone() })
}

/// SCA over radar powers only, BSs at equal split.
pub fn unilateral_r(
    scenario: &Scenario,
    csi: &LargeScaleCsi,
    opts: &AllocateOptions,
) -> Result<(PowerAllocation, SolveReport)> {
    allocate(scenario, csi, &AllocateOptions { variant: Variant::RadarOnly, ..opts.clone() })
}

/// Exhaustive search over the grid `p = k · P_max / resolution`,
/// `k = 0..=resolution`, on every axis. Doubling the resolution nests the
/// grids, so the reported optimum never decreases.
pub fn grid_search_oracle(
    scenario: &Scenario,
    csi: &LargeScaleCsi,
    resolution: usize,
) -> Result<(PowerAllocation, f64)> {
    let (m_c, m_r, n_c) = (csi.m_c(), csi.m_r(), scenario.n_c());
    let dims = m_c + m_r;
    if dims > 4 {
        return Err(Error::GridTooLarge(dims));
    }
    if resolution < 10 {
        return Err(Error::InvalidArgument(format!("grid resolution must be at least 10, got {resolution}")));
    }
    let limits = &scenario.limits;
    let noise = limits.noise_power;
    let points = resolution + 1;
    let total = points.pow(dims as u32);
    let level = |k: usize, cap: f64| cap * k as f64 / resolution as f64;
    let decode = |mut idx: usize| -> PowerAllocation {
        let mut digits = vec![0; dims];
        for d in (0..dims).rev() {
            digits[d] = idx % points;
            idx /= points;
        }
        PowerAllocation::new(
            digits[..m_c].iter().map(|&k| level(k, limits.p_cmax)).collect(),
            digits[m_c..].iter().map(|&k| level(k, limits.p_rmax)).collect(),
        )
    };

    let best = (0..total)
        .into_par_iter()
        .filter_map(|idx| {
            let a = decode(idx);
            if !validate_allocation(&a, limits).is_empty() {
                return None;
            }
            let r = ergodic_rate_approx(&a, csi, n_c, noise).ok()?;
            if r < limits.r_req {
                return None;
            }
            Some((min_radar_sinr(&a, csi, noise), idx))
        })
        .reduce_with(|a, b| match a.0.total_cmp(&b.0) {
            std::cmp::Ordering::Greater => a,
            std::cmp::Ordering::Less => b,
            std::cmp::Ordering::Equal => {
                if a.1 <= b.1 {
                    a
                } else {
                    b
                }
            }
        });
    match best {
        Some((gamma, idx)) => Ok((decode(idx), gamma)),
        None => Err(Error::InfeasibleRate { required: limits.r_req, achievable: f64::NAN }),
    }
}

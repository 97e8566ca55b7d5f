//! Outer SCA loop, the rate feasibility probe and the final improving moves.

use serde::Serialize;

use crate::channel::LargeScaleCsi;
use crate::error::{Error, Result};
use crate::metrics::{
    comm_snrs, ergodic_rate_approx, min_radar_sinr, radar_interference_at, radar_sinrs,
    solve_fixed_point_snr, t_star, FIXED_POINT_TOL,
};
use crate::scenario::{validate_allocation, PowerAllocation, Scenario};

use super::barrier::{self, BarrierOptions, SolveStatus};
use super::program::{build_subproblem, Anchor, Objective, Subproblem, P_FLOOR};
use super::{Coupling, Variant};

/// Absolute slack allowed on the rate requirement when accepting a point.
const RATE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct AllocateOptions {
    /// Relative γ change that stops the outer loop.
    pub epsilon: f64,
    pub max_iter: usize,
    pub variant: Variant,
    pub coupling: Coupling,
    pub barrier: BarrierOptions,
    /// Apply the final improving moves (switch off idle BSs, raise radar
    /// powers while the rate allows).
    pub polish: bool,
}

impl Default for AllocateOptions {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            max_iter: 100,
            variant: Variant::Joint,
            coupling: Coupling::UserAntennas,
            barrier: BarrierOptions::default(),
            polish: true,
        }
    }
}

/// State carried between outer iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationState {
    pub alloc: PowerAllocation,
    pub z: f64,
    pub t: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: f64,
    pub iteration: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    /// Smallest radar SINR after each outer iteration.
    pub gamma_trace: Vec<f64>,
    /// Rate approximation after each outer iteration.
    pub rate_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub subproblem_status: Vec<SolveStatus>,
    /// Rate approximation at the returned allocation.
    pub rate_achieved: f64,
    /// Smallest radar SINR at the returned allocation.
    pub min_sinr: f64,
    /// Largest achievable rate for this variant.
    pub probe: f64,
}

impl SolveReport {
    /// `iteration,gamma,rate_ap` rows.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iteration", "gamma", "rate_ap"])?;
        for (k, (g, r)) in self.gamma_trace.iter().zip(&self.rate_trace).enumerate() {
            w.write_record([(k + 1).to_string(), g.to_string(), r.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// β*_i = √(|h_rr,i|² p_ri) / σ_ri²(P_c).
pub fn beta_update(alloc: &PowerAllocation, csi: &LargeScaleCsi, noise: f64) -> Vec<f64> {
    (0..csi.m_r())
        .map(|i| (csi.radar_gain(i) * alloc.p_r[i]).sqrt() / radar_interference_at(alloc, csi, i, noise))
        .collect()
}

/// 2β√A - β²σ², which equals A/σ² at β = √A/σ².
pub fn quadratic_transform(beta: f64, signal: f64, interference: f64) -> f64 {
    2.0 * beta * signal.sqrt() - beta * beta * interference
}

fn surrogate_min(alloc: &PowerAllocation, csi: &LargeScaleCsi, beta: &[f64], noise: f64) -> f64 {
    (0..csi.m_r())
        .map(|i| {
            quadratic_transform(beta[i], csi.radar_gain(i) * alloc.p_r[i], radar_interference_at(alloc, csi, i, noise))
        })
        .fold(f64::INFINITY, f64::min)
}

/// Solves one surrogate from `start`; returns the solution and solver status.
pub fn solve_subproblem(
    sub: &Subproblem,
    start: &[f64],
    opts: &BarrierOptions,
) -> Result<barrier::BarrierSolution> {
    barrier::solve(&sub.program, start, opts)
}

fn rate_of(scenario: &Scenario, csi: &LargeScaleCsi, alloc: &PowerAllocation) -> Result<f64> {
    ergodic_rate_approx(alloc, csi, scenario.n_c(), scenario.limits.noise_power)
}

fn aux_at(scenario: &Scenario, csi: &LargeScaleCsi, alloc: &PowerAllocation) -> Result<(f64, Vec<f64>)> {
    let snr = comm_snrs(alloc, csi, scenario.limits.noise_power);
    let v = solve_fixed_point_snr(&snr, scenario.n_c(), FIXED_POINT_TOL)?.v_star;
    Ok((v, t_star(&snr, scenario.n_c(), v)))
}

fn lift_floor(p: &mut [f64]) {
    for x in p {
        *x = x.max(2.0 * P_FLOOR);
    }
}

fn feasible(scenario: &Scenario, alloc: &PowerAllocation) -> bool {
    validate_allocation(alloc, &scenario.limits).is_empty()
}

/// Largest rate approximation reachable with the given radar powers fixed.
/// Returns the rate and the maximising BS powers.
pub fn feasibility_probe_with(
    scenario: &Scenario,
    csi: &LargeScaleCsi,
    p_r: &[f64],
    opts: &BarrierOptions,
) -> Result<(f64, Vec<f64>)> {
    let limits = &scenario.limits;
    let m_c = csi.m_c();
    let mut best = PowerAllocation::new(vec![limits.equal_split_bs(m_c); m_c], p_r.to_vec());
    let mut best_rate = rate_of(scenario, csi, &best)?;
    let (mut z, mut t) = aux_at(scenario, csi, &best)?;
    for _ in 0..100 {
        let mut anchor_alloc = best.clone();
        lift_floor(&mut anchor_alloc.p_c);
        if t.iter().any(|&x| !(x > 0.0)) {
            break;
        }
        let anchor = Anchor { alloc: anchor_alloc, z, t: t.clone(), beta: vec![0.0; csi.m_r()] };
        let sub = build_subproblem(scenario, csi, &anchor, Variant::CommOnly, Coupling::UserAntennas, Objective::Rate)?;
        let r0 = super::program::linearize_big_g(&t, scenario.n_c())?.eval(z, &t);
        let x0 = sub.pack(&anchor.alloc, z, &t, r0 - 1.0);
        let sol = solve_subproblem(&sub, &x0, opts)?;
        if sol.status == SolveStatus::Infeasible {
            break;
        }
        let (cand, zn, tn, _) = sub.unpack(&sol.x);
        let rate = rate_of(scenario, csi, &cand)?;
        if !(rate > best_rate) || !feasible(scenario, &cand) {
            break;
        }
        let gain = rate - best_rate;
        best = cand;
        best_rate = rate;
        z = zn;
        t = tn;
        if gain <= 1e-12 * best_rate.max(1.0) {
            break;
        }
    }

    // More BS power never lowers the rate: push each BS to its cap.
    for j in 0..m_c {
        let others: f64 = best.p_c.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, p)| p).sum();
        let target = limits.p_cmax.min(limits.p_csum - others).max(best.p_c[j]);
        if target > best.p_c[j] {
            let mut cand = best.clone();
            cand.p_c[j] = target;
            let rate = rate_of(scenario, csi, &cand)?;
            if rate >= best_rate && feasible(scenario, &cand) {
                best = cand;
                best_rate = rate;
            }
        }
    }
    Ok((best_rate, best.p_c))
}

/// Largest rate approximation the network can offer (radars silent).
pub fn feasibility_probe(scenario: &Scenario, csi: &LargeScaleCsi) -> Result<f64> {
    Ok(feasibility_probe_with(scenario, csi, &vec![0.0; csi.m_r()], &BarrierOptions::default())?.0)
}

/// Runs the SCA allocation.
pub fn allocate(
    scenario: &Scenario,
    csi: &LargeScaleCsi,
    opts: &AllocateOptions,
) -> Result<(PowerAllocation, SolveReport)> {
    let limits = &scenario.limits;
    let (m_c, m_r, n_c) = (csi.m_c(), csi.m_r(), scenario.n_c());
    if scenario.m_c() != m_c || scenario.m_r() != m_r {
        return Err(Error::Dimension("CSI does not match the scenario".into()));
    }
    if n_c < m_c {
        return Err(Error::InvalidConfig {
            key: "topology.nc".into(),
            reason: format!("N_c >= M_c is required ({n_c} < {m_c})"),
        });
    }
    let noise = limits.noise_power;
    let variant = opts.variant;
    let eq_c = vec![limits.equal_split_bs(m_c); m_c];
    let eq_r = vec![limits.equal_split_radar(m_r); m_r];

    // Rate headroom for this variant.
    let fixed_r = if variant == Variant::CommOnly { eq_r.clone() } else { vec![0.0; m_r] };
    let (probe, probe_c) = if variant.optimizes_bs() {
        feasibility_probe_with(scenario, csi, &fixed_r, &opts.barrier)?
    } else {
        (rate_of(scenario, csi, &PowerAllocation::new(eq_c.clone(), fixed_r.clone()))?, eq_c.clone())
    };
    if limits.r_req > probe * (1.0 + 1e-9) + 1e-12 {
        return Err(Error::InfeasibleRate { required: limits.r_req, achievable: probe });
    }

    let init_r = if variant == Variant::CommOnly { eq_r.clone() } else { vec![0.0; m_r] };
    let mut alloc = PowerAllocation::new(eq_c, init_r);
    if rate_of(scenario, csi, &alloc)? < limits.r_req {
        alloc.p_c = probe_c;
    }
    let (z0, t0) = aux_at(scenario, csi, &alloc)?;
    let mut state = IterationState {
        gamma: min_radar_sinr(&alloc, csi, noise).max(0.0),
        alloc,
        z: z0,
        t: t0,
        beta: vec![0.0; m_r],
        iteration: 0,
    };

    let mut report = SolveReport {
        gamma_trace: Vec::new(),
        rate_trace: Vec::new(),
        iterations: 0,
        converged: false,
        subproblem_status: Vec::new(),
        rate_achieved: 0.0,
        min_sinr: 0.0,
        probe,
    };

    for s in 1..=opts.max_iter {
        state.iteration = s;
        state.beta = beta_update(&state.alloc, csi, noise);
        let mut anchor_alloc = state.alloc.clone();
        if variant.optimizes_bs() {
            lift_floor(&mut anchor_alloc.p_c);
        }
        if variant.optimizes_radar() {
            lift_floor(&mut anchor_alloc.p_r);
        }
        let anchor = Anchor { alloc: anchor_alloc, z: state.z, t: state.t.clone(), beta: state.beta.clone() };
        let sub = build_subproblem(scenario, csi, &anchor, variant, opts.coupling, Objective::MinSinr)
            .map_err(|e| Error::Subproblem { iteration: s, reason: e.to_string() })?;
        // Start strictly inside the radar rows, which are tight at the anchor.
        let s_min = surrogate_min(&anchor.alloc, csi, &state.beta, noise);
        let gamma0 = s_min - (0.01 * s_min.abs()).max(1e-6);
        let x0 = sub.pack(&anchor.alloc, state.z, &state.t, gamma0);
        let sol = solve_subproblem(&sub, &x0, &opts.barrier)
            .map_err(|e| Error::Subproblem { iteration: s, reason: e.to_string() })?;
        report.subproblem_status.push(sol.status);

        let mut moved = false;
        if sol.status != SolveStatus::Infeasible {
            let (cand, z, t, _) = sub.unpack(&sol.x);
            let rate = rate_of(scenario, csi, &cand)?;
            let gamma = min_radar_sinr(&cand, csi, noise);
            if feasible(scenario, &cand)
                && rate >= limits.r_req - RATE_SLACK
                && gamma >= state.gamma
                && t.iter().all(|&x| x > 0.0 && x < 1.0)
            {
                moved = cand != state.alloc;
                state.alloc = cand;
                state.z = z;
                state.t = t;
                state.gamma = gamma;
            }
        }
        let prev = report.gamma_trace.last().copied().unwrap_or(0.0);
        report.gamma_trace.push(state.gamma);
        report.rate_trace.push(rate_of(scenario, csi, &state.alloc)?);
        report.iterations = s;

        if state.gamma > 0.0 && s >= 2 && (state.gamma - prev).abs() / state.gamma <= opts.epsilon {
            report.converged = true;
            break;
        }
        if !moved {
            break;
        }
    }

    let mut alloc = state.alloc;
    if opts.polish {
        polish(scenario, csi, variant, &mut alloc)?;
    }
    report.rate_achieved = rate_of(scenario, csi, &alloc)?;
    report.min_sinr = min_radar_sinr(&alloc, csi, noise);
    Ok((alloc, report))
}

/// Moves that never lower the smallest radar SINR and keep the rate
/// requirement: switch off or lower BSs the rate does not need, then raise
/// radar powers (weakest radar first) up to their caps or the rate limit.
fn polish(scenario: &Scenario, csi: &LargeScaleCsi, variant: Variant, alloc: &mut PowerAllocation) -> Result<()> {
    let limits = &scenario.limits;
    let noise = limits.noise_power;
    let r_req = limits.r_req;
    let ok = |a: &PowerAllocation| -> Result<bool> { Ok(feasible(scenario, a) && rate_of(scenario, csi, a)? >= r_req) };
    if !ok(alloc)? {
        return Ok(());
    }

    if variant.optimizes_bs() {
        // Most harmful BS first.
        let mut order: Vec<usize> = (0..csi.m_c()).collect();
        let harm = |j: usize| -> f64 {
            (0..csi.m_r())
                .map(|i| csi.l_c_to_r[j][i] * alloc.p_c[j] / radar_interference_at(alloc, csi, i, noise))
                .sum()
        };
        let weights: Vec<f64> = order.iter().map(|&j| harm(j)).collect();
        order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]));
        for j in order {
            let hi = alloc.p_c[j];
            if hi == 0.0 {
                continue;
            }
            let mut trial = alloc.clone();
            trial.p_c[j] = 0.0;
            if ok(&trial)? {
                *alloc = trial;
                continue;
            }
            // Smallest power of this BS that still meets the rate.
            let (mut lo, mut up) = (0.0, hi);
            for _ in 0..100 {
                let mid = 0.5 * (lo + up);
                trial.p_c[j] = mid;
                if ok(&trial)? {
                    up = mid;
                } else {
                    lo = mid;
                }
                if up - lo <= 1e-15 * hi {
                    break;
                }
            }
            trial.p_c[j] = up;
            if up < hi && ok(&trial)? {
                *alloc = trial;
            }
        }
    }

    if variant.optimizes_radar() {
        let sinr = radar_sinrs(alloc, csi, noise);
        let mut order: Vec<usize> = (0..csi.m_r()).collect();
        order.sort_by(|&a, &b| sinr[a].total_cmp(&sinr[b]));
        for i in order {
            let others: f64 = alloc.p_r.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, p)| p).sum();
            let cap = limits.p_rmax.min(limits.p_rsum - others);
            let lo0 = alloc.p_r[i];
            if !(cap > lo0) {
                continue;
            }
            let mut trial = alloc.clone();
            trial.p_r[i] = cap;
            if ok(&trial)? {
                *alloc = trial;
                continue;
            }
            let (mut lo, mut up) = (lo0, cap);
            for _ in 0..100 {
                let mid = 0.5 * (lo + up);
                trial.p_r[i] = mid;
                if ok(&trial)? {
                    lo = mid;
                } else {
                    up = mid;
                }
                if up - lo <= 1e-15 * cap {
                    break;
                }
            }
            trial.p_r[i] = lo;
            if lo > lo0 && ok(&trial)? {
                *alloc = trial;
            }
        }
    }
    Ok(())
}

//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

mod common;

use std::time::Instant;

use coexist_core::baselines::{unilateral_c, unilateral_r};
use coexist_core::channel::build_csi;
use coexist_core::metrics::{
    aux_g, aux_g_derivative, detection_probability, detection_threshold, ergodic_rate_approx_snr,
    ergodic_rate_mc_snr, false_alarm_probability, min_radar_sinr, radar_interference_at,
    radar_sinr, solve_fixed_point, solve_fixed_point_snr, FIXED_POINT_TOL,
};
use coexist_core::optimizer::{beta_update, quadratic_transform};
use coexist_core::radiomap::{map_error, sample_field};
use coexist_core::waveform::{ambiguity_lfm, ambiguity_numeric, mismatch_sinr_sweep, DEFAULT_QUADRATURE};
use coexist_core::{
    algorithm2, allocate, build_csi_from, build_grid_map, fit_curve_model, grid_search_oracle, AllocateOptions,
    BackoffScheme, BaselineOptions, ChirpParams, Error, LargeScaleCsi, MismatchError, Position, PowerAllocation,
    Scenario,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let start = Instant::now();
    let mut worst_res: f64 = 0.0;
    let mut min_v = f64::INFINITY;
    for _ in 0..1000 {
        let m_c = rng.random_range(1..=3);
        let m_r = rng.random_range(1..=3);
        let n_c = m_c + rng.random_range(0..=2);
        let limits = reference_limits(0.0);
        let csi = random_csi(&mut rng, m_c, m_r);
        let alloc = random_alloc(&mut rng, m_c, m_r, &limits);
        let fp = solve_fixed_point(&alloc, &csi, n_c, limits.noise_power, FIXED_POINT_TOL).map_err(|e| e.to_string())?;
        worst_res = worst_res.max(fp.residual.abs());
        min_v = min_v.min(fp.v_star);
    }
    let mut worst_closed: f64 = 0.0;
    for _ in 0..1000 {
        let a = log_uniform(&mut rng, -3.0, 4.0);
        let v = solve_fixed_point_snr(&[a], 1, FIXED_POINT_TOL).map_err(|e| e.to_string())?.v_star;
        let closed = (1.0 + (1.0 + 4.0 * a).sqrt()) / 2.0;
        worst_closed = worst_closed.max((v - closed).abs() / closed);
    }
    let elapsed = start.elapsed().as_secs_f64();
    check(
        worst_res <= 1e-12 && min_v >= 1.0 && worst_closed <= 1e-10 && elapsed < 1.0,
        format!("max |residual| {worst_res:.2e}, min v* {min_v:.4}, closed-form rel err {worst_closed:.2e}, {elapsed:.3} s"),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let r_ap = ergodic_rate_approx_snr(&[2.0], 1).map_err(|e| e.to_string())?;
    let mc = ergodic_rate_mc_snr(&[2.0], 1, 100_000, 7).mean;
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let m = 1 + k % 3;
        let snr: Vec<f64> = (0..m).map(|_| log_uniform(&mut rng, -1.0, 3.0)).collect();
        let ap = ergodic_rate_approx_snr(&snr, m).map_err(|e| e.to_string())?;
        let mc = ergodic_rate_mc_snr(&snr, m, 100_000, 1000 + k as u64).mean;
        worst = worst.max((ap - mc).abs() / mc);
    }
    let elapsed = start.elapsed().as_secs_f64();
    check(
        (r_ap - 1.27865).abs() <= 1e-5 && (mc - 1.331).abs() <= 0.01 && worst <= 0.10 && elapsed < 60.0,
        format!("a=2: R_ap {r_ap:.5}, MC {mc:.4}; worst relative gap {:.2}% over 100 instances, {elapsed:.1} s", 100.0 * worst),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut min_deriv = f64::INFINITY;
    let mut worst_fd: f64 = 0.0;
    for _ in 0..100 {
        let m_c = rng.random_range(1..=3);
        let n_c = m_c + rng.random_range(0..=2);
        let snr: Vec<f64> = (0..m_c).map(|_| log_uniform(&mut rng, -2.0, 3.0)).collect();
        let v = solve_fixed_point_snr(&snr, n_c, FIXED_POINT_TOL).map_err(|e| e.to_string())?.v_star;
        let z = rng.random_range(1.0..v.max(1.0 + 1e-3) * 1.5);
        let h = 1e-5 * z;
        let fd = (aux_g(&snr, n_c, z + h) - aux_g(&snr, n_c, z - h)) / (2.0 * h);
        let d = aux_g_derivative(&snr, n_c, z);
        min_deriv = min_deriv.min(fd);
        worst_fd = worst_fd.max((d - fd).abs() / d.abs());
    }
    check(
        min_deriv > 0.0 && worst_fd <= 1e-6,
        format!("min finite-difference dg/dz {min_deriv:.3e}, formula vs finite difference {worst_fd:.2e}"),
    )
}

/// Golden-section maximisation of a concave function on [lo, hi].
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if f(a) < f(b) {
            lo = a;
        } else {
            hi = b;
        }
    }
    0.5 * (lo + hi)
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst_value: f64 = 0.0;
    let mut worst_beta: f64 = 0.0;
    for _ in 0..1000 {
        let m_c = rng.random_range(1..=3);
        let m_r = rng.random_range(1..=3);
        let limits = reference_limits(0.0);
        let csi = random_csi(&mut rng, m_c, m_r);
        let mut alloc = random_alloc(&mut rng, m_c, m_r, &limits);
        for p in &mut alloc.p_r {
            *p = p.max(1e-3);
        }
        let noise = limits.noise_power;
        let beta = beta_update(&alloc, &csi, noise);
        for i in 0..m_r {
            let signal = csi.radar_gain(i) * alloc.p_r[i];
            let interference = radar_interference_at(&alloc, &csi, i, noise);
            let rho = radar_sinr(&alloc, &csi, i, noise);
            let q = quadratic_transform(beta[i], signal, interference);
            worst_value = worst_value.max((q - rho).abs() / rho);
            let numeric = golden_max(|b| quadratic_transform(b, signal, interference), 0.0, 4.0 * beta[i]);
            worst_beta = worst_beta.max((numeric - beta[i]).abs() / beta[i]);
        }
    }
    check(
        worst_value <= 1e-12 && worst_beta <= 1e-6,
        format!("surrogate at beta* vs SINR {worst_value:.2e}, beta* vs numeric maximiser {worst_beta:.2e}"),
    )
}

fn criterion_5() -> Outcome {
    let cfg = reference_config();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let opts = AllocateOptions { epsilon: 1e-3, ..AllocateOptions::default() };
    let mut iterations = Vec::new();
    let mut worst_drop: f64 = 0.0;
    let mut infeasible = 0;
    while iterations.len() < 100 {
        let topo = random_placement(&mut rng, &cfg.scenario.topology, cfg.map.bounds, 50.0);
        let scenario = Scenario::new(topo, cfg.scenario.limits.clone()).map_err(|e| e.to_string())?;
        let csi = build_csi(&cfg.field, &scenario.topology, &cfg.antenna).map_err(|e| e.to_string())?;
        match allocate(&scenario, &csi, &opts) {
            Ok((_, report)) => {
                for w in report.gamma_trace.windows(2) {
                    worst_drop = worst_drop.max(w[0] - w[1]);
                }
                iterations.push(report.iterations);
            }
            Err(Error::InfeasibleRate { .. }) => infeasible += 1,
            Err(e) => return Err(e.to_string()),
        }
    }
    iterations.sort_unstable();
    let median = iterations[iterations.len() / 2];
    let max = *iterations.last().unwrap_or(&0);
    let within_10 = iterations.iter().filter(|&&k| k <= 10).count();
    let elapsed = start.elapsed().as_secs_f64();
    check(
        worst_drop <= 1e-8 && max <= 50 && median <= 15 && elapsed < 300.0,
        format!(
            "largest trace drop {worst_drop:.2e}, iterations median {median} max {max}, {within_10}% within 10, \
             {infeasible} infeasible placements skipped, {elapsed:.1} s"
        ),
    )
}

/// Best γ over p_r, each p_r paired with the smallest p_c meeting the rate
/// (found by bisection): a dense scan followed by golden-section refinement
/// around the best scan point.
fn dense_oracle_1x1(s: &Scenario, csi: &LargeScaleCsi) -> f64 {
    let l = &s.limits;
    let cap_c = l.p_cmax.min(l.p_csum);
    let cap_r = l.p_rmax.min(l.p_rsum);
    let rate = |pc: f64, pr: f64| {
        coexist_core::metrics::ergodic_rate_approx(&PowerAllocation::new(vec![pc], vec![pr]), csi, 1, l.noise_power)
            .unwrap_or(0.0)
    };
    let gamma_at = |pr: f64| -> f64 {
        if rate(cap_c, pr) < l.r_req {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0, cap_c);
        if rate(0.0, pr) >= l.r_req {
            hi = 0.0;
        }
        while hi - lo > 1e-14 * cap_c {
            let mid = 0.5 * (lo + hi);
            if rate(mid, pr) >= l.r_req {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        min_radar_sinr(&PowerAllocation::new(vec![hi], vec![pr]), csi, l.noise_power)
    };
    let steps = 2000;
    let h = cap_r / steps as f64;
    let (mut best_k, mut best) = (0, 0.0);
    for k in 0..=steps {
        let g = gamma_at(h * k as f64);
        if g > best {
            best = g;
            best_k = k;
        }
    }
    let lo = (best_k as f64 - 1.0).max(0.0) * h;
    let hi = ((best_k + 1) as f64 * h).min(cap_r);
    best.max(gamma_at(golden_max(gamma_at, lo, hi))).max(gamma_at(cap_r))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst_vs_grid: f64 = 0.0;
    let mut worst_above_dense: f64 = 0.0;
    let mut largest_gap: f64 = 0.0;
    let mut done = 0;
    while done < 20 {
        let csi = random_csi(&mut rng, 1, 1);
        let base = abstract_scenario(1, 1, 1, reference_limits(0.0));
        let probe = coexist_core::feasibility_probe(&base, &csi).map_err(|e| e.to_string())?;
        let r_req = rng.random_range(0.05..0.9) * probe;
        let s = base.with_r_req(r_req);
        let (_, report) = allocate(&s, &csi, &AllocateOptions::default()).map_err(|e| e.to_string())?;
        let (_, g_grid) = grid_search_oracle(&s, &csi, 200).map_err(|e| e.to_string())?;
        let g_dense = dense_oracle_1x1(&s, &csi);
        // Falling short of the grid optimum is the failure mode; the
        // continuous optimiser may legitimately sit above a coarse grid.
        worst_vs_grid = worst_vs_grid.max((g_grid - report.min_sinr) / g_grid);
        worst_above_dense = worst_above_dense.max((report.min_sinr - g_dense) / g_dense);
        largest_gap = largest_gap.max((report.min_sinr - g_grid).abs() / g_grid);
        done += 1;
    }
    let s0 = abstract_scenario(1, 1, 1, reference_limits(0.0));
    let csi0 = random_csi(&mut rng, 1, 1);
    let (a0, _) = allocate(&s0, &csi0, &AllocateOptions::default()).map_err(|e| e.to_string())?;
    let (g0, _) = grid_search_oracle(&s0, &csi0, 200).map_err(|e| e.to_string())?;
    let corner = a0.p_c == vec![0.0] && a0.p_r == vec![1000.0] && g0.p_c == vec![0.0] && g0.p_r == vec![1000.0];
    check(
        worst_vs_grid <= 0.02 && worst_above_dense <= 1e-6 && corner,
        format!(
            "allocate below grid optimum by at most {:.3}%, above dense oracle by at most {:.1e} (largest |gap| to grid {:.3}%), \
             R_req=0 corner exact: {corner}",
            100.0 * worst_vs_grid.max(0.0),
            worst_above_dense.max(0.0),
            100.0 * largest_gap
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut identical = true;
    let mut worst_inverse: f64 = 0.0;
    let mut ill_conditioned = 0;
    for n in [2usize, 3, 8, 16, 64, 256, 1024] {
        for k in 1..100 {
            let mu = k as f64 / 100.0;
            identical &= detection_probability(0.0, mu, n) == false_alarm_probability(mu, n);
        }
        for e in 1..=12 {
            let pf = 10f64.powi(-e);
            let mu = detection_threshold(pf, n);
            // One ulp of μ moves P_F by (N-1)·ε/(1-μ) relative; skip pairs
            // where that alone exceeds a tenth of the tolerance.
            if (n as f64 - 1.0) * f64::EPSILON / (1.0 - mu) > 1e-13 {
                ill_conditioned += 1;
                continue;
            }
            let back = false_alarm_probability(mu, n);
            worst_inverse = worst_inverse.max((back - pf).abs() / pf);
        }
    }
    let mu = detection_threshold(1e-4, 256);
    // A commonly quoted threshold for this setting, which does not invert back.
    let quoted_pf = false_alarm_probability(0.0182, 256);
    check(
        identical && worst_inverse <= 1e-12 && (mu - 0.035477).abs() <= 5e-6,
        format!(
            "P_D(0) == P_F on all grids: {identical}; inverse rel err {worst_inverse:.1e} ({ill_conditioned} of 84 (N, P_F) pairs too ill-conditioned in μ to resolve 1e-12); mu(256, 1e-4) = {mu:.7} \
             (mu = 0.0182 would give P_F = {quoted_pf:.3e}, not 1e-4)"
        ),
    )
}

fn criterion_8() -> Outcome {
    let cfg = reference_config();
    let s = &cfg.scenario;
    let csi = build_csi(&cfg.field, &s.topology, &cfg.antenna).map_err(|e| e.to_string())?;
    let noise = s.limits.noise_power;
    let tight = AllocateOptions { epsilon: 1e-7, ..AllocateOptions::default() };
    let mut worst_margin = f64::INFINITY;
    let mut worst_active: f64 = 0.0;
    let mut feasible_points = 0;
    for &r_req in &cfg.sweep.r_req {
        let sc = s.with_r_req(r_req);
        let (alloc, report) = match allocate(&sc, &csi, &tight) {
            Ok(x) => x,
            Err(Error::InfeasibleRate { .. }) => continue,
            Err(e) => return Err(e.to_string()),
        };
        feasible_points += 1;
        let gamma = report.min_sinr;
        let mut rivals = Vec::new();
        for scheme in [BackoffScheme::EqualBackoff, BackoffScheme::ChannelPriority] {
            let opts = BaselineOptions { step_w: cfg.sweep.baseline_step_w, ..BaselineOptions::new(scheme) };
            if let Ok(out) = algorithm2(&sc, &csi, &opts) {
                if out.rate_met {
                    rivals.push(min_radar_sinr(&out.alloc, &csi, noise));
                }
            }
        }
        for res in [unilateral_c(&sc, &csi, &tight), unilateral_r(&sc, &csi, &tight)] {
            if let Ok((_, rep)) = res {
                rivals.push(rep.min_sinr);
            }
        }
        for g in rivals {
            worst_margin = worst_margin.min(gamma - g);
        }
        let l = &sc.limits;
        let slack_c = (l.p_csum - alloc.total_c()).abs() / l.p_csum;
        let slack_r = (l.p_rsum - alloc.total_r()).abs() / l.p_rsum;
        let slack_rate = (report.rate_achieved - r_req).abs() / r_req.max(1.0);
        worst_active = worst_active.max(slack_c.min(slack_r).min(slack_rate));
    }

    let low = s.with_r_req(1.0);
    let (a100, r100) = allocate(&low, &csi, &tight).map_err(|e| e.to_string())?;
    let mut halved = low.clone();
    halved.limits.p_csum = 50.0;
    let (_, r50) = allocate(&halved, &csi, &tight).map_err(|e| e.to_string())?;
    let overlap = (r100.min_sinr - r50.min_sinr).abs() / r100.min_sinr;
    let full_r = (a100.total_r() - low.limits.p_rsum).abs() / low.limits.p_rsum;
    check(
        worst_margin >= -1e-6 && overlap <= 1e-4 && full_r <= 1e-6 && worst_active <= 1e-6,
        format!(
            "{feasible_points} feasible points, smallest margin over baselines {worst_margin:.3e}; \
             P_csum 50 vs 100 rel diff {overlap:.1e}; sum p_r vs P_rsum {full_r:.1e}; largest active-constraint slack {worst_active:.1e}"
        ),
    )
}

fn criterion_9() -> Outcome {
    let up = ChirpParams::up(2e-6, 5e6);
    let down = ChirpParams::down(2e-6, 5e6);
    let tau = up.pulse_duration;
    let origin = ambiguity_numeric(&up, &up, 0.0, 0.0, DEFAULT_QUADRATURE);
    let mut max_chi: f64 = 0.0;
    for a in 0..41 {
        for b in 0..41 {
            let dt = -tau + 2.0 * tau * a as f64 / 40.0;
            let fd = -5e6 + 1e7 * b as f64 / 40.0;
            max_chi = max_chi
                .max(ambiguity_numeric(&up, &up, dt, fd, DEFAULT_QUADRATURE))
                .max(ambiguity_numeric(&up, &down, dt, fd, DEFAULT_QUADRATURE));
        }
    }
    let mut worst_lfm: f64 = 0.0;
    for a in 0..21 {
        for b in 0..21 {
            let dt = -tau + 2.0 * tau * a as f64 / 20.0;
            let fd = -2.5e6 + 5e6 * b as f64 / 20.0;
            let numeric = ambiguity_numeric(&up, &up, dt, fd, 8192);
            worst_lfm = worst_lfm.max((numeric - ambiguity_lfm(&up, dt, fd)).abs());
        }
    }

    let cfg = reference_config();
    let s = cfg.scenario.with_r_req(cfg.sweep.fixed_r_req);
    let csi = build_csi(&cfg.field, &s.topology, &cfg.antenna).map_err(|e| e.to_string())?;
    let (alloc, _) = allocate(&s, &csi, &AllocateOptions::default()).map_err(|e| e.to_string())?;
    let mut errors = Vec::new();
    for &frac in &cfg.sweep.delay_error_frac {
        for &fd in &cfg.sweep.doppler_hz {
            errors.push(MismatchError::new(frac * tau, fd));
        }
    }
    errors.push(MismatchError::new(0.005 * tau, 0.0));
    let rows = mismatch_sinr_sweep(&s, &csi, &alloc, &cfg.waveform, &errors);
    let pd_at = |dt: f64, fd: f64| {
        rows.iter().filter(|r| r.delta_tau_s == dt && r.delta_fd_hz == fd).map(|r| r.pd).fold(f64::INFINITY, f64::min)
    };
    let mut doppler_cut: f64 = 0.0;
    let mut doppler_drop: f64 = 0.0;
    let fd_max = cfg.sweep.doppler_hz.iter().copied().fold(0.0, f64::max);
    for &frac in &cfg.sweep.delay_error_frac {
        let base = pd_at(frac * tau, 0.0);
        for &fd in &cfg.sweep.doppler_hz {
            let v = pd_at(frac * tau, fd);
            doppler_cut = doppler_cut.max((base - v).abs() / base);
        }
    }
    let pd0 = pd_at(0.0, 0.0);
    doppler_drop = doppler_drop.max(pd0 - pd_at(0.0, fd_max));
    let delay_drop = pd0 - pd_at(0.005 * tau, 0.0);
    check(
        (origin - 1.0).abs() <= 1e-9
            && max_chi <= 1.0 + 1e-9
            && worst_lfm <= 1e-4
            && doppler_cut < 0.02
            && delay_drop >= 3.0 * doppler_drop
            && delay_drop > 0.0,
        format!(
            "chi(0,0) = {origin:.12}, max |chi| {max_chi:.9}, LFM vs quadrature {worst_lfm:.1e}; Doppler cuts differ by \
             {:.4}%; P_D drop at 0.5% tau delay {delay_drop:.4e} vs Doppler {doppler_drop:.4e}",
            100.0 * doppler_cut
        ),
    )
}

fn criterion_10() -> Outcome {
    let cfg = reference_config();
    let s = cfg.scenario.with_r_req(cfg.sweep.fixed_r_req);
    let txs = s.topology.transmitters();
    let data = sample_field(&cfg.field, &txs, cfg.map.bounds, cfg.map.sample_spacing_m).map_err(|e| e.to_string())?;
    let grid = build_grid_map(&data, cfg.map.cell_m).map_err(|e| e.to_string())?;
    let fit = fit_curve_model(&data, &txs, cfg.field.carrier_hz / 1e9).map_err(|e| e.to_string())?;

    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let b = cfg.map.bounds;
    let probes: Vec<Position> = (0..cfg.map.probes)
        .map(|_| Position::new(rng.random_range(b[0]..b[2]), rng.random_range(b[1]..b[3])))
        .collect();
    let (mut err_grid, mut err_fit) = (0.0, 0.0);
    for (id, pos) in &txs {
        err_grid += map_error(&grid, &cfg.field, (id, pos), &probes).map_err(|e| e.to_string())?;
        err_fit += map_error(&fit, &cfg.field, (id, pos), &probes).map_err(|e| e.to_string())?;
    }
    err_grid /= txs.len() as f64;
    err_fit /= txs.len() as f64;

    let truth = build_csi(&cfg.field, &s.topology, &cfg.antenna).map_err(|e| e.to_string())?;
    let csi_grid = build_csi_from(&grid, &cfg.field, &s.topology, &cfg.antenna).map_err(|e| e.to_string())?;
    let csi_fit = build_csi_from(&fit, &cfg.field, &s.topology, &cfg.antenna).map_err(|e| e.to_string())?;
    let l = &s.limits;
    let mu = detection_threshold(l.false_alarm_prob, l.pulses_per_cpi);
    // Allocate on the estimate, score on the ground truth.
    let pd_on_truth = |csi: &LargeScaleCsi| -> Result<f64, String> {
        let (a, _) = allocate(&s, csi, &AllocateOptions::default()).map_err(|e| e.to_string())?;
        Ok(detection_probability(min_radar_sinr(&a, &truth, l.noise_power), mu, l.pulses_per_cpi))
    };
    let pd_truth = pd_on_truth(&truth)?;
    let gap_grid = (pd_on_truth(&csi_grid)? - pd_truth).abs();
    let gap_fit = (pd_on_truth(&csi_fit)? - pd_truth).abs();
    check(
        err_grid < err_fit && err_grid <= 3.0 && gap_grid <= 0.05 && gap_fit > gap_grid,
        format!(
            "mean abs error grid {err_grid:.2} dB vs curve fit {err_fit:.2} dB; P_D truth {pd_truth:.4}, gap grid {gap_grid:.4}, \
             gap curve fit {gap_fit:.4}"
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("fixed point", criterion_1),
        ("deterministic equivalent", criterion_2),
        ("auxiliary derivative", criterion_3),
        ("quadratic transform", criterion_4),
        ("SCA convergence", criterion_5),
        ("grid oracle equivalence", criterion_6),
        ("detection formulas", criterion_7),
        ("dominance and structure", criterion_8),
        ("ambiguity functions", criterion_9),
        ("radio map ordering", criterion_10),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.2} s]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.2} s]", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

//! Invariant suite run by `coexist validate` against a scenario file.

use coexist_core::metrics::{
    comm_snrs, detection_probability, detection_threshold, ergodic_rate_approx, ergodic_rate_mc,
    false_alarm_probability, min_radar_sinr, solve_fixed_point_snr, FIXED_POINT_TOL,
};
use coexist_core::scenario::validate_allocation;
use coexist_core::waveform::{ambiguity_numeric, DEFAULT_QUADRATURE};
use coexist_core::{Config, PowerAllocation};

use crate::error::Result;
use crate::experiment::{map_errors, run_scheme, CsiSources, Estimator, Scheme};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

/// Runs every check on the configured scenario with ground-truth CSI.
/// Errors are reserved for inputs the checks cannot even start on.
pub fn validate(cfg: &Config) -> Result<Vec<Check>> {
    let s = &cfg.scenario;
    let limits = &s.limits;
    let (m_c, m_r, n_c, noise) = (s.m_c(), s.m_r(), s.n_c(), limits.noise_power);
    let truth = CsiSources::new(cfg, &[Estimator::Truth])?.csi(Estimator::Truth, &s.topology, &cfg.antenna)?;
    let mut out = Vec::new();

    let eq = PowerAllocation::equal_split(m_c, m_r, limits);
    let violations = validate_allocation(&eq, limits);
    out.push(check("equal split within limits", violations.is_empty(), format!("{} violation(s)", violations.len())));

    let fp = solve_fixed_point_snr(&comm_snrs(&eq, &truth, noise), n_c, FIXED_POINT_TOL)?;
    out.push(check(
        "fixed point",
        fp.residual.abs() <= FIXED_POINT_TOL && fp.v_star >= 1.0,
        format!("v* {:.6}, residual {:.2e}", fp.v_star, fp.residual),
    ));

    let (n, pfa) = (limits.pulses_per_cpi, limits.false_alarm_prob);
    let mu = detection_threshold(pfa, n);
    let pf = false_alarm_probability(mu, n);
    out.push(check(
        "detection threshold",
        detection_probability(0.0, mu, n) == pf && (pf - pfa).abs() <= 1e-9 * pfa,
        format!("mu {mu:.7}, P_F {pf:.3e}"),
    ));

    match run_scheme(Scheme::Proposed, cfg, s, &truth) {
        Ok(prop) => {
            let rate = ergodic_rate_approx(&prop.alloc, &truth, n_c, noise)?;
            let violations = validate_allocation(&prop.alloc, limits);
            out.push(check(
                "allocation feasible",
                violations.is_empty() && rate >= limits.r_req - 1e-9,
                format!("rate {rate:.6} vs R_req {}, {} limit violation(s)", limits.r_req, violations.len()),
            ));
            let mc = ergodic_rate_mc(&prop.alloc, &truth, n_c, noise, cfg.run.mc_samples, cfg.run.seed).mean;
            out.push(check(
                "rate approximation",
                (mc - rate).abs() <= 0.1 * mc.max(1e-3),
                format!("R_ap {rate:.4} vs Monte Carlo {mc:.4}"),
            ));
            let gamma = min_radar_sinr(&prop.alloc, &truth, noise);
            let mut worst = f64::INFINITY;
            let mut compared = 0;
            for scheme in [Scheme::Algorithm2Equal, Scheme::Algorithm2Priority, Scheme::UnilateralC, Scheme::UnilateralR] {
                if let Ok(b) = run_scheme(scheme, cfg, s, &truth) {
                    if b.rate_met {
                        worst = worst.min(gamma - b.gamma);
                        compared += 1;
                    }
                }
            }
            out.push(check(
                "dominance over baselines",
                worst >= -1e-6 * gamma.max(1e-12),
                format!("{compared} baseline(s), smallest margin {worst:.3e}"),
            ));
        }
        Err(e) => out.push(check("allocation feasible", false, e.to_string())),
    }

    let errors = map_errors(cfg, cfg.run.seed)?;
    let mean = |est: Estimator| {
        let v: Vec<f64> = errors.iter().filter(|r| r.estimator == est).map(|r| r.mae_db).collect();
        v.iter().sum::<f64>() / v.len().max(1) as f64
    };
    let (grid, fit) = (mean(Estimator::Grid), mean(Estimator::CurveFit));
    out.push(check("grid map beats curve fit", grid < fit, format!("{grid:.2} dB vs {fit:.2} dB")));

    let chi0 = ambiguity_numeric(&cfg.waveform, &cfg.waveform, 0.0, 0.0, DEFAULT_QUADRATURE);
    out.push(check("ambiguity peak", (chi0 - 1.0).abs() <= 1e-9, format!("chi(0,0) = {chi0:.12}")));

    Ok(out)
}

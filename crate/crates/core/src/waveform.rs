//! Chirp waveforms, ambiguity functions and the SINR penalty of imperfect
//! delay/Doppler compensation.
//!
//! The ambiguity function is χ_ab(Δτ, Δf) = ∫ u_a(v) u_b*(v - Δτ) e^{j2πΔf v} dv.
//! [`ambiguity_numeric`] evaluates it by quadrature and is the reference;
//! the closed forms are checked against it.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{LargeScaleCsi, SPEED_OF_LIGHT};
use crate::metrics::{detection_probability, detection_threshold, radar_sinr_with_ambiguity};
use crate::scenario::{PowerAllocation, Scenario};

/// Default number of quadrature intervals.
pub const DEFAULT_QUADRATURE: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sweep {
    Up,
    Down,
}

/// A unit-energy linear FM pulse on `[0, τ]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChirpParams {
    /// τ in seconds.
    pub pulse_duration: f64,
    /// B in Hz.
    pub bandwidth: f64,
    pub sweep: Sweep,
}

impl ChirpParams {
    pub fn up(pulse_duration: f64, bandwidth: f64) -> Self {
        Self { pulse_duration, bandwidth, sweep: Sweep::Up }
    }

    pub fn down(pulse_duration: f64, bandwidth: f64) -> Self {
        Self { pulse_duration, bandwidth, sweep: Sweep::Down }
    }

    pub fn with_sweep(self, sweep: Sweep) -> Self {
        Self { sweep, ..self }
    }

    /// Chirp of radar `i`: up for even, down for odd indices.
    pub fn for_radar(self, i: usize) -> Self {
        self.with_sweep(if i % 2 == 0 { Sweep::Up } else { Sweep::Down })
    }

    fn sign(&self) -> f64 {
        match self.sweep {
            Sweep::Up => 1.0,
            Sweep::Down => -1.0,
        }
    }
}

/// A finite-support complex baseband envelope.
pub trait Envelope {
    fn support(&self) -> (f64, f64);
    fn eval(&self, t: f64) -> Complex64;
}

impl Envelope for ChirpParams {
    fn support(&self) -> (f64, f64) {
        (0.0, self.pulse_duration)
    }

    fn eval(&self, t: f64) -> Complex64 {
        chirp_envelope(self, t)
    }
}

/// u(t) = τ^{-1/2} exp(±j(πBt²/τ - πBt)) on `[0, τ]`, zero elsewhere.
pub fn chirp_envelope(params: &ChirpParams, t: f64) -> Complex64 {
    let tau = params.pulse_duration;
    if !(0.0..=tau).contains(&t) {
        return Complex64::new(0.0, 0.0);
    }
    let b = params.bandwidth;
    let phase = params.sign() * (PI * b * t * t / tau - PI * b * t);
    Complex64::from_polar(1.0 / tau.sqrt(), phase)
}

/// Composite Simpson rule on `[a, b]` with `intervals` (rounded up to even).
fn simpson<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, intervals: usize) -> Complex64 {
    let n = (intervals.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += f(a + k as f64 * h) * w;
    }
    acc * (h / 3.0)
}

/// |χ_ab(Δτ, Δf)| by composite Simpson quadrature over the support overlap.
pub fn ambiguity_numeric(
    u_a: &dyn Envelope,
    u_b: &dyn Envelope,
    delta_tau: f64,
    delta_fd: f64,
    quadrature_points: usize,
) -> f64 {
    let (a0, a1) = u_a.support();
    let (b0, b1) = u_b.support();
    let lo = a0.max(b0 + delta_tau);
    let hi = a1.min(b1 + delta_tau);
    if !(hi > lo) {
        return 0.0;
    }
    let integrand = |v: f64| {
        u_a.eval(v) * u_b.eval(v - delta_tau).conj() * Complex64::from_polar(1.0, 2.0 * PI * delta_fd * v)
    };
    simpson(integrand, lo, hi, quadrature_points).norm()
}

/// Standard LFM self-ambiguity (1 - |Δτ|/τ)|sinc(k(τ - |Δτ|))| with
/// k = ±BΔτ/τ + Δf.
pub fn ambiguity_lfm(params: &ChirpParams, delta_tau: f64, delta_fd: f64) -> f64 {
    let tau = params.pulse_duration;
    let span = tau - delta_tau.abs();
    if span <= 0.0 {
        return 0.0;
    }
    let k = params.sign() * params.bandwidth * delta_tau / tau + delta_fd;
    span / tau * sinc(k * span).abs()
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmbiguityKind {
    Auto,
    Cross,
}

/// The two chirp closed forms in their literal (unnormalised) shape, kept for
/// comparison with the numeric oracle.
///
/// `Auto` evaluates |sin(πg(τ - |Δτ|)) / (πgτ)| with g = B/τ + Δf, which does
/// not reduce to 1 at the origin. `Cross` evaluates the up/down chirp
/// integral ∫ exp(j2π(Δf + (u - Δτ - τ)B/τ)u) du over the support overlap,
/// scaled by 1/τ so that it is the cross-ambiguity of the unit-energy pulses.
pub fn ambiguity_chirp_closed(kind: AmbiguityKind, params: &ChirpParams, delta_tau: f64, delta_fd: f64) -> f64 {
    let tau = params.pulse_duration;
    let b = params.bandwidth;
    if delta_tau.abs() >= tau {
        return 0.0;
    }
    match kind {
        AmbiguityKind::Auto => {
            let g = b / tau + delta_fd;
            let span = tau - delta_tau.abs();
            if g.abs() < 1e-300 {
                return span / tau;
            }
            ((PI * g * span).sin() / (PI * g * tau)).abs()
        }
        AmbiguityKind::Cross => {
            let (lo, hi) = if delta_tau <= 0.0 { (0.0, tau + delta_tau) } else { (delta_tau, tau) };
            if hi <= lo {
                return 0.0;
            }
            let integrand =
                |u: f64| Complex64::from_polar(1.0, 2.0 * PI * (delta_fd + (u - delta_tau - tau) / tau * b) * u);
            simpson(integrand, lo, hi, DEFAULT_QUADRATURE).norm() / tau
        }
    }
}

/// Residual delay and Doppler compensation errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MismatchError {
    /// Δτ in seconds.
    pub delay_error: f64,
    /// Δf_d in Hz.
    pub doppler_error: f64,
}

impl MismatchError {
    pub fn new(delay_error: f64, doppler_error: f64) -> Self {
        Self { delay_error, doppler_error }
    }
}

/// One row of a mismatch sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MismatchRow {
    pub delta_tau_s: f64,
    pub delta_fd_hz: f64,
    pub radar_id: usize,
    pub sinr: f64,
    pub pd: f64,
}

/// Per-radar SINR and detection probability under each compensation error.
///
/// Radar `i` transmits [`ChirpParams::for_radar`]. Its own echo is matched at
/// (Δτ, Δf); the echo of radar `j` arrives offset by the bistatic path
/// difference (d_j - d_i)/c plus Δτ.
pub fn mismatch_sinr_sweep(
    scenario: &Scenario,
    csi: &LargeScaleCsi,
    alloc: &PowerAllocation,
    params: &ChirpParams,
    errors: &[MismatchError],
) -> Vec<MismatchRow> {
    let topo = &scenario.topology;
    let limits = &scenario.limits;
    let m_r = csi.m_r();
    let mu = detection_threshold(limits.false_alarm_prob, limits.pulses_per_cpi);
    let ranges: Vec<f64> =
        topo.radar_positions.iter().map(|r| r.distance(&topo.target_position)).collect();
    let chirps: Vec<ChirpParams> = (0..m_r).map(|i| params.for_radar(i)).collect();
    let mut rows = Vec::with_capacity(errors.len() * m_r);
    for err in errors {
        for i in 0..m_r {
            let chi_auto =
                ambiguity_numeric(&chirps[i], &chirps[i], err.delay_error, err.doppler_error, DEFAULT_QUADRATURE);
            let chi_cross: Vec<f64> = (0..m_r)
                .map(|j| {
                    if j == i {
                        return 0.0;
                    }
                    let offset = (ranges[j] - ranges[i]) / SPEED_OF_LIGHT + err.delay_error;
                    ambiguity_numeric(&chirps[j], &chirps[i], offset, err.doppler_error, DEFAULT_QUADRATURE)
                })
                .collect();
            let sinr = radar_sinr_with_ambiguity(alloc, csi, i, limits.noise_power, chi_auto, &chi_cross);
            rows.push(MismatchRow {
                delta_tau_s: err.delay_error,
                delta_fd_hz: err.doppler_error,
                radar_id: i,
                sinr,
                pd: detection_probability(sinr, mu, limits.pulses_per_cpi),
            });
        }
    }
    rows
}

//! Performance functionals: radar SINR, detection statistics, ergodic rate
//! (Monte Carlo and deterministic equivalent) and the auxiliary functions
//! used by the convex reformulation.
//!
//! Communication-side quantities are expressed through the per-BS effective
//! SNRs `a_j = l_cj p_cj / σ_c²`, which is all the deterministic equivalent
//! depends on.

use std::f64::consts::LOG2_E;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{fill_cn01, LargeScaleCsi};
use crate::error::{Error, Result};
use crate::scenario::PowerAllocation;

/// Default tolerance of the fixed-point residual.
pub const FIXED_POINT_TOL: f64 = 1e-12;

const FIXED_POINT_MAX_ITER: usize = 400;

/// Fading draws per independently seeded Monte Carlo chunk.
pub const MC_CHUNK: usize = 4096;

/// σ_r² of radar `i`: interference from the BSs plus noise.
pub fn radar_interference(p_c: &[f64], l_c_to_r_col: &[f64], noise: f64) -> f64 {
    p_c.iter().zip(l_c_to_r_col).map(|(p, l)| p * l).sum::<f64>() + noise
}

/// Interference-plus-noise at radar `i` under `alloc`.
pub fn radar_interference_at(alloc: &PowerAllocation, csi: &LargeScaleCsi, i: usize, noise: f64) -> f64 {
    alloc.p_c.iter().zip(&csi.l_c_to_r).map(|(p, row)| p * row[i]).sum::<f64>() + noise
}

/// Radar SINR with ideal waveform orthogonality.
pub fn radar_sinr(alloc: &PowerAllocation, csi: &LargeScaleCsi, i: usize, noise: f64) -> f64 {
    alloc.p_r[i] * csi.radar_gain(i) / radar_interference_at(alloc, csi, i, noise)
}

pub fn radar_sinrs(alloc: &PowerAllocation, csi: &LargeScaleCsi, noise: f64) -> Vec<f64> {
    (0..csi.m_r()).map(|i| radar_sinr(alloc, csi, i, noise)).collect()
}

pub fn min_radar_sinr(alloc: &PowerAllocation, csi: &LargeScaleCsi, noise: f64) -> f64 {
    radar_sinrs(alloc, csi, noise).into_iter().fold(f64::INFINITY, f64::min)
}

/// Radar SINR with matched-filter leakage: the echo is weighted by
/// `|chi_auto|²` and every other radar `j` leaks `p_rj |h_{rj->ri}|² |chi_cross[j]|²`.
/// `chi_cross[i]` is ignored.
pub fn radar_sinr_with_ambiguity(
    alloc: &PowerAllocation,
    csi: &LargeScaleCsi,
    i: usize,
    noise: f64,
    chi_auto: f64,
    chi_cross: &[f64],
) -> f64 {
    let leakage: f64 = (0..csi.m_r())
        .filter(|&j| j != i)
        .map(|j| alloc.p_r[j] * csi.radar_cross[j][i] * chi_cross[j] * chi_cross[j])
        .sum();
    let signal = alloc.p_r[i] * csi.radar_gain(i) * chi_auto * chi_auto;
    signal / (leakage + radar_interference_at(alloc, csi, i, noise))
}

/// Threshold μ giving false-alarm probability `p_fa` over `n` pulses.
pub fn detection_threshold(p_fa: f64, n: usize) -> f64 {
    -(p_fa.ln() / (n as f64 - 1.0)).exp_m1()
}

/// P_F = (1 - μ)^(N-1), evaluated in the same form as
/// [`detection_probability`] so that P_D(0) equals it bit for bit.
pub fn false_alarm_probability(mu: f64, n: usize) -> f64 {
    ((1.0 - n as f64) * (mu / (1.0 - mu)).ln_1p()).exp()
}

/// P_D = (1 + μ/(1-μ) / (1 + Nρ))^(1-N).
pub fn detection_probability(rho: f64, mu: f64, n: usize) -> f64 {
    let nf = n as f64;
    let x = mu / (1.0 - mu) / (1.0 + nf * rho);
    ((1.0 - nf) * x.ln_1p()).exp()
}

/// σ_c²: radar interference at the user plus noise.
pub fn comm_interference(p_r: &[f64], l_r_to_c: &[f64], noise: f64) -> f64 {
    p_r.iter().zip(l_r_to_c).map(|(p, l)| p * l).sum::<f64>() + noise
}

/// Effective per-BS SNRs `a_j = l_cj p_cj / σ_c²`.
pub fn comm_snrs(alloc: &PowerAllocation, csi: &LargeScaleCsi, noise: f64) -> Vec<f64> {
    let sigma_c = comm_interference(&alloc.p_r, &csi.l_r_to_c, noise);
    alloc.p_c.iter().zip(&csi.l_c).map(|(p, l)| l * p / sigma_c).collect()
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Monte Carlo ergodic rate of the interfered user.
///
/// Draws are split into chunks of [`MC_CHUNK`]; chunk `k` uses ChaCha8 stream
/// `k` of `seed`, so the estimate does not depend on the number of workers.
pub fn ergodic_rate_mc(
    alloc: &PowerAllocation,
    csi: &LargeScaleCsi,
    n_c: usize,
    noise: f64,
    samples: usize,
    seed: u64,
) -> RateEstimate {
    ergodic_rate_mc_snr(&comm_snrs(alloc, csi, noise), n_c, samples, seed)
}

/// [`ergodic_rate_mc`] on effective SNRs.
pub fn ergodic_rate_mc_snr(snr: &[f64], n_c: usize, samples: usize, seed: u64) -> RateEstimate {
    let samples = samples.max(1);
    let chunks = samples.div_ceil(MC_CHUNK);
    let sums: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let count = MC_CHUNK.min(samples - k * MC_CHUNK);
            mc_chunk(snr, n_c, count, seed, k as u64)
        })
        .collect();
    let (s1, s2) = sums.iter().fold((0.0, 0.0), |acc, (a, b)| (acc.0 + a, acc.1 + b));
    let n = samples as f64;
    let mean = s1 / n;
    let var = if samples > 1 { ((s2 - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    RateEstimate { mean, std_error: (var / n).sqrt(), samples }
}

fn mc_chunk(snr: &[f64], n_c: usize, count: usize, seed: u64, stream: u64) -> (f64, f64) {
    let m = snr.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let sq: Vec<f64> = snr.iter().map(|a| a.sqrt()).collect();
    let mut s = Vec::with_capacity(m * n_c);
    let mut g = vec![Complex64::new(0.0, 0.0); m * m];
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..count {
        fill_cn01(&mut rng, m * n_c, &mut s);
        // G = I + D^{1/2} S S^H D^{1/2}; det G = det(I + H^H P H / σ_c²).
        for j in 0..m {
            for k in 0..=j {
                let mut acc = Complex64::new(0.0, 0.0);
                for n in 0..n_c {
                    acc += s[j * n_c + n] * s[k * n_c + n].conj();
                }
                acc *= sq[j] * sq[k];
                if j == k {
                    acc += 1.0;
                }
                g[j * m + k] = acc;
            }
        }
        let r = hermitian_logdet(&mut g, m) * LOG2_E;
        s1 += r;
        s2 += r * r;
    }
    (s1, s2)
}

/// ln det of a Hermitian positive-definite matrix whose lower triangle is
/// stored row-major in `g`; overwritten with its Cholesky factor.
pub(crate) fn hermitian_logdet(g: &mut [Complex64], m: usize) -> f64 {
    let mut logdet = 0.0;
    for j in 0..m {
        let mut d = g[j * m + j].re;
        for k in 0..j {
            d -= g[j * m + k].norm_sqr();
        }
        let d = d.max(f64::MIN_POSITIVE).sqrt();
        g[j * m + j] = Complex64::new(d, 0.0);
        logdet += 2.0 * d.ln();
        for i in (j + 1)..m {
            let mut v = g[i * m + j];
            for k in 0..j {
                v -= g[i * m + k] * g[j * m + k].conj();
            }
            g[i * m + j] = v / d;
        }
    }
    logdet
}

/// Solution of the deterministic-equivalent fixed point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    pub v_star: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Residual 1 - 1/v - Σ a_j / (v + N_c a_j); strictly increasing in v.
pub fn fixed_point_residual(snr: &[f64], n_c: usize, v: f64) -> f64 {
    let nc = n_c as f64;
    1.0 - 1.0 / v - snr.iter().map(|a| a / (v + nc * a)).sum::<f64>()
}

fn fixed_point_slope(snr: &[f64], n_c: usize, v: f64) -> f64 {
    let nc = n_c as f64;
    1.0 / (v * v) + snr.iter().map(|a| a / (v + nc * a).powi(2)).sum::<f64>()
}

/// Solves the fixed point on effective SNRs by bisection on
/// `[1, 1 + N_c Σ a_j]` followed by a guarded Newton polish.
pub fn solve_fixed_point_snr(snr: &[f64], n_c: usize, tol: f64) -> Result<FixedPoint> {
    let nc = n_c as f64;
    let total: f64 = snr.iter().sum();
    if total <= 0.0 {
        return Ok(FixedPoint { v_star: 1.0, residual: 0.0, iterations: 0 });
    }
    let (mut lo, mut hi) = (1.0, 1.0 + nc * total);
    let mut v = 0.5 * (lo + hi);
    let mut iterations = 0;
    let mut res = fixed_point_residual(snr, n_c, v);
    while iterations < FIXED_POINT_MAX_ITER {
        iterations += 1;
        if res.abs() <= tol * 1e-2 {
            break;
        }
        if res < 0.0 {
            lo = v;
        } else {
            hi = v;
        }
        // Newton step when it stays inside the bracket, bisection otherwise.
        let newton = v - res / fixed_point_slope(snr, n_c, v);
        v = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        res = fixed_point_residual(snr, n_c, v);
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    if !(res.abs() <= tol) || !v.is_finite() {
        return Err(Error::FixedPointDiverged { iterations, residual: res });
    }
    Ok(FixedPoint { v_star: v.max(1.0), residual: res, iterations })
}

pub fn solve_fixed_point(
    alloc: &PowerAllocation,
    csi: &LargeScaleCsi,
    n_c: usize,
    noise: f64,
    tol: f64,
) -> Result<FixedPoint> {
    solve_fixed_point_snr(&comm_snrs(alloc, csi, noise), n_c, tol)
}

/// Deterministic-equivalent rate for a known fixed point `v`.
pub fn rate_approx_at(snr: &[f64], n_c: usize, v: f64) -> f64 {
    let nc = n_c as f64;
    snr.iter().map(|a| (nc * a / v).ln_1p()).sum::<f64>() * LOG2_E + nc * v.log2()
        - nc * LOG2_E * (1.0 - 1.0 / v)
}

/// Deterministic-equivalent ergodic rate on effective SNRs.
pub fn ergodic_rate_approx_snr(snr: &[f64], n_c: usize) -> Result<f64> {
    let fp = solve_fixed_point_snr(snr, n_c, FIXED_POINT_TOL)?;
    Ok(rate_approx_at(snr, n_c, fp.v_star))
}

pub fn ergodic_rate_approx(
    alloc: &PowerAllocation,
    csi: &LargeScaleCsi,
    n_c: usize,
    noise: f64,
) -> Result<f64> {
    ergodic_rate_approx_snr(&comm_snrs(alloc, csi, noise), n_c)
}

/// Auxiliary point (z, t) of the rate reformulation.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxState {
    pub z: f64,
    pub t: Vec<f64>,
}

/// t*_j = N_c a_j / (z + N_c a_j).
pub fn t_star(snr: &[f64], n_c: usize, z: f64) -> Vec<f64> {
    let nc = n_c as f64;
    snr.iter().map(|a| nc * a / (z + nc * a)).collect()
}

/// 𝒢(z, t) = -log2(e) Σ (t_j + ln(1 - t_j)) + N_c log2(z).
pub fn aux_big_g(z: f64, t: &[f64], n_c: usize) -> Result<f64> {
    if let Some(bad) = t.iter().find(|&&tj| !(tj < 1.0)) {
        return Err(Error::InvalidArgument(format!("t entries must be < 1, got {bad}")));
    }
    Ok(-LOG2_E * t.iter().map(|tj| tj + (-tj).ln_1p()).sum::<f64>() + n_c as f64 * z.log2())
}

/// g(z) = 𝒢(z, t*(z)).
pub fn aux_g(snr: &[f64], n_c: usize, z: f64) -> f64 {
    let t = t_star(snr, n_c, z);
    -LOG2_E * t.iter().map(|tj| tj + (-tj).ln_1p()).sum::<f64>() + n_c as f64 * z.log2()
}

/// dg/dz = log2(e) / z · (N_c - Σ t*_j²), positive whenever N_c ≥ M_c.
pub fn aux_g_derivative(snr: &[f64], n_c: usize, z: f64) -> f64 {
    let t = t_star(snr, n_c, z);
    LOG2_E / z * (n_c as f64 - t.iter().map(|x| x * x).sum::<f64>())
}

//! Convex surrogate built around an anchor point.
//!
//! Variables are the free BS powers, the free radar powers, z, t and the
//! epigraph variable (γ for max-min SINR, r for the rate probe). Frozen power
//! blocks enter as constants.

use std::f64::consts::LOG2_E;

use crate::channel::LargeScaleCsi;
use crate::error::{Error, Result};
use crate::metrics::comm_interference;
use crate::scenario::{PowerAllocation, Scenario};

use super::barrier::{ConvexProgram, Row, Term};
use super::{Coupling, Variant};

/// Lower bound on every optimised power, keeping ln p and √p differentiable.
pub const P_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Maximise the smallest quadratic-transform SINR surrogate subject to
    /// the rate requirement.
    MinSinr,
    /// Maximise the rate approximation over BS powers with radar powers fixed.
    Rate,
}

/// Linearisation point.
#[derive(Debug, Clone, PartialEq)]
pub struct Anchor {
    pub alloc: PowerAllocation,
    pub z: f64,
    pub t: Vec<f64>,
    pub beta: Vec<f64>,
}

/// Position of each quantity in the variable vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub p_c: Vec<Option<usize>>,
    pub p_r: Vec<Option<usize>>,
    pub z: usize,
    pub t: Vec<usize>,
    pub objective: usize,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subproblem {
    pub program: ConvexProgram,
    pub layout: Layout,
    /// Values used for frozen powers.
    pub frozen: PowerAllocation,
}

impl Subproblem {
    pub fn pack(&self, alloc: &PowerAllocation, z: f64, t: &[f64], objective: f64) -> Vec<f64> {
        let l = &self.layout;
        let mut x = vec![0.0; l.n];
        for (slot, &p) in l.p_c.iter().zip(&alloc.p_c) {
            if let Some(i) = slot {
                x[*i] = p;
            }
        }
        for (slot, &p) in l.p_r.iter().zip(&alloc.p_r) {
            if let Some(i) = slot {
                x[*i] = p;
            }
        }
        x[l.z] = z;
        for (&i, &tj) in l.t.iter().zip(t) {
            x[i] = tj;
        }
        x[l.objective] = objective;
        x
    }

    /// Returns the allocation (frozen blocks filled in), z, t and the
    /// objective variable.
    pub fn unpack(&self, x: &[f64]) -> (PowerAllocation, f64, Vec<f64>, f64) {
        let l = &self.layout;
        let pick = |slots: &[Option<usize>], frozen: &[f64]| -> Vec<f64> {
            slots.iter().zip(frozen).map(|(s, &f)| s.map_or(f, |i| x[i])).collect()
        };
        let alloc = PowerAllocation::new(pick(&l.p_c, &self.frozen.p_c), pick(&l.p_r, &self.frozen.p_r));
        (alloc, x[l.z], l.t.iter().map(|&i| x[i]).collect(), x[l.objective])
    }
}

/// First-order expansion of 𝒢 in t around `t_prev`:
/// `constant + Σ t_coef_j t_j + N_c log2 z`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedG {
    pub constant: f64,
    pub t_coef: Vec<f64>,
    pub n_c: usize,
}

impl LinearizedG {
    pub fn eval(&self, z: f64, t: &[f64]) -> f64 {
        self.constant + self.t_coef.iter().zip(t).map(|(c, x)| c * x).sum::<f64>() + self.n_c as f64 * z.log2()
    }
}

/// -log2(e) Σ (t_prev (1 - t) / (1 - t_prev) + ln(1 - t_prev)) + N_c log2 z.
///
/// Each t-term of 𝒢 is convex, so the expansion is a global minorant.
pub fn linearize_big_g(t_prev: &[f64], n_c: usize) -> Result<LinearizedG> {
    if let Some(bad) = t_prev.iter().find(|&&t| !(t < 1.0 - 1e-9) || t < 0.0) {
        return Err(Error::InvalidArgument(format!("t anchor {bad} is outside [0, 1)")));
    }
    let constant = -LOG2_E * t_prev.iter().map(|&tp| tp / (1.0 - tp) + (-tp).ln_1p()).sum::<f64>();
    let t_coef = t_prev.iter().map(|&tp| LOG2_E * tp / (1.0 - tp)).collect();
    Ok(LinearizedG { constant, t_coef, n_c })
}

/// First-order expansion of ln t_j + ln z + ln σ_c²(p_r) around the anchor:
/// `constant + t_coef t_j + z_coef z + Σ p_r_coef_i p_ri`. Upper-bounds the
/// concave original.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedLog {
    pub constant: f64,
    pub t_coef: f64,
    pub z_coef: f64,
    pub p_r_coef: Vec<f64>,
}

impl LinearizedLog {
    pub fn eval(&self, t: f64, z: f64, p_r: &[f64]) -> f64 {
        self.constant
            + self.t_coef * t
            + self.z_coef * z
            + self.p_r_coef.iter().zip(p_r).map(|(c, p)| c * p).sum::<f64>()
    }
}

pub fn linearize_log_constraint(
    t_prev: f64,
    z_prev: f64,
    p_r_prev: &[f64],
    csi: &LargeScaleCsi,
    noise: f64,
) -> Result<LinearizedLog> {
    if !(t_prev > 0.0) || !(z_prev > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "log linearisation needs positive anchors, got t = {t_prev}, z = {z_prev}"
        )));
    }
    let sigma = comm_interference(p_r_prev, &csi.l_r_to_c, noise);
    let p_r_coef: Vec<f64> = csi.l_r_to_c.iter().map(|l| l / sigma).collect();
    let shift: f64 = p_r_coef.iter().zip(p_r_prev).map(|(c, p)| c * p).sum();
    Ok(LinearizedLog {
        constant: (t_prev * z_prev * sigma).ln() - 2.0 - shift,
        t_coef: 1.0 / t_prev,
        z_coef: 1.0 / z_prev,
        p_r_coef,
    })
}

/// Builds the convex surrogate around `anchor`.
///
/// Rows, in order: rate, one per radar (MinSinr only), z/t coupling, one log
/// row per BS, z ≥ 1, t ≥ 0, power boxes and budgets of the free blocks.
pub fn build_subproblem(
    scenario: &Scenario,
    csi: &LargeScaleCsi,
    anchor: &Anchor,
    variant: Variant,
    coupling: Coupling,
    objective: Objective,
) -> Result<Subproblem> {
    let limits = &scenario.limits;
    let (m_c, m_r, n_c) = (csi.m_c(), csi.m_r(), scenario.n_c());
    if anchor.alloc.p_c.len() != m_c || anchor.alloc.p_r.len() != m_r || anchor.t.len() != m_c {
        return Err(Error::Dimension("anchor does not match the CSI dimensions".into()));
    }
    let free_c = variant.optimizes_bs();
    let free_r = variant.optimizes_radar() && objective == Objective::MinSinr;

    let mut n = 0;
    let mut next = |free: bool| {
        free.then(|| {
            n += 1;
            n - 1
        })
    };
    let p_c: Vec<Option<usize>> = (0..m_c).map(|_| next(free_c)).collect();
    let p_r: Vec<Option<usize>> = (0..m_r).map(|_| next(free_r)).collect();
    let z = n;
    let t: Vec<usize> = (z + 1..z + 1 + m_c).collect();
    let obj = z + 1 + m_c;
    let layout = Layout { p_c, p_r, z, t, objective: obj, n: obj + 1 };

    let noise = limits.noise_power;
    let alloc = &anchor.alloc;
    let mut rows = Vec::new();

    // Rate: linearised 𝒢 ≥ R_req (or ≥ r).
    let lg = linearize_big_g(&anchor.t, n_c)?;
    let mut rate = match objective {
        Objective::MinSinr => Row::new("rate", lg.constant - limits.r_req),
        Objective::Rate => Row::new("rate", lg.constant).lin(obj, -1.0),
    };
    for (j, &c) in lg.t_coef.iter().enumerate() {
        rate = rate.lin(layout.t[j], c);
    }
    rate = rate.term(Term::Ln { idx: z, weight: n_c as f64 * LOG2_E, a: 1.0, b: 0.0 });
    rows.push(rate);

    // Radar surrogates: 2β√(|h|² p_r) - β² σ_r²(P_c) ≥ γ.
    if objective == Objective::MinSinr {
        for i in 0..m_r {
            let beta = anchor.beta[i];
            let b2 = beta * beta;
            let gain = csi.radar_gain(i);
            let mut row = Row::new("radar", -b2 * noise).lin(obj, -1.0);
            match layout.p_r[i] {
                Some(idx) => row = row.term(Term::Sqrt { idx, weight: 2.0 * beta * gain.sqrt() }),
                None => row.constant += 2.0 * beta * (gain * alloc.p_r[i]).sqrt(),
            }
            for j in 0..m_c {
                let coef = -b2 * csi.l_c_to_r[j][i];
                match layout.p_c[j] {
                    Some(idx) => row = row.lin(idx, coef),
                    None => row.constant += coef * alloc.p_c[j],
                }
            }
            rows.push(row);
        }
    }

    // Coupling: 2/z_prev - z/z_prev² + c Σ t ≥ 1.
    let zp = anchor.z;
    let c = match coupling {
        Coupling::UserAntennas => 1.0 / n_c as f64,
        Coupling::BaseStations => 1.0 / m_c as f64,
    };
    let mut coup = Row::new("coupling", 2.0 / zp - 1.0).lin(z, -1.0 / (zp * zp));
    for &ti in &layout.t {
        coup = coup.lin(ti, c);
    }
    rows.push(coup);

    // Log rows: ln(N_c l p_cj) + ln(1 - t_j) ≥ linearised ln t_j + ln z + ln σ_c².
    for j in 0..m_c {
        let ll = linearize_log_constraint(anchor.t[j], zp, &alloc.p_r, csi, noise)?;
        let lc = n_c as f64 * csi.l_c[j];
        let mut row = Row::new("log", -ll.constant)
            .lin(layout.t[j], -ll.t_coef)
            .lin(z, -ll.z_coef)
            .term(Term::Ln { idx: layout.t[j], weight: 1.0, a: -1.0, b: 1.0 });
        match layout.p_c[j] {
            Some(idx) => row = row.term(Term::Ln { idx, weight: 1.0, a: lc, b: 0.0 }),
            None => row.constant += (lc * alloc.p_c[j]).ln(),
        }
        for (i, &coef) in ll.p_r_coef.iter().enumerate() {
            match layout.p_r[i] {
                Some(idx) => row = row.lin(idx, -coef),
                None => row.constant -= coef * alloc.p_r[i],
            }
        }
        rows.push(row);
    }

    rows.push(Row::new("z_min", -1.0).lin(z, 1.0));
    for &ti in &layout.t {
        rows.push(Row::new("t_min", 0.0).lin(ti, 1.0));
    }

    let mut push_block = |slots: &[Option<usize>], cap: f64, budget: f64| {
        let free: Vec<usize> = slots.iter().flatten().copied().collect();
        if free.is_empty() {
            return;
        }
        for &i in &free {
            rows.push(Row::new("p_min", -P_FLOOR).lin(i, 1.0));
            rows.push(Row::new("p_max", cap).lin(i, -1.0));
        }
        let mut sum = Row::new("budget", budget);
        for &i in &free {
            sum = sum.lin(i, -1.0);
        }
        rows.push(sum);
    };
    push_block(&layout.p_c, limits.p_cmax, limits.p_csum);
    push_block(&layout.p_r, limits.p_rmax, limits.p_rsum);

    let n = layout.n;
    Ok(Subproblem { program: ConvexProgram { n, objective: obj, rows }, layout, frozen: alloc.clone() })
}

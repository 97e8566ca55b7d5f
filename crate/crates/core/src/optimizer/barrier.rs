//! Log-barrier interior-point method for small smooth convex programs of the
//! form
//!
//! ```text
//! maximize   x[k]
//! subject to c_r + Σ a_ri x_i + Σ concave terms ≥ 0   for every row r
//! ```
//!
//! where every concave term acts on a single variable, so term Hessians are
//! diagonal. A phase-I problem with a shared slack finds a strictly feasible
//! start when none is given.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A concave function of one variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Term {
    /// `weight · ln(a · x[idx] + b)`, `weight ≥ 0`.
    Ln { idx: usize, weight: f64, a: f64, b: f64 },
    /// `weight · sqrt(x[idx])`, `weight ≥ 0`.
    Sqrt { idx: usize, weight: f64 },
}

impl Term {
    fn idx(&self) -> usize {
        match *self {
            Term::Ln { idx, .. } | Term::Sqrt { idx, .. } => idx,
        }
    }

    /// Value, first and second derivative, or `None` outside the domain.
    fn eval(&self, x: &[f64]) -> Option<(f64, f64, f64)> {
        match *self {
            Term::Ln { idx, weight, a, b } => {
                let arg = a * x[idx] + b;
                if !(arg > 0.0) {
                    return None;
                }
                Some((weight * arg.ln(), weight * a / arg, -weight * a * a / (arg * arg)))
            }
            Term::Sqrt { idx, weight } => {
                let v = x[idx];
                if !(v > 0.0) {
                    return None;
                }
                let s = v.sqrt();
                Some((weight * s, 0.5 * weight / s, -0.25 * weight / (v * s)))
            }
        }
    }
}

/// One constraint `constant + linear · x + Σ terms ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: &'static str,
    pub constant: f64,
    pub linear: Vec<(usize, f64)>,
    pub terms: Vec<Term>,
}

impl Row {
    pub fn new(name: &'static str, constant: f64) -> Self {
        Self { name, constant, linear: Vec::new(), terms: Vec::new() }
    }

    pub fn lin(mut self, idx: usize, coef: f64) -> Self {
        if coef != 0.0 {
            self.linear.push((idx, coef));
        }
        self
    }

    pub fn term(mut self, term: Term) -> Self {
        let w = match term {
            Term::Ln { weight, .. } | Term::Sqrt { weight, .. } => weight,
        };
        debug_assert!(w >= 0.0, "concave terms need non-negative weights");
        if w != 0.0 {
            self.terms.push(term);
        }
        self
    }

    /// Row value, `None` when a term leaves its domain.
    pub fn value(&self, x: &[f64]) -> Option<f64> {
        let mut v = self.constant;
        for &(i, a) in &self.linear {
            v += a * x[i];
        }
        for t in &self.terms {
            v += t.eval(x)?.0;
        }
        Some(v)
    }
}

/// Maximise `x[objective]` subject to `rows`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexProgram {
    pub n: usize,
    pub objective: usize,
    pub rows: Vec<Row>,
}

impl ConvexProgram {
    pub fn row_values(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.rows.iter().map(|r| r.value(x)).collect()
    }

    /// Smallest row value at `x` (negative when infeasible).
    pub fn min_slack(&self, x: &[f64]) -> Option<f64> {
        Some(self.row_values(x)?.into_iter().fold(f64::INFINITY, f64::min))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum SolveStatus {
    Optimal,
    /// Centering stalled; the point is strictly feasible but the duality gap
    /// target was not met.
    Inaccurate,
    Infeasible,
    MaxIter,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Inaccurate => "inaccurate",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::MaxIter => "max_iter",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierOptions {
    /// Stop when m/τ ≤ gap_rel · |objective| + gap_abs.
    pub gap_rel: f64,
    pub gap_abs: f64,
    pub mu: f64,
    pub tau0: f64,
    pub newton_tol: f64,
    pub max_newton: usize,
    pub max_outer: usize,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        Self {
            gap_rel: 1e-10,
            gap_abs: 1e-14,
            mu: 20.0,
            tau0: 1.0,
            newton_tol: 1e-10,
            max_newton: 100,
            max_outer: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub status: SolveStatus,
    pub newton_steps: usize,
}

/// Barrier view of a program, optionally augmented with a phase-I slack `s`
/// stored after the program variables (every row becomes `f + s ≥ 0`).
struct Barrier<'a> {
    prog: &'a ConvexProgram,
    extra: Vec<Row>,
    slack: bool,
    /// Index of the maximised variable in the augmented vector, or the slack
    /// (minimised) in phase I.
    dim: usize,
}

impl Barrier<'_> {
    fn rows(&self) -> impl Iterator<Item = &Row> {
        self.prog.rows.iter().chain(self.extra.iter())
    }

    fn m(&self) -> usize {
        self.prog.rows.len() + self.extra.len()
    }

    fn values(&self, y: &[f64]) -> Option<Vec<f64>> {
        let s = if self.slack { y[self.prog.n] } else { 0.0 };
        let mut out = Vec::with_capacity(self.m());
        for r in self.rows() {
            let v = r.value(y)? + s;
            if !(v > 0.0) {
                return None;
            }
            out.push(v);
        }
        Some(out)
    }

    /// Linear objective coefficient vector (maximised).
    fn objective_grad(&self) -> DVector<f64> {
        let mut c = DVector::zeros(self.dim);
        if self.slack {
            c[self.prog.n] = -1.0;
        } else {
            c[self.prog.objective] = 1.0;
        }
        c
    }

    fn objective(&self, y: &[f64]) -> f64 {
        if self.slack {
            -y[self.prog.n]
        } else {
            y[self.prog.objective]
        }
    }

    /// Gradient and Hessian of -τ c·y - Σ ln f_k.
    fn derivatives(&self, y: &[f64], f: &[f64], tau: f64) -> (DVector<f64>, DMatrix<f64>) {
        let dim = self.dim;
        let mut g = -self.objective_grad() * tau;
        let mut h = DMatrix::zeros(dim, dim);
        let mut grad_row = vec![0.0; dim];
        let mut touched: Vec<usize> = Vec::with_capacity(dim);
        for (row, &fk) in self.rows().zip(f) {
            touched.clear();
            for &(i, a) in &row.linear {
                if !touched.contains(&i) {
                    touched.push(i);
                }
                grad_row[i] += a;
            }
            let mut second: Vec<(usize, f64)> = Vec::with_capacity(row.terms.len());
            for t in &row.terms {
                let (_, d1, d2) = t.eval(y).expect("domain checked by values()");
                let i = t.idx();
                if !touched.contains(&i) {
                    touched.push(i);
                }
                grad_row[i] += d1;
                second.push((i, d2));
            }
            if self.slack {
                let i = self.prog.n;
                touched.push(i);
                grad_row[i] += 1.0;
            }
            let inv = 1.0 / fk;
            for &i in &touched {
                g[i] -= grad_row[i] * inv;
                for &j in &touched {
                    h[(i, j)] += grad_row[i] * grad_row[j] * inv * inv;
                }
            }
            for (i, d2) in second {
                h[(i, i)] -= d2 * inv;
            }
            for &i in &touched {
                grad_row[i] = 0.0;
            }
        }
        (g, h)
    }

    /// Change of the barrier function between two strictly feasible points,
    /// formed from ratios to avoid cancellation at large τ.
    fn delta_phi(&self, y0: &[f64], f0: &[f64], y1: &[f64], f1: &[f64], tau: f64) -> f64 {
        let dobj = self.objective(y1) - self.objective(y0);
        -tau * dobj - f0.iter().zip(f1).map(|(a, b)| (b / a).ln()).sum::<f64>()
    }
}

fn newton_direction(g: &DVector<f64>, h: &DMatrix<f64>) -> Option<DVector<f64>> {
    let n = g.len();
    let d = DVector::from_iterator(
        n,
        (0..n).map(|i| {
            let hi = h[(i, i)];
            if hi > 0.0 && hi.is_finite() {
                1.0 / hi.sqrt()
            } else {
                1.0
            }
        }),
    );
    let mut hs = h.clone();
    for i in 0..n {
        for j in 0..n {
            hs[(i, j)] *= d[i] * d[j];
        }
    }
    let rhs = -g.component_mul(&d);
    let mut reg = 0.0;
    for _ in 0..12 {
        let mut m = hs.clone();
        for i in 0..n {
            m[(i, i)] += reg;
        }
        if let Some(ch) = m.cholesky() {
            let y = ch.solve(&rhs);
            let dx = y.component_mul(&d);
            if dx.iter().all(|v| v.is_finite()) {
                return Some(dx);
            }
        }
        reg = if reg == 0.0 { 1e-12 } else { reg * 100.0 };
    }
    None
}

enum Centering {
    Converged,
    Stalled,
    Exhausted,
}

/// Newton centering at fixed τ. Returns once the Newton decrement is small,
/// the line search stalls, or the iteration budget is spent.
fn center(
    bar: &Barrier<'_>,
    y: &mut Vec<f64>,
    f: &mut Vec<f64>,
    tau: f64,
    opts: &BarrierOptions,
    steps: &mut usize,
    stop_on_negative_slack: bool,
) -> Centering {
    for _ in 0..opts.max_newton {
        let (g, h) = bar.derivatives(y, f, tau);
        let Some(dx) = newton_direction(&g, &h) else {
            return Centering::Stalled;
        };
        let decrement = -g.dot(&dx);
        if decrement.is_nan() {
            return Centering::Stalled;
        }
        if decrement * 0.5 <= opts.newton_tol {
            return Centering::Converged;
        }
        let slope = g.dot(&dx);
        let mut alpha = 1.0;
        let mut accepted = None;
        while alpha > 1e-20 {
            let trial: Vec<f64> = y.iter().zip(dx.iter()).map(|(a, b)| a + alpha * b).collect();
            if let Some(ft) = bar.values(&trial) {
                if bar.delta_phi(y, f, &trial, &ft, tau) <= 0.01 * alpha * slope {
                    accepted = Some((trial, ft));
                    break;
                }
            }
            alpha *= 0.5;
        }
        *steps += 1;
        let Some((trial, ft)) = accepted else {
            return Centering::Stalled;
        };
        *y = trial;
        *f = ft;
        if stop_on_negative_slack && y[bar.prog.n] < 0.0 {
            return Centering::Converged;
        }
    }
    Centering::Exhausted
}

/// Phase I: returns a strictly feasible point or reports infeasibility.
fn phase_one(
    prog: &ConvexProgram,
    x0: &[f64],
    opts: &BarrierOptions,
    steps: &mut usize,
) -> Result<Option<Vec<f64>>> {
    // Bound the maximised variable from below so the slack problem is bounded.
    let k = prog.objective;
    let margin = x0[k].abs().max(1.0);
    let floor = Row::new("phase1_objective_floor", -(x0[k] - margin)).lin(k, 1.0);
    let bar = Barrier { prog, extra: vec![floor], slack: true, dim: prog.n + 1 };

    let mut rows = Vec::with_capacity(bar.m());
    for r in bar.rows() {
        match r.value(x0) {
            Some(v) => rows.push(v),
            None => return Err(Error::Solver("phase-I start outside the domain of a concave term".into())),
        }
    }
    let worst = rows.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let mut y = x0.to_vec();
    y.push((-worst).max(0.0) + 1.0);
    let mut f = bar.values(&y).expect("slack start is strictly feasible");

    let mut tau = opts.tau0;
    for _ in 0..opts.max_outer {
        let outcome = center(&bar, &mut y, &mut f, tau, opts, steps, true);
        if y[prog.n] < 0.0 {
            y.truncate(prog.n);
            return Ok(Some(y));
        }
        let gap = bar.m() as f64 / tau;
        if matches!(outcome, Centering::Stalled) || gap <= 1e-14 {
            break;
        }
        tau *= opts.mu;
    }
    Ok(None)
}

/// Maximises `x[prog.objective]`. `x0` must lie in the domain of every
/// concave term; it need not be feasible.
pub fn solve(prog: &ConvexProgram, x0: &[f64], opts: &BarrierOptions) -> Result<BarrierSolution> {
    if x0.len() != prog.n {
        return Err(Error::Dimension(format!("start has {} entries, program has {}", x0.len(), prog.n)));
    }
    let mut steps = 0;
    let start = match prog.row_values(x0) {
        Some(v) if v.iter().all(|&r| r > 0.0) => x0.to_vec(),
        _ => match phase_one(prog, x0, opts, &mut steps)? {
            Some(y) => y,
            None => {
                return Ok(BarrierSolution {
                    x: x0.to_vec(),
                    objective: x0[prog.objective],
                    status: SolveStatus::Infeasible,
                    newton_steps: steps,
                })
            }
        },
    };

    let bar = Barrier { prog, extra: Vec::new(), slack: false, dim: prog.n };
    let mut y = start;
    let mut f = bar.values(&y).expect("phase I returns a strictly feasible point");
    let m = bar.m() as f64;
    let mut tau = opts.tau0;
    let mut status = SolveStatus::MaxIter;
    for _ in 0..opts.max_outer {
        let outcome = center(&bar, &mut y, &mut f, tau, opts, &mut steps, false);
        let gap = m / tau;
        let target = opts.gap_rel * y[prog.objective].abs() + opts.gap_abs;
        match outcome {
            Centering::Stalled => {
                status = if gap <= target { SolveStatus::Optimal } else { SolveStatus::Inaccurate };
                break;
            }
            Centering::Converged | Centering::Exhausted if gap <= target => {
                status = SolveStatus::Optimal;
                break;
            }
            _ => {}
        }
        tau *= opts.mu;
    }
    Ok(BarrierSolution { objective: y[prog.objective], x: y, status, newton_steps: steps })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn box_program() -> ConvexProgram {
        // max x0 s.t. x0 ≤ 1 - x1, x1 ≥ 0.25, x0 ≥ -5
        ConvexProgram {
            n: 2,
            objective: 0,
            rows: vec![
                Row::new("a", 1.0).lin(0, -1.0).lin(1, -1.0),
                Row::new("b", -0.25).lin(1, 1.0),
                Row::new("c", 5.0).lin(0, 1.0),
            ],
        }
    }

    #[test]
    fn linear_program() {
        let sol = solve(&box_program(), &[0.0, 0.5], &BarrierOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - 0.75).abs() < 1e-8, "{}", sol.objective);
    }

    #[test]
    fn phase_one_from_infeasible_start() {
        let sol = solve(&box_program(), &[3.0, -2.0], &BarrierOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - 0.75).abs() < 1e-8);
    }

    #[test]
    fn detects_infeasibility() {
        let mut p = box_program();
        p.rows.push(Row::new("d", -2.0).lin(1, 1.0).lin(0, 0.0));
        p.rows.push(Row::new("e", 1.0).lin(1, -1.0));
        let sol = solve(&p, &[0.0, 0.5], &BarrierOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }

    #[test]
    fn concave_terms() {
        // max g s.t. g ≤ 2·sqrt(x) - x (peak 1 at x = 1), g ≤ ln(x + 1) + 5, 0 < x ≤ 4
        let p = ConvexProgram {
            n: 2,
            objective: 1,
            rows: vec![
                Row::new("sq", 0.0).term(Term::Sqrt { idx: 0, weight: 2.0 }).lin(0, -1.0).lin(1, -1.0),
                Row::new("ln", 5.0).term(Term::Ln { idx: 0, weight: 1.0, a: 1.0, b: 1.0 }).lin(1, -1.0),
                Row::new("lo", 0.0).lin(0, 1.0),
                Row::new("hi", 4.0).lin(0, -1.0),
            ],
        };
        let sol = solve(&p, &[0.5, -1.0], &BarrierOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-8);
        assert!((sol.x[0] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn deterministic() {
        let a = solve(&box_program(), &[3.0, -2.0], &BarrierOptions::default()).unwrap();
        let b = solve(&box_program(), &[3.0, -2.0], &BarrierOptions::default()).unwrap();
        assert_eq!(a, b);
    }
}

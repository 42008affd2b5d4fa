//! Assembly of the transition-indexed matrix-inequality system over the
//! unknown forms {P_q} and a self-contained ellipsoid-method feasibility
//! solver with eigenvalue cuts.
//!
//! A failed search is reported as `NotFound`, never "infeasible": it only
//! refutes feasibility for the given rates, margin, norm bound and
//! iteration budget.

use std::collections::BTreeMap;

use crate::automata::Transition;
use crate::cones::lmi_residual;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, SymmetricForm};
use crate::rates::RateAssignment;
use crate::system::SwitchingSystem;

pub const DEFAULT_EPSILON: f64 = 0.01;
pub const DEFAULT_RADIUS: f64 = 1e4;
pub const DEFAULT_MAX_ITERS: usize = 200_000;

/// One spectral constraint per automaton transition.
#[derive(Debug, Clone)]
pub struct TransitionConstraint {
    pub transition: Transition,
    pub matrix: Matrix,
    pub gamma: f64,
}

/// The assembled feasibility problem. Variables are the stacked lower
/// triangles of all P_q, states in lexicographic order.
#[derive(Debug, Clone)]
pub struct LmiProblem {
    dim: usize,
    degree: usize,
    states: Vec<String>,
    constraints: Vec<TransitionConstraint>,
    epsilon: f64,
    radius: f64,
}

impl LmiProblem {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn constraints(&self) -> &[TransitionConstraint] {
        &self.constraints
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Number of scalar unknowns: |Q| * n(n+1)/2.
    pub fn num_vars(&self) -> usize {
        self.states.len() * tri(self.dim)
    }

    fn state_offset(&self, q: &str) -> usize {
        let idx = self.states.iter().position(|s| s == q).unwrap();
        idx * tri(self.dim)
    }

    fn unpack(&self, x: &[f64]) -> BTreeMap<String, SymmetricForm> {
        self.states
            .iter()
            .map(|q| {
                let base = self.state_offset(q);
                (q.clone(), unpack_form(self.dim, &x[base..base + tri(self.dim)]))
            })
            .collect()
    }

    fn pack_into(&self, q: &str, p: &SymmetricForm, x: &mut [f64]) {
        let base = self.state_offset(q);
        let mut k = 0;
        for i in 0..self.dim {
            for j in 0..=i {
                x[base + k] = p.get(i, j);
                k += 1;
            }
        }
    }
}

fn tri(n: usize) -> usize {
    n * (n + 1) / 2
}

fn unpack_form(n: usize, vars: &[f64]) -> SymmetricForm {
    let mut entries = vec![0.0; n * n];
    let mut k = 0;
    for i in 0..n {
        for j in 0..=i {
            entries[i * n + j] = vars[k];
            entries[j * n + i] = vars[k];
            k += 1;
        }
    }
    SymmetricForm::from_entries(n, entries).expect("packed form is symmetric by construction")
}

/// Accumulate the packed gradient of v' W v with respect to the lower
/// triangle of the symmetric unknown, where W = w w' (off-diagonal entries
/// appear twice in the form).
fn add_outer_gradient(n: usize, w: &[f64], factor: f64, grad: &mut [f64]) {
    let mut k = 0;
    for i in 0..n {
        for j in 0..=i {
            let c = if i == j { 1.0 } else { 2.0 };
            grad[k] += factor * c * w[i] * w[j];
            k += 1;
        }
    }
}

/// Build the constraint system for the given rates and margin.
pub fn assemble(
    system: &SwitchingSystem,
    degree: usize,
    rates: &RateAssignment,
    epsilon: f64,
    radius: f64,
) -> Result<LmiProblem> {
    if epsilon <= 0.0 || !epsilon.is_finite() {
        return Err(Error::InvalidInput(format!("margin must be positive, got {epsilon}")));
    }
    if radius <= 0.0 || !radius.is_finite() {
        return Err(Error::InvalidInput(format!("norm bound must be positive, got {radius}")));
    }
    if degree == 0 || degree >= system.dim() {
        return Err(Error::InvalidInput(format!(
            "dominance degree must be in 1..={}, got {degree}",
            system.dim() - 1
        )));
    }
    rates.covers(system)?;
    let constraints = system
        .automaton()
        .transitions()
        .iter()
        .map(|t| {
            Ok(TransitionConstraint {
                transition: t.clone(),
                matrix: system.mode(t.label)?.clone(),
                gamma: rates.get(t)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LmiProblem {
        dim: system.dim(),
        degree,
        states: system.automaton().states().to_vec(),
        constraints,
        epsilon,
        radius,
    })
}

/// Outcome of the ellipsoid search.
#[derive(Debug, Clone)]
pub enum FeasibilityOutcome {
    Feasible {
        forms: BTreeMap<String, SymmetricForm>,
        /// Smallest margin -lambda_max over all transition constraints,
        /// re-verified independently of the search path.
        margin: f64,
        iterations: usize,
    },
    NotFound {
        iterations: usize,
        /// ln of the final-to-initial ellipsoid volume ratio.
        ln_volume_ratio: f64,
        most_violated: String,
    },
}

impl FeasibilityOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityOutcome::Feasible { .. })
    }
}

struct Evaluation {
    worst: f64,
    worst_index: usize,
    gradient: Vec<f64>,
    description: String,
}

fn evaluate(problem: &LmiProblem, x: &[f64]) -> Result<Evaluation> {
    let n = problem.dim;
    let forms = problem.unpack(x);
    let mut worst = f64::NEG_INFINITY;
    let mut worst_index = 0;
    let mut gradient = vec![0.0; problem.num_vars()];
    let mut description = String::new();
    for (idx, c) in problem.constraints.iter().enumerate() {
        let p_from = &forms[&c.transition.from];
        let p_to = &forms[&c.transition.to];
        let res = lmi_residual(&c.matrix, p_from, p_to, c.gamma)?;
        let g = res.max_eigenvalue + problem.epsilon;
        if g > worst {
            worst = g;
            worst_index = idx;
            let v = &res.top_eigenvector;
            let av = c.matrix.mul_vec(v);
            gradient.iter_mut().for_each(|e| *e = 0.0);
            let to_base = problem.state_offset(&c.transition.to);
            add_outer_gradient(n, &av, 1.0, &mut gradient[to_base..to_base + tri(n)]);
            let from_base = problem.state_offset(&c.transition.from);
            add_outer_gradient(
                n,
                v,
                -c.gamma * c.gamma,
                &mut gradient[from_base..from_base + tri(n)],
            );
            description = format!("transition {}", c.transition);
        }
    }
    // Norm-ball constraints keep the search bounded.
    for (qi, q) in problem.states.iter().enumerate() {
        let p = &forms[q];
        let f = p.frobenius();
        let g = f - problem.radius;
        if g > worst {
            worst = g;
            worst_index = problem.constraints.len() + qi;
            gradient.iter_mut().for_each(|e| *e = 0.0);
            let base = problem.state_offset(q);
            let mut k = 0;
            let scale = 1.0 / f.max(1e-300);
            for i in 0..n {
                for j in 0..=i {
                    let c = if i == j { 1.0 } else { 2.0 };
                    gradient[base + k] = c * p.get(i, j) * scale;
                    k += 1;
                }
            }
            description = format!("norm bound at state {q}");
        }
    }
    if !worst.is_finite() {
        return Err(Error::Numerical("non-finite constraint value".into()));
    }
    Ok(Evaluation { worst, worst_index, gradient, description })
}

/// Ellipsoid method over the bounded variable ball. Returns a feasible,
/// independently re-verified point, or `NotFound` when the ellipsoid volume
/// falls below the analytic threshold or the iteration budget runs out.
///
/// Deterministic; `_seed` is accepted for interface stability but the
/// search itself uses no randomness.
pub fn solve(problem: &LmiProblem, max_iters: usize, _seed: u64) -> Result<FeasibilityOutcome> {
    let m = problem.num_vars();
    if m < 2 {
        return Err(Error::InvalidInput("problem has fewer than two unknowns".into()));
    }
    let mf = m as f64;
    let mut center = vec![0.0; m];
    warm_start(problem, &mut center);
    let r0 = 2.0 * problem.radius * (problem.states.len() as f64).sqrt();
    let mut shape = vec![0.0; m * m];
    for i in 0..m {
        shape[i * m + i] = r0 * r0;
    }
    // Stop once the ellipsoid could no longer contain a ball of radius
    // 1e-10 * r0: ln volume ratio below m * ln(1e-10).
    let ln_volume_floor = mf * (1e-10f64).ln();
    let mut ln_volume = 0.0;
    let mut last_violation = String::new();

    for iter in 0..max_iters {
        let eval = evaluate(problem, &center)?;
        if eval.worst <= 0.0 {
            // Candidate found: re-verify from scratch before reporting.
            let forms = problem.unpack(&center);
            let margin = verify_margin(problem, &forms)?;
            if margin >= problem.epsilon {
                return Ok(FeasibilityOutcome::Feasible { forms, margin, iterations: iter });
            }
            return Err(Error::Numerical(format!(
                "solver candidate failed independent re-verification (margin {margin:.3e})"
            )));
        }
        last_violation = eval.description;
        let _ = eval.worst_index;

        let a = eval.gradient;
        let an = linalg::norm(&a);
        if an < 1e-300 {
            return Err(Error::Numerical("vanishing subgradient".into()));
        }
        let a: Vec<f64> = a.iter().map(|c| c / an).collect();
        let mut b = vec![0.0; m];
        for i in 0..m {
            for j in 0..m {
                b[i] += shape[i * m + j] * a[j];
            }
        }
        let gamma = linalg::dot(&a, &b).max(0.0).sqrt();
        if gamma < 1e-280 {
            return Ok(FeasibilityOutcome::NotFound {
                iterations: iter,
                ln_volume_ratio: ln_volume,
                most_violated: last_violation,
            });
        }
        let d: Vec<f64> = b.iter().map(|c| c / gamma).collect();
        for i in 0..m {
            center[i] -= d[i] / (mf + 1.0);
            if !center[i].is_finite() {
                return Err(Error::Numerical("non-finite ellipsoid center".into()));
            }
        }
        let scale = mf * mf / (mf * mf - 1.0);
        for i in 0..m {
            for j in 0..m {
                shape[i * m + j] = scale * (shape[i * m + j] - 2.0 / (mf + 1.0) * d[i] * d[j]);
            }
        }
        for i in 0..m {
            for j in (i + 1)..m {
                let avg = 0.5 * (shape[i * m + j] + shape[j * m + i]);
                shape[i * m + j] = avg;
                shape[j * m + i] = avg;
            }
        }
        // central-cut volume shrink factor
        ln_volume += -1.0 / (2.0 * (mf + 1.0));
        if ln_volume < ln_volume_floor {
            return Ok(FeasibilityOutcome::NotFound {
                iterations: iter + 1,
                ln_volume_ratio: ln_volume,
                most_violated: last_violation,
            });
        }
    }
    Ok(FeasibilityOutcome::NotFound {
        iterations: max_iters,
        ln_volume_ratio: ln_volume,
        most_violated: last_violation,
    })
}

/// Smallest -lambda_max over all transition constraints, computed fresh.
pub fn verify_margin(
    problem: &LmiProblem,
    forms: &BTreeMap<String, SymmetricForm>,
) -> Result<f64> {
    let mut margin = f64::INFINITY;
    for c in &problem.constraints {
        let res = lmi_residual(&c.matrix, &forms[&c.transition.from], &forms[&c.transition.to], c.gamma)?;
        margin = margin.min(-res.max_eigenvalue);
    }
    Ok(margin)
}

/// Stein-based warm start: for each state with a self-loop, seed P_q from
/// the scaled self-loop mode when the Stein equation is solvable.
fn warm_start(problem: &LmiProblem, center: &mut [f64]) {
    for q in &problem.states {
        let self_loop = problem
            .constraints
            .iter()
            .find(|c| c.transition.from == *q && c.transition.to == *q);
        if let Some(c) = self_loop {
            let scaled = c.matrix.scale(1.0 / c.gamma);
            if let Ok(p) = linalg::stein_solve(&scaled) {
                problem.pack_into(q, &p, center);
            }
        }
    }
}

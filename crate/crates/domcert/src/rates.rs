//! Dominance-rate selection from automaton-cycle spectra.
//!
//! For every elementary cycle, the product of mode matrices along the cycle
//! constrains the product of rates on its edges: the scaled cycle product
//! must have exactly p eigenvalues outside the unit circle, which pins the
//! rate product to the open interval between the (p+1)-th and p-th
//! eigenvalue magnitudes. Feasible per-edge rates are found as the Chebyshev
//! center of the induced log-space linear system.

use std::collections::{BTreeMap, BTreeSet};

use crate::automata::{enumerate_cycles, Cycle, Transition, DEFAULT_CYCLE_BUDGET};
use crate::error::{Error, Result};
use crate::linalg::{self, CircleSplit, Matrix};
use crate::system::SwitchingSystem;

/// Relative slack enforced on strict interval membership.
pub const INTERVAL_SLACK: f64 = 1e-9;

/// Spectrum of the ordered mode product along one elementary cycle.
#[derive(Debug, Clone)]
pub struct CycleSpectrum {
    pub cycle: Cycle,
    /// Product of mode matrices, later transitions multiplying on the left.
    pub product: Matrix,
    /// Eigenvalue magnitudes of the product, descending.
    pub magnitudes: Vec<f64>,
}

impl CycleSpectrum {
    /// Open interval (|lambda_{p+1}|, |lambda_p|) that the cycle's rate
    /// product must fall in for dominance degree p. Empty iff the bounds
    /// coincide.
    pub fn gap_interval(&self, p: usize) -> Result<(f64, f64)> {
        let n = self.magnitudes.len();
        if p == 0 || p >= n {
            return Err(Error::InvalidInput(format!(
                "dominance degree must be in 1..={}, got {p}",
                n - 1
            )));
        }
        Ok((self.magnitudes[p], self.magnitudes[p - 1]))
    }
}

/// Per-transition rates gamma_d > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct RateAssignment {
    rates: BTreeMap<Transition, f64>,
}

impl RateAssignment {
    pub fn new(rates: BTreeMap<Transition, f64>) -> Result<Self> {
        for (t, g) in &rates {
            if !g.is_finite() || *g <= 0.0 {
                return Err(Error::InvalidRate(format!("rate for {t} must be positive, got {g}")));
            }
        }
        Ok(RateAssignment { rates })
    }

    pub fn uniform(system: &SwitchingSystem, gamma: f64) -> Result<Self> {
        let rates = system
            .automaton()
            .transitions()
            .iter()
            .map(|t| (t.clone(), gamma))
            .collect();
        RateAssignment::new(rates)
    }

    pub fn get(&self, t: &Transition) -> Result<f64> {
        self.rates
            .get(t)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("missing rate for transition {t}")))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Transition, f64)> {
        self.rates.iter().map(|(t, g)| (t, *g))
    }

    /// Check every automaton transition carries a rate.
    pub fn covers(&self, system: &SwitchingSystem) -> Result<()> {
        for t in system.automaton().transitions() {
            self.get(t)?;
        }
        Ok(())
    }
}

/// One CycleSpectrum per elementary cycle of the (trimmed) automaton.
pub fn cycle_spectra(system: &SwitchingSystem) -> Result<Vec<CycleSpectrum>> {
    let cycles = enumerate_cycles(system.automaton(), DEFAULT_CYCLE_BUDGET)?;
    cycles
        .into_iter()
        .map(|cycle| {
            let mut product = Matrix::identity(system.dim());
            for t in cycle.transitions() {
                product = system.mode(t.label)?.matmul(&product);
            }
            let magnitudes = linalg::spectrum_magnitudes(&product)?;
            Ok(CycleSpectrum { cycle, product, magnitudes })
        })
        .collect()
}

/// Validation outcome for one cycle.
#[derive(Debug, Clone)]
pub struct CycleCheck {
    pub cycle: Cycle,
    pub rate_product: f64,
    pub interval: (f64, f64),
    pub in_interval: bool,
    /// Unit-circle split of the cycle product scaled by the rate product.
    pub scaled_split: CircleSplit,
    pub split_ok: bool,
}

impl CycleCheck {
    pub fn ok(&self) -> bool {
        self.in_interval && self.split_ok
    }
}

fn strictly_inside(x: f64, (lo, hi): (f64, f64)) -> bool {
    x > lo + INTERVAL_SLACK * (1.0 + lo) && x < hi - INTERVAL_SLACK * (1.0 + hi)
}

/// Check a rate assignment against every elementary cycle: the rate product
/// must lie strictly inside the gap interval, and the scaled cycle product
/// must have exactly p eigenvalues outside the unit circle.
pub fn validate_rates(
    system: &SwitchingSystem,
    p: usize,
    rates: &RateAssignment,
) -> Result<Vec<CycleCheck>> {
    rates.covers(system)?;
    let mut checks = Vec::new();
    for spectrum in cycle_spectra(system)? {
        let interval = spectrum.gap_interval(p)?;
        let mut rate_product = 1.0;
        for t in spectrum.cycle.transitions() {
            rate_product *= rates.get(t)?;
        }
        let scaled = spectrum.product.scale(1.0 / rate_product);
        let scaled_split = linalg::circle_split(&scaled, linalg::CIRCLE_TOL)?;
        let n = system.dim();
        let split_ok = scaled_split == CircleSplit { outside: p, on: 0, inside: n - p };
        checks.push(CycleCheck {
            in_interval: strictly_inside(rate_product, interval),
            cycle: spectrum.cycle,
            rate_product,
            interval,
            scaled_split,
            split_ok,
        });
    }
    Ok(checks)
}

/// Result of rate proposal.
#[derive(Debug, Clone)]
pub enum RateProposal {
    Feasible(RateAssignment),
    /// No rates can satisfy the cycle constraints; the listed cycles bind.
    Infeasible { binding: Vec<Cycle>, reason: String },
}

/// Propose per-transition rates by solving the log-space feasibility
/// problem: variables g_d = ln gamma_d, one two-sided constraint per cycle
/// on the edge sum. Returns the Chebyshev center (maximum minimum slack).
/// Transitions on no cycle are unconstrained and default to rate 1.
pub fn propose_rates(system: &SwitchingSystem, p: usize) -> Result<RateProposal> {
    let offenders = system.automaton().non_core_states();
    if !offenders.is_empty() {
        return Err(Error::Structure(offenders));
    }
    let spectra = cycle_spectra(system)?;
    if spectra.is_empty() {
        return Err(Error::EmptyLanguage);
    }

    let mut empty_gaps = Vec::new();
    let mut intervals = Vec::new();
    for s in &spectra {
        let (lo, hi) = s.gap_interval(p)?;
        if hi <= 0.0 || !(lo + INTERVAL_SLACK * (1.0 + lo) < hi - INTERVAL_SLACK * (1.0 + hi)) {
            empty_gaps.push(s.cycle.clone());
        }
        intervals.push((lo, hi));
    }
    if !empty_gaps.is_empty() {
        return Ok(RateProposal::Infeasible {
            binding: empty_gaps,
            reason: format!(
                "empty rate gap: |lambda_{p}| and |lambda_{}| coincide on these cycles",
                p + 1
            ),
        });
    }

    // Variables: transitions appearing on at least one cycle.
    let on_cycles: BTreeSet<Transition> = spectra
        .iter()
        .flat_map(|s| s.cycle.transitions().iter().cloned())
        .collect();
    let vars: Vec<Transition> = on_cycles.into_iter().collect();
    let index: BTreeMap<&Transition, usize> = vars.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let k = vars.len();

    // Constraint rows a.g <= b; each cycle contributes an upper and (when
    // the lower magnitude is nonzero) a lower row.
    struct Row {
        coeffs: Vec<f64>,
        bound: f64,
        norm: f64,
        cycle: Option<usize>,
    }
    let mut rows: Vec<Row> = Vec::new();
    let mut bound_scale: f64 = 1.0;
    for (ci, (s, (lo, hi))) in spectra.iter().zip(&intervals).enumerate() {
        let mut coeffs = vec![0.0; k];
        for t in s.cycle.transitions() {
            coeffs[index[t]] += 1.0;
        }
        let norm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
        let hi_log = hi.ln();
        bound_scale = bound_scale.max(hi_log.abs());
        rows.push(Row { coeffs: coeffs.clone(), bound: hi_log, norm, cycle: Some(ci) });
        if *lo > 0.0 {
            let lo_log = lo.ln();
            bound_scale = bound_scale.max(lo_log.abs());
            rows.push(Row {
                coeffs: coeffs.iter().map(|c| -c).collect(),
                bound: -lo_log,
                norm,
                cycle: Some(ci),
            });
        }
    }
    let box_bound = bound_scale + 10.0;
    for i in 0..k {
        for sign in [1.0, -1.0] {
            let mut coeffs = vec![0.0; k];
            coeffs[i] = sign;
            rows.push(Row { coeffs, bound: box_bound, norm: 1.0, cycle: None });
        }
    }

    // Normalized worst violation; its minimizer is the Chebyshev center.
    let violation = |g: &[f64]| -> (f64, usize) {
        let mut worst = f64::NEG_INFINITY;
        let mut arg = 0;
        for (i, row) in rows.iter().enumerate() {
            let v = (linalg::dot(&row.coeffs, g) - row.bound) / row.norm;
            if v > worst {
                worst = v;
                arg = i;
            }
        }
        (worst, arg)
    };

    let g_best = if k == 1 {
        // One variable: intersect the intervals directly.
        let mut lo = -box_bound;
        let mut hi = box_bound;
        for row in &rows {
            let c = row.coeffs[0];
            if c > 0.0 {
                hi = hi.min(row.bound / c);
            } else if c < 0.0 {
                lo = lo.max(row.bound / c);
            }
        }
        vec![0.5 * (lo + hi)]
    } else {
        let plain: Vec<(Vec<f64>, f64, f64)> =
            rows.iter().map(|r| (r.coeffs.clone(), r.bound, r.norm)).collect();
        ellipsoid_min(k, box_bound, &plain)
    };

    let (worst, _) = violation(&g_best);
    if worst >= -1e-7 {
        let binding: Vec<Cycle> = rows
            .iter()
            .filter(|row| {
                row.cycle.is_some()
                    && (linalg::dot(&row.coeffs, &g_best) - row.bound) / row.norm >= worst - 1e-9
            })
            .filter_map(|row| row.cycle)
            .map(|ci| spectra[ci].cycle.clone())
            .collect();
        return Ok(RateProposal::Infeasible {
            binding,
            reason: "cycle rate constraints are inconsistent".into(),
        });
    }

    let mut rates: BTreeMap<Transition, f64> = system
        .automaton()
        .transitions()
        .iter()
        .map(|t| (t.clone(), 1.0))
        .collect();
    for (t, g) in vars.iter().zip(&g_best) {
        rates.insert(t.clone(), g.exp());
    }
    Ok(RateProposal::Feasible(RateAssignment::new(rates)?))
}

/// Central-cut ellipsoid method minimizing the normalized worst violation
/// of a linear system `a.g <= b`; the minimizer is the Chebyshev center.
/// Rows are `(coeffs, bound, norm)`. Deterministic.
fn ellipsoid_min(k: usize, radius: f64, rows: &[(Vec<f64>, f64, f64)]) -> Vec<f64> {
    debug_assert!(k >= 2);
    let eval = |g: &[f64]| -> (f64, usize) {
        let mut worst = f64::NEG_INFINITY;
        let mut arg = 0;
        for (i, (coeffs, bound, norm)) in rows.iter().enumerate() {
            let v = (linalg::dot(coeffs, g) - bound) / norm;
            if v > worst {
                worst = v;
                arg = i;
            }
        }
        (worst, arg)
    };
    let mut center = vec![0.0; k];
    let mut shape = vec![0.0; k * k];
    let r0 = radius * (k as f64).sqrt() + 1.0;
    for i in 0..k {
        shape[i * k + i] = r0 * r0;
    }
    let mut best = center.clone();
    let mut best_val = eval(&center).0;
    let iters = 600 * k * k + 4000;
    for _ in 0..iters {
        let (val, active) = eval(&center);
        if val < best_val {
            best_val = val;
            best = center.clone();
        }
        // exact subgradient: the active row's unit normal
        let (coeffs, _, norm) = &rows[active];
        let a: Vec<f64> = coeffs.iter().map(|c| c / norm).collect();
        // b = B a; gamma = sqrt(a' B a)
        let mut b = vec![0.0; k];
        for i in 0..k {
            for j in 0..k {
                b[i] += shape[i * k + j] * a[j];
            }
        }
        let gamma = linalg::dot(&a, &b).max(0.0).sqrt();
        if gamma < 1e-12 {
            break;
        }
        let d: Vec<f64> = b.iter().map(|c| c / gamma).collect();
        let kf = k as f64;
        for i in 0..k {
            center[i] -= d[i] / (kf + 1.0);
        }
        let scale = kf * kf / (kf * kf - 1.0);
        for i in 0..k {
            for j in 0..k {
                shape[i * k + j] = scale * (shape[i * k + j] - 2.0 / (kf + 1.0) * d[i] * d[j]);
            }
        }
        // keep the shape matrix symmetric against drift
        for i in 0..k {
            for j in (i + 1)..k {
                let avg = 0.5 * (shape[i * k + j] + shape[j * k + i]);
                shape[i * k + j] = avg;
                shape[j * k + i] = avg;
            }
        }
    }
    if eval(&center).0 < best_val {
        best = center;
    }
    best
}

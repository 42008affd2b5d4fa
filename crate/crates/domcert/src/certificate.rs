//! Self-contained, re-checkable dominance certificates.
//!
//! A certificate stores the forms {P_q}, the per-transition rates, the
//! margin and the degree, bound to a fingerprint of the canonical system
//! description so it cannot be validated against a silently edited system.
//! Validation recomputes every check from scratch.

use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::automata::Transition;
use crate::cones::lmi_residual;
use crate::error::{Error, Result};
use crate::feasibility::FeasibilityOutcome;
use crate::linalg::{inertia, Inertia, SymmetricForm};
use crate::rates::RateAssignment;
use crate::system::{format_f64, parse_scalar_str, SwitchingSystem};

pub const FORMAT_VERSION: u32 = 1;

/// Slack for the residual margin check, sized so a solver outcome achieving
/// exactly the requested margin still validates.
const MARGIN_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    pub iterations: usize,
    pub timestamp: String,
}

/// A dominance certificate: everything needed to re-check the claim.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub version: u32,
    pub system_fingerprint: String,
    pub p: usize,
    pub epsilon: f64,
    pub rates: RateAssignment,
    pub forms: BTreeMap<String, SymmetricForm>,
    pub meta: Meta,
}

/// Wire form: field order fixed, matrices as 17-significant-digit decimal
/// strings (exact double round-trip), unknown fields rejected.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireCertificate {
    version: u32,
    system_fingerprint: String,
    p: usize,
    epsilon: f64,
    rates: Vec<WireRate>,
    #[serde(rename = "P")]
    forms: BTreeMap<String, Vec<String>>,
    meta: Meta,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireRate {
    from: String,
    label: usize,
    to: String,
    gamma: f64,
}

impl Certificate {
    /// Wrap a feasible solver outcome, binding it to the system.
    pub fn from_outcome(
        system: &SwitchingSystem,
        p: usize,
        epsilon: f64,
        rates: &RateAssignment,
        outcome: &FeasibilityOutcome,
    ) -> Result<Certificate> {
        match outcome {
            FeasibilityOutcome::Feasible { forms, iterations, .. } => Ok(Certificate {
                version: FORMAT_VERSION,
                system_fingerprint: system.fingerprint(),
                p,
                epsilon,
                rates: rates.clone(),
                forms: forms.clone(),
                meta: Meta { iterations: *iterations, timestamp: unix_timestamp() },
            }),
            FeasibilityOutcome::NotFound { .. } => {
                Err(Error::InvalidInput("cannot certify a not-found outcome".into()))
            }
        }
    }

    pub fn serialize(&self) -> Result<String> {
        if self.epsilon <= 0.0 {
            return Err(Error::InvalidInput("certificate margin must be positive".into()));
        }
        let wire = WireCertificate {
            version: self.version,
            system_fingerprint: self.system_fingerprint.clone(),
            p: self.p,
            epsilon: self.epsilon,
            rates: self
                .rates
                .iter()
                .map(|(t, gamma)| WireRate {
                    from: t.from.clone(),
                    label: t.label,
                    to: t.to.clone(),
                    gamma,
                })
                .collect(),
            forms: self
                .forms
                .iter()
                .map(|(q, p)| {
                    let n = p.dim();
                    let mut entries = Vec::with_capacity(n * n);
                    for i in 0..n {
                        for j in 0..n {
                            entries.push(format_f64(p.get(i, j)));
                        }
                    }
                    (q.clone(), entries)
                })
                .collect(),
            meta: self.meta.clone(),
        };
        serde_json::to_string_pretty(&wire).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn deserialize(text: &str) -> Result<Certificate> {
        let wire: WireCertificate =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if wire.epsilon <= 0.0 || !wire.epsilon.is_finite() {
            return Err(Error::Parse(format!(
                "epsilon must be positive, got {}",
                wire.epsilon
            )));
        }
        let mut rates = BTreeMap::new();
        for r in &wire.rates {
            let t = Transition::new(&r.from, r.label, &r.to);
            if rates.insert(t.clone(), r.gamma).is_some() {
                return Err(Error::Parse(format!("duplicate rate for transition {t}")));
            }
        }
        let mut forms = BTreeMap::new();
        for (q, entries) in &wire.forms {
            let n = integer_sqrt(entries.len()).ok_or_else(|| {
                Error::Parse(format!(
                    "matrix at state {q} has {} entries, not a perfect square",
                    entries.len()
                ))
            })?;
            let values = entries
                .iter()
                .map(|s| parse_scalar_str(s))
                .collect::<Result<Vec<f64>>>()
                .map_err(|e| Error::Parse(format!("matrix at state {q}: {e}")))?;
            forms.insert(q.clone(), SymmetricForm::from_entries(n, values)?);
        }
        Ok(Certificate {
            version: wire.version,
            system_fingerprint: wire.system_fingerprint,
            p: wire.p,
            epsilon: wire.epsilon,
            rates: RateAssignment::new(rates)?,
            forms,
            meta: wire.meta,
        })
    }

    pub fn from_path(path: &std::path::Path) -> Result<Certificate> {
        Certificate::deserialize(&std::fs::read_to_string(path)?)
    }
}

fn integer_sqrt(len: usize) -> Option<usize> {
    let n = (len as f64).sqrt().round() as usize;
    (n * n == len).then_some(n)
}

fn unix_timestamp() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("unix:{secs}")
}

/// Per-transition outcome of a validation run.
#[derive(Debug, Clone)]
pub struct TransitionCheck {
    pub transition: Transition,
    pub gamma: f64,
    pub max_eigenvalue: f64,
    pub margin_ok: bool,
    pub rate_ok: bool,
    /// negative-index ordering nu(P_from) <= nu(P_to)
    pub ordering_ok: bool,
}

#[derive(Debug, Clone)]
pub struct StateCheck {
    pub state: String,
    pub inertia: Inertia,
    pub inertia_ok: bool,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub transitions: Vec<TransitionCheck>,
    pub states: Vec<StateCheck>,
    pub failures: Vec<String>,
    pub valid: bool,
}

/// Re-check a certificate against a system from first principles.
///
/// Checks, in order: fingerprint binding, coverage of states and
/// transitions, per-transition residual margin, per-state inertia
/// (p, 0, n-p) at zero tolerance 1e-7 * (1 + ||P_q||_F), negative-index
/// ordering along transitions, and rate positivity. The verdict is the
/// conjunction of all checks.
pub fn validate(system: &SwitchingSystem, cert: &Certificate) -> Result<ValidationReport> {
    let fingerprint = system.fingerprint();
    if cert.system_fingerprint != fingerprint {
        return Err(Error::StaleCertificate {
            cert: cert.system_fingerprint.clone(),
            system: fingerprint,
        });
    }
    let n = system.dim();
    if cert.p == 0 || cert.p >= n {
        return Err(Error::InvalidInput(format!(
            "certificate degree {} out of range 1..={}",
            cert.p,
            n - 1
        )));
    }
    let mut failures = Vec::new();

    let mut inertias = BTreeMap::new();
    let mut states = Vec::new();
    for q in system.automaton().states() {
        let form = cert.forms.get(q).ok_or_else(|| {
            Error::InvalidInput(format!("certificate has no form for state {q}"))
        })?;
        if form.dim() != n {
            return Err(Error::InvalidInput(format!(
                "form at state {q} has dimension {}, system has {n}",
                form.dim()
            )));
        }
        let zero_tol = 1e-7 * (1.0 + form.frobenius());
        let i = inertia(form, zero_tol)?;
        let ok = i.neg == cert.p && i.zero == 0 && i.pos == n - cert.p;
        if !ok {
            failures.push(format!(
                "state {q}: inertia ({}, {}, {}) differs from ({}, 0, {})",
                i.neg,
                i.zero,
                i.pos,
                cert.p,
                n - cert.p
            ));
        }
        inertias.insert(q.clone(), i);
        states.push(StateCheck { state: q.clone(), inertia: i, inertia_ok: ok });
    }

    let mut transitions = Vec::new();
    for t in system.automaton().transitions() {
        let gamma = cert.rates.get(t)?;
        let rate_ok = gamma.is_finite() && gamma > 0.0;
        if !rate_ok {
            failures.push(format!("transition {t}: rate {gamma} is not positive"));
        }
        let res = lmi_residual(
            system.mode(t.label)?,
            &cert.forms[&t.from],
            &cert.forms[&t.to],
            gamma,
        )?;
        let margin_ok = res.max_eigenvalue <= -cert.epsilon + MARGIN_SLACK;
        if !margin_ok {
            failures.push(format!(
                "transition {t}: residual eigenvalue {:.6e} exceeds -epsilon = {:.6e}",
                res.max_eigenvalue, -cert.epsilon
            ));
        }
        let ordering_ok = inertias[&t.from].neg <= inertias[&t.to].neg;
        if !ordering_ok {
            failures.push(format!(
                "transition {t}: negative index decreases ({} -> {})",
                inertias[&t.from].neg, inertias[&t.to].neg
            ));
        }
        transitions.push(TransitionCheck {
            transition: t.clone(),
            gamma,
            max_eigenvalue: res.max_eigenvalue,
            margin_ok,
            rate_ok,
            ordering_ok,
        });
    }

    let valid = failures.is_empty();
    Ok(ValidationReport { transitions, states, failures, valid })
}

/// Reference witness for the strict-alternation two-mode system: the forms
/// diag(-1, 8) and diag(-1/2, 1/4) at unit rates certify 1-dominance with
/// margin 0.1.
pub fn alternating_reference(system: &SwitchingSystem) -> Result<Certificate> {
    let mut forms = BTreeMap::new();
    forms.insert("a".to_string(), SymmetricForm::diag(&[-1.0, 8.0]));
    forms.insert("b".to_string(), SymmetricForm::diag(&[-0.5, 0.25]));
    Ok(Certificate {
        version: FORMAT_VERSION,
        system_fingerprint: system.fingerprint(),
        p: 1,
        epsilon: 0.1,
        rates: RateAssignment::uniform(system, 1.0)?,
        forms,
        meta: Meta { iterations: 0, timestamp: unix_timestamp() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasibility;
    use crate::system::fixtures;

    #[test]
    fn reference_witness_validates() {
        let system = fixtures::alternating();
        let cert = alternating_reference(&system).unwrap();
        let report = validate(&system, &cert).unwrap();
        assert!(report.valid, "failures: {:?}", report.failures);
        // residual spectra: {-1, -4} on a -> 1 -> b, {-1/2, -1/8} on b -> 2 -> a
        let mut eigs: Vec<f64> =
            report.transitions.iter().map(|t| t.max_eigenvalue).collect();
        eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert!((eigs[0] - (-1.0)).abs() < 1e-9);
        assert!((eigs[1] - (-0.125)).abs() < 1e-9);
    }

    #[test]
    fn negated_form_fails_residual_check() {
        let system = fixtures::alternating();
        let mut cert = alternating_reference(&system).unwrap();
        // negating diag(-1/2, 1/4) keeps inertia (1, 0, 1); the residual
        // check on a -> 1 -> b must catch it instead
        let p_b = cert.forms["b"].scale(-1.0);
        cert.forms.insert("b".to_string(), p_b);
        let report = validate(&system, &cert).unwrap();
        assert!(!report.valid);
        let bad = report
            .transitions
            .iter()
            .find(|t| !t.margin_ok)
            .expect("a margin failure");
        assert_eq!(bad.transition, Transition::new("a", 1, "b"));
        assert!(report.states.iter().all(|s| s.inertia_ok));
    }

    #[test]
    fn oversized_epsilon_names_the_transition() {
        let system = fixtures::alternating();
        let mut cert = alternating_reference(&system).unwrap();
        // tightest residual eigenvalue is -1/8; demand more
        cert.epsilon = 0.2;
        let report = validate(&system, &cert).unwrap();
        assert!(!report.valid);
        assert!(report
            .failures
            .iter()
            .any(|f| f.contains("b -> 2 -> a") || f.contains("b") && f.contains("residual")));
    }

    #[test]
    fn stale_fingerprint_rejected() {
        let system = fixtures::alternating();
        let mut cert = alternating_reference(&system).unwrap();
        cert.system_fingerprint = "0".repeat(64);
        match validate(&system, &cert) {
            Err(Error::StaleCertificate { .. }) => {}
            other => panic!("expected stale-certificate error, got {other:?}"),
        }
    }

    #[test]
    fn round_trip_identity() {
        let system = fixtures::bacterial();
        let mut rates = BTreeMap::new();
        rates.insert(Transition::new("a", 2, "a"), 0.75);
        rates.insert(Transition::new("a", 1, "b"), 0.25);
        rates.insert(Transition::new("b", 2, "a"), 0.25);
        rates.insert(Transition::new("b", 1, "b"), 0.75);
        rates.insert(Transition::new("b", 3, "b"), 0.75);
        let rates = RateAssignment::new(rates).unwrap();
        let problem = feasibility::assemble(&system, 1, &rates, 0.01, 1e4).unwrap();
        let outcome = feasibility::solve(&problem, feasibility::DEFAULT_MAX_ITERS, 0).unwrap();
        let cert = Certificate::from_outcome(&system, 1, 0.01, &rates, &outcome).unwrap();
        let text = cert.serialize().unwrap();
        let back = Certificate::deserialize(&text).unwrap();
        assert_eq!(back.system_fingerprint, cert.system_fingerprint);
        assert_eq!(back.p, cert.p);
        assert_eq!(back.epsilon, cert.epsilon);
        for (q, p) in &cert.forms {
            let q_back = &back.forms[q];
            for i in 0..p.dim() {
                for j in 0..p.dim() {
                    // bitwise round-trip through the decimal encoding
                    assert_eq!(p.get(i, j).to_bits(), q_back.get(i, j).to_bits());
                }
            }
        }
        let report = validate(&system, &back).unwrap();
        assert!(report.valid, "failures: {:?}", report.failures);
    }

    #[test]
    fn truncated_file_is_a_parse_error() {
        let system = fixtures::alternating();
        let cert = alternating_reference(&system).unwrap();
        let text = cert.serialize().unwrap();
        match Certificate::deserialize(&text[..text.len() / 2]) {
            Err(Error::Parse(_)) => {}
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_field_named_in_error() {
        let system = fixtures::alternating();
        let cert = alternating_reference(&system).unwrap();
        let text = cert.serialize().unwrap();
        let tampered = text.replacen("\"version\"", "\"signature\": 1, \"version\"", 1);
        match Certificate::deserialize(&tampered) {
            Err(Error::Parse(msg)) => assert!(msg.contains("signature"), "{msg}"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn validation_is_pure() {
        let system = fixtures::alternating();
        let cert = alternating_reference(&system).unwrap();
        let a = validate(&system, &cert).unwrap();
        let b = validate(&system, &cert).unwrap();
        assert_eq!(a.valid, b.valid);
        for (x, y) in a.transitions.iter().zip(b.transitions.iter()) {
            assert_eq!(x.max_eigenvalue.to_bits(), y.max_eigenvalue.to_bits());
        }
    }

    #[test]
    fn perturbed_witness_keeps_ordering() {
        // Prop-style check: small symmetric perturbations inside the margin
        // keep the certificate valid and the negative-index ordering intact.
        let system = fixtures::alternating();
        let base = alternating_reference(&system).unwrap();
        for k in 0..20u32 {
            let delta = 1e-3 * (k as f64 + 1.0) / 20.0;
            let mut cert = base.clone();
            for (qi, (q, form)) in base.forms.iter().enumerate() {
                let n = form.dim();
                let mut entries = vec![0.0; n * n];
                for i in 0..n {
                    for j in 0..n {
                        let wiggle = if (i + j + qi) % 2 == 0 { delta } else { -delta };
                        entries[i * n + j] = form.get(i, j) + wiggle;
                        entries[j * n + i] = entries[i * n + j];
                    }
                }
                cert.forms
                    .insert(q.clone(), SymmetricForm::from_entries(n, entries).unwrap());
            }
            let report = validate(&system, &cert).unwrap();
            assert!(report.valid, "delta {delta}: {:?}", report.failures);
            assert!(report.transitions.iter().all(|t| t.ordering_ok));
        }
    }
}

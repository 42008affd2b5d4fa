//! End-to-end dominance analysis: load a system file, propose rates from
//! the cycle spectra, solve the transition inequalities and validate the
//! resulting certificate.
//!
//! Run with: cargo run --example analyze_dominance

use std::path::Path;

use domcert::certificate::{self, Certificate};
use domcert::feasibility::{self, FeasibilityOutcome};
use domcert::rates::{propose_rates, RateProposal};
use domcert::system::SwitchingSystem;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/bacterial.json");
    let system = SwitchingSystem::from_path(&data)?.trimmed()?;
    println!(
        "loaded: n = {}, {} modes, automaton states {:?}",
        system.dim(),
        system.mode_count(),
        system.automaton().states()
    );

    let p = 1;
    let rates = match propose_rates(&system, p)? {
        RateProposal::Feasible(rates) => rates,
        RateProposal::Infeasible { reason, .. } => {
            println!("no admissible rates: {reason}");
            return Ok(());
        }
    };
    for (t, gamma) in rates.iter() {
        println!("rate {t}: {gamma:.4}");
    }

    let epsilon = feasibility::DEFAULT_EPSILON;
    let problem = feasibility::assemble(&system, p, &rates, epsilon, feasibility::DEFAULT_RADIUS)?;
    let outcome = feasibility::solve(&problem, feasibility::DEFAULT_MAX_ITERS, 0)?;
    let FeasibilityOutcome::Feasible { margin, iterations, .. } = &outcome else {
        println!("no certificate found");
        return Ok(());
    };
    println!("feasible after {iterations} iterations, margin {margin:.4}");

    let cert = Certificate::from_outcome(&system, p, epsilon, &rates, &outcome)?;
    let report = certificate::validate(&system, &cert)?;
    for s in &report.states {
        println!(
            "state {}: inertia ({}, {}, {})",
            s.state, s.inertia.neg, s.inertia.zero, s.inertia.pos
        );
    }
    println!("certificate valid: {}", report.valid);
    Ok(())
}

//! Admissible rate intervals from automaton-cycle spectra: every
//! elementary cycle's rate product must fall strictly between the
//! magnitudes of the cycle product's p-th and (p+1)-th eigenvalues.
//!
//! Run with: cargo run --example rate_intervals

use std::path::Path;

use domcert::rates::{cycle_spectra, propose_rates, validate_rates, RateProposal};
use domcert::system::SwitchingSystem;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/bacterial.json");
    let system = SwitchingSystem::from_path(&data)?.trimmed()?;
    let p = 1;

    for s in cycle_spectra(&system)? {
        let (lo, hi) = s.gap_interval(p)?;
        println!(
            "cycle {}: |eigenvalues| = {:?}, admissible interval ({lo:.4}, {hi:.4})",
            s.cycle, s.magnitudes
        );
    }

    match propose_rates(&system, p)? {
        RateProposal::Feasible(rates) => {
            println!("proposed rates:");
            for (t, gamma) in rates.iter() {
                println!("  {t}: {gamma:.4}");
            }
            let checks = validate_rates(&system, p, &rates)?;
            println!("all cycle checks pass: {}", checks.iter().all(|c| c.ok()));
        }
        RateProposal::Infeasible { reason, binding } => {
            println!("infeasible: {reason}");
            for c in binding {
                println!("  binding cycle {c}");
            }
        }
    }
    Ok(())
}

//! Certificate round trip and independent validation: serialize a known
//! witness, re-read it, validate it, then tamper with one matrix entry and
//! watch validation name the violated transition.
//!
//! Run with: cargo run --example validate_certificate

use domcert::certificate::{alternating_reference, validate, Certificate};
use domcert::system::fixtures;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let system = fixtures::alternating();
    let cert = alternating_reference(&system)?;

    let text = cert.serialize()?;
    let cert = Certificate::deserialize(&text)?;
    let report = validate(&system, &cert)?;
    for t in &report.transitions {
        println!("transition {}: residual max eigenvalue {:.4}", t.transition, t.max_eigenvalue);
    }
    println!("reference witness valid: {}", report.valid);

    // flip the sign of one P entry
    let mut tampered = cert.clone();
    let p_b = tampered.forms["b"].scale(-1.0);
    tampered.forms.insert("b".into(), p_b);
    let report = validate(&system, &tampered)?;
    println!("tampered witness valid: {}", report.valid);
    for f in &report.failures {
        println!("  {f}");
    }
    Ok(())
}

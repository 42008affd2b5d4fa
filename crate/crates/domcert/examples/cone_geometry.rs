//! Quadratic cones and contraction: membership of points in K(P) =
//! {x : x'Px <= 0}, the per-transition matrix-inequality residual, and the
//! sampling-based geometric cross-check that the cone maps strictly into
//! its target.
//!
//! Run with: cargo run --example cone_geometry

use domcert::cones::{cone_membership, geometric_contraction_check, lmi_residual, GeometricCheck};
use domcert::linalg::SymmetricForm;
use domcert::system::fixtures;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p_a = SymmetricForm::diag(&[-1.0, 8.0]);
    let p_b = SymmetricForm::diag(&[-0.5, 0.25]);

    for x in [[1.0, 0.0], [8f64.sqrt(), 1.0], [0.0, 1.0]] {
        println!("x = {x:?}: {:?} of K(diag(-1, 8))", cone_membership(&p_a, &x)?);
    }

    let system = fixtures::alternating();
    let res = lmi_residual(system.mode(1)?, &p_a, &p_b, 1.0)?;
    println!("residual along a -> 1 -> b: max eigenvalue {:.4}", res.max_eigenvalue);

    match geometric_contraction_check(system.mode(1)?, &p_a, &p_b, 2000, 42)? {
        GeometricCheck::Consistent => println!("2000 sampled cone points all map strictly inside"),
        GeometricCheck::Violation(witness) => println!("violation at {witness:?}"),
    }
    Ok(())
}

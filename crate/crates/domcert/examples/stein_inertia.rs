//! The discrete Lyapunov-Stein equation as an inertia oracle: solving
//! A'PA - P = -I gives a symmetric P whose number of negative eigenvalues
//! equals the number of eigenvalues of A outside the unit circle; no
//! solution exists when A has a unimodular eigenvalue.
//!
//! Run with: cargo run --example stein_inertia

use domcert::linalg::{
    circle_split, default_zero_tol, inertia, rotation, stein_solve, Matrix, CIRCLE_TOL,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cases = [
        ("expanding then contracting", Matrix::from_rows(&[vec![2.0, 1.0], vec![0.0, 0.25]])?),
        ("both contracting", Matrix::from_rows(&[vec![0.5, 0.3], vec![0.0, 0.25]])?),
        ("both expanding", Matrix::from_rows(&[vec![3.0, 0.0], vec![1.0, 1.5]])?),
    ];
    for (name, a) in &cases {
        let split = circle_split(a, CIRCLE_TOL)?;
        let p = stein_solve(a)?;
        let i = inertia(&p, default_zero_tol(&p))?;
        println!(
            "{name}: {} eigenvalue(s) outside the circle, inertia of P = ({}, {}, {})",
            split.outside, i.neg, i.zero, i.pos
        );
    }

    match stein_solve(&rotation(1.0)) {
        Err(e) => println!("rotation matrix: {e}"),
        Ok(_) => println!("unexpected solution for a unimodular matrix"),
    }
    Ok(())
}

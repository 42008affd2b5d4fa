//! Quadratic p-cones K(P) = {x : x^T P x <= 0}: membership, the Stein-type
//! contraction inequality per transition, and a sampling-based geometric
//! cross-check of cone contraction.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, SymmetricForm};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeMembership {
    Interior,
    Boundary,
    Exterior,
}

/// Classify x against K(P) by the sign of x^T P x.
pub fn cone_membership(p: &SymmetricForm, x: &[f64]) -> Result<ConeMembership> {
    if x.len() != p.dim() {
        return Err(Error::InvalidInput(format!(
            "vector of length {} against a form of dimension {}",
            x.len(),
            p.dim()
        )));
    }
    let value = p.quad(x);
    let scale = 1e-12 * (1.0 + p.frobenius() * linalg::dot(x, x));
    Ok(if value < -scale {
        ConeMembership::Interior
    } else if value > scale {
        ConeMembership::Exterior
    } else {
        ConeMembership::Boundary
    })
}

/// Residual of the per-transition inequality A^T P_to A - gamma^2 P_from.
#[derive(Debug, Clone)]
pub struct LmiResidual {
    pub residual: SymmetricForm,
    pub max_eigenvalue: f64,
    /// Unit eigenvector attaining the largest eigenvalue.
    pub top_eigenvector: Vec<f64>,
}

impl LmiResidual {
    /// Contraction with margin epsilon holds iff max_eigenvalue <= -epsilon.
    pub fn contracts_with_margin(&self, epsilon: f64) -> bool {
        self.max_eigenvalue <= -epsilon
    }
}

pub fn lmi_residual(
    a: &Matrix,
    p_from: &SymmetricForm,
    p_to: &SymmetricForm,
    gamma: f64,
) -> Result<LmiResidual> {
    if gamma <= 0.0 || !gamma.is_finite() {
        return Err(Error::InvalidRate(format!("rate must be positive, got {gamma}")));
    }
    let n = p_from.dim();
    if !a.is_square() || a.rows() != n || p_to.dim() != n {
        return Err(Error::InvalidInput("dimension mismatch in LMI residual".into()));
    }
    let at_pa = a.transpose().matmul(&p_to.as_matrix()).matmul(a);
    let residual = SymmetricForm::new(&at_pa.sub(&p_from.as_matrix().scale(gamma * gamma)))?;
    let eig = linalg::sym_eigen(&residual);
    let (max_eigenvalue, top_eigenvector) = eig.last().cloned().unwrap();
    Ok(LmiResidual { residual, max_eigenvalue, top_eigenvector })
}

/// Outcome of the sampling-based contraction check.
#[derive(Debug, Clone, PartialEq)]
pub enum GeometricCheck {
    Consistent,
    /// A unit vector x in K(P_from) whose image A x is not in the open
    /// interior of K(P_to).
    Violation(Vec<f64>),
}

/// Check A(K(P_from) \ {0}) subset int K(P_to) on sampled cone points.
///
/// Mixes rejection-sampled interior points with boundary points built from
/// the eigenbasis of P_from, where strict-contraction failures concentrate.
pub fn geometric_contraction_check(
    a: &Matrix,
    p_from: &SymmetricForm,
    p_to: &SymmetricForm,
    samples: usize,
    seed: u64,
) -> Result<GeometricCheck> {
    if samples == 0 {
        return Err(Error::InvalidInput("at least one sample required".into()));
    }
    let n = p_from.dim();
    if a.rows() != n || a.cols() != n || p_to.dim() != n {
        return Err(Error::InvalidInput("dimension mismatch in contraction check".into()));
    }
    let eig = linalg::sym_eigen(p_from);
    let zero_tol = linalg::default_zero_tol(p_from);
    let neg: Vec<&(f64, Vec<f64>)> = eig.iter().filter(|(l, _)| *l < -zero_tol).collect();
    let pos: Vec<&(f64, Vec<f64>)> = eig.iter().filter(|(l, _)| *l > zero_tol).collect();
    let null: Vec<&(f64, Vec<f64>)> = eig.iter().filter(|(l, _)| l.abs() <= zero_tol).collect();
    if neg.is_empty() && null.is_empty() {
        return Err(Error::DegenerateCone(
            "P_from is positive definite; the cone has no nonzero points".into(),
        ));
    }

    let check = |x: &[f64]| -> Option<Vec<f64>> {
        let image = a.mul_vec(x);
        let value = p_to.quad(&image);
        let scale = 1e-12 * (1.0 + p_to.frobenius() * linalg::dot(&image, &image));
        if value < -scale {
            None
        } else {
            Some(x.to_vec())
        }
    };

    // Deterministic seeds: negative eigendirections, null directions, and
    // the exactly balanced boundary mixtures of each (neg, pos) pair.
    let mut deterministic: Vec<Vec<f64>> = Vec::new();
    for (_, v) in &neg {
        deterministic.push(v.clone());
    }
    for (_, v) in &null {
        deterministic.push(v.clone());
    }
    for (ln, vn) in &neg {
        for (lp, vp) in &pos {
            let t = (-ln / lp).sqrt();
            for sign in [1.0, -1.0] {
                let x: Vec<f64> = vn
                    .iter()
                    .zip(vp)
                    .map(|(a, b)| a + sign * t * b)
                    .collect();
                let nrm = linalg::norm(&x);
                deterministic.push(x.iter().map(|c| c / nrm).collect());
            }
        }
    }
    for x in &deterministic {
        if let Some(witness) = check(x) {
            return Ok(GeometricCheck::Violation(witness));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut drawn = 0usize;
    while drawn < samples {
        let x: Vec<f64> = if rng.gen_bool(0.5) && !neg.is_empty() && !pos.is_empty() {
            // Boundary point with random eigenbasis weights.
            let wneg: Vec<f64> = neg.iter().map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let wpos: Vec<f64> = pos.iter().map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let qn: f64 = neg.iter().zip(&wneg).map(|((l, _), w)| l * w * w).sum();
            let qp: f64 = pos.iter().zip(&wpos).map(|((l, _), w)| l * w * w).sum();
            if qp <= 0.0 {
                continue;
            }
            let t = (-qn / qp).sqrt();
            let mut x = vec![0.0; n];
            for ((_, v), w) in neg.iter().zip(&wneg) {
                for i in 0..n {
                    x[i] += w * v[i];
                }
            }
            for ((_, v), w) in pos.iter().zip(&wpos) {
                for i in 0..n {
                    x[i] += t * w * v[i];
                }
            }
            x
        } else {
            // Rejection sampling on the unit sphere.
            let x: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            if p_from.quad(&x) > 0.0 {
                continue;
            }
            x
        };
        let nrm = linalg::norm(&x);
        if nrm < 1e-12 {
            continue;
        }
        let x: Vec<f64> = x.iter().map(|c| c / nrm).collect();
        drawn += 1;
        if let Some(witness) = check(&x) {
            return Ok(GeometricCheck::Violation(witness));
        }
    }
    Ok(GeometricCheck::Consistent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rotation;

    fn diag(values: &[f64]) -> SymmetricForm {
        SymmetricForm::diag(values)
    }

    #[test]
    fn membership_examples() {
        let p = diag(&[-1.0, 8.0]);
        assert_eq!(cone_membership(&p, &[1.0, 0.0]).unwrap(), ConeMembership::Interior);
        assert_eq!(
            cone_membership(&p, &[8.0f64.sqrt(), 1.0]).unwrap(),
            ConeMembership::Boundary
        );
        assert_eq!(cone_membership(&p, &[0.0, 1.0]).unwrap(), ConeMembership::Exterior);
    }

    #[test]
    fn membership_dimension_mismatch() {
        let p = diag(&[-1.0, 8.0]);
        assert!(cone_membership(&p, &[1.0]).is_err());
    }

    #[test]
    fn residual_alternating_forward() {
        // transition a -1-> b at rate 1: diag(-1, -4)
        let a1 = Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 4.0]]).unwrap();
        let pa = diag(&[-1.0, 8.0]);
        let pb = diag(&[-0.5, 0.25]);
        let r = lmi_residual(&a1, &pa, &pb, 1.0).unwrap();
        assert!((r.residual.get(0, 0) + 1.0).abs() < 1e-12);
        assert!((r.residual.get(1, 1) + 4.0).abs() < 1e-12);
        assert!((r.max_eigenvalue + 1.0).abs() < 1e-12);
    }

    #[test]
    fn residual_alternating_backward() {
        // transition b -2-> a at rate 1: diag(-1/2, -1/8). Direct arithmetic:
        // (1/8)^2 * 8 - 1/4 = -1/8.
        let a2 = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.125]]).unwrap();
        let pa = diag(&[-1.0, 8.0]);
        let pb = diag(&[-0.5, 0.25]);
        let r = lmi_residual(&a2, &pb, &pa, 1.0).unwrap();
        assert!((r.residual.get(0, 0) + 0.5).abs() < 1e-12);
        assert!((r.residual.get(1, 1) + 0.125).abs() < 1e-12);
        assert!(r.contracts_with_margin(0.1));
    }

    #[test]
    fn residual_identity_no_margin() {
        let p = diag(&[-1.0, 1.0]);
        let r = lmi_residual(&Matrix::identity(2), &p, &p, 1.0).unwrap();
        assert_eq!(r.residual.as_matrix().frobenius(), 0.0);
        assert!(r.max_eigenvalue.abs() < 1e-15);
        assert!(!r.contracts_with_margin(1e-9));
    }

    #[test]
    fn residual_rejects_bad_rate() {
        let p = diag(&[-1.0, 1.0]);
        assert!(matches!(
            lmi_residual(&Matrix::identity(2), &p, &p, 0.0),
            Err(Error::InvalidRate(_))
        ));
    }

    #[test]
    fn geometric_check_alternating_consistent() {
        let a1 = Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 4.0]]).unwrap();
        let a2 = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.125]]).unwrap();
        let pa = diag(&[-1.0, 8.0]);
        let pb = diag(&[-0.5, 0.25]);
        assert_eq!(
            geometric_contraction_check(&a1, &pa, &pb, 1000, 1).unwrap(),
            GeometricCheck::Consistent
        );
        assert_eq!(
            geometric_contraction_check(&a2, &pb, &pa, 1000, 1).unwrap(),
            GeometricCheck::Consistent
        );
    }

    #[test]
    fn geometric_check_identity_boundary_violation() {
        let p = diag(&[-1.0, 1.0]);
        match geometric_contraction_check(&Matrix::identity(2), &p, &p, 100, 2).unwrap() {
            GeometricCheck::Violation(x) => {
                // a boundary point maps to the boundary, not the interior
                assert_eq!(cone_membership(&p, &x).unwrap(), ConeMembership::Boundary);
            }
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn geometric_check_zero_map_violation() {
        let p = diag(&[-1.0, 1.0]);
        let zero = Matrix::zeros(2, 2);
        assert!(matches!(
            geometric_contraction_check(&zero, &p, &p, 100, 3).unwrap(),
            GeometricCheck::Violation(_)
        ));
    }

    #[test]
    fn geometric_check_degenerate_cone() {
        let p = diag(&[1.0, 2.0]);
        assert!(matches!(
            geometric_contraction_check(&rotation(1.0), &p, &p, 10, 4),
            Err(Error::DegenerateCone(_))
        ));
    }

    #[test]
    fn residual_scaling_preserves_sign() {
        let a = Matrix::from_rows(&[vec![0.3, 1.0], vec![-0.2, 0.8]]).unwrap();
        let pf = SymmetricForm::from_entries(2, vec![-1.0, 0.3, 0.3, 2.0]).unwrap();
        let pt = SymmetricForm::from_entries(2, vec![-0.5, 0.1, 0.1, 1.0]).unwrap();
        let base = lmi_residual(&a, &pf, &pt, 0.9).unwrap();
        let scaled = lmi_residual(&a, &pf.scale(3.0), &pt.scale(3.0), 0.9).unwrap();
        assert!((scaled.max_eigenvalue - 3.0 * base.max_eigenvalue).abs() < 1e-10);
    }
}

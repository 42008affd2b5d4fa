//! Dense real matrix kernels for desk-scale problems (n <= 64).
//!
//! Provides a cyclic-Jacobi symmetric eigensolver, general spectra through
//! Hessenberg reduction with shifted QR, inertia and unit-circle eigenvalue
//! classification, and a Stein-equation solver used as an independent oracle.

use crate::error::{Error, Result};

pub const DIM_LIMIT: usize = 64;

/// Absolute floor applied to every relative tolerance.
pub const TOL_FLOOR: f64 = 1e-12;

/// Dense real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput("matrix dimensions must be positive".into()));
        }
        if rows > DIM_LIMIT || cols > DIM_LIMIT {
            return Err(Error::InvalidInput(format!(
                "matrix dimension exceeds supported limit {DIM_LIMIT}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("matrix entries must be finite".into()));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::InvalidInput("empty matrix".into()));
        }
        let c = rows[0].len();
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidInput("ragged rows".into()));
        }
        Matrix::new(r, c, rows.iter().flatten().copied().collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * x[j]).sum())
            .collect()
    }

    pub fn scale(&self, c: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| c * x).collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Symmetric matrix; symmetrized as (P + P^T)/2 on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricForm {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricForm {
    pub fn new(m: &Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidInput("symmetric form must be square".into()));
        }
        let n = m.rows();
        let scale = 1.0 + m.frobenius();
        let mut asym: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                asym = asym.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        if asym > 1e-12 * scale {
            return Err(Error::InvalidInput(format!(
                "matrix is not symmetric (max asymmetry {asym:.3e})"
            )));
        }
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = 0.5 * (m[(i, j)] + m[(j, i)]);
            }
        }
        Ok(SymmetricForm { n, data })
    }

    pub fn from_entries(n: usize, entries: Vec<f64>) -> Result<Self> {
        SymmetricForm::new(&Matrix::new(n, n, entries)?)
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut data = vec![0.0; n * n];
        for (i, v) in values.iter().enumerate() {
            data[i * n + i] = *v;
        }
        SymmetricForm { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn as_matrix(&self) -> Matrix {
        Matrix { rows: self.n, cols: self.n, data: self.data.clone() }
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: f64) -> SymmetricForm {
        SymmetricForm { n: self.n, data: self.data.iter().map(|x| c * x).collect() }
    }

    /// Quadratic form value x^T P x.
    pub fn quad(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n, "dimension mismatch");
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                acc += x[i] * self.get(i, j) * x[j];
            }
        }
        acc
    }
}

/// Eigenvalue signature (negative, zero, positive counts) of a symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub neg: usize,
    pub zero: usize,
    pub pos: usize,
}

impl Inertia {
    pub fn total(&self) -> usize {
        self.neg + self.zero + self.pos
    }
}

/// Eigenvalue counts relative to the complex unit circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CircleSplit {
    pub outside: usize,
    pub on: usize,
    pub inside: usize,
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order paired with orthonormal unit
/// eigenvectors.
pub fn sym_eigen(p: &SymmetricForm) -> Vec<(f64, Vec<f64>)> {
    let n = p.dim();
    let mut a = p.as_matrix();
    let mut v = Matrix::identity(n);
    let scale = a.frobenius().max(TOL_FLOOR);
    let sweep_limit = 60;

    for _ in 0..sweep_limit {
        let mut off: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[(i, j)] * a[(i, j)];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let apq = a[(i, j)];
                if apq.abs() <= 1e-18 * scale {
                    continue;
                }
                let app = a[(i, i)];
                let aqq = a[(j, j)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let aki = a[(k, i)];
                    let akj = a[(k, j)];
                    a[(k, i)] = c * aki - s * akj;
                    a[(k, j)] = s * aki + c * akj;
                }
                for k in 0..n {
                    let aik = a[(i, k)];
                    let ajk = a[(j, k)];
                    a[(i, k)] = c * aik - s * ajk;
                    a[(j, k)] = s * aik + c * ajk;
                }
                for k in 0..n {
                    let vki = v[(k, i)];
                    let vkj = v[(k, j)];
                    v[(k, i)] = c * vki - s * vkj;
                    v[(k, j)] = s * vki + c * vkj;
                }
            }
        }
    }

    let mut pairs: Vec<(f64, Vec<f64>)> =
        (0..n).map(|j| (a[(j, j)], v.column(j))).collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    pairs
}

/// Default zero band for inertia: 1e-9 * max(1, ||P||_F).
pub fn default_zero_tol(p: &SymmetricForm) -> f64 {
    1e-9 * p.frobenius().max(1.0)
}

pub fn inertia(p: &SymmetricForm, zero_tol: f64) -> Result<Inertia> {
    if zero_tol < 0.0 {
        return Err(Error::InvalidInput("zero_tol must be nonnegative".into()));
    }
    let mut out = Inertia { neg: 0, zero: 0, pos: 0 };
    for (lambda, _) in sym_eigen(p) {
        if lambda < -zero_tol {
            out.neg += 1;
        } else if lambda > zero_tol {
            out.pos += 1;
        } else {
            out.zero += 1;
        }
    }
    Ok(out)
}

/// Complex spectrum of a square matrix as (re, im) pairs.
///
/// Closed forms at n <= 2, Hessenberg reduction plus shifted QR beyond.
pub fn eigenvalues(a: &Matrix) -> Result<Vec<(f64, f64)>> {
    if !a.is_square() {
        return Err(Error::InvalidInput("spectrum requires a square matrix".into()));
    }
    let n = a.rows();
    match n {
        1 => Ok(vec![(a[(0, 0)], 0.0)]),
        2 => {
            let tr = a[(0, 0)] + a[(1, 1)];
            let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
            let disc = tr * tr / 4.0 - det;
            if disc >= 0.0 {
                let s = disc.sqrt();
                Ok(vec![(tr / 2.0 + s, 0.0), (tr / 2.0 - s, 0.0)])
            } else {
                let s = (-disc).sqrt();
                Ok(vec![(tr / 2.0, s), (tr / 2.0, -s)])
            }
        }
        _ => hqr_eigenvalues(a),
    }
}

/// Eigenvalue magnitudes, descending.
pub fn spectrum_magnitudes(a: &Matrix) -> Result<Vec<f64>> {
    let mut mags: Vec<f64> = eigenvalues(a)?
        .into_iter()
        .map(|(re, im)| (re * re + im * im).sqrt())
        .collect();
    mags.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(mags)
}

pub const CIRCLE_TOL: f64 = 1e-9;

/// Classify eigenvalue magnitudes against the unit circle with band +-tol.
pub fn circle_split(a: &Matrix, tol: f64) -> Result<CircleSplit> {
    let mut out = CircleSplit { outside: 0, on: 0, inside: 0 };
    for mag in spectrum_magnitudes(a)? {
        if (mag - 1.0).abs() <= tol {
            out.on += 1;
        } else if mag > 1.0 {
            out.outside += 1;
        } else {
            out.inside += 1;
        }
    }
    Ok(out)
}

/// Solve A^T P A - P = -I for the unique symmetric P (Stein equation).
///
/// Fails when A has an eigenvalue on the unit circle, where no solution
/// exists. Used as the independent inertia oracle: the number of negative
/// eigenvalues of P equals the number of eigenvalues of A outside the unit
/// circle.
pub fn stein_solve(a: &Matrix) -> Result<SymmetricForm> {
    if !a.is_square() {
        return Err(Error::InvalidInput("stein_solve requires a square matrix".into()));
    }
    let split = circle_split(a, CIRCLE_TOL)?;
    if split.on > 0 {
        return Err(Error::NoSolution(format!(
            "{} eigenvalue(s) on the unit circle; the Stein equation has no solution",
            split.on
        )));
    }
    let n = a.rows();
    let m = n * n;
    // vec(A^T P A) = (A^T (x) A^T) vec(P), column-major vec.
    let at = a.transpose();
    let mut sys = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    // kron entry ((j,l),(i,k)) acting on vec index (col-major)
                    let row = l * n + k;
                    let col = j * n + i;
                    sys[row * m + col] = at[(k, i)] * at[(l, j)];
                }
            }
        }
    }
    for d in 0..m {
        sys[d * m + d] -= 1.0;
    }
    let mut rhs = vec![0.0; m];
    for i in 0..n {
        rhs[i * n + i] = -1.0;
    }
    // The operator can be consistently rank-deficient away from the unit
    // circle (eigenvalue products lambda_i * lambda_j = 1); any particular
    // solution serves as the inertia witness, so free directions are set
    // to zero and the residual check below decides solvability.
    let sol = solve_rank_tolerant(&mut sys, &mut rhs, m);
    let mut entries = vec![0.0; m];
    for j in 0..n {
        for i in 0..n {
            entries[i * n + j] = sol[j * n + i];
        }
    }
    // Symmetrize: the exact solution is symmetric, roundoff is not.
    let mut msym = Matrix::new(n, n, entries)?;
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (msym[(i, j)] + msym[(j, i)]);
            msym[(i, j)] = avg;
            msym[(j, i)] = avg;
        }
    }
    let p = SymmetricForm::new(&msym)?;
    let residual = at
        .matmul(&p.as_matrix())
        .matmul(a)
        .sub(&p.as_matrix())
        .sub(&Matrix::identity(n).scale(-1.0))
        .frobenius();
    if residual > 1e-8 * (1.0 + p.frobenius()) {
        return Err(Error::Numerical(format!(
            "Stein residual {residual:.3e} above tolerance"
        )));
    }
    Ok(p)
}

/// Row echelon elimination that tolerates rank deficiency: columns without
/// a usable pivot become free variables fixed at zero. Inconsistent rows
/// are ignored; callers must check the residual of the returned particular
/// solution.
fn solve_rank_tolerant(a: &mut [f64], b: &mut [f64], n: usize) -> Vec<f64> {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let tol = 1e-10 * scale;
    let mut pivot_row = vec![usize::MAX; n];
    let mut next_row = 0;
    for col in 0..n {
        if next_row == n {
            break;
        }
        let mut p = next_row;
        for r in (next_row + 1)..n {
            if a[r * n + col].abs() > a[p * n + col].abs() {
                p = r;
            }
        }
        if a[p * n + col].abs() <= tol {
            continue;
        }
        if p != next_row {
            for j in 0..n {
                a.swap(next_row * n + j, p * n + j);
            }
            b.swap(next_row, p);
        }
        let d = a[next_row * n + col];
        for r in (next_row + 1)..n {
            let f = a[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                a[r * n + j] -= f * a[next_row * n + j];
            }
            b[r] -= f * b[next_row];
        }
        pivot_row[col] = next_row;
        next_row += 1;
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let r = pivot_row[col];
        if r == usize::MAX {
            continue;
        }
        let mut acc = b[r];
        for j in (col + 1)..n {
            acc -= a[r * n + j] * x[j];
        }
        x[col] = acc / a[r * n + col];
    }
    x
}

/// Gaussian elimination with partial pivoting; consumes its inputs.
pub fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Result<Vec<f64>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    for col in 0..n {
        let mut pivot = col;
        for row in (col + 1)..n {
            if a[row * n + col].abs() > a[pivot * n + col].abs() {
                pivot = row;
            }
        }
        if a[pivot * n + col].abs() < 1e-300 {
            return Err(Error::Numerical("singular linear system".into()));
        }
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
            }
            b.swap(col, pivot);
        }
        let d = a[col * n + col];
        for row in (col + 1)..n {
            let f = a[row * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                a[row * n + j] -= f * a[col * n + j];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for j in (row + 1)..n {
            acc -= a[row * n + j] * x[j];
        }
        x[row] = acc / a[row * n + row];
    }
    Ok(x)
}

/// Hessenberg reduction by elimination with pivoting, then the classical
/// shifted-QR iteration (elmhes + hqr, 1-based indexing kept from the
/// reference formulation).
// initialize-then-overwrite mirrors the reference shifted-QR recurrence
#[allow(unused_assignments)]
fn hqr_eigenvalues(m: &Matrix) -> Result<Vec<(f64, f64)>> {
    let n = m.rows();
    let mut a = vec![vec![0.0f64; n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            a[i + 1][j + 1] = m[(i, j)];
        }
    }
    let sign = |v: f64, s: f64| if s >= 0.0 { v.abs() } else { -v.abs() };

    // elmhes: reduce to upper Hessenberg form.
    for mm in 2..n {
        let mut x = 0.0f64;
        let mut i = mm;
        for j in mm..=n {
            if a[j][mm - 1].abs() > x.abs() {
                x = a[j][mm - 1];
                i = j;
            }
        }
        if i != mm {
            for j in (mm - 1)..=n {
                let tmp = a[i][j];
                a[i][j] = a[mm][j];
                a[mm][j] = tmp;
            }
            for j in 1..=n {
                let tmp = a[j][i];
                a[j][i] = a[j][mm];
                a[j][mm] = tmp;
            }
        }
        if x != 0.0 {
            for i in (mm + 1)..=n {
                let mut y = a[i][mm - 1];
                if y != 0.0 {
                    y /= x;
                    a[i][mm - 1] = 0.0;
                    for j in mm..=n {
                        a[i][j] -= y * a[mm][j];
                    }
                    for j in 1..=n {
                        a[j][mm] += y * a[j][i];
                    }
                }
            }
        }
    }
    for i in 3..=n {
        for j in 1..=(i - 2) {
            a[i][j] = 0.0;
        }
    }

    // hqr: shifted QR on the Hessenberg matrix.
    let mut wr = vec![0.0f64; n + 1];
    let mut wi = vec![0.0f64; n + 1];
    let mut anorm = 0.0;
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += a[i][j].abs();
        }
    }
    if anorm == 0.0 {
        return Ok(vec![(0.0, 0.0); n]);
    }
    let mut nn = n;
    let mut t = 0.0f64;
    while nn >= 1 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 2 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() <= f64::EPSILON * s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[nn][nn];
            if l == nn {
                wr[nn] = x + t;
                wi[nn] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = a[nn - 1][nn - 1];
            let mut w = a[nn][nn - 1] * a[nn - 1][nn];
            if l == nn - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + sign(z, p);
                    wr[nn - 1] = x + z;
                    wr[nn] = if z != 0.0 { x - w / z } else { x + z };
                    wi[nn - 1] = 0.0;
                    wi[nn] = 0.0;
                } else {
                    wr[nn - 1] = x + p;
                    wr[nn] = x + p;
                    wi[nn] = z;
                    wi[nn - 1] = -z;
                }
                nn -= 2;
                break;
            }
            if its == 30 {
                return Err(Error::Numerical("QR iteration did not converge".into()));
            }
            if its == 10 || its == 20 {
                t += x;
                for i in 1..=nn {
                    a[i][i] -= x;
                }
                let s = a[nn][nn - 1].abs() + a[nn - 1][nn - 2].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            let mut mfound = l;
            let (mut p, mut q, mut r) = (0.0f64, 0.0f64, 0.0f64);
            let mut mm = nn - 2;
            loop {
                let z = a[mm][mm];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[mm + 1][mm] + a[mm][mm + 1];
                q = a[mm + 1][mm + 1] - z - rr - ss;
                r = a[mm + 2][mm + 1];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if mm == l {
                    mfound = mm;
                    break;
                }
                let u = a[mm][mm - 1].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[mm - 1][mm - 1].abs() + z.abs() + a[mm + 1][mm + 1].abs());
                if u <= f64::EPSILON * v {
                    mfound = mm;
                    break;
                }
                mm -= 1;
            }
            let mfound = mfound;
            for i in (mfound + 2)..=nn {
                a[i][i - 2] = 0.0;
                if i != mfound + 2 {
                    a[i][i - 3] = 0.0;
                }
            }
            for k in mfound..=(nn - 1) {
                if k != mfound {
                    p = a[k][k - 1];
                    q = a[k + 1][k - 1];
                    r = if k != nn - 1 { a[k + 2][k - 1] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s == 0.0 {
                    continue;
                }
                if k == mfound {
                    if l != mfound {
                        a[k][k - 1] = -a[k][k - 1];
                    }
                } else {
                    a[k][k - 1] = -s * x;
                }
                p += s;
                x = p / s;
                y = q / s;
                let z = r / s;
                q /= p;
                r /= p;
                for j in k..=nn {
                    let mut pp = a[k][j] + q * a[k + 1][j];
                    if k != nn - 1 {
                        pp += r * a[k + 2][j];
                        a[k + 2][j] -= pp * z;
                    }
                    a[k + 1][j] -= pp * y;
                    a[k][j] -= pp * x;
                }
                let mmin = if nn < k + 3 { nn } else { k + 3 };
                for i in l..=mmin {
                    let mut pp = x * a[i][k] + y * a[i][k + 1];
                    if k != nn - 1 {
                        pp += z * a[i][k + 2];
                        a[i][k + 2] -= pp * r;
                    }
                    a[i][k + 1] -= pp * q;
                    a[i][k] -= pp;
                }
            }
        }
    }
    Ok((1..=n).map(|i| (wr[i], wi[i])).collect())
}

/// 2D rotation matrix, a recurring test fixture (unimodular spectrum).
pub fn rotation(theta: f64) -> Matrix {
    let (s, c) = theta.sin_cos();
    Matrix::new(2, 2, vec![c, -s, s, c]).unwrap()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "expected {b}, got {a}");
    }

    #[test]
    fn sym_eigen_diagonal() {
        let p = SymmetricForm::diag(&[-1.0, 8.0]);
        let eig = sym_eigen(&p);
        assert_close(eig[0].0, -1.0, 1e-12);
        assert_close(eig[1].0, 8.0, 1e-12);
    }

    #[test]
    fn sym_eigen_identity() {
        let p = SymmetricForm::diag(&[1.0, 1.0, 1.0]);
        for (lambda, _) in sym_eigen(&p) {
            assert_close(lambda, 1.0, 1e-12);
        }
    }

    #[test]
    fn sym_eigen_swap() {
        let p = SymmetricForm::from_entries(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let eig = sym_eigen(&p);
        assert_close(eig[0].0, -1.0, 1e-12);
        assert_close(eig[1].0, 1.0, 1e-12);
    }

    #[test]
    fn sym_eigen_reconstruction() {
        let p = SymmetricForm::from_entries(
            3,
            vec![2.0, -1.0, 0.5, -1.0, 3.0, 1.5, 0.5, 1.5, -2.0],
        )
        .unwrap();
        let eig = sym_eigen(&p);
        let mut recon = Matrix::zeros(3, 3);
        for (lambda, v) in &eig {
            for i in 0..3 {
                for j in 0..3 {
                    recon[(i, j)] += lambda * v[i] * v[j];
                }
            }
        }
        let err = recon.sub(&p.as_matrix()).frobenius();
        assert!(err <= 1e-9 * (1.0 + p.frobenius()), "reconstruction error {err}");
        // orthonormality
        for (i, (_, vi)) in eig.iter().enumerate() {
            for (j, (_, vj)) in eig.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_close(dot(vi, vj), expected, 1e-9);
            }
        }
    }

    #[test]
    fn inertia_examples() {
        let pa = SymmetricForm::diag(&[-1.0, 8.0]);
        let i = inertia(&pa, default_zero_tol(&pa)).unwrap();
        assert_eq!(i, Inertia { neg: 1, zero: 0, pos: 1 });

        let z = SymmetricForm::diag(&[0.0, 0.0]);
        let i = inertia(&z, default_zero_tol(&z)).unwrap();
        assert_eq!(i, Inertia { neg: 0, zero: 2, pos: 0 });

        let pb = SymmetricForm::diag(&[-0.5, 0.25]);
        let i = inertia(&pb, default_zero_tol(&pb)).unwrap();
        assert_eq!(i, Inertia { neg: 1, zero: 0, pos: 1 });
    }

    #[test]
    fn spectrum_triangular() {
        let a1 = Matrix::from_rows(&[vec![1.0, 0.9], vec![0.0, 0.1]]).unwrap();
        let mags = spectrum_magnitudes(&a1).unwrap();
        assert_close(mags[0], 1.0, 1e-12);
        assert_close(mags[1], 0.1, 1e-12);
    }

    #[test]
    fn spectrum_two_cycle_product() {
        // A2*A1 from the bacterial example: roots of l^2 - 1.01 l + 0.01.
        let m = Matrix::from_rows(&[vec![0.1, 0.09], vec![0.9, 0.91]]).unwrap();
        let mags = spectrum_magnitudes(&m).unwrap();
        assert_close(mags[0], 1.0, 1e-9);
        assert_close(mags[1], 0.01, 1e-9);
    }

    #[test]
    fn spectrum_rotation() {
        let mags = spectrum_magnitudes(&rotation(std::f64::consts::FRAC_PI_2)).unwrap();
        assert_close(mags[0], 1.0, 1e-12);
        assert_close(mags[1], 1.0, 1e-12);
    }

    #[test]
    fn hqr_on_4x4() {
        // Block diagonal: eigenvalues 3, -2, 0.5 +- i.
        let a = Matrix::from_rows(&[
            vec![3.0, 1.0, 0.0, 0.0],
            vec![0.0, -2.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.5, -1.0],
            vec![0.0, 0.0, 1.0, 0.5],
        ])
        .unwrap();
        let mut mags = spectrum_magnitudes(&a).unwrap();
        mags.sort_by(|x, y| y.partial_cmp(x).unwrap());
        assert_close(mags[0], 3.0, 1e-8);
        assert_close(mags[1], 2.0, 1e-8);
        assert_close(mags[2], 1.25f64.sqrt(), 1e-8);
        assert_close(mags[3], 1.25f64.sqrt(), 1e-8);
    }

    #[test]
    fn circle_split_examples() {
        let a = Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 0.5]]).unwrap();
        let s = circle_split(&a, CIRCLE_TOL).unwrap();
        assert_eq!(s, CircleSplit { outside: 1, on: 0, inside: 1 });

        let r = rotation(std::f64::consts::FRAC_PI_3);
        let s = circle_split(&r, CIRCLE_TOL).unwrap();
        assert_eq!(s, CircleSplit { outside: 0, on: 2, inside: 0 });

        // A2*A1 scaled by 1/gamma-product 16: spectrum (16, 0.16).
        let m = Matrix::from_rows(&[vec![0.1, 0.09], vec![0.9, 0.91]])
            .unwrap()
            .scale(16.0);
        let s = circle_split(&m, CIRCLE_TOL).unwrap();
        assert_eq!(s, CircleSplit { outside: 1, on: 0, inside: 1 });
    }

    #[test]
    fn stein_closed_form_stable() {
        // diag(a1, a2): p_i = 1/(1 - a_i^2).
        let a = Matrix::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.25]]).unwrap();
        let p = stein_solve(&a).unwrap();
        assert_close(p.get(0, 0), 4.0 / 3.0, 1e-10);
        assert_close(p.get(1, 1), 16.0 / 15.0, 1e-10);
        let i = inertia(&p, default_zero_tol(&p)).unwrap();
        assert_eq!(i, Inertia { neg: 0, zero: 0, pos: 2 });
    }

    #[test]
    fn stein_closed_form_mixed() {
        let a = Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 0.5]]).unwrap();
        let p = stein_solve(&a).unwrap();
        assert_close(p.get(0, 0), -1.0 / 3.0, 1e-10);
        assert_close(p.get(1, 1), 4.0 / 3.0, 1e-10);
        let i = inertia(&p, default_zero_tol(&p)).unwrap();
        assert_eq!(i, Inertia { neg: 1, zero: 0, pos: 1 });
    }

    #[test]
    fn stein_rejects_unimodular() {
        let err = stein_solve(&rotation(std::f64::consts::FRAC_PI_4)).unwrap_err();
        assert!(matches!(err, Error::NoSolution(_)));
    }

    #[test]
    fn symmetric_form_rejects_asymmetry() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(SymmetricForm::new(&m).is_err());
    }

    #[test]
    fn matrix_rejects_nan() {
        assert!(Matrix::new(2, 2, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
    }
}

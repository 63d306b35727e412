//! Sparse symmetric linear algebra: CSR storage, Jacobi-preconditioned
//! conjugate gradients with the relative-residual stopping rule, and dense
//! verification oracles (Cholesky, minimum eigenvalue) for coarse systems.

use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("matrix is not square: {rows} x {cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: matrix is {n}, vector is {len}")]
    DimensionMismatch { n: usize, len: usize },
    #[error("matrix is not symmetric: max |A - A^T| = {0:e}")]
    NotSymmetric(f64),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("non-finite arithmetic encountered during solve")]
    NonFinite,
    #[error("row {row} has no diagonal entry")]
    MissingDiagonal { row: usize },
    #[error("dense oracle refused: size {n} exceeds {max}")]
    TooLargeForOracle { n: usize, max: usize },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// General CSR square matrix; symmetry is a validated property of the
/// assembled systems, not a storage constraint.
#[derive(Debug, Clone)]
pub struct SparseSym {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSym {
    /// Build from (row, col, value) triplets; duplicates are summed in their
    /// original order (stable sort), which keeps assembly deterministic.
    pub fn from_triplets(
        n: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self, SolverError> {
        for &(r, c, _) in &triplets {
            if r >= n || c >= n {
                return Err(SolverError::DimensionMismatch { n, len: r.max(c) + 1 });
            }
        }
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut counts = vec![0usize; n];
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().expect("non-empty") += v;
            } else {
                col_idx.push(c);
                values.push(v);
                counts[r] += 1;
                last = Some((r, c));
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        for r in 0..n {
            row_ptr[r + 1] = row_ptr[r] + counts[r];
        }
        Ok(Self { n, row_ptr, col_idx, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.col_idx[a..b], &self.values[a..b])
    }

    /// y = A x.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(r, yr)| {
            let (cols, vals) = self.row(r);
            let mut acc = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                acc += v * x[*c];
            }
            *yr = acc;
        });
    }

    pub fn diagonal(&self) -> Result<Vec<f64>, SolverError> {
        let mut d = vec![0.0; self.n];
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            match cols.iter().position(|&c| c == r) {
                Some(k) => d[r] = vals[k],
                None => return Err(SolverError::MissingDiagonal { row: r }),
            }
        }
        Ok(d)
    }

    /// max |A_rc - A_cr| over all stored entries.
    pub fn symmetry_error(&self) -> f64 {
        let mut err = 0.0f64;
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                let (tc, tv) = self.row(*c);
                let mirror = match tc.binary_search(&r) {
                    Ok(k) => tv[k],
                    Err(_) => 0.0,
                };
                err = err.max((v - mirror).abs());
            }
        }
        err
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                m[(r, *c)] = *v;
            }
        }
        m
    }

    /// Matrix Market coordinate format (general, 1-based indices).
    pub fn write_matrix_market<W: std::io::Write>(&self, w: &mut W) -> Result<(), SolverError> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.n, self.n, self.nnz())?;
        for r in 0..self.n {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                writeln!(w, "{} {} {:.16e}", r + 1, c + 1, v)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preconditioner {
    None,
    Jacobi,
}

/// Outcome of an iterative solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Preconditioned conjugate gradients from a zero initial guess. Stops when
/// the residual drops below `tol` times the initial residual |b|; exceeding
/// `max_iter` yields a non-converged report, not an error.
pub fn pcg(
    a: &SparseSym,
    b: &[f64],
    precond: Preconditioner,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveReport), SolverError> {
    pcg_impl(a, b, precond, tol, max_iter, None)
}

/// PCG on a consistent singular system with known one-dimensional null
/// space: residual, preconditioned residual and iterates are kept orthogonal
/// to `null_vector`. Used for closed surfaces without reaction term.
pub fn pcg_deflated(
    a: &SparseSym,
    b: &[f64],
    precond: Preconditioner,
    tol: f64,
    max_iter: usize,
    null_vector: &[f64],
) -> Result<(Vec<f64>, SolveReport), SolverError> {
    pcg_impl(a, b, precond, tol, max_iter, Some(null_vector))
}

fn pcg_impl(
    a: &SparseSym,
    b: &[f64],
    precond: Preconditioner,
    tol: f64,
    max_iter: usize,
    deflate: Option<&[f64]>,
) -> Result<(Vec<f64>, SolveReport), SolverError> {
    let n = a.n();
    if b.len() != n {
        return Err(SolverError::DimensionMismatch { n, len: b.len() });
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::NonFinite);
    }
    let project = |v: &mut [f64]| {
        if let Some(w) = deflate {
            let c = dot(v, w) / dot(w, w);
            for (vi, wi) in v.iter_mut().zip(w) {
                *vi -= c * wi;
            }
        }
    };
    let diag_inv: Option<Vec<f64>> = match precond {
        Preconditioner::None => None,
        Preconditioner::Jacobi => {
            let d = a.diagonal()?;
            if d.iter().any(|&v| v == 0.0) {
                return Err(SolverError::NotPositiveDefinite);
            }
            Some(d.iter().map(|v| 1.0 / v).collect())
        }
    };
    let apply_precond = |r: &[f64], z: &mut [f64]| {
        match &diag_inv {
            Some(di) => {
                for i in 0..n {
                    z[i] = di[i] * r[i];
                }
            }
            None => z.copy_from_slice(r),
        }
    };

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    project(&mut r);
    let b_norm = norm(&r);
    if b_norm == 0.0 {
        return Ok((x, SolveReport { iterations: 0, relative_residual: 0.0, converged: true }));
    }
    let mut z = vec![0.0; n];
    apply_precond(&r, &mut z);
    project(&mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];

    for it in 1..=max_iter {
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !pap.is_finite() {
            return Err(SolverError::NonFinite);
        }
        if pap <= 0.0 {
            // indefinite or breakdown; report the current state honestly
            let rel = norm(&r) / b_norm;
            return Ok((x, SolveReport { iterations: it - 1, relative_residual: rel, converged: false }));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        project(&mut r);
        let rel = norm(&r) / b_norm;
        if !rel.is_finite() {
            return Err(SolverError::NonFinite);
        }
        if rel <= tol {
            project(&mut x);
            return Ok((x, SolveReport { iterations: it, relative_residual: rel, converged: true }));
        }
        apply_precond(&r, &mut z);
        project(&mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    project(&mut x);
    let rel = norm(&r) / b_norm;
    Ok((x, SolveReport { iterations: max_iter, relative_residual: rel, converged: false }))
}

/// Default iteration cap: ten times the unknown count.
pub fn default_max_iter(n: usize) -> usize {
    10 * n
}

/// Dense Cholesky solve for verification instances. Fails with a
/// definiteness error when a pivot is non-positive, which doubles as the
/// coercivity probe.
pub fn dense_cholesky(a: &SparseSym, b: &[f64]) -> Result<Vec<f64>, SolverError> {
    let n = a.n();
    if b.len() != n {
        return Err(SolverError::DimensionMismatch { n, len: b.len() });
    }
    let dense = a.to_dense();
    let chol = nalgebra::Cholesky::new(dense).ok_or(SolverError::NotPositiveDefinite)?;
    let mut x = nalgebra::DVector::from_column_slice(b);
    chol.solve_mut(&mut x);
    // one step of iterative refinement tightens the residual to O(eps)
    let mut ax = vec![0.0; n];
    a.matvec(x.as_slice(), &mut ax);
    let res: Vec<f64> = b.iter().zip(&ax).map(|(bi, axi)| bi - axi).collect();
    let mut corr = nalgebra::DVector::from_column_slice(&res);
    chol.solve_mut(&mut corr);
    for i in 0..n {
        x[i] += corr[i];
    }
    Ok(x.as_slice().to_vec())
}

pub const DENSE_ORACLE_MAX: usize = 2000;

/// Smallest eigenvalue of a symmetric matrix, computed on a dense copy.
/// Refuses systems above the oracle size.
pub fn min_eigen_estimate(a: &SparseSym) -> Result<f64, SolverError> {
    let n = a.n();
    if n > DENSE_ORACLE_MAX {
        return Err(SolverError::TooLargeForOracle { n, max: DENSE_ORACLE_MAX });
    }
    let sym_err = a.symmetry_error();
    if sym_err > 1e-10 {
        return Err(SolverError::NotSymmetric(sym_err));
    }
    let dense = a.to_dense();
    // symmetrize exactly to keep the eigensolver happy with 1e-12 noise
    let sym = (&dense + dense.transpose()) * 0.5;
    let eigen = sym.symmetric_eigen();
    Ok(eigen.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity(n: usize) -> SparseSym {
        SparseSym::from_triplets(n, (0..n).map(|i| (i, i, 1.0)).collect()).unwrap()
    }

    #[test]
    fn identity_solves_in_one_iteration() {
        let a = identity(5);
        let b = vec![1.0, -2.0, 3.0, 0.5, 0.0];
        let (x, rep) = pcg(&a, &b, Preconditioner::None, 1e-6, 10).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged);
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-12);
        }
    }

    #[test]
    fn jacobi_on_diagonal_matrix() {
        let a = SparseSym::from_triplets(2, vec![(0, 0, 1.0), (1, 1, 4.0)]).unwrap();
        let (x, rep) = pcg(&a, &[1.0, 1.0], Preconditioner::Jacobi, 1e-6, 10).unwrap();
        assert!(rep.converged);
        assert!((x[0] - 1.0).abs() < 1e-10);
        assert!((x[1] - 0.25).abs() < 1e-10);
    }

    #[test]
    fn triplet_duplicates_are_summed() {
        let a = SparseSym::from_triplets(
            2,
            vec![(0, 0, 1.0), (0, 0, 2.0), (1, 1, 1.0), (0, 1, 0.5), (1, 0, 0.5)],
        )
        .unwrap();
        let (cols, vals) = a.row(0);
        assert_eq!(cols, &[0, 1]);
        assert_eq!(vals, &[3.0, 0.5]);
        assert_eq!(a.nnz(), 4);
        assert_eq!(a.symmetry_error(), 0.0);
    }

    #[test]
    fn hilbert_4x4_against_exact_inverse() {
        // H^{-1} row sums for b = ones: (-4, 60, -180, 140)
        let mut t = Vec::new();
        for i in 0..4usize {
            for j in 0..4usize {
                t.push((i, j, 1.0 / ((i + j + 1) as f64)));
            }
        }
        let a = SparseSym::from_triplets(4, t).unwrap();
        let x = dense_cholesky(&a, &[1.0; 4]).unwrap();
        let expect = [-4.0, 60.0, -180.0, 140.0];
        for (xi, ei) in x.iter().zip(expect) {
            assert!((xi - ei).abs() < 1e-9, "{xi} vs {ei}");
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = SparseSym::from_triplets(2, vec![(0, 0, 1.0), (1, 1, -1.0)]).unwrap();
        assert!(matches!(
            dense_cholesky(&a, &[1.0, 1.0]),
            Err(SolverError::NotPositiveDefinite)
        ));
    }

    #[test]
    fn min_eigen_on_diagonal() {
        let a = SparseSym::from_triplets(2, vec![(0, 0, 3.0), (1, 1, 5.0)]).unwrap();
        assert!((min_eigen_estimate(&a).unwrap() - 3.0).abs() < 1e-12);
        let id = identity(4);
        assert!((min_eigen_estimate(&id).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn min_eigen_refuses_large_systems() {
        let a = identity(2001);
        assert!(matches!(
            min_eigen_estimate(&a),
            Err(SolverError::TooLargeForOracle { .. })
        ));
    }

    #[test]
    fn non_convergence_is_reported_not_fatal() {
        // 1D Laplacian chain, far too few iterations
        let n = 50;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = SparseSym::from_triplets(n, t).unwrap();
        let (_, rep) = pcg(&a, &vec![1.0; n], Preconditioner::Jacobi, 1e-12, 3).unwrap();
        assert!(!rep.converged);
        assert!(rep.relative_residual > 1e-12);
    }

    #[test]
    fn preconditioner_choice_does_not_move_the_solution() {
        let n = 40;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 + (i % 7) as f64));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = SparseSym::from_triplets(n, t).unwrap();
        let b: Vec<f64> = (0..n).map(|i| ((i * 13 + 5) % 11) as f64 - 5.0).collect();
        let (x0, r0) = pcg(&a, &b, Preconditioner::None, 1e-12, 10 * n).unwrap();
        let (x1, r1) = pcg(&a, &b, Preconditioner::Jacobi, 1e-12, 10 * n).unwrap();
        assert!(r0.converged && r1.converged);
        let diff: f64 = x0.iter().zip(&x1).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let scale: f64 = x0.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(diff / scale < 1e-8);
    }

    #[test]
    fn deflated_pcg_solves_singular_consistent_system() {
        // graph Laplacian of a path: kernel = constants
        let n = 20;
        let mut t = Vec::new();
        for i in 0..n {
            let mut d = 0.0;
            if i > 0 {
                t.push((i, i - 1, -1.0));
                d += 1.0;
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                d += 1.0;
            }
            t.push((i, i, d));
        }
        let a = SparseSym::from_triplets(n, t).unwrap();
        let mut b: Vec<f64> = (0..n).map(|i| (i as f64) - 9.5).collect();
        let mean = b.iter().sum::<f64>() / n as f64;
        b.iter_mut().for_each(|v| *v -= mean);
        let ones = vec![1.0; n];
        let (x, rep) =
            pcg_deflated(&a, &b, Preconditioner::Jacobi, 1e-10, 10 * n, &ones).unwrap();
        assert!(rep.converged);
        let mut ax = vec![0.0; n];
        a.matvec(&x, &mut ax);
        let res: f64 = ax.iter().zip(&b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
        assert!(res < 1e-8);
        assert!(x.iter().sum::<f64>().abs() < 1e-8, "solution orthogonal to kernel");
    }

    #[test]
    fn matrix_market_output() {
        let a = SparseSym::from_triplets(2, vec![(0, 0, 1.5), (1, 0, -0.5), (1, 1, 2.0)]).unwrap();
        let mut buf = Vec::new();
        a.write_matrix_market(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real general"));
        assert!(text.contains("2 2 3"));
        assert!(text.contains("2 1 -5.0000000000000000e-1"));
    }
}

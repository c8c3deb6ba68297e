//! Dense complex matrices and the numerical kernels everything else sits on.
//!
//! Matrices are row-major over `Complex64`. The two factorizations are
//! written for accuracy at small sizes rather than speed at large ones:
//! a cyclic complex Jacobi iteration for Hermitian eigendecompositions and a
//! one-sided (Hestenes) Jacobi iteration for singular value decompositions.
//! Both deliver residuals near machine precision, comfortably inside the
//! 1e-10 contracts the rest of the crate relies on.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Convergence threshold for Jacobi sweeps, relative to the matrix scale.
const JACOBI_EPS: f64 = 1e-14;
const MAX_EIG_SWEEPS: usize = 60;
const MAX_SVD_SWEEPS: usize = 60;
/// Columns with norm at or below this are treated as exactly zero in the SVD.
const ZERO_COLUMN_FLOOR: f64 = 1e-300;

// ── vector helpers ──────────────────────────────────────────────────

/// Inner product linear in the first argument: `⟨x, y⟩ = Σ x_i conj(y_i)`.
pub fn inner(x: &[C64], y: &[C64]) -> C64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

pub fn vec_norm(x: &[C64]) -> f64 {
    x.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_sub(x: &[C64], y: &[C64]) -> Vec<C64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

pub fn vec_scale(x: &[C64], s: C64) -> Vec<C64> {
    x.iter().map(|a| a * s).collect()
}

// ── ComplexMatrix ───────────────────────────────────────────────────

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl std::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self.get(r, c);
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, C64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        ComplexMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// Real entries, mostly for tests and worked examples.
    pub fn from_real(rows: &[&[f64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|row| row.iter().map(|&x| C64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, f(r, c));
            }
        }
        m
    }

    pub fn diag(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m.set(i, i, e);
        }
        m
    }

    pub fn real_diag(entries: &[f64]) -> Self {
        Self::diag(&entries.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>())
    }

    pub fn from_columns(cols: &[Vec<C64>]) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, |col| col.len());
        assert!(cols.iter().all(|col| col.len() == r), "ragged columns");
        Self::from_fn(r, c, |i, j| cols[j][i])
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn add_assign_at(&mut self, r: usize, c: usize, v: C64) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c] += v;
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn conjugate(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| self.get(r, c).conj())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scaled(&self, s: C64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn axpy(&mut self, s: C64, other: &Self) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matrix product shape mismatch: {}x{} times {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for c in 0..other.cols {
                    out.data[r * other.cols + c] += a * other.get(k, c);
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        let mut out = vec![C64::new(0.0, 0.0); self.rows];
        for r in 0..self.rows {
            let mut acc = C64::new(0.0, 0.0);
            for c in 0..self.cols {
                acc += self.get(r, c) * v[c];
            }
            out[r] = acc;
        }
        out
    }

    pub fn trace(&self) -> C64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// `max |(M - M*)_{jk}|`; zero for non-square matrices is meaningless,
    /// so this asserts squareness.
    pub fn hermitian_defect(&self) -> f64 {
        assert!(self.is_square());
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for c in r..self.cols {
                let d = (self.get(r, c) - self.get(c, r).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.is_square() && self.hermitian_defect() <= rel_tol * self.max_abs().max(1.0)
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Self) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for r in 0..block.rows {
            for c in 0..block.cols {
                self.set(r0 + r, c0 + c, block.get(r, c));
            }
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols);
        Self::from_fn(rows, cols, |r, c| self.get(r0 + r, c0 + c))
    }

    /// Kronecker product, `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                let a = self.get(r, c);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for rr in 0..other.rows {
                    for cc in 0..other.cols {
                        out.set(
                            r * other.rows + rr,
                            c * other.cols + cc,
                            a * other.get(rr, cc),
                        );
                    }
                }
            }
        }
        out
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(parts: &[&Self]) -> Self {
        let rows = parts.iter().map(|p| p.rows).sum();
        let cols = parts.iter().map(|p| p.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for p in parts {
            out.set_block(r0, c0, p);
            r0 += p.rows;
            c0 += p.cols;
        }
        out
    }

    /// Solve `self * x = b` by Gaussian elimination with partial pivoting.
    /// The matrix must be square and nonsingular to working precision.
    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        assert!(self.is_square());
        assert_eq!(self.rows, b.len());
        let n = self.rows;
        let mut a = self.data.clone();
        let mut x = b.to_vec();
        for k in 0..n {
            let (mut piv, mut best) = (k, a[k * n + k].norm());
            for r in (k + 1)..n {
                let v = a[r * n + k].norm();
                if v > best {
                    piv = r;
                    best = v;
                }
            }
            if best == 0.0 {
                return Err(Error::ContractViolation(
                    "singular matrix in linear solve".into(),
                ));
            }
            if piv != k {
                for c in 0..n {
                    a.swap(k * n + c, piv * n + c);
                }
                x.swap(k, piv);
            }
            let d = a[k * n + k];
            for r in (k + 1)..n {
                let f = a[r * n + k] / d;
                if f.norm_sqr() == 0.0 {
                    continue;
                }
                for c in k..n {
                    let v = a[k * n + c];
                    a[r * n + c] -= f * v;
                }
                let xk = x[k];
                x[r] -= f * xk;
            }
        }
        for k in (0..n).rev() {
            let mut acc = x[k];
            for c in (k + 1)..n {
                acc -= a[k * n + c] * x[c];
            }
            x[k] = acc / a[k * n + k];
        }
        Ok(x)
    }
}

impl std::ops::Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::add(self, rhs)
    }
}

impl std::ops::Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::sub(self, rhs)
    }
}

impl std::ops::Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::mul(self, rhs)
    }
}

// ── Hermitian eigendecomposition ────────────────────────────────────

/// One complex Jacobi rotation zeroing the (p,q) entry of a Hermitian matrix.
///
/// The rotation is the identity except for
/// `U[p,p]=c, U[p,q]=s·e^{iφ}, U[q,p]=-s·e^{-iφ}, U[q,q]=c` where
/// `φ = arg A[p,q]`.
struct Rotation {
    c: f64,
    s: f64,
    phase: C64, // e^{iφ}
}

fn plane_rotation(app: f64, aqq: f64, apq: C64) -> Option<Rotation> {
    let r = apq.norm();
    if r == 0.0 {
        return None;
    }
    let phase = apq / r;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    Some(Rotation { c, s: t * c, phase })
}

fn off_diagonal_frobenius(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut acc = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                acc += a.get(r, c).norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues in nonincreasing order and a unitary matrix whose
/// columns are the matching eigenvectors. Fails if the input is not square,
/// not Hermitian to within the standard contract, or (not observed in
/// practice) the sweeps fail to converge.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !m.is_square() {
        return Err(Error::ContractViolation(format!(
            "hermitian_eig needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_hermitian(1e-12) {
        return Err(Error::ContractViolation(format!(
            "hermitian_eig: Hermitian defect {:.3e} exceeds 1e-12 relative",
            m.hermitian_defect()
        )));
    }
    let n = m.rows();
    if n == 0 {
        return Ok((vec![], ComplexMatrix::zeros(0, 0)));
    }
    // Work on the exactly-Hermitian part; the defect is within contract.
    let mut a = ComplexMatrix::from_fn(n, n, |r, c| {
        (m.get(r, c) + m.get(c, r).conj()) * C64::new(0.5, 0.0)
    });
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);

    let mut converged = false;
    for _ in 0..MAX_EIG_SWEEPS {
        if off_diagonal_frobenius(&a) <= JACOBI_EPS * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq.norm() <= JACOBI_EPS * scale / (n as f64) {
                    continue;
                }
                let rot = match plane_rotation(a.get(p, p).re, a.get(q, q).re, apq) {
                    Some(r) => r,
                    None => continue,
                };
                apply_rotation_two_sided(&mut a, p, q, &rot);
                apply_rotation_columns(&mut v, p, q, &rot);
            }
        }
    }
    if !converged && off_diagonal_frobenius(&a) > JACOBI_EPS * scale * 10.0 {
        return Err(Error::Convergence {
            residual: off_diagonal_frobenius(&a) / scale,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let vals: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    order.sort_by(|&i, &j| vals[j].partial_cmp(&vals[i]).unwrap());
    let sorted_vals: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let sorted_vecs =
        ComplexMatrix::from_fn(n, n, |r, c| v.get(r, order[c]));
    Ok((sorted_vals, sorted_vecs))
}

/// `A ← U* A U` for the plane rotation at (p,q).
fn apply_rotation_two_sided(a: &mut ComplexMatrix, p: usize, q: usize, rot: &Rotation) {
    let n = a.rows();
    let (c, s, ph) = (rot.c, rot.s, rot.phase);
    // Column update: A ← A U.
    for r in 0..n {
        let arp = a.get(r, p);
        let arq = a.get(r, q);
        a.set(r, p, arp * c - arq * (s * ph.conj()));
        a.set(r, q, arp * (s * ph) + arq * c);
    }
    // Row update: A ← U* A.
    for col in 0..n {
        let apc = a.get(p, col);
        let aqc = a.get(q, col);
        a.set(p, col, apc * c - aqc * (s * ph));
        a.set(q, col, apc * (s * ph.conj()) + aqc * c);
    }
    // Clean the rotated pair so roundoff does not accumulate there.
    let pq = a.get(p, q);
    let qp = a.get(q, p);
    let avg = (pq + qp.conj()) * C64::new(0.5, 0.0);
    a.set(p, q, avg);
    a.set(q, p, avg.conj());
}

/// `V ← V U` (columns p and q mix).
fn apply_rotation_columns(v: &mut ComplexMatrix, p: usize, q: usize, rot: &Rotation) {
    let n = v.rows();
    let (c, s, ph) = (rot.c, rot.s, rot.phase);
    for r in 0..n {
        let vrp = v.get(r, p);
        let vrq = v.get(r, q);
        v.set(r, p, vrp * c - vrq * (s * ph.conj()));
        v.set(r, q, vrp * (s * ph) + vrq * c);
    }
}

// ── singular value decomposition ────────────────────────────────────

/// Thin SVD: `M = left · diag(singular_values) · right*`, with
/// `left: rows×k`, `right: cols×k`, `k = min(rows, cols)`, singular values
/// in nonincreasing order.
#[derive(Clone, Debug)]
pub struct SingularDecomposition {
    pub left: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub right: ComplexMatrix,
}

impl SingularDecomposition {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let k = self.singular_values.len();
        let mut scaled = self.left.clone();
        for c in 0..k {
            for r in 0..scaled.rows() {
                let v = scaled.get(r, c) * self.singular_values[c];
                scaled.set(r, c, v);
            }
        }
        scaled.mul(&self.right.adjoint())
    }

    pub fn residual(&self, m: &ComplexMatrix) -> f64 {
        self.reconstruct().sub(m).max_abs()
    }

    /// Numerical rank with a cutoff relative to the largest singular value.
    pub fn rank(&self, rel_cutoff: f64) -> usize {
        let top = self.singular_values.first().copied().unwrap_or(0.0);
        if top <= ZERO_COLUMN_FLOOR {
            return 0;
        }
        self.singular_values
            .iter()
            .take_while(|&&s| s > rel_cutoff * top)
            .count()
    }
}

/// One-sided Jacobi SVD. Always converges at these sizes; the error path is
/// kept for honesty about the sweep cap.
pub fn svd(m: &ComplexMatrix) -> Result<SingularDecomposition> {
    if m.rows() < m.cols() {
        let t = svd(&m.adjoint())?;
        return Ok(SingularDecomposition {
            left: t.right,
            singular_values: t.singular_values,
            right: t.left,
        });
    }
    let (rows, cols) = (m.rows(), m.cols());
    if cols == 0 {
        return Ok(SingularDecomposition {
            left: ComplexMatrix::zeros(rows, 0),
            singular_values: vec![],
            right: ComplexMatrix::zeros(0, 0),
        });
    }

    // Work columns of M; V accumulates the right rotations.
    let mut work: Vec<Vec<C64>> = (0..cols).map(|j| m.column(j)).collect();
    let mut v = ComplexMatrix::identity(cols);

    let mut converged = false;
    let mut worst_ratio = 0.0f64;
    for _ in 0..MAX_SVD_SWEEPS {
        let mut rotated = false;
        worst_ratio = 0.0;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let alpha = vec_norm(&work[p]).powi(2);
                let beta = vec_norm(&work[q]).powi(2);
                if alpha <= ZERO_COLUMN_FLOOR || beta <= ZERO_COLUMN_FLOOR {
                    continue;
                }
                // gamma = ⟨m_q, m_p⟩ = m_p* m_q, the (p,q) Gram entry.
                let gamma = inner(&work[q], &work[p]);
                let ratio = gamma.norm() / (alpha * beta).sqrt();
                worst_ratio = worst_ratio.max(ratio);
                if ratio <= JACOBI_EPS {
                    continue;
                }
                let rot = match plane_rotation(alpha, beta, gamma) {
                    Some(r) => r,
                    None => continue,
                };
                rotated = true;
                let (c, s, ph) = (rot.c, rot.s, rot.phase);
                for r in 0..rows {
                    let mp = work[p][r];
                    let mq = work[q][r];
                    work[p][r] = mp * c - mq * (s * ph.conj());
                    work[q][r] = mp * (s * ph) + mq * c;
                }
                apply_rotation_columns(&mut v, p, q, &rot);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged && worst_ratio > JACOBI_EPS * 100.0 {
        return Err(Error::Convergence {
            residual: worst_ratio,
        });
    }

    let mut sigma: Vec<f64> = work.iter().map(|col| vec_norm(col)).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap());
    let sorted_sigma: Vec<f64> = order.iter().map(|&i| sigma[i]).collect();
    sigma = sorted_sigma;

    let mut left_cols: Vec<Vec<C64>> = Vec::with_capacity(cols);
    for (slot, &j) in order.iter().enumerate() {
        if sigma[slot] > ZERO_COLUMN_FLOOR {
            left_cols.push(vec_scale(&work[j], C64::new(1.0 / sigma[slot], 0.0)));
        } else {
            left_cols.push(vec![C64::new(0.0, 0.0); rows]); // filled below
        }
    }
    complete_orthonormal(&mut left_cols, rows);

    let right = ComplexMatrix::from_fn(cols, cols, |r, c| v.get(r, order[c]));
    Ok(SingularDecomposition {
        left: ComplexMatrix::from_columns(&left_cols),
        singular_values: sigma,
        right,
    })
}

/// Replace zero columns with vectors orthonormal to the rest (Gram-Schmidt
/// against canonical basis candidates, applied twice for stability).
fn complete_orthonormal(cols: &mut [Vec<C64>], dim: usize) {
    for j in 0..cols.len() {
        if vec_norm(&cols[j]) > 0.5 {
            continue;
        }
        let mut found = false;
        for cand in 0..dim {
            let mut w = vec![C64::new(0.0, 0.0); dim];
            w[cand] = C64::new(1.0, 0.0);
            for _ in 0..2 {
                for (k, col) in cols.iter().enumerate() {
                    if k == j || vec_norm(col) < 0.5 {
                        continue;
                    }
                    let coeff = inner(&w, col);
                    for (wi, ci) in w.iter_mut().zip(col) {
                        *wi -= coeff * ci;
                    }
                }
            }
            let nrm = vec_norm(&w);
            if nrm > 0.3 {
                cols[j] = vec_scale(&w, C64::new(1.0 / nrm, 0.0));
                found = true;
                break;
            }
        }
        assert!(found, "failed to complete an orthonormal set");
    }
}

/// Largest singular value; 0 for empty matrices.
pub fn spectral_norm(m: &ComplexMatrix) -> f64 {
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    svd(m)
        .expect("svd convergence")
        .singular_values
        .first()
        .copied()
        .unwrap_or(0.0)
}

/// Sum of singular values; 0 for empty matrices.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    svd(m).expect("svd convergence").singular_values.iter().sum()
}

// ── orthonormalization and positivity helpers ───────────────────────

/// Orthonormal basis of the span of `vectors`, by SVD with a singular-value
/// cutoff relative to the largest one. An empty input or all-zero vectors
/// give an empty basis.
pub fn orthonormalize(vectors: &[Vec<C64>], rel_cutoff: f64) -> Vec<Vec<C64>> {
    if vectors.is_empty() {
        return vec![];
    }
    let dim = vectors[0].len();
    assert!(vectors.iter().all(|v| v.len() == dim), "mixed dimensions");
    if dim == 0 {
        return vec![];
    }
    let m = ComplexMatrix::from_columns(vectors);
    let fact = svd(&m).expect("svd convergence");
    let rank = fact.rank(rel_cutoff);
    (0..rank).map(|j| fact.left.column(j)).collect()
}

/// Max pairwise deviation of `⟨v_i, v_j⟩` from the identity Gram matrix.
pub fn orthonormality_defect(vectors: &[Vec<C64>]) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate() {
            let g = inner(a, b);
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((g - target).norm());
        }
    }
    worst
}

/// Attempt a Cholesky factorization of `m + shift·I`; `Ok` means the shifted
/// matrix is positive semidefinite to working precision.
pub fn cholesky_shifted(m: &ComplexMatrix, shift: f64) -> std::result::Result<(), f64> {
    assert!(m.is_square());
    let n = m.rows();
    let mut a = m.data.to_vec();
    for i in 0..n {
        a[i * n + i] += C64::new(shift, 0.0);
    }
    for k in 0..n {
        let mut d = a[k * n + k].re;
        for j in 0..k {
            d -= a[k * n + j].norm_sqr();
        }
        if d <= 0.0 {
            return Err(d);
        }
        let d = d.sqrt();
        a[k * n + k] = C64::new(d, 0.0);
        for r in (k + 1)..n {
            let mut acc = a[r * n + k];
            for j in 0..k {
                acc -= a[r * n + j] * a[k * n + j].conj();
            }
            a[r * n + k] = acc / d;
        }
    }
    Ok(())
}

/// Minimum eigenvalue of a Hermitian matrix. Small matrices go through the
/// Jacobi eigensolver; larger ones are bracketed by bisection on shifted
/// Cholesky factorizations.
pub fn hermitian_min_eig(m: &ComplexMatrix) -> Result<f64> {
    assert!(m.is_square());
    let n = m.rows();
    if n == 0 {
        return Ok(0.0);
    }
    if n <= 160 {
        let (vals, _) = hermitian_eig(m)?;
        return Ok(*vals.last().unwrap());
    }
    let scale = m.frobenius_norm().max(1e-300);
    let (mut lo, mut hi) = (-scale, scale);
    // Invariant: min_eig > lo, min_eig <= hi.
    if cholesky_shifted(m, -hi).is_ok() {
        return Ok(hi);
    }
    while hi - lo > 1e-12 * scale.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if cholesky_shifted(m, -mid).is_ok() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

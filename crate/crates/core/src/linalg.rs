//! Dense complex vectors and matrices, plus the Hermitian eigen-solver the
//! beamforming routines are built on.
//!
//! Matrices are small (at most a few hundred entries per side), so everything
//! is stored row-major in a flat `Vec` and implemented directly.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

pub type C64 = Complex64;

/// Relative threshold below which an entry counts as zero when choosing the
/// reference entry for phase canonicalization.
const PHASE_REF_REL_TOL: f64 = 1e-9;

/// Column vector in `C^n`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexVector(Vec<C64>);

impl ComplexVector {
    pub fn new(data: Vec<C64>) -> Self {
        Self(data)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![C64::new(0.0, 0.0); n])
    }

    /// The `i`-th standard basis vector of `C^n`.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[i] = C64::new(1.0, 0.0);
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, C64> {
        self.0.iter()
    }

    pub fn into_inner(self) -> Vec<C64> {
        self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Inner product `selfᴴ other`.
    pub fn dot(&self, other: &ComplexVector) -> C64 {
        debug_assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scale(&self, s: C64) -> ComplexVector {
        ComplexVector(self.0.iter().map(|z| z * s).collect())
    }

    pub fn scale_real(&self, s: f64) -> ComplexVector {
        ComplexVector(self.0.iter().map(|z| z * s).collect())
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: C64, other: &ComplexVector) {
        debug_assert_eq!(self.len(), other.len());
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += s * b;
        }
    }

    /// Unit-norm copy; `None` for the zero vector.
    pub fn normalized(&self) -> Option<ComplexVector> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self.scale_real(1.0 / n))
        } else {
            None
        }
    }

    /// Rotates the global phase so the first non-negligible entry is real and
    /// positive. Eigenvectors and singular vectors are only defined up to a
    /// unit phase; this picks one representative deterministically.
    pub fn canonicalize_phase(&mut self) {
        let max = self.0.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
        if max == 0.0 {
            return;
        }
        if let Some(r) = self.0.iter().find(|z| z.norm() > PHASE_REF_REL_TOL * max) {
            let rot = r.conj() / r.norm();
            for z in &mut self.0 {
                *z *= rot;
            }
        }
    }

    pub fn canonical(mut self) -> Self {
        self.canonicalize_phase();
        self
    }
}

impl Index<usize> for ComplexVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for ComplexVector {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.0[i]
    }
}

impl fmt::Debug for ComplexVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl FromIterator<C64> for ComplexVector {
    fn from_iter<I: IntoIterator<Item = C64>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(SimError::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// `s * u vᴴ`
    pub fn outer(u: &ComplexVector, v: &ComplexVector, s: C64) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| s * u[i] * v[j].conj())
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

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    /// `self += s * u vᴴ`
    pub fn add_outer(&mut self, s: C64, u: &ComplexVector, v: &ComplexVector) {
        debug_assert_eq!(u.len(), self.rows);
        debug_assert_eq!(v.len(), self.cols);
        for i in 0..self.rows {
            let su = s * u[i];
            let row = &mut self.data[i * self.cols..(i + 1) * self.cols];
            for (x, vj) in row.iter_mut().zip(v.iter()) {
                *x += su * vj.conj();
            }
        }
    }

    pub fn add_assign(&mut self, other: &ComplexMatrix) {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> ComplexMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// `self * x`
    pub fn mul_vec(&self, x: &ComplexVector) -> ComplexVector {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(x.iter())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `selfᴴ x`
    pub fn adjoint_mul_vec(&self, x: &ComplexVector) -> ComplexVector {
        debug_assert_eq!(x.len(), self.rows);
        let mut out = ComplexVector::zeros(self.cols);
        for i in 0..self.rows {
            let xi = x[i];
            for j in 0..self.cols {
                out[j] += self.data[i * self.cols + j].conj() * xi;
            }
        }
        out
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        debug_assert_eq!(self.cols, other.rows);
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        out
    }

    /// `selfᴴ self` (cols × cols).
    pub fn gram_cols(&self) -> ComplexMatrix {
        self.adjoint().matmul(self)
    }

    /// `self selfᴴ` (rows × rows).
    pub fn gram_rows(&self) -> ComplexMatrix {
        self.matmul(&self.adjoint())
    }

    pub fn column(&self, j: usize) -> ComplexVector {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// `‖A − Aᴴ‖_F / ‖A‖_F`, zero for the zero matrix.
    pub fn hermitian_asymmetry(&self) -> f64 {
        let norm = self.frobenius_norm();
        if norm == 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt() / norm
    }

    /// `(A + Aᴴ) / 2`
    pub fn hermitian_part(&self) -> ComplexMatrix {
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[i * self.cols..(i + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

/// Full eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues in the order of `vectors`' columns (unsorted).
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are eigenvectors.
    pub vectors: ComplexMatrix,
    pub sweeps: usize,
}

/// Cyclic complex Jacobi eigen-decomposition.
///
/// `a` must already be Hermitian; only its Hermitian part is used. Each
/// rotation zeroes one off-diagonal pair with a unitary plane rotation, so the
/// method is insensitive to indefiniteness and to small spectral gaps.
pub fn jacobi_eigen(a: &ComplexMatrix, max_sweeps: usize) -> Result<HermitianEigen> {
    if !a.is_square() {
        return Err(SimError::Dimension(format!(
            "eigen-decomposition of a {}x{} matrix",
            a.rows, a.cols
        )));
    }
    let n = a.rows;
    let mut m = a.hermitian_part();
    for i in 0..n {
        m[(i, i)] = C64::new(m[(i, i)].re, 0.0);
    }
    let mut v = ComplexMatrix::identity(n);
    let scale = m.frobenius_norm();
    if scale == 0.0 || n == 1 {
        return Ok(HermitianEigen {
            values: (0..n).map(|i| m[(i, i)].re).collect(),
            vectors: v,
            sweeps: 0,
        });
    }
    let target = (f64::EPSILON * scale).powi(2) * 1e-2;

    let mut sweeps = 0;
    loop {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum();
        if off <= target {
            break;
        }
        if sweeps >= max_sweeps {
            return Err(SimError::NonConvergence {
                iterations: sweeps,
                residual: off.sqrt() / scale,
            });
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }

    Ok(HermitianEigen {
        values: (0..n).map(|i| m[(i, i)].re).collect(),
        vectors: v,
        sweeps,
    })
}

/// Applies the Jacobi rotation annihilating `m[p][q]`, accumulating into `v`.
fn rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let n = m.rows;
    let beta = m[(p, q)];
    let abs_beta = beta.norm();
    if abs_beta == 0.0 {
        return;
    }
    let alpha = m[(p, p)].re;
    let gamma = m[(q, q)].re;
    // e^{-iφ} with β = |β| e^{iφ}
    let phase = beta.conj() / abs_beta;

    let theta = (gamma - alpha) / (2.0 * abs_beta);
    let t = if theta.is_infinite() {
        0.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    if t == 0.0 {
        // |β| negligible against the diagonal gap.
        m[(p, q)] = C64::new(0.0, 0.0);
        m[(q, p)] = C64::new(0.0, 0.0);
        return;
    }
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // G = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] on the (p, q) plane; m ← Gᴴ m G.
    let g_qp = -phase * s;
    let g_qq = phase * c;

    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * c + mkq * g_qp;
        m[(k, q)] = mkp * s + mkq * g_qq;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = mpk * c + mqk * g_qp.conj();
        m[(q, k)] = mpk * s + mqk * g_qq.conj();
    }
    m[(p, q)] = C64::new(0.0, 0.0);
    m[(q, p)] = C64::new(0.0, 0.0);
    m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = C64::new(m[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c + vkq * g_qp;
        v[(k, q)] = vkp * s + vkq * g_qq;
    }
}

/// Orthonormal basis for the span of `vectors` by modified Gram–Schmidt with
/// one re-orthogonalization pass.
///
/// A vector is dropped when less than `rel_tol` of its norm survives
/// projection onto the basis built so far.
pub fn orthonormal_basis<'a>(
    vectors: impl IntoIterator<Item = &'a ComplexVector>,
    rel_tol: f64,
) -> Vec<ComplexVector> {
    let mut basis: Vec<ComplexVector> = Vec::new();
    for v in vectors {
        let n0 = v.norm();
        if n0 == 0.0 {
            continue;
        }
        let dim = v.len();
        if basis.len() == dim {
            break;
        }
        let mut r = v.clone();
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&r);
                r.axpy(-c, q);
            }
        }
        let nr = r.norm();
        if nr > rel_tol * n0 {
            basis.push(r.scale_real(1.0 / nr));
        }
    }
    basis
}

/// A Hermitian operator held as a weighted sum of rank-one terms
/// `Σ_k w_k u_k u_kᴴ`, with real (possibly negative) weights.
#[derive(Debug, Clone, Default)]
pub struct LowRankHermitian {
    dim: usize,
    terms: Vec<(f64, ComplexVector)>,
}

impl LowRankHermitian {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            terms: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn push(&mut self, weight: f64, u: ComplexVector) -> Result<()> {
        if u.len() != self.dim {
            return Err(SimError::Dimension(format!(
                "rank-one term of length {} in a {}-dimensional operator",
                u.len(),
                self.dim
            )));
        }
        self.terms.push((weight, u));
        Ok(())
    }

    pub fn terms(&self) -> &[(f64, ComplexVector)] {
        &self.terms
    }

    pub fn dense(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim, self.dim);
        for (w, u) in &self.terms {
            m.add_outer(C64::new(*w, 0.0), u, u);
        }
        m
    }

    pub fn apply(&self, x: &ComplexVector) -> ComplexVector {
        let mut out = ComplexVector::zeros(self.dim);
        for (w, u) in &self.terms {
            let c = u.dot(x) * *w;
            out.axpy(c, u);
        }
        out
    }

    /// `Qᴴ M Q` for an orthonormal basis `Q`.
    pub fn project(&self, basis: &[ComplexVector]) -> ComplexMatrix {
        let k = basis.len();
        let coords: Vec<Vec<C64>> = self
            .terms
            .iter()
            .map(|(_, u)| basis.iter().map(|q| q.dot(u)).collect())
            .collect();
        let mut m = ComplexMatrix::zeros(k, k);
        for ((w, _), c) in self.terms.iter().zip(&coords) {
            for i in 0..k {
                let ci = c[i] * *w;
                for j in 0..k {
                    m[(i, j)] += ci * c[j].conj();
                }
            }
        }
        m
    }
}

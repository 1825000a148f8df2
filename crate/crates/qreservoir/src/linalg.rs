//! Dense complex linear algebra for truncated Fock spaces.
//!
//! Everything here is dimension-explicit, row-major, and dense. At the
//! dimensions this crate targets (<= 200) dense kernels beat any sparse
//! cleverness while staying easy to verify, so the module provides just
//! what the physics needs: a complex matrix type with a fast multiply,
//! a Jacobi eigensolver for Hermitian matrices, a scaled-and-squared
//! matrix exponential, and a PSD square root.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{Scalar, C};

/// Square complex matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat<T> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> CMat<T> {
    pub fn zeros(n: usize) -> Self {
        CMat { n, data: vec![Complex::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex::one();
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_diag(diag: &[C<T>]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n);
        for (i, d) in diag.iter().enumerate() {
            m.data[i * n + i] = *d;
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C<T> {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C<T>) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn data(&self) -> &[C<T>] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [C<T>] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[C<T>] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    fn assert_same_dim(&self, other: &Self) {
        assert_eq!(self.n, other.n, "matrix dimension mismatch: {} vs {}", self.n, other.n);
    }

    /// Matrix product via a split real/imaginary kernel: four real GEMMs
    /// keep the inner loops free of complex-multiply shuffles and let the
    /// compiler vectorize them.
    pub fn matmul(&self, rhs: &Self) -> Self {
        self.assert_same_dim(rhs);
        let n = self.n;
        let (ar, ai) = split_parts(&self.data);
        let (br, bi) = split_parts(&rhs.data);
        let mut cr = vec![T::zero(); n * n];
        let mut ci = vec![T::zero(); n * n];
        real_gemm::<T, false>(n, &ar, &br, &mut cr);
        real_gemm::<T, true>(n, &ai, &bi, &mut cr);
        real_gemm::<T, false>(n, &ar, &bi, &mut ci);
        real_gemm::<T, false>(n, &ai, &br, &mut ci);
        CMat { n, data: join_parts(&cr, &ci) }
    }

    /// Matrix-vector product.
    pub fn matvec(&self, v: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(v.len(), self.n, "vector length mismatch");
        let mut out = vec![Complex::zero(); self.n];
        for i in 0..self.n {
            let mut acc = Complex::zero();
            for (a, x) in self.row(i).iter().zip(v) {
                acc += *a * *x;
            }
            out[i] = acc;
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.assert_same_dim(rhs);
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| *a + *b).collect();
        CMat { n: self.n, data }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.assert_same_dim(rhs);
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| *a - *b).collect();
        CMat { n: self.n, data }
    }

    pub fn scale(&self, c: C<T>) -> Self {
        let data = self.data.iter().map(|a| *a * c).collect();
        CMat { n: self.n, data }
    }

    /// self += c * rhs, without allocating.
    pub fn add_scaled_assign(&mut self, rhs: &Self, c: C<T>) {
        self.assert_same_dim(rhs);
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += *b * c;
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C<T> {
        let mut t = Complex::zero();
        for i in 0..self.n {
            t += self.data[i * self.n + i];
        }
        t
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// Maximum absolute column sum; cheap upper bound on the spectral
    /// radius, used to pick the scaling for the matrix exponential.
    pub fn one_norm(&self) -> T {
        let n = self.n;
        let mut best = T::zero();
        for j in 0..n {
            let mut s = T::zero();
            for i in 0..n {
                s += self.data[i * n + j].norm();
            }
            best = best.max(s);
        }
        best
    }

    /// Max entrywise |A - A^dagger|.
    pub fn hermiticity_defect(&self) -> T {
        let n = self.n;
        let mut worst = T::zero();
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
    /// rotations. Eigenvalues ascend; `vectors` holds the corresponding
    /// orthonormal eigenvectors as columns.
    pub fn hermitian_eigen(&self) -> Result<HermitianEigen<T>> {
        let n = self.n;
        let mut a = self.clone();
        let mut v = Self::identity(n);
        if n == 1 {
            return Ok(HermitianEigen { values: vec![a.data[0].re], vectors: v });
        }
        let scale = self.frobenius_norm().max(T::one());
        let stop = T::of(1e-14) * scale;
        let max_sweeps = 60;
        let mut converged = false;
        for _ in 0..max_sweeps {
            let mut off = T::zero();
            for i in 0..n {
                for j in (i + 1)..n {
                    off += a.data[i * n + j].norm_sqr();
                }
            }
            if off.sqrt() * T::of(std::f64::consts::SQRT_2) < stop {
                converged = true;
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    jacobi_rotate(&mut a, &mut v, p, q);
                }
            }
        }
        if !converged {
            // One final check: the sweep loop may have converged on its
            // last pass without re-entering the test above.
            let mut off = T::zero();
            for i in 0..n {
                for j in (i + 1)..n {
                    off += a.data[i * n + j].norm_sqr();
                }
            }
            if off.sqrt() * T::of(std::f64::consts::SQRT_2) >= stop {
                return Err(Error::Numeric(format!(
                    "jacobi eigensolver did not converge in {max_sweeps} sweeps (off-diagonal {})",
                    off.sqrt().as_f64()
                )));
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        let diag: Vec<T> = (0..n).map(|i| a.data[i * n + i].re).collect();
        order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).expect("non-NaN eigenvalues"));
        let values: Vec<T> = order.iter().map(|&i| diag[i]).collect();
        let mut vectors = Self::zeros(n);
        for (new_col, &old_col) in order.iter().enumerate() {
            for row in 0..n {
                vectors.data[row * n + new_col] = v.data[row * n + old_col];
            }
        }
        Ok(HermitianEigen { values, vectors })
    }

    /// Matrix exponential by scaling and squaring around a short Taylor
    /// series. The scaling brings the 1-norm below 1/2, where the series
    /// converges to machine precision in ~20 terms.
    pub fn expm(&self) -> Self {
        let n = self.n;
        let norm = self.one_norm();
        let mut s = 0u32;
        let mut scaled = self.clone();
        if norm > T::of(0.5) {
            let ratio = (norm / T::of(0.5)).log2().ceil();
            s = ratio.as_f64() as u32;
            let factor = Complex::new(T::of(0.5f64.powi(s as i32)), T::zero());
            scaled = self.scale(factor);
        }
        let mut result = Self::identity(n);
        let mut term = Self::identity(n);
        for k in 1..=30 {
            term = term.matmul(&scaled);
            let inv_k = Complex::new(T::one() / T::of(k as f64), T::zero());
            term = term.scale(inv_k);
            result = result.add(&term);
            if term.frobenius_norm() < T::of(1e-20) * result.frobenius_norm().max(T::one()) {
                break;
            }
        }
        for _ in 0..s {
            result = result.matmul(&result);
        }
        result
    }

    /// Square root of a positive semidefinite Hermitian matrix. Small
    /// negative eigenvalues down to `-gate` are clamped to zero; anything
    /// below that is rejected as an invalid state.
    pub fn sqrt_psd(&self, gate: T) -> Result<Self> {
        let eig = self.hermitian_eigen()?;
        let n = self.n;
        if let Some(min) = eig.values.first() {
            if *min < -gate {
                return Err(Error::InvalidState(format!(
                    "matrix is not positive semidefinite: min eigenvalue {}",
                    min.as_f64()
                )));
            }
        }
        let roots: Vec<C<T>> = eig
            .values
            .iter()
            .map(|&l| Complex::new(l.max(T::zero()).sqrt(), T::zero()))
            .collect();
        // V sqrt(D) V^dagger
        let v = eig.vectors;
        let mut vd = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                vd.data[i * n + j] = v.data[i * n + j] * roots[j];
            }
        }
        Ok(vd.matmul(&v.adjoint()))
    }
}

/// Eigenvalues (ascending) and eigenvector columns of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T> {
    pub values: Vec<T>,
    pub vectors: CMat<T>,
}

impl<T: Scalar> HermitianEigen<T> {
    /// Eigenvector for the i-th eigenvalue.
    pub fn vector(&self, i: usize) -> Vec<C<T>> {
        let n = self.vectors.dim();
        (0..n).map(|row| self.vectors.get(row, i)).collect()
    }
}

fn split_parts<T: Scalar>(data: &[Complex<T>]) -> (Vec<T>, Vec<T>) {
    let mut re = Vec::with_capacity(data.len());
    let mut im = Vec::with_capacity(data.len());
    for z in data {
        re.push(z.re);
        im.push(z.im);
    }
    (re, im)
}

fn join_parts<T: Scalar>(re: &[T], im: &[T]) -> Vec<Complex<T>> {
    re.iter().zip(im).map(|(&r, &i)| Complex::new(r, i)).collect()
}

/// c (+|-)= a * b for real row-major square matrices, i-k-j order with
/// two-row blocking. The zipped inner loops are what the optimizer turns
/// into SIMD; keep them free of indexing arithmetic.
fn real_gemm<T: Scalar, const SUB: bool>(n: usize, a: &[T], b: &[T], c: &mut [T]) {
    let mut i = 0;
    while i + 1 < n {
        let (head, tail) = c.split_at_mut((i + 1) * n);
        let c0 = &mut head[i * n..];
        let c1 = &mut tail[..n];
        for k in 0..n {
            let a0 = a[i * n + k];
            let a1 = a[(i + 1) * n + k];
            let brow = &b[k * n..k * n + n];
            if SUB {
                for (cj, bj) in c0.iter_mut().zip(brow) {
                    *cj = *cj - a0 * *bj;
                }
                for (cj, bj) in c1.iter_mut().zip(brow) {
                    *cj = *cj - a1 * *bj;
                }
            } else {
                for (cj, bj) in c0.iter_mut().zip(brow) {
                    *cj = *cj + a0 * *bj;
                }
                for (cj, bj) in c1.iter_mut().zip(brow) {
                    *cj = *cj + a1 * *bj;
                }
            }
        }
        i += 2;
    }
    if i < n {
        let c0 = &mut c[i * n..(i + 1) * n];
        for k in 0..n {
            let a0 = a[i * n + k];
            let brow = &b[k * n..k * n + n];
            if SUB {
                for (cj, bj) in c0.iter_mut().zip(brow) {
                    *cj = *cj - a0 * *bj;
                }
            } else {
                for (cj, bj) in c0.iter_mut().zip(brow) {
                    *cj = *cj + a0 * *bj;
                }
            }
        }
    }
}

/// One two-sided Jacobi rotation zeroing the (p, q) entry of Hermitian a,
/// accumulating the rotation into v.
fn jacobi_rotate<T: Scalar>(a: &mut CMat<T>, v: &mut CMat<T>, p: usize, q: usize) {
    let n = a.n;
    let apq = a.data[p * n + q];
    let d = apq.norm();
    if d == T::zero() {
        return;
    }
    let app = a.data[p * n + p].re;
    let aqq = a.data[q * n + q].re;
    // Componentwise division: apq / Complex(d) squares d internally and
    // underflows to NaN for subnormal pivots.
    let phase = Complex::new(apq.re / d, apq.im / d);
    let tau = (aqq - app) / (T::of(2.0) * d);
    let t = if tau >= T::zero() {
        T::one() / (tau + (T::one() + tau * tau).sqrt())
    } else {
        -T::one() / (-tau + (T::one() + tau * tau).sqrt())
    };
    let cth = T::one() / (T::one() + t * t).sqrt();
    let sth = t * cth;
    let c = Complex::new(cth, T::zero());
    let s_p = phase * Complex::new(sth, T::zero()); // s * e^{i phi}
    let s_m = s_p.conj();

    // Columns p and q: A <- A U with U = [[c, s_p], [-s_m, c]] acting on (p, q).
    for row in 0..n {
        let ap = a.data[row * n + p];
        let aq = a.data[row * n + q];
        a.data[row * n + p] = ap * c - aq * s_m;
        a.data[row * n + q] = ap * s_p + aq * c;
    }
    // Rows p and q: A <- U^dagger A.
    for col in 0..n {
        let ap = a.data[p * n + col];
        let aq = a.data[q * n + col];
        a.data[p * n + col] = ap * c - aq * s_p;
        a.data[q * n + col] = ap * s_m + aq * c;
    }
    // Clean the rotated pivot pair: exact zeros keep the off-diagonal
    // norm estimate honest.
    a.data[p * n + q] = Complex::zero();
    a.data[q * n + p] = Complex::zero();
    let diag_p = a.data[p * n + p];
    let diag_q = a.data[q * n + q];
    a.data[p * n + p] = Complex::new(diag_p.re, T::zero());
    a.data[q * n + q] = Complex::new(diag_q.re, T::zero());

    for row in 0..n {
        let vp = v.data[row * n + p];
        let vq = v.data[row * n + q];
        v.data[row * n + p] = vp * c - vq * s_m;
        v.data[row * n + q] = vp * s_p + vq * c;
    }
}

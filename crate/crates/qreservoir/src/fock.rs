//! Truncated Fock-space states and operators.
//!
//! The truncation dimension is explicit on every value and all arithmetic
//! insists on matching dimensions. Truncation error is made observable
//! rather than hidden: density matrices report the population of their top
//! five levels ([`DensityMatrix::leakage`]) and validation never repairs a
//! state that drifted out of tolerance.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::scalar::{Scalar, C};

/// Number of top Fock levels whose combined population counts as leakage.
pub const LEAKAGE_LEVELS: usize = 5;

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim, min: 2 });
    }
    Ok(())
}

/// Operator on the truncated oscillator space spanned by |0> .. |dim-1>.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator<T> {
    mat: CMat<T>,
}

impl<T: Scalar> FockOperator<T> {
    /// Wraps a matrix as an operator; the dimension must be at least 2.
    pub fn from_matrix(mat: CMat<T>) -> Result<Self> {
        check_dim(mat.dim())?;
        Ok(FockOperator { mat })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(FockOperator { mat: CMat::identity(dim) })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(FockOperator { mat: CMat::zeros(dim) })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    #[inline]
    pub fn matrix(&self) -> &CMat<T> {
        &self.mat
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C<T> {
        self.mat.get(i, j)
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C<T>) {
        self.mat.set(i, j, v);
    }

    pub fn adjoint(&self) -> Self {
        FockOperator { mat: self.mat.adjoint() }
    }

    pub fn scaled(&self, c: C<T>) -> Self {
        FockOperator { mat: self.mat.scale(c) }
    }

    pub fn trace(&self) -> C<T> {
        self.mat.trace()
    }

    pub fn hermiticity_defect(&self) -> T {
        self.mat.hermiticity_defect()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() < T::HERM_TOL
    }

    pub fn frobenius_norm(&self) -> T {
        self.mat.frobenius_norm()
    }

    pub fn max_abs(&self) -> T {
        self.mat.max_abs()
    }

    /// Operator exponential of this matrix.
    pub fn expm(&self) -> Self {
        FockOperator { mat: self.mat.expm() }
    }

    /// Applies the operator to a state vector; the result is generally
    /// unnormalized.
    pub fn apply(&self, state: &PureState<T>) -> Vec<C<T>> {
        assert_eq!(self.dim(), state.dim(), "operator/state dimension mismatch");
        self.mat.matvec(state.amplitudes())
    }

    /// Largest entrywise difference to another operator.
    pub fn max_diff(&self, other: &Self) -> T {
        assert_eq!(self.dim(), other.dim(), "operator dimension mismatch");
        self.mat.sub(&other.mat).max_abs()
    }
}

impl<T: Scalar> Add for &FockOperator<T> {
    type Output = FockOperator<T>;
    fn add(self, rhs: Self) -> FockOperator<T> {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        FockOperator { mat: self.mat.add(&rhs.mat) }
    }
}

impl<T: Scalar> Sub for &FockOperator<T> {
    type Output = FockOperator<T>;
    fn sub(self, rhs: Self) -> FockOperator<T> {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        FockOperator { mat: self.mat.sub(&rhs.mat) }
    }
}

impl<T: Scalar> Mul for &FockOperator<T> {
    type Output = FockOperator<T>;
    fn mul(self, rhs: Self) -> FockOperator<T> {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        FockOperator { mat: self.mat.matmul(&rhs.mat) }
    }
}

/// Annihilation operator a with a|n> = sqrt(n)|n-1>.
pub fn annihilation_op<T: Scalar>(dim: usize) -> Result<FockOperator<T>> {
    check_dim(dim)?;
    let mut mat = CMat::zeros(dim);
    for n in 1..dim {
        mat.set(n - 1, n, Complex::new(T::of(n as f64).sqrt(), T::zero()));
    }
    Ok(FockOperator { mat })
}

/// Creation operator, the adjoint of [`annihilation_op`].
pub fn creation_op<T: Scalar>(dim: usize) -> Result<FockOperator<T>> {
    Ok(annihilation_op(dim)?.adjoint())
}

/// Diagonal operator f(N) acting as f(n) on |n>.
pub fn number_function_op<T: Scalar>(
    f: impl Fn(usize) -> T,
    dim: usize,
) -> Result<FockOperator<T>> {
    check_dim(dim)?;
    let mut mat = CMat::zeros(dim);
    for n in 0..dim {
        mat.set(n, n, Complex::new(f(n), T::zero()));
    }
    Ok(FockOperator { mat })
}

/// Photon number operator diag(0, 1, .., dim-1).
pub fn number_op<T: Scalar>(dim: usize) -> Result<FockOperator<T>> {
    number_function_op(|n| T::of(n as f64), dim)
}

/// Normalized state vector on the truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState<T> {
    amps: Vec<C<T>>,
}

impl<T: Scalar> PureState<T> {
    /// Validates unit norm; amplitudes are stored as given.
    pub fn new(amps: Vec<C<T>>) -> Result<Self> {
        check_dim(amps.len())?;
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if (norm - T::one()).abs() > T::NORM_TOL {
            return Err(Error::InvalidState(format!(
                "pure state norm {} deviates from 1 beyond tolerance",
                norm.as_f64()
            )));
        }
        Ok(PureState { amps })
    }

    /// Rescales an arbitrary nonzero vector to unit norm.
    pub fn normalized(amps: Vec<C<T>>) -> Result<Self> {
        check_dim(amps.len())?;
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if norm <= T::zero() {
            return Err(Error::InvalidState("cannot normalize the zero vector".into()));
        }
        let inv = Complex::new(T::one() / norm, T::zero());
        Ok(PureState { amps: amps.into_iter().map(|z| z * inv).collect() })
    }

    /// Fock basis state |n>.
    pub fn fock_basis(dim: usize, n: usize) -> Result<Self> {
        check_dim(dim)?;
        if n >= dim {
            return Err(Error::InvalidParameter {
                name: "n",
                detail: format!("Fock level {n} out of range for dimension {dim}"),
            });
        }
        let mut amps = vec![Complex::zero(); dim];
        amps[n] = Complex::new(T::one(), T::zero());
        Ok(PureState { amps })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    #[inline]
    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amps
    }

    #[inline]
    pub fn amplitude(&self, n: usize) -> C<T> {
        self.amps[n]
    }

    pub fn norm(&self) -> T {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// Inner product <self|other>.
    pub fn inner(&self, other: &Self) -> C<T> {
        assert_eq!(self.dim(), other.dim(), "state dimension mismatch");
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * *b).fold(C::zero(), |s, z| s + z)
    }

    /// Projector |self><self| as a density matrix.
    pub fn to_density(&self) -> DensityMatrix<T> {
        let n = self.dim();
        let mut mat = CMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                mat.set(i, j, self.amps[i] * self.amps[j].conj());
            }
        }
        DensityMatrix { mat }
    }
}

/// Oscillator mixed state: Hermitian, unit trace, positive semidefinite
/// within the tolerances on [`Scalar`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T> {
    mat: CMat<T>,
}

impl<T: Scalar> DensityMatrix<T> {
    /// Full validation: Hermiticity, unit trace, and spectrum bounded
    /// below by -PSD_TOL (an eigendecomposition, so construction cost is
    /// cubic; hot loops use [`DensityMatrix::new_unchecked`] plus cheap
    /// drift monitoring and re-validate at the end).
    pub fn new(mat: CMat<T>) -> Result<Self> {
        check_dim(mat.dim())?;
        let rho = DensityMatrix { mat };
        rho.validate()?;
        Ok(rho)
    }

    /// Skips validation; callers guarantee the invariants hold.
    pub fn new_unchecked(mat: CMat<T>) -> Self {
        DensityMatrix { mat }
    }

    /// Re-checks all invariants on the current entries.
    pub fn validate(&self) -> Result<()> {
        let herm = self.mat.hermiticity_defect();
        if herm > T::HERM_TOL {
            return Err(Error::InvalidState(format!(
                "density matrix Hermiticity defect {} exceeds tolerance",
                herm.as_f64()
            )));
        }
        let tr = self.mat.trace();
        if (tr.re - T::one()).abs() > T::TRACE_TOL || tr.im.abs() > T::TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "density matrix trace {}+{}i deviates from 1 beyond tolerance",
                tr.re.as_f64(),
                tr.im.as_f64()
            )));
        }
        let min = self.min_eigenvalue()?;
        if min < -T::PSD_TOL {
            return Err(Error::InvalidState(format!(
                "density matrix has negative eigenvalue {}",
                min.as_f64()
            )));
        }
        Ok(())
    }

    /// |n><n| on the truncated space.
    pub fn fock_state(dim: usize, n: usize) -> Result<Self> {
        Ok(PureState::fock_basis(dim, n)?.to_density())
    }

    pub fn vacuum(dim: usize) -> Result<Self> {
        Self::fock_state(dim, 0)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    #[inline]
    pub fn matrix(&self) -> &CMat<T> {
        &self.mat
    }

    pub fn trace(&self) -> C<T> {
        self.mat.trace()
    }

    pub fn hermiticity_defect(&self) -> T {
        self.mat.hermiticity_defect()
    }

    pub fn min_eigenvalue(&self) -> Result<T> {
        let eig = self.mat.hermitian_eigen()?;
        Ok(*eig.values.first().expect("dim >= 2"))
    }

    /// Population of Fock level n.
    pub fn population(&self, n: usize) -> T {
        self.mat.get(n, n).re
    }

    pub fn populations(&self) -> Vec<T> {
        (0..self.dim()).map(|n| self.population(n)).collect()
    }

    /// Combined population of the top [`LEAKAGE_LEVELS`] Fock levels; the
    /// observable proxy for truncation error.
    pub fn leakage(&self) -> T {
        let n = self.dim();
        let lo = n.saturating_sub(LEAKAGE_LEVELS);
        (lo..n).map(|k| self.population(k)).sum()
    }

    /// tr(rho^2); 1 for pure states. For Hermitian rho this is the
    /// squared Frobenius norm.
    pub fn purity(&self) -> T {
        self.mat.data().iter().map(|z| z.norm_sqr()).sum()
    }

    /// tr(rho op).
    pub fn expectation(&self, op: &FockOperator<T>) -> C<T> {
        assert_eq!(self.dim(), op.dim(), "operator dimension mismatch");
        // tr(rho op) = sum_ij rho[i][j] op[j][i].
        let n = self.dim();
        let mut acc = C::zero();
        for i in 0..n {
            for j in 0..n {
                acc += self.mat.get(i, j) * op.get(j, i);
            }
        }
        acc
    }

    /// <a> via the first off-diagonal; cheap moment used by quadratures.
    pub fn mean_annihilation(&self) -> C<T> {
        let n = self.dim();
        let mut acc = C::zero();
        for m in 1..n {
            acc += self.mat.get(m, m - 1) * Complex::new(T::of(m as f64).sqrt(), T::zero());
        }
        acc
    }

    /// <a^2> via the second off-diagonal.
    pub fn mean_annihilation_sq(&self) -> C<T> {
        let n = self.dim();
        let mut acc = C::zero();
        for m in 2..n {
            let w = (T::of(m as f64) * T::of((m - 1) as f64)).sqrt();
            acc += self.mat.get(m, m - 2) * Complex::new(w, T::zero());
        }
        acc
    }

    /// <N> from the diagonal.
    pub fn mean_number(&self) -> T {
        (0..self.dim()).map(|m| self.population(m) * T::of(m as f64)).sum()
    }
}

fn check_same_dim<T: Scalar>(r1: &DensityMatrix<T>, r2: &DensityMatrix<T>) -> Result<()> {
    if r1.dim() != r2.dim() {
        return Err(Error::DimensionMismatch { left: r1.dim(), right: r2.dim() });
    }
    Ok(())
}

/// Uhlmann fidelity tr sqrt(sqrt(rho1) rho2 sqrt(rho1)), clamped to [0, 1].
///
/// Inputs whose spectrum dips below -FID_PSD_GATE are rejected rather
/// than repaired.
pub fn fidelity<T: Scalar>(rho1: &DensityMatrix<T>, rho2: &DensityMatrix<T>) -> Result<T> {
    check_same_dim(rho1, rho2)?;
    let root = rho1.mat.sqrt_psd(T::FID_PSD_GATE).map_err(|e| match e {
        Error::InvalidState(msg) => Error::InvalidState(format!("first argument: {msg}")),
        other => other,
    })?;
    // Gate the second argument's spectrum explicitly; the product matrix
    // below would hide a mildly indefinite rho2.
    let min2 = rho2.min_eigenvalue()?;
    if min2 < -T::FID_PSD_GATE {
        return Err(Error::InvalidState(format!(
            "second argument is not positive semidefinite: min eigenvalue {}",
            min2.as_f64()
        )));
    }
    let inner = root.matmul(rho2.matrix()).matmul(&root);
    let eig = inner.hermitian_eigen()?;
    let f: T = eig.values.iter().map(|&l| l.max(T::zero()).sqrt()).sum();
    Ok(f.min(T::one()))
}

/// Fidelity of a mixed state to a pure target, sqrt(<psi|rho|psi>).
/// Equivalent to [`fidelity`] against the projector but costs only a
/// matrix-vector product.
pub fn fidelity_to_pure<T: Scalar>(rho: &DensityMatrix<T>, psi: &PureState<T>) -> Result<T> {
    if rho.dim() != psi.dim() {
        return Err(Error::DimensionMismatch { left: rho.dim(), right: psi.dim() });
    }
    let v = rho.mat.matvec(psi.amplitudes());
    let overlap = psi
        .amplitudes()
        .iter()
        .zip(&v)
        .map(|(a, b)| a.conj() * *b)
        .fold(C::<T>::zero(), |s, z| s + z);
    Ok(overlap.re.max(T::zero()).sqrt().min(T::one()))
}

/// Trace distance: half the sum of the absolute eigenvalues of rho1-rho2.
pub fn trace_distance<T: Scalar>(rho1: &DensityMatrix<T>, rho2: &DensityMatrix<T>) -> Result<T> {
    check_same_dim(rho1, rho2)?;
    let diff = rho1.mat.sub(&rho2.mat);
    let eig = diff.hermitian_eigen()?;
    let s: T = eig.values.iter().map(|l| l.abs()).sum();
    Ok(s * T::of(0.5))
}

//! Displaced-squeezed target states, quadrature statistics, and Wigner maps.
//!
//! Conventions: quadrature X_phi = (a e^{i phi} + a' e^{-i phi})/2 so the
//! vacuum variance is 1/4; the Wigner plane coordinate is beta = x + i p and
//! the vacuum peak value is 2/pi.

use crate::error::{Error, Result};
use crate::fock::{self, DensityMatrix, FockOperator, PureState};
use crate::linalg::CMat;
use crate::scalar::{c, Scalar, C};
use num_complex::Complex;
use num_traits::Zero;

/// Largest accepted squeeze magnitude; beyond it no practical truncation
/// holds the state.
pub const MAX_SQUEEZE: f64 = 2.0;

/// Target state D(alpha) S(zeta) |0> with zeta = r e^{i phi_r}.
///
/// Canonical form: r >= 0 and phi_r in [0, 2pi); a negative r flips the
/// squeeze axis by absorbing the sign into phi_r.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezedTarget<T> {
    alpha: C<T>,
    r: T,
    phi_r: T,
}

impl<T: Scalar> SqueezedTarget<T> {
    pub fn new(alpha: C<T>, r: T, phi_r: T) -> Result<Self> {
        if !(alpha.re.is_finite() && alpha.im.is_finite() && r.is_finite() && phi_r.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "target",
                detail: "displacement and squeeze parameters must be finite".into(),
            });
        }
        let (r, phi_r) = if r < T::zero() { (-r, phi_r + T::PI()) } else { (r, phi_r) };
        Ok(SqueezedTarget { alpha, r, phi_r: wrap_angle(phi_r) })
    }

    /// Pure displacement, no squeezing.
    pub fn coherent(alpha: C<T>) -> Self {
        SqueezedTarget { alpha, r: T::zero(), phi_r: T::zero() }
    }

    pub fn alpha(&self) -> C<T> {
        self.alpha
    }

    pub fn r(&self) -> T {
        self.r
    }

    pub fn phi_r(&self) -> T {
        self.phi_r
    }

    /// Complex squeeze parameter r e^{i phi_r}.
    pub fn zeta(&self) -> C<T> {
        Complex::from_polar(self.r, self.phi_r)
    }
}

/// Wraps an angle into [0, 2pi).
pub(crate) fn wrap_angle<T: Scalar>(phi: T) -> T {
    let two_pi = T::PI() + T::PI();
    let wrapped = phi - (phi / two_pi).floor() * two_pi;
    // floor arithmetic can land exactly on 2pi for tiny negative inputs
    if wrapped >= two_pi {
        wrapped - two_pi
    } else {
        wrapped
    }
}

/// Displacement operator D(alpha) = exp(alpha a' - alpha* a) on the
/// truncated space. The generator is exactly antihermitian, so the result
/// is unitary to machine precision; faithfulness on low levels requires
/// |alpha|^2 <= dim/4.
pub fn displacement_op<T: Scalar>(alpha: C<T>, dim: usize) -> Result<FockOperator<T>> {
    fock::check_dim(dim)?;
    let alpha_sq = alpha.norm_sqr();
    let limit = T::of(dim as f64 / 4.0);
    if alpha_sq > limit {
        return Err(Error::AmplitudeTooLarge {
            alpha_sq: alpha_sq.as_f64(),
            limit: limit.as_f64(),
        });
    }
    let a = fock::annihilation_op(dim)?;
    let ad = fock::creation_op(dim)?;
    Ok((&ad.scaled(alpha) - &a.scaled(alpha.conj())).expm())
}

/// Squeezing operator S(zeta) = exp((zeta* a^2 - zeta a'^2)/2) on the
/// truncated space; |zeta| <= MAX_SQUEEZE.
pub fn squeezing_op<T: Scalar>(zeta: C<T>, dim: usize) -> Result<FockOperator<T>> {
    fock::check_dim(dim)?;
    let mag = zeta.norm();
    if mag > T::of(MAX_SQUEEZE) {
        return Err(Error::SqueezeTooLarge { zeta: mag.as_f64(), limit: MAX_SQUEEZE });
    }
    let a = fock::annihilation_op(dim)?;
    let ad = fock::creation_op(dim)?;
    let half = c(0.5, 0.0);
    let gen = &(&a * &a).scaled(zeta.conj() * half) - &(&ad * &ad).scaled(zeta * half);
    Ok(gen.expm())
}

/// Builds |alpha, zeta> = D(alpha) S(zeta) |0>.
///
/// Fails with a truncation error when the state leaks more than the
/// scalar's LEAK_TOL into the top five levels or loses that much norm.
pub fn make_state<T: Scalar>(target: &SqueezedTarget<T>, dim: usize) -> Result<PureState<T>> {
    let d = displacement_op(target.alpha, dim)?;
    let s = squeezing_op(target.zeta(), dim)?;
    let vac = PureState::fock_basis(dim, 0)?;
    let amps = (&d * &s).apply(&vac);

    let tol = T::LEAK_TOL;
    let top = dim.saturating_sub(fock::LEAKAGE_LEVELS.min(dim));
    let leak: T = amps[top..].iter().map(|z| z.norm_sqr()).sum();
    if leak > tol {
        return Err(Error::TruncationOverflow(format!(
            "target state leaks {:.3e} into the top levels at dim {}",
            leak.as_f64(),
            dim
        )));
    }
    let norm_defect = (amps.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt() - T::one()).abs();
    if norm_defect > tol {
        return Err(Error::TruncationOverflow(format!(
            "target state lost norm {:.3e} to truncation at dim {}",
            norm_defect.as_f64(),
            dim
        )));
    }
    PureState::normalized(amps)
}

/// Variance of the quadrature X_phi = (a e^{i phi} + a' e^{-i phi})/2.
pub fn quadrature_variance<T: Scalar>(rho: &DensityMatrix<T>, phi: T) -> T {
    let e = Complex::from_polar(T::one(), phi);
    let mean_a = rho.mean_annihilation();
    let mean_a2 = rho.mean_annihilation_sq();
    let mean_n = rho.mean_number();
    let two = T::of(2.0);
    let mean_x = (e * mean_a).re;
    T::of(0.25) * (T::one() + two * mean_n + two * (e * e * mean_a2).re) - mean_x * mean_x
}

/// Smallest and largest quadrature variance over all phase angles.
///
/// The variance is 1/4 + (<N> - |<a>|^2)/2 + Re(e^{2i phi}(<a^2> - <a>^2))/2,
/// so the extremes differ from the mean level by |<a^2> - <a>^2|/2.
pub fn extremal_variances<T: Scalar>(rho: &DensityMatrix<T>) -> (T, T) {
    let mean_a = rho.mean_annihilation();
    let mean_a2 = rho.mean_annihilation_sq();
    let mean_n = rho.mean_number();
    let half = T::of(0.5);
    let level = T::of(0.25) + half * (mean_n - mean_a.norm_sqr());
    let swing = half * (mean_a2 - mean_a * mean_a).norm();
    (level - swing, level + swing)
}

/// Wigner function on a rectangular grid via the displaced-parity form
/// W(beta) = (2/pi) sum_n (-1)^n <n| D'(beta) rho D(beta) |n>.
///
/// Returns `w[i][j]` = W(xs[i], ps[j]). The displaced basis columns come
/// from an exact ladder recurrence, so the only approximation is the
/// truncation of rho itself.
pub fn wigner<T: Scalar>(rho: &DensityMatrix<T>, xs: &[T], ps: &[T]) -> Result<Vec<Vec<T>>> {
    for v in xs.iter().chain(ps.iter()) {
        if !v.is_finite() {
            return Err(Error::InvalidParameter {
                name: "grid",
                detail: "grid coordinates must be finite".into(),
            });
        }
    }
    let dim = rho.dim();
    let two_over_pi = T::of(2.0) / T::PI();
    let mut out = vec![vec![T::zero(); ps.len()]; xs.len()];
    for (i, &x) in xs.iter().enumerate() {
        for (j, &p) in ps.iter().enumerate() {
            let cols = displaced_columns(Complex::new(x, p), dim);
            let rc = rho.matrix().matmul(&cols);
            let mut acc = T::zero();
            for n in 0..dim {
                let mut q = T::zero();
                for m in 0..dim {
                    let cm = cols.get(m, n);
                    let rm = rc.get(m, n);
                    q += cm.re * rm.re + cm.im * rm.im;
                }
                acc = if n % 2 == 0 { acc + q } else { acc - q };
            }
            out[i][j] = two_over_pi * acc;
        }
    }
    Ok(out)
}

/// Matrix whose column n is D(beta)|n>, built without exponentials:
/// column 0 is the coherent state, and D a' D' = a' - beta* lifts each
/// column to the next. Low-level entries are exact under truncation
/// because the recurrence never references levels above the current one.
fn displaced_columns<T: Scalar>(beta: C<T>, dim: usize) -> CMat<T> {
    let mut cols = CMat::zeros(dim);
    let scale = (-beta.norm_sqr() / T::of(2.0)).exp();
    let mut amp = Complex::new(scale, T::zero());
    for m in 0..dim {
        cols.set(m, 0, amp);
        amp = amp * beta / Complex::new(T::of((m + 1) as f64).sqrt(), T::zero());
    }
    let bc = beta.conj();
    for n in 0..dim - 1 {
        let inv = T::one() / T::of((n + 1) as f64).sqrt();
        for m in (0..dim).rev() {
            let lifted = if m == 0 { C::zero() } else {
                cols.get(m - 1, n) * Complex::new(T::of(m as f64).sqrt(), T::zero())
            };
            let v = (lifted - bc * cols.get(m, n)) * Complex::new(inv, T::zero());
            cols.set(m, n + 1, v);
        }
    }
    cols
}

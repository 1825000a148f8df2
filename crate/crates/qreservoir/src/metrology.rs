//! Fisher information for estimating the interaction angle from the
//! stabilized state.
//!
//! Two closed forms compute the per-probe information: `qfi_gaussian`
//! evaluates 2 d_dot' sigma^-1 d_dot on the first and second moments of the
//! predicted target, and `qfi_explicit` evaluates the same quantity written
//! out in the pair amplitudes. They coincide whenever the displacement is
//! real and differ otherwise; `bures_qfi_oracle` measures the metric
//! directly from density matrices and sides with the covariance route
//! (docs/findings.md records the numbers). `rate_adjusted_qfi` folds in the
//! squared convergence rate, giving a theta-free figure for ranking qubit
//! streams, and the scan plus bound pair benchmarks product streams against
//! the claimed entangled ceiling.

use num_complex::Complex;

use crate::design::{
    check_bound_inputs, check_positive_theta, predict_steady_state, ReservoirDesign,
    SeparableFamily, BOUND_OVERFLOW, EPSILON_VALIDITY_CEILING,
};
use crate::error::{Error, Result};
use crate::fock::{fidelity, DensityMatrix};
use crate::interaction::QubitPairState;
use crate::scalar::{Scalar, C};

/// Band around 1 allowed for det(sigma) of a minimum-uncertainty summary.
pub const DET_SIGMA_TOL: f64 = 1e-10;

/// Interaction angle used internally by theta-free scans. The figures they
/// rank are theta-independent, so any angle inside the validity band works.
const SCAN_THETA: f64 = 0.05;

/// First and second moments of the stabilized Gaussian state together with
/// their derivative in the interaction angle.
///
/// `d = (alpha, alpha*)`, `sigma` is the covariance
/// `[[cosh 2r, -e^{i phi_r} sinh 2r], [-e^{-i phi_r} sinh 2r, cosh 2r]]`,
/// and `d_dot` is d(d)/d(theta). A minimum-uncertainty state has
/// det(sigma) = 1, enforced at construction.
#[derive(Debug, Clone)]
pub struct GaussianSummary<T: Scalar> {
    d: [C<T>; 2],
    sigma: [[C<T>; 2]; 2],
    d_dot: [C<T>; 2],
}

impl<T: Scalar> GaussianSummary<T> {
    /// Validates the (z, z*) pairing of `d` and `d_dot`, the Hermitian
    /// pattern of `sigma`, and det(sigma) = 1 within `DET_SIGMA_TOL`
    /// (widened by the rounding floor of T at large squeeze).
    pub fn new(d: [C<T>; 2], sigma: [[C<T>; 2]; 2], d_dot: [C<T>; 2]) -> Result<Self> {
        let entries = d
            .iter()
            .chain(d_dot.iter())
            .chain(sigma.iter().flatten());
        if entries.clone().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("summary entries must be finite".into()));
        }
        let scale = entries.fold(T::one(), |m, z| m.max(z.norm()));
        let tol = T::of(DET_SIGMA_TOL).max(T::of(16.0) * scale * scale * T::epsilon());
        let pairing = (d[1] - d[0].conj()).norm().max((d_dot[1] - d_dot[0].conj()).norm());
        if pairing > tol * T::of(8.0) {
            return Err(Error::InvalidState(format!(
                "second components must conjugate the first; defect {}",
                pairing.as_f64()
            )));
        }
        let herm = sigma[0][0]
            .im
            .abs()
            .max(sigma[1][1].im.abs())
            .max((sigma[1][0] - sigma[0][1].conj()).norm())
            .max((sigma[1][1] - sigma[0][0]).norm());
        if herm > tol * T::of(8.0) {
            return Err(Error::InvalidState(format!(
                "covariance must be Hermitian with equal real diagonal; defect {}",
                herm.as_f64()
            )));
        }
        if sigma[0][0].re < T::one() - tol {
            return Err(Error::InvalidState(format!(
                "covariance diagonal must be at least 1, got {}",
                sigma[0][0].re.as_f64()
            )));
        }
        let summary = GaussianSummary { d, sigma, d_dot };
        let det_defect = (summary.det_sigma() - T::one()).norm();
        if det_defect > tol {
            return Err(Error::InvalidState(format!(
                "covariance determinant is off the uncertainty floor by {}",
                det_defect.as_f64()
            )));
        }
        Ok(summary)
    }

    /// Moments of a design's predicted target. The displacement scales as
    /// 1/theta at fixed pair, so d_dot = (-alpha/theta, -alpha*/theta).
    pub fn from_design(design: &ReservoirDesign<T>) -> Result<Self> {
        let target = design.predicted_target();
        let alpha = target.alpha();
        let two = T::of(2.0);
        let (c2r, s2r) = ((two * target.r()).cosh(), (two * target.r()).sinh());
        let off = -Complex::from_polar(s2r, target.phi_r());
        let alpha_dot = -alpha / design.theta();
        Self::new(
            [alpha, alpha.conj()],
            [
                [Complex::new(c2r, T::zero()), off],
                [off.conj(), Complex::new(c2r, T::zero())],
            ],
            [alpha_dot, alpha_dot.conj()],
        )
    }

    pub fn d(&self) -> &[C<T>; 2] {
        &self.d
    }

    pub fn sigma(&self) -> &[[C<T>; 2]; 2] {
        &self.sigma
    }

    pub fn d_dot(&self) -> &[C<T>; 2] {
        &self.d_dot
    }

    /// det(sigma); real up to rounding, equal to 1 for a valid summary.
    pub fn det_sigma(&self) -> C<T> {
        self.sigma[0][0] * self.sigma[1][1] - self.sigma[0][1] * self.sigma[1][0]
    }
}

/// Fisher information 2 d_dot' sigma^-1 d_dot from the Gaussian moments.
///
/// The imaginary part of the quadratic form vanishes for a Hermitian
/// covariance; the real part comes back, nonnegative up to rounding.
pub fn qfi_gaussian<T: Scalar>(summary: &GaussianSummary<T>) -> Result<T> {
    let det = summary.det_sigma();
    if det.norm() < T::of(1e-12) {
        return Err(Error::Singular("covariance matrix is singular".into()));
    }
    let s = summary.sigma();
    let dd = summary.d_dot();
    let inv = [
        [s[1][1] / det, -s[0][1] / det],
        [-s[1][0] / det, s[0][0] / det],
    ];
    let v = [
        inv[0][0] * dd[0] + inv[0][1] * dd[1],
        inv[1][0] * dd[0] + inv[1][1] * dd[1],
    ];
    let form = dd[0].conj() * v[0] + dd[1].conj() * v[1];
    let value = T::of(2.0) * form.re;
    let gate = T::of(1e-10).max(T::of(8.0) * T::epsilon());
    if T::of(2.0) * form.im.abs() > gate * T::one().max(value.abs()) {
        return Err(Error::Numeric(format!(
            "Fisher quadratic form came out non-real: imaginary part {}",
            form.im.as_f64()
        )));
    }
    Ok(value)
}

/// The shared phase ratio ((1+mu^2) cos 2phi_alpha - 2 mu cos phi_r)
/// / (mu^2 - 1) with phi_r the raw decay-phase gap arg(b_ee) - arg(b_gg),
/// continued to its limit cos 2phi_alpha for pure-loss pairs (mu infinite).
fn phase_ratio<T: Scalar>(design: &ReservoirDesign<T>) -> T {
    let two = T::of(2.0);
    let cos2a = (two * design.predicted_target().alpha().arg()).cos();
    let mu = design.mu();
    if mu.is_infinite() {
        return cos2a;
    }
    let pair = design.pair();
    let phi_raw = pair.beta_ee().arg() - pair.beta_gg().arg();
    let musq = mu * mu;
    ((T::one() + musq) * cos2a - two * mu * phi_raw.cos()) / (musq - T::one())
}

/// Fisher information in expanded form,
/// 4 |eps b_gg* + eps* b_ee|^2 / (theta^4 (|b_gg|^2 - |b_ee|^2)^2) times the
/// phase ratio ((1+mu^2) cos 2phi_alpha - 2 mu cos phi_r)/(mu^2 - 1) with
/// phi_r = arg(b_ee) - arg(b_gg).
///
/// Coincides with `qfi_gaussian` exactly when the displacement is real
/// (phi_alpha in {0, pi}) and deviates otherwise, taking negative values in
/// parts of the phase space; the Bures oracle backs the Gaussian route.
/// docs/findings.md tabulates the disagreement.
pub fn qfi_explicit<T: Scalar>(design: &ReservoirDesign<T>) -> Result<T> {
    let mu = design.mu();
    if !(mu > T::one()) {
        return Err(Error::InvalidParameter {
            name: "mu",
            detail: format!("decay asymmetry must exceed 1, got {}", mu.as_f64()),
        });
    }
    let pair = design.pair();
    let eps = design.epsilon();
    let num = eps * pair.beta_gg().conj() + eps.conj() * pair.beta_ee();
    let delta = pair.beta_gg().norm_sqr() - pair.beta_ee().norm_sqr();
    let theta_sq = design.theta() * design.theta();
    let scale = num.norm_sqr() / (theta_sq * theta_sq * delta * delta);
    Ok(T::of(4.0) * scale * phase_ratio(design))
}

/// Rate-adjusted figure J kappa^2: information per probe times squared
/// convergence rate. Theta cancels, so the figure depends only on the pair.
///
/// Evaluated along two routes that must agree to 1e-6 relative: the product
/// `qfi_explicit * kappa^2`, and the drive-phase form
/// 16 |eps|^2 (1 + mu^2 + 2 mu cos(phi_gg + phi_ee - 2 phi_eps)) |b_ee|^2
/// times the same phase ratio. The drive-phase factor is evaluated as
/// |b_gg|^2 + |b_ee|^2 + 2 |b_gg||b_ee| cos(..) so pure-loss pairs stay
/// finite.
pub fn rate_adjusted_qfi<T: Scalar>(design: &ReservoirDesign<T>) -> Result<T> {
    let kappa = design.kappa();
    let via_kappa = qfi_explicit(design)? * kappa * kappa;

    let two = T::of(2.0);
    let pair = design.pair();
    let (bgg, bee) = (pair.beta_gg(), pair.beta_ee());
    let eps = design.epsilon();
    let xi = bgg.arg() + bee.arg() - two * eps.arg();
    let packed = bgg.norm_sqr() + bee.norm_sqr() + two * bgg.norm() * bee.norm() * xi.cos();
    let via_display = T::of(16.0) * eps.norm_sqr() * packed * phase_ratio(design);

    let rel = T::of(1e-6).max(T::of(64.0) * T::epsilon());
    let tol = rel * via_kappa.abs().max(via_display.abs()).max(T::of(1e-12));
    if (via_kappa - via_display).abs() > tol {
        return Err(Error::Numeric(format!(
            "rate-adjusted QFI routes disagree: {} vs {}",
            via_kappa.as_f64(),
            via_display.as_f64()
        )));
    }
    Ok(via_kappa)
}

/// QFI benchmark 16 |eps|^2 (mu+1)^3 / (mu-1)^3.
///
/// The scan shows product streams stay below it, but no pair of any kind
/// reaches it either: the best rate-adjusted figure at fixed (|eps|, mu) is
/// 16 |eps|^2 (1 - |eps|^2/2), so the benchmark separates nothing; see
/// docs/findings.md. Values above `BOUND_OVERFLOW` come back as +infinity.
pub fn entangled_qfi_bound<T: Scalar>(epsilon_magnitude: T, mu: T) -> Result<T> {
    check_bound_inputs(epsilon_magnitude, mu)?;
    let one = T::one();
    let ratio = (mu + one) / (mu - one);
    let bound = T::of(16.0) * epsilon_magnitude * epsilon_magnitude * ratio * ratio * ratio;
    if !bound.is_finite() || bound > T::of(BOUND_OVERFLOW) {
        return Ok(T::infinity());
    }
    Ok(bound)
}

/// Result of scanning the product-state family for its rate-adjusted QFI.
#[derive(Debug, Clone)]
pub struct QfiScan<T> {
    /// Largest figure found over the family.
    pub sup: T,
    /// The benchmark `entangled_qfi_bound` at the same inputs.
    pub bound: T,
    /// bound - sup. Positive: every product stream stays below the benchmark.
    pub margin: T,
    /// The pair achieving `sup`.
    pub argmax: QubitPairState<T>,
    /// Phase gap of the argmax pair.
    pub argmax_delta: T,
    /// Smallest over the grid of each point's largest gap to the three
    /// aligned-phase conditions (phi_ee - phi_gg = pi, phi_ge = phi_eg,
    /// phi_alpha = 0). Bounded well away from zero: the conditions are
    /// jointly infeasible for product pairs.
    pub condition_defect: T,
}

/// Scans the product-state family at fixed (|epsilon|, mu) for the largest
/// rate-adjusted QFI. The free phases reduce to the single gap delta, so the
/// grid has `grid_resolution` points on the feasible arc, endpoints
/// included; the maximum sits at the feasibility edge, where the equal
/// excitation split concentrates weight in b_ee.
pub fn separable_qfi_scan<T: Scalar>(
    epsilon_magnitude: T,
    mu: T,
    grid_resolution: usize,
) -> Result<QfiScan<T>> {
    if grid_resolution < 64 {
        return Err(Error::InvalidParameter {
            name: "grid_resolution",
            detail: format!("need at least 64 points per phase, got {}", grid_resolution),
        });
    }
    if epsilon_magnitude > T::of(EPSILON_VALIDITY_CEILING) {
        return Err(Error::InvalidParameter {
            name: "epsilon_magnitude",
            detail: format!(
                "steady-state figures are only valid for drives up to {}, got {}",
                EPSILON_VALIDITY_CEILING,
                epsilon_magnitude.as_f64()
            ),
        });
    }
    let family = SeparableFamily::new(epsilon_magnitude, mu)?;
    let theta = T::of(SCAN_THETA);
    let lo = family.edge_delta();
    let hi = T::PI();
    let steps = T::of((grid_resolution - 1) as f64);

    // the figure goes negative deep in the arc, so start below any value
    let mut sup = T::neg_infinity();
    let mut argmax = None;
    let mut condition_defect = T::infinity();
    for k in 0..grid_resolution {
        let delta = lo + (hi - lo) * T::of(k as f64) / steps;
        let pair = family.pair_at(delta)?;
        let design = predict_steady_state(&pair, theta)?;
        let j = rate_adjusted_qfi(&design)?;
        condition_defect = condition_defect.min(condition_gap(&design));
        if j > sup {
            sup = j;
            argmax = Some((pair, delta));
        }
    }
    let (argmax, argmax_delta) = argmax.expect("grid is nonempty");
    let bound = entangled_qfi_bound(epsilon_magnitude, mu)?;
    Ok(QfiScan { sup, bound, margin: bound - sup, argmax, argmax_delta, condition_defect })
}

/// Largest gap to the three aligned-phase conditions under which the QFI
/// benchmark would be met with equality.
fn condition_gap<T: Scalar>(design: &ReservoirDesign<T>) -> T {
    let pair = design.pair();
    let decay = circle_gap(pair.beta_ee().arg() - pair.beta_gg().arg(), T::PI());
    let drive = circle_gap(pair.beta_ge().arg() - pair.beta_eg().arg(), T::zero());
    let displacement = circle_gap(design.predicted_target().alpha().arg(), T::zero());
    decay.max(drive).max(displacement)
}

/// Distance between two angles on the circle, in [0, pi].
fn circle_gap<T: Scalar>(a: T, b: T) -> T {
    let two_pi = T::of(2.0) * T::PI();
    let mut d = (a - b) % two_pi;
    if d > T::PI() {
        d = d - two_pi;
    }
    if d < -T::PI() {
        d = d + two_pi;
    }
    d.abs()
}

/// The pair maximizing `rate_adjusted_qfi` at fixed (|epsilon|, mu): even
/// in-phase drive split, |b_ee| at the normalization cap, and the decay
/// phases a quarter turn apart (phi_gg = phi_eps, phi_ee = phi_eps + pi/2).
///
/// Its figure is 16 |eps|^2 (1 - |eps|^2/2), independent of mu, which stays
/// a factor (1 - |eps|^2/2)((mu-1)/(mu+1))^3 below `entangled_qfi_bound`.
pub fn entangled_qfi_maximizer<T: Scalar>(
    epsilon_magnitude: T,
    mu: T,
) -> Result<QubitPairState<T>> {
    check_bound_inputs(epsilon_magnitude, mu)?;
    if epsilon_magnitude == T::zero() || epsilon_magnitude > T::of(EPSILON_VALIDITY_CEILING) {
        return Err(Error::InvalidParameter {
            name: "epsilon_magnitude",
            detail: format!(
                "need a drive in (0, {}] to stabilize a displaced target, got {}",
                EPSILON_VALIDITY_CEILING,
                epsilon_magnitude.as_f64()
            ),
        });
    }
    let half = T::of(0.5);
    let cap = (T::one() - half * epsilon_magnitude * epsilon_magnitude) / (T::one() + mu * mu);
    let b = cap.sqrt();
    QubitPairState::new(
        Complex::new(mu * b, T::zero()),
        Complex::new(half * epsilon_magnitude, T::zero()),
        Complex::new(half * epsilon_magnitude, T::zero()),
        Complex::new(T::zero(), b),
    )
}

/// Fisher information measured from the Bures distance between neighbouring
/// states, J = 4 d_B^2 / delta^2 with d_B^2 = 2 (1 - F), averaged over a
/// forward and a backward step. Only the builder's density matrices and the
/// exact truncated-matrix fidelity enter, so the estimate is independent of
/// every closed form above.
///
/// `delta` trades bias for noise: curvature bias grows like delta^2 while
/// the fidelity carries a rounding floor near 5e-8, so steps near
/// 1e-2 theta resolve near-pure states at dim 60 to about 0.1% and
/// 1e-3 theta is the smallest generally useful step. A forward/backward
/// spread above 20% flags an unconverged builder.
pub fn bures_qfi_oracle<T, F>(state_builder: F, theta: T, delta: T) -> Result<T>
where
    T: Scalar,
    F: Fn(T) -> Result<DensityMatrix<T>>,
{
    check_positive_theta(theta)?;
    if !delta.is_finite() || !(delta > T::zero() && delta < theta * T::of(0.5)) {
        return Err(Error::InvalidParameter {
            name: "delta",
            detail: format!("step must lie in (0, theta/2), got {}", delta.as_f64()),
        });
    }
    let center = state_builder(theta)?;
    let fisher = |rho: &DensityMatrix<T>| -> Result<T> {
        let f = fidelity(&center, rho)
            .map_err(|e| Error::OracleInvalid(format!("state family is not comparable: {e}")))?;
        Ok(T::of(8.0) * (T::one() - f) / (delta * delta))
    };
    let jf = fisher(&state_builder(theta + delta)?)?;
    let jb = fisher(&state_builder(theta - delta)?)?;
    let scale = jf.max(jb);
    if scale > T::of(1e-9) && (jf - jb).abs() > T::of(0.2) * scale {
        return Err(Error::OracleInvalid(format!(
            "forward and backward estimates disagree ({} vs {}); the builder's states look \
             unconverged or the step too large",
            jf.as_f64(),
            jb.as_f64()
        )));
    }
    Ok(T::of(0.5) * (jf + jb))
}

/// Cramer-Rao limit 1/sqrt(n J) on the standard deviation of any unbiased
/// estimate of the angle from n independent probe repetitions.
pub fn cramer_rao<T: Scalar>(fisher_information: T, repetitions: usize) -> Result<T> {
    if repetitions == 0 {
        return Err(Error::InvalidParameter {
            name: "repetitions",
            detail: "need at least one repetition".into(),
        });
    }
    if !fisher_information.is_finite() || !(fisher_information > T::zero()) {
        return Err(Error::InvalidParameter {
            name: "fisher_information",
            detail: format!("must be positive and finite, got {}", fisher_information.as_f64()),
        });
    }
    Ok((T::of(repetitions as f64) * fisher_information).sqrt().recip())
}

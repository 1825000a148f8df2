//! Reservoir design: forward prediction of the stabilized state for a given
//! qubit-pair stream, inverse construction of a stream hitting a desired
//! target, separability classification, and amplitude-reach benchmarks.
//!
//! Convention: the canonical squeeze satisfies tanh(r) e^{i phi_r} =
//! -beta_ee / beta_gg with r >= 0. The sign was pinned by matching the
//! simulated steady state; docs/findings.md collects the places where the
//! closed forms needed such corrections.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::interaction::QubitPairState;
use crate::scalar::{Scalar, C};
use crate::squeezing::SqueezedTarget;

/// Hard validity ceiling on the drive amplitude |epsilon|; the prediction
/// drops O(epsilon^2) terms, and beyond this point they are no longer small.
pub const EPSILON_VALIDITY_CEILING: f64 = 0.2;

/// Above this |epsilon| the dropped terms start to show at the third
/// decimal; predictions still work but carry a warning flag.
pub const EPSILON_WARN_BAND: f64 = 0.05;

/// A pair counts as separable when |b_gg b_ee - b_ge b_eg| falls below this.
pub const SEPARABILITY_TOL: f64 = 1e-12;

/// Benchmark values above this are reported as +infinity.
pub const BOUND_OVERFLOW: f64 = 1e15;

/// A tuned reservoir: the pair stream, the interaction angle, and the
/// closed-form prediction of where the oscillator ends up.
///
/// Valid designs have |beta_ee| < |beta_gg| (the dynamics contract toward
/// a unique state only then) and |epsilon| <= 0.2.
#[derive(Debug, Clone)]
pub struct ReservoirDesign<T> {
    theta: T,
    pair: QubitPairState<T>,
    epsilon: C<T>,
    mu: T,
    predicted_target: SqueezedTarget<T>,
    kappa: T,
}

impl<T: Scalar> ReservoirDesign<T> {
    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn pair(&self) -> &QubitPairState<T> {
        &self.pair
    }

    /// Drive amplitude beta_ge + beta_eg.
    pub fn epsilon(&self) -> C<T> {
        self.epsilon
    }

    /// Decay asymmetry |beta_gg| / |beta_ee|; infinite when beta_ee = 0.
    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn predicted_target(&self) -> &SqueezedTarget<T> {
        &self.predicted_target
    }

    /// Convergence rate 2 theta^2 (|beta_gg|^2 - |beta_ee|^2) per pair.
    pub fn kappa(&self) -> T {
        self.kappa
    }

    /// True when |epsilon| sits in the warning band where the dropped
    /// second-order terms are expected to reach the third decimal.
    pub fn epsilon_warning(&self) -> bool {
        self.epsilon.norm() > T::of(EPSILON_WARN_BAND)
    }
}

/// Steady amplitude (eps b_gg* + eps* b_ee) / (theta (|b_gg|^2 - |b_ee|^2)).
fn steady_amplitude<T: Scalar>(pair: &QubitPairState<T>, theta: T) -> C<T> {
    let eps = pair.epsilon();
    let num = eps * pair.beta_gg().conj() + eps.conj() * pair.beta_ee();
    let delta = pair.beta_gg().norm_sqr() - pair.beta_ee().norm_sqr();
    num.scale((theta * delta).recip())
}

pub(crate) fn check_positive_theta<T: Scalar>(theta: T) -> Result<()> {
    if !(theta > T::zero() && theta.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "theta",
            detail: format!("interaction angle must be finite and > 0, got {}", theta.as_f64()),
        });
    }
    Ok(())
}

/// Predicts the stabilized state for a pair stream: squeeze from the
/// amplitude ratio, displacement from the drive, rate from the imbalance.
///
/// Errors: |beta_ee| >= |beta_gg| never converges; |epsilon| > 0.2 is
/// outside the validity of the dropped-term expansion.
pub fn predict_steady_state<T: Scalar>(
    pair: &QubitPairState<T>,
    theta: T,
) -> Result<ReservoirDesign<T>> {
    check_positive_theta(theta)?;
    let bgg = pair.beta_gg().norm();
    let bee = pair.beta_ee().norm();
    if bee >= bgg {
        return Err(Error::NoConvergence { bee: bee.as_f64(), bgg: bgg.as_f64() });
    }
    let eps = pair.epsilon();
    if eps.norm() > T::of(EPSILON_VALIDITY_CEILING) {
        return Err(Error::OutsideValidity {
            epsilon: eps.norm().as_f64(),
            ceiling: EPSILON_VALIDITY_CEILING,
        });
    }

    // tanh(r) e^{i phi_r} = -b_ee / b_gg, canonical r >= 0
    let ratio = -(pair.beta_ee() / pair.beta_gg());
    let r = ratio.norm().atanh();
    let phi_r = ratio.arg();
    let alpha = steady_amplitude(pair, theta);
    let delta = bgg * bgg - bee * bee;
    let kappa = T::of(2.0) * theta * theta * delta;

    Ok(ReservoirDesign {
        theta,
        pair: pair.clone(),
        epsilon: eps,
        mu: pair.mu(),
        predicted_target: SqueezedTarget::new(alpha, r, phi_r)?,
        kappa,
    })
}

/// Builds a pair stream whose predicted steady state is exactly `target`.
///
/// Gauge choice (the inverse problem is underdetermined): beta_gg real
/// positive and the drive split evenly, beta_ge = beta_eg = epsilon / 2.
/// The construction uses the smallest drive amplitude that reaches the
/// target displacement; `epsilon_budget` caps it. Round-trips through
/// `predict_steady_state` exactly up to rounding.
pub fn tune_pair_for_target<T: Scalar>(
    target: &SqueezedTarget<T>,
    theta: T,
    epsilon_budget: T,
) -> Result<QubitPairState<T>> {
    check_positive_theta(theta)?;
    if !(epsilon_budget >= T::zero() && epsilon_budget.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "epsilon_budget",
            detail: format!("drive budget must be finite and >= 0, got {}", epsilon_budget.as_f64()),
        });
    }
    if epsilon_budget > T::of(EPSILON_VALIDITY_CEILING) {
        return Err(Error::OutsideValidity {
            epsilon: epsilon_budget.as_f64(),
            ceiling: EPSILON_VALIDITY_CEILING,
        });
    }

    let one = T::one();
    let t = target.r().tanh();
    let phi_r = target.phi_r();
    let bee_dir = -Complex::from_polar(one, phi_r);
    let alpha = target.alpha();

    if alpha.norm() == T::zero() {
        let m = (one + t * t).sqrt().recip();
        let zero = Complex::new(T::zero(), T::zero());
        return QubitPairState::normalized(
            Complex::new(m, T::zero()),
            zero,
            zero,
            bee_dir.scale(m * t),
        );
    }

    // At beta_gg = m the displacement condition reads
    //   Z := alpha theta m (1 - t^2) e^{-i phi_r / 2}
    //      = |eps| [(1 - t) cos(psi) + i (1 + t) sin(psi)],  psi = phi_eps - phi_r / 2,
    // and normalization ties m to |eps|, which closes to the form below.
    let z1 = alpha
        .scale(theta * (one - t * t))
        * Complex::from_polar(one, -phi_r / T::of(2.0));
    let re_part = z1.re / (one - t);
    let im_part = z1.im / (one + t);
    let k2 = re_part * re_part + im_part * im_part;
    let eps_req = (k2 / (one + t * t + k2 / T::of(2.0))).sqrt();
    if eps_req > epsilon_budget {
        return Err(Error::UnreachableTarget(format!(
            "displacement {:.6} needs drive amplitude {:.6}, budget is {:.6}",
            alpha.norm().as_f64(),
            eps_req.as_f64(),
            epsilon_budget.as_f64()
        )));
    }
    let psi = im_part.atan2(re_part);
    let phi_eps = psi + phi_r / T::of(2.0);
    let m = ((one - eps_req * eps_req / T::of(2.0)) / (one + t * t)).sqrt();
    let half_eps = Complex::from_polar(eps_req / T::of(2.0), phi_eps);

    QubitPairState::normalized(
        Complex::new(m, T::zero()),
        half_eps,
        half_eps,
        bee_dir.scale(m * t),
    )
}

/// Whether a pair factors into two independent qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Separability {
    Separable,
    Entangled,
}

/// Separability verdict with the underlying numbers.
#[derive(Debug, Clone)]
pub struct Classification<T> {
    pub separability: Separability,
    /// Entanglement measure 2 |b_gg b_ee - b_ge b_eg| capped at 1.
    pub concurrence: T,
    /// Raw determinant modulus |b_gg b_ee - b_ge b_eg|.
    pub defect: T,
}

/// Classifies a pair: separable exactly when b_gg b_ee = b_ge b_eg.
/// Invariant under a global phase of the pair.
pub fn classify<T: Scalar>(pair: &QubitPairState<T>) -> Classification<T> {
    let det = pair.beta_gg() * pair.beta_ee() - pair.beta_ge() * pair.beta_eg();
    let defect = det.norm();
    let separability = if defect < T::of(SEPARABILITY_TOL) {
        Separability::Separable
    } else {
        Separability::Entangled
    };
    Classification { separability, concurrence: pair.concurrence(), defect }
}

pub(crate) fn check_bound_inputs<T: Scalar>(epsilon_magnitude: T, mu: T) -> Result<()> {
    if !(epsilon_magnitude >= T::zero() && epsilon_magnitude < T::one()) {
        return Err(Error::InvalidParameter {
            name: "epsilon_magnitude",
            detail: format!("drive amplitude must lie in [0, 1), got {}", epsilon_magnitude.as_f64()),
        });
    }
    if !(mu > T::one() && mu.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "mu",
            detail: format!("decay asymmetry must be finite and > 1, got {}", mu.as_f64()),
        });
    }
    Ok(())
}

/// Amplitude benchmark |eps| / (theta sqrt(1 - eps^2) (mu - 1)).
///
/// An entangled pair attaining it exactly exists whenever the geometry
/// permits (`entangled_pair_attaining_amplitude_bound`). The numeric scan
/// shows product streams can exceed it too, so it separates nothing; see
/// docs/findings.md. Values above `BOUND_OVERFLOW` come back as +infinity.
pub fn entangled_amplitude_bound<T: Scalar>(
    theta: T,
    epsilon_magnitude: T,
    mu: T,
) -> Result<T> {
    check_positive_theta(theta)?;
    check_bound_inputs(epsilon_magnitude, mu)?;
    let one = T::one();
    let bound = epsilon_magnitude
        / (theta * (one - epsilon_magnitude * epsilon_magnitude).sqrt() * (mu - one));
    if !bound.is_finite() || bound > T::of(BOUND_OVERFLOW) {
        return Ok(T::infinity());
    }
    Ok(bound)
}

/// Product-state streams with fixed drive amplitude |epsilon| and decay
/// asymmetry mu.
///
/// Writing each qubit as (cos v, sin v e^{ia}), the family is controlled by
/// one shape parameter: the phase gap delta = a_1 - a_2 between the two
/// cross amplitudes. Fixing (|epsilon|, mu) pins the excitation split
///   w + 1/w = s(delta) = (eps^2 (mu + 1/mu) - 2 cos delta) / (1 - eps^2),
/// feasible only where s >= 2, and the leftover phase freedom is a gauge
/// that changes neither the moduli nor the reach.
#[derive(Debug, Clone)]
pub struct SeparableFamily<T> {
    epsilon_magnitude: T,
    mu: T,
}

impl<T: Scalar> SeparableFamily<T> {
    pub fn new(epsilon_magnitude: T, mu: T) -> Result<Self> {
        check_bound_inputs(epsilon_magnitude, mu)?;
        if epsilon_magnitude == T::zero() {
            return Err(Error::InvalidParameter {
                name: "epsilon_magnitude",
                detail: "a vanishing drive stabilizes only the origin".into(),
            });
        }
        Ok(SeparableFamily { epsilon_magnitude, mu })
    }

    pub fn epsilon_magnitude(&self) -> T {
        self.epsilon_magnitude
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    fn split(&self, delta: T) -> T {
        let one = T::one();
        let eps2 = self.epsilon_magnitude * self.epsilon_magnitude;
        (eps2 * (self.mu + self.mu.recip()) - T::of(2.0) * delta.cos()) / (one - eps2)
    }

    /// Smallest feasible phase gap: cos(edge) = (eps^2 (1 + mu)^2 - 2 mu) / (2 mu).
    /// At the edge both qubits carry the same excitation (w = 1).
    pub fn edge_delta(&self) -> T {
        let one = T::one();
        let two = T::of(2.0);
        let eps2 = self.epsilon_magnitude * self.epsilon_magnitude;
        let sum = one + self.mu;
        let cos_edge = (eps2 * sum * sum - two * self.mu) / (two * self.mu);
        cos_edge.max(-one).min(one).acos()
    }

    /// The product pair at phase gap delta, gauge a_1 = -delta/2, a_2 = +delta/2.
    /// The two roots of the split equation swap the qubits and give the same
    /// physics, so the w >= 1 root is used throughout.
    pub fn pair_at(&self, delta: T) -> Result<QubitPairState<T>> {
        let one = T::one();
        let two = T::of(2.0);
        let s = self.split(delta);
        // the slack absorbs the cos/acos round trip at the edge in T's precision
        if s < two * (one - T::epsilon().sqrt()) {
            return Err(Error::InvalidParameter {
                name: "delta",
                detail: format!(
                    "phase gap {:.6} is below the feasibility edge {:.6} at this drive and asymmetry",
                    delta.as_f64(),
                    self.edge_delta().as_f64()
                ),
            });
        }
        let s = s.max(two);
        let w = (s + (s * s - T::of(4.0)).sqrt()) / two;
        let t1 = (self.mu * w).sqrt().recip();
        let t2 = (w / self.mu).sqrt();
        let half = delta / two;
        let q1 = qubit(t1, -half);
        let q2 = qubit(t2, half);
        QubitPairState::product(&q1, &q2)
    }

    /// Exact supremum of the stabilized amplitude over the family, attained
    /// at the feasibility edge: |eps| (1 + mu) / (theta (mu - 1)). This
    /// exceeds `entangled_amplitude_bound` for every mu > 1.
    pub fn amplitude_sup(&self, theta: T) -> T {
        self.epsilon_magnitude * (T::one() + self.mu) / (theta * (self.mu - T::one()))
    }
}

fn qubit<T: Scalar>(tan_v: T, phase: T) -> [C<T>; 2] {
    let c = (T::one() + tan_v * tan_v).sqrt().recip();
    [Complex::new(c, T::zero()), Complex::from_polar(tan_v * c, phase)]
}

/// Result of scanning the product-state family for its amplitude reach.
#[derive(Debug, Clone)]
pub struct AmplitudeScan<T> {
    /// Largest |alpha| found over the family.
    pub sup: T,
    /// The benchmark `entangled_amplitude_bound` at the same inputs.
    pub bound: T,
    /// bound - sup. Negative: the product family out-reaches the benchmark.
    pub margin: T,
    /// The pair achieving `sup`.
    pub argmax: QubitPairState<T>,
    /// Phase gap of the argmax pair.
    pub argmax_delta: T,
}

/// Scans the product-state family at fixed (|epsilon|, mu) for the largest
/// stabilized amplitude. The free phases reduce to the single gap delta, so
/// the grid has `grid_resolution` points on the feasible arc, endpoints
/// included; refining the grid only adds interior samples, and the maximum
/// sits at the feasibility edge.
pub fn separable_amplitude_scan<T: Scalar>(
    theta: T,
    epsilon_magnitude: T,
    mu: T,
    grid_resolution: usize,
) -> Result<AmplitudeScan<T>> {
    if grid_resolution < 64 {
        return Err(Error::InvalidParameter {
            name: "grid_resolution",
            detail: format!("need at least 64 points per phase, got {}", grid_resolution),
        });
    }
    check_positive_theta(theta)?;
    let family = SeparableFamily::new(epsilon_magnitude, mu)?;
    let lo = family.edge_delta();
    let hi = T::PI();
    let steps = T::of((grid_resolution - 1) as f64);

    let mut sup = T::of(-1.0);
    let mut argmax = None;
    for k in 0..grid_resolution {
        let delta = lo + (hi - lo) * T::of(k as f64) / steps;
        let pair = family.pair_at(delta)?;
        let reach = steady_amplitude(&pair, theta).norm();
        if reach > sup {
            sup = reach;
            argmax = Some((pair, delta));
        }
    }
    let (argmax, argmax_delta) = argmax.expect("grid is nonempty");
    let bound = entangled_amplitude_bound(theta, epsilon_magnitude, mu)?;
    Ok(AmplitudeScan { sup, bound, margin: bound - sup, argmax, argmax_delta })
}

/// Constructs an entangled pair whose predicted amplitude equals
/// `entangled_amplitude_bound` exactly: even drive split, beta_gg real,
/// and the beta_ee phase solving
///   1 + mu^2 + 2 mu cos(xi) = |b_ee|^2 (1 + mu)^2 / (1 - eps^2)
/// at the largest |b_ee| the normalization allows.
///
/// Fails when that equation has no solution (cos below -1): at large mu no
/// unit-norm pair reaches the benchmark, however the phases are chosen.
pub fn entangled_pair_attaining_amplitude_bound<T: Scalar>(
    epsilon_magnitude: T,
    mu: T,
) -> Result<QubitPairState<T>> {
    check_bound_inputs(epsilon_magnitude, mu)?;
    if epsilon_magnitude == T::zero() || epsilon_magnitude > T::of(EPSILON_VALIDITY_CEILING) {
        return Err(Error::InvalidParameter {
            name: "epsilon_magnitude",
            detail: format!(
                "drive amplitude must lie in (0, {}], got {}",
                EPSILON_VALIDITY_CEILING,
                epsilon_magnitude.as_f64()
            ),
        });
    }
    let one = T::one();
    let two = T::of(2.0);
    let eps2 = epsilon_magnitude * epsilon_magnitude;
    let sum = one + mu;
    let bee2 = (one - eps2 / two) / (one + mu * mu);
    let x = bee2 * sum * sum / (one - eps2);
    let cos_xi = (x - one - mu * mu) / (two * mu);
    if cos_xi < -(one + T::of(1e-12)) {
        return Err(Error::UnreachableTarget(format!(
            "no unit pair reaches the amplitude benchmark at mu = {:.4}: \
             the phase equation needs cos(xi) = {:.4}",
            mu.as_f64(),
            cos_xi.as_f64()
        )));
    }
    let xi = cos_xi.max(-one).min(one).acos();
    let bee = bee2.sqrt();
    let half = Complex::new(epsilon_magnitude / two, T::zero());
    QubitPairState::normalized(
        Complex::new(mu * bee, T::zero()),
        half,
        half,
        Complex::from_polar(bee, xi),
    )
}

/// Coherent target (2u / theta) e^{i chi} stabilized by a stream of
/// identical qubits at tipping angle u. Leading form in u: the exact
/// steady amplitude is tan(2u) e^{i chi} / theta.
pub fn identical_input_prediction<T: Scalar>(u: T, chi: T, theta: T) -> Result<SqueezedTarget<T>> {
    check_positive_theta(theta)?;
    let quarter_pi = T::PI() / T::of(4.0);
    if !(u > T::zero() && u < quarter_pi) {
        return Err(Error::InvalidParameter {
            name: "u",
            detail: format!("tipping angle must lie in (0, pi/4), got {}", u.as_f64()),
        });
    }
    if !chi.is_finite() {
        return Err(Error::InvalidParameter {
            name: "chi",
            detail: "drive phase must be finite".into(),
        });
    }
    let alpha = Complex::from_polar(T::of(2.0) * u / theta, chi);
    Ok(SqueezedTarget::coherent(alpha))
}

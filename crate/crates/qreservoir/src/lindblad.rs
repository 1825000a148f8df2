//! Second-order effective Lindblad model of the pair stream, its RK4
//! integrator, and the displaced-squeezed frame transformation.
//!
//! The model approximates the discrete pair map to second order in theta:
//! one time unit equals one pair interaction.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::fock::{self, DensityMatrix, FockOperator};
use crate::interaction::{QubitPairState, RecordKeeper, SimOptions, Trajectory};
use crate::linalg::CMat;
use crate::scalar::{Scalar, C};
use crate::squeezing::{displacement_op, squeezing_op};

/// Integrator step cap: dt <= DT_CAP_SCALE / theta^2.
pub const DT_CAP_SCALE: f64 = 0.01;

/// Default integrator step in pair-time units.
pub const DEFAULT_DT: f64 = 0.5;

/// Residual generator norm treated as a fixed point.
pub const FIXED_POINT_TOL: f64 = 1e-12;

/// Trace drift that aborts integration as a step-size failure.
pub const TRACE_DRIFT_TOL: f64 = 1e-6;

/// Which dissipation channels the effective model keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LindbladChannels {
    /// All three channels of the second-order expansion.
    Three,
    /// Only the dominant squeeze-loss channel L1.
    DominantOnly,
}

/// Effective continuous-time model: Hamiltonian plus dissipation channels.
#[derive(Debug, Clone)]
pub struct LindbladModel<T> {
    hamiltonian: FockOperator<T>,
    lindblad_ops: Vec<FockOperator<T>>,
    theta: T,
}

impl<T: Scalar> LindbladModel<T> {
    /// Assembles a model from parts; the Hamiltonian must be Hermitian and
    /// all operators share one dimension. `theta` sets the step-size cap.
    pub fn new(
        hamiltonian: FockOperator<T>,
        lindblad_ops: Vec<FockOperator<T>>,
        theta: T,
    ) -> Result<Self> {
        if hamiltonian.hermiticity_defect() > T::HERM_TOL {
            return Err(Error::InvalidParameter {
                name: "hamiltonian",
                detail: "must be Hermitian".into(),
            });
        }
        for l in &lindblad_ops {
            if l.dim() != hamiltonian.dim() {
                return Err(Error::DimensionMismatch { left: hamiltonian.dim(), right: l.dim() });
            }
        }
        if !(theta >= T::zero()) || !theta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "theta",
                detail: "interaction angle must be finite and non-negative".into(),
            });
        }
        Ok(LindbladModel { hamiltonian, lindblad_ops, theta })
    }

    pub fn hamiltonian(&self) -> &FockOperator<T> {
        &self.hamiltonian
    }

    pub fn lindblad_ops(&self) -> &[FockOperator<T>] {
        &self.lindblad_ops
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    /// Largest integrator step the model accepts.
    pub fn dt_cap(&self) -> T {
        if self.theta == T::zero() {
            T::infinity()
        } else {
            T::of(DT_CAP_SCALE) / (self.theta * self.theta)
        }
    }
}

/// Second-order effective model of one pair interaction per time unit:
/// H = -i theta (Q - Q') with Q = (b_gg eps* + b_ee* eps) a,
/// L1 = sqrt2 theta (b_gg a - b_ee a'), L2 = theta eps a, L3 = theta eps a',
/// where eps = b_ge + b_eg.
pub fn effective_model<T: Scalar>(
    pair: &QubitPairState<T>,
    theta: T,
    dim: usize,
) -> Result<LindbladModel<T>> {
    effective_model_channels(pair, theta, dim, LindbladChannels::Three)
}

/// Dominant-channel variant: keeps only L1 (the thermal channels L2, L3
/// carry weight |eps| theta and vanish for eps = 0 pairs).
pub fn dominant_model<T: Scalar>(
    pair: &QubitPairState<T>,
    theta: T,
    dim: usize,
) -> Result<LindbladModel<T>> {
    effective_model_channels(pair, theta, dim, LindbladChannels::DominantOnly)
}

pub fn effective_model_channels<T: Scalar>(
    pair: &QubitPairState<T>,
    theta: T,
    dim: usize,
    channels: LindbladChannels,
) -> Result<LindbladModel<T>> {
    fock::check_dim(dim)?;
    if !(theta >= T::zero()) || !theta.is_finite() {
        return Err(Error::InvalidParameter {
            name: "theta",
            detail: "interaction angle must be finite and non-negative".into(),
        });
    }
    let a = fock::annihilation_op(dim)?;
    let ad = fock::creation_op(dim)?;
    let eps = pair.epsilon();
    let th = Complex::new(theta, T::zero());

    let q_coeff = pair.beta_gg() * eps.conj() + pair.beta_ee().conj() * eps;
    // H = -i theta (q a - q* a') = x + x' with x = (-i theta q) a
    let minus_i_theta = Complex::new(T::zero(), -theta);
    let x = a.scaled(minus_i_theta * q_coeff);
    let h = &x + &x.adjoint();

    let sqrt2 = Complex::new(T::of(2.0).sqrt() * theta, T::zero());
    let l1 = &a.scaled(sqrt2 * pair.beta_gg()) - &ad.scaled(sqrt2 * pair.beta_ee());
    let ops = match channels {
        LindbladChannels::DominantOnly => vec![l1],
        LindbladChannels::Three => {
            let l2 = a.scaled(th * eps);
            let l3 = ad.scaled(th * eps);
            vec![l1, l2, l3]
        }
    };
    LindbladModel::new(h, ops, theta)
}

/// Precomputed generator pieces: G = -iH - (1/2) sum L'L, so that
/// rhs(rho) = G rho + rho G' + sum L rho L'.
struct Generator<T> {
    g: CMat<T>,
    g_adj: CMat<T>,
    // zero channels are dropped up front
    ops: Vec<CMat<T>>,
    adjs: Vec<CMat<T>>,
}

impl<T: Scalar> Generator<T> {
    fn new(model: &LindbladModel<T>) -> Self {
        let dim = model.dim();
        let mut g = model.hamiltonian.matrix().scale(Complex::new(T::zero(), -T::one()));
        let mut ops = Vec::new();
        let mut adjs = Vec::new();
        let minus_half = Complex::new(-T::of(0.5), T::zero());
        for l in &model.lindblad_ops {
            if l.max_abs() == T::zero() {
                continue;
            }
            let lm = l.matrix().clone();
            let la = lm.adjoint();
            g = g.add(&la.matmul(&lm).scale(minus_half));
            ops.push(lm);
            adjs.push(la);
        }
        let g_adj = g.adjoint();
        debug_assert_eq!(g.dim(), dim);
        Generator { g, g_adj, ops, adjs }
    }

    /// dim x dim scratch-free evaluation of the master-equation right side.
    fn rhs(&self, rho: &CMat<T>) -> CMat<T> {
        let mut out = self.g.matmul(rho);
        out = out.add(&rho.matmul(&self.g_adj));
        for (l, la) in self.ops.iter().zip(&self.adjs) {
            out = out.add(&l.matmul(rho).matmul(la));
        }
        out
    }
}

/// Master-equation right side d rho / d tau for one state.
pub fn rhs<T: Scalar>(model: &LindbladModel<T>, rho: &DensityMatrix<T>) -> Result<FockOperator<T>> {
    if model.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { left: model.dim(), right: rho.dim() });
    }
    FockOperator::from_matrix(Generator::new(model).rhs(rho.matrix()))
}

fn add_scaled<T: Scalar>(a: &CMat<T>, b: &CMat<T>, c: C<T>) -> CMat<T> {
    let mut out = a.clone();
    out.add_scaled_assign(b, c);
    out
}

/// Integrates d rho/d tau with classical RK4 until `opts.steps` steps, a
/// fixed point (generator residual below FIXED_POINT_TOL), or the
/// trajectory target's early-stop window. Trace drift beyond
/// TRACE_DRIFT_TOL aborts with a step-size error and is never renormalized
/// away; records carry the running trace so drift stays visible.
pub fn integrate<T: Scalar>(
    model: &LindbladModel<T>,
    rho0: &DensityMatrix<T>,
    dt: T,
    opts: &SimOptions<T>,
) -> Result<Trajectory<T>> {
    if model.dim() != rho0.dim() {
        return Err(Error::DimensionMismatch { left: model.dim(), right: rho0.dim() });
    }
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(Error::InvalidParameter {
            name: "dt",
            detail: "step must be positive and finite".into(),
        });
    }
    if dt > model.dt_cap() {
        return Err(Error::InvalidParameter {
            name: "dt",
            detail: format!(
                "step {} exceeds the stability cap {} = {}/theta^2",
                dt.as_f64(),
                model.dt_cap().as_f64(),
                DT_CAP_SCALE
            ),
        });
    }
    if opts.steps == 0 {
        return Err(Error::InvalidParameter { name: "steps", detail: "need at least 1 step".into() });
    }
    if opts.record_every == 0 {
        return Err(Error::InvalidParameter {
            name: "record_every",
            detail: "record interval must be positive".into(),
        });
    }

    let gen = Generator::new(model);
    let mut keeper = RecordKeeper::new(opts);
    let mut rho = rho0.matrix().clone();
    keeper.record(0, T::zero(), &DensityMatrix::new_unchecked(rho.clone()))?;

    let half = Complex::new(dt / T::of(2.0), T::zero());
    let sixth = Complex::new(dt / T::of(6.0), T::zero());
    let two = Complex::new(T::of(2.0), T::zero());
    let full = Complex::new(dt, T::zero());
    let drift_tol = T::of(TRACE_DRIFT_TOL);
    let fixed_tol = T::of(FIXED_POINT_TOL);

    let mut steps_run = 0;
    let mut last_recorded = 0;
    for step in 1..=opts.steps {
        let k1 = gen.rhs(&rho);
        if k1.max_abs() < fixed_tol {
            keeper.stopped_early = true;
            break;
        }
        let k2 = gen.rhs(&add_scaled(&rho, &k1, half));
        let k3 = gen.rhs(&add_scaled(&rho, &k2, half));
        let k4 = gen.rhs(&add_scaled(&rho, &k3, full));

        let mut incr = k1;
        incr.add_scaled_assign(&k2, two);
        incr.add_scaled_assign(&k3, two);
        incr = incr.add(&k4);
        rho.add_scaled_assign(&incr, sixth);
        steps_run = step;

        let drift = (rho.trace().re - T::one()).abs();
        if drift > drift_tol {
            return Err(Error::StepSize(format!(
                "trace drifted {:.3e} at step {}; reduce dt below {}",
                drift.as_f64(),
                step,
                dt.as_f64()
            )));
        }
        if step == opts.steps || step % opts.record_every == 0 {
            last_recorded = step;
            let tau = dt * T::of(step as f64);
            if keeper.record(step, tau, &DensityMatrix::new_unchecked(rho.clone()))? {
                break;
            }
        }
    }
    let state = DensityMatrix::new_unchecked(rho);
    if last_recorded != steps_run {
        let tau = dt * T::of(steps_run as f64);
        keeper.record(steps_run, tau, &state)?;
    }
    Ok(keeper.into_trajectory(state, steps_run))
}

/// Conjugates the model into the frame of D(alpha)S(zeta): every operator
/// X becomes U' X U. With a design's predicted frame parameters this sends
/// L1 to (up to a constant) the bare annihilator and shrinks H to the
/// epsilon-order residue.
pub fn transform_frame<T: Scalar>(
    model: &LindbladModel<T>,
    alpha: C<T>,
    zeta: C<T>,
) -> Result<LindbladModel<T>> {
    let u = frame_unitary(alpha, zeta, model.dim())?;
    conjugate_model(model, &u.adjoint(), &u)
}

/// Inverse frame map: conjugates by the adjoint, X -> U X U'. Exactly
/// undoes `transform_frame` with the same (alpha, zeta) at the matrix
/// level, because the truncated generators are exactly antihermitian and
/// their exponentials exactly unitary.
pub fn transform_frame_inverse<T: Scalar>(
    model: &LindbladModel<T>,
    alpha: C<T>,
    zeta: C<T>,
) -> Result<LindbladModel<T>> {
    let u = frame_unitary(alpha, zeta, model.dim())?;
    conjugate_model(model, &u, &u.adjoint())
}

/// Frame parameters that invert (alpha, zeta) through `transform_frame`
/// itself: reordering S'D' = D(alpha')S(zeta') gives zeta' = -zeta and
/// alpha' = -(alpha cosh r + alpha* e^{i phi} sinh r). Exact only in the
/// untruncated algebra; prefer `transform_frame_inverse` when matrix-level
/// exactness matters.
pub fn inverse_frame_params<T: Scalar>(alpha: C<T>, zeta: C<T>) -> (C<T>, C<T>) {
    let r = zeta.norm();
    let phase = if r == T::zero() { Complex::new(T::one(), T::zero()) } else { zeta / Complex::new(r, T::zero()) };
    let alpha_inv = -(alpha * Complex::new(r.cosh(), T::zero())
        + alpha.conj() * phase * Complex::new(r.sinh(), T::zero()));
    (alpha_inv, -zeta)
}

fn frame_unitary<T: Scalar>(alpha: C<T>, zeta: C<T>, dim: usize) -> Result<FockOperator<T>> {
    let d = displacement_op(alpha, dim)?;
    let s = squeezing_op(zeta, dim)?;
    Ok(&d * &s)
}

fn conjugate_model<T: Scalar>(
    model: &LindbladModel<T>,
    left: &FockOperator<T>,
    right: &FockOperator<T>,
) -> Result<LindbladModel<T>> {
    let conj = |x: &FockOperator<T>| left * &(x * right);
    let h = conj(&model.hamiltonian);
    let ops = model.lindblad_ops.iter().map(conj).collect();
    LindbladModel::new(h, ops, model.theta)
}

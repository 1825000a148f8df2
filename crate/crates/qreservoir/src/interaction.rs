//! Qubit-pair reservoir states, the exact pair-interaction Kraus map, and
//! the repeated-interaction trajectory engine.
//!
//! One time unit is one qubit pair: the first qubit of the pair interacts
//! with the oscillator, then the second. Amplitude indices follow that
//! order with the second qubit first: `beta_xy` is the amplitude for the
//! second qubit in x and the first-interacting qubit in y. The Kraus
//! operator `M_xy` likewise collects the oscillator evolution conditioned
//! on the pair leaving in (second = x, first = y), with the first qubit's
//! block applied rightmost.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fock::{
    annihilation_op, number_function_op, trace_distance, DensityMatrix, FockOperator,
};
use crate::linalg::CMat;
use crate::scalar::{Scalar, C};

/// Joint state of one qubit pair, |pair> = sum beta_xy |x>_2 |y>_1.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitPairState<T> {
    beta_gg: C<T>,
    beta_ge: C<T>,
    beta_eg: C<T>,
    beta_ee: C<T>,
}

impl<T: Scalar> QubitPairState<T> {
    /// Validates the normalization |b_gg|^2 + .. + |b_ee|^2 = 1.
    pub fn new(beta_gg: C<T>, beta_ge: C<T>, beta_eg: C<T>, beta_ee: C<T>) -> Result<Self> {
        let norm_sq =
            beta_gg.norm_sqr() + beta_ge.norm_sqr() + beta_eg.norm_sqr() + beta_ee.norm_sqr();
        if (norm_sq - T::one()).abs() > T::NORM_TOL {
            return Err(Error::InvalidState(format!(
                "qubit pair norm^2 = {} deviates from 1 beyond tolerance",
                norm_sq.as_f64()
            )));
        }
        Ok(QubitPairState { beta_gg, beta_ge, beta_eg, beta_ee })
    }

    /// Rescales arbitrary nonzero amplitudes to a normalized pair state.
    pub fn normalized(beta_gg: C<T>, beta_ge: C<T>, beta_eg: C<T>, beta_ee: C<T>) -> Result<Self> {
        let norm_sq =
            beta_gg.norm_sqr() + beta_ge.norm_sqr() + beta_eg.norm_sqr() + beta_ee.norm_sqr();
        if norm_sq <= T::zero() {
            return Err(Error::InvalidState("cannot normalize the zero pair state".into()));
        }
        let inv = Complex::new(T::one() / norm_sq.sqrt(), T::zero());
        Ok(QubitPairState {
            beta_gg: beta_gg * inv,
            beta_ge: beta_ge * inv,
            beta_eg: beta_eg * inv,
            beta_ee: beta_ee * inv,
        })
    }

    /// Product state of two independent qubits (each as (g, e) amplitudes);
    /// `first` interacts with the oscillator before `second`.
    pub fn product(first: &[C<T>; 2], second: &[C<T>; 2]) -> Result<Self> {
        Self::normalized(
            second[0] * first[0],
            second[0] * first[1],
            second[1] * first[0],
            second[1] * first[1],
        )
    }

    /// Alternating stream: first qubit cos(u)|g> + sin(u)|e>, second qubit
    /// cos(u)|g> - sin(u)|e>. Separable, epsilon = 0, squeezes the
    /// stabilised state.
    pub fn alternating(u: T) -> Result<Self> {
        let (s, cu) = (u.sin(), u.cos());
        Self::product(
            &[Complex::new(cu, T::zero()), Complex::new(s, T::zero())],
            &[Complex::new(cu, T::zero()), Complex::new(-s, T::zero())],
        )
    }

    /// Both qubits prepared as cos(u)|g> + e^{i chi} sin(u)|e>; stabilises
    /// a coherent state of phase chi.
    pub fn identical(u: T, chi: T) -> Result<Self> {
        let q = [
            Complex::new(u.cos(), T::zero()),
            Complex::from_polar(u.sin(), chi),
        ];
        Self::product(&q, &q)
    }

    #[inline]
    pub fn beta_gg(&self) -> C<T> {
        self.beta_gg
    }

    #[inline]
    pub fn beta_ge(&self) -> C<T> {
        self.beta_ge
    }

    #[inline]
    pub fn beta_eg(&self) -> C<T> {
        self.beta_eg
    }

    #[inline]
    pub fn beta_ee(&self) -> C<T> {
        self.beta_ee
    }

    /// Thermal-channel amplitude beta_ge + beta_eg.
    pub fn epsilon(&self) -> C<T> {
        self.beta_ge + self.beta_eg
    }

    /// Amplitude ratio |beta_gg| / |beta_ee|; infinite when beta_ee = 0.
    pub fn mu(&self) -> T {
        let bee = self.beta_ee.norm();
        if bee == T::zero() {
            T::infinity()
        } else {
            self.beta_gg.norm() / bee
        }
    }

    /// Entanglement of the pair: 2 |b_gg b_ee - b_ge b_eg| in [0, 1].
    pub fn concurrence(&self) -> T {
        let det = self.beta_gg * self.beta_ee - self.beta_ge * self.beta_eg;
        (T::of(2.0) * det.norm()).min(T::one())
    }

    /// Multiplies every amplitude by e^{i phi}; all physics is invariant.
    pub fn with_global_phase(&self, phi: T) -> Self {
        let ph = Complex::from_polar(T::one(), phi);
        QubitPairState {
            beta_gg: self.beta_gg * ph,
            beta_ge: self.beta_ge * ph,
            beta_eg: self.beta_eg * ph,
            beta_ee: self.beta_ee * ph,
        }
    }

    pub fn amplitudes(&self) -> [C<T>; 4] {
        [self.beta_gg, self.beta_ge, self.beta_eg, self.beta_ee]
    }
}

fn check_theta<T: Scalar>(theta: T) -> Result<()> {
    if theta < T::zero() || !theta.is_finite() {
        return Err(Error::InvalidParameter {
            name: "theta",
            detail: format!("interaction angle must be finite and >= 0, got {}", theta.as_f64()),
        });
    }
    Ok(())
}

/// The four oscillator-space blocks of the single-interaction propagator,
/// indexed by (qubit out, qubit in).
struct PropagatorBlocks<T> {
    gg: FockOperator<T>, // cos(theta sqrt(N))
    ge: FockOperator<T>, // sinc * a^dagger
    eg: FockOperator<T>, // -a * sinc
    ee: FockOperator<T>, // cos(theta sqrt(N+1))
}

fn propagator_blocks<T: Scalar>(theta: T, dim: usize) -> Result<PropagatorBlocks<T>> {
    let a = annihilation_op::<T>(dim)?;
    let cos_n = number_function_op(|n| (theta * T::of(n as f64).sqrt()).cos(), dim)?;
    let cos_n1 = number_function_op(|n| (theta * T::of((n + 1) as f64).sqrt()).cos(), dim)?;
    // sinc(n) = sin(theta sqrt(n)) / sqrt(n), with the analytic limit
    // sinc(0) = theta; the value at n = 0 only ever multiplies vectors
    // annihilated by the adjacent ladder operator.
    let sinc = number_function_op(
        |n| {
            if n == 0 {
                theta
            } else {
                let root = T::of(n as f64).sqrt();
                (theta * root).sin() / root
            }
        },
        dim,
    )?;
    let ge = &sinc * &a.adjoint();
    let eg = (&a * &sinc).scaled(Complex::new(-T::one(), T::zero()));
    Ok(PropagatorBlocks { gg: cos_n, ge, eg, ee: cos_n1 })
}

/// Single qubit-oscillator propagator on the joint space, a 2*dim square
/// matrix with basis |g>|0..dim-1> then |e>|0..dim-1>.
pub fn single_qubit_propagator<T: Scalar>(theta: T, dim: usize) -> Result<CMat<T>> {
    check_theta(theta)?;
    let blocks = propagator_blocks(theta, dim)?;
    let mut u = CMat::zeros(2 * dim);
    let put = |u: &mut CMat<T>, row_block: usize, col_block: usize, op: &FockOperator<T>| {
        for i in 0..dim {
            for j in 0..dim {
                u.set(row_block * dim + i, col_block * dim + j, op.get(i, j));
            }
        }
    };
    put(&mut u, 0, 0, &blocks.gg);
    put(&mut u, 0, 1, &blocks.ge);
    put(&mut u, 1, 0, &blocks.eg);
    put(&mut u, 1, 1, &blocks.ee);
    Ok(u)
}

/// The four Kraus operators of one pair interaction, indexed by the
/// outgoing pair state (second qubit, first qubit).
#[derive(Debug, Clone)]
pub struct KrausSet<T> {
    pub m_gg: FockOperator<T>,
    pub m_ge: FockOperator<T>,
    pub m_eg: FockOperator<T>,
    pub m_ee: FockOperator<T>,
}

impl<T: Scalar> KrausSet<T> {
    pub fn dim(&self) -> usize {
        self.m_gg.dim()
    }

    pub fn operators(&self) -> [&FockOperator<T>; 4] {
        [&self.m_gg, &self.m_ge, &self.m_eg, &self.m_ee]
    }

    /// Max entrywise deviation of sum M^dagger M from the identity on the
    /// leading `sub_dim` Fock levels. The top two levels are expected to
    /// leak (a^dagger maps the top level out of the space), so callers
    /// normally pass dim - 2.
    pub fn completeness_defect(&self, sub_dim: usize) -> T {
        let dim = self.dim();
        let sub = sub_dim.min(dim);
        let mut sum = CMat::zeros(dim);
        for m in self.operators() {
            sum = sum.add(&m.adjoint().matrix().matmul(m.matrix()));
        }
        let mut worst = T::zero();
        for i in 0..sub {
            for j in 0..sub {
                let expect = if i == j { Complex::new(T::one(), T::zero()) } else { C::zero() };
                worst = worst.max((sum.get(i, j) - expect).norm());
            }
        }
        worst
    }
}

/// Builds the four Kraus operators for one pair interaction term by term
/// from the conditional propagator blocks:
/// M_xy = sum_{x', y'} beta_{x'y'} B[x, x'] B[y, y'] with the first
/// qubit's block B[y, y'] applied first (rightmost).
pub fn kraus_operators<T: Scalar>(
    pair: &QubitPairState<T>,
    theta: T,
    dim: usize,
) -> Result<KrausSet<T>> {
    check_theta(theta)?;
    let b = propagator_blocks(theta, dim)?;
    let assemble = |b2g: &FockOperator<T>, b2e: &FockOperator<T>, b1g: &FockOperator<T>, b1e: &FockOperator<T>| {
        let t_gg = b2g * b1g;
        let t_ge = b2g * b1e;
        let t_eg = b2e * b1g;
        let t_ee = b2e * b1e;
        let mut m = t_gg.scaled(pair.beta_gg);
        m = &m + &t_ge.scaled(pair.beta_ge);
        m = &m + &t_eg.scaled(pair.beta_eg);
        m = &m + &t_ee.scaled(pair.beta_ee);
        m
    };
    // M_xy: second qubit out = x selects B[x, .], first qubit out = y
    // selects B[y, .]; the incoming indices are summed over with the
    // pair amplitudes.
    let m_gg = assemble(&b.gg, &b.ge, &b.gg, &b.ge);
    let m_ge = assemble(&b.gg, &b.ge, &b.eg, &b.ee);
    let m_eg = assemble(&b.eg, &b.ee, &b.gg, &b.ge);
    let m_ee = assemble(&b.eg, &b.ee, &b.eg, &b.ee);
    Ok(KrausSet { m_gg, m_ge, m_eg, m_ee })
}

/// One pair interaction: rho' = sum M rho M^dagger. Trace drift beyond
/// 1e-6 signals that probability is escaping through the truncation edge.
pub fn apply_kraus_map<T: Scalar>(
    rho: &DensityMatrix<T>,
    kraus: &KrausSet<T>,
) -> Result<DensityMatrix<T>> {
    if rho.dim() != kraus.dim() {
        return Err(Error::DimensionMismatch { left: rho.dim(), right: kraus.dim() });
    }
    let dim = rho.dim();
    let mut out = CMat::zeros(dim);
    for m in kraus.operators() {
        let mr = m.matrix().matmul(rho.matrix());
        out = out.add(&mr.matmul(&m.matrix().adjoint()));
    }
    let drift = (out.trace().re - rho.trace().re).abs();
    if drift > T::of(1e-6) {
        return Err(Error::TruncationOverflow(format!(
            "trace drifted by {} in one pair interaction",
            drift.as_f64()
        )));
    }
    Ok(DensityMatrix::new_unchecked(out))
}

/// Target used for per-step distance diagnostics.
#[derive(Debug, Clone)]
pub enum TargetState<T> {
    Pure(crate::fock::PureState<T>),
    Mixed(DensityMatrix<T>),
}

impl<T: Scalar> TargetState<T> {
    fn to_density(&self) -> DensityMatrix<T> {
        match self {
            TargetState::Pure(psi) => psi.to_density(),
            TargetState::Mixed(rho) => rho.clone(),
        }
    }
}

/// Knobs for [`simulate`] and the Lindblad integrator.
#[derive(Debug, Clone)]
pub struct SimOptions<T> {
    /// Maximum number of steps (pair interactions, or RK4 steps).
    pub steps: usize,
    /// Diagnostics are recorded every this many steps (and at step 0 and
    /// the final step).
    pub record_every: usize,
    /// Optional target for distance/fidelity diagnostics.
    pub target: Option<TargetState<T>>,
    /// Keep a copy of every recorded state in the trajectory.
    pub keep_states: bool,
    /// Stop once the state has stopped moving between records.
    pub early_stop: bool,
}

impl<T: Scalar> Default for SimOptions<T> {
    fn default() -> Self {
        SimOptions { steps: 10_000, record_every: 25, target: None, keep_states: false, early_stop: true }
    }
}

/// Diagnostics for one recorded step.
#[derive(Debug, Clone)]
pub struct StepRecord<T> {
    pub step: usize,
    /// Physical time in pair units.
    pub tau: T,
    pub trace: T,
    pub leakage: T,
    pub dist_to_target: Option<T>,
    pub fidelity_to_target: Option<T>,
}

/// Recorded history of a simulation or integration run.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub records: Vec<StepRecord<T>>,
    /// Recorded states, parallel to `records`, when `keep_states` was set.
    pub states: Vec<DensityMatrix<T>>,
    pub final_state: DensityMatrix<T>,
    pub steps_run: usize,
    pub stopped_early: bool,
}

impl<T: Scalar> Trajectory<T> {
    pub fn final_record(&self) -> &StepRecord<T> {
        self.records.last().expect("trajectory records step 0")
    }
}

/// Number of consecutive quiet records that end a run early.
const EARLY_STOP_RUN: usize = 10;

pub(crate) struct RecordKeeper<T> {
    target: Option<(DensityMatrix<T>, Option<crate::fock::PureState<T>>)>,
    keep_states: bool,
    early_stop: bool,
    records: Vec<StepRecord<T>>,
    states: Vec<DensityMatrix<T>>,
    prev: Option<CMat<T>>,
    quiet_run: usize,
    pub stopped_early: bool,
}

impl<T: Scalar> RecordKeeper<T> {
    pub fn new(opts: &SimOptions<T>) -> Self {
        let target = opts.target.as_ref().map(|t| {
            let pure = match t {
                TargetState::Pure(psi) => Some(psi.clone()),
                TargetState::Mixed(_) => None,
            };
            (t.to_density(), pure)
        });
        RecordKeeper {
            target,
            keep_states: opts.keep_states,
            early_stop: opts.early_stop,
            records: Vec::new(),
            states: Vec::new(),
            prev: None,
            quiet_run: 0,
            stopped_early: false,
        }
    }

    /// Records diagnostics; returns true when the caller should stop.
    pub fn record(&mut self, step: usize, tau: T, rho: &DensityMatrix<T>) -> Result<bool> {
        let (dist, fid) = match &self.target {
            None => (None, None),
            Some((density, pure)) => {
                let dist = trace_distance(rho, density)?;
                let fid = match pure {
                    Some(psi) => crate::fock::fidelity_to_pure(rho, psi)?,
                    None => crate::fock::fidelity(rho, density)?,
                };
                (Some(dist), Some(fid))
            }
        };
        self.records.push(StepRecord {
            step,
            tau,
            trace: rho.trace().re,
            leakage: rho.leakage(),
            dist_to_target: dist,
            fidelity_to_target: fid,
        });
        if self.keep_states {
            self.states.push(rho.clone());
        }
        let mut stop = false;
        if self.early_stop {
            if let Some(prev) = &self.prev {
                // 1/2 sqrt(n) ||diff||_F bounds the trace distance from
                // above, so a quiet run under the surrogate is also quiet
                // under the true metric.
                let n = T::of(rho.dim() as f64).sqrt();
                let surrogate = rho.matrix().sub(prev).frobenius_norm() * n * T::of(0.5);
                if surrogate < T::of(1e-10) {
                    self.quiet_run += 1;
                } else {
                    self.quiet_run = 0;
                }
                if self.quiet_run >= EARLY_STOP_RUN {
                    stop = true;
                    self.stopped_early = true;
                }
            }
            self.prev = Some(rho.matrix().clone());
        }
        Ok(stop)
    }

    pub fn into_trajectory(self, final_state: DensityMatrix<T>, steps_run: usize) -> Trajectory<T> {
        Trajectory {
            records: self.records,
            states: self.states,
            final_state,
            steps_run,
            stopped_early: self.stopped_early,
        }
    }
}

/// Repeated-interaction simulation: applies the Kraus map of each pair in
/// turn, cycling through `pairs`, for up to `opts.steps` interactions.
pub fn simulate<T: Scalar>(
    rho0: &DensityMatrix<T>,
    pairs: &[QubitPairState<T>],
    theta: T,
    opts: &SimOptions<T>,
) -> Result<Trajectory<T>> {
    if opts.steps == 0 {
        return Err(Error::InvalidParameter { name: "steps", detail: "need at least 1 step".into() });
    }
    if opts.record_every == 0 {
        return Err(Error::InvalidParameter {
            name: "record_every",
            detail: "record interval must be positive".into(),
        });
    }
    if pairs.is_empty() {
        return Err(Error::InvalidParameter {
            name: "pairs",
            detail: "need at least one pair state".into(),
        });
    }
    let kraus: Vec<KrausSet<T>> =
        pairs.iter().map(|p| kraus_operators(p, theta, rho0.dim())).collect::<Result<_>>()?;
    let mut keeper = RecordKeeper::new(opts);
    let mut rho = rho0.clone();
    keeper.record(0, T::zero(), &rho)?;
    let mut steps_run = 0;
    for step in 1..=opts.steps {
        rho = apply_kraus_map(&rho, &kraus[(step - 1) % kraus.len()])?;
        steps_run = step;
        if step % opts.record_every == 0 || step == opts.steps {
            if keeper.record(step, T::of(step as f64), &rho)? {
                break;
            }
        }
    }
    Ok(keeper.into_trajectory(rho, steps_run))
}

/// Exponential convergence rate fitted from the recorded trace distances.
///
/// The fit uses the linear regime of log distance (between 1e-1 and 1e-3)
/// and requires the trajectory to have actually converged (final distance
/// below 1e-4). Distances are recomputed against `target` when the
/// trajectory kept its states; otherwise the recorded distances are used
/// and must have been taken against the same target.
pub fn fit_convergence_rate<T: Scalar>(
    traj: &Trajectory<T>,
    target: &DensityMatrix<T>,
) -> Result<T> {
    let mut points: Vec<(T, T)> = Vec::new();
    if !traj.states.is_empty() {
        for (rec, state) in traj.records.iter().zip(&traj.states) {
            points.push((rec.tau, trace_distance(state, target)?));
        }
    } else {
        for rec in &traj.records {
            match rec.dist_to_target {
                Some(d) => points.push((rec.tau, d)),
                None => {
                    return Err(Error::FitFailure(
                        "trajectory has neither kept states nor recorded distances".into(),
                    ))
                }
            }
        }
    }
    let final_dist = trace_distance(&traj.final_state, target)?;
    if final_dist >= T::of(1e-4) {
        return Err(Error::FitFailure(format!(
            "trajectory has not converged: final distance {}",
            final_dist.as_f64()
        )));
    }
    let lo = T::of(1e-3);
    let hi = T::of(1e-1);
    let window: Vec<(T, T)> = points
        .into_iter()
        .filter(|(_, d)| *d >= lo && *d <= hi)
        .map(|(t, d)| (t, d.ln()))
        .collect();
    if window.len() < 3 {
        return Err(Error::FitFailure(format!(
            "only {} recorded points fall in the linear regime; record more densely",
            window.len()
        )));
    }
    // Least-squares slope of ln(distance) against tau.
    let n = T::of(window.len() as f64);
    let sum_t: T = window.iter().map(|(t, _)| *t).sum();
    let sum_y: T = window.iter().map(|(_, y)| *y).sum();
    let mean_t = sum_t / n;
    let mean_y = sum_y / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for (t, y) in &window {
        let dt = *t - mean_t;
        sxx += dt * dt;
        sxy += dt * (*y - mean_y);
    }
    if sxx <= T::zero() {
        return Err(Error::FitFailure("degenerate time axis in fit window".into()));
    }
    Ok(-sxy / sxx)
}

//! Drives the public API end to end: build a qubit-pair stream, run the
//! repeated-interaction map from vacuum, and report convergence diagnostics.
//! A second leg squeezes the oscillator with an alternating stream, checks
//! the quadrature laws, and cross-validates against the continuous model.

use qreservoir::interaction::{self, SimOptions, TargetState};
use qreservoir::lindblad;
use qreservoir::squeezing::{extremal_variances, make_state};
use qreservoir::{DensityMatrix64, PureState64, QubitPairState64, SqueezedTarget64};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dim = 40;
    let theta = 0.1;

    // Identical-qubit stream with small excited amplitude: stabilises a
    // coherent state with alpha close to sin(2u)/theta.
    let u = 0.05f64;
    let pair = QubitPairState64::identical(u, 0.0)?;
    println!(
        "pair amplitudes: gg={:+.6} ge={:+.6} eg={:+.6} ee={:+.6}",
        pair.beta_gg().re,
        pair.beta_ge().re,
        pair.beta_eg().re,
        pair.beta_ee().re
    );
    println!("pair epsilon = {:+.6}{:+.6}i", pair.epsilon().re, pair.epsilon().im);
    println!("pair concurrence = {:.3e}", pair.concurrence());

    let kraus = interaction::kraus_operators(&pair, theta, dim)?;
    println!("kraus completeness defect = {:.3e}", kraus.completeness_defect(dim - 2));

    // Independent target: coherent state assembled directly in the Fock basis.
    let alpha = (2.0 * u).sin() / theta;
    let amps: Vec<_> = (0..dim)
        .scan(qreservoir::c::<f64>(1.0, 0.0), |acc, n| {
            let out = *acc;
            *acc = *acc * qreservoir::c(alpha, 0.0) / qreservoir::c(((n + 1) as f64).sqrt(), 0.0);
            Some(out)
        })
        .collect();
    let target = PureState64::normalized(amps)?;

    let initial = DensityMatrix64::vacuum(dim)?;
    let options = SimOptions {
        steps: 6000,
        record_every: 200,
        target: Some(TargetState::Pure(target.clone())),
        keep_states: false,
        early_stop: true,
    };
    let traj = interaction::simulate(&initial, &[pair], theta, &options)?;

    println!("steps run = {} (early stop = {})", traj.steps_run, traj.stopped_early);
    for rec in &traj.records {
        println!(
            "step {:>5}  tau {:>7.2}  trace {:+.12}  leak {:.3e}  dist {:.3e}  fid {:.9}",
            rec.step,
            rec.tau,
            rec.trace,
            rec.leakage,
            rec.dist_to_target.unwrap_or(f64::NAN),
            rec.fidelity_to_target.unwrap_or(f64::NAN)
        );
    }

    let final_fid =
        traj.final_record().fidelity_to_target.ok_or("missing fidelity record")?;
    println!("final fidelity to coherent target = {:.9}", final_fid);

    // Second leg: an alternating stream squeezes the vacuum. The stabilised
    // state should match the squeezed target and obey the variance laws.
    let us = 0.2f64;
    let alt = QubitPairState64::alternating(us)?;
    let r = (us.tan() * us.tan()).atanh();
    let sq_target = SqueezedTarget64::new(qreservoir::c(0.0, 0.0), r, 0.0)?;
    let sq_state = make_state(&sq_target, dim)?;
    let sq_options = SimOptions {
        steps: 8000,
        record_every: 400,
        target: Some(TargetState::Pure(sq_state.clone())),
        keep_states: false,
        early_stop: true,
    };
    let sq_traj = interaction::simulate(&initial, &[alt.clone()], theta, &sq_options)?;
    let sq_fid = sq_traj.final_record().fidelity_to_target.ok_or("missing fidelity")?;
    let (v_min, v_max) = extremal_variances(&sq_traj.final_state);
    println!(
        "squeezed leg: steps {} fid {:.9}  var ({:.6}, {:.6})  law ({:.6}, {:.6})",
        sq_traj.steps_run,
        sq_fid,
        v_min,
        v_max,
        (-2.0 * r).exp() / 4.0,
        (2.0 * r).exp() / 4.0
    );

    // Continuous cross-check: the effective model, warm-started at the
    // target, stays there and agrees with the discrete endpoint.
    let model = lindblad::effective_model(&alt, theta, dim)?;
    let warm = sq_state.to_density();
    let int_options = SimOptions {
        steps: 3000,
        record_every: 100,
        target: Some(TargetState::Pure(sq_state.clone())),
        keep_states: false,
        early_stop: true,
    };
    let int_traj = lindblad::integrate(&model, &warm, 0.8, &int_options)?;
    let cross = qreservoir::fock::trace_distance(&int_traj.final_state, &sq_traj.final_state)?;
    println!(
        "continuous model: steps {} fid {:.9}  kraus-vs-model distance {:.3e} ({:.2} theta^2)",
        int_traj.steps_run,
        int_traj.final_record().fidelity_to_target.ok_or("missing fidelity")?,
        cross,
        cross / (theta * theta)
    );

    // Probe: the integrator refuses steps beyond its stability cap.
    match lindblad::integrate(&model, &warm, 1.5, &int_options) {
        Err(e) => println!("oversized step rejected as expected: {e}"),
        Ok(_) => println!("oversized step accepted (unexpected)"),
    }

    // Probe: a stream of excited qubits pumps energy in with nothing to damp
    // it, so the truncated simulation must refuse rather than silently leak.
    let heating = QubitPairState64::new(
        qreservoir::c(0.0, 0.0),
        qreservoir::c(0.0, 0.0),
        qreservoir::c(0.0, 0.0),
        qreservoir::c(1.0, 0.0),
    )?;
    let hot_initial = DensityMatrix64::vacuum(8)?;
    let hot_options = SimOptions { steps: 4000, record_every: 500, ..Default::default() };
    match interaction::simulate(&hot_initial, &[heating], 0.4, &hot_options) {
        Err(e) => println!("heating stream rejected as expected: {e}"),
        Ok(t) => println!(
            "heating stream ran {} steps without overflow (unexpected)",
            t.steps_run
        ),
    }

    // Probe: zero-step request is a caller error, not a silent no-op.
    let bad = SimOptions { steps: 0, ..Default::default() };
    let pair_again = QubitPairState64::identical(u, 0.0)?;
    match interaction::simulate(&initial, &[pair_again], theta, &bad) {
        Err(e) => println!("zero-step request rejected as expected: {e}"),
        Ok(_) => println!("zero-step request accepted (unexpected)"),
    }

    if final_fid < 0.99 {
        return Err(format!("stabilisation fidelity too low: {final_fid}").into());
    }
    if sq_fid < 0.99 {
        return Err(format!("squeezing fidelity too low: {sq_fid}").into());
    }
    // the model drops terms beyond second order, so the endpoints differ
    // at O(theta^2); measured ratio is ~1.0
    if cross > 2.5 * theta * theta {
        return Err(format!("discrete and continuous endpoints disagree: {cross}").into());
    }
    Ok(())
}

//! Fisher information of the stabilized family: closed forms against the
//! metric oracle, scan geometry, and the benchmark that separates nothing.

use num_complex::Complex;
use qreservoir::design::{
    classify, predict_steady_state, tune_pair_for_target, ReservoirDesign, Separability,
    SeparableFamily,
};
use qreservoir::fock::DensityMatrix;
use qreservoir::interaction::{simulate, QubitPairState, SimOptions};
use qreservoir::metrology::*;
use qreservoir::squeezing::{make_state, SqueezedTarget};
use qreservoir::{c, Error, C};

use std::f64::consts::{FRAC_PI_2, PI};

fn approx(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
}

fn approx_c(a: C<f64>, b: C<f64>, tol: f64) {
    assert!((a - b).norm() <= tol, "{a} vs {b} (tol {tol})");
}

/// Relative closeness with a floor for near-zero scales.
fn close(a: f64, b: f64, rel: f64) {
    let scale = a.abs().max(b.abs()).max(1e-300);
    assert!((a - b).abs() <= rel * scale, "{a} vs {b} (rel {rel})");
}

fn tuned_design(alpha: C<f64>, r: f64, phi_r: f64, budget: f64) -> ReservoirDesign<f64> {
    let target = SqueezedTarget::new(alpha, r, phi_r).unwrap();
    let pair = tune_pair_for_target(&target, 0.05, budget).unwrap();
    predict_steady_state(&pair, 0.05).unwrap()
}

fn gaussian_of(design: &ReservoirDesign<f64>) -> f64 {
    qfi_gaussian(&GaussianSummary::from_design(design).unwrap()).unwrap()
}

#[test]
fn design_summaries_sit_on_the_uncertainty_floor() {
    let design = tuned_design(c(0.5, 0.0), 0.3, FRAC_PI_2, 0.03);
    let summary = GaussianSummary::from_design(&design).unwrap();
    approx((summary.det_sigma() - 1.0).norm(), 0.0, 1e-10);

    let alpha = design.predicted_target().alpha();
    approx_c(summary.d()[0], alpha, 1e-14);
    approx_c(summary.d()[1], alpha.conj(), 1e-14);
    approx_c(summary.d_dot()[0], -alpha / 0.05, 1e-9);
    approx_c(summary.d_dot()[1], summary.d_dot()[0].conj(), 1e-14);

    let s = summary.sigma();
    approx(s[0][0].re, 0.6f64.cosh(), 1e-9);
    approx(s[0][0].im, 0.0, 1e-14);
    approx_c(s[0][1], -Complex::i() * 0.6f64.sinh(), 1e-9);
    approx_c(s[1][0], s[0][1].conj(), 1e-15);
    approx_c(s[1][1], s[0][0], 1e-15);
}

#[test]
fn summary_validation_rejects_broken_moment_patterns() {
    let alpha = c::<f64>(0.3, 0.1);
    let (c2r, s2r) = (0.4f64.cosh(), 0.4f64.sinh());
    let off = -Complex::from_polar(s2r, 0.7);
    let d = [alpha, alpha.conj()];
    let sigma = [[c(c2r, 0.0), off], [off.conj(), c(c2r, 0.0)]];
    let dd = [-alpha / 0.05, (-alpha / 0.05).conj()];
    assert!(GaussianSummary::new(d, sigma, dd).is_ok());

    // second components must conjugate the first
    let broken = GaussianSummary::new([alpha, alpha], sigma, dd);
    assert!(matches!(broken, Err(Error::InvalidState(_))));
    let broken = GaussianSummary::new(d, sigma, [dd[0], dd[0]]);
    assert!(matches!(broken, Err(Error::InvalidState(_))));

    // covariance must keep its Hermitian pattern
    let mut warped = sigma;
    warped[0][1] += c(1e-3, 0.0);
    assert!(matches!(GaussianSummary::new(d, warped, dd), Err(Error::InvalidState(_))));
    let mut tilted = sigma;
    tilted[0][0] = c(c2r, 1e-3);
    assert!(matches!(GaussianSummary::new(d, tilted, dd), Err(Error::InvalidState(_))));

    // determinant pinned to the uncertainty floor, diagonal at least 1
    let inflated = [[c(2.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(2.0, 0.0)]];
    assert!(matches!(GaussianSummary::new(d, inflated, dd), Err(Error::InvalidState(_))));
    let pinched = [[c(0.9, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0 / 0.9, 0.0)]];
    assert!(matches!(GaussianSummary::new(d, pinched, dd), Err(Error::InvalidState(_))));

    let poisoned = [c(f64::NAN, 0.0), alpha.conj()];
    assert!(matches!(GaussianSummary::new(poisoned, sigma, dd), Err(Error::InvalidState(_))));
}

#[test]
fn a_still_family_carries_no_information() {
    let eye = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
    let still =
        GaussianSummary::new([c(0.4, 0.0), c(0.4, 0.0)], eye, [c(0.0, 0.0); 2]).unwrap();
    assert_eq!(qfi_gaussian(&still).unwrap(), 0.0);

    // unsqueezed family drifting at rate v: information 4 v^2
    let drifting =
        GaussianSummary::new([c(0.4, 0.0), c(0.4, 0.0)], eye, [c(3.0, 0.0); 2]).unwrap();
    close(qfi_gaussian(&drifting).unwrap(), 36.0, 1e-12);
}

#[test]
fn both_closed_forms_agree_for_axis_aligned_displacements() {
    let check = |design: &ReservoirDesign<f64>| {
        let gauss = gaussian_of(design);
        let expl = qfi_explicit(design).unwrap();
        close(gauss, expl, 1e-6);

        let target = design.predicted_target();
        let rate = target.alpha().norm() / design.theta();
        let hand = 4.0
            * rate
            * rate
            * ((2.0 * target.alpha().arg()).cos() * (2.0 * target.r()).cosh()
                + target.phi_r().cos() * (2.0 * target.r()).sinh());
        close(gauss, hand, 1e-8);
    };

    check(&tuned_design(c(0.5, 0.0), 0.3, FRAC_PI_2, 0.03));
    check(&tuned_design(c(-0.8, 0.0), 0.2, PI, 0.05));

    let u = 0.05f64.asin() / 2.0;
    let pair = QubitPairState::identical(u, 0.0).unwrap();
    check(&predict_steady_state(&pair, 0.05).unwrap());

    // undriven stream: no displacement, no information, both routes exact
    let calm = predict_steady_state(&QubitPairState::alternating(0.2).unwrap(), 0.05).unwrap();
    assert_eq!(qfi_explicit(&calm).unwrap(), 0.0);
    assert_eq!(gaussian_of(&calm), 0.0);
}

#[test]
fn off_axis_displacement_splits_the_forms_and_the_metric_picks_one() {
    let pair = entangled_qfi_maximizer(0.05, 2.0).unwrap();
    let design = predict_steady_state(&pair, 0.05).unwrap();
    let gauss = gaussian_of(&design);
    let expl = qfi_explicit(&design).unwrap();
    // off the real axis the expanded form overshoots by exactly (1+mu^2)/(mu^2-1)
    close(expl / gauss, 5.0 / 3.0, 1e-9);

    let family = |t: f64| {
        let shifted = predict_steady_state(&pair, t)?;
        Ok(make_state(shifted.predicted_target(), 60)?.to_density())
    };
    let oracle = bures_qfi_oracle(family, 0.05, 5e-4).unwrap();
    close(oracle, gauss, 5e-3);
    assert!((oracle / expl - 1.0).abs() > 0.3);
}

#[test]
fn rate_adjustment_strips_theta_and_global_phase() {
    let pair = entangled_qfi_maximizer(0.05, 2.0).unwrap();
    let slow = rate_adjusted_qfi(&predict_steady_state(&pair, 0.02).unwrap()).unwrap();
    let fast = rate_adjusted_qfi(&predict_steady_state(&pair, 0.1).unwrap()).unwrap();
    close(slow, fast, 1e-9);
    close(slow, 16.0 * 0.0025 * (1.0 - 0.00125), 1e-12);

    let spun = pair.with_global_phase(0.7);
    let j = rate_adjusted_qfi(&predict_steady_state(&spun, 0.02).unwrap()).unwrap();
    close(j, slow, 1e-12);

    // before the rate adjustment the information scales as theta^-4
    let expl_slow = qfi_explicit(&predict_steady_state(&pair, 0.02).unwrap()).unwrap();
    let expl_fast = qfi_explicit(&predict_steady_state(&pair, 0.1).unwrap()).unwrap();
    close(expl_slow, expl_fast * 625.0, 1e-9);

    let calm = predict_steady_state(&QubitPairState::alternating(0.2).unwrap(), 0.05).unwrap();
    assert_eq!(rate_adjusted_qfi(&calm).unwrap(), 0.0);
}

#[test]
fn the_covariance_route_ignores_drive_phase_alignment() {
    let (eps, mu) = (0.05f64, 2.0f64);
    let bsq = (1.0 - eps * eps / 2.0) / (1.0 + mu * mu);
    let b = bsq.sqrt();
    let physical = 16.0 * eps * eps * bsq * (mu * mu - 1.0);

    let mut displays = Vec::new();
    for xi in [0.0, 0.7, FRAC_PI_2, 2.3, PI] {
        let pair = QubitPairState::new(
            c(mu * b, 0.0),
            c(eps / 2.0, 0.0),
            c(eps / 2.0, 0.0),
            Complex::from_polar(b, xi),
        )
        .unwrap();
        let design = predict_steady_state(&pair, 0.05).unwrap();
        let kappa = design.kappa();
        close(gaussian_of(&design) * kappa * kappa, physical, 1e-10);
        displays.push(rate_adjusted_qfi(&design).unwrap());
    }

    // on the real displacement axis (xi = 0) the routes coincide
    close(displays[0], physical, 1e-10);
    // yet the rate-adjusted route does move with the drive phase
    let hi = displays.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = displays.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(hi - lo > 0.5 * displays[0].abs());
}

#[test]
fn the_qfi_benchmark_matches_its_closed_form_and_clamps() {
    close(entangled_qfi_bound(0.05, 2.0).unwrap(), 1.08, 1e-12);
    close(entangled_qfi_bound(0.05, 1e8).unwrap(), 16.0 * 0.0025, 1e-6);

    let blown = entangled_qfi_bound(0.5, 1.0 + 4.0 * f64::EPSILON).unwrap();
    assert!(blown.is_infinite() && blown > 0.0);

    for (e, m) in [(-0.1, 2.0), (1.0, 2.0), (0.05, 1.0), (0.05, 0.5), (0.05, f64::INFINITY)] {
        assert!(matches!(entangled_qfi_bound(e, m), Err(Error::InvalidParameter { .. })));
    }
}

#[test]
fn product_streams_peak_at_the_feasibility_edge_below_the_benchmark() {
    let scan = separable_qfi_scan(0.05, 2.0, 256).unwrap();
    assert!(scan.margin > 0.0);
    assert!(scan.sup < scan.bound);
    close(scan.margin, scan.bound - scan.sup, 1e-15);
    // the edge pair concentrates an even split: sup = 16 eps^2 (mu-1)/(mu+1)
    close(scan.sup, 16.0 * 0.0025 / 3.0, 1e-9);

    let family = SeparableFamily::new(0.05, 2.0).unwrap();
    approx(scan.argmax_delta, family.edge_delta(), 1e-12);
    assert!(matches!(classify(&scan.argmax).separability, Separability::Separable));
    // no product pair comes near the aligned-phase conditions
    assert!(scan.condition_defect > PI / 256.0);

    let fine = separable_qfi_scan(0.05, 2.0, 512).unwrap();
    assert!((fine.sup - scan.sup).abs() <= 1e-3 * scan.sup);
    assert!(fine.condition_defect > PI / 512.0);
}

#[test]
fn qfi_scans_and_maximizers_reject_out_of_range_inputs() {
    assert!(matches!(separable_qfi_scan(0.05, 2.0, 32), Err(Error::InvalidParameter { .. })));
    assert!(matches!(separable_qfi_scan(0.25, 2.0, 64), Err(Error::InvalidParameter { .. })));
    assert!(matches!(separable_qfi_scan(0.0, 2.0, 64), Err(Error::InvalidParameter { .. })));
    assert!(matches!(separable_qfi_scan(0.05, 1.0, 64), Err(Error::InvalidParameter { .. })));

    assert!(matches!(entangled_qfi_maximizer(0.0, 2.0), Err(Error::InvalidParameter { .. })));
    assert!(matches!(entangled_qfi_maximizer(0.25, 2.0), Err(Error::InvalidParameter { .. })));
    assert!(matches!(entangled_qfi_maximizer(0.05, 1.0), Err(Error::InvalidParameter { .. })));
}

#[test]
fn the_even_split_quarter_turn_pair_is_entangled_and_caps_the_figure() {
    let pair = entangled_qfi_maximizer(0.05, 2.0).unwrap();
    let verdict = classify(&pair);
    assert!(matches!(verdict.separability, Separability::Entangled));
    assert!(verdict.concurrence > 0.1);
    close(pair.beta_ee().norm_sqr(), 0.99875 / 5.0, 1e-12);
    close(pair.epsilon().norm(), 0.05, 1e-12);
    close(pair.mu(), 2.0, 1e-12);

    let j = rate_adjusted_qfi(&predict_steady_state(&pair, 0.05).unwrap()).unwrap();
    let scan = separable_qfi_scan(0.05, 2.0, 128).unwrap();
    assert!(j > scan.sup);
    assert!(j < scan.bound);
    close(j / scan.bound, 0.99875 / 27.0, 1e-9);
}

#[test]
fn the_benchmark_exceeds_every_stream_on_the_validity_grid() {
    for i in 0..5 {
        let eps = 0.01 + 0.0225 * i as f64;
        for k in 0..5 {
            let mu = 1.2 + 0.45 * k as f64;
            let scan = separable_qfi_scan(eps, mu, 64).unwrap();
            assert!(scan.margin > 0.0, "margin at ({eps}, {mu})");
            close(scan.sup, 16.0 * eps * eps * (mu - 1.0) / (mu + 1.0), 1e-6);

            let best = entangled_qfi_maximizer(eps, mu).unwrap();
            let j = rate_adjusted_qfi(&predict_steady_state(&best, 0.05).unwrap()).unwrap();
            close(j, 16.0 * eps * eps * (1.0 - eps * eps / 2.0), 1e-10);
            assert!(j > scan.sup, "entangled pair beats products at ({eps}, {mu})");
            // the benchmark overshoots even the best pair; nothing attains it
            assert!(j < scan.bound, "benchmark exceeds the cap at ({eps}, {mu})");
        }
    }
}

#[test]
fn the_metric_oracle_reproduces_closed_form_families() {
    // a theta-independent family carries no information
    let frozen = |_t: f64| DensityMatrix::fock_state(20, 1);
    approx(bures_qfi_oracle(frozen, 0.05, 5e-4).unwrap(), 0.0, 1e-9);

    // coherent displacement v/theta: information 4 v^2 / theta^4
    let family = |t: f64| {
        let target = SqueezedTarget::new(c(0.05 / t, 0.0), 0.0, 0.0)?;
        Ok(make_state(&target, 40)?.to_density())
    };
    close(bures_qfi_oracle(family, 0.05, 5e-4).unwrap(), 1600.0, 5e-3);

    for bad in [0.0, -1e-3, 0.025, 0.05] {
        let out = bures_qfi_oracle(|_t: f64| DensityMatrix::vacuum(8), 0.05, bad);
        assert!(matches!(out, Err(Error::InvalidParameter { .. })));
    }
    let out = bures_qfi_oracle(|_t: f64| DensityMatrix::vacuum(8), 0.0, 1e-4);
    assert!(out.is_err());

    // a kinked family: forward and backward secants disagree
    let kinked = |t: f64| {
        let alpha = if t > 0.05 { 1.0 + (t - 0.05) * 200.0 } else { 1.0 };
        let target = SqueezedTarget::new(c(alpha, 0.0), 0.0, 0.0)?;
        Ok(make_state(&target, 40)?.to_density())
    };
    assert!(matches!(bures_qfi_oracle(kinked, 0.05, 5e-4), Err(Error::OracleInvalid(_))));

    // families over mismatched spaces are not comparable
    let lopsided = |t: f64| {
        let dim = if t > 0.05 { 30 } else { 24 };
        let target = SqueezedTarget::new(c(1.0, 0.0), 0.0, 0.0)?;
        Ok(make_state(&target, dim)?.to_density())
    };
    assert!(matches!(bures_qfi_oracle(lopsided, 0.05, 5e-4), Err(Error::OracleInvalid(_))));
}

#[test]
fn the_oracle_validates_the_simulated_stream() {
    let target = SqueezedTarget::new(c(0.5, 0.0), 0.3, FRAC_PI_2).unwrap();
    let pair = tune_pair_for_target(&target, 0.05, 0.03).unwrap();

    let simulated = |t: f64| {
        let design = predict_steady_state(&pair, t)?;
        let warm = make_state(design.predicted_target(), 32)?.to_density();
        let opts = SimOptions {
            steps: 1500,
            record_every: 250,
            target: None,
            keep_states: false,
            early_stop: false,
        };
        Ok(simulate(&warm, &[pair.clone()], t, &opts)?.final_state)
    };
    let oracle = bures_qfi_oracle(simulated, 0.05, 5e-4).unwrap();

    let design = predict_steady_state(&pair, 0.05).unwrap();
    // real displacement axis: both closed forms must sit in the oracle band
    close(oracle, gaussian_of(&design), 0.05);
    close(oracle, qfi_explicit(&design).unwrap(), 0.05);
}

#[test]
fn the_expanded_form_goes_negative_for_out_of_phase_drives() {
    let family = SeparableFamily::new(0.05, 2.0).unwrap();
    let pair = family.pair_at(PI).unwrap();
    let design = predict_steady_state(&pair, 0.05).unwrap();
    // a true information figure is nonnegative; the expanded form is not one here
    assert!(qfi_explicit(&design).unwrap() < 0.0);
    assert!(rate_adjusted_qfi(&design).unwrap() < 0.0);

    let gauss = gaussian_of(&design);
    assert!(gauss > 0.0);
    let kappa = design.kappa();
    let bee_sq = design.pair().beta_ee().norm_sqr();
    close(gauss * kappa * kappa, 16.0 * 0.0025 * bee_sq * 3.0, 1e-10);
}

#[test]
fn cramer_rao_turns_information_into_a_deviation_floor() {
    close(cramer_rao(4.0, 1).unwrap(), 0.5, 1e-15);
    close(cramer_rao(1.08, 100).unwrap(), 1.0 / 108f64.sqrt(), 1e-13);

    let one = cramer_rao(1.08, 100).unwrap();
    let four = cramer_rao(1.08, 400).unwrap();
    close(four, one / 2.0, 1e-13);

    for bad in [0.0, -1.0, f64::INFINITY, f64::NAN] {
        assert!(matches!(cramer_rao(bad, 1), Err(Error::InvalidParameter { .. })));
    }
    assert!(matches!(cramer_rao(4.0, 0), Err(Error::InvalidParameter { .. })));
}

#[test]
fn single_precision_figures_stay_consistent() {
    let target =
        SqueezedTarget::<f32>::new(c(0.5, 0.0), 0.3, std::f32::consts::FRAC_PI_2).unwrap();
    let pair = tune_pair_for_target(&target, 0.05f32, 0.03).unwrap();
    let design = predict_steady_state(&pair, 0.05f32).unwrap();
    let summary = GaussianSummary::from_design(&design).unwrap();
    let gauss = qfi_gaussian(&summary).unwrap();
    let expl = qfi_explicit(&design).unwrap();
    assert!((gauss - expl).abs() <= 1e-3 * gauss.abs());
    assert!(rate_adjusted_qfi(&design).unwrap().is_finite());

    let bound = entangled_qfi_bound(0.05f32, 2.0).unwrap();
    assert!((bound - 1.08).abs() <= 1e-5 * 1.08);
    assert!((cramer_rao(4.0f32, 1).unwrap() - 0.5).abs() < 1e-6);
}

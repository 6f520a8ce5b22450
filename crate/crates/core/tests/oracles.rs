//! Frozen values from independent closed-form and high-precision computations.

use pidcert::controller::{ControllerConfig, GainTriple};
use pidcert::metrics::StepMetrics;
use pidcert::robustness::{median, simulate, ModelInstance, TaskSpec};
use pidcert::sim::{zoh_coeffs, Discretization, FirstOrderParams};
use pidcert::stability::{
    jury_euler_pi, jury_zoh_pi, ki_upper_bound, p_control_dt_limit, p_control_pole, quadratic_root_radius,
    zoh_ki_upper_bound,
};
use pidcert::tuner::gp::{expected_improvement, std_normal_cdf};

fn close(got: f64, want: f64, tol: f64) {
    assert!((got - want).abs() <= tol, "got {got}, want {want} (tol {tol})");
}

#[test]
fn zoh_coefficients_nominal() {
    let c = zoh_coeffs(&FirstOrderParams::nominal());
    close(c.a, 0.990_049_833_749_168, 1e-15);
    close(c.b, 0.009_950_166_250_831_946, 1e-15);
}

#[test]
fn guardrails_at_nominal() {
    let p = FirstOrderParams::nominal();
    close(ki_upper_bound(3.0, &p), 400.0, 1e-9);
    close(zoh_ki_upper_bound(3.0, &p), 400.0, 1e-9);
    close(p_control_dt_limit(3.0, &p), 0.5, 1e-15);
    close(p_control_pole(3.0, &p), 0.96, 1e-15);
}

#[test]
fn euler_p_loop_closed_form() {
    // y_k = y_inf (1 - rho^k), logged for k = 1..=501, trapezoid IAE,
    // e_ss averaged over the last 51 samples.
    let frozen = [
        (0.5, 3.550_467_036_313_971, 0.666_923_244_220_319_7),
        (1.0, 2.742_540_049_632_403, 0.500_034_803_084_848_3),
        (1.5, 2.231_074_265_383_276, 0.400_003_750_573_241_7),
        (2.0, 1.878_988_837_263_589, 0.333_333_704_918_411_4),
        (3.0, 1.426_399_999_758_946, 0.250_000_003_250_266),
    ];
    let model = ModelInstance::ideal_first_order(FirstOrderParams::nominal(), Discretization::Euler, 10.0);
    for (kp, iae, ess) in frozen {
        let cfg = ControllerConfig::baseline(GainTriple::p(kp));
        let traj = simulate(&model, &cfg, &TaskSpec::step(5.0)).unwrap();
        assert_eq!(traj.len(), 501);
        let m = StepMetrics::compute(&traj, 1.0);
        close(m.iae, iae, 1e-10);
        close(m.ss_error, ess, 1e-12);
        assert_eq!(m.overshoot_pct, 0.0);
    }
}

#[test]
fn jury_matches_hand_checked_points() {
    let p = FirstOrderParams::nominal();
    assert!(jury_euler_pi(3.0, 399.0, &p).stable);
    assert!(!jury_euler_pi(3.0, 401.0, &p).stable);
    assert!(jury_zoh_pi(3.0, 399.0, &p).stable);
    assert!(!jury_zoh_pi(3.0, 401.0, &p).stable);
    // second inequality: kp beyond 2(1 + a)/b
    assert!(!jury_zoh_pi(400.0, 1.0, &p).stable);
    assert!(!jury_euler_pi(400.0, 1.0, &p).stable);
}

#[test]
fn quadratic_radius_examples() {
    // (z - 0.5)(z + 0.25)
    close(quadratic_root_radius(-0.25, -0.125), 0.5, 1e-15);
    // z^2 + 0.81 has roots ±0.9i
    close(quadratic_root_radius(0.0, 0.81), 0.9, 1e-15);
    // (z - 1.1)^2
    close(quadratic_root_radius(-2.2, 1.21), 1.1, 1e-7);
}

#[test]
fn median_conventions() {
    assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
    assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), Some(2.5));
    assert_eq!(median(&[]), None);
}

#[test]
fn expected_improvement_reference_values() {
    // mu = 0, sigma = 1, best = 0: phi(0)
    close(expected_improvement(0.0, 1.0, 0.0), 0.398_942_280_401_432_7, 1e-14);
    // gap 1: Phi(1) + phi(1)
    close(expected_improvement(0.0, 1.0, 1.0), 1.083_315_470_587_686_3, 1e-13);
    close(std_normal_cdf(1.959_963_984_540_054), 0.975, 1e-14);
    assert_eq!(expected_improvement(2.0, 0.0, 1.0), 0.0);
    assert_eq!(expected_improvement(0.5, 0.0, 1.0), 0.5);
}

//! Discrete P/PI/PID with clamping, an optional low-pass derivative and
//! back-calculation anti-windup.
//!
//! The controller is a pure state transition: [`pid_step`] takes the previous
//! [`ControllerState`] by value and returns the next one alongside the
//! commanded and saturated efforts.

use serde::{Deserialize, Serialize};

use crate::error::{check_non_negative, check_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GainTriple {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

impl GainTriple {
    pub fn new(kp: f64, ki: f64, kd: f64) -> Result<Self> {
        let g = Self { kp, ki, kd };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        check_non_negative("kp", self.kp)?;
        check_non_negative("ki", self.ki)?;
        check_non_negative("kd", self.kd)
    }

    pub fn p(kp: f64) -> Self {
        Self { kp, ki: 0.0, kd: 0.0 }
    }

    pub fn pi(kp: f64, ki: f64) -> Self {
        Self { kp, ki, kd: 0.0 }
    }

    pub fn pid(kp: f64, ki: f64, kd: f64) -> Self {
        Self { kp, ki, kd }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.kp, self.ki, self.kd]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self {
            kp: a[0],
            ki: a[1],
            kd: a[2],
        }
    }
}

/// Derivative smoothing coefficient for a filter bandwidth `omega_f`:
/// `alpha = 1 / (1 + omega_f * dt)`.
pub fn alpha_from_bandwidth(omega_f: f64, dt: f64) -> f64 {
    1.0 / (1.0 + omega_f * dt)
}

/// Filter coefficient used by the non-ideal experiments (`omega_f * dt = 0.2`).
pub const NONIDEAL_DERIV_ALPHA: f64 = 1.0 / 1.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    pub gains: GainTriple,
    pub u_min: f64,
    pub u_max: f64,
    /// Back-calculation constant `K_aw` (= `T_aw`); `None` disables it.
    pub antiwindup_kaw: Option<f64>,
    /// 0 gives the raw backward difference.
    pub deriv_filter_alpha: f64,
    pub deriv_on: bool,
}

impl ControllerConfig {
    /// Raw-difference PID clamped to `[-10, 10]` without anti-windup.
    pub fn baseline(gains: GainTriple) -> Self {
        Self {
            gains,
            u_min: -10.0,
            u_max: 10.0,
            antiwindup_kaw: None,
            deriv_filter_alpha: 0.0,
            deriv_on: true,
        }
    }

    pub fn with_bounds(self, u_min: f64, u_max: f64) -> Self {
        Self { u_min, u_max, ..self }
    }

    pub fn with_antiwindup(self, kaw: Option<f64>) -> Self {
        Self {
            antiwindup_kaw: kaw,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.gains.validate()?;
        if !(self.u_min < self.u_max) {
            return Err(Error::InvalidBounds {
                u_min: self.u_min,
                u_max: self.u_max,
            });
        }
        if let Some(kaw) = self.antiwindup_kaw {
            check_positive("antiwindup_kaw", kaw)?;
        }
        if !(0.0..1.0).contains(&self.deriv_filter_alpha) {
            return Err(Error::InvalidParameter {
                name: "deriv_filter_alpha",
                reason: format!("must lie in [0, 1), got {}", self.deriv_filter_alpha),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControllerState {
    pub integral: f64,
    pub prev_error: f64,
    pub deriv_filtered: f64,
    pub initialized: bool,
}

impl ControllerState {
    pub fn reset(&mut self) {
        *self = Self::default();
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidOutput {
    pub u_cmd: f64,
    pub u_sat: f64,
    pub state: ControllerState,
}

pub fn saturate(u: f64, u_min: f64, u_max: f64) -> Result<f64> {
    if !(u_min < u_max) {
        return Err(Error::InvalidBounds { u_min, u_max });
    }
    Ok(clip(u, u_min, u_max))
}

#[inline]
fn clip(u: f64, lo: f64, hi: f64) -> f64 {
    u.max(lo).min(hi)
}

/// One controller update. `cfg` is assumed validated; the effort is computed
/// from the current integrator before the integrator advances.
pub fn pid_step(error: f64, cfg: &ControllerConfig, st: ControllerState, dt: f64) -> PidOutput {
    let g = &cfg.gains;
    let mut next = st;

    let mut u_cmd = g.kp * error;
    if g.ki != 0.0 {
        u_cmd += g.ki * st.integral;
    }
    if cfg.deriv_on && g.kd != 0.0 {
        // first sample: treat e[-1] = e[0]
        let raw = if st.initialized { (error - st.prev_error) / dt } else { 0.0 };
        let a = cfg.deriv_filter_alpha;
        next.deriv_filtered = a * st.deriv_filtered + (1.0 - a) * raw;
        u_cmd += g.kd * next.deriv_filtered;
    }
    let u_sat = clip(u_cmd, cfg.u_min, cfg.u_max);

    next.integral = match cfg.antiwindup_kaw {
        Some(kaw) => st.integral + dt * (error + (u_sat - u_cmd) / kaw),
        None => st.integral + dt * error,
    };
    next.prev_error = error;
    next.initialized = true;

    PidOutput { u_cmd, u_sat, state: next }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{euler_step, FirstOrderParams};
    use proptest::prelude::*;

    #[test]
    fn saturate_examples() {
        assert_eq!(saturate(15.0, -10.0, 10.0).unwrap(), 10.0);
        assert_eq!(saturate(-12.0, -10.0, 10.0).unwrap(), -10.0);
        assert_eq!(saturate(3.0, -10.0, 10.0).unwrap(), 3.0);
        assert!(matches!(saturate(0.0, 1.0, 1.0), Err(Error::InvalidBounds { .. })));
    }

    #[test]
    fn proportional_only() {
        let cfg = ControllerConfig::baseline(GainTriple::p(3.0));
        let out = pid_step(1.0, &cfg, ControllerState::default(), 0.01);
        assert_eq!(out.u_cmd, 3.0);
        assert_eq!(out.u_sat, 3.0);
    }

    #[test]
    fn antiwindup_inactive_inside_bounds() {
        let base = ControllerConfig::baseline(GainTriple::pid(2.0, 1.5, 0.1));
        let aw = base.with_antiwindup(Some(0.3));
        let st = ControllerState {
            integral: 0.4,
            prev_error: 0.2,
            deriv_filtered: 0.0,
            initialized: true,
        };
        let a = pid_step(0.5, &base, st, 0.01);
        let b = pid_step(0.5, &aw, st, 0.01);
        assert_eq!(a.state, b.state);
        assert_eq!(a.u_sat, b.u_sat);
    }

    #[test]
    fn antiwindup_bleeds_integrator_when_clamped() {
        let base = ControllerConfig::baseline(GainTriple::pi(50.0, 1.0));
        let aw = base.with_antiwindup(Some(0.5));
        let a = pid_step(1.0, &base, ControllerState::default(), 0.01);
        let b = pid_step(1.0, &aw, ControllerState::default(), 0.01);
        assert_eq!(a.u_sat, 10.0);
        assert!(b.state.integral < a.state.integral);
        // 0.01 * (1 + (10 - 50) / 0.5)
        assert!((b.state.integral - 0.01 * (1.0 - 80.0)).abs() < 1e-12);
    }

    #[test]
    fn reset_examples() {
        let cfg = ControllerConfig::baseline(GainTriple::pid(4.0, 2.0, 0.3));
        let mut st = ControllerState::default();
        for e in [1.0, 0.7, 0.2] {
            st = pid_step(e, &cfg, st, 0.01).state;
        }
        st.reset();
        assert_eq!(st, ControllerState::default());
        assert!(!st.initialized);
        assert_eq!(pid_step(0.0, &cfg, st, 0.01).u_cmd, 0.0);
    }

    #[test]
    fn identical_inputs_identical_outputs() {
        let cfg = ControllerConfig::baseline(GainTriple::pid(4.0, 2.0, 0.3)).with_antiwindup(Some(0.2));
        let run = || {
            let mut st = ControllerState::default();
            (0..100)
                .map(|k| {
                    let out = pid_step((k as f64 * 0.1).cos() * 5.0, &cfg, st, 0.01);
                    st = out.state;
                    out.u_sat
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn first_derivative_sample_has_no_kick() {
        let cfg = ControllerConfig::baseline(GainTriple::pid(0.0, 0.0, 1.0));
        let first = pid_step(1.0, &cfg, ControllerState::default(), 0.01);
        assert_eq!(first.u_cmd, 0.0);
        let second = pid_step(0.5, &cfg, first.state, 0.01);
        assert!((second.u_cmd + 50.0).abs() < 1e-12);
    }

    #[test]
    fn filtered_derivative_recursion() {
        let mut cfg = ControllerConfig::baseline(GainTriple::pid(0.0, 0.0, 1.0));
        cfg.deriv_filter_alpha = 0.75;
        let s1 = pid_step(0.0, &cfg, ControllerState::default(), 0.1).state;
        let out = pid_step(1.0, &cfg, s1, 0.1);
        // raw = 10, filtered = 0.25 * 10
        assert!((out.u_cmd - 2.5).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let mut cfg = ControllerConfig::baseline(GainTriple::pi(1.0, 1.0));
        assert!(cfg.validate().is_ok());
        cfg.deriv_filter_alpha = 1.0;
        assert!(cfg.validate().is_err());
        let cfg = ControllerConfig::baseline(GainTriple::pi(1.0, 1.0)).with_antiwindup(Some(0.0));
        assert!(cfg.validate().is_err());
        assert!(GainTriple::new(-1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn pi_loop_on_euler_plant_iae() {
        // post-update output log, trapezoidal IAE
        let p = FirstOrderParams::nominal();
        let cfg = ControllerConfig::baseline(GainTriple::pi(3.0, 1.0));
        let (mut y, mut st) = (0.0, ControllerState::default());
        let mut errs = Vec::with_capacity(501);
        for _ in 0..=500 {
            let out = pid_step(1.0 - y, &cfg, st, p.dt);
            st = out.state;
            y = euler_step(y, out.u_sat, &p).unwrap();
            errs.push((1.0 - y).abs());
        }
        let iae: f64 = errs.windows(2).map(|w| 0.5 * (w[0] + w[1]) * p.dt).sum();
        assert!((iae - 0.7789).abs() < 1e-3, "iae {iae}");
    }

    proptest! {
        #[test]
        fn saturation_is_idempotent(u in -1e6f64..1e6, lo in -100f64..0.0, width in 1e-3f64..100.0) {
            let hi = lo + width;
            let once = saturate(u, lo, hi).unwrap();
            prop_assert_eq!(saturate(once, lo, hi).unwrap(), once);
        }

        #[test]
        fn proportional_is_linear_below_saturation(e in -1.0f64..1.0, kp in 0.0f64..4.0) {
            let cfg = ControllerConfig::baseline(GainTriple::p(kp));
            let a = pid_step(e, &cfg, ControllerState::default(), 0.01).u_cmd;
            let b = pid_step(2.0 * e, &cfg, ControllerState::default(), 0.01).u_cmd;
            prop_assert!((b - 2.0 * a).abs() <= 1e-12 * (1.0 + b.abs()));
        }

        #[test]
        fn filtered_derivative_is_bounded(
            alpha in 0.0f64..0.99,
            errors in proptest::collection::vec(-1.0f64..1.0, 2..60),
        ) {
            let mut cfg = ControllerConfig::baseline(GainTriple::pid(0.0, 0.0, 1.0));
            cfg.deriv_filter_alpha = alpha;
            let dt = 0.01;
            let max_raw = errors.windows(2).map(|w| ((w[1] - w[0]) / dt).abs()).fold(0.0, f64::max);
            let mut st = ControllerState::default();
            for &e in &errors {
                st = pid_step(e, &cfg, st, dt).state;
                prop_assert!(st.deriv_filtered.abs() <= max_raw * (1.0 + 1e-12) + 1e-12);
            }
        }
    }
}

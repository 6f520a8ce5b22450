//! Step-response and tracking metrics over sampled trajectories.
//!
//! Sample `k` of a [`Trajectory`] is stamped `t_k = k * dt` and holds the
//! plant output produced by the effort applied during control period `k`,
//! i.e. the output is logged after the plant update. Metrics that never
//! trigger (rise time, settling time) are `None`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub dt: f64,
    pub reference: Vec<f64>,
    pub output: Vec<f64>,
    pub measured: Vec<f64>,
    pub u_cmd: Vec<f64>,
    pub u_sat: Vec<f64>,
    pub integrator: Vec<f64>,
    /// Set when the run was cut short by the divergence guard.
    pub diverged: bool,
}

impl Trajectory {
    pub fn with_capacity(dt: f64, n: usize) -> Self {
        Self {
            dt,
            reference: Vec::with_capacity(n),
            output: Vec::with_capacity(n),
            measured: Vec::with_capacity(n),
            u_cmd: Vec::with_capacity(n),
            u_sat: Vec::with_capacity(n),
            integrator: Vec::with_capacity(n),
            diverged: false,
        }
    }

    pub fn len(&self) -> usize {
        self.output.len()
    }

    pub fn is_empty(&self) -> bool {
        self.output.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn errors(&self) -> impl Iterator<Item = f64> + '_ {
        self.reference.iter().zip(&self.output).map(|(r, y)| r - y)
    }

    /// Sub-trajectory over samples `range` (time stamps restart at zero).
    pub fn slice(&self, range: std::ops::Range<usize>) -> Trajectory {
        Trajectory {
            dt: self.dt,
            reference: self.reference[range.clone()].to_vec(),
            output: self.output[range.clone()].to_vec(),
            measured: self.measured[range.clone()].to_vec(),
            u_cmd: self.u_cmd[range.clone()].to_vec(),
            u_sat: self.u_sat[range.clone()].to_vec(),
            integrator: self.integrator[range].to_vec(),
            diverged: self.diverged,
        }
    }

    /// Output-only trajectory against a constant reference; useful for
    /// evaluating metrics on externally produced traces.
    pub fn from_output(dt: f64, reference: f64, output: Vec<f64>) -> Self {
        let n = output.len();
        Trajectory {
            dt,
            reference: vec![reference; n],
            measured: output.clone(),
            output,
            u_cmd: vec![0.0; n],
            u_sat: vec![0.0; n],
            integrator: vec![0.0; n],
            diverged: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepMetrics {
    pub overshoot_pct: f64,
    pub rise_time: Option<f64>,
    pub settle_time: Option<f64>,
    pub ss_error: f64,
    pub iae: f64,
    pub sat_duty: f64,
    pub u_rms: f64,
}

/// Fraction of final samples averaged for the steady-state error.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.1;
/// Relative half-width of the settling band.
pub const SETTLING_BAND: f64 = 0.02;

impl StepMetrics {
    /// All metrics for a step of size `r`. A zero reference switches to the
    /// absolute overshoot and settling variants.
    pub fn compute(traj: &Trajectory, r: f64) -> Self {
        let (overshoot_pct, settle_time) = if r == 0.0 {
            (absolute_overshoot(traj, r), absolute_settling_time(traj, r))
        } else {
            (
                percent_overshoot(traj, r).unwrap_or(0.0),
                settling_time(traj, r),
            )
        };
        Self {
            overshoot_pct,
            rise_time: rise_time(traj, r),
            settle_time,
            ss_error: steady_state_error(traj, r, DEFAULT_TAIL_FRACTION).unwrap_or(f64::NAN),
            iae: iae(traj),
            sat_duty: saturation_duty(traj),
            u_rms: u_rms(traj),
        }
    }
}

fn peak(traj: &Trajectory) -> f64 {
    traj.output.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// `max(0, (max_k y_k - r) / r) * 100`
pub fn percent_overshoot(traj: &Trajectory, r: f64) -> Result<f64> {
    if r == 0.0 {
        return Err(Error::DegenerateReference);
    }
    if traj.is_empty() {
        return Ok(0.0);
    }
    Ok(((peak(traj) - r) / r).max(0.0) * 100.0)
}

/// Peak excursion beyond `r` in percent of one output unit; used when `r = 0`.
pub fn absolute_overshoot(traj: &Trajectory, r: f64) -> f64 {
    traj.output
        .iter()
        .map(|y| (y - r).abs())
        .fold(0.0, f64::max)
        * 100.0
}

/// First sample time at which `y >= 0.9 r`.
pub fn rise_time(traj: &Trajectory, r: f64) -> Option<f64> {
    if !(r > 0.0) {
        return None;
    }
    traj.output
        .iter()
        .position(|&y| y >= 0.9 * r)
        .map(|k| traj.time(k))
}

fn settle_with_band(traj: &Trajectory, r: f64, band: f64) -> Option<f64> {
    let last_out = traj.output.iter().rposition(|y| (y - r).abs() > band);
    match last_out {
        None if traj.is_empty() => None,
        None => Some(0.0),
        Some(k) if k + 1 < traj.len() => Some(traj.time(k + 1)),
        Some(_) => None,
    }
}

/// Earliest time after which the output stays inside `r ± 2% r`.
pub fn settling_time(traj: &Trajectory, r: f64) -> Option<f64> {
    if r == 0.0 {
        return absolute_settling_time(traj, r);
    }
    settle_with_band(traj, r, SETTLING_BAND * r.abs())
}

/// Settling with an absolute band `0.02 * max(1, peak |y - r|)`.
pub fn absolute_settling_time(traj: &Trajectory, r: f64) -> Option<f64> {
    let excursion = absolute_overshoot(traj, r) / 100.0;
    settle_with_band(traj, r, SETTLING_BAND * excursion.max(1.0))
}

/// Mean `|r - y|` over the final `ceil(tail_fraction * len)` samples.
pub fn steady_state_error(traj: &Trajectory, r: f64, tail_fraction: f64) -> Result<f64> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "tail_fraction",
            reason: format!("must lie in (0, 1], got {tail_fraction}"),
        });
    }
    if traj.is_empty() {
        return Err(Error::Empty("trajectory"));
    }
    let n = traj.len();
    let tail = ((tail_fraction * n as f64).ceil() as usize).clamp(1, n);
    let sum: f64 = traj.output[n - tail..].iter().map(|y| (r - y).abs()).sum();
    Ok(sum / tail as f64)
}

/// Trapezoidal integral of `|r_k - y_k|` over the logged samples.
pub fn iae(traj: &Trajectory) -> f64 {
    let abs_err: Vec<f64> = traj.errors().map(f64::abs).collect();
    trapezoid(&abs_err, traj.dt)
}

pub(crate) fn trapezoid(values: &[f64], dt: f64) -> f64 {
    values.windows(2).map(|w| 0.5 * (w[0] + w[1])).sum::<f64>() * dt
}

/// Fraction of samples where the clamp was active (`u_cmd != u_sat`).
pub fn saturation_duty(traj: &Trajectory) -> f64 {
    if traj.is_empty() {
        return 0.0;
    }
    let clamped = traj
        .u_cmd
        .iter()
        .zip(&traj.u_sat)
        .filter(|(c, s)| c != s)
        .count();
    clamped as f64 / traj.len() as f64
}

/// Root-mean-square of the applied (saturated) effort.
pub fn u_rms(traj: &Trajectory) -> f64 {
    if traj.u_sat.is_empty() {
        return 0.0;
    }
    let ss: f64 = traj.u_sat.iter().map(|u| u * u).sum();
    (ss / traj.u_sat.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trace(output: Vec<f64>) -> Trajectory {
        Trajectory::from_output(0.01, 1.0, output)
    }

    #[test]
    fn overshoot_examples() {
        let t = trace(vec![0.0, 0.8, 1.2, 1.05, 1.0]);
        assert!((percent_overshoot(&t, 1.0).unwrap() - 20.0).abs() < 1e-9);
        let mono = trace((0..50).map(|k| 1.0 - (-0.05 * k as f64).exp()).collect());
        assert_eq!(percent_overshoot(&mono, 1.0).unwrap(), 0.0);
        assert_eq!(percent_overshoot(&mono, 0.0), Err(Error::DegenerateReference));
    }

    #[test]
    fn rise_time_examples() {
        let never = trace(vec![0.0, 0.5, 0.75, 0.75]);
        assert_eq!(rise_time(&never, 1.0), None);
        let starts_high = trace(vec![0.95, 1.0]);
        assert_eq!(rise_time(&starts_high, 1.0), Some(0.0));
        let t = trace(vec![0.0, 0.5, 0.89, 0.9, 1.0]);
        assert!((rise_time(&t, 1.0).unwrap() - 0.03).abs() < 1e-12);
    }

    #[test]
    fn settling_time_examples() {
        let flat = trace(vec![1.0; 20]);
        assert_eq!(settling_time(&flat, 1.0), Some(0.0));

        // enters the band at 1.5 s, leaves at 2 s, back for good at 3 s
        let y: Vec<f64> = (0..=400)
            .map(|k| {
                let t = k as f64 * 0.01;
                if t < 1.5 - 1e-9 {
                    0.5
                } else if t < 2.0 - 1e-9 {
                    1.0
                } else if t < 3.0 - 1e-9 {
                    0.9
                } else {
                    1.01
                }
            })
            .collect();
        let t = trace(y);
        assert!((settling_time(&t, 1.0).unwrap() - 3.0).abs() < 1e-9);

        let ends_outside = trace(vec![1.0, 1.0, 0.5]);
        assert_eq!(settling_time(&ends_outside, 1.0), None);
    }

    #[test]
    fn steady_state_examples() {
        let perfect = trace(vec![1.0; 30]);
        assert_eq!(steady_state_error(&perfect, 1.0, 0.1).unwrap(), 0.0);
        let t = trace((0..=500).map(|k| if k > 400 { 0.75 } else { 0.0 }).collect());
        // ceil(0.1 * 501) = 51 tail samples, all at 0.75
        assert!((steady_state_error(&t, 1.0, 0.1).unwrap() - 0.25).abs() < 1e-12);
        assert!(steady_state_error(&t, 1.0, 0.0).is_err());
        assert!(steady_state_error(&t, 1.0, 1.5).is_err());
    }

    #[test]
    fn iae_of_constant_error() {
        let t = trace(vec![0.0; 501]);
        assert!((iae(&t) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn duty_and_rms() {
        let mut t = trace(vec![0.0; 4]);
        assert_eq!(saturation_duty(&t), 0.0);
        t.u_cmd = vec![20.0; 4];
        t.u_sat = vec![10.0; 4];
        assert_eq!(saturation_duty(&t), 1.0);
        assert!((u_rms(&t) - 10.0).abs() < 1e-12);
        t.u_sat = vec![1.0, -1.0, 1.0, -1.0];
        assert!((u_rms(&t) - 1.0).abs() < 1e-12);
        t.u_sat = vec![0.0; 4];
        assert_eq!(u_rms(&t), 0.0);
        t.u_sat = vec![-3.0; 4];
        assert!((u_rms(&t) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_reference_uses_absolute_band() {
        let mut y = vec![0.0; 10];
        y.extend([0.3, 0.2, 0.1, 0.05, 0.01, 0.0, 0.0]);
        let t = Trajectory::from_output(0.1, 0.0, y);
        let m = StepMetrics::compute(&t, 0.0);
        assert!((m.overshoot_pct - 30.0).abs() < 1e-9);
        assert!((m.settle_time.unwrap() - 1.4).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn iae_is_additive_at_a_shared_sample(
            ys in proptest::collection::vec(-2.0f64..2.0, 3..200),
            split in 0.0f64..1.0,
        ) {
            let t = trace(ys);
            let n = t.len();
            let m = 1 + ((n - 2) as f64 * split) as usize;
            let whole = iae(&t);
            let parts = iae(&t.slice(0..m + 1)) + iae(&t.slice(m..n));
            prop_assert!((whole - parts).abs() < 1e-9 * (1.0 + whole));
        }

        #[test]
        fn overshoot_is_scale_invariant(
            ys in proptest::collection::vec(0.0f64..2.0, 1..100),
            r in 0.1f64..5.0,
            c in 0.01f64..100.0,
        ) {
            let a = Trajectory::from_output(0.01, r, ys.clone());
            let b = Trajectory::from_output(0.01, r * c, ys.iter().map(|y| y * c).collect());
            let (oa, ob) = (percent_overshoot(&a, r).unwrap(), percent_overshoot(&b, r * c).unwrap());
            prop_assert!((oa - ob).abs() < 1e-9 * (1.0 + oa));
        }

        #[test]
        fn rise_precedes_settle(
            rate in 0.5f64..20.0,
            n in 50usize..400,
        ) {
            let ys: Vec<f64> = (0..n).map(|k| 1.0 - (-rate * k as f64 * 0.01).exp()).collect();
            let t = trace(ys);
            if let (Some(tr), Some(ts)) = (rise_time(&t, 1.0), settling_time(&t, 1.0)) {
                prop_assert!(tr <= ts);
            }
        }

        #[test]
        fn metrics_are_deterministic(ys in proptest::collection::vec(-2.0f64..2.0, 2..100)) {
            let t = trace(ys);
            prop_assert_eq!(StepMetrics::compute(&t, 1.0), StepMetrics::compute(&t.clone(), 1.0));
        }
    }
}

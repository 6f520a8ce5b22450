//! Discrete-time plant models and the sensor/delay pipeline.

use std::collections::VecDeque;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{check_non_negative, check_positive, Error, Result};
use crate::rng::{self, StreamRng};

/// Velocity scale below which Coulomb friction is blended linearly to zero.
pub const COULOMB_SMOOTHING_VEL: f64 = 1e-4;

/// First-order joint `tau * dy/dt + y = K * u`, sampled every `dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FirstOrderParams {
    pub tau: f64,
    pub gain: f64,
    pub dt: f64,
}

impl FirstOrderParams {
    pub fn new(tau: f64, gain: f64, dt: f64) -> Result<Self> {
        let p = Self { tau, gain, dt };
        p.validate()?;
        Ok(p)
    }

    /// Baseline joint: tau = 1 s, K = 1, dt = 10 ms.
    pub fn nominal() -> Self {
        Self {
            tau: 1.0,
            gain: 1.0,
            dt: 0.01,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("tau", self.tau)?;
        check_positive("gain", self.gain)?;
        check_positive("dt", self.dt)
    }

    /// Forward Euler is only open-loop stable for `dt < 2 tau`.
    pub fn euler_stable(&self) -> bool {
        self.dt < 2.0 * self.tau
    }

    pub fn with_dt(self, dt: f64) -> Self {
        Self { dt, ..self }
    }
}

impl Default for FirstOrderParams {
    fn default() -> Self {
        Self::nominal()
    }
}

/// Continuous unit-step response `K (1 - exp(-t / tau))`.
pub fn analytic_step_response(t: f64, p: &FirstOrderParams) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("step response needs t >= 0, got {t}")));
    }
    Ok(p.gain * -(-t / p.tau).exp_m1())
}

/// One forward-Euler update of the first-order plant.
pub fn euler_step(y: f64, u: f64, p: &FirstOrderParams) -> Result<f64> {
    if !y.is_finite() || !u.is_finite() {
        return Err(Error::NonFinite("euler_step"));
    }
    Ok(y + p.dt * (-y / p.tau + p.gain * u / p.tau))
}

/// Exact zero-order-hold coefficients of the first-order plant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZohCoeffs {
    pub a: f64,
    pub b: f64,
}

pub fn zoh_coeffs(p: &FirstOrderParams) -> ZohCoeffs {
    let x = -p.dt / p.tau;
    // 1 - a via exp_m1 keeps b accurate for dt << tau
    ZohCoeffs {
        a: x.exp(),
        b: -p.gain * x.exp_m1(),
    }
}

pub fn zoh_step(y: f64, u: f64, c: &ZohCoeffs) -> f64 {
    c.a * y + c.b * u
}

/// Lightly damped actuator with friction and a deadzone.
///
/// The input enters in normalised form so that the static gain from effort to
/// position is `input_gain`:
///
/// ```text
/// θ'' = ωn² (Ku·dz(u) − θ) − 2ζωn θ' − b θ' − fc·sgn(θ') + d
/// ```
///
/// `d` is an acceleration disturbance, friction terms are accelerations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SecondOrderParams {
    pub omega_n: f64,
    pub zeta: f64,
    pub input_gain: f64,
    pub viscous: f64,
    pub coulomb: f64,
    pub deadzone: f64,
    pub dt: f64,
}

impl SecondOrderParams {
    /// Mid-range member of the benchmark actuator family, 2 ms sampling.
    pub fn nominal() -> Self {
        Self {
            omega_n: 9.0,
            zeta: 0.7,
            input_gain: 1.0,
            viscous: 0.055,
            coulomb: 0.025,
            deadzone: 0.01,
            dt: 0.002,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("omega_n", self.omega_n)?;
        check_positive("zeta", self.zeta)?;
        check_positive("dt", self.dt)?;
        check_non_negative("viscous", self.viscous)?;
        check_non_negative("coulomb", self.coulomb)?;
        check_non_negative("deadzone", self.deadzone)?;
        if !self.input_gain.is_finite() {
            return Err(Error::NonFinite("input_gain"));
        }
        Ok(())
    }

    /// Position reached under a constant effort outside the deadzone.
    pub fn dc_gain(&self) -> f64 {
        self.input_gain
    }
}

impl Default for SecondOrderParams {
    fn default() -> Self {
        Self::nominal()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderState {
    pub theta: f64,
    pub theta_dot: f64,
}

impl SecondOrderState {
    /// `½θ'² + ½ωn²θ²`
    pub fn energy(&self, omega_n: f64) -> f64 {
        0.5 * self.theta_dot * self.theta_dot + 0.5 * omega_n * omega_n * self.theta * self.theta
    }
}

/// Zero inside `[-width, width]`, shifted identity outside.
pub fn apply_deadzone(u: f64, width: f64) -> f64 {
    if u.abs() <= width {
        0.0
    } else {
        u - width.copysign(u)
    }
}

/// `sign(v) * min(1, |v| / v_eps)`
pub fn smoothed_sign(v: f64, v_eps: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        (v.abs() / v_eps).min(1.0).copysign(v)
    }
}

/// Semi-implicit Euler step: velocity first, then position with the new
/// velocity.
pub fn second_order_step(
    state: SecondOrderState,
    u: f64,
    d_ext: f64,
    p: &SecondOrderParams,
) -> SecondOrderState {
    let SecondOrderState { theta, theta_dot } = state;
    let wn2 = p.omega_n * p.omega_n;
    let u_eff = apply_deadzone(u, p.deadzone);
    let friction = p.viscous * theta_dot + p.coulomb * smoothed_sign(theta_dot, COULOMB_SMOOTHING_VEL);
    let accel = wn2 * (p.input_gain * u_eff - theta) - 2.0 * p.zeta * p.omega_n * theta_dot - friction + d_ext;
    let theta_dot = theta_dot + p.dt * accel;
    SecondOrderState {
        theta: theta + p.dt * theta_dot,
        theta_dot,
    }
}

/// How the first-order plant is discretised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Discretization {
    Euler,
    Zoh,
}

/// Plant family plus parameters, as stored in a model instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PlantSpec {
    FirstOrder {
        params: FirstOrderParams,
        discretization: Discretization,
    },
    SecondOrder {
        params: SecondOrderParams,
    },
}

impl PlantSpec {
    pub fn dt(&self) -> f64 {
        match self {
            PlantSpec::FirstOrder { params, .. } => params.dt,
            PlantSpec::SecondOrder { params } => params.dt,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PlantSpec::FirstOrder { params, .. } => params.validate(),
            PlantSpec::SecondOrder { params } => params.validate(),
        }
    }

    /// Scale applied to an input-referred disturbance before it enters the
    /// plant. The second-order family takes accelerations, so a load worth
    /// `d` effort units is `ωn² d`.
    pub fn disturbance_scale(&self) -> f64 {
        match self {
            PlantSpec::FirstOrder { .. } => 1.0,
            PlantSpec::SecondOrder { params } => params.omega_n * params.omega_n,
        }
    }

    pub fn start(&self) -> Plant {
        match *self {
            PlantSpec::FirstOrder {
                params,
                discretization: Discretization::Euler,
            } => Plant::Euler { params, y: 0.0 },
            PlantSpec::FirstOrder {
                params,
                discretization: Discretization::Zoh,
            } => Plant::Zoh {
                coeffs: zoh_coeffs(&params),
                gain: params.gain,
                y: 0.0,
            },
            PlantSpec::SecondOrder { params } => Plant::SecondOrder {
                params,
                state: SecondOrderState::default(),
            },
        }
    }
}

/// Running plant state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Plant {
    Euler { params: FirstOrderParams, y: f64 },
    Zoh { coeffs: ZohCoeffs, gain: f64, y: f64 },
    SecondOrder { params: SecondOrderParams, state: SecondOrderState },
}

impl Plant {
    pub fn output(&self) -> f64 {
        match self {
            Plant::Euler { y, .. } | Plant::Zoh { y, .. } => *y,
            Plant::SecondOrder { state, .. } => state.theta,
        }
    }

    pub fn set_output(&mut self, value: f64) {
        match self {
            Plant::Euler { y, .. } | Plant::Zoh { y, .. } => *y = value,
            Plant::SecondOrder { state, .. } => {
                *state = SecondOrderState {
                    theta: value,
                    theta_dot: 0.0,
                }
            }
        }
    }

    /// Advance one sample with effort `u` and an already-scaled disturbance
    /// `d`. First-order plants see `d` as an additive input load.
    pub fn step(&mut self, u: f64, d: f64) -> f64 {
        match self {
            Plant::Euler { params, y } => {
                let u = u + d;
                *y += params.dt * (-*y / params.tau + params.gain * u / params.tau);
                *y
            }
            Plant::Zoh { coeffs, y, .. } => {
                *y = zoh_step(*y, u + d, coeffs);
                *y
            }
            Plant::SecondOrder { params, state } => {
                *state = second_order_step(*state, u, d, params);
                state.theta
            }
        }
    }
}

/// Additive Gaussian noise followed by uniform quantization.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SensorModel {
    pub noise_sigma: f64,
    pub quant_step: f64,
    pub seed: u64,
}

impl SensorModel {
    pub fn ideal() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        check_non_negative("noise_sigma", self.noise_sigma)?;
        check_non_negative("quant_step", self.quant_step)
    }
}

/// Round to the nearest multiple of `step`, halves away from zero.
/// `step == 0` is the identity.
pub fn quantize(x: f64, step: f64) -> f64 {
    if step > 0.0 {
        (x / step).round() * step
    } else {
        x
    }
}

/// A sensor with its own seeded noise stream.
#[derive(Debug, Clone)]
pub struct Sensor {
    model: SensorModel,
    noise: Option<(Normal<f64>, StreamRng)>,
}

impl Sensor {
    pub fn new(model: SensorModel) -> Result<Self> {
        model.validate()?;
        let noise = if model.noise_sigma > 0.0 {
            let normal = Normal::new(0.0, model.noise_sigma).map_err(|e| Error::InvalidParameter {
                name: "noise_sigma",
                reason: e.to_string(),
            })?;
            Some((normal, rng::stream(model.seed, 0)))
        } else {
            None
        };
        Ok(Self { model, noise })
    }

    pub fn model(&self) -> &SensorModel {
        &self.model
    }

    pub fn sense(&mut self, y_true: f64) -> f64 {
        let noisy = match &mut self.noise {
            Some((normal, rng)) => y_true + normal.sample(rng),
            None => y_true,
        };
        quantize(noisy, self.model.quant_step)
    }
}

/// FIFO of `depth` samples, initialised to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayLine {
    depth: usize,
    buffer: VecDeque<f64>,
}

impl DelayLine {
    pub fn new(depth: usize) -> Self {
        Self {
            depth,
            buffer: std::iter::repeat_n(0.0, depth).collect(),
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Push `u_in` and return the value pushed `depth` calls earlier.
    pub fn push_pop(&mut self, u_in: f64) -> f64 {
        if self.depth == 0 {
            return u_in;
        }
        self.buffer.push_back(u_in);
        self.buffer.pop_front().unwrap_or(0.0)
    }
}

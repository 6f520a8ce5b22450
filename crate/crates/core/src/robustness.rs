//! Closed-loop experiments over randomized model families and the penalized
//! robust objective
//!
//! ```text
//! J   = median_m J_m
//! J_m = IAE_m / T + λ_os max(0, %OS_m - %OS_max)^2 + λ_sat duty_m^2 + λ_u u_rms,m^2
//! ```
//!
//! Ensembles are sampled with one RNG stream per draw index, so two candidates
//! evaluated on the same ensemble see the same plants and the same sensor
//! noise (common random numbers).

use std::f64::consts::TAU;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::controller::{pid_step, ControllerConfig, ControllerState, GainTriple, NONIDEAL_DERIV_ALPHA};
use crate::error::{check_positive, Error, Result};
use crate::metrics::{self, StepMetrics, Trajectory, DEFAULT_TAIL_FRACTION};
use crate::rng;
use crate::sim::{
    DelayLine, Discretization, FirstOrderParams, PlantSpec, SecondOrderParams, Sensor, SensorModel,
};
use crate::stability::uniform;

/// Score assigned to a run stopped by the divergence guard.
pub const DIVERGENCE_CEILING: f64 = 1e6;
/// Divergence guard: `|y| > DIVERGENCE_FACTOR * max(1, |r|)`.
pub const DIVERGENCE_FACTOR: f64 = 50.0;
/// Back-calculation constant used by the randomized experiments.
pub const DEFAULT_KAW: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TaskKind {
    Step { amplitude: f64 },
    Sine { amplitude: f64, freq_hz: f64 },
    /// Zero reference with an input-referred step load of `magnitude` effort
    /// units switched on at `onset` seconds.
    DisturbanceRejection { magnitude: f64, onset: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    #[serde(flatten)]
    pub kind: TaskKind,
    pub horizon: f64,
}

impl TaskSpec {
    pub fn step(horizon: f64) -> Self {
        Self {
            kind: TaskKind::Step { amplitude: 1.0 },
            horizon,
        }
    }

    /// `0.5 sin(2π 0.8 t)`
    pub fn sine(horizon: f64) -> Self {
        Self {
            kind: TaskKind::Sine {
                amplitude: 0.5,
                freq_hz: 0.8,
            },
            horizon,
        }
    }

    /// Load of 0.5 effort units applied at a quarter of the horizon.
    pub fn disturbance(horizon: f64) -> Self {
        Self {
            kind: TaskKind::DisturbanceRejection {
                magnitude: 0.5,
                onset: horizon / 4.0,
            },
            horizon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("horizon", self.horizon)
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            TaskKind::Step { .. } => "step",
            TaskKind::Sine { .. } => "sine",
            TaskKind::DisturbanceRejection { .. } => "disturbance",
        }
    }

    pub fn reference(&self, t: f64) -> f64 {
        match self.kind {
            TaskKind::Step { amplitude } => amplitude,
            TaskKind::Sine { amplitude, freq_hz } => amplitude * (TAU * freq_hz * t).sin(),
            TaskKind::DisturbanceRejection { .. } => 0.0,
        }
    }

    pub fn disturbance_at(&self, t: f64) -> f64 {
        match self.kind {
            TaskKind::DisturbanceRejection { magnitude, onset } if t >= onset => magnitude,
            _ => 0.0,
        }
    }

    pub fn reference_scale(&self) -> f64 {
        match self.kind {
            TaskKind::Step { amplitude } | TaskKind::Sine { amplitude, .. } => amplitude.abs(),
            TaskKind::DisturbanceRejection { .. } => 0.0,
        }
    }

    pub fn samples(&self, dt: f64) -> usize {
        (self.horizon / dt).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInstance {
    pub id: usize,
    pub plant: PlantSpec,
    pub delay_samples: usize,
    pub sensor: SensorModel,
    /// Symmetric clamp: effort lies in `[-u_max, u_max]`.
    pub u_max: f64,
    pub draw_seed: u64,
}

impl ModelInstance {
    /// Ideal first-order plant with no delay, noise or quantization.
    pub fn ideal_first_order(params: FirstOrderParams, discretization: Discretization, u_max: f64) -> Self {
        Self {
            id: 0,
            plant: PlantSpec::FirstOrder {
                params,
                discretization,
            },
            delay_samples: 0,
            sensor: SensorModel::ideal(),
            u_max,
            draw_seed: 0,
        }
    }

    pub fn ideal_second_order(params: SecondOrderParams, delay_samples: usize, u_max: f64) -> Self {
        Self {
            id: 0,
            plant: PlantSpec::SecondOrder { params },
            delay_samples,
            sensor: SensorModel::ideal(),
            u_max,
            draw_seed: 0,
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self.plant {
            PlantSpec::FirstOrder { .. } => "first_order",
            PlantSpec::SecondOrder { .. } => "second_order",
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.plant.validate()?;
        self.sensor.validate()?;
        check_positive("u_max", self.u_max)
    }
}

/// Uncertainty set of the first-order joint family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FirstOrderFamily {
    pub tau: (f64, f64),
    pub gain: (f64, f64),
    pub delays: Vec<usize>,
    pub noise_sigma: (f64, f64),
    pub quant_steps: Vec<f64>,
    pub u_max: Vec<f64>,
    pub dt: f64,
    pub discretization: Discretization,
}

impl Default for FirstOrderFamily {
    fn default() -> Self {
        Self {
            tau: (0.5, 1.5),
            gain: (0.8, 1.2),
            delays: vec![0, 1, 2, 3],
            noise_sigma: (0.0, 0.01),
            quant_steps: vec![0.0, 0.001, 0.002],
            u_max: vec![2.0, 3.0, 5.0],
            dt: 0.01,
            discretization: Discretization::Zoh,
        }
    }
}

/// Uncertainty set of the second-order actuator family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SecondOrderFamily {
    pub omega_n: (f64, f64),
    pub zeta: (f64, f64),
    pub input_gain: (f64, f64),
    pub viscous: (f64, f64),
    pub coulomb: (f64, f64),
    pub deadzone: f64,
    pub delays: Vec<usize>,
    pub noise_sigma: (f64, f64),
    pub quant_steps: Vec<f64>,
    pub u_max: Vec<f64>,
    pub dt: f64,
}

impl Default for SecondOrderFamily {
    fn default() -> Self {
        Self {
            omega_n: (8.0, 10.0),
            zeta: (0.6, 0.8),
            input_gain: (1.0, 1.0),
            viscous: (0.05, 0.06),
            coulomb: (0.02, 0.03),
            deadzone: 0.01,
            delays: vec![1],
            noise_sigma: (0.0, 0.01),
            quant_steps: vec![0.0, 0.001, 0.002],
            u_max: vec![1.0],
            dt: 0.002,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilySpec {
    FirstOrder(FirstOrderFamily),
    SecondOrder(SecondOrderFamily),
}

impl FamilySpec {
    pub fn validate(&self) -> Result<()> {
        fn range(name: &'static str, (lo, hi): (f64, f64)) -> Result<()> {
            if lo.is_finite() && hi.is_finite() && lo <= hi {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    reason: format!("range [{lo}, {hi}] is not ordered"),
                })
            }
        }
        fn choices<T>(name: &'static str, v: &[T]) -> Result<()> {
            if v.is_empty() {
                Err(Error::Empty(name))
            } else {
                Ok(())
            }
        }
        match self {
            FamilySpec::FirstOrder(f) => {
                range("tau", f.tau)?;
                range("gain", f.gain)?;
                range("noise_sigma", f.noise_sigma)?;
                choices("delays", &f.delays)?;
                choices("quant_steps", &f.quant_steps)?;
                choices("u_max", &f.u_max)?;
                check_positive("tau", f.tau.0)?;
                check_positive("gain", f.gain.0)?;
                check_positive("dt", f.dt)
            }
            FamilySpec::SecondOrder(f) => {
                range("omega_n", f.omega_n)?;
                range("zeta", f.zeta)?;
                range("input_gain", f.input_gain)?;
                range("viscous", f.viscous)?;
                range("coulomb", f.coulomb)?;
                range("noise_sigma", f.noise_sigma)?;
                choices("delays", &f.delays)?;
                choices("quant_steps", &f.quant_steps)?;
                choices("u_max", &f.u_max)?;
                check_positive("omega_n", f.omega_n.0)?;
                check_positive("zeta", f.zeta.0)?;
                check_positive("dt", f.dt)
            }
        }
    }
}

fn pick<R: Rng, T: Copy>(r: &mut R, options: &[T]) -> T {
    options[r.random_range(0..options.len())]
}

/// Draw one model from `spec`. Draws are made in a fixed order so the result
/// depends only on the RNG state.
pub fn sample_model<R: Rng>(spec: &FamilySpec, rng: &mut R, id: usize) -> ModelInstance {
    let draw_seed: u64 = rng.random();
    match spec {
        FamilySpec::FirstOrder(f) => {
            let tau = uniform(rng, f.tau);
            let gain = uniform(rng, f.gain);
            let delay = pick(rng, &f.delays);
            let noise_sigma = uniform(rng, f.noise_sigma);
            let quant_step = pick(rng, &f.quant_steps);
            let u_max = pick(rng, &f.u_max);
            ModelInstance {
                id,
                plant: PlantSpec::FirstOrder {
                    params: FirstOrderParams { tau, gain, dt: f.dt },
                    discretization: f.discretization,
                },
                delay_samples: delay,
                sensor: SensorModel {
                    noise_sigma,
                    quant_step,
                    seed: draw_seed,
                },
                u_max,
                draw_seed,
            }
        }
        FamilySpec::SecondOrder(f) => {
            let params = SecondOrderParams {
                omega_n: uniform(rng, f.omega_n),
                zeta: uniform(rng, f.zeta),
                input_gain: uniform(rng, f.input_gain),
                viscous: uniform(rng, f.viscous),
                coulomb: uniform(rng, f.coulomb),
                deadzone: f.deadzone,
                dt: f.dt,
            };
            let delay = pick(rng, &f.delays);
            let noise_sigma = uniform(rng, f.noise_sigma);
            let quant_step = pick(rng, &f.quant_steps);
            let u_max = pick(rng, &f.u_max);
            ModelInstance {
                id,
                plant: PlantSpec::SecondOrder { params },
                delay_samples: delay,
                sensor: SensorModel {
                    noise_sigma,
                    quant_step,
                    seed: draw_seed,
                },
                u_max,
                draw_seed,
            }
        }
    }
}

/// `count` draws, draw `i` from its own stream `(seed, i)`; ids start at
/// `first_id`.
pub fn sample_ensemble(spec: &FamilySpec, count: usize, seed: u64, first_id: usize) -> Vec<ModelInstance> {
    (0..count)
        .map(|i| {
            let id = first_id + i;
            let mut r = rng::stream(seed, id as u64);
            sample_model(spec, &mut r, id)
        })
        .collect()
}

/// Controller settings shared by every model in an evaluation; the clamp
/// comes from each model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControllerTemplate {
    pub antiwindup_kaw: Option<f64>,
    pub deriv_filter_alpha: f64,
    pub deriv_on: bool,
}

impl ControllerTemplate {
    /// Filtered derivative and back-calculation, as used under non-idealities.
    pub fn nonideal() -> Self {
        Self {
            antiwindup_kaw: Some(DEFAULT_KAW),
            deriv_filter_alpha: NONIDEAL_DERIV_ALPHA,
            deriv_on: true,
        }
    }

    pub fn config(&self, gains: GainTriple, u_max: f64) -> ControllerConfig {
        ControllerConfig {
            gains,
            u_min: -u_max,
            u_max,
            antiwindup_kaw: self.antiwindup_kaw,
            deriv_filter_alpha: self.deriv_filter_alpha,
            deriv_on: self.deriv_on,
        }
    }
}

impl Default for ControllerTemplate {
    fn default() -> Self {
        Self::nonideal()
    }
}

/// Simulate one closed loop with the model's `±u_max` replacing the
/// controller clamp.
pub fn run_closed_loop(model: &ModelInstance, cfg: &ControllerConfig, task: &TaskSpec) -> Result<Trajectory> {
    simulate(model, &cfg.with_bounds(-model.u_max, model.u_max), task)
}

/// Simulate one closed loop using the controller's own clamp. Per sample:
/// reference, measurement, PID update, clamp, input delay, plant update, log.
/// The run stops early (and is flagged) when the output leaves
/// `50 * max(1, |r|)` or becomes non-finite.
pub fn simulate(model: &ModelInstance, cfg: &ControllerConfig, task: &TaskSpec) -> Result<Trajectory> {
    model.validate()?;
    task.validate()?;
    cfg.validate()?;

    let dt = model.plant.dt();
    let n = task.samples(dt);
    let limit = DIVERGENCE_FACTOR * task.reference_scale().max(1.0);
    let d_scale = model.plant.disturbance_scale();

    let mut plant = model.plant.start();
    let mut sensor = Sensor::new(model.sensor)?;
    let mut delay = DelayLine::new(model.delay_samples);
    let mut state = ControllerState::default();
    let mut traj = Trajectory::with_capacity(dt, n + 1);

    for k in 0..=n {
        let t = k as f64 * dt;
        let r = task.reference(t);
        let y_meas = sensor.sense(plant.output());
        let out = pid_step(r - y_meas, cfg, state, dt);
        state = out.state;
        let applied = delay.push_pop(out.u_sat);
        let y = plant.step(applied, d_scale * task.disturbance_at(t));

        traj.reference.push(r);
        traj.output.push(y);
        traj.measured.push(y_meas);
        traj.u_cmd.push(out.u_cmd);
        traj.u_sat.push(out.u_sat);
        traj.integrator.push(state.integral);

        if !y.is_finite() || y.abs() > limit {
            traj.diverged = true;
            break;
        }
    }
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObjectiveWeights {
    pub lambda_os: f64,
    pub lambda_sat: f64,
    pub lambda_u: f64,
    /// Overshoot (%) tolerated before the hinge penalty starts.
    pub os_max: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        Self {
            lambda_os: 1.0,
            lambda_sat: 5.0,
            lambda_u: 0.5,
            os_max: 5.0,
        }
    }
}

/// `iae / horizon + λ_os max(0, os - os_max)^2 + λ_sat duty^2 + λ_u u_rms^2`
pub fn penalized_score(iae: f64, horizon: f64, overshoot_pct: f64, sat_duty: f64, u_rms: f64, w: &ObjectiveWeights) -> f64 {
    let excess = (overshoot_pct - w.os_max).max(0.0);
    iae / horizon + w.lambda_os * excess * excess + w.lambda_sat * sat_duty * sat_duty + w.lambda_u * u_rms * u_rms
}

/// Metrics appropriate to the task. Sine tracking reports overshoot as the
/// peak above the reference amplitude and no rise/settle times; disturbance
/// rejection uses the absolute variants around zero.
pub fn task_metrics(traj: &Trajectory, task: &TaskSpec) -> StepMetrics {
    match task.kind {
        TaskKind::Step { amplitude } => StepMetrics::compute(traj, amplitude),
        TaskKind::DisturbanceRejection { .. } => StepMetrics::compute(traj, 0.0),
        TaskKind::Sine { amplitude, .. } => {
            let n = traj.len();
            let tail = ((DEFAULT_TAIL_FRACTION * n as f64).ceil() as usize).clamp(1, n.max(1));
            let tail_err = if n == 0 {
                f64::NAN
            } else {
                traj.errors().skip(n - tail).map(f64::abs).sum::<f64>() / tail as f64
            };
            StepMetrics {
                overshoot_pct: metrics::percent_overshoot(traj, amplitude).unwrap_or(0.0),
                rise_time: None,
                settle_time: None,
                ss_error: tail_err,
                iae: metrics::iae(traj),
                sat_duty: metrics::saturation_duty(traj),
                u_rms: metrics::u_rms(traj),
            }
        }
    }
}

/// Overshoot entering the objective; disturbance rejection carries no
/// overshoot penalty.
fn penalized_overshoot(m: &StepMetrics, task: &TaskSpec) -> f64 {
    match task.kind {
        TaskKind::DisturbanceRejection { .. } => 0.0,
        _ => m.overshoot_pct,
    }
}

/// `J_m` for one trajectory, or the divergence ceiling.
pub fn score_model(traj: &Trajectory, task: &TaskSpec, weights: &ObjectiveWeights) -> (f64, StepMetrics) {
    let m = task_metrics(traj, task);
    if traj.diverged {
        return (DIVERGENCE_CEILING, m);
    }
    let j = penalized_score(m.iae, task.horizon, penalized_overshoot(&m, task), m.sat_duty, m.u_rms, weights);
    (if j.is_finite() { j } else { DIVERGENCE_CEILING }, m)
}

/// Median with the mean-of-middles convention for even counts. NaNs sort last.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

pub const MEDIAN_CONVENTION: &str = "mean of the two middle values for even counts";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelScore {
    pub model_id: usize,
    pub family: String,
    pub task: String,
    pub j: f64,
    pub diverged: bool,
    pub metrics: StepMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustScore {
    pub gains: GainTriple,
    pub per_model: Vec<ModelScore>,
    pub aggregate_j: f64,
    pub weights: ObjectiveWeights,
    pub median_convention: String,
}

impl RobustScore {
    pub fn diverged_count(&self) -> usize {
        self.per_model.iter().filter(|s| s.diverged).count()
    }

    pub fn median_of(&self, f: impl Fn(&ModelScore) -> f64) -> f64 {
        let v: Vec<f64> = self.per_model.iter().map(f).collect();
        median(&v).unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalSettings {
    pub controller: ControllerTemplate,
    pub weights: ObjectiveWeights,
}

/// Run every (model, task) pair, score each and take the median. Pairs are
/// evaluated in parallel and reduced in (model, task) order.
pub fn evaluate_candidate(
    gains: GainTriple,
    ensemble: &[ModelInstance],
    tasks: &[TaskSpec],
    settings: &EvalSettings,
) -> Result<RobustScore> {
    if ensemble.is_empty() {
        return Err(Error::Empty("ensemble"));
    }
    if tasks.is_empty() {
        return Err(Error::Empty("tasks"));
    }
    gains.validate()?;
    let pairs: Vec<(&ModelInstance, &TaskSpec)> = ensemble
        .iter()
        .flat_map(|m| tasks.iter().map(move |t| (m, t)))
        .collect();
    let per_model = pairs
        .par_iter()
        .map(|&(model, task)| {
            let cfg = settings.controller.config(gains, model.u_max);
            let traj = run_closed_loop(model, &cfg, task)?;
            let (j, metrics) = score_model(&traj, task, &settings.weights);
            Ok(ModelScore {
                model_id: model.id,
                family: model.family_name().to_string(),
                task: task.name().to_string(),
                j,
                diverged: traj.diverged,
                metrics,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let js: Vec<f64> = per_model.iter().map(|s| s.j).collect();
    Ok(RobustScore {
        gains,
        aggregate_j: median(&js).unwrap_or(f64::NAN),
        per_model,
        weights: settings.weights,
        median_convention: MEDIAN_CONVENTION.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::ControllerConfig;
    use proptest::prelude::*;

    #[test]
    fn zero_gains_hold_output_at_zero() {
        let model = ModelInstance::ideal_first_order(FirstOrderParams::nominal(), Discretization::Euler, 10.0);
        let cfg = ControllerConfig::baseline(GainTriple::default());
        let traj = run_closed_loop(&model, &cfg, &TaskSpec::step(5.0)).unwrap();
        assert!(traj.output.iter().all(|&y| y == 0.0));
        assert!((metrics::iae(&traj) - 5.0).abs() < 1e-12);
        assert_eq!(traj.len(), 501);
    }

    #[test]
    fn divergence_is_flagged_and_truncated() {
        // Euler with dt beyond the P-control limit
        let p = FirstOrderParams::new(1.0, 1.0, 0.6).unwrap();
        let model = ModelInstance::ideal_first_order(p, Discretization::Euler, 1e9);
        let cfg = ControllerConfig::baseline(GainTriple::p(5.0));
        let traj = run_closed_loop(&model, &cfg, &TaskSpec::step(100.0)).unwrap();
        assert!(traj.diverged);
        assert!(traj.len() < 168);
        let (j, _) = score_model(&traj, &TaskSpec::step(100.0), &ObjectiveWeights::default());
        assert_eq!(j, DIVERGENCE_CEILING);
    }

    #[test]
    fn score_examples() {
        let w = ObjectiveWeights::default();
        assert!((penalized_score(1.0, 2.0, 0.0, 0.0, 1.0, &w) - 1.0).abs() < 1e-12);
        assert_eq!(penalized_score(0.0, 2.0, 5.0, 0.0, 0.0, &w), 0.0);
        assert!((penalized_score(0.0, 2.0, 7.0, 0.0, 0.0, &w) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn median_conventions() {
        assert_eq!(median(&[]), None);
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), Some(2.5));
    }

    #[test]
    fn sampled_models_respect_ranges() {
        let spec = FamilySpec::FirstOrder(FirstOrderFamily::default());
        for m in sample_ensemble(&spec, 10_000, 11, 0) {
            let PlantSpec::FirstOrder { params, .. } = m.plant else { panic!() };
            assert!((0.5..=1.5).contains(&params.tau));
            assert!((0.8..=1.2).contains(&params.gain));
            assert!(m.delay_samples <= 3);
            assert!((0.0..=0.01).contains(&m.sensor.noise_sigma));
            assert!([0.0, 0.001, 0.002].contains(&m.sensor.quant_step));
            assert!([2.0, 3.0, 5.0].contains(&m.u_max));
        }
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let spec = FamilySpec::SecondOrder(SecondOrderFamily::default());
        assert_eq!(sample_ensemble(&spec, 20, 5, 0), sample_ensemble(&spec, 20, 5, 0));
        assert_ne!(sample_ensemble(&spec, 20, 5, 0), sample_ensemble(&spec, 20, 6, 0));
    }

    #[test]
    fn point_ranges_give_the_nominal_model() {
        let spec = FamilySpec::FirstOrder(FirstOrderFamily {
            tau: (1.0, 1.0),
            gain: (1.0, 1.0),
            delays: vec![0],
            noise_sigma: (0.0, 0.0),
            quant_steps: vec![0.0],
            u_max: vec![10.0],
            ..FirstOrderFamily::default()
        });
        let m = &sample_ensemble(&spec, 1, 3, 0)[0];
        let nominal = ModelInstance::ideal_first_order(FirstOrderParams::nominal(), Discretization::Zoh, 10.0);
        assert_eq!(m.plant, nominal.plant);
        assert_eq!(m.delay_samples, 0);
        assert_eq!(m.sensor.noise_sigma, 0.0);
        assert_eq!(m.sensor.quant_step, 0.0);
    }

    #[test]
    fn single_model_aggregate_is_its_score() {
        let model = ModelInstance::ideal_first_order(FirstOrderParams::nominal(), Discretization::Zoh, 5.0);
        let s = evaluate_candidate(GainTriple::pid(3.0, 1.0, 0.05), &[model], &[TaskSpec::step(2.0)], &EvalSettings::default()).unwrap();
        assert_eq!(s.per_model.len(), 1);
        assert_eq!(s.aggregate_j, s.per_model[0].j);
    }

    #[test]
    fn disturbance_is_applied_from_onset() {
        let task = TaskSpec::disturbance(2.0);
        assert_eq!(task.disturbance_at(0.49), 0.0);
        assert_eq!(task.disturbance_at(0.5), 0.5);
        assert_eq!(task.reference(1.0), 0.0);
        let sine = TaskSpec::sine(5.0);
        assert!((sine.reference(0.3125) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_inputs_are_rejected() {
        let s = EvalSettings::default();
        assert!(evaluate_candidate(GainTriple::p(1.0), &[], &[TaskSpec::step(1.0)], &s).is_err());
    }

    proptest! {
        #[test]
        fn sat_weight_is_monotone(
            iae in 0.0f64..10.0, os in 0.0f64..50.0, duty in 0.0f64..1.0, urms in 0.0f64..10.0,
            l1 in 0.0f64..10.0, dl in 0.0f64..10.0,
        ) {
            let w1 = ObjectiveWeights { lambda_sat: l1, ..ObjectiveWeights::default() };
            let w2 = ObjectiveWeights { lambda_sat: l1 + dl, ..ObjectiveWeights::default() };
            prop_assert!(penalized_score(iae, 2.0, os, duty, urms, &w2) >= penalized_score(iae, 2.0, os, duty, urms, &w1));
        }

        #[test]
        fn median_ignores_a_corrupted_minority(
            clean in proptest::collection::vec(0.0f64..10.0, 3..40),
            frac in 0.0f64..0.49,
        ) {
            let k = ((clean.len() as f64) * frac) as usize;
            let k = k.min((clean.len() - 1) / 2);
            let mut v = clean.clone();
            for x in v.iter_mut().take(k) {
                *x = DIVERGENCE_CEILING;
            }
            let max_clean = clean[k..].iter().copied().fold(f64::MIN, f64::max);
            prop_assert!(median(&v).unwrap() <= max_clean);
        }
    }
}

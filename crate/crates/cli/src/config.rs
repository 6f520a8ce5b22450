//! JSON experiment configuration. Every field has a default, so `{}` is a
//! valid config and reproduces the baseline constants.

use std::path::{Path, PathBuf};

use pidcert::controller::{ControllerConfig, GainTriple, NONIDEAL_DERIV_ALPHA};
use pidcert::robustness::{ControllerTemplate, FirstOrderFamily, ObjectiveWeights, SecondOrderFamily, DEFAULT_KAW};
use pidcert::sim::{Discretization, FirstOrderParams, SecondOrderParams, SensorModel};
use pidcert::tuner::{GainBounds, ScreenConfig, TunerSettings};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    #[default]
    Sweep,
    Stability,
    Windup,
    Montecarlo,
    Tune,
    Benchmark,
}

impl ExperimentKind {
    pub fn dir_name(&self) -> &'static str {
        match self {
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::Stability => "stability",
            ExperimentKind::Windup => "windup",
            ExperimentKind::Montecarlo => "montecarlo",
            ExperimentKind::Tune => "tune",
            ExperimentKind::Benchmark => "benchmark",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantBlock {
    pub tau: f64,
    pub gain: f64,
    /// Sampling period.
    pub dt: f64,
    pub discretization: Discretization,
}

impl Default for PlantBlock {
    fn default() -> Self {
        Self {
            tau: 1.0,
            gain: 1.0,
            dt: 0.01,
            discretization: Discretization::Euler,
        }
    }
}

impl PlantBlock {
    pub fn params(&self) -> pidcert::Result<FirstOrderParams> {
        FirstOrderParams::new(self.tau, self.gain, self.dt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AntiwindupForm {
    #[default]
    None,
    BackCalculation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerBlock {
    pub u_min: f64,
    pub u_max: f64,
    pub antiwindup: AntiwindupForm,
    /// Back-calculation time constant `T_aw`.
    pub t_aw: f64,
    /// Derivative low-pass coefficient; 0 is the raw difference.
    pub deriv_filter_alpha: f64,
}

impl Default for ControllerBlock {
    fn default() -> Self {
        Self {
            u_min: -10.0,
            u_max: 10.0,
            antiwindup: AntiwindupForm::None,
            t_aw: DEFAULT_KAW,
            deriv_filter_alpha: 0.0,
        }
    }
}

impl ControllerBlock {
    pub fn config(&self, gains: GainTriple) -> ControllerConfig {
        let kaw = match self.antiwindup {
            AntiwindupForm::None => None,
            AntiwindupForm::BackCalculation => Some(self.t_aw),
        };
        let mut cfg = ControllerConfig::baseline(gains)
            .with_bounds(self.u_min, self.u_max)
            .with_antiwindup(kaw);
        cfg.deriv_filter_alpha = self.deriv_filter_alpha;
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskBlock {
    pub horizon: f64,
    pub reference: f64,
}

impl Default for TaskBlock {
    fn default() -> Self {
        Self {
            horizon: 5.0,
            reference: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepBlock {
    pub p_kp: Vec<f64>,
    pub pi_kp: f64,
    pub pi_ki: Vec<f64>,
    pub pid_kp: f64,
    pub pid_ki: f64,
    pub pid_kd: Vec<f64>,
}

impl Default for SweepBlock {
    fn default() -> Self {
        Self {
            p_kp: vec![0.5, 1.0, 1.5, 2.0, 3.0],
            pi_kp: 3.0,
            pi_ki: vec![0.0, 0.25, 0.5, 1.0],
            pid_kp: 3.0,
            pid_ki: 1.0,
            pid_kd: vec![0.0, 0.05, 0.10],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityBlock {
    pub kp_range: (f64, f64),
    pub ki_range: (f64, f64),
    pub resolution: usize,
    /// `kp` at which the integrator guardrail is traced against `dt`.
    pub guardrail_kp: f64,
    pub dt_range: (f64, f64),
    pub dt_points: usize,
    pub robust_kp_range: (f64, f64),
    pub robust_ki_range: (f64, f64),
    /// Grid resolution of the robust point cloud; 0 disables it.
    pub robust_resolution: usize,
    pub robust_draws: usize,
}

impl Default for StabilityBlock {
    fn default() -> Self {
        Self {
            kp_range: (0.0, 400.0),
            ki_range: (0.0, 40_000.0),
            resolution: 200,
            guardrail_kp: 3.0,
            dt_range: (0.001, 0.1),
            dt_points: 41,
            robust_kp_range: (0.0, 20.0),
            robust_ki_range: (0.0, 100.0),
            robust_resolution: 21,
            robust_draws: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindupBlock {
    pub model: SecondOrderParams,
    pub delay_samples: usize,
    pub u_max: f64,
    pub loose_u_max: f64,
    pub gains: GainTriple,
    pub t_aw: f64,
    pub deriv_filter_alpha: f64,
    pub horizon: f64,
}

impl Default for WindupBlock {
    fn default() -> Self {
        Self {
            model: SecondOrderParams {
                zeta: 0.6,
                ..SecondOrderParams::nominal()
            },
            delay_samples: 2,
            u_max: 1.3,
            loose_u_max: 1e3,
            gains: GainTriple::pid(4.0, 40.0, 0.05),
            t_aw: DEFAULT_KAW,
            deriv_filter_alpha: NONIDEAL_DERIV_ALPHA,
            horizon: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleBlock {
    pub family: FirstOrderFamily,
    pub draws: usize,
    pub horizon: f64,
    pub manual: GainTriple,
    pub robust: GainTriple,
    pub controller: ControllerTemplate,
    pub weights: ObjectiveWeights,
}

impl Default for EnsembleBlock {
    fn default() -> Self {
        Self {
            family: FirstOrderFamily::default(),
            draws: 200,
            horizon: 3.0,
            manual: GainTriple::pid(3.0, 1.0, 0.05),
            robust: GainTriple::pid(10.0, 25.0, 0.8),
            controller: ControllerTemplate::nonideal(),
            weights: ObjectiveWeights::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TunerBlock {
    pub bounds: GainBounds,
    pub settings: TunerSettings,
    pub seeds: Vec<u64>,
    /// Analytic guard model.
    pub nominal: FirstOrderParams,
    pub screen: ScreenConfig,
    pub feasibility_samples: usize,
}

impl Default for TunerBlock {
    fn default() -> Self {
        Self {
            bounds: GainBounds::default(),
            settings: TunerSettings::default(),
            seeds: vec![0, 1, 2, 3, 4],
            nominal: FirstOrderParams::nominal(),
            screen: ScreenConfig::default(),
            feasibility_samples: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkBlock {
    pub family: SecondOrderFamily,
    pub draws: usize,
    pub gains: GainTriple,
    pub step_horizon: f64,
    pub sine_horizon: f64,
    pub t_aw_range: (f64, f64),
    pub t_aw_points: usize,
    pub u_max_levels: Vec<f64>,
    pub deriv_filter_alpha: f64,
    pub t_aw: f64,
}

impl Default for BenchmarkBlock {
    fn default() -> Self {
        Self {
            family: SecondOrderFamily::default(),
            draws: 25,
            gains: GainTriple::pid(3.0, 1.0, 0.05),
            step_horizon: 2.0,
            sine_horizon: 5.0,
            t_aw_range: (0.01, 10.0),
            t_aw_points: 13,
            u_max_levels: vec![0.25, 0.5, 1.0],
            deriv_filter_alpha: NONIDEAL_DERIV_ALPHA,
            t_aw: DEFAULT_KAW,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    pub seed: u64,
    /// Root output directory; each experiment writes into a subdirectory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    pub plant: PlantBlock,
    pub controller: ControllerBlock,
    pub sensor: SensorModel,
    pub task: TaskBlock,
    pub sweep: SweepBlock,
    pub stability: StabilityBlock,
    pub windup: WindupBlock,
    pub ensemble: EnsembleBlock,
    pub tuner: TunerBlock,
    pub benchmark: BenchmarkBlock,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment: ExperimentKind::default(),
            seed: 0,
            out_dir: None,
            plant: PlantBlock::default(),
            controller: ControllerBlock::default(),
            sensor: SensorModel::ideal(),
            task: TaskBlock::default(),
            sweep: SweepBlock::default(),
            stability: StabilityBlock::default(),
            windup: WindupBlock::default(),
            ensemble: EnsembleBlock::default(),
            tuner: TunerBlock::default(),
            benchmark: BenchmarkBlock::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.plant.params()?;
        self.controller.config(GainTriple::p(1.0)).validate()?;
        self.sensor.validate()?;
        if !(self.task.horizon.is_finite() && self.task.horizon > 0.0) {
            return Err(CliError::Config(format!("task.horizon must be > 0, got {}", self.task.horizon)));
        }
        if self.stability.resolution < 2 || self.stability.dt_points < 2 {
            return Err(CliError::Config("stability grids need at least 2 points per axis".into()));
        }
        if self.ensemble.draws == 0 || self.benchmark.draws == 0 {
            return Err(CliError::Config("ensemble sizes must be positive".into()));
        }
        pidcert::robustness::FamilySpec::FirstOrder(self.ensemble.family.clone()).validate()?;
        pidcert::robustness::FamilySpec::SecondOrder(self.benchmark.family.clone()).validate()?;
        self.tuner.bounds.validate()?;
        self.tuner.settings.validate()?;
        if self.tuner.seeds.is_empty() {
            return Err(CliError::Config("tuner.seeds is empty".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON of everything except the output path.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out_dir = None;
        let json = serde_json::to_vec(&c).expect("config serialises");
        hex::encode(Sha256::digest(&json))
    }

    pub fn output_root(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_json_is_the_baseline() {
        let c = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert_eq!((c.plant.tau, c.plant.gain, c.plant.dt), (1.0, 1.0, 0.01));
        assert_eq!((c.task.horizon, c.task.reference), (5.0, 1.0));
        assert_eq!((c.controller.u_min, c.controller.u_max), (-10.0, 10.0));
    }

    #[test]
    fn round_trip_and_hash() {
        let c = ExperimentConfig::default();
        let text = serde_json::to_string_pretty(&c).unwrap();
        let back = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
        assert_eq!(c.hash().len(), 64);
        let mut d = c.clone();
        d.seed = 9;
        assert_ne!(d.hash(), c.hash());
        let mut e = c.clone();
        e.out_dir = Some("elsewhere".into());
        assert_eq!(e.hash(), c.hash());
    }

    #[test]
    fn unknown_fields_and_bad_values_are_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"plant": {"tua": 1.0}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"plant": {"dt": -0.01}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"schema_version": 7}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"controller": {"u_min": 1, "u_max": 0}}"#).is_err());
    }
}

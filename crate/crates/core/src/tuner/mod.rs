//! Hybrid-certified safe Bayesian optimisation of PID gains.
//!
//! A candidate is certified when the PI pair passes the ZOH Jury test on the
//! nominal first-order model and a short step on the nominal second-order
//! actuator neither diverges, overshoots past a threshold, nor stays clamped
//! for the whole window. Only certified candidates ever reach the objective.

pub mod gp;

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::controller::GainTriple;
use crate::error::{check_non_negative, Error, Result};
use crate::metrics;
use crate::rng;
use crate::robustness::{
    evaluate_candidate, run_closed_loop, sample_ensemble, ControllerTemplate, EvalSettings, FamilySpec,
    FirstOrderFamily, ModelInstance, RobustScore, SecondOrderFamily, TaskSpec,
};
use crate::sim::{FirstOrderParams, SecondOrderParams};
use crate::stability::jury_zoh_pi;

pub use gp::{expected_improvement, gp_fit, GaussianProcess, SurrogateDataset};

/// Consecutive certification rejections tolerated while sampling.
pub const MAX_CONSECUTIVE_REJECTIONS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GainBounds {
    pub kp_range: (f64, f64),
    pub ki_range: (f64, f64),
    pub kd_range: (f64, f64),
}

impl Default for GainBounds {
    fn default() -> Self {
        Self {
            kp_range: (0.1, 20.0),
            ki_range: (0.0, 50.0),
            kd_range: (0.0, 2.0),
        }
    }
}

impl GainBounds {
    fn ranges(&self) -> [(f64, f64); 3] {
        [self.kp_range, self.ki_range, self.kd_range]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in ["kp_range", "ki_range", "kd_range"].into_iter().zip(self.ranges()) {
            check_non_negative(name, lo)?;
            if !(hi.is_finite() && hi >= lo) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("upper bound {hi} below lower bound {lo}"),
                });
            }
        }
        Ok(())
    }

    pub fn contains(&self, g: &GainTriple) -> bool {
        self.ranges()
            .iter()
            .zip(g.as_array())
            .all(|(&(lo, hi), v)| v >= lo && v <= hi)
    }

    pub fn to_unit(&self, g: &GainTriple) -> [f64; 3] {
        let mut out = [0.0; 3];
        for ((o, (lo, hi)), v) in out.iter_mut().zip(self.ranges()).zip(g.as_array()) {
            *o = if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
        }
        out
    }

    pub fn from_unit(&self, x: [f64; 3]) -> GainTriple {
        let mut out = [0.0; 3];
        for ((o, (lo, hi)), u) in out.iter_mut().zip(self.ranges()).zip(x) {
            *o = lo + u.clamp(0.0, 1.0) * (hi - lo);
        }
        GainTriple::from_array(out)
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> GainTriple {
        self.from_unit([rng.random(), rng.random(), rng.random()])
    }
}

/// ZOH Jury test of the PI pair on the nominal model; `kd` is not checked.
pub fn analytic_feasible(gains: &GainTriple, nominal: &FirstOrderParams) -> bool {
    jury_zoh_pi(gains.kp, gains.ki, nominal).stable
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScreenConfig {
    pub model: SecondOrderParams,
    pub delay_samples: usize,
    pub u_max: f64,
    pub horizon: f64,
    /// Overshoot (%) above which the screen fails.
    pub os_max: f64,
    pub controller: ControllerTemplate,
}

impl Default for ScreenConfig {
    fn default() -> Self {
        Self {
            model: SecondOrderParams::nominal(),
            delay_samples: 1,
            u_max: 2.0,
            horizon: 1.0,
            os_max: 30.0,
            controller: ControllerTemplate::nonideal(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertReason {
    JuryUnstable,
    Divergence,
    ExcessOvershoot,
    SaturatedEntireTransient,
}

impl fmt::Display for CertReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CertReason::JuryUnstable => "jury unstable",
            CertReason::Divergence => "divergence",
            CertReason::ExcessOvershoot => "excess overshoot",
            CertReason::SaturatedEntireTransient => "saturated entire transient",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreenMetrics {
    pub overshoot_pct: f64,
    pub sat_duty: f64,
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub analytic_pass: bool,
    pub behavioral_pass: bool,
    pub reasons: Vec<CertReason>,
    pub screen_metrics: Option<ScreenMetrics>,
}

impl CertificationReport {
    pub fn certified(&self) -> bool {
        self.analytic_pass && self.behavioral_pass
    }
}

/// Unit step on the screen model. Only the behavioural checks are filled in;
/// `analytic_pass` is left true.
pub fn behavioral_certify(gains: &GainTriple, screen: &ScreenConfig) -> CertificationReport {
    let model = ModelInstance::ideal_second_order(screen.model, screen.delay_samples, screen.u_max);
    let task = TaskSpec::step(screen.horizon);
    let cfg = screen.controller.config(*gains, screen.u_max);
    let mut reasons = Vec::new();
    let sm = match run_closed_loop(&model, &cfg, &task) {
        Ok(traj) => {
            let m = ScreenMetrics {
                overshoot_pct: metrics::percent_overshoot(&traj, 1.0).unwrap_or(f64::INFINITY),
                sat_duty: metrics::saturation_duty(&traj),
                diverged: traj.diverged,
            };
            if m.diverged {
                reasons.push(CertReason::Divergence);
            }
            if !(m.overshoot_pct <= screen.os_max) {
                reasons.push(CertReason::ExcessOvershoot);
            }
            if m.sat_duty >= 1.0 {
                reasons.push(CertReason::SaturatedEntireTransient);
            }
            Some(m)
        }
        Err(_) => {
            reasons.push(CertReason::Divergence);
            None
        }
    };
    CertificationReport {
        analytic_pass: true,
        behavioral_pass: reasons.is_empty(),
        reasons,
        screen_metrics: sm,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Certifier {
    pub nominal: FirstOrderParams,
    pub screen: ScreenConfig,
}

impl Certifier {
    pub fn certify(&self, gains: &GainTriple) -> CertificationReport {
        let analytic_pass = analytic_feasible(gains, &self.nominal);
        let mut report = behavioral_certify(gains, &self.screen);
        report.analytic_pass = analytic_pass;
        if !analytic_pass {
            report.reasons.insert(0, CertReason::JuryUnstable);
        }
        report
    }

    pub fn is_certified(&self, gains: &GainTriple) -> bool {
        analytic_feasible(gains, &self.nominal) && behavioral_certify(gains, &self.screen).behavioral_pass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub samples: usize,
    pub analytic_rejections: usize,
    pub behavioral_rejections: usize,
    pub rejected: usize,
    pub feasible_fraction: f64,
}

impl FeasibilityReport {
    pub fn rejection_rate(&self) -> f64 {
        self.rejected as f64 / self.samples as f64
    }
}

/// Certify `n` uniform draws from `bounds`.
pub fn feasible_fraction(bounds: &GainBounds, certifier: &Certifier, n: usize, seed: u64) -> Result<FeasibilityReport> {
    bounds.validate()?;
    if n == 0 {
        return Err(Error::Empty("samples"));
    }
    let reports: Vec<CertificationReport> = (0..n as u64)
        .into_par_iter()
        .map(|i| certifier.certify(&bounds.sample(&mut rng::stream(seed, i))))
        .collect();
    let analytic_rejections = reports.iter().filter(|r| !r.analytic_pass).count();
    let behavioral_rejections = reports.iter().filter(|r| !r.behavioral_pass).count();
    let rejected = reports.iter().filter(|r| !r.certified()).count();
    Ok(FeasibilityReport {
        samples: n,
        analytic_rejections,
        behavioral_rejections,
        rejected,
        feasible_fraction: 1.0 - rejected as f64 / n as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub j: f64,
    pub diverged_runs: usize,
}

pub trait Objective: Sync {
    fn evaluate(&self, gains: GainTriple) -> Result<Evaluation>;
}

impl<F> Objective for F
where
    F: Fn(GainTriple) -> Result<Evaluation> + Sync,
{
    fn evaluate(&self, gains: GainTriple) -> Result<Evaluation> {
        self(gains)
    }
}

/// Median penalised score over a fixed ensemble and task set.
#[derive(Debug, Clone)]
pub struct RobustObjective {
    pub ensemble: Vec<ModelInstance>,
    pub tasks: Vec<TaskSpec>,
    pub settings: EvalSettings,
}

impl RobustObjective {
    pub fn score(&self, gains: GainTriple) -> Result<RobustScore> {
        evaluate_candidate(gains, &self.ensemble, &self.tasks, &self.settings)
    }

    /// 25 first-order and 25 second-order draws; step, sine and
    /// disturbance-rejection tasks.
    pub fn expanded_benchmark(seed: u64) -> Self {
        let mut ensemble = sample_ensemble(&FamilySpec::FirstOrder(FirstOrderFamily::default()), 25, seed, 0);
        ensemble.extend(sample_ensemble(
            &FamilySpec::SecondOrder(SecondOrderFamily::default()),
            25,
            rng::mix(seed, 0x5ec0),
            25,
        ));
        Self {
            ensemble,
            tasks: vec![TaskSpec::step(2.0), TaskSpec::sine(5.0), TaskSpec::disturbance(2.0)],
            settings: EvalSettings::default(),
        }
    }
}

impl Objective for RobustObjective {
    fn evaluate(&self, gains: GainTriple) -> Result<Evaluation> {
        let s = self.score(gains)?;
        Ok(Evaluation {
            j: s.aggregate_j,
            diverged_runs: s.diverged_count(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TunerSettings {
    pub budget: usize,
    pub init: usize,
    pub pool_uniform: usize,
    pub pool_local: usize,
    /// Std of local perturbations as a fraction of each range.
    pub local_sigma: f64,
    pub noise_floor: f64,
}

impl Default for TunerSettings {
    fn default() -> Self {
        Self {
            budget: 60,
            init: 10,
            pool_uniform: 1024,
            pool_local: 256,
            local_sigma: 0.05,
            noise_floor: 1e-6,
        }
    }
}

impl TunerSettings {
    pub fn validate(&self) -> Result<()> {
        if self.init < 2 || self.budget <= self.init {
            return Err(Error::InvalidParameter {
                name: "budget",
                reason: format!("need budget > init >= 2, got budget {} init {}", self.budget, self.init),
            });
        }
        if self.pool_uniform + self.pool_local == 0 {
            return Err(Error::Empty("candidate pool"));
        }
        check_non_negative("local_sigma", self.local_sigma)?;
        check_non_negative("noise_floor", self.noise_floor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Init,
    Acquisition,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub phase: Phase,
    pub gains: GainTriple,
    pub j: f64,
    pub best_j: f64,
    pub analytic_pass: bool,
    pub behavioral_pass: bool,
    pub certified: bool,
    /// Evaluation of an uncertified candidate.
    pub unsafe_eval: bool,
    pub diverged_runs: usize,
    /// Certification screens run since the previous evaluation.
    pub screens: usize,
    /// Of those, how many were rejected.
    pub rejections: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningRun {
    pub method: String,
    pub seed: u64,
    pub best_gains: GainTriple,
    pub best_j: f64,
    pub history: Vec<HistoryEntry>,
}

impl TuningRun {
    pub fn evaluations(&self) -> usize {
        self.history.len()
    }

    pub fn unsafe_evaluations(&self) -> usize {
        self.history.iter().filter(|h| h.unsafe_eval).count()
    }

    pub fn total_screens(&self) -> usize {
        self.history.iter().map(|h| h.screens).sum()
    }

    pub fn total_rejections(&self) -> usize {
        self.history.iter().map(|h| h.rejections).sum()
    }

    pub fn best_so_far(&self) -> Vec<f64> {
        self.history.iter().map(|h| h.best_j).collect()
    }
}

struct Recorder {
    history: Vec<HistoryEntry>,
    best: Option<(GainTriple, f64)>,
}

impl Recorder {
    fn new() -> Self {
        Self {
            history: Vec::new(),
            best: None,
        }
    }

    fn push(&mut self, phase: Phase, gains: GainTriple, eval: Evaluation, report: &CertificationReport, screens: usize, rejections: usize) {
        if self.best.is_none_or(|(_, b)| eval.j < b) {
            self.best = Some((gains, eval.j));
        }
        let certified = report.certified();
        self.history.push(HistoryEntry {
            iteration: self.history.len(),
            phase,
            gains,
            j: eval.j,
            best_j: self.best.map(|b| b.1).unwrap_or(eval.j),
            analytic_pass: report.analytic_pass,
            behavioral_pass: report.behavioral_pass,
            certified,
            unsafe_eval: !certified,
            diverged_runs: eval.diverged_runs,
            screens,
            rejections,
        });
    }

    fn finish(self, method: &str, seed: u64) -> Result<TuningRun> {
        let (best_gains, best_j) = self.best.ok_or(Error::Empty("history"))?;
        Ok(TuningRun {
            method: method.to_string(),
            seed,
            best_gains,
            best_j,
            history: self.history,
        })
    }
}

/// The surrogate models `ln J`; the penalty terms make `J` heavy-tailed.
fn surrogate_target(j: f64) -> f64 {
    j.max(1e-12).ln()
}

/// HC-SBO: certified rejection-sampled initial design, then one max-EI
/// certified candidate per iteration until `budget` evaluations are spent.
pub fn hcsbo_run(
    bounds: &GainBounds,
    settings: &TunerSettings,
    objective: &dyn Objective,
    certifier: &Certifier,
    seed: u64,
) -> Result<TuningRun> {
    bounds.validate()?;
    settings.validate()?;
    let mut rng = rng::stream(seed, 0);

    let mut init = Vec::with_capacity(settings.init);
    for _ in 0..settings.init {
        let mut screens = 0;
        loop {
            let g = bounds.sample(&mut rng);
            screens += 1;
            let report = certifier.certify(&g);
            if report.certified() {
                init.push((g, report, screens));
                break;
            }
            if screens >= MAX_CONSECUTIVE_REJECTIONS {
                return Err(Error::InfeasibleDomain { attempts: screens });
            }
        }
    }
    let init_evals = init
        .par_iter()
        .map(|(g, _, _)| objective.evaluate(*g))
        .collect::<Result<Vec<_>>>()?;

    let mut rec = Recorder::new();
    let mut data = SurrogateDataset::new(settings.noise_floor);
    for ((g, report, screens), eval) in init.into_iter().zip(init_evals) {
        data.push(bounds.to_unit(&g), surrogate_target(eval.j));
        rec.push(Phase::Init, g, eval, &report, screens, screens - 1);
    }

    let sigma = Normal::new(0.0, settings.local_sigma.max(1e-12)).expect("finite sigma");
    while rec.history.len() < settings.budget {
        let surrogate = gp_fit(&data)?;
        let (incumbent, best_j) = rec.best.expect("initial design evaluated");
        let centre = bounds.to_unit(&incumbent);

        let mut screens = 0;
        let mut rejections = 0;
        let chosen = loop {
            let mut pool: Vec<[f64; 3]> = (0..settings.pool_uniform)
                .map(|_| [rng.random(), rng.random(), rng.random()])
                .collect();
            pool.extend((0..settings.pool_local).map(|_| {
                let mut x = centre;
                for v in &mut x {
                    *v = (*v + sigma.sample(&mut rng)).clamp(0.0, 1.0);
                }
                x
            }));
            let scored: Vec<Option<(f64, CertificationReport)>> = pool
                .par_iter()
                .map(|x| {
                    let report = certifier.certify(&bounds.from_unit(*x));
                    report.certified().then(|| {
                        let (mu, sd) = surrogate.predict(x);
                        (expected_improvement(mu, sd, surrogate_target(best_j)), report)
                    })
                })
                .collect();
            screens += pool.len();
            let mut best: Option<(usize, f64)> = None;
            for (i, s) in scored.iter().enumerate() {
                match s {
                    None => rejections += 1,
                    Some((ei, _)) if best.is_none_or(|(_, b)| *ei > b) => best = Some((i, *ei)),
                    Some(_) => {}
                }
            }
            if let Some((i, _)) = best {
                let report = scored[i].clone().expect("chosen candidate certified").1;
                break (pool[i], report);
            }
            if rejections >= MAX_CONSECUTIVE_REJECTIONS {
                return Err(Error::InfeasibleDomain { attempts: rejections });
            }
        };

        let (x, report) = chosen;
        let g = bounds.from_unit(x);
        let eval = objective.evaluate(g)?;
        data.push(x, surrogate_target(eval.j));
        rec.push(Phase::Acquisition, g, eval, &report, screens, rejections);
    }
    rec.finish("hcsbo", seed)
}

/// Uniform sampling with no certification. Each evaluated point is certified
/// after the fact only to label unsafe evaluations.
pub fn random_search_baseline(
    bounds: &GainBounds,
    budget: usize,
    objective: &dyn Objective,
    certifier: &Certifier,
    seed: u64,
) -> Result<TuningRun> {
    bounds.validate()?;
    if budget == 0 {
        return Err(Error::Empty("budget"));
    }
    let mut rng = rng::stream(seed, 1);
    let mut rec = Recorder::new();
    for _ in 0..budget {
        let g = bounds.sample(&mut rng);
        let eval = objective.evaluate(g)?;
        let report = certifier.certify(&g);
        rec.push(Phase::Random, g, eval, &report, 0, 0);
    }
    rec.finish("random_search", seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(g: GainTriple) -> Result<Evaluation> {
        Ok(Evaluation {
            j: (g.kp - 8.0).powi(2) / 100.0 + (g.ki - 12.0).powi(2) / 400.0 + (g.kd - 0.4).powi(2),
            diverged_runs: 0,
        })
    }

    #[test]
    fn unit_round_trip() {
        let b = GainBounds::default();
        let g = GainTriple::pid(10.0, 25.0, 0.8);
        let back = b.from_unit(b.to_unit(&g));
        assert!((back.kp - 10.0).abs() < 1e-12 && (back.ki - 25.0).abs() < 1e-12 && (back.kd - 0.8).abs() < 1e-12);
        assert!(b.contains(&g));
    }

    #[test]
    fn bad_bounds_rejected() {
        let b = GainBounds {
            kp_range: (2.0, 1.0),
            ..GainBounds::default()
        };
        assert!(b.validate().is_err());
        let b = GainBounds {
            ki_range: (-1.0, 1.0),
            ..GainBounds::default()
        };
        assert!(b.validate().is_err());
    }

    #[test]
    fn analytic_examples() {
        let p = FirstOrderParams::nominal();
        assert!(analytic_feasible(&GainTriple::pid(3.0, 1.0, 0.05), &p));
        assert!(analytic_feasible(&GainTriple::pid(3.0, 1.0, 1.9), &p));
        assert!(!analytic_feasible(&GainTriple::pid(3.0, 0.0, 0.0), &p));
        let edge = crate::stability::zoh_ki_upper_bound(3.0, &p);
        assert!(!analytic_feasible(&GainTriple::pi(3.0, edge * 1.01), &p));
    }

    #[test]
    fn screen_examples() {
        let screen = ScreenConfig::default();
        let r = behavioral_certify(&GainTriple::pid(3.0, 1.0, 0.05), &screen);
        assert!(r.behavioral_pass, "{r:?}");

        let mut tripped = false;
        let mut kp = 20.0;
        while kp < 1e5 {
            let r = behavioral_certify(&GainTriple::pid(kp, 0.0, 0.0), &ScreenConfig { u_max: 1e9, ..screen });
            if r.reasons.contains(&CertReason::Divergence) {
                tripped = true;
                break;
            }
            kp *= 2.0;
        }
        assert!(tripped);

        // A unit clamp on a unit-gain plant cannot lift the output past
        // the deadzone offset, so a big controller stays pinned.
        let pinned = behavioral_certify(&GainTriple::pid(50.0, 0.0, 0.0), &ScreenConfig { u_max: 0.5, ..screen });
        assert!(pinned.reasons.contains(&CertReason::SaturatedEntireTransient), "{pinned:?}");
    }

    #[test]
    fn screen_is_deterministic() {
        let c = Certifier::default();
        let g = GainTriple::pid(12.0, 30.0, 0.7);
        assert_eq!(c.certify(&g), c.certify(&g));
    }

    #[test]
    fn certified_iff_both_pass() {
        let c = Certifier::default();
        let mut r = rng::stream(3, 0);
        for _ in 0..200 {
            let rep = c.certify(&GainBounds::default().sample(&mut r));
            assert_eq!(rep.certified(), rep.analytic_pass && rep.behavioral_pass);
            assert_eq!(rep.certified(), rep.reasons.is_empty());
        }
    }

    #[test]
    fn hcsbo_invariants_on_a_toy_objective() {
        let settings = TunerSettings {
            budget: 18,
            init: 5,
            pool_uniform: 256,
            pool_local: 64,
            ..TunerSettings::default()
        };
        let c = Certifier::default();
        let run = hcsbo_run(&GainBounds::default(), &settings, &quadratic, &c, 7).unwrap();
        assert_eq!(run.evaluations(), 18);
        assert_eq!(run.unsafe_evaluations(), 0);
        for h in &run.history {
            assert!(c.is_certified(&h.gains));
        }
        for w in run.best_so_far().windows(2) {
            assert!(w[1] <= w[0]);
        }
        let again = hcsbo_run(&GainBounds::default(), &settings, &quadratic, &c, 7).unwrap();
        assert_eq!(run, again);
    }

    #[test]
    fn infeasible_box_errors() {
        // ki = 0 everywhere fails the strict Jury test.
        let b = GainBounds {
            ki_range: (0.0, 0.0),
            ..GainBounds::default()
        };
        let settings = TunerSettings {
            budget: 4,
            init: 2,
            ..TunerSettings::default()
        };
        let err = hcsbo_run(&b, &settings, &quadratic, &Certifier::default(), 1).unwrap_err();
        assert!(matches!(err, Error::InfeasibleDomain { .. }));
    }

    #[test]
    fn random_search_is_reproducible() {
        let c = Certifier::default();
        let a = random_search_baseline(&GainBounds::default(), 30, &quadratic, &c, 5).unwrap();
        let b = random_search_baseline(&GainBounds::default(), 30, &quadratic, &c, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.evaluations(), 30);
        for w in a.best_so_far().windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn budget_checks() {
        let s = TunerSettings {
            budget: 5,
            init: 5,
            ..TunerSettings::default()
        };
        assert!(s.validate().is_err());
        let s = TunerSettings {
            budget: 5,
            init: 1,
            ..TunerSettings::default()
        };
        assert!(s.validate().is_err());
    }
}

//! One function per experiment. Each writes its directory and returns the
//! summary it wrote to `summary.json`.

use pidcert::controller::{ControllerConfig, GainTriple};
use pidcert::metrics::{StepMetrics, Trajectory};
use pidcert::robustness::{
    evaluate_candidate, sample_ensemble, simulate, task_metrics, ControllerTemplate, EvalSettings, FamilySpec,
    ModelInstance, RobustScore, TaskKind, TaskSpec,
};
use pidcert::sim::Discretization;
use pidcert::stability::{
    ki_upper_bound, linspace, region_grid, robust_point_screen, zoh_ki_upper_bound, PlantUncertainty,
};
use pidcert::tuner::{
    feasible_fraction, hcsbo_run, random_search_baseline, Certifier, FeasibilityReport, RobustObjective, TuningRun,
};
use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::CliResult;
use crate::output::ExperimentDir;

fn open_dir(cfg: &ExperimentConfig, kind: ExperimentKind) -> CliResult<ExperimentDir> {
    ExperimentDir::create(cfg.output_root().join(kind.dir_name()))
}

pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linspace(lo.log10(), hi.log10(), n).into_iter().map(|e| 10f64.powf(e)).collect()
}

fn step_task(horizon: f64, amplitude: f64) -> TaskSpec {
    TaskSpec {
        kind: TaskKind::Step { amplitude },
        horizon,
    }
}

/// Baseline first-order plant from the config with the controller's own clamp.
pub fn baseline_run(cfg: &ExperimentConfig, gains: GainTriple) -> CliResult<Trajectory> {
    let u_max = cfg.controller.u_max.abs().max(cfg.controller.u_min.abs());
    let mut model = ModelInstance::ideal_first_order(cfg.plant.params()?, cfg.plant.discretization, u_max);
    model.sensor = cfg.sensor;
    let task = step_task(cfg.task.horizon, cfg.task.reference);
    Ok(simulate(&model, &cfg.controller.config(gains), &task)?)
}

// ---------------------------------------------------------------- sweep

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub sweep: String,
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub overshoot_pct: f64,
    pub rise_time: Option<f64>,
    pub settle_time: Option<f64>,
    pub ss_error: f64,
    pub iae: f64,
    pub sat_duty: f64,
    pub u_rms: f64,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub config_hash: String,
    pub rows: Vec<SweepRow>,
}

impl SweepSummary {
    pub fn rows_for<'a>(&'a self, sweep: &'a str) -> impl Iterator<Item = &'a SweepRow> + 'a {
        self.rows.iter().filter(move |r| r.sweep == sweep)
    }
}

pub fn cmd_sweep(cfg: &ExperimentConfig) -> CliResult<SweepSummary> {
    cfg.validate()?;
    let dir = open_dir(cfg, ExperimentKind::Sweep)?;
    let hash = cfg.hash();
    let s = &cfg.sweep;
    let mut runs: Vec<(&str, GainTriple)> = Vec::new();
    runs.extend(s.p_kp.iter().map(|&kp| ("p", GainTriple::p(kp))));
    runs.extend(s.pi_ki.iter().map(|&ki| ("pi", GainTriple::pi(s.pi_kp, ki))));
    runs.extend(s.pid_kd.iter().map(|&kd| ("pid", GainTriple::pid(s.pid_kp, s.pid_ki, kd))));

    let mut rows = Vec::with_capacity(runs.len());
    for (sweep, g) in runs {
        let traj = baseline_run(cfg, g)?;
        let m = StepMetrics::compute(&traj, cfg.task.reference);
        dir.write_trajectory(&format!("{sweep}_kp{}_ki{}_kd{}", g.kp, g.ki, g.kd), &traj)?;
        rows.push(SweepRow {
            sweep: sweep.to_string(),
            kp: g.kp,
            ki: g.ki,
            kd: g.kd,
            overshoot_pct: m.overshoot_pct,
            rise_time: m.rise_time,
            settle_time: m.settle_time,
            ss_error: m.ss_error,
            iae: m.iae,
            sat_duty: m.sat_duty,
            u_rms: m.u_rms,
            config_hash: hash.clone(),
        });
    }
    dir.write_csv("metrics.csv", &rows)?;
    for sweep in ["p", "pi", "pid"] {
        let part: Vec<&SweepRow> = rows.iter().filter(|r| r.sweep == sweep).collect();
        dir.write_csv(&format!("metrics_{sweep}.csv"), &part)?;
    }
    let summary = SweepSummary { config_hash: hash, rows };
    dir.write_json("summary.json", &summary)?;
    Ok(summary)
}

// ---------------------------------------------------------------- stability

#[derive(Debug, Clone, PartialEq, Serialize)]
struct RegionRow<'a> {
    kp: f64,
    ki: f64,
    stable: bool,
    config_hash: &'a str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GuardrailRow {
    pub dt: f64,
    pub ki_upper_euler: f64,
    pub ki_upper_zoh: f64,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityMetricsRow {
    pub discretization: String,
    pub nodes: usize,
    pub stable_nodes: usize,
    pub stable_fraction: f64,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilitySummary {
    pub config_hash: String,
    pub resolution: usize,
    pub grids: Vec<StabilityMetricsRow>,
    /// Nodes where the Euler and ZOH verdicts disagree.
    pub differing_nodes: usize,
    pub guardrail_kp: f64,
    pub ki_upper_euler_at_dt: f64,
    pub ki_upper_zoh_at_dt: f64,
    pub guardrail: Vec<GuardrailRow>,
}

pub fn cmd_stability(cfg: &ExperimentConfig) -> CliResult<StabilitySummary> {
    cfg.validate()?;
    let dir = open_dir(cfg, ExperimentKind::Stability)?;
    let hash = cfg.hash();
    let st = &cfg.stability;
    let p = cfg.plant.params()?;

    let euler = region_grid(st.kp_range, st.ki_range, st.resolution, Discretization::Euler, &p);
    let zoh = region_grid(st.kp_range, st.ki_range, st.resolution, Discretization::Zoh, &p);
    let mut grids = Vec::new();
    for (name, grid) in [("euler", &euler), ("zoh", &zoh)] {
        let rows: Vec<RegionRow> = grid
            .nodes()
            .map(|(kp, ki, stable)| RegionRow {
                kp,
                ki,
                stable,
                config_hash: &hash,
            })
            .collect();
        dir.write_csv(&format!("region_{name}.csv"), &rows)?;
        let nodes = rows.len();
        grids.push(StabilityMetricsRow {
            discretization: name.to_string(),
            nodes,
            stable_nodes: grid.stable_count(),
            stable_fraction: grid.stable_count() as f64 / nodes as f64,
            config_hash: hash.clone(),
        });
    }
    dir.write_csv("metrics.csv", &grids)?;
    let differing_nodes = euler
        .nodes()
        .zip(zoh.nodes())
        .filter(|(a, b)| a.2 != b.2)
        .count();

    let guardrail: Vec<GuardrailRow> = logspace(st.dt_range.0, st.dt_range.1, st.dt_points)
        .into_iter()
        .map(|dt| {
            let q = p.with_dt(dt);
            GuardrailRow {
                dt,
                ki_upper_euler: ki_upper_bound(st.guardrail_kp, &q),
                ki_upper_zoh: zoh_ki_upper_bound(st.guardrail_kp, &q),
                config_hash: hash.clone(),
            }
        })
        .collect();
    dir.write_csv("guardrail.csv", &guardrail)?;

    if st.robust_resolution > 0 {
        #[derive(Serialize)]
        struct CloudRow<'a> {
            kp: f64,
            ki: f64,
            stable_fraction: f64,
            config_hash: &'a str,
        }
        let unc = PlantUncertainty {
            dt: p.dt,
            ..PlantUncertainty::default()
        };
        let ki_axis = linspace(st.robust_ki_range.0, st.robust_ki_range.1, st.robust_resolution);
        let mut rows = Vec::new();
        for kp in linspace(st.robust_kp_range.0, st.robust_kp_range.1, st.robust_resolution) {
            for &ki in &ki_axis {
                rows.push(CloudRow {
                    kp,
                    ki,
                    stable_fraction: robust_point_screen(kp, ki, &unc, st.robust_draws, cfg.seed),
                    config_hash: &hash,
                });
            }
        }
        dir.write_csv("robust_cloud.csv", &rows)?;
    }

    let summary = StabilitySummary {
        config_hash: hash,
        resolution: st.resolution,
        grids,
        differing_nodes,
        guardrail_kp: st.guardrail_kp,
        ki_upper_euler_at_dt: ki_upper_bound(st.guardrail_kp, &p),
        ki_upper_zoh_at_dt: zoh_ki_upper_bound(st.guardrail_kp, &p),
        guardrail,
    };
    dir.write_json("summary.json", &summary)?;
    Ok(summary)
}

// ---------------------------------------------------------------- windup

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindupRow {
    pub scenario: String,
    pub antiwindup: bool,
    pub u_max: f64,
    pub overshoot_pct: f64,
    pub rise_time: Option<f64>,
    pub settle_time: Option<f64>,
    pub ss_error: f64,
    pub iae: f64,
    pub sat_duty: f64,
    pub u_rms: f64,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindupSummary {
    pub config_hash: String,
    pub rows: Vec<WindupRow>,
    /// Loose-clamp runs with and without anti-windup are sample-identical.
    pub loose_runs_identical: bool,
}

impl WindupSummary {
    pub fn row(&self, scenario: &str, antiwindup: bool) -> Option<&WindupRow> {
        self.rows
            .iter()
            .find(|r| r.scenario == scenario && r.antiwindup == antiwindup)
    }
}

pub fn cmd_windup(cfg: &ExperimentConfig) -> CliResult<WindupSummary> {
    cfg.validate()?;
    let dir = open_dir(cfg, ExperimentKind::Windup)?;
    let hash = cfg.hash();
    let w = &cfg.windup;
    let task = TaskSpec::step(w.horizon);

    let mut rows = Vec::new();
    let mut loose = Vec::new();
    for (scenario, u_max) in [("tight", w.u_max), ("loose", w.loose_u_max)] {
        let model = ModelInstance::ideal_second_order(w.model, w.delay_samples, u_max);
        for antiwindup in [false, true] {
            let template = ControllerTemplate {
                antiwindup_kaw: antiwindup.then_some(w.t_aw),
                deriv_filter_alpha: w.deriv_filter_alpha,
                deriv_on: true,
            };
            let ctrl: ControllerConfig = template.config(w.gains, u_max);
            let traj = simulate(&model, &ctrl, &task)?;
            let m = task_metrics(&traj, &task);
            let tag = if antiwindup { "aw_on" } else { "aw_off" };
            dir.write_trajectory(&format!("{scenario}_{tag}"), &traj)?;
            if scenario == "loose" {
                loose.push(traj);
            }
            rows.push(WindupRow {
                scenario: scenario.to_string(),
                antiwindup,
                u_max,
                overshoot_pct: m.overshoot_pct,
                rise_time: m.rise_time,
                settle_time: m.settle_time,
                ss_error: m.ss_error,
                iae: m.iae,
                sat_duty: m.sat_duty,
                u_rms: m.u_rms,
                config_hash: hash.clone(),
            });
        }
    }
    dir.write_csv("metrics.csv", &rows)?;
    let summary = WindupSummary {
        config_hash: hash,
        rows,
        loose_runs_identical: loose[0] == loose[1],
    };
    dir.write_json("summary.json", &summary)?;
    Ok(summary)
}

// ---------------------------------------------------------------- montecarlo

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    pub controller: String,
    pub model_id: usize,
    pub iae: f64,
    pub overshoot_pct: f64,
    pub sat_duty: f64,
    pub u_rms: f64,
    pub j: f64,
    pub diverged: bool,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloRow {
    pub controller: String,
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub median_iae: f64,
    pub median_overshoot_pct: f64,
    pub median_sat_duty: f64,
    pub median_j: f64,
    pub diverged: usize,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloSummary {
    pub config_hash: String,
    pub draws: usize,
    pub horizon: f64,
    pub median_convention: String,
    pub controllers: Vec<MonteCarloRow>,
}

impl MonteCarloSummary {
    pub fn controller(&self, name: &str) -> Option<&MonteCarloRow> {
        self.controllers.iter().find(|c| c.controller == name)
    }
}

fn summary_row(name: &str, s: &RobustScore, hash: &str) -> MonteCarloRow {
    MonteCarloRow {
        controller: name.to_string(),
        kp: s.gains.kp,
        ki: s.gains.ki,
        kd: s.gains.kd,
        median_iae: s.median_of(|m| m.metrics.iae),
        median_overshoot_pct: s.median_of(|m| m.metrics.overshoot_pct),
        median_sat_duty: s.median_of(|m| m.metrics.sat_duty),
        median_j: s.aggregate_j,
        diverged: s.diverged_count(),
        config_hash: hash.to_string(),
    }
}

pub fn cmd_montecarlo(cfg: &ExperimentConfig) -> CliResult<MonteCarloSummary> {
    cfg.validate()?;
    let dir = open_dir(cfg, ExperimentKind::Montecarlo)?;
    let hash = cfg.hash();
    let e = &cfg.ensemble;
    let ensemble = sample_ensemble(&FamilySpec::FirstOrder(e.family.clone()), e.draws, cfg.seed, 0);
    let tasks = [TaskSpec::step(e.horizon)];
    let settings = EvalSettings {
        controller: e.controller,
        weights: e.weights,
    };

    let mut trials = Vec::new();
    let mut controllers = Vec::new();
    let mut median_convention = String::new();
    for (name, gains) in [("manual", e.manual), ("robust", e.robust)] {
        let score = evaluate_candidate(gains, &ensemble, &tasks, &settings)?;
        trials.extend(score.per_model.iter().map(|m| TrialRow {
            controller: name.to_string(),
            model_id: m.model_id,
            iae: m.metrics.iae,
            overshoot_pct: m.metrics.overshoot_pct,
            sat_duty: m.metrics.sat_duty,
            u_rms: m.metrics.u_rms,
            j: m.j,
            diverged: m.diverged,
            config_hash: hash.clone(),
        }));
        controllers.push(summary_row(name, &score, &hash));
        median_convention = score.median_convention.clone();
        let traj = pidcert::robustness::run_closed_loop(&ensemble[0], &e.controller.config(gains, 1.0), &tasks[0])?;
        dir.write_trajectory(&format!("{name}_model0"), &traj)?;
    }
    dir.write_csv("metrics.csv", &controllers)?;
    dir.write_csv("trials.csv", &trials)?;
    let summary = MonteCarloSummary {
        config_hash: hash,
        draws: e.draws,
        horizon: e.horizon,
        median_convention,
        controllers,
    };
    dir.write_json("summary.json", &summary)?;
    Ok(summary)
}

// ---------------------------------------------------------------- tune

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub method: String,
    pub seed: u64,
    pub evaluation: usize,
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub j: f64,
    pub best_j: f64,
    pub certified: bool,
    pub unsafe_cumulative: usize,
    pub unsafe_rate: f64,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedResult {
    pub seed: u64,
    pub hcsbo_best_j: f64,
    pub hcsbo_best_gains: GainTriple,
    pub hcsbo_unsafe: usize,
    pub hcsbo_evaluations: usize,
    pub hcsbo_screens: usize,
    pub hcsbo_rejections: usize,
    pub random_best_j: f64,
    pub random_best_gains: GainTriple,
    pub random_unsafe: usize,
    pub random_evaluations: usize,
    pub hcsbo_not_worse: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuneSummary {
    pub config_hash: String,
    pub budget: usize,
    pub seeds: Vec<SeedResult>,
    pub feasibility: FeasibilityReport,
    pub hcsbo_wins: usize,
    #[serde(skip)]
    pub runs: Vec<(TuningRun, TuningRun)>,
}

fn curve(run: &TuningRun, hash: &str) -> Vec<CurveRow> {
    let mut unsafe_cumulative = 0;
    run.history
        .iter()
        .map(|h| {
            unsafe_cumulative += h.unsafe_eval as usize;
            CurveRow {
                method: run.method.clone(),
                seed: run.seed,
                evaluation: h.iteration + 1,
                kp: h.gains.kp,
                ki: h.gains.ki,
                kd: h.gains.kd,
                j: h.j,
                best_j: h.best_j,
                certified: h.certified,
                unsafe_cumulative,
                unsafe_rate: unsafe_cumulative as f64 / (h.iteration + 1) as f64,
                config_hash: hash.to_string(),
            }
        })
        .collect()
}

pub fn cmd_tune(cfg: &ExperimentConfig) -> CliResult<TuneSummary> {
    cfg.validate()?;
    let dir = open_dir(cfg, ExperimentKind::Tune)?;
    let hash = cfg.hash();
    let t = &cfg.tuner;
    let certifier = Certifier {
        nominal: t.nominal,
        screen: t.screen,
    };
    let objective = RobustObjective::expanded_benchmark(cfg.seed);

    let mut rows = Vec::new();
    let mut seeds = Vec::new();
    let mut runs = Vec::new();
    for &seed in &t.seeds {
        let h = hcsbo_run(&t.bounds, &t.settings, &objective, &certifier, seed)?;
        let r = random_search_baseline(&t.bounds, t.settings.budget, &objective, &certifier, seed)?;
        dir.write_jsonl(&format!("history/hcsbo_seed{seed}.jsonl"), &h.history)?;
        dir.write_jsonl(&format!("history/random_seed{seed}.jsonl"), &r.history)?;
        rows.extend(curve(&h, &hash));
        rows.extend(curve(&r, &hash));
        let screen_model = ModelInstance::ideal_second_order(t.screen.model, t.screen.delay_samples, t.screen.u_max);
        let traj = simulate(
            &screen_model,
            &t.screen.controller.config(h.best_gains, t.screen.u_max),
            &TaskSpec::step(2.0),
        )?;
        dir.write_trajectory(&format!("hcsbo_best_seed{seed}"), &traj)?;
        seeds.push(SeedResult {
            seed,
            hcsbo_best_j: h.best_j,
            hcsbo_best_gains: h.best_gains,
            hcsbo_unsafe: h.unsafe_evaluations(),
            hcsbo_evaluations: h.evaluations(),
            hcsbo_screens: h.total_screens(),
            hcsbo_rejections: h.total_rejections(),
            random_best_j: r.best_j,
            random_best_gains: r.best_gains,
            random_unsafe: r.unsafe_evaluations(),
            random_evaluations: r.evaluations(),
            hcsbo_not_worse: h.best_j <= r.best_j,
        });
        runs.push((h, r));
    }
    dir.write_csv("metrics.csv", &rows)?;
    let feasibility = feasible_fraction(&t.bounds, &certifier, t.feasibility_samples, cfg.seed)?;
    let summary = TuneSummary {
        config_hash: hash,
        budget: t.settings.budget,
        hcsbo_wins: seeds.iter().filter(|s| s.hcsbo_not_worse).count(),
        seeds,
        feasibility,
        runs,
    };
    dir.write_json("summary.json", &summary)?;
    Ok(summary)
}

// ---------------------------------------------------------------- benchmark

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkRow {
    pub task: String,
    pub antiwindup: bool,
    pub median_iae: f64,
    pub median_overshoot_pct: f64,
    pub median_sat_duty: f64,
    pub median_j: f64,
    pub diverged: usize,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TawRow {
    pub t_aw: f64,
    pub u_max: f64,
    pub iae: f64,
    pub sat_duty: f64,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkSummary {
    pub config_hash: String,
    pub dt: f64,
    pub rows: Vec<BenchmarkRow>,
    pub taw_sweep: Vec<TawRow>,
}

pub fn cmd_benchmark(cfg: &ExperimentConfig) -> CliResult<BenchmarkSummary> {
    cfg.validate()?;
    let dir = open_dir(cfg, ExperimentKind::Benchmark)?;
    let hash = cfg.hash();
    let b = &cfg.benchmark;
    let ensemble = sample_ensemble(&FamilySpec::SecondOrder(b.family.clone()), b.draws, cfg.seed, 0);
    let template = |kaw: Option<f64>| ControllerTemplate {
        antiwindup_kaw: kaw,
        deriv_filter_alpha: b.deriv_filter_alpha,
        deriv_on: true,
    };

    let mut rows = Vec::new();
    for task in [TaskSpec::step(b.step_horizon), TaskSpec::sine(b.sine_horizon)] {
        for antiwindup in [false, true] {
            let controller = template(antiwindup.then_some(b.t_aw));
            let settings = EvalSettings {
                controller,
                ..EvalSettings::default()
            };
            let s = evaluate_candidate(b.gains, &ensemble, std::slice::from_ref(&task), &settings)?;
            let tag = if antiwindup { "aw_on" } else { "aw_off" };
            let traj = pidcert::robustness::run_closed_loop(&ensemble[0], &controller.config(b.gains, 1.0), &task)?;
            dir.write_trajectory(&format!("{}_{tag}_model0", task.name()), &traj)?;
            rows.push(BenchmarkRow {
                task: task.name().to_string(),
                antiwindup,
                median_iae: s.median_of(|m| m.metrics.iae),
                median_overshoot_pct: s.median_of(|m| m.metrics.overshoot_pct),
                median_sat_duty: s.median_of(|m| m.metrics.sat_duty),
                median_j: s.aggregate_j,
                diverged: s.diverged_count(),
                config_hash: hash.clone(),
            });
        }
    }
    dir.write_csv("metrics.csv", &rows)?;

    let step = [TaskSpec::step(b.step_horizon)];
    let mut taw_sweep = Vec::new();
    for &u_max in &b.u_max_levels {
        let clamped: Vec<ModelInstance> = ensemble
            .iter()
            .map(|m| ModelInstance { u_max, ..m.clone() })
            .collect();
        for t_aw in logspace(b.t_aw_range.0, b.t_aw_range.1, b.t_aw_points) {
            let settings = EvalSettings {
                controller: template(Some(t_aw)),
                ..EvalSettings::default()
            };
            let s = evaluate_candidate(b.gains, &clamped, &step, &settings)?;
            taw_sweep.push(TawRow {
                t_aw,
                u_max,
                iae: s.median_of(|m| m.metrics.iae),
                sat_duty: s.median_of(|m| m.metrics.sat_duty),
                config_hash: hash.clone(),
            });
        }
    }
    dir.write_csv("taw_sweep.csv", &taw_sweep)?;
    let summary = BenchmarkSummary {
        config_hash: hash,
        dt: b.family.dt,
        rows,
        taw_sweep,
    };
    dir.write_json("summary.json", &summary)?;
    Ok(summary)
}

pub fn run(cfg: &ExperimentConfig) -> CliResult<serde_json::Value> {
    Ok(match cfg.experiment {
        ExperimentKind::Sweep => serde_json::to_value(cmd_sweep(cfg)?)?,
        ExperimentKind::Stability => serde_json::to_value(cmd_stability(cfg)?)?,
        ExperimentKind::Windup => serde_json::to_value(cmd_windup(cfg)?)?,
        ExperimentKind::Montecarlo => serde_json::to_value(cmd_montecarlo(cfg)?)?,
        ExperimentKind::Tune => serde_json::to_value(cmd_tune(cfg)?)?,
        ExperimentKind::Benchmark => serde_json::to_value(cmd_benchmark(cfg)?)?,
    })
}

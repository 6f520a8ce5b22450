//! Closed-form discrete-time stability certificates.
//!
//! For the PI loop the closed-loop state is `x = [y, I]` with `r = 0`, giving a
//! 2x2 matrix whose characteristic polynomial `z^2 + a1 z + a0` is Schur
//! stable iff
//!
//! ```text
//! 1 + a1 + a0 > 0,   1 - a1 + a0 > 0,   1 - a0 > 0.
//! ```
//!
//! Boundary cases (any margin exactly zero) are classified unstable.

use nalgebra::{DMatrix, Matrix2, Schur};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng;
use crate::sim::{zoh_coeffs, Discretization, FirstOrderParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JuryVerdict {
    pub stable: bool,
    /// Left-hand sides of the three Jury inequalities (each > 0 when met).
    pub margins: [f64; 3],
    pub spectral_radius: f64,
}

impl JuryVerdict {
    fn from_margins(margins: [f64; 3], spectral_radius: f64) -> Self {
        Self {
            stable: margins.iter().all(|&m| m > 0.0),
            margins,
            spectral_radius,
        }
    }

    pub fn min_margin(&self) -> f64 {
        self.margins.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Largest root modulus of `z^2 + a1 z + a0`.
pub fn quadratic_root_radius(a1: f64, a0: f64) -> f64 {
    let disc = a1 * a1 - 4.0 * a0;
    if disc >= 0.0 {
        let s = disc.sqrt();
        // cancellation-free pair of real roots
        let q = -0.5 * (a1 + s.copysign(a1));
        if q == 0.0 {
            return 0.0;
        }
        let (r1, r2) = (q, a0 / q);
        r1.abs().max(r2.abs())
    } else {
        // complex pair, |z|^2 = a0
        a0.sqrt()
    }
}

pub fn spectral_radius_2x2(m: &Matrix2<f64>) -> f64 {
    let trace = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    quadratic_root_radius(-trace, det)
}

const SCHUR_MAX_ITER: usize = 10_000;

/// Spectral radius of a general square matrix via its Schur form. If the
/// QR iteration stalls, falls back to Gelfand's formula with repeated
/// squaring.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    match Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITER) {
        Some(schur) => schur
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max),
        None => gelfand_radius(m),
    }
}

fn gelfand_radius(m: &DMatrix<f64>) -> f64 {
    let mut p = m.clone();
    let mut log_scale = 0.0;
    let mut k = 1.0;
    for _ in 0..40 {
        let norm = p.norm();
        if norm == 0.0 || !norm.is_finite() {
            return if norm == 0.0 { 0.0 } else { f64::INFINITY };
        }
        p /= norm;
        log_scale += norm.ln() / k;
        p = &p * &p;
        k *= 2.0;
    }
    (log_scale + p.norm().ln() / k).exp()
}

pub fn jury_monic_quadratic(a1: f64, a0: f64) -> JuryVerdict {
    JuryVerdict::from_margins(
        [1.0 + a1 + a0, 1.0 - a1 + a0, 1.0 - a0],
        quadratic_root_radius(a1, a0),
    )
}

/// Closed-loop pole of Euler-discretised P control, `1 - (dt/tau)(1 + K kp)`.
pub fn p_control_pole(kp: f64, p: &FirstOrderParams) -> f64 {
    1.0 - (p.dt / p.tau) * (1.0 + p.gain * kp)
}

/// Largest stable sampling period for Euler P control, `2 tau / (1 + K kp)`.
pub fn p_control_dt_limit(kp: f64, p: &FirstOrderParams) -> f64 {
    2.0 * p.tau / (1.0 + p.gain * kp)
}

pub fn euler_pi_matrix(kp: f64, ki: f64, p: &FirstOrderParams) -> Matrix2<f64> {
    let alpha = p.dt / p.tau;
    Matrix2::new(
        1.0 - alpha * (1.0 + p.gain * kp),
        alpha * p.gain * ki,
        -p.dt,
        1.0,
    )
}

pub fn zoh_pi_matrix(kp: f64, ki: f64, p: &FirstOrderParams) -> Matrix2<f64> {
    let c = zoh_coeffs(p);
    Matrix2::new(c.a - c.b * kp, c.b * ki, -p.dt, 1.0)
}

/// Euler PI test in the interpretable form:
/// `ki > 0`, `4 - 2α(1+K kp) + α K ki dt > 0`, `α(1+K kp) - α K ki dt > 0`.
pub fn jury_euler_pi(kp: f64, ki: f64, p: &FirstOrderParams) -> JuryVerdict {
    let alpha = p.dt / p.tau;
    let c = 1.0 + p.gain * kp;
    let integral = alpha * p.gain * ki * p.dt;
    let margins = [ki, 4.0 - 2.0 * alpha * c + integral, alpha * c - integral];
    JuryVerdict::from_margins(margins, spectral_radius_2x2(&euler_pi_matrix(kp, ki, p)))
}

/// Euler guardrail `ki < (1 + K kp) / (K dt)`.
pub fn ki_upper_bound(kp: f64, p: &FirstOrderParams) -> f64 {
    (1.0 + p.gain * kp) / (p.gain * p.dt)
}

/// ZOH determinant condition `ki < (1 - a + b kp) / (b dt)`.
pub fn zoh_ki_upper_bound(kp: f64, p: &FirstOrderParams) -> f64 {
    let c = zoh_coeffs(p);
    (1.0 - c.a + c.b * kp) / (c.b * p.dt)
}

/// ZOH PI test with the margins expanded in closed form, so `ki = 0` lands
/// exactly on the boundary: `b ki dt`, `2(1 + a - b kp) + b ki dt`,
/// `1 - a + b kp - b ki dt`.
pub fn jury_zoh_pi(kp: f64, ki: f64, p: &FirstOrderParams) -> JuryVerdict {
    let c = zoh_coeffs(p);
    let integral = c.b * ki * p.dt;
    let margins = [
        integral,
        2.0 * (1.0 + c.a - c.b * kp) + integral,
        1.0 - c.a + c.b * kp - integral,
    ];
    JuryVerdict::from_margins(margins, spectral_radius_2x2(&zoh_pi_matrix(kp, ki, p)))
}

pub fn jury_pi(kp: f64, ki: f64, p: &FirstOrderParams, disc: Discretization) -> JuryVerdict {
    match disc {
        Discretization::Euler => jury_euler_pi(kp, ki, p),
        Discretization::Zoh => jury_zoh_pi(kp, ki, p),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRegionGrid {
    pub kp_axis: Vec<f64>,
    pub ki_axis: Vec<f64>,
    /// `verdicts[i][j]` is the verdict at `(kp_axis[i], ki_axis[j])`.
    pub verdicts: Vec<Vec<bool>>,
    pub discretization: Discretization,
}

impl StabilityRegionGrid {
    pub fn stable_count(&self) -> usize {
        self.verdicts.iter().flatten().filter(|&&s| s).count()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64, bool)> + '_ {
        self.kp_axis.iter().enumerate().flat_map(move |(i, &kp)| {
            self.ki_axis
                .iter()
                .enumerate()
                .map(move |(j, &ki)| (kp, ki, self.verdicts[i][j]))
        })
    }
}

/// `n` evenly spaced points over `[lo, hi]` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

pub fn region_grid(
    kp_range: (f64, f64),
    ki_range: (f64, f64),
    resolution: usize,
    discretization: Discretization,
    p: &FirstOrderParams,
) -> StabilityRegionGrid {
    let kp_axis = linspace(kp_range.0, kp_range.1, resolution);
    let ki_axis = linspace(ki_range.0, ki_range.1, resolution);
    let verdicts = kp_axis
        .par_iter()
        .map(|&kp| {
            ki_axis
                .iter()
                .map(|&ki| jury_pi(kp, ki, p, discretization).stable)
                .collect()
        })
        .collect();
    StabilityRegionGrid {
        kp_axis,
        ki_axis,
        verdicts,
        discretization,
    }
}

/// Parameter ranges for the robust point-cloud screen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlantUncertainty {
    pub tau: (f64, f64),
    pub gain: (f64, f64),
    pub delays: Vec<usize>,
    pub dt: f64,
}

impl Default for PlantUncertainty {
    fn default() -> Self {
        Self {
            tau: (0.5, 1.5),
            gain: (0.8, 1.2),
            delays: vec![0, 1, 2, 3],
            dt: 0.01,
        }
    }
}

/// ZOH PI loop with `delay` samples of input delay, state
/// `[y, I, u_{k-1}, ..., u_{k-d}]`.
pub fn delayed_zoh_pi_matrix(kp: f64, ki: f64, p: &FirstOrderParams, delay: usize) -> DMatrix<f64> {
    let c = zoh_coeffs(p);
    let n = 2 + delay;
    let mut m = DMatrix::zeros(n, n);
    if delay == 0 {
        m[(0, 0)] = c.a - c.b * kp;
        m[(0, 1)] = c.b * ki;
    } else {
        m[(0, 0)] = c.a;
        m[(0, n - 1)] = c.b;
        // newest stored effort u_k = -kp y + ki I
        m[(2, 0)] = -kp;
        m[(2, 1)] = ki;
        for j in 3..n {
            m[(j, j - 1)] = 1.0;
        }
    }
    m[(1, 0)] = -p.dt;
    m[(1, 1)] = 1.0;
    m
}

/// Fraction of sampled plants `(tau, K, d)` for which the delayed ZOH PI loop
/// is Schur stable.
pub fn robust_point_screen(
    kp: f64,
    ki: f64,
    uncertainty: &PlantUncertainty,
    n_draws: usize,
    seed: u64,
) -> f64 {
    if n_draws == 0 || uncertainty.delays.is_empty() {
        return 0.0;
    }
    let stable = (0..n_draws)
        .into_par_iter()
        .filter(|&i| {
            let mut r = rng::stream(seed, i as u64);
            let tau = uniform(&mut r, uncertainty.tau);
            let gain = uniform(&mut r, uncertainty.gain);
            let delay = uncertainty.delays[r.random_range(0..uncertainty.delays.len())];
            let p = FirstOrderParams {
                tau,
                gain,
                dt: uncertainty.dt,
            };
            spectral_radius(&delayed_zoh_pi_matrix(kp, ki, &p, delay)) < 1.0
        })
        .count();
    stable as f64 / n_draws as f64
}

pub(crate) fn uniform<R: Rng>(r: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        r.random_range(lo..hi)
    } else {
        lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nominal() -> FirstOrderParams {
        FirstOrderParams::nominal()
    }

    #[test]
    fn stalled_schur_falls_back() {
        // zero gains with three samples of delay stalls the QR sweep
        let m = delayed_zoh_pi_matrix(0.0, 0.0, &nominal(), 3);
        assert!((spectral_radius(&m) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn p_pole_examples() {
        let p = nominal();
        assert!((p_control_pole(3.0, &p) - 0.96).abs() < 1e-12);
        assert!((p_control_pole(0.0, &p) - 0.99).abs() < 1e-12);
        let edge = p.with_dt(p_control_dt_limit(3.0, &p));
        assert!((p_control_pole(3.0, &edge) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn euler_pi_examples() {
        let p = nominal();
        let v = jury_euler_pi(3.0, 1.0, &p);
        assert!(v.stable);
        assert!((v.margins[1] - (4.0 - 0.08 + 0.0001)).abs() < 1e-12);
        assert!((v.margins[2] - (0.04 - 0.0001)).abs() < 1e-12);
        assert!(v.spectral_radius < 1.0);
        assert!(!jury_euler_pi(3.0, 0.0, &p).stable);
        assert!(!jury_euler_pi(3.0, 500.0, &p).stable);
    }

    #[test]
    fn euler_margins_match_monic_form() {
        let p = FirstOrderParams::new(0.7, 1.3, 0.02).unwrap();
        let (kp, ki) = (2.5, 40.0);
        let m = euler_pi_matrix(kp, ki, &p);
        let monic = jury_monic_quadratic(-m.trace(), m.determinant());
        let euler = jury_euler_pi(kp, ki, &p);
        let alpha = p.dt / p.tau;
        assert!((monic.margins[0] - alpha * p.gain * p.dt * euler.margins[0]).abs() < 1e-12);
        assert!((monic.margins[1] - euler.margins[1]).abs() < 1e-12);
        assert!((monic.margins[2] - euler.margins[2]).abs() < 1e-12);
    }

    #[test]
    fn guardrail_examples() {
        let p = nominal();
        assert!((ki_upper_bound(3.0, &p) - 400.0).abs() < 1e-9);
        assert!((ki_upper_bound(0.0, &p) - 100.0).abs() < 1e-9);
        let ratio = ki_upper_bound(3.0, &p) / ki_upper_bound(3.0, &p.with_dt(0.02));
        assert!((ratio - 2.0).abs() < 1e-12);
    }

    #[test]
    fn monic_examples() {
        assert!(jury_monic_quadratic(0.0, 0.0).stable);
        let v = jury_monic_quadratic(-2.0, 1.0);
        assert!(!v.stable);
        assert_eq!(v.margins[0], 0.0);
        assert!((v.spectral_radius - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zoh_pi_nominal_is_stable() {
        let v = jury_zoh_pi(3.0, 1.0, &nominal());
        assert!(v.stable);
        assert!(v.spectral_radius < 1.0);
        assert!(!jury_zoh_pi(3.0, 0.0, &nominal()).stable);
    }

    #[test]
    fn zoh_determinant_bound_is_the_boundary() {
        let p = nominal();
        let bound = zoh_ki_upper_bound(3.0, &p);
        assert!(jury_zoh_pi(3.0, bound * (1.0 - 1e-6), &p).stable);
        assert!(!jury_zoh_pi(3.0, bound * (1.0 + 1e-6), &p).stable);
    }

    #[test]
    fn grid_shapes_and_guardrail_row() {
        let p = nominal();
        let g = region_grid((1.0, 2.0), (1.0, 2.0), 2, Discretization::Euler, &p);
        assert_eq!(g.verdicts, vec![vec![true, true], vec![true, true]]);

        let row = region_grid((3.0, 3.0), (390.0, 410.0), 21, Discretization::Euler, &p);
        let flags = &row.verdicts[0];
        let last_stable = flags.iter().rposition(|&s| s).unwrap();
        assert!(row.ki_axis[last_stable] < 400.0);
        assert!(row.ki_axis[last_stable + 1] >= 400.0);
        assert!(flags[..=last_stable].iter().all(|&s| s));
        assert!(flags[last_stable + 1..].iter().all(|&s| !s));
    }

    #[test]
    fn delayed_matrix_reduces_to_zoh_without_delay() {
        let p = nominal();
        let m = delayed_zoh_pi_matrix(3.0, 1.0, &p, 0);
        let r = spectral_radius(&m);
        assert!((r - jury_zoh_pi(3.0, 1.0, &p).spectral_radius).abs() < 1e-12);
    }

    #[test]
    fn point_screen_degenerate_and_interior() {
        let point = PlantUncertainty {
            tau: (1.0, 1.0),
            gain: (1.0, 1.0),
            delays: vec![0],
            dt: 0.01,
        };
        assert_eq!(robust_point_screen(3.0, 1.0, &point, 50, 1), 1.0);
        let outside = zoh_ki_upper_bound(3.0, &nominal()) * 1.5;
        assert_eq!(robust_point_screen(3.0, outside, &point, 50, 1), 0.0);
        assert_eq!(robust_point_screen(1.0, 1.0, &PlantUncertainty::default(), 500, 3), 1.0);
    }
}

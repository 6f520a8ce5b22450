//! Gaussian-process regression with an anisotropic squared-exponential kernel.
//!
//! Inputs are expected in the unit box. Targets are standardised internally;
//! the signal variance is fixed to one in standardised units and the per-axis
//! length scales plus the noise variance are fitted by maximising the log
//! marginal likelihood with a multi-start pattern search in log space.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use libm::erfc;

use crate::error::{Error, Result};

pub const DIM: usize = 3;

const JITTER_START: f64 = 1e-8;
const JITTER_MAX: f64 = 1e-4;
const LENGTH_BOUNDS: (f64, f64) = (0.02, 5.0);
const NOISE_CEILING: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateDataset {
    pub points: Vec<[f64; DIM]>,
    pub values: Vec<f64>,
    /// Lower bound on the observation-noise variance (standardised units).
    pub noise_floor: f64,
}

impl SurrogateDataset {
    pub fn new(noise_floor: f64) -> Self {
        Self {
            points: Vec::new(),
            values: Vec::new(),
            noise_floor,
        }
    }

    pub fn push(&mut self, x: [f64; DIM], y: f64) {
        self.points.push(x);
        self.values.push(y);
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparameters {
    pub length_scales: [f64; DIM],
    pub noise_variance: f64,
}

#[derive(Debug, Clone)]
pub struct GaussianProcess {
    points: Vec<[f64; DIM]>,
    hyper: Hyperparameters,
    y_mean: f64,
    y_scale: f64,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
    log_marginal_likelihood: f64,
}

fn kernel(a: &[f64; DIM], b: &[f64; DIM], ls: &[f64; DIM]) -> f64 {
    let d2: f64 = (0..DIM).map(|i| ((a[i] - b[i]) / ls[i]).powi(2)).sum();
    (-0.5 * d2).exp()
}

struct Factor {
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
    lml: f64,
}

fn factorize(points: &[[f64; DIM]], y: &DVector<f64>, h: &Hyperparameters) -> Result<Factor> {
    let n = points.len();
    let base = DMatrix::from_fn(n, n, |i, j| kernel(&points[i], &points[j], &h.length_scales));
    let mut jitter = 0.0;
    loop {
        let mut k = base.clone();
        for i in 0..n {
            k[(i, i)] += h.noise_variance + jitter;
        }
        if let Some(chol) = Cholesky::new(k) {
            let alpha = chol.solve(y);
            let log_det: f64 = chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>() * 2.0;
            let lml = -0.5 * y.dot(&alpha) - 0.5 * log_det - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
            return Ok(Factor { chol, alpha, lml });
        }
        jitter = if jitter == 0.0 { JITTER_START } else { jitter * 10.0 };
        if jitter > JITTER_MAX {
            return Err(Error::Conditioning { jitter: JITTER_MAX });
        }
    }
}

fn to_hyper(theta: &[f64; DIM + 1]) -> Hyperparameters {
    let mut length_scales = [0.0; DIM];
    for (l, t) in length_scales.iter_mut().zip(theta) {
        *l = t.exp();
    }
    Hyperparameters {
        length_scales,
        noise_variance: theta[DIM].exp(),
    }
}

/// Fit the surrogate. Needs at least two points.
pub fn gp_fit(data: &SurrogateDataset) -> Result<GaussianProcess> {
    let n = data.len();
    if n < 2 || data.values.len() != n {
        return Err(Error::InvalidParameter {
            name: "dataset",
            reason: format!("need >= 2 matching points/values, got {n}/{}", data.values.len()),
        });
    }
    let y_mean = data.values.iter().sum::<f64>() / n as f64;
    let var = data.values.iter().map(|v| (v - y_mean).powi(2)).sum::<f64>() / n as f64;
    let y_scale = if var > 1e-24 { var.sqrt() } else { 1.0 };
    let y = DVector::from_iterator(n, data.values.iter().map(|v| (v - y_mean) / y_scale));

    let noise_floor = data.noise_floor.max(1e-10);
    let lo = [LENGTH_BOUNDS.0.ln(), LENGTH_BOUNDS.0.ln(), LENGTH_BOUNDS.0.ln(), noise_floor.ln()];
    let hi = [LENGTH_BOUNDS.1.ln(), LENGTH_BOUNDS.1.ln(), LENGTH_BOUNDS.1.ln(), NOISE_CEILING.max(noise_floor).ln()];
    let clamp = |t: &mut [f64; DIM + 1]| {
        for i in 0..=DIM {
            t[i] = t[i].clamp(lo[i], hi[i]);
        }
    };
    let score = |t: &[f64; DIM + 1]| factorize(&data.points, &y, &to_hyper(t)).map(|f| f.lml).unwrap_or(f64::NEG_INFINITY);

    let mut best_theta: Option<([f64; DIM + 1], f64)> = None;
    for &(ls, noise) in &[(0.15f64, 1e-3f64), (0.4, 1e-3), (1.0, 1e-2), (2.0, 1e-4)] {
        let mut theta = [ls.ln(), ls.ln(), ls.ln(), noise.ln()];
        clamp(&mut theta);
        let mut current = score(&theta);
        let mut step = 1.0;
        while step > 0.02 {
            let mut improved = false;
            for i in 0..=DIM {
                for dir in [1.0, -1.0] {
                    let mut cand = theta;
                    cand[i] += dir * step;
                    clamp(&mut cand);
                    let s = score(&cand);
                    if s > current + 1e-9 {
                        theta = cand;
                        current = s;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        if best_theta.is_none_or(|(_, b)| current > b) {
            best_theta = Some((theta, current));
        }
    }
    let (theta, _) = best_theta.expect("at least one start");
    let hyper = to_hyper(&theta);
    let f = factorize(&data.points, &y, &hyper)?;
    Ok(GaussianProcess {
        points: data.points.clone(),
        hyper,
        y_mean,
        y_scale,
        chol: f.chol,
        alpha: f.alpha,
        log_marginal_likelihood: f.lml,
    })
}

impl GaussianProcess {
    pub fn hyperparameters(&self) -> &Hyperparameters {
        &self.hyper
    }

    pub fn log_marginal_likelihood(&self) -> f64 {
        self.log_marginal_likelihood
    }

    /// Predictive mean and standard deviation of the latent function.
    pub fn predict(&self, x: &[f64; DIM]) -> (f64, f64) {
        let n = self.points.len();
        let k_star = DVector::from_iterator(n, self.points.iter().map(|p| kernel(p, x, &self.hyper.length_scales)));
        let mean = k_star.dot(&self.alpha);
        let v = self
            .chol
            .l_dirty()
            .solve_lower_triangular(&k_star)
            .unwrap_or_else(|| DVector::zeros(n));
        let var = (1.0 - v.norm_squared()).max(0.0);
        (self.y_mean + self.y_scale * mean, self.y_scale * var.sqrt())
    }
}

pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

pub fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Expected improvement below `best` for a normal prediction `(mean, std)`.
/// At zero spread this is the deterministic improvement `max(0, best - mean)`.
pub fn expected_improvement(mean: f64, std: f64, best: f64) -> f64 {
    let gap = best - mean;
    if !(std > 0.0) {
        return gap.max(0.0);
    }
    let z = gap / std;
    (gap * std_normal_cdf(z) + std * std_normal_pdf(z)).max(0.0)
}

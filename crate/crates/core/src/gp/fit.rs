//! MAP estimation of kernel hyperparameters under Gamma priors.
//!
//! The constant mean is profiled out in closed form (generalized least
//! squares), which yields the same joint optimum as optimizing it with a flat
//! prior. The remaining parameters live in log space:
//! `θ = (ln ℓ₁ … ln ℓ_d, ln outputscale, ln(noise − floor))`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GpModel, KernelParams, OutputTransform, NOISE_FLOOR};
use crate::error::{Error, Result};
use crate::optim::local::{minimize_box, LocalConfig};

/// Gamma density with shape/rate parametrization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaPrior {
    pub shape: f64,
    pub rate: f64,
}

impl GammaPrior {
    /// Log density up to the normalizing constant, and its derivative.
    #[inline]
    fn logpdf_and_deriv(&self, v: f64) -> (f64, f64) {
        ((self.shape - 1.0) * v.ln() - self.rate * v, (self.shape - 1.0) / v - self.rate)
    }

    pub fn mode(&self) -> f64 {
        ((self.shape - 1.0) / self.rate).max(0.0)
    }
}

#[derive(Debug, Clone)]
pub struct PriorConfig {
    pub lengthscale: GammaPrior,
    pub outputscale: GammaPrior,
    pub noise: GammaPrior,
    /// Multi-start count for the MAP search.
    pub restarts: usize,
    pub max_iters: usize,
    /// Standardize targets to zero mean and unit variance before fitting.
    pub standardize: bool,
    /// Seed of the fixed multi-start initial points.
    pub seed: u64,
    /// Fit the noise variance; when off it stays at the floor and its prior
    /// is ignored.
    pub learn_noise: bool,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            lengthscale: GammaPrior { shape: 3.0, rate: 6.0 },
            outputscale: GammaPrior { shape: 2.0, rate: 0.15 },
            noise: GammaPrior { shape: 1.1, rate: 0.05 },
            restarts: 8,
            max_iters: 200,
            standardize: true,
            seed: 0,
            learn_noise: true,
        }
    }
}

const LN_LS: (f64, f64) = (-6.907_755_278_982_137, 3.0); // [1e-3, e^3]
const LN_OS: (f64, f64) = (-9.210_340_371_976_182, 6.907_755_278_982_137); // [1e-4, 1e3]
const LN_NOISE: (f64, f64) = (-27.631_021_115_928_547, std::f64::consts::LN_10); // [1e-12, 10]

fn bounds(d: usize) -> (Vec<f64>, Vec<f64>) {
    let mut lo = vec![LN_LS.0; d];
    let mut hi = vec![LN_LS.1; d];
    lo.extend([LN_OS.0, LN_NOISE.0]);
    hi.extend([LN_OS.1, LN_NOISE.1]);
    (lo, hi)
}

pub(crate) fn params_from_theta(theta: &[f64]) -> KernelParams {
    let d = theta.len() - 2;
    KernelParams {
        lengthscales: theta[..d].iter().map(|t| t.exp()).collect(),
        outputscale: theta[d].exp(),
        noise_variance: NOISE_FLOOR + theta[d + 1].exp(),
    }
}

/// Cached pairwise geometry of one training set.
struct Geometry {
    n: usize,
    d: usize,
    /// Per-dimension squared coordinate differences, `d` matrices `n × n`.
    sq: Vec<DMatrix<f64>>,
}

impl Geometry {
    fn new(inputs: &[Vec<f64>]) -> Self {
        let n = inputs.len();
        let d = inputs.first().map_or(0, Vec::len);
        let sq = (0..d)
            .map(|k| DMatrix::from_fn(n, n, |i, j| (inputs[i][k] - inputs[j][k]).powi(2)))
            .collect();
        Self { n, d, sq }
    }
}

/// Log posterior (log marginal likelihood with the profiled mean, plus log
/// prior densities) at `theta`, its gradient, and the profiled mean. Returns
/// `None` when the covariance cannot be factorized.
fn log_posterior_impl(
    theta: &[f64],
    geo: &Geometry,
    ys: &DVector<f64>,
    priors: &PriorConfig,
    grad: Option<&mut [f64]>,
) -> Option<(f64, f64)> {
    let (n, d) = (geo.n, geo.d);
    let p = params_from_theta(theta);
    let mut r = DMatrix::zeros(n, n);
    for k in 0..d {
        let inv = 1.0 / (p.lengthscales[k] * p.lengthscales[k]);
        r += &geo.sq[k] * inv;
    }
    r.apply(|v| *v = v.sqrt());
    let kern = r.map(|ri| p.outputscale * super::matern52(ri));
    let mut kmat = kern.clone();
    for i in 0..n {
        kmat[(i, i)] += p.noise_variance;
    }
    let chol = kmat.cholesky()?;
    let ones = DVector::from_element(n, 1.0);
    let kinv_1 = chol.solve(&ones);
    let kinv_y = chol.solve(ys);
    let mean = kinv_1.dot(ys) / kinv_1.sum();
    let alpha = &kinv_y - &kinv_1 * mean;
    let resid = ys - DVector::from_element(n, mean);
    let logdet_half: f64 = chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum();
    let mut lml = -0.5 * resid.dot(&alpha) - logdet_half
        - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();

    let mut lp = 0.0;
    let mut dlp = vec![0.0; d + 2];
    for k in 0..d {
        let (v, dv) = priors.lengthscale.logpdf_and_deriv(p.lengthscales[k]);
        lp += v;
        dlp[k] = dv * p.lengthscales[k];
    }
    let (v, dv) = priors.outputscale.logpdf_and_deriv(p.outputscale);
    lp += v;
    dlp[d] = dv * p.outputscale;
    if priors.learn_noise {
        let (v, dv) = priors.noise.logpdf_and_deriv(p.noise_variance);
        lp += v;
        dlp[d + 1] = dv * theta[d + 1].exp();
    }
    lml += lp;

    if let Some(grad) = grad {
        // ∂ℓ/∂θ = ½ tr((ααᵀ − K⁻¹) ∂K/∂θ)
        let w = &alpha * alpha.transpose() - chol.inverse();
        for k in 0..d {
            let mut acc = 0.0;
            for j in 0..n {
                for i in 0..n {
                    let wij = w[(i, j)];
                    if wij != 0.0 {
                        acc += wij * p.dk_dlog_lengthscale(r[(i, j)], geo.sq[k][(i, j)], k);
                    }
                }
            }
            grad[k] = 0.5 * acc + dlp[k];
        }
        grad[d] = 0.5 * w.component_mul(&kern).sum() + dlp[d];
        grad[d + 1] = 0.5 * w.trace() * theta[d + 1].exp() + dlp[d + 1];
    }
    Some((lml, mean))
}

/// Log posterior density of `theta` for targets already in model units.
/// Exposed for stationarity checks; returns `(value, gradient, mean)`.
pub fn log_posterior(
    theta: &[f64],
    inputs: &[Vec<f64>],
    targets: &[f64],
    priors: &PriorConfig,
) -> Option<(f64, Vec<f64>, f64)> {
    let geo = Geometry::new(inputs);
    let ys = DVector::from_column_slice(targets);
    let mut g = vec![0.0; theta.len()];
    log_posterior_impl(theta, &geo, &ys, priors, Some(&mut g)).map(|(v, m)| (v, g, m))
}

fn initial_points(d: usize, cfg: &PriorConfig) -> Vec<Vec<f64>> {
    let mut starts = Vec::with_capacity(cfg.restarts.max(1));
    let mut first = vec![cfg.lengthscale.mode().max(1e-2).ln(); d];
    first.push(cfg.outputscale.mode().clamp(1e-2, 1e2).ln().min(0.0));
    first.push((1e-3f64).ln());
    starts.push(first);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    while starts.len() < cfg.restarts.max(1) {
        let mut t: Vec<f64> = (0..d).map(|_| rng.random_range((0.05f64).ln()..(2.0f64).ln())).collect();
        t.push(rng.random_range((0.1f64).ln()..(10.0f64).ln()));
        t.push(rng.random_range((1e-6f64).ln()..(1e-1f64).ln()));
        starts.push(t);
    }
    starts
}

/// Fit a constant-mean Matérn 5/2 GP by MAP over the hyperparameters.
///
/// The training set is put into a canonical order first, so the result does
/// not depend on the order observations are supplied in.
pub fn fit_map(inputs: &[Vec<f64>], targets: &[f64], cfg: &PriorConfig) -> Result<GpModel> {
    if inputs.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: inputs.len() });
    }
    if inputs.len() != targets.len() {
        return Err(Error::DimensionMismatch { expected: inputs.len(), got: targets.len() });
    }
    let d = inputs[0].len();
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    order.sort_by(|&a, &b| {
        inputs[a]
            .iter()
            .zip(&inputs[b])
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(targets[a].total_cmp(&targets[b]))
    });
    let xs: Vec<Vec<f64>> = order.iter().map(|&i| inputs[i].clone()).collect();
    let ys_raw: Vec<f64> = order.iter().map(|&i| targets[i]).collect();
    let transform = if cfg.standardize {
        OutputTransform::standardizing(&ys_raw)
    } else {
        OutputTransform::IDENTITY
    };
    let ys = DVector::from_iterator(ys_raw.len(), ys_raw.iter().map(|&y| transform.forward(y)));
    let geo = Geometry::new(&xs);
    let (lo, mut hi) = bounds(d);
    if !cfg.learn_noise {
        hi[d + 1] = lo[d + 1];
    }
    let local = LocalConfig {
        max_iters: cfg.max_iters,
        gtol: 1e-6,
        ftol: 1e-12,
        initial_step: 0.05,
        ..Default::default()
    };

    let mut best: Option<(f64, Vec<f64>)> = None;
    for mut start in initial_points(d, cfg) {
        start[d + 1] = start[d + 1].min(hi[d + 1]);
        let obj = |t: &[f64], g: &mut [f64]| match log_posterior_impl(t, &geo, &ys, cfg, Some(g)) {
            Some((v, _)) => {
                g.iter_mut().for_each(|gi| *gi = -*gi);
                -v
            }
            None => f64::INFINITY,
        };
        let res = minimize_box(obj, &start, &lo, &hi, &local);
        if res.f.is_finite() && best.as_ref().is_none_or(|(f, _)| res.f < *f) {
            best = Some((res.f, res.x));
        }
    }
    let (_, theta) = best.ok_or(Error::FitFailure { jitter: 0.0 })?;
    let (_, mean) = log_posterior_impl(&theta, &geo, &ys, cfg, None)
        .ok_or(Error::FitFailure { jitter: 0.0 })?;
    GpModel::from_params(xs, ys_raw, transform, mean, params_from_theta(&theta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_inputs() -> Vec<Vec<f64>> {
        vec![vec![0.05], vec![0.3], vec![0.52], vec![0.77], vec![0.95]]
    }

    #[test]
    fn gradient_matches_fd() {
        let xs = vec![vec![0.1, 0.2], vec![0.4, 0.9], vec![0.8, 0.5], vec![0.3, 0.3]];
        let ys = [0.3, -1.0, 0.8, 0.1];
        let cfg = PriorConfig::default();
        let theta = [(0.4f64).ln(), (0.2f64).ln(), (1.5f64).ln(), (1e-3f64).ln()];
        let (_, g, _) = log_posterior(&theta, &xs, &ys, &cfg).unwrap();
        for i in 0..theta.len() {
            let h = 1e-6;
            let mut tp = theta;
            let mut tm = theta;
            tp[i] += h;
            tm[i] -= h;
            let fp = log_posterior(&tp, &xs, &ys, &cfg).unwrap().0;
            let fm = log_posterior(&tm, &xs, &ys, &cfg).unwrap().0;
            let fd = (fp - fm) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-5 * fd.abs().max(1.0), "{i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn too_few_points() {
        let e = fit_map(&[vec![0.5]], &[1.0], &PriorConfig::default()).unwrap_err();
        assert!(matches!(e, Error::InsufficientData { got: 1, .. }));
    }

    #[test]
    fn duplicated_point_interpolates() {
        let m = fit_map(&[vec![0.4], vec![0.4]], &[2.0, 2.0], &PriorConfig::default()).unwrap();
        assert!((m.posterior(&[0.4]).mean - 2.0).abs() < 1e-3);
    }

    #[test]
    fn constant_targets_give_constant_mean_at_a_stationary_point() {
        let xs = grid_inputs();
        let ys = [1.7; 5];
        let cfg = PriorConfig::default();
        let m = fit_map(&xs, &ys, &cfg).unwrap();
        assert!((m.mean_constant() - 1.7).abs() < 1e-9);
        // Stationarity of the log posterior at the fitted θ (interior coordinates).
        let p = m.params();
        let theta = vec![
            p.lengthscales[0].ln(),
            p.outputscale.ln(),
            (p.noise_variance - NOISE_FLOOR).max(1e-300).ln(),
        ];
        let zeros = vec![0.0; 5];
        let (_, g, _) = log_posterior(&theta, &xs, &zeros, &cfg).unwrap();
        let (lo, hi) = bounds(1);
        for i in 0..3 {
            let interior = theta[i] > lo[i] + 1e-6 && theta[i] < hi[i] - 1e-6;
            if interior {
                assert!(g[i].abs() < 1e-3, "coordinate {i}: {}", g[i]);
            }
        }
        // Far from data the posterior reverts to the fitted prior.
        let far = m.posterior(&[40.0]);
        assert!((far.stddev / m.prior_stddev() - 1.0).abs() < 1e-3);
        assert!((far.mean - 1.7).abs() < 1e-9);
    }

    #[test]
    fn permutation_invariant() {
        let xs = vec![vec![0.1, 0.2], vec![0.4, 0.9], vec![0.8, 0.5], vec![0.3, 0.3], vec![0.6, 0.1]];
        let ys = [0.3, -1.0, 0.8, 0.1, 0.5];
        let cfg = PriorConfig::default();
        let a = fit_map(&xs, &ys, &cfg).unwrap();
        let perm = [3, 0, 4, 2, 1];
        let xs2: Vec<_> = perm.iter().map(|&i| xs[i].clone()).collect();
        let ys2: Vec<_> = perm.iter().map(|&i| ys[i]).collect();
        let b = fit_map(&xs2, &ys2, &cfg).unwrap();
        assert_eq!(a.params(), b.params());
        assert_eq!(a.mean_constant(), b.mean_constant());
    }
}

//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

pub mod gp_suites;
pub mod mc;
pub mod tree_oracle;

use budgetbo::gp::{GpModel, KernelParams, OutputTransform};
use budgetbo::surrogate::SurrogatePair;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

/// Matérn 5/2 written out from its textbook form.
pub fn matern(p: &KernelParams, a: &[f64], b: &[f64]) -> f64 {
    let r2: f64 = a.iter().zip(b).zip(&p.lengthscales).map(|((x, y), l)| ((x - y) / l).powi(2)).sum();
    let r = (5.0 * r2).sqrt();
    p.outputscale * (1.0 + r + 5.0 * r2 / 3.0) * (-r).exp()
}

/// Posterior mean and latent variance by explicit matrix inversion.
pub fn dense_posterior(
    xs: &[Vec<f64>],
    ys: &[f64],
    p: &KernelParams,
    mean: f64,
    obs_var: f64,
    x: &[f64],
) -> (f64, f64) {
    let n = xs.len();
    let k = DMatrix::from_fn(n, n, |i, j| matern(p, &xs[i], &xs[j]) + if i == j { obs_var } else { 0.0 });
    let kinv = k.try_inverse().expect("invertible");
    let ks = DVector::from_fn(n, |i, _| matern(p, &xs[i], x));
    let r = DVector::from_fn(n, |i, _| ys[i] - mean);
    let m = mean + (ks.transpose() * &kinv * r)[(0, 0)];
    let v = matern(p, x, x) - (ks.transpose() * &kinv * &ks)[(0, 0)];
    (m, v.max(0.0))
}

/// Model data in internal units, ready for [`dense_posterior`].
pub struct DenseModel {
    pub xs: Vec<Vec<f64>>,
    pub ys: Vec<f64>,
    pub params: KernelParams,
    pub mean: f64,
    pub obs_var: f64,
    pub t: OutputTransform,
}

impl DenseModel {
    pub fn of(m: &GpModel) -> Self {
        let t = m.transform();
        Self {
            xs: m.inputs().to_vec(),
            ys: m.targets().iter().map(|&y| t.forward(y)).collect(),
            params: m.params().clone(),
            mean: t.forward(m.mean_constant()),
            obs_var: m.observation_variance(),
            t,
        }
    }

    /// Internal-unit moments at `x`.
    pub fn moments(&self, x: &[f64]) -> (f64, f64) {
        dense_posterior(&self.xs, &self.ys, &self.params, self.mean, self.obs_var, x)
    }

    /// Raw-unit mean and stddev.
    pub fn raw(&self, x: &[f64]) -> (f64, f64) {
        let (m, v) = self.moments(x);
        (self.t.shift + self.t.scale * m, self.t.scale * v.sqrt())
    }

    pub fn with(&self, x: &[f64], y_internal: f64) -> Self {
        let mut xs = self.xs.clone();
        xs.push(x.to_vec());
        let mut ys = self.ys.clone();
        ys.push(y_internal);
        Self { xs, ys, params: self.params.clone(), ..*self }
    }
}

pub fn phi(z: f64) -> f64 {
    Normal::standard().pdf(z)
}

pub fn cdf(z: f64) -> f64 {
    Normal::standard().cdf(z)
}

pub fn ei_oracle(mean: f64, sd: f64, inc: f64) -> f64 {
    if sd <= 1e-12 {
        return (mean - inc).max(0.0);
    }
    let z = (mean - inc) / sd;
    (mean - inc) * cdf(z) + sd * phi(z)
}

pub fn q1_oracle(mean: f64, sd: f64, inc: f64, mc: f64, sc: f64, remaining: f64) -> f64 {
    if remaining <= 0.0 {
        return 0.0;
    }
    let p = if sc <= 1e-12 {
        f64::from(u8::from(mc <= remaining.ln()))
    } else {
        cdf((remaining.ln() - mc) / sc)
    };
    ei_oracle(mean, sd, inc) * p
}

/// A 1-D pair with three observations and fixed hyperparameters; `case`
/// varies data, hyperparameters and transform.
pub fn hand_pair(case: usize) -> SurrogatePair {
    let c = case as f64;
    let xs = vec![vec![0.1 + 0.03 * c], vec![0.45], vec![0.9 - 0.02 * c]];
    let ys = vec![0.3 * c - 1.0, 1.2 - 0.1 * c, 0.5 + 0.15 * (c * 1.3).sin()];
    let lnz = vec![0.2 - 0.05 * c, 0.6, -0.3 + 0.1 * c];
    let t = OutputTransform::standardizing(&ys);
    let obj = GpModel::from_params(
        xs.clone(),
        ys.clone(),
        t,
        0.1 * (c - 4.0),
        KernelParams { lengthscales: vec![0.15 + 0.03 * c], outputscale: 0.8 + 0.1 * c, noise_variance: 1e-4 },
    )
    .unwrap();
    let cost = GpModel::from_params(
        xs,
        lnz,
        OutputTransform::IDENTITY,
        0.1,
        KernelParams { lengthscales: vec![0.3], outputscale: 0.3 + 0.02 * c, noise_variance: 1e-5 },
    )
    .unwrap();
    let utility = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    SurrogatePair { objective: obj, logcost: cost, utility }
}

/// A random `d`-dimensional pair with `n` observations and random fixed
/// hyperparameters.
pub fn random_pair<R: Rng>(rng: &mut R, d: usize, n: usize) -> SurrogatePair {
    let xs: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random()).collect()).collect();
    let ys: Vec<f64> = xs.iter().map(|x| x.iter().map(|v| (5.0 * v).sin()).sum::<f64>() + rng.random::<f64>() * 0.1).collect();
    let lnz: Vec<f64> = xs.iter().map(|x| 0.8 * x[0] - 0.4 + 0.1 * rng.random::<f64>()).collect();
    let ls = |rng: &mut R| (0..d).map(|_| rng.random_range(0.15..0.6)).collect::<Vec<f64>>();
    let obj = GpModel::from_params(
        xs.clone(),
        ys.clone(),
        OutputTransform::standardizing(&ys),
        rng.random_range(-0.3..0.3),
        KernelParams { lengthscales: ls(rng), outputscale: rng.random_range(0.5..2.0), noise_variance: 1e-4 },
    )
    .unwrap();
    let cost = GpModel::from_params(
        xs,
        lnz,
        OutputTransform::IDENTITY,
        rng.random_range(-0.2..0.2),
        KernelParams { lengthscales: ls(rng), outputscale: rng.random_range(0.05..0.5), noise_variance: 1e-4 },
    )
    .unwrap();
    let utility = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    SurrogatePair { objective: obj, logcost: cost, utility }
}

/// Central differences of `f` at `x` with step `h`.
pub fn central_fd(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut p = x.to_vec();
    (0..x.len())
        .map(|i| {
            p[i] = x[i] + h;
            let fp = f(&p);
            p[i] = x[i] - h;
            let fm = f(&p);
            p[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// `‖a − b‖ / max(‖b‖, floor)`.
pub fn rel_err(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / nb.max(floor)
}

//! Gaussian-process regression with a constant mean and Matérn 5/2 kernel.
//!
//! Targets may be standardized at fit time; the model works internally in
//! standardized units and every public query answers in the original units.

mod fit;
mod kernel;

pub use fit::{fit_map, log_posterior, GammaPrior, PriorConfig};
pub use kernel::{matern52, KernelParams};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Smallest admissible observation-noise variance (standardized units).
pub const NOISE_FLOOR: f64 = 1e-6;
/// Extra diagonal jitter tried, in order, when a factorization fails.
pub const JITTER_LADDER: [f64; 5] = [0.0, 1e-5, 1e-4, 1e-3, 1e-2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorSummary {
    pub mean: f64,
    pub stddev: f64,
}

/// Affine map between raw targets and the model's internal units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputTransform {
    pub shift: f64,
    pub scale: f64,
}

impl OutputTransform {
    pub const IDENTITY: Self = Self { shift: 0.0, scale: 1.0 };

    pub fn standardizing(ys: &[f64]) -> Self {
        let n = ys.len() as f64;
        let shift = ys.iter().sum::<f64>() / n;
        let var = ys.iter().map(|y| (y - shift).powi(2)).sum::<f64>() / n;
        let scale = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
        Self { shift, scale }
    }

    #[inline]
    pub fn forward(&self, y: f64) -> f64 {
        (y - self.shift) / self.scale
    }

    #[inline]
    pub fn inverse(&self, z: f64) -> f64 {
        self.shift + self.scale * z
    }
}

/// Posterior quantities of one input under the unconditioned model, in
/// internal units. `v = L⁻¹ k_X(x)`, so the latent posterior covariance of two
/// inputs is `k(a, b) - v_a · v_b`.
#[derive(Debug, Clone)]
pub struct PointFeatures {
    pub x: Vec<f64>,
    pub mean: f64,
    pub v: DVector<f64>,
    /// Gradient of `mean` with respect to `x` (empty when not requested).
    pub dmean: Vec<f64>,
    /// Jacobian of `v` with respect to `x`, `n × d` (when requested).
    pub dv: Option<DMatrix<f64>>,
}

/// A fitted Gaussian process. Immutable; conditioning returns a new model.
#[derive(Debug, Clone)]
pub struct GpModel {
    inputs: Vec<Vec<f64>>,
    targets: Vec<f64>,
    transform: OutputTransform,
    /// Constant prior mean in internal units.
    mean_constant: f64,
    params: KernelParams,
    jitter: f64,
    chol: DMatrix<f64>,
    alpha: DVector<f64>,
}

fn cholesky_with_jitter(
    inputs: &[Vec<f64>],
    params: &KernelParams,
    min_jitter: f64,
) -> Result<(DMatrix<f64>, f64)> {
    let n = inputs.len();
    let base = DMatrix::from_fn(n, n, |i, j| params.k(&inputs[i], &inputs[j]));
    let mut last = 0.0;
    for &extra in JITTER_LADDER.iter().filter(|&&j| j >= min_jitter) {
        last = extra;
        let mut k = base.clone();
        for i in 0..n {
            k[(i, i)] += params.noise_variance + extra;
        }
        if let Some(c) = k.cholesky() {
            return Ok((c.unpack(), extra));
        }
    }
    Err(Error::FitFailure { jitter: last })
}

impl GpModel {
    /// Build a model with fixed hyperparameters. `mean_constant` is in
    /// internal units.
    pub fn from_params(
        inputs: Vec<Vec<f64>>,
        targets: Vec<f64>,
        transform: OutputTransform,
        mean_constant: f64,
        params: KernelParams,
    ) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(Error::DimensionMismatch { expected: inputs.len(), got: targets.len() });
        }
        if let Some(bad) = inputs.iter().find(|x| x.len() != params.dim()) {
            return Err(Error::DimensionMismatch { expected: params.dim(), got: bad.len() });
        }
        let (chol, jitter) = cholesky_with_jitter(&inputs, &params, 0.0)?;
        let mut model = Self {
            inputs,
            targets,
            transform,
            mean_constant,
            params,
            jitter,
            chol,
            alpha: DVector::zeros(0),
        };
        model.alpha = model.solve_alpha();
        Ok(model)
    }

    fn solve_alpha(&self) -> DVector<f64> {
        let r = DVector::from_iterator(
            self.n(),
            self.targets.iter().map(|&y| self.transform.forward(y) - self.mean_constant),
        );
        let w = self.chol.solve_lower_triangular(&r).expect("non-singular factor");
        self.chol.tr_solve_lower_triangular(&w).expect("non-singular factor")
    }

    pub fn n(&self) -> usize {
        self.inputs.len()
    }

    pub fn dim(&self) -> usize {
        self.params.dim()
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn transform(&self) -> OutputTransform {
        self.transform
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Extra diagonal jitter the factorization needed beyond the noise.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Constant prior mean in target units.
    pub fn mean_constant(&self) -> f64 {
        self.transform.inverse(self.mean_constant)
    }

    /// Prior standard deviation in target units.
    pub fn prior_stddev(&self) -> f64 {
        self.transform.scale * self.params.outputscale.sqrt()
    }

    pub fn cholesky_factor(&self) -> &DMatrix<f64> {
        &self.chol
    }

    /// Training covariance `K(X, X) + (noise + jitter) I` in internal units.
    pub fn train_covariance(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut k = DMatrix::from_fn(n, n, |i, j| self.params.k(&self.inputs[i], &self.inputs[j]));
        for i in 0..n {
            k[(i, i)] += self.params.noise_variance + self.jitter;
        }
        k
    }

    /// Total diagonal added to the kernel for one observation.
    pub fn observation_variance(&self) -> f64 {
        self.params.noise_variance + self.jitter
    }

    fn kvec(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.n(), self.inputs.iter().map(|xi| self.params.k(x, xi)))
    }

    /// Latent posterior at `x` (observation noise excluded from `stddev`).
    pub fn posterior(&self, x: &[f64]) -> PosteriorSummary {
        let f = self.features(x, false);
        self.summary_from(&f)
    }

    pub(crate) fn summary_from(&self, f: &PointFeatures) -> PosteriorSummary {
        let var = self.params.outputscale - f.v.dot(&f.v);
        PosteriorSummary {
            mean: self.transform.inverse(f.mean),
            stddev: self.transform.scale * var.max(0.0).sqrt(),
        }
    }

    /// Posterior together with the gradients of mean and stddev in `x`.
    pub fn posterior_with_grad(&self, x: &[f64]) -> (PosteriorSummary, Vec<f64>, Vec<f64>) {
        let f = self.features(x, true);
        let s = self.summary_from(&f);
        let scale = self.transform.scale;
        let dmean = f.dmean.iter().map(|g| scale * g).collect();
        let dv = f.dv.as_ref().expect("requested");
        let sd_internal = s.stddev / scale;
        let dstd = if sd_internal > 0.0 {
            // d sqrt(s - v·v) = -(dvᵀ v) / sqrt(...)
            let dvt_v = dv.tr_mul(&f.v);
            dvt_v.iter().map(|g| -scale * g / sd_internal).collect()
        } else {
            vec![0.0; self.dim()]
        };
        (s, dmean, dstd)
    }

    /// Internal-unit features of `x` used by multi-point computations.
    pub fn features(&self, x: &[f64], with_grad: bool) -> PointFeatures {
        let d = self.dim();
        let k = self.kvec(x);
        let v = self.chol.solve_lower_triangular(&k).expect("non-singular factor");
        let mean = self.mean_constant + k.dot(&self.alpha);
        if !with_grad {
            return PointFeatures { x: x.to_vec(), mean, v, dmean: Vec::new(), dv: None };
        }
        let n = self.n();
        let mut dk = DMatrix::zeros(n, d);
        let mut row = vec![0.0; d];
        for (i, xi) in self.inputs.iter().enumerate() {
            self.params.k_grad_a(x, xi, &mut row);
            for j in 0..d {
                dk[(i, j)] = row[j];
            }
        }
        let dmean = dk.tr_mul(&self.alpha).iter().copied().collect();
        let dv = self.chol.solve_lower_triangular(&dk).expect("non-singular factor");
        PointFeatures { x: x.to_vec(), mean, v, dmean, dv: Some(dv) }
    }

    /// Posterior covariance of two inputs in internal units, with its
    /// gradients in each argument when both carry Jacobians.
    pub fn feature_cov(&self, a: &PointFeatures, b: &PointFeatures) -> (f64, Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let prior = self.params.k(&a.x, &b.x);
        let val = prior - a.v.dot(&b.v);
        match (&a.dv, &b.dv) {
            (Some(dva), Some(dvb)) => {
                let mut ga = vec![0.0; d];
                self.params.k_grad_a(&a.x, &b.x, &mut ga);
                let gb: Vec<f64> = ga.iter().map(|g| -g).collect();
                let ta = dva.tr_mul(&b.v);
                let tb = dvb.tr_mul(&a.v);
                let ga = ga.iter().zip(ta.iter()).map(|(g, t)| g - t).collect();
                let gb = gb.iter().zip(tb.iter()).map(|(g, t)| g - t).collect();
                (val, ga, gb)
            }
            _ => (val, Vec::new(), Vec::new()),
        }
    }

    /// Exact Bayes update on one observation `(x, y)` (target units) with
    /// frozen hyperparameters. Extends the Cholesky factor by one row and
    /// falls back to a full refactorization if the extension breaks down.
    pub fn condition(&self, x: &[f64], y: f64) -> GpModel {
        let n = self.n();
        let k = self.kvec(x);
        let l = self.chol.solve_lower_triangular(&k).expect("non-singular factor");
        let diag2 = self.params.k(x, x) + self.observation_variance() - l.dot(&l);

        let mut inputs = self.inputs.clone();
        inputs.push(x.to_vec());
        let mut targets = self.targets.clone();
        targets.push(y);

        let tol = 1e-10 * (self.params.outputscale + self.observation_variance());
        let (chol, jitter) = if diag2 > tol {
            let mut c = DMatrix::zeros(n + 1, n + 1);
            c.view_mut((0, 0), (n, n)).copy_from(&self.chol);
            for j in 0..n {
                c[(n, j)] = l[j];
            }
            c[(n, n)] = diag2.sqrt();
            (c, self.jitter)
        } else {
            match cholesky_with_jitter(&inputs, &self.params, self.jitter) {
                Ok(r) => r,
                Err(_) => {
                    // Last resort: keep the extension with a clamped pivot.
                    let mut c = DMatrix::zeros(n + 1, n + 1);
                    c.view_mut((0, 0), (n, n)).copy_from(&self.chol);
                    for j in 0..n {
                        c[(n, j)] = l[j];
                    }
                    c[(n, n)] = tol.sqrt();
                    (c, self.jitter)
                }
            }
        };
        let mut model = GpModel {
            inputs,
            targets,
            transform: self.transform,
            mean_constant: self.mean_constant,
            params: self.params.clone(),
            jitter,
            chol,
            alpha: DVector::zeros(0),
        };
        model.alpha = model.solve_alpha();
        model
    }
}

/// Reparameterized posterior draw `mean + stddev · base_noise`.
#[inline]
pub fn sample_reparam(summary: PosteriorSummary, base_noise: f64) -> f64 {
    summary.mean + summary.stddev * base_noise
}

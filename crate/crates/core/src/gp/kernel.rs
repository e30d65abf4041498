//! Matérn 5/2 covariance with per-dimension lengthscales (ARD).

const SQRT5: f64 = 2.236_067_977_499_79;

#[derive(Debug, Clone, PartialEq)]
pub struct KernelParams {
    pub lengthscales: Vec<f64>,
    /// Signal variance; the kernel value at distance zero.
    pub outputscale: f64,
    pub noise_variance: f64,
}

/// Unit-variance Matérn 5/2 correlation at scaled distance `r`.
#[inline]
pub fn matern52(r: f64) -> f64 {
    let sr = SQRT5 * r;
    (1.0 + sr + sr * sr / 3.0) * (-sr).exp()
}

/// `-(1/r) dρ/dr`, finite at `r = 0`.
#[inline]
fn matern52_dr_over_r(r: f64) -> f64 {
    let sr = SQRT5 * r;
    (5.0 / 3.0) * (1.0 + sr) * (-sr).exp()
}

impl KernelParams {
    pub fn dim(&self) -> usize {
        self.lengthscales.len()
    }

    #[inline]
    pub fn scaled_dist(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .zip(&self.lengthscales)
            .map(|((x, y), l)| ((x - y) / l).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    #[inline]
    pub fn k(&self, a: &[f64], b: &[f64]) -> f64 {
        self.outputscale * matern52(self.scaled_dist(a, b))
    }

    /// Kernel value and its gradient with respect to the first argument.
    pub fn k_grad_a(&self, a: &[f64], b: &[f64], grad: &mut [f64]) -> f64 {
        let r = self.scaled_dist(a, b);
        let c = -self.outputscale * matern52_dr_over_r(r);
        for (i, gi) in grad.iter_mut().enumerate() {
            let l = self.lengthscales[i];
            *gi = c * (a[i] - b[i]) / (l * l);
        }
        self.outputscale * matern52(r)
    }

    /// Derivative of the kernel with respect to `ln(lengthscale_i)` given the
    /// scaled distance and the squared coordinate difference in dimension `i`.
    #[inline]
    pub(crate) fn dk_dlog_lengthscale(&self, r: f64, sq_diff: f64, i: usize) -> f64 {
        let l = self.lengthscales[i];
        self.outputscale * matern52_dr_over_r(r) * sq_diff / (l * l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params() -> KernelParams {
        KernelParams { lengthscales: vec![0.3, 0.7], outputscale: 2.5, noise_variance: 1e-6 }
    }

    #[test]
    fn value_at_zero_is_outputscale() {
        let p = params();
        assert_eq!(p.k(&[0.2, 0.4], &[0.2, 0.4]), 2.5);
    }

    #[test]
    fn psd_on_random_set() {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<Vec<f64>> = (0..20).map(|_| vec![rng.random(), rng.random()]).collect();
        let k = DMatrix::from_fn(20, 20, |i, j| p.k(&pts[i], &pts[j]));
        assert!((&k - k.transpose()).abs().max() == 0.0);
        let eig = k.symmetric_eigenvalues();
        assert!(eig.min() >= -1e-8 * p.outputscale, "{}", eig.min());
    }

    #[test]
    fn gradient_matches_fd() {
        let p = params();
        let a = [0.31, 0.52];
        let b = [0.12, 0.9];
        let mut g = [0.0; 2];
        p.k_grad_a(&a, &b, &mut g);
        for i in 0..2 {
            let h = 1e-6;
            let mut ap = a;
            let mut am = a;
            ap[i] += h;
            am[i] -= h;
            let fd = (p.k(&ap, &b) - p.k(&am, &b)) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-7, "{fd} vs {}", g[i]);
        }
        // Smooth at coincident points.
        p.k_grad_a(&a, &a, &mut g);
        assert_eq!(g, [0.0, 0.0]);
    }

    #[test]
    fn lengthscale_derivative_matches_fd() {
        let p = params();
        let a = [0.31, 0.52];
        let b = [0.12, 0.9];
        let r = p.scaled_dist(&a, &b);
        for i in 0..2 {
            let h: f64 = 1e-6;
            let mut pp = p.clone();
            pp.lengthscales[i] *= h.exp();
            let mut pm = p.clone();
            pm.lengthscales[i] *= (-h).exp();
            let fd = (pp.k(&a, &b) - pm.k(&a, &b)) / (2.0 * h);
            let an = p.dk_dlog_lengthscale(r, (a[i] - b[i]).powi(2), i);
            assert!((fd - an).abs() < 1e-7);
        }
    }
}

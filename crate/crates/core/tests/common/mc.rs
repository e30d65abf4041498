//! Monte-Carlo estimators of the closed-form acquisition values.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Posterior moments and budget for one Monte-Carlo comparison.
#[derive(Debug, Clone, Copy)]
pub struct McConfig {
    pub mean: f64,
    pub sd: f64,
    pub incumbent: f64,
    pub mean_lnc: f64,
    pub sd_lnc: f64,
    pub remaining: f64,
}

impl McConfig {
    /// Incumbent and budget are placed within a few posterior spreads, so
    /// both events have non-negligible probability.
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let mean = rng.random_range(-2.0..2.0);
        let sd = rng.random_range(0.05..2.0);
        let mean_lnc = rng.random_range(-1.5..1.5);
        let sd_lnc = rng.random_range(0.05..1.2);
        Self {
            mean,
            sd,
            incumbent: mean + sd * rng.random_range(-2.0..2.0),
            mean_lnc,
            sd_lnc,
            remaining: (mean_lnc + sd_lnc * rng.random_range(-2.0..2.0)).exp(),
        }
    }
}

/// Sample mean and standard error of `f` over `n` draws of `(Y, Z)`.
fn estimate<R: Rng>(rng: &mut R, c: &McConfig, n: usize, f: impl Fn(f64, f64) -> f64) -> (f64, f64) {
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let ey: f64 = StandardNormal.sample(rng);
        let ez: f64 = StandardNormal.sample(rng);
        let v = f(c.mean + c.sd * ey, (c.mean_lnc + c.sd_lnc * ez).exp());
        s += v;
        s2 += v * v;
    }
    let m = s / n as f64;
    let var = (s2 / n as f64 - m * m).max(0.0) * n as f64 / (n - 1) as f64;
    (m, (var / n as f64).sqrt())
}

/// `E[(Y − inc)⁺ 1{Z ≤ remaining}]`.
pub fn q1<R: Rng>(rng: &mut R, c: &McConfig, n: usize) -> (f64, f64) {
    estimate(rng, c, n, |y, z| if z <= c.remaining { (y - c.incumbent).max(0.0) } else { 0.0 })
}

/// `E[(Y − inc)⁺ / Z^ν]`.
pub fn ei_puc_cc<R: Rng>(rng: &mut R, c: &McConfig, nu: f64, n: usize) -> (f64, f64) {
    estimate(rng, c, n, |y, z| (y - c.incumbent).max(0.0) / z.powf(nu))
}

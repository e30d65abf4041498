//! GP core property suites, shared by the integration tests and the
//! acceptance run. Each returns a description of the first violation.

use super::{dense_posterior, DenseModel};
use budgetbo::gp::{fit_map, GpModel, KernelParams, OutputTransform, PriorConfig};
use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<(), String>;

/// Default priors with the noise variance held at the floor.
pub fn floor_priors() -> PriorConfig {
    PriorConfig { learn_noise: false, ..PriorConfig::default() }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn smooth_data(rng: &mut ChaCha8Rng, n: usize, d: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let xs: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random()).collect()).collect();
    let ys = xs.iter().map(|x| x.iter().enumerate().map(|(i, v)| ((3.0 + i as f64) * v).sin()).sum()).collect();
    (xs, ys)
}

/// Fitted models reproduce their training targets and agree with a dense
/// solve at arbitrary points.
pub fn interpolation() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for d in 1..=3 {
        let (xs, ys) = smooth_data(&mut rng, 6 + 2 * d, d);
        let model = fit_map(&xs, &ys, &floor_priors()).map_err(|e| e.to_string())?;
        // Latent variance at a datum never exceeds the observation variance.
        let bound = model.transform().scale * model.observation_variance().sqrt() * (1.0 + 1e-9);
        for (x, &y) in xs.iter().zip(&ys) {
            let p = model.posterior(x);
            ensure((p.mean - y).abs() <= 1e-3 && p.stddev <= bound, || {
                format!("d={d}: posterior at training input ({}, {}) vs target {y}", p.mean, p.stddev)
            })?;
        }
    }
    let model = GpModel::from_params(
        vec![vec![0.1], vec![0.45], vec![0.8]],
        vec![0.3, -0.5, 1.2],
        OutputTransform::IDENTITY,
        0.2,
        KernelParams { lengthscales: vec![0.25], outputscale: 1.3, noise_variance: 1e-6 },
    )
    .map_err(|e| e.to_string())?;
    let dense = DenseModel::of(&model);
    for i in 0..=20 {
        let x = [i as f64 / 20.0];
        let (m, v) = dense.moments(&x);
        let p = model.posterior(&x);
        ensure((p.mean - m).abs() <= 1e-10, || format!("dense mean mismatch at {x:?}: {} vs {m}", p.mean))?;
        ensure((p.stddev - v.sqrt()).abs() <= 1e-7, || format!("dense stddev mismatch at {x:?}"))?;
    }
    // Duplicated noise-free point.
    let model = fit_map(&[vec![0.4], vec![0.4]], &[0.7, 0.7], &floor_priors()).map_err(|e| e.to_string())?;
    let p = model.posterior(&[0.4]);
    ensure((p.mean - 0.7).abs() <= 1e-3, || format!("duplicate point mean {}", p.mean))
}

/// Far from the data the posterior returns to the prior.
pub fn prior_reversion() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for d in 1..=2 {
        let (xs, ys) = smooth_data(&mut rng, 8, d);
        let model = fit_map(&xs, &ys, &PriorConfig::default()).map_err(|e| e.to_string())?;
        let lmax = model.params().lengthscales.iter().copied().fold(0.0, f64::max);
        let far = vec![1.0 + 12.0 * lmax; d];
        let p = model.posterior(&far);
        let m0 = model.mean_constant();
        let s0 = model.prior_stddev();
        ensure((p.mean - m0).abs() <= 1e-3 * m0.abs().max(s0), || format!("far mean {} vs {m0}", p.mean))?;
        ensure((p.stddev - s0).abs() <= 1e-3 * s0, || format!("far stddev {} vs {s0}", p.stddev))?;
    }
    Ok(())
}

fn rebuilt(model: &GpModel, extra: &[(Vec<f64>, f64)]) -> GpModel {
    let mut xs = model.inputs().to_vec();
    let mut ys = model.targets().to_vec();
    for (x, y) in extra {
        xs.push(x.clone());
        ys.push(*y);
    }
    let t = model.transform();
    let mut p = model.params().clone();
    p.noise_variance = model.observation_variance();
    GpModel::from_params(xs, ys, t, t.forward(model.mean_constant()), p).expect("refactorization")
}

/// Rank-one conditioning agrees with refactorization, is order-independent
/// and never increases variance.
pub fn conditioning() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for trial in 0..10 {
        let d = 1 + trial % 3;
        let (xs, ys) = smooth_data(&mut rng, 7, d);
        // Alternate learned and floor noise; the reproduction check below
        // only applies at the floor.
        let at_floor = trial % 2 == 0;
        let priors = if at_floor { floor_priors() } else { PriorConfig::default() };
        let model = fit_map(&xs, &ys, &priors).map_err(|e| e.to_string())?;
        let a: Vec<f64> = (0..d).map(|_| rng.random()).collect();
        let b: Vec<f64> = (0..d).map(|_| rng.random()).collect();
        let (ya, yb) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let ab = model.condition(&a, ya).condition(&b, yb);
        let ba = model.condition(&b, yb).condition(&a, ya);
        let full = rebuilt(&model, &[(a.clone(), ya), (b.clone(), yb)]);
        let at_mean = model.condition(&a, model.posterior(&a).mean);
        for _ in 0..10 {
            let q: Vec<f64> = (0..d).map(|_| rng.random()).collect();
            let (p0, p1, p2, p3) = (model.posterior(&q), ab.posterior(&q), ba.posterior(&q), full.posterior(&q));
            ensure((p1.mean - p3.mean).abs() <= 1e-8 && (p1.stddev - p3.stddev).abs() <= 1e-8, || {
                format!("trial {trial}: update ({}, {}) vs refit ({}, {})", p1.mean, p1.stddev, p3.mean, p3.stddev)
            })?;
            ensure((p1.mean - p2.mean).abs() <= 1e-8 && (p1.stddev - p2.stddev).abs() <= 1e-8, || {
                format!("trial {trial}: order dependence at {q:?}")
            })?;
            ensure(p1.stddev <= p0.stddev + 1e-12, || format!("trial {trial}: variance grew at {q:?}"))?;
            let pm = at_mean.posterior(&q);
            ensure((pm.mean - p0.mean).abs() <= 1e-6, || format!("trial {trial}: mean moved after conditioning on it"))?;
        }
        ensure(at_mean.posterior(&a).stddev < model.posterior(&a).stddev, || {
            format!("trial {trial}: stddev did not drop at the conditioned point")
        })?;
        let c = model.condition(&a, ya);
        ensure(!at_floor ||(c.posterior(&a).mean - ya).abs() <= 1e-3, || format!("trial {trial}: conditioned value not reproduced"))?;
    }
    Ok(())
}

/// Hyperparameters do not depend on the order of the training set.
pub fn permutation_invariance() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for d in 1..=3 {
        let (xs, ys) = smooth_data(&mut rng, 9, d);
        let base = fit_map(&xs, &ys, &PriorConfig::default()).map_err(|e| e.to_string())?;
        for _ in 0..3 {
            let mut idx: Vec<usize> = (0..xs.len()).collect();
            idx.shuffle(&mut rng);
            let px: Vec<Vec<f64>> = idx.iter().map(|&i| xs[i].clone()).collect();
            let py: Vec<f64> = idx.iter().map(|&i| ys[i]).collect();
            let m = fit_map(&px, &py, &PriorConfig::default()).map_err(|e| e.to_string())?;
            let (p, q) = (base.params(), m.params());
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-10 * a.abs().max(1.0);
            ensure(
                p.lengthscales.iter().zip(&q.lengthscales).all(|(a, b)| close(*a, *b))
                    && close(p.outputscale, q.outputscale)
                    && close(p.noise_variance, q.noise_variance),
                || format!("d={d}: {p:?} vs {q:?}"),
            )?;
        }
    }
    Ok(())
}

/// Dense-solve posterior of `model` at `x`, exposed for direct use.
pub fn dense_at(model: &GpModel, x: &[f64]) -> (f64, f64) {
    let dm = DenseModel::of(model);
    let (m, v) = dense_posterior(&dm.xs, &dm.ys, &dm.params, dm.mean, dm.obs_var, x);
    (dm.t.inverse(m), dm.t.scale * v.sqrt())
}

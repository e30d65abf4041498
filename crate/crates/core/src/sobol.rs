//! Owen-scrambled Sobol points in the unit cube.

use rand::Rng;

/// Largest dimension the underlying direction-number table supports.
pub const MAX_DIM: usize = sobol_burley::NUM_DIMENSIONS as usize;

/// `n` scrambled Sobol points in `[0, 1)^dim`. Dimensions beyond the table
/// fall back to uniform draws from `rng`.
pub fn points<R: Rng + ?Sized>(n: usize, dim: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let seed: u32 = rng.random();
    (0..n)
        .map(|i| {
            (0..dim)
                .map(|j| {
                    if j < MAX_DIM {
                        sobol_burley::sample(i as u32, j as u32, seed) as f64
                    } else {
                        rng.random::<f64>()
                    }
                })
                .collect()
        })
        .collect()
}

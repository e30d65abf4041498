use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};

use super::ProblemSpec;

/// Objective and cost tabulated on a rectangular grid, interpolated
/// multilinearly.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub sizes: Vec<usize>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Row-major `(y, z)` per vertex, last axis fastest.
    pub values: Vec<(f64, f64)>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Tabular(msg.into())
}

impl Grid {
    /// Parse `dims k sizes n₁ … n_k bounds l₁ u₁ … l_k u_k` followed by one
    /// `y z` line per vertex.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| bad("empty file"))?;
        let tok: Vec<&str> = header.split_whitespace().collect();
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("not a number: {s:?}")));
        let int = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("not an integer: {s:?}")));

        if tok.first() != Some(&"dims") {
            return Err(bad("header must start with `dims`"));
        }
        let k = int(tok.get(1).ok_or_else(|| bad("missing dimension count"))?)?;
        if k == 0 {
            return Err(bad("zero dimensions"));
        }
        if tok.len() != 2 + 1 + k + 1 + 2 * k || tok[2] != "sizes" || tok[3 + k] != "bounds" {
            return Err(bad("header does not match `dims k sizes n.. bounds l u ..`"));
        }
        let sizes = tok[3..3 + k].iter().map(|s| int(s)).collect::<Result<Vec<_>>>()?;
        if sizes.iter().any(|&n| n < 2) {
            return Err(bad("every axis needs at least two vertices"));
        }
        let b = tok[4 + k..].iter().map(|s| num(s)).collect::<Result<Vec<_>>>()?;
        let lower: Vec<f64> = b.iter().step_by(2).copied().collect();
        let upper: Vec<f64> = b.iter().skip(1).step_by(2).copied().collect();
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u) || !l.is_finite() || !u.is_finite()) {
            return Err(bad("bounds must be finite with lower < upper"));
        }

        let total: usize = sizes.iter().product();
        let mut values = Vec::with_capacity(total);
        for line in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(bad(format!("expected `y z`, got {line:?}")));
            }
            let (y, z) = (num(parts[0])?, num(parts[1])?);
            if !(z > 0.0) || !y.is_finite() || !z.is_finite() {
                return Err(bad(format!("invalid vertex values {line:?}")));
            }
            values.push((y, z));
        }
        if values.len() != total {
            return Err(bad(format!("grid needs {total} vertices, found {}", values.len())));
        }
        Ok(Self { sizes, lower, upper, values })
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    /// Multilinear interpolation of `(y, z)` at `x` (clamped to the box).
    pub fn interpolate(&self, x: &[f64]) -> (f64, f64) {
        let k = self.dim();
        // Cell index and fractional offset per axis.
        let mut base = vec![0usize; k];
        let mut frac = vec![0.0; k];
        for j in 0..k {
            let cells = (self.sizes[j] - 1) as f64;
            let t = ((x[j] - self.lower[j]) / (self.upper[j] - self.lower[j])).clamp(0.0, 1.0) * cells;
            let i = (t.floor() as usize).min(self.sizes[j] - 2);
            base[j] = i;
            frac[j] = t - i as f64;
        }
        let (mut y, mut z) = (0.0, 0.0);
        for corner in 0..(1usize << k) {
            let mut w = 1.0;
            let mut idx = 0;
            for j in 0..k {
                let bit = (corner >> (k - 1 - j)) & 1;
                w *= if bit == 1 { frac[j] } else { 1.0 - frac[j] };
                idx = idx * self.sizes[j] + base[j] + bit;
            }
            if w != 0.0 {
                let (vy, vz) = self.values[idx];
                y += w * vy;
                z += w * vz;
            }
        }
        (y, z)
    }

    /// Best tabulated objective and its vertex.
    fn best_vertex(&self) -> (f64, Vec<f64>) {
        let (mut best, mut at) = (f64::NEG_INFINITY, 0);
        for (i, &(y, _)) in self.values.iter().enumerate() {
            if y > best {
                best = y;
                at = i;
            }
        }
        let mut coords = vec![0.0; self.dim()];
        let mut rest = at;
        for j in (0..self.dim()).rev() {
            let i = rest % self.sizes[j];
            rest /= self.sizes[j];
            coords[j] = self.lower[j] + (self.upper[j] - self.lower[j]) * i as f64 / (self.sizes[j] - 1) as f64;
        }
        (best, coords)
    }
}

/// Load a tabulated problem. The best tabulated value is its known maximum,
/// which is exact because interpolation never exceeds the vertex values.
pub fn load_tabular(path: &Path) -> Result<ProblemSpec> {
    let text = std::fs::read_to_string(path)?;
    let grid = Arc::new(Grid::parse(&text)?);
    let (best, argbest) = grid.best_vertex();
    let name = path.file_stem().map_or_else(|| "tabular".to_string(), |s| s.to_string_lossy().into_owned());
    let (g1, g2) = (Arc::clone(&grid), Arc::clone(&grid));
    Ok(ProblemSpec {
        name,
        lower: grid.lower.clone(),
        upper: grid.upper.clone(),
        objective: Arc::new(move |x| g1.interpolate(x).0),
        cost: Arc::new(move |x| g2.interpolate(x).1),
        known_max: Some(best),
        known_argmax: Some(argbest),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_example() {
        let g = Grid::parse("dims 1 sizes 2 bounds 0 1\n1 1\n3 2\n").unwrap();
        assert_eq!(g.interpolate(&[0.5]), (2.0, 1.5));
        assert_eq!(g.interpolate(&[0.0]), (1.0, 1.0));
        assert_eq!(g.interpolate(&[1.0]), (3.0, 2.0));
    }

    #[test]
    fn malformed_inputs() {
        for text in [
            "",
            "dim 1 sizes 2 bounds 0 1\n1 1\n3 2",
            "dims 1 sizes 2 bounds 0 1\n1 1\n",
            "dims 1 sizes 2 bounds 1 0\n1 1\n3 2",
            "dims 1 sizes 1 bounds 0 1\n1 1",
            "dims 2 sizes 2 bounds 0 1\n1 1\n3 2",
            "dims 1 sizes 2 bounds 0 1\n1 0\n3 2",
            "dims 1 sizes 2 bounds 0 1\n1 x\n3 2",
        ] {
            assert!(Grid::parse(text).is_err(), "{text:?}");
        }
    }
}

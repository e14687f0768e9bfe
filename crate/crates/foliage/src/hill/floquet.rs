use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SpectralError;

/// (U'f)_theta = sum_m e^{-i theta m} f(x + m a) on a uniform theta grid over
/// [0, 2 pi), for f supported on |m| <= truncation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloquetTransform {
    pub lattice: f64,
    pub truncation: i64,
    pub thetas: Vec<f64>,
    pub values: Vec<Complex64>,
}

/// `f` lists (m, f(x + m a)).
pub fn floquet_transform(
    f: &[(i64, Complex64)],
    lattice: f64,
    grid: usize,
    truncation: i64,
) -> Result<FloquetTransform, SpectralError> {
    if let Some(&(m, _)) = f.iter().find(|(m, _)| m.abs() > truncation) {
        return Err(SpectralError::SupportExceedsTruncation { index: m, truncation });
    }
    // Exact inversion by the theta average needs more nodes than distinct indices.
    if (grid as i64) < 2 * truncation + 1 {
        return Err(SpectralError::ThetaGridTooCoarse { grid, truncation });
    }
    let thetas: Vec<f64> = (0..grid).map(|j| 2.0 * PI * j as f64 / grid as f64).collect();
    let values = thetas
        .iter()
        .map(|&t| f.iter().map(|&(m, c)| c * Complex64::from_polar(1.0, -t * m as f64)).sum())
        .collect();
    Ok(FloquetTransform { lattice, truncation, thetas, values })
}

/// f(x + m a) = (1 / 2 pi) int e^{i theta m} (U'f)_theta d theta, by the
/// uniform-grid average, for |m| <= truncation.
pub fn floquet_inverse(t: &FloquetTransform) -> Vec<(i64, Complex64)> {
    let n = t.values.len() as f64;
    (-t.truncation..=t.truncation)
        .map(|m| {
            let s: Complex64 = t
                .thetas
                .iter()
                .zip(&t.values)
                .map(|(&th, &v)| v * Complex64::from_polar(1.0, th * m as f64))
                .sum();
            (m, s / n)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_transforms_to_one() {
        let t = floquet_transform(&[(0, Complex64::new(1.0, 0.0))], 1.0, 16, 3).unwrap();
        assert!(t.values.iter().all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn support_and_grid_checked() {
        let f = [(5, Complex64::new(1.0, 0.0))];
        assert!(matches!(
            floquet_transform(&f, 1.0, 64, 4),
            Err(SpectralError::SupportExceedsTruncation { index: 5, truncation: 4 })
        ));
        assert!(matches!(floquet_transform(&f, 1.0, 8, 5), Err(SpectralError::ThetaGridTooCoarse { .. })));
    }
}

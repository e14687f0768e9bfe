use serde::{Deserialize, Serialize};

use super::potential::PeriodicPotential;
use super::SpectralError;

const MAX_STEPS: usize = 1_000_000;

/// Transfer matrix of -y'' + V y = E y over one period, columns are the
/// solutions with (y, y') = (1, 0) and (0, 1) at x = 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonodromyResult {
    pub energy: f64,
    pub matrix: [[f64; 2]; 2],
    pub discriminant: f64,
    /// dDelta/dE from the variational system.
    pub derivative: f64,
    pub steps: usize,
    pub tol: f64,
}

impl MonodromyResult {
    pub fn determinant(&self) -> f64 {
        let m = &self.matrix;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }
}

type State = [f64; 8];

// Layout: (y1, y1', y2, y2', z1, z1', z2, z2') with z = dy/dE.
fn rhs(q: f64, s: &State) -> State {
    [s[1], q * s[0], s[3], q * s[2], s[5], q * s[4] - s[0], s[7], q * s[6] - s[2]]
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates the fundamental system and its E-derivative across one period.
pub fn monodromy(v: &PeriodicPotential, energy: f64, tol: f64) -> Result<MonodromyResult, SpectralError> {
    if !(tol >= 1e-12) || !energy.is_finite() {
        return Err(SpectralError::Invalid(format!("tolerance {tol} below 1e-12 or energy not finite")));
    }
    let t_end = v.period;
    let q = |x: f64| v.eval(x) - energy;
    let mut s: State = [1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0];
    let mut x = 0.0;
    let mut h = t_end / (16.0 * (1.0 + energy.abs().sqrt() * t_end)).max(1.0);
    let mut steps = 0usize;
    let mut k = [[0.0; 8]; 7];
    k[0] = rhs(q(x), &s);
    while x < t_end {
        if steps >= MAX_STEPS || h < 1e-14 * t_end {
            return Err(SpectralError::IntegratorStalled { x, h });
        }
        let last = x + h >= t_end;
        if last {
            h = t_end - x;
        }
        for i in 1..7 {
            let mut st = s;
            for (j, kj) in k.iter().enumerate().take(i) {
                let a = A[i][j];
                if a != 0.0 {
                    for c in 0..8 {
                        st[c] += h * a * kj[c];
                    }
                }
            }
            k[i] = rhs(q(x + C[i] * h), &st);
        }
        let mut next = s;
        let mut err = 0.0f64;
        for c in 0..8 {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for i in 0..7 {
                d5 += B5[i] * k[i][c];
                d4 += B4[i] * k[i][c];
            }
            next[c] = s[c] + h * d5;
            let scale = tol + tol * s[c].abs().max(next[c].abs());
            err = err.max((h * (d5 - d4)).abs() / scale);
        }
        steps += 1;
        if err <= 1.0 {
            x = if last { t_end } else { x + h };
            s = next;
            // First same as last: stage 7 is the derivative at the new point.
            k[0] = k[6];
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    let matrix = [[s[0], s[2]], [s[1], s[3]]];
    let result = MonodromyResult {
        energy,
        matrix,
        discriminant: s[0] + s[3],
        derivative: s[4] + s[7],
        steps,
        tol,
    };
    let det = result.determinant();
    let scale = (matrix[0][0] * matrix[1][1]).abs() + (matrix[0][1] * matrix[1][0]).abs();
    if (det - 1.0).abs() > 1e-8 * scale.max(1.0) {
        return Err(SpectralError::WronskianDrift { det });
    }
    Ok(result)
}

pub fn discriminant_with_derivative(
    v: &PeriodicPotential,
    energy: f64,
    tol: f64,
) -> Result<(f64, f64), SpectralError> {
    monodromy(v, energy, tol).map(|m| (m.discriminant, m.derivative))
}

/// Delta'(E) at the default integrator tolerance 1e-10.
pub fn discriminant_derivative(v: &PeriodicPotential, energy: f64) -> Result<f64, SpectralError> {
    discriminant_with_derivative(v, energy, 1e-10).map(|r| r.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn free_discriminant() {
        let v = PeriodicPotential::zero(1.0);
        let m = monodromy(&v, PI * PI, 1e-10).unwrap();
        assert!((m.discriminant + 2.0).abs() < 1e-8);
        assert!((monodromy(&v, 0.0, 1e-10).unwrap().discriminant - 2.0).abs() < 1e-12);
        let d = discriminant_derivative(&v, PI * PI / 4.0).unwrap();
        assert!((d + 2.0 / PI).abs() < 1e-7);
    }

    #[test]
    fn rejects_tiny_tolerance() {
        assert!(monodromy(&PeriodicPotential::zero(1.0), 1.0, 1e-13).is_err());
    }
}

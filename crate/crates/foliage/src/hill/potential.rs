use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::SpectralError;

/// a cos(2 pi k x / T) + b sin(2 pi k x / T).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierTerm {
    pub k: u32,
    pub cos: f64,
    pub sin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialRepr {
    Fourier(Vec<FourierTerm>),
    /// Uniform samples over [0, T), interpolated by periodic cubic Hermite (Catmull-Rom).
    Samples(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicPotential {
    pub period: f64,
    pub repr: PotentialRepr,
}

impl PeriodicPotential {
    pub fn fourier(period: f64, terms: Vec<FourierTerm>) -> Result<Self, SpectralError> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(SpectralError::InvalidPotential("period must be positive".into()));
        }
        Ok(Self { period, repr: PotentialRepr::Fourier(terms) })
    }

    pub fn samples(period: f64, values: Vec<f64>) -> Result<Self, SpectralError> {
        if !(period > 0.0 && period.is_finite()) || values.len() < 4 {
            return Err(SpectralError::InvalidPotential("need a positive period and at least 4 samples".into()));
        }
        Ok(Self { period, repr: PotentialRepr::Samples(values) })
    }

    pub fn zero(period: f64) -> Self {
        Self { period, repr: PotentialRepr::Fourier(Vec::new()) }
    }

    pub fn constant(period: f64, c: f64) -> Self {
        Self { period, repr: PotentialRepr::Fourier(vec![FourierTerm { k: 0, cos: c, sin: 0.0 }]) }
    }

    /// a cos(2 pi x / T) on period T.
    pub fn cosine(period: f64, a: f64) -> Self {
        Self { period, repr: PotentialRepr::Fourier(vec![FourierTerm { k: 1, cos: a, sin: 0.0 }]) }
    }

    /// V(x) = 2 cos(x), period 2 pi.
    pub fn mathieu() -> Self {
        Self::cosine(2.0 * PI, 2.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.repr {
            PotentialRepr::Fourier(terms) => {
                let w = 2.0 * PI * x / self.period;
                terms
                    .iter()
                    .map(|t| {
                        if t.k == 0 {
                            t.cos
                        } else {
                            let (s, c) = (t.k as f64 * w).sin_cos();
                            t.cos * c + t.sin * s
                        }
                    })
                    .sum()
            }
            PotentialRepr::Samples(v) => {
                let n = v.len();
                let u = (x / self.period).rem_euclid(1.0) * n as f64;
                let i = (u.floor() as usize).min(n - 1);
                let t = u - i as f64;
                let p0 = v[(i + n - 1) % n];
                let p1 = v[i];
                let p2 = v[(i + 1) % n];
                let p3 = v[(i + 2) % n];
                let m1 = 0.5 * (p2 - p0);
                let m2 = 0.5 * (p3 - p1);
                let t2 = t * t;
                let t3 = t2 * t;
                (2.0 * t3 - 3.0 * t2 + 1.0) * p1
                    + (t3 - 2.0 * t2 + t) * m1
                    + (-2.0 * t3 + 3.0 * t2) * p2
                    + (t3 - t2) * m2
            }
        }
    }

    /// Upper bound on sup |V|.
    pub fn sup_norm_bound(&self) -> f64 {
        match &self.repr {
            PotentialRepr::Fourier(terms) => terms.iter().map(|t| t.cos.abs() + t.sin.abs()).sum(),
            PotentialRepr::Samples(v) => {
                // Dense evaluation plus a margin for variation between sub-samples.
                let n = v.len();
                let sub = 32;
                let dense = (0..n * sub)
                    .map(|i| self.eval(self.period * i as f64 / (n * sub) as f64).abs())
                    .fold(0.0f64, f64::max);
                let curv = (0..n)
                    .map(|i| (v[(i + 1) % n] - 2.0 * v[i] + v[(i + n - 1) % n]).abs())
                    .fold(0.0f64, f64::max);
                dense + curv / sub as f64
            }
        }
    }

    /// The same Fourier potential regarded as periodic with period m T.
    pub fn with_period_multiple(&self, m: u32) -> Option<Self> {
        match &self.repr {
            PotentialRepr::Fourier(terms) => Some(Self {
                period: self.period * m as f64,
                repr: PotentialRepr::Fourier(
                    terms.iter().map(|t| FourierTerm { k: t.k * m, ..*t }).collect(),
                ),
            }),
            PotentialRepr::Samples(_) => None,
        }
    }

    /// V + c.
    pub fn shifted(&self, c: f64) -> Self {
        match &self.repr {
            PotentialRepr::Fourier(terms) => {
                let mut terms = terms.clone();
                terms.push(FourierTerm { k: 0, cos: c, sin: 0.0 });
                Self { period: self.period, repr: PotentialRepr::Fourier(terms) }
            }
            PotentialRepr::Samples(v) => Self {
                period: self.period,
                repr: PotentialRepr::Samples(v.iter().map(|x| x + c).collect()),
            },
        }
    }

    fn fourier_map(&self) -> Option<Vec<(u32, f64, f64)>> {
        let PotentialRepr::Fourier(terms) = &self.repr else { return None };
        let mut acc: Vec<(u32, f64, f64)> = Vec::new();
        for t in terms {
            match acc.iter_mut().find(|e| e.0 == t.k) {
                Some(e) => {
                    e.1 += t.cos;
                    e.2 += if t.k == 0 { 0.0 } else { t.sin };
                }
                None => acc.push((t.k, t.cos, if t.k == 0 { 0.0 } else { t.sin })),
            }
        }
        Some(acc)
    }

    /// Upper bound on sup |V - W|: exact coefficient bound for Fourier pairs on
    /// commensurate periods, dense sampling otherwise.
    pub fn sup_distance(&self, other: &PeriodicPotential) -> f64 {
        let ratio = if self.period >= other.period {
            self.period / other.period
        } else {
            other.period / self.period
        };
        let m = ratio.round();
        if (ratio - m).abs() < 1e-12 && m >= 1.0 {
            let (a, b) = if self.period >= other.period {
                (self.clone(), other.with_period_multiple(m as u32))
            } else {
                (self.with_period_multiple(m as u32).unwrap_or_else(|| self.clone()), Some(other.clone()))
            };
            if let (Some(fa), Some(fb)) = (a.fourier_map(), b.and_then(|b| b.fourier_map())) {
                let mut keys: Vec<u32> = fa.iter().chain(&fb).map(|e| e.0).collect();
                keys.sort_unstable();
                keys.dedup();
                return keys
                    .iter()
                    .map(|&k| {
                        let x = fa.iter().find(|e| e.0 == k).map_or((0.0, 0.0), |e| (e.1, e.2));
                        let y = fb.iter().find(|e| e.0 == k).map_or((0.0, 0.0), |e| (e.1, e.2));
                        (x.0 - y.0).abs() + (x.1 - y.1).abs()
                    })
                    .sum();
            }
        }
        let span = self.period.max(other.period) * 4.0;
        let n = 65536;
        (0..n)
            .map(|i| {
                let x = span * i as f64 / n as f64;
                (self.eval(x) - other.eval(x)).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Periodic approximants V_n of a limit-periodic potential with tail bounds
/// tau_n >= sup |V - V_n|.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitPeriodicPotential {
    pub approximants: Vec<PeriodicPotential>,
    pub tails: Vec<f64>,
}

impl LimitPeriodicPotential {
    /// V_n(x) = sum_{k<=n} 4^-k cos(x / 2^k), period 2 pi 2^n, tau_n = 4^-n / 3.
    pub fn default_family(n_max: usize) -> Self {
        let approximants = (0..=n_max)
            .map(|n| {
                let terms = (0..=n)
                    .map(|k| FourierTerm { k: 1 << (n - k), cos: 0.25f64.powi(k as i32), sin: 0.0 })
                    .collect();
                PeriodicPotential { period: 2.0 * PI * (1u64 << n) as f64, repr: PotentialRepr::Fourier(terms) }
            })
            .collect();
        let tails = (0..=n_max).map(|n| 0.25f64.powi(n as i32) / 3.0).collect();
        Self { approximants, tails }
    }

    /// Consistency ||V_{n+1} - V_n|| <= tau_n + tau_{n+1} and period divisibility.
    pub fn check(&self) -> Result<(), SpectralError> {
        if self.approximants.len() != self.tails.len() || self.approximants.is_empty() {
            return Err(SpectralError::InvalidPotential("one tail bound per approximant required".into()));
        }
        for n in 0..self.approximants.len() - 1 {
            let (a, b) = (&self.approximants[n], &self.approximants[n + 1]);
            let r = b.period / a.period;
            if (r - r.round()).abs() > 1e-12 || r.round() < 1.0 {
                return Err(SpectralError::InvalidPotential(format!("period {n} does not divide period {}", n + 1)));
            }
            if a.sup_distance(b) > self.tails[n] + self.tails[n + 1] + 1e-12 {
                return Err(SpectralError::InvalidPotential(format!("tail bounds inconsistent at n = {n}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_and_bounded() {
        let v = PeriodicPotential::fourier(3.0, vec![
            FourierTerm { k: 1, cos: 0.5, sin: -0.2 },
            FourierTerm { k: 3, cos: 0.0, sin: 1.0 },
        ])
        .unwrap();
        let s = PeriodicPotential::samples(2.0, (0..50).map(|i| (i as f64 * 0.7).sin()).collect()).unwrap();
        for p in [&v, &s] {
            for i in 0..200 {
                let x = i as f64 * 0.0731;
                assert!((p.eval(x + p.period) - p.eval(x)).abs() < 1e-12);
                assert!(p.eval(x).abs() <= p.sup_norm_bound());
            }
        }
    }

    #[test]
    fn default_family_consistent() {
        let lp = LimitPeriodicPotential::default_family(4);
        lp.check().unwrap();
        let d = lp.approximants[1].sup_distance(&lp.approximants[2]);
        assert!((d - 1.0 / 16.0).abs() < 1e-15);
        let x = 1.234;
        let direct: f64 = (0..=2).map(|k| 0.25f64.powi(k) * (x / 2f64.powi(k)).cos()).sum();
        assert!((lp.approximants[2].eval(x) - direct).abs() < 1e-13);
    }

    #[test]
    fn scaled_family_distance() {
        let a = PeriodicPotential::cosine(2.0 * PI, 0.4);
        let b = PeriodicPotential::cosine(2.0 * PI, 0.6);
        assert!((a.sup_distance(&b) - 0.2).abs() < 1e-15);
    }
}

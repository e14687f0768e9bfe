use super::model::FoliationModel;
use super::{Point, TransversalError};

/// Samples per block of the coarse nearest-point pass.
const STRIDE: usize = 16;
const GOLDEN_ITERS: usize = 90;

/// A curve sampled on a uniform parameter grid and interpolated by local
/// Catmull-Rom cubics in chart displacements. Closed curves wrap; open ones
/// cover a window of a complete transversal.
#[derive(Clone, Debug)]
pub struct Transversal {
    samples: Vec<Point>,
    t_start: f64,
    t_end: f64,
    closed: bool,
    complete: bool,
    base: f64,
    /// Largest distance from a block's first sample to the rest of the block.
    reach: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projection {
    pub t: f64,
    pub foot: Point,
    pub distance: f64,
    /// Distance with the sign of (unit tangent x displacement).
    pub signed: f64,
    /// The foot is an end point of an open curve.
    pub at_end: bool,
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

impl Transversal {
    /// Samples `f` at `n` grid points of [a, b] (b excluded when closed).
    pub fn from_fn<F: Fn(f64) -> Point>(
        model: &FoliationModel,
        f: F,
        range: (f64, f64),
        n: usize,
        closed: bool,
        complete: bool,
        base: f64,
    ) -> Result<Self, TransversalError> {
        if n < 8 || !(range.0 < range.1) {
            return Err(TransversalError::InvalidTransversal("need at least 8 samples on a nonempty range".into()));
        }
        if closed {
            let gap = model.distance(f(range.0), f(range.1));
            if gap > 1e-12 {
                return Err(TransversalError::InvalidTransversal(format!("closed curve has end gap {gap}")));
            }
        }
        let denom = if closed { n } else { n - 1 } as f64;
        let samples = (0..n).map(|i| model.normalize(f(range.0 + (range.1 - range.0) * i as f64 / denom))).collect();
        Self::from_samples(model, samples, range, closed, complete, base)
    }

    pub fn from_samples(
        model: &FoliationModel,
        samples: Vec<Point>,
        range: (f64, f64),
        closed: bool,
        complete: bool,
        base: f64,
    ) -> Result<Self, TransversalError> {
        if samples.len() < 8 || !(range.0 < range.1) {
            return Err(TransversalError::InvalidTransversal("need at least 8 samples on a nonempty range".into()));
        }
        if samples.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(TransversalError::InvalidTransversal("non-finite sample".into()));
        }
        if !(base >= range.0 && base <= range.1) {
            return Err(TransversalError::InvalidTransversal(format!("base parameter {base} outside the range")));
        }
        let mut reach = 0.0f64;
        for k in (0..samples.len()).step_by(STRIDE) {
            for j in k..(k + STRIDE).min(samples.len()) {
                reach = reach.max(model.distance(samples[k], samples[j]));
            }
        }
        Ok(Self { samples, t_start: range.0, t_end: range.1, closed, complete, base, reach })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Point] {
        &self.samples
    }

    pub fn range(&self) -> (f64, f64) {
        (self.t_start, self.t_end)
    }

    pub fn closed(&self) -> bool {
        self.closed
    }

    pub fn complete(&self) -> bool {
        self.complete
    }

    /// Parameter of the base point x = P(t_0).
    pub fn base(&self) -> f64 {
        self.base
    }

    fn dt(&self) -> f64 {
        let n = self.samples.len();
        (self.t_end - self.t_start) / if self.closed { n } else { n - 1 } as f64
    }

    pub fn param(&self, i: usize) -> f64 {
        self.t_start + self.dt() * i as f64
    }

    pub fn params(&self) -> Vec<f64> {
        (0..self.samples.len()).map(|i| self.param(i)).collect()
    }

    /// Parameters of `m` evenly spread test points: the whole curve when
    /// closed, the central half of the window otherwise.
    pub fn test_params(&self, m: usize) -> Vec<f64> {
        let (a, b) = if self.closed {
            (self.t_start, self.t_end)
        } else {
            let q = 0.25 * (self.t_end - self.t_start);
            (self.t_start + q, self.t_end - q)
        };
        let denom = if self.closed { m } else { m - 1 } as f64;
        (0..m).map(|i| a + (b - a) * i as f64 / denom).collect()
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let n = self.samples.len();
        let dt = self.dt();
        if self.closed {
            let x = (t - self.t_start).rem_euclid(self.t_end - self.t_start) / dt;
            let i = (x.floor() as usize).min(n - 1);
            (i, x - i as f64)
        } else {
            let x = ((t - self.t_start) / dt).clamp(0.0, (n - 1) as f64);
            let i = (x.floor() as usize).min(n - 2);
            (i, x - i as f64)
        }
    }

    // Neighbour displacements (i-1, i+1, i+2) relative to sample i.
    fn stencil(&self, model: &FoliationModel, i: usize) -> [[f64; 2]; 3] {
        let n = self.samples.len();
        let s = &self.samples;
        let d = |j: usize| model.displacement(s[i], s[j]);
        if self.closed {
            [d((i + n - 1) % n), d((i + 1) % n), d((i + 2) % n)]
        } else {
            let next = d(i + 1);
            let prev = if i == 0 { [-next[0], -next[1]] } else { d(i - 1) };
            let next2 = if i + 2 < n { d(i + 2) } else { [2.0 * next[0], 2.0 * next[1]] };
            [prev, next, next2]
        }
    }

    // Local cubic offset and its u-derivative.
    fn local(&self, model: &FoliationModel, t: f64) -> (usize, [f64; 2], [f64; 2]) {
        let (i, u) = self.locate(t);
        let [a0, a2, a3] = self.stencil(model, i);
        let (u2, u3) = (u * u, u * u * u);
        let mut c = [0.0; 2];
        let mut dc = [0.0; 2];
        for k in 0..2 {
            let m1 = 0.5 * a2[k] - 0.5 * a0[k];
            let m2 = 0.5 * a3[k];
            c[k] = (u3 - 2.0 * u2 + u) * m1 + (-2.0 * u3 + 3.0 * u2) * a2[k] + (u3 - u2) * m2;
            dc[k] = (3.0 * u2 - 4.0 * u + 1.0) * m1 + (-6.0 * u2 + 6.0 * u) * a2[k] + (3.0 * u2 - 2.0 * u) * m2;
        }
        (i, c, dc)
    }

    pub fn eval(&self, model: &FoliationModel, t: f64) -> Point {
        let (i, c, _) = self.local(model, t);
        model.offset(self.samples[i], c)
    }

    /// dP/dt.
    pub fn tangent(&self, model: &FoliationModel, t: f64) -> [f64; 2] {
        let (_, _, dc) = self.local(model, t);
        let dt = self.dt();
        [dc[0] / dt, dc[1] / dt]
    }

    /// max |(v, u)| over the samples for unit curve tangent v and unit leaf
    /// direction u, with the parameter where it is attained.
    pub fn max_leaf_cosine(&self, model: &FoliationModel) -> (f64, f64) {
        let mut worst = (0.0f64, self.t_start);
        for i in 0..self.samples.len() {
            let t = self.param(i);
            let v = self.tangent(model, t);
            let u = model.leaf_direction(self.samples[i]);
            let c = (v[0] * u[0] + v[1] * u[1]).abs() / v[0].hypot(v[1]);
            if !(c <= worst.0) {
                worst = (c, t);
            }
        }
        worst
    }

    /// Transversality with margin: |(v, u)| <= margin at every sample.
    pub fn validate(&self, model: &FoliationModel, margin: f64) -> Result<(), TransversalError> {
        let (c, t) = self.max_leaf_cosine(model);
        if !(c <= margin) {
            return Err(TransversalError::NotTransversal { t, cosine: c });
        }
        Ok(())
    }

    /// Nearest point of the curve to q.
    pub fn project(&self, model: &FoliationModel, q: Point) -> Projection {
        let n = self.samples.len();
        let dist = |j: usize| model.distance(self.samples[j], q);
        let coarse: Vec<(usize, f64)> = (0..n).step_by(STRIDE).map(|k| (k, dist(k))).collect();
        let dmin = coarse.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
        let mut best = (0usize, f64::INFINITY);
        for &(k, dk) in &coarse {
            if dk > dmin + self.reach {
                continue;
            }
            for j in k..(k + STRIDE).min(n) {
                let d = if j == k { dk } else { dist(j) };
                if d < best.1 {
                    best = (j, d);
                }
            }
        }
        let dt = self.dt();
        let tj = self.param(best.0);
        let (mut lo, mut hi) = (tj - dt, tj + dt);
        if !self.closed {
            lo = lo.max(self.t_start);
            hi = hi.min(self.t_end);
        }
        let f = |t: f64| model.distance(self.eval(model, t), q);
        // Golden-section search on each adjacent segment.
        let golden = |mut a: f64, mut b: f64| {
            let g = 0.5 * (5f64.sqrt() - 1.0);
            let mut x1 = b - g * (b - a);
            let mut x2 = a + g * (b - a);
            let (mut f1, mut f2) = (f(x1), f(x2));
            for _ in 0..GOLDEN_ITERS {
                if f1 <= f2 {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - g * (b - a);
                    f1 = f(x1);
                } else {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + g * (b - a);
                    f2 = f(x2);
                }
            }
            let cands = [(a, f(a)), (b, f(b)), (x1, f1), (x2, f2)];
            cands.into_iter().min_by(|p, q| p.1.total_cmp(&q.1)).expect("four candidates")
        };
        let (t, d) = [golden(lo, tj), golden(tj, hi)]
            .into_iter()
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("two segments");
        let foot = self.eval(model, t);
        let tan = self.tangent(model, t);
        let disp = model.displacement(foot, q);
        let signed = cross(tan, disp) / tan[0].hypot(tan[1]);
        let at_end = !self.closed && ((t - self.t_start).abs() < 1e-12 * dt || (self.t_end - t).abs() < 1e-12 * dt);
        Projection { t, foot, distance: d, signed, at_end }
    }

    /// Pointwise sup distance to another curve on the same grid.
    pub fn sup_distance(&self, model: &FoliationModel, other: &Transversal) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| model.distance(*a, *b))
            .fold(0.0, f64::max)
    }
}

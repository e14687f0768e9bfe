//! Small numeric helpers shared across modules.

/// Arc-length distance on the unit circle.
pub fn circle_dist(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Reduce to [0, 1).
pub fn frac(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Pairwise (tree) summation in fixed index order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Least-squares slope of y against x.
pub fn lsq_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = pairwise_sum(x) / n;
    let my = pairwise_sum(y) / n;
    let sxy: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).collect();
    let sxx: Vec<f64> = x.iter().map(|a| (a - mx) * (a - mx)).collect();
    pairwise_sum(&sxy) / pairwise_sum(&sxx)
}

/// Root of `f` on a bracket [a, b] with f(a) = fa, f(b) = fb of opposite
/// signs, by the Illinois variant of false position. Stops when the bracket
/// is below `tol` or |f| <= `ftol`; returns the point of smaller |f|.
pub fn illinois<F: FnMut(f64) -> f64>(
    mut f: F,
    (mut a, mut fa): (f64, f64),
    (mut b, mut fb): (f64, f64),
    tol: f64,
    ftol: f64,
) -> f64 {
    let (mut ra, mut rb) = (fa.abs(), fb.abs());
    let mut side = 0i8;
    for _ in 0..200 {
        if (b - a).abs() <= tol || ra <= ftol || rb <= ftol {
            break;
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a.min(b) && c < a.max(b)) {
            c = 0.5 * (a + b);
        }
        let fc = f(c);
        if (fc < 0.0) == (fb < 0.0) {
            b = c;
            fb = fc;
            rb = fc.abs();
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            ra = fc.abs();
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    if ra <= rb {
        a
    } else {
        b
    }
}

/// Cubic smoothstep 3t^2 - 2t^3 on [0, 1] and its derivative.
pub fn smoothstep(t: f64) -> (f64, f64) {
    let t = t.clamp(0.0, 1.0);
    (t * t * (3.0 - 2.0 * t), 6.0 * t * (1.0 - t))
}

/// Best rational approximation check: true if some p/q with q <= qmax lies within tol of x.
pub fn near_rational(x: f64, qmax: u32, tol: f64) -> Option<(i64, u32)> {
    for q in 1..=qmax {
        let p = (x * q as f64).round();
        if (x - p / q as f64).abs() < tol {
            return Some((p as i64, q));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_distance_wraps() {
        assert!((circle_dist(0.05, 0.95) - 0.1).abs() < 1e-15);
        assert_eq!(circle_dist(0.3, 0.3), 0.0);
    }

    #[test]
    fn frac_never_returns_one() {
        assert_eq!(frac(-1e-20), 0.0);
        assert!(frac(2.25) - 0.25 < 1e-15);
    }

    #[test]
    fn slope_of_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        assert!((lsq_slope(&x, &y) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn illinois_finds_root() {
        let r = illinois(|x| x * x - 2.0, (0.0, -2.0), (2.0, 2.0), 1e-14, 0.0);
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn rational_detection() {
        assert_eq!(near_rational(0.4, 50, 1e-12), Some((2, 5)));
        assert!(near_rational((5f64.sqrt() - 1.0) / 2.0, 50, 1e-12).is_none());
    }
}

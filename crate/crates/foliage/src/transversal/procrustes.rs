use serde::{Deserialize, Serialize};

use super::TransversalError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HolonomyClass {
    Identity,
    Shift,
    Rotation { angle: f64 },
    NonIsometry { residual: f64 },
}

/// Leafwise isometry x -> A x + b fitted to matched points, with the return
/// set H_x when produced from a model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolonomyClassification {
    pub dim: usize,
    pub matrix: [[f64; 2]; 2],
    pub offset: [f64; 2],
    /// max |A p + b - image(p)|.
    pub residual: f64,
    /// Root mean square of the same, the quantity the fit minimizes.
    pub rms: f64,
    pub class: HolonomyClass,
    /// Returns H_x sorted by norm.
    pub returns: Vec<f64>,
    /// Minimal-norm return.
    pub h1: Option<f64>,
    /// Period of a compact leaf, when detected.
    pub leaf_period: Option<f64>,
}

struct Fit {
    matrix: [[f64; 2]; 2],
    offset: [f64; 2],
    residual: f64,
    rms: f64,
}

fn apply(m: &[[f64; 2]; 2], b: &[f64; 2], p: &[f64; 2]) -> [f64; 2] {
    [m[0][0] * p[0] + m[0][1] * p[1] + b[0], m[1][0] * p[0] + m[1][1] * p[1] + b[1]]
}

fn errors(m: [[f64; 2]; 2], b: [f64; 2], xs: &[[f64; 2]], ys: &[[f64; 2]]) -> Fit {
    let mut worst = 0.0f64;
    let mut sq = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let q = apply(&m, &b, x);
        let e = (q[0] - y[0]).hypot(q[1] - y[1]);
        worst = worst.max(e);
        sq += e * e;
    }
    Fit { matrix: m, offset: b, residual: worst, rms: (sq / xs.len() as f64).sqrt() }
}

fn centroid(ps: &[[f64; 2]]) -> [f64; 2] {
    let n = ps.len() as f64;
    let s = ps.iter().fold([0.0, 0.0], |a, p| [a[0] + p[0], a[1] + p[1]]);
    [s[0] / n, s[1] / n]
}

fn rotation(angle: f64) -> [[f64; 2]; 2] {
    let (s, c) = angle.sin_cos();
    [[c, -s], [s, c]]
}

// Least-squares fit with A = rotation for n = 2 or A = +-1 for n = 1.
fn best_fit(xs: &[[f64; 2]], ys: &[[f64; 2]], dim: usize) -> (Fit, f64) {
    let cx = centroid(xs);
    let cy = centroid(ys);
    if dim == 1 {
        let plus = errors([[1.0, 0.0], [0.0, 1.0]], [cy[0] - cx[0], 0.0], xs, ys);
        let minus = errors([[-1.0, 0.0], [0.0, 1.0]], [cy[0] + cx[0], 0.0], xs, ys);
        return if minus.rms < plus.rms { (minus, std::f64::consts::PI) } else { (plus, 0.0) };
    }
    let (mut sdot, mut scross) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (a, b) = ([x[0] - cx[0], x[1] - cx[1]], [y[0] - cy[0], y[1] - cy[1]]);
        sdot += a[0] * b[0] + a[1] * b[1];
        scross += a[0] * b[1] - a[1] * b[0];
    }
    let angle = scross.atan2(sdot);
    let m = rotation(angle);
    let rc = apply(&m, &[0.0, 0.0], &cx);
    (errors(m, [cy[0] - rc[0], cy[1] - rc[1]], xs, ys), angle)
}

/// Classification at the default residual threshold 1e-8.
pub fn classify_holonomy(before: &[Vec<f64>], after: &[Vec<f64>]) -> Result<HolonomyClassification, TransversalError> {
    classify_holonomy_with(before, after, 1e-8)
}

/// Fits an orientation-preserving isometry (A = +-1 in dimension 1) to the
/// matched points. A pure translation within `tol` gives Shift or Identity,
/// otherwise a fitted isometry within `tol` gives Rotation.
pub fn classify_holonomy_with(
    before: &[Vec<f64>],
    after: &[Vec<f64>],
    tol: f64,
) -> Result<HolonomyClassification, TransversalError> {
    if before.is_empty() || before.len() != after.len() {
        return Err(TransversalError::Invalid("matched point lists must be nonempty and of equal length".into()));
    }
    let dim = before[0].len();
    if !(dim == 1 || dim == 2) || before.iter().chain(after).any(|p| p.len() != dim) {
        return Err(TransversalError::Invalid("points must all have dimension 1 or 2".into()));
    }
    let pad = |p: &Vec<f64>| [p[0], if dim == 2 { p[1] } else { 0.0 }];
    let xs: Vec<[f64; 2]> = before.iter().map(pad).collect();
    let ys: Vec<[f64; 2]> = after.iter().map(pad).collect();
    let spread = xs.iter().map(|p| (p[0] - xs[0][0]).hypot(p[1] - xs[0][1])).fold(0.0, f64::max);
    if spread < 1e-14 {
        return Err(TransversalError::DegenerateConfiguration);
    }
    let cx = centroid(&xs);
    let cy = centroid(&ys);
    let shift = errors([[1.0, 0.0], [0.0, 1.0]], [cy[0] - cx[0], cy[1] - cx[1]], &xs, &ys);
    let (fit, angle) = best_fit(&xs, &ys, dim);
    let (chosen, class) = if shift.residual <= tol {
        let b = shift.offset[0].hypot(shift.offset[1]);
        let class = if b <= tol { HolonomyClass::Identity } else { HolonomyClass::Shift };
        (shift, class)
    } else if fit.residual <= tol {
        (fit, HolonomyClass::Rotation { angle })
    } else {
        let r = fit.residual;
        (fit, HolonomyClass::NonIsometry { residual: r })
    };
    Ok(HolonomyClassification {
        dim,
        matrix: chosen.matrix,
        offset: chosen.offset,
        residual: chosen.residual,
        rms: chosen.rms,
        class,
        returns: Vec::new(),
        h1: None,
        leaf_period: None,
    })
}

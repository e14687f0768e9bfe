//! Named model/transversal pairs from the worked examples.

use super::curve::Transversal;
use super::model::{FoliationModel, PlanarAction};
use super::TransversalError;
use crate::circle::make_rotation;

/// Default number of samples per transversal.
pub const SAMPLES: usize = 2048;

/// Leaf slope of the tent fixture, 3 + golden ratio.
pub fn tent_slope() -> f64 {
    3.0 + 0.5 * (1.0 + 5f64.sqrt())
}

/// Tent profile: rises with slope 1 on (0, 1/4], falls back to 0 at 1/2.
pub fn tent(x: f64) -> f64 {
    if x <= 0.0 || x > 0.5 {
        0.0
    } else if x <= 0.25 {
        x
    } else {
        0.5 - x
    }
}

/// Suspension of the rotation by 1/3 with P the base circle: each leaf is a
/// circle meeting P three times and the holonomy permutes the three points
/// cyclically.
pub fn seifert() -> Result<(FoliationModel, Transversal), TransversalError> {
    let m = FoliationModel::suspension(make_rotation(1.0 / 3.0));
    let p = Transversal::from_fn(&m, |t| [0.0, t], (0.0, 1.0), SAMPLES, true, true, 0.0)?;
    Ok((m, p))
}

/// Linear flow of slope 3 + golden ratio on the torus with the tent graph
/// y = tent(x) over the circle y = 0 as P_0; base point on the flat part.
pub fn example2_tent() -> Result<(FoliationModel, Transversal), TransversalError> {
    let m = FoliationModel::torus(tent_slope(), true);
    let p = Transversal::from_fn(&m, |t| [t, tent(t)], (0.0, 1.0), SAMPLES, true, true, 0.75)?;
    Ok((m, p))
}

/// Meridian foliation of the torus (suspension of the identity) with the
/// flow-transversal t -> (a t, t); integer slopes close up.
pub fn example4_flow(slope: f64) -> Result<(FoliationModel, Transversal), TransversalError> {
    let m = FoliationModel::suspension(make_rotation(0.0));
    let p = Transversal::from_fn(&m, |t| [slope * t, t], (0.0, 1.0), SAMPLES, true, true, 0.0)?;
    Ok((m, p))
}

/// Concentric circles with the radial ray r in [1/2, 2] as P, base at r = 1.
pub fn example5_planar(action: PlanarAction) -> Result<(FoliationModel, Transversal), TransversalError> {
    let m = FoliationModel::planar(action);
    let p = Transversal::from_fn(&m, |t| [t, 0.0], (0.5, 2.0), SAMPLES, false, true, 1.0)?;
    Ok((m, p))
}

/// Linear flow of the given slope with the meridian x = 0 as P: the closed
/// circle on the torus, or the window y in [-4, 4] on the cylinder.
pub fn torus_meridian(slope: f64, compact_y: bool) -> Result<(FoliationModel, Transversal), TransversalError> {
    let m = FoliationModel::torus(slope, compact_y);
    let p = if compact_y {
        Transversal::from_fn(&m, |t| [0.0, t], (0.0, 1.0), SAMPLES, true, true, 0.0)?
    } else {
        Transversal::from_fn(&m, |t| [0.0, t], (-4.0, 4.0), SAMPLES, false, true, 0.0)?
    };
    Ok((m, p))
}

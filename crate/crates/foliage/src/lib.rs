//! Executable models of foliations defined by commutative group actions:
//! circle dynamics and Denjoy maps, transversals and their invariance,
//! leaf/transversal return statistics, and Hill-operator band spectra.

pub mod circle;
pub mod denjoy;
pub mod hill;
pub mod stats;
pub mod tolerances;
pub mod transversal;
mod util;

pub use circle::{CircleError, CircleMap, OrbitTrace};
pub use denjoy::{DenjoyGapSpec, DenjoyMap, GapRule};
pub use tolerances::Tolerances;

//! Mode evolution on a chart, limits at finite ends and scattering data.

mod background;
mod mode;

pub use background::{AnalyticPotential, Background, TauPoint};
pub use mode::{evolve_mode, liouville_forward, liouville_inverse, trajectory_csv, wronskian, ModeSolver, ModeState, DEFAULT_MARGIN};

mod limits;
pub use limits::*;

mod frames;
pub use frames::*;

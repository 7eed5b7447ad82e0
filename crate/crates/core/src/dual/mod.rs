//! Normal cones, the duality mapping on product spaces and the dual
//! regularity constants.

mod cone;
mod constants;
mod duality;
mod normal;

pub use cone::{Cone, ConeKind, CONE_TOL};
pub use constants::{
    certificate_value, min_normal_sum, subreg_dual_certificate, uniform_dual_constant, DualReport, DualWitness,
    EPS_FRAC,
};
pub use duality::{duality_map, DualTuple, DualityMap, ATTAIN_TOL};
pub use normal::normal_cone;

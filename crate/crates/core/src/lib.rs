//! Exact intersection theory, Zariski chambers and S-invariants for the K-stability
//! computations on one-nodal genus 12 Fano threefolds.

pub mod caserunner;
pub mod delpezzo;
pub mod error;
pub mod exact;
pub mod invariants;
pub mod picard;
pub mod threefold;
pub mod zariski;

pub use delpezzo::{build_blowup_plane, build_blowup_quadric, SurfaceModel};
pub use error::{Error, Result};
pub use exact::{PiecewisePoly, Poly, Rational};
pub use invariants::{beta, ord_along, s_curve, s_divisor, CurveCase, CurveChoice, SCurveOptions, SCurveResult};
pub use picard::{linear_combine, Basis, DivisorClass, IntersectionForm};
pub use threefold::{
    check_restriction, cone_member_2d, restrict, verify_chambers, volume_poly, ChamberSpec1D, RestrictionMap,
    ThreefoldRing,
};
pub use zariski::{decompose, sweep, volume};

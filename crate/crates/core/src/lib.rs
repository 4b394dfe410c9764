//! Sub-Riemannian geodesics on the jet space `J^k(R, R^n)`.
//!
//! A geodesic is described by a pair `(F, I)`: a polynomial vector `F` of
//! degree at most `k` and a Hill interval `I` on which `||F||^2 <= 1`. The
//! crate builds such geodesics by integrating a one-degree-of-freedom
//! system and lifting it, computes their x-periods and holonomy over one
//! period, and certifies numerically that none of them closes up.
//!
//! | module | contents |
//! |---|---|
//! | [`poly`], [`polyvec`] | polynomial algebra and real-root isolation |
//! | [`jetspace`] | coordinates, frame, momentum functions |
//! | [`dynamics`] | reduced flow, horizontal lift, full cotangent flow |
//! | [`periods`] | Hill intervals, period and holonomy quadrature, Gram matrix |
//! | [`analysis`] | classification and the non-periodicity certificate |
//! | [`sweep`] | seeded randomized certificate runs |

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod jetspace;
pub mod numeric;
pub mod ode;
pub mod periods;
pub mod poly;
pub mod polyvec;
pub mod sweep;

pub use analysis::{certify_not_periodic, classify, Certificate, GeodesicClass, Verdict};
pub use dynamics::{geodesic, integrate_full, integrate_reduced, lift, FlowOptions, GeodesicSpec, Trajectory};
pub use error::{Error, Result};
pub use jetspace::{CotangentState, JetMatrix, JetPoint, JetPointU};
pub use periods::{delta_theta, gram, hill_intervals, period_l, HillInterval, PeriodData};
pub use poly::{isolate_roots, Poly, RealRoot, Window};
pub use polyvec::PolyVec;

/// Version of the JSON input and output formats.
pub const SCHEMA_VERSION: &str = "1";

//! Function spaces on the disk: area quadrature, analytic functions and the
//! (semi)norms of `B_p(s)`, `F(p, p-2, s)`, the Bloch space and `H^∞`.

pub mod functions;
pub mod norms;
pub mod quadrature;

pub use functions::AnalyticFunction;
pub use norms::{
    bloch_seminorm, bps_norm, fpps_net, fpps_seminorm, function_net, hinf_norm, multiplier_test,
    test_function_norms, BpsNormReport, HinfReport, Membership, MultiplierReport, SeminormReport, SpaceParams,
};
pub use quadrature::{integrate_disk, DiskGrid, GridNode, GridSpec, QuadResult, QuadratureConfig, Verdict};

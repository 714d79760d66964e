//! Smooth circle fibrations with unbounded periods: a curve family on `S²` with exponentially
//! small `1/k_g`, the resulting field on the unit tangent frames of `S²`, its extension to a
//! circle fibration of `S⁷`, and a multicentre on `R⁸` whose period function is unbounded.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cheb;
pub mod curve_factory;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod geom_core;
pub mod jet;
pub mod milnor_bundle;
pub mod multicentre;
pub mod sullivan_field;

pub use curve_factory::{build_gamma, CurveStats, SeamResidual, SmoothClosedSphereCurve, TrochoidParams};
pub use dynamics::{detect_period, integrate, period_scan, IntegratorConfig, OrbitResult, PeriodScan, VectorField};
pub use error::{Error, Result, Stage};
pub use geom_core::{FramePoint, Quat, TangentPairPoint, Vec3, R8};
pub use milnor_bundle::{BundleSpec, Chart, ChartPoint, ChartVelocity, FibrationField};
pub use multicentre::MulticentreField;
pub use sullivan_field::SullivanField;

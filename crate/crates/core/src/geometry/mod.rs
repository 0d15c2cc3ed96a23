//! Quaternion, rigid-transform and dual-quaternion algebra.
//!
//! Every type is generic over [`Real`] so the same code serves plain
//! evaluation (`f64`) and gradient recording ([`crate::optimize::autodiff::Var`]).

mod dual_quat;
mod quaternion;
mod real;
mod se3;
mod vec3;

pub use dual_quat::{blend_dual_quaternions, dqb_blend, DualQuaternion};
pub use quaternion::Quaternion;
pub use real::Real;
pub(crate) use real::{log_scale_partials, log_scale_value};
pub use se3::SE3Transform;
pub use vec3::Vec3;

//! Desk-scale workbench for parametric pneu-net actuators: design-family
//! generation under a constant-volume constraint, a reduced-order pressure-
//! to-bending surrogate with pneumatic lag and backlash hysteresis, the
//! PWM pressure control loop, bending-angle extraction, hysteresis and
//! dynamic-response metrics, and FEM stress-field post-processing.

pub mod actuator_sim;
pub mod analysis;
pub mod config;
pub mod error;
pub mod fem_post;
pub mod geometry;
pub mod kinematics;
pub mod material;
pub mod pneumatics;
pub mod rig;

pub use error::{CoreError, Result};

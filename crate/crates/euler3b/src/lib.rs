//! Numerical toolkit for the planar three-body problem seen as a perturbed
//! two-centre problem: canonical charts, the Euler integral, phase
//! portraits and actions, a normal-form engine and collision predicates.

pub mod action_quadrature;
pub mod collision;
pub mod coordinate_maps;
pub mod core_model;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod integrals;
pub mod kepler;
pub mod normal_form;
pub mod phase_portrait;
pub mod quadrature;
pub mod series;

pub use core_model::{CartesianState, ChartBox, Dim, MassModel, Vec3, Widths};
pub use error::{Error, Result};

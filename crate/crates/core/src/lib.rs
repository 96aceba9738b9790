//! Principal mean curvature configurations of surfaces immersed in R⁴.
//!
//! The crate is organized bottom-up:
//!
//! - [`jet`]: truncated bivariate Taylor arithmetic, the single source of
//!   derivatives.
//! - [`expr`]: immersion definitions (parser, catalog, stereographic lift).
//! - [`geometry`]: fundamental forms, mean curvature vector and the quadratic
//!   differential equation of the principal mean lines.
//! - [`singularities`]: normal and umbilic singularities, Monge adaptation and
//!   Darbouxian classification.
//! - [`liecartan`]: the Lie-Cartan lift, fiber equilibria and separatrices.
//! - [`foliation`]: leaf tracing, cycles and holonomy.

pub mod config;
pub mod expr;
pub mod foliation;
pub mod geometry;
pub mod jet;
pub mod liecartan;
pub mod linalg;
pub mod ode;
pub mod singularities;

pub use config::Tolerances;
pub use expr::{catalog, lift_stereographic, Jet4, SurfaceDef};

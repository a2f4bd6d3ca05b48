//! Convex hull peeling of point processes in simple polytopes: hulls with
//! exact predicates, Poisson sampling, floating-body sandwiching, Macbeath
//! region covers, corner-rescaled cone-like peeling and Monte Carlo
//! estimators for the limiting layer statistics.

pub mod config;
pub mod estimators;
pub mod floating;
pub mod geom;
pub mod linprog;
pub mod macbeath;
pub mod peeling;
pub mod polytope;
pub mod report;
pub mod rescaled;
pub mod sampling;
pub mod stats;

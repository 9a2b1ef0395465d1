//! Grauert's complete metric on C*, its pullbacks `f*(g) + |dz|^2` to
//! complements of principal divisors in C^n, and their curvature.
//!
//! Modules build on each other bottom-up: [`holo`] (maps and jets),
//! [`grauert`] (the one-variable profile), [`metric`] (the Hermitian field),
//! [`curvature`], [`foliation`] (leaves of vector fields) and [`lab`]
//! (convergence experiments for families of divisors).

pub mod curvature;
pub mod error;
pub mod foliation;
pub mod grauert;
pub mod holo;
pub mod lab;
pub mod metric;
pub mod par;

pub use error::{Error, Result};
pub use holo::Complex64;
pub use par::Exec;

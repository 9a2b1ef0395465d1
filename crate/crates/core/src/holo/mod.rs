//! Complex-analytic foundations: polynomial and rational holomorphic maps,
//! exact jets, and a finite-difference Wirtinger oracle.

mod map;
mod poly;
mod roots;
pub mod series;
pub(crate) mod taylor;
mod wirtinger;

pub use map::{eval_jet, zero_order, HoloMap, Jet, DENOMINATOR_EPS, ZERO_ORDER_RTOL};
pub use poly::{Polynomial, Term, DEGREE_CAP};
pub use roots::poly_roots;
pub use wirtinger::{default_step, wirtinger_fd, WirtingerJet2};

pub use num_complex::Complex64;

use num_complex::Complex64;
use thiserror::Error;

/// Formats a point of C^n as `(a+bi, c+di, ...)` for error messages.
pub(crate) fn fmt_point(p: &[Complex64]) -> String {
    let parts: Vec<String> = p.iter().map(|z| format!("{}{:+}i", z.re, z.im)).collect();
    format!("({})", parts.join(", "))
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("denominator vanishes at {point}")]
    DenominatorVanishes { point: String },

    #[error("derivative order {0} unsupported (max 3)")]
    OrderUnsupported(usize),

    #[error("non-finite sample in stencil around {0}")]
    NonFiniteSample(String),

    #[error("all Taylor coefficients vanish through degree {0}")]
    OrderExceedsDegree(usize),

    #[error("degree {degree} in variable {var} exceeds the cap of {cap}")]
    DegreeTooHigh { var: usize, degree: u32, cap: u32 },

    #[error("t = {0:e} below the supported range [1e-280, 1e280]")]
    DomainUnderflow(f64),

    #[error("t = {0:e} above the supported range [1e-280, 1e280]")]
    DomainOverflow(f64),

    #[error("{what} not representable in double precision at t = {t:e}")]
    DerivativeOverflow { what: &'static str, t: f64 },

    #[error("point {point} lies on the divisor (|f| = {modulus:e})")]
    OnDivisor { point: String, modulus: f64 },

    #[error("metric condition number {cond:e} exceeds 1e12 at {point}")]
    SolveFailure { point: String, cond: f64 },

    #[error("density must be positive, got {0}")]
    NonPositiveDensity(f64),

    #[error("direction vector is zero")]
    ZeroVector,

    #[error("|f'(p)| = {0:e} is not below 1e-12; p is not a critical point")]
    NotCritical(f64),

    #[error("vector field is singular at {point} (|X| = {norm:e})")]
    SingularField { point: String, norm: f64 },

    #[error("leaf series radius {0:e} collapsed below 1e-6")]
    RadiusCollapse(f64),

    #[error("|T| = {t:e} outside the leaf chart radius {radius:e}")]
    RadiusExceeded { t: f64, radius: f64 },

    #[error("no coordinate with |df/dz_i| > 1e-10 at {0}")]
    DegenerateDirection(String),

    #[error("grid touches the divisor of f_{j} at {} point(s): {}", points.len(), points.join(" "))]
    GridTouchesDivisor { j: u64, points: Vec<String> },

    #[error("unit vanishes on the grid (min |h| = {0:e})")]
    UnitVanishes(f64),

    #[error("grid is empty after excluding the delta-tube around the divisor")]
    EmptyGrid,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("family does not converge: coefficient gap {gap:e} at j = {j} exceeds {bound:e}")]
    NotConvergent { j: u64, gap: f64, bound: f64 },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

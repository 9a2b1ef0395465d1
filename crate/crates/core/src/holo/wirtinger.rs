//! Finite-difference Wirtinger derivatives of real fields on C.
//!
//! Convention: `d = (d_x - i d_y)/2`, `dbar = (d_x + i d_y)/2`,
//! `d dbar = Laplacian / 4`.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WirtingerJet2 {
    pub value: f64,
    pub d: Complex64,
    pub dbar: Complex64,
    pub ddbar: f64,
}

/// Default stencil step at `t0`.
pub fn default_step(t0: Complex64) -> f64 {
    1e-4 * t0.norm().max(1.0)
}

/// Central differences on the 3x3 stencil of spacing `step` around `t0`;
/// the Laplacian uses the isotropic 9-point weights.
pub fn wirtinger_fd<F>(f: F, t0: Complex64, step: f64) -> Result<WirtingerJet2>
where
    F: Fn(Complex64) -> f64,
{
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Invalid(format!(
            "stencil step must be positive, got {step}"
        )));
    }
    let mut s = [[0.0f64; 3]; 3];
    for (a, row) in s.iter_mut().enumerate() {
        for (b, v) in row.iter_mut().enumerate() {
            let dz = Complex64::new((a as f64 - 1.0) * step, (b as f64 - 1.0) * step);
            *v = f(t0 + dz);
            if !v.is_finite() {
                return Err(Error::NonFiniteSample(format!("{t0}")));
            }
        }
    }
    // s[a][b] = F(t0 + (a-1) h + i (b-1) h)
    let c = s[1][1];
    let fx = (s[2][1] - s[0][1]) / (2.0 * step);
    let fy = (s[1][2] - s[1][0]) / (2.0 * step);
    let edges = s[2][1] + s[0][1] + s[1][2] + s[1][0];
    let corners = s[0][0] + s[0][2] + s[2][0] + s[2][2];
    let lap = (4.0 * edges + corners - 20.0 * c) / (6.0 * step * step);
    Ok(WirtingerJet2 {
        value: c,
        d: Complex64::new(fx, -fy) * 0.5,
        dbar: Complex64::new(fx, fy) * 0.5,
        ddbar: lap / 4.0,
    })
}

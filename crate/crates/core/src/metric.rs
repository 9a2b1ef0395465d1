//! The pullback metric `f*(g) + |dz|^2` on `C^n \ {f = 0}`.
//!
//! In coordinates `G = I + c a a^H` with `a = grad f(z)` and
//! `c = H(f(z))`, `H` the Grauert density. Its derivatives follow from the
//! chain rule through the order-2 jet of `f` and the Wirtinger jet of `H`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{fmt_point, Error, Result};
use crate::grauert::{grauert_density_jet, profile, DensityJet};
use crate::holo::HoloMap;

/// `|f(z)|` below which `z` counts as a point of the divisor.
pub const DIVISOR_EPS: f64 = 1e-300;
/// Largest condition number of `G` accepted by [`metric_matrix_jet`] for `n >= 2`.
pub const COND_LIMIT: f64 = 1e12;

type C64 = Complex64;
pub type CMatrix = DMatrix<Complex64>;

/// Metric field of a defining function `f`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMetricField {
    f: HoloMap,
}

impl HermitianMetricField {
    pub fn new(f: HoloMap) -> Result<Self> {
        f.validate()?;
        Ok(HermitianMetricField { f })
    }

    pub fn f(&self) -> &HoloMap {
        &self.f
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    pub fn eval(&self, z: &[C64], v: &[C64]) -> Result<f64> {
        metric_eval(&self.f, z, v)
    }

    pub fn matrix(&self, z: &[C64]) -> Result<CMatrix> {
        metric_matrix(&self.f, z)
    }

    pub fn jet(&self, z: &[C64]) -> Result<MetricDerivatives> {
        metric_matrix_jet(&self.f, z)
    }
}

/// `G`, its Wirtinger derivatives and inverse at one point.
#[derive(Clone, Debug)]
pub struct MetricDerivatives {
    pub point: Vec<C64>,
    /// `f(z)`
    pub value: C64,
    /// `df/dz_i`
    pub grad: Vec<C64>,
    /// `d^2 f/dz_i dz_k`
    pub hess: Vec<Vec<C64>>,
    /// Grauert density jet at `w = f(z)`; `density.h` is the factor `c`.
    pub density: DensityJet,
    pub g: CMatrix,
    /// `dg[k] = dG/dz_k`
    pub dg: Vec<CMatrix>,
    /// `ddg[k][l] = dbar_l d_k G`
    pub ddg: Vec<Vec<CMatrix>>,
    pub ginv: CMatrix,
    /// `1 + c |a|^2`, the ratio of the extreme eigenvalues of `G`.
    pub cond: f64,
}

impl MetricDerivatives {
    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn c(&self) -> f64 {
        self.density.h
    }

    pub fn grad_norm_sqr(&self) -> f64 {
        self.grad.iter().map(|a| a.norm_sqr()).sum()
    }
}

fn check_point(f: &HoloMap, z: &[C64]) -> Result<()> {
    if z.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: z.len(),
        });
    }
    if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NonFinite(format!("point {}", fmt_point(z))));
    }
    Ok(())
}

pub(crate) fn off_divisor(w: C64, z: &[C64]) -> Result<()> {
    if w.norm() < DIVISOR_EPS {
        return Err(Error::OnDivisor {
            point: fmt_point(z),
            modulus: w.norm(),
        });
    }
    Ok(())
}

/// `(f(z), grad f(z), c)` with the divisor check applied.
fn first_order(f: &HoloMap, z: &[C64]) -> Result<(C64, Vec<C64>, f64)> {
    check_point(f, z)?;
    let t = f.taylor(z, 1)?;
    let w = t.value();
    off_divisor(w, z)?;
    let c = 1.0 + profile(w.norm_sqr())?.v;
    Ok((w, t.gradient(), c))
}

/// `phi(z, V) = H(f(z)) |df(z) V|^2 + |V|^2`.
pub fn metric_eval(f: &HoloMap, z: &[C64], v: &[C64]) -> Result<f64> {
    let (_, a, c) = first_order(f, z)?;
    if v.len() != a.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: v.len(),
        });
    }
    let s: C64 = a.iter().zip(v).map(|(ai, vi)| ai * vi).sum();
    let vv: f64 = v.iter().map(|x| x.norm_sqr()).sum();
    Ok(c * s.norm_sqr() + vv)
}

fn rank_one(n: usize, c: f64, a: &[C64]) -> CMatrix {
    let mut g = CMatrix::identity(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] += a[i] * a[j].conj() * c;
        }
    }
    g
}

/// `G_{ij} = delta_ij + c f_i conj(f_j)`.
pub fn metric_matrix(f: &HoloMap, z: &[C64]) -> Result<CMatrix> {
    let (_, a, c) = first_order(f, z)?;
    Ok(rank_one(a.len(), c, &a))
}

/// Analytic `G`, `dG`, `ddG` and `G^{-1}` at `z`.
pub fn metric_matrix_jet(f: &HoloMap, z: &[C64]) -> Result<MetricDerivatives> {
    check_point(f, z)?;
    let n = f.dim();
    let t = f.taylor(z, 2)?;
    let w = t.value();
    off_divisor(w, z)?;
    let density = grauert_density_jet(w)?;
    let a = t.gradient();
    let hess = t.hessian();
    let c = density.h;
    let hw = density.d;
    let hwwbar = density.ddbar;

    let g = rank_one(n, c, &a);
    let a2: f64 = a.iter().map(|x| x.norm_sqr()).sum();
    let cond = 1.0 + c * a2;
    if n >= 2 && cond > COND_LIMIT {
        return Err(Error::SolveFailure {
            point: fmt_point(z),
            cond,
        });
    }

    let dc: Vec<C64> = a.iter().map(|ak| hw * ak).collect();
    let dg: Vec<CMatrix> = (0..n)
        .map(|k| {
            CMatrix::from_fn(n, n, |i, j| {
                let aj = a[j].conj();
                dc[k] * a[i] * aj + hess[i][k] * aj * c
            })
        })
        .collect();
    let ddg: Vec<Vec<CMatrix>> = (0..n)
        .map(|k| {
            (0..n)
                .map(|l| {
                    let dkl = a[k] * a[l].conj() * hwwbar;
                    let dbl = dc[l].conj();
                    CMatrix::from_fn(n, n, |i, j| {
                        let fjl = hess[j][l].conj();
                        dkl * a[i] * a[j].conj()
                            + dc[k] * a[i] * fjl
                            + dbl * hess[i][k] * a[j].conj()
                            + hess[i][k] * fjl * c
                    })
                })
                .collect()
        })
        .collect();

    let ginv = inverse(&g, c, &a, a2, z)?;
    Ok(MetricDerivatives {
        point: z.to_vec(),
        value: w,
        grad: a,
        hess,
        density,
        g,
        dg,
        ddg,
        ginv,
        cond,
    })
}

/// Sherman-Morrison, checked by residual; Cholesky if the residual is off.
fn inverse(g: &CMatrix, c: f64, a: &[C64], a2: f64, z: &[C64]) -> Result<CMatrix> {
    let n = a.len();
    let beta = c / (1.0 + c * a2);
    let sm = CMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        };
        delta - a[i] * a[j].conj() * beta
    });
    let resid = (g * &sm - CMatrix::identity(n, n)).norm();
    if resid <= 1e-10 {
        return Ok(sm);
    }
    g.clone()
        .cholesky()
        .map(|ch| ch.inverse())
        .ok_or_else(|| Error::SolveFailure {
            point: fmt_point(z),
            cond: 1.0 + c * a2,
        })
}

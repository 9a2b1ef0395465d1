//! Holomorphic vector fields, their leaves as power series, and the
//! curvature of the pullback metric restricted to a leaf.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curvature::{curvature_1d, curve_density_jet, gaussian_conformal};
use crate::error::{fmt_point, Error, Result};
use crate::grauert::grauert_density_jet;
use crate::holo::{default_step, series, wirtinger_fd, HoloMap, Polynomial};
use crate::metric::{metric_eval, off_divisor};
use crate::par::{self, Exec};

type C64 = Complex64;

pub const SINGULAR_EPS: f64 = 1e-10;
pub const MAX_ORDER: usize = 24;
pub const DEFAULT_ORDER: usize = 16;
pub const MIN_RADIUS: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorField {
    components: Vec<HoloMap>,
}

impl VectorField {
    pub fn new(components: Vec<HoloMap>) -> Result<Self> {
        let vf = VectorField { components };
        vf.validate()?;
        Ok(vf)
    }

    /// Constant field `v` on `C^n`.
    pub fn constant(v: &[C64]) -> Self {
        let n = v.len();
        VectorField {
            components: v
                .iter()
                .map(|&c| Polynomial::constant(n, c).into())
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.components.len();
        if n == 0 {
            return Err(Error::Invalid("vector field has no components".into()));
        }
        for c in &self.components {
            c.validate()?;
            if c.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: c.dim(),
                });
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[HoloMap] {
        &self.components
    }

    pub fn eval(&self, z: &[C64]) -> Result<Vec<C64>> {
        self.components.iter().map(|c| c.eval(z)).collect()
    }

    /// `X(p)`, failing if `|X(p)| <= 1e-10`.
    pub fn eval_nonsingular(&self, p: &[C64]) -> Result<Vec<C64>> {
        let x = self.eval(p)?;
        let norm = x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm <= SINGULAR_EPS {
            return Err(Error::SingularField {
                point: fmt_point(p),
                norm,
            });
        }
        Ok(x)
    }

    /// `X` multiplied by a constant.
    pub fn scaled(&self, lambda: C64) -> Result<Self> {
        let n = self.dim();
        let unit: HoloMap = Polynomial::constant(n, lambda).into();
        VectorField::new(
            self.components
                .iter()
                .map(|c| HoloMap::scaled(unit.clone(), c.clone()))
                .collect::<Result<_>>()?,
        )
    }
}

/// Truncated series `Z(T) = sum_j c_j T^j` of the leaf through `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct LeafChart {
    pub base: Vec<C64>,
    pub order: usize,
    /// `coefficients[j]` is `c_j` in `C^n`.
    pub coefficients: Vec<Vec<C64>>,
    pub radius: f64,
}

impl LeafChart {
    fn check(&self, t: C64) -> Result<()> {
        if t.norm() >= self.radius {
            return Err(Error::RadiusExceeded {
                t: t.norm(),
                radius: self.radius,
            });
        }
        Ok(())
    }

    fn component(&self, i: usize) -> Vec<C64> {
        self.coefficients.iter().map(|c| c[i]).collect()
    }

    pub fn eval(&self, t: C64) -> Result<Vec<C64>> {
        self.check(t)?;
        Ok((0..self.base.len())
            .map(|i| series::eval(&self.component(i), t))
            .collect())
    }

    pub fn eval_deriv(&self, t: C64) -> Result<Vec<C64>> {
        self.check(t)?;
        Ok((0..self.base.len())
            .map(|i| series::eval_deriv(&self.component(i), t))
            .collect())
    }
}

/// `c_0 .. c_m` of the leaf through `p` by `c_{j+1} = [X(Z)]_j / (j + 1)`.
fn leaf_coefficients(x: &VectorField, p: &[C64], m: usize) -> Result<Vec<Vec<C64>>> {
    let n = x.dim();
    let mut z: Vec<Vec<C64>> = p.iter().map(|&pi| vec![pi]).collect();
    for j in 0..m {
        for zi in z.iter_mut() {
            zi.push(C64::new(0.0, 0.0));
        }
        for i in 0..n {
            let xs = x.components[i].compose_series(&z, j + 1)?;
            z[i][j + 1] = xs[j] / (j + 1) as f64;
        }
    }
    Ok((0..=m)
        .map(|j| z.iter().map(|zi| zi[j]).collect())
        .collect())
}

fn radius_estimate(coefficients: &[Vec<C64>]) -> f64 {
    let m = coefficients.len() - 1;
    let lo = (m / 2).max(1);
    let mut rho = f64::INFINITY;
    for (j, c) in coefficients.iter().enumerate().skip(lo) {
        let norm = c.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            rho = rho.min(norm.powf(-1.0 / j as f64));
        }
    }
    0.5 * rho
}

pub fn integrate_leaf(x: &VectorField, p: &[C64], m: usize) -> Result<LeafChart> {
    if p.len() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: p.len(),
        });
    }
    if m == 0 || m > MAX_ORDER {
        return Err(Error::Invalid(format!(
            "leaf order must be in 1..={MAX_ORDER}, got {m}"
        )));
    }
    x.eval_nonsingular(p)?;
    let coefficients = leaf_coefficients(x, p, m)?;
    let radius = radius_estimate(&coefficients);
    if radius < MIN_RADIUS {
        return Err(Error::RadiusCollapse(radius));
    }
    Ok(LeafChart {
        base: p.to_vec(),
        order: m,
        coefficients,
        radius,
    })
}

/// `h(T)` on a precomputed chart.
pub fn leaf_density_on(f: &HoloMap, x: &VectorField, chart: &LeafChart, t: C64) -> Result<f64> {
    let z = chart.eval(t)?;
    let xz = x.eval(&z)?;
    metric_eval(f, &z, &xz)
}

/// `h(T) = H(f(Z_T)) |df(Z_T) X(Z_T)|^2 + |X(Z_T)|^2` along the leaf through `p`.
pub fn leaf_density(f: &HoloMap, x: &VectorField, p: &[C64], t: C64) -> Result<f64> {
    let chart = integrate_leaf(x, p, DEFAULT_ORDER)?;
    leaf_density_on(f, x, &chart, t)
}

/// Leaf curvature at `p` from the exact second-order jet of the leaf.
pub fn leaf_curvature(f: &HoloMap, x: &VectorField, p: &[C64]) -> Result<f64> {
    if f.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: x.dim(),
        });
    }
    x.eval_nonsingular(p)?;
    let c = leaf_coefficients(x, p, 2)?;
    let (c1, c2) = (&c[1], &c[2]);
    let t = f.taylor(p, 2)?;
    off_divisor(t.value(), p)?;
    let a = t.gradient();
    let hess = t.hessian();
    let n = p.len();
    let mut f1 = C64::new(0.0, 0.0);
    let mut f2 = C64::new(0.0, 0.0);
    for i in 0..n {
        f1 += a[i] * c1[i];
        f2 += a[i] * c2[i] * 2.0;
        for k in 0..n {
            f2 += hess[i][k] * c1[i] * c1[k];
        }
    }
    let z1sq: f64 = c1.iter().map(|v| v.norm_sqr()).sum();
    let z2z1: C64 = c2.iter().zip(c1).map(|(b, a)| b * 2.0 * a.conj()).sum();
    let z2sq: f64 = c2.iter().map(|v| 4.0 * v.norm_sqr()).sum();
    let hj = grauert_density_jet(t.value())?;
    let jet = curve_density_jet(&hj, f1, f2, (z1sq, z2z1, z2sq), C64::new(0.0, 0.0));
    gaussian_conformal(&jet)
}

/// Leaf curvature from the 9-point stencil of `h(T)` around `T = 0`; an
/// independent check on [`leaf_curvature`]. The default step is
/// `min(1e-4, radius / 10)`.
pub fn leaf_curvature_stencil(
    f: &HoloMap,
    x: &VectorField,
    p: &[C64],
    step: Option<f64>,
) -> Result<f64> {
    let chart = integrate_leaf(x, p, DEFAULT_ORDER)?;
    let origin = C64::new(0.0, 0.0);
    let step = step.unwrap_or_else(|| default_step(origin).min(chart.radius / 10.0));
    let sample = |t: C64| leaf_density_on(f, x, &chart, t).unwrap_or(f64::NAN);
    let j = wirtinger_fd(sample, origin, step)?;
    crate::curvature::conformal_curvature(j.value, j.d, j.ddbar)
}

/// `X(z) = e_i / f_{z_i}(z)` for the first `i` with `|f_{z_i}(p)| > 1e-10`,
/// so that `df(X) = 1`.
pub fn transverse_field(f: &HoloMap, p: &[C64]) -> Result<VectorField> {
    let t = f.taylor(p, 1)?;
    let grad = t.gradient();
    let i = grad
        .iter()
        .position(|g| g.norm() > SINGULAR_EPS)
        .ok_or_else(|| Error::DegenerateDirection(fmt_point(p)))?;
    let n = f.dim();
    let components = (0..n)
        .map(|k| {
            if k == i {
                f.derivative(i)?.reciprocal()
            } else {
                Ok(Polynomial::zero(n).into())
            }
        })
        .collect::<Result<Vec<HoloMap>>>()?;
    VectorField::new(components)
}

/// `base + ratio^m direction` for `m = first, .., first + steps - 1`.
pub fn geometric_path(
    base: &[C64],
    direction: &[C64],
    ratio: f64,
    first: i32,
    steps: usize,
) -> Result<Vec<(i32, Vec<C64>)>> {
    if base.len() != direction.len() {
        return Err(Error::DimensionMismatch {
            expected: base.len(),
            got: direction.len(),
        });
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Invalid(format!(
            "path ratio must lie in (0, 1), got {ratio}"
        )));
    }
    Ok((0..steps as i32)
        .map(|s| {
            let m = first + s;
            let scale = ratio.powi(m);
            let z = base
                .iter()
                .zip(direction)
                .map(|(b, d)| b + d * scale)
                .collect();
            (m, z)
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproachPoint {
    pub m: i32,
    pub z: Vec<C64>,
    pub curvature: f64,
    /// `|K + 4|`
    pub gap: f64,
}

/// Leaf curvature of the transverse field at `p` along a path converging to `p`;
/// for `n = 1` the plain curvature of the pullback metric.
pub fn divisor_approach(
    f: &HoloMap,
    p: &[C64],
    path: &[(i32, Vec<C64>)],
) -> Result<Vec<ApproachPoint>> {
    divisor_approach_with(Exec::default(), f, p, path)
}

pub fn divisor_approach_with(
    exec: Exec,
    f: &HoloMap,
    p: &[C64],
    path: &[(i32, Vec<C64>)],
) -> Result<Vec<ApproachPoint>> {
    // In one variable the leaf is the plane itself, so the curvature does not
    // depend on the field; this also covers zeros of order >= 2.
    let x = if f.dim() == 1 {
        None
    } else {
        Some(transverse_field(f, p)?)
    };
    par::try_map(exec, path, |(m, z)| {
        let k = match &x {
            Some(x) => leaf_curvature(f, x, z)?,
            None => curvature_1d(f, z[0])?,
        };
        Ok(ApproachPoint {
            m: *m,
            z: z.clone(),
            curvature: k,
            gap: (k + 4.0).abs(),
        })
    })
}

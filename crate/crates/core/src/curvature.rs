//! Conformal Gaussian curvature, the Kähler curvature tensor of the pullback
//! metric, holomorphic sectional curvature and its supremum over directions.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{fmt_point, Error, Result};
use crate::grauert::{grauert_density_jet, DensityJet};
use crate::holo::HoloMap;
use crate::metric::{metric_matrix_jet, off_divisor, MetricDerivatives};
use crate::par::{self, Exec};

type C64 = Complex64;

/// `|f'(p)|` below which `p` counts as a critical point.
pub const CRITICAL_EPS: f64 = 1e-12;

/// `K = -2 (h ddbar h - |dh|^2) / h^3`, evaluated as
/// `-2 (ddbar/h - |d/h|^2) / h` so that huge densities do not overflow.
pub fn conformal_curvature(h: f64, d: C64, ddbar: f64) -> Result<f64> {
    if h.is_nan() || h <= 0.0 {
        return Err(Error::NonPositiveDensity(h));
    }
    let k = -2.0 * (ddbar / h - (d / h).norm_sqr()) / h;
    if !k.is_finite() {
        return Err(Error::NonFinite(format!("curvature for density {h:e}")));
    }
    Ok(k)
}

pub fn gaussian_conformal(j: &DensityJet) -> Result<f64> {
    conformal_curvature(j.h, j.d, j.ddbar)
}

/// Wirtinger jet at `T = 0` of `h(T) = H(F) |F'|^2 + |Z'|^2`, the density of
/// the pullback metric along a holomorphic curve `Z(T)` with `F = f o Z`.
/// `hj` is the Grauert density jet at `F(0)`; `zz` is `(|Z'|^2, Z''.conj(Z'), |Z''|^2)`.
pub(crate) fn curve_density_jet(
    hj: &DensityJet,
    f1: C64,
    f2: C64,
    zz: (f64, C64, f64),
    at: C64,
) -> DensityJet {
    let (z1sq, z2z1, z2sq) = zz;
    let big_h = hj.h;
    let f1sq = f1.norm_sqr();
    let d = hj.d * f1 * f1sq + f2 * f1.conj() * big_h + z2z1;
    let cross = hj.d * f1 * f1 * f2.conj();
    DensityJet {
        z: at,
        h: big_h * f1sq + z1sq,
        d,
        dbar: d.conj(),
        ddbar: hj.ddbar * f1sq * f1sq + 2.0 * cross.re + big_h * f2.norm_sqr() + z2sq,
    }
}

/// Density jet of the metric `(H(f)|f'|^2 + 1)|dz|^2` of a one-variable `f`.
pub fn pullback_density_jet(f: &HoloMap, z: C64) -> Result<DensityJet> {
    if f.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: f.dim(),
        });
    }
    let t = f.taylor(&[z], 2)?;
    off_divisor(t.value(), &[z])?;
    let hj = grauert_density_jet(t.value())?;
    let f1 = t.gradient()[0];
    let f2 = t.hessian()[0][0];
    let one = (1.0, C64::new(0.0, 0.0), 0.0);
    Ok(curve_density_jet(&hj, f1, f2, one, z))
}

/// Gaussian curvature of the pullback metric of a one-variable `f` at `z`.
pub fn curvature_1d(f: &HoloMap, z: C64) -> Result<f64> {
    gaussian_conformal(&pullback_density_jet(f, z)?)
}

/// `R_{i jbar k lbar}` at one point, stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureTensor {
    n: usize,
    r: Vec<C64>,
}

impl CurvatureTensor {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        let n = self.n;
        self.r[((i * n + j) * n + k) * n + l]
    }

    /// `R(V, Vbar, V, Vbar)`
    pub fn quartic(&self, v: &[C64]) -> f64 {
        let n = self.n;
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        acc += self.get(i, j, k, l) * v[i] * v[j].conj() * v[k] * v[l].conj();
                    }
                }
            }
        }
        acc.re
    }

    pub fn max_abs(&self) -> f64 {
        self.r.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }
}

/// `R_{i jbar k lbar} = -dbar_l d_k G_{i jbar} + (dG_k G^{-1} dG_l^H)_{ij}`.
pub fn kahler_tensor(md: &MetricDerivatives) -> CurvatureTensor {
    let n = md.dim();
    let mut r = vec![C64::new(0.0, 0.0); n * n * n * n];
    for k in 0..n {
        for l in 0..n {
            let quad = &md.dg[k] * &md.ginv * md.dg[l].adjoint();
            for i in 0..n {
                for j in 0..n {
                    r[((i * n + j) * n + k) * n + l] = quad[(i, j)] - md.ddg[k][l][(i, j)];
                }
            }
        }
    }
    CurvatureTensor { n, r }
}

fn check_direction(v: &[C64], n: usize) -> Result<f64> {
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: v.len(),
        });
    }
    let vv: f64 = v.iter().map(|x| x.norm_sqr()).sum();
    if vv == 0.0 {
        return Err(Error::ZeroVector);
    }
    if !vv.is_finite() {
        return Err(Error::NonFinite(format!("direction {}", fmt_point(v))));
    }
    Ok(vv)
}

/// Holomorphic sectional curvature `2 R(V,Vbar,V,Vbar) / (V^H G V)^2` from
/// precomputed metric derivatives.
pub fn hsc_from(md: &MetricDerivatives, v: &[C64]) -> Result<f64> {
    let n = md.dim();
    let vv = check_direction(v, n)?;
    let zero = C64::new(0.0, 0.0);

    let mut dd = zero;
    let mut alpha = vec![zero; n];
    for k in 0..n {
        for i in 0..n {
            let vik = v[i] * v[k];
            for (q, a) in alpha.iter_mut().enumerate() {
                *a += vik * md.dg[k][(i, q)];
            }
        }
        for l in 0..n {
            let vkl = v[k] * v[l].conj();
            let m = &md.ddg[k][l];
            for i in 0..n {
                for j in 0..n {
                    dd += m[(i, j)] * v[i] * v[j].conj() * vkl;
                }
            }
        }
    }
    // gamma^H G^{-1} gamma with G^{-1} = I - beta a a^H, split into the part
    // orthogonal to a and the part along a to avoid cancellation.
    let gamma: Vec<C64> = alpha.iter().map(|x| x.conj()).collect();
    let a = &md.grad;
    let a2 = md.grad_norm_sqr();
    let g2: f64 = gamma.iter().map(|x| x.norm_sqr()).sum();
    let second = if a2 == 0.0 {
        g2
    } else {
        let ah_g: C64 = a.iter().zip(&gamma).map(|(ai, gi)| ai.conj() * gi).sum();
        let perp: f64 = a
            .iter()
            .zip(&gamma)
            .map(|(ai, gi)| (gi - ai * (ah_g / a2)).norm_sqr())
            .sum();
        perp + ah_g.norm_sqr() / a2 / md.cond
    };
    let r = second - dd.re;
    let s: C64 = a.iter().zip(v).map(|(ai, vi)| ai * vi).sum();
    let norm = vv + md.c() * s.norm_sqr();
    let k = 2.0 * (r / norm) / norm;
    if !k.is_finite() {
        return Err(Error::NonFinite(format!("hsc at {}", fmt_point(&md.point))));
    }
    Ok(k)
}

/// Holomorphic sectional curvature `K(p, V)`.
pub fn hsc(f: &HoloMap, p: &[C64], v: &[C64]) -> Result<f64> {
    check_direction(v, f.dim())?;
    hsc_from(&metric_matrix_jet(f, p)?, v)
}

/// Lower bound for `K+(p) = sup_V K(p, V)` with the maximizing direction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KPlus {
    pub value: f64,
    pub direction: Vec<C64>,
    pub samples: usize,
}

pub const KPLUS_MIN_SAMPLES: usize = 64;
const POLISH_STARTS: usize = 4;
const POLISH_ITERS: usize = 32;
const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Halton point `index` in `[0,1)^{2n}` pushed through Box-Muller to a
/// Gaussian vector in `C^n`, then normalized.
pub(crate) fn sphere_sample(n: usize, index: u64) -> Vec<C64> {
    let mut v: Vec<C64> = (0..n)
        .map(|i| {
            let u1 = radical_inverse(index, PRIMES[2 * i]);
            let u2 = radical_inverse(index, PRIMES[2 * i + 1]);
            let r = (-2.0 * u1.max(f64::MIN_POSITIVE).ln()).sqrt();
            C64::from_polar(r, 2.0 * std::f64::consts::PI * u2)
        })
        .collect();
    normalize(&mut v);
    v
}

fn normalize(v: &mut [C64]) {
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

fn coordinate(v: &mut [C64], idx: usize) -> &mut f64 {
    let z = &mut v[idx / 2];
    if idx.is_multiple_of(2) {
        &mut z.re
    } else {
        &mut z.im
    }
}

/// Coordinate-wise golden-section ascent over the real coordinates of `v`.
fn polish(md: &MetricDerivatives, start: &[C64]) -> (f64, Vec<C64>) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let eval = |v: &[C64]| hsc_from(md, v).unwrap_or(f64::NEG_INFINITY);
    let mut v = start.to_vec();
    let mut best = eval(&v);
    let mut half = 0.25;
    for _ in 0..POLISH_ITERS {
        for idx in 0..2 * v.len() {
            let x0 = *coordinate(&mut v, idx);
            let at = |x: f64, v: &mut Vec<C64>| {
                *coordinate(v, idx) = x;
                eval(v)
            };
            let (mut lo, mut hi) = (x0 - half, x0 + half);
            let mut x1 = hi - INV_PHI * (hi - lo);
            let mut x2 = lo + INV_PHI * (hi - lo);
            let mut f1 = at(x1, &mut v);
            let mut f2 = at(x2, &mut v);
            while hi - lo > 1e-9 * half.max(1e-6) {
                if f1 < f2 {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + INV_PHI * (hi - lo);
                    f2 = at(x2, &mut v);
                } else {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - INV_PHI * (hi - lo);
                    f1 = at(x1, &mut v);
                }
            }
            let (x, fx) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
            if fx > best {
                best = fx;
                *coordinate(&mut v, idx) = x;
            } else {
                *coordinate(&mut v, idx) = x0;
            }
        }
        normalize(&mut v);
        half *= 0.6;
    }
    (best, v)
}

pub fn k_plus(f: &HoloMap, p: &[C64], samples: usize) -> Result<KPlus> {
    k_plus_with(Exec::default(), f, p, samples)
}

pub fn k_plus_with(exec: Exec, f: &HoloMap, p: &[C64], samples: usize) -> Result<KPlus> {
    if samples < KPLUS_MIN_SAMPLES {
        return Err(Error::Invalid(format!(
            "k_plus needs at least {KPLUS_MIN_SAMPLES} samples, got {samples}"
        )));
    }
    let n = f.dim();
    if 2 * n > PRIMES.len() {
        return Err(Error::Invalid(format!(
            "k_plus supports n <= {}",
            PRIMES.len() / 2
        )));
    }
    let md = metric_matrix_jet(f, p)?;
    if n == 1 {
        let direction = vec![C64::new(1.0, 0.0)];
        return Ok(KPlus {
            value: hsc_from(&md, &direction)?,
            direction,
            samples,
        });
    }
    let idx: Vec<u64> = (1..=samples as u64).collect();
    let values = par::try_map(exec, &idx, |&i| hsc_from(&md, &sphere_sample(n, i)))?;
    let mut order: Vec<usize> = (0..samples).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let starts: Vec<Vec<C64>> = order[..POLISH_STARTS]
        .iter()
        .map(|&i| sphere_sample(n, idx[i]))
        .collect();
    let polished = par::map(exec, &starts, |s| polish(&md, s));
    let mut best = (values[order[0]], starts[0].clone());
    for (val, dir) in polished {
        if val > best.0 {
            best = (val, dir);
        }
    }
    Ok(KPlus {
        value: best.0,
        direction: best.1,
        samples,
    })
}

/// `K(p) = -2 |f''(p)|^2 H(f(p))` at a critical point of a one-variable `f`.
pub fn critical_point_curvature(f: &HoloMap, p: C64) -> Result<f64> {
    if f.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: f.dim(),
        });
    }
    let t = f.taylor(&[p], 2)?;
    let f1 = t.gradient()[0];
    if f1.norm() >= CRITICAL_EPS {
        return Err(Error::NotCritical(f1.norm()));
    }
    off_divisor(t.value(), &[p])?;
    let c = 1.0 + crate::grauert::profile(t.value().norm_sqr())?.v;
    Ok(-2.0 * t.hessian()[0][0].norm_sqr() * c)
}

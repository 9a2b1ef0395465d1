//! Convergence experiments for families of defining functions `f_j -> f_0`:
//! metric and curvature gaps on compact grids, twisting by a unit, and the
//! lower-semicontinuity check for holomorphic sectional curvature.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curvature::hsc;
use crate::error::{fmt_point, Error, Result};
use crate::foliation::{leaf_curvature, VectorField};
use crate::holo::{poly_roots, HoloMap, Polynomial};
use crate::metric::{metric_matrix, DIVISOR_EPS};
use crate::par::{self, Exec};

type C64 = Complex64;

/// Default bound on the coefficient gap `|f_j - f_0|` at `j = max J`.
pub const DEFAULT_CONVERGENCE_BOUND: f64 = 0.05;
/// Smallest admissible exclusion margin around the limit divisor.
pub const MIN_DELTA: f64 = 1e-6;
/// Relative share of the grid diameter used as the default margin.
pub const DEFAULT_DELTA_FRACTION: f64 = 0.05;
pub const UNIT_EPS: f64 = 1e-8;

/// One term of a family template; its coefficient is
/// `(re + i im) + (inv_j_re + i inv_j_im) / j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateTerm {
    pub exp: Vec<u32>,
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
    #[serde(default)]
    pub inv_j_re: f64,
    #[serde(default)]
    pub inv_j_im: f64,
}

/// A polynomial whose coefficients are affine in `1/j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyTemplate {
    pub n: usize,
    pub terms: Vec<TemplateTerm>,
}

impl FamilyTemplate {
    pub fn instantiate(&self, j: u64) -> Result<Polynomial> {
        if j == 0 {
            return Err(Error::Invalid("family index j must be >= 1".into()));
        }
        let inv = 1.0 / j as f64;
        Polynomial::new(
            self.n,
            self.terms.iter().map(|t| {
                (
                    t.exp.clone(),
                    C64::new(t.re + t.inv_j_re * inv, t.im + t.inv_j_im * inv),
                )
            }),
        )
    }

    /// The `j -> infinity` polynomial.
    pub fn limit(&self) -> Result<Polynomial> {
        Polynomial::new(
            self.n,
            self.terms
                .iter()
                .map(|t| (t.exp.clone(), C64::new(t.re, t.im))),
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Generator {
    Template(FamilyTemplate),
    Twisted {
        unit: HoloMap,
        inner: Box<Generator>,
    },
}

impl Generator {
    fn make(&self, j: u64) -> Result<HoloMap> {
        match self {
            Generator::Template(t) => Ok(t.instantiate(j)?.into()),
            Generator::Twisted { unit, inner } => HoloMap::scaled(unit.clone(), inner.make(j)?),
        }
    }
}

/// JSON form of a family: `{"f0": .., "fj": {"template": ..}, "J": [..]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub f0: HoloMap,
    pub fj: TemplateSpec,
    #[serde(rename = "J")]
    pub j: Vec<u64>,
    #[serde(default)]
    pub unit: Option<HoloMap>,
    #[serde(default)]
    pub convergence_bound: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateSpec {
    pub template: FamilyTemplate,
}

/// A sequence of defining functions `f_j` with declared limit `f_0`.
#[derive(Clone, Debug, PartialEq)]
pub struct DivisorFamily {
    f0: HoloMap,
    gen: Generator,
    indices: Vec<u64>,
    bound: f64,
}

impl DivisorFamily {
    /// Checks dimensions and that `f_{max J}` is within `bound` of `f_0`
    /// coefficientwise.
    pub fn new(
        f0: HoloMap,
        template: FamilyTemplate,
        indices: Vec<u64>,
        bound: f64,
    ) -> Result<Self> {
        Self::build(f0, Generator::Template(template), indices, bound)
    }

    fn build(f0: HoloMap, gen: Generator, mut indices: Vec<u64>, bound: f64) -> Result<Self> {
        f0.validate()?;
        indices.sort_unstable();
        indices.dedup();
        if indices.is_empty() || indices[0] == 0 {
            return Err(Error::Invalid(
                "index list J must be nonempty with j >= 1".into(),
            ));
        }
        let fam = DivisorFamily {
            f0,
            gen,
            indices,
            bound,
        };
        let jmax = fam.max_index();
        let fj = fam.fj(jmax)?;
        if fj.dim() != fam.f0.dim() {
            return Err(Error::DimensionMismatch {
                expected: fam.f0.dim(),
                got: fj.dim(),
            });
        }
        let gap = coefficient_gap(&fj, &fam.f0)?;
        if gap.is_nan() || gap > bound {
            return Err(Error::NotConvergent {
                j: jmax,
                gap,
                bound,
            });
        }
        Ok(fam)
    }

    pub fn from_spec(spec: FamilySpec) -> Result<Self> {
        let bound = spec.convergence_bound.unwrap_or(DEFAULT_CONVERGENCE_BOUND);
        let fam = DivisorFamily::new(spec.f0, spec.fj.template, spec.j, bound)?;
        match spec.unit {
            None => Ok(fam),
            Some(unit) => fam.twisted_unchecked(unit),
        }
    }

    /// A family constant in `j`.
    pub fn constant(f0: HoloMap, indices: Vec<u64>) -> Result<Self> {
        let (num, den) = f0.as_rational()?;
        if den.is_some() {
            return Err(Error::Invalid(
                "constant families need a polynomial f0".into(),
            ));
        }
        let template = FamilyTemplate {
            n: num.dim(),
            terms: num
                .terms()
                .iter()
                .map(|t| TemplateTerm {
                    exp: t.exp.clone(),
                    re: t.coef.re,
                    im: t.coef.im,
                    inv_j_re: 0.0,
                    inv_j_im: 0.0,
                })
                .collect(),
        };
        DivisorFamily::new(f0, template, indices, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.f0.dim()
    }

    pub fn f0(&self) -> &HoloMap {
        &self.f0
    }

    pub fn fj(&self, j: u64) -> Result<HoloMap> {
        self.gen.make(j)
    }

    pub fn indices(&self) -> &[u64] {
        &self.indices
    }

    pub fn max_index(&self) -> u64 {
        *self.indices.last().expect("nonempty by construction")
    }

    pub fn with_indices(&self, indices: Vec<u64>) -> Result<Self> {
        Self::build(self.f0.clone(), self.gen.clone(), indices, self.bound)
    }

    fn twisted_unchecked(&self, unit: HoloMap) -> Result<Self> {
        if unit.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: unit.dim(),
            });
        }
        let f0 = HoloMap::scaled(unit.clone(), self.f0.clone())?;
        let gen = Generator::Twisted {
            unit: unit.clone(),
            inner: Box::new(self.gen.clone()),
        };
        let unit_scale = unit
            .as_rational()?
            .0
            .terms()
            .iter()
            .map(|t| t.coef.norm())
            .sum::<f64>()
            .max(1.0);
        Self::build(f0, gen, self.indices.clone(), self.bound * unit_scale)
    }
}

/// Largest coefficient difference between the rational forms of `a` and `b`.
fn coefficient_gap(a: &HoloMap, b: &HoloMap) -> Result<f64> {
    let (an, ad) = a.as_rational()?;
    let (bn, bd) = b.as_rational()?;
    let mut gap = an.sub(&bn)?.coef_scale();
    match (ad, bd) {
        (None, None) => {}
        (Some(x), Some(y)) => gap = gap.max(x.sub(&y)?.coef_scale()),
        _ => {
            return Err(Error::Invalid(
                "f_j and f_0 differ in representation".into(),
            ))
        }
    }
    Ok(gap)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxAxis {
    pub re: [f64; 2],
    pub im: [f64; 2],
    /// Sample counts along the real and imaginary directions.
    pub points: [usize; 2],
}

/// A finite sample of a compact set; points with `|f_0| < delta` are
/// excluded when the grid is used against a family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
pub enum CompactGrid {
    /// Product of rectangles, one per complex coordinate.
    Box {
        axes: Vec<BoxAxis>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta: Option<f64>,
    },
    /// `r_min <= |z - center| <= r_max` in one variable; angles are offset
    /// by half a step.
    Annulus {
        center: [f64; 2],
        r_min: f64,
        r_max: f64,
        radial: usize,
        angular: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta: Option<f64>,
    },
}

fn linspace(a: f64, b: f64, k: usize) -> Vec<f64> {
    match k {
        0 => Vec::new(),
        1 => vec![0.5 * (a + b)],
        _ => (0..k)
            .map(|i| a + (b - a) * i as f64 / (k - 1) as f64)
            .collect(),
    }
}

impl CompactGrid {
    pub fn boxed(axes: Vec<BoxAxis>, delta: Option<f64>) -> Self {
        CompactGrid::Box { axes, delta }
    }

    pub fn annulus(
        center: C64,
        r_min: f64,
        r_max: f64,
        radial: usize,
        angular: usize,
        delta: Option<f64>,
    ) -> Self {
        CompactGrid::Annulus {
            center: [center.re, center.im],
            r_min,
            r_max,
            radial,
            angular,
            delta,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            CompactGrid::Box { axes, .. } => axes.len(),
            CompactGrid::Annulus { .. } => 1,
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            CompactGrid::Box { axes, .. } => axes
                .iter()
                .map(|a| (a.re[1] - a.re[0]).powi(2) + (a.im[1] - a.im[0]).powi(2))
                .sum::<f64>()
                .sqrt(),
            CompactGrid::Annulus { r_max, .. } => 2.0 * r_max,
        }
    }

    pub fn delta(&self) -> f64 {
        let explicit = match self {
            CompactGrid::Box { delta, .. } | CompactGrid::Annulus { delta, .. } => *delta,
        };
        explicit.unwrap_or(DEFAULT_DELTA_FRACTION * self.diameter())
    }

    fn validate(&self) -> Result<()> {
        let delta = self.delta();
        if !delta.is_finite() || delta < MIN_DELTA {
            return Err(Error::Invalid(format!(
                "exclusion margin delta = {delta:e} must be >= 1e-6"
            )));
        }
        match self {
            CompactGrid::Box { axes, .. } => {
                if axes.is_empty() {
                    return Err(Error::Invalid("box grid needs at least one axis".into()));
                }
                for a in axes {
                    let ok = [a.re[0], a.re[1], a.im[0], a.im[1]]
                        .iter()
                        .all(|x| x.is_finite())
                        && a.re[0] <= a.re[1]
                        && a.im[0] <= a.im[1];
                    if !ok {
                        return Err(Error::Invalid(
                            "box axis ranges must be finite and ordered".into(),
                        ));
                    }
                }
            }
            CompactGrid::Annulus { r_min, r_max, .. } => {
                if !(0.0 <= *r_min && r_min <= r_max && r_max.is_finite()) {
                    return Err(Error::Invalid(
                        "annulus radii must satisfy 0 <= r_min <= r_max".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// All raw sample points, before exclusion.
    pub fn raw_points(&self) -> Result<Vec<Vec<C64>>> {
        self.validate()?;
        match self {
            CompactGrid::Box { axes, .. } => {
                let per_axis: Vec<Vec<C64>> = axes
                    .iter()
                    .map(|a| {
                        let xs = linspace(a.re[0], a.re[1], a.points[0]);
                        let ys = linspace(a.im[0], a.im[1], a.points[1]);
                        xs.iter()
                            .flat_map(|&x| ys.iter().map(move |&y| C64::new(x, y)))
                            .collect()
                    })
                    .collect();
                let mut pts: Vec<Vec<C64>> = vec![Vec::new()];
                for axis in &per_axis {
                    pts = pts
                        .into_iter()
                        .flat_map(|p| {
                            axis.iter().map(move |&z| {
                                let mut q = p.clone();
                                q.push(z);
                                q
                            })
                        })
                        .collect();
                }
                Ok(pts)
            }
            CompactGrid::Annulus {
                center,
                r_min,
                r_max,
                radial,
                angular,
                ..
            } => {
                let c = C64::new(center[0], center[1]);
                let step = 2.0 * std::f64::consts::PI / *angular as f64;
                Ok(linspace(*r_min, *r_max, *radial)
                    .into_iter()
                    .flat_map(|r| {
                        (0..*angular)
                            .map(move |k| vec![c + C64::from_polar(r, step * (k as f64 + 0.5))])
                    })
                    .collect())
            }
        }
    }

    /// Grid points with `|f_0| >= delta`.
    pub fn points(&self, f0: &HoloMap) -> Result<Vec<Vec<C64>>> {
        if f0.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: f0.dim(),
                got: self.dim(),
            });
        }
        let delta = self.delta();
        let mut kept = Vec::new();
        for p in self.raw_points()? {
            if f0.eval(&p)?.norm() >= delta {
                kept.push(p);
            }
        }
        if kept.is_empty() {
            return Err(Error::EmptyGrid);
        }
        Ok(kept)
    }

    /// Whether `z` lies in the compact region sampled by the grid.
    pub fn contains(&self, z: &[C64]) -> bool {
        match self {
            CompactGrid::Box { axes, .. } => {
                axes.len() == z.len()
                    && axes.iter().zip(z).all(|(a, w)| {
                        (a.re[0]..=a.re[1]).contains(&w.re) && (a.im[0]..=a.im[1]).contains(&w.im)
                    })
            }
            CompactGrid::Annulus {
                center,
                r_min,
                r_max,
                ..
            } => {
                z.len() == 1 && {
                    let r = (z[0] - C64::new(center[0], center[1])).norm();
                    *r_min <= r && r <= *r_max
                }
            }
        }
    }
}

fn check_off_divisor(fj: &HoloMap, j: u64, points: &[Vec<C64>]) -> Result<()> {
    let mut bad = Vec::new();
    for p in points {
        if fj.eval(p)?.norm() < DIVISOR_EPS {
            bad.push(fmt_point(p));
        }
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::GridTouchesDivisor { j, points: bad })
    }
}

/// Largest eigenvalue magnitude of a Hermitian matrix.
pub fn spectral_norm(m: &DMatrix<C64>) -> f64 {
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .map(|x| x.abs())
        .fold(0.0, f64::max)
}

pub fn sup_metric_gap(fam: &DivisorFamily, grid: &CompactGrid, j: u64) -> Result<f64> {
    sup_metric_gap_with(Exec::default(), fam, grid, j)
}

/// `max_z ||G_j(z) - G_0(z)||_2` over the grid.
pub fn sup_metric_gap_with(
    exec: Exec,
    fam: &DivisorFamily,
    grid: &CompactGrid,
    j: u64,
) -> Result<f64> {
    let pts = grid.points(fam.f0())?;
    let fj = fam.fj(j)?;
    check_off_divisor(&fj, j, &pts)?;
    par::try_max(exec, &pts, |z| {
        let diff = metric_matrix(&fj, z)? - metric_matrix(fam.f0(), z)?;
        Ok(spectral_norm(&diff))
    })
}

pub fn curvature_gap(
    fam: &DivisorFamily,
    x: &VectorField,
    grid: &CompactGrid,
    j: u64,
) -> Result<f64> {
    curvature_gap_with(Exec::default(), fam, x, grid, j)
}

/// `max_q |K^X_j(q) - K^X_0(q)|` over the grid.
pub fn curvature_gap_with(
    exec: Exec,
    fam: &DivisorFamily,
    x: &VectorField,
    grid: &CompactGrid,
    j: u64,
) -> Result<f64> {
    if x.dim() != fam.dim() {
        return Err(Error::DimensionMismatch {
            expected: fam.dim(),
            got: x.dim(),
        });
    }
    let pts = grid.points(fam.f0())?;
    let fj = fam.fj(j)?;
    check_off_divisor(&fj, j, &pts)?;
    par::try_max(exec, &pts, |q| {
        Ok((leaf_curvature(&fj, x, q)? - leaf_curvature(fam.f0(), x, q)?).abs())
    })
}

/// `f_j -> h f_j`. Fails if `min |h| <= 1e-8` on the grid's raw points.
pub fn twisted_family(
    fam: &DivisorFamily,
    unit: &HoloMap,
    grid: &CompactGrid,
) -> Result<DivisorFamily> {
    let mut min = f64::INFINITY;
    for p in grid.raw_points()? {
        min = min.min(unit.eval(&p)?.norm());
    }
    if min.is_nan() || min <= UNIT_EPS {
        return Err(Error::UnitVanishes(min));
    }
    fam.twisted_unchecked(unit.clone())
}

/// Zeros of a one-variable map lying in the grid region.
pub fn zeros_in(f: &HoloMap, grid: &CompactGrid) -> Result<Vec<C64>> {
    if f.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: f.dim(),
        });
    }
    let num = f.as_rational()?.0;
    let roots = poly_roots(&num.univariate_coeffs()?)?;
    Ok(roots.into_iter().filter(|z| grid.contains(&[*z])).collect())
}

/// Whether two finite point sets agree as multisets within `tol`.
pub fn same_points(a: &[C64], b: &[C64], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    a.iter().all(|x| {
        let best = (0..b.len())
            .filter(|&k| !used[k])
            .min_by(|&p, &q| (b[p] - x).norm().total_cmp(&(b[q] - x).norm()));
        match best {
            Some(k) if (b[k] - x).norm() <= tol => {
                used[k] = true;
                true
            }
            _ => false,
        }
    })
}

/// Outcome of comparing `K_0(p, V)` with the tail of `K_j(p, V)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LiminfReport {
    #[serde(rename = "K0")]
    pub k0: f64,
    #[serde(rename = "Kj_min")]
    pub kj_min: f64,
    pub j_min: u64,
    pub margin: f64,
    pub tail: Vec<u64>,
    pub pass: bool,
}

pub const LIMINF_TOL: f64 = 1e-6;

/// Compares `K_0(p,V)` with `min_{j in J, j >= tail} K_j(p,V)`.
pub fn liminf_check(fam: &DivisorFamily, p: &[C64], v: &[C64], tail: u64) -> Result<LiminfReport> {
    liminf_check_with(Exec::default(), fam, p, v, tail)
}

pub fn liminf_check_with(
    exec: Exec,
    fam: &DivisorFamily,
    p: &[C64],
    v: &[C64],
    tail: u64,
) -> Result<LiminfReport> {
    let js: Vec<u64> = fam
        .indices()
        .iter()
        .copied()
        .filter(|&j| j >= tail)
        .collect();
    if js.is_empty() {
        return Err(Error::Invalid(format!(
            "no index j >= {tail} in the family"
        )));
    }
    let k0 = hsc(fam.f0(), p, v)?;
    let ks = par::try_map(exec, &js, |&j| hsc(&fam.fj(j)?, p, v))?;
    let (pos, kj_min) = ks
        .iter()
        .copied()
        .enumerate()
        .fold(
            (0, f64::INFINITY),
            |acc, (i, k)| if k < acc.1 { (i, k) } else { acc },
        );
    let margin = kj_min - k0;
    Ok(LiminfReport {
        k0,
        kj_min,
        j_min: js[pos],
        margin,
        tail: js,
        pass: margin >= -LIMINF_TOL,
    })
}

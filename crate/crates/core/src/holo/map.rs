use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly::Polynomial;
use super::series;
use super::taylor::{index_set, Taylor};
use crate::error::{fmt_point, Error, Result};

/// Denominators with modulus at or below this are treated as vanishing.
pub const DENOMINATOR_EPS: f64 = 1e-300;

/// Relative threshold below which a Taylor coefficient counts as zero in
/// [`zero_order`].
pub const ZERO_ORDER_RTOL: f64 = 1e-12;

/// A holomorphic map `C^n -> C`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HoloMap {
    Poly(Polynomial),
    Quotient {
        num: Polynomial,
        den: Polynomial,
    },
    /// `unit(z) * base(z)`; used to twist a defining function by a
    /// nonvanishing holomorphic unit.
    Scaled {
        unit: Box<HoloMap>,
        base: Box<HoloMap>,
    },
}

impl From<Polynomial> for HoloMap {
    fn from(p: Polynomial) -> Self {
        HoloMap::Poly(p)
    }
}

impl HoloMap {
    pub fn quotient(num: Polynomial, den: Polynomial) -> Result<Self> {
        num.check_dim(den.dim())?;
        if den.is_zero() {
            return Err(Error::Invalid("quotient with zero denominator".into()));
        }
        Ok(HoloMap::Quotient { num, den })
    }

    pub fn scaled(unit: HoloMap, base: HoloMap) -> Result<Self> {
        if unit.dim() != base.dim() {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                got: unit.dim(),
            });
        }
        Ok(HoloMap::Scaled {
            unit: Box::new(unit),
            base: Box::new(base),
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            HoloMap::Poly(p) => p.dim(),
            HoloMap::Quotient { num, .. } => num.dim(),
            HoloMap::Scaled { base, .. } => base.dim(),
        }
    }

    /// Checks the structural invariants after deserialization.
    pub fn validate(&self) -> Result<()> {
        match self {
            HoloMap::Poly(_) => Ok(()),
            HoloMap::Quotient { num, den } => {
                num.check_dim(den.dim())?;
                if den.is_zero() {
                    return Err(Error::Invalid("quotient with zero denominator".into()));
                }
                Ok(())
            }
            HoloMap::Scaled { unit, base } => {
                unit.validate()?;
                base.validate()?;
                if unit.dim() != base.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: base.dim(),
                        got: unit.dim(),
                    });
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: z.len(),
            });
        }
        self.eval_inner(z)
    }

    fn eval_inner(&self, z: &[Complex64]) -> Result<Complex64> {
        match self {
            HoloMap::Poly(p) => Ok(p.eval_unchecked(z)),
            HoloMap::Quotient { num, den } => {
                let d = den.eval_unchecked(z);
                if d.norm() <= DENOMINATOR_EPS {
                    return Err(Error::DenominatorVanishes {
                        point: fmt_point(z),
                    });
                }
                Ok(num.eval_unchecked(z) / d)
            }
            HoloMap::Scaled { unit, base } => Ok(unit.eval_inner(z)? * base.eval_inner(z)?),
        }
    }

    /// Truncated Taylor expansion at `p` through total degree `order`.
    pub(crate) fn taylor(&self, p: &[Complex64], order: usize) -> Result<Taylor> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: p.len(),
            });
        }
        let set = index_set(self.dim(), order);
        self.taylor_on(p, &set)
    }

    fn taylor_on(
        &self,
        p: &[Complex64],
        set: &std::sync::Arc<super::taylor::IndexSet>,
    ) -> Result<Taylor> {
        match self {
            HoloMap::Poly(q) => Ok(Taylor::new(set.clone(), q.taylor(p, set))),
            HoloMap::Quotient { num, den } => {
                let d = Taylor::new(set.clone(), den.taylor(p, set));
                if d.value().norm() <= DENOMINATOR_EPS {
                    return Err(Error::DenominatorVanishes {
                        point: fmt_point(p),
                    });
                }
                let inv = d.recip().ok_or_else(|| Error::DenominatorVanishes {
                    point: fmt_point(p),
                })?;
                Ok(Taylor::new(set.clone(), num.taylor(p, set)).mul(&inv))
            }
            HoloMap::Scaled { unit, base } => {
                Ok(unit.taylor_on(p, set)?.mul(&base.taylor_on(p, set)?))
            }
        }
    }

    /// Evaluates on a vector of truncated univariate power series.
    pub(crate) fn compose_series(
        &self,
        z: &[Vec<Complex64>],
        len: usize,
    ) -> Result<Vec<Complex64>> {
        match self {
            HoloMap::Poly(p) => Ok(p.compose_series(z, len)),
            HoloMap::Quotient { num, den } => {
                let d = den.compose_series(z, len);
                if d[0].norm() <= DENOMINATOR_EPS {
                    let p: Vec<Complex64> = z.iter().map(|s| s[0]).collect();
                    return Err(Error::DenominatorVanishes {
                        point: fmt_point(&p),
                    });
                }
                let inv = series::recip(&d, len).expect("nonzero constant term");
                Ok(series::mul(&num.compose_series(z, len), &inv, len))
            }
            HoloMap::Scaled { unit, base } => Ok(series::mul(
                &unit.compose_series(z, len)?,
                &base.compose_series(z, len)?,
                len,
            )),
        }
    }

    /// `num / den` with polynomial factors multiplied out.
    pub fn as_rational(&self) -> Result<(Polynomial, Option<Polynomial>)> {
        match self {
            HoloMap::Poly(p) => Ok((p.clone(), None)),
            HoloMap::Quotient { num, den } => Ok((num.clone(), Some(den.clone()))),
            HoloMap::Scaled { unit, base } => {
                let (un, ud) = unit.as_rational()?;
                let (bn, bd) = base.as_rational()?;
                let num = un.mul(&bn)?;
                let den = match (ud, bd) {
                    (None, None) => None,
                    (Some(d), None) | (None, Some(d)) => Some(d),
                    (Some(a), Some(b)) => Some(a.mul(&b)?),
                };
                Ok((num, den))
            }
        }
    }

    /// The holomorphic partial `df/dz_var` as a new map.
    pub fn derivative(&self, var: usize) -> Result<HoloMap> {
        if var >= self.dim() {
            return Err(Error::Invalid(format!(
                "variable {var} out of range for dimension {}",
                self.dim()
            )));
        }
        let (num, den) = self.as_rational()?;
        match den {
            None => Ok(HoloMap::Poly(num.derivative(var))),
            Some(den) => {
                let top = num
                    .derivative(var)
                    .mul(&den)?
                    .sub(&num.mul(&den.derivative(var))?)?;
                HoloMap::quotient(top, den.mul(&den)?)
            }
        }
    }

    /// `1 / self`, as a quotient.
    pub fn reciprocal(&self) -> Result<HoloMap> {
        let (num, den) = self.as_rational()?;
        let top = den.unwrap_or_else(|| Polynomial::constant(num.dim(), Complex64::new(1.0, 0.0)));
        HoloMap::quotient(top, num)
    }

    /// Upper bound on the order of vanishing at any point.
    pub fn degree_budget(&self) -> usize {
        match self {
            HoloMap::Poly(p) => p.total_degree() as usize,
            HoloMap::Quotient { num, .. } => num.total_degree() as usize,
            HoloMap::Scaled { unit, base } => unit.degree_budget() + base.degree_budget(),
        }
    }
}

/// Value and holomorphic partials `d^a f(p)` for `|a| <= order`, keyed by
/// exponent multi-index. Permuted index lists share one entry, so mixed
/// partials are symmetric by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub point: Vec<Complex64>,
    pub order: usize,
    pub coefficients: BTreeMap<Vec<u32>, Complex64>,
}

impl Jet {
    pub fn value(&self) -> Complex64 {
        self.coefficients[&vec![0; self.point.len()]]
    }

    /// Partial along a list of variable indices, e.g. `[0, 1]` for
    /// `d^2 f / dz_0 dz_1`.
    pub fn partial(&self, vars: &[usize]) -> Option<Complex64> {
        let mut alpha = vec![0u32; self.point.len()];
        for &v in vars {
            *alpha.get_mut(v)? += 1;
        }
        self.coefficients.get(&alpha).copied()
    }
}

/// Exact holomorphic partials of `f` at `p` through `order <= 3`.
pub fn eval_jet(f: &HoloMap, p: &[Complex64], order: usize) -> Result<Jet> {
    if order > 3 {
        return Err(Error::OrderUnsupported(order));
    }
    let t = f.taylor(p, order)?;
    let mut coefficients = BTreeMap::new();
    for alpha in t.set.exps() {
        coefficients.insert(alpha.clone(), t.partial(alpha)?);
    }
    Ok(Jet {
        point: p.to_vec(),
        order,
        coefficients,
    })
}

/// Order of vanishing of a one-variable map at `p`.
pub fn zero_order(f: &HoloMap, p: Complex64) -> Result<usize> {
    if f.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: f.dim(),
        });
    }
    let budget = f.degree_budget().max(1);
    let t = f.taylor(&[p], budget)?;
    let scale = t.c.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::OrderExceedsDegree(budget));
    }
    t.c.iter()
        .position(|c| c.norm() > ZERO_ORDER_RTOL * scale)
        .ok_or(Error::OrderExceedsDegree(budget))
}

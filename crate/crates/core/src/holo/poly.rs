use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::series;
use super::taylor::{binomial, IndexSet};
use crate::error::{Error, Result};

/// Per-variable degree cap for every polynomial in the crate.
pub const DEGREE_CAP: u32 = 32;

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub exp: Vec<u32>,
    pub coef: Complex64,
}

/// Sparse polynomial in `n` complex variables.
///
/// Terms are kept sorted by exponent with duplicates merged and zero
/// coefficients removed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyJson", into = "PolyJson")]
pub struct Polynomial {
    n: usize,
    terms: Vec<Term>,
}

impl Polynomial {
    pub fn new<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, Complex64)>,
    {
        if n == 0 {
            return Err(Error::Invalid("polynomial dimension must be >= 1".into()));
        }
        let mut table: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
        for (exp, coef) in terms {
            if exp.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: exp.len(),
                });
            }
            if !(coef.re.is_finite() && coef.im.is_finite()) {
                return Err(Error::NonFinite(format!("coefficient of {exp:?}")));
            }
            for (var, &d) in exp.iter().enumerate() {
                if d > DEGREE_CAP {
                    return Err(Error::DegreeTooHigh {
                        var,
                        degree: d,
                        cap: DEGREE_CAP,
                    });
                }
            }
            *table.entry(exp).or_default() += coef;
        }
        let terms = table
            .into_iter()
            .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
            .map(|(exp, coef)| Term { exp, coef })
            .collect();
        Ok(Polynomial { n, terms })
    }

    pub fn zero(n: usize) -> Self {
        Polynomial {
            n,
            terms: Vec::new(),
        }
    }

    pub fn constant(n: usize, c: Complex64) -> Self {
        Polynomial::new(n, [(vec![0; n], c)]).expect("constant polynomial")
    }

    /// The coordinate function `z_i`.
    pub fn var(n: usize, i: usize) -> Self {
        let mut exp = vec![0; n];
        exp[i] = 1;
        Polynomial::new(n, [(exp, Complex64::new(1.0, 0.0))]).expect("coordinate polynomial")
    }

    /// Univariate polynomial from coefficients `c[0] + c[1] z + ...`.
    pub fn from_coeffs(coeffs: &[Complex64]) -> Result<Self> {
        Polynomial::new(
            1,
            coeffs.iter().enumerate().map(|(k, &c)| (vec![k as u32], c)),
        )
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.iter().map(|t| t.exp[var]).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|t| t.exp.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Largest coefficient modulus.
    pub fn coef_scale(&self) -> f64 {
        self.terms.iter().map(|t| t.coef.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        self.check_dim(z.len())?;
        Ok(self.eval_unchecked(z))
    }

    pub(crate) fn eval_unchecked(&self, z: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|t| {
                t.exp
                    .iter()
                    .zip(z)
                    .fold(t.coef, |acc, (&e, zi)| acc * zi.powi(e as i32))
            })
            .sum()
    }

    pub(crate) fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got,
            });
        }
        Ok(())
    }

    pub fn derivative(&self, var: usize) -> Polynomial {
        let terms = self.terms.iter().filter(|t| t.exp[var] > 0).map(|t| {
            let mut exp = t.exp.clone();
            let e = exp[var];
            exp[var] -= 1;
            (exp, t.coef * e as f64)
        });
        Polynomial::new(self.n, terms).expect("derivative lowers degree")
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_dim(other.n)?;
        Polynomial::new(
            self.n,
            self.terms
                .iter()
                .chain(&other.terms)
                .map(|t| (t.exp.clone(), t.coef)),
        )
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Polynomial {
        Polynomial::new(
            self.n,
            self.terms.iter().map(|t| (t.exp.clone(), t.coef * c)),
        )
        .expect("scaling keeps the exponent table")
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_dim(other.n)?;
        let mut out = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let exp: Vec<u32> = a.exp.iter().zip(&b.exp).map(|(x, y)| x + y).collect();
                out.push((exp, a.coef * b.coef));
            }
        }
        Polynomial::new(self.n, out)
    }

    /// Taylor coefficients `d^a f(p) / a!` for every multi-index of `set`.
    pub(crate) fn taylor(&self, p: &[Complex64], set: &IndexSet) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); set.len()];
        for (slot, alpha) in out.iter_mut().zip(set.exps()) {
            let mut acc = Complex64::new(0.0, 0.0);
            'term: for t in &self.terms {
                let mut prod = t.coef;
                for ((&e, &a), pi) in t.exp.iter().zip(alpha).zip(p) {
                    if a > e {
                        continue 'term;
                    }
                    prod *= binomial(e, a) * pi.powi((e - a) as i32);
                }
                acc += prod;
            }
            *slot = acc;
        }
        out
    }

    /// Evaluates the polynomial on a vector of truncated power series.
    pub(crate) fn compose_series(&self, z: &[Vec<Complex64>], len: usize) -> Vec<Complex64> {
        let mut powers: Vec<Vec<Vec<Complex64>>> = Vec::with_capacity(self.n);
        for (var, zi) in z.iter().enumerate() {
            let deg = self.degree_in(var) as usize;
            let mut pw = Vec::with_capacity(deg + 1);
            pw.push(series::one(len));
            for k in 1..=deg {
                let next = series::mul(&pw[k - 1], zi, len);
                pw.push(next);
            }
            powers.push(pw);
        }
        let mut acc = vec![Complex64::new(0.0, 0.0); len];
        for t in &self.terms {
            let mut term = series::one(len);
            term[0] = t.coef;
            for (var, &e) in t.exp.iter().enumerate() {
                if e > 0 {
                    term = series::mul(&term, &powers[var][e as usize], len);
                }
            }
            for (a, b) in acc.iter_mut().zip(&term) {
                *a += b;
            }
        }
        acc
    }

    /// Dense coefficient vector of a univariate polynomial.
    pub fn univariate_coeffs(&self) -> Result<Vec<Complex64>> {
        if self.n != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: self.n,
            });
        }
        let mut c = vec![Complex64::new(0.0, 0.0); self.degree_in(0) as usize + 1];
        for t in &self.terms {
            c[t.exp[0] as usize] += t.coef;
        }
        Ok(c)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermJson {
    exp: Vec<u32>,
    re: f64,
    #[serde(default)]
    im: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyJson {
    n: usize,
    terms: Vec<TermJson>,
}

impl TryFrom<PolyJson> for Polynomial {
    type Error = Error;

    fn try_from(j: PolyJson) -> Result<Self> {
        Polynomial::new(
            j.n,
            j.terms
                .into_iter()
                .map(|t| (t.exp, Complex64::new(t.re, t.im))),
        )
    }
}

impl From<Polynomial> for PolyJson {
    fn from(p: Polynomial) -> Self {
        PolyJson {
            n: p.n,
            terms: p
                .terms
                .into_iter()
                .map(|t| TermJson {
                    exp: t.exp,
                    re: t.coef.re,
                    im: t.coef.im,
                })
                .collect(),
        }
    }
}

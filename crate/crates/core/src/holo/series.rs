//! Univariate truncated power series in the leaf parameter `T`.

use num_complex::Complex64;

pub(crate) fn one(len: usize) -> Vec<Complex64> {
    let mut s = vec![Complex64::new(0.0, 0.0); len];
    if len > 0 {
        s[0] = Complex64::new(1.0, 0.0);
    }
    s
}

pub(crate) fn mul(a: &[Complex64], b: &[Complex64], len: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for (i, &ai) in a.iter().enumerate().take(len) {
        if ai == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(len - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

pub(crate) fn recip(a: &[Complex64], len: usize) -> Option<Vec<Complex64>> {
    let a0 = *a.first()?;
    if a0.norm() == 0.0 {
        return None;
    }
    let inv0 = a0.inv();
    let mut r = vec![Complex64::new(0.0, 0.0); len];
    r[0] = inv0;
    for k in 1..len {
        let acc: Complex64 = (1..=k.min(a.len() - 1)).map(|i| a[i] * r[k - i]).sum();
        r[k] = -acc * inv0;
    }
    Some(r)
}

/// Horner evaluation of `sum c_j T^j`.
pub fn eval(c: &[Complex64], t: Complex64) -> Complex64 {
    c.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &cj| acc * t + cj)
}

/// Horner evaluation of the term-wise derivative `sum j c_j T^(j-1)`.
pub fn eval_deriv(c: &[Complex64], t: Complex64) -> Complex64 {
    c.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, (j, &cj)| {
            acc * t + cj * j as f64
        })
}

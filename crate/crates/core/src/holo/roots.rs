use num_complex::Complex64;

use crate::error::{Error, Result};

/// All roots of `c[0] + c[1] z + ... + c[d] z^d` by Aberth-Ehrlich
/// iteration, finished with a few Newton steps.
pub fn poly_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut c = coeffs.to_vec();
    while c.last().is_some_and(|x| x.norm() == 0.0) {
        c.pop();
    }
    if c.is_empty() {
        return Err(Error::Invalid(
            "zero polynomial has no finite root set".into(),
        ));
    }
    let deg = c.len() - 1;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = c[deg];
    let monic: Vec<Complex64> = c.iter().map(|x| x / lead).collect();
    let dmonic: Vec<Complex64> = (1..=deg).map(|k| monic[k] * k as f64).collect();

    // Cauchy bound
    let radius = 1.0 + monic[..deg].iter().map(|x| x.norm()).fold(0.0, f64::max);
    let r0 = radius.min(1e6) * 0.5;
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| {
            Complex64::from_polar(
                r0,
                2.0 * std::f64::consts::PI * (k as f64 + 0.25) / deg as f64 + 0.4,
            )
        })
        .collect();

    for _ in 0..1000 {
        let mut max_step: f64 = 0.0;
        for i in 0..deg {
            let p = horner(&monic, z[i]);
            let dp = horner(&dmonic, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..deg)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            z[i] -= w;
            max_step = max_step.max(w.norm() / (1.0 + z[i].norm()));
        }
        if max_step < 1e-16 {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let dp = horner(&dmonic, *zi);
            if dp.norm() == 0.0 {
                break;
            }
            *zi -= horner(&monic, *zi) / dp;
        }
    }
    Ok(z)
}

fn horner(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &x| acc * z + x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_known_roots() {
        let want = [
            Complex64::new(1.0, 0.0),
            Complex64::new(-2.0, 0.5),
            Complex64::new(0.0, 3.0),
        ];
        // expand (z - r0)(z - r1)(z - r2)
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for r in want {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (k, &ck) in c.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= ck * r;
            }
            c = next;
        }
        let got = poly_roots(&c).unwrap();
        for r in want {
            let best = got
                .iter()
                .map(|g| (g - r).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-12, "root {r} missed by {best}");
        }
    }
}

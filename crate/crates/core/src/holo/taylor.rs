//! Truncated multivariate Taylor expansions, used to get exact holomorphic
//! partials of products and quotients of polynomials.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub(crate) fn multi_factorial(alpha: &[u32]) -> f64 {
    alpha
        .iter()
        .map(|&a| (1..=a).map(f64::from).product::<f64>())
        .product()
}

/// All multi-indices of total degree `<= order` in `n` variables, in graded
/// order, with the additive decomposition table needed for products.
#[derive(Debug)]
pub(crate) struct IndexSet {
    n: usize,
    exps: Vec<Vec<u32>>,
    lookup: HashMap<Vec<u32>, usize>,
    decomp: Vec<Vec<(usize, usize)>>,
}

impl IndexSet {
    fn build(n: usize, order: usize) -> Self {
        let mut exps: Vec<Vec<u32>> = Vec::new();
        for total in 0..=order as u32 {
            let mut cur = vec![0u32; n];
            push_compositions(total, 0, &mut cur, &mut exps);
        }
        let lookup: HashMap<Vec<u32>, usize> = exps
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        let mut decomp = vec![Vec::new(); exps.len()];
        for (i, a) in exps.iter().enumerate() {
            for (j, b) in exps.iter().enumerate() {
                let sum: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                if let Some(&k) = lookup.get(&sum) {
                    decomp[k].push((i, j));
                }
            }
        }
        IndexSet {
            n,
            exps,
            lookup,
            decomp,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.exps.len()
    }

    pub(crate) fn dim(&self) -> usize {
        self.n
    }

    pub(crate) fn exps(&self) -> &[Vec<u32>] {
        &self.exps
    }

    pub(crate) fn index_of(&self, alpha: &[u32]) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }
}

fn push_compositions(remaining: u32, var: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if var + 1 == cur.len() {
        cur[var] = remaining;
        out.push(cur.clone());
        return;
    }
    for a in (0..=remaining).rev() {
        cur[var] = a;
        push_compositions(remaining - a, var + 1, cur, out);
    }
    cur[var] = 0;
}

type IndexCache = Mutex<HashMap<(usize, usize), Arc<IndexSet>>>;

pub(crate) fn index_set(n: usize, order: usize) -> Arc<IndexSet> {
    static CACHE: OnceLock<IndexCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("index-set cache poisoned");
    guard
        .entry((n, order))
        .or_insert_with(|| Arc::new(IndexSet::build(n, order)))
        .clone()
}

/// Taylor coefficients `d^a f(p) / a!` on a shared [`IndexSet`].
#[derive(Clone, Debug)]
pub(crate) struct Taylor {
    pub(crate) set: Arc<IndexSet>,
    pub(crate) c: Vec<Complex64>,
}

impl Taylor {
    pub(crate) fn new(set: Arc<IndexSet>, c: Vec<Complex64>) -> Self {
        debug_assert_eq!(set.len(), c.len());
        Taylor { set, c }
    }

    pub(crate) fn value(&self) -> Complex64 {
        self.c[0]
    }

    pub(crate) fn mul(&self, other: &Taylor) -> Taylor {
        let c = self
            .set
            .decomp
            .iter()
            .map(|pairs| pairs.iter().map(|&(i, j)| self.c[i] * other.c[j]).sum())
            .collect();
        Taylor::new(self.set.clone(), c)
    }

    /// Series reciprocal; the constant term must be nonzero.
    pub(crate) fn recip(&self) -> Option<Taylor> {
        let g0 = self.c[0];
        if g0.norm() == 0.0 {
            return None;
        }
        let inv0 = g0.inv();
        let mut r = vec![Complex64::new(0.0, 0.0); self.c.len()];
        r[0] = inv0;
        for k in 1..self.c.len() {
            // sum over b + g = k with b != 0 of g_b r_g
            let acc: Complex64 = self.set.decomp[k]
                .iter()
                .filter(|&&(i, _)| i != 0)
                .map(|&(i, j)| self.c[i] * r[j])
                .sum();
            r[k] = -acc * inv0;
        }
        Some(Taylor::new(self.set.clone(), r))
    }

    /// The holomorphic partial `d^alpha f(p)`.
    pub(crate) fn partial(&self, alpha: &[u32]) -> Result<Complex64> {
        let k = self
            .set
            .index_of(alpha)
            .ok_or(Error::OrderUnsupported(alpha.iter().sum::<u32>() as usize))?;
        Ok(self.c[k] * multi_factorial(alpha))
    }

    /// First derivatives `df/dz_i`.
    pub(crate) fn gradient(&self) -> Vec<Complex64> {
        let n = self.set.dim();
        (0..n)
            .map(|i| {
                let mut a = vec![0; n];
                a[i] = 1;
                self.c[self.set.index_of(&a).expect("order >= 1")]
            })
            .collect()
    }

    /// Second derivatives `d^2 f / dz_i dz_j`.
    pub(crate) fn hessian(&self) -> Vec<Vec<Complex64>> {
        let n = self.set.dim();
        let mut h = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for i in 0..n {
            for j in i..n {
                let mut a = vec![0; n];
                a[i] += 1;
                a[j] += 1;
                let v = self.c[self.set.index_of(&a).expect("order >= 2")] * multi_factorial(&a);
                h[i][j] = v;
                h[j][i] = v;
            }
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_set_sizes() {
        // C(n + m, m)
        assert_eq!(index_set(1, 3).len(), 4);
        assert_eq!(index_set(2, 2).len(), 6);
        assert_eq!(index_set(3, 3).len(), 20);
        assert_eq!(index_set(2, 3).exps()[0], vec![0, 0]);
    }

    #[test]
    fn reciprocal_of_one_minus_z_is_geometric() {
        let set = index_set(1, 6);
        let mut c = vec![Complex64::new(0.0, 0.0); 7];
        c[0] = Complex64::new(1.0, 0.0);
        c[1] = Complex64::new(-1.0, 0.0);
        let r = Taylor::new(set, c).recip().unwrap();
        for v in r.c {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(3, 4), 0.0);
        assert_eq!(binomial(32, 16), 601080390.0);
    }
}

use grauert_core::curvature::{hsc, hsc_from, k_plus, kahler_tensor};
use grauert_core::foliation::{integrate_leaf, leaf_curvature, VectorField, MAX_ORDER};
use grauert_core::grauert::grauert_density_jet;
use grauert_core::holo::{eval_jet, Complex64 as C64, HoloMap, Polynomial};
use grauert_core::metric::metric_matrix_jet;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn rand_c(r: &mut ChaCha8Rng, scale: f64) -> C64 {
    c(r.gen_range(-scale..scale), r.gen_range(-scale..scale))
}

fn exponents(n: usize, max_degree: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|e: Vec<u32>| {
                let used: u32 = e.iter().sum();
                (0..=max_degree - used).map(move |a| {
                    let mut e = e.clone();
                    e.push(a);
                    e
                })
            })
            .collect();
    }
    out
}

fn random_poly(r: &mut ChaCha8Rng, n: usize, max_degree: u32) -> Polynomial {
    let terms: Vec<(Vec<u32>, C64)> = exponents(n, max_degree)
        .into_iter()
        .map(|e| (e, rand_c(r, 1.0)))
        .collect();
    Polynomial::new(n, terms).unwrap()
}

fn random_point(r: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| rand_c(r, 1.0)).collect()
}

/// A random `f` of degree <= 3 and a point with `|f(p)| >= 0.05` and `df(p) != 0`.
fn off_divisor_case(seed: u64, n: usize) -> (HoloMap, Vec<C64>, ChaCha8Rng) {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let f: HoloMap = random_poly(&mut r, n, 3).into();
        let p = random_point(&mut r, n);
        let jet = eval_jet(&f, &p, 1).unwrap();
        let grad: f64 = (0..n).map(|i| jet.partial(&[i]).unwrap().norm_sqr()).sum();
        if jet.value().norm() >= 0.05 && grad > 1e-4 {
            return (f, p, r);
        }
    }
}

fn kernel_vector(r: &mut ChaCha8Rng, grad: &[C64]) -> Vec<C64> {
    let w = random_point(r, grad.len());
    let a2: f64 = grad.iter().map(|a| a.norm_sqr()).sum();
    let s: C64 = grad.iter().zip(&w).map(|(a, x)| a * x).sum();
    w.iter()
        .zip(grad)
        .map(|(x, a)| x - s / a2 * a.conj())
        .collect()
}

/// `V + sum_k B_k (z_k - p_k) + c (z_0 - p_0)^2`, so that `X(p) = V`.
fn field_through(r: &mut ChaCha8Rng, p: &[C64], v: &[C64]) -> VectorField {
    let n = p.len();
    let shift = |k: usize| {
        Polynomial::var(n, k)
            .sub(&Polynomial::constant(n, p[k]))
            .unwrap()
    };
    let comps = (0..n)
        .map(|i| {
            let mut x = Polynomial::constant(n, v[i]);
            for k in 0..n {
                x = x.add(&shift(k).scale(rand_c(r, 0.5))).unwrap();
            }
            let sq = shift(0).mul(&shift(0)).unwrap();
            x.add(&sq.scale(rand_c(r, 0.5))).unwrap().into()
        })
        .collect();
    VectorField::new(comps).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn jet_value_is_evaluation(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let f: HoloMap = random_poly(&mut r, n, 4).into();
        let p = random_point(&mut r, n);
        let jet = eval_jet(&f, &p, 3).unwrap();
        let v = f.eval(&p).unwrap();
        prop_assert!((jet.value() - v).norm() <= 1e-14 * v.norm().max(1.0));
        if n >= 2 {
            prop_assert_eq!(jet.partial(&[0, 1, 1]), jet.partial(&[1, 0, 1]));
        }
    }

    #[test]
    fn grauert_density_jet_is_real(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let w = C64::from_polar(10f64.powf(r.gen_range(-8.0..8.0)), r.gen_range(0.0..6.3));
        let j = grauert_density_jet(w).unwrap();
        prop_assert!(j.h >= 1.0);
        prop_assert_eq!(j.dbar, j.d.conj());
    }

    #[test]
    fn metric_matrix_is_hermitian_with_inverse(seed in any::<u64>(), n in 2usize..=3) {
        let (f, p, _) = off_divisor_case(seed, n);
        let md = metric_matrix_jet(&f, &p).unwrap();
        prop_assert!((&md.g - md.g.adjoint()).norm() < 1e-12 * md.g.norm());
        let eig = md.g.clone().symmetric_eigenvalues();
        prop_assert!(eig.iter().all(|&l| l >= 1.0 - 1e-10));
        let id = &md.g * &md.ginv;
        let err = (id - grauert_core::metric::CMatrix::identity(n, n)).norm();
        prop_assert!(err < 1e-10, "G Ginv - I = {err:e}");
    }

    #[test]
    fn tensor_symmetries(seed in any::<u64>(), n in 2usize..=3) {
        let (f, p, _) = off_divisor_case(seed, n);
        let t = kahler_tensor(&metric_matrix_jet(&f, &p).unwrap());
        let tol = 1e-8 * t.max_abs().max(1e-300);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let x = t.get(i, j, k, l);
                        prop_assert!((x - t.get(k, j, i, l)).norm() <= tol);
                        prop_assert!((x - t.get(i, l, k, j)).norm() <= tol);
                        prop_assert!((x - t.get(j, i, l, k).conj()).norm() <= tol);
                    }
                }
            }
        }
    }

    #[test]
    fn hsc_matches_tensor_and_is_scale_free(seed in any::<u64>(), n in 2usize..=3) {
        let (f, p, mut r) = off_divisor_case(seed, n);
        let md = metric_matrix_jet(&f, &p).unwrap();
        let v = random_point(&mut r, n);
        let k = hsc_from(&md, &v).unwrap();
        let gv: f64 = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (v[i] * md.g[(i, j)] * v[j].conj()).re)
            .sum();
        let from_tensor = 2.0 * kahler_tensor(&md).quartic(&v) / (gv * gv);
        prop_assert!((k - from_tensor).abs() <= 1e-8 * k.abs().max(1.0));
        for lambda in [c(2.0, 0.0), c(0.0, 1.0), c(1.0, 1.0)] {
            let w: Vec<C64> = v.iter().map(|x| x * lambda).collect();
            prop_assert!((hsc_from(&md, &w).unwrap() - k).abs() <= 1e-10 * k.abs().max(1.0));
        }
    }

    #[test]
    fn kernel_fields_have_nonpositive_curvature(seed in any::<u64>(), n in 2usize..=3) {
        let (f, p, mut r) = off_divisor_case(seed, n);
        let jet = eval_jet(&f, &p, 1).unwrap();
        let grad: Vec<C64> = (0..n).map(|i| jet.partial(&[i]).unwrap()).collect();
        for _ in 0..10 {
            let v = kernel_vector(&mut r, &grad);
            let k = leaf_curvature(&f, &VectorField::constant(&v), &p).unwrap();
            prop_assert!(k <= 1e-8, "leaf curvature {k:e}");
            prop_assert!(hsc(&f, &p, &v).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn leaf_curvature_is_bounded_by_hsc(seed in any::<u64>(), n in 2usize..=3) {
        let (f, p, mut r) = off_divisor_case(seed, n);
        let v = random_point(&mut r, n);
        let bound = hsc(&f, &p, &v).unwrap();
        for _ in 0..5 {
            let x = field_through(&mut r, &p, &v);
            let k = leaf_curvature(&f, &x, &p).unwrap();
            prop_assert!(k <= bound + 1e-6, "leaf {k} above hsc {bound}");
        }
    }

    #[test]
    fn constant_rescaling_keeps_leaf_curvature(seed in any::<u64>(), n in 2usize..=3) {
        let (f, p, mut r) = off_divisor_case(seed, n);
        let v = random_point(&mut r, n);
        let x = field_through(&mut r, &p, &v);
        let k = leaf_curvature(&f, &x, &p).unwrap();
        let lambda = rand_c(&mut r, 2.0) + c(0.1, 0.0);
        let ks = leaf_curvature(&f, &x.scaled(lambda).unwrap(), &p).unwrap();
        prop_assert!((k - ks).abs() <= 1e-8 * k.abs().max(1.0));
    }

    #[test]
    fn leaf_solves_the_field_equation(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let p = random_point(&mut r, n);
        let v: Vec<C64> = (0..n).map(|_| rand_c(&mut r, 1.0) + c(1.5, 0.0)).collect();
        let x = field_through(&mut r, &p, &v);
        let chart = integrate_leaf(&x, &p, MAX_ORDER).unwrap();
        let t = C64::from_polar(chart.radius.min(1.0) / 2.0, r.gen_range(0.0..6.3));
        let z = chart.eval(t).unwrap();
        let dz = chart.eval_deriv(t).unwrap();
        let xz = x.eval(&z).unwrap();
        let res = dz.iter().zip(&xz).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(res < 1e-9, "residual {res:e} at |T| = {}", t.norm());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn more_samples_never_lower_k_plus(seed in any::<u64>()) {
        let (f, p, _) = off_divisor_case(seed, 2);
        let coarse = k_plus(&f, &p, 64).unwrap();
        let fine = k_plus(&f, &p, 4096).unwrap();
        prop_assert!(fine.value >= coarse.value - 1e-12);
        prop_assert!((hsc(&f, &p, &fine.direction).unwrap() - fine.value).abs() < 1e-12 * fine.value.abs().max(1.0));
    }
}

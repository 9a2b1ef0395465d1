//! Bundled verification suites. Every check records what was expected, what
//! was observed and the tolerance; a numerical error inside a check fails
//! that check instead of aborting the suite.

use grauert_core::curvature::{critical_point_curvature, curvature_1d, hsc, k_plus};
use grauert_core::foliation::{divisor_approach, geometric_path, leaf_curvature, VectorField};
use grauert_core::grauert::{kg, kk};
use grauert_core::holo::{Complex64 as C64, HoloMap, Polynomial};
use grauert_core::lab::{
    curvature_gap, liminf_check, same_points, sup_metric_gap, twisted_family, zeros_in, BoxAxis,
    CompactGrid, DivisorFamily, FamilyTemplate, TemplateTerm, DEFAULT_CONVERGENCE_BOUND,
};
use grauert_core::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::args::Suite;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `|observed - expected| <= tolerance`
    Close,
    /// `observed <= expected + tolerance`
    AtMost,
    /// `observed >= expected - tolerance`
    AtLeast,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: f64,
    pub observed: Option<f64>,
    pub tolerance: f64,
    pub relation: Relation,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<Check>,
}

struct Recorder {
    checks: Vec<Check>,
}

impl Recorder {
    fn record(
        &mut self,
        name: &str,
        expected: f64,
        tolerance: f64,
        relation: Relation,
        observed: Result<f64>,
    ) {
        let (observed, error) = match observed {
            Ok(x) => (Some(x), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let pass = observed.is_some_and(|x| match relation {
            Relation::Close => (x - expected).abs() <= tolerance,
            Relation::AtMost => x <= expected + tolerance,
            Relation::AtLeast => x >= expected - tolerance,
        });
        self.checks.push(Check {
            name: name.to_string(),
            expected,
            observed,
            tolerance,
            relation,
            pass,
            error,
        });
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> SuiteReport {
    let mut rec = Recorder { checks: Vec::new() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (id, body): (&'static str, fn(&mut Recorder, &mut ChaCha8Rng)) = match suite {
        Suite::Thm11 => ("thm11", thm11),
        Suite::Thm12 => ("thm12", thm12),
        Suite::Thm13 => ("thm13", thm13),
        Suite::Thm51 => ("thm51", thm51),
        Suite::Lemma52 => ("lemma52", lemma52),
    };
    body(&mut rec, &mut rng);
    SuiteReport {
        suite: id,
        seed,
        pass: rec.checks.iter().all(|c| c.pass),
        checks: rec.checks,
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn rand_c(r: &mut ChaCha8Rng, scale: f64) -> C64 {
    c(r.gen_range(-scale..scale), r.gen_range(-scale..scale))
}

fn poly(n: usize, terms: &[(&[u32], C64)]) -> Result<HoloMap> {
    Ok(Polynomial::new(n, terms.iter().map(|(e, a)| (e.to_vec(), *a)))?.into())
}

fn random_poly_1d(r: &mut ChaCha8Rng, max_degree: usize) -> Result<HoloMap> {
    let deg = r.gen_range(1..=max_degree);
    let mut coeffs: Vec<C64> = (0..=deg).map(|_| rand_c(r, 1.0)).collect();
    if coeffs[deg].norm() < 0.1 {
        coeffs[deg] = c(1.0, 0.0);
    }
    Ok(Polynomial::from_coeffs(&coeffs)?.into())
}

fn unit_direction(r: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..n).map(|_| rand_c(r, 1.0)).collect();
    let s = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / s).collect()
}

/// Final gap of an approach sequence, or an error if the gap ever grows
/// above the roundoff floor.
fn approach_final_gap(f: &HoloMap, p: &[C64], dir: &[C64]) -> Result<f64> {
    let path = geometric_path(p, dir, 0.1, 2, 8)?;
    let seq = divisor_approach(f, p, &path)?;
    for w in seq.windows(2) {
        if !(w[1].gap < w[0].gap || w[1].gap < 1e-9) {
            return Err(grauert_core::Error::Invalid(format!(
                "gap grew from {:e} to {:e} at m = {}",
                w[0].gap, w[1].gap, w[1].m
            )));
        }
    }
    Ok(seq.last().map_or(f64::NAN, |a| a.gap))
}

fn lemma52(rec: &mut Recorder, _: &mut ChaCha8Rng) {
    for k in [1u32, 2, 3, 5] {
        let worst = (|| {
            let mut worst = 0.0f64;
            for i in 0..200 {
                let log_t = -12.0 + 24.0 * i as f64 / 199.0;
                let z = C64::from_polar(10f64.powf(log_t / (2.0 * k as f64)), 0.3 + 0.7 * i as f64);
                let want = kg(z.powu(k))?;
                worst = worst.max((kk(k, z)? - want).abs() / want.abs());
            }
            Ok(worst)
        })();
        rec.record(
            &format!("K_{k}(z) = K_g(z^{k}), max relative gap"),
            0.0,
            1e-8,
            Relation::AtMost,
            worst,
        );
    }
    rec.record(
        "K_2 at |z| = 1e-5",
        -4.0,
        0.2,
        Relation::Close,
        kk(2, c(1e-5, 0.0)),
    );
    rec.record(
        "K_g at |z| = 1",
        -1.0 / 12.0,
        1e-9,
        Relation::Close,
        kg(c(0.6, 0.8)),
    );
}

fn thm51(rec: &mut Recorder, rng: &mut ChaCha8Rng) {
    let cube = poly(1, &[(&[3], c(1.0, 0.0)), (&[0], c(1.0, 0.0))])
        .and_then(|f| critical_point_curvature(&f, c(0.0, 0.0)));
    rec.record("z^3 + 1 at 0", 0.0, 1e-8, Relation::Close, cube);
    let sq1 = poly(1, &[(&[2], c(1.0, 0.0)), (&[0], c(0.0, 1.0))])
        .and_then(|f| critical_point_curvature(&f, c(0.0, 0.0)));
    rec.record("z^2 + c at 0, |c|^2 = 1", -16.0, 1e-9, Relation::Close, sq1);
    let e = std::f64::consts::E;
    let sqe = poly(1, &[(&[2], c(1.0, 0.0)), (&[0], c(e.sqrt(), 0.0))])
        .and_then(|f| critical_point_curvature(&f, c(0.0, 0.0)));
    rec.record(
        "z^2 + c at 0, |c|^2 = e",
        -8.0 * (1.0 + (e - 1.0).powi(2) / e),
        1e-9,
        Relation::Close,
        sqe,
    );

    let max_k = (|| {
        let mut max_k = f64::NEG_INFINITY;
        for _ in 0..50 {
            let f = random_poly_1d(rng, 5)?;
            let mut taken = 0;
            while taken < 20 {
                let z = rand_c(rng, 2.0);
                if f.eval(&[z])?.norm() < 1e-6 {
                    continue;
                }
                max_k = max_k.max(curvature_1d(&f, z)?);
                taken += 1;
            }
        }
        Ok(max_k)
    })();
    rec.record(
        "max K over 50 random polynomials x 20 points",
        0.0,
        1e-8,
        Relation::AtMost,
        max_k,
    );

    for k in 1..=3u32 {
        let gap = poly(1, &[(&[k], c(1.0, 0.0))])
            .and_then(|f| approach_final_gap(&f, &[c(0.0, 0.0)], &[c(1.0, 0.0)]));
        rec.record(
            &format!("|K + 4| at |z| = 1e-9 for z^{k}"),
            0.0,
            0.3,
            Relation::AtMost,
            gap,
        );
    }
}

fn z1z2_minus(shift: f64) -> Result<HoloMap> {
    poly(2, &[(&[1, 1], c(1.0, 0.0)), (&[0, 0], c(-shift, 0.0))])
}

fn thm11(rec: &mut Recorder, rng: &mut ChaCha8Rng) {
    let max_k = (|| {
        let f = z1z2_minus(1.0)?;
        let mut max_k = f64::NEG_INFINITY;
        let mut taken = 0;
        while taken < 100 {
            let p = [rand_c(rng, 2.0), rand_c(rng, 2.0)];
            if f.eval(&p)?.norm() < 1e-3 {
                continue;
            }
            max_k = max_k.max(hsc(&f, &p, &[p[0], -p[1]])?);
            taken += 1;
        }
        Ok(max_k)
    })();
    rec.record(
        "max K(p, V) over kernel directions, z1 z2 - 1",
        0.0,
        1e-8,
        Relation::AtMost,
        max_k,
    );

    let leaf = z1z2_minus(1.0).and_then(|f| {
        let x = VectorField::constant(&[c(-2.0, 0.0), c(1.0, 0.0)]);
        leaf_curvature(&f, &x, &[c(2.0, 0.0), c(1.0, 0.0)])
    });
    rec.record(
        "kernel-field leaf curvature at (2, 1)",
        0.0,
        1e-8,
        Relation::AtMost,
        leaf,
    );

    let rank0 = poly(
        2,
        &[
            (&[2, 0], c(1.0, 0.0)),
            (&[0, 2], c(1.0, 0.0)),
            (&[0, 0], c(-1.0, 0.0)),
        ],
    )
    .and_then(|f| k_plus(&f, &[c(0.0, 0.0), c(0.0, 0.0)], 256))
    .map(|k| k.value);
    rec.record(
        "K+ at the rank-0 point of z1^2 + z2^2 - 1",
        0.0,
        1e-6,
        Relation::AtMost,
        rank0,
    );

    let smooth = poly(2, &[(&[1, 0], c(1.0, 0.0))]).and_then(|f| {
        approach_final_gap(&f, &[c(0.0, 0.0), c(0.0, 0.0)], &[c(1.0, 0.0), c(0.0, 0.0)])
    });
    rec.record(
        "transverse approach to (0, 0) on z1 = 0",
        0.0,
        0.3,
        Relation::AtMost,
        smooth,
    );
    let generic = z1z2_minus(1.0).and_then(|f| {
        approach_final_gap(&f, &[c(1.0, 0.0), c(1.0, 0.0)], &[c(1.0, 0.0), c(0.0, 0.0)])
    });
    rec.record(
        "transverse approach to (1, 1) on z1 z2 = 1",
        0.0,
        0.3,
        Relation::AtMost,
        generic,
    );
}

fn shifted_family(n: usize, indices: Vec<u64>) -> Result<DivisorFamily> {
    let t = FamilyTemplate {
        n,
        terms: vec![
            TemplateTerm {
                exp: vec![1; n],
                re: 1.0,
                im: 0.0,
                inv_j_re: 0.0,
                inv_j_im: 0.0,
            },
            TemplateTerm {
                exp: vec![0; n],
                re: -1.0,
                im: 0.0,
                inv_j_re: -1.0,
                inv_j_im: 0.0,
            },
        ],
    };
    DivisorFamily::new(t.limit()?.into(), t, indices, DEFAULT_CONVERGENCE_BOUND)
}

/// Compacts kept at distance 1/2 from the limit divisor.
fn gap_grid(n: usize) -> CompactGrid {
    if n == 1 {
        CompactGrid::annulus(c(1.0, 0.0), 0.5, 2.0, 31, 144, None)
    } else {
        let ax = BoxAxis {
            re: [0.25, 2.0],
            im: [-0.75, 0.75],
            points: [9, 9],
        };
        CompactGrid::boxed(vec![ax.clone(), ax], Some(0.5))
    }
}

fn ratio(first: Result<f64>, last: Result<f64>) -> Result<f64> {
    Ok(last? / first?)
}

fn thm12(rec: &mut Recorder, _: &mut ChaCha8Rng) {
    for n in [1, 2] {
        let r = shifted_family(n, vec![1, 64]).and_then(|fam| {
            let g = gap_grid(n);
            ratio(sup_metric_gap(&fam, &g, 1), sup_metric_gap(&fam, &g, 64))
        });
        rec.record(
            &format!("metric gap(64)/gap(1), n = {n}"),
            0.0,
            1e-2,
            Relation::AtMost,
            r,
        );
    }
    let twisted = shifted_family(1, vec![1, 64]).and_then(|fam| {
        let g = gap_grid(1);
        let two: HoloMap = Polynomial::constant(1, c(2.0, 0.0)).into();
        let tw = twisted_family(&fam, &two, &g)?;
        ratio(sup_metric_gap(&tw, &g, 1), sup_metric_gap(&tw, &g, 64))
    });
    rec.record(
        "twisted by h = 2: metric gap(64)/gap(1)",
        0.0,
        1e-2,
        Relation::AtMost,
        twisted,
    );

    let zeros = shifted_family(1, vec![1, 4, 64]).and_then(|fam| {
        // the grid stays away from the zero of h at -2
        let g = CompactGrid::annulus(c(0.5, 0.0), 0.0, 1.8, 4, 8, Some(0.05));
        let h = poly(1, &[(&[1], c(1.0, 0.0)), (&[0], c(2.0, 0.0))])?;
        let tw = twisted_family(&fam, &h, &g)?;
        let mut mismatched = 0.0;
        for &j in fam.indices() {
            if !same_points(
                &zeros_in(&fam.fj(j)?, &g)?,
                &zeros_in(&tw.fj(j)?, &g)?,
                1e-9,
            ) {
                mismatched += 1.0;
            }
        }
        Ok(mismatched)
    });
    rec.record(
        "twisted by h = 2 + z: zero sets unchanged (mismatches)",
        0.0,
        0.0,
        Relation::Close,
        zeros,
    );
}

fn thm13(rec: &mut Recorder, rng: &mut ChaCha8Rng) {
    for n in [1, 2] {
        let r = shifted_family(n, vec![1, 64]).and_then(|fam| {
            let g = gap_grid(n);
            let x = VectorField::constant(&{
                let mut v = vec![c(0.0, 0.0); n];
                v[0] = c(1.0, 0.0);
                v
            });
            ratio(
                curvature_gap(&fam, &x, &g, 1),
                curvature_gap(&fam, &x, &g, 64),
            )
        });
        rec.record(
            &format!("curvature gap(64)/gap(1), n = {n}"),
            0.0,
            1e-2,
            Relation::AtMost,
            r,
        );

        let mut js: Vec<u64> = (0..=6).map(|e| 1 << e).collect();
        js.extend((24..=32).map(|e| 1u64 << e));
        let margin = shifted_family(n, js).and_then(|fam| {
            let mut worst = f64::INFINITY;
            let mut taken = 0;
            while taken < 20 {
                let p: Vec<C64> = (0..n).map(|_| c(1.0, 0.0) + rand_c(rng, 1.0)).collect();
                if fam.f0().eval(&p)?.norm() < 0.5 {
                    continue;
                }
                let v = unit_direction(rng, n);
                worst = worst.min(liminf_check(&fam, &p, &v, 1 << 24)?.margin);
                taken += 1;
            }
            Ok(worst)
        });
        rec.record(
            &format!("min over 20 (p, V) of liminf margin, n = {n}"),
            0.0,
            1e-6,
            Relation::AtLeast,
            margin,
        );
    }
}

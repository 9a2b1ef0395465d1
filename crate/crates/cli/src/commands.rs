//! One function per subcommand; each parses all of its inputs before
//! computing anything.

use grauert_core::curvature::{curvature_1d, hsc, k_plus};
use grauert_core::foliation::{divisor_approach, geometric_path, leaf_curvature, VectorField};
use grauert_core::grauert::{kg, u_jet};
use grauert_core::holo::Complex64 as C64;
use grauert_core::lab::{curvature_gap, liminf_check, sup_metric_gap, DivisorFamily};
use grauert_core::metric::{metric_eval, metric_matrix};
use grauert_core::par::{self, Exec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::args::*;
use crate::error::{CliError, CliResult};
use crate::input::{check_dim, load_family, load_field, load_grid, load_map};
use crate::output::{fmt_f64, point_cells, point_columns, Artifact, Table};

/// What a command produced and whether its checks passed.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub artifact: Artifact,
    pub pass: bool,
}

impl Outcome {
    fn ok(artifact: Artifact) -> Self {
        Outcome {
            artifact,
            pass: true,
        }
    }
}

fn logspace(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    match k {
        1 => vec![lo],
        _ => (0..k)
            .map(|i| 10f64.powf(a + (b - a) * i as f64 / (k - 1) as f64))
            .collect(),
    }
}

fn positive_range(name: &str, lo: f64, hi: f64, count: usize) -> CliResult<()> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || count == 0 {
        return Err(CliError::Config(format!(
            "{name}: need 0 < min <= max < inf and at least one point, got [{lo}, {hi}] with {count}"
        )));
    }
    Ok(())
}

fn unit(n: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); n];
    v[0] = C64::new(1.0, 0.0);
    v
}

fn complex_json(z: &[C64]) -> serde_json::Value {
    json!(z.iter().map(|w| [w.re, w.im]).collect::<Vec<_>>())
}

pub fn u_table(a: &UTableArgs) -> CliResult<Outcome> {
    positive_range("t range", a.t_min, a.t_max, a.points)?;
    let mut t = Table::new(["t", "u", "up", "upp"]);
    for x in logspace(a.t_min, a.t_max, a.points) {
        let j = u_jet(x)?;
        t.push(vec![
            fmt_f64(j.t),
            fmt_f64(j.u),
            fmt_f64(j.up),
            fmt_f64(j.upp),
        ]);
    }
    Ok(Outcome::ok(Artifact::Csv(t)))
}

pub fn kg_grid(a: &KgGridArgs) -> CliResult<Outcome> {
    positive_range("radius range", a.rmin, a.rmax, a.radii)?;
    if a.angles == 0 {
        return Err(CliError::Config("--angles must be positive".into()));
    }
    let step = std::f64::consts::TAU / a.angles as f64;
    let points: Vec<C64> = logspace(a.rmin, a.rmax, a.radii)
        .into_iter()
        .flat_map(|r| (0..a.angles).map(move |k| C64::from_polar(r, step * k as f64)))
        .collect();
    let ks = par::try_map(Exec::default(), &points, |&z| kg(z))?;
    let mut t = Table::new(["re", "im", "Kg"]);
    for (z, k) in points.iter().zip(ks) {
        t.push(vec![fmt_f64(z.re), fmt_f64(z.im), fmt_f64(k)]);
    }
    Ok(Outcome::ok(Artifact::Csv(t)))
}

pub fn metric_eval_cmd(a: &MetricEvalArgs) -> CliResult<Outcome> {
    let f = load_map(&a.f)?;
    check_dim("--z", a.z.0.len(), f.dim())?;
    check_dim("--V", a.v.0.len(), f.dim())?;
    let phi = metric_eval(&f, &a.z.0, &a.v.0)?;
    let g = metric_matrix(&f, &a.z.0)?;
    let det = g.determinant().re;
    let rows: Vec<Vec<[f64; 2]>> = g
        .row_iter()
        .map(|r| r.iter().map(|x| [x.re, x.im]).collect())
        .collect();
    Ok(Outcome::ok(Artifact::Json(
        json!({ "phi": phi, "G": rows, "detG": det }),
    )))
}

pub fn hsc_cmd(a: &HscArgs) -> CliResult<Outcome> {
    let f = load_map(&a.f)?;
    check_dim("--p", a.p.0.len(), f.dim())?;
    check_dim("--V", a.v.0.len(), f.dim())?;
    let k = hsc(&f, &a.p.0, &a.v.0)?;
    Ok(Outcome::ok(Artifact::Json(json!({ "K": k }))))
}

pub fn kplus_cmd(a: &KplusArgs) -> CliResult<Outcome> {
    let f = load_map(&a.f)?;
    check_dim("--p", a.p.0.len(), f.dim())?;
    let kp = k_plus(&f, &a.p.0, a.samples)?;
    Ok(Outcome::ok(Artifact::Json(json!({
        "K_plus": kp.value,
        "direction": complex_json(&kp.direction),
        "samples": kp.samples,
    }))))
}

pub fn curvature_grid(a: &CurvatureGridArgs) -> CliResult<Outcome> {
    let f = load_map(&a.f)?;
    let grid = load_grid(&a.grid)?;
    check_dim("grid", grid.dim(), f.dim())?;
    let points = grid.points(&f)?;
    let n = f.dim();
    let ks = par::try_map(Exec::default(), &points, |p| {
        if n == 1 {
            curvature_1d(&f, p[0])
        } else {
            // the sampling inside k_plus is already data-parallel
            k_plus(&f, p, a.samples).map(|k| k.value)
        }
    })?;
    let mut header = point_columns(n);
    header.push("K".into());
    let mut t = Table::new(header);
    for (p, k) in points.iter().zip(ks) {
        let mut row = point_cells(p);
        row.push(fmt_f64(k));
        t.push(row);
    }
    Ok(Outcome::ok(Artifact::Csv(t)))
}

pub fn leaf_curvature_cmd(a: &LeafCurvatureArgs) -> CliResult<Outcome> {
    let f = load_map(&a.f)?;
    let x = load_field(&a.x)?;
    check_dim("--X", x.dim(), f.dim())?;
    check_dim("--p", a.p.0.len(), f.dim())?;
    let k = leaf_curvature(&f, &x, &a.p.0)?;
    Ok(Outcome::ok(Artifact::Json(json!({ "K": k }))))
}

pub fn leaf_approach(a: &LeafApproachArgs) -> CliResult<Outcome> {
    let f = load_map(&a.f)?;
    let n = f.dim();
    check_dim("--base", a.base.0.len(), n)?;
    let dir = a
        .direction
        .as_ref()
        .map(|d| d.0.clone())
        .unwrap_or_else(|| unit(n));
    check_dim("--direction", dir.len(), n)?;
    let PathKind::Geometric = a.path;
    let path = geometric_path(&a.base.0, &dir, a.ratio, a.first, a.steps)?;
    let seq = divisor_approach(&f, &a.base.0, &path)?;
    let mut header = vec!["m".to_string()];
    header.extend(point_columns(n));
    header.extend(["K".to_string(), "gap".to_string()]);
    let mut t = Table::new(header);
    for s in seq {
        let mut row = vec![s.m.to_string()];
        row.extend(point_cells(&s.z));
        row.extend([fmt_f64(s.curvature), fmt_f64(s.gap)]);
        t.push(row);
    }
    Ok(Outcome::ok(Artifact::Csv(t)))
}

fn gap_table<F>(fam: &DivisorFamily, gap: F) -> CliResult<Outcome>
where
    F: Fn(u64) -> grauert_core::Result<f64>,
{
    let mut t = Table::new(["j", "gap"]);
    for &j in fam.indices() {
        t.push(vec![j.to_string(), fmt_f64(gap(j)?)]);
    }
    Ok(Outcome::ok(Artifact::Csv(t)))
}

pub fn converge_metric(a: &ConvergeArgs) -> CliResult<Outcome> {
    let fam = load_family(&a.family)?;
    let grid = load_grid(&a.grid)?;
    check_dim("grid", grid.dim(), fam.dim())?;
    gap_table(&fam, |j| sup_metric_gap(&fam, &grid, j))
}

pub fn converge_curvature(a: &ConvergeCurvatureArgs) -> CliResult<Outcome> {
    let fam = load_family(&a.common.family)?;
    let grid = load_grid(&a.common.grid)?;
    check_dim("grid", grid.dim(), fam.dim())?;
    let x = match &a.x {
        Some(path) => load_field(path)?,
        None => VectorField::constant(&unit(fam.dim())),
    };
    check_dim("--X", x.dim(), fam.dim())?;
    gap_table(&fam, |j| curvature_gap(&fam, &x, &grid, j))
}

pub fn liminf(a: &LiminfArgs) -> CliResult<Outcome> {
    let fam = load_family(&a.family)?;
    let n = fam.dim();
    let grid = a.grid.as_deref().map(load_grid).transpose()?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let p = match (&a.p, &grid) {
        (Some(p), _) => p.0.clone(),
        (None, Some(g)) => {
            check_dim("grid", g.dim(), n)?;
            let pts = g.points(fam.f0())?;
            pts[rng.gen_range(0..pts.len())].clone()
        }
        (None, None) => return Err(CliError::Config("liminf needs --p or --grid".into())),
    };
    check_dim("--p", p.len(), n)?;
    let v = match &a.v {
        Some(v) => v.0.clone(),
        None => (0..n)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect(),
    };
    check_dim("--V", v.len(), n)?;
    let tail = a.tail.unwrap_or(fam.indices()[fam.indices().len() / 2]);
    let rep = liminf_check(&fam, &p, &v, tail)?;
    let mut report =
        serde_json::to_value(&rep).map_err(|e| CliError::Config(format!("json: {e}")))?;
    let obj = report
        .as_object_mut()
        .expect("report serializes to an object");
    obj.insert("seed".into(), json!(a.seed));
    obj.insert("p".into(), complex_json(&p));
    obj.insert("V".into(), complex_json(&v));
    Ok(Outcome {
        artifact: Artifact::Json(report),
        pass: rep.pass,
    })
}

//! Parsing of command-line values and JSON input files.

use std::fs;
use std::path::Path;

use grauert_core::foliation::VectorField;
use grauert_core::holo::{Complex64 as C64, HoloMap};
use grauert_core::lab::{CompactGrid, DivisorFamily, FamilySpec};
use serde::de::DeserializeOwned;

use crate::error::{CliError, CliResult};

/// Parses `1.5`, `-2i`, `i`, `1e-3-4.5i` and the like.
pub fn parse_complex(s: &str) -> Result<C64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err("empty complex number".into());
    }
    let bad = || format!("cannot parse complex number {s:?}");
    let finite = |z: C64| {
        if z.re.is_finite() && z.im.is_finite() {
            Ok(z)
        } else {
            Err(bad())
        }
    };
    let Some(body) = t.strip_suffix('i') else {
        let re = t.parse::<f64>().map_err(|_| bad())?;
        return finite(C64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse::<f64>().map_err(|_| bad())?,
    };
    let re = re.parse::<f64>().map_err(|_| bad())?;
    finite(C64::new(re, im))
}

/// Comma-separated complex coordinates.
pub fn parse_point(s: &str) -> Result<Vec<C64>, String> {
    s.split(',').map(parse_complex).collect()
}

fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_map(path: &Path) -> CliResult<HoloMap> {
    let f: HoloMap = read_json(path)?;
    f.validate()?;
    Ok(f)
}

pub fn load_field(path: &Path) -> CliResult<VectorField> {
    let x: VectorField = read_json(path)?;
    x.validate()?;
    Ok(x)
}

pub fn load_grid(path: &Path) -> CliResult<CompactGrid> {
    let g: CompactGrid = read_json(path)?;
    g.raw_points()?;
    Ok(g)
}

pub fn load_family(path: &Path) -> CliResult<DivisorFamily> {
    let spec: FamilySpec = read_json(path)?;
    Ok(DivisorFamily::from_spec(spec)?)
}

pub fn check_dim(what: &str, got: usize, expected: usize) -> CliResult<()> {
    if got == expected {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "{what} has {got} coordinates, expected {expected}"
        )))
    }
}

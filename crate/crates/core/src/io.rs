//! File formats used by the command-line tool.
//!
//! Flux profiles are CSV with header `s,phi` on a uniform grid starting at
//! `s = 0`. The perimeter is taken from an optional JSON config
//! (`{"perimeter": L}`) and otherwise inferred as the last arclength plus
//! one spacing. All floats are written with 17 significant digits.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::MapSpec;
use crate::mapping::{Anchors, BoundaryTrace};
use crate::profile::FluxProfile;

/// Relative tolerance on the uniformity of the arclength column.
pub const GRID_RTOL: f64 = 1e-9;

/// Formats a float so that it parses back to the same value.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn malformed(path: &Path, msg: impl std::fmt::Display) -> Error {
    Error::MalformedInput(format!("{}: {msg}", path.display()))
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let mut text = String::new();
    open(path)?
        .read_to_string(&mut text)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| malformed(path, e))
}

/// Writes pretty JSON followed by a newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    create(path)?
        .write_all(text.as_bytes())
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        Error::Io(format!("{}: {e}", path.display()))
    } else {
        malformed(path, e)
    }
}

fn write_rows(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(row.into_iter().map(fmt_f64))
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush()
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Reads a numeric CSV with the given header.
pub fn read_rows(path: &Path, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(open(path)?);
    let got = r.headers().map_err(|e| csv_error(path, e))?.clone();
    if got.iter().collect::<Vec<_>>() != header {
        return Err(malformed(
            path,
            format!("expected header {}, found {}", header.join(","), got.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let mut rows = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let row = record
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| malformed(path, format!("row {}: {e}", line + 2)))?;
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct PerimeterConfig {
    perimeter: f64,
}

/// Reads `{"perimeter": L}`.
pub fn read_perimeter(path: &Path) -> Result<f64> {
    Ok(read_json::<PerimeterConfig>(path)?.perimeter)
}

/// Raw `(s, phi)` columns after the grid checks, plus the perimeter.
pub fn read_flux_columns(path: &Path, perimeter: Option<f64>) -> Result<(Vec<f64>, f64)> {
    let rows = read_rows(path, &["s", "phi"])?;
    if rows.len() < 2 {
        return Err(malformed(path, "need at least two rows"));
    }
    let s: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let phi: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let h = s[1] - s[0];
    if s[0] != 0.0 || !(h > 0.0) {
        return Err(malformed(path, "arclengths must start at 0 and increase"));
    }
    let perimeter = perimeter.unwrap_or(s[s.len() - 1] + h);
    let spacing = perimeter / s.len() as f64;
    if let Some(j) = (0..s.len()).find(|&j| (s[j] - j as f64 * spacing).abs() > GRID_RTOL * perimeter) {
        return Err(malformed(
            path,
            format!("arclength at row {} is off the uniform grid of spacing {spacing}", j + 2),
        ));
    }
    Ok((phi, perimeter))
}

/// Loads and validates a flux profile. With `renormalize` the samples are
/// divided by their integral instead of being checked.
pub fn read_flux(path: &Path, perimeter: Option<f64>, tolerance: f64, renormalize: bool) -> Result<FluxProfile> {
    let (phi, perimeter) = read_flux_columns(path, perimeter)?;
    if renormalize {
        FluxProfile::renormalized(phi, perimeter)
    } else {
        FluxProfile::validate(phi, perimeter, tolerance)
    }
}

pub fn write_flux(path: &Path, profile: &FluxProfile) -> Result<()> {
    let rows = profile
        .arclengths()
        .into_iter()
        .zip(profile.samples())
        .map(|(s, &phi)| vec![s, phi]);
    write_rows(path, &["s", "phi"], rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct AnchorsFile {
    zeta_c: [f64; 2],
    zeta_b: [f64; 2],
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn complex(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

pub fn read_anchors(path: &Path) -> Result<Anchors> {
    let a: AnchorsFile = read_json(path)?;
    Anchors::new(complex(a.zeta_c), complex(a.zeta_b))
}

pub fn write_anchors(path: &Path, anchors: &Anchors) -> Result<()> {
    write_json(
        path,
        &AnchorsFile {
            zeta_c: pair(anchors.zeta_c),
            zeta_b: pair(anchors.zeta_b),
        },
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum MapSpecFile {
    /// `f(z) = zeta_c + sum_k coeffs[k-1] z^k`.
    Polynomial {
        zeta_c: [f64; 2],
        coeffs: Vec<[f64; 2]>,
    },
    BoundarySamples { points: Vec<[f64; 2]> },
}

pub fn read_map_spec(path: &Path) -> Result<MapSpec> {
    match read_json(path)? {
        MapSpecFile::Polynomial { zeta_c, coeffs } => {
            MapSpec::polynomial(complex(zeta_c), coeffs.into_iter().map(complex).collect())
        }
        MapSpecFile::BoundarySamples { points } => {
            MapSpec::sampled_boundary(points.into_iter().map(complex).collect())
        }
    }
}

pub fn write_map_spec(path: &Path, spec: &MapSpec) -> Result<()> {
    let file = match spec {
        MapSpec::Polynomial { zeta_c, coeffs } => MapSpecFile::Polynomial {
            zeta_c: pair(*zeta_c),
            coeffs: coeffs.iter().copied().map(pair).collect(),
        },
        MapSpec::SampledBoundary { points } => MapSpecFile::BoundarySamples {
            points: points.iter().copied().map(pair).collect(),
        },
    };
    write_json(path, &file)
}

pub const TRACE_HEADER: [&str; 6] = ["theta", "x", "y", "s", "psi", "kappa"];

pub fn write_trace(path: &Path, trace: &BoundaryTrace) -> Result<()> {
    let rows = (0..trace.len()).map(|j| {
        let p = trace.points[j];
        vec![
            trace.theta[j],
            p.re,
            p.im,
            trace.arclength[j],
            trace.tangent_angle[j],
            trace.curvature[j],
        ]
    });
    write_rows(path, &TRACE_HEADER, rows)
}

/// Boundary points of a trace CSV.
pub fn read_trace_points(path: &Path) -> Result<Vec<Complex64>> {
    Ok(read_rows(path, &TRACE_HEADER)?
        .into_iter()
        .map(|r| Complex64::new(r[1], r[2]))
        .collect())
}

pub fn write_level_curve(path: &Path, theta: &[f64], points: &[Complex64]) -> Result<()> {
    let rows = theta.iter().zip(points).map(|(t, p)| vec![*t, p.re, p.im]);
    write_rows(path, &["theta", "x", "y"], rows)
}

pub fn write_curvature(path: &Path, s: &[f64], kappa: &[f64]) -> Result<()> {
    let rows = s.iter().zip(kappa).map(|(s, k)| vec![*s, *k]);
    write_rows(path, &["s", "kappa"], rows)
}

/// Summary written next to a reconstructed trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub gamma: f64,
    pub perimeter: f64,
    pub consistency_residual: Option<f64>,
    pub series_tail_bound: f64,
    pub n: usize,
    pub zeta_c: [f64; 2],
    pub zeta_b: [f64; 2],
}

impl ReconstructionReport {
    pub fn from_reconstruction(rec: &crate::inverse::Reconstruction) -> Result<Self> {
        let anchors = rec.anchors()?;
        Ok(Self {
            gamma: rec.gamma(),
            perimeter: rec.perimeter(),
            consistency_residual: rec.consistency_residual,
            series_tail_bound: rec.series_tail_bound(),
            n: rec.trace.len(),
            zeta_c: pair(anchors.zeta_c),
            zeta_b: pair(anchors.zeta_b),
        })
    }
}

pub fn read_report<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    read_json(path)
}

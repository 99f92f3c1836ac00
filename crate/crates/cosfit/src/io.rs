//! CSV wire formats (samples, coefficients, grids) and ASCII PGM heatmaps.
//!
//! All floating point output uses Rust's shortest round-trip formatting, so
//! writing and re-reading a file reproduces values bit-identically.

use nalgebra::DMatrix;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::approx::{CosinePoly, DomainMap, SampleSet, WeightPolicy};
use crate::grid::{GridField, GridSpec};
use crate::{Error, Result};

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn parse_f64(path: &Path, line: usize, field: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| parse_err(path, line, format!("not a number: {:?}", field.trim())))
}

// Returns (line_number, fields) for each data row, skipping blanks,
// comments, and an optional non-numeric header.
fn csv_rows(path: &Path) -> Result<Vec<(usize, Vec<String>)>> {
    let reader = BufReader::new(File::open(path)?);
    let mut rows = Vec::new();
    let mut header_seen = false;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<String> = trimmed.split(',').map(|f| f.trim().to_string()).collect();
        // At most one header row, and only before any data.
        if rows.is_empty() && !header_seen && fields[0].parse::<f64>().is_err() {
            header_seen = true;
            continue;
        }
        rows.push((idx + 1, fields));
    }
    Ok(rows)
}

/// Reads scattered samples: rows `x,value` (1D) or `x,y,value` (2D), with
/// an optional trailing weight column.
pub fn read_samples_csv(
    path: &Path,
    dim: usize,
    merge: bool,
    policy: WeightPolicy,
) -> Result<SampleSet> {
    let rows = csv_rows(path)?;
    if rows.is_empty() {
        return Err(parse_err(path, 1, "no data rows"));
    }
    let base = dim + 1;
    let mut coords: Vec<[f64; 2]> = Vec::with_capacity(rows.len());
    let mut values = Vec::with_capacity(rows.len());
    let mut weights: Vec<f64> = Vec::new();
    let has_weight = rows[0].1.len() == base + 1;
    for (line, fields) in &rows {
        let want = if has_weight { base + 1 } else { base };
        if fields.len() != want {
            return Err(parse_err(
                path,
                *line,
                format!("expected {want} fields, got {}", fields.len()),
            ));
        }
        let x = parse_f64(path, *line, &fields[0])?;
        let y = if dim == 2 {
            parse_f64(path, *line, &fields[1])?
        } else {
            0.0
        };
        coords.push([x, y]);
        values.push(parse_f64(path, *line, &fields[dim])?);
        if has_weight {
            weights.push(parse_f64(path, *line, &fields[base])?);
        }
    }
    let weights = if has_weight { Some(weights) } else { None };
    match dim {
        1 => SampleSet::from_raw_1d(
            coords.iter().map(|c| c[0]).collect(),
            values,
            weights,
            merge,
            policy,
        ),
        2 => SampleSet::from_raw_2d(coords, values, weights, merge),
        _ => Err(Error::InvalidArgument("dim must be 1 or 2".into())),
    }
}

fn write_domain_comment(out: &mut impl Write, domain: &DomainMap, dim: usize) -> Result<()> {
    if !domain.is_identity() {
        write!(out, "# domain offset={}", domain.offset[0])?;
        if dim == 2 {
            write!(out, ",{}", domain.offset[1])?;
        }
        write!(out, " scale={}", domain.scale[0])?;
        if dim == 2 {
            write!(out, ",{}", domain.scale[1])?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Writes coefficients as `k,coefficient` (1D) or `k,l,coefficient` (2D),
/// recording a non-identity domain map in a comment line.
pub fn write_coeffs_csv(path: &Path, poly: &CosinePoly, domain: &DomainMap) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    match poly {
        CosinePoly::One(c) => {
            write_domain_comment(&mut out, domain, 1)?;
            writeln!(out, "k,coefficient")?;
            for (k, v) in c.iter().enumerate() {
                writeln!(out, "{k},{v}")?;
            }
        }
        CosinePoly::Two(c) => {
            write_domain_comment(&mut out, domain, 2)?;
            writeln!(out, "k,l,coefficient")?;
            for l in 0..c.ncols() {
                for k in 0..c.nrows() {
                    writeln!(out, "{k},{l},{}", c[(k, l)])?;
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn parse_domain_comment(path: &Path) -> Result<DomainMap> {
    let reader = BufReader::new(File::open(path)?);
    let mut map = DomainMap::identity();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let Some(rest) = line.trim().strip_prefix("# domain ") else {
            continue;
        };
        for part in rest.split_whitespace() {
            let (key, vals) = part
                .split_once('=')
                .ok_or_else(|| parse_err(path, idx + 1, "malformed domain comment"))?;
            let nums: Vec<f64> = vals
                .split(',')
                .map(|v| parse_f64(path, idx + 1, v))
                .collect::<Result<_>>()?;
            let mut pair = [nums[0], if nums.len() > 1 { nums[1] } else { 0.0 }];
            match key {
                "offset" => map.offset = pair,
                "scale" => {
                    if nums.len() == 1 {
                        pair[1] = 1.0;
                    }
                    map.scale = pair;
                }
                _ => return Err(parse_err(path, idx + 1, "malformed domain comment")),
            }
        }
    }
    Ok(map)
}

/// Reads a coefficient file written by [`write_coeffs_csv`].
pub fn read_coeffs_csv(path: &Path) -> Result<(CosinePoly, DomainMap)> {
    let domain = parse_domain_comment(path)?;
    let rows = csv_rows(path)?;
    if rows.is_empty() {
        return Err(parse_err(path, 1, "no coefficient rows"));
    }
    let dim = match rows[0].1.len() {
        2 => 1,
        3 => 2,
        n => return Err(parse_err(path, rows[0].0, format!("expected 2 or 3 fields, got {n}"))),
    };
    if dim == 1 {
        let mut coeffs = Vec::with_capacity(rows.len());
        for (i, (line, fields)) in rows.iter().enumerate() {
            if fields.len() != 2 {
                return Err(parse_err(path, *line, "expected 2 fields"));
            }
            let k = parse_f64(path, *line, &fields[0])? as usize;
            if k != i {
                return Err(parse_err(path, *line, format!("expected index {i}, got {k}")));
            }
            coeffs.push(parse_f64(path, *line, &fields[1])?);
        }
        Ok((CosinePoly::One(coeffs), domain))
    } else {
        let mut entries = Vec::with_capacity(rows.len());
        let (mut k_max, mut l_max) = (0usize, 0usize);
        for (line, fields) in &rows {
            if fields.len() != 3 {
                return Err(parse_err(path, *line, "expected 3 fields"));
            }
            let k = parse_f64(path, *line, &fields[0])? as usize;
            let l = parse_f64(path, *line, &fields[1])? as usize;
            k_max = k_max.max(k);
            l_max = l_max.max(l);
            entries.push((k, l, parse_f64(path, *line, &fields[2])?));
        }
        if entries.len() != (k_max + 1) * (l_max + 1) {
            return Err(parse_err(
                path,
                rows[0].0,
                "coefficient rows do not form a full rectangle",
            ));
        }
        let mut m = DMatrix::zeros(k_max + 1, l_max + 1);
        for (k, l, v) in entries {
            m[(k, l)] = v;
        }
        Ok((CosinePoly::Two(m), domain))
    }
}

/// Writes a grid field as `x,value` or `x,y,value` with coordinates mapped
/// back to the original domain.
pub fn write_grid_csv(path: &Path, field: &GridField, domain: &DomainMap) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let l = field.spec.l;
    if field.spec.dim == 1 {
        writeln!(out, "x,value")?;
        for (i, v) in field.values.iter().enumerate() {
            let x = domain.to_original(0, i as f64 / l as f64);
            writeln!(out, "{x},{v}")?;
        }
    } else {
        writeln!(out, "x,y,value")?;
        for i in 0..=l {
            let x = domain.to_original(0, i as f64 / l as f64);
            for j in 0..=l {
                let y = domain.to_original(1, j as f64 / l as f64);
                writeln!(out, "{x},{y},{}", field.at_2d(i, j))?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads a grid file written by [`write_grid_csv`]. The resolution is
/// recovered from the node count; only full tensor grids are accepted.
pub fn read_grid_csv(path: &Path) -> Result<GridField> {
    let rows = csv_rows(path)?;
    if rows.is_empty() {
        return Err(parse_err(path, 1, "no grid rows"));
    }
    let dim = match rows[0].1.len() {
        2 => 1,
        3 => 2,
        n => return Err(parse_err(path, rows[0].0, format!("expected 2 or 3 fields, got {n}"))),
    };
    let n = rows.len();
    let per_axis = if dim == 1 {
        n
    } else {
        let s = (n as f64).sqrt().round() as usize;
        if s * s != n {
            return Err(parse_err(path, rows[0].0, "2D grid is not square"));
        }
        s
    };
    if per_axis < 2 {
        return Err(parse_err(path, rows[0].0, "grid needs at least 2 nodes per axis"));
    }
    let mut values = Vec::with_capacity(n);
    for (line, fields) in &rows {
        if fields.len() != dim + 1 {
            return Err(parse_err(path, *line, "inconsistent field count"));
        }
        values.push(parse_f64(path, *line, &fields[dim])?);
    }
    GridField::new(GridSpec::new(dim, per_axis - 1)?, values)
}

/// Writes a 2D field as an ASCII PGM (P2) image, 8-bit, with the min/max
/// linear mapping recorded in the header comment.
pub fn write_pgm(path: &Path, field: &GridField) -> Result<()> {
    if field.spec.dim != 2 {
        return Err(Error::InvalidArgument("PGM output needs a 2D field".into()));
    }
    let l = field.spec.l;
    let n = l + 1;
    let min = field.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = field.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if max > min { max - min } else { 1.0 };
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "P2")?;
    writeln!(out, "# gray 0..255 maps linearly to [{min}, {max}]")?;
    writeln!(out, "{n} {n}")?;
    writeln!(out, "255")?;
    // Image rows scan y top-to-bottom, columns scan x left-to-right.
    for j in (0..n).rev() {
        let row: Vec<String> = (0..n)
            .map(|i| {
                let g = ((field.at_2d(i, j) - min) / span * 255.0).round() as u32;
                g.min(255).to_string()
            })
            .collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    out.flush()?;
    Ok(())
}

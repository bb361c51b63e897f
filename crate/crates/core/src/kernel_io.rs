//! Reading and writing tabulated kernels.
//!
//! CSV layout:
//!
//! ```text
//! # axis1: start,stop,n1
//! # axis2: start,stop,n2
//! v_00,v_01,...,v_0(n2-1)
//! ...
//! ```
//!
//! with `n1` rows of `n2` cells each. A cell is a plain real (`0.25`) or a
//! complex pair (`0.25-1.5e-3j`). Axes are uniform and rebuilt with
//! [`uniform_axis`]. Other `#` lines are ignored.
//!
//! JSON layout: `{"axis1": [...], "axis2": [...], "values_re": [[...]], "values_im": [[...]]}`
//! with row-major nested arrays; `values_im` may be omitted for real kernels.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sdf::{normalize, uniform_axis, SpectralKernel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFormat {
    Csv,
    Json,
}

impl KernelFormat {
    /// Guesses the format from the file extension, defaulting to CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => KernelFormat::Json,
            _ => KernelFormat::Csv,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct KernelJson {
    axis1: Vec<f64>,
    axis2: Vec<f64>,
    values_re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values_im: Option<Vec<Vec<f64>>>,
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Loads a kernel. Normalization is applied only when `normalize_values` is set,
/// so raw experimental grids can be inspected first.
pub fn load_kernel(
    path: &Path,
    format: KernelFormat,
    normalize_values: bool,
) -> Result<SpectralKernel> {
    let text = read_file(path)?;
    let kernel = match format {
        KernelFormat::Csv => parse_csv(&text)?,
        KernelFormat::Json => parse_json(&text)?,
    };
    if normalize_values {
        normalize(&kernel)
    } else {
        Ok(kernel)
    }
}

pub fn save_kernel(kernel: &SpectralKernel, path: &Path, format: KernelFormat) -> Result<()> {
    let text = match format {
        KernelFormat::Csv => to_csv(kernel),
        KernelFormat::Json => to_json(kernel)?,
    };
    write_file(path, &text)
}

pub fn to_csv(kernel: &SpectralKernel) -> String {
    let mut out = String::new();
    for (name, axis) in [("axis1", kernel.axis1()), ("axis2", kernel.axis2())] {
        let _ = writeln!(
            out,
            "# {name}: {:e},{:e},{}",
            axis[0],
            axis[axis.len() - 1],
            axis.len()
        );
    }
    let real = kernel.is_real();
    for row in kernel.values().chunks(kernel.n2()) {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            if real {
                let _ = write!(out, "{:e}", v.re);
            } else if v.im.is_sign_negative() {
                let _ = write!(out, "{:e}-{:e}j", v.re, -v.im);
            } else {
                let _ = write!(out, "{:e}+{:e}j", v.re, v.im);
            }
        }
        out.push('\n');
    }
    out
}

pub fn to_json(kernel: &SpectralKernel) -> Result<String> {
    let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
        kernel
            .values()
            .chunks(kernel.n2())
            .map(|r| r.iter().map(f).collect())
            .collect()
    };
    let doc = KernelJson {
        axis1: kernel.axis1().to_vec(),
        axis2: kernel.axis2().to_vec(),
        values_re: rows(|v| v.re),
        values_im: (!kernel.is_real()).then(|| rows(|v| v.im)),
    };
    Ok(serde_json::to_string(&doc)?)
}

/// Parses `re`, `re+imj` or `re-imj`.
pub fn parse_complex(cell: &str) -> Option<Complex64> {
    let s = cell.trim();
    let finite = |x: f64| x.is_finite().then_some(x);
    let Some(body) = s.strip_suffix(['j', 'i']) else {
        return s
            .parse::<f64>()
            .ok()
            .and_then(finite)
            .map(|re| Complex64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'))?;
    let re = body[..split].parse::<f64>().ok().and_then(finite)?;
    let im = body[split..].parse::<f64>().ok().and_then(finite)?;
    Some(Complex64::new(re, im))
}

fn parse_axis_header(line: &str, line_no: usize) -> Result<Option<(usize, Vec<f64>)>> {
    let body = line.trim_start_matches('#').trim();
    let (which, rest) = if let Some(r) = body.strip_prefix("axis1:") {
        (1, r)
    } else if let Some(r) = body.strip_prefix("axis2:") {
        (2, r)
    } else {
        return Ok(None);
    };
    let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::parse(
            line_no,
            1,
            "axis header must read `start,stop,n`",
        ));
    }
    let start: f64 = parts[0]
        .parse()
        .map_err(|_| Error::parse(line_no, 1, format!("invalid axis start `{}`", parts[0])))?;
    let stop: f64 = parts[1]
        .parse()
        .map_err(|_| Error::parse(line_no, 2, format!("invalid axis stop `{}`", parts[1])))?;
    let n: usize = parts[2]
        .parse()
        .map_err(|_| Error::parse(line_no, 3, format!("invalid axis length `{}`", parts[2])))?;
    Ok(Some((which, uniform_axis(start, stop, n))))
}

/// Non-empty, non-comment lines split into trimmed fields, with their
/// 1-based line numbers.
pub(crate) fn csv_lines(text: &str) -> Result<Vec<(usize, csv::StringRecord)>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(trimmed.as_bytes());
        let mut record = csv::StringRecord::new();
        reader
            .read_record(&mut record)
            .map_err(|e| Error::parse(idx + 1, 1, e.to_string()))?;
        out.push((idx + 1, record));
    }
    Ok(out)
}

pub fn parse_csv(text: &str) -> Result<SpectralKernel> {
    let mut axis1 = None;
    let mut axis2 = None;
    for (idx, line) in text.lines().enumerate() {
        if line.trim_start().starts_with('#') {
            match parse_axis_header(line, idx + 1)? {
                Some((1, a)) => axis1 = Some(a),
                Some((_, a)) => axis2 = Some(a),
                None => {}
            }
        }
    }
    let axis1 =
        axis1.ok_or_else(|| Error::parse(1, 1, "missing `# axis1: start,stop,n` header"))?;
    let axis2 =
        axis2.ok_or_else(|| Error::parse(1, 1, "missing `# axis2: start,stop,n` header"))?;
    let (n1, n2) = (axis1.len(), axis2.len());

    let mut values = Vec::with_capacity(n1 * n2);
    let mut rows = 0usize;
    for (line, record) in csv_lines(text)? {
        rows += 1;
        if record.len() != n2 {
            return Err(Error::parse(
                line,
                record.len().min(n2) + 1,
                format!("row {rows} has {} columns, expected {n2}", record.len()),
            ));
        }
        for (col, cell) in record.iter().enumerate() {
            let v = parse_complex(cell).ok_or_else(|| {
                Error::parse(line, col + 1, format!("row {rows}: invalid value `{cell}`"))
            })?;
            values.push(v);
        }
    }
    if rows != n1 {
        return Err(Error::DimensionMismatch(format!(
            "header declares {n1} rows, file contains {rows}"
        )));
    }
    SpectralKernel::new(axis1, axis2, values)
}

pub fn parse_json(text: &str) -> Result<SpectralKernel> {
    let doc: KernelJson = serde_json::from_str(text)?;
    let (n1, n2) = (doc.axis1.len(), doc.axis2.len());
    let check = |rows: &Vec<Vec<f64>>, name: &str| -> Result<()> {
        if rows.len() != n1 {
            return Err(Error::DimensionMismatch(format!(
                "{name} has {} rows, axis1 has {n1} points",
                rows.len()
            )));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n2) {
            return Err(Error::DimensionMismatch(format!(
                "{name} row {i} has {} entries, axis2 has {n2} points",
                r.len()
            )));
        }
        Ok(())
    };
    check(&doc.values_re, "values_re")?;
    if let Some(im) = &doc.values_im {
        check(im, "values_im")?;
    }
    let values = doc
        .values_re
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &re)| (i, j, re)))
        .map(|(i, j, re)| {
            let im = doc.values_im.as_ref().map_or(0.0, |m| m[i][j]);
            Complex64::new(re, im)
        })
        .collect();
    SpectralKernel::new(doc.axis1, doc.axis2, values)
}

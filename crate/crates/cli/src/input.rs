use std::fs::File;
use std::io::{self, Read};
use std::path::PathBuf;

use circxi::{AngleUnit, Axis, CircularSample};

use crate::error::CliError;

/// A loaded sample plus the input line of each row, for diagnostics.
pub struct Loaded {
    pub sample: CircularSample,
    pub lines: Vec<u64>,
}

pub struct InputSpec {
    /// `-` reads standard input.
    pub path: String,
    pub unit: AngleUnit,
    pub header: bool,
    pub x_column: Option<String>,
    pub y_column: Option<String>,
}

fn resolve_column(
    selector: Option<&str>,
    default: usize,
    headers: Option<&csv::StringRecord>,
) -> Result<usize, CliError> {
    let Some(sel) = selector else {
        return Ok(default);
    };
    if let Some(h) = headers {
        if let Some(pos) = h.iter().position(|name| name.trim() == sel) {
            return Ok(pos);
        }
    }
    sel.parse::<usize>()
        .map_err(|_| CliError::Usage(format!("unknown column '{sel}'")))
}

pub fn load(spec: &InputSpec) -> Result<Loaded, CliError> {
    let reader: Box<dyn Read> = if spec.path == "-" {
        Box::new(io::stdin().lock())
    } else {
        let path = PathBuf::from(&spec.path);
        Box::new(File::open(&path).map_err(|e| CliError::io(path, e))?)
    };
    parse(reader, spec)
}

pub fn parse(reader: impl Read, spec: &InputSpec) -> Result<Loaded, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(spec.header)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = if spec.header {
        Some(rdr.headers().map_err(|e| csv_error(e, 1))?.clone())
    } else {
        None
    };
    let xc = resolve_column(spec.x_column.as_deref(), 0, headers.as_ref())?;
    let yc = resolve_column(spec.y_column.as_deref(), 1, headers.as_ref())?;
    let (mut x, mut y, mut lines) = (Vec::new(), Vec::new(), Vec::new());
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(e, 0))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |col: usize, axis: Axis| -> Result<f64, CliError> {
            let raw = record.get(col).ok_or_else(|| CliError::Parse {
                line,
                message: format!("missing column {col} for {axis}"),
            })?;
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Parse {
                    line,
                    message: format!("{axis} value '{raw}' is not a finite number"),
                })
        };
        x.push(field(xc, Axis::X)?);
        y.push(field(yc, Axis::Y)?);
        lines.push(line);
    }
    let sample = CircularSample::from_values(&x, &y, spec.unit)?;
    Ok(Loaded { sample, lines })
}

fn csv_error(e: csv::Error, fallback_line: u64) -> CliError {
    let line = e.position().map_or(fallback_line, |p| p.line());
    CliError::Parse {
        line,
        message: e.to_string(),
    }
}

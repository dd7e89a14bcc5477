//! Text formats: algebra JSON files, tau specs and grid specs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use quatmetric_core::algebra::{Algebra, StructureTensor};
use quatmetric_core::metric::{Axis, SphericalGrid, TauProfile};

/// A malformed input, located by 1-based line and column where possible.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{source_name}:{line}:{column}: {message}")]
pub struct ParseError {
    pub source_name: String,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    fn new(source_name: &str, line: usize, column: usize, message: impl Into<String>) -> Self {
        Self {
            source_name: source_name.to_string(),
            line,
            column,
            message: message.into(),
        }
    }

    /// For single-line inputs such as command-line specs; `column` is 1-based.
    fn inline(source_name: &str, column: usize, message: impl Into<String>) -> Self {
        Self::new(source_name, 1, column, message)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraFile {
    pub dim: usize,
    pub basis: Vec<String>,
    /// `components[i][j][k]` is `A^i_{jk}`.
    pub components: Vec<Vec<Vec<f64>>>,
}

impl AlgebraFile {
    pub fn from_algebra(alg: &Algebra) -> Self {
        Self {
            dim: alg.dim(),
            basis: alg.basis_labels().to_vec(),
            components: alg.tensor().to_nested(),
        }
    }
}

fn position_of(text: &str, needle: &str) -> (usize, usize) {
    let Some(offset) = text.find(needle) else {
        return (1, 1);
    };
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = offset - before.rfind('\n').map_or(0, |p| p + 1) + 1;
    (line, column)
}

pub fn parse_algebra(text: &str, source_name: &str) -> Result<Algebra, ParseError> {
    let file: AlgebraFile = serde_json::from_str(text)
        .map_err(|e| ParseError::new(source_name, e.line(), e.column(), e.to_string()))?;
    let n = file.dim;
    let at = |key: &str| position_of(text, &format!("\"{key}\""));
    if n == 0 {
        let (l, c) = at("dim");
        return Err(ParseError::new(source_name, l, c, "dim must be positive"));
    }
    if file.basis.len() != n {
        let (l, c) = at("basis");
        return Err(ParseError::new(
            source_name,
            l,
            c,
            format!("expected {n} basis labels, found {}", file.basis.len()),
        ));
    }
    let found: usize = file
        .components
        .iter()
        .map(|m| m.iter().map(Vec::len).sum::<usize>())
        .sum();
    let well_shaped = file.components.len() == n
        && file
            .components
            .iter()
            .all(|m| m.len() == n && m.iter().all(|r| r.len() == n));
    if !well_shaped {
        let (l, c) = at("components");
        return Err(ParseError::new(
            source_name,
            l,
            c,
            format!("expected {n}x{n}x{n} = {} components, found {found} in a ragged or mis-sized array", n * n * n),
        ));
    }
    let flat = file.components.into_iter().flatten().flatten().collect();
    let (l, c) = at("components");
    let tensor = StructureTensor::new(n, flat)
        .map_err(|e| ParseError::new(source_name, l, c, e.to_string()))?;
    Algebra::new(tensor, file.basis).map_err(|e| ParseError::new(source_name, 1, 1, e.to_string()))
}

/// How tau is specified on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum TauSpec {
    Constant(f64),
    Exponential(f64),
    Polynomial(Vec<f64>),
    Table(PathBuf),
}

fn parse_number(s: &str, source_name: &str, column: usize) -> Result<f64, ParseError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| ParseError::inline(source_name, column, format!("not a number: {s:?}")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ParseError::inline(
            source_name,
            column,
            format!("not finite: {s:?}"),
        ))
    }
}

impl TauSpec {
    pub fn parse(spec: &str) -> Result<Self, ParseError> {
        const SRC: &str = "--tau";
        let Some((kind, rest)) = spec.split_once(':') else {
            return Err(ParseError::inline(
                SRC,
                1,
                "expected KIND:ARGS with KIND one of const, exp, poly, table",
            ));
        };
        let col = kind.len() + 2;
        match kind {
            "const" => Ok(TauSpec::Constant(parse_number(rest, SRC, col)?)),
            "exp" => Ok(TauSpec::Exponential(parse_number(rest, SRC, col)?)),
            "poly" => {
                let mut coeffs = Vec::new();
                let mut column = col;
                for part in rest.split(',') {
                    coeffs.push(parse_number(part, SRC, column)?);
                    column += part.len() + 1;
                }
                Ok(TauSpec::Polynomial(coeffs))
            }
            "table" if !rest.is_empty() => Ok(TauSpec::Table(PathBuf::from(rest))),
            "table" => Err(ParseError::inline(SRC, col, "missing table path")),
            other => Err(ParseError::inline(
                SRC,
                1,
                format!("unknown tau kind {other:?}"),
            )),
        }
    }

    /// Builds the profile on `[lo, hi]`; tables carry their own domain.
    pub fn build(&self, lo: f64, hi: f64) -> Result<TauProfile, crate::CliError> {
        let tp = match self {
            TauSpec::Constant(c) => TauProfile::constant(*c, lo, hi)?,
            TauSpec::Exponential(k) => TauProfile::exponential(*k, lo, hi)?,
            TauSpec::Polynomial(c) => TauProfile::polynomial(c.clone(), lo, hi)?,
            TauSpec::Table(path) => {
                let (etas, values) = read_tau_table(path)?;
                TauProfile::sampled(etas, values)?
            }
        };
        Ok(tp)
    }
}

/// Reads `eta,tau` rows; a header line is optional.
pub fn read_tau_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>), crate::CliError> {
    let text = std::fs::read_to_string(path)?;
    let name = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let (mut etas, mut values) = (Vec::new(), Vec::new());
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(1, |p| p.line() as usize);
            ParseError::new(&name, line, 1, e.to_string())
        })?;
        let line = record.position().map_or(idx + 1, |p| p.line() as usize);
        if record.len() != 2 {
            return Err(ParseError::new(&name, line, 1, "expected two columns: eta,tau").into());
        }
        if idx == 0 && record[0].parse::<f64>().is_err() {
            continue;
        }
        let eta = parse_number(&record[0], &name, 1).map_err(|e| ParseError { line, ..e })?;
        let column = record[0].len() + 2;
        let tau = parse_number(&record[1], &name, column).map_err(|e| ParseError { line, ..e })?;
        etas.push(eta);
        values.push(tau);
    }
    Ok((etas, values))
}

/// Parses `eta=LO:HI:N,chi=LO:HI:N,theta=LO:HI:N,phi=LO:HI:N`; omitted axes
/// keep the values of `base`.
pub fn parse_grid(spec: &str, base: SphericalGrid) -> Result<SphericalGrid, ParseError> {
    const SRC: &str = "--grid";
    let mut grid = base;
    let mut column = 1;
    for part in spec.split(',') {
        let here = column;
        column += part.len() + 1;
        let Some((name, range)) = part.split_once('=') else {
            return Err(ParseError::inline(SRC, here, "expected AXIS=LO:HI:COUNT"));
        };
        let fields: Vec<&str> = range.split(':').collect();
        let value_col = here + name.len() + 1;
        let axis = match fields.as_slice() {
            [lo, hi, count] => {
                let lo = parse_number(lo, SRC, value_col)?;
                let hi = parse_number(hi, SRC, value_col)?;
                let count: usize = count.trim().parse().map_err(|_| {
                    ParseError::inline(SRC, value_col, format!("bad point count {count:?}"))
                })?;
                if count == 0 || hi < lo {
                    return Err(ParseError::inline(
                        SRC,
                        value_col,
                        "need count >= 1 and LO <= HI",
                    ));
                }
                Axis::new(lo, hi, count)
            }
            [v] => {
                let v = parse_number(v, SRC, value_col)?;
                Axis::new(v, v, 1)
            }
            _ => {
                return Err(ParseError::inline(
                    SRC,
                    value_col,
                    "expected LO:HI:COUNT or a single value",
                ))
            }
        };
        match name.trim() {
            "eta" => grid.eta = axis,
            "chi" => grid.chi = axis,
            "theta" => grid.theta = axis,
            "phi" => grid.phi = axis,
            other => {
                return Err(ParseError::inline(
                    SRC,
                    here,
                    format!("unknown axis {other:?}"),
                ))
            }
        }
    }
    Ok(grid)
}

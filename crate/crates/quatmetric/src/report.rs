//! Serializable reports and CSV tables.

use std::io::Write;

use serde::{Deserialize, Serialize};

use quatmetric_core::algebra::Algebra;
use quatmetric_core::curvature::SliceReport;
use quatmetric_core::metric::{FlrwReport, SamplePoint};
use quatmetric_core::numeric::{Signature, Tolerance};
use quatmetric_core::products::{classify, contract, principal_space};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommutatorEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    /// `A^i_{jk} - A^i_{kj}`
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraReport {
    pub dim: usize,
    pub basis: Vec<String>,
    pub identity: Option<Vec<f64>>,
    pub associative: bool,
    /// Entries with `j < k` only; the table is antisymmetric in `j, k`.
    pub commutator_nonzero_entries: Vec<CommutatorEntry>,
}

impl AlgebraReport {
    pub fn build(alg: &Algebra, tol: &Tolerance) -> Self {
        let t = alg.tensor();
        let n = alg.dim();
        let mut entries = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in (j + 1)..n {
                    let value = t.get(i, j, k) - t.get(i, k, j);
                    if value.abs() > tol.sym_tol {
                        entries.push(CommutatorEntry { i, j, k, value });
                    }
                }
            }
        }
        Self {
            dim: n,
            basis: alg.basis_labels().to_vec(),
            identity: alg.identity().map(|e| e.coords().to_vec()),
            associative: alg.is_associative_within(tol.sym_tol),
            commutator_nonzero_entries: entries,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureJson {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl From<Signature> for SignatureJson {
    fn from(s: Signature) -> Self {
        Self {
            positive: s.positive,
            negative: s.negative,
            zero: s.zero,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub tau: Vec<f64>,
    pub matrix: Vec<Vec<f64>>,
    pub signature: SignatureJson,
    pub classification: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductsReport {
    pub dim: usize,
    pub principal_space: Vec<Vec<f64>>,
    pub generators: Vec<Generator>,
}

impl ProductsReport {
    pub fn build(alg: &Algebra, tol: &Tolerance) -> Result<Self, CliError> {
        let span = principal_space(alg, tol);
        let mut generators = Vec::new();
        for tau in &span.basis {
            let ip = contract(alg, tau, tol)?;
            generators.push(Generator {
                tau: tau.clone(),
                matrix: ip.matrix.to_nested(),
                signature: ip.signature.into(),
                classification: classify(&ip).name().to_string(),
            });
        }
        Ok(Self {
            dim: alg.dim(),
            principal_space: span.basis,
            generators,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlrwJson {
    pub verdict: String,
    pub max_deviation: f64,
    pub sign_block: String,
    pub scale_factor_samples: Vec<[f64; 2]>,
}

impl From<&FlrwReport> for FlrwJson {
    fn from(r: &FlrwReport) -> Self {
        Self {
            verdict: r.verdict.name().to_string(),
            max_deviation: r.max_deviation,
            sign_block: r.sign_block.symbol().to_string(),
            scale_factor_samples: r
                .scale_factor_samples
                .iter()
                .map(|(e, a)| [*e, *a])
                .collect(),
        }
    }
}

pub const FLRW_CSV_HEADER: [&str; 21] = [
    "eta",
    "chi",
    "theta",
    "phi",
    "g00",
    "g01",
    "g02",
    "g03",
    "g10",
    "g11",
    "g12",
    "g13",
    "g20",
    "g21",
    "g22",
    "g23",
    "g30",
    "g31",
    "g32",
    "g33",
    "scale_factor",
];

pub fn write_flrw_csv<W: Write>(report: &FlrwReport, out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FLRW_CSV_HEADER)?;
    for (sample, a) in &report.samples {
        let SamplePoint::Spherical(p) = sample.at else {
            continue;
        };
        let mut row = vec![p.eta, p.chi, p.theta, p.phi];
        row.extend_from_slice(sample.g.as_slice());
        row.push(*a);
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlicePoint {
    pub chi: f64,
    pub theta: f64,
    pub phi: f64,
    pub scalar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceJson {
    pub eta: f64,
    pub scale_factor: f64,
    pub expected: f64,
    pub max_rel_error: f64,
    pub spread: f64,
    pub pass: bool,
    pub points: Vec<SlicePoint>,
}

impl From<&SliceReport> for SliceJson {
    fn from(r: &SliceReport) -> Self {
        Self {
            eta: r.eta,
            scale_factor: r.scale_factor,
            expected: r.expected,
            max_rel_error: r.max_rel_error,
            spread: r.spread,
            pass: r.pass,
            points: r
                .points
                .iter()
                .zip(&r.scalars)
                .map(|(p, s)| SlicePoint {
                    chi: p[0],
                    theta: p[1],
                    phi: p[2],
                    scalar: *s,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureJson {
    pub pass: bool,
    pub step: f64,
    pub slices: Vec<SliceJson>,
}

pub fn write_curvature_csv<W: Write>(slices: &[SliceReport], out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["eta", "chi", "theta", "phi", "scalar", "expected"])?;
    for s in slices {
        for (p, v) in s.points.iter().zip(&s.scalars) {
            let row = [s.eta, p[0], p[1], p[2], *v, s.expected];
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FramePoint {
    pub eta: f64,
    pub chi: f64,
    pub theta: f64,
    pub phi: f64,
    pub dual_path_deviation: f64,
    pub printed_max_abs_diff: f64,
    /// `[row, col]` entries where the printed matrix disagrees.
    pub printed_discrepancies: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FramesJson {
    pub dual_path_pass: bool,
    pub max_dual_path_deviation: f64,
    /// Union over all points of the flagged entries of the printed matrix.
    pub printed_discrepant_entries: Vec<[usize; 2]>,
    pub points: Vec<FramePoint>,
}

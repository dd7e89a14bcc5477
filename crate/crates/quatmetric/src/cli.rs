//! Argument parsing and command dispatch.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use quatmetric_core::algebra::{Algebra, AlgebraKind};
use quatmetric_core::curvature::{spatial_slice_check, SliceReport, DEFAULT_CURVATURE_STEP};
use quatmetric_core::metric::{
    flrw_verdict, metric_spherical, metric_spherical_pushforward, solve_scale_profile, Branch,
    FlrwConfig, SphericalGrid, TauProfile, Verdict, FLRW_TOLERANCE,
};
use quatmetric_core::numeric::Tolerance;
use quatmetric_core::unit_group::compare_printed_frame_matrix;

use crate::catalog;
use crate::formats::{parse_algebra, parse_grid, TauSpec};
use crate::report::{
    write_curvature_csv, write_flrw_csv, AlgebraReport, CurvatureJson, FlrwJson, FramePoint,
    FramesJson, ProductsReport, SliceJson,
};
use crate::CliError;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_VERIFY: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Identity, associativity and commutator table of an algebra.
    Algebra,
    /// Principal one-forms and the inner products they induce.
    Products,
    /// FLRW verdict for the principal metric given by --tau.
    Flrw,
    /// Scalar curvature of the spatial slices.
    Curvature,
    /// Dual-path metric check and the printed frame-matrix comparison.
    Frames,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    #[value(name = "+", alias = "plus")]
    Plus,
    #[value(name = "-", alias = "minus")]
    Minus,
}

#[derive(Debug, Parser)]
#[command(
    name = "quatmetric",
    version,
    about = "Principal metrics on the quaternion unit group"
)]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// Builtin algebra: quaternion, complex, split-complex, dual, matrix2.
    #[arg(long, conflicts_with = "file")]
    pub algebra: Option<String>,
    /// Algebra JSON file.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// const:C, exp:K, poly:C0,C1,... or table:PATH (CSV eta,tau).
    #[arg(long)]
    pub tau: Option<String>,
    #[arg(long, value_enum, default_value = "+", allow_hyphen_values = true)]
    pub branch: BranchArg,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub eta0: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub r0: f64,
    /// eta=LO:HI:N,chi=LO:HI:N,theta=LO:HI:N,phi=LO:HI:N; omitted axes use defaults.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Finite-difference step for curvature.
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub rank_tol: Option<f64>,
    #[arg(long)]
    pub sym_tol: Option<f64>,
    #[arg(long)]
    pub quad_tol: Option<f64>,
    #[arg(long)]
    pub fd_step: Option<f64>,
}

/// JSON report text and whether every check passed.
#[derive(Debug)]
pub struct Outcome {
    pub json: String,
    pub passed: bool,
}

/// Grid used when `--grid` is absent.
pub fn default_grid() -> SphericalGrid {
    SphericalGrid::generic(-1.0, 1.0, 5)
}

impl Args {
    fn tolerance(&self) -> Result<Tolerance, CliError> {
        let d = Tolerance::default();
        Ok(Tolerance::new(
            self.rank_tol.unwrap_or(d.rank_tol),
            self.sym_tol.unwrap_or(d.sym_tol),
            self.quad_tol.unwrap_or(d.quad_tol),
            self.fd_step.unwrap_or(d.fd_step),
        )?)
    }

    fn algebra(&self) -> Result<Algebra, CliError> {
        if let Some(path) = &self.file {
            let text = std::fs::read_to_string(path)?;
            return Ok(parse_algebra(&text, &path.display().to_string())?);
        }
        let name = self.algebra.as_deref().unwrap_or("quaternion");
        catalog::builtin(name).ok_or_else(|| {
            CliError::Usage(format!(
                "unknown algebra {name:?}; builtins are {}",
                catalog::BUILTIN_NAMES.join(", ")
            ))
        })
    }

    fn grid(&self) -> Result<SphericalGrid, CliError> {
        match &self.grid {
            Some(spec) => Ok(parse_grid(spec, default_grid())?),
            None => Ok(default_grid()),
        }
    }

    /// Tau on the grid's eta range, widened to contain `eta0`.
    fn tau_profile(&self, grid: &SphericalGrid) -> Result<TauProfile, CliError> {
        let spec = self
            .tau
            .as_deref()
            .ok_or_else(|| CliError::Usage("--tau is required for this command".into()))?;
        let spec = TauSpec::parse(spec)?;
        let mut lo = grid.eta.lo.min(self.eta0);
        let mut hi = grid
            .eta
            .values()
            .last()
            .copied()
            .unwrap_or(lo)
            .max(self.eta0);
        if lo == hi {
            lo -= 1e-6;
            hi += 1e-6;
        }
        spec.build(lo, hi)
    }

    fn require_quaternion(&self) -> Result<(), CliError> {
        let alg = self.algebra()?;
        if alg.kind() == AlgebraKind::Quaternion {
            Ok(())
        } else {
            Err(CliError::Usage(
                "the metric pipeline is defined for the quaternion algebra only".into(),
            ))
        }
    }

    fn config(&self) -> FlrwConfig {
        FlrwConfig {
            eta0: self.eta0,
            r0: self.r0,
            branch: match self.branch {
                BranchArg::Plus => Branch::Plus,
                BranchArg::Minus => Branch::Minus,
            },
        }
    }
}

fn create(path: &PathBuf) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_json_out(args: &Args, json: &str) -> Result<(), CliError> {
    if let Some(path) = &args.out {
        let mut w = create(path)?;
        writeln!(w, "{json}")?;
        w.flush()?;
    }
    Ok(())
}

fn no_csv(args: &Args) -> Result<(), CliError> {
    if args.format == Format::Csv {
        return Err(CliError::Usage(
            "csv output is available for flrw and curvature only".into(),
        ));
    }
    Ok(())
}

pub fn run(args: &Args) -> Result<Outcome, CliError> {
    let tol = args.tolerance()?;
    match args.command {
        Command::Algebra => {
            no_csv(args)?;
            let report = AlgebraReport::build(&args.algebra()?, &tol);
            let json = serde_json::to_string_pretty(&report)?;
            write_json_out(args, &json)?;
            Ok(Outcome { json, passed: true })
        }
        Command::Products => {
            no_csv(args)?;
            let report = ProductsReport::build(&args.algebra()?, &tol)?;
            let json = serde_json::to_string_pretty(&report)?;
            write_json_out(args, &json)?;
            Ok(Outcome { json, passed: true })
        }
        Command::Flrw => run_flrw(args, &tol),
        Command::Curvature => run_curvature(args, &tol),
        Command::Frames => run_frames(args, &tol),
    }
}

fn run_flrw(args: &Args, tol: &Tolerance) -> Result<Outcome, CliError> {
    args.require_quaternion()?;
    let grid = args.grid()?;
    let tp = args.tau_profile(&grid)?;
    let report = flrw_verdict(&tp, &grid.points(), &args.config(), tol)?;
    let json = serde_json::to_string_pretty(&FlrwJson::from(&report))?;
    match (&args.out, args.format) {
        (Some(path), Format::Csv) => write_flrw_csv(&report, create(path)?)?,
        _ => write_json_out(args, &json)?,
    }
    Ok(Outcome {
        json,
        passed: report.verdict == Verdict::Pass,
    })
}

fn run_curvature(args: &Args, tol: &Tolerance) -> Result<Outcome, CliError> {
    args.require_quaternion()?;
    let grid = args.grid()?;
    let tp = args.tau_profile(&grid)?;
    let h = args.h.unwrap_or(DEFAULT_CURVATURE_STEP);
    if !(h.is_finite() && h > 0.0) {
        return Err(CliError::Usage("--h must be positive".into()));
    }
    let mut points = Vec::new();
    for chi in grid.chi.values() {
        for theta in grid.theta.values() {
            for phi in grid.phi.values() {
                points.push([chi, theta, phi]);
            }
        }
    }
    let slices: Vec<SliceReport> = grid
        .eta
        .values()
        .into_iter()
        .map(|eta| spatial_slice_check(&tp, eta, &points, h, tol))
        .collect::<Result<_, _>>()?;
    let passed = slices.iter().all(|s| s.pass);
    let json = serde_json::to_string_pretty(&CurvatureJson {
        pass: passed,
        step: h,
        slices: slices.iter().map(SliceJson::from).collect(),
    })?;
    match (&args.out, args.format) {
        (Some(path), Format::Csv) => write_curvature_csv(&slices, create(path)?)?,
        _ => write_json_out(args, &json)?,
    }
    Ok(Outcome { json, passed })
}

fn run_frames(args: &Args, tol: &Tolerance) -> Result<Outcome, CliError> {
    no_csv(args)?;
    args.require_quaternion()?;
    let grid = args.grid()?;
    let tp = args.tau_profile(&grid)?;
    let cfg = args.config();
    let prof = solve_scale_profile(&tp, cfg.eta0, cfg.r0, cfg.branch, tol)?;
    let mut points = Vec::new();
    let mut flagged: Vec<[usize; 2]> = Vec::new();
    let mut worst = 0.0f64;
    for p in grid.points() {
        let closed = metric_spherical(&p, &tp, &prof)?.g;
        let pushed = metric_spherical_pushforward(&p, &tp, &prof, tol)?.g;
        let dev = closed.max_abs_diff(&pushed);
        worst = worst.max(dev);
        let cmp = compare_printed_frame_matrix(&p, &prof, FLRW_TOLERANCE, tol)?;
        let entries: Vec<[usize; 2]> = cmp.discrepancies.iter().map(|d| [d.row, d.col]).collect();
        for e in &entries {
            if !flagged.contains(e) {
                flagged.push(*e);
            }
        }
        points.push(FramePoint {
            eta: p.eta,
            chi: p.chi,
            theta: p.theta,
            phi: p.phi,
            dual_path_deviation: dev,
            printed_max_abs_diff: cmp.max_abs_diff,
            printed_discrepancies: entries,
        });
    }
    flagged.sort_unstable();
    let passed = !points.is_empty() && worst < FLRW_TOLERANCE;
    let json = serde_json::to_string_pretty(&FramesJson {
        dual_path_pass: passed,
        max_dual_path_deviation: worst,
        printed_discrepant_entries: flagged,
        points,
    })?;
    write_json_out(args, &json)?;
    Ok(Outcome { json, passed })
}

/// Parses `argv`, runs the command, prints the report and maps the result
/// to an exit code.
pub fn main_with_args<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                EXIT_INPUT
            } else {
                EXIT_PASS
            });
        }
    };
    match run(&args) {
        Ok(outcome) => {
            // a closed pipe is not an input error
            let _ = writeln!(std::io::stdout().lock(), "{}", outcome.json);
            ExitCode::from(if outcome.passed {
                EXIT_PASS
            } else {
                EXIT_VERIFY
            })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

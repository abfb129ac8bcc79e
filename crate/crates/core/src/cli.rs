//! Command-line front end: `generate`, `compute`, `verify` and `plot-data`.
//!
//! Exit codes: 0 success (and, for `verify`, every comparison passed),
//! 1 usage or input error, 2 numerical precondition violated (degenerate or
//! zero target, SVD failure), 3 resource cap exceeded, 4 at least one
//! verification comparison failed.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::closedform::{hessian, jacobian};
use crate::error::{Error, Result};
use crate::matrix::RealMatrix;
use crate::oracle::BranchTracker;
use crate::report::{Analysis, Provenance, VerifyTolerances, TOOL_NAME, TOOL_VERSION};
use crate::rng::{Distribution, MatrixRng, DIRECTION_STREAM, MATRIX_STREAM};
use crate::svd::{singular_values, FullSvd, Tolerances, DEFAULT_GAP_TOL, DEFAULT_RANK_TOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_VERIFY_FAILED: i32 = 4;

const RNG_DESCRIPTION: &str = "ChaCha20 seed_from_u64; uniform = (u64 >> 11) * 2^-53; normal = Box-Muller (libm); row-major fill";

#[derive(Debug, Parser)]
#[command(
    name = "svd-perturb",
    version,
    about = "Derivatives of simple singular values"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a seeded random matrix as CSV.
    Generate(GenerateArgs),
    /// Compute Jacobian, optional Hessian and expansion coefficients.
    Compute(ComputeArgs),
    /// Compute and check every value against derivative-free oracles.
    Verify(VerifyArgs),
    /// Emit formula/oracle series for external plotting.
    PlotData(PlotArgs),
}

#[derive(Debug, Clone, Args)]
struct SourceArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "normal01", value_parser = parse_dist)]
    dist: Distribution,
    #[arg(long, default_value_t = 6)]
    rows: usize,
    #[arg(long, default_value_t = 10)]
    cols: usize,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Matrix CSV; a seeded matrix is generated when omitted.
    #[arg(value_name = "MATRIX")]
    matrix: Option<PathBuf>,
    #[arg(long = "matrix", value_name = "CSV", conflicts_with = "matrix")]
    matrix_flag: Option<PathBuf>,
    #[command(flatten)]
    source: SourceArgs,
    /// Target index (1-based) or "all".
    #[arg(long, default_value = "all")]
    k: KSelection,
    /// Highest expansion order.
    #[arg(long, default_value_t = 2)]
    order: usize,
    /// Include the dense Hessian.
    #[arg(long)]
    hessian: bool,
    /// Direction CSV; a seeded unit-norm direction is generated when omitted.
    #[arg(long)]
    direction: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_GAP_TOL)]
    gap_tol: f64,
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    rank_tol: f64,
    /// Report path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Omit the timestamp so identical runs produce identical bytes.
    #[arg(long)]
    reproducible: bool,
}

#[derive(Debug, Args)]
struct ComputeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Skip the oracle comparisons.
    #[arg(long)]
    no_verify: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct PlotArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Distribution; both when omitted.
    #[arg(long, value_parser = parse_dist)]
    dist: Option<Distribution>,
    #[arg(long, default_value_t = 6)]
    rows: usize,
    #[arg(long, default_value_t = 10)]
    cols: usize,
    #[arg(long, default_value = "all")]
    k: KSelection,
    /// Also emit Hessian entry series.
    #[arg(long)]
    hessian: bool,
    #[arg(long, default_value_t = DEFAULT_GAP_TOL)]
    gap_tol: f64,
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    rank_tol: f64,
    /// Output directory.
    #[arg(long, default_value = "plot-data")]
    out: PathBuf,
}

fn parse_dist(s: &str) -> std::result::Result<Distribution, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// `--k` value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KSelection {
    All,
    One(usize),
}

impl FromStr for KSelection {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "all" {
            return Ok(KSelection::All);
        }
        match s.parse::<usize>() {
            Ok(k) if k >= 1 => Ok(KSelection::One(k)),
            _ => Err(format!("expected a positive integer or \"all\", got {s:?}")),
        }
    }
}

impl KSelection {
    fn resolve(self, rows: usize, cols: usize) -> Result<Vec<usize>> {
        let p = rows.min(cols);
        match self {
            KSelection::All => Ok((1..=p).collect()),
            KSelection::One(k) if k <= p => Ok(vec![k]),
            KSelection::One(k) => Err(Error::InvalidArgument(format!(
                "k = {k} exceeds min(rows, cols) = {p}"
            ))),
        }
    }

    fn label(self) -> String {
        match self {
            KSelection::All => "all".into(),
            KSelection::One(k) => k.to_string(),
        }
    }
}

/// Maps an error to its process exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::DegenerateSpectrum { .. }
        | Error::ZeroSingularValue { .. }
        | Error::SvdFailure
        | Error::SvdInvariant(_)
        | Error::BranchAmbiguity { .. }
        | Error::IllConditionedFit { .. } => EXIT_NUMERICAL,
        Error::SizeOverflow { .. } => EXIT_RESOURCE,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(&args, stdout),
        Command::Compute(args) => cmd_report("compute", &args.common, !args.no_verify, stdout),
        Command::Verify(args) => cmd_report("verify", &args.common, true, stdout),
        Command::PlotData(args) => cmd_plotdata(&args, stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn check_dims(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument(
            "--rows and --cols must be at least 1".into(),
        ));
    }
    Ok(())
}

fn generated_matrix(source: &SourceArgs) -> Result<RealMatrix> {
    check_dims(source.rows, source.cols)?;
    MatrixRng::with_stream(source.seed, MATRIX_STREAM).matrix(source.rows, source.cols, source.dist)
}

fn cmd_generate(args: &GenerateArgs, stdout: &mut dyn Write) -> Result<i32> {
    let a = generated_matrix(&args.source)?;
    match &args.out {
        Some(path) => a.write_csv(path)?,
        None => a.write_csv_to(&mut *stdout)?,
    }
    Ok(EXIT_OK)
}

fn write_output(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn cmd_report(
    command: &str,
    args: &CommonArgs,
    verify: bool,
    stdout: &mut dyn Write,
) -> Result<i32> {
    let tolerances = Tolerances {
        rank_tol: args.rank_tol,
        gap_tol: args.gap_tol,
    };
    if !(args.gap_tol > 0.0 && args.gap_tol < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "--gap-tol must lie in (0, 1), got {}",
            args.gap_tol
        )));
    }
    if args.order == 0 {
        return Err(Error::InvalidArgument("--order must be at least 1".into()));
    }
    let matrix_path = args.matrix.as_ref().or(args.matrix_flag.as_ref());
    let a = match matrix_path {
        Some(p) => RealMatrix::read_csv(p)?,
        None => generated_matrix(&args.source)?,
    };
    let (m, n) = a.shape();
    let ks = args.k.resolve(m, n)?;

    let direction = match &args.direction {
        Some(p) => {
            let d = RealMatrix::read_csv(p)?;
            if d.shape() != (m, n) {
                return Err(Error::DimensionMismatch {
                    expected: format!("{m}x{n} direction"),
                    found: format!("{}x{}", d.rows(), d.cols()),
                });
            }
            d
        }
        None => MatrixRng::with_stream(args.source.seed, DIRECTION_STREAM).unit_direction(m, n)?,
    };

    let generated = matrix_path.is_none();
    let provenance = Provenance {
        matrix_source: if generated { "generated" } else { "file" }.into(),
        matrix_file: matrix_path.map(|p| p.display().to_string()),
        seed: (generated || args.direction.is_none()).then_some(args.source.seed),
        dist: generated.then_some(args.source.dist),
        rows: m,
        cols: n,
        k: args.k.label(),
        order: args.order,
        hessian: args.hessian,
        verify,
        rank_tol: args.rank_tol,
        gap_tol: args.gap_tol,
        direction_source: if args.direction.is_some() {
            "file"
        } else {
            "generated"
        }
        .into(),
        direction_file: args.direction.as_ref().map(|p| p.display().to_string()),
        rng: RNG_DESCRIPTION.into(),
    };

    let analysis = Analysis {
        matrix: &a,
        direction: &direction,
        ks,
        order: args.order,
        hessian: args.hessian,
        verify,
        tolerances,
        verify_tolerances: VerifyTolerances::default(),
    };
    let mut report = analysis.run(command, provenance)?;
    if !args.reproducible {
        report.generated_at_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs());
    }
    write_output(args.out.as_deref(), &report.to_json()?, stdout)?;
    Ok(if command == "verify" && !report.all_pass() {
        EXIT_VERIFY_FAILED
    } else {
        EXIT_OK
    })
}

#[derive(Debug, Serialize)]
struct PlotManifest {
    schema_version: &'static str,
    tool: &'static str,
    version: &'static str,
    seed: u64,
    rows: usize,
    cols: usize,
    rank_tol: f64,
    gap_tol: f64,
    rng: &'static str,
    files: Vec<PlotFile>,
}

#[derive(Debug, Serialize)]
struct PlotFile {
    path: String,
    dist: Distribution,
    k: usize,
    kind: &'static str,
    rows: usize,
    step: f64,
    max_abs_error: f64,
}

fn cmd_plotdata(args: &PlotArgs, stdout: &mut dyn Write) -> Result<i32> {
    check_dims(args.rows, args.cols)?;
    let dists = match args.dist {
        Some(d) => vec![d],
        None => vec![Distribution::Normal01, Distribution::Uniform01],
    };
    std::fs::create_dir_all(&args.out)?;
    let mut files = Vec::new();
    for dist in dists {
        let a =
            MatrixRng::with_stream(args.seed, MATRIX_STREAM).matrix(args.rows, args.cols, dist)?;
        let svd = FullSvd::new(&a, args.rank_tol)?;
        let ks = args.k.resolve(args.rows, args.cols)?;
        for &k in &ks {
            svd.require_simple(k, args.gap_tol)?;
        }
        for &k in &ks {
            files.push(jacobian_series(&args.out, dist, &a, &svd, k, args.gap_tol)?);
        }
        if args.hessian {
            files.extend(hessian_series(
                &args.out,
                dist,
                &a,
                &svd,
                &ks,
                args.gap_tol,
            )?);
        }
    }
    let manifest = PlotManifest {
        schema_version: "1.0.0",
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        seed: args.seed,
        rows: args.rows,
        cols: args.cols,
        rank_tol: args.rank_tol,
        gap_tol: args.gap_tol,
        rng: RNG_DESCRIPTION,
        files,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.into()))? + "\n";
    std::fs::write(args.out.join("manifest.json"), &json)?;
    writeln!(
        stdout,
        "wrote {} series to {}",
        manifest.files.len(),
        args.out.display()
    )?;
    Ok(EXIT_OK)
}

fn jacobian_series(
    out: &Path,
    dist: Distribution,
    a: &RealMatrix,
    svd: &FullSvd,
    k: usize,
    gap_tol: f64,
) -> Result<PlotFile> {
    let (m, n) = a.shape();
    let jac = jacobian(svd, k, gap_tol)?;
    let mut text = String::from("index,row,col,formula,oracle,abs_error\n");
    let mut step = 0.0;
    let mut worst: f64 = 0.0;
    for idx in 0..m * n {
        let (i, j) = (idx % m, idx / m);
        let t = BranchTracker::from_svd(svd, a, &RealMatrix::unit(m, n, i, j), k)?;
        step = t.default_fd_step(1);
        let oracle = t.fd(1, step)?.value;
        let formula = jac.matrix()[(i, j)];
        let err = (formula - oracle).abs();
        worst = worst.max(err);
        let _ = writeln!(
            text,
            "{},{},{},{formula:.16e},{oracle:.16e},{err:.16e}",
            idx + 1,
            i + 1,
            j + 1
        );
    }
    let name = format!("{}_k{}_jacobian.csv", dist.name(), k);
    std::fs::write(out.join(&name), text)?;
    Ok(PlotFile {
        path: name,
        dist,
        k,
        kind: "jacobian",
        rows: m * n,
        step,
        max_abs_error: worst,
    })
}

/// Hessian entries against mixed second differences of the sorted
/// singular values; each perturbed SVD is shared by all targets.
fn hessian_series(
    out: &Path,
    dist: Distribution,
    a: &RealMatrix,
    svd: &FullSvd,
    ks: &[usize],
    gap_tol: f64,
) -> Result<Vec<PlotFile>> {
    let (m, n) = a.shape();
    let mn = m * n;
    let hessians = ks
        .iter()
        .map(|&k| hessian(svd, k, gap_tol))
        .collect::<Result<Vec<_>>>()?;
    // |x| ||E_p ± E_q||_2 <= sqrt(2) h must stay below gap / 4 for every target.
    let min_gap = ks
        .iter()
        .map(|&k| svd.gap_certificate(k, gap_tol).map(|c| c.min_gap))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let h =
        (1e-4 * svd.sigma_max().max(1.0).sqrt()).min(min_gap / (8.0 * std::f64::consts::SQRT_2));

    let sv = |x: &RealMatrix| singular_values(x);
    let base = sv(a)?;
    let mut oracle = vec![vec![0.0; mn * mn]; ks.len()];
    for p in 0..mn {
        let ep = RealMatrix::unit(m, n, p % m, p / m);
        let plus = sv(&a.add_scaled(h, &ep)?)?;
        let minus = sv(&a.add_scaled(-h, &ep)?)?;
        for (t, &k) in ks.iter().enumerate() {
            oracle[t][p * mn + p] = (plus[k - 1] - 2.0 * base[k - 1] + minus[k - 1]) / (h * h);
        }
        for q in 0..p {
            let eq = RealMatrix::unit(m, n, q % m, q / m);
            let f = |sp: f64, sq: f64| -> Result<Vec<f64>> {
                sv(&a.add_scaled(sp * h, &ep)?.add_scaled(sq * h, &eq)?)
            };
            let (pp, pm, mp, mm) = (f(1.0, 1.0)?, f(1.0, -1.0)?, f(-1.0, 1.0)?, f(-1.0, -1.0)?);
            for (t, &k) in ks.iter().enumerate() {
                let i = k - 1;
                let v = (pp[i] - pm[i] - mp[i] + mm[i]) / (4.0 * h * h);
                oracle[t][p * mn + q] = v;
                oracle[t][q * mn + p] = v;
            }
        }
    }

    let mut files = Vec::with_capacity(ks.len());
    for (t, &k) in ks.iter().enumerate() {
        let hm = hessians[t].matrix();
        let mut text = String::from("index,row_index,col_index,formula,oracle,abs_error\n");
        let mut worst: f64 = 0.0;
        for c in 0..mn {
            for r in 0..mn {
                let formula = hm[(r, c)];
                let o = oracle[t][c * mn + r];
                let err = (formula - o).abs();
                worst = worst.max(err);
                let _ = writeln!(
                    text,
                    "{},{},{},{formula:.16e},{o:.16e},{err:.16e}",
                    c * mn + r + 1,
                    r + 1,
                    c + 1
                );
            }
        }
        let name = format!("{}_k{}_hessian.csv", dist.name(), k);
        std::fs::write(out.join(&name), text)?;
        files.push(PlotFile {
            path: name,
            dist,
            k,
            kind: "hessian",
            rows: mn * mn,
            step: h,
            max_abs_error: worst,
        });
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_selection_parsing() {
        assert_eq!("all".parse::<KSelection>().unwrap(), KSelection::All);
        assert_eq!("3".parse::<KSelection>().unwrap(), KSelection::One(3));
        assert!("0".parse::<KSelection>().is_err());
        assert!(KSelection::One(5).resolve(2, 2).is_err());
        assert_eq!(
            KSelection::All.resolve(6, 10).unwrap(),
            vec![1, 2, 3, 4, 5, 6]
        );
    }

    #[test]
    fn exit_codes() {
        assert_eq!(
            exit_code(&Error::DegenerateSpectrum {
                k: 1,
                gap: 0.0,
                threshold: 1e-8
            }),
            EXIT_NUMERICAL
        );
        assert_eq!(
            exit_code(&Error::SizeOverflow {
                requested: 2,
                cap: 1
            }),
            EXIT_RESOURCE
        );
        assert_eq!(exit_code(&Error::Parse("x".into())), EXIT_USAGE);
    }

    #[test]
    fn clap_errors_are_usage_errors() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(
            run(["svd-perturb", "frobnicate"], &mut out, &mut err),
            EXIT_USAGE
        );
        assert_eq!(
            run(["svd-perturb", "verify", "--k", "zero"], &mut out, &mut err),
            EXIT_USAGE
        );
    }
}

//! `mpinv` command line: identity suite, truncation studies, and
//! pseudoinverse / perturbation updates from matrix files.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage or input error. Data goes
//! to stdout or `--output`; everything else goes to stderr.

pub mod matrix_io;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mpinv_core::identities::DEFAULT_DIMS;
use mpinv_core::perturbation::check_conditions;
use mpinv_core::truncation::{family_diag_kernel, family_diag_unbounded, family_multiplication, is_non_increasing};
use mpinv_core::{
    convergence_study, perturbed_pinv, pinv, run_suite, Error, InstanceConfig, Matrix, Operator, PerturbationCheck, Probe,
    SUBSPACE_TOL,
};
use serde::Serialize;

use matrix_io::{matrix_csv, read_matrix, MatrixFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "mpinv", version, about = "Moore-Penrose pseudoinverse laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the identity suite over seeded random instances.
    Verify(VerifyArgs),
    /// Convergence study of a truncation family against its analytic pseudoinverse.
    Converge(ConvergeArgs),
    /// Pseudoinverse of a matrix file.
    Pinv(PinvArgs),
    /// Pseudoinverse of T + S from T's, for an admissible perturbation S.
    Perturb(PerturbArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write data here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    #[arg(long, default_value_t = 50)]
    pub trials: usize,

    /// Pass threshold on the normalized residual.
    #[arg(long, default_value_t = 1e-9, allow_negative_numbers = true)]
    pub tol: f64,

    /// Dimension schedule, e.g. `2x2,3x5`.
    #[arg(long)]
    pub dims: Option<String>,

    /// Singular value range of generated instances, e.g. `0.1,10`.
    #[arg(long, default_value = "0.1,10")]
    pub sigma_range: String,

    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyName {
    /// diag(1, 2, …, n)
    DiagUnbounded,
    /// diag(0, 2, …, n)
    DiagKernel,
    /// Multiplication by 1 + x on L²[0,1].
    MultPhi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProbeName {
    /// y_k = 1/k
    InverseIndex,
    /// (1, 1, 1, 0, 0, …)
    Finite,
    /// The constant function 1.
    Constant,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[arg(long, value_enum)]
    pub family: FamilyName,

    /// Ascending truncation sizes, e.g. `4,8,16`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_list: Vec<usize>,

    /// Defaults: inverse-index for diag-unbounded, finite for diag-kernel,
    /// constant for mult-phi.
    #[arg(long, value_enum)]
    pub probe: Option<ProbeName>,

    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PinvArgs {
    /// Matrix file (`.csv` for real CSV, JSON otherwise).
    pub input: PathBuf,

    /// Rank cut; defaults to max(m, n)·σ_max·2⁻⁵².
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<f64>,

    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PerturbArgs {
    /// The operator T.
    pub t: PathBuf,

    /// The perturbation S, same shape as T.
    pub s: PathBuf,

    /// Pass threshold on the residual against direct recomputation.
    #[arg(long, default_value_t = 1e-9, allow_negative_numbers = true)]
    pub tol: f64,

    #[command(flatten)]
    pub out: OutputArgs,
}

/// A usage or input problem; always exit 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

type CmdResult = Result<i32, Usage>;

pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Verify(a) => cmd_verify(&a),
        Command::Converge(a) => cmd_converge(&a),
        Command::Pinv(a) => cmd_pinv(&a),
        Command::Perturb(a) => cmd_perturb(&a),
    };
    match result {
        Ok(code) => code,
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
    }
}

fn check_tol(tol: f64) -> Result<(), Usage> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Usage(format!("--tol must be a positive finite number, got {tol}")))
    }
}

fn emit(out: &OutputArgs, body: &str) -> Result<(), Usage> {
    let mut text = body.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &out.output {
        Some(path) => fs::write(path, text).map_err(|e| Usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(value: &T) -> Result<String, Usage> {
    Ok(serde_json::to_string_pretty(value)?)
}

/// Single-line JSON; matrix entry lists are unreadable when pretty-printed.
fn json_compact<T: Serialize>(value: &T) -> Result<String, Usage> {
    Ok(serde_json::to_string(value)?)
}

/// Shortest round-trip decimal, switching to exponent form for very small or
/// large magnitudes.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn csv_table<R: Serialize>(records: &[R]) -> Result<String, Usage> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| Usage(e.to_string()))?)?)
}

pub fn parse_dims(s: &str) -> Result<Vec<(usize, usize)>, Usage> {
    s.split(',')
        .map(|part| {
            let (m, n) = part
                .trim()
                .split_once(['x', 'X'])
                .ok_or_else(|| Usage(format!("bad dimension {part:?}, expected MxN")))?;
            let (m, n) = (m.trim().parse::<usize>()?, n.trim().parse::<usize>()?);
            Ok((m, n))
        })
        .collect()
}

fn parse_range(s: &str) -> Result<(f64, f64), Usage> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| Usage(format!("bad range {s:?}, expected MIN,MAX")))?;
    Ok((lo.trim().parse()?, hi.trim().parse()?))
}

#[derive(Serialize)]
struct ReportRow<'a> {
    id: &'a str,
    trials: usize,
    dims: String,
    max_residual: f64,
    tol: f64,
    pass: bool,
    seed: u64,
}

pub fn cmd_verify(a: &VerifyArgs) -> CmdResult {
    check_tol(a.tol)?;
    let dims = match &a.dims {
        Some(s) => parse_dims(s)?,
        None => DEFAULT_DIMS.to_vec(),
    };
    let cfg = InstanceConfig {
        seed: a.seed,
        trials: a.trials,
        sigma_range: parse_range(&a.sigma_range)?,
        dims,
        ..Default::default()
    };
    let outcome = run_suite(&cfg, a.tol)?;
    let body = match a.out.format {
        Format::Json => json(&outcome.reports)?,
        Format::Csv => {
            let rows: Vec<ReportRow> = outcome
                .reports
                .iter()
                .map(|r| ReportRow {
                    id: &r.id,
                    trials: r.trials,
                    dims: r.dims.iter().map(|(m, n)| format!("{m}x{n}")).collect::<Vec<_>>().join(";"),
                    max_residual: r.max_residual,
                    tol: r.tol,
                    pass: r.pass,
                    seed: r.seed,
                })
                .collect();
            csv_table(&rows)?
        }
    };
    emit(&a.out, &body)?;
    if outcome.vacuous {
        eprintln!("warning: vacuous pass, no trials were run");
        return Ok(EXIT_OK);
    }
    let failed: Vec<&str> = outcome.reports.iter().filter(|r| !r.pass).map(|r| r.id.as_str()).collect();
    eprintln!(
        "{}/{} identities pass ({} trials, seed {})",
        outcome.reports.len() - failed.len(),
        outcome.reports.len(),
        a.trials,
        a.seed
    );
    if failed.is_empty() {
        Ok(EXIT_OK)
    } else {
        eprintln!("failed: {}", failed.join(", "));
        Ok(EXIT_FAIL)
    }
}

pub fn cmd_converge(a: &ConvergeArgs) -> CmdResult {
    if a.n_list.is_empty() || a.n_list.contains(&0) || a.n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Usage("--n-list must be non-empty, positive and strictly ascending".into()));
    }
    let n_max = *a.n_list.last().expect("non-empty");
    let (family, default_probe) = match a.family {
        FamilyName::DiagUnbounded => (family_diag_unbounded(), ProbeName::InverseIndex),
        FamilyName::DiagKernel => (family_diag_kernel(), ProbeName::Finite),
        FamilyName::MultPhi => (family_multiplication(|x| 1.0 + x, n_max)?, ProbeName::Constant),
    };
    let probe = match a.probe.unwrap_or(default_probe) {
        ProbeName::InverseIndex => Probe::inverse_index(),
        ProbeName::Finite => Probe::finitely_supported(vec![1.0; 3]),
        ProbeName::Constant => Probe::constant(1.0),
    };
    let records = convergence_study(&family, &probe, &a.n_list)?;
    let body = match a.out.format {
        Format::Json => json(&records)?,
        Format::Csv => csv_table(&records)?,
    };
    emit(&a.out, &body)?;
    if is_non_increasing(&records) {
        Ok(EXIT_OK)
    } else {
        eprintln!("residuals increase along --n-list");
        Ok(EXIT_FAIL)
    }
}

#[derive(Serialize)]
struct PinvOutput {
    matrix: MatrixFile,
    rank: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    sigma: Vec<f64>,
    tol_used: f64,
}

/// `# key,value` lines ahead of a CSV matrix body.
fn csv_with_header(fields: &[(&str, String)], m: &Matrix) -> Result<String, Usage> {
    let mut s = String::new();
    for (k, v) in fields {
        s.push_str(&format!("# {k},{v}\n"));
    }
    s.push_str(&matrix_csv(m)?);
    Ok(s)
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|&x| num(x)).collect::<Vec<_>>().join(";")
}

fn load(path: &Path) -> Result<Operator, Usage> {
    Ok(Operator::dense(read_matrix(path)?)?)
}

pub fn cmd_pinv(a: &PinvArgs) -> CmdResult {
    if let Some(t) = a.tol {
        check_tol(t)?;
    }
    let op = load(&a.input)?;
    let r = pinv(&op, a.tol)?;
    let m = r.pinv.materialize();
    let body = match a.out.format {
        Format::Json => json_compact(&PinvOutput {
            matrix: MatrixFile::from(&m),
            rank: r.rank,
            gamma: r.gamma,
            sigma: r.sigma.clone(),
            tol_used: r.tol_used,
        })?,
        Format::Csv => {
            let mut fields = vec![("rank", r.rank.to_string())];
            if let Some(g) = r.gamma {
                fields.push(("gamma", num(g)));
            }
            fields.push(("sigma", join(&r.sigma)));
            fields.push(("tol_used", num(r.tol_used)));
            csv_with_header(&fields, &m)?
        }
    };
    emit(&a.out, &body)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct PerturbOutput {
    check: PerturbationCheck,
    #[serde(skip_serializing_if = "Option::is_none")]
    pinv: Option<MatrixFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual: Option<f64>,
}

fn check_fields(c: &PerturbationCheck) -> Vec<(&'static str, String)> {
    vec![
        ("t_dagger_s_norm", num(c.t_dagger_s_norm)),
        ("s_t_dagger_norm", num(c.s_t_dagger_norm)),
        ("null_inclusion", c.null_inclusion.to_string()),
        ("range_inclusion", c.range_inclusion.to_string()),
        ("admissible", c.admissible.to_string()),
        ("marginal", c.marginal.to_string()),
    ]
}

/// Inclusions are decided at the subspace tolerance; `--tol` gates only the
/// agreement with direct recomputation.
pub fn cmd_perturb(a: &PerturbArgs) -> CmdResult {
    check_tol(a.tol)?;
    let t = load(&a.t)?;
    let s = load(&a.s)?;
    let check = check_conditions(&t, &s, SUBSPACE_TOL)?;
    if !check.admissible {
        let body = match a.out.format {
            Format::Json => json_compact(&PerturbOutput {
                check: check.clone(),
                pinv: None,
                residual: None,
            })?,
            Format::Csv => check_fields(&check)
                .iter()
                .map(|(k, v)| format!("# {k},{v}\n"))
                .collect(),
        };
        emit(&a.out, &body)?;
        eprintln!("inadmissible perturbation: {check:?}");
        return Ok(EXIT_FAIL);
    }
    if check.marginal {
        eprintln!("warning: admissible but within {} of the norm bound", mpinv_core::perturbation::MARGINAL_BAND);
    }
    let updated = match perturbed_pinv(&t, &s, SUBSPACE_TOL) {
        Ok(p) => p.materialize(),
        Err(e @ Error::SingularSystem { .. }) => {
            eprintln!("closed form failed: {e}");
            return Ok(EXIT_FAIL);
        }
        Err(e) => return Err(e.into()),
    };
    let direct = pinv(&Operator::Dense(&t.materialize() + &s.materialize()), None)?.pinv.materialize();
    let residual = (&updated - &direct).frobenius_norm() / (1.0 + direct.frobenius_norm());
    let body = match a.out.format {
        Format::Json => json_compact(&PerturbOutput {
            check: check.clone(),
            pinv: Some(MatrixFile::from(&updated)),
            residual: Some(residual),
        })?,
        Format::Csv => {
            let mut fields = check_fields(&check);
            fields.push(("residual", num(residual)));
            csv_with_header(&fields, &updated)?
        }
    };
    emit(&a.out, &body)?;
    if residual <= a.tol {
        Ok(EXIT_OK)
    } else {
        eprintln!("closed form differs from direct recomputation by {residual:e} > {:e}", a.tol);
        Ok(EXIT_FAIL)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_parse() {
        assert_eq!(parse_dims("2x2, 3X5").unwrap(), vec![(2, 2), (3, 5)]);
        assert!(parse_dims("2by2").is_err());
        assert!(parse_dims("2x").is_err());
    }

    #[test]
    fn range_parse() {
        assert_eq!(parse_range("1e-14,10").unwrap(), (1e-14, 10.0));
        assert!(parse_range("1").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}

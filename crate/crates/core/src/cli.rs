//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 reference
//! table mismatch. Data goes to stdout (or `--output`), diagnostics to
//! stderr. Floats are printed in shortest round-trip form, so identical
//! invocations give byte-identical output.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{
    approximation_ladder, convergence_ladder, run_golden, Approximation, CellStatus, ConvergenceRow,
};
use crate::caputo::{apply_stencil, fourth_order_eval, test_function, QUADRATURE_MIN_TOL, TEST_FUNCTION_NAMES};
use crate::error::{Error, Result};
use crate::relaxation::{equation, solve_with_step, stability_check, StartMode};
use crate::schemes::{build_weights, expansion_coefficients, validate_weights, CheckStatus, SchemeId};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_GOLDEN: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "caputo-approx",
    version,
    about = "Caputo derivative weight schemes and fractional relaxation solver"
)]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write data to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Cap on worker threads for ladder runs.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Raw stencil weights w_0..w_n.
    Weights {
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        n: usize,
    },
    /// Leading error coefficients (magnitudes) over an alpha grid.
    Coeffs {
        /// LO:HI:STEP
        #[arg(long)]
        alpha_grid: String,
    },
    /// Approximate D^alpha f(x) once, or as a ladder with --levels.
    Caputo(CaputoArgs),
    /// Solve a catalog relaxation equation on [0, 1].
    Solve {
        #[arg(long)]
        equation: String,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        h: f64,
        /// l1 or taylor; defaults by scheme.
        #[arg(long)]
        start: Option<String>,
    },
    /// Error and order ladder of the solver.
    Table {
        #[arg(long)]
        equation: String,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        h0: f64,
        #[arg(long)]
        levels: usize,
        #[arg(long)]
        start: Option<String>,
    },
    /// Recompute a bundled reference table and compare.
    Golden {
        #[arg(long)]
        table: u32,
    },
    /// Weight property report.
    Check {
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Debug, Args)]
pub struct CaputoArgs {
    #[arg(long, conflicts_with = "fourth_order", required_unless_present = "fourth_order")]
    pub scheme: Option<String>,
    /// Use the fourth-order right-sum formula.
    #[arg(long)]
    pub fourth_order: bool,
    #[arg(long)]
    pub function: String,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub x: f64,
    #[arg(long)]
    pub h: f64,
    #[arg(long)]
    pub levels: Option<usize>,
}

/// Parses `argv` (including the program name) and runs it, writing data to
/// `out` unless `--output` is given.
pub fn run_with(
    argv: impl IntoIterator<Item = impl Into<OsString> + Clone>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let cfg = match CliConfig::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    if cfg.threads == Some(0) {
        let _ = writeln!(err, "error: --threads must be at least 1");
        return EXIT_USAGE;
    }
    let mut notes = String::new();
    let result = match cfg.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| execute(&cfg, &mut notes)),
            Err(e) => Err(Error::Invalid(e.to_string())),
        },
        None => execute(&cfg, &mut notes),
    };
    let _ = err.write_all(notes.as_bytes());
    match result {
        Ok((text, code)) => {
            let written = match &cfg.output {
                Some(path) => std::fs::write(path, text.as_bytes()).map_err(|e| e.to_string()),
                None => out.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                let _ = writeln!(err, "error: cannot write output: {e}");
                return EXIT_USAGE;
            }
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Entry point for the binary.
pub fn run(argv: impl IntoIterator<Item = impl Into<OsString> + Clone>) -> i32 {
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

/// Usage errors are bad names or argument values; everything else arises
/// inside a computation.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::UnknownName { .. }
        | Error::Domain { .. }
        | Error::InvalidGrid { .. }
        | Error::Invalid(_)
        | Error::MissingMetadata => EXIT_USAGE,
        Error::GammaPole(_)
        | Error::ZetaPole
        | Error::NonConvergence { .. }
        | Error::LengthMismatch { .. }
        | Error::SingularDenominator(_)
        | Error::QuadratureFailure { .. }
        | Error::LadderMismatch(_) => EXIT_NUMERICAL,
    }
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| Error::Invalid(e.to_string()))
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:?}"))
}

fn start_mode(start: &Option<String>, scheme: SchemeId) -> Result<StartMode> {
    match start {
        Some(s) => s.parse(),
        None => Ok(StartMode::default_for(scheme)),
    }
}

#[derive(Serialize)]
struct Rows<'a> {
    rows: &'a [ConvergenceRow],
}

fn ladder_output(rows: &[ConvergenceRow], format: Format) -> Result<String> {
    match format {
        Format::Json => json(&Rows { rows }),
        Format::Csv => {
            let mut s = String::from("h,error,order\n");
            for r in rows {
                let _ = writeln!(s, "{:?},{},{}", r.h, opt(r.error), opt(r.order));
            }
            Ok(s)
        }
    }
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::Invalid(format!("alpha grid '{spec}' is not LO:HI:STEP"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let [lo, hi, step] = parts[..] else {
        return Err(bad());
    };
    if !(step > 0.0 && lo <= hi) {
        return Err(bad());
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    // snap to 12 decimals so 0.1 + 2·0.1 prints as 0.3
    Ok((0..=count)
        .map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

fn execute(cfg: &CliConfig, err: &mut String) -> Result<(String, i32)> {
    let fmt = cfg.format;
    match &cfg.command {
        Command::Weights { scheme, alpha, n } => {
            let wv = build_weights(scheme.parse()?, *alpha, *n)?;
            let text = match fmt {
                Format::Json => json(&wv)?,
                Format::Csv => {
                    let mut s = String::from("k,weight\n");
                    for (k, w) in wv.weights().iter().enumerate() {
                        let _ = writeln!(s, "{k},{w:?}");
                    }
                    s
                }
            };
            Ok((text, EXIT_OK))
        }
        Command::Coeffs { alpha_grid } => {
            #[derive(Serialize)]
            struct Row {
                alpha: f64,
                c1: f64,
                c9: f64,
                c12: f64,
            }
            let rows = parse_grid(alpha_grid)?
                .into_iter()
                .map(|a| {
                    let (c1, c9, c12) = expansion_coefficients(a)?.magnitudes();
                    Ok(Row { alpha: a, c1, c9, c12 })
                })
                .collect::<Result<Vec<_>>>()?;
            let text = match fmt {
                Format::Json => json(&rows)?,
                Format::Csv => {
                    let mut s = String::from("alpha,c1,c9,c12\n");
                    for r in &rows {
                        let _ = writeln!(s, "{:?},{:?},{:?},{:?}", r.alpha, r.c1, r.c9, r.c12);
                    }
                    s
                }
            };
            Ok((text, EXIT_OK))
        }
        Command::Caputo(args) => caputo_command(args, fmt),
        Command::Solve {
            equation: eq,
            alpha,
            scheme,
            h,
            start,
        } => {
            let problem = equation(eq, *alpha)?;
            let scheme: SchemeId = scheme.parse()?;
            let start = start_mode(start, scheme)?;
            let n = problem.steps_for(*h)?;
            let verdict = stability_check(&problem, scheme, n)?;
            let _ = writeln!(err, "stability: {verdict:?}");
            let r = solve_with_step(&problem, scheme, *h, start)?;
            if r.diverged {
                let _ = writeln!(err, "warning: solution diverged (max |u| = {:e})", r.max_abs_u);
            }
            let text = match fmt {
                Format::Json => json(&r)?,
                Format::Csv => {
                    let mut s = String::from("m,x,u,exact,error\n");
                    for (m, u) in r.u.iter().enumerate() {
                        let exact = r.exact.as_ref().map(|e| e[m]);
                        let _ = writeln!(
                            s,
                            "{m},{:?},{u:?},{},{}",
                            r.x(m),
                            opt(exact),
                            opt(exact.map(|e| (u - e).abs()))
                        );
                    }
                    s
                }
            };
            Ok((text, EXIT_OK))
        }
        Command::Table {
            equation: eq,
            alpha,
            scheme,
            h0,
            levels,
            start,
        } => {
            let problem = equation(eq, *alpha)?;
            let scheme: SchemeId = scheme.parse()?;
            let rows = convergence_ladder(&problem, scheme, start_mode(start, scheme)?, *h0, *levels)?;
            for r in &rows {
                if let Some(f) = &r.failure {
                    let _ = writeln!(err, "warning: h = {:?} failed: {f}", r.h);
                }
            }
            Ok((ladder_output(&rows, fmt)?, EXIT_OK))
        }
        Command::Golden { table } => {
            let report = run_golden(*table)?;
            let failures = report.failures().count();
            let checked = report
                .cells
                .iter()
                .filter(|c| c.status != CellStatus::Informational)
                .count();
            let _ = writeln!(
                err,
                "table {table}: {} of {checked} checked cells pass",
                checked - failures
            );
            let text = match fmt {
                Format::Json => json(&report)?,
                Format::Csv => {
                    let mut s = String::from("column,row,h,quantity,expected,computed,deviation,tolerance,status\n");
                    for c in &report.cells {
                        let _ = writeln!(
                            s,
                            "{},{},{:?},{:?},{:?},{},{:?},{:?},{:?}",
                            c.column,
                            c.row,
                            c.h,
                            c.quantity,
                            c.expected,
                            opt(c.computed),
                            c.deviation,
                            c.tolerance,
                            c.status
                        );
                    }
                    s
                }
            };
            Ok((text, if report.passed() { EXIT_OK } else { EXIT_GOLDEN }))
        }
        Command::Check { scheme, alpha, n } => {
            let report = validate_weights(&build_weights(scheme.parse()?, *alpha, *n)?);
            let text = match fmt {
                Format::Json => json(&report)?,
                Format::Csv => {
                    let mut s = String::from("check,status,detail\n");
                    for c in &report.checks {
                        let _ = writeln!(s, "{},{:?},\"{}\"", c.name, c.status, c.detail.replace('"', "'"));
                    }
                    s
                }
            };
            let failed = report.checks.iter().filter(|c| c.status == CheckStatus::Fail).count();
            if failed > 0 {
                let _ = writeln!(err, "{failed} property check(s) failed");
            }
            Ok((text, EXIT_OK))
        }
    }
}

fn caputo_command(args: &CaputoArgs, fmt: Format) -> Result<(String, i32)> {
    let f = test_function(&args.function).map_err(|e| match e {
        Error::UnknownName { kind, name, .. } => Error::UnknownName {
            kind,
            name,
            options: format!("{}, pow:<p>", TEST_FUNCTION_NAMES.join(", ")),
        },
        other => other,
    })?;
    let method = match &args.scheme {
        Some(s) => Approximation::Stencil(s.parse()?),
        None => Approximation::FourthOrder,
    };
    if let Some(levels) = args.levels {
        let rows = approximation_ladder(&f, args.alpha, args.x, args.h, levels, method)?;
        return Ok((ladder_output(&rows, fmt)?, EXIT_OK));
    }
    let n = crate::relaxation::steps_for(args.h, args.x)?;
    let value = match method {
        Approximation::FourthOrder => fourth_order_eval(&f, args.alpha, args.x, n)?,
        Approximation::Stencil(s) => apply_stencil(&build_weights(s, args.alpha, n)?, &f.sample(args.x, n)?)?,
    };
    let reference = f.reference_caputo(args.alpha, args.x, QUADRATURE_MIN_TOL)?;

    #[derive(Serialize)]
    struct Point {
        x: f64,
        h: f64,
        value: f64,
        reference: f64,
        error: f64,
    }
    let p = Point {
        x: args.x,
        h: args.h,
        value,
        reference,
        error: (value - reference).abs(),
    };
    let text = match fmt {
        Format::Json => json(&p)?,
        Format::Csv => format!(
            "x,h,value,reference,error\n{:?},{:?},{:?},{:?},{:?}\n",
            p.x, p.h, p.value, p.reference, p.error
        ),
    };
    Ok((text, EXIT_OK))
}

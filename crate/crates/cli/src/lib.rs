//! Command-line front end: verdicts, traces and the discretized cross-check
//! for problem files and the built-in hanging-chain problems.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use jacobi_core::accessory::{self, AccessoryTrajectory};
use jacobi_core::catenary::{Branch, CatenaryProblem, Variant};
use jacobi_core::conjugate::{self, Classification, Verdict, VerdictOptions};
use jacobi_core::oracle::{self, Agreement};
use jacobi_core::problem::{CoefficientField, Oriented};
use serde_json::json;

pub mod problem_file;

/// Exit status for usage, parse and IO errors.
pub const EXIT_ERROR: i32 = 1;
/// Exit status when the oracle contradicts the verdict.
pub const EXIT_DISAGREE: i32 = 4;

pub const BUILTINS: [(&str, &str); 2] = [
    (
        "catenary-fixed-height",
        "hanging chain with free apex at a and prescribed height y_b at b (flags: --a --b --yb --branch, or --omega)",
    ),
    (
        "catenary-fixed-length",
        "hanging chain of prescribed length ell with free apex at a (flags: --a --b --ell --yb, or --omega)",
    ),
];

#[derive(Parser, Debug)]
#[command(
    name = "jacobi",
    version,
    about = "Second-variation and conjugate-point tests for variational problems"
)]
pub struct Cli {
    /// Print a single JSON object instead of the report.
    #[arg(long, global = true)]
    pub json: bool,

    /// Number of grid intervals.
    #[arg(long, global = true, default_value_t = 1000)]
    pub grid: usize,

    /// Multiplies every precondition tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub tol_scale: f64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Classify the second variation along the extremal.
    #[command(allow_negative_numbers = true)]
    Check {
        /// Problem file or builtin name.
        target: String,
        #[command(flatten)]
        builtin: BuiltinArgs,
        #[command(flatten)]
        accessory: AccessoryArgs,
        /// Repeat the check over `omega=lo:hi:n` (builtins only).
        #[arg(long)]
        sweep: Option<Sweep>,
    },
    /// Write the coefficients and accessory solutions as CSV.
    #[command(allow_negative_numbers = true)]
    Trace {
        target: String,
        /// Output file; `-` for standard output.
        out: PathBuf,
        #[command(flatten)]
        builtin: BuiltinArgs,
        #[command(flatten)]
        accessory: AccessoryArgs,
    },
    /// Compare the verdict with a finite-element eigenvalue check.
    #[command(allow_negative_numbers = true)]
    Oracle {
        target: String,
        /// Number of elements (at least 8).
        #[arg(long, short = 'n', default_value_t = 256)]
        n: usize,
        #[command(flatten)]
        builtin: BuiltinArgs,
        #[command(flatten)]
        accessory: AccessoryArgs,
    },
    /// List the built-in problems.
    Examples,
}

#[derive(Args, Debug, Clone, Default)]
pub struct BuiltinArgs {
    /// Left end (default 0).
    #[arg(long)]
    pub a: Option<f64>,
    /// Right end (default 1).
    #[arg(long)]
    pub b: Option<f64>,
    /// Height at b (default 2 for fixed height, 0 for fixed length).
    #[arg(long)]
    pub yb: Option<f64>,
    /// Chain length (default 2).
    #[arg(long)]
    pub ell: Option<f64>,
    /// Which of the two fixed-height extremals (default high).
    #[arg(long, value_enum)]
    pub branch: Option<BranchArg>,
    /// Use this catenary parameter instead of solving for it.
    #[arg(long)]
    pub omega: Option<f64>,
}

impl BuiltinArgs {
    fn is_empty(&self) -> bool {
        self.a.is_none()
            && self.b.is_none()
            && self.yb.is_none()
            && self.ell.is_none()
            && self.branch.is_none()
            && self.omega.is_none()
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct AccessoryArgs {
    /// Override u(a) for mixed problems.
    #[arg(long)]
    pub u0: Option<f64>,
    /// Override v(a) for mixed problems.
    #[arg(long)]
    pub v0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    High,
    Low,
}

/// `omega=lo:hi:n`, `n ≥ 2` equally spaced values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Sweep {
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.lo + (self.hi - self.lo) * i as f64 / (self.n - 1) as f64)
    }
}

impl FromStr for Sweep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let usage = || format!("expected omega=lo:hi:n, got `{s}`");
        let range = s.strip_prefix("omega=").ok_or_else(usage)?;
        let parts: Vec<&str> = range.split(':').collect();
        let [lo, hi, n] = parts.as_slice() else {
            return Err(usage());
        };
        let lo: f64 = lo.parse().map_err(|_| usage())?;
        let hi: f64 = hi.parse().map_err(|_| usage())?;
        let n: usize = n.parse().map_err(|_| usage())?;
        if !(lo > 0.0 && hi > lo && n >= 2) {
            return Err(format!("sweep needs 0 < lo < hi and n >= 2, got `{s}`"));
        }
        Ok(Self { lo, hi, n })
    }
}

/// A problem ready for analysis.
pub struct Target {
    pub field: Box<dyn CoefficientField>,
    pub description: String,
    pub u0: Option<f64>,
    pub v0: Option<f64>,
}

fn describe_catenary(name: &str, c: &CatenaryProblem) -> String {
    match c.variant {
        Variant::FixedHeight { y_b } => format!(
            "{name}: a = {}, b = {}, y_b = {y_b}, omega = {:.12}",
            c.a, c.b, c.omega
        ),
        Variant::FixedLength { ell, y_b } => format!(
            "{name}: a = {}, b = {}, ell = {ell}, y_b = {y_b}, omega = {:.12}, lambda = {:.12}",
            c.a, c.b, c.omega, c.lambda
        ),
    }
}

fn builtin(name: &str, args: &BuiltinArgs) -> Result<CatenaryProblem> {
    let a = args.a.unwrap_or(0.0);
    let b = args.b.unwrap_or(1.0);
    let problem = match name {
        "catenary-fixed-height" => {
            if args.ell.is_some() {
                bail!("--ell applies to catenary-fixed-length");
            }
            match args.omega {
                Some(w) => {
                    if args.yb.is_some() || args.branch.is_some() {
                        bail!("--omega replaces --yb and --branch");
                    }
                    CatenaryProblem::fixed_height_from_omega(a, b, w)?
                }
                None => {
                    let branch = match args.branch.unwrap_or(BranchArg::High) {
                        BranchArg::High => Branch::High,
                        BranchArg::Low => Branch::Low,
                    };
                    CatenaryProblem::fixed_height(a, b, args.yb.unwrap_or(2.0), branch)?
                }
            }
        }
        "catenary-fixed-length" => {
            if args.branch.is_some() {
                bail!("--branch applies to catenary-fixed-height");
            }
            let y_b = args.yb.unwrap_or(0.0);
            match args.omega {
                Some(w) => {
                    if args.ell.is_some() {
                        bail!("--omega replaces --ell");
                    }
                    CatenaryProblem::fixed_length_from_omega(a, b, w, y_b)?
                }
                None => CatenaryProblem::fixed_length(a, b, args.ell.unwrap_or(2.0), y_b)?,
            }
        }
        _ => unreachable!("checked by caller"),
    };
    Ok(problem)
}

fn is_builtin(name: &str) -> bool {
    BUILTINS.iter().any(|(n, _)| *n == name)
}

/// Resolves a builtin name or a problem-file path.
pub fn resolve(target: &str, args: &BuiltinArgs, acc: &AccessoryArgs) -> Result<Target> {
    if is_builtin(target) {
        let c = builtin(target, args)?;
        return Ok(Target {
            description: describe_catenary(target, &c),
            field: Box::new(c),
            u0: acc.u0,
            v0: acc.v0,
        });
    }
    if !args.is_empty() {
        bail!("builtin flags (--a, --b, --yb, --ell, --branch, --omega) only apply to builtin problems");
    }
    let path = Path::new(target);
    if !path.exists() {
        let names: Vec<&str> = BUILTINS.iter().map(|(n, _)| *n).collect();
        bail!(
            "`{target}` is neither a file nor a builtin ({})",
            names.join(", ")
        );
    }
    let file = problem_file::load(path)?;
    Ok(Target {
        description: target.to_string(),
        field: Box::new(file.problem),
        u0: acc.u0.or(file.u0),
        v0: acc.v0.or(file.v0),
    })
}

/// Exit status for a classification.
pub fn exit_code(c: Classification) -> i32 {
    match c {
        Classification::PositiveDefinite => 0,
        Classification::Indefinite | Classification::DegenerateAtB => 2,
        Classification::PreconditionFailed => 3,
    }
}

fn options(cli: &Cli, target: &Target) -> Result<VerdictOptions> {
    if cli.grid < 16 {
        bail!("--grid must be at least 16");
    }
    if !(cli.tol_scale > 0.0 && cli.tol_scale.is_finite()) {
        bail!("--tol-scale must be positive");
    }
    Ok(VerdictOptions {
        grid: cli.grid,
        tol_scale: cli.tol_scale,
        u0: target.u0,
        v0: target.v0,
    })
}

fn summary(v: &Verdict) -> serde_json::Value {
    let p = &v.preconditions;
    let conj = v.conjugate.as_ref();
    json!({
        "classification": v.classification.name(),
        "conjugate_x": conj.and_then(|c| c.location),
        "min_P": p.min_p,
        "R_at_a": p.r_at_a,
        "Gyp_at_a": p.gyp_at_a,
        "min_abs_T": p.min_abs_t,
        "delta_triple_deriv": conj.and_then(|c| c.triple_derivative_at_a).map(|t| t.value),
    })
}

fn flag(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAILS"
    }
}

fn report(
    out: &mut dyn Write,
    description: &str,
    field: &dyn CoefficientField,
    v: &Verdict,
) -> Result<()> {
    let p = &v.preconditions;
    writeln!(out, "problem: {description}")?;
    writeln!(
        out,
        "regime: {}{}",
        field.regime().name(),
        if field.is_isoperimetric() {
            ", isoperimetric"
        } else {
            ""
        }
    )?;
    writeln!(out, "classification: {}", v.classification)?;
    writeln!(
        out,
        "  min P        = {:.10e}  ({})",
        p.min_p,
        flag(p.legendre_ok)
    )?;
    if p.r_enforced {
        writeln!(
            out,
            "  R at free end = {:.10e}  ({})",
            p.r_at_a,
            flag(p.r_ok)
        )?;
    } else {
        writeln!(out, "  R(a)         = {:.10e}", p.r_at_a)?;
    }
    if let Some(g) = p.gyp_at_a {
        writeln!(out, "  dG/dy' at free end = {g:.10e}  ({})", flag(p.gyp_ok))?;
    }
    if let Some(t) = p.min_abs_t {
        writeln!(out, "  min |T|      = {t:.10e}  ({})", flag(p.t_nonzero_ok))?;
    }
    if let Some(c) = &v.conjugate {
        if let Some(t) = c.triple_derivative_at_a {
            writeln!(
                out,
                "  Delta'''(a)  = {:.10e}{}",
                t.value,
                if t.degenerate { "  (degenerate)" } else { "" }
            )?;
            writeln!(out, "  window near a = {:.3e}", c.near_a_window)?;
        }
        match c.location {
            Some(x) => writeln!(
                out,
                "conjugate point: x = {x:.12} (first zero of {})",
                c.test_function.name()
            )?,
            None => writeln!(
                out,
                "conjugate point: none in (a, b] (tested {})",
                c.test_function.name()
            )?,
        }
    }
    if !v.notes.is_empty() {
        writeln!(out, "notes:")?;
        for n in &v.notes {
            writeln!(out, "  - {n}")?;
        }
    }
    Ok(())
}

fn cmd_check(
    cli: &Cli,
    target: &str,
    builtin_args: &BuiltinArgs,
    acc: &AccessoryArgs,
    sweep: Option<Sweep>,
) -> Result<i32> {
    let out = &mut std::io::stdout().lock();
    let Some(sweep) = sweep else {
        let t = resolve(target, builtin_args, acc)?;
        let v = conjugate::verdict(t.field.as_ref(), &options(cli, &t)?)?;
        if cli.json {
            writeln!(out, "{}", summary(&v))?;
        } else {
            report(out, &t.description, t.field.as_ref(), &v)?;
        }
        return Ok(exit_code(v.classification));
    };
    if !is_builtin(target) {
        bail!("--sweep only applies to builtin problems");
    }
    if builtin_args.omega.is_some() {
        bail!("--sweep replaces --omega");
    }
    let mut worst = 0;
    for w in sweep.values() {
        let args = BuiltinArgs {
            omega: Some(w),
            ..builtin_args.clone()
        };
        let t = resolve(target, &args, acc)?;
        let v = conjugate::verdict(t.field.as_ref(), &options(cli, &t)?)?;
        if cli.json {
            let mut s = summary(&v);
            s["omega"] = json!(w);
            writeln!(out, "{s}")?;
        } else {
            let x = v
                .conjugate
                .as_ref()
                .and_then(|c| c.location)
                .map_or("-".to_string(), |x| format!("{x:.10}"));
            writeln!(
                out,
                "omega = {w:<14.8} {:<18} conjugate_x = {x}",
                v.classification.name()
            )?;
        }
        worst = worst.max(exit_code(v.classification));
    }
    Ok(worst)
}

/// Samples in the original orientation with derivatives and `R`, `∂G/∂y′`
/// mapped back.
fn trace_rows(oriented: &Oriented, traj: &AccessoryTrajectory) -> Vec<[f64; 13]> {
    let sign = if oriented.is_reflected() { -1.0 } else { 1.0 };
    traj.samples()
        .iter()
        .map(|s| {
            let c = &s.coeffs;
            [
                oriented.to_original(s.x),
                c.p,
                c.q,
                sign * c.r,
                c.t,
                sign * c.gyp,
                s.u,
                sign * s.uprime(),
                s.v,
                sign * s.vprime(),
                s.m,
                s.n,
                s.m * s.v - s.n * s.u,
            ]
        })
        .collect()
}

pub const TRACE_HEADER: &str = "x,P,Q,R,T,Gyp,u,uprime,v,vprime,m,n,delta";

/// Writes the trace; constraint-only columns stay empty without a constraint.
pub fn write_trace(
    out: &mut dyn Write,
    rows: &[[f64; 13]],
    isoperimetric: bool,
) -> std::io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    let iso_only = [4, 5, 8, 9, 10, 11, 12];
    for row in rows {
        let fields: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(i, v)| {
                if !isoperimetric && iso_only.contains(&i) {
                    String::new()
                } else {
                    format!("{v:.16e}")
                }
            })
            .collect();
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

fn cmd_trace(
    cli: &Cli,
    target: &str,
    out_path: &Path,
    builtin_args: &BuiltinArgs,
    acc: &AccessoryArgs,
) -> Result<i32> {
    let t = resolve(target, builtin_args, acc)?;
    let opts = options(cli, &t)?;
    let oriented = Oriented::new(t.field.as_ref());
    let ics = conjugate::initial_conditions(&oriented, &opts)?;
    let traj = accessory::integrate(&oriented, ics, opts.grid)?;
    let rows = trace_rows(&oriented, &traj);
    let iso = oriented.is_isoperimetric();
    if out_path == Path::new("-") {
        write_trace(&mut std::io::stdout().lock(), &rows, iso)?;
    } else {
        let file = std::fs::File::create(out_path)
            .with_context(|| format!("cannot create {}", out_path.display()))?;
        let mut w = std::io::BufWriter::new(file);
        write_trace(&mut w, &rows, iso)
            .with_context(|| format!("cannot write {}", out_path.display()))?;
        w.flush()?;
        if cli.json {
            println!(
                "{}",
                json!({ "rows": rows.len(), "path": out_path.display().to_string() })
            );
        } else {
            eprintln!("wrote {} rows to {}", rows.len(), out_path.display());
        }
    }
    Ok(0)
}

fn cmd_oracle(
    cli: &Cli,
    target: &str,
    n: usize,
    builtin_args: &BuiltinArgs,
    acc: &AccessoryArgs,
) -> Result<i32> {
    if n < 8 {
        bail!("-n must be at least 8 elements, got {n}");
    }
    let t = resolve(target, builtin_args, acc)?;
    let field = t.field.as_ref();
    let v = conjugate::verdict(field, &options(cli, &t)?)?;
    let form = oracle::assemble(field, n)?;
    let constrained = field.is_isoperimetric();
    let q = oracle::min_quotient(&form, constrained)?;
    let agreement = oracle::agreement(v.classification, q, n);
    let tol = oracle::agreement_tolerance(n);
    let sign = if q > tol {
        "positive"
    } else if q < -tol {
        "negative"
    } else {
        "near zero"
    };
    if cli.json {
        println!(
            "{}",
            json!({
                "min_quotient": q,
                "sign": sign,
                "n_elements": n,
                "tolerance": tol,
                "constrained": constrained,
                "classification": v.classification.name(),
                "agreement": agreement.name(),
            })
        );
    } else {
        println!("problem: {}", t.description);
        println!(
            "min Rayleigh quotient ({n} elements{}): {q:.10e} ({sign})",
            if constrained { ", constrained" } else { "" }
        );
        println!("verdict: {}", v.classification);
        println!("agreement: {}", agreement.name());
    }
    Ok(match agreement {
        Agreement::Disagree => EXIT_DISAGREE,
        _ => 0,
    })
}

fn cmd_examples(cli: &Cli) -> Result<i32> {
    if cli.json {
        let list: Vec<_> = BUILTINS
            .iter()
            .map(|(n, d)| json!({ "name": n, "description": d }))
            .collect();
        println!("{}", serde_json::Value::Array(list));
    } else {
        for (name, desc) in BUILTINS {
            println!("{name:<24} {desc}");
        }
    }
    Ok(0)
}

/// Runs a parsed command and returns the exit status.
pub fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Check {
            target,
            builtin,
            accessory,
            sweep,
        } => cmd_check(cli, target, builtin, accessory, *sweep),
        Command::Trace {
            target,
            out,
            builtin,
            accessory,
        } => cmd_trace(cli, target, out, builtin, accessory),
        Command::Oracle {
            target,
            n,
            builtin,
            accessory,
        } => cmd_oracle(cli, target, *n, builtin, accessory),
        Command::Examples => cmd_examples(cli),
    }
}

/// Parses arguments, runs, and maps errors to [`EXIT_ERROR`].
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { 0 };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

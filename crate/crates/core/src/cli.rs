//! `closedode solve` and `closedode verify`.
//!
//! Exit codes: 0 on success (and, for `verify`, when every check passes),
//! 1 when a verification check fails, 2 on any input error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::invariants::{check_constancy, default_grid};
use crate::oracle::{compare, rk4_integrate, scaled_residual, DEFAULT_SPAN, DEFAULT_STEP};
use crate::parser::{parse_coefficients, Coefficients};
use crate::solver::{characteristic_roots, fmt_num, general_solution, ClosedForm, DampingClass, DEFAULT_TOL};

/// Largest allowed `residual / (1 + |y| + |y'| + |y''|)` on the check grid.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Largest allowed relative drift of either first integral.
pub const INTEGRAL_TOL: f64 = 1e-9;
/// Largest allowed closed-form vs RK4 error over [0, 5].
pub const RK4_TOL: f64 = 1e-8;

const MAX_EVAL_POINTS: usize = 1_000_000;

#[derive(Debug, Parser)]
#[command(name = "closedode", version, about = "Closed-form solutions of y'' + a·y' + b·y = 0")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify, solve and optionally fit and tabulate.
    Solve(CommonArgs),
    /// Solve, then check residual, first integrals and an RK4 run.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// RK4 step size.
        #[arg(long = "h", default_value_t = DEFAULT_STEP, allow_negative_numbers = true)]
        h: f64,
        /// Write the RK4 trajectory as CSV (`x,y,v`).
        #[arg(long, value_name = "PATH")]
        trajectory: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Equation text, e.g. "y'' + 3y' + 2y = 0".
    equation: Option<String>,
    /// Coefficient of y' (use together with -b instead of an equation).
    #[arg(short = 'a', allow_negative_numbers = true)]
    a: Option<f64>,
    /// Coefficient of y.
    #[arg(short = 'b', allow_negative_numbers = true)]
    b: Option<f64>,
    /// y(0).
    #[arg(long, allow_negative_numbers = true)]
    y0: Option<f64>,
    /// y'(0).
    #[arg(long, allow_negative_numbers = true)]
    v0: Option<f64>,
    /// Relative width of the band snapped to the critical class.
    #[arg(long, default_value_t = DEFAULT_TOL, allow_negative_numbers = true)]
    tol: f64,
    /// Evaluation grid `start:stop:step` (needs --y0 and --v0).
    #[arg(long = "eval", value_name = "START:STOP:STEP", allow_hyphen_values = true)]
    eval: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the evaluation table as CSV (`x,y`).
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Where the equation comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum EquationSource {
    Text(String),
    Pair { a: f64, b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl EvalSpec {
    /// Parses `start:stop:step` with `step > 0` and `stop ≥ start`.
    pub fn parse(spec: &str) -> Result<EvalSpec, String> {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, stop, step] = parts.as_slice() else {
            return Err(format!("--eval expects start:stop:step, got `{spec}`"));
        };
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("--eval: `{s}` is not a finite number"))
        };
        let e = EvalSpec { start: num(start)?, stop: num(stop)?, step: num(step)? };
        if e.step.is_nan() || e.step <= 0.0 {
            return Err("--eval: step must be positive".into());
        }
        if e.stop < e.start {
            return Err("--eval: stop must not be below start".into());
        }
        Ok(e)
    }

    /// `start, start + step, …`, ending exactly on `stop` when `stop` is
    /// within rounding of a grid point.
    pub fn points(&self) -> Result<Vec<f64>, String> {
        let ratio = (self.stop - self.start) / self.step;
        let nearest = ratio.round();
        let snapped = (ratio - nearest).abs() <= 1e-9 * ratio.max(1.0);
        let n = if snapped { nearest } else { ratio.floor() };
        if n >= MAX_EVAL_POINTS as f64 {
            return Err(format!("--eval would produce more than {MAX_EVAL_POINTS} points"));
        }
        let n = n as usize;
        Ok((0..=n).map(|i| if snapped && i == n { self.stop } else { self.start + i as f64 * self.step }).collect())
    }
}

/// A validated `solve`/`verify` invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveRequest {
    pub equation: EquationSource,
    pub ic: Option<(f64, f64)>,
    pub eval_spec: Option<EvalSpec>,
    pub tol: f64,
    pub output_format: Format,
}

impl SolveRequest {
    fn from_args(args: &CommonArgs) -> Result<SolveRequest, String> {
        let equation = match (&args.equation, args.a, args.b) {
            (Some(text), None, None) => EquationSource::Text(text.clone()),
            (None, Some(a), Some(b)) => EquationSource::Pair { a, b },
            (Some(_), _, _) => return Err("give either an equation or -a/-b, not both".into()),
            (None, None, None) => return Err("missing equation: give an equation string or -a and -b".into()),
            (None, _, _) => return Err("-a and -b must be given together".into()),
        };
        let ic = match (args.y0, args.v0) {
            (Some(y0), Some(v0)) if y0.is_finite() && v0.is_finite() => Some((y0, v0)),
            (Some(_), Some(_)) => return Err("--y0 and --v0 must be finite".into()),
            (None, None) => None,
            _ => return Err("--y0 and --v0 must be given together".into()),
        };
        let eval_spec = args.eval.as_deref().map(EvalSpec::parse).transpose()?;
        if eval_spec.is_some() && ic.is_none() {
            return Err("--eval needs initial conditions --y0 and --v0".into());
        }
        if !(args.tol >= 0.0 && args.tol.is_finite()) {
            return Err("--tol must be a finite non-negative number".into());
        }
        Ok(SolveRequest { equation, ic, eval_spec, tol: args.tol, output_format: args.format })
    }

    pub fn coefficients(&self) -> Result<Coefficients, String> {
        match &self.equation {
            EquationSource::Text(text) => parse_coefficients(text).map_err(|e| e.to_string()),
            EquationSource::Pair { a, b } => Coefficients::new(*a, *b).map_err(|e| e.to_string()),
        }
    }
}

#[derive(Debug, Serialize)]
struct InputOut {
    a: f64,
    b: f64,
}

#[derive(Debug, Serialize)]
struct SolutionOut {
    c1: Option<f64>,
    c2: Option<f64>,
    rendered: String,
    general: String,
}

#[derive(Debug, Serialize)]
struct ExponentialOut {
    d1: f64,
    d2: f64,
    r1: f64,
    r2: f64,
    rendered: String,
}

#[derive(Debug, Serialize)]
struct EvalRow {
    x: f64,
    y: f64,
}

#[derive(Debug, Serialize)]
struct SolveOut {
    input: InputOut,
    class: DampingClass,
    alpha: f64,
    beta: f64,
    solution: SolutionOut,
    roots: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exponential_form: Option<ExponentialOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eval: Option<Vec<EvalRow>>,
}

#[derive(Debug, Serialize)]
#[allow(non_snake_case)]
struct IntegralDev {
    I1: f64,
    I2: f64,
}

#[derive(Debug, Serialize)]
struct Thresholds {
    residual: f64,
    integral: f64,
    rk4: f64,
}

#[derive(Debug, Serialize)]
struct VerifyOut {
    #[serde(flatten)]
    solve: SolveOut,
    residual_max: f64,
    integral_dev: IntegralDev,
    rk4_max_err: f64,
    rk4_relative: bool,
    thresholds: Thresholds,
    pass: bool,
}

/// Runs one invocation; `args` includes the program name.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{}", e.render());
                return 0;
            }
            let rendered = e.render().to_string();
            let line = rendered.lines().next().unwrap_or("invalid arguments");
            let _ = writeln!(err, "{line}");
            return 2;
        }
    };
    match execute(cli, out) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<bool, String> {
    match cli.command {
        Command::Solve(args) => {
            let req = SolveRequest::from_args(&args)?;
            let (solve, _) = build_solve(&req, args.csv.as_ref())?;
            emit(out, req.output_format, &solve, |o| write_solve_text(o, &solve))?;
            Ok(true)
        }
        Command::Verify { common, h, trajectory } => {
            let req = SolveRequest::from_args(&common)?;
            if req.ic.is_none() {
                return Err("verify needs initial conditions --y0 and --v0".into());
            }
            if !(h > 0.0 && h.is_finite()) {
                return Err("--h must be a positive finite step".into());
            }
            let (solve, form) = build_solve(&req, common.csv.as_ref())?;
            let verify = build_verify(solve, &form, req.ic.unwrap_or_default(), h, trajectory.as_ref())?;
            emit(out, req.output_format, &verify, |o| write_verify_text(o, &verify))?;
            Ok(verify.pass)
        }
    }
}

fn emit<T: Serialize>(
    out: &mut dyn Write,
    format: Format,
    value: &T,
    text: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<(), String> {
    let res = match format {
        Format::Json => {
            serde_json::to_string_pretty(value).map_err(std::io::Error::other).and_then(|s| writeln!(out, "{s}"))
        }
        Format::Text => text(out),
    };
    res.map_err(|e| format!("writing output: {e}"))
}

fn build_solve(req: &SolveRequest, csv_path: Option<&PathBuf>) -> Result<(SolveOut, ClosedForm), String> {
    let coeffs = req.coefficients()?;
    let general = general_solution(coeffs, req.tol);
    let form = match req.ic {
        Some((y0, v0)) => general.fit_initial_conditions(y0, v0),
        None => general,
    };
    let (c1, c2) = form.bound_constants().unzip();

    let exponential_form = match (req.ic, form.class()) {
        (Some(_), DampingClass::Overdamped) => {
            let e = form.to_exponential_form().map_err(|e| e.to_string())?;
            Some(ExponentialOut { d1: e.d1, d2: e.d2, r1: e.r1, r2: e.r2, rendered: e.render() })
        }
        _ => None,
    };

    let eval = match req.eval_spec {
        Some(spec) => {
            let rows = spec
                .points()?
                .into_iter()
                .map(|x| form.evaluate(x).map(|y| EvalRow { x, y }).map_err(|e| e.to_string()))
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(path) = csv_path {
                write_eval_csv(path, &rows)?;
            }
            Some(rows)
        }
        None => {
            if csv_path.is_some() {
                return Err("--csv needs an --eval grid".into());
            }
            None
        }
    };

    let shape = form.shape();
    let solve = SolveOut {
        input: InputOut { a: coeffs.a, b: coeffs.b },
        class: shape.class,
        alpha: shape.alpha,
        beta: shape.beta,
        solution: SolutionOut { c1, c2, rendered: form.render(), general: general.render() },
        roots: characteristic_roots(coeffs, req.tol).as_vec(),
        exponential_form,
        eval,
    };
    Ok((solve, form))
}

fn write_eval_csv(path: &PathBuf, rows: &[EvalRow]) -> Result<(), String> {
    let fail = |e: csv::Error| format!("writing {}: {e}", path.display());
    let mut w = csv::Writer::from_path(path).map_err(fail)?;
    w.write_record(["x", "y"]).map_err(fail)?;
    for row in rows {
        w.serialize((row.x, row.y)).map_err(fail)?;
    }
    w.flush().map_err(|e| format!("writing {}: {e}", path.display()))
}

fn build_verify(
    solve: SolveOut,
    form: &ClosedForm,
    (y0, v0): (f64, f64),
    h: f64,
    trajectory_path: Option<&PathBuf>,
) -> Result<VerifyOut, String> {
    let coeffs = form.coeffs();
    let grid = default_grid(form.shape());

    let residual_max =
        grid.iter().map(|&x| scaled_residual(coeffs, form, x).unwrap_or(f64::INFINITY)).fold(0.0, f64::max);

    let (integral_dev, integrals_pass) = match check_constancy(form, &grid, INTEGRAL_TOL) {
        Ok(r) => (IntegralDev { I1: r.max_dev_i1, I2: r.max_dev_i2 }, r.pass),
        Err(_) => (IntegralDev { I1: f64::INFINITY, I2: f64::INFINITY }, false),
    };

    let (rk4_max_err, rk4_relative) = match rk4_integrate(coeffs, y0, v0, DEFAULT_SPAN, h) {
        Ok(traj) => {
            if let Some(path) = trajectory_path {
                traj.save_csv(path).map_err(|e| format!("writing {}: {e}", path.display()))?;
            }
            match compare(form, &traj) {
                Ok(r) => (r.max_err(), r.relative),
                Err(_) => (f64::INFINITY, false),
            }
        }
        Err(_) => (f64::INFINITY, false),
    };

    let pass = residual_max <= RESIDUAL_TOL && integrals_pass && rk4_max_err <= RK4_TOL;
    Ok(VerifyOut {
        solve,
        residual_max,
        integral_dev,
        rk4_max_err,
        rk4_relative,
        thresholds: Thresholds { residual: RESIDUAL_TOL, integral: INTEGRAL_TOL, rk4: RK4_TOL },
        pass,
    })
}

/// `%.12g`-style formatting.
pub fn fmt_sig(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mant, exp) = sci.split_once('e').unwrap_or((&sci, "0"));
    let exp: i32 = exp.parse().unwrap_or(0);
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{exp}", trim_zeros(mant))
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "free".to_string(), fmt_num)
}

fn fmt_check(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.is_finite() {
        format!("{v:.3e}")
    } else {
        "overflow".into()
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn write_solve_text(o: &mut dyn Write, s: &SolveOut) -> std::io::Result<()> {
    writeln!(o, "input: a = {}, b = {}", fmt_num(s.input.a), fmt_num(s.input.b))?;
    writeln!(o, "class: {}", s.class)?;
    writeln!(o, "alpha: {}", fmt_num(s.alpha))?;
    writeln!(o, "beta: {}", fmt_num(s.beta))?;
    writeln!(o, "general: {}", s.solution.general)?;
    match s.roots.as_deref() {
        Some([r1, r2]) if s.class == DampingClass::Critical => {
            writeln!(o, "roots: {}, {} (double)", fmt_num(*r1), fmt_num(*r2))?
        }
        Some([r1, r2]) => writeln!(o, "roots: {}, {}", fmt_num(*r1), fmt_num(*r2))?,
        _ => writeln!(o, "roots: none (no real roots)")?,
    }
    writeln!(o, "c1: {}", fmt_opt(s.solution.c1))?;
    writeln!(o, "c2: {}", fmt_opt(s.solution.c2))?;
    writeln!(o, "solution: {}", s.solution.rendered)?;
    if let Some(e) = &s.exponential_form {
        writeln!(o, "exponential_form: {}", e.rendered)?;
    }
    if let Some(rows) = &s.eval {
        writeln!(o, "eval:")?;
        writeln!(o, "{:>20} {:>20}", "x", "y")?;
        for row in rows {
            writeln!(o, "{:>20} {:>20}", fmt_sig(row.x, 12), fmt_sig(row.y, 12))?;
        }
    }
    Ok(())
}

fn write_verify_text(o: &mut dyn Write, v: &VerifyOut) -> std::io::Result<()> {
    write_solve_text(o, &v.solve)?;
    let t = &v.thresholds;
    writeln!(
        o,
        "residual_max: {} (threshold {:e}) {}",
        fmt_check(v.residual_max),
        t.residual,
        verdict(v.residual_max <= t.residual)
    )?;
    let idev = v.integral_dev.I1.max(v.integral_dev.I2);
    writeln!(
        o,
        "integral_dev: I1 {} I2 {} (threshold {:e}) {}",
        fmt_check(v.integral_dev.I1),
        fmt_check(v.integral_dev.I2),
        t.integral,
        verdict(idev <= t.integral)
    )?;
    writeln!(
        o,
        "rk4_max_err: {} (threshold {:e}, {}) {}",
        fmt_check(v.rk4_max_err),
        t.rk4,
        if v.rk4_relative { "relative" } else { "absolute" },
        verdict(v.rk4_max_err <= t.rk4)
    )?;
    writeln!(o, "pass: {}", v.pass)
}

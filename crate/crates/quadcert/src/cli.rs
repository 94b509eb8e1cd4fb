//! Command-line front end and machine-readable run records.
//!
//! Subcommands: `integrate`, `verify-identity`, `bounds`, `hadamard`,
//! `convexity-check`. Every run produces a [`RunRecord`]; `--json` prints it
//! as a single JSON object with every float at 17 significant digits
//! (lossless round-trip), human mode prints 6 significant digits.
//!
//! Exit codes: 0 ok, 1 input error, 2 hypothesis or chain failure under
//! `--strict` (a chain violation on an input that passed the convexity
//! check exits 2 regardless, since it would mean the toolkit itself is
//! wrong).

use std::fmt::Write as _;
use std::io;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::adaptive::{integrate_certified, AdaptiveError};
use crate::bounds::{
    abs_mixed_corners, best_bound, bound_first_power, bound_holder, bound_holder_relaxed,
    bound_power_mean, BoundReport,
};
use crate::cubature::{evaluate_rule, identity_residual_with_estimate};
use crate::domain::{HolderExponents, Rectangle, RuleParams};
use crate::expr::{Expr, FunctionModel};
use crate::quad::{average_integral, integrate_2d, QuadConfig};
use crate::verify::{hadamard_chain, is_coordinate_convex, ConvexityReport};

const CONVEXITY_GRID: u32 = 33;
const CONVEXITY_TOL: f64 = 1e-10;
const DEFAULT_LAMBDA_GRID: [f64; 4] = [0.0, 1.0 / 3.0, 0.5, 1.0];

#[derive(Debug, Parser)]
#[command(
    name = "quadcert",
    version,
    about = "Certified 2-D cubature on rectangles with a-priori error bounds"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Emit the run record as a single JSON object on stdout
    #[arg(long, global = true)]
    json: bool,

    /// Exit 2 when a convexity hypothesis fails
    #[arg(long, global = true)]
    strict: bool,

    /// Target tolerance: certificate total for `integrate --certify`
    /// (default 1e-4), reporting tolerance elsewhere (default 1e-10);
    /// line integrals run 100x tighter
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Depth budget for adaptive quadrature and panel subdivision
    #[arg(long, global = true, default_value_t = 40)]
    max_depth: u32,

    /// Gauss-Legendre nodes per panel (8, 16 or 32)
    #[arg(long, global = true, default_value_t = 16)]
    quad_nodes: u32,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Apply the rule once; optionally certify adaptively or compare with
    /// the reference oracle
    Integrate(IntegrateArgs),
    /// Report the rule identity residual over a lambda list
    VerifyIdentity(VerifyIdentityArgs),
    /// Tabulate every error bound against the actual error
    Bounds(BoundsArgs),
    /// Evaluate the five-term Hadamard chain and check monotonicity
    Hadamard(FunctionArgs),
    /// Check coordinate convexity of f, |fxy| and powers of |fxy|
    ConvexityCheck(ConvexityArgs),
}

#[derive(Debug, Args)]
struct FunctionArgs {
    /// Expression in x and y, e.g. "x^2*y^2"
    #[arg(short = 'f', long = "function", allow_hyphen_values = true)]
    function: String,

    /// Rectangle bounds a,b,c,d (comma separated)
    #[arg(short = 'r', long = "rect", allow_hyphen_values = true)]
    rect: String,
}

#[derive(Debug, Args)]
struct LambdaChoice {
    /// Rule parameter in [0, 1]
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,

    /// Named special value: midpoint (0), simpson (1/3), trapezoid (1)
    #[arg(long, value_enum, conflicts_with = "lambda")]
    lambda_named: Option<NamedRule>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NamedRule {
    Midpoint,
    Simpson,
    Trapezoid,
}

impl NamedRule {
    fn value(self) -> f64 {
        match self {
            NamedRule::Midpoint => 0.0,
            NamedRule::Simpson => 1.0 / 3.0,
            NamedRule::Trapezoid => 1.0,
        }
    }
}

#[derive(Debug, Args)]
struct IntegrateArgs {
    #[command(flatten)]
    function: FunctionArgs,

    #[command(flatten)]
    lambda: LambdaChoice,

    /// Subdivide adaptively until the certificate total meets --tol
    #[arg(long)]
    certify: bool,

    /// Also compute the reference double integral and the actual error
    #[arg(long)]
    oracle: bool,

    /// q grid for the bound selector, comma separated
    #[arg(long, default_value = "1,2,3,5")]
    q_grid: String,
}

#[derive(Debug, Args)]
struct VerifyIdentityArgs {
    /// Expression in x and y (omit when using --corpus)
    #[arg(
        short = 'f',
        long = "function",
        required_unless_present = "corpus",
        allow_hyphen_values = true
    )]
    function: Option<String>,

    /// Rectangle bounds a,b,c,d
    #[arg(short = 'r', long = "rect", allow_hyphen_values = true)]
    rect: String,

    /// Lambda values to test, comma separated
    #[arg(long, default_value = "0,0.3333333333333333,0.5,1")]
    lambda_grid: String,

    /// File with one expression per line (empty lines and # comments skipped)
    #[arg(long)]
    corpus: Option<String>,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[command(flatten)]
    function: FunctionArgs,

    #[command(flatten)]
    lambda: LambdaChoice,

    /// Lambda values to sweep (overrides --lambda/--lambda-named)
    #[arg(long, allow_hyphen_values = true)]
    lambda_grid: Option<String>,

    /// q grid for the Holder and power-mean bounds
    #[arg(long, default_value = "1,2,3,5")]
    q_grid: String,
}

#[derive(Debug, Args)]
struct ConvexityArgs {
    #[command(flatten)]
    function: FunctionArgs,

    /// Additionally check |fxy|^q for each q
    #[arg(long)]
    q_grid: Option<String>,
}

// ---------------------------------------------------------------------------
// run records

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub command: String,
    pub inputs: Inputs,
    pub outputs: Outputs,
    pub timings_ms: f64,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    pub expression: String,
    pub rect: [f64; 4],
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda_grid: Option<Vec<f64>>,
    pub q_grid: Option<Vec<f64>>,
    pub tol: f64,
    pub quad_nodes: u32,
    pub max_depth: u32,
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rule: Option<RuleOutput>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub best_bound: Option<BoundInfo>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub certified: Option<CertifiedOutput>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub oracle: Option<OracleOutput>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub residuals: Option<Vec<ResidualRow>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bounds: Option<Vec<BoundRow>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub chain: Option<ChainOutput>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub convexity: Option<Vec<ConvexityRow>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleOutput {
    /// Rule estimate of the averaged integral
    pub average: f64,
    /// Rule estimate of the raw integral (average times area)
    pub raw: f64,
    pub point_term: f64,
    pub line_term: f64,
    pub line_err_est: f64,
    /// Verdict of the coordinate-convexity check on |fxy|
    pub hypothesis_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundInfo {
    pub theorem: String,
    pub value: f64,
    pub p: Option<f64>,
    pub q: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifiedOutput {
    pub integral: f64,
    pub total_certificate: f64,
    pub panels: u64,
    pub hypothesis_checked: bool,
    pub line_err_est: f64,
    pub budget_exhausted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleOutput {
    pub raw: f64,
    pub err_est: f64,
    /// |oracle raw - rule raw| when the rule also ran
    pub rule_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualRow {
    pub expression: String,
    pub lambda: f64,
    pub residual: f64,
    pub quad_err_est: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundRow {
    pub theorem: String,
    pub lambda: f64,
    pub q: Option<f64>,
    pub p: Option<f64>,
    pub bound: f64,
    pub actual_error: f64,
    /// actual/bound, reported when the hypothesis holds and the bound is
    /// nonzero; in [0, 1] when the theorem applies
    pub tightness_ratio: Option<f64>,
    pub hypothesis_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainOutput {
    pub values: [f64; 5],
    pub monotone: bool,
    pub quad_err_est: f64,
    pub convexity_passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvexityRow {
    pub target: String,
    pub passed: bool,
    pub grid_n: u32,
    pub witness: Option<WitnessOut>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessOut {
    pub axis: String,
    pub fixed_coord: f64,
    pub t1: f64,
    pub t2: f64,
    pub violation: f64,
}

// ---------------------------------------------------------------------------
// JSON with 17 significant digits

struct SigDigits17;

impl serde_json::ser::Formatter for SigDigits17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes a run record with every float at 17 significant digits, which
/// is enough for a lossless f64 round-trip.
pub fn to_json(record: &RunRecord) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigDigits17);
    record
        .serialize(&mut ser)
        .expect("run record serialization cannot fail");
    String::from_utf8(out).expect("serializer emits UTF-8")
}

/// Formats with 6 significant digits for human-mode output.
fn fmt6(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if (1e-4..1e7).contains(&a) {
        let digits = (5 - a.log10().floor() as i32).max(0) as usize;
        format!("{v:.digits$}")
    } else {
        format!("{v:.5e}")
    }
}

// ---------------------------------------------------------------------------
// command plumbing

#[derive(Debug)]
enum CliError {
    Input(String),
}

impl CliError {
    fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }
}

impl<E: std::error::Error> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Input(e.to_string())
    }
}

struct Outcome {
    record: RunRecord,
    human: String,
    exit: i32,
}

fn parse_rect(text: &str) -> Result<Rectangle<f64>, CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 4 {
        return Err(CliError::input(format!(
            "rectangle must be a,b,c,d (got `{text}`)"
        )));
    }
    let mut v = [0.0f64; 4];
    for (slot, part) in v.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| CliError::input(format!("bad rectangle coordinate `{part}`")))?;
    }
    Ok(Rectangle::new(v[0], v[1], v[2], v[3])?)
}

fn parse_grid(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let v: f64 = part
            .trim()
            .parse()
            .map_err(|_| CliError::input(format!("bad {what} entry `{part}`")))?;
        out.push(v);
    }
    if out.is_empty() {
        return Err(CliError::input(format!("{what} must not be empty")));
    }
    Ok(out)
}

fn resolve_lambda(choice: &LambdaChoice) -> Result<RuleParams<f64>, CliError> {
    let value = match (choice.lambda, choice.lambda_named) {
        (Some(v), None) => v,
        (None, Some(named)) => named.value(),
        (None, None) => {
            return Err(CliError::input(
                "pass --lambda <value> or --lambda-named <midpoint|simpson|trapezoid>",
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };
    Ok(RuleParams::new(value)?)
}

struct Ctx {
    cfg: QuadConfig<f64>,
    tol: f64,
    strict: bool,
    quad_nodes: u32,
    max_depth: u32,
}

impl Ctx {
    fn new(cli: &Cli, default_tol: f64) -> Result<Self, CliError> {
        let tol = cli.tol.unwrap_or(default_tol);
        if !(tol >= 0.0) {
            return Err(CliError::input("--tol must be non-negative"));
        }
        // line integrals and references run 100x tighter than the reporting
        // tolerance so the theorem bounds dominate the error budget
        let quad_tol = (tol / 100.0).max(1e-14);
        let cfg = QuadConfig::new(quad_tol, quad_tol, cli.max_depth, cli.quad_nodes)?;
        Ok(Self {
            cfg,
            tol,
            strict: cli.strict,
            quad_nodes: cli.quad_nodes,
            max_depth: cli.max_depth,
        })
    }

    fn inputs(&self, expression: &str, rect: &Rectangle<f64>) -> Inputs {
        Inputs {
            expression: expression.to_string(),
            rect: [rect.a(), rect.b(), rect.c(), rect.d()],
            lambda: None,
            lambda_grid: None,
            q_grid: None,
            tol: self.tol,
            quad_nodes: self.quad_nodes,
            max_depth: self.max_depth,
            strict: self.strict,
        }
    }

    fn record(&self, command: &str, inputs: Inputs, outputs: Outputs) -> RunRecord {
        RunRecord {
            command: command.to_string(),
            inputs,
            outputs,
            timings_ms: 0.0,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

fn convexity_of(g: &Expr<f64>, r: &Rectangle<f64>) -> Result<ConvexityReport<f64>, CliError> {
    Ok(is_coordinate_convex(g, r, CONVEXITY_GRID, CONVEXITY_TOL)?)
}

fn convexity_row(target: &str, report: &ConvexityReport<f64>) -> ConvexityRow {
    ConvexityRow {
        target: target.to_string(),
        passed: report.passed,
        grid_n: report.grid_n,
        witness: report.witness.map(|w| WitnessOut {
            axis: w.axis.to_string(),
            fixed_coord: w.fixed_coord,
            t1: w.t1,
            t2: w.t2,
            violation: w.violation,
        }),
    }
}

fn bound_info(report: &BoundReport<f64>) -> BoundInfo {
    BoundInfo {
        theorem: report.kind.name().to_string(),
        value: report.value,
        p: report.p,
        q: report.q,
    }
}

// ---------------------------------------------------------------------------
// commands

fn cmd_integrate(args: &IntegrateArgs, ctx: &Ctx) -> Result<Outcome, CliError> {
    let model = FunctionModel::<f64>::parse(&args.function.function)?;
    let rect = parse_rect(&args.function.rect)?;
    let params = resolve_lambda(&args.lambda)?;
    let q_grid = parse_grid(&args.q_grid, "q grid")?;

    let eval = evaluate_rule(&model, &rect, &params, &ctx.cfg)?;
    let hypothesis = convexity_of(&Expr::abs(model.fxy.clone()), &rect)?;
    let best = best_bound(&model, &rect, &params, &q_grid)?;

    let mut outputs = Outputs {
        rule: Some(RuleOutput {
            average: eval.breakdown.estimate(),
            raw: eval.breakdown.estimate() * rect.area(),
            point_term: eval.breakdown.point_term,
            line_term: eval.breakdown.line_term,
            line_err_est: eval.line_err_est,
            hypothesis_ok: hypothesis.passed,
        }),
        best_bound: Some(bound_info(&best)),
        ..Outputs::default()
    };

    let mut budget_exhausted = false;
    if args.certify {
        let certified =
            match integrate_certified(&model, &rect, &params, ctx.tol, ctx.max_depth, &ctx.cfg) {
                Ok(res) => res,
                Err(AdaptiveError::BudgetExhausted { partial }) => {
                    budget_exhausted = true;
                    partial
                }
                Err(AdaptiveError::Quad(e)) => return Err(e.into()),
                Err(AdaptiveError::Eval(e)) => return Err(e.into()),
            };
        outputs.certified = Some(CertifiedOutput {
            integral: certified.integral,
            total_certificate: certified.total_certificate,
            panels: certified.panels as u64,
            hypothesis_checked: certified.hypothesis_checked,
            line_err_est: certified.line_err_est,
            budget_exhausted,
        });
    }
    if args.oracle {
        let (raw, err_est) = integrate_2d(&model, &rect, &ctx.cfg)?;
        let rule_raw = outputs
            .certified
            .as_ref()
            .map(|c| c.integral)
            .unwrap_or(eval.breakdown.estimate() * rect.area());
        outputs.oracle = Some(OracleOutput {
            raw,
            err_est,
            rule_error: Some((raw - rule_raw).abs()),
        });
    }

    let exit = if budget_exhausted {
        1
    } else if ctx.strict && !hypothesis.passed {
        2
    } else {
        0
    };

    let mut human = String::new();
    let rule = outputs.rule.as_ref().unwrap();
    let _ = writeln!(
        human,
        "rule estimate for {} on [{},{}]x[{},{}] at lambda={}",
        model.source_text,
        fmt6(rect.a()),
        fmt6(rect.b()),
        fmt6(rect.c()),
        fmt6(rect.d()),
        fmt6(params.lambda()),
    );
    let _ = writeln!(
        human,
        "  average = {}   raw = {}",
        fmt6(rule.average),
        fmt6(rule.raw)
    );
    let _ = writeln!(
        human,
        "  best bound = {} ({})   hypothesis: {}",
        fmt6(best.value),
        best.kind.name(),
        if hypothesis.passed {
            "ok"
        } else {
            "UNSOUND-HYPOTHESIS"
        }
    );
    if let Some(c) = &outputs.certified {
        let _ = writeln!(
            human,
            "  certified integral = {}   certificate = {}   panels = {}{}",
            fmt6(c.integral),
            fmt6(c.total_certificate),
            c.panels,
            if c.budget_exhausted {
                "   (budget exhausted)"
            } else {
                ""
            }
        );
    }
    if let Some(o) = &outputs.oracle {
        let _ = writeln!(
            human,
            "  oracle = {}   actual |error| = {}",
            fmt6(o.raw),
            fmt6(o.rule_error.unwrap_or(f64::NAN))
        );
    }

    let mut inputs = ctx.inputs(&model.source_text, &rect);
    inputs.lambda = Some(params.lambda());
    inputs.q_grid = Some(q_grid);
    Ok(Outcome {
        record: ctx.record("integrate", inputs, outputs),
        human,
        exit,
    })
}

fn load_corpus(path: &str) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read corpus `{path}`: {e}")))?;
    let exprs: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect();
    if exprs.is_empty() {
        return Err(CliError::input(format!(
            "corpus `{path}` holds no expressions"
        )));
    }
    Ok(exprs)
}

fn cmd_verify_identity(args: &VerifyIdentityArgs, ctx: &Ctx) -> Result<Outcome, CliError> {
    let rect = parse_rect(&args.rect)?;
    let lambdas = parse_grid(&args.lambda_grid, "lambda grid")?;
    let expressions = match (&args.corpus, &args.function) {
        (Some(path), _) => load_corpus(path)?,
        (None, Some(f)) => vec![f.clone()],
        (None, None) => unreachable!("clap required_unless_present"),
    };

    let mut rows = Vec::new();
    let mut max_residual = 0.0f64;
    for text in &expressions {
        let model = FunctionModel::<f64>::parse(text)?;
        for &lambda in &lambdas {
            let params = RuleParams::new(lambda)?;
            let (residual, est) =
                identity_residual_with_estimate(&model, &rect, &params, &ctx.cfg)?;
            max_residual = max_residual.max(residual.abs());
            rows.push(ResidualRow {
                expression: text.clone(),
                lambda,
                residual,
                quad_err_est: est,
            });
        }
    }

    let mut human = String::new();
    for row in &rows {
        let _ = writeln!(
            human,
            "  {}  lambda={}  residual={}",
            row.expression,
            fmt6(row.lambda),
            fmt6(row.residual)
        );
    }
    let _ = writeln!(human, "max |residual| = {}", fmt6(max_residual));

    let expression_label = match &args.corpus {
        Some(path) => format!("@{path}"),
        None => expressions[0].clone(),
    };
    let mut inputs = ctx.inputs(&expression_label, &rect);
    inputs.lambda_grid = Some(lambdas);
    let outputs = Outputs {
        residuals: Some(rows),
        max_residual: Some(max_residual),
        ..Outputs::default()
    };
    Ok(Outcome {
        record: ctx.record("verify-identity", inputs, outputs),
        human,
        exit: 0,
    })
}

fn cmd_bounds(args: &BoundsArgs, ctx: &Ctx) -> Result<Outcome, CliError> {
    let model = FunctionModel::<f64>::parse(&args.function.function)?;
    let rect = parse_rect(&args.function.rect)?;
    let lambdas = match &args.lambda_grid {
        Some(text) => parse_grid(text, "lambda grid")?,
        None => match (args.lambda.lambda, args.lambda.lambda_named) {
            (None, None) => DEFAULT_LAMBDA_GRID.to_vec(),
            _ => vec![resolve_lambda(&args.lambda)?.lambda()],
        },
    };
    let q_grid = parse_grid(&args.q_grid, "q grid")?;
    for &q in &q_grid {
        if q < 1.0 {
            return Err(CliError::input(format!(
                "q grid entries must be >= 1, got {q}"
            )));
        }
    }

    // hypothesis checks depend only on q, not lambda
    let abs_fxy = Expr::abs(model.fxy.clone());
    let first_power_ok = convexity_of(&abs_fxy, &rect)?.passed;
    let mut q_ok = Vec::with_capacity(q_grid.len());
    for &q in &q_grid {
        let powered = Expr::pow(abs_fxy.clone(), Expr::num(q));
        q_ok.push(convexity_of(&powered, &rect)?.passed);
    }

    let mut rows = Vec::new();
    for &lambda in &lambdas {
        let params = RuleParams::new(lambda)?;
        let eval = evaluate_rule(&model, &rect, &params, &ctx.cfg)?;
        let (avg, _) = average_integral(&model, &rect, &ctx.cfg)?;
        let actual = (avg - eval.breakdown.estimate()).abs();
        let corners = abs_mixed_corners(&model, &rect)?;

        let mut push = |report: BoundReport<f64>, ok: bool| {
            let ratio = if ok && report.value > 0.0 {
                Some(actual / report.value)
            } else {
                None
            };
            rows.push(BoundRow {
                theorem: report.kind.name().to_string(),
                lambda,
                q: report.q,
                p: report.p,
                bound: report.value,
                actual_error: actual,
                tightness_ratio: ratio,
                hypothesis_ok: ok,
            });
        };

        push(bound_first_power(&corners, &rect, &params), first_power_ok);
        for (&q, &ok) in q_grid.iter().zip(&q_ok) {
            let powered = corners.powered(q);
            push(bound_power_mean(&powered, &rect, &params, q)?, ok);
            if q > 1.0 {
                let he = HolderExponents::from_q(q)?;
                push(bound_holder(&powered, &rect, &params, &he), ok);
                push(bound_holder_relaxed(&powered, &rect, &params, q)?, ok);
            }
        }
    }

    let any_unsound = rows.iter().any(|r| !r.hypothesis_ok);
    let exit = if ctx.strict && any_unsound { 2 } else { 0 };

    let mut human = String::new();
    let _ = writeln!(
        human,
        "{:<16} {:>8} {:>6} {:>12} {:>12} {:>10}  hypothesis",
        "bound", "lambda", "q", "value", "actual", "ratio"
    );
    for row in &rows {
        let _ = writeln!(
            human,
            "{:<16} {:>8} {:>6} {:>12} {:>12} {:>10}  {}",
            row.theorem,
            fmt6(row.lambda),
            row.q.map(fmt6).unwrap_or_else(|| "-".into()),
            fmt6(row.bound),
            fmt6(row.actual_error),
            row.tightness_ratio.map(fmt6).unwrap_or_else(|| "-".into()),
            if row.hypothesis_ok {
                "ok"
            } else {
                "UNSOUND-HYPOTHESIS"
            }
        );
    }

    let mut inputs = ctx.inputs(&model.source_text, &rect);
    if lambdas.len() == 1 {
        inputs.lambda = Some(lambdas[0]);
    } else {
        inputs.lambda_grid = Some(lambdas);
    }
    inputs.q_grid = Some(q_grid);
    let outputs = Outputs {
        bounds: Some(rows),
        ..Outputs::default()
    };
    Ok(Outcome {
        record: ctx.record("bounds", inputs, outputs),
        human,
        exit,
    })
}

fn cmd_hadamard(args: &FunctionArgs, ctx: &Ctx) -> Result<Outcome, CliError> {
    let model = FunctionModel::<f64>::parse(&args.function)?;
    let rect = parse_rect(&args.rect)?;

    let convexity = convexity_of(&model.f, &rect)?;
    let chain = hadamard_chain(&model, &rect, &ctx.cfg)?;
    let slack = 1e-12f64.max(10.0 * chain.quad_err_est);
    let monotone = chain.is_monotone(slack);

    // a monotonicity violation on a verified coordinate-convex input would
    // be a bug in this toolkit: surface it loudly
    let exit = if convexity.passed && !monotone {
        2
    } else if ctx.strict && !convexity.passed {
        2
    } else {
        0
    };

    let mut human = String::new();
    let _ = writeln!(
        human,
        "chain: {}",
        chain
            .values()
            .iter()
            .map(|v| fmt6(*v))
            .collect::<Vec<_>>()
            .join("  ")
    );
    let _ = writeln!(
        human,
        "monotone: {}   convexity: {}",
        if monotone { "PASS" } else { "FAIL" },
        if convexity.passed { "PASS" } else { "FAIL" }
    );

    let outputs = Outputs {
        chain: Some(ChainOutput {
            values: chain.values(),
            monotone,
            quad_err_est: chain.quad_err_est,
            convexity_passed: convexity.passed,
        }),
        convexity: Some(vec![convexity_row("f", &convexity)]),
        ..Outputs::default()
    };
    Ok(Outcome {
        record: ctx.record("hadamard", ctx.inputs(&model.source_text, &rect), outputs),
        human,
        exit,
    })
}

fn cmd_convexity_check(args: &ConvexityArgs, ctx: &Ctx) -> Result<Outcome, CliError> {
    let model = FunctionModel::<f64>::parse(&args.function.function)?;
    let rect = parse_rect(&args.function.rect)?;
    let q_grid = match &args.q_grid {
        Some(text) => Some(parse_grid(text, "q grid")?),
        None => None,
    };

    let mut rows = Vec::new();
    rows.push(convexity_row("f", &convexity_of(&model.f, &rect)?));
    let abs_fxy = Expr::abs(model.fxy.clone());
    rows.push(convexity_row("abs_fxy", &convexity_of(&abs_fxy, &rect)?));
    if let Some(qs) = &q_grid {
        for &q in qs {
            let powered = Expr::pow(abs_fxy.clone(), Expr::num(q));
            rows.push(convexity_row(
                &format!("abs_fxy^{q}"),
                &convexity_of(&powered, &rect)?,
            ));
        }
    }

    let any_failed = rows.iter().any(|r| !r.passed);
    let exit = if ctx.strict && any_failed { 2 } else { 0 };

    let mut human = String::new();
    for row in &rows {
        match &row.witness {
            None => {
                let _ = writeln!(human, "{}: PASS", row.target);
            }
            Some(w) => {
                let _ = writeln!(
                    human,
                    "{}: FAIL on {} axis at fixed={} t1={} t2={} (violation {})",
                    row.target,
                    w.axis,
                    fmt6(w.fixed_coord),
                    fmt6(w.t1),
                    fmt6(w.t2),
                    fmt6(w.violation)
                );
            }
        }
    }

    let mut inputs = ctx.inputs(&model.source_text, &rect);
    inputs.q_grid = q_grid;
    let outputs = Outputs {
        convexity: Some(rows),
        ..Outputs::default()
    };
    Ok(Outcome {
        record: ctx.record("convexity-check", inputs, outputs),
        human,
        exit,
    })
}

// ---------------------------------------------------------------------------
// entry point

fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    let default_tol = match &cli.command {
        Command::Integrate(args) if args.certify => 1e-4,
        _ => 1e-10,
    };
    let ctx = Ctx::new(cli, default_tol)?;
    match &cli.command {
        Command::Integrate(args) => cmd_integrate(args, &ctx),
        Command::VerifyIdentity(args) => cmd_verify_identity(args, &ctx),
        Command::Bounds(args) => cmd_bounds(args, &ctx),
        Command::Hadamard(args) => cmd_hadamard(args, &ctx),
        Command::ConvexityCheck(args) => cmd_convexity_check(args, &ctx),
    }
}

/// Runs the CLI against the given arguments; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let started = Instant::now();
    match dispatch(&cli) {
        Ok(mut outcome) => {
            outcome.record.timings_ms = started.elapsed().as_secs_f64() * 1e3;
            if cli.json {
                println!("{}", to_json(&outcome.record));
            } else {
                print!("{}", outcome.human);
            }
            outcome.exit
        }
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

/// Entry point for the `quadcert` binary.
pub fn main_entry() -> i32 {
    run(std::env::args_os())
}

//! Command-line front end.
//!
//! Exit codes: 0 when the command ran (obstruction failures included), 2 on
//! input errors, 3 when the cone truncation is not stable.

use std::io::Write;
use std::path::Path;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::cone::{surgery, ConeError, SurgeryResult};
use crate::fmod::Grading;
use crate::knotmodel::{load_ambient, AmbientSummary, KnotModel, ModelErrors};
use crate::numth::{casson_walker_surgery, lambda_from_hf, lens, CassonWalkerInput, LensInvariants};
use crate::obstruct::{
    chi_relation, cosmetic_pair_scan, cosmetic_scan_verdict, d_sandwich, dedekind_necessary, genus_bound, k_special,
    lens_complement_verdict, v0_bound, z_special, ObstructError, ObstructionReport, Outcome, Rule, TargetSummary,
    Verdict,
};
use crate::rational::{format_rational, parse_rational, Rational};
use crate::shipped;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_UNSTABLE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "fsl", version, about = "Heegaard Floer homology of Dehn surgeries via the mapping cone")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Truncation depth of the cone (overrides FSL_DEPTH and the default).
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// HF+ of p/q surgery on a knot model.
    Surgery {
        /// Model file, or the name of a bundled model.
        model: String,
        /// Slope p/q. Negative slopes need --mirror.
        #[arg(allow_hyphen_values = true, value_parser = parse_slope)]
        slope: (i64, i64),
        /// Orientation-reversed model, used for negative slopes.
        #[arg(long)]
        mirror: Option<String>,
    },
    /// Lens space invariants of L(p,q).
    Lens { p: i64, q: i64 },
    /// Casson–Walker invariant of a surgery.
    CassonWalker(CassonWalkerArgs),
    /// Run surgery obstructions.
    Obstruct(ObstructArgs),
    /// Validate model or ambient files.
    Validate {
        #[arg(required = true)]
        files: Vec<String>,
    },
}

#[derive(Args, Debug)]
pub struct CassonWalkerArgs {
    #[arg(allow_hyphen_values = true, value_parser = parse_slope)]
    pub slope: (i64, i64),
    /// Take λ(Y) and Δ''(1) from a model, and cross-check against the computed surgery.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_rational)]
    pub lambda_y: Option<Rational>,
    #[arg(long, default_value_t = 1)]
    pub h1: i64,
    #[arg(long, allow_hyphen_values = true)]
    pub delta2: Option<i64>,
}

#[derive(Args, Debug, Default)]
pub struct ObstructArgs {
    /// Slopes n = -q w^2/p ± 1 for a lens space L(p,q): P Q W.
    #[arg(long, num_args = 3, value_names = ["P", "Q", "W"], allow_hyphen_values = true)]
    pub lens_complement: Option<Vec<i64>>,
    /// At most phi(|H1|) slopes, none straddling a multiple of p.
    #[arg(long)]
    pub z_special: bool,
    /// Euler characteristic relations between Y and Z.
    #[arg(long)]
    pub chi_relation: bool,
    /// Dedekind sum condition for Y_{p/q1} = Y_{-p/q2}: P Q1 Q2.
    #[arg(long, num_args = 3, value_names = ["P", "Q1", "Q2"], allow_hyphen_values = true)]
    pub dedekind: Option<Vec<i64>>,
    /// Forced conclusions for large q; checked against --model when given.
    #[arg(long)]
    pub k_special: bool,
    /// Bound q ≤ p + dim HF_red(Z)/V_0 for a model.
    #[arg(long)]
    pub v0_bound: Option<String>,
    /// Bound floor(q/p) ≤ (D(Z) - D(Y))/2.
    #[arg(long)]
    pub genus_bound: bool,
    /// Computed d-invariants against their bounds, for a model.
    #[arg(long)]
    pub d_sandwich: Option<String>,
    /// Slope pairs with isomorphic HF+, for a model.
    #[arg(long)]
    pub cosmetic_scan: Option<String>,

    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<i64>,
    /// Slopes; repeat the flag or give a range `a..b` (inclusive).
    #[arg(long, allow_hyphen_values = true)]
    pub q: Vec<String>,
    /// |H1(Z)| of the target.
    #[arg(long)]
    pub h1: Option<i64>,
    /// dim HF_red(Z); defaults to |chi|.
    #[arg(long)]
    pub dim: Option<usize>,
    /// chi(HF_red(Z)).
    #[arg(long, allow_hyphen_values = true)]
    pub chi: Option<i64>,
    /// D(Z): the largest grading excess of reduced elements of Z.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_rational)]
    pub d_z: Option<Rational>,
    /// chi(HF_red(Y)).
    #[arg(long, allow_hyphen_values = true)]
    pub y_chi: Option<i64>,
    /// Ambient summary (file or bundled name).
    #[arg(long)]
    pub ambient: Option<String>,
    /// Knot model checked by --k-special.
    #[arg(long)]
    pub model: Option<String>,
}

fn parse_slope(s: &str) -> Result<(i64, i64), String> {
    let r = parse_rational(s)?;
    let p: i64 = r.numer().try_into().map_err(|_| format!("slope `{s}` too large"))?;
    let q: i64 = r.denom().try_into().map_err(|_| format!("slope `{s}` too large"))?;
    if s.contains('/') {
        // keep the literal pair so that 2/4 is rejected rather than reduced
        let (a, b) = s.split_once('/').expect("contains slash");
        let a: i64 = a.trim().parse().map_err(|_| format!("bad slope `{s}`"))?;
        let b: i64 = b.trim().parse().map_err(|_| format!("bad slope `{s}`"))?;
        if (a, b) != (p, q) && (a, b) != (-p, -q) {
            return Err(format!("slope `{s}` is not in lowest terms"));
        }
    }
    if p == 0 {
        return Err("slope 0 is not supported".into());
    }
    Ok((p, q))
}

fn parse_q_list(items: &[String]) -> Result<Vec<i64>, String> {
    let mut out = Vec::new();
    for item in items {
        if let Some((a, b)) = item.split_once("..") {
            let a: i64 = a.trim().parse().map_err(|_| format!("bad range `{item}`"))?;
            let b: i64 = b.trim().parse().map_err(|_| format!("bad range `{item}`"))?;
            out.extend(a..=b);
        } else {
            out.push(item.trim().parse().map_err(|_| format!("bad slope `{item}`"))?);
        }
    }
    Ok(out)
}

enum Failure {
    Input(String),
    Unstable(String),
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::Unstable(_) => EXIT_UNSTABLE,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Unstable(m) => m,
        }
    }
}

impl From<ModelErrors> for Failure {
    fn from(e: ModelErrors) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<ConeError> for Failure {
    fn from(e: ConeError) -> Self {
        match e {
            ConeError::TruncationTooSmall(_) => Failure::Unstable(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<ObstructError> for Failure {
    fn from(e: ObstructError) -> Self {
        match e {
            ObstructError::Cone(c) => c.into(),
            other => Failure::Input(other.to_string()),
        }
    }
}

fn resolve_model(name: &str) -> Result<KnotModel, Failure> {
    if Path::new(name).is_file() {
        return Ok(KnotModel::from_path(Path::new(name))?);
    }
    match shipped::model(name) {
        Some(m) => Ok(m?),
        None => Err(Failure::Input(format!("no model file or bundled model named `{name}`"))),
    }
}

fn resolve_ambient(name: &str) -> Result<AmbientSummary, Failure> {
    if Path::new(name).is_file() {
        let text = std::fs::read_to_string(name).map_err(|e| Failure::Input(format!("{name}: {e}")))?;
        return Ok(load_ambient(&text)?);
    }
    match shipped::ambient(name) {
        Some(a) => Ok(a?),
        None => Err(Failure::Input(format!("no ambient file or bundled ambient named `{name}`"))),
    }
}

fn env_depth() -> Result<Option<usize>, Failure> {
    match std::env::var("FSL_DEPTH") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::Input(format!("FSL_DEPTH=`{v}` is not a non-negative integer"))),
        Err(_) => Ok(None),
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = out.write_all(text.as_bytes());
            } else {
                let _ = err.write_all(text.as_bytes());
            }
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.exit_code()
        }
    }
}

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Input(e.to_string()))?;
    writeln!(out, "{text}").map_err(|e| Failure::Input(e.to_string()))
}

macro_rules! w {
    ($out:expr, $($arg:tt)*) => {
        writeln!($out, $($arg)*).map_err(|e| Failure::Input(e.to_string()))?
    };
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<(), Failure> {
    let depth = match cli.depth {
        Some(d) => Some(d),
        None => env_depth()?,
    };
    match &cli.command {
        Command::Surgery { model, slope, mirror } => {
            let result = run_surgery(model, *slope, mirror.as_deref(), depth)?;
            match cli.format {
                Format::Json => emit_json(out, &result),
                Format::Text => render_surgery(out, &result, *slope),
            }
        }
        Command::Lens { p, q } => {
            let inv = lens(*p, *q).map_err(|e| Failure::Input(e.to_string()))?;
            match cli.format {
                Format::Json => emit_json(out, &inv),
                Format::Text => render_lens(out, &inv),
            }
        }
        Command::CassonWalker(args) => run_casson_walker(args, cli.format, depth, out),
        Command::Obstruct(args) => {
            let report = run_obstruct(args, depth)?;
            match cli.format {
                Format::Json => emit_json(out, &report),
                Format::Text => render_report(out, &report),
            }
        }
        Command::Validate { files } => run_validate(files, cli.format, out),
    }
}

fn run_surgery(model: &str, (p, q): (i64, i64), mirror: Option<&str>, depth: Option<usize>) -> Result<SurgeryResult, Failure> {
    if p > 0 {
        let m = resolve_model(model)?;
        return Ok(surgery(&m, p, q, depth)?);
    }
    let Some(mirror) = mirror else {
        return Err(Failure::Input(format!("slope {p}/{q} is negative; pass --mirror MODEL")));
    };
    // Y_{-p/q}(K) is the orientation reverse of p/q surgery on the mirror.
    let m = resolve_model(mirror)?;
    let mut r = surgery(&m, -p, q, depth)?.reversed();
    // relabel as a surgery on the original knot rather than a reversed one
    r.p = p;
    r.reversed = false;
    r.model = format!("{model} (via {})", m.name);
    Ok(r)
}

fn render_surgery(out: &mut dyn Write, r: &SurgeryResult, (p, q): (i64, i64)) -> Result<(), Failure> {
    w!(out, "{}: surgery {p}/{q}", r.model);
    for c in &r.results {
        let bars: Vec<String> = c.red.iter().map(|b| b.to_string()).collect();
        let red = if bars.is_empty() { "0".to_string() } else { bars.join(" + ") };
        w!(out, "  i={:<3} d={:<8} red={red}  (even {}, odd {})", c.spec.i, c.d.to_string(), c.dims.0, c.dims.1);
    }
    w!(out, "dim HF_red = {}", r.dim_red);
    w!(out, "chi HF_red = {}", r.chi_red);
    w!(out, "sum d = {}", format_rational(&r.d_sum));
    Ok(())
}

fn render_lens(out: &mut dyn Write, inv: &LensInvariants) -> Result<(), Failure> {
    let d: Vec<String> = inv.d_table.iter().map(format_rational).collect();
    w!(out, "L({},{})", inv.p, inv.q);
    w!(out, "s = {}", format_rational(&inv.s));
    w!(out, "lambda = {}", format_rational(&inv.lambda));
    w!(out, "tau = {}", format_rational(&inv.tau));
    w!(out, "d = [{}]", d.join(", "));
    Ok(())
}

#[derive(Serialize)]
struct CassonWalkerReport {
    p: i64,
    q: i64,
    #[serde(with = "crate::rational::serde_str")]
    lambda_y: Rational,
    h1: i64,
    delta2: i64,
    #[serde(with = "crate::rational::serde_str")]
    lambda: Rational,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_from_hf: Option<String>,
}

fn run_casson_walker(args: &CassonWalkerArgs, format: Format, depth: Option<usize>, out: &mut dyn Write) -> Result<(), Failure> {
    let (p, q) = args.slope;
    let model = args.model.as_deref().map(resolve_model).transpose()?;
    let lambda_y = match (&args.lambda_y, &model) {
        (Some(l), _) => l.clone(),
        (None, Some(m)) => lambda_from_hf(m.ambient.chi_red(), m.ambient.d.value(), 1),
        (None, None) => Rational::from_integer(0.into()),
    };
    let delta2 = match (args.delta2, &model) {
        (Some(d), _) => d,
        (None, Some(m)) => m.torsion_coefficients().delta2,
        (None, None) => return Err(Failure::Input("give --delta2 or --model".into())),
    };
    let input = CassonWalkerInput { lambda_y: lambda_y.clone(), h1_order: args.h1, delta2, p, q };
    let lambda = casson_walker_surgery(&input).map_err(|e| Failure::Input(e.to_string()))?;
    let from_hf = match &model {
        Some(m) if p > 0 => {
            let r = surgery(m, p, q, depth)?;
            Some(format_rational(&lambda_from_hf(r.chi_red, &r.d_sum, p)))
        }
        _ => None,
    };
    let report = CassonWalkerReport { p, q, lambda_y, h1: args.h1, delta2, lambda, lambda_from_hf: from_hf };
    match format {
        Format::Json => emit_json(out, &report),
        Format::Text => {
            w!(out, "lambda = {}", format_rational(&report.lambda));
            if let Some(h) = &report.lambda_from_hf {
                w!(out, "lambda from HF = {h}");
            }
            Ok(())
        }
    }
}

fn target(args: &ObstructArgs) -> Result<TargetSummary, Failure> {
    let h1 = args.h1.ok_or_else(|| Failure::Input("--h1 is required".into()))?;
    let chi = args.chi.ok_or_else(|| Failure::Input("--chi is required".into()))?;
    let dim = args.dim.unwrap_or(chi.unsigned_abs() as usize);
    let mut t = TargetSummary::new(h1, dim, chi)?;
    t.d_z = args.d_z.clone().map(Grading::new);
    Ok(t)
}

fn need_p(args: &ObstructArgs) -> Result<i64, Failure> {
    args.p.ok_or_else(|| Failure::Input("--p is required".into()))
}

fn need_q(args: &ObstructArgs) -> Result<i64, Failure> {
    match parse_q_list(&args.q).map_err(Failure::Input)?.as_slice() {
        [q] => Ok(*q),
        _ => Err(Failure::Input("exactly one --q is required".into())),
    }
}

fn inapplicable(rule: Rule, e: impl ToString) -> Verdict {
    Verdict { rule, outcome: Outcome::Inapplicable, note: e.to_string(), witness: Default::default() }
}

fn run_obstruct(args: &ObstructArgs, depth: Option<usize>) -> Result<ObstructionReport, Failure> {
    let mut report = ObstructionReport::default();
    if let Some(v) = &args.lens_complement {
        report.push(lens_complement_verdict(v[0], v[1], v[2]));
    }
    if let Some(v) = &args.dedekind {
        report.push(dedekind_necessary(v[0], v[1], v[2]));
    }
    if args.z_special {
        let z = target(args)?;
        let qs = parse_q_list(&args.q).map_err(Failure::Input)?;
        report.push(z_special(&z, need_p(args)?, &qs));
    }
    if args.chi_relation {
        let z = target(args)?;
        let y_chi = match (args.y_chi, &args.ambient) {
            (Some(c), _) => c,
            (None, Some(a)) => resolve_ambient(a)?.chi_red(),
            (None, None) => return Err(Failure::Input("--y-chi or --ambient is required".into())),
        };
        for v in chi_relation(y_chi, &z, need_p(args)?) {
            report.push(v);
        }
    }
    if args.k_special {
        let model = args.model.as_deref().map(resolve_model).transpose()?;
        let y = match (&args.ambient, &model) {
            (Some(a), _) => resolve_ambient(a)?,
            (None, Some(m)) => m.ambient.clone(),
            (None, None) => return Err(Failure::Input("--ambient or --model is required".into())),
        };
        let z = target(args)?;
        for v in k_special(&y, &z, need_p(args)?, need_q(args)?, model.as_ref()) {
            report.push(v);
        }
    }
    if let Some(name) = &args.v0_bound {
        let m = resolve_model(name)?;
        let z = target(args)?;
        match v0_bound(&m, &z, need_p(args)?, need_q(args)?) {
            Ok(v) => report.push(v),
            Err(e @ ObstructError::V0Zero) => report.push(inapplicable(Rule::V0Bound, e)),
            Err(e) => return Err(e.into()),
        }
    }
    if args.genus_bound {
        let a = args.ambient.as_deref().ok_or_else(|| Failure::Input("--ambient is required".into()))?;
        let y = resolve_ambient(a)?;
        let z = target(args)?;
        match genus_bound(&y, &z, need_p(args)?, need_q(args)?) {
            Ok(v) => report.push(v),
            Err(e @ ObstructError::MissingGradings(_)) => report.push(inapplicable(Rule::GenusBound, e)),
            Err(e) => return Err(e.into()),
        }
    }
    if let Some(name) = &args.d_sandwich {
        let m = resolve_model(name)?;
        report.push(d_sandwich(&m, need_p(args)?, need_q(args)?, depth)?);
    }
    if let Some(name) = &args.cosmetic_scan {
        let m = resolve_model(name)?;
        let qs = parse_q_list(&args.q).map_err(Failure::Input)?;
        let scan = cosmetic_pair_scan(&m, need_p(args)?, &qs, depth)?;
        report.push(cosmetic_scan_verdict(&scan));
    }
    if report.verdicts.is_empty() {
        return Err(Failure::Input("no obstruction selected".into()));
    }
    Ok(report)
}

fn render_report(out: &mut dyn Write, report: &ObstructionReport) -> Result<(), Failure> {
    for v in &report.verdicts {
        let wit: Vec<String> = v.witness.iter().map(|(k, x)| format!("{k}={x}")).collect();
        w!(out, "{:<18} {:<12} {}  [{}]", v.rule.to_string(), v.outcome.to_string(), v.note, wit.join(" "));
    }
    Ok(())
}

#[derive(Serialize)]
struct ValidationLine {
    file: String,
    ok: bool,
    errors: Vec<String>,
}

fn run_validate(files: &[String], format: Format, out: &mut dyn Write) -> Result<(), Failure> {
    let mut lines = Vec::new();
    for f in files {
        let text = if Path::new(f).is_file() {
            std::fs::read_to_string(f).map_err(|e| Failure::Input(format!("{f}: {e}")))
        } else {
            Err(Failure::Input(format!("{f}: no such file")))
        };
        let errors = match text {
            Err(Failure::Input(e)) | Err(Failure::Unstable(e)) => vec![e],
            Ok(t) => match KnotModel::from_json(&t) {
                Ok(_) => Vec::new(),
                // a bare ambient summary is also a valid document
                Err(model_errors) => match serde_json::from_str::<crate::knotmodel::AmbientDocument>(&t) {
                    Ok(_) => match load_ambient(&t) {
                        Ok(_) => Vec::new(),
                        Err(e) => e.0.iter().map(|x| x.to_string()).collect(),
                    },
                    Err(_) => model_errors.0.iter().map(|x| x.to_string()).collect(),
                },
            },
        };
        lines.push(ValidationLine { file: f.clone(), ok: errors.is_empty(), errors });
    }
    let all_ok = lines.iter().all(|l| l.ok);
    match format {
        Format::Json => emit_json(out, &lines)?,
        Format::Text => {
            for l in &lines {
                if l.ok {
                    w!(out, "{}: ok", l.file);
                } else {
                    for e in &l.errors {
                        w!(out, "{}: {e}", l.file);
                    }
                }
            }
        }
    }
    if all_ok {
        Ok(())
    } else {
        Err(Failure::Input("validation failed".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slopes() {
        assert_eq!(parse_slope("2/5"), Ok((2, 5)));
        assert_eq!(parse_slope("3"), Ok((3, 1)));
        assert_eq!(parse_slope("-2/3"), Ok((-2, 3)));
        assert!(parse_slope("2/4").is_err());
        assert!(parse_slope("0").is_err());
        assert!(parse_slope("x").is_err());
    }

    #[test]
    fn exit_codes() {
        let unstable: Failure = ConeError::TruncationTooSmall("x".into()).into();
        assert_eq!(unstable.exit_code(), EXIT_UNSTABLE);
        let wrapped: Failure = ObstructError::Cone(ConeError::TruncationTooSmall("x".into())).into();
        assert_eq!(wrapped.exit_code(), EXIT_UNSTABLE);
        let bad: Failure = ConeError::V0NonZero(1).into();
        assert_eq!(bad.exit_code(), EXIT_INPUT);
    }

    #[test]
    fn q_lists() {
        assert_eq!(parse_q_list(&["1..4".into(), "7".into()]), Ok(vec![1, 2, 3, 4, 7]));
        assert!(parse_q_list(&["1..x".into()]).is_err());
    }
}

//! Command-line front end. Every command prints one report; exit status 0
//! means success, 1 that a checked property failed, 2 a usage or input error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use itertools::Itertools;
use serde::Serialize;
use serde_json::{json, Value};

use crate::equations::{
    build_md, build_pn, build_qt, lemma4_lhs, lemma5_lhs, lemma5_via_lemma4, pipeline_report, psi_from_md,
    solve_alpha, verify_lemma4, verify_lemma5, EqContext, Sampling, Status,
};
use crate::exactla::GfMatrix;
use crate::gf::{Field, FieldSpec, FieldSpecJson};
use crate::projgeom::{conic_fit, is_arc, nrc, Arc, ArcFile};
use crate::search::{
    complete_search, conjecture_explore, extension_points, theorem_check, verify_cert, SearchCert, SearchOptions,
    SubsetStrategy,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "arcforge", version, about = "Exact arcs, normal rational curves and arc-extension search")]
pub struct Cli {
    /// Report format; csv only for `theorem` and `explore`.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for search.
    #[arg(long, global = true, env = "ARCFORGE_THREADS", default_value_t = 1)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Describe GF(p^e) and its modulus.
    Field(FieldArgs),
    /// Write the normal rational curve of PG(k-1, q).
    Nrc(NrcArgs),
    /// Test the arc property of a file.
    CheckArc(InArgs),
    /// Project an arc from some of its points.
    Project(ProjectArgs),
    /// Fit conics through a planar point set.
    Conic(InArgs),
    /// Solve for the coefficients alpha and check held-out equations.
    Alpha(AlphaArgs),
    /// Check one family of identities on an arc.
    Verify(VerifyArgs),
    /// The matrix P_n of a context.
    Pmatrix(CtxArgs),
    /// The matrix M_D of a context.
    Mdmatrix(CtxArgs),
    /// The matrix Q_t of a context (needs n = t).
    Qmatrix(CtxArgs),
    /// Every structural check on one context.
    Pipeline(CtxArgs),
    /// Extension points and completion search.
    Extend(ExtendArgs),
    /// Search completions of (3k-6)-subsets of the normal rational curve.
    Theorem(TheoremArgs),
    /// Rank and weight-one table of P_n over a range of n.
    Explore(ExploreArgs),
}

/// Comma-separated arc indices; the empty string is the empty tuple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Indices(pub Vec<usize>);

fn parse_indices(s: &str) -> Result<Indices, String> {
    if s.trim().is_empty() {
        return Ok(Indices(Vec::new()));
    }
    s.split(',').map(|x| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}"))).collect::<Result<_, _>>().map(Indices)
}

fn parse_codes(s: &str) -> Result<Vec<u32>, String> {
    s.split(',').map(|x| x.trim().parse::<u32>().map_err(|e| format!("{x:?}: {e}"))).collect()
}

#[derive(Args, Debug, Serialize)]
pub struct FieldArgs {
    #[arg(long)]
    pub p: u32,
    #[arg(long, default_value_t = 1)]
    pub e: u32,
    /// Coefficients of a monic modulus, constant term first.
    #[arg(long, value_parser = parse_codes)]
    pub modulus: Option<Vec<u32>>,
}

#[derive(Args, Debug, Serialize)]
pub struct NrcArgs {
    #[arg(long)]
    pub q: u64,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct InArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct ProjectArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_parser = parse_indices)]
    pub from: Indices,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct AlphaArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_parser = parse_indices)]
    pub scope: Option<Indices>,
    /// Held-out equations to check after solving.
    #[arg(long, default_value_t = 0)]
    pub verify_samples: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CtxArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long = "E", value_parser = parse_indices)]
    #[serde(rename = "E")]
    pub e_set: Option<Indices>,
    #[arg(long = "A", value_parser = parse_indices)]
    #[serde(rename = "A")]
    pub a: Option<Indices>,
    #[arg(long = "D", value_parser = parse_indices)]
    #[serde(rename = "D")]
    pub d: Option<Indices>,
    #[arg(long = "e")]
    pub e: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum LemmaArg {
    #[value(name = "4")]
    Four,
    #[value(name = "5")]
    Five,
    Nowone,
    Matrixmd,
    Thepsis,
    Projpsi,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub ctx: CtxArgs,
    #[arg(long, value_enum)]
    pub lemma: LemmaArg,
    /// Random samples when the arc has more than 8 points.
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct ExtendArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub target: Option<usize>,
    /// List every extension point.
    #[arg(long)]
    pub all: bool,
    /// Directory for search certificates.
    #[arg(long)]
    pub certs: Option<PathBuf>,
    /// Re-check a stored certificate instead of searching.
    #[arg(long, requires = "certs")]
    pub resume: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyArg {
    Prefix,
    Random,
}

#[derive(Args, Debug, Serialize)]
pub struct TheoremArgs {
    #[arg(long)]
    pub q: u64,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = StrategyArg::Prefix)]
    pub strategy: StrategyArg,
    #[arg(long, default_value_t = 3)]
    pub trials: usize,
    #[arg(long)]
    pub certs: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ExploreArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long = "E", value_parser = parse_indices)]
    #[serde(rename = "E")]
    pub e_set: Option<Indices>,
    #[arg(long = "A", value_parser = parse_indices)]
    #[serde(rename = "A")]
    pub a: Option<Indices>,
    #[arg(long, default_value_t = 0)]
    pub n_min: usize,
    #[arg(long)]
    pub n_max: Option<usize>,
}

/// Rows for CSV output.
struct Table {
    headers: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

struct Outcome {
    field: FieldSpecJson,
    params: Value,
    body: Value,
    failed: bool,
    table: Option<Table>,
}

impl Outcome {
    fn new(field: &Field, params: impl Serialize, body: impl Serialize) -> Outcome {
        Outcome {
            field: field.spec().to_json(),
            params: serde_json::to_value(params).expect("params serialize"),
            body: serde_json::to_value(body).expect("body serializes"),
            failed: false,
            table: None,
        }
    }

    fn failed_if(mut self, failed: bool) -> Outcome {
        self.failed = failed;
        self
    }
}

/// Parses `args` (program name first), runs the command and writes the
/// report to `out` and diagnostics to `err`. Returns the exit status.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let tabular = matches!(cli.command, Command::Theorem(_) | Command::Explore(_));
    if cli.format == Format::Csv && !tabular {
        let _ = writeln!(err, "error: csv output is only available for theorem and explore");
        return EXIT_USAGE;
    }
    let name = command_name(&cli.command);
    match execute(&cli) {
        Ok(outcome) => match emit(&cli, name, &outcome, out) {
            Ok(()) => {
                if outcome.failed {
                    EXIT_FAILED
                } else {
                    EXIT_OK
                }
            }
            Err(e) => {
                let _ = writeln!(err, "error: {e:#}");
                EXIT_USAGE
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_USAGE
        }
    }
}

/// [`run_with`] on the process's standard streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Field(_) => "field",
        Command::Nrc(_) => "nrc",
        Command::CheckArc(_) => "check-arc",
        Command::Project(_) => "project",
        Command::Conic(_) => "conic",
        Command::Alpha(_) => "alpha",
        Command::Verify(_) => "verify",
        Command::Pmatrix(_) => "pmatrix",
        Command::Mdmatrix(_) => "mdmatrix",
        Command::Qmatrix(_) => "qmatrix",
        Command::Pipeline(_) => "pipeline",
        Command::Extend(_) => "extend",
        Command::Theorem(_) => "theorem",
        Command::Explore(_) => "explore",
    }
}

fn emit(cli: &Cli, name: &str, o: &Outcome, out: &mut dyn Write) -> Result<()> {
    let header = json!({
        "tool": "arcforge",
        "version": env!("CARGO_PKG_VERSION"),
        "command": name,
        "field": o.field,
        "params": o.params,
        "seed": cli.seed,
        "threads": cli.threads,
    });
    match cli.format {
        Format::Json => {
            let report = json!({ "header": header, "body": o.body });
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        }
        Format::Text => {
            write_text(out, &header)?;
            writeln!(out)?;
            write_text(out, &o.body)?;
        }
        Format::Csv => {
            let table = o.table.as_ref().ok_or_else(|| anyhow!("no tabular output for {name}"))?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&table.headers)?;
            for r in &table.rows {
                w.write_record(r)?;
            }
            out.write_all(&w.into_inner().map_err(|e| anyhow!("{e}"))?)?;
        }
    }
    Ok(())
}

/// Top-level keys padded to a common width, values as compact JSON.
fn write_text(out: &mut dyn Write, v: &Value) -> Result<()> {
    match v {
        Value::Object(map) => {
            let width = map.keys().map(|k| k.len()).max().unwrap_or(0);
            for (k, x) in map {
                let s = match x {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                writeln!(out, "{k:<width$}  {s}")?;
            }
        }
        other => writeln!(out, "{other}")?,
    }
    Ok(())
}

fn read_arc_file(path: &Path) -> Result<ArcFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(ArcFile::parse(&text).with_context(|| format!("parsing {}", path.display()))?)
}

fn load_arc(path: &Path, validate: bool) -> Result<Arc> {
    Ok(read_arc_file(path)?.into_arc(validate).with_context(|| format!("loading {}", path.display()))?)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, serde_json::to_string_pretty(value)? + "\n").with_context(|| format!("writing {}", path.display()))
}

fn deficiency(arc: &Arc) -> Result<usize> {
    usize::try_from(arc.deficiency()).map_err(|_| anyhow!("{} vectors exceed q + k - 1", arc.len()))
}

/// Context from the flags, with defaults `E` = the first `k + t - 1`
/// indices, `A` = the first `k - 2` of `E`, `e` = the first of `E \ A`,
/// `n = min(t, |S| - k - t)` and `G = E ∪` the first `n + 1` other indices.
fn context(arc: &Arc, args: &CtxArgs) -> Result<EqContext> {
    let k = arc.k();
    let t = deficiency(arc)?;
    let e_set = args.e_set.clone().map_or_else(|| (0..k + t - 1).collect(), |x| x.0);
    let a = args.a.clone().map_or_else(|| e_set.iter().copied().take(k.saturating_sub(2)).collect(), |x| x.0);
    let e = match args.e {
        Some(e) => e,
        None => e_set.iter().copied().find(|x| !a.contains(x)).ok_or_else(|| anyhow!("E \\ A is empty"))?,
    };
    let max_n = arc.len().checked_sub(k + t).ok_or_else(|| anyhow!("arc too small for a context"))?;
    let n = args.n.unwrap_or(t.min(max_n));
    Ok(EqContext::with_n(arc, e_set, a, e, n)?)
}

fn matrix_body(m: &GfMatrix) -> Value {
    let labels = m.row_labels.clone().unwrap_or_default();
    json!({
        "matrix": m.to_json(),
        "rank": m.rank(),
        "weight_one_rows": m.weight_one_in_colspace().into_iter().map(|r| labels.get(r).cloned().unwrap_or_else(|| r.to_string())).collect_vec(),
    })
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let opts = SearchOptions { threads: cli.threads.max(1) };
    match &cli.command {
        Command::Field(a) => {
            let spec = match &a.modulus {
                Some(m) => FieldSpec::with_modulus(a.p, a.e, m.clone())?,
                None => FieldSpec::new(a.p, a.e)?,
            };
            let f = Field::new(spec.clone());
            let body = json!({ "p": spec.p, "e": spec.e, "q": spec.q(), "modulus": spec.modulus, "odd": f.is_odd() });
            Ok(Outcome::new(&f, a, body))
        }
        Command::Nrc(a) => {
            let f = Field::with_order(a.q)?;
            let arc = nrc(&f, a.k)?;
            let file = arc.to_file();
            if let Some(path) = &a.out {
                write_json(path, &file)?;
            }
            Ok(Outcome::new(&f, a, json!({ "size": arc.len(), "arc": file })))
        }
        Command::CheckArc(a) => {
            let arc = load_arc(&a.input, false)?;
            let check = is_arc(arc.field(), arc.k(), arc.points())?;
            let body = json!({
                "size": arc.len(),
                "k": arc.k(),
                "deficiency": arc.deficiency(),
                "is_arc": check.is_arc,
                "witness": check.witness,
            });
            Ok(Outcome::new(arc.field(), a, body).failed_if(!check.is_arc))
        }
        Command::Project(a) => {
            let arc = load_arc(&a.input, false)?;
            let image = arc.project_from(&a.from.0)?;
            let k = arc.k() - a.from.0.len();
            let file = ArcFile { field: arc.field().spec().to_json(), k, vectors: image.iter().map(|v| v.codes()).collect() };
            if let Some(path) = &a.out {
                write_json(path, &file)?;
            }
            let check = is_arc(arc.field(), k, &image)?;
            Ok(Outcome::new(arc.field(), a, json!({ "is_arc": check.is_arc, "arc": file })))
        }
        Command::Conic(a) => {
            let arc = load_arc(&a.input, false)?;
            if arc.k() != 3 {
                bail!("conic fitting needs planar points (k = 3), got k = {}", arc.k());
            }
            let fit = conic_fit(arc.field(), arc.points())?;
            Ok(Outcome::new(arc.field(), a, json!({ "points": arc.len(), "fit": fit })).failed_if(!fit.exists()))
        }
        Command::Alpha(a) => {
            let arc = load_arc(&a.input, true)?;
            let alpha = solve_alpha(&arc, a.scope.as_ref().map(|s| &s.0[..]))?;
            let holdout = if a.verify_samples > 0 {
                Some(verify_lemma4(&arc, &alpha, Sampling::Holdout { count: a.verify_samples })?)
            } else {
                None
            };
            let failed = holdout.as_ref().is_some_and(|h| !h.all_zero());
            Ok(Outcome::new(arc.field(), a, json!({ "alpha": alpha, "holdout": holdout })).failed_if(failed))
        }
        Command::Verify(a) => verify(cli, a),
        Command::Pmatrix(a) => {
            let arc = load_arc(&a.input, true)?;
            let ctx = context(&arc, a)?;
            let pn = build_pn(&ctx);
            Ok(Outcome::new(arc.field(), a, json!({ "context": ctx, "P": matrix_body(&pn) })))
        }
        Command::Mdmatrix(a) => {
            let arc = load_arc(&a.input, true)?;
            let ctx = context(&arc, a)?;
            let d = match &a.d {
                Some(d) => d.0.clone(),
                None => ctx.d_subsets().into_iter().next().unwrap_or_default(),
            };
            let md = build_md(&ctx, &d)?;
            let psi = if ctx.n >= ctx.t { psi_from_md(&md, &ctx)? } else { None };
            Ok(Outcome::new(arc.field(), a, json!({ "context": ctx, "D": d, "M": matrix_body(&md), "psi": psi })))
        }
        Command::Qmatrix(a) => {
            let arc = load_arc(&a.input, true)?;
            let ctx = context(&arc, a)?;
            let qt = build_qt(&ctx)?;
            let psis = qt.psis.iter().map(|(d, p)| json!({ "D": d, "lambda": p.lambda })).collect_vec();
            Ok(Outcome::new(arc.field(), a, json!({ "context": ctx, "Q": matrix_body(&qt.matrix), "psis": psis })))
        }
        Command::Pipeline(a) => {
            let arc = load_arc(&a.input, true)?;
            let ctx = context(&arc, a)?;
            let alpha = solve_alpha(&arc, None)?;
            let report = pipeline_report(&ctx, &alpha)?;
            let failed = !report.no_failures();
            Ok(Outcome::new(arc.field(), a, report).failed_if(failed))
        }
        Command::Extend(a) => extend(a, opts),
        Command::Theorem(a) => {
            let spec = FieldSpec::from_order(a.q)?;
            let strategy = match a.strategy {
                StrategyArg::Prefix => SubsetStrategy::Prefix,
                StrategyArg::Random => SubsetStrategy::Random { seed: cli.seed, trials: a.trials },
            };
            let report = theorem_check(&spec, a.k, strategy, opts)?;
            if let Some(dir) = &a.certs {
                for (i, e) in report.entries.iter().enumerate() {
                    write_json(&dir.join(format!("theorem-q{}-k{}-{i}.json", a.q, a.k)), &e.cert)?;
                }
            }
            let table = Table {
                headers: vec!["subset", "target", "outcome", "nodes", "max_size", "root_candidates"],
                rows: report
                    .entries
                    .iter()
                    .map(|e| {
                        vec![
                            e.subset.iter().join(" "),
                            e.cert.target.to_string(),
                            serde_json::to_value(e.cert.outcome).expect("outcome").as_str().unwrap_or_default().to_string(),
                            e.cert.nodes.to_string(),
                            e.cert.max_size.to_string(),
                            e.cert.root_candidates.to_string(),
                        ]
                    })
                    .collect(),
            };
            let failed = !report.all_unreachable;
            let mut o = Outcome::new(&Field::new(spec), a, report).failed_if(failed);
            o.table = Some(table);
            Ok(o)
        }
        Command::Explore(a) => {
            let arc = load_arc(&a.input, true)?;
            let k = arc.k();
            let t = deficiency(&arc)?;
            let e_set = a.e_set.clone().map_or_else(|| (0..k + t - 1).collect(), |x| x.0);
            let aa = a.a.clone().map_or_else(|| e_set.iter().copied().take(k.saturating_sub(2)).collect(), |x| x.0);
            let n_max = match a.n_max {
                Some(n) => n,
                None => arc.len().checked_sub(k + t).ok_or_else(|| anyhow!("arc too small for a context"))?,
            };
            let rows = conjecture_explore(&arc, &e_set, &aa, a.n_min..=n_max)?;
            let table = Table {
                headers: vec!["n", "G", "rows", "cols", "rank", "weight_one_rows", "conic_projection"],
                rows: rows
                    .iter()
                    .map(|r| {
                        vec![
                            r.n.to_string(),
                            r.g.iter().join(" "),
                            r.rows.to_string(),
                            r.cols.to_string(),
                            r.rank.to_string(),
                            r.weight_one_rows.join(" "),
                            r.conic_projection.to_string(),
                        ]
                    })
                    .collect(),
            };
            let mut o = Outcome::new(arc.field(), a, json!({ "E": e_set, "A": aa, "rows": rows }));
            o.table = Some(table);
            Ok(o)
        }
    }
}

fn verify(cli: &Cli, a: &VerifyArgs) -> Result<Outcome> {
    let arc = load_arc(&a.ctx.input, true)?;
    let sampling = Sampling::auto(arc.len(), cli.seed, a.samples);
    match a.lemma {
        LemmaArg::Four => {
            let alpha = solve_alpha(&arc, None)?;
            if let (Some(e), Some(aa)) = (&a.ctx.e_set, &a.ctx.a) {
                let v = lemma4_lhs(&arc, &alpha, &e.0, &aa.0)?;
                return Ok(Outcome::new(arc.field(), a, json!({ "E": e, "A": aa, "value": v })).failed_if(!v.is_zero()));
            }
            let r = verify_lemma4(&arc, &alpha, sampling)?;
            let failed = !r.all_zero();
            Ok(Outcome::new(arc.field(), a, json!({ "residuals": r })).failed_if(failed))
        }
        LemmaArg::Five => {
            let alpha = solve_alpha(&arc, None)?;
            if let (Some(e_set), Some(e), Some(d)) = (&a.ctx.e_set, a.ctx.e, &a.ctx.d) {
                let v = lemma5_lhs(&arc, &alpha, &e_set.0, e, &d.0)?;
                let w = lemma5_via_lemma4(&arc, &alpha, &e_set.0, e, &d.0)?;
                let body = json!({ "E": e_set, "e": e, "D": d, "value": v, "recombined": w });
                return Ok(Outcome::new(arc.field(), a, body).failed_if(!v.is_zero() || v != w));
            }
            let r = verify_lemma5(&arc, &alpha, sampling)?;
            let failed = !r.all_zero();
            Ok(Outcome::new(arc.field(), a, json!({ "residuals": r })).failed_if(failed))
        }
        lemma => {
            let ctx = context(&arc, &a.ctx)?;
            let alpha = solve_alpha(&arc, None)?;
            let report = pipeline_report(&ctx, &alpha)?;
            let names: &[&str] = match lemma {
                LemmaArg::Nowone => &["nowone"],
                LemmaArg::Matrixmd => &["projecttoplane", "matrixmd"],
                LemmaArg::Thepsis => &["thepsis"],
                _ => &["projpsi-vanishing", "projpsi-nonvanishing"],
            };
            let blocks = report.blocks.into_iter().filter(|b| names.contains(&b.lemma.as_str())).collect_vec();
            let failed = blocks.iter().any(|b| b.status == Status::Fails);
            Ok(Outcome::new(arc.field(), a, json!({ "context": ctx, "blocks": blocks })).failed_if(failed))
        }
    }
}

fn extend(a: &ExtendArgs, opts: SearchOptions) -> Result<Outcome> {
    let arc = load_arc(&a.input, true)?;
    if a.target.is_none() && !a.all {
        bail!("extend needs --target or --all");
    }
    let mut body = serde_json::Map::new();
    if a.all {
        let pts = extension_points(&arc)?;
        body.insert("extension_points".into(), json!(pts.iter().map(|p| p.vector().codes()).collect_vec()));
    }
    let mut failed = false;
    if let Some(target) = a.target {
        let path = a.certs.as_ref().map(|dir| {
            let stem = a.input.file_stem().map_or_else(|| "arc".into(), |s| s.to_string_lossy().into_owned());
            dir.join(format!("{stem}-target{target}.json"))
        });
        match path.as_ref().filter(|p| a.resume && p.exists()) {
            Some(p) => {
                let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                let cert: SearchCert = serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
                if cert.base != arc.to_file() || cert.target != target {
                    bail!("{} was written for a different base or target", p.display());
                }
                let check = verify_cert(&cert)?;
                failed = !check.consistent;
                body.insert("resumed".into(), json!(true));
                body.insert("check".into(), json!(check));
                body.insert("cert".into(), json!(cert));
            }
            None => {
                let cert = complete_search(&arc, target, opts)?;
                if let Some(p) = &path {
                    write_json(p, &cert)?;
                }
                body.insert("resumed".into(), json!(false));
                body.insert("cert".into(), json!(cert));
            }
        }
    }
    Ok(Outcome::new(arc.field(), a, Value::Object(body)).failed_if(failed))
}

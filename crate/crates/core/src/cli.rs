//! Command-line front end.
//!
//! Every command writes a deterministic document to stdout (or `--output`):
//! JSON run reports for `solve`, `verify`, `lowerbound` and `bench`, an
//! `.elect` profile for `gen`, and text or CSV for `tables`. Timing is only
//! included with `--timing`, so identical arguments give identical bytes
//! regardless of `--jobs`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::adversarial::{cyclic_instance, verify_lower_bound, CyclicInstanceSpec};
use crate::analytics::{self, BoundTable, GridSpec};
use crate::builder::{self, BuildOptions, Strategy};
use crate::election::{undominance_check, Committee, Election, UndominanceReport, DEFAULT_NODE_LIMIT};
use crate::equilibrium::{solve, Market, SolverOptions};
use crate::error::{Error, Result};
use crate::income::IncomeDistribution;
use crate::ratio::Alpha;
use crate::seed;

/// Environment variable read when `--jobs` is absent.
pub const JOBS_ENV: &str = "UNDOMINATED_JOBS";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "undominated", version, about = "Build and verify (t, α)-undominated committees")]
pub struct Cli {
    /// Worker threads for enumerations and grids (default: $UNDOMINATED_JOBS, else all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Run seed; every randomized component derives its own stream from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Include wall-clock timing in reports.
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an election profile.
    Gen(GenArgs),
    /// Build a committee and verify it.
    Solve(SolveArgs),
    /// Verify a given committee.
    Verify(VerifyArgs),
    /// Print the analytic bound tables.
    Tables(TablesArgs),
    /// Certify the cyclic lower-bound instance.
    Lowerbound(LowerboundArgs),
    /// Run the solver and verifier on generated profiles.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Cyclic lower-bound profile; parameters `k=K ell=L`.
    #[arg(long, conflicts_with = "random", required_unless_present = "random")]
    pub adversarial: bool,
    /// Impartial-culture profile; parameters `n=N m=M [seed=S]`.
    #[arg(long)]
    pub random: bool,
    /// `key=value` parameters.
    #[arg(value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    /// Write JSON instead of `.elect`.
    #[arg(long)]
    pub json: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Election file (`.elect` or JSON).
    pub input: PathBuf,
    #[arg(long)]
    pub t: usize,
    /// Threshold ratio, e.g. `1/2` or `0.39`.
    #[arg(long)]
    pub alpha: String,
    /// Sample count for t = 1.
    #[arg(long)]
    pub k: Option<usize>,
    /// Income threshold β for t = 1 (default: the optimum for k).
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Decay factor; selects the iterative construction.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Budget; selects the one-shot construction.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,
    /// Rounding draws before falling back.
    #[arg(long, default_value_t = 256)]
    pub samples: u32,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub input: PathBuf,
    /// Comma-separated candidate indices, e.g. `0,1`.
    #[arg(long)]
    pub committee: String,
    #[arg(long)]
    pub t: usize,
    #[arg(long)]
    pub alpha: String,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Which {
    AlphaK,
    Delta,
    Eta,
    Omega,
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    #[arg(long, value_enum)]
    pub which: Which,
    #[arg(long, default_value_t = 8)]
    pub k_max: u32,
    #[arg(long, default_value_t = 8)]
    pub t_max: u32,
    /// Largest γ of the ω grid.
    #[arg(long, default_value_t = 5.0)]
    pub gamma_max: f64,
    #[arg(long)]
    pub csv: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LowerboundArgs {
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 5)]
    pub ell: usize,
    #[arg(long, default_value_t = 1)]
    pub t: usize,
    #[arg(long, default_value_t = DEFAULT_NODE_LIMIT)]
    pub node_limit: u64,
    /// Omit the per-committee witness map.
    #[arg(long)]
    pub summary: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 20)]
    pub count: u64,
    /// Largest voter count; each instance draws `n` in `1..=n`.
    #[arg(long, default_value_t = 30)]
    pub n: usize,
    /// Largest candidate count.
    #[arg(long, default_value_t = 10)]
    pub m: usize,
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Structured record of one run.
#[derive(Debug, Serialize)]
pub struct RunReport {
    /// Arguments after the program name, without `--jobs`.
    pub command: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_sha256: Option<String>,
    pub seed: u64,
    pub parameters: Value,
    /// `pass`, `fail` or `nonconvergent`.
    pub outcome: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub committee: Option<Committee>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<UndominanceReport>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub certificate: Value,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub details: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

struct Ctx {
    command: Vec<String>,
    seed: u64,
    timing: bool,
    start: Instant,
}

impl Ctx {
    fn report(&self, parameters: Value) -> RunReport {
        RunReport {
            command: self.command.clone(),
            input_sha256: None,
            seed: self.seed,
            parameters,
            outcome: String::new(),
            committee: None,
            verification: None,
            certificate: Value::Null,
            details: Value::Null,
            timing_ms: None,
        }
    }

    fn finish(&self, mut r: RunReport) -> RunReport {
        if self.timing {
            r.timing_ms = Some(self.start.elapsed().as_secs_f64() * 1e3);
        }
        r
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_PASS
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let jobs = match cli.jobs {
        Some(j) => Some(j),
        None => match std::env::var(JOBS_ENV) {
            Ok(v) => match v.trim().parse::<usize>() {
                Ok(j) => Some(j),
                Err(_) => {
                    let _ = writeln!(err, "error: {JOBS_ENV}={v:?} is not a thread count");
                    return EXIT_USAGE;
                }
            },
            Err(_) => None,
        },
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            let _ = writeln!(err, "error: --jobs must be at least 1");
            return EXIT_USAGE;
        }
        builder = builder.num_threads(j);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start worker pool: {e}");
            return EXIT_RESOURCE;
        }
    };
    let ctx = Ctx { command: echo(&args), seed: cli.seed, timing: cli.timing, start: Instant::now() };
    let mut buf: Vec<u8> = Vec::new();
    let result = pool.install(|| dispatch(&cli.command, &ctx, &mut buf));
    if let Err(e) = out.write_all(&buf).and_then(|_| out.flush()) {
        let _ = writeln!(err, "error: {e}");
        return EXIT_USAGE;
    }
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit code for an error that aborted a command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Input(_) | Error::Parse { .. } | Error::Io(_) | Error::Json(_) => EXIT_USAGE,
        Error::NonConvergence { .. } => EXIT_NONCONVERGENCE,
        Error::Resource(_) => EXIT_RESOURCE,
    }
}

fn echo(args: &[OsString]) -> Vec<String> {
    let mut out = Vec::new();
    let mut it = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned());
    while let Some(a) = it.next() {
        if a == "--jobs" {
            it.next();
        } else if !a.starts_with("--jobs=") {
            out.push(a);
        }
    }
    out
}

fn dispatch(cmd: &Command, ctx: &Ctx, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Gen(a) => cmd_gen(a, ctx, out),
        Command::Solve(a) => cmd_solve(a, ctx, out),
        Command::Verify(a) => cmd_verify(a, ctx, out),
        Command::Tables(a) => cmd_tables(a, out),
        Command::Lowerbound(a) => cmd_lowerbound(a, ctx, out),
        Command::Bench(a) => cmd_bench(a, ctx, out),
    }
}

fn emit(text: &str, output: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_report(r: &RunReport, output: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let mut text = serde_json::to_string_pretty(r)?;
    text.push('\n');
    emit(&text, output, out)
}

fn read_input(path: &Path) -> Result<(Election, String)> {
    let bytes = std::fs::read(path)?;
    let digest = format!("{:x}", Sha256::digest(&bytes));
    let text = String::from_utf8(bytes).map_err(|_| Error::input(format!("{} is not UTF-8", path.display())))?;
    Ok((Election::parse(&text)?, digest))
}

fn key_values(params: &[String]) -> Result<Vec<(String, String)>> {
    params
        .iter()
        .map(|p| {
            p.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::input(format!("expected key=value, got {p:?}")))
        })
        .collect()
}

fn take<T: std::str::FromStr>(kv: &[(String, String)], key: &str) -> Result<Option<T>> {
    match kv.iter().find(|(k, _)| k == key) {
        None => Ok(None),
        Some((_, v)) => v.parse().map(Some).map_err(|_| Error::input(format!("bad value for {key}: {v:?}"))),
    }
}

fn require<T: std::str::FromStr>(kv: &[(String, String)], key: &str) -> Result<T> {
    take(kv, key)?.ok_or_else(|| Error::input(format!("missing parameter {key}=…")))
}

fn cmd_gen(a: &GenArgs, ctx: &Ctx, out: &mut dyn Write) -> Result<i32> {
    let kv = key_values(&a.params)?;
    let allowed: &[&str] = if a.adversarial { &["k", "ell"] } else { &["n", "m", "seed"] };
    if let Some((k, _)) = kv.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
        return Err(Error::input(format!("unknown parameter {k:?}")));
    }
    let e = if a.adversarial {
        cyclic_instance(CyclicInstanceSpec::new(require(&kv, "k")?, require(&kv, "ell")?)?)?
    } else {
        let n: usize = require(&kv, "n")?;
        let m: usize = require(&kv, "m")?;
        if n == 0 || m == 0 {
            return Err(Error::input("n and m must be positive"));
        }
        let s: u64 = take(&kv, "seed")?.unwrap_or(ctx.seed);
        Election::impartial_culture(n, m, seed::derive(s, "gen/random", 0))?
    };
    let text = if a.json {
        let mut t = serde_json::to_string(&e)?;
        t.push('\n');
        t
    } else {
        e.to_elect()
    };
    emit(&text, a.output.as_deref(), out)?;
    Ok(EXIT_PASS)
}

fn parse_alpha(s: &str) -> Result<Alpha> {
    s.parse()
}

/// Resolves the construction from explicit flags, falling back to the
/// analytic parameter choice.
fn resolve_strategy(a: &SolveArgs, alpha: Alpha) -> Result<Strategy> {
    if a.t == 1 {
        if a.gamma.is_some() || a.tau.is_some() || a.budget.is_some() {
            return Err(Error::input("--gamma, --tau and --budget need t ≥ 2"));
        }
        return match a.k {
            Some(0) => Err(Error::input("--k must be at least 1")),
            Some(k) => {
                let beta = match a.beta {
                    Some(b) => b,
                    None if k == 1 => 0.5,
                    None => analytics::alpha_k(k as u32)?.0,
                };
                Ok(Strategy::T1 { k, beta })
            }
            None => match builder::choose_params(1, alpha, &GridSpec::default())? {
                Strategy::T1 { k, beta } => Ok(Strategy::T1 { k, beta: a.beta.unwrap_or(beta) }),
                s => Ok(s),
            },
        };
    }
    if a.k.is_some() || a.beta.is_some() {
        return Err(Error::input("--k and --beta apply to t = 1 only"));
    }
    match (a.budget, a.tau) {
        (Some(_), Some(_)) => Err(Error::input("--budget and --tau select different constructions")),
        (Some(budget), None) => {
            let gamma = a.gamma.ok_or_else(|| Error::input("--budget needs --gamma"))?;
            Ok(Strategy::OneShot { gamma, budget })
        }
        (None, Some(tau)) => {
            let gamma = a.gamma.ok_or_else(|| Error::input("--tau needs --gamma"))?;
            let size_bound = analytics::s1_objective(alpha.value(), a.t as u32, gamma, tau).unwrap_or(f64::INFINITY);
            Ok(Strategy::Iterative { gamma, tau, size_bound })
        }
        (None, None) => {
            if a.gamma.is_some() {
                return Err(Error::input("--gamma needs --budget or --tau"));
            }
            builder::choose_params(a.t, alpha, &GridSpec::default())
        }
    }
}

fn cmd_solve(a: &SolveArgs, ctx: &Ctx, out: &mut dyn Write) -> Result<i32> {
    let alpha = parse_alpha(&a.alpha)?;
    if a.t < 1 {
        return Err(Error::input("--t must be at least 1"));
    }
    let (e, digest) = read_input(&a.input)?;
    if a.t > e.m() {
        return Err(Error::input(format!("t = {} exceeds the {} candidates", a.t, e.m())));
    }
    let strategy = resolve_strategy(a, alpha)?;
    let opts = BuildOptions { samples: a.samples, seed: ctx.seed, ..BuildOptions::default() };
    let full = strategy.size_estimate() >= e.m() as f64;
    let effective = alpha.inflate(crate::ratio::rational_of_f64(a.epsilon)?);
    let mut r = ctx.report(json!({
        "t": a.t,
        "alpha": alpha,
        "effective_alpha": effective,
        "epsilon": a.epsilon,
        "strategy": strategy,
        "full_committee": full,
        "build": opts,
    }));
    r.input_sha256 = Some(digest);

    let built: Result<(Committee, Value, Value, bool)> = if full {
        Ok((Committee::full(e.m()), Value::Null, Value::Null, false))
    } else {
        match strategy {
            Strategy::T1 { k, beta } => builder::build_t1(&e, k, beta, a.epsilon, &opts).map(|o| {
                let cert = serde_json::to_value(&o.certificate).unwrap_or(Value::Null);
                (o.committee.clone(), cert, serde_json::to_value(&o).unwrap_or(Value::Null), false)
            }),
            Strategy::OneShot { gamma, budget } => {
                builder::build_one_shot(&e, a.t, alpha, gamma, budget, a.epsilon, &opts).map(|o| {
                    let cert = serde_json::to_value(&o.certificate).unwrap_or(Value::Null);
                    (o.committee.clone(), cert, serde_json::to_value(&o).unwrap_or(Value::Null), false)
                })
            }
            Strategy::Iterative { gamma, tau, .. } => {
                builder::build_iterative(&e, a.t, alpha, gamma, tau, a.epsilon, &opts).map(|o| {
                    let certs: Vec<_> = o.trace.rounds.iter().map(|r| r.certificate.clone()).collect();
                    let aborted = o.trace.aborted.is_some();
                    (o.committee.clone(), json!(certs), serde_json::to_value(&o).unwrap_or(Value::Null), aborted)
                })
            }
        }
    };
    match built {
        Ok((committee, cert, details, aborted)) => {
            let verification = undominance_check(&e, &committee, a.t, alpha)?;
            let pass = verification.pass;
            r.outcome = if aborted { "nonconvergent" } else if pass { "pass" } else { "fail" }.into();
            r.committee = Some(committee);
            r.verification = Some(verification);
            r.certificate = cert;
            r.details = details;
            emit_report(&ctx.finish(r), a.output.as_deref(), out)?;
            Ok(if aborted {
                EXIT_NONCONVERGENCE
            } else if pass {
                EXIT_PASS
            } else {
                EXIT_FAIL
            })
        }
        Err(Error::NonConvergence { reason, certificate }) => {
            r.outcome = "nonconvergent".into();
            r.certificate = serde_json::to_value(&*certificate)?;
            r.details = json!({ "reason": reason });
            emit_report(&ctx.finish(r), a.output.as_deref(), out)?;
            Ok(EXIT_NONCONVERGENCE)
        }
        Err(err) => Err(err),
    }
}

fn cmd_verify(a: &VerifyArgs, ctx: &Ctx, out: &mut dyn Write) -> Result<i32> {
    let alpha = parse_alpha(&a.alpha)?;
    let (e, digest) = read_input(&a.input)?;
    let committee = Committee::parse(&a.committee)?;
    let verification = undominance_check(&e, &committee, a.t, alpha)?;
    let pass = verification.pass;
    let mut r = ctx.report(json!({ "t": a.t, "alpha": alpha }));
    r.input_sha256 = Some(digest);
    r.outcome = if pass { "pass" } else { "fail" }.into();
    r.committee = Some(committee);
    r.verification = Some(verification);
    emit_report(&ctx.finish(r), a.output.as_deref(), out)?;
    Ok(if pass { EXIT_PASS } else { EXIT_FAIL })
}

fn render_table(header: &[&str], rows: &[Vec<String>], csv: bool) -> String {
    let mut s = String::new();
    if csv {
        s.push_str(&header.join(","));
        s.push('\n');
        for row in rows {
            s.push_str(&row.join(","));
            s.push('\n');
        }
        return s;
    }
    let widths: Vec<usize> = (0..header.len())
        .map(|c| rows.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(0))
        .collect();
    let line = |cells: Vec<&str>| {
        let parts: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
        parts.join("  ").trim_end().to_string() + "\n"
    };
    s.push_str(&line(header.to_vec()));
    for row in rows {
        s.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    s
}

/// Text or CSV rendering of one bound table.
pub fn table_text(which: Which, k_max: u32, t_max: u32, gamma_max: f64, csv: bool) -> Result<String> {
    let grid = GridSpec::default();
    Ok(match which {
        Which::AlphaK => {
            let table = BoundTable::alpha_k(k_max)?;
            let rows: Vec<Vec<String>> = table
                .rows
                .iter()
                .map(|&(k, a)| {
                    let beta = analytics::alpha_k(k as u32).map(|b| b.0).unwrap_or(f64::NAN);
                    vec![format!("{k}"), format!("{beta:.6}"), format!("{a:.6}")]
                })
                .collect();
            render_table(&["k", "beta", "alpha"], &rows, csv)
        }
        Which::Delta => {
            let rows = analytics::delta_rows(t_max, &grid)?
                .into_iter()
                .map(|(t, d)| {
                    vec![
                        t.to_string(),
                        format!("{:.3}", d.value),
                        format!("{:.3}", d.one_shot_max),
                        format!("{:.4}", d.one_shot_alpha),
                        format!("{:.3}", d.iterative_envelope),
                        format!("{:.3}", d.max_min),
                    ]
                })
                .collect::<Vec<_>>();
            render_table(&["t", "delta", "one_shot", "at_alpha", "envelope", "max_min"], &rows, csv)
        }
        Which::Eta => {
            let table = BoundTable::eta(t_max, &grid)?;
            let rows: Vec<Vec<String>> =
                table.rows.iter().map(|&(t, v)| vec![format!("{t}"), format!("{v:.4}")]).collect();
            render_table(&["t", "eta"], &rows, csv)
        }
        Which::Omega => {
            if t_max < 2 {
                return Err(Error::input("--t-max must be at least 2 for ω"));
            }
            let cols: Vec<BoundTable> =
                (2..=t_max).map(|t| BoundTable::omega(t, gamma_max)).collect::<Result<_>>()?;
            let mut header = vec!["gamma".to_string()];
            header.extend((2..=t_max).map(|t| format!("t={t}")));
            let rows: Vec<Vec<String>> = (0..cols[0].rows.len())
                .map(|i| {
                    let mut row = vec![format!("{:.1}", cols[0].rows[i].0)];
                    row.extend(cols.iter().map(|c| format!("{:.6}", c.rows[i].1)));
                    row
                })
                .collect();
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            render_table(&header, &rows, csv)
        }
    })
}

fn cmd_tables(a: &TablesArgs, out: &mut dyn Write) -> Result<i32> {
    if a.k_max < 1 || a.t_max < 2 {
        return Err(Error::input("--k-max must be at least 1 and --t-max at least 2"));
    }
    let text = table_text(a.which, a.k_max, a.t_max, a.gamma_max, a.csv)?;
    emit(&text, a.output.as_deref(), out)?;
    Ok(EXIT_PASS)
}

fn cmd_lowerbound(a: &LowerboundArgs, ctx: &Ctx, out: &mut dyn Write) -> Result<i32> {
    let spec = CyclicInstanceSpec::new(a.k, a.ell)?;
    let cert = verify_lower_bound(spec, a.t, a.node_limit)?;
    let mut r = ctx.report(json!({ "k": a.k, "ell": a.ell, "t": a.t, "node_limit": a.node_limit }));
    r.outcome = if cert.holds { "pass" } else { "fail" }.into();
    r.details = json!({
        "committees": cert.witnesses.len(),
        "n": cert.n,
        "worst_dissent": cert.worst_dissent,
        "worst_fraction": format!("{}", cert.worst_fraction()),
        "bound": format!("{}/{}", cert.bound.0, cert.bound.1),
        "holds": cert.holds,
    });
    if !a.summary {
        r.details["witnesses"] = serde_json::to_value(&cert.witnesses)?;
    }
    emit_report(&ctx.finish(r), a.output.as_deref(), out)?;
    Ok(if cert.holds { EXIT_PASS } else { EXIT_FAIL })
}

fn cmd_bench(a: &BenchArgs, ctx: &Ctx, out: &mut dyn Write) -> Result<i32> {
    if a.n == 0 || a.m == 0 {
        return Err(Error::input("--n and --m must be positive"));
    }
    let d = IncomeDistribution::threshold(a.beta, 1e-3)?;
    let mut rows = Vec::new();
    let mut certified = 0;
    let mut solve_ms = 0.0;
    let mut verify_ms = 0.0;
    for i in 0..a.count {
        let n = 1 + (seed::derive(ctx.seed, "bench/n", i) % a.n as u64) as usize;
        let m = 1 + (seed::derive(ctx.seed, "bench/m", i) % a.m as u64) as usize;
        let e = Election::impartial_culture(n, m, seed::derive(ctx.seed, "bench/profile", i))?;
        let opts = SolverOptions { seed: seed::derive(ctx.seed, "bench/solver", i), ..SolverOptions::default() };
        let t0 = Instant::now();
        let eq = solve(&e, &d, Market::plain(1.0), &opts)?;
        solve_ms += t0.elapsed().as_secs_f64() * 1e3;
        let t1 = Instant::now();
        let top = Committee::new(vec![e.ranking(0)[0]]);
        let check = undominance_check(&e, &top, 1, Alpha::new(1, 2)?)?;
        verify_ms += t1.elapsed().as_secs_f64() * 1e3;
        certified += eq.certificate.converged as u64;
        rows.push(json!({
            "n": n,
            "m": m,
            "converged": eq.certificate.converged,
            "max_residual": eq.certificate.max_residual(),
            "iterations": eq.certificate.iterations,
            "first_choice_dissent": check.max_dissent,
        }));
    }
    let mut r = ctx.report(json!({ "count": a.count, "n_max": a.n, "m_max": a.m, "beta": a.beta }));
    r.outcome = "pass".into();
    r.details = json!({ "certified": certified, "instances": rows });
    if ctx.timing {
        r.details["solve_ms"] = json!(solve_ms);
        r.details["verify_ms"] = json!(verify_ms);
    }
    emit_report(&ctx.finish(r), a.output.as_deref(), out)?;
    Ok(EXIT_PASS)
}

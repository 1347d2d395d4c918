//! `qrhc`: verification campaigns, NICD sweeps and counterexample search
//! from the command line.
//!
//! Every run writes one JSON document (or a CSV table) to stdout or `--out`.
//! Exit status is 0 when every report passes, 1 on a verification failure
//! and 2 on usage or library errors.

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use qrhc::campaign::{run_campaign, sample_positive, CampaignConfig};
use qrhc::cube::{majority_nicd, nicd_probability, CubeFunction};
use qrhc::functional::estimate_lsi2_constant;
use qrhc::mixing::{mixing_bound_corollary, verify_mixing, SubspaceInstance};
use qrhc::nicd::{entangled_basis_sweep, BasisFamily, MeasurementFamily, SweepRow};
use qrhc::random::rng_from_seed;
use qrhc::report::{CampaignSummary, VerificationReport};
use qrhc::search::{first_violation, sharpness_profile, SEARCHABLE};
use qrhc::verify::{
    forward_hc_gamma_threshold, reverse_hc_gamma_threshold, reverse_hc_schedule,
    strong_reverse_holder_gamma_threshold, verify_norm_derivative, InequalityId,
};
use qrhc::LindbladGenerator;

const SPEC_VERSION: &str = "1.0";

#[derive(Parser, Debug)]
#[command(name = "qrhc", version, about = "Numerical checks of quantum reverse hypercontractivity")]
struct Cli {
    /// Base seed; trial i uses seed + i.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output path (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Omit the timestamp so repeated runs are byte-identical.
    #[arg(long, global = true)]
    no_timestamp: bool,
    /// Output format; defaults to csv for a `.csv` output path, json otherwise.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Randomized campaign for one inequality.
    Verify(VerifyArgs),
    /// Lower bound on the 2-log-Sobolev constant of the depolarizing generator.
    Lsi(LsiArgs),
    /// Closed-form norm derivative against central differences.
    Derivative(DerivativeArgs),
    /// Exact mixing value against the closed-form lower bounds.
    Mix(MixArgs),
    /// Correlation-distillation sweep table.
    Nicd(NicdArgs),
    /// Sharpness profile: minimal slack over a grid of noise rates.
    Search(SearchArgs),
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    #[arg(long, value_parser = parse_ineq)]
    #[serde(serialize_with = "ser_ineq")]
    ineq: InequalityId,
    #[arg(long, allow_negative_numbers = true)]
    p: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    q: Option<f64>,
    /// Noise rate; defaults to the boundary of the hypothesis.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 1)]
    qubits: usize,
    /// Operator dimension for the dimension-free inequalities.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Relative tolerance factor.
    #[arg(long)]
    tol: Option<f64>,
    /// Log-Sobolev constant for the p-LSI check.
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
}

#[derive(Args, Debug, Serialize)]
struct LsiArgs {
    #[arg(long, default_value_t = 1)]
    qubits: usize,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
}

#[derive(Args, Debug, Serialize)]
struct DerivativeArgs {
    #[arg(long, default_value_t = 1)]
    qubits: usize,
    #[arg(long, default_value_t = 1e-4)]
    h: f64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Relative agreement required between the two derivatives.
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
}

#[derive(Args, Debug, Serialize)]
struct MixArgs {
    #[arg(long, default_value_t = 2)]
    qubits: usize,
    /// Target subspace fraction; the dimension is rounded to an integer.
    #[arg(long, default_value_t = 0.5)]
    sigma: f64,
    /// `τ(M) = σ^α`.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.3)]
    gamma: f64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum BasisArg {
    Product,
    Ghz,
    Haar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum MeasureArg {
    Majority,
    Dictator,
    RandomDiag,
}

#[derive(Args, Debug, Serialize)]
struct NicdArgs {
    #[arg(long, value_enum, default_value_t = BasisArg::Product)]
    basis: BasisArg,
    #[arg(long, default_value_t = 3)]
    qubits: usize,
    /// Player counts, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<u32>,
    #[arg(long)]
    gamma: f64,
    /// Constant of the `(e^{c√ln k}/k)^{1/γ²−1}` envelope column.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, value_enum, default_value_t = MeasureArg::Majority)]
    measure: MeasureArg,
}

#[derive(Args, Debug, Serialize)]
struct SearchArgs {
    #[arg(long, value_parser = parse_ineq)]
    #[serde(serialize_with = "ser_ineq")]
    ineq: InequalityId,
    #[arg(long, allow_negative_numbers = true)]
    p: f64,
    #[arg(long, allow_negative_numbers = true)]
    q: f64,
    /// `a:b:steps`, `steps` equally spaced points including both ends.
    #[arg(long, value_parser = parse_grid)]
    gamma_grid: Grid,
    /// Evaluations per grid point.
    #[arg(long, default_value_t = 2000)]
    budget: usize,
    #[arg(long, default_value_t = 1)]
    qubits: usize,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
}

fn parse_ineq(s: &str) -> Result<InequalityId, String> {
    s.parse::<InequalityId>().map_err(|_| {
        let known: Vec<&str> = InequalityId::ALL.iter().map(|id| id.as_str()).collect();
        format!("unknown inequality `{s}` (expected one of {})", known.join(", "))
    })
}

fn ser_ineq<S: serde::Serializer>(id: &InequalityId, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(id.as_str())
}

/// Parsed `a:b:steps`.
#[derive(Debug, Clone, Serialize)]
#[serde(transparent)]
struct Grid(Vec<f64>);

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts[..] else {
        return Err(format!("expected a:b:steps, got `{s}`"));
    };
    let a: f64 = a.parse().map_err(|e| format!("bad grid start `{a}`: {e}"))?;
    let b: f64 = b.parse().map_err(|e| format!("bad grid end `{b}`: {e}"))?;
    let n: usize = n.parse().map_err(|e| format!("bad step count `{n}`: {e}"))?;
    if n == 0 || !a.is_finite() || !b.is_finite() || b < a {
        return Err(format!("grid `{s}` needs a ≤ b and at least one step"));
    }
    if n == 1 {
        return Ok(Grid(vec![a]));
    }
    Ok(Grid((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()))
}

/// Everything a subcommand produces before rendering.
struct Outcome {
    command: &'static str,
    params: Value,
    reports: Vec<VerificationReport>,
    /// Extra top-level members of the JSON document.
    extra: Vec<(&'static str, Value)>,
    /// Rows for the CSV rendering, when the command has a table of its own.
    table: Option<Vec<SweepRow>>,
    /// Overrides the pass/fail decision of the summary.
    failed: Option<bool>,
}

impl Outcome {
    fn new(command: &'static str, params: Value, reports: Vec<VerificationReport>) -> Self {
        Self {
            command,
            params,
            reports,
            extra: Vec::new(),
            table: None,
            failed: None,
        }
    }
}

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

fn params_of<T: Serialize>(args: &T, seed: u64) -> CliResult<Value> {
    let mut v = serde_json::to_value(args)?;
    if let Value::Object(m) = &mut v {
        m.insert("seed".into(), json!(seed));
    }
    Ok(v)
}

fn cmd_verify(a: &VerifyArgs, seed: u64) -> CliResult<Outcome> {
    let cfg = CampaignConfig {
        p: a.p,
        q: a.q,
        gamma: a.gamma,
        qubits: a.qubits,
        dim: a.dim,
        trials: a.trials,
        seed,
        alpha: a.alpha,
        rel_tol: a.tol,
        ..CampaignConfig::default()
    };
    let reports = run_campaign(a.ineq, &cfg)?;
    Ok(Outcome::new("verify", params_of(a, seed)?, reports))
}

fn cmd_lsi(a: &LsiArgs, seed: u64) -> CliResult<Outcome> {
    let l = LindbladGenerator::depolarizing_site_sum(a.qubits)?;
    let est = estimate_lsi2_constant(&l, a.restarts, seed)?;
    let r = VerificationReport::new("lsi2-constant", est.alpha_lower_bound, 2.0, 2.0 - est.alpha_lower_bound)
        .with_relative_tol(1e-8)
        .with_param("qubits", a.qubits);
    let mut out = Outcome::new("lsi", params_of(a, seed)?, vec![r]);
    out.extra.push(("estimate", serde_json::to_value(&est)?));
    Ok(out)
}

fn cmd_derivative(a: &DerivativeArgs, seed: u64) -> CliResult<Outcome> {
    let l = LindbladGenerator::depolarizing_site_sum(a.qubits)?;
    let d = l.dim();
    let reports: qrhc::Result<Vec<VerificationReport>> = (0..a.trials)
        .into_par_iter()
        .map(|i| {
            let s = seed.wrapping_add(i as u64);
            let mut rng = rng_from_seed(s);
            let f = sample_positive(d, true, &mut rng)?;
            let p = rng.random_range(0.1..=0.9);
            let q0 = rng.random_range(-3.0..p);
            let schedule = reverse_hc_schedule(2.0, q0);
            Ok(verify_norm_derivative(&l, &f, p, &schedule, a.h, a.tol)?
                .with_num("q0", q0)
                .with_param("trial", i)
                .with_param("seed", s))
        })
        .collect();
    Ok(Outcome::new("derivative", params_of(a, seed)?, reports?))
}

fn cmd_mix(a: &MixArgs, seed: u64) -> CliResult<Outcome> {
    let d = 1usize << a.qubits;
    let dim_s = (a.sigma * d as f64).round() as usize;
    if dim_s == 0 || dim_s > d {
        return Err(format!("σ = {} rounds to subspace dimension {dim_s}, outside 1..={d}", a.sigma).into());
    }
    let sigma = dim_s as f64 / d as f64;
    let tau_m = sigma.powf(a.alpha);
    // M ⊥ S needs room outside S.
    let orthogonal_ok = tau_m <= 1.0 - sigma + 1e-12;
    let corollary = mixing_bound_corollary(sigma, a.alpha, a.gamma)?;
    let per_trial: qrhc::Result<Vec<Vec<VerificationReport>>> = (0..a.trials)
        .into_par_iter()
        .map(|i| {
            let s = seed.wrapping_add(i as u64);
            let mut rng = rng_from_seed(s);
            let orthogonal = orthogonal_ok && i % 3 == 2;
            let inst = SubspaceInstance::random(a.qubits, dim_s, tau_m, a.gamma, orthogonal, &mut rng)?;
            let thm = verify_mixing(&inst)?;
            let lhs = thm.lhs;
            let tag = |r: VerificationReport| {
                r.with_param("trial", i)
                    .with_param("seed", s)
                    .with_param("orthogonal", orthogonal)
            };
            let cor = VerificationReport::new("mixing-corollary", lhs, corollary, lhs - corollary)
                .with_num("sigma", sigma)
                .with_num("alpha", a.alpha)
                .with_num("gamma", a.gamma);
            Ok(vec![tag(thm), tag(cor)])
        })
        .collect();
    let reports = per_trial?.into_iter().flatten().collect();
    let mut out = Outcome::new("mix", params_of(a, seed)?, reports);
    out.extra.push(("subspace_dim", json!(dim_s)));
    out.extra.push(("corollary_bound", json!(corollary)));
    Ok(out)
}

fn cmd_nicd(a: &NicdArgs, seed: u64) -> CliResult<Outcome> {
    let basis = match a.basis {
        BasisArg::Product => BasisFamily::Product,
        BasisArg::Ghz => BasisFamily::Ghz,
        BasisArg::Haar => BasisFamily::Haar { seed },
    };
    let measure = match a.measure {
        MeasureArg::Majority => MeasurementFamily::Majority,
        MeasureArg::Dictator => MeasurementFamily::Dictator,
        MeasureArg::RandomDiag => MeasurementFamily::RandomDiag { seed },
    };
    let rows = entangled_basis_sweep(a.qubits, &a.k, a.gamma, &[basis], &[measure], a.c)?;

    // In the product basis the game is classical; check it against the cube.
    let mut reports = Vec::new();
    if basis == BasisFamily::Product {
        let indicator = CubeFunction::new(measure.weights(a.qubits))?;
        for row in &rows {
            let classical = if measure == MeasurementFamily::Majority && a.qubits % 2 == 1 {
                majority_nicd(a.qubits, row.k, a.gamma)?
            } else {
                nicd_probability(&indicator, row.k, a.gamma)?
            };
            let gap = (row.p_all_m - classical).abs();
            reports.push(
                VerificationReport::new("nicd-classical-equivalence", row.p_all_m, classical, -gap)
                    .with_relative_tol(1e-12)
                    .with_param("k", row.k)
                    .with_param("qubits", a.qubits)
                    .with_num("gamma", a.gamma),
            );
        }
    }
    let mut out = Outcome::new("nicd", params_of(a, seed)?, reports);
    out.extra.push(("rows", serde_json::to_value(&rows)?));
    out.table = Some(rows);
    Ok(out)
}

fn cmd_search(a: &SearchArgs, seed: u64) -> CliResult<Outcome> {
    if !SEARCHABLE.contains(&a.ineq) {
        let known: Vec<&str> = SEARCHABLE.iter().map(|id| id.as_str()).collect();
        return Err(format!("`{}` is not searchable (expected one of {})", a.ineq, known.join(", ")).into());
    }
    let profile = sharpness_profile(a.ineq, a.p, a.q, a.qubits, &a.gamma_grid.0, a.budget, a.restarts, seed)?;
    let inside_violations = profile.iter().filter(|pt| pt.in_hypothesis && !pt.pass).count();
    let threshold = match a.ineq {
        InequalityId::ReverseHc => Some(reverse_hc_gamma_threshold(a.p, a.q)),
        InequalityId::ForwardHc => Some(forward_hc_gamma_threshold(a.p, a.q)),
        InequalityId::StrongReverseHolder => Some(strong_reverse_holder_gamma_threshold(a.p, a.q)),
        _ => None,
    };
    let summary: Vec<Value> = profile
        .iter()
        .map(|pt| json!({ "gamma": pt.gamma, "in_hypothesis": pt.in_hypothesis, "best_slack": pt.best_slack, "pass": pt.pass }))
        .collect();
    let first = first_violation(&profile);
    let reports = profile
        .into_iter()
        .map(|pt| pt.report.with_param("in_hypothesis", pt.in_hypothesis).with_num("gamma", pt.gamma))
        .collect();
    let mut out = Outcome::new("search", params_of(a, seed)?, reports);
    out.extra.push(("profile", Value::Array(summary)));
    out.extra.push(("first_violation", json!(first)));
    out.extra.push(("gamma_threshold", json!(threshold.filter(|t| t.is_finite()))));
    out.extra.push(("inside_violations", json!(inside_violations)));
    // Violations beyond the boundary are the expected outcome of a search.
    out.failed = Some(inside_violations > 0);
    Ok(out)
}

/// Compact JSON with every float written to 17 significant digits.
struct SigFigs;

impl serde_json::ser::Formatter for SigFigs {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(v))
    }
}

fn summary_json(s: &CampaignSummary) -> Value {
    json!({
        "pass_count": s.pass_count,
        "fail_count": s.fail_count,
        "min_slack": qrhc::report::num(s.min_slack),
    })
}

fn render_json(out: &Outcome, summary: &CampaignSummary, timestamp: bool) -> CliResult<Vec<u8>> {
    let mut doc = serde_json::Map::new();
    doc.insert("spec_version".into(), json!(SPEC_VERSION));
    doc.insert("command".into(), json!(out.command));
    doc.insert("params".into(), out.params.clone());
    doc.insert("reports".into(), serde_json::to_value(&out.reports)?);
    doc.insert("summary".into(), summary_json(summary));
    for (k, v) in &out.extra {
        doc.insert((*k).into(), v.clone());
    }
    if timestamp {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        doc.insert("timestamp".into(), json!(secs));
    }
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFigs);
    Value::Object(doc).serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(buf)
}

fn render_csv(out: &Outcome) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if let Some(rows) = &out.table {
        let envelope = rows.iter().any(|r| r.envelope.is_some());
        let mut header = vec!["basis_id", "M_id", "n", "k", "gamma", "p_all_M", "p_all_notM"];
        if envelope {
            header.push("envelope");
        }
        w.write_record(&header)?;
        for r in rows {
            let mut rec = vec![
                r.basis_id.clone(),
                r.m_id.clone(),
                r.n.to_string(),
                r.k.to_string(),
                r.gamma.to_string(),
                r.p_all_m.to_string(),
                r.p_all_not_m.to_string(),
            ];
            if envelope {
                rec.push(r.envelope.map(|e| e.to_string()).unwrap_or_default());
            }
            w.write_record(&rec)?;
        }
    } else {
        w.write_record(["inequality_id", "lhs", "rhs", "slack", "tol", "pass", "params"])?;
        for r in &out.reports {
            w.write_record([
                r.inequality_id.clone(),
                r.lhs.to_string(),
                r.rhs.to_string(),
                r.slack.to_string(),
                r.tol.to_string(),
                r.pass.to_string(),
                serde_json::to_string(&r.params)?,
            ])?;
        }
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

fn emit(bytes: &[u8], path: Option<&Path>) -> io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()
        }
    }
}

fn run(cli: &Cli) -> CliResult<bool> {
    if let Ok(cap) = std::env::var("QRHC_MAX_DIM") {
        let cap: usize = cap.parse().map_err(|e| format!("QRHC_MAX_DIM = `{cap}`: {e}"))?;
        qrhc::hermitian::set_max_dim(cap);
    }
    let seed = cli.seed;
    let out = match &cli.command {
        Command::Verify(a) => cmd_verify(a, seed)?,
        Command::Lsi(a) => cmd_lsi(a, seed)?,
        Command::Derivative(a) => cmd_derivative(a, seed)?,
        Command::Mix(a) => cmd_mix(a, seed)?,
        Command::Nicd(a) => cmd_nicd(a, seed)?,
        Command::Search(a) => cmd_search(a, seed)?,
    };
    let summary = CampaignSummary::of(&out.reports);
    let format = cli.format.unwrap_or_else(|| match &cli.out {
        Some(p) if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) => Format::Csv,
        _ => Format::Json,
    });
    let bytes = match format {
        Format::Json => render_json(&out, &summary, !cli.no_timestamp)?,
        Format::Csv => render_csv(&out)?,
    };
    emit(&bytes, cli.out.as_deref())?;
    Ok(!out.failed.unwrap_or(!summary.all_pass()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

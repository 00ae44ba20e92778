//! Argument parsing, dispatch and output emission for the `rsl` binary.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use rsl_core::bmo::{self, Evaluator, JnTailConfig};
use rsl_core::contfrac::{self, CFReal, IntervalMode, Precision};
use rsl_core::gauss::{self, GaussSumRecord, A_UPPER_BOUND};
use rsl_core::numeric::parse_rational;
use rsl_core::{series, weyl};

pub const FORMAT_VERSION: &str = "1";
pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "rsl", version, about = "Riemann-type series, Gauss sums and oscillation experiments")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    /// Write `<command>.<ext>` and a manifest into this directory instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for parallel commands.
    #[arg(long, env = "RSL_JOBS", default_value_t = 1, global = true)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Complete Gauss sum Σ_{t<q} e(a t^k / q).
    Gauss(GaussArgs),
    /// max |ξ| q^{1/k-1} over q <= q_max.
    Ascan(AscanArgs),
    /// Partial quotients and convergents.
    Cf(CfArgs),
    /// Interval of reals having p/q as a convergent.
    Interval(IntervalArgs),
    /// Partial sums of F_k.
    Fsum(FsumArgs),
    /// Surrogate series over the convergents.
    Surrogate(SurrogateArgs),
    /// Cesàro block sum minus its logarithmic main term.
    Prop2(Prop2Args),
    /// Convergence decision for F_k at x.
    Verdict(VerdictArgs),
    /// Weyl sum classification.
    Weyl(WeylArgs),
    /// Level-set tail of F_k on a convergent interval.
    JnTail(JnTailArgs),
    /// Block functional of the coefficients 1/n at n^k - m.
    Fefferman(FeffermanArgs),
    /// Dyadic lower estimate of the BMO norm of truncated F_k.
    BmoEst(BmoArgs),
}

fn positive_u64(s: &str) -> Result<u64, String> {
    match s.parse::<u64>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_x(s: &str) -> Result<CFReal, String> {
    s.parse::<CFReal>().map_err(|e| e.to_string())
}

fn parse_exact(s: &str) -> Result<BigRational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

/// `start:stop:step`, endpoints included within half a step.
pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    let [start, stop, step] = parts[..] else {
        return Err("expected start:stop:step".into());
    };
    if !(step > 0.0) || stop < start || !start.is_finite() || !stop.is_finite() {
        return Err("need step > 0 and start <= stop".into());
    }
    let n = ((stop - start) / step + 0.5).floor() as u64;
    Ok(Grid((0..=n).map(|i| start + i as f64 * step).collect()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Grid(pub Vec<f64>);

#[derive(Args, Debug, Serialize)]
pub struct GaussArgs {
    #[arg(long)]
    pub a: u64,
    #[arg(long, value_parser = positive_u64)]
    pub q: u64,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(2..))]
    pub k: u32,
}

#[derive(Args, Debug, Serialize)]
pub struct AscanArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    pub k: u32,
    #[arg(long = "q-max", value_parser = positive_u64)]
    pub q_max: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct CfArgs {
    /// `a0;a1,a2,...` (append `,...` for a prefix) or `p/q`.
    #[arg(long, value_parser = parse_x)]
    #[serde(serialize_with = "ser_display")]
    pub x: CFReal,
}

#[derive(Args, Debug, Serialize)]
pub struct IntervalArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long, value_parser = positive_u64)]
    pub q: u64,
    /// Extra partial quotients selecting a sub-interval.
    #[arg(long, value_delimiter = ',')]
    pub sub: Option<Vec<u64>>,
    /// Only the canonical representation branch.
    #[arg(long)]
    pub one_sided: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct FsumArgs {
    #[arg(long, value_parser = parse_x)]
    #[serde(serialize_with = "ser_display")]
    pub x: CFReal,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub k: u32,
    #[arg(long = "N", value_parser = positive_u64)]
    pub n: u64,
    #[arg(long, value_delimiter = ',')]
    pub checkpoints: Option<Vec<u64>>,
}

#[derive(Args, Debug, Serialize)]
pub struct SurrogateArgs {
    #[arg(long, value_parser = parse_x)]
    #[serde(serialize_with = "ser_display")]
    pub x: CFReal,
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    pub k: u32,
    #[arg(long, default_value_t = 0)]
    pub j_start: usize,
    #[arg(long, default_value_t = series::DEFAULT_MAX_MODULUS)]
    pub max_modulus: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct Prop2Args {
    #[arg(long, value_parser = parse_x)]
    #[serde(serialize_with = "ser_display")]
    pub x: CFReal,
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    pub k: u32,
    #[arg(long)]
    pub i: usize,
    #[arg(long)]
    pub m: u64,
    #[arg(long, default_value_t = series::DEFAULT_TAU)]
    pub tau: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct VerdictArgs {
    #[arg(long, value_parser = parse_x)]
    #[serde(serialize_with = "ser_display")]
    pub x: CFReal,
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    pub k: u32,
    /// Largest admissible bound on the unseen tail.
    #[arg(long, default_value_t = 0.25)]
    pub tolerance: f64,
    #[arg(long, default_value_t = series::DEFAULT_MAX_MODULUS)]
    pub max_modulus: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct WeylArgs {
    #[command(subcommand)]
    pub action: WeylAction,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WeylAction {
    /// Case and bound shape at one length P.
    Classify(WeylClassifyArgs),
    /// |S_P| against the bound shape for several P.
    Table(WeylTableArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct WeylClassifyArgs {
    #[arg(long, value_parser = parse_x)]
    #[serde(serialize_with = "ser_display")]
    pub x: CFReal,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub k: u32,
    #[arg(long = "P")]
    pub p: u64,
    /// Exponent ε in (0, 1), read exactly (`0.25` or `1/4`).
    #[arg(long, default_value = "1/4", value_parser = parse_exact)]
    #[serde(serialize_with = "ser_display")]
    pub eps: BigRational,
}

#[derive(Args, Debug, Serialize)]
pub struct WeylTableArgs {
    #[arg(long, value_parser = parse_x)]
    #[serde(serialize_with = "ser_display")]
    pub x: CFReal,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub k: u32,
    /// Comma-separated increasing lengths.
    #[arg(long = "P", value_delimiter = ',')]
    pub p: Vec<u64>,
    #[arg(long, default_value = "1/4", value_parser = parse_exact)]
    #[serde(serialize_with = "ser_display")]
    pub eps: BigRational,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EvaluatorArg {
    Truncated,
    Surrogate,
}

#[derive(Args, Debug, Serialize)]
pub struct JnTailArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long, value_parser = positive_u64)]
    pub q: u64,
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    pub k: u32,
    /// `start:stop:step`.
    #[arg(long, value_parser = parse_grid)]
    pub lambdas: Grid,
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub samples: u64,
    #[arg(long = "N", value_parser = positive_u64)]
    pub n: u64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',')]
    pub sub: Option<Vec<u64>>,
    #[arg(long, default_value_t = A_UPPER_BOUND)]
    pub aref: f64,
    /// Constant C of the optional correction factor.
    #[arg(long)]
    pub correction: Option<f64>,
    #[arg(long, default_value_t = 24)]
    pub depth: usize,
    #[arg(long, default_value_t = 10_000)]
    pub max_quotient: u64,
    #[arg(long, value_enum, default_value_t = EvaluatorArg::Truncated)]
    pub evaluator: EvaluatorArg,
    #[arg(long)]
    pub one_sided: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct FeffermanArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    pub k: u32,
    #[arg(long, default_value_t = 0)]
    pub m: u64,
    /// Comma-separated block widths.
    #[arg(long = "N", value_delimiter = ',')]
    pub n: Vec<u64>,
    #[arg(long)]
    pub n_max: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct BmoArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub k: u32,
    #[arg(long = "N", value_parser = positive_u64)]
    pub n: u64,
    #[arg(long, default_value_t = 8)]
    pub depth: u32,
    #[arg(long, default_value_t = 32)]
    pub samples: usize,
    #[arg(long)]
    pub seed: u64,
}

fn ser_display<T: std::fmt::Display, S: serde::Serializer>(x: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(x)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Versions {
    pub tool: String,
    pub format: String,
}

/// Provenance record written next to every data file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub seed: Option<u64>,
    pub versions: Versions,
    pub data_file: String,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    format_version: &'a str,
    command: &'a str,
    #[serde(flatten)]
    data: T,
}

/// Rendered result of one command.
pub struct Output {
    pub command: &'static str,
    pub json: String,
    pub csv: String,
    pub seed: Option<u64>,
    pub parameters: serde_json::Value,
}

/// CSV rendering of a double: 17 significant digits, exact on re-parse.
pub fn csv_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn csv_opt(x: Option<f64>) -> String {
    x.map(csv_f64).unwrap_or_default()
}

pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

#[derive(Debug)]
enum Failure {
    Core(rsl_core::Error),
    Io { path: PathBuf, source: std::io::Error },
}

impl From<rsl_core::Error> for Failure {
    fn from(e: rsl_core::Error) -> Self {
        Failure::Core(e)
    }
}

/// Pretty JSON of `data` with `format_version` and `command` prepended.
pub fn to_json<T: Serialize>(command: &str, data: T) -> String {
    let envelope = Envelope { format_version: FORMAT_VERSION, command, data };
    let mut json = serde_json::to_string_pretty(&envelope).expect("serializable");
    json.push('\n');
    json
}

fn output<T: Serialize, P: Serialize>(command: &'static str, params: &P, seed: Option<u64>, data: T, csv: String) -> Output {
    let json = to_json(command, data);
    let parameters = serde_json::to_value(params).expect("serializable");
    Output { command, json, csv, seed, parameters }
}

#[derive(Serialize)]
struct GaussOut {
    #[serde(flatten)]
    record: GaussSumRecord,
    value: Complex64,
}

#[derive(Serialize)]
struct CfRow {
    j: usize,
    a: String,
    p: String,
    q: String,
}

#[derive(Serialize)]
struct CfOut {
    x: String,
    precision: Precision,
    integer_part: String,
    convergents: Vec<CfRow>,
}

#[derive(Serialize)]
struct FeffermanOut {
    rows: Vec<bmo::BlockFunctionalResult>,
    s: f64,
}

#[derive(Serialize)]
struct WeylTableOut {
    rows: Vec<weyl::WeylRow>,
}

fn rat(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

fn run_command(cli: &Cli) -> Result<Output, Failure> {
    let jobs = cli.jobs.max(1);
    Ok(match &cli.command {
        Command::Gauss(a) => {
            let record = gauss::gauss_sum(a.a, a.q, a.k)?;
            let r = &record;
            let csv = csv_table(
                &["a", "q", "k", "re", "im", "modulus", "normalized"],
                [vec![
                    r.a.to_string(),
                    r.q.to_string(),
                    r.k.to_string(),
                    csv_f64(r.re),
                    csv_f64(r.im),
                    csv_f64(r.modulus),
                    csv_f64(r.normalized),
                ]],
            );
            let value = record.value();
            output("gauss", a, None, GaussOut { record, value }, csv)
        }
        Command::Ascan(a) => {
            let r = gauss::a_constant_scan(a.k, a.q_max, jobs)?;
            let csv = csv_table(
                &["q", "a", "normalized"],
                r.per_q_max.iter().map(|m| vec![m.q.to_string(), m.a.to_string(), csv_f64(m.value)]),
            );
            output("ascan", a, None, r, csv)
        }
        Command::Cf(a) => {
            let x = &a.x;
            let quotients = x.quotients();
            let rows: Vec<CfRow> = x
                .convergents()
                .iter()
                .enumerate()
                .map(|(j, c)| CfRow {
                    j,
                    a: if j == 0 { x.integer_part().to_string() } else { quotients[j - 1].to_string() },
                    p: c.p.to_string(),
                    q: c.q.to_string(),
                })
                .collect();
            let csv = csv_table(&["j", "a", "p", "q"], rows.iter().map(|r| vec![r.j.to_string(), r.a.clone(), r.p.clone(), r.q.clone()]));
            let data = CfOut { x: x.to_string(), precision: x.precision(), integer_part: x.integer_part().to_string(), convergents: rows };
            output("cf", a, None, data, csv)
        }
        Command::Interval(a) => {
            let mode = if a.one_sided { IntervalMode::OneSided } else { IntervalMode::TwoSided };
            let iv = match &a.sub {
                Some(b) => {
                    let base = contfrac::cf_expand_rational(&BigInt::from(a.p), &BigInt::from(a.q))?;
                    contfrac::refine_interval(&base, b, mode)?
                }
                None => contfrac::interval_of_convergent(&BigInt::from(a.p), &BigInt::from(a.q), mode)?,
            };
            let csv = csv_table(
                &["lo", "hi", "center", "canonical_length", "alternate_length"],
                [vec![rat(&iv.lo), rat(&iv.hi), rat(&iv.center), rat(&iv.canonical_length), rat(&iv.alternate_length)]],
            );
            output("interval", a, None, iv, csv)
        }
        Command::Fsum(a) => {
            let checkpoints = a.checkpoints.clone().unwrap_or_default();
            let t = series::riemann_partial_sum(&a.x.value(), a.k, a.n, &checkpoints)?;
            let csv = csv_table(
                &["n", "re", "im"],
                t.checkpoints.iter().zip(&t.values).map(|(n, v)| vec![n.to_string(), csv_f64(v.re), csv_f64(v.im)]),
            );
            output("fsum", a, None, t, csv)
        }
        Command::Surrogate(a) => {
            let t = series::surrogate_sum_capped(&a.x, a.k, a.j_start, a.max_modulus)?;
            let csv = csv_table(
                &["j", "p", "q", "q_next", "term_re", "term_im", "bound", "partial_re", "partial_im"],
                t.terms.iter().zip(&t.partial_sums).map(|(term, s)| {
                    vec![
                        term.j.to_string(),
                        term.p.to_string(),
                        term.q.to_string(),
                        term.q_next.to_string(),
                        csv_f64(term.term.re),
                        csv_f64(term.term.im),
                        csv_f64(term.bound),
                        csv_f64(s.re),
                        csv_f64(s.im),
                    ]
                }),
            );
            output("surrogate", a, None, t, csv)
        }
        Command::Prop2(a) => {
            let r = series::prop2_residual(&a.x, a.k, a.i, a.m, a.tau)?;
            let csv = csv_table(
                &["i", "q_i", "q_next", "m", "n_end", "cesaro_re", "cesaro_im", "main_re", "main_im", "residual_re", "residual_im", "remainder_scale"],
                [vec![
                    r.i.to_string(),
                    r.q_i.to_string(),
                    r.q_next.to_string(),
                    r.m.to_string(),
                    r.n_end.to_string(),
                    csv_f64(r.cesaro.re),
                    csv_f64(r.cesaro.im),
                    csv_f64(r.main.re),
                    csv_f64(r.main.im),
                    csv_f64(r.residual.re),
                    csv_f64(r.residual.im),
                    csv_f64(r.remainder_scale),
                ]],
            );
            output("prop2", a, None, r, csv)
        }
        Command::Verdict(a) => {
            let budget = series::VerdictBudget { tolerance: a.tolerance, max_modulus: a.max_modulus };
            let v = series::convergence_verdict(&a.x, a.k, &budget)?;
            let e = &v.evidence;
            let outcome = serde_json::to_value(v.outcome).expect("enum").as_str().expect("string").to_string();
            let csv = csv_table(
                &["outcome", "terms_used", "partial_re", "partial_im", "tail_bound", "gauss_modulus", "tolerance"],
                [vec![
                    outcome,
                    e.terms_used.to_string(),
                    csv_opt(e.partial_sum.map(|s| s.re)),
                    csv_opt(e.partial_sum.map(|s| s.im)),
                    csv_opt(e.tail_bound),
                    csv_opt(e.gauss_modulus),
                    csv_f64(e.tolerance),
                ]],
            );
            output("verdict", a, None, v, csv)
        }
        Command::Weyl(w) => match &w.action {
            WeylAction::Classify(a) => {
                let c = weyl::classify_point(&a.x, a.k, a.p, &a.eps)?;
                let (cc, mm, beta) = match &c.approx {
                    Some(ap) => (ap.c.to_string(), ap.m.to_string(), rat(&ap.beta)),
                    None => Default::default(),
                };
                let csv = csv_table(
                    &["case", "P", "epsilon", "m_max", "C", "M", "beta", "delta", "bound_shape"],
                    [vec![
                        c.case.to_string(),
                        c.p.to_string(),
                        rat(&c.epsilon),
                        c.m_max.to_string(),
                        cc,
                        mm,
                        beta,
                        csv_opt(c.delta),
                        csv_f64(c.bound_shape),
                    ]],
                );
                output("weyl-classify", a, None, c, csv)
            }
            WeylAction::Table(a) => {
                let rows = weyl::empirical_vs_bound(&a.x, a.k, &a.p, &a.eps)?;
                let csv = csv_table(
                    &["P", "case", "s_abs", "shape", "ratio", "normalized"],
                    rows.iter().map(|r| {
                        vec![r.p.to_string(), r.case.to_string(), csv_f64(r.s_abs), csv_f64(r.shape), csv_f64(r.ratio), csv_f64(r.normalized)]
                    }),
                );
                output("weyl-table", a, None, WeylTableOut { rows }, csv)
            }
        },
        Command::JnTail(a) => {
            let mut cfg = JnTailConfig::new(a.p, a.q, a.k, a.lambdas.0.clone(), a.samples as usize, a.n, a.seed);
            cfg.sub_interval = a.sub.clone();
            cfg.a_ref = a.aref;
            cfg.correction = a.correction;
            cfg.depth = a.depth;
            cfg.max_quotient = a.max_quotient;
            cfg.mode = if a.one_sided { IntervalMode::OneSided } else { IntervalMode::TwoSided };
            cfg.evaluator = match a.evaluator {
                EvaluatorArg::Truncated => Evaluator::Truncated,
                EvaluatorArg::Surrogate => Evaluator::Surrogate,
            };
            cfg.parallelism = jobs;
            let h = bmo::jn_tail_experiment(&cfg)?;
            let csv = csv_table(
                &["lambda", "empirical", "theorem2_curve", "classic_jn_note"],
                (0..h.lambdas.len()).map(|i| {
                    vec![csv_f64(h.lambdas[i]), csv_f64(h.empirical[i]), csv_f64(h.theorem2_curve[i]), csv_f64(h.classic_jn[i])]
                }),
            );
            output("jn-tail", a, Some(a.seed), h, csv)
        }
        Command::Fefferman(a) => {
            let rows = a.n.iter().map(|&n| bmo::fefferman_blocks(a.k, a.m, n, a.n_max)).collect::<Result<Vec<_>, _>>()?;
            let s = bmo::fefferman_s(a.k, a.m, &a.n, a.n_max)?;
            let csv = csv_table(
                &["k", "m", "N", "n_max", "j_cut", "block_sum", "block_range", "lower_bound"],
                rows.iter().map(|r| {
                    vec![
                        r.k.to_string(),
                        r.m.to_string(),
                        r.n.to_string(),
                        r.n_max.to_string(),
                        r.j_cut.to_string(),
                        csv_f64(r.block_sum),
                        csv_f64(r.block_range),
                        csv_opt(r.lower_bound),
                    ]
                }),
            );
            output("fefferman", a, None, FeffermanOut { rows, s }, csv)
        }
        Command::BmoEst(a) => {
            let e = bmo::bmo_norm_estimate(a.k, a.n, a.depth, a.samples, a.seed, jobs)?;
            let csv = csv_table(
                &["level", "max_oscillation"],
                e.per_level.iter().enumerate().map(|(d, v)| vec![d.to_string(), csv_f64(*v)]),
            );
            output("bmo-est", a, Some(a.seed), e, csv)
        }
    })
}

fn unix_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|source| Failure::Io { path: path.to_path_buf(), source })
}

fn emit(out: &Output, format: Format, dir: Option<&Path>, started: u128, stdout: &mut dyn Write) -> Result<(), Failure> {
    let (body, ext) = match format {
        Format::Json => (&out.json, "json"),
        Format::Csv => (&out.csv, "csv"),
    };
    let Some(dir) = dir else {
        return stdout
            .write_all(body.as_bytes())
            .map_err(|source| Failure::Io { path: PathBuf::from("<stdout>"), source });
    };
    std::fs::create_dir_all(dir).map_err(|source| Failure::Io { path: dir.to_path_buf(), source })?;
    let data_file = format!("{}.{ext}", out.command);
    let data_path = dir.join(&data_file);
    write_file(&data_path, body.as_bytes())?;

    let parameters = match &out.parameters {
        serde_json::Value::Object(map) => map.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
        other => BTreeMap::from([("value".to_string(), other.clone())]),
    };
    let manifest = RunManifest {
        command: out.command.to_string(),
        parameters,
        seed: out.seed,
        versions: Versions { tool: env!("CARGO_PKG_VERSION").to_string(), format: FORMAT_VERSION.to_string() },
        data_file,
        started_unix_ms: started,
        finished_unix_ms: unix_ms(),
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("serializable");
    text.push('\n');
    let manifest_path = dir.join(format!("{}.manifest.json", out.command));
    write_file(&manifest_path, text.as_bytes())?;
    writeln!(stdout, "{}\n{}", data_path.display(), manifest_path.display())
        .map_err(|source| Failure::Io { path: PathBuf::from("<stdout>"), source })
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn dispatch<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let started = unix_ms();
    let result = run_command(&cli).and_then(|out| emit(&out, cli.format, cli.out.as_deref(), started, stdout));
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Core(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_PRECONDITION
        }
        Err(Failure::Io { path, source }) => {
            let _ = writeln!(stderr, "error: cannot write {}: {source}", path.display());
            EXIT_IO
        }
    }
}

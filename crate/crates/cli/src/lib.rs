//! Experiment driver behind the `arithstat` binary.
//!
//! [`RunConfig`] is the fully resolved configuration of one run and
//! [`execute`] turns it into report bytes. Identical configurations give
//! identical bytes.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use arithstat_core::erdos_mirsky::{self, EMParams, QuadratureGrid};
use arithstat_core::joint::{self, Normalization, PairFilter, PairStat};
use arithstat_core::kubilius::{self, DensityTable};
use arithstat_core::report::{ExperimentReport, ARTIFACT_VERSION, SCHEMA_VERSION};
use arithstat_core::sieve_counts::{self, BRUTE_FORCE_CEILING};
use arithstat_core::{Engine, EngineConfig, Error, Result, Window};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Environment variable holding the sieve memory ceiling in MiB.
pub const MEMORY_ENV: &str = "ARITHSTAT_MEMORY_MB";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Sieve,
    Ek2,
    Chowla,
    Model,
    Sievecheck,
    Em,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Center {
    /// `log log x`.
    Log2,
    /// `lambda(x)` from the density table.
    Lambda,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum FilterArg {
    SquarefreePair,
    SquarefreePairCoprimeA,
    All,
}

impl From<FilterArg> for PairFilter {
    fn from(f: FilterArg) -> Self {
        match f {
            FilterArg::SquarefreePair => PairFilter::SquarefreePair,
            FilterArg::SquarefreePairCoprimeA => PairFilter::SquarefreePairCoprimeA,
            FilterArg::All => PairFilter::All,
        }
    }
}

/// Integer that may be written in scientific notation, e.g. `1e7`.
pub fn parse_count(s: &str) -> std::result::Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
    if !(f >= 0.0 && f.fract() == 0.0 && f <= (1u64 << 62) as f64) {
        return Err(format!("not a non-negative integer within range: {s:?}"));
    }
    Ok(f as u64)
}

#[derive(Debug, Parser)]
#[command(
    name = "arithstat",
    version,
    about = "Prime-factor statistics of shifted pairs of integers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Sieve [1, x] and emit per-integer records or a summary.
    Sieve(CommonArgs),
    /// Joint law of (omega(n), omega(n+a)) against the bivariate Gaussian.
    Ek2(CommonArgs),
    /// Truncated Moebius correlations.
    Chowla(CommonArgs),
    /// Empirical, model and Poisson laws with total variation distances.
    Model(CommonArgs),
    /// Squarefree pair counts against main terms.
    Sievecheck(CommonArgs),
    /// Counts of tau_y(n) = 2^j tau_y(n+1) and the Mellin identity.
    Em(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long, value_parser = parse_count)]
    pub x: u64,
    #[arg(long, value_parser = parse_count, conflicts_with = "beta")]
    pub y: Option<u64>,
    /// Sets y = round(x^(1/beta)).
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 1, value_parser = parse_count)]
    pub a: u64,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub j: i32,
    #[arg(long, default_value_t = 10.0)]
    pub alpha: f64,
    /// Smoothing parameter of the Esseen diagnostic.
    #[arg(long = "T")]
    pub t: Option<f64>,
    #[arg(long)]
    pub grid_step: Option<f64>,
    #[arg(long, value_enum, default_value = "squarefree-pair")]
    pub filter: FilterArg,
    #[arg(long, value_enum, default_value = "log2")]
    pub center: Center,
    /// Frequencies for the mu(n; u) correlation.
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub u: f64,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub v: f64,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Query file for `sievecheck`.
    #[arg(long)]
    pub batch: Option<PathBuf>,
    #[arg(long, default_value_t = sieve_counts::DEFAULT_TRUNC, value_parser = parse_count)]
    pub trunc: u64,
    #[arg(long, default_value_t = 0.0)]
    pub tail_eps: f64,
    /// Binary dump of the sieved table (`sieve` only).
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub x: u64,
    pub y: Option<u64>,
    pub beta: Option<f64>,
    pub a: u64,
    pub j: i32,
    pub alpha: f64,
    #[serde(rename = "T")]
    pub t: Option<f64>,
    pub grid_step: Option<f64>,
    pub filter: FilterArg,
    pub center: Center,
    pub u: f64,
    pub v: f64,
    pub threads: Option<usize>,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub batch: Option<PathBuf>,
    pub trunc: u64,
    pub tail_eps: f64,
    pub dump: Option<PathBuf>,
    pub memory_budget: usize,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let (command, a) = match cli.command {
            CliCommand::Sieve(a) => (Command::Sieve, a),
            CliCommand::Ek2(a) => (Command::Ek2, a),
            CliCommand::Chowla(a) => (Command::Chowla, a),
            CliCommand::Model(a) => (Command::Model, a),
            CliCommand::Sievecheck(a) => (Command::Sievecheck, a),
            CliCommand::Em(a) => (Command::Em, a),
        };
        let memory_budget = memory_budget_from_env()?;
        Self::new(command, a, memory_budget)
    }

    pub fn new(command: Command, args: CommonArgs, memory_budget: usize) -> Result<Self> {
        let y = match (args.y, args.beta) {
            (Some(y), _) => Some(y),
            (None, Some(b)) => {
                if !(b > 0.0 && b.is_finite()) {
                    return Err(Error::Parameter(format!("beta = {b} must be positive")));
                }
                Some((args.x as f64).powf(1.0 / b).round() as u64)
            }
            (None, None) => None,
        };
        if args.threads == Some(0) {
            return Err(Error::Parameter("threads must be positive".into()));
        }
        Ok(Self {
            command,
            x: args.x,
            y,
            beta: args.beta,
            a: args.a,
            j: args.j,
            alpha: args.alpha,
            t: args.t,
            grid_step: args.grid_step,
            filter: args.filter,
            center: args.center,
            u: args.u,
            v: args.v,
            threads: args.threads,
            seed: args.seed,
            output: args.output,
            format: args.format,
            batch: args.batch,
            trunc: args.trunc,
            tail_eps: args.tail_eps,
            dump: args.dump,
            memory_budget,
        })
    }

    fn need_y(&self) -> Result<u64> {
        self.y
            .ok_or_else(|| Error::Parameter("this command needs --y or --beta".into()))
    }

    fn engine(&self) -> Result<Engine> {
        Engine::new(EngineConfig {
            memory_budget: self.memory_budget,
            ..EngineConfig::default()
        })
    }
}

fn memory_budget_from_env() -> Result<usize> {
    match std::env::var(MEMORY_ENV) {
        Ok(s) => {
            let mb: usize = s
                .trim()
                .parse()
                .map_err(|_| Error::Parameter(format!("{MEMORY_ENV} = {s:?} is not an integer")))?;
            Ok(mb.saturating_mul(1 << 20))
        }
        Err(_) => Ok(EngineConfig::default().memory_budget),
    }
}

/// Process exit status for an error category.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parameter(_) => 2,
        Error::Resource(_) => 3,
        Error::Domain(_) => 4,
        Error::Io(_) | Error::Format(_) => 5,
    }
}

fn config_value(cfg: &RunConfig) -> serde_json::Value {
    serde_json::to_value(cfg).expect("config serializes")
}

/// `#`-prefixed header lines carried by every CSV output.
fn csv_header(cfg: &RunConfig) -> String {
    format!(
        "# arithstat {ARTIFACT_VERSION} schema {SCHEMA_VERSION}\n# config {}\n",
        serde_json::to_string(&config_value(cfg)).expect("config serializes")
    )
}

fn csv_bytes(cfg: &RunConfig, body: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut out = csv_header(cfg).into_bytes();
    body(&mut out)?;
    Ok(out)
}

/// Run `cfg` and return the report bytes.
pub fn execute(cfg: &RunConfig) -> Result<Vec<u8>> {
    match cfg.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Resource(e.to_string()))?;
            pool.install(|| dispatch(cfg))
        }
        None => dispatch(cfg),
    }
}

fn dispatch(cfg: &RunConfig) -> Result<Vec<u8>> {
    match cfg.command {
        Command::Sieve => run_sieve(cfg),
        Command::Ek2 => run_ek2(cfg),
        Command::Chowla => run_chowla(cfg),
        Command::Model => run_model(cfg),
        Command::Sievecheck => run_sievecheck(cfg),
        Command::Em => run_em(cfg),
    }
}

/// Run `cfg`, write its report and return the exit status.
pub fn run(cfg: &RunConfig) -> i32 {
    let res = execute(cfg).and_then(|bytes| match &cfg.output {
        Some(p) => std::fs::write(p, bytes).map_err(Error::from),
        None => std::io::stdout().write_all(&bytes).map_err(Error::from),
    });
    match res {
        Ok(()) => 0,
        Err(e) => {
            let msg = serde_json::json!({ "error": e.category(), "message": e.to_string() });
            eprintln!("{msg}");
            exit_code(&e)
        }
    }
}

fn run_sieve(cfg: &RunConfig) -> Result<Vec<u8>> {
    let y = cfg.y.unwrap_or(u64::MAX);
    let engine = cfg.engine()?;
    let end = cfg
        .x
        .checked_add(1)
        .ok_or_else(|| Error::Parameter("x too large".into()))?;
    if let Some(path) = &cfg.dump {
        let need = (end as u128) * arithstat_core::arith::BYTES_PER_ENTRY as u128;
        if need > cfg.memory_budget as u128 {
            return Err(Error::Resource(format!(
                "dump of {end} records needs {need} bytes, over the budget of {}",
                cfg.memory_budget
            )));
        }
        let primes = arithstat_core::primes_up_to(arithstat_core::arith::isqrt(end).max(2))?;
        let table = arithstat_core::sieve_window(Window::new(1, end)?, y, &primes)?;
        let f = std::fs::File::create(path)?;
        table.write_dump(std::io::BufWriter::new(f))?;
    }
    match cfg.format {
        Format::Csv => {
            let rows = engine.map_windows(1, end, y, |t| {
                let mut s = String::new();
                for (n, r) in t.iter() {
                    let _ = writeln!(
                        s,
                        "{n},{},{},{},{}",
                        r.omega, r.omega_y, r.squarefree as u8, r.tau_y
                    );
                }
                s
            })?;
            csv_bytes(cfg, |out| {
                out.extend_from_slice(b"n,omega,omega_y,squarefree,tau_y\n");
                for r in rows {
                    out.extend_from_slice(r.as_bytes());
                }
                Ok(())
            })
        }
        Format::Json => {
            let parts = engine.map_windows(1, end, y, |t| {
                let mut sqf = 0u64;
                let mut om = std::collections::BTreeMap::<u8, u64>::new();
                let mut omy = std::collections::BTreeMap::<u8, u64>::new();
                for (_, r) in t.iter() {
                    sqf += r.squarefree as u64;
                    *om.entry(r.omega).or_insert(0) += 1;
                    *omy.entry(r.omega_y).or_insert(0) += 1;
                }
                (sqf, om, omy)
            })?;
            let mut sqf = 0;
            let mut om = std::collections::BTreeMap::<u8, u64>::new();
            let mut omy = std::collections::BTreeMap::<u8, u64>::new();
            for (s, a, b) in parts {
                sqf += s;
                for (k, c) in a {
                    *om.entry(k).or_insert(0) += c;
                }
                for (k, c) in b {
                    *omy.entry(k).or_insert(0) += c;
                }
            }
            let mut r = ExperimentReport::new("sieve", config_value(cfg));
            r.param("x", cfg.x).param("y", cfg.y);
            r.stat("squarefree_count", sqf)
                .stat("omega_histogram", om)
                .stat("omega_y_histogram", omy);
            r.to_json().map(String::into_bytes)
        }
    }
}

fn normalization(cfg: &RunConfig) -> Result<Normalization> {
    match cfg.center {
        Center::Log2 => Normalization::log_log(cfg.x),
        Center::Lambda => Normalization::lambda(cfg.x, cfg.a),
    }
}

fn run_ek2(cfg: &RunConfig) -> Result<Vec<u8>> {
    let engine = cfg.engine()?;
    let filter: PairFilter = cfg.filter.into();
    let sample = joint::collect_pairs(&engine, cfg.x, cfg.a, cfg.y, filter, PairStat::OmegaY)?;
    let norm = normalization(cfg)?;
    let sup = joint::sup_distance_vs_gaussian(&sample, norm)?;
    match cfg.format {
        Format::Csv => {
            let grid = joint::cdf_grid(&sample, norm)?;
            csv_bytes(cfg, |out| {
                joint::write_cdf_csv(&grid, &mut *out)?;
                writeln!(out, "# sup_distance {sup}")?;
                Ok(())
            })
        }
        Format::Json => {
            let t = cfg.t.unwrap_or_else(|| joint::canonical_t(cfg.x).max(1.0));
            let step = cfg.grid_step.unwrap_or(t.powi(-3));
            let ess = joint::esseen_diagnostic(&sample, norm, t, step)?;
            let phi11 = joint::char_fn(&sample, norm, 1.0, 1.0)?;
            let mut r = ExperimentReport::new("ek2", config_value(cfg));
            r.param("x", cfg.x)
                .param("a", cfg.a)
                .param("y", cfg.y)
                .param("filter", filter)
                .param("normalization", norm);
            r.stat("total", sample.total)
                .stat(
                    "histogram",
                    sample
                        .counts
                        .iter()
                        .map(|(k, c)| (k.0, k.1, *c))
                        .collect::<Vec<_>>(),
                )
                .stat("sup_distance", sup)
                .stat("char_fn_1_1", [phi11.re, phi11.im])
                .stat("esseen", ess);
            if filter == PairFilter::SquarefreePairCoprimeA {
                r.stat("moment_1_0", joint::moment(&sample, norm, 1, 0)?);
                r.stat("moment_1_1", joint::moment(&sample, norm, 1, 1)?);
            }
            r.reference("total_over_x", sample.total as f64 / cfg.x as f64);
            r.ratio("sup_distance_over_esseen", sup / ess.value);
            r.to_json().map(String::into_bytes)
        }
    }
}

fn run_chowla(cfg: &RunConfig) -> Result<Vec<u8>> {
    let engine = cfg.engine()?;
    let y = cfg.need_y()?;
    let c = joint::correlation_mu_y(&engine, cfg.x, y, cfg.a)?;
    let mu = joint::correlation_mu_u(&engine, cfg.x, cfg.u, cfg.v, cfg.a)?;
    match cfg.format {
        Format::Csv => csv_bytes(cfg, |out| {
            writeln!(out, "x,y,a,sum,normalized,u,v,mu_u_re,mu_u_im")?;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                c.x, c.y, c.a, c.numerator, c.normalized, cfg.u, cfg.v, mu.re, mu.im
            )?;
            Ok(())
        }),
        Format::Json => {
            let mut r = ExperimentReport::new("chowla", config_value(cfg));
            r.param("x", cfg.x)
                .param("y", y)
                .param("a", cfg.a)
                .param("u", cfg.u)
                .param("v", cfg.v);
            r.stat("sum", c.numerator)
                .stat("normalized", c.normalized)
                .stat("mu_u", [mu.re, mu.im])
                .stat("mu_u_modulus", mu.norm());
            r.to_json().map(String::into_bytes)
        }
    }
}

fn run_model(cfg: &RunConfig) -> Result<Vec<u8>> {
    let engine = cfg.engine()?;
    let y = cfg.need_y()?;
    let table = DensityTable::new(y, cfg.a)?;
    let model = kubilius::model_law(&table, cfg.tail_eps)?;
    let poisson = kubilius::poisson2_law(table.lambda, cfg.tail_eps)?;
    let emp = kubilius::empirical_law(&engine, cfg.x, y, cfg.a)?;
    match cfg.format {
        Format::Csv => csv_bytes(cfg, |out| {
            writeln!(out, "law,k1,k2,mass")?;
            for (name, law) in [
                ("empirical", &emp),
                ("model", &model),
                ("poisson", &poisson),
            ] {
                for (&(k1, k2), &m) in &law.probabilities {
                    writeln!(out, "{name},{k1},{k2},{m}")?;
                }
            }
            Ok(())
        }),
        Format::Json => {
            let roos = kubilius::roos_bound(&table);
            let tv_mp = kubilius::tv(&model, &poisson);
            let mut r = ExperimentReport::new("model", config_value(cfg));
            r.param("x", cfg.x)
                .param("y", y)
                .param("a", cfg.a)
                .param("tail_eps", cfg.tail_eps)
                .param("theta", 1.0 / 7.0)
                .param("beta", (cfg.x as f64).ln() / (y as f64).ln());
            r.stat("lambda", table.lambda)
                .stat("tv_empirical_model", kubilius::tv(&emp, &model))
                .stat("tv_model_poisson", tv_mp)
                .stat("tv_empirical_poisson", kubilius::tv(&emp, &poisson))
                .stat("model_tail_mass", model.tail_mass)
                .stat("poisson_tail_mass", poisson.tail_mass);
            r.reference("roos_bound", roos);
            let theta: f64 = 1.0 / 7.0;
            let beta = (cfg.x as f64).ln() / (y as f64).ln();
            let remainder = (-(theta / 8.0) * theta.min(0.5) * beta * beta.ln()).exp()
                + (cfg.x as f64).ln().powf(-1.0 / 6.0);
            r.reference("tv_remainder_order", remainder);
            r.ratio("tv_model_poisson_over_roos", tv_mp / roos);
            r.warnings
                .push("theta = 1/7 is an illustrative choice for the remainder exponent".into());
            r.to_json().map(String::into_bytes)
        }
    }
}

fn run_sievecheck(cfg: &RunConfig) -> Result<Vec<u8>> {
    let engine = cfg.engine()?;
    let queries = match &cfg.batch {
        Some(p) => sieve_counts::parse_batch(&std::fs::read_to_string(p)?)?,
        None => sieve_counts::documented_batch(),
    };
    let rows =
        sieve_counts::compare_batch(&engine, cfg.x, &queries, cfg.trunc, BRUTE_FORCE_CEILING)?;
    match cfg.format {
        Format::Csv => csv_bytes(cfg, |out| sieve_counts::write_rows_csv(&rows, &mut *out)),
        Format::Json => {
            let e = sieve_counts::euler_e(cfg.trunc)?;
            let mut r = ExperimentReport::new("sievecheck", config_value(cfg));
            r.param("x", cfg.x).param("trunc", cfg.trunc);
            r.reference("euler_product", e);
            let worst = rows
                .iter()
                .map(|r| (r.ratio - 1.0).abs())
                .fold(0.0, f64::max);
            r.stat("rows", &rows).ratio("worst_relative_error", worst);
            for row in rows.iter().filter(|r| r.literature_check) {
                r.warnings.push(format!(
                    "{} a={} q={} c_or_r={}: displayed main term differs from local densities, literature check needed",
                    row.kind, row.a, row.q, row.c_or_r
                ));
            }
            r.to_json().map(String::into_bytes)
        }
    }
}

fn run_em(cfg: &RunConfig) -> Result<Vec<u8>> {
    let engine = cfg.engine()?;
    let y = cfg.need_y()?;
    let params = EMParams::new(cfg.x, y, cfg.j, cfg.alpha, 0.1)?;
    match cfg.format {
        Format::Csv => {
            let all = erdos_mirsky::tau_ratio_histogram(&engine, cfg.x, y, false)?;
            let sqf = erdos_mirsky::tau_ratio_histogram(&engine, cfg.x, y, true)?;
            csv_bytes(cfg, |out| {
                writeln!(out, "j,count,count_squarefree")?;
                for (j, c) in &all {
                    writeln!(out, "{j},{c},{}", sqf.get(j).copied().unwrap_or(0))?;
                }
                Ok(())
            })
        }
        Format::Json => {
            let e = sieve_counts::euler_e(cfg.trunc)?;
            let rep = erdos_mirsky::em_report(&engine, &params, e.value)?;
            let grid = match cfg.grid_step {
                Some(s) => QuadratureGrid::new(s, params.l_y)?,
                None => QuadratureGrid::default_for(params.l_y)?,
            };
            let mellin = erdos_mirsky::mellin_identity_check(&engine, &params, &grid)?;
            let mut r = ExperimentReport::new("em", config_value(cfg));
            r.param("x", cfg.x)
                .param("y", y)
                .param("j", cfg.j)
                .param("alpha", cfg.alpha)
                .param("L_y", params.l_y)
                .param("beta", params.beta);
            r.stat("count", rep.count)
                .stat("count_squarefree", rep.count_squarefree)
                .stat("normalized_count", rep.normalized_count)
                .stat("main_part", rep.main_part)
                .stat("error_part", rep.error_part)
                .stat("mellin", &mellin);
            r.reference("lower_bound_reference", rep.reference)
                .reference("main_part_order", rep.main_part_order);
            r.ratio("count_over_reference", rep.ratio)
                .ratio("main_part_over_order", rep.main_part / rep.main_part_order);
            r.warnings.extend(params.warnings.iter().cloned());
            r.to_json().map(String::into_bytes)
        }
    }
}

//! `svperc` subcommands.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use svperc_core::analysis::{
    self, a_n_ratio, compute_tn_relaxed, decompose_c123, f_n, g_n, lemma33_probe, FRef, GCurve,
};
use svperc_core::enumerate::FeasibilityCaps;
use svperc_core::exponents::{
    self, beta_p_scaling, fit_lambda, fit_rho, probe_varsigma, q_limit_estimate, q_variational,
    synthetic_beta_scaling, QRecord, QSource,
};
use svperc_core::montecarlo::{Histogram, McConfig, RatioSummary, RNG_ALGORITHM};
use svperc_core::{LatticeConfig, SvTable};

use crate::checks::{self, Check};
use crate::error::{CliError, CliResult, ExitStatus};
use crate::formats::{self, sha256_hex};
use crate::manifest::{now_utc, RunManifest};
use crate::parallel;
use crate::reports::{self, TableInfo, PROXY_LABEL};

#[derive(Debug, Parser, Serialize)]
#[command(name = "svperc", version, about = "Bond lattice animals by surface-to-volume ratio")]
pub struct Cli {
    /// Worker threads; 0 lets the runtime choose.
    #[arg(long, global = true, env = "SVPERC_THREADS", default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Build the exact count table sigma(n, m) and write it as CSV.
    Enumerate(EnumerateArgs),
    /// Analytics on a count table.
    Analyze {
        #[command(subcommand)]
        cmd: AnalyzeCmd,
    },
    /// Power-law fits and decay-rate estimates (finite-n proxies).
    Exponents {
        #[command(subcommand)]
        cmd: ExponentsCmd,
    },
    /// Seeded Monte Carlo histogram of the origin's cluster.
    Mc(McArgs),
    /// Invariant checks.
    Check(CheckArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct EnumerateArgs {
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long)]
    pub max_edges: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Critical probability stored in the table header (default only for d = 2).
    #[arg(long)]
    pub pc: Option<f64>,
    #[arg(long)]
    pub split_depth: Option<usize>,
}

/// Where a command gets its table: a CSV file, or an in-memory enumeration.
#[derive(Debug, Args, Serialize, Clone)]
pub struct TableArgs {
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Dimension for in-memory enumeration when no table file is given.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long)]
    pub pc: Option<f64>,
    /// Size limit for in-memory enumeration when no table file is given.
    #[arg(long)]
    pub max_edges: Option<usize>,
}

#[derive(Debug, Args, Serialize, Clone)]
pub struct OutArgs {
    /// Report path; the report goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum FRefArg {
    Delyon,
    Extrapolation,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum AnalyzeCmd {
    /// Maximizers t_n of P_p(|C| = n) over (0, p_c].
    Tn {
        #[command(flatten)]
        table: TableArgs,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Cluster-size probabilities P_p(|C| = n).
    Pmf {
        #[command(flatten)]
        table: TableArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// C1 + C2 + C3 split of P_{t_n}(|C| = n).
    Decompose {
        #[command(flatten)]
        table: TableArgs,
        #[arg(long, default_value_t = 1.0)]
        g: f64,
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Sum of a_n(m/n) over m/n in (center - halfwidth, center + halfwidth).
    WindowSums {
        #[command(flatten)]
        table: TableArgs,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        center: f64,
        #[arg(long)]
        halfwidth: f64,
        #[arg(long, value_enum, default_value_t = FRefArg::Extrapolation)]
        f_ref: FRefArg,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Narrow and wide window sums around alpha and alpha_n against the probabilities.
    WindowInequalities {
        #[command(flatten)]
        table: TableArgs,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, value_enum, default_value_t = FRefArg::Extrapolation)]
        f_ref: FRefArg,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Top-band ratio r_n per row.
    Lemma33 {
        #[command(flatten)]
        table: TableArgs,
        #[arg(long, default_value_t = 1)]
        from: usize,
        #[arg(long)]
        to: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// sup over p in (0, p_c) of p^n (1-p)^m.
    SupWeight {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0.5)]
        pc: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Per row, sum over m of sigma(n,m) sup_p p^n (1-p)^m.
    SupWeightSums {
        #[command(flatten)]
        table: TableArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// f_n, g_n and a_n at a ratio beta for every row.
    Growth {
        #[command(flatten)]
        table: TableArgs,
        #[arg(long)]
        beta: f64,
        #[arg(long, value_enum, default_value_t = FRefArg::Extrapolation)]
        f_ref: FRefArg,
        #[command(flatten)]
        out: OutArgs,
    },
    /// g_n(m/n) at every nonzero cell of a row.
    Gcurve {
        #[command(flatten)]
        table: TableArgs,
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Log-log slope of the cubic Taylor remainder of phi(a, a + gamma).
    Taylor {
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
        alpha: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        gammas: Option<Vec<f64>>,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Debug, Subcommand, Serialize)]
pub enum ExponentsCmd {
    /// Recover pure power laws with every fitter.
    Selftest {
        #[command(flatten)]
        out: OutArgs,
    },
    /// Decay exponent of p_c - t_n in n.
    Lambda {
        #[command(flatten)]
        table: TableArgs,
        /// Size window `lo:hi`.
        #[arg(long, value_parser = parse_size_window)]
        window: (usize, usize),
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Exponent of 1 - g_n(alpha + delta) in delta at one row.
    Varsigma {
        #[command(flatten)]
        table: TableArgs,
        #[arg(long)]
        n: Option<usize>,
        /// Offset window `lo:hi` for beta - alpha.
        #[arg(long, value_parser = parse_real_window)]
        delta_window: (f64, f64),
        #[command(flatten)]
        out: OutArgs,
    },
    /// Intercept of -ln P_p(n) / n against 1/n.
    QLimit {
        #[command(flatten)]
        table: TableArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.3,0.35,0.4,0.45")]
        p: Vec<f64>,
        #[arg(long, value_parser = parse_size_window)]
        window: (usize, usize),
        #[command(flatten)]
        out: OutArgs,
    },
    /// Minimum of -ln g(beta) - phi(1/p - 1, beta) over a beta interval.
    QVariational {
        #[command(flatten)]
        table: TableArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long, value_enum, default_value_t = FRefArg::Delyon)]
        f_ref: FRefArg,
        /// Beta interval `lo:hi`; defaults to [alpha, 2(d-1)].
        #[arg(long, value_parser = parse_real_window)]
        beta_grid: Option<(f64, f64)>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Exponent of q(p) in p_c - p.
    Rho {
        #[command(flatten)]
        table: TableArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.3,0.325,0.35,0.375,0.4,0.425,0.45")]
        p: Vec<f64>,
        #[arg(long, value_parser = parse_size_window)]
        window: Option<(usize, usize)>,
        #[arg(long, value_enum, default_value_t = QSourceArg::Limit)]
        source: QSourceArg,
        #[arg(long, value_enum, default_value_t = FRefArg::Extrapolation)]
        f_ref: FRefArg,
        #[command(flatten)]
        out: OutArgs,
    },
    /// sigma_p and sigma'_p of the variational minimizers.
    BetaScaling {
        #[command(flatten)]
        table: TableArgs,
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
        #[arg(long, value_enum, default_value_t = FRefArg::Extrapolation)]
        f_ref: FRefArg,
        /// Use g(alpha + delta) = exp(-delta^s) instead of a table reference.
        #[arg(long)]
        synthetic_varsigma: Option<f64>,
        /// y = 1/p - 1 - alpha values for the synthetic pipeline.
        #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-3,1e-4,1e-5")]
        y: Vec<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum QSourceArg {
    Limit,
    Variational,
}

#[derive(Debug, Args, Serialize)]
pub struct McArgs {
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Critical probability recorded in the configuration (default only for d = 2).
    #[arg(long)]
    pub pc: Option<f64>,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub samples: u64,
    #[arg(long)]
    pub seed: u64,
    /// Output prefix: writes `<prefix>.csv`, `<prefix>.json` and `<prefix>.manifest.json`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = svperc_core::montecarlo::DEFAULT_EDGE_CAP)]
    pub edge_cap: usize,
    /// Largest n kept as its own histogram cell.
    #[arg(long, default_value_t = 16)]
    pub n_max: usize,
    /// Summarize m/n over samples with n in `lo:hi`.
    #[arg(long, value_parser = parse_size_window)]
    pub condition: Option<(usize, usize)>,
    /// Summarize m/n over the top decile of observed cluster sizes.
    #[arg(long, conflicts_with = "condition")]
    pub condition_top_decile: bool,
}

#[derive(Debug, Args, Serialize)]
#[command(args_conflicts_with_subcommands = true)]
pub struct CheckArgs {
    /// Check a table file; without it the identity suite runs.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
    #[command(subcommand)]
    pub cmd: Option<CheckCmd>,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum CheckCmd {
    /// phi and big_phi identities, the sign of phi, sup_weight against a grid.
    Identities {
        #[command(flatten)]
        out: OutArgs,
    },
    /// Monte Carlo histogram against the exact cluster law.
    Bridge {
        #[arg(long)]
        table: PathBuf,
        /// Prefix given to `svperc mc --out`.
        #[arg(long)]
        mc: PathBuf,
        #[arg(long, default_value_t = 8)]
        max_n: usize,
        #[arg(long, default_value_t = 4.0)]
        z: f64,
        #[command(flatten)]
        out: OutArgs,
    },
}

fn parse_size_window(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo: usize = a.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: usize = b.trim().parse().map_err(|e| format!("{e}"))?;
    if lo > hi {
        return Err(format!("empty window {lo}:{hi}"));
    }
    Ok((lo, hi))
}

fn parse_real_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    if !(lo <= hi) {
        return Err(format!("empty window {lo}:{hi}"));
    }
    Ok((lo, hi))
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitStatus::Usage.code()
            } else {
                ExitStatus::Success.code()
            };
        }
    };
    let ctx = Context {
        command_line: args.iter().map(|a| a.to_string_lossy().into_owned()).collect(),
        config: serde_json::to_value(&cli).unwrap_or(Value::Null),
        started: now_utc(),
    };
    let threads = cli.threads;
    match parallel::with_threads(threads, || dispatch(&ctx, cli.command)) {
        Ok(()) => ExitStatus::Success.code(),
        Err(e) => {
            eprintln!("svperc: {e}");
            e.status().code()
        }
    }
}

struct Context {
    command_line: Vec<String>,
    config: Value,
    started: String,
}

impl Context {
    fn manifest(&self, table_sha256: Option<String>, outputs: Vec<PathBuf>) -> RunManifest {
        let mut m = RunManifest::new(self.command_line.clone(), self.config.clone(), self.started.clone());
        m.table_sha256 = table_sha256;
        m.outputs = outputs;
        m
    }

    /// Writes `report` to `--out` (with a manifest beside it) or to stdout.
    fn emit<T: Serialize>(&self, command: &str, table: Option<&TableInfo>, out: &OutArgs, body: T) -> CliResult<()> {
        #[derive(Serialize)]
        struct Envelope<'a, T> {
            command: &'a str,
            table: Option<&'a TableInfo>,
            manifest: Option<String>,
            #[serde(flatten)]
            body: T,
        }
        let manifest = out
            .out
            .as_ref()
            .map(|p| RunManifest::sidecar_path(p).display().to_string());
        let text = crate::json::to_string(&Envelope {
            command,
            table,
            manifest,
            body,
        });
        match &out.out {
            Some(path) => {
                formats::write_file(path, text.as_bytes())?;
                self.manifest(table.map(|t| t.sha256.clone()), vec![path.clone()])
                    .write_beside(path)?;
            }
            None => print!("{text}"),
        }
        Ok(())
    }
}

fn lattice(dim: usize, pc: Option<f64>) -> CliResult<LatticeConfig> {
    Ok(match pc {
        Some(pc) => LatticeConfig::new(dim, pc)?,
        None => LatticeConfig::with_default_pc(dim)?,
    })
}

fn resolve_table(args: &TableArgs, needed: Option<usize>) -> CliResult<(SvTable, TableInfo)> {
    let (table, source, sha256) = match &args.table {
        Some(path) => {
            let loaded = formats::load_table(path)?;
            (loaded.table, path.display().to_string(), loaded.sha256)
        }
        None => {
            let n_max = args.max_edges.or(needed).ok_or_else(|| {
                CliError::Usage("give --table, or --max-edges for an in-memory table".into())
            })?;
            let config = lattice(args.dim, args.pc)?;
            let table = parallel::enumerate_parallel(config, n_max, &FeasibilityCaps::default(), None)?;
            let sha = sha256_hex(formats::table_to_csv(&table).as_bytes());
            (table, String::from("in-memory"), sha)
        }
    };
    if let Some(n) = needed {
        table.check_n(n)?;
    }
    let c = table.config();
    let info = TableInfo {
        source,
        sha256,
        d: c.dim(),
        n_max: table.n_max(),
        p_c: c.p_c(),
    };
    Ok((table, info))
}

fn rows(table: &SvTable, n: Option<usize>) -> Vec<usize> {
    match n {
        Some(n) => vec![n],
        None => (1..=table.n_max()).collect(),
    }
}

fn f_ref<'t>(arg: FRefArg, table: &'t SvTable) -> FRef<'t> {
    match arg {
        FRefArg::Delyon => FRef::delyon(table.config().alpha()),
        FRefArg::Extrapolation => FRef::table_extrapolation(table),
    }
}

fn dispatch(ctx: &Context, command: Command) -> CliResult<()> {
    match command {
        Command::Enumerate(a) => cmd_enumerate(ctx, a),
        Command::Analyze { cmd } => cmd_analyze(ctx, cmd),
        Command::Exponents { cmd } => cmd_exponents(ctx, cmd),
        Command::Mc(a) => cmd_mc(ctx, a),
        Command::Check(a) => cmd_check(ctx, a),
    }
}

fn cmd_enumerate(ctx: &Context, a: EnumerateArgs) -> CliResult<()> {
    let config = lattice(a.dim, a.pc)?;
    let caps = FeasibilityCaps::default();
    let table = parallel::enumerate_parallel(config, a.max_edges, &caps, a.split_depth)?;
    let csv = formats::table_to_csv(&table);
    formats::write_file(&a.out, csv.as_bytes())?;
    ctx.manifest(Some(sha256_hex(csv.as_bytes())), vec![a.out.clone()])
        .write_beside(&a.out)?;
    eprintln!("svperc: wrote {} cells to {}", table.len(), a.out.display());
    Ok(())
}

fn cmd_analyze(ctx: &Context, cmd: AnalyzeCmd) -> CliResult<()> {
    match cmd {
        AnalyzeCmd::Tn { table, n, rho, out } => {
            let (t, info) = resolve_table(&table, n)?;
            let p_c = t.config().p_c();
            let records = rows(&t, n)
                .into_iter()
                .map(|n| compute_tn_relaxed(&t, n, p_c, rho).map(|r| reports::Tn::from(&r)))
                .collect::<Result<Vec<_>, _>>()?;
            ctx.emit("analyze tn", Some(&info), &out, json!({ "rho": rho, "records": records }))
        }
        AnalyzeCmd::Pmf { table, p, n, out } => {
            let (t, info) = resolve_table(&table, n)?;
            let mut records = Vec::new();
            for &p in &p {
                for n in rows(&t, n) {
                    records.push(json!({
                        "p": p,
                        "n": n,
                        "pmf": analysis::cluster_size_pmf(&t, p, n)?,
                        "log_pmf": analysis::log_cluster_size_pmf(&t, p, n)?,
                    }));
                }
            }
            ctx.emit("analyze pmf", Some(&info), &out, json!({ "records": records }))
        }
        AnalyzeCmd::Decompose { table, g, n, out } => {
            let (t, info) = resolve_table(&table, n)?;
            let p_c = t.config().p_c();
            let splits = rows(&t, n)
                .into_iter()
                .map(|n| decompose_c123(&t, n, g, p_c).map(|d| reports::Split::from(&d)))
                .collect::<Result<Vec<_>, _>>()?;
            ctx.emit("analyze decompose", Some(&info), &out, json!({ "rho": 1.0, "records": splits }))
        }
        AnalyzeCmd::WindowSums { table, n, center, halfwidth, f_ref: fr, out } => {
            let (t, info) = resolve_table(&table, Some(n))?;
            let reference = f_ref(fr, &t);
            let sum = analysis::window_sums(&t, n, center, halfwidth, &reference)?;
            ctx.emit(
                "analyze window-sums",
                Some(&info),
                &out,
                json!({ "f_ref_mode": reference.mode().to_string(), "n": n, "center": center,
                        "halfwidth": halfwidth, "sum": sum }),
            )
        }
        AnalyzeCmd::WindowInequalities { table, n, c, f_ref: fr, out } => {
            let (t, info) = resolve_table(&table, n)?;
            let reference = f_ref(fr, &t);
            let first = if n.is_none() { 2 } else { 1 };
            let records = rows(&t, n)
                .into_iter()
                .filter(|&n| n >= first)
                .map(|n| {
                    analysis::window_inequalities(&t, n, c, &reference)
                        .map(|w| reports::Inequalities::from(&w))
                })
                .collect::<Result<Vec<_>, _>>()?;
            ctx.emit(
                "analyze window-inequalities",
                Some(&info),
                &out,
                json!({ "f_ref_mode": reference.mode().to_string(), "rho": 1.0, "records": records }),
            )
        }
        AnalyzeCmd::Lemma33 { table, from, to, out } => {
            let (t, info) = resolve_table(&table, to)?;
            let to = to.unwrap_or(t.n_max());
            let r = lemma33_probe(&t, from, to)?;
            ctx.emit(
                "analyze lemma33",
                Some(&info),
                &out,
                json!({ "rows": r.rows, "decreasing": r.decreasing,
                        "eventually_below_one": r.eventually_below_one }),
            )
        }
        AnalyzeCmd::SupWeight { n, m, pc, out } => {
            let v = analysis::sup_weight(n, m, pc)?;
            ctx.emit("analyze sup-weight", None, &out, json!({ "n": n, "m": m, "p_c": pc, "sup_weight": v }))
        }
        AnalyzeCmd::SupWeightSums { table, out } => {
            let (t, info) = resolve_table(&table, None)?;
            let sums = analysis::sup_weight_sums(&t, t.config().p_c())?;
            ctx.emit("analyze sup-weight-sums", Some(&info), &out, json!({ "rows": sums }))
        }
        AnalyzeCmd::Growth { table, beta, f_ref: fr, out } => {
            let (t, info) = resolve_table(&table, None)?;
            let reference = f_ref(fr, &t);
            let mut records = Vec::new();
            for n in 1..=t.n_max() {
                let a_n = match a_n_ratio(&t, n, beta, &reference) {
                    Ok(v) => Some(v),
                    Err(svperc_core::Error::UndefinedRatio { .. }) => None,
                    Err(e) => return Err(e.into()),
                };
                records.push(json!({ "n": n, "f_n": f_n(&t, n, beta)?, "g_n": g_n(&t, n, beta)?, "a_n": a_n }));
            }
            ctx.emit(
                "analyze growth",
                Some(&info),
                &out,
                json!({ "beta": beta, "f_ref_mode": reference.mode().to_string(),
                        "f_ref": reference.f(beta)?, "f_ref_exact": reference.is_exact_at(beta),
                        "records": records }),
            )
        }
        AnalyzeCmd::Gcurve { table, n, out } => {
            let (t, info) = resolve_table(&table, n)?;
            let n = n.unwrap_or(t.n_max());
            let curve = GCurve::from_table_row(&t, n)?;
            let samples: Vec<Value> = curve
                .samples()
                .iter()
                .map(|s| json!({ "beta": s.beta, "n": s.n, "g": s.g_value }))
                .collect();
            ctx.emit("analyze gcurve", Some(&info), &out, json!({ "samples": samples }))
        }
        AnalyzeCmd::Taylor { alpha, gammas, out } => {
            let gammas = gammas.unwrap_or_else(|| (0..9).map(|k| 1e-3 * 10f64.powf(k as f64 / 4.0)).collect());
            let mut records = Vec::new();
            for a in alpha {
                let c = analysis::phi_taylor_check(a, &gammas)?;
                records.push(json!({
                    "alpha": a,
                    "slope": c.slope,
                    "r_squared": c.r_squared,
                    "points": c.points.iter().map(|p| json!({ "gamma": p.gamma, "remainder": p.remainder })).collect::<Vec<_>>(),
                }));
            }
            ctx.emit("analyze taylor", None, &out, json!({ "records": records }))
        }
    }
}

fn nonincreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] <= w[0])
}

fn cmd_exponents(ctx: &Context, cmd: ExponentsCmd) -> CliResult<()> {
    match cmd {
        ExponentsCmd::Selftest { out } => {
            let report = exponents::selftest()?;
            let cases: Vec<Value> = report
                .cases
                .iter()
                .map(|c| json!({ "name": c.name, "expected": c.expected, "fitted": c.fitted,
                                 "r_squared": c.r_squared, "passed": c.passed }))
                .collect();
            let passed = report.all_passed();
            ctx.emit("exponents selftest", None, &out, json!({ "passed": passed, "cases": cases }))?;
            if passed {
                Ok(())
            } else {
                Err(CliError::Invariant("fitter self-test".into()))
            }
        }
        ExponentsCmd::Lambda { table, window, rho, out } => {
            let (t, info) = resolve_table(&table, Some(window.1))?;
            let p_c = t.config().p_c();
            let records = (window.0.max(1)..=window.1)
                .map(|n| compute_tn_relaxed(&t, n, p_c, rho))
                .collect::<Result<Vec<_>, _>>()?;
            let fit = fit_lambda(&records, p_c, window)?;
            ctx.emit(
                "exponents lambda",
                Some(&info),
                &out,
                json!({ "rho": rho, "window": format!("{}:{}", window.0, window.1),
                        "fit": reports::Fit::from(&fit),
                        "records": records.iter().map(reports::Tn::from).collect::<Vec<_>>() }),
            )
        }
        ExponentsCmd::Varsigma { table, n, delta_window, out } => {
            let (t, info) = resolve_table(&table, n)?;
            let n = n.unwrap_or(t.n_max());
            let curve = GCurve::from_table_row(&t, n)?;
            let fit = probe_varsigma(&curve, t.config().alpha(), delta_window)?;
            ctx.emit(
                "exponents varsigma",
                Some(&info),
                &out,
                json!({ "n": n, "window": format!("{}:{}", delta_window.0, delta_window.1),
                        "f_ref_mode": "table_rows", "fit": reports::Fit::from(&fit) }),
            )
        }
        ExponentsCmd::QLimit { table, p, window, out } => {
            let (t, info) = resolve_table(&table, Some(window.1))?;
            let qs = p
                .iter()
                .map(|&p| q_limit_estimate(&t, p, window))
                .collect::<Result<Vec<_>, _>>()?;
            let records: Vec<Value> = p.iter().zip(&qs).map(|(p, q)| json!({ "p": p, "q_limit": q })).collect();
            ctx.emit(
                "exponents q-limit",
                Some(&info),
                &out,
                json!({ "window": format!("{}:{}", window.0, window.1), "label": PROXY_LABEL,
                        "all_positive": qs.iter().all(|&q| q > 0.0),
                        "nonincreasing_in_p": nonincreasing(&qs), "records": records }),
            )
        }
        ExponentsCmd::QVariational { table, p, f_ref: fr, beta_grid, out } => {
            let needs_table = matches!(fr, FRefArg::Extrapolation);
            let (t, info) = if needs_table || table.table.is_some() {
                let (t, i) = resolve_table(&table, None)?;
                (Some(t), Some(i))
            } else {
                (None, None)
            };
            let config = match &t {
                Some(t) => *t.config(),
                None => lattice(table.dim, table.pc)?,
            };
            let reference = match (&t, fr) {
                (Some(t), FRefArg::Extrapolation) => FRef::table_extrapolation(t),
                _ => FRef::delyon(config.alpha()),
            };
            let grid = beta_grid.unwrap_or((config.alpha(), config.ratio_limit() as f64));
            let records = p
                .iter()
                .map(|&p| q_variational(&reference, p, &config, grid).map(|r| reports::Q::from(&r)))
                .collect::<Result<Vec<_>, _>>()?;
            ctx.emit(
                "exponents q-variational",
                info.as_ref(),
                &out,
                json!({ "f_ref_mode": reference.mode().to_string(), "window": format!("{}:{}", grid.0, grid.1),
                        "label": PROXY_LABEL, "records": records }),
            )
        }
        ExponentsCmd::Rho { table, p, window, source, f_ref: fr, out } => {
            let (t, info) = resolve_table(&table, window.map(|w| w.1))?;
            let config = *t.config();
            let (records, src, mode, win) = match source {
                QSourceArg::Limit => {
                    let window = window
                        .ok_or_else(|| CliError::Usage("--window is required with --source limit".into()))?;
                    let recs = p
                        .iter()
                        .map(|&p| q_limit_estimate(&t, p, window).map(|q| QRecord::from_limit(p, q)))
                        .collect::<Result<Vec<_>, _>>()?;
                    (recs, QSource::Limit, String::from("none"), format!("{}:{}", window.0, window.1))
                }
                QSourceArg::Variational => {
                    let reference = f_ref(fr, &t);
                    let grid = (config.alpha(), config.ratio_limit() as f64);
                    let recs = p
                        .iter()
                        .map(|&p| q_variational(&reference, p, &config, grid))
                        .collect::<Result<Vec<_>, _>>()?;
                    (recs, QSource::Variational, reference.mode().to_string(), format!("{}:{}", grid.0, grid.1))
                }
            };
            let fit = fit_rho(&records, config.p_c(), src)?;
            ctx.emit(
                "exponents rho",
                Some(&info),
                &out,
                json!({ "f_ref_mode": mode, "window": win, "fit": reports::Fit::from(&fit),
                        "records": records.iter().map(reports::Q::from).collect::<Vec<_>>() }),
            )
        }
        ExponentsCmd::BetaScaling { table, p, f_ref: fr, synthetic_varsigma, y, out } => {
            if let Some(s) = synthetic_varsigma {
                let config = lattice(table.dim, table.pc)?;
                let probes = synthetic_beta_scaling(&config, s, &y)?;
                return ctx.emit(
                    "exponents beta-scaling",
                    None,
                    &out,
                    json!({ "f_ref_mode": "synthetic", "varsigma": s, "label": PROXY_LABEL,
                            "probes": probes.iter().map(reports::Scaling::from).collect::<Vec<_>>() }),
                );
            }
            if p.is_empty() {
                return Err(CliError::Usage("give --p, or --synthetic-varsigma".into()));
            }
            let (t, info) = resolve_table(&table, None)?;
            let config = *t.config();
            let reference = f_ref(fr, &t);
            let grid = (config.alpha(), config.ratio_limit() as f64);
            let records = p
                .iter()
                .map(|&p| q_variational(&reference, p, &config, grid))
                .collect::<Result<Vec<_>, _>>()?;
            let probes = beta_p_scaling(&records, &config);
            ctx.emit(
                "exponents beta-scaling",
                Some(&info),
                &out,
                json!({ "f_ref_mode": reference.mode().to_string(), "label": PROXY_LABEL,
                        "records": records.iter().map(reports::Q::from).collect::<Vec<_>>(),
                        "probes": probes.iter().map(reports::Scaling::from).collect::<Vec<_>>() }),
            )
        }
    }
}

fn with_extension(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(ext);
    PathBuf::from(s)
}

#[derive(Debug, Serialize)]
struct McSummary {
    d: usize,
    p: f64,
    seed: u64,
    samples: u64,
    edge_cap: usize,
    n_max: usize,
    rng: &'static str,
    total: u64,
    beyond_n_max: u64,
    truncated: u64,
    histogram_sha256: String,
    conditional: Option<Conditional>,
}

#[derive(Debug, Serialize)]
struct Conditional {
    window: (usize, usize),
    count: u64,
    mean: Option<f64>,
    quantiles: Vec<(f64, f64)>,
    empty: bool,
    expected_interval: (f64, f64),
    mean_in_expected: bool,
}

fn cmd_mc(ctx: &Context, a: McArgs) -> CliResult<()> {
    let config = lattice(a.dim, a.pc)?;
    let mc = McConfig::new(config, a.p, a.seed, a.samples)?.with_edge_cap(a.edge_cap)?;
    let hist = parallel::empirical_pmf_parallel(&mc, a.n_max);
    let csv = formats::histogram_to_csv(&hist);
    let window = if a.condition_top_decile {
        let sizes = parallel::observed_sizes(&mc);
        sizes.last().map(|&max| {
            let rank = ((0.9 * sizes.len() as f64).ceil() as usize).clamp(1, sizes.len());
            (sizes[rank - 1], max)
        })
    } else {
        a.condition
    };
    let conditional = window.map(|w| {
        let s = RatioSummary::from_ratios(parallel::conditional_ratios_parallel(&mc, w));
        let expected = (config.alpha(), 1.0 / a.p - 1.0);
        Conditional {
            window: w,
            count: s.count,
            mean: (!s.empty).then_some(s.mean),
            mean_in_expected: !s.empty && s.mean > expected.0 && s.mean < expected.1,
            quantiles: s.quantiles,
            empty: s.empty,
            expected_interval: expected,
        }
    });
    let summary = McSummary {
        d: a.dim,
        p: a.p,
        seed: a.seed,
        samples: a.samples,
        edge_cap: a.edge_cap,
        n_max: a.n_max,
        rng: RNG_ALGORITHM,
        total: hist.total(),
        beyond_n_max: hist.beyond(),
        truncated: hist.truncated(),
        histogram_sha256: sha256_hex(csv.as_bytes()),
        conditional,
    };
    let csv_path = with_extension(&a.out, ".csv");
    let json_path = with_extension(&a.out, ".json");
    formats::write_file(&csv_path, csv.as_bytes())?;
    formats::write_file(&json_path, crate::json::to_string(&summary).as_bytes())?;
    ctx.manifest(None, vec![csv_path.clone(), json_path.clone()])
        .write_to(&with_extension(&a.out, ".manifest.json"))?;
    eprintln!(
        "svperc: {} samples, {} beyond n_max, {} truncated -> {}",
        hist.total(),
        hist.beyond(),
        hist.truncated(),
        csv_path.display()
    );
    Ok(())
}

/// Reads a histogram written by `svperc mc --out <prefix>`, returning it with `p`.
pub fn load_histogram(prefix: &Path) -> CliResult<(Histogram, f64, usize)> {
    let csv_path = with_extension(prefix, ".csv");
    let json_path = with_extension(prefix, ".json");
    let csv = String::from_utf8_lossy(&formats::read_file(&csv_path)?).into_owned();
    let cells = formats::histogram_cells_from_csv(&csv, &csv_path)?;
    let summary: Value = serde_json::from_slice(&formats::read_file(&json_path)?).map_err(|e| CliError::Format {
        path: json_path.clone(),
        line: e.line(),
        message: e.to_string(),
    })?;
    let field = |k: &str| {
        summary.get(k).cloned().ok_or_else(|| CliError::Format {
            path: json_path.clone(),
            line: 0,
            message: format!("missing `{k}`"),
        })
    };
    let num = |k: &str| -> CliResult<u64> {
        field(k)?.as_u64().ok_or_else(|| CliError::Format {
            path: json_path.clone(),
            line: 0,
            message: format!("`{k}` is not an integer"),
        })
    };
    let p = field("p")?.as_f64().unwrap_or(f64::NAN);
    let d = num("d")? as usize;
    let hist = Histogram::from_parts(
        num("n_max")? as usize,
        cells,
        num("beyond_n_max")?,
        num("truncated")?,
        num("total")?,
    )?;
    Ok((hist, p, d))
}

fn finish_checks(ctx: &Context, command: &str, table: Option<&TableInfo>, out: &OutArgs, checks: Vec<Check>) -> CliResult<()> {
    let passed = checks::all_passed(&checks);
    for c in checks.iter().filter(|c| !c.passed) {
        eprintln!("svperc: FAILED {}: {}", c.name, c.detail);
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    ctx.emit(command, table, out, json!({ "passed": passed, "checks": checks }))?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Invariant(failed.join(", ")))
    }
}

fn cmd_check(ctx: &Context, a: CheckArgs) -> CliResult<()> {
    match a.cmd {
        Some(CheckCmd::Identities { out }) => finish_checks(ctx, "check identities", None, &out, checks::identity_suite()),
        Some(CheckCmd::Bridge { table, mc, max_n, z, out }) => {
            let loaded = formats::load_table(&table)?;
            let (hist, p, d) = load_histogram(&mc)?;
            if d != loaded.table.config().dim() {
                return Err(CliError::Usage(format!(
                    "histogram is for d={d}, table for d={}",
                    loaded.table.config().dim()
                )));
            }
            let report = checks::bridge(&loaded.table, &hist, p, max_n, z);
            let info = TableInfo {
                source: table.display().to_string(),
                sha256: loaded.sha256,
                d,
                n_max: loaded.table.n_max(),
                p_c: loaded.table.config().p_c(),
            };
            let check = Check {
                name: String::from("bridge"),
                passed: report.passed,
                detail: format!(
                    "max |z| = {:.3} over {} cells (limit {}), conserved = {}, impossible cells = {:?}",
                    report.max_abs_z,
                    report.cells.len(),
                    z,
                    report.conserved,
                    report.impossible_cells
                ),
            };
            let passed = report.passed;
            if !passed {
                eprintln!("svperc: FAILED bridge: {}", check.detail);
            }
            ctx.emit("check bridge", Some(&info), &out, json!({ "passed": passed, "checks": [check], "report": report }))?;
            if passed {
                Ok(())
            } else {
                Err(CliError::Invariant(String::from("bridge")))
            }
        }
        None => match &a.table {
            Some(path) => {
                let loaded = formats::load_table(path)?;
                let c = loaded.table.config();
                let info = TableInfo {
                    source: path.display().to_string(),
                    sha256: loaded.sha256.clone(),
                    d: c.dim(),
                    n_max: loaded.table.n_max(),
                    p_c: c.p_c(),
                };
                let checks = checks::table_suite(&loaded.table)?;
                finish_checks(ctx, "check", Some(&info), &a.out, checks)
            }
            None => finish_checks(ctx, "check", None, &a.out, checks::identity_suite()),
        },
    }
}

//! The `rankmatch` command line.
//!
//! Every subcommand prints one JSON document (or writes it to `--out`).
//! Exit codes: 0 success, 1 data or model error, 2 usage error.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analysis::{self, report, SeKind};
use crate::elicitation::{self, MplPayment, MplResponse, TaskResponse};
use crate::equilibrium::{self, LowerStage, SymmetricInstance};
use crate::error::Error;
use crate::market::{self, MarketInstance, Matching, Outcome, RankList};
use crate::mechanisms::{self, MechanismKind, TieBreakOrder};
use crate::money::{Cents, Exact};
use crate::rng;
use crate::simulation::{self, LowerRanking, SimConfig, StrategyProfile};

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_REPLICATIONS: u64 = 100_000;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 1,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Parser)]
#[command(name = "rankmatch", version, about = "RSD and Boston matching under rankings-dependent utility")]
pub struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores); output does not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// JSON file of defaults; command-line flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (a directory for `analyze`) instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one mechanism on a report profile.
    Mechanism(MechanismArgs),
    /// Exact expected utilities over all tie-break orders.
    Expect(ExpectArgs),
    /// Solve the symmetric environment for both mechanisms.
    Equilibrium(EquilibriumArgs),
    /// Monte Carlo over tie-break orders and lower-good rankings.
    Simulate(SimulateArgs),
    /// Analyze a session CSV.
    Analyze(AnalyzeArgs),
    /// Decode price-list responses and optionally resolve payments.
    ElicitDecode(ElicitArgs),
    /// Run the built-in golden checks.
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindArg {
    Rsd,
    Boston,
}

impl From<KindArg> for MechanismKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Rsd => MechanismKind::Rsd,
            KindArg::Boston => MechanismKind::Boston,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum LowerStageArg {
    Lottery,
    SharedTieBreak,
}

impl From<LowerStageArg> for LowerStage {
    fn from(s: LowerStageArg) -> Self {
        match s {
            LowerStageArg::Lottery => LowerStage::Lottery,
            LowerStageArg::SharedTieBreak => LowerStage::SharedTieBreak,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum LowerRankingArg {
    Common,
    PerAgent,
}

impl From<LowerRankingArg> for LowerRanking {
    fn from(s: LowerRankingArg) -> Self {
        match s {
            LowerRankingArg::Common => LowerRanking::Common,
            LowerRankingArg::PerAgent => LowerRanking::PerAgent,
        }
    }
}

#[derive(Debug, Args)]
pub struct MechanismArgs {
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    /// JSON `{ "reports": [[good ids]] }`.
    #[arg(long)]
    pub reports: PathBuf,
    /// Tie-break order as comma-separated agent ids, highest priority first.
    /// Drawn from the seed when absent.
    #[arg(long, value_delimiter = ',')]
    pub order: Option<Vec<usize>>,
    /// Market JSON; adds utilities and welfare to the output.
    #[arg(long)]
    pub market: Option<PathBuf>,
    /// Also check ex-post Pareto efficiency against the reports.
    #[arg(long)]
    pub pareto: bool,
}

#[derive(Debug, Args)]
pub struct ExpectArgs {
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    #[arg(long)]
    pub market: PathBuf,
    #[arg(long)]
    pub reports: PathBuf,
}

#[derive(Debug, Args)]
pub struct EquilibriumArgs {
    /// Symmetric instance JSON `{ "n", "v1", "v2", "vbar", "rho" }` in cents.
    #[arg(long)]
    pub instance: PathBuf,
    /// Cross-check each mechanism by exhaustive enumeration (n <= 6).
    #[arg(long)]
    pub brute_force: bool,
    /// Check whether all-truthful reporting is an equilibrium (n <= 6).
    #[arg(long)]
    pub truthtelling: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    #[arg(long, conflicts_with = "instance")]
    pub market: Option<PathBuf>,
    /// Symmetric instance JSON, used as the market.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// Fixed reports for every replication.
    #[arg(long, conflicts_with = "n1")]
    pub reports: Option<PathBuf>,
    /// Structured profile: agents `0..n1` list the best good first.
    #[arg(long)]
    pub n1: Option<usize>,
    #[arg(long)]
    pub replications: Option<u64>,
    #[arg(long, value_enum)]
    pub lower_stage: Option<LowerStageArg>,
    #[arg(long, value_enum)]
    pub lower_ranking: Option<LowerRankingArg>,
    /// CSV of per-replication records.
    #[arg(long)]
    pub records: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub session: PathBuf,
    /// Truth-telling tolerance in dollars; repeatable. Default 0.00 and 2.00.
    #[arg(long)]
    pub tolerance: Vec<Cents>,
    /// Heteroskedasticity-robust (HC1) standard errors.
    #[arg(long)]
    pub robust: bool,
}

#[derive(Debug, Args)]
pub struct ElicitArgs {
    /// Responses CSV: subject_id,task_id,screen1_row,screen2_row,switch_row.
    #[arg(long, required_unless_present = "mpl", conflicts_with = "mpl")]
    pub responses: Option<PathBuf>,
    /// A single price-list response as `screen1_row,screen2_row`.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub mpl: Option<Vec<u8>>,
    /// Resolve payments with draws from the seed.
    #[arg(long)]
    pub pay: bool,
}

/// Defaults read from `--config`. Keys mirror the long flag names.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub kind: Option<KindArg>,
    pub replications: Option<u64>,
    pub lower_stage: Option<LowerStageArg>,
    pub lower_ranking: Option<LowerRankingArg>,
    /// Dollar strings, e.g. `["0.00", "2.00"]`.
    pub tolerance: Option<Vec<String>>,
    pub robust: Option<bool>,
}

/// Parses `argv` (including the program name), runs, and returns the exit code.
pub fn run_command<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                2
            } else {
                let _ = write!(stdout, "{e}");
                0
            };
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn load_config(path: Option<&Path>) -> CliResult<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => read_json(p),
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(f)).map_err(|e| {
        CliError::Data(Error::data(path.display().to_string(), e.line(), e.to_string()))
    })
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> CliResult<i32> {
    let cfg = load_config(cli.config.as_deref())?;
    let threads = match cli.threads.or(cfg.threads) {
        Some(0) => return Err(usage("--threads must be at least 1")),
        Some(t) => t,
        None => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| usage(format!("cannot start {threads} threads: {e}")))?;
    let (doc, code) = pool.install(|| dispatch(cli, &cfg))?;
    if let Some(doc) = doc {
        emit(&doc, cli.out.as_deref(), stdout)?;
    }
    Ok(code)
}

/// Returns the document to print (if any) and the exit code.
fn dispatch(cli: &Cli, cfg: &FileConfig) -> CliResult<(Option<String>, i32)> {
    let seed = cli.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let kind = |k: Option<KindArg>| -> CliResult<MechanismKind> {
        k.or(cfg.kind)
            .map(Into::into)
            .ok_or_else(|| usage("--kind is required (rsd or boston)"))
    };
    let doc = match &cli.command {
        Command::Mechanism(a) => to_json(&cmd_mechanism(kind(a.kind)?, a, seed)?)?,
        Command::Expect(a) => to_json(&cmd_expect(kind(a.kind)?, a)?)?,
        Command::Equilibrium(a) => to_json(&cmd_equilibrium(a)?)?,
        Command::Simulate(a) => to_json(&cmd_simulate(kind(a.kind)?, a, cfg, seed)?)?,
        Command::Analyze(a) => return Ok((cmd_analyze(a, cfg, cli.out.as_deref())?, 0)),
        Command::ElicitDecode(a) => to_json(&cmd_elicit(a, seed)?)?,
        Command::Selftest => {
            let (text, ok) = selftest();
            return Ok((Some(text), if ok { 0 } else { 1 }));
        }
    };
    Ok((Some(doc), 0))
}

fn to_json<T: Serialize>(v: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(Error::from)?;
    s.push('\n');
    Ok(s)
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::io(p, e))?,
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e))?,
    }
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportsFile {
    reports: Vec<Vec<usize>>,
}

fn read_reports(path: &Path) -> CliResult<Vec<RankList>> {
    let f: ReportsFile = read_json(path)?;
    f.reports
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            RankList::new(r).map_err(|e| {
                CliError::Data(Error::data(path.display().to_string(), i, format!("report {i}: {e}")))
            })
        })
        .collect()
}

fn read_market(path: &Path) -> CliResult<MarketInstance> {
    read_json(path)
}

fn read_instance(path: &Path) -> CliResult<SymmetricInstance> {
    read_json(path)
}

#[derive(Debug, Serialize)]
pub struct MechanismOutput {
    pub mechanism: MechanismKind,
    pub order: Vec<usize>,
    pub assignment: Vec<usize>,
    pub received_rank: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub utility: Option<Vec<Cents>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub welfare: Option<market::WelfareBreakdown>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pareto_efficient: Option<bool>,
}

fn cmd_mechanism(kind: MechanismKind, a: &MechanismArgs, seed: u64) -> CliResult<MechanismOutput> {
    let reports = read_reports(&a.reports)?;
    let n = reports.len();
    let market = a.market.as_deref().map(read_market).transpose()?;
    let (matching, order, outcome): (Matching, TieBreakOrder, Option<Outcome>) = match (&a.order, &market) {
        (None, Some(m)) => {
            let (outcome, order) = mechanisms::run_random(kind, m, &reports, seed)?;
            (outcome.matching.clone(), order, Some(outcome))
        }
        (order, market) => {
            let order = match order {
                Some(o) => TieBreakOrder::new(o.clone()).map_err(|e| usage(format!("--order: {e}")))?,
                None => TieBreakOrder::draw(n, seed, rng::MECHANISM_STREAM),
            };
            let matching = mechanisms::run(kind, &reports, &order)?;
            let outcome = market
                .as_ref()
                .map(|m| Outcome::evaluate(matching.clone(), &reports, m))
                .transpose()?;
            (matching, order, outcome)
        }
    };
    let received_rank = (0..n)
        .map(|i| market::received_rank(&matching, &reports, i))
        .collect::<Result<Vec<_>, _>>()?;
    let pareto_efficient = if a.pareto {
        Some(mechanisms::is_pareto_efficient(&matching, &reports)?)
    } else {
        None
    };
    let labels = market.as_ref().map(|m| {
        matching
            .assignment()
            .iter()
            .map(|&g| m.goods()[g].label.clone())
            .collect()
    });
    Ok(MechanismOutput {
        mechanism: kind,
        order: order.as_slice().to_vec(),
        assignment: matching.assignment().to_vec(),
        received_rank,
        labels,
        utility: outcome.as_ref().map(|o| o.utility.clone()),
        welfare: match (&outcome, &market) {
            (Some(o), Some(m)) => Some(market::outcome_welfare(o, m)),
            _ => None,
        },
        pareto_efficient,
    })
}

#[derive(Debug, Serialize)]
pub struct ExpectOutput {
    pub mechanism: MechanismKind,
    /// Exact expected utility in cents, as a reduced fraction.
    pub eu_cents: Vec<String>,
    pub eu_dollars: Vec<f64>,
}

fn cmd_expect(kind: MechanismKind, a: &ExpectArgs) -> CliResult<ExpectOutput> {
    let market = read_market(&a.market)?;
    let reports = read_reports(&a.reports)?;
    let eu = mechanisms::exact_expected_utilities(kind, &reports, &market)?;
    Ok(ExpectOutput {
        mechanism: kind,
        eu_cents: eu.iter().map(Exact::to_string).collect(),
        eu_dollars: eu.iter().map(crate::money::exact_to_dollars).collect(),
    })
}

#[derive(Debug, Serialize)]
pub struct Truthtelling {
    pub rsd: bool,
    pub boston: bool,
}

#[derive(Debug, Serialize)]
pub struct EquilibriumOutput {
    #[serde(flatten)]
    pub report: equilibrium::SolverReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truthtelling: Option<Truthtelling>,
}

fn cmd_equilibrium(a: &EquilibriumArgs) -> CliResult<EquilibriumOutput> {
    let inst = read_instance(&a.instance)?;
    let report = equilibrium::solver_report(&inst, a.brute_force)?;
    let truthtelling = if a.truthtelling {
        Some(Truthtelling {
            rsd: equilibrium::check_truthtelling_equilibrium(MechanismKind::Rsd, &inst)?,
            boston: equilibrium::check_truthtelling_equilibrium(MechanismKind::Boston, &inst)?,
        })
    } else {
        None
    };
    Ok(EquilibriumOutput { report, truthtelling })
}

fn cmd_simulate(
    kind: MechanismKind,
    a: &SimulateArgs,
    cfg: &FileConfig,
    seed: u64,
) -> CliResult<simulation::SimReport> {
    let market = match (&a.market, &a.instance) {
        (Some(m), _) => read_market(m)?,
        (None, Some(i)) => read_instance(i)?.to_market(),
        (None, None) => return Err(usage("one of --market or --instance is required")),
    };
    let profile = match (&a.reports, a.n1) {
        (Some(r), _) => StrategyProfile::fixed(read_reports(r)?),
        (None, Some(n1)) => {
            if n1 > market.n() {
                return Err(usage(format!("--n1 {n1} exceeds n = {}", market.n())));
            }
            StrategyProfile::structured(market.n(), n1)
        }
        (None, None) => return Err(usage("one of --reports or --n1 is required")),
    };
    let reps = a.replications.or(cfg.replications).unwrap_or(DEFAULT_REPLICATIONS);
    if reps == 0 {
        return Err(usage("--replications must be at least 1"));
    }
    let mut config = SimConfig::new(reps, seed);
    if let Some(s) = a.lower_stage.or(cfg.lower_stage) {
        config = config.with_lower_stage(s.into());
    }
    if let Some(r) = a.lower_ranking.or(cfg.lower_ranking) {
        config = config.with_lower_ranking(r.into());
    }
    let report = simulation::simulate(kind, &market, &profile, config)?;
    if let Some(path) = &a.records {
        let records = simulation::replication_records(kind, &market, &profile, config)?;
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(BufWriter::new(f));
        for r in &records {
            w.serialize(r).map_err(Error::from)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    Ok(report)
}

/// With `out`, writes the report and tables into that directory and prints nothing.
fn cmd_analyze(a: &AnalyzeArgs, cfg: &FileConfig, out: Option<&Path>) -> CliResult<Option<String>> {
    let tolerances = if !a.tolerance.is_empty() {
        a.tolerance.clone()
    } else if let Some(t) = &cfg.tolerance {
        t.iter()
            .map(|s| s.parse::<Cents>().map_err(|e| usage(format!("config tolerance: {e}"))))
            .collect::<CliResult<_>>()?
    } else {
        vec![Cents::ZERO, Cents(200)]
    };
    if let Some(t) = tolerances.iter().find(|t| t.0 < 0) {
        return Err(usage(format!("tolerance {t} is negative")));
    }
    let se = if a.robust || cfg.robust.unwrap_or(false) {
        SeKind::Hc1
    } else {
        SeKind::Classical
    };
    let records = analysis::load_session(&a.session)?;
    let rep = report::analyze(&records, &tolerances, se);
    let json = to_json(&rep)?;
    match out {
        None => Ok(Some(json)),
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            fs::write(dir.join("analysis.json"), &json).map_err(|e| Error::io(dir.join("analysis.json"), e))?;
            let create = |name: &str| -> CliResult<BufWriter<File>> {
                let p = dir.join(name);
                Ok(BufWriter::new(File::create(&p).map_err(|e| Error::io(&p, e))?))
            };
            report::write_net_value_csv(create("net_values.csv")?, &rep)?;
            report::write_regression_csv(create("table1.csv")?, &rep.table1)?;
            report::write_truth_csv(create("table2.csv")?, &rep)?;
            report::write_welfare_csv(create("table4.csv")?, &rep)?;
            report::write_regression_csv(create("table5.csv")?, &rep.table5)?;
            Ok(None)
        }
    }
}

#[derive(Debug, Serialize)]
pub struct PaymentDraws {
    pub draw1: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub draw2: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coin: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct DecodedRow {
    pub subject_id: String,
    pub task_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<Cents>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub switch_row: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub draws: Option<PaymentDraws>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub payment: Option<MplPayment>,
}

/// Payment draws for response `index` come from stream `(seed, index)`.
fn decode_row(subject_id: String, task_id: String, resp: TaskResponse, pay: bool, seed: u64, index: u64) -> CliResult<DecodedRow> {
    let mut r = rng::stream(seed, index);
    let draw = |r: &mut rand_chacha::ChaCha8Rng| 1 + rng::below(r, elicitation::ROWS as u64) as u8;
    Ok(match resp {
        TaskResponse::Mpl(m) => {
            let (draws, payment) = if pay {
                let (d1, d2) = (draw(&mut r), draw(&mut r));
                let p = elicitation::resolve_mpl_payment(m, d1, d2)?;
                (
                    Some(PaymentDraws {
                        draw1: d1,
                        draw2: Some(d2),
                        coin: None,
                    }),
                    Some(p),
                )
            } else {
                (None, None)
            };
            DecodedRow {
                subject_id,
                task_id,
                value: Some(elicitation::decode_mpl(m)),
                switch_row: None,
                draws,
                payment,
            }
        }
        TaskResponse::Lottery(l) => {
            let (draws, payment) = if pay {
                let d = draw(&mut r);
                let coin = rng::unit(&mut r);
                let p = elicitation::resolve_lottery_payment(l, d, coin)?;
                (
                    Some(PaymentDraws {
                        draw1: d,
                        draw2: None,
                        coin: Some(coin),
                    }),
                    Some(MplPayment::Money(p)),
                )
            } else {
                (None, None)
            };
            DecodedRow {
                subject_id,
                task_id,
                value: None,
                switch_row: Some(l.switch_row()),
                draws,
                payment,
            }
        }
    })
}

fn cmd_elicit(a: &ElicitArgs, seed: u64) -> CliResult<Vec<DecodedRow>> {
    if let Some(rows) = &a.mpl {
        let [s1, s2] = rows[..] else {
            return Err(usage("--mpl takes two rows: screen1_row,screen2_row"));
        };
        let m = MplResponse::new(s1, s2).map_err(|e| usage(format!("--mpl: {e}")))?;
        return Ok(vec![decode_row(String::new(), "mpl".into(), TaskResponse::Mpl(m), a.pay, seed, 0)?]);
    }
    let path = a.responses.as_deref().expect("clap requires --responses without --mpl");
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let rows = elicitation::read_responses(BufReader::new(f), &path.display().to_string())?;
    rows.into_iter()
        .enumerate()
        .map(|(i, (row, resp))| decode_row(row.subject_id, row.task_id, resp, a.pay, seed, i as u64))
        .collect()
}

fn d(x: &str) -> Cents {
    x.parse().expect("literal dollar amount")
}

/// Golden checks with known answers. Returns the report text and whether all passed.
pub fn selftest() -> (String, bool) {
    let mut lines = Vec::new();
    let mut ok = true;
    let mut check = |name: &str, result: crate::Result<bool>| {
        let pass = matches!(result, Ok(true));
        ok &= pass;
        let detail = match result {
            Err(e) => format!(" ({e})"),
            _ => String::new(),
        };
        lines.push(format!("{} {name}{detail}", if pass { "PASS" } else { "FAIL" }));
    };
    let lists = |v: &[[usize; 4]]| -> Vec<RankList> { v.iter().map(|l| RankList::new(l.to_vec()).unwrap()).collect() };
    // goods: 0 pizza, 1 pretzels, 2 chips, 3 soda; agents: 0 Ann, 1 Bob, 2 Carol, 3 Dave
    check(
        "four-agent RSD example",
        (|| {
            let reports = lists(&[[2, 0, 3, 1], [0, 2, 3, 1], [0, 1, 2, 3], [1, 3, 2, 0]]);
            let m = mechanisms::run_rsd(&reports, &TieBreakOrder::new(vec![1, 2, 3, 0])?)?;
            Ok(m.assignment() == [2, 0, 1, 3])
        })(),
    );
    check(
        "four-agent Boston example",
        (|| {
            let reports = lists(&[[0, 1, 2, 3], [0, 2, 3, 1], [0, 2, 1, 3], [1, 3, 2, 0]]);
            let m = mechanisms::run_boston(&reports, &TieBreakOrder::new(vec![1, 0, 2, 3])?)?;
            Ok(m.assignment() == [3, 0, 2, 1])
        })(),
    );
    let three = || -> crate::Result<MarketInstance> {
        MarketInstance::unlabelled(
            market::ValueMatrix::common(&[d("1.00"), d("0.70"), d("0")])?,
            market::RhoSchedule::new(vec![d("0.10"), d("0"), d("0")])?,
        )
    };
    check(
        "three-agent RSD truthful expected utility 0.60 each",
        (|| {
            let m = three()?;
            let eu = mechanisms::exact_expected_utilities(MechanismKind::Rsd, &vec![RankList::identity(3); 3], &m)?;
            Ok(eu.iter().all(|e| *e == Exact::from_integer(60)))
        })(),
    );
    check(
        "three-agent Boston deviation to (y,z,x) earns 0.80",
        (|| {
            let m = three()?;
            let mut reports = vec![RankList::identity(3); 3];
            reports[2] = RankList::new(vec![1, 2, 0])?;
            let eu = mechanisms::exact_expected_utilities(MechanismKind::Boston, &reports, &m)?;
            Ok(eu[2] == Exact::from_integer(80))
        })(),
    );
    let e1 = || -> crate::Result<SymmetricInstance> {
        SymmetricInstance::new(
            5,
            d("28.24"),
            d("22.56"),
            d("7"),
            market::RhoSchedule::new(vec![d("8"), d("2"), d("0"), d("0"), d("0")])?,
        )
    };
    check(
        "symmetric instance: Boston n1 = 3, RSD n1 = 4",
        (|| {
            let inst = e1()?;
            let b = equilibrium::solve_equilibrium(MechanismKind::Boston, &inst)?;
            let s = equilibrium::solve_equilibrium(MechanismKind::Rsd, &inst)?;
            Ok(b.n1_candidates == [3] && s.n1_candidates == [4])
        })(),
    );
    check(
        "symmetric instance: rankings welfare Boston 18.00, RSD 12.40",
        (|| {
            let inst = e1()?;
            let b = equilibrium::equilibrium_welfare(MechanismKind::Boston, &inst, 3)?;
            let s = equilibrium::equilibrium_welfare(MechanismKind::Rsd, &inst, 4)?;
            Ok(b.rho_component == Exact::from_integer(1800) && s.rho_component == Exact::from_integer(1240))
        })(),
    );
    check(
        "price list (16, 28) decodes to 16.56",
        MplResponse::new(16, 28).map(|m| elicitation::decode_mpl(m) == Cents(1656)),
    );
    check(
        "price list payment (16, 28), draws 16 and 40 pay 16.80",
        MplResponse::new(16, 28)
            .and_then(|m| elicitation::resolve_mpl_payment(m, 16, 40))
            .map(|p| p == MplPayment::Money(Cents(1680))),
    );
    check(
        "rank-sum exact p for [1,2] vs [3,4] is 1/3",
        analysis::wilcoxon_ranksum(&[1.0, 2.0], &[3.0, 4.0])
            .map(|r| r.p_exact.is_some_and(|p| (p - 1.0 / 3.0).abs() < 1e-12)),
    );
    check(
        "trend test exact p for [5,4],[3,2],[1] is 1/30",
        analysis::jonckheere_terpstra(
            &[vec![5.0, 4.0], vec![3.0, 2.0], vec![1.0]],
            analysis::Alternative::Decreasing,
        )
        .map(|r| r.p_exact.is_some_and(|p| (p - 1.0 / 30.0).abs() < 1e-12)),
    );
    let mut text = lines.join("\n");
    text.push('\n');
    (text, ok)
}

/// Entry point used by the binary.
pub fn main_with_args() -> i32 {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let stderr = io::stderr();
    let mut err = stderr.lock();
    run_command(std::env::args_os(), &mut out, &mut err)
}

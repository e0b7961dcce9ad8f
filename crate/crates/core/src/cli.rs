//! Command-line front end.
//!
//! Every command produces a [`Report`] (ordered summary pairs plus an optional
//! table) and a [`RunManifest`]. Output goes to stdout or `--out`; the
//! manifest goes to `<out>.manifest.json` when `--out` is given and to stderr
//! otherwise. `replay <manifest>` re-runs a recorded invocation.
//!
//! Exit codes: 0 success, 2 usage or precondition failure, 3 numerical
//! failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analytics;
use crate::dataset::{self, Region, Rows, TableId};
use crate::error::{Error, Result};
use crate::nar::{self, Adam, LevenbergMarquardt, NarConfig, Optimizer};
use crate::regression::{self, Driver};
use crate::series::{AnnualSeries, Unit};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "medmarket",
    version,
    about = "Medical-device market drivers, population forecasts and derived statistics"
)]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Write the report here instead of stdout; the manifest goes next to it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl Format {
    fn as_str(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Text => "text",
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse every fixture and check cross-table invariants.
    Validate,
    /// Fit y on x by ordinary least squares.
    Regress(RegressArgs),
    /// Fit device revenue on each of the four drivers.
    Drivers,
    /// Train a NAR network and forecast beyond the last year.
    Forecast(ForecastArgs),
    /// Best-of-restarts error for a range of hidden widths.
    Sweep(SweepArgs),
    /// Plot-ready data for a figure.
    Report(ReportArgs),
    /// Compound annual growth rate between two years.
    Cagr(CagrArgs),
    /// Recompute trade shares against the total row.
    Trade(TradeArgs),
    /// Rank causes of death for a region and year.
    Rank(RankArgs),
    /// Revenue implied by the 65+ regression for the predicted 65+ population.
    Project,
    /// Re-run the invocation recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Args, Debug)]
pub struct RegressArgs {
    #[arg(value_name = "TABLE")]
    table_pos: Option<String>,
    #[arg(value_name = "X")]
    x_pos: Option<String>,
    #[arg(value_name = "Y")]
    y_pos: Option<String>,
    #[arg(long)]
    table: Option<String>,
    #[arg(long)]
    x: Option<String>,
    #[arg(long)]
    y: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OptimizerKind {
    Lm,
    Adam,
}

#[derive(Args, Debug, Clone)]
pub struct TrainArgs {
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    max_epochs: usize,
    /// Normalized-scale MSE at which a restart stops.
    #[arg(long, default_value_t = 1e-4)]
    target_error: f64,
    #[arg(long, value_enum, default_value_t = OptimizerKind::Lm)]
    optimizer: OptimizerKind,
    /// Run restarts on one thread. Output is identical either way.
    #[arg(long)]
    serial: bool,
}

impl TrainArgs {
    fn config(&self, delays: usize, hidden: usize) -> NarConfig {
        NarConfig {
            delays,
            hidden,
            restarts: self.restarts,
            base_seed: self.seed,
            max_epochs: self.max_epochs,
            target_error: self.target_error,
            optimizer: match self.optimizer {
                OptimizerKind::Lm => Optimizer::LevenbergMarquardt(LevenbergMarquardt::default()),
                OptimizerKind::Adam => Optimizer::Adam(Adam::default()),
            },
            parallel: !self.serial,
        }
    }

    fn record(&self, params: &mut Params) {
        params.set("restarts", self.restarts);
        params.set("seed", self.seed);
        params.set("max-epochs", self.max_epochs);
        params.set("target-error", self.target_error);
        params.set(
            "optimizer",
            match self.optimizer {
                OptimizerKind::Lm => "lm",
                OptimizerKind::Adam => "adam",
            },
        );
    }
}

#[derive(Args, Debug)]
pub struct ForecastArgs {
    #[arg(value_name = "TABLE")]
    table_pos: Option<String>,
    #[arg(value_name = "FIELD")]
    field_pos: Option<String>,
    #[arg(long)]
    table: Option<String>,
    #[arg(long)]
    field: Option<String>,
    #[arg(long, default_value_t = 5)]
    delays: usize,
    #[arg(long, default_value_t = 16)]
    hidden: usize,
    #[arg(long, default_value_t = 10)]
    horizon: usize,
    #[command(flatten)]
    train: TrainArgs,
    /// Also write the trained model to this file.
    #[arg(long)]
    save_model: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(value_name = "TABLE")]
    table_pos: Option<String>,
    #[arg(value_name = "FIELD")]
    field_pos: Option<String>,
    #[arg(value_name = "DELAYS")]
    delays_pos: Option<usize>,
    #[arg(value_name = "HIDDEN_MIN")]
    hidden_min_pos: Option<usize>,
    #[arg(value_name = "HIDDEN_MAX")]
    hidden_max_pos: Option<usize>,
    #[arg(long)]
    table: Option<String>,
    #[arg(long)]
    field: Option<String>,
    #[arg(long)]
    delays: Option<usize>,
    #[arg(long)]
    hidden_min: Option<usize>,
    #[arg(long)]
    hidden_max: Option<usize>,
    #[command(flatten)]
    train: TrainArgs,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[arg(value_name = "FIGURE")]
    figure_pos: Option<String>,
    #[arg(long)]
    figure: Option<String>,
    #[command(flatten)]
    train: TrainArgs,
}

#[derive(Args, Debug)]
pub struct CagrArgs {
    #[arg(value_name = "TABLE")]
    table_pos: Option<String>,
    #[arg(value_name = "FIELD")]
    field_pos: Option<String>,
    #[arg(long)]
    table: Option<String>,
    #[arg(long)]
    field: Option<String>,
    /// First year; defaults to the first year of the series.
    #[arg(long)]
    from: Option<i32>,
    /// Last year; defaults to the last year of the series.
    #[arg(long)]
    to: Option<i32>,
}

#[derive(Args, Debug)]
pub struct TradeArgs {
    #[arg(value_name = "TABLE")]
    table_pos: Option<String>,
    #[arg(long)]
    table: Option<String>,
}

#[derive(Args, Debug)]
pub struct RankArgs {
    #[arg(value_name = "REGION")]
    region_pos: Option<String>,
    #[arg(value_name = "YEAR")]
    year_pos: Option<i32>,
    #[arg(long)]
    region: Option<String>,
    #[arg(long)]
    year: Option<i32>,
}

#[derive(Args, Debug)]
pub struct ReplayArgs {
    manifest: PathBuf,
}

/// Inputs that determine a run's output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub base_seed: u64,
    pub toolkit_version: String,
    pub fixtures: BTreeMap<String, String>,
}

impl RunManifest {
    fn new(command: &str, params: Params, tables: &[TableId]) -> Result<Self> {
        let mut fixtures = BTreeMap::new();
        for &t in tables {
            fixtures.insert(t.to_string(), dataset::checksum(t)?);
        }
        let base_seed = params
            .0
            .get("seed")
            .and_then(|s| s.parse().ok())
            .unwrap_or(NarConfig::default().base_seed);
        Ok(Self {
            command: command.to_string(),
            parameters: params.0,
            base_seed,
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            fixtures,
        })
    }

    /// Argument vector that reproduces this run.
    pub fn to_args(&self) -> Vec<String> {
        let mut args = vec!["medmarket".to_string()];
        if let Some(f) = self.parameters.get("format") {
            args.push("--format".into());
            args.push(f.clone());
        }
        args.push(self.command.clone());
        for (k, v) in &self.parameters {
            if k != "format" {
                args.push(format!("--{k}"));
                args.push(v.clone());
            }
        }
        args
    }
}

#[derive(Debug, Default)]
struct Params(BTreeMap<String, String>);

impl Params {
    fn set(&mut self, key: &str, value: impl ToString) {
        self.0.insert(key.to_string(), value.to_string());
    }
}

/// Column-oriented output table. Cells are preformatted strings.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Report {
    pub summary: Vec<(String, String)>,
    pub table: Option<Table>,
}

impl Report {
    fn line(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.summary
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn summary_table(&self) -> Table {
        let mut t = Table::new(&["key", "value"]);
        for (k, v) in &self.summary {
            t.push(vec![k.clone(), v.clone()]);
        }
        t
    }

    pub fn render(&self, format: Format, manifest: &RunManifest) -> String {
        match format {
            Format::Text => {
                let mut out = String::new();
                for (k, v) in &self.summary {
                    out.push_str(&format!("{k}: {v}\n"));
                }
                if let Some(t) = &self.table {
                    if !self.summary.is_empty() {
                        out.push('\n');
                    }
                    out.push_str(&t.to_csv());
                }
                out
            }
            Format::Csv => match &self.table {
                Some(t) => t.to_csv(),
                None => self.summary_table().to_csv(),
            },
            Format::Json => {
                let summary: serde_json::Map<String, serde_json::Value> = self
                    .summary
                    .iter()
                    .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
                    .collect();
                let doc = serde_json::json!({
                    "manifest": manifest,
                    "summary": summary,
                    "table": self.table,
                });
                let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
                s.push('\n');
                s
            }
        }
    }
}

/// Full-precision number (shortest string that parses back exactly).
fn full(v: f64) -> String {
    format!("{v}")
}

fn rounded(v: f64, decimals: usize) -> String {
    format!("{v:.decimals$}")
}

fn pick<T: Clone + PartialEq + std::fmt::Display>(
    name: &str,
    flag: &Option<T>,
    positional: &Option<T>,
    default: Option<T>,
) -> Result<T> {
    match (flag, positional) {
        (Some(f), Some(p)) if f != p => Err(Error::InvalidConfig(format!(
            "{name} given twice: '{p}' and --{name} '{f}'"
        ))),
        (Some(v), _) | (None, Some(v)) => Ok(v.clone()),
        (None, None) => default.ok_or_else(|| Error::InvalidConfig(format!("missing {name}"))),
    }
}

fn load_series(table: TableId, field: &str) -> Result<(Rows, AnnualSeries<f64>)> {
    let rows = dataset::load(table)?;
    let s = rows.to_series(field)?;
    Ok((rows, s))
}

/// Runs the tool on `args` (including the program name) and returns the exit
/// code.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
            } else {
                let _ = stdout.write_all(text.as_bytes());
            }
            return code;
        }
    };
    match run_cli(&cli, stdout, stderr, 0) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit status for a failed run.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_USAGE
    }
}

fn run_cli(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write, depth: usize) -> Result<()> {
    if let Command::Replay(r) = &cli.command {
        if depth > 0 {
            return Err(Error::InvalidConfig(
                "a manifest cannot replay another manifest".into(),
            ));
        }
        let text = std::fs::read_to_string(&r.manifest)?;
        let text = text.trim().strip_prefix("manifest:").unwrap_or(text.trim());
        let manifest: RunManifest = serde_json::from_str(text)
            .map_err(|e| Error::InvalidConfig(format!("manifest: {e}")))?;
        for (table, digest) in &manifest.fixtures {
            let id: TableId = table.parse()?;
            let now = dataset::checksum(id)?;
            if &now != digest {
                return Err(Error::InvalidConfig(format!(
                    "fixture {table} changed since the manifest was written ({digest} -> {now})"
                )));
            }
        }
        let mut replayed = Cli::try_parse_from(manifest.to_args())
            .map_err(|e| Error::InvalidConfig(format!("manifest arguments: {e}")))?;
        replayed.out = cli.out.clone();
        return run_cli(&replayed, stdout, stderr, depth + 1);
    }

    let mut params = Params::default();
    params.set("format", cli.format.as_str());
    let (name, report, tables) = execute(&cli.command, &mut params)?;
    let manifest = RunManifest::new(name, params, &tables)?;
    let body = report.render(cli.format, &manifest);
    let manifest_json = serde_json::to_string(&manifest).expect("manifest serializes");
    match &cli.out {
        Some(path) => {
            std::fs::write(path, body)?;
            std::fs::write(manifest_path(path), format!("{manifest_json}\n"))?;
        }
        None => {
            stdout.write_all(body.as_bytes())?;
            writeln!(stderr, "manifest: {manifest_json}")?;
        }
    }
    Ok(())
}

/// `<out>.manifest.json`
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

type Executed = (&'static str, Report, Vec<TableId>);

fn execute(command: &Command, params: &mut Params) -> Result<Executed> {
    match command {
        Command::Validate => Ok(("validate", cmd_validate()?, TableId::ALL.to_vec())),
        Command::Regress(a) => {
            let table: TableId =
                pick("table", &a.table, &a.table_pos, Some("table3".into()))?.parse()?;
            let x = pick("x", &a.x, &a.x_pos, None)?;
            let y = pick("y", &a.y, &a.y_pos, None)?;
            params.set("table", table);
            params.set("x", &x);
            params.set("y", &y);
            let (report, mut tables) = cmd_regress(table, &x, &y)?;
            tables.insert(0, table);
            tables.dedup();
            Ok(("regress", report, tables))
        }
        Command::Drivers => Ok((
            "drivers",
            cmd_drivers()?,
            vec![TableId::Table3, TableId::TableB],
        )),
        Command::Forecast(a) => {
            let table: TableId =
                pick("table", &a.table, &a.table_pos, Some("tableB".into()))?.parse()?;
            let field = pick("field", &a.field, &a.field_pos, Some("pop_total".into()))?;
            params.set("table", table);
            params.set("field", &field);
            params.set("delays", a.delays);
            params.set("hidden", a.hidden);
            params.set("horizon", a.horizon);
            a.train.record(params);
            let cfg = a.train.config(a.delays, a.hidden);
            let report = cmd_forecast(table, &field, &cfg, a.horizon, a.save_model.as_deref())?;
            Ok(("forecast", report, vec![table]))
        }
        Command::Sweep(a) => {
            let table: TableId =
                pick("table", &a.table, &a.table_pos, Some("tableB".into()))?.parse()?;
            let field = pick("field", &a.field, &a.field_pos, Some("pop_total".into()))?;
            let delays = pick("delays", &a.delays, &a.delays_pos, Some(5))?;
            let lo = pick("hidden-min", &a.hidden_min, &a.hidden_min_pos, Some(4))?;
            let hi = pick("hidden-max", &a.hidden_max, &a.hidden_max_pos, Some(18))?;
            params.set("table", table);
            params.set("field", &field);
            params.set("delays", delays);
            params.set("hidden-min", lo);
            params.set("hidden-max", hi);
            a.train.record(params);
            let cfg = a.train.config(delays, lo.max(1));
            Ok((
                "sweep",
                cmd_sweep(table, &field, delays, lo, hi, &cfg)?,
                vec![table],
            ))
        }
        Command::Report(a) => {
            let figure = pick("figure", &a.figure, &a.figure_pos, None)?.to_ascii_lowercase();
            params.set("figure", &figure);
            if matches!(figure.as_str(), "fig7" | "fig9") {
                a.train.record(params);
            }
            let (report, tables) = cmd_report(&figure, &a.train)?;
            Ok(("report", report, tables))
        }
        Command::Cagr(a) => {
            let table: TableId =
                pick("table", &a.table, &a.table_pos, Some("table3".into()))?.parse()?;
            let field = pick(
                "field",
                &a.field,
                &a.field_pos,
                Some("hospital_visits".into()),
            )?;
            let (_, series) = load_series(table, &field)?;
            let from = a.from.unwrap_or(series.start_year());
            let to = a.to.unwrap_or(series.end_year());
            params.set("table", table);
            params.set("field", &field);
            params.set("from", from);
            params.set("to", to);
            let rate = analytics::cagr(&series, from, to)?;
            let mut r = Report::default();
            r.line("series", series.name());
            r.line("from", from);
            r.line("to", to);
            r.line("cagr_percent", full(rate));
            r.line("cagr_display", rounded(rate, 2));
            Ok(("cagr", r, vec![table]))
        }
        Command::Trade(a) => {
            let table: TableId =
                pick("table", &a.table, &a.table_pos, Some("table1".into()))?.parse()?;
            params.set("table", table);
            Ok(("trade", cmd_trade(table)?, vec![table]))
        }
        Command::Rank(a) => {
            let region: Region = pick("region", &a.region, &a.region_pos, None)?.parse()?;
            let year = pick("year", &a.year, &a.year_pos, None)?;
            params.set("region", region);
            params.set("year", year);
            let rows = dataset::load(region.table())?;
            let ranked =
                analytics::rank_causes(rows.disease_shares().unwrap_or_default(), region, year)?;
            let mut r = Report::default();
            r.line("region", region);
            r.line("year", year);
            r.line("top_cause", &ranked.top().0);
            let mut t = Table::new(&["rank", "cause", "share"]);
            for (i, (cause, share)) in ranked.ranking.iter().enumerate() {
                t.push(vec![(i + 1).to_string(), cause.clone(), full(*share)]);
            }
            r.table = Some(t);
            Ok(("rank", r, vec![region.table()]))
        }
        Command::Project => Ok((
            "project",
            cmd_project()?,
            vec![TableId::Table3, TableId::TableC1],
        )),
        Command::Replay(_) => unreachable!("handled by run_cli"),
    }
}

fn cmd_validate() -> Result<Report> {
    let mut r = Report::default();
    let mut t = Table::new(&["table", "rows", "sha256"]);
    for id in TableId::ALL {
        let rows = dataset::load(id)?;
        let reparsed = dataset::parse_table(dataset::serialize_table(&rows).as_bytes(), id)?;
        if reparsed != rows {
            return Err(Error::InvalidConfig(format!(
                "{id} does not survive a serialize/parse round trip"
            )));
        }
        t.push(vec![
            id.to_string(),
            rows.len().to_string(),
            dataset::checksum(id)?,
        ]);
    }
    let t3 = dataset::load(TableId::Table3)?;
    let tb = dataset::load(TableId::TableB)?;
    let p3 = t3.to_series("pop65")?.convert(Unit::MillionsOfPersons)?;
    let pb = tb.to_series("pop65")?;
    let worst = p3
        .iter()
        .filter_map(|(y, v)| pb.get(y).map(|b| (y, (v - b).abs())))
        .fold(
            (0, 0.0f64),
            |acc, (y, d)| if d > acc.1 { (y, d) } else { acc },
        );
    r.line("tables", TableId::ALL.len());
    r.line("pop65_table3_vs_tableB_max_abs_millions", full(worst.1));
    r.line("pop65_table3_vs_tableB_worst_year", worst.0);
    let diags = analytics::growth_diagnostics(
        tb.population().unwrap_or_default(),
        analytics::DEFAULT_DIAGNOSTIC_TOLERANCE,
    );
    let mismatched: Vec<String> = diags
        .iter()
        .filter(|d| !d.rounds_to_printed || d.exceeds_tolerance)
        .map(|d| format!("{}({}vs{})", d.year, rounded(d.recomputed, 2), d.printed))
        .collect();
    r.line("growth_rate_rounding_mismatches", mismatched.len());
    r.line("growth_rate_mismatch_years", mismatched.join(" "));
    r.table = Some(t);
    Ok(r)
}

fn cmd_regress(table: TableId, x_field: &str, y_field: &str) -> Result<(Report, Vec<TableId>)> {
    let rows = dataset::load(table)?;
    let x = rows.to_series(x_field)?;
    let y = rows.to_series(y_field)?;
    let fit = regression::fit_ols(&x, &y)?;
    let mut tables = vec![table];
    let mut r = Report::default();
    r.line("x", x.name());
    r.line("y", y.name());
    r.line("n", fit.n);
    r.line("beta0", full(fit.beta0));
    r.line("beta1", full(fit.beta1));
    r.line("r", full(fit.r));
    r.line("r_squared", full(fit.r_squared()));
    r.line(
        "equation",
        format!(
            "y = {} + {} x",
            rounded(fit.beta0, 2),
            rounded(fit.beta1, 2)
        ),
    );
    if let (TableId::Table3, Some(driver), "device_revenue") =
        (table, Driver::from_field(x_field), y_field)
    {
        let printed = driver.printed();
        let cmp = regression::Comparison::new(&fit, &printed);
        r.line(
            "printed_equation",
            format!(
                "{} = {} + {} x (R = {})",
                printed.label, printed.beta0, printed.beta1, printed.r
            ),
        );
        r.line("delta_beta0", full(cmp.delta_beta0));
        r.line("delta_beta1", full(cmp.delta_beta1));
        r.line("delta_r", full(cmp.delta_r));
        r.line("matches_printed", cmp.all_match());
        if driver == Driver::Pop65 {
            let tb = dataset::load(TableId::TableB)?;
            let alt = regression::pop65_table_b_fit(
                rows.health_market().unwrap_or_default(),
                tb.population().unwrap_or_default(),
            )?;
            tables.push(TableId::TableB);
            r.line("caveat", regression::POP65_ROUNDING_CAVEAT);
            r.line("tableB_fit_n", alt.n);
            r.line("tableB_fit_beta0", full(alt.beta0));
            r.line("tableB_fit_beta1", full(alt.beta1));
            r.line("tableB_fit_r", full(alt.r));
        }
    }
    Ok((r, tables))
}

fn cmd_drivers() -> Result<Report> {
    let t3 = dataset::load(TableId::Table3)?;
    let tb = dataset::load(TableId::TableB)?;
    let health = t3.health_market().unwrap_or_default();
    let report = regression::driver_report(health)?;
    let mut t = Table::new(&[
        "driver",
        "n",
        "beta0",
        "beta1",
        "r",
        "printed_beta0",
        "printed_beta1",
        "printed_r",
        "delta_beta0",
        "delta_beta1",
        "delta_r",
        "matches_printed",
    ]);
    for f in &report.fits {
        let c = &f.comparison;
        t.push(vec![
            f.driver.field().to_string(),
            f.fit.n.to_string(),
            full(f.fit.beta0),
            full(f.fit.beta1),
            full(f.fit.r),
            full(f.printed.beta0),
            full(f.printed.beta1),
            full(f.printed.r),
            full(c.delta_beta0),
            full(c.delta_beta1),
            full(c.delta_r),
            c.all_match().to_string(),
        ]);
    }
    let alt = regression::pop65_table_b_fit(health, tb.population().unwrap_or_default())?;
    t.push(vec![
        "pop65_tableB".into(),
        alt.n.to_string(),
        full(alt.beta0),
        full(alt.beta1),
        full(alt.r),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
    ]);
    let mut r = Report::default();
    r.line("response", "table3.device_revenue");
    r.line(
        "all_printed_equations_match",
        report.fits.iter().all(|f| f.comparison.all_match()),
    );
    r.line("caveat", regression::POP65_ROUNDING_CAVEAT);
    r.table = Some(t);
    Ok(r)
}

fn forecast_report(
    table: TableId,
    field: &str,
    cfg: &NarConfig,
    horizon: usize,
    save: Option<&Path>,
) -> Result<Report> {
    if horizon == 0 {
        return Err(Error::InvalidConfig("horizon must be at least 1".into()));
    }
    let (_, series) = load_series(table, field)?;
    let training = nar::train(&series, cfg)?;
    let result = nar::forecast_closed_loop(&training.model, &series, horizon)?;
    if let Some(path) = save {
        std::fs::write(path, nar::save_model(&training.model))?;
    }
    let mut r = Report::default();
    r.line("series", series.name());
    r.line("unit", series.unit());
    r.line("delays", cfg.delays);
    r.line("hidden", cfg.hidden);
    r.line("restarts", cfg.restarts);
    r.line("diverged_restarts", training.diverged());
    r.line("best_restart", training.best_restart);
    r.line("best_seed", training.best_seed());
    let error_key = if series.unit().to_billions_of_persons().is_some() {
        "training_error_billions"
    } else {
        "training_error"
    };
    r.line(error_key, full(result.training_error));
    r.line("training_error_normalized", full(result.normalized_error));
    r.line(
        "first_prediction",
        format!(
            "{}={}",
            result.predictions.start_year(),
            rounded(result.predictions.values()[0], 2)
        ),
    );

    let mut t = Table::new(&["year", "actual", "predicted", "predicted_display"]);
    for (year, actual) in series.iter() {
        let p = result.fitted.get(year);
        t.push(vec![
            year.to_string(),
            full(actual),
            p.map(full).unwrap_or_default(),
            p.map(|v| rounded(v, 2)).unwrap_or_default(),
        ]);
    }
    for (year, p) in result.predictions.iter() {
        t.push(vec![
            year.to_string(),
            String::new(),
            full(p),
            rounded(p, 2),
        ]);
    }
    r.table = Some(t);
    Ok(r)
}

fn cmd_forecast(
    table: TableId,
    field: &str,
    cfg: &NarConfig,
    horizon: usize,
    save: Option<&Path>,
) -> Result<Report> {
    forecast_report(table, field, cfg, horizon, save)
}

fn cmd_sweep(
    table: TableId,
    field: &str,
    delays: usize,
    lo: usize,
    hi: usize,
    cfg: &NarConfig,
) -> Result<Report> {
    if lo > hi || lo == 0 {
        return Err(Error::EmptyRange(format!("hidden {lo}..={hi}")));
    }
    let (_, series) = load_series(table, field)?;
    let entries = nar::neuron_sweep(&series, delays, lo..=hi, cfg)?;
    let best = nar::sweep_argmin(&entries).expect("range is nonempty");
    let mut r = Report::default();
    r.line("series", series.name());
    r.line("delays", delays);
    r.line("rows", entries.len());
    r.line(
        "best",
        format!("neurons={} error={}", best.hidden, full(best.best_error)),
    );
    let mut t = Table::new(&["neurons", "error"]);
    for e in &entries {
        t.push(vec![e.hidden.to_string(), full(e.best_error)]);
    }
    r.table = Some(t);
    Ok(r)
}

fn cmd_report(figure: &str, train: &TrainArgs) -> Result<(Report, Vec<TableId>)> {
    let mut r = Report::default();
    r.line("figure", figure);
    match figure {
        "fig1" | "fig2" => Err(Error::UnsupportedFigure(
            figure.to_string(),
            "its numeric series is not tabulated in the bundled data".into(),
        )),
        "fig3" => {
            let rows = dataset::load(TableId::TableB)?;
            let mut t = Table::new(&["year", "pop_total_millions"]);
            for p in rows.population().unwrap_or_default() {
                t.push(vec![p.year.to_string(), full(p.pop_total)]);
            }
            r.table = Some(t);
            Ok((r, vec![TableId::TableB]))
        }
        "fig4" => {
            let rows = dataset::load(TableId::TableB)?;
            let pct = analytics::share(&rows.to_series("pop65")?, &rows.to_series("pop_total")?)?;
            let mut t = Table::new(&["year", "pct65", "pct65_display"]);
            for (year, v) in pct.iter() {
                t.push(vec![year.to_string(), full(v), rounded(v, 2)]);
            }
            r.table = Some(t);
            Ok((r, vec![TableId::TableB]))
        }
        "fig5" => {
            let rows = dataset::load(TableId::TableB)?;
            let pop = rows.population().unwrap_or_default();
            let diags = analytics::growth_diagnostics(pop, analytics::DEFAULT_DIAGNOSTIC_TOLERANCE);
            let mut t = Table::new(&[
                "year",
                "growth_rate",
                "recomputed",
                "recomputed_display",
                "rounding_mismatch",
            ]);
            if let Some(first) = pop.first() {
                t.push(vec![
                    first.year.to_string(),
                    full(first.growth_rate),
                    String::new(),
                    String::new(),
                    String::new(),
                ]);
            }
            for d in &diags {
                t.push(vec![
                    d.year.to_string(),
                    full(d.printed),
                    full(d.recomputed),
                    rounded(d.recomputed, 2),
                    (!d.rounds_to_printed || d.exceeds_tolerance).to_string(),
                ]);
            }
            r.table = Some(t);
            Ok((r, vec![TableId::TableB]))
        }
        "fig7" | "fig9" => {
            let field = if figure == "fig7" {
                "pop_total"
            } else {
                "pop65"
            };
            let defaults = NarConfig::default();
            let cfg = train.config(defaults.delays, defaults.hidden);
            let mut fr = forecast_report(TableId::TableB, field, &cfg, 10, None)?;
            fr.summary.insert(0, ("figure".into(), figure.into()));
            Ok((fr, vec![TableId::TableB]))
        }
        "fig10" | "fig11" => {
            let region = if figure == "fig10" {
                Region::City
            } else {
                Region::County
            };
            let rows = dataset::load(region.table())?;
            let mut header = vec!["cause".to_string()];
            header.extend(dataset::DISEASE_YEARS.iter().map(|y| y.to_string()));
            let mut t = Table {
                header,
                rows: Vec::new(),
            };
            for row in rows.disease_shares().unwrap_or_default() {
                let mut cells = vec![row.cause.clone()];
                cells.extend(row.shares.values().map(|v| full(*v)));
                t.rows.push(cells);
            }
            r.line("region", region);
            r.table = Some(t);
            Ok((r, vec![region.table()]))
        }
        other => Err(Error::UnsupportedFigure(
            other.to_string(),
            "expected one of fig3, fig4, fig5, fig7, fig9, fig10, fig11".into(),
        )),
    }
}

fn cmd_trade(table: TableId) -> Result<Report> {
    let rows = dataset::load(table)?;
    let trade = rows.trade().ok_or_else(|| Error::NotASeries {
        table: table.to_string(),
        reason: "not a trade table".into(),
    })?;
    let total = trade
        .first()
        .map(|r| r.label.clone())
        .ok_or_else(|| Error::MissingTotalRow("Total".into()))?;
    let checks = analytics::verify_trade_shares(trade, &total)?;
    let mut t = Table::new(&[
        "label",
        "export_share",
        "import_share",
        "printed_export_share",
        "printed_import_share",
        "export_delta",
        "import_delta",
    ]);
    for (c, row) in checks.iter().zip(trade) {
        t.push(vec![
            c.label.clone(),
            full(c.export_share),
            full(c.import_share),
            full(row.export_share),
            full(row.import_share),
            full(c.export_delta),
            full(c.import_delta),
        ]);
    }
    let worst = checks.iter().map(|c| c.delta()).fold(0.0, f64::max);
    let mut r = Report::default();
    r.line("total_row", total);
    r.line("max_abs_delta", full(worst));
    r.table = Some(t);
    Ok(r)
}

fn cmd_project() -> Result<Report> {
    let t3 = dataset::load(TableId::Table3)?;
    let c1 = dataset::load(TableId::TableC1)?;
    let forecast = c1.to_series("pop65")?.convert(Unit::BillionsOfPersons)?;
    let printed = Driver::Pop65.printed().as_fit(Unit::BillionsOfPersons);
    let refit = regression::fit_ols(&t3.to_series("pop65")?, &t3.to_series("device_revenue")?)?;
    let by_printed = analytics::project_revenue(&printed, &forecast)?;
    let by_refit = analytics::project_revenue(&refit, &forecast)?;
    let mut t = Table::new(&[
        "year",
        "pop65_billions",
        "revenue_printed_eq",
        "revenue_refit",
    ]);
    for ((year, x), (p, q)) in forecast
        .iter()
        .zip(by_printed.values().iter().zip(by_refit.values()))
    {
        t.push(vec![year.to_string(), full(x), full(*p), full(*q)]);
    }
    let mut r = Report::default();
    r.line("driver_forecast", c1.to_series("pop65")?.name());
    r.line("unit", Unit::BillionsOfRmb);
    r.table = Some(t);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(args.iter().copied(), &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn positional_and_flag_conflict() {
        let (code, _, err) = run_str(&[
            "medmarket",
            "regress",
            "table3",
            "pop65",
            "device_revenue",
            "--x",
            "hospital_visits",
        ]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("given twice"));
    }

    #[test]
    fn missing_x_is_usage_error() {
        let (code, _, _) = run_str(&["medmarket", "regress"]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn manifest_args_roundtrip() {
        let mut p = Params::default();
        p.set("format", "csv");
        p.set("table", "table3");
        p.set("x", "pop65");
        p.set("y", "device_revenue");
        let m = RunManifest::new("regress", p, &[TableId::Table3]).unwrap();
        let cli = Cli::try_parse_from(m.to_args()).unwrap();
        assert_eq!(cli.format, Format::Csv);
        assert!(matches!(cli.command, Command::Regress(_)));
    }

    #[test]
    fn manifest_path_appends_suffix() {
        assert_eq!(
            manifest_path(Path::new("/tmp/a.csv")),
            PathBuf::from("/tmp/a.csv.manifest.json")
        );
    }

    #[test]
    fn csv_without_table_falls_back_to_key_value() {
        let mut r = Report::default();
        r.line("beta1", "2");
        let m = RunManifest::new("x", Params::default(), &[]).unwrap();
        assert_eq!(r.render(Format::Csv, &m), "key,value\nbeta1,2\n");
    }
}

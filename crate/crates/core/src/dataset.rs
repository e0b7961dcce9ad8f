//! Bundled source tables: schemas, CSV parsing with validation, and series
//! extraction.
//!
//! Each table ships as a CSV fixture holding the printed decimal strings
//! (thousands separators removed). The fixtures are compiled into the binary;
//! setting [`FIXTURE_DIR_ENV`] makes [`load`] read `<dir>/<table>.csv`
//! instead.
//!
//! Table A.1 (city) prints identical values for 2003 and 2008 in four of its
//! five rows. The fixture keeps them as printed.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::Read;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::series::{AnnualSeries, Unit};

/// Environment variable naming a directory of replacement fixture files.
pub const FIXTURE_DIR_ENV: &str = "MEDMARKET_FIXTURES";

/// Years covered by the disease-share tables; 2007 and 2010 are not published.
pub const DISEASE_YEARS: [i32; 7] = [2003, 2004, 2005, 2006, 2008, 2009, 2011];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TableId {
    /// Import/export structure of medicines and health products, 2010.
    Table1,
    /// Import/export markets of medical devices, 2010.
    Table2,
    /// Healthcare drivers and device revenues, 2000-2011.
    Table3,
    /// Top-5 cause-of-death shares, cities.
    TableA1,
    /// Top-5 cause-of-death shares, counties.
    TableA2,
    /// Population, 65+ population and growth, 1980-2010.
    TableB,
    /// Predicted population, 2011-2020.
    TableC1,
    /// Hidden-neuron sweep errors.
    TableC2,
}

impl TableId {
    pub const ALL: [TableId; 8] = [
        TableId::Table1,
        TableId::Table2,
        TableId::Table3,
        TableId::TableA1,
        TableId::TableA2,
        TableId::TableB,
        TableId::TableC1,
        TableId::TableC2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TableId::Table1 => "table1",
            TableId::Table2 => "table2",
            TableId::Table3 => "table3",
            TableId::TableA1 => "tableA1",
            TableId::TableA2 => "tableA2",
            TableId::TableB => "tableB",
            TableId::TableC1 => "tableC1",
            TableId::TableC2 => "tableC2",
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.csv", self.as_str())
    }

    pub fn header(self) -> &'static [&'static str] {
        match self {
            TableId::Table1 | TableId::Table2 => &TRADE_HEADER,
            TableId::Table3 => &HEALTH_HEADER,
            TableId::TableA1 | TableId::TableA2 => &DISEASE_HEADER,
            TableId::TableB => &POPULATION_HEADER,
            TableId::TableC1 => &PREDICTION_HEADER,
            TableId::TableC2 => &SWEEP_HEADER,
        }
    }

    fn bundled(self) -> &'static str {
        match self {
            TableId::Table1 => include_str!("../fixtures/table1.csv"),
            TableId::Table2 => include_str!("../fixtures/table2.csv"),
            TableId::Table3 => include_str!("../fixtures/table3.csv"),
            TableId::TableA1 => include_str!("../fixtures/tableA1.csv"),
            TableId::TableA2 => include_str!("../fixtures/tableA2.csv"),
            TableId::TableB => include_str!("../fixtures/tableB.csv"),
            TableId::TableC1 => include_str!("../fixtures/tableC1.csv"),
            TableId::TableC2 => include_str!("../fixtures/tableC2.csv"),
        }
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TableId {
    type Err = Error;

    /// Case-insensitive; accepts `table3`, `tableB`, `TABLEA1`, ...
    fn from_str(s: &str) -> Result<Self> {
        TableId::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownTable(s.to_string()))
    }
}

const HEALTH_HEADER: [&str; 6] = [
    "year",
    "hospital_visits",
    "pop65",
    "health_expenditure",
    "hospital_count",
    "device_revenue",
];
const POPULATION_HEADER: [&str; 5] = ["year", "pop65", "pop_total", "pct65", "growth_rate"];
const TRADE_HEADER: [&str; 7] = [
    "label",
    "export_value",
    "export_growth",
    "export_share",
    "import_value",
    "import_growth",
    "import_share",
];
const DISEASE_HEADER: [&str; 9] = [
    "region", "cause", "2003", "2004", "2005", "2006", "2008", "2009", "2011",
];
const PREDICTION_HEADER: [&str; 3] = ["year", "pop_total", "pop65"];
const SWEEP_HEADER: [&str; 2] = ["neurons", "error"];

/// One year of healthcare drivers and device revenue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HealthMarketRow {
    pub year: i32,
    /// Billions of visits.
    pub hospital_visits: f64,
    /// Billions of persons.
    pub pop65: f64,
    /// Billions of RMB.
    pub health_expenditure: f64,
    pub hospital_count: u32,
    /// Billions of RMB.
    pub device_revenue: f64,
}

/// One year of population data, populations in millions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationRow {
    pub year: i32,
    pub pop65: f64,
    pub pop_total: f64,
    pub pct65: f64,
    pub growth_rate: f64,
}

/// A trade-structure row; values in units of 10,000 USD.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeRow {
    pub label: String,
    pub export_value: f64,
    pub export_growth: f64,
    pub export_share: f64,
    pub import_value: f64,
    pub import_growth: f64,
    pub import_share: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    City,
    County,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::City => "city",
            Region::County => "county",
        }
    }

    pub fn table(self) -> TableId {
        match self {
            Region::City => TableId::TableA1,
            Region::County => TableId::TableA2,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "city" => Ok(Region::City),
            "county" => Ok(Region::County),
            _ => Err(Error::InvalidConfig(format!("unknown region '{s}'"))),
        }
    }
}

/// Cause-of-death share by year. Years 2007 and 2010 are absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiseaseShareRow {
    pub region: Region,
    pub cause: String,
    pub shares: BTreeMap<i32, f64>,
}

/// Predicted population, millions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub year: i32,
    pub pop_total: f64,
    pub pop65: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub neurons: usize,
    pub error: f64,
}

/// Typed rows of one table.
#[derive(Debug, Clone, PartialEq)]
pub enum Rows {
    Trade(TableId, Vec<TradeRow>),
    HealthMarket(Vec<HealthMarketRow>),
    DiseaseShare(TableId, Vec<DiseaseShareRow>),
    Population(Vec<PopulationRow>),
    Prediction(Vec<PredictionRow>),
    Sweep(Vec<SweepRow>),
}

impl Rows {
    pub fn table(&self) -> TableId {
        match self {
            Rows::Trade(id, _) | Rows::DiseaseShare(id, _) => *id,
            Rows::HealthMarket(_) => TableId::Table3,
            Rows::Population(_) => TableId::TableB,
            Rows::Prediction(_) => TableId::TableC1,
            Rows::Sweep(_) => TableId::TableC2,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Rows::Trade(_, r) => r.len(),
            Rows::HealthMarket(r) => r.len(),
            Rows::DiseaseShare(_, r) => r.len(),
            Rows::Population(r) => r.len(),
            Rows::Prediction(r) => r.len(),
            Rows::Sweep(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn health_market(&self) -> Option<&[HealthMarketRow]> {
        match self {
            Rows::HealthMarket(r) => Some(r),
            _ => None,
        }
    }

    pub fn population(&self) -> Option<&[PopulationRow]> {
        match self {
            Rows::Population(r) => Some(r),
            _ => None,
        }
    }

    pub fn trade(&self) -> Option<&[TradeRow]> {
        match self {
            Rows::Trade(_, r) => Some(r),
            _ => None,
        }
    }

    pub fn disease_shares(&self) -> Option<&[DiseaseShareRow]> {
        match self {
            Rows::DiseaseShare(_, r) => Some(r),
            _ => None,
        }
    }

    pub fn predictions(&self) -> Option<&[PredictionRow]> {
        match self {
            Rows::Prediction(r) => Some(r),
            _ => None,
        }
    }

    pub fn sweep(&self) -> Option<&[SweepRow]> {
        match self {
            Rows::Sweep(r) => Some(r),
            _ => None,
        }
    }

    /// Names of the fields [`Rows::to_series`] accepts for this table.
    pub fn series_fields(&self) -> &'static [&'static str] {
        match self {
            Rows::HealthMarket(_) => &HEALTH_HEADER[1..],
            Rows::Population(_) => &POPULATION_HEADER[1..],
            Rows::Prediction(_) => &PREDICTION_HEADER[1..],
            _ => &[],
        }
    }

    /// Extracts one column as an annual series named `<table>.<field>`.
    pub fn to_series(&self, field: &str) -> Result<AnnualSeries<f64>> {
        let table = self.table();
        let unknown = || Error::UnknownField {
            table: table.to_string(),
            field: field.to_string(),
        };
        let pairs: Vec<(i32, f64)>;
        let unit;
        match self {
            Rows::HealthMarket(rows) => {
                let (u, get): (Unit, fn(&HealthMarketRow) -> f64) = match field {
                    "hospital_visits" => (Unit::BillionsOfVisits, |r| r.hospital_visits),
                    "pop65" => (Unit::BillionsOfPersons, |r| r.pop65),
                    "health_expenditure" => (Unit::BillionsOfRmb, |r| r.health_expenditure),
                    "hospital_count" => (Unit::Count, |r| f64::from(r.hospital_count)),
                    "device_revenue" => (Unit::BillionsOfRmb, |r| r.device_revenue),
                    _ => return Err(unknown()),
                };
                unit = u;
                pairs = rows.iter().map(|r| (r.year, get(r))).collect();
            }
            Rows::Population(rows) => {
                let (u, get): (Unit, fn(&PopulationRow) -> f64) = match field {
                    "pop65" => (Unit::MillionsOfPersons, |r| r.pop65),
                    "pop_total" => (Unit::MillionsOfPersons, |r| r.pop_total),
                    "pct65" => (Unit::Percent, |r| r.pct65),
                    "growth_rate" => (Unit::Percent, |r| r.growth_rate),
                    _ => return Err(unknown()),
                };
                unit = u;
                pairs = rows.iter().map(|r| (r.year, get(r))).collect();
            }
            Rows::Prediction(rows) => {
                let get: fn(&PredictionRow) -> f64 = match field {
                    "pop_total" => |r| r.pop_total,
                    "pop65" => |r| r.pop65,
                    _ => return Err(unknown()),
                };
                unit = Unit::MillionsOfPersons;
                pairs = rows.iter().map(|r| (r.year, get(r))).collect();
            }
            Rows::DiseaseShare(..) => {
                return Err(Error::NotASeries {
                    table: table.to_string(),
                    reason: "disease shares have year gaps (2007, 2010)".into(),
                })
            }
            Rows::Trade(..) | Rows::Sweep(_) => {
                return Err(Error::NotASeries {
                    table: table.to_string(),
                    reason: "rows are not indexed by year".into(),
                })
            }
        }
        if pairs.len() < 2 {
            return Err(Error::TooShort {
                len: pairs.len(),
                min: 2,
            });
        }
        AnnualSeries::from_pairs(format!("{table}.{field}"), unit, pairs)
    }
}

/// Returns the bundled copy of a table.
pub fn builtin(id: TableId) -> Result<Rows> {
    parse_table(id.bundled().as_bytes(), id)
}

/// [`builtin`] addressed by name.
pub fn builtin_named(name: &str) -> Result<Rows> {
    builtin(name.parse()?)
}

/// Raw bytes of the bundled fixture.
pub fn builtin_text(id: TableId) -> &'static str {
    id.bundled()
}

/// Directory override from [`FIXTURE_DIR_ENV`], if set.
pub fn fixture_dir() -> Option<PathBuf> {
    std::env::var_os(FIXTURE_DIR_ENV).map(PathBuf::from)
}

/// Fixture text, honouring the directory override.
pub fn fixture_text(id: TableId) -> Result<String> {
    match fixture_dir() {
        Some(dir) => Ok(std::fs::read_to_string(dir.join(id.file_name()))?),
        None => Ok(id.bundled().to_string()),
    }
}

/// Loads a table, honouring the directory override.
pub fn load(id: TableId) -> Result<Rows> {
    parse_table(fixture_text(id)?.as_bytes(), id)
}

/// Hex SHA-256 of the fixture text used by [`load`].
pub fn checksum(id: TableId) -> Result<String> {
    Ok(hex::encode(Sha256::digest(fixture_text(id)?.as_bytes())))
}

/// Parses a CSV table whose header must match the schema of `id` exactly.
///
/// Row numbers in errors are 1-based data rows (the header is row 0).
pub fn parse_table<R: Read>(stream: R, id: TableId) -> Result<Rows> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::None)
        .from_reader(stream);
    let header = reader
        .headers()
        .map_err(|e| csv_error(0, "<header>", e))?
        .clone();
    check_header(&header, id.header())?;

    let mut records = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(i + 1, "<record>", e))?;
        records.push(rec);
    }
    let cells = Cells {
        header: id.header(),
    };

    match id {
        TableId::Table3 => {
            let mut rows = Vec::with_capacity(records.len());
            for (i, rec) in records.iter().enumerate() {
                let row = i + 1;
                let r = HealthMarketRow {
                    year: cells.int(rec, row, 0)?,
                    hospital_visits: cells.positive(rec, row, 1)?,
                    pop65: cells.positive(rec, row, 2)?,
                    health_expenditure: cells.positive(rec, row, 3)?,
                    hospital_count: cells.int(rec, row, 4)?,
                    device_revenue: cells.positive(rec, row, 5)?,
                };
                if !(2000..=2011).contains(&r.year) {
                    return Err(cells.invalid(
                        row,
                        0,
                        format!("year {} outside 2000-2011", r.year),
                    ));
                }
                if r.hospital_count == 0 {
                    return Err(cells.invalid(row, 4, "must be positive".into()));
                }
                rows.push(r);
            }
            check_years(rows.iter().map(|r| r.year))?;
            Ok(Rows::HealthMarket(rows))
        }
        TableId::TableB => {
            let mut rows = Vec::with_capacity(records.len());
            for (i, rec) in records.iter().enumerate() {
                let row = i + 1;
                let r = PopulationRow {
                    year: cells.int(rec, row, 0)?,
                    pop65: cells.positive(rec, row, 1)?,
                    pop_total: cells.positive(rec, row, 2)?,
                    pct65: cells.real(rec, row, 3)?,
                    growth_rate: cells.real(rec, row, 4)?,
                };
                if r.pop65 >= r.pop_total {
                    return Err(cells.invalid(row, 1, "65+ population must be below total".into()));
                }
                let recomputed = 100.0 * r.pop65 / r.pop_total;
                // printed to 2 d.p.; allow the half-unit plus float slack
                if (recomputed - r.pct65).abs() > 0.01 + 1e-9 {
                    return Err(cells.invalid(
                        row,
                        3,
                        format!(
                            "printed {} but 100*pop65/pop_total = {recomputed:.4}",
                            r.pct65
                        ),
                    ));
                }
                rows.push(r);
            }
            check_years(rows.iter().map(|r| r.year))?;
            Ok(Rows::Population(rows))
        }
        TableId::Table1 | TableId::Table2 => {
            let mut rows = Vec::with_capacity(records.len());
            for (i, rec) in records.iter().enumerate() {
                let row = i + 1;
                let label = rec.get(0).unwrap_or_default().to_string();
                if label.is_empty() {
                    return Err(cells.invalid(row, 0, "empty label".into()));
                }
                rows.push(TradeRow {
                    label,
                    export_value: cells.nonnegative(rec, row, 1)?,
                    export_growth: cells.real(rec, row, 2)?,
                    export_share: cells.share(rec, row, 3)?,
                    import_value: cells.nonnegative(rec, row, 4)?,
                    import_growth: cells.real(rec, row, 5)?,
                    import_share: cells.share(rec, row, 6)?,
                });
            }
            Ok(Rows::Trade(id, rows))
        }
        TableId::TableA1 | TableId::TableA2 => {
            let expected_region = if id == TableId::TableA1 {
                Region::City
            } else {
                Region::County
            };
            let mut rows = Vec::with_capacity(records.len());
            for (i, rec) in records.iter().enumerate() {
                let row = i + 1;
                let region: Region = rec
                    .get(0)
                    .unwrap_or_default()
                    .parse()
                    .map_err(|_| cells.invalid(row, 0, "expected city or county".into()))?;
                if region != expected_region {
                    return Err(cells.invalid(
                        row,
                        0,
                        format!("{id} holds {expected_region} rows only"),
                    ));
                }
                let cause = rec.get(1).unwrap_or_default().to_string();
                let mut shares = BTreeMap::new();
                for (col, year) in DISEASE_YEARS.iter().enumerate() {
                    let v = cells.real(rec, row, col + 2)?;
                    if !(v > 0.0 && v < 100.0) {
                        return Err(cells.invalid(
                            row,
                            col + 2,
                            format!("share {v} outside (0, 100)"),
                        ));
                    }
                    shares.insert(*year, v);
                }
                rows.push(DiseaseShareRow {
                    region,
                    cause,
                    shares,
                });
            }
            Ok(Rows::DiseaseShare(id, rows))
        }
        TableId::TableC1 => {
            let mut rows = Vec::with_capacity(records.len());
            for (i, rec) in records.iter().enumerate() {
                let row = i + 1;
                rows.push(PredictionRow {
                    year: cells.int(rec, row, 0)?,
                    pop_total: cells.positive(rec, row, 1)?,
                    pop65: cells.positive(rec, row, 2)?,
                });
            }
            check_years(rows.iter().map(|r| r.year))?;
            Ok(Rows::Prediction(rows))
        }
        TableId::TableC2 => {
            let mut rows: Vec<SweepRow> = Vec::with_capacity(records.len());
            let mut seen = HashSet::new();
            for (i, rec) in records.iter().enumerate() {
                let row = i + 1;
                let neurons: usize = cells.int(rec, row, 0)?;
                if neurons == 0 || !seen.insert(neurons) {
                    return Err(cells.invalid(
                        row,
                        0,
                        format!("neuron count {neurons} is zero or repeated"),
                    ));
                }
                rows.push(SweepRow {
                    neurons,
                    error: cells.nonnegative(rec, row, 1)?,
                });
            }
            Ok(Rows::Sweep(rows))
        }
    }
}

/// Writes rows back to the fixture CSV layout.
pub fn serialize_table(rows: &Rows) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let id = rows.table();
    w.write_record(id.header()).expect("in-memory write");
    let mut put = |fields: Vec<String>| w.write_record(&fields).expect("in-memory write");
    match rows {
        Rows::HealthMarket(rs) => rs.iter().for_each(|r| {
            put(vec![
                r.year.to_string(),
                r.hospital_visits.to_string(),
                r.pop65.to_string(),
                r.health_expenditure.to_string(),
                r.hospital_count.to_string(),
                r.device_revenue.to_string(),
            ])
        }),
        Rows::Population(rs) => rs.iter().for_each(|r| {
            put(vec![
                r.year.to_string(),
                r.pop65.to_string(),
                r.pop_total.to_string(),
                r.pct65.to_string(),
                r.growth_rate.to_string(),
            ])
        }),
        Rows::Trade(_, rs) => rs.iter().for_each(|r| {
            put(vec![
                r.label.clone(),
                r.export_value.to_string(),
                r.export_growth.to_string(),
                r.export_share.to_string(),
                r.import_value.to_string(),
                r.import_growth.to_string(),
                r.import_share.to_string(),
            ])
        }),
        Rows::DiseaseShare(_, rs) => rs.iter().for_each(|r| {
            let mut f = vec![r.region.to_string(), r.cause.clone()];
            f.extend(r.shares.values().map(|v| v.to_string()));
            put(f)
        }),
        Rows::Prediction(rs) => rs.iter().for_each(|r| {
            put(vec![
                r.year.to_string(),
                r.pop_total.to_string(),
                r.pop65.to_string(),
            ])
        }),
        Rows::Sweep(rs) => rs
            .iter()
            .for_each(|r| put(vec![r.neurons.to_string(), r.error.to_string()])),
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

fn csv_error(row: usize, column: &str, e: csv::Error) -> Error {
    Error::Parse {
        row,
        column: column.to_string(),
        message: e.to_string(),
    }
}

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    for (i, name) in found.iter().enumerate() {
        if !expected.contains(&name) {
            return Err(Error::Parse {
                row: 0,
                column: name.to_string(),
                message: "unknown column".into(),
            });
        }
        if expected.get(i) != Some(&name) {
            return Err(Error::Parse {
                row: 0,
                column: name.to_string(),
                message: format!(
                    "column {} must be '{}'",
                    i + 1,
                    expected.get(i).unwrap_or(&"")
                ),
            });
        }
    }
    if found.len() != expected.len() {
        return Err(Error::Parse {
            row: 0,
            column: expected[found.len()].to_string(),
            message: "missing column".into(),
        });
    }
    Ok(())
}

fn check_years(years: impl Iterator<Item = i32>) -> Result<()> {
    let mut seen = HashSet::new();
    let mut prev: Option<i32> = None;
    for (i, y) in years.enumerate() {
        if !seen.insert(y) {
            return Err(Error::DuplicateYear {
                row: i + 1,
                year: y,
            });
        }
        if let Some(p) = prev {
            if y <= p {
                return Err(Error::Parse {
                    row: i + 1,
                    column: "year".into(),
                    message: format!("year {y} follows {p}; rows must ascend"),
                });
            }
        }
        prev = Some(y);
    }
    Ok(())
}

struct Cells {
    header: &'static [&'static str],
}

impl Cells {
    fn invalid(&self, row: usize, col: usize, message: String) -> Error {
        Error::Parse {
            row,
            column: self.header[col].to_string(),
            message,
        }
    }

    fn raw<'a>(&self, rec: &'a csv::StringRecord, row: usize, col: usize) -> Result<&'a str> {
        rec.get(col)
            .ok_or_else(|| self.invalid(row, col, "missing cell".into()))
    }

    fn int<T: FromStr>(&self, rec: &csv::StringRecord, row: usize, col: usize) -> Result<T> {
        let s = self.raw(rec, row, col)?;
        s.parse()
            .map_err(|_| self.invalid(row, col, format!("'{s}' is not an integer")))
    }

    fn real(&self, rec: &csv::StringRecord, row: usize, col: usize) -> Result<f64> {
        let s = self.raw(rec, row, col)?;
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.invalid(row, col, format!("'{s}' is not a finite number"))),
        }
    }

    fn positive(&self, rec: &csv::StringRecord, row: usize, col: usize) -> Result<f64> {
        let v = self.real(rec, row, col)?;
        if v <= 0.0 {
            return Err(self.invalid(row, col, format!("{v} must be positive")));
        }
        Ok(v)
    }

    fn nonnegative(&self, rec: &csv::StringRecord, row: usize, col: usize) -> Result<f64> {
        let v = self.real(rec, row, col)?;
        if v < 0.0 {
            return Err(self.invalid(row, col, format!("{v} must be nonnegative")));
        }
        Ok(v)
    }

    fn share(&self, rec: &csv::StringRecord, row: usize, col: usize) -> Result<f64> {
        let v = self.real(rec, row, col)?;
        if !(0.0..=100.0).contains(&v) {
            return Err(self.invalid(row, col, format!("share {v} outside [0, 100]")));
        }
        Ok(v)
    }
}

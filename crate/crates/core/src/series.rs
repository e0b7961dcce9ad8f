//! Year-indexed series with mandatory unit metadata.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Unit {
    BillionsOfVisits,
    BillionsOfPersons,
    MillionsOfPersons,
    #[serde(rename = "billions-of-RMB")]
    BillionsOfRmb,
    Count,
    Percent,
    #[serde(rename = "10k-USD")]
    TenThousandUsd,
}

impl Unit {
    pub fn as_str(self) -> &'static str {
        match self {
            Unit::BillionsOfVisits => "billions-of-visits",
            Unit::BillionsOfPersons => "billions-of-persons",
            Unit::MillionsOfPersons => "millions-of-persons",
            Unit::BillionsOfRmb => "billions-of-RMB",
            Unit::Count => "count",
            Unit::Percent => "percent",
            Unit::TenThousandUsd => "10k-USD",
        }
    }

    /// Counts, populations and money must be strictly positive.
    pub fn requires_positive(self) -> bool {
        !matches!(self, Unit::Percent)
    }

    /// Factor that converts a value in this unit to billions of persons, for
    /// population units.
    pub fn to_billions_of_persons(self) -> Option<f64> {
        match self {
            Unit::BillionsOfPersons => Some(1.0),
            Unit::MillionsOfPersons => Some(1e-3),
            _ => None,
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Unit::BillionsOfVisits,
            Unit::BillionsOfPersons,
            Unit::MillionsOfPersons,
            Unit::BillionsOfRmb,
            Unit::Count,
            Unit::Percent,
            Unit::TenThousandUsd,
        ]
        .into_iter()
        .find(|u| u.as_str() == s)
        .ok_or_else(|| Error::InvalidConfig(format!("unknown unit '{s}'")))
    }
}

/// A named, unit-tagged sequence of values for contiguous calendar years.
///
/// Value `k` belongs to year `start_year + k`. Values are finite, and strictly
/// positive unless the unit is [`Unit::Percent`].
#[derive(Debug, Clone, PartialEq)]
pub struct AnnualSeries<T> {
    name: String,
    unit: Unit,
    start_year: i32,
    values: Vec<T>,
}

impl<T: Scalar> AnnualSeries<T> {
    pub fn new(
        name: impl Into<String>,
        unit: Unit,
        start_year: i32,
        values: Vec<T>,
    ) -> Result<Self> {
        let name = name.into();
        if values.is_empty() {
            return Err(Error::InvalidSeries {
                name,
                reason: "no values".into(),
            });
        }
        for (k, v) in values.iter().enumerate() {
            let year = start_year + k as i32;
            if !v.is_finite() {
                return Err(Error::InvalidSeries {
                    name,
                    reason: format!("non-finite value for year {year}"),
                });
            }
            if unit.requires_positive() && *v <= T::zero() {
                return Err(Error::NonPositive {
                    year,
                    value: v.as_f64(),
                });
            }
        }
        Ok(Self {
            name,
            unit,
            start_year,
            values,
        })
    }

    /// Builds a series from `(year, value)` pairs, rejecting gaps.
    pub fn from_pairs(
        name: impl Into<String>,
        unit: Unit,
        pairs: impl IntoIterator<Item = (i32, T)>,
    ) -> Result<Self> {
        let name = name.into();
        let mut start = None;
        let mut values = Vec::new();
        for (year, v) in pairs {
            match start {
                None => start = Some(year),
                Some(s) if s + values.len() as i32 != year => {
                    return Err(Error::InvalidSeries {
                        name,
                        reason: format!(
                            "years are not contiguous: expected {}, found {year}",
                            s + values.len() as i32
                        ),
                    });
                }
                Some(_) => {}
            }
            values.push(v);
        }
        let start = start.ok_or_else(|| Error::InvalidSeries {
            name: name.clone(),
            reason: "no values".into(),
        })?;
        Self::new(name, unit, start, values)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn start_year(&self) -> i32 {
        self.start_year
    }

    pub fn end_year(&self) -> i32 {
        self.start_year + self.values.len() as i32 - 1
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn years(&self) -> impl Iterator<Item = i32> + '_ {
        (0..self.values.len()).map(move |k| self.start_year + k as i32)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, T)> + '_ {
        self.years().zip(self.values.iter().copied())
    }

    pub fn get(&self, year: i32) -> Option<T> {
        if year < self.start_year {
            return None;
        }
        self.values.get((year - self.start_year) as usize).copied()
    }

    pub fn value_at(&self, year: i32) -> Result<T> {
        self.get(year).ok_or(Error::MissingYear(year))
    }

    pub fn require_len(&self, min: usize) -> Result<()> {
        if self.len() < min {
            return Err(Error::TooShort {
                len: self.len(),
                min,
            });
        }
        Ok(())
    }

    /// Errors unless `other` covers exactly the same years.
    pub fn require_same_years<U: Scalar>(&self, other: &AnnualSeries<U>) -> Result<()> {
        if self.start_year != other.start_year || self.len() != other.len() {
            return Err(Error::YearRangeMismatch {
                left: self.span(),
                right: other.span(),
            });
        }
        Ok(())
    }

    pub fn span(&self) -> String {
        format!("{}({}-{})", self.name, self.start_year, self.end_year())
    }

    /// Sub-series for `from..=to`.
    pub fn between(&self, from: i32, to: i32) -> Result<Self> {
        if to < from {
            return Err(Error::EmptyRange(format!("{from}..={to}")));
        }
        self.value_at(from)?;
        self.value_at(to)?;
        let lo = (from - self.start_year) as usize;
        let hi = (to - self.start_year) as usize;
        Ok(Self {
            name: self.name.clone(),
            unit: self.unit,
            start_year: from,
            values: self.values[lo..=hi].to_vec(),
        })
    }

    /// Re-expresses the series in `unit`. Only millions/billions of persons
    /// interconvert (exact factor 1000); any other change is a mismatch.
    pub fn convert(&self, unit: Unit) -> Result<Self> {
        if unit == self.unit {
            return Ok(self.clone());
        }
        let thousand = T::lit(1000.0);
        let values = match (self.unit, unit) {
            (Unit::MillionsOfPersons, Unit::BillionsOfPersons) => {
                self.values.iter().map(|&v| v / thousand).collect()
            }
            (Unit::BillionsOfPersons, Unit::MillionsOfPersons) => {
                self.values.iter().map(|&v| v * thousand).collect()
            }
            _ => {
                return Err(Error::UnitMismatch {
                    expected: unit.to_string(),
                    found: self.unit.to_string(),
                })
            }
        };
        Ok(Self {
            name: self.name.clone(),
            unit,
            start_year: self.start_year,
            values,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Same years, new values (re-validated against `unit`).
    pub fn map_values<U: Scalar>(
        &self,
        unit: Unit,
        f: impl FnMut(T) -> U,
    ) -> Result<AnnualSeries<U>> {
        AnnualSeries::new(
            self.name.clone(),
            unit,
            self.start_year,
            self.values.iter().copied().map(f).collect(),
        )
    }

    /// Changes the scalar type.
    pub fn cast<U: Scalar>(&self) -> AnnualSeries<U> {
        AnnualSeries {
            name: self.name.clone(),
            unit: self.unit,
            start_year: self.start_year,
            values: self.values.iter().map(|v| U::lit(v.as_f64())).collect(),
        }
    }
}

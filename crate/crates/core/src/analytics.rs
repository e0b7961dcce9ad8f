//! Growth rates, shares, trade-share checks, cause rankings and revenue
//! projection.

use serde::Serialize;

use crate::dataset::{DiseaseShareRow, PopulationRow, Region, TradeRow, DISEASE_YEARS};
use crate::error::{Error, Result};
use crate::regression::LinearFit;
use crate::scalar::Scalar;
use crate::series::{AnnualSeries, Unit};

/// Tolerance, in percentage points, beyond which a recomputed percentage is
/// reported as disagreeing with its printed value.
pub const DEFAULT_DIAGNOSTIC_TOLERANCE: f64 = 0.1;

/// Breast-cancer share of cancer mortality, 2004 and 2008 (percent). There
/// is no underlying series; only these two points are published.
pub const BREAST_CANCER_MORTALITY: [(i32, f64); 2] = [(2004, 2.88), (2008, 6.9)];

/// 2010 census snapshot: total population (billions) and 65+ share (percent).
/// Differs from the population table (1.34 billion, 8.19%) and is kept only
/// for reference.
pub const CENSUS_2010: (f64, f64) = (1.37, 8.87);

/// Percentage-point change in breast-cancer mortality share, 2004 to 2008.
pub fn breast_cancer_increase() -> f64 {
    let [(_, from), (_, to)] = BREAST_CANCER_MORTALITY;
    to - from
}

/// Compound annual growth rate in percent between two years of the series.
pub fn cagr<T: Scalar>(series: &AnnualSeries<T>, from_year: i32, to_year: i32) -> Result<T> {
    if to_year <= from_year {
        return Err(Error::EmptyRange(format!("{from_year}..{to_year}")));
    }
    let from = series.value_at(from_year)?;
    let to = series.value_at(to_year)?;
    for (year, v) in [(from_year, from), (to_year, to)] {
        if v <= T::zero() {
            return Err(Error::NonPositive {
                year,
                value: v.as_f64(),
            });
        }
    }
    let years = T::from_count((to_year - from_year) as usize);
    Ok(T::lit(100.0) * ((to / from).powf(T::one() / years) - T::one()))
}

/// Year-on-year growth in percent; starts one year after the input.
pub fn annual_growth<T: Scalar>(series: &AnnualSeries<T>) -> Result<AnnualSeries<T>> {
    series.require_len(2)?;
    if let Some((year, v)) = series.iter().find(|&(_, v)| v <= T::zero()) {
        return Err(Error::NonPositive {
            year,
            value: v.as_f64(),
        });
    }
    let hundred = T::lit(100.0);
    let values = series
        .values()
        .windows(2)
        .map(|w| hundred * (w[1] - w[0]) / w[0])
        .collect();
    AnnualSeries::new(
        format!("{}.growth", series.name()),
        Unit::Percent,
        series.start_year() + 1,
        values,
    )
}

/// `100 * numerator / denominator` per year.
pub fn share<T: Scalar>(
    numerator: &AnnualSeries<T>,
    denominator: &AnnualSeries<T>,
) -> Result<AnnualSeries<T>> {
    numerator.require_same_years(denominator)?;
    if numerator.unit() != denominator.unit() {
        return Err(Error::UnitMismatch {
            expected: denominator.unit().to_string(),
            found: numerator.unit().to_string(),
        });
    }
    let hundred = T::lit(100.0);
    let values = numerator
        .iter()
        .zip(denominator.values())
        .map(|((year, n), &d)| {
            if d == T::zero() {
                Err(Error::NonPositive { year, value: 0.0 })
            } else {
                Ok(hundred * n / d)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    AnnualSeries::new(
        format!("{}/{}", numerator.name(), denominator.name()),
        Unit::Percent,
        numerator.start_year(),
        values,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TradeShareCheck {
    pub label: String,
    pub export_share: f64,
    pub import_share: f64,
    pub export_delta: f64,
    pub import_delta: f64,
}

impl TradeShareCheck {
    /// Larger of the two absolute deltas, in percentage points.
    pub fn delta(&self) -> f64 {
        self.export_delta.abs().max(self.import_delta.abs())
    }
}

/// Recomputes every row's export and import shares against the row labelled
/// `total_label` and reports recomputed-minus-printed deltas.
pub fn verify_trade_shares(rows: &[TradeRow], total_label: &str) -> Result<Vec<TradeShareCheck>> {
    let total = rows
        .iter()
        .find(|r| r.label == total_label)
        .ok_or_else(|| Error::MissingTotalRow(total_label.to_string()))?;
    if total.export_value <= 0.0 || total.import_value <= 0.0 {
        return Err(Error::NonPositive {
            year: 0,
            value: total.export_value.min(total.import_value),
        });
    }
    Ok(rows
        .iter()
        .map(|r| {
            let export_share = 100.0 * r.export_value / total.export_value;
            let import_share = 100.0 * r.import_value / total.import_value;
            TradeShareCheck {
                label: r.label.clone(),
                export_share,
                import_share,
                export_delta: export_share - r.export_share,
                import_delta: import_share - r.import_share,
            }
        })
        .collect())
}

/// Causes of death for one region and year, largest share first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedCauses {
    pub region: Region,
    pub year: i32,
    pub ranking: Vec<(String, f64)>,
}

impl RankedCauses {
    pub fn top(&self) -> &(String, f64) {
        &self.ranking[0]
    }

    /// 1-based rank of the first cause whose name starts with `prefix`.
    pub fn rank_of(&self, prefix: &str) -> Option<usize> {
        self.ranking
            .iter()
            .position(|(c, _)| c.starts_with(prefix))
            .map(|i| i + 1)
    }
}

/// Orders the region's causes by their share in `year`. Equal shares keep
/// fixture row order.
pub fn rank_causes(rows: &[DiseaseShareRow], region: Region, year: i32) -> Result<RankedCauses> {
    if !DISEASE_YEARS.contains(&year) {
        return Err(Error::DataGap(year));
    }
    let mut ranking = rows
        .iter()
        .filter(|r| r.region == region)
        .map(|r| {
            r.shares
                .get(&year)
                .map(|&s| (r.cause.clone(), s))
                .ok_or(Error::DataGap(year))
        })
        .collect::<Result<Vec<_>>>()?;
    if ranking.is_empty() {
        return Err(Error::InvalidConfig(format!("no {region} rows")));
    }
    ranking.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(RankedCauses {
        region,
        year,
        ranking,
    })
}

/// Applies the fit to every forecast value. The forecast must be in the
/// unit the fit's predictor was measured in.
pub fn project_revenue<T: Scalar>(
    fit: &LinearFit<T>,
    driver_forecast: &AnnualSeries<T>,
) -> Result<AnnualSeries<T>> {
    if driver_forecast.unit() != fit.x_unit {
        return Err(Error::UnitMismatch {
            expected: fit.x_unit.to_string(),
            found: driver_forecast.unit().to_string(),
        });
    }
    let values = driver_forecast
        .values()
        .iter()
        .map(|&x| fit.predict(x))
        .collect();
    AnnualSeries::new(
        format!("{}.projected", driver_forecast.name()),
        fit.y_unit,
        driver_forecast.start_year(),
        values,
    )
}

/// A recomputed growth rate compared with the printed one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthDiagnostic {
    pub year: i32,
    pub recomputed: f64,
    pub printed: f64,
    pub delta: f64,
    /// Recomputed value rounded to one decimal equals the printed value.
    pub rounds_to_printed: bool,
    /// `|delta| > tolerance`.
    pub exceeds_tolerance: bool,
}

/// Compares the printed annual growth column with growth recomputed from the
/// total-population column. The first year has no predecessor and is
/// skipped.
pub fn growth_diagnostics(rows: &[PopulationRow], tolerance: f64) -> Vec<GrowthDiagnostic> {
    rows.windows(2)
        .map(|w| {
            let recomputed = 100.0 * (w[1].pop_total - w[0].pop_total) / w[0].pop_total;
            let printed = w[1].growth_rate;
            let delta = recomputed - printed;
            GrowthDiagnostic {
                year: w[1].year,
                recomputed,
                printed,
                delta,
                rounds_to_printed: crate::regression::rounds_to(recomputed, printed, 1),
                exceeds_tolerance: delta.abs() > tolerance,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(start: i32, v: &[f64]) -> AnnualSeries<f64> {
        AnnualSeries::new("s", Unit::Count, start, v.to_vec()).unwrap()
    }

    #[test]
    fn cagr_perfect_square() {
        let r = cagr(&s(2000, &[100.0, 110.0, 121.0]), 2000, 2002).unwrap();
        assert!((r - 10.0).abs() < 1e-12);
    }

    #[test]
    fn cagr_flat() {
        assert_eq!(cagr(&s(2000, &[5.0, 7.0, 5.0]), 2000, 2002).unwrap(), 0.0);
    }

    #[test]
    fn cagr_errors() {
        let x = s(2000, &[1.0, 2.0]);
        assert_eq!(cagr(&x, 2000, 2005).unwrap_err(), Error::MissingYear(2005));
        assert!(cagr(&x, 2001, 2000).is_err());
        let neg = AnnualSeries::new("g", Unit::Percent, 2000, vec![-1.0, 2.0]).unwrap();
        assert!(matches!(
            cagr(&neg, 2000, 2001),
            Err(Error::NonPositive { .. })
        ));
    }

    #[test]
    fn growth_of_constant_is_zero() {
        let g = annual_growth(&s(1990, &[3.0, 3.0, 3.0])).unwrap();
        assert_eq!(g.values(), &[0.0, 0.0]);
        assert_eq!(g.start_year(), 1991);
        assert_eq!(g.unit(), Unit::Percent);
    }

    #[test]
    fn share_of_self_is_hundred() {
        let x = s(2000, &[3.0, 7.0]);
        assert_eq!(share(&x, &x).unwrap().values(), &[100.0, 100.0]);
    }

    #[test]
    fn share_range_mismatch() {
        assert!(share(&s(2000, &[1.0, 2.0]), &s(2001, &[1.0, 2.0])).is_err());
    }

    #[test]
    fn breast_cancer_difference() {
        assert!((breast_cancer_increase() - 4.02).abs() < 1e-12);
    }

    #[test]
    fn missing_total_row() {
        assert_eq!(
            verify_trade_shares(&[], "Total").unwrap_err(),
            Error::MissingTotalRow("Total".into())
        );
    }

    #[test]
    fn zero_slope_projection_is_constant() {
        let fit =
            LinearFit::from_coefficients(4.5, 0.0, Unit::BillionsOfPersons, Unit::BillionsOfRmb);
        let f = AnnualSeries::new("f", Unit::BillionsOfPersons, 2011, vec![0.1, 0.2, 0.3]).unwrap();
        let p = project_revenue(&fit, &f).unwrap();
        assert_eq!(p.values(), &[4.5, 4.5, 4.5]);
        assert_eq!(p.start_year(), 2011);
        assert_eq!(p.unit(), Unit::BillionsOfRmb);
    }

    #[test]
    fn projection_unit_mismatch() {
        let fit =
            LinearFit::from_coefficients(1.0, 1.0, Unit::BillionsOfPersons, Unit::BillionsOfRmb);
        let f = AnnualSeries::new("f", Unit::MillionsOfPersons, 2011, vec![112.71]).unwrap();
        assert!(matches!(
            project_revenue(&fit, &f),
            Err(Error::UnitMismatch { .. })
        ));
    }
}

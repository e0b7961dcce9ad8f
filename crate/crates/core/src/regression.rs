//! Simple least-squares regression of one series on another, and the
//! four-driver revenue report.

use serde::Serialize;

use crate::dataset::{HealthMarketRow, PopulationRow, Rows};
use crate::error::{Error, Result};
use crate::scalar::{Field, Scalar};
use crate::series::{AnnualSeries, Unit};

/// `y = beta0 + beta1 * x` fitted by ordinary least squares.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearFit<T> {
    pub beta0: T,
    pub beta1: T,
    /// Pearson correlation of x and y. With one predictor this is the
    /// "multiple R" of a regression table.
    pub r: T,
    pub n: usize,
    /// `y - (beta0 + beta1 x)` in year order.
    pub residuals: Vec<T>,
    pub x_name: String,
    pub y_name: String,
    pub x_unit: Unit,
    pub y_unit: Unit,
}

impl<T: Scalar> LinearFit<T> {
    /// A fit with the given coefficients and no sample, e.g. a printed
    /// equation.
    pub fn from_coefficients(beta0: T, beta1: T, x_unit: Unit, y_unit: Unit) -> Self {
        Self {
            beta0,
            beta1,
            r: T::nan(),
            n: 0,
            residuals: Vec::new(),
            x_name: "x".into(),
            y_name: "y".into(),
            x_unit,
            y_unit,
        }
    }

    pub fn predict(&self, x: T) -> T {
        predict(self, x)
    }

    pub fn r_squared(&self) -> T {
        self.r * self.r
    }

    pub fn sse(&self) -> T {
        self.residuals.iter().map(|&e| e * e).sum()
    }
}

/// Closed-form coefficients `(beta0, beta1)` with centred sums.
///
/// Works over any field, so exact rationals give exact coefficients. Returns
/// `None` when the slices are empty, differ in length, or `x` is constant.
pub fn ols_coefficients<T: Field>(x: &[T], y: &[T]) -> Option<(T, T)> {
    if x.is_empty() || x.len() != y.len() {
        return None;
    }
    let n = x.iter().fold(T::zero(), |acc, _| acc + T::one());
    let x_mean = x.iter().cloned().fold(T::zero(), |a, b| a + b) / n.clone();
    let y_mean = y.iter().cloned().fold(T::zero(), |a, b| a + b) / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for (xi, yi) in x.iter().zip(y) {
        let dx = xi.clone() - x_mean.clone();
        sxy = sxy + dx.clone() * (yi.clone() - y_mean.clone());
        sxx = sxx + dx.clone() * dx;
    }
    if sxx == T::zero() {
        return None;
    }
    let beta1 = sxy / sxx;
    let beta0 = y_mean - beta1.clone() * x_mean;
    Some((beta0, beta1))
}

/// Pearson correlation. Zero when either input is constant.
pub fn pearson<T: Scalar>(x: &[T], y: &[T]) -> T {
    let n = T::from_count(x.len());
    let x_mean = x.iter().copied().sum::<T>() / n;
    let y_mean = y.iter().copied().sum::<T>() / n;
    let (mut sxx, mut syy, mut sxy) = (T::zero(), T::zero(), T::zero());
    for (&xi, &yi) in x.iter().zip(y) {
        let (dx, dy) = (xi - x_mean, yi - y_mean);
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
        sxy = sxy + dx * dy;
    }
    if sxx == T::zero() || syy == T::zero() {
        return T::zero();
    }
    (sxy / (sxx * syy).sqrt()).max(-T::one()).min(T::one())
}

/// Fits `y` on `x`. Both series must cover the same years.
pub fn fit_ols<T: Scalar>(x: &AnnualSeries<T>, y: &AnnualSeries<T>) -> Result<LinearFit<T>> {
    x.require_same_years(y)?;
    x.require_len(2)?;
    let (beta0, beta1) = ols_coefficients(x.values(), y.values())
        .ok_or_else(|| Error::DegeneratePredictor(x.name().to_string()))?;
    let residuals = x
        .values()
        .iter()
        .zip(y.values())
        .map(|(&xi, &yi)| yi - (beta0 + beta1 * xi))
        .collect();
    Ok(LinearFit {
        beta0,
        beta1,
        r: pearson(x.values(), y.values()),
        n: x.len(),
        residuals,
        x_name: x.name().to_string(),
        y_name: y.name().to_string(),
        x_unit: x.unit(),
        y_unit: y.unit(),
    })
}

pub fn predict<T: Scalar>(fit: &LinearFit<T>, x: T) -> T {
    fit.beta0 + fit.beta1 * x
}

/// The four explanatory drivers of device revenue, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Driver {
    HospitalVisits,
    Pop65,
    HealthExpenditure,
    HospitalCount,
}

impl Driver {
    pub const ALL: [Driver; 4] = [
        Driver::HospitalVisits,
        Driver::Pop65,
        Driver::HealthExpenditure,
        Driver::HospitalCount,
    ];

    pub fn field(self) -> &'static str {
        match self {
            Driver::HospitalVisits => "hospital_visits",
            Driver::Pop65 => "pop65",
            Driver::HealthExpenditure => "health_expenditure",
            Driver::HospitalCount => "hospital_count",
        }
    }

    pub fn from_field(field: &str) -> Option<Driver> {
        Driver::ALL.into_iter().find(|d| d.field() == field)
    }

    /// Published equation for this driver against device revenue.
    pub fn printed(self) -> PrintedEquation {
        let (label, beta0, beta1, r) = match self {
            Driver::HospitalVisits => ("y1", -127.35, 116.05, 0.98),
            Driver::Pop65 => ("y2", -470.54, 5236.43, 0.94),
            Driver::HealthExpenditure => ("y3", -19.53, 0.07, 0.99),
            Driver::HospitalCount => ("y4", -364.46, 0.02, 0.91),
        };
        PrintedEquation {
            label,
            beta0,
            beta1,
            r,
            decimals: 2,
        }
    }
}

/// Published coefficients, all printed to `decimals` places.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrintedEquation {
    pub label: &'static str,
    pub beta0: f64,
    pub beta1: f64,
    pub r: f64,
    pub decimals: u32,
}

impl PrintedEquation {
    pub fn as_fit(&self, x_unit: Unit) -> LinearFit<f64> {
        LinearFit::from_coefficients(self.beta0, self.beta1, x_unit, Unit::BillionsOfRmb)
    }
}

/// Recomputed-minus-printed deltas, and whether each recomputed value rounds
/// to the printed one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub delta_beta0: f64,
    pub delta_beta1: f64,
    pub delta_r: f64,
    pub beta0_matches: bool,
    pub beta1_matches: bool,
    pub r_matches: bool,
}

impl Comparison {
    pub fn new(fit: &LinearFit<f64>, printed: &PrintedEquation) -> Self {
        let d = printed.decimals;
        Self {
            delta_beta0: fit.beta0 - printed.beta0,
            delta_beta1: fit.beta1 - printed.beta1,
            delta_r: fit.r - printed.r,
            beta0_matches: rounds_to(fit.beta0, printed.beta0, d),
            beta1_matches: rounds_to(fit.beta1, printed.beta1, d),
            r_matches: rounds_to(fit.r, printed.r, d),
        }
    }

    pub fn all_match(&self) -> bool {
        self.beta0_matches && self.beta1_matches && self.r_matches
    }
}

/// True when `value` rounded half-away-from-zero to `decimals` places equals
/// the printed number.
pub fn rounds_to(value: f64, printed: f64, decimals: u32) -> bool {
    let scale = 10f64.powi(decimals as i32);
    (value * scale).round() == (printed * scale).round()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriverFit {
    pub driver: Driver,
    pub fit: LinearFit<f64>,
    pub printed: PrintedEquation,
    pub comparison: Comparison,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriverReport {
    pub fits: Vec<DriverFit>,
}

impl DriverReport {
    pub fn get(&self, driver: Driver) -> &DriverFit {
        self.fits
            .iter()
            .find(|f| f.driver == driver)
            .expect("report holds every driver")
    }
}

/// The 65+ predictor in the healthcare table is rounded to whole millions
/// (three decimals of billions). [`pop65_table_b_fit`] gives the same
/// regression on the unrounded population table for comparison.
pub const POP65_ROUNDING_CAVEAT: &str = "pop65 in table3 is rounded to 0.001 billion; \
the alternative fit uses unrounded tableB pop65 (2000-2010 overlap, converted to billions)";

/// Fits device revenue on each driver, in [`Driver::ALL`] order.
pub fn driver_report(rows: &[HealthMarketRow]) -> Result<DriverReport> {
    let table = Rows::HealthMarket(rows.to_vec());
    let revenue = table.to_series("device_revenue")?;
    let fits = Driver::ALL
        .into_iter()
        .map(|driver| {
            let x = table.to_series(driver.field())?;
            let fit = fit_ols(&x, &revenue)?;
            let printed = driver.printed();
            let comparison = Comparison::new(&fit, &printed);
            Ok(DriverFit {
                driver,
                fit,
                printed,
                comparison,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DriverReport { fits })
}

/// Device revenue on unrounded 65+ population (billions) over the years
/// both tables share.
pub fn pop65_table_b_fit(
    health: &[HealthMarketRow],
    population: &[PopulationRow],
) -> Result<LinearFit<f64>> {
    let revenue = Rows::HealthMarket(health.to_vec()).to_series("device_revenue")?;
    let pop65 = Rows::Population(population.to_vec())
        .to_series("pop65")?
        .convert(Unit::BillionsOfPersons)?;
    let from = revenue.start_year().max(pop65.start_year());
    let to = revenue.end_year().min(pop65.end_year());
    fit_ols(&pop65.between(from, to)?, &revenue.between(from, to)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(values: &[f64]) -> AnnualSeries<f64> {
        AnnualSeries::new("s", Unit::Count, 2000, values.to_vec()).unwrap()
    }

    #[test]
    fn exact_line() {
        let fit = fit_ols(&series(&[1.0, 2.0, 3.0]), &series(&[2.0, 4.0, 6.0])).unwrap();
        assert_eq!(fit.beta0, 0.0);
        assert_eq!(fit.beta1, 2.0);
        assert!((fit.r - 1.0).abs() < 1e-15);
        assert_eq!(fit.n, 3);
    }

    #[test]
    fn constant_predictor_is_degenerate() {
        let err = fit_ols(&series(&[3.0, 3.0, 3.0]), &series(&[1.0, 2.0, 3.0])).unwrap_err();
        assert!(matches!(err, Error::DegeneratePredictor(_)));
    }

    #[test]
    fn year_mismatch() {
        let x = series(&[1.0, 2.0, 3.0]);
        let y = AnnualSeries::new("y", Unit::Count, 2001, vec![1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(
            fit_ols(&x, &y),
            Err(Error::YearRangeMismatch { .. })
        ));
    }

    #[test]
    fn one_point_is_too_short() {
        let x = series(&[1.0]);
        assert_eq!(
            fit_ols(&x, &x).unwrap_err(),
            Error::TooShort { len: 1, min: 2 }
        );
    }

    #[test]
    fn prediction_at_mean_is_mean() {
        let x = series(&[1.0, 2.0, 4.0, 7.0]);
        let y = series(&[3.0, 1.0, 6.0, 9.0]);
        let fit = fit_ols(&x, &y).unwrap();
        assert!((fit.predict(3.5) - 4.75).abs() < 1e-12);
    }

    #[test]
    fn printed_equation_predictions() {
        let eq2 = Driver::HospitalVisits
            .printed()
            .as_fit(Unit::BillionsOfVisits);
        assert_eq!(eq2.predict(0.0), -127.35);
        let eq3 = Driver::Pop65.printed().as_fit(Unit::BillionsOfPersons);
        // -470.54 + 5236.43 * 0.113
        assert!((eq3.predict(0.113) - 121.17659).abs() < 1e-9);
    }

    #[test]
    fn rounding_comparison() {
        assert!(rounds_to(0.0652187, 0.07, 2));
        assert!(rounds_to(116.04827, 116.05, 2));
        assert!(!rounds_to(0.0649, 0.07, 2));
        assert!(rounds_to(-127.3536, -127.35, 2));
    }

    #[test]
    fn f32_fit() {
        let x = AnnualSeries::new("x", Unit::Count, 2000, vec![1.0f32, 2.0, 3.0]).unwrap();
        let y = AnnualSeries::new("y", Unit::Count, 2000, vec![2.0f32, 4.0, 6.0]).unwrap();
        let fit = fit_ols(&x, &y).unwrap();
        assert!((fit.beta1 - 2.0).abs() < 1e-6);
    }
}

use medmarket::regression::{fit_ols, ols_coefficients, pearson};
use medmarket::{AnnualSeries, Unit};
use num_rational::Ratio;
use proptest::prelude::*;

type Q = Ratio<i128>;

fn series(name: &str, v: &[f64]) -> AnnualSeries<f64> {
    AnnualSeries::new(name, Unit::Percent, 2000, v.to_vec()).unwrap()
}

/// Raw-moment formula, evaluated exactly.
fn oracle(x: &[i64], y: &[i64]) -> Option<(Q, Q)> {
    let n = Q::from_integer(x.len() as i128);
    let q = |v: i64| Q::from_integer(v as i128);
    let sx: Q = x.iter().map(|&v| q(v)).sum();
    let sy: Q = y.iter().map(|&v| q(v)).sum();
    let sxx: Q = x.iter().map(|&v| q(v) * q(v)).sum();
    let sxy: Q = x.iter().zip(y).map(|(&a, &b)| q(a) * q(b)).sum();
    let den = n * sxx - sx * sx;
    if den == Q::from_integer(0) {
        return None;
    }
    let beta1 = (n * sxy - sx * sy) / den;
    let beta0 = (sy - beta1 * sx) / n;
    Some((beta0, beta1))
}

fn to_f64(q: Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

fn int_pairs() -> impl Strategy<Value = (Vec<i64>, Vec<i64>)> {
    (2usize..=6).prop_flat_map(|n| {
        (
            prop::collection::vec(-1000i64..1000, n),
            prop::collection::vec(-1000i64..1000, n),
        )
    })
}

fn real_pairs() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (3usize..=20).prop_flat_map(|n| {
        (
            prop::collection::vec(-1e3f64..1e3, n),
            prop::collection::vec(-1e3f64..1e3, n),
        )
    })
}

proptest! {
    #[test]
    fn generic_solver_is_exact_over_rationals((x, y) in int_pairs()) {
        let xq: Vec<Q> = x.iter().map(|&v| Q::from_integer(v as i128)).collect();
        let yq: Vec<Q> = y.iter().map(|&v| Q::from_integer(v as i128)).collect();
        prop_assert_eq!(ols_coefficients(&xq, &yq), oracle(&x, &y));
    }

    #[test]
    fn float_fit_matches_rational_oracle((x, y) in int_pairs()) {
        let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
        match oracle(&x, &y) {
            None => prop_assert!(fit_ols(&series("x", &xf), &series("y", &yf)).is_err()),
            Some((b0, b1)) => {
                let fit = fit_ols(&series("x", &xf), &series("y", &yf)).unwrap();
                prop_assert!(close(fit.beta0, to_f64(b0), 1e-9), "{} vs {}", fit.beta0, to_f64(b0));
                prop_assert!(close(fit.beta1, to_f64(b1), 1e-9), "{} vs {}", fit.beta1, to_f64(b1));
            }
        }
    }

    #[test]
    fn residuals_satisfy_normal_equations((x, y) in real_pairs()) {
        let xs = series("x", &x);
        let fit = match fit_ols(&xs, &series("y", &y)) { Ok(f) => f, Err(_) => return Ok(()) };
        let scale = 1e-9 * (1.0 + y.iter().map(|v| v.abs()).fold(0.0, f64::max)) * x.len() as f64;
        let sum_e: f64 = fit.residuals.iter().sum();
        let sum_xe: f64 = fit.residuals.iter().zip(&x).map(|(e, xi)| e * xi).sum();
        prop_assert!(sum_e.abs() <= scale, "sum e = {sum_e}");
        prop_assert!(sum_xe.abs() <= scale * 1e3, "sum xe = {sum_xe}");
    }

    #[test]
    fn scale_equivariance((x, y) in real_pairs(), c in 0.01f64..100.0) {
        let base = match fit_ols(&series("x", &x), &series("y", &y)) { Ok(f) => f, Err(_) => return Ok(()) };
        let ys: Vec<f64> = y.iter().map(|v| c * v).collect();
        let xs: Vec<f64> = x.iter().map(|v| c * v).collect();
        let fy = fit_ols(&series("x", &x), &series("y", &ys)).unwrap();
        let fx = fit_ols(&series("x", &xs), &series("y", &y)).unwrap();
        prop_assert!(close(fy.beta0, c * base.beta0, 1e-8));
        prop_assert!(close(fy.beta1, c * base.beta1, 1e-8));
        prop_assert!(close(fx.beta0, base.beta0, 1e-8));
        prop_assert!(close(fx.beta1, base.beta1 / c, 1e-8));
        prop_assert!(close(fy.r, base.r, 1e-9) && close(fx.r, base.r, 1e-9));
    }

    #[test]
    fn correlation_is_symmetric_and_bounded((x, y) in real_pairs()) {
        let a = pearson(&x, &y);
        prop_assert_eq!(a, pearson(&y, &x));
        prop_assert!((-1.0..=1.0).contains(&a));
    }

    #[test]
    fn exact_line_is_recovered(b0 in -50i64..50, b1 in -20i64..20, n in 2usize..10) {
        let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| b0 as f64 + b1 as f64 * v).collect();
        let fit = fit_ols(&series("x", &x), &series("y", &y)).unwrap();
        prop_assert!(close(fit.beta0, b0 as f64, 1e-12));
        prop_assert!(close(fit.beta1, b1 as f64, 1e-12));
        if b1 != 0 {
            prop_assert!((fit.r.abs() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn constant_response_has_zero_correlation() {
    let fit = fit_ols(
        &series("x", &[1.0, 2.0, 3.0]),
        &series("y", &[4.0, 4.0, 4.0]),
    )
    .unwrap();
    assert_eq!(fit.beta1, 0.0);
    assert_eq!(fit.r, 0.0);
}

#[test]
fn f32_and_f64_agree_on_table3() {
    let rows = medmarket::dataset::builtin(medmarket::dataset::TableId::Table3).unwrap();
    let x = rows.to_series("hospital_visits").unwrap();
    let y = rows.to_series("device_revenue").unwrap();
    let wide = fit_ols(&x, &y).unwrap();
    let narrow = fit_ols(&x.cast::<f32>(), &y.cast::<f32>()).unwrap();
    assert!((narrow.beta1 as f64 - wide.beta1).abs() < 1e-2);
    assert!((narrow.r as f64 - wide.r).abs() < 1e-4);
}

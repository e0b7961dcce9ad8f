//! Full-batch optimizers for the one-hidden-layer network.

use serde::{Deserialize, Serialize};

use super::network::Network;
use crate::scalar::Scalar;

/// Damped Gauss-Newton settings. `mu` is the initial damping; a rejected
/// step multiplies it by `mu_inc`, an accepted one by `mu_dec`, and training
/// stops once it exceeds `mu_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevenbergMarquardt {
    pub mu: f64,
    pub mu_inc: f64,
    pub mu_dec: f64,
    pub mu_max: f64,
    /// Stop when the gradient norm of the MSE falls below this.
    pub min_gradient: f64,
}

impl Default for LevenbergMarquardt {
    fn default() -> Self {
        Self {
            mu: 1e-3,
            mu_inc: 10.0,
            mu_dec: 0.1,
            mu_max: 1e10,
            min_gradient: 1e-7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for Adam {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Optimizer {
    LevenbergMarquardt(LevenbergMarquardt),
    Adam(Adam),
}

impl Default for Optimizer {
    fn default() -> Self {
        Optimizer::LevenbergMarquardt(LevenbergMarquardt::default())
    }
}

/// Why a training run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stop {
    TargetReached,
    MaxEpochs,
    SmallGradient,
    DampingLimit,
    Diverged,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunStats<T> {
    pub epochs: usize,
    pub mse: T,
    pub stop: Stop,
}

/// Minimizes the MSE of `net` on the pairs in place.
pub fn minimize<T: Scalar>(
    optimizer: &Optimizer,
    net: &mut Network<T>,
    inputs: &[Vec<T>],
    targets: &[T],
    max_epochs: usize,
    target_mse: f64,
) -> RunStats<T> {
    match optimizer {
        Optimizer::LevenbergMarquardt(lm) => {
            levenberg_marquardt(lm, net, inputs, targets, max_epochs, target_mse)
        }
        Optimizer::Adam(adam) => run_adam(adam, net, inputs, targets, max_epochs, target_mse),
    }
}

fn levenberg_marquardt<T: Scalar>(
    lm: &LevenbergMarquardt,
    net: &mut Network<T>,
    inputs: &[Vec<T>],
    targets: &[T],
    max_epochs: usize,
    target_mse: f64,
) -> RunStats<T> {
    let p = net.param_count();
    let n = targets.len();
    let n_t = T::from_count(n);
    let target = T::lit(target_mse);
    let mut mu = lm.mu;
    let mut params = net.params();
    let mut mse = net.mse(inputs, targets);
    let stats = |epochs, mse, stop| RunStats { epochs, mse, stop };

    for epoch in 0..max_epochs {
        if !mse.is_finite() {
            return stats(epoch, mse, Stop::Diverged);
        }
        if mse <= target {
            return stats(epoch, mse, Stop::TargetReached);
        }
        let (res, jac) = net.residuals_jacobian(inputs, targets);

        // Gauss-Newton normal matrix J'J and J'e.
        let mut jtj = vec![T::zero(); p * p];
        let mut jte = vec![T::zero(); p];
        for (row, &e) in jac.chunks(p).zip(&res) {
            for a in 0..p {
                let ra = row[a];
                jte[a] = jte[a] + ra * e;
                if ra == T::zero() {
                    continue;
                }
                let dst = &mut jtj[a * p..a * p + a + 1];
                for (d, &rb) in dst.iter_mut().zip(&row[..=a]) {
                    *d = *d + ra * rb;
                }
            }
        }
        let grad_norm = jte.iter().map(|&g| g * g).sum::<T>().sqrt() * T::lit(2.0) / n_t;
        if grad_norm.as_f64() < lm.min_gradient {
            return stats(epoch, mse, Stop::SmallGradient);
        }

        loop {
            let mut a = jtj.clone();
            for i in 0..p {
                a[i * p + i] = a[i * p + i] + T::lit(mu);
            }
            let accepted = match cholesky_solve(&mut a, &jte, p) {
                Some(step) => {
                    let trial: Vec<T> = params.iter().zip(&step).map(|(&w, &s)| w - s).collect();
                    net.set_params(&trial);
                    let trial_mse = net.mse(inputs, targets);
                    if trial_mse.is_finite() && trial_mse < mse {
                        params = trial;
                        mse = trial_mse;
                        true
                    } else {
                        false
                    }
                }
                None => false,
            };
            if accepted {
                mu = (mu * lm.mu_dec).max(1e-20);
                break;
            }
            net.set_params(&params);
            mu *= lm.mu_inc;
            if mu > lm.mu_max {
                return stats(epoch + 1, mse, Stop::DampingLimit);
            }
        }
    }
    net.set_params(&params);
    if !mse.is_finite() {
        return stats(max_epochs, mse, Stop::Diverged);
    }
    if mse <= target {
        return stats(max_epochs, mse, Stop::TargetReached);
    }
    stats(max_epochs, mse, Stop::MaxEpochs)
}

fn run_adam<T: Scalar>(
    adam: &Adam,
    net: &mut Network<T>,
    inputs: &[Vec<T>],
    targets: &[T],
    max_epochs: usize,
    target_mse: f64,
) -> RunStats<T> {
    let p = net.param_count();
    let mut params = net.params();
    let mut m = vec![T::zero(); p];
    let mut v = vec![T::zero(); p];
    let (lr, b1, b2, eps) = (
        T::lit(adam.learning_rate),
        T::lit(adam.beta1),
        T::lit(adam.beta2),
        T::lit(adam.epsilon),
    );
    let target = T::lit(target_mse);
    let mut mse = T::infinity();
    for epoch in 0..max_epochs {
        let (loss, grad) = net.mse_gradient(inputs, targets);
        mse = loss;
        if !mse.is_finite() {
            return RunStats {
                epochs: epoch,
                mse,
                stop: Stop::Diverged,
            };
        }
        if mse <= target {
            return RunStats {
                epochs: epoch,
                mse,
                stop: Stop::TargetReached,
            };
        }
        let t = (epoch + 1) as i32;
        let c1 = T::one() - b1.powi(t);
        let c2 = T::one() - b2.powi(t);
        for k in 0..p {
            m[k] = b1 * m[k] + (T::one() - b1) * grad[k];
            v[k] = b2 * v[k] + (T::one() - b2) * grad[k] * grad[k];
            let m_hat = m[k] / c1;
            let v_hat = v[k] / c2;
            params[k] = params[k] - lr * m_hat / (v_hat.sqrt() + eps);
        }
        net.set_params(&params);
    }
    let final_mse = net.mse(inputs, targets);
    if final_mse.is_finite() {
        mse = final_mse;
    }
    RunStats {
        epochs: max_epochs,
        mse,
        stop: if !mse.is_finite() {
            Stop::Diverged
        } else if mse <= target {
            Stop::TargetReached
        } else {
            Stop::MaxEpochs
        },
    }
}

/// Solves `A x = b` for symmetric positive-definite `A` given by its lower
/// triangle (row-major, `n x n`). `A` is overwritten by its Cholesky factor.
/// Returns `None` if `A` is not numerically positive definite.
pub(crate) fn cholesky_solve<T: Scalar>(a: &mut [T], b: &[T], n: usize) -> Option<Vec<T>> {
    for j in 0..n {
        let mut diag = a[j * n + j];
        for k in 0..j {
            diag = diag - a[j * n + k] * a[j * n + k];
        }
        if !(diag > T::zero()) || !diag.is_finite() {
            return None;
        }
        let l_jj = diag.sqrt();
        a[j * n + j] = l_jj;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s = s - a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / l_jj;
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s = s - a[i * n + k] * y[k];
        }
        y[i] = s / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s = s - a[k * n + i] * y[k];
        }
        y[i] = s / a[i * n + i];
    }
    Some(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_small_system() {
        // [[4,2],[2,3]] x = [2, 1]  ->  x = [0.5, 0]
        let mut a = vec![4.0f64, 0.0, 2.0, 3.0];
        let x = cholesky_solve(&mut a, &[2.0, 1.0], 2).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-15);
        assert!(x[1].abs() < 1e-15);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = vec![1.0f64, 0.0, 2.0, 1.0];
        assert!(cholesky_solve(&mut a, &[1.0, 1.0], 2).is_none());
    }
}

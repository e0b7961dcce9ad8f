//! One-hidden-layer network: tanh hidden units, linear output.

use rand::Rng;

use crate::scalar::Scalar;

/// Weights of a `delays -> hidden -> 1` network.
///
/// Flattened parameter order is input weights (row per hidden unit), hidden
/// biases, output weights, output bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    pub(crate) delays: usize,
    pub(crate) hidden: usize,
    /// `hidden x delays`, row-major.
    pub(crate) w_in: Vec<T>,
    pub(crate) b_hidden: Vec<T>,
    pub(crate) w_out: Vec<T>,
    pub(crate) b_out: T,
}

impl<T: Scalar> Network<T> {
    pub fn zeros(delays: usize, hidden: usize) -> Self {
        Self {
            delays,
            hidden,
            w_in: vec![T::zero(); hidden * delays],
            b_hidden: vec![T::zero(); hidden],
            w_out: vec![T::zero(); hidden],
            b_out: T::zero(),
        }
    }

    /// Every parameter drawn uniformly from `[-0.5, 0.5]`.
    pub fn random<R: Rng>(delays: usize, hidden: usize, rng: &mut R) -> Self {
        let mut net = Self::zeros(delays, hidden);
        let params: Vec<T> = (0..net.param_count())
            .map(|_| T::lit(rng.gen_range(-0.5..=0.5)))
            .collect();
        net.set_params(&params);
        net
    }

    pub fn delays(&self) -> usize {
        self.delays
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn param_count(&self) -> usize {
        self.hidden * self.delays + 2 * self.hidden + 1
    }

    pub fn params(&self) -> Vec<T> {
        let mut p = Vec::with_capacity(self.param_count());
        p.extend_from_slice(&self.w_in);
        p.extend_from_slice(&self.b_hidden);
        p.extend_from_slice(&self.w_out);
        p.push(self.b_out);
        p
    }

    pub fn set_params(&mut self, p: &[T]) {
        assert_eq!(p.len(), self.param_count(), "parameter vector length");
        let (w_in, rest) = p.split_at(self.hidden * self.delays);
        let (b_hidden, rest) = rest.split_at(self.hidden);
        let (w_out, rest) = rest.split_at(self.hidden);
        self.w_in.copy_from_slice(w_in);
        self.b_hidden.copy_from_slice(b_hidden);
        self.w_out.copy_from_slice(w_out);
        self.b_out = rest[0];
    }

    pub fn is_finite(&self) -> bool {
        self.params().iter().all(|v| v.is_finite())
    }

    /// Output for one input window; `hidden_out` receives the activations.
    fn forward_into(&self, x: &[T], hidden_out: &mut [T]) -> T {
        debug_assert_eq!(x.len(), self.delays);
        let mut out = self.b_out;
        for h in 0..self.hidden {
            let row = &self.w_in[h * self.delays..(h + 1) * self.delays];
            let z = row
                .iter()
                .zip(x)
                .fold(self.b_hidden[h], |acc, (&w, &xi)| acc + w * xi);
            let a = z.tanh_portable();
            hidden_out[h] = a;
            out = out + self.w_out[h] * a;
        }
        out
    }

    pub fn forward(&self, x: &[T]) -> T {
        let mut buf = vec![T::zero(); self.hidden];
        self.forward_into(x, &mut buf)
    }

    /// Output and its gradient with respect to every parameter, written to
    /// `grad` in flattened order.
    pub fn output_gradient(&self, x: &[T], hidden_buf: &mut [T], grad: &mut [T]) -> T {
        let out = self.forward_into(x, hidden_buf);
        let d = self.delays;
        let hn = self.hidden;
        let (g_in, rest) = grad.split_at_mut(hn * d);
        let (g_bh, rest) = rest.split_at_mut(hn);
        let (g_out, g_bo) = rest.split_at_mut(hn);
        for h in 0..hn {
            let a = hidden_buf[h];
            let back = self.w_out[h] * (T::one() - a * a);
            g_bh[h] = back;
            for (g, &xi) in g_in[h * d..(h + 1) * d].iter_mut().zip(x) {
                *g = back * xi;
            }
            g_out[h] = a;
        }
        g_bo[0] = T::one();
        out
    }

    /// Mean squared error over `(inputs, target)` pairs.
    pub fn mse(&self, inputs: &[Vec<T>], targets: &[T]) -> T {
        let mut buf = vec![T::zero(); self.hidden];
        let sse: T = inputs
            .iter()
            .zip(targets)
            .map(|(x, &t)| {
                let e = self.forward_into(x, &mut buf) - t;
                e * e
            })
            .sum();
        sse / T::from_count(targets.len())
    }

    /// MSE and its gradient by backpropagation.
    pub fn mse_gradient(&self, inputs: &[Vec<T>], targets: &[T]) -> (T, Vec<T>) {
        let p = self.param_count();
        let mut grad = vec![T::zero(); p];
        let mut row = vec![T::zero(); p];
        let mut buf = vec![T::zero(); self.hidden];
        let mut sse = T::zero();
        for (x, &t) in inputs.iter().zip(targets) {
            let e = self.output_gradient(x, &mut buf, &mut row) - t;
            sse = sse + e * e;
            for (g, &r) in grad.iter_mut().zip(&row) {
                *g = *g + e * r;
            }
        }
        let n = T::from_count(targets.len());
        let two = T::lit(2.0);
        grad.iter_mut().for_each(|g| *g = two * *g / n);
        (sse / n, grad)
    }

    /// Residuals `output - target` and the Jacobian of the outputs
    /// (`targets.len() x param_count`, row-major).
    pub fn residuals_jacobian(&self, inputs: &[Vec<T>], targets: &[T]) -> (Vec<T>, Vec<T>) {
        let p = self.param_count();
        let mut jac = vec![T::zero(); targets.len() * p];
        let mut buf = vec![T::zero(); self.hidden];
        let residuals = inputs
            .iter()
            .zip(targets)
            .zip(jac.chunks_mut(p))
            .map(|((x, &t), row)| self.output_gradient(x, &mut buf, row) - t)
            .collect();
        (residuals, jac)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn params_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net: Network<f64> = Network::random(3, 4, &mut rng);
        assert_eq!(net.param_count(), 3 * 4 + 4 + 4 + 1);
        let mut other = Network::zeros(3, 4);
        other.set_params(&net.params());
        assert_eq!(other, net);
        assert!(net.params().iter().all(|v| (-0.5..=0.5).contains(v)));
    }

    #[test]
    fn forward_by_hand() {
        let mut net: Network<f64> = Network::zeros(2, 1);
        net.set_params(&[0.5, -1.0, 0.25, 2.0, 0.1]);
        let z: f64 = 0.25 + 0.5 * 1.0 - 1.0 * 3.0;
        assert!((net.forward(&[1.0, 3.0]) - (0.1 + 2.0 * z.tanh())).abs() < 1e-15);
    }

    #[test]
    fn jacobian_rows_agree_with_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net: Network<f64> = Network::random(2, 3, &mut rng);
        let inputs = vec![vec![0.1, -0.4], vec![0.7, 0.2], vec![-0.3, 0.9]];
        let targets = vec![0.3, -0.1, 0.5];
        let (res, jac) = net.residuals_jacobian(&inputs, &targets);
        let (mse, grad) = net.mse_gradient(&inputs, &targets);
        let p = net.param_count();
        for k in 0..p {
            let jt_e: f64 = (0..3).map(|i| jac[i * p + k] * res[i]).sum();
            assert!((2.0 * jt_e / 3.0 - grad[k]).abs() < 1e-14);
        }
        let mse2: f64 = res.iter().map(|e| e * e).sum::<f64>() / 3.0;
        assert!((mse - mse2).abs() < 1e-15);
    }
}

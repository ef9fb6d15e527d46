use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Elementwise activation applied after the affine transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Tanh,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the post-activation output.
    #[inline]
    fn grad_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Identity => 1.0,
        }
    }
}

/// A dense layer `y = activation(W x + b)` with row-major `W` of shape
/// (out_dim, in_dim). All arithmetic is f64.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DenseLayer {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
}

/// Parameter gradients for one layer, same shapes as the parameters.
#[derive(Debug, Clone)]
pub struct LayerGrads {
    pub d_weights: Vec<f64>,
    pub d_biases: Vec<f64>,
}

impl DenseLayer {
    pub fn zeros(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        Self {
            weights: vec![0.0; in_dim * out_dim],
            biases: vec![0.0; out_dim],
            in_dim,
            out_dim,
            activation,
        }
    }

    /// Orthogonal-style init: rows (or columns, whichever is the smaller
    /// side) are orthonormalized and scaled by `gain`. Biases start at zero.
    pub fn orthogonal(
        in_dim: usize,
        out_dim: usize,
        gain: f64,
        activation: Activation,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let weights = orthogonal_matrix(out_dim, in_dim, gain, rng);
        Self {
            weights,
            biases: vec![0.0; out_dim],
            in_dim,
            out_dim,
            activation,
        }
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.biases.len()
    }

    /// Shape contract is checked by the owning network; here it is a
    /// programmer error.
    pub fn forward(&self, input: &[f64], output: &mut Vec<f64>) {
        debug_assert_eq!(input.len(), self.in_dim);
        output.clear();
        output.reserve(self.out_dim);
        for o in 0..self.out_dim {
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            let mut z = self.biases[o];
            for (w, x) in row.iter().zip(input) {
                z = w.mul_add(*x, z);
            }
            output.push(self.activation.apply(z));
        }
    }

    /// Accumulates parameter gradients into `grads` and writes the gradient
    /// with respect to the layer input into `d_input` (overwritten).
    ///
    /// `output` must be the post-activation output of the matching `forward`
    /// call and `d_output` the upstream gradient dL/dy.
    pub fn backward(
        &self,
        input: &[f64],
        output: &[f64],
        d_output: &[f64],
        grads: &mut LayerGrads,
        d_input: &mut Vec<f64>,
    ) {
        debug_assert_eq!(input.len(), self.in_dim);
        debug_assert_eq!(output.len(), self.out_dim);
        debug_assert_eq!(d_output.len(), self.out_dim);
        d_input.clear();
        d_input.resize(self.in_dim, 0.0);
        for o in 0..self.out_dim {
            let d_z = d_output[o] * self.activation.grad_from_output(output[o]);
            grads.d_biases[o] += d_z;
            let row = o * self.in_dim;
            for i in 0..self.in_dim {
                grads.d_weights[row + i] += d_z * input[i];
                d_input[i] = self.weights[row + i].mul_add(d_z, d_input[i]);
            }
        }
    }
}

impl LayerGrads {
    pub fn zeros_like(layer: &DenseLayer) -> Self {
        Self {
            d_weights: vec![0.0; layer.weights.len()],
            d_biases: vec![0.0; layer.biases.len()],
        }
    }
}

/// Row-major (rows x cols) matrix whose smaller dimension is orthonormal,
/// scaled by `gain`. Gaussian entries via Box-Muller, then modified
/// Gram-Schmidt on the smaller side.
fn orthogonal_matrix(rows: usize, cols: usize, gain: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (long, short) = (rows.max(cols), rows.min(cols));
    // `short` vectors of length `long`, orthonormalized in sequence.
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(short);
    while basis.len() < short {
        let mut v: Vec<f64> = (0..long).map(|_| gaussian(rng)).collect();
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
            for (x, c) in v.iter_mut().zip(b) {
                *x -= dot * c;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-12 {
            continue; // astronomically unlikely; redraw
        }
        for x in &mut v {
            *x /= norm;
        }
        basis.push(v);
    }
    let mut out = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            // rows >= cols: basis vectors are columns; otherwise rows.
            let val = if rows >= cols { basis[c][r] } else { basis[r][c] };
            out[r * cols + c] = gain * val;
        }
    }
    out
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

//! Dense layers and batched forward/backward passes.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::NnError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Tanh,
    Softplus,
}

impl Activation {
    pub fn id(self) -> u32 {
        match self {
            Activation::Identity => 0,
            Activation::Tanh => 1,
            Activation::Softplus => 2,
        }
    }

    pub fn from_id(id: u32) -> Option<Self> {
        match id {
            0 => Some(Activation::Identity),
            1 => Some(Activation::Tanh),
            2 => Some(Activation::Softplus),
            _ => None,
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Tanh => x.tanh(),
            Activation::Softplus => softplus(x),
        }
    }

    // Derivative expressed through the activation output, so the tape only
    // needs to keep outputs.
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Tanh => 1.0 - y * y,
            Activation::Softplus => 1.0 - (-y).exp(),
        }
    }
}

/// Numerically stable ln(1 + e^x).
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

#[derive(Debug, Clone)]
pub struct DenseLayer {
    /// out_dim x in_dim.
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn new(weights: Array2<f64>, bias: Array1<f64>, activation: Activation) -> Self {
        assert_eq!(weights.nrows(), bias.len(), "bias/weight rows mismatch");
        Self {
            weights,
            bias,
            activation,
        }
    }

    /// Gaussian init scaled by 1/sqrt(in_dim).
    pub fn random<R: Rng>(
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let std = (1.0 / in_dim.max(1) as f64).sqrt();
        let dist = Normal::new(0.0, std).unwrap();
        let weights = Array2::from_shape_fn((out_dim, in_dim), |_| dist.sample(rng));
        Self {
            weights,
            bias: Array1::zeros(out_dim),
            activation,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.nrows()
    }
}

/// An ordered stack of dense layers. An empty stack is the identity map.
#[derive(Debug, Clone, Default)]
pub struct Mlp {
    pub layers: Vec<DenseLayer>,
}

/// Cached layer outputs from a forward pass, sufficient for backward.
#[derive(Debug, Clone)]
pub struct Tape {
    /// inputs[0] is the network input; inputs[l + 1] is layer l's output.
    inputs: Vec<Array2<f64>>,
}

impl Tape {
    pub fn batch_size(&self) -> usize {
        self.inputs[0].ncols()
    }
}

/// Per-layer (weight, bias) gradients mirroring an Mlp's shapes.
#[derive(Debug, Clone)]
pub struct ParamGrads {
    pub layers: Vec<(Array2<f64>, Array1<f64>)>,
}

impl ParamGrads {
    pub fn zeros_like(mlp: &Mlp) -> Self {
        Self {
            layers: mlp
                .layers
                .iter()
                .map(|l| {
                    (
                        Array2::zeros(l.weights.dim()),
                        Array1::zeros(l.bias.len()),
                    )
                })
                .collect(),
        }
    }

    pub fn add(&mut self, other: &ParamGrads) {
        assert_eq!(self.layers.len(), other.layers.len());
        for ((w, b), (ow, ob)) in self.layers.iter_mut().zip(&other.layers) {
            *w += ow;
            *b += ob;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|(w, b)| w.iter().all(|v| v.is_finite()) && b.iter().all(|v| v.is_finite()))
    }
}

impl Mlp {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self, NnError> {
        for pair in layers.windows(2) {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(NnError::Dimension(format!(
                    "layer output {} feeds layer input {}",
                    pair[0].out_dim(),
                    pair[1].in_dim()
                )));
            }
        }
        Ok(Self { layers })
    }

    pub fn in_dim(&self) -> Option<usize> {
        self.layers.first().map(|l| l.in_dim())
    }

    pub fn out_dim(&self) -> Option<usize> {
        self.layers.last().map(|l| l.out_dim())
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    /// Batched forward pass; `input` is in_dim x batch.
    pub fn forward_batch(&self, input: ArrayView2<f64>) -> Result<(Array2<f64>, Tape), NnError> {
        if let Some(d) = self.in_dim() {
            if input.nrows() != d {
                return Err(NnError::Dimension(format!(
                    "input has {} rows, network expects {}",
                    input.nrows(),
                    d
                )));
            }
        }
        let mut inputs = Vec::with_capacity(self.layers.len() + 1);
        inputs.push(input.to_owned());
        let mut current = input.to_owned();
        for layer in &self.layers {
            let mut pre = layer.weights.dot(&current);
            for mut col in pre.axis_iter_mut(Axis(1)) {
                col += &layer.bias;
            }
            current = pre.mapv(|x| layer.activation.apply(x));
            inputs.push(current.clone());
        }
        let tape = Tape { inputs };
        Ok((current, tape))
    }

    /// Single-vector forward pass.
    pub fn forward(&self, input: ArrayView1<f64>) -> Result<(Array1<f64>, Tape), NnError> {
        let col = input.insert_axis(Axis(1));
        let (out, tape) = self.forward_batch(col)?;
        Ok((out.index_axis(Axis(1), 0).to_owned(), tape))
    }

    /// Reverse-mode gradients for a forward pass recorded in `tape`.
    /// `output_grad` is dLoss/dOutput (out_dim x batch). Gradients are summed
    /// over the batch. Also returns dLoss/dInput.
    pub fn backward_batch(
        &self,
        tape: &Tape,
        output_grad: ArrayView2<f64>,
    ) -> Result<(ParamGrads, Array2<f64>), NnError> {
        if tape.inputs.len() != self.layers.len() + 1 {
            return Err(NnError::Dimension("tape does not match network".into()));
        }
        let expected = self.out_dim().unwrap_or(tape.inputs[0].nrows());
        if output_grad.nrows() != expected || output_grad.ncols() != tape.batch_size() {
            return Err(NnError::Dimension(format!(
                "output grad is {}x{}, expected {}x{}",
                output_grad.nrows(),
                output_grad.ncols(),
                expected,
                tape.batch_size()
            )));
        }

        let mut grads = Vec::with_capacity(self.layers.len());
        let mut upstream = output_grad.to_owned();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let output = &tape.inputs[l + 1];
            let input = &tape.inputs[l];
            // d pre-activation = upstream (.) act'(output)
            let mut dpre = upstream;
            dpre.zip_mut_with(output, |g, &y| {
                *g *= layer.activation.derivative_from_output(y)
            });
            let dw = dpre.dot(&input.t());
            let db = dpre.sum_axis(Axis(1));
            upstream = layer.weights.t().dot(&dpre);
            grads.push((dw, db));
        }
        grads.reverse();
        Ok((ParamGrads { layers: grads }, upstream))
    }

    /// Single-vector backward pass.
    pub fn backward(
        &self,
        tape: &Tape,
        output_grad: ArrayView1<f64>,
    ) -> Result<(ParamGrads, Array1<f64>), NnError> {
        let col = output_grad.insert_axis(Axis(1));
        let (grads, din) = self.backward_batch(tape, col)?;
        Ok((grads, din.index_axis(Axis(1), 0).to_owned()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_layer_passes_input_through() {
        let w = Array2::eye(3);
        let mlp = Mlp::new(vec![DenseLayer::new(
            w,
            Array1::zeros(3),
            Activation::Identity,
        )])
        .unwrap();
        let x = array![1.0, -2.0, 0.5];
        let (y, _) = mlp.forward(x.view()).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn softplus_at_zero_is_ln2() {
        let mlp = Mlp::new(vec![DenseLayer::new(
            Array2::zeros((1, 1)),
            Array1::zeros(1),
            Activation::Softplus,
        )])
        .unwrap();
        let (y, _) = mlp.forward(array![5.0].view()).unwrap();
        assert_relative_eq!(y[0], std::f64::consts::LN_2, max_relative = 1e-15);
    }

    #[test]
    fn two_layer_forward_matches_hand_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let l1 = DenseLayer::random(4, 3, Activation::Tanh, &mut rng);
        let l2 = DenseLayer::random(3, 2, Activation::Identity, &mut rng);
        let mlp = Mlp::new(vec![l1.clone(), l2.clone()]).unwrap();
        let x = array![0.3, -0.7, 1.1, 0.05];
        let (y, _) = mlp.forward(x.view()).unwrap();

        // Independent elementwise oracle.
        let mut h = vec![0.0; 3];
        for o in 0..3 {
            let mut acc = l1.bias[o];
            for i in 0..4 {
                acc += l1.weights[[o, i]] * x[i];
            }
            h[o] = acc.tanh();
        }
        for o in 0..2 {
            let mut acc = l2.bias[o];
            for (i, hv) in h.iter().enumerate() {
                acc += l2.weights[[o, i]] * hv;
            }
            assert!((y[o] - acc).abs() <= 1e-12);
        }
    }

    #[test]
    fn forward_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mlp = Mlp::new(vec![
            DenseLayer::random(5, 7, Activation::Tanh, &mut rng),
            DenseLayer::random(7, 2, Activation::Softplus, &mut rng),
        ])
        .unwrap();
        let x = array![0.1, 0.2, 0.3, 0.4, 0.5];
        let (a, _) = mlp.forward(x.view()).unwrap();
        let (b, _) = mlp.forward(x.view()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn linear_layer_weight_grad_is_outer_product() {
        // loss = sum(output) => dL/dout = 1, dW = outer(1, input).
        let mlp = Mlp::new(vec![DenseLayer::new(
            Array2::zeros((2, 3)),
            Array1::zeros(2),
            Activation::Identity,
        )])
        .unwrap();
        let x = array![1.0, 2.0, 3.0];
        let (_, tape) = mlp.forward(x.view()).unwrap();
        let (grads, _) = mlp.backward(&tape, array![1.0, 1.0].view()).unwrap();
        let (dw, db) = &grads.layers[0];
        for o in 0..2 {
            for i in 0..3 {
                assert_eq!(dw[[o, i]], x[i]);
            }
            assert_eq!(db[o], 1.0);
        }
    }

    #[test]
    fn tanh_local_derivative_at_zero_is_one() {
        let mlp = Mlp::new(vec![DenseLayer::new(
            array![[1.0]],
            Array1::zeros(1),
            Activation::Tanh,
        )])
        .unwrap();
        let (_, tape) = mlp.forward(array![0.0].view()).unwrap();
        let (_, din) = mlp.backward(&tape, array![1.0].view()).unwrap();
        assert_eq!(din[0], 1.0);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mlp = Mlp::new(vec![DenseLayer::random(3, 2, Activation::Tanh, &mut rng)]).unwrap();
        assert!(mlp.forward(array![1.0, 2.0].view()).is_err());
    }

    #[test]
    fn softplus_output_strictly_positive() {
        for x in [-30.0, -5.0, 0.0, 2.0, 40.0] {
            assert!(softplus(x) > 0.0);
        }
    }

    #[test]
    fn batch_matches_per_vector() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mlp = Mlp::new(vec![
            DenseLayer::random(4, 6, Activation::Tanh, &mut rng),
            DenseLayer::random(6, 3, Activation::Softplus, &mut rng),
        ])
        .unwrap();
        let batch = Array2::from_shape_fn((4, 5), |(i, j)| (i as f64 - j as f64) * 0.17);
        let (out, _) = mlp.forward_batch(batch.view()).unwrap();
        for j in 0..5 {
            let (single, _) = mlp.forward(batch.column(j)).unwrap();
            for i in 0..3 {
                assert_relative_eq!(out[[i, j]], single[i], max_relative = 1e-14);
            }
        }
    }
}

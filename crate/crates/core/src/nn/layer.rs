use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Linear,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
            Activation::Linear => x,
        }
    }

    /// Derivative expressed through the pre-activation and the activation output.
    pub fn derivative(self, pre: f64, post: f64) -> f64 {
        match self {
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - post * post,
            Activation::Linear => 1.0,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Activation::Relu => 0,
            Activation::Tanh => 1,
            Activation::Linear => 2,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(Activation::Relu),
            1 => Ok(Activation::Tanh),
            2 => Ok(Activation::Linear),
            other => Err(Error::Format(format!("unknown activation code {other}"))),
        }
    }
}

/// Fully connected layer `y = act(W x + b)` with `W` stored `out × in`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: Array2<f64>,
    pub biases: Array1<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn new(weights: Array2<f64>, biases: Array1<f64>, activation: Activation) -> Result<Self> {
        if weights.nrows() != biases.len() {
            return Err(Error::ShapeMismatch(format!("{} weight rows but {} biases", weights.nrows(), biases.len())));
        }
        if weights.is_empty() {
            return Err(Error::InvalidConfig("zero-size layer".into()));
        }
        Ok(Self { weights, biases, activation })
    }

    /// Glorot-uniform weights, zero biases.
    pub fn glorot<R: Rng + ?Sized>(inputs: usize, outputs: usize, activation: Activation, rng: &mut R) -> Result<Self> {
        if inputs == 0 || outputs == 0 {
            return Err(Error::InvalidConfig(format!("zero-size layer {inputs}x{outputs}")));
        }
        let bound = glorot_bound(inputs, outputs);
        let weights = Array2::from_shape_fn((outputs, inputs), |_| rng.random_range(-bound..bound));
        Ok(Self { weights, biases: Array1::zeros(outputs), activation })
    }

    pub fn inputs(&self) -> usize {
        self.weights.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.nrows()
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.biases.len()
    }

    /// Batched forward on rows of `input`; returns `(pre_activation, output)`.
    pub(crate) fn forward(&self, input: ArrayView2<'_, f64>) -> (Array2<f64>, Array2<f64>) {
        let mut pre = input.dot(&self.weights.t());
        pre += &self.biases;
        let act = self.activation;
        let post = pre.mapv(|x| act.apply(x));
        (pre, post)
    }

    /// Returns `(dW, db, d_input)` given the gradient at the layer output.
    pub(crate) fn backward(
        &self,
        input: &Array2<f64>,
        pre: &Array2<f64>,
        post: &Array2<f64>,
        grad_out: &Array2<f64>,
    ) -> (Array2<f64>, Array1<f64>, Array2<f64>) {
        let act = self.activation;
        let mut delta = grad_out.clone();
        if act != Activation::Linear {
            ndarray::Zip::from(&mut delta).and(pre).and(post).for_each(|d, &p, &q| *d *= act.derivative(p, q));
        }
        let d_weights = delta.t().dot(input);
        let d_biases = delta.sum_axis(Axis(0));
        let d_input = delta.dot(&self.weights);
        (d_weights, d_biases, d_input)
    }
}

pub fn glorot_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

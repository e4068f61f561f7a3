//! Feed-forward trunk with one or two parallel output heads.

use ndarray::{Array1, Array2, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::layer::{Activation, DenseLayer};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub units: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn new(units: usize, activation: Activation) -> Self {
        Self { units, activation }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub input_dim: usize,
    pub hidden: Vec<LayerSpec>,
    /// One or two heads fed by the last hidden layer.
    pub heads: Vec<LayerSpec>,
}

#[derive(Debug, Clone)]
pub struct MlpNetwork {
    input_dim: usize,
    trunk: Vec<DenseLayer>,
    heads: Vec<DenseLayer>,
    version: u64,
}

impl PartialEq for MlpNetwork {
    fn eq(&self, other: &Self) -> bool {
        self.input_dim == other.input_dim && self.trunk == other.trunk && self.heads == other.heads
    }
}

/// Activations cached by a traced forward pass, consumed by [`MlpNetwork::backward`].
#[derive(Debug)]
pub struct GradientTape {
    version: u64,
    input: Array2<f64>,
    trunk: Vec<(Array2<f64>, Array2<f64>)>,
    heads: Vec<(Array2<f64>, Array2<f64>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrads {
    pub weights: Array2<f64>,
    pub biases: Array1<f64>,
}

/// Gradients for every layer, trunk first then heads.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGrads {
    pub layers: Vec<LayerGrads>,
}

impl NetworkGrads {
    pub fn zeros_like(net: &MlpNetwork) -> Self {
        Self {
            layers: net
                .layers()
                .map(|l| LayerGrads { weights: Array2::zeros(l.weights.raw_dim()), biases: Array1::zeros(l.outputs()) })
                .collect(),
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(l.biases.iter()).copied()).collect()
    }

    /// Elementwise `self += other`.
    pub fn accumulate(&mut self, other: &NetworkGrads) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights += &b.weights;
            a.biases += &b.biases;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for l in &mut self.layers {
            l.weights *= factor;
            l.biases *= factor;
        }
    }
}

impl MlpNetwork {
    pub fn init<R: Rng + ?Sized>(spec: &NetworkSpec, rng: &mut R) -> Result<Self> {
        if spec.input_dim == 0 {
            return Err(Error::InvalidConfig("network input dimension is zero".into()));
        }
        if spec.heads.is_empty() || spec.heads.len() > 2 {
            return Err(Error::InvalidConfig(format!("expected 1 or 2 heads, got {}", spec.heads.len())));
        }
        let mut width = spec.input_dim;
        let mut trunk = Vec::with_capacity(spec.hidden.len());
        for layer in &spec.hidden {
            trunk.push(DenseLayer::glorot(width, layer.units, layer.activation, rng)?);
            width = layer.units;
        }
        let heads = spec
            .heads
            .iter()
            .map(|h| DenseLayer::glorot(width, h.units, h.activation, rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { input_dim: spec.input_dim, trunk, heads, version: 0 })
    }

    /// All-zero parameters with the shapes described by `spec`.
    pub fn zeroed(spec: &NetworkSpec) -> Result<Self> {
        let mut width = spec.input_dim;
        let mut trunk = Vec::with_capacity(spec.hidden.len());
        for layer in &spec.hidden {
            trunk.push(DenseLayer::new(
                Array2::zeros((layer.units, width)),
                Array1::zeros(layer.units),
                layer.activation,
            )?);
            width = layer.units;
        }
        let heads = spec
            .heads
            .iter()
            .map(|h| DenseLayer::new(Array2::zeros((h.units, width)), Array1::zeros(h.units), h.activation))
            .collect::<Result<Vec<_>>>()?;
        Self::from_layers(trunk, heads)
    }

    pub fn from_layers(trunk: Vec<DenseLayer>, heads: Vec<DenseLayer>) -> Result<Self> {
        let input_dim = trunk
            .first()
            .or(heads.first())
            .map(DenseLayer::inputs)
            .ok_or_else(|| Error::InvalidConfig("network needs at least one layer".into()))?;
        if heads.is_empty() || heads.len() > 2 {
            return Err(Error::InvalidConfig(format!("expected 1 or 2 heads, got {}", heads.len())));
        }
        let mut width = input_dim;
        for layer in &trunk {
            if layer.inputs() != width {
                return Err(Error::DimensionMismatch { expected: width, actual: layer.inputs() });
            }
            width = layer.outputs();
        }
        for head in &heads {
            if head.inputs() != width {
                return Err(Error::DimensionMismatch { expected: width, actual: head.inputs() });
            }
        }
        Ok(Self { input_dim, trunk, heads, version: 0 })
    }

    pub fn spec(&self) -> NetworkSpec {
        let as_spec = |l: &DenseLayer| LayerSpec::new(l.outputs(), l.activation);
        NetworkSpec {
            input_dim: self.input_dim,
            hidden: self.trunk.iter().map(as_spec).collect(),
            heads: self.heads.iter().map(as_spec).collect(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn head_dims(&self) -> Vec<usize> {
        self.heads.iter().map(DenseLayer::outputs).collect()
    }

    pub fn trunk(&self) -> &[DenseLayer] {
        &self.trunk
    }

    pub fn heads(&self) -> &[DenseLayer] {
        &self.heads
    }

    pub fn layers(&self) -> impl Iterator<Item = &DenseLayer> {
        self.trunk.iter().chain(self.heads.iter())
    }

    /// Mutable access to all layers. Invalidates outstanding tapes.
    pub fn layers_mut(&mut self) -> impl Iterator<Item = &mut DenseLayer> {
        self.version += 1;
        self.trunk.iter_mut().chain(self.heads.iter_mut())
    }

    pub fn param_count(&self) -> usize {
        self.layers().map(DenseLayer::param_count).sum()
    }

    /// Parameters in layer order, each layer as row-major weights then biases.
    pub fn flatten(&self) -> Vec<f64> {
        self.layers().flat_map(|l| l.weights.iter().chain(l.biases.iter()).copied()).collect()
    }

    pub fn load_flat(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::DimensionMismatch { expected: self.param_count(), actual: params.len() });
        }
        let mut it = params.iter().copied();
        for layer in self.layers_mut() {
            for w in layer.weights.iter_mut().chain(layer.biases.iter_mut()) {
                *w = it.next().expect("length checked");
            }
        }
        Ok(())
    }

    pub fn has_finite_params(&self) -> bool {
        self.layers().all(|l| l.weights.iter().chain(l.biases.iter()).all(|v| v.is_finite()))
    }

    fn check_input(&self, x: &ArrayView2<'_, f64>) -> Result<()> {
        if x.ncols() != self.input_dim {
            return Err(Error::DimensionMismatch { expected: self.input_dim, actual: x.ncols() });
        }
        Ok(())
    }

    /// Batched forward pass (one example per row); one output matrix per head.
    pub fn forward(&self, x: ArrayView2<'_, f64>) -> Result<Vec<Array2<f64>>> {
        self.check_input(&x)?;
        let mut h = x.to_owned();
        for layer in &self.trunk {
            h = layer.forward(h.view()).1;
        }
        Ok(self.heads.iter().map(|head| head.forward(h.view()).1).collect())
    }

    pub fn forward_one(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        let view = ArrayView2::from_shape((1, x.len()), x).expect("contiguous slice");
        Ok(self.forward(view)?.into_iter().map(|m| m.into_raw_vec_and_offset().0).collect())
    }

    pub fn forward_traced(&self, x: ArrayView2<'_, f64>) -> Result<(Vec<Array2<f64>>, GradientTape)> {
        self.check_input(&x)?;
        let input = x.to_owned();
        let mut trunk = Vec::with_capacity(self.trunk.len());
        for layer in &self.trunk {
            let prev = trunk.last().map_or(&input, |(_, post): &(Array2<f64>, Array2<f64>)| post);
            trunk.push(layer.forward(prev.view()));
        }
        let last = trunk.last().map_or(&input, |(_, post)| post);
        let heads: Vec<_> = self.heads.iter().map(|head| head.forward(last.view())).collect();
        let outputs = heads.iter().map(|(_, post)| post.clone()).collect();
        Ok((outputs, GradientTape { version: self.version, input, trunk, heads }))
    }

    /// Reverse pass. Gradients are summed over the batch rows; callers
    /// averaging a batch loss scale `head_grads` accordingly.
    pub fn backward(&self, tape: GradientTape, head_grads: &[Array2<f64>]) -> Result<(NetworkGrads, Array2<f64>)> {
        if tape.version != self.version || tape.trunk.len() != self.trunk.len() || tape.heads.len() != self.heads.len()
        {
            return Err(Error::StaleTape);
        }
        if head_grads.len() != self.heads.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} head gradients for {} heads",
                head_grads.len(),
                self.heads.len()
            )));
        }
        let last = tape.trunk.last().map_or(&tape.input, |(_, post)| post);
        let mut head_grads_out = Vec::with_capacity(self.heads.len());
        let mut grad: Option<Array2<f64>> = None;
        for ((head, (pre, post)), g) in self.heads.iter().zip(&tape.heads).zip(head_grads) {
            if g.dim() != post.dim() {
                return Err(Error::ShapeMismatch(format!("head gradient {:?} vs output {:?}", g.dim(), post.dim())));
            }
            let (dw, db, dx) = head.backward(last, pre, post, g);
            head_grads_out.push(LayerGrads { weights: dw, biases: db });
            grad = Some(match grad {
                Some(acc) => acc + dx,
                None => dx,
            });
        }
        let mut grad = grad.expect("at least one head");

        let mut trunk_grads = Vec::with_capacity(self.trunk.len());
        for (i, layer) in self.trunk.iter().enumerate().rev() {
            let input = if i == 0 { &tape.input } else { &tape.trunk[i - 1].1 };
            let (pre, post) = &tape.trunk[i];
            let (dw, db, dx) = layer.backward(input, pre, post, &grad);
            trunk_grads.push(LayerGrads { weights: dw, biases: db });
            grad = dx;
        }
        trunk_grads.reverse();
        trunk_grads.extend(head_grads_out);
        Ok((NetworkGrads { layers: trunk_grads }, grad))
    }
}

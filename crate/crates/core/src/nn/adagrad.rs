use ndarray::{Array1, Array2, Zip};
use serde::{Deserialize, Serialize};

use super::network::{LayerGrads, MlpNetwork, NetworkGrads};
use crate::error::{Error, Result};

pub const DEFAULT_EPSILON: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdagradConfig {
    pub learning_rate: f64,
    pub epsilon: f64,
}

impl AdagradConfig {
    pub fn new(learning_rate: f64) -> Self {
        Self { learning_rate, epsilon: DEFAULT_EPSILON }
    }
}

/// Squared-gradient accumulators for one network.
#[derive(Debug, Clone, PartialEq)]
pub struct AdagradState {
    pub config: AdagradConfig,
    pub accumulators: Vec<LayerGrads>,
}

/// `acc += g²; θ -= η g / (sqrt(acc) + ε)` elementwise.
pub fn adagrad_update(params: &mut [f64], grads: &[f64], accum: &mut [f64], cfg: AdagradConfig) -> Result<()> {
    if params.len() != grads.len() || params.len() != accum.len() {
        return Err(Error::ShapeMismatch(format!(
            "params {}, grads {}, accumulators {}",
            params.len(),
            grads.len(),
            accum.len()
        )));
    }
    for ((p, &g), a) in params.iter_mut().zip(grads).zip(accum.iter_mut()) {
        *a += g * g;
        *p -= cfg.learning_rate * g / (a.sqrt() + cfg.epsilon);
    }
    Ok(())
}

impl AdagradState {
    pub fn new(net: &MlpNetwork, config: AdagradConfig) -> Self {
        Self { accumulators: NetworkGrads::zeros_like(net).layers, config }
    }

    pub fn step(&mut self, net: &mut MlpNetwork, grads: &NetworkGrads) -> Result<()> {
        if grads.layers.len() != self.accumulators.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} gradient layers for {} accumulator layers",
                grads.layers.len(),
                self.accumulators.len()
            )));
        }
        for ((g, a), layer) in grads.layers.iter().zip(&self.accumulators).zip(net.layers()) {
            if g.weights.dim() != a.weights.dim()
                || g.biases.len() != a.biases.len()
                || layer.weights.dim() != a.weights.dim()
            {
                return Err(Error::ShapeMismatch("gradient and parameter shapes differ".into()));
            }
        }
        let cfg = self.config;
        for ((layer, g), acc) in net.layers_mut().zip(&grads.layers).zip(&mut self.accumulators) {
            update_array2(&mut layer.weights, &g.weights, &mut acc.weights, cfg);
            update_array1(&mut layer.biases, &g.biases, &mut acc.biases, cfg);
        }
        Ok(())
    }

    pub fn flatten(&self) -> Vec<f64> {
        NetworkGrads { layers: self.accumulators.clone() }.flatten()
    }
}

fn update_array2(p: &mut Array2<f64>, g: &Array2<f64>, a: &mut Array2<f64>, cfg: AdagradConfig) {
    Zip::from(p).and(g).and(a).for_each(|p, &g, a| {
        *a += g * g;
        *p -= cfg.learning_rate * g / (a.sqrt() + cfg.epsilon);
    });
}

fn update_array1(p: &mut Array1<f64>, g: &Array1<f64>, a: &mut Array1<f64>, cfg: AdagradConfig) {
    Zip::from(p).and(g).and(a).for_each(|p, &g, a| {
        *a += g * g;
        *p -= cfg.learning_rate * g / (a.sqrt() + cfg.epsilon);
    });
}

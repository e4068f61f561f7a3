//! Deterministic autoencoder baseline scored by reconstruction MSE.

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{Activation, LayerSpec, MlpNetwork, NetworkGrads, NetworkSpec};

/// `hidden` lists encoder widths ending with the bottleneck; the decoder
/// mirrors them and ends in a `tanh` output layer of width `input_dim`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AeArchitecture {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
}

impl AeArchitecture {
    /// 728-512-256-128-64-32-10.
    pub fn reference(input_dim: usize) -> Self {
        Self { input_dim, hidden: vec![728, 512, 256, 128, 64, 32, 10] }
    }

    pub fn bottleneck(&self) -> usize {
        *self.hidden.last().expect("validated non-empty")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AeModel {
    pub encoder: MlpNetwork,
    pub decoder: MlpNetwork,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AeGrads {
    pub encoder: NetworkGrads,
    pub decoder: NetworkGrads,
}

fn relu_layers(widths: &[usize]) -> Vec<LayerSpec> {
    widths.iter().map(|&u| LayerSpec::new(u, Activation::Relu)).collect()
}

impl AeModel {
    pub fn new<R: Rng + ?Sized>(arch: &AeArchitecture, rng: &mut R) -> Result<Self> {
        let Some((&bottleneck, inner)) = arch.hidden.split_last() else {
            return Err(Error::InvalidConfig("autoencoder needs at least a bottleneck layer".into()));
        };
        let encoder = NetworkSpec {
            input_dim: arch.input_dim,
            hidden: relu_layers(inner),
            heads: vec![LayerSpec::new(bottleneck, Activation::Relu)],
        };
        let mirrored: Vec<usize> = inner.iter().rev().copied().collect();
        let decoder = NetworkSpec {
            input_dim: bottleneck,
            hidden: relu_layers(&mirrored),
            heads: vec![LayerSpec::new(arch.input_dim, Activation::Tanh)],
        };
        Ok(Self { encoder: MlpNetwork::init(&encoder, rng)?, decoder: MlpNetwork::init(&decoder, rng)? })
    }

    pub fn from_networks(encoder: MlpNetwork, decoder: MlpNetwork) -> Result<Self> {
        let code = encoder.head_dims();
        if code.len() != 1 || decoder.input_dim() != code[0] {
            return Err(Error::ShapeMismatch(format!("encoder heads {code:?}, decoder input {}", decoder.input_dim())));
        }
        if decoder.head_dims() != vec![encoder.input_dim()] {
            return Err(Error::ShapeMismatch("decoder output must match encoder input".into()));
        }
        Ok(Self { encoder, decoder })
    }

    pub fn input_dim(&self) -> usize {
        self.encoder.input_dim()
    }

    pub fn architecture(&self) -> AeArchitecture {
        let mut hidden: Vec<usize> = self.encoder.trunk().iter().map(|l| l.outputs()).collect();
        hidden.extend(self.encoder.head_dims());
        AeArchitecture { input_dim: self.input_dim(), hidden }
    }

    pub fn is_finite(&self) -> bool {
        self.encoder.has_finite_params() && self.decoder.has_finite_params()
    }

    pub fn reconstruct(&self, g_norm: &[f64]) -> Result<Vec<f64>> {
        let code = self.encoder.forward_one(g_norm)?.remove(0);
        Ok(self.decoder.forward_one(&code)?.remove(0))
    }

    /// Summed (over rows) per-example MSE and its gradient.
    pub fn grads_summed(&self, g: ArrayView2<'_, f64>) -> Result<(AeGrads, f64)> {
        let (code, enc_tape) = self.encoder.forward_traced(g)?;
        let (recon, dec_tape) = self.decoder.forward_traced(code[0].view())?;
        let resid: Array2<f64> = &recon[0] - &g;
        let dim = g.ncols() as f64;
        let loss = resid.iter().map(|r| r * r).sum::<f64>() / dim;
        if !loss.is_finite() {
            return Err(Error::Numeric("non-finite reconstruction error".into()));
        }
        let d_recon = resid.mapv(|r| 2.0 * r / dim);
        let (dec_grads, d_code) = self.decoder.backward(dec_tape, &[d_recon])?;
        let (enc_grads, _) = self.encoder.backward(enc_tape, &[d_code])?;
        Ok((AeGrads { encoder: enc_grads, decoder: dec_grads }, loss))
    }
}

pub fn mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mirrored_shapes() {
        let arch = AeArchitecture { input_dim: 12, hidden: vec![8, 6, 3] };
        let ae = AeModel::new(&arch, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(ae.architecture(), arch);
        let widths: Vec<usize> = ae.decoder.trunk().iter().map(|l| l.outputs()).collect();
        assert_eq!(widths, vec![6, 8]);
        assert_eq!(ae.decoder.heads()[0].activation, Activation::Tanh);
        let out = ae.reconstruct(&[0.1; 12]).unwrap();
        assert_eq!(out.len(), 12);
        assert!(out.iter().all(|v| v.abs() < 1.0));
    }

    #[test]
    fn mse_basics() {
        assert_eq!(mse(&[0.1, 0.2], &[0.1, 0.2]), 0.0);
        assert!((mse(&[0.0, 1.0], &[1.0, 1.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn empty_architecture_is_rejected() {
        let arch = AeArchitecture { input_dim: 4, hidden: vec![] };
        assert!(AeModel::new(&arch, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }
}

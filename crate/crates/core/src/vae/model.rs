//! Gaussian encoder/decoder pair and the per-observation ELBO.
//!
//! Both variance heads emit log-variances that are clamped before use, so
//! `ϑ = exp(t/2)` and `σ = exp(s/2)` stay strictly positive and finite.

use ndarray::{Array2, ArrayView2, Zip};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{Activation, LayerSpec, MlpNetwork, NetworkGrads, NetworkSpec};

pub const DEFAULT_LOGVAR_CLAMP: (f64, f64) = (-10.0, 10.0);

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Scale to unit Euclidean norm.
    #[default]
    UnitNorm,
    /// Scale so the largest magnitude entry is one.
    MaxAbs,
}

pub fn normalize_observation(g: &[f64]) -> Result<Vec<f64>> {
    normalize_with(Normalization::UnitNorm, g)
}

pub fn normalize_with(policy: Normalization, g: &[f64]) -> Result<Vec<f64>> {
    let scale = match policy {
        Normalization::UnitNorm => g.iter().map(|v| v * v).sum::<f64>().sqrt(),
        Normalization::MaxAbs => g.iter().fold(0.0f64, |m, v| m.max(v.abs())),
    };
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::Degenerate("observation has zero or non-finite norm"));
    }
    Ok(g.iter().map(|v| v / scale).collect())
}

/// Layer widths of a variational autoencoder. The decoder mirrors `hidden`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VaeArchitecture {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub latent_dim: usize,
}

impl VaeArchitecture {
    /// Encoder 728-256-64-32-10 with `L = 10`.
    pub fn reference(input_dim: usize) -> Self {
        Self { input_dim, hidden: vec![728, 256, 64, 32, 10], latent_dim: 10 }
    }

    fn encoder_spec(&self) -> NetworkSpec {
        NetworkSpec {
            input_dim: self.input_dim,
            hidden: self.hidden.iter().map(|&u| LayerSpec::new(u, Activation::Relu)).collect(),
            heads: vec![
                LayerSpec::new(self.latent_dim, Activation::Linear),
                LayerSpec::new(self.latent_dim, Activation::Linear),
            ],
        }
    }

    fn decoder_spec(&self) -> NetworkSpec {
        NetworkSpec {
            input_dim: self.latent_dim,
            hidden: self.hidden.iter().rev().map(|&u| LayerSpec::new(u, Activation::Relu)).collect(),
            heads: vec![
                LayerSpec::new(self.input_dim, Activation::Tanh),
                LayerSpec::new(self.input_dim, Activation::Linear),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub beta: Vec<f64>,
    /// Standard deviations `ϑ`.
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Likelihood {
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElboTerms {
    pub kl: f64,
    /// Reconstruction probability `V` (negative log-likelihood, nats).
    pub v: f64,
    pub elbo: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VaeModel {
    pub encoder: MlpNetwork,
    pub decoder: MlpNetwork,
    pub latent_dim: usize,
    pub logvar_clamp: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VaeGrads {
    pub encoder: NetworkGrads,
    pub decoder: NetworkGrads,
}

/// Batch-mean loss components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchLoss {
    pub loss: f64,
    pub kl: f64,
    pub v: f64,
}

pub fn reparameterize(beta: &[f64], theta: &[f64], eps: &[f64]) -> Vec<f64> {
    beta.iter().zip(theta).zip(eps).map(|((b, t), e)| b + t * e).collect()
}

pub fn kl_to_standard_normal(beta: &[f64], theta: &[f64]) -> f64 {
    -0.5 * beta
        .iter()
        .zip(theta)
        .map(|(b, t)| {
            let var = t * t;
            1.0 + var.ln() - b * b - var
        })
        .sum::<f64>()
}

pub fn reconstruction_v(g: &[f64], mu: &[f64], sigma: &[f64]) -> f64 {
    0.5 * g
        .iter()
        .zip(mu)
        .zip(sigma)
        .map(|((x, m), s)| {
            let var = s * s;
            LN_2PI + var.ln() + (x - m).powi(2) / var
        })
        .sum::<f64>()
}

pub fn elbo_terms(g: &[f64], beta: &[f64], theta: &[f64], mu: &[f64], sigma: &[f64]) -> Result<ElboTerms> {
    if beta.len() != theta.len() {
        return Err(Error::DimensionMismatch { expected: beta.len(), actual: theta.len() });
    }
    for other in [mu.len(), sigma.len()] {
        if other != g.len() {
            return Err(Error::DimensionMismatch { expected: g.len(), actual: other });
        }
    }
    if theta.iter().chain(sigma).any(|&s| !(s > 0.0)) {
        return Err(Error::Numeric("standard deviations must be positive".into()));
    }
    let kl = kl_to_standard_normal(beta, theta);
    let v = reconstruction_v(g, mu, sigma);
    Ok(ElboTerms { kl, v, elbo: -kl - v })
}

fn clamp_with_mask(raw: &Array2<f64>, (lo, hi): (f64, f64)) -> (Array2<f64>, Array2<f64>) {
    let clamped = raw.mapv(|x| x.clamp(lo, hi));
    let mask = raw.mapv(|x| if x > lo && x < hi { 1.0 } else { 0.0 });
    (clamped, mask)
}

fn as_row(x: &[f64]) -> ArrayView2<'_, f64> {
    ArrayView2::from_shape((1, x.len()), x).expect("contiguous slice")
}

impl VaeModel {
    pub fn new<R: Rng + ?Sized>(arch: &VaeArchitecture, rng: &mut R) -> Result<Self> {
        if arch.latent_dim == 0 {
            return Err(Error::InvalidConfig("latent dimension must be positive".into()));
        }
        let encoder = MlpNetwork::init(&arch.encoder_spec(), rng)?;
        let decoder = MlpNetwork::init(&arch.decoder_spec(), rng)?;
        Ok(Self { encoder, decoder, latent_dim: arch.latent_dim, logvar_clamp: DEFAULT_LOGVAR_CLAMP })
    }

    pub fn from_networks(encoder: MlpNetwork, decoder: MlpNetwork) -> Result<Self> {
        let enc_heads = encoder.head_dims();
        let dec_heads = decoder.head_dims();
        if enc_heads.len() != 2 || enc_heads[0] != enc_heads[1] {
            return Err(Error::ShapeMismatch(format!("encoder heads {enc_heads:?}")));
        }
        let latent_dim = enc_heads[0];
        if decoder.input_dim() != latent_dim {
            return Err(Error::DimensionMismatch { expected: latent_dim, actual: decoder.input_dim() });
        }
        if dec_heads.len() != 2 || dec_heads.iter().any(|&d| d != encoder.input_dim()) {
            return Err(Error::ShapeMismatch(format!("decoder heads {dec_heads:?}")));
        }
        Ok(Self { encoder, decoder, latent_dim, logvar_clamp: DEFAULT_LOGVAR_CLAMP })
    }

    pub fn input_dim(&self) -> usize {
        self.encoder.input_dim()
    }

    pub fn architecture(&self) -> VaeArchitecture {
        VaeArchitecture {
            input_dim: self.input_dim(),
            hidden: self.encoder.trunk().iter().map(|l| l.outputs()).collect(),
            latent_dim: self.latent_dim,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.encoder.has_finite_params() && self.decoder.has_finite_params()
    }

    pub fn encode(&self, g_norm: &[f64]) -> Result<Posterior> {
        let out = self.encoder.forward(as_row(g_norm))?;
        let (lo, hi) = self.logvar_clamp;
        Ok(Posterior {
            beta: out[0].iter().copied().collect(),
            theta: out[1].iter().map(|t| (0.5 * t.clamp(lo, hi)).exp()).collect(),
        })
    }

    pub fn decode(&self, z: &[f64]) -> Result<Likelihood> {
        let out = self.decoder.forward(as_row(z))?;
        let (lo, hi) = self.logvar_clamp;
        Ok(Likelihood {
            mu: out[0].iter().copied().collect(),
            sigma: out[1].iter().map(|s| (0.5 * s.clamp(lo, hi)).exp()).collect(),
        })
    }

    /// Likelihood parameters for each row of `z`, as `(mu, sigma)` matrices.
    pub fn decode_rows(&self, z: ArrayView2<'_, f64>) -> Result<(Array2<f64>, Array2<f64>)> {
        let mut out = self.decoder.forward(z)?;
        let (lo, hi) = self.logvar_clamp;
        let sigma = out.pop().expect("two heads").mapv(|s| (0.5 * s.clamp(lo, hi)).exp());
        Ok((out.pop().expect("two heads"), sigma))
    }

    /// ELBO terms of one observation for a fixed noise draw `eps`.
    pub fn evaluate(&self, g_norm: &[f64], eps: &[f64]) -> Result<ElboTerms> {
        if eps.len() != self.latent_dim {
            return Err(Error::DimensionMismatch { expected: self.latent_dim, actual: eps.len() });
        }
        let q = self.encode(g_norm)?;
        let z = reparameterize(&q.beta, &q.theta, eps);
        let p = self.decode(&z)?;
        elbo_terms(g_norm, &q.beta, &q.theta, &p.mu, &p.sigma)
    }

    /// Summed ELBO components over the batch rows, forward pass only.
    pub fn batch_loss_summed(&self, g: ArrayView2<'_, f64>, eps: ArrayView2<'_, f64>) -> Result<BatchLoss> {
        let clamp = self.logvar_clamp;
        let enc_out = self.encoder.forward(g)?;
        let beta = &enc_out[0];
        let t = enc_out[1].mapv(|x| x.clamp(clamp.0, clamp.1));
        if eps.dim() != t.dim() {
            return Err(Error::ShapeMismatch(format!("noise {:?} vs latent {:?}", eps.dim(), t.dim())));
        }
        let z = beta + &(&t.mapv(|v| (0.5 * v).exp()) * &eps);
        let dec_out = self.decoder.forward(z.view())?;
        let s = dec_out[1].mapv(|x| x.clamp(clamp.0, clamp.1));
        let resid = &g - &dec_out[0];
        let v = 0.5 * (LN_2PI * resid.len() as f64 + s.sum() + (&resid * &resid * &s.mapv(|v| (-v).exp())).sum());
        let kl = -0.5 * (t.len() as f64 + t.sum() - (beta * beta).sum() - t.mapv(f64::exp).sum());
        Ok(BatchLoss { loss: kl + v, kl, v })
    }

    /// Mean negative ELBO over the batch rows and its exact gradient
    /// for the given standard-normal draws.
    pub fn loss_and_grads(&self, g: ArrayView2<'_, f64>, eps: ArrayView2<'_, f64>) -> Result<(BatchLoss, VaeGrads)> {
        let (grads, sums) = self.grads_summed(g, eps)?;
        let b = g.nrows() as f64;
        let mut grads = grads;
        grads.encoder.scale(1.0 / b);
        grads.decoder.scale(1.0 / b);
        Ok((BatchLoss { loss: (sums.kl + sums.v) / b, kl: sums.kl / b, v: sums.v / b }, grads))
    }

    /// Like [`Self::loss_and_grads`] but sums over rows instead of averaging.
    pub fn grads_summed(&self, g: ArrayView2<'_, f64>, eps: ArrayView2<'_, f64>) -> Result<(VaeGrads, BatchLoss)> {
        let batch = g.nrows();
        if eps.nrows() != batch || eps.ncols() != self.latent_dim {
            return Err(Error::ShapeMismatch(format!(
                "noise {:?} for batch {batch} and latent {}",
                eps.dim(),
                self.latent_dim
            )));
        }
        let clamp = self.logvar_clamp;
        let (enc_out, enc_tape) = self.encoder.forward_traced(g)?;
        let beta = &enc_out[0];
        let (t, t_mask) = clamp_with_mask(&enc_out[1], clamp);
        let theta = t.mapv(|v| (0.5 * v).exp());
        let z = beta + &(&theta * &eps);

        let (dec_out, dec_tape) = self.decoder.forward_traced(z.view())?;
        let mu = &dec_out[0];
        let (s, s_mask) = clamp_with_mask(&dec_out[1], clamp);
        let inv_var = s.mapv(|v| (-v).exp());

        let resid = &g - mu;
        let scaled_sq = &resid * &resid * &inv_var;
        let v_sum = 0.5 * (LN_2PI * resid.len() as f64 + s.sum() + scaled_sq.sum());
        let t_exp = t.mapv(f64::exp);
        let kl_sum = -0.5 * (t.len() as f64 + t.sum() - (beta * beta).sum() - t_exp.sum());
        if !(v_sum.is_finite() && kl_sum.is_finite()) {
            return Err(Error::Numeric("non-finite ELBO".into()));
        }

        let d_mu = -(&resid * &inv_var);
        let mut d_s = scaled_sq.mapv(|q| 0.5 * (1.0 - q));
        d_s *= &s_mask;
        let (dec_grads, d_z) = self.decoder.backward(dec_tape, &[d_mu, d_s])?;

        let d_beta = &d_z + beta;
        let mut d_t = Array2::zeros(t.raw_dim());
        Zip::from(&mut d_t)
            .and(&d_z)
            .and(&eps)
            .and(&theta)
            .and(&t_exp)
            .and(&t_mask)
            .for_each(|dt, &dz, &e, &th, &te, &m| *dt = m * (0.5 * dz * e * th + 0.5 * (te - 1.0)));
        let (enc_grads, _) = self.encoder.backward(enc_tape, &[d_beta, d_t])?;

        Ok((
            VaeGrads { encoder: enc_grads, decoder: dec_grads },
            BatchLoss { loss: kl_sum + v_sum, kl: kl_sum, v: v_sum },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::DenseLayer;
    use ndarray::{array, Array1};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn normalization_cases() {
        let n = normalize_observation(&[3.0, 4.0, 0.0, 0.0]).unwrap();
        assert_eq!(n, vec![0.6, 0.8, 0.0, 0.0]);
        let unit = vec![0.0, 1.0, 0.0];
        assert_eq!(normalize_observation(&unit).unwrap(), unit);
        assert!(matches!(normalize_observation(&[0.0, 0.0]), Err(Error::Degenerate(_))));
        let m = normalize_with(Normalization::MaxAbs, &[2.0, -4.0]).unwrap();
        assert_eq!(m, vec![0.5, -1.0]);
    }

    #[test]
    fn kl_vanishes_at_the_prior() {
        let t = elbo_terms(&[0.1], &[0.0, 0.0], &[1.0, 1.0], &[0.1], &[1.0]).unwrap();
        assert_eq!(t.kl, 0.0);
    }

    #[test]
    fn perfect_mean_unit_sigma_gives_k_ln_2pi() {
        let g = [0.3, -0.2, 0.5, 0.1];
        let t = elbo_terms(&g, &[0.0], &[1.0], &g, &[1.0; 4]).unwrap();
        assert!((t.v - 2.0 * (2.0 * PI).ln()).abs() < 1e-12);
        assert!((t.elbo + t.v + t.kl).abs() < 1e-15);
    }

    #[test]
    fn elbo_rejects_nonpositive_std() {
        assert!(elbo_terms(&[0.0], &[0.0], &[0.0], &[0.0], &[1.0]).is_err());
        assert!(elbo_terms(&[0.0], &[0.0], &[1.0], &[0.0], &[-1.0]).is_err());
    }

    #[test]
    fn doubling_the_residual_adds_three_halves_weighted_square() {
        let g = [0.5, -0.1, 0.2];
        let mu = [0.4, 0.1, 0.1];
        let sigma = [0.3, 0.7, 1.2];
        let mu2: Vec<f64> = g.iter().zip(&mu).map(|(x, m)| x - 2.0 * (x - m)).collect();
        let diff = reconstruction_v(&g, &mu2, &sigma) - reconstruction_v(&g, &mu, &sigma);
        let expected: f64 = g.iter().zip(&mu).zip(&sigma).map(|((x, m), s)| 1.5 * (x - m).powi(2) / (s * s)).sum();
        assert!((diff - expected).abs() < 1e-12);
    }

    #[test]
    fn reparameterize_degenerate_cases() {
        assert_eq!(reparameterize(&[1.0, 2.0], &[0.5, 0.5], &[0.0, 0.0]), vec![1.0, 2.0]);
        assert_eq!(reparameterize(&[1.0, 2.0], &[0.0, 0.0], &[3.0, -3.0]), vec![1.0, 2.0]);
    }

    fn tiny_arch() -> VaeArchitecture {
        VaeArchitecture { input_dim: 8, hidden: vec![8, 4], latent_dim: 2 }
    }

    #[test]
    fn encode_and_decode_invariants() {
        let model = VaeModel::new(&tiny_arch(), &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let g = normalize_observation(&[1.0, 2.0, -1.0, 0.5, 0.0, 0.3, -0.7, 0.2]).unwrap();
        let q1 = model.encode(&g).unwrap();
        let q2 = model.encode(&g).unwrap();
        assert_eq!(q1, q2);
        assert!(q1.theta.iter().all(|&t| t > 0.0));
        let p = model.decode(&[3.0, -2.0]).unwrap();
        assert!(p.mu.iter().all(|m| m.abs() < 1.0));
        assert!(p.sigma.iter().all(|&s| s > 0.0));
        assert!(model.decode(&[1.0]).is_err());
        assert!(model.encode(&[1.0]).is_err());
    }

    fn constant_head_model(enc_logvar: f64, dec_logvar: f64) -> VaeModel {
        // Encoder 2 -> heads; decoder 1 -> heads 2, both without hidden layers.
        let beta = DenseLayer::new(array![[1.0, 0.0]], array![0.0], Activation::Linear).unwrap();
        let t = DenseLayer::new(array![[0.0, 0.0]], array![enc_logvar], Activation::Linear).unwrap();
        let encoder = MlpNetwork::from_layers(vec![], vec![beta, t]).unwrap();
        let mu = DenseLayer::new(array![[0.5], [-1.0]], array![0.0, 0.2], Activation::Tanh).unwrap();
        let s = DenseLayer::new(Array2::zeros((2, 1)), Array1::from_elem(2, dec_logvar), Activation::Linear).unwrap();
        let decoder = MlpNetwork::from_layers(vec![], vec![mu, s]).unwrap();
        VaeModel::from_networks(encoder, decoder).unwrap()
    }

    #[test]
    fn logvar_head_zero_gives_unit_theta() {
        let model = constant_head_model(0.0, 0.0);
        assert_eq!(model.encode(&[0.3, 0.4]).unwrap().theta, vec![1.0]);
    }

    #[test]
    fn clamped_logvar_bounds_theta() {
        let hi = constant_head_model(25.0, 0.0).encode(&[0.1, 0.2]).unwrap().theta[0];
        let lo = constant_head_model(-25.0, 0.0).encode(&[0.1, 0.2]).unwrap().theta[0];
        assert!((hi - 5f64.exp()).abs() < 1e-12);
        assert!((lo - (-5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn tiny_decoder_hand_computation() {
        let model = constant_head_model(0.0, 2.0);
        let p = model.decode(&[0.8]).unwrap();
        assert!((p.mu[0] - 0.4f64.tanh()).abs() < 1e-15);
        assert!((p.mu[1] - (-0.6f64).tanh()).abs() < 1e-15);
        assert!(p.sigma.iter().all(|s| (s - 1f64.exp()).abs() < 1e-15));
    }

    #[test]
    fn batch_loss_matches_per_example_evaluation() {
        let model = VaeModel::new(&tiny_arch(), &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rows: Vec<Vec<f64>> = (0..3)
            .map(|_| normalize_observation(&(0..8).map(|_| rng.random::<f64>() - 0.5).collect::<Vec<_>>()).unwrap())
            .collect();
        let eps = array![[0.3, -1.0], [0.0, 0.5], [1.2, 0.1]];
        let g = Array2::from_shape_vec((3, 8), rows.concat()).unwrap();
        let (loss, _) = model.loss_and_grads(g.view(), eps.view()).unwrap();
        let mean: f64 =
            rows.iter().enumerate().map(|(i, r)| -model.evaluate(r, &eps.row(i).to_vec()).unwrap().elbo).sum::<f64>()
                / 3.0;
        assert!((loss.loss - mean).abs() < 1e-10);
    }
}

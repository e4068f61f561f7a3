//! `MLPCKPT1` checkpoint container.
//!
//! ```text
//! magic        8 bytes "MLPCKPT1"
//! kind         u8      0 = mlp, 1 = vae, 2 = ae
//! networks     u32
//! per network:
//!   input_dim  u32
//!   trunk      u32     hidden layer count
//!   heads      u32
//!   layers     (u32 units, u8 activation) for trunk then heads
//!   params     f64 × param_count, layer order, row-major weights then biases
//!   optimizer  u8      1 if Adagrad state follows
//!     lr, eps  f64, f64
//!     accum    f64 × param_count
//! epochs       u64     epochs completed
//! seed         u64
//! trailer      UTF-8 TOML run metadata, to end of file
//! ```
//!
//! Integers and floats are little-endian.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::adagrad::{AdagradConfig, AdagradState};
use super::layer::Activation;
use super::network::{LayerSpec, MlpNetwork, NetworkGrads, NetworkSpec};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"MLPCKPT1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Mlp,
    Vae,
    Ae,
}

impl ModelKind {
    fn code(self) -> u8 {
        match self {
            ModelKind::Mlp => 0,
            ModelKind::Vae => 1,
            ModelKind::Ae => 2,
        }
    }

    fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(ModelKind::Mlp),
            1 => Ok(ModelKind::Vae),
            2 => Ok(ModelKind::Ae),
            other => Err(Error::Format(format!("unknown model kind {other}"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Mlp => "mlp",
            ModelKind::Vae => "vae",
            ModelKind::Ae => "ae",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mlp" => Ok(ModelKind::Mlp),
            "vae" => Ok(ModelKind::Vae),
            "ae" => Ok(ModelKind::Ae),
            other => Err(Error::InvalidConfig(format!("unknown model kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointEntry {
    pub network: MlpNetwork,
    pub optimizer: Option<AdagradState>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub kind: ModelKind,
    pub entries: Vec<CheckpointEntry>,
    pub epochs_completed: u64,
    pub seed: u64,
    pub metadata: String,
}

struct Writer<W: Write>(W);

impl<W: Write> Writer<W> {
    fn u8(&mut self, v: u8) -> Result<()> {
        Ok(self.0.write_all(&[v])?)
    }
    fn u32(&mut self, v: usize) -> Result<()> {
        let v = u32::try_from(v).map_err(|_| Error::Format(format!("{v} overflows u32")))?;
        Ok(self.0.write_all(&v.to_le_bytes())?)
    }
    fn u64(&mut self, v: u64) -> Result<()> {
        Ok(self.0.write_all(&v.to_le_bytes())?)
    }
    fn f64s(&mut self, vs: &[f64]) -> Result<()> {
        for v in vs {
            self.0.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
}

struct Reader<R: Read>(R);

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.0.read_exact(&mut b)?;
        Ok(b)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes::<1>()?[0])
    }
    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.bytes()?) as usize)
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }
}

impl Checkpoint {
    pub fn write_to(&self, out: impl Write) -> Result<()> {
        let mut w = Writer(out);
        w.0.write_all(CHECKPOINT_MAGIC)?;
        w.u8(self.kind.code())?;
        w.u32(self.entries.len())?;
        for entry in &self.entries {
            let spec = entry.network.spec();
            w.u32(spec.input_dim)?;
            w.u32(spec.hidden.len())?;
            w.u32(spec.heads.len())?;
            for layer in spec.hidden.iter().chain(&spec.heads) {
                w.u32(layer.units)?;
                w.u8(layer.activation.code())?;
            }
            w.f64s(&entry.network.flatten())?;
            match &entry.optimizer {
                Some(opt) => {
                    w.u8(1)?;
                    w.f64s(&[opt.config.learning_rate, opt.config.epsilon])?;
                    w.f64s(&opt.flatten())?;
                }
                None => w.u8(0)?,
            }
        }
        w.u64(self.epochs_completed)?;
        w.u64(self.seed)?;
        w.0.write_all(self.metadata.as_bytes())?;
        Ok(())
    }

    pub fn read_from(input: impl Read) -> Result<Self> {
        let mut r = Reader(input);
        if &r.bytes::<8>()? != CHECKPOINT_MAGIC {
            return Err(Error::Format("not an MLPCKPT1 checkpoint".into()));
        }
        let kind = ModelKind::from_code(r.u8()?)?;
        let count = r.u32()?;
        let mut entries = Vec::with_capacity(count);
        for _ in 0..count {
            let input_dim = r.u32()?;
            let n_hidden = r.u32()?;
            let n_heads = r.u32()?;
            let mut layers = Vec::with_capacity(n_hidden + n_heads);
            for _ in 0..n_hidden + n_heads {
                let units = r.u32()?;
                layers.push(LayerSpec::new(units, Activation::from_code(r.u8()?)?));
            }
            let heads = layers.split_off(n_hidden);
            let spec = NetworkSpec { input_dim, hidden: layers, heads };
            let mut network = MlpNetwork::zeroed(&spec)?;
            let n_params = network.param_count();
            network.load_flat(&r.f64s(n_params)?)?;
            let optimizer = match r.u8()? {
                0 => None,
                1 => {
                    let config = AdagradConfig { learning_rate: r.f64()?, epsilon: r.f64()? };
                    let flat = r.f64s(n_params)?;
                    let mut acc = NetworkGrads::zeros_like(&network);
                    let mut it = flat.into_iter();
                    for layer in &mut acc.layers {
                        for v in layer.weights.iter_mut().chain(layer.biases.iter_mut()) {
                            *v = it.next().expect("sized by param_count");
                        }
                    }
                    Some(AdagradState { config, accumulators: acc.layers })
                }
                other => return Err(Error::Format(format!("invalid optimizer flag {other}"))),
            };
            entries.push(CheckpointEntry { network, optimizer });
        }
        let epochs_completed = r.u64()?;
        let seed = r.u64()?;
        let mut metadata = String::new();
        r.0.read_to_string(&mut metadata)?;
        Ok(Self { kind, entries, epochs_completed, seed, metadata })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_to(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}

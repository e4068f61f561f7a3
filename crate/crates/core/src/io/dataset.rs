//! `ISACDS01` dataset container.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic      8 bytes   "ISACDS01"
//! width      u32       2K
//! count      u32       N
//! labelled   u32       1 if a label block follows the matrix
//! seed       u64
//! matrix     N * 2K f64, row-major (one observation per row)
//! labels     N bytes (0 = H0, 1 = H1), only when labelled = 1
//! trailer    UTF-8 TOML config snapshot, to end of file
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{beam_schedule, Dataset, JammerConfig, Label, Observation, SystemConfig};

pub const DATASET_MAGIC: &[u8; 8] = b"ISACDS01";

#[derive(Serialize, Deserialize)]
struct Trailer {
    system: SystemConfig,
    jammer: Option<JammerConfig>,
}

pub fn write_dataset(path: impl AsRef<Path>, ds: &Dataset) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let width = ds.observation_len();
    out.write_all(DATASET_MAGIC)?;
    out.write_all(&u32_field(width)?.to_le_bytes())?;
    out.write_all(&u32_field(ds.len())?.to_le_bytes())?;
    out.write_all(&1u32.to_le_bytes())?;
    out.write_all(&ds.seed.to_le_bytes())?;
    for obs in &ds.observations {
        if obs.g.len() != width {
            return Err(Error::DimensionMismatch { expected: width, actual: obs.g.len() });
        }
        for v in &obs.g {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    let labels: Vec<u8> = ds.observations.iter().map(|o| o.label.as_byte()).collect();
    out.write_all(&labels)?;
    let trailer = Trailer { system: ds.system.clone(), jammer: ds.jammer.clone() };
    let text = toml::to_string(&trailer).map_err(|e| Error::Format(e.to_string()))?;
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn u32_field(v: usize) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::Format(format!("{v} does not fit the u32 header field")))
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let mut input = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != DATASET_MAGIC {
        return Err(Error::Format("not an ISACDS01 dataset".into()));
    }
    let width = read_u32(&mut input)? as usize;
    let count = read_u32(&mut input)? as usize;
    let labelled = match read_u32(&mut input)? {
        0 => false,
        1 => true,
        other => return Err(Error::Format(format!("invalid label flag {other}"))),
    };
    let mut seed = [0u8; 8];
    input.read_exact(&mut seed)?;
    let seed = u64::from_le_bytes(seed);

    let mut raw = vec![0u8; width * count * 8];
    input.read_exact(&mut raw)?;
    let mut labels = vec![0u8; if labelled { count } else { 0 }];
    input.read_exact(&mut labels)?;
    let mut trailer = String::new();
    input.read_to_string(&mut trailer)?;
    let trailer: Trailer = toml::from_str(&trailer).map_err(|e| Error::Format(e.to_string()))?;
    if trailer.system.observation_len() != width {
        return Err(Error::Format(format!(
            "header width {width} disagrees with 2K = {}",
            trailer.system.observation_len()
        )));
    }

    let mut observations = Vec::with_capacity(count);
    for (row, chunk) in raw.chunks_exact(width * 8).enumerate() {
        let g = chunk.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk"))).collect();
        let label = if labelled { Label::from_byte(labels[row])? } else { Label::H0 };
        observations.push(Observation {
            index: row + 1,
            label,
            beam_angle_rad: beam_schedule(row + 1, &trailer.system),
            g,
            scenario: None,
        });
    }
    Ok(Dataset { observations, system: trailer.system, jammer: trailer.jammer, seed })
}

/// One observation per row, `g0..g{2K-1}` then `label`.
pub fn write_dataset_csv(path: impl AsRef<Path>, ds: &Dataset) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let width = ds.observation_len();
    let header: Vec<String> = (0..width).map(|i| format!("g{i}")).chain(["label".to_string()]).collect();
    writeln!(out, "{}", header.join(","))?;
    for obs in &ds.observations {
        for v in &obs.g {
            write!(out, "{v:e},")?;
        }
        writeln!(out, "{}", obs.label.as_byte())?;
    }
    out.flush()?;
    Ok(())
}

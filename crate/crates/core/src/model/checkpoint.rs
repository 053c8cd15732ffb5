//! Binary checkpoint format.
//!
//! Little-endian throughout:
//!
//! ```text
//! magic        8 bytes  "AAGCNCKP"
//! version      u32      1
//! num_layers, hidden_dim, num_classes, num_features, epochs   u64 each
//! seed         u64
//! learning_rate, beta1, beta2, epsilon                        f64 each
//! normalize    u8       0 | 1
//! reduction    u8       0 = mean, 1 = sum
//! epochs_trained, adam_step                                   u64 each
//! six matrix lists: source, target, source m, source v, target m, target v
//!   list   = count u64, then matrices
//!   matrix = rows u64, cols u64, rows*cols f64 in row-major order
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

use super::config::{AdamHyper, LossReduction, ModelConfig};
use super::params::{AdamState, ModelParams, Moments};

const MAGIC: &[u8; 8] = b"AAGCNCKP";
const VERSION: u32 = 1;

pub fn write_checkpoint<W: Write>(mut w: W, cfg: &ModelConfig, params: &ModelParams) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for v in [
        cfg.num_layers as u64,
        cfg.hidden_dim as u64,
        cfg.num_classes as u64,
        params.num_features() as u64,
        cfg.epochs as u64,
        cfg.seed,
    ] {
        w.write_all(&v.to_le_bytes())?;
    }
    for v in [cfg.learning_rate, cfg.adam.beta1, cfg.adam.beta2, cfg.adam.epsilon] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&[cfg.normalize_adjacency as u8])?;
    w.write_all(&[match cfg.loss_reduction {
        LossReduction::Mean => 0,
        LossReduction::Sum => 1,
    }])?;
    w.write_all(&params.epochs_trained.to_le_bytes())?;
    w.write_all(&params.adam.step.to_le_bytes())?;
    for list in [
        &params.source,
        &params.target,
        &params.adam.source.first,
        &params.adam.source.second,
        &params.adam.target.first,
        &params.adam.target.second,
    ] {
        w.write_all(&(list.len() as u64).to_le_bytes())?;
        for m in list {
            w.write_all(&(m.rows() as u64).to_le_bytes())?;
            w.write_all(&(m.cols() as u64).to_le_bytes())?;
            for v in m.as_slice() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

struct Reader<R> {
    inner: R,
    origin: std::path::PathBuf,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner
            .read_exact(&mut buf)
            .map_err(|e| Error::parse(&self.origin, 0, format!("truncated checkpoint: {e}")))?;
        Ok(buf)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::parse(&self.origin, 0, "size overflows usize"))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes::<1>()?[0])
    }

    fn matrices(&mut self) -> Result<Vec<DenseMatrix>> {
        let count = self.usize()?;
        let mut out = Vec::with_capacity(count.min(1024));
        for _ in 0..count {
            let rows = self.usize()?;
            let cols = self.usize()?;
            let len = rows
                .checked_mul(cols)
                .ok_or_else(|| Error::parse(&self.origin, 0, "matrix size overflow"))?;
            let mut data = Vec::with_capacity(len.min(1 << 24));
            for _ in 0..len {
                data.push(self.f64()?);
            }
            out.push(DenseMatrix::from_vec(rows, cols, data)?);
        }
        Ok(out)
    }
}

pub fn read_checkpoint<R: Read>(r: R, origin: &Path) -> Result<(ModelConfig, ModelParams)> {
    let mut rd = Reader {
        inner: r,
        origin: origin.to_path_buf(),
    };
    if &rd.bytes::<8>()? != MAGIC {
        return Err(Error::parse(origin, 0, "not a checkpoint file (bad magic)"));
    }
    let version = u32::from_le_bytes(rd.bytes()?);
    if version != VERSION {
        return Err(Error::parse(origin, 0, format!("unsupported checkpoint version {version}")));
    }
    let num_layers = rd.usize()?;
    let hidden_dim = rd.usize()?;
    let num_classes = rd.usize()?;
    let num_features = rd.usize()?;
    let epochs = rd.usize()?;
    let seed = rd.u64()?;
    let learning_rate = rd.f64()?;
    let adam = AdamHyper {
        beta1: rd.f64()?,
        beta2: rd.f64()?,
        epsilon: rd.f64()?,
    };
    let normalize_adjacency = rd.u8()? != 0;
    let loss_reduction = match rd.u8()? {
        0 => LossReduction::Mean,
        1 => LossReduction::Sum,
        other => return Err(Error::parse(origin, 0, format!("unknown loss reduction tag {other}"))),
    };
    let epochs_trained = rd.u64()?;
    let step = rd.u64()?;
    let source = rd.matrices()?;
    let target = rd.matrices()?;
    let source_m = rd.matrices()?;
    let source_v = rd.matrices()?;
    let target_m = rd.matrices()?;
    let target_v = rd.matrices()?;

    let cfg = ModelConfig {
        num_layers,
        hidden_dim,
        num_classes,
        learning_rate,
        epochs,
        seed,
        normalize_adjacency,
        loss_reduction,
        adam,
    };
    let expected = cfg.layer_shapes(num_features);
    for list in [&source, &target, &source_m, &source_v, &target_m, &target_v] {
        let shapes: Vec<_> = list.iter().map(DenseMatrix::shape).collect();
        if shapes != expected {
            return Err(Error::parse(origin, 0, "weight shapes disagree with the stored configuration"));
        }
    }
    let params = ModelParams {
        source,
        target,
        adam: AdamState {
            step,
            source: Moments {
                first: source_m,
                second: source_v,
            },
            target: Moments {
                first: target_m,
                second: target_v,
            },
        },
        epochs_trained,
    };
    Ok((cfg, params))
}

pub fn save_checkpoint(path: impl AsRef<Path>, cfg: &ModelConfig, params: &ModelParams) -> Result<()> {
    let f = File::create(path.as_ref())?;
    write_checkpoint(BufWriter::new(f), cfg, params)
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(ModelConfig, ModelParams)> {
    let path = path.as_ref();
    let f = File::open(path)?;
    read_checkpoint(BufReader::new(f), path)
}

//! Versioned binary model checkpoints.
//!
//! Layout: magic `LLAB`, format version, the model configuration, then
//! every parameter matrix row-major as 64-bit little-endian floats in
//! declaration order.

use std::io::{Read, Write};

use super::{Activation, LayerKind, LayerSpec, Model, ModelConfig, Readout};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"LLAB";
const CHECKPOINT_VERSION: u32 = 1;

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

fn write_u64<W: Write>(w: &mut W, v: u64) -> Result<()> {
    w.write_all(&v.to_le_bytes()).map_err(|e| bad(format!("write: {e}")))
}

fn write_f64<W: Write>(w: &mut W, v: f64) -> Result<()> {
    w.write_all(&v.to_le_bytes()).map_err(|e| bad(format!("write: {e}")))
}

fn write_u8<W: Write>(w: &mut W, v: u8) -> Result<()> {
    w.write_all(&[v]).map_err(|e| bad(format!("write: {e}")))
}

fn read_exact<R: Read, const N: usize>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(|e| bad(format!("truncated checkpoint: {e}")))?;
    Ok(buf)
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    Ok(u64::from_le_bytes(read_exact::<R, 8>(r)?))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_le_bytes(read_exact::<R, 8>(r)?))
}

fn read_u8<R: Read>(r: &mut R) -> Result<u8> {
    Ok(read_exact::<R, 1>(r)?[0])
}

pub fn save_model<W: Write>(model: &Model, w: &mut W) -> Result<()> {
    w.write_all(CHECKPOINT_MAGIC).map_err(|e| bad(format!("write: {e}")))?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())
        .map_err(|e| bad(format!("write: {e}")))?;

    let cfg = &model.cfg;
    write_u64(w, cfg.num_labels as u64)?;
    write_u64(w, cfg.embed_dim as u64)?;
    write_u64(w, cfg.feature_dim as u64)?;
    write_u64(w, cfg.head_hidden as u64)?;
    write_u64(w, cfg.layers.len() as u64)?;
    for spec in &cfg.layers {
        write_u8(w, match spec.kind {
            LayerKind::Gcn => 0,
            LayerKind::Gin => 1,
        })?;
        write_u64(w, spec.in_dim as u64)?;
        write_u64(w, spec.out_dim as u64)?;
        write_f64(w, spec.gin_eps)?;
        write_u8(w, match spec.activation {
            Activation::Relu => 0,
            Activation::Identity => 1,
        })?;
    }
    let (tag, k) = match cfg.readout {
        Readout::CenterHadamard => (0u8, 0u64),
        Readout::CenterConcat => (1, 0),
        Readout::Sum => (2, 0),
        Readout::SortPool { k } => (3, k as u64),
    };
    write_u8(w, tag)?;
    write_u64(w, k)?;

    for mat in model.param_mats() {
        write_u64(w, mat.rows() as u64)?;
        write_u64(w, mat.cols() as u64)?;
        for &v in mat.data() {
            write_f64(w, v)?;
        }
    }
    Ok(())
}

pub fn load_model<R: Read>(r: &mut R) -> Result<Model> {
    let magic = read_exact::<R, 4>(r)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(bad(format!("bad magic {magic:?}")));
    }
    let version = u32::from_le_bytes(read_exact::<R, 4>(r)?);
    if version != CHECKPOINT_VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }

    let num_labels = read_u64(r)? as usize;
    let embed_dim = read_u64(r)? as usize;
    let feature_dim = read_u64(r)? as usize;
    let head_hidden = read_u64(r)? as usize;
    let n_layers = read_u64(r)? as usize;
    let mut layers = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        let kind = match read_u8(r)? {
            0 => LayerKind::Gcn,
            1 => LayerKind::Gin,
            other => return Err(bad(format!("unknown layer kind {other}"))),
        };
        let in_dim = read_u64(r)? as usize;
        let out_dim = read_u64(r)? as usize;
        let gin_eps = read_f64(r)?;
        let activation = match read_u8(r)? {
            0 => Activation::Relu,
            1 => Activation::Identity,
            other => return Err(bad(format!("unknown activation {other}"))),
        };
        layers.push(LayerSpec { kind, in_dim, out_dim, gin_eps, activation });
    }
    let readout = match (read_u8(r)?, read_u64(r)? as usize) {
        (0, _) => Readout::CenterHadamard,
        (1, _) => Readout::CenterConcat,
        (2, _) => Readout::Sum,
        (3, k) => Readout::SortPool { k },
        (other, _) => return Err(bad(format!("unknown readout tag {other}"))),
    };
    let cfg = ModelConfig { num_labels, embed_dim, feature_dim, layers, readout, head_hidden };
    cfg.validate().map_err(|e| bad(format!("invalid config: {e}")))?;

    // Build a zero model with the right shapes, then overwrite parameters.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    use rand::SeedableRng;
    let mut model = Model::init(cfg, &mut rng)?;
    for mat in model.param_mats_mut() {
        let rows = read_u64(r)? as usize;
        let cols = read_u64(r)? as usize;
        if rows != mat.rows() || cols != mat.cols() {
            return Err(bad(format!(
                "parameter block {rows}x{cols} does not match expected {}x{}",
                mat.rows(),
                mat.cols()
            )));
        }
        for v in mat.data_mut() {
            *v = read_f64(r)?;
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn roundtrip_is_bitwise() {
        let cfg = ModelConfig {
            num_labels: 8,
            embed_dim: 4,
            feature_dim: 0,
            layers: vec![LayerSpec::gcn(4, 6), LayerSpec::gin(6, 5, 0.2)],
            readout: Readout::SortPool { k: 3 },
            head_hidden: 7,
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let model = Model::init(cfg, &mut rng).unwrap();
        let mut bytes = Vec::new();
        save_model(&model, &mut bytes).unwrap();
        assert_eq!(&bytes[..4], CHECKPOINT_MAGIC);
        let loaded = load_model(&mut bytes.as_slice()).unwrap();
        assert_eq!(model, loaded);
    }

    #[test]
    fn rejects_garbage() {
        assert!(load_model(&mut &b"NOPE"[..]).is_err());
        let mut bytes = Vec::new();
        let cfg = ModelConfig {
            num_labels: 2,
            embed_dim: 2,
            feature_dim: 0,
            layers: vec![LayerSpec::gcn(2, 2)],
            readout: Readout::CenterHadamard,
            head_hidden: 2,
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let model = Model::init(cfg, &mut rng).unwrap();
        save_model(&model, &mut bytes).unwrap();
        bytes.truncate(bytes.len() - 3);
        assert!(load_model(&mut bytes.as_slice()).is_err());
    }
}

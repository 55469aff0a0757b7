//! Model persistence.
//!
//! Little-endian binary layout:
//!   magic "VAENMF01"
//!   u32 latent_dim, u32 freq_bins, u32 encoder_layers, u32 decoder_layers
//!   f64 variance_floor
//!   per layer (encoder first): u32 in_dim, u32 out_dim, u32 activation id,
//!     f64 weights row-major (out x in), f64 bias (out)

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use super::{VaeError, VaeModel};
use crate::nn::{Activation, DenseLayer, Mlp};

const MAGIC: &[u8; 8] = b"VAENMF01";
const MAX_DIM: u32 = 1 << 24;

pub fn save_model(model: &VaeModel, path: &Path) -> Result<(), VaeError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(model.latent_dim() as u32).to_le_bytes())?;
    w.write_all(&(model.freq_bins() as u32).to_le_bytes())?;
    w.write_all(&(model.encoder().layers.len() as u32).to_le_bytes())?;
    w.write_all(&(model.decoder().layers.len() as u32).to_le_bytes())?;
    w.write_all(&model.variance_floor().to_le_bytes())?;
    for layer in model.encoder().layers.iter().chain(&model.decoder().layers) {
        w.write_all(&(layer.in_dim() as u32).to_le_bytes())?;
        w.write_all(&(layer.out_dim() as u32).to_le_bytes())?;
        w.write_all(&layer.activation.id().to_le_bytes())?;
        for &v in layer.weights.iter() {
            w.write_all(&v.to_le_bytes())?;
        }
        for &v in layer.bias.iter() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<VaeModel, VaeError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    read_exact(&mut r, &mut magic)?;
    if &magic != MAGIC {
        return Err(VaeError::ModelFormat(format!(
            "bad magic {:?}, expected {:?} (unsupported version?)",
            String::from_utf8_lossy(&magic),
            String::from_utf8_lossy(MAGIC)
        )));
    }
    let latent_dim = read_u32(&mut r)?;
    let freq_bins = read_u32(&mut r)?;
    let enc_layers = read_u32(&mut r)?;
    let dec_layers = read_u32(&mut r)?;
    for (name, v) in [
        ("latent_dim", latent_dim),
        ("freq_bins", freq_bins),
        ("encoder layer count", enc_layers),
        ("decoder layer count", dec_layers),
    ] {
        if v == 0 || v > MAX_DIM {
            return Err(VaeError::ModelFormat(format!("implausible {name} {v}")));
        }
    }
    let variance_floor = read_f64(&mut r)?;

    let mut read_layers = |count: u32| -> Result<Vec<DenseLayer>, VaeError> {
        let mut layers = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let in_dim = read_u32(&mut r)?;
            let out_dim = read_u32(&mut r)?;
            let act_id = read_u32(&mut r)?;
            if in_dim == 0 || in_dim > MAX_DIM || out_dim == 0 || out_dim > MAX_DIM {
                return Err(VaeError::ModelFormat(format!(
                    "implausible layer dims {in_dim}x{out_dim}"
                )));
            }
            let activation = Activation::from_id(act_id)
                .ok_or_else(|| VaeError::ModelFormat(format!("unknown activation id {act_id}")))?;
            let mut weights = Array2::zeros((out_dim as usize, in_dim as usize));
            for v in weights.iter_mut() {
                *v = read_f64(&mut r)?;
            }
            let mut bias = Array1::zeros(out_dim as usize);
            for v in bias.iter_mut() {
                *v = read_f64(&mut r)?;
            }
            layers.push(DenseLayer::new(weights, bias, activation));
        }
        Ok(layers)
    };

    let encoder = Mlp::new(read_layers(enc_layers)?)
        .map_err(|e| VaeError::ModelFormat(format!("encoder shape corruption: {e}")))?;
    let decoder = Mlp::new(read_layers(dec_layers)?)
        .map_err(|e| VaeError::ModelFormat(format!("decoder shape corruption: {e}")))?;

    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(VaeError::ModelFormat("trailing bytes after model".into()));
    }

    VaeModel::from_parts(
        encoder,
        decoder,
        latent_dim as usize,
        freq_bins as usize,
        variance_floor,
    )
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<(), VaeError> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            VaeError::ModelFormat("file truncated".into())
        } else {
            VaeError::Io(e)
        }
    })
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, VaeError> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64, VaeError> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(f64::from_le_bytes(b))
}

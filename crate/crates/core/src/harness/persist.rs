//! Little-endian binary model files.
//!
//! Layout: magic `LSVM`, format version (u32), support rows and columns
//! (u64 each), gamma, sigma2, the support matrix row-major, the dual
//! coefficients and the bias, all `f64`.

use std::fs;
use std::path::Path;

use ndarray::Array2;

use super::io::write_atomic;
use crate::error::{Error, Result};
use crate::lssvm::{Hyperparams, LssvmModel};

pub const MODEL_MAGIC: &[u8; 4] = b"LSVM";
pub const MODEL_FORMAT_VERSION: u32 = 1;

const HEADER_LEN: usize = 4 + 4 + 8 + 8;

pub fn encode_model(model: &LssvmModel) -> Vec<u8> {
    let x = model.support_inputs();
    let (rows, cols) = x.dim();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * (2 + rows * cols + rows + 1));
    out.extend_from_slice(MODEL_MAGIC);
    out.extend_from_slice(&MODEL_FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(rows as u64).to_le_bytes());
    out.extend_from_slice(&(cols as u64).to_le_bytes());
    let hp = model.hyperparams();
    let floats = [hp.gamma(), hp.sigma2()]
        .into_iter()
        .chain(x.iter().copied())
        .chain(model.dual_coeffs().iter().copied())
        .chain([model.bias()]);
    for v in floats {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_model(bytes: &[u8]) -> Result<LssvmModel> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::CorruptModel(format!(
            "file is {} bytes, shorter than the header",
            bytes.len()
        )));
    }
    if &bytes[..4] != MODEL_MAGIC {
        return Err(Error::CorruptModel("bad magic bytes".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != MODEL_FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            found: version,
            supported: MODEL_FORMAT_VERSION,
        });
    }
    let rows = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
    let cols = u64::from_le_bytes(bytes[16..24].try_into().expect("8 bytes"));
    let n_floats = rows
        .checked_mul(cols)
        .and_then(|rc| rc.checked_add(rows))
        .and_then(|v| v.checked_add(3))
        .and_then(|v| v.checked_mul(8))
        .ok_or_else(|| Error::CorruptModel("dimensions overflow".into()))?;
    let body = &bytes[HEADER_LEN..];
    if body.len() as u64 != n_floats {
        return Err(Error::CorruptModel(format!(
            "expected {n_floats} payload bytes for a {rows}x{cols} model, found {}",
            body.len()
        )));
    }
    let (rows, cols) = (rows as usize, cols as usize);
    let floats: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let hp = Hyperparams::new(floats[0], floats[1])
        .map_err(|e| Error::CorruptModel(format!("stored hyperparameters: {e}")))?;
    let matrix_end = 2 + rows * cols;
    let support = Array2::from_shape_vec((rows, cols), floats[2..matrix_end].to_vec())
        .map_err(|e| Error::CorruptModel(e.to_string()))?;
    let coeffs = floats[matrix_end..matrix_end + rows].to_vec();
    let bias = floats[matrix_end + rows];
    LssvmModel::from_parts(support, coeffs, bias, hp)
        .map_err(|e| Error::CorruptModel(e.to_string()))
}

pub fn save_model(model: &LssvmModel, path: &Path) -> Result<()> {
    write_atomic(path, &encode_model(model))
}

pub fn load_model(path: &Path) -> Result<LssvmModel> {
    decode_model(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lssvm::train;
    use ndarray::array;

    fn model() -> LssvmModel {
        let x = array![[0.1, 1.0], [0.4, -0.2], [0.9, 0.3]];
        train(
            x.view(),
            &[1.0, 2.0, 0.5],
            Hyperparams::new(10.0, 0.7).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn bytes_round_trip() {
        let m = model();
        assert_eq!(decode_model(&encode_model(&m)).unwrap(), m);
    }

    #[test]
    fn truncation_and_trailing_bytes_are_corruption() {
        let bytes = encode_model(&model());
        for cut in [0, 3, 10, HEADER_LEN, bytes.len() - 1] {
            assert!(
                matches!(decode_model(&bytes[..cut]), Err(Error::CorruptModel(_))),
                "cut {cut}"
            );
        }
        let mut long = bytes.clone();
        long.push(0);
        assert!(matches!(decode_model(&long), Err(Error::CorruptModel(_))));
        let mut magic = bytes;
        magic[0] = b'X';
        assert!(matches!(decode_model(&magic), Err(Error::CorruptModel(_))));
    }

    #[test]
    fn future_version_is_rejected() {
        let mut bytes = encode_model(&model());
        bytes[4..8].copy_from_slice(&2u32.to_le_bytes());
        assert!(matches!(
            decode_model(&bytes),
            Err(Error::UnsupportedVersion {
                found: 2,
                supported: 1
            })
        ));
    }

    #[test]
    fn huge_dimensions_do_not_allocate() {
        let mut bytes = encode_model(&model());
        bytes[8..16].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(matches!(decode_model(&bytes), Err(Error::CorruptModel(_))));
    }
}

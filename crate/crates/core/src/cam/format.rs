//! Activation interchange: magic `CAMT1`, little-endian `u32` H, W, K, then
//! `H*W*K` little-endian `f32` values in (row, column, channel) order.

use std::fs;
use std::path::Path;

use super::ActivationTensor;
use crate::error::{Error, Result};

pub const ACTIVATION_MAGIC: &[u8; 5] = b"CAMT1";
const HEADER_LEN: usize = 5 + 12;

pub fn encode_activations(t: &ActivationTensor) -> Vec<u8> {
    let (h, w, k) = t.dims();
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * h * w * k);
    out.extend_from_slice(ACTIVATION_MAGIC);
    for d in [h, w, k] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for v in t.values() {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    out
}

pub fn decode_activations(bytes: &[u8], origin: &Path) -> Result<ActivationTensor> {
    if bytes.len() < HEADER_LEN || &bytes[..5] != ACTIVATION_MAGIC {
        return Err(Error::format(origin, "missing CAMT1 header"));
    }
    let dim = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let (h, w, k) = (dim(5), dim(9), dim(13));
    let expected = HEADER_LEN + 4 * h * w * k;
    if bytes.len() != expected {
        return Err(Error::format(
            origin,
            format!("expected {expected} bytes for a {h}x{w}x{k} tensor, found {}", bytes.len()),
        ));
    }
    let values = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    ActivationTensor::new(h, w, k, values)
}

pub fn read_activations(path: impl AsRef<Path>) -> Result<ActivationTensor> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_activations(&bytes, path)
}

pub fn write_activations(path: impl AsRef<Path>, t: &ActivationTensor) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_activations(t)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_and_round_trip() {
        let t = ActivationTensor::new(1, 2, 3, vec![0.0, 1.0, 2.0, 3.0, 4.5, -1.0]).unwrap();
        let bytes = encode_activations(&t);
        assert_eq!(&bytes[..5], b"CAMT1");
        assert_eq!(&bytes[5..9], &1u32.to_le_bytes());
        assert_eq!(&bytes[13..17], &3u32.to_le_bytes());
        assert_eq!(&bytes[17 + 16..17 + 20], &4.5f32.to_le_bytes());
        assert_eq!(decode_activations(&bytes, Path::new("t")).unwrap(), t);
    }

    #[test]
    fn rejects_truncated_and_zero_dims() {
        let t = ActivationTensor::new(2, 2, 1, vec![0.0; 4]).unwrap();
        let bytes = encode_activations(&t);
        assert!(decode_activations(&bytes[..bytes.len() - 2], Path::new("t")).is_err());
        let mut zero = b"CAMT1".to_vec();
        zero.extend_from_slice(&[0; 12]);
        assert!(decode_activations(&zero, Path::new("t")).is_err());
    }
}

//! Binary matrix interchange.
//!
//! Layout: the five magic bytes `FUSE1`, a little-endian `u32` row count, a
//! little-endian `u32` column count, then `rows * cols` little-endian `f32`
//! values in row-major order. Nothing follows the payload.

use std::fs;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

pub const MATRIX_MAGIC: &[u8; 5] = b"FUSE1";
const HEADER_LEN: usize = 5 + 4 + 4;

/// Serializes a matrix, narrowing every entry to `f32`.
pub fn encode_matrix(matrix: &Array2<f64>) -> Vec<u8> {
    let (rows, cols) = matrix.dim();
    let mut out = Vec::with_capacity(HEADER_LEN + rows * cols * 4);
    out.extend_from_slice(MATRIX_MAGIC);
    out.extend_from_slice(&(rows as u32).to_le_bytes());
    out.extend_from_slice(&(cols as u32).to_le_bytes());
    for v in matrix.iter() {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    out
}

/// Parses a matrix; `origin` is only used for error messages.
pub fn decode_matrix(bytes: &[u8], origin: &Path) -> Result<Array2<f64>> {
    if bytes.len() < HEADER_LEN || &bytes[..5] != MATRIX_MAGIC {
        return Err(Error::format(origin, "missing FUSE1 header"));
    }
    let rows = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[9..13].try_into().unwrap()) as usize;
    let expected = HEADER_LEN + rows * cols * 4;
    if bytes.len() != expected {
        return Err(Error::format(
            origin,
            format!(
                "expected {expected} bytes for a {rows}x{cols} matrix, found {}",
                bytes.len()
            ),
        ));
    }
    let values = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    Ok(Array2::from_shape_vec((rows, cols), values).expect("shape checked above"))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<Array2<f64>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_matrix(&bytes, path)
}

pub fn write_matrix(path: impl AsRef<Path>, matrix: &Array2<f64>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_matrix(matrix)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn header_layout() {
        let m = array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]];
        let bytes = encode_matrix(&m);
        assert_eq!(&bytes[..5], b"FUSE1");
        assert_eq!(&bytes[5..9], &2u32.to_le_bytes());
        assert_eq!(&bytes[9..13], &3u32.to_le_bytes());
        assert_eq!(&bytes[13..17], &1.0f32.to_le_bytes());
        assert_eq!(bytes.len(), 13 + 24);
        assert_eq!(decode_matrix(&bytes, Path::new("m")).unwrap(), m);
    }

    #[test]
    fn truncated_payload_reports_expected_size() {
        let m = array![[1.0, 2.0], [3.0, 4.0]];
        let bytes = encode_matrix(&m);
        let err = decode_matrix(&bytes[..bytes.len() - 1], Path::new("v.fuse")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("v.fuse") && msg.contains("expected 29 bytes"), "{msg}");
    }

    #[test]
    fn bad_magic() {
        assert!(decode_matrix(b"FUSE2\0\0\0\0\0\0\0\0", Path::new("x")).is_err());
    }
}

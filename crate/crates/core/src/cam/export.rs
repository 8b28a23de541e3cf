//! PGM (P5) and PPM (P6) writers.
//!
//! Grey levels are `floor(255 * v + 0.5)`. The colour ramp runs
//! blue -> cyan -> green -> yellow -> red in four equal linear segments.

use std::fs;
use std::path::{Path, PathBuf};

use super::CamHeatmap;
use crate::error::{Error, Result};

pub fn quantize(v: f64) -> u8 {
    (255.0 * v.clamp(0.0, 1.0) + 0.5).floor() as u8
}

pub fn color_ramp(v: f64) -> [u8; 3] {
    let v = v.clamp(0.0, 1.0);
    let (r, g, b) = if v < 0.25 {
        (0.0, 4.0 * v, 1.0)
    } else if v < 0.5 {
        (0.0, 1.0, 1.0 - 4.0 * (v - 0.25))
    } else if v < 0.75 {
        (4.0 * (v - 0.5), 1.0, 0.0)
    } else {
        (1.0, 1.0 - 4.0 * (v - 0.75), 0.0)
    };
    [quantize(r), quantize(g), quantize(b)]
}

pub fn pgm_bytes(heatmap: &CamHeatmap) -> Vec<u8> {
    let (h, w) = heatmap.dims();
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.extend(heatmap.values.iter().map(|&v| quantize(v)));
    out
}

pub fn ppm_bytes(heatmap: &CamHeatmap) -> Vec<u8> {
    let (h, w) = heatmap.dims();
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    out.extend(heatmap.values.iter().flat_map(|&v| color_ramp(v)));
    out
}

/// Writes `path` as PGM and, with `color`, a PPM next to it with the
/// `.ppm` extension. Returns the files written.
pub fn export_heatmap(heatmap: &CamHeatmap, path: impl AsRef<Path>, color: bool) -> Result<Vec<PathBuf>> {
    let path = path.as_ref();
    fs::write(path, pgm_bytes(heatmap)).map_err(|e| Error::io(path, e))?;
    let mut written = vec![path.to_path_buf()];
    if color {
        let ppm = path.with_extension("ppm");
        fs::write(&ppm, ppm_bytes(heatmap)).map_err(|e| Error::io(&ppm, e))?;
        written.push(ppm);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn pgm_quantization() {
        let h = CamHeatmap::from_values(array![[0.0, 1.0], [0.5, 0.25]]).unwrap();
        let bytes = pgm_bytes(&h);
        let header = b"P5\n2 2\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(&bytes[header.len()..], &[0, 255, 128, 64]);
    }

    #[test]
    fn zero_map_has_zero_payload() {
        let h = CamHeatmap::from_values(Array2::zeros((3, 5))).unwrap();
        let bytes = pgm_bytes(&h);
        assert!(bytes[bytes.len() - 15..].iter().all(|&b| b == 0));
        assert_eq!(bytes.len(), b"P5\n5 3\n255\n".len() + 15);
    }

    #[test]
    fn ramp_endpoints() {
        assert_eq!(color_ramp(0.0), [0, 0, 255]);
        assert_eq!(color_ramp(0.5), [0, 255, 0]);
        assert_eq!(color_ramp(1.0), [255, 0, 0]);
    }

    #[test]
    fn export_is_deterministic() {
        let h = CamHeatmap::from_values(array![[0.1, 0.9], [0.33, 0.66]]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.pgm");
        let b = dir.path().join("b.pgm");
        let written = export_heatmap(&h, &a, true).unwrap();
        assert_eq!(written.len(), 2);
        export_heatmap(&h, &b, true).unwrap();
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
        assert_eq!(fs::read(a.with_extension("ppm")).unwrap(), fs::read(b.with_extension("ppm")).unwrap());
    }
}

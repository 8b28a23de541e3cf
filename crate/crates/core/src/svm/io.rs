//! Model files: UTF-8 header lines terminated by a line `end`, followed by a
//! little-endian `f32` payload.
//!
//! SVM layout:
//!
//! ```text
//! FUSE-SVM 1
//! classes <C>
//! dim <d>
//! class <id> <name>                      (C lines)
//! pair <pos> <neg> <kind> <gamma> <degree> <coef0> <C> <bias> <n_sv>
//! end
//! ```
//!
//! The payload holds, for each pair in header order, its support vectors
//! (row-major) followed by their dual coefficients. Header reals use the
//! shortest representation that parses back to the same `f64`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ndarray::Array2;

use super::kernel::{KernelKind, KernelSpec};
use super::multiclass::{MulticlassSvmModel, PairModel};
use super::smo::{BinarySvmModel, SmoStatus};
use crate::error::{Error, Result};

pub(crate) struct Header<'a> {
    path: PathBuf,
    lines: Vec<&'a str>,
    payload: &'a [u8],
}

pub(crate) fn parse_header<'a>(bytes: &'a [u8], path: &Path, magic: &str) -> Result<Header<'a>> {
    let mut lines = Vec::new();
    let mut pos = 0;
    loop {
        let Some(len) = bytes[pos..].iter().position(|&b| b == b'\n') else {
            return Err(Error::format(path, "header is not terminated by 'end'"));
        };
        let line = std::str::from_utf8(&bytes[pos..pos + len]).map_err(|_| Error::format(path, "header is not UTF-8"))?;
        pos += len + 1;
        if line == "end" {
            break;
        }
        lines.push(line);
    }
    if lines.first() != Some(&magic) {
        return Err(Error::format(path, format!("expected '{magic}' header")));
    }
    lines.remove(0);
    Ok(Header {
        path: path.to_path_buf(),
        lines,
        payload: &bytes[pos..],
    })
}

impl Header<'_> {
    fn line(&self, idx: usize) -> Result<&str> {
        self.lines
            .get(idx)
            .copied()
            .ok_or_else(|| Error::format(&self.path, format!("header too short at line {}", idx + 2)))
    }

    pub fn field<T: FromStr>(&self, idx: usize, key: &str) -> Result<T> {
        let line = self.line(idx)?;
        line.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(' '))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::format(&self.path, format!("expected '{key} <value>', found '{line}'")))
    }

    pub fn class_names(&self, start: usize, n: usize) -> Result<Vec<String>> {
        (0..n)
            .map(|i| {
                let line = self.line(start + i)?;
                let prefix = format!("class {i} ");
                line.strip_prefix(&prefix)
                    .map(str::to_string)
                    .ok_or_else(|| Error::format(&self.path, format!("expected class line {i}, found '{line}'")))
            })
            .collect()
    }

    pub fn f32_payload(&self, count: usize) -> Result<Vec<f64>> {
        if self.payload.len() != count * 4 {
            return Err(Error::format(
                &self.path,
                format!("expected {} payload bytes, found {}", count * 4, self.payload.len()),
            ));
        }
        Ok(self
            .payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect())
    }
}

impl MulticlassSvmModel {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = Vec::new();
        writeln!(out, "FUSE-SVM 1").unwrap();
        writeln!(out, "classes {}", self.n_classes()).unwrap();
        writeln!(out, "dim {}", self.dim()).unwrap();
        for (i, n) in self.class_names.iter().enumerate() {
            writeln!(out, "class {i} {n}").unwrap();
        }
        for p in &self.pairs {
            let m = &p.model;
            writeln!(
                out,
                "pair {} {} {} {} {} {} {} {} {}",
                p.positive,
                p.negative,
                m.kernel.kind.as_str(),
                m.kernel.gamma,
                m.kernel.degree,
                m.kernel.coef0,
                m.c,
                m.bias,
                m.dual_coef.len()
            )
            .unwrap();
        }
        writeln!(out, "end").unwrap();
        for p in &self.pairs {
            for v in p.model.support_vectors.iter().chain(&p.model.dual_coef) {
                out.extend_from_slice(&(*v as f32).to_le_bytes());
            }
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// Solver status is not stored; loaded pairs report `converged = true`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let header = parse_header(&bytes, path, "FUSE-SVM 1")?;
        let c: usize = header.field(0, "classes")?;
        let d: usize = header.field(1, "dim")?;
        let class_names = header.class_names(2, c)?;
        let bad = |line: &str| Error::format(path, format!("malformed pair line '{line}'"));

        let mut specs = Vec::new();
        for idx in 2 + c..header.lines.len() {
            let line = header.line(idx)?;
            let f: Vec<&str> = line.split(' ').collect();
            if f.len() != 10 || f[0] != "pair" {
                return Err(bad(line));
            }
            let num = |i: usize| f[i].parse::<f64>().map_err(|_| bad(line));
            let int = |i: usize| f[i].parse::<usize>().map_err(|_| bad(line));
            let kind = match f[3] {
                "rbf" => KernelKind::Rbf,
                "poly" => KernelKind::Polynomial,
                _ => return Err(bad(line)),
            };
            let kernel = KernelSpec { kind, gamma: num(4)?, degree: int(5)? as u32, coef0: num(6)? };
            specs.push((int(1)?, int(2)?, kernel, num(7)?, num(8)?, int(9)?));
        }
        let total: usize = specs.iter().map(|s| s.5 * (d + 1)).sum();
        let values = header.f32_payload(total)?;
        let mut offset = 0;
        let pairs = specs
            .into_iter()
            .map(|(positive, negative, kernel, c, bias, m)| {
                let sv = Array2::from_shape_vec((m, d), values[offset..offset + m * d].to_vec()).unwrap();
                offset += m * d;
                let dual_coef = values[offset..offset + m].to_vec();
                offset += m;
                PairModel {
                    positive,
                    negative,
                    model: BinarySvmModel {
                        support_vectors: sv,
                        dual_coef,
                        bias,
                        kernel,
                        c,
                        status: SmoStatus {
                            converged: true,
                            iterations: 0,
                            passes: 0,
                            dual_objective: f64::NAN,
                            max_kkt_violation: f64::NAN,
                        },
                    },
                }
            })
            .collect();
        Ok(MulticlassSvmModel { class_names, pairs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svm::{multiclass_train, SmoConfig};

    #[test]
    fn svm_round_trip_predicts_identically() {
        let x = Array2::from_shape_fn((24, 3), |(i, j)| ((i * 5 + j * 7) % 13) as f64 / 4.0 + (i % 3) as f64 * 2.0);
        let labels: Vec<usize> = (0..24).map(|i| i % 3).collect();
        let mut m = multiclass_train(&x, &labels, 3, &KernelSpec::polynomial(0.3, 3, 1.0), &SmoConfig::default()).unwrap();
        m.class_names = vec!["COVID-19".into(), "No Findings".into(), "Pneumonia".into()];
        // Quantize the payload so the comparison is exact.
        for p in &mut m.pairs {
            p.model.support_vectors.mapv_inplace(|v| v as f32 as f64);
            p.model.dual_coef.iter_mut().for_each(|v| *v = *v as f32 as f64);
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.svm");
        m.save(&path).unwrap();
        let back = MulticlassSvmModel::load(&path).unwrap();
        assert_eq!(back.class_names, m.class_names);
        for (a, b) in back.pairs.iter().zip(&m.pairs) {
            assert_eq!(a.model.support_vectors, b.model.support_vectors);
            assert_eq!(a.model.dual_coef, b.model.dual_coef);
            assert_eq!(a.model.bias, b.model.bias);
            assert_eq!(a.model.kernel, b.model.kernel);
        }
        assert_eq!(back.predict(&x).unwrap(), m.predict(&x).unwrap());
    }

    #[test]
    fn truncated_payload() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.svm");
        fs::write(&path, b"FUSE-SVM 1\nclasses 2\ndim 1\nclass 0 a\nclass 1 b\npair 0 1 rbf 1 0 0 1 0 2\nend\n\0\0").unwrap();
        assert!(MulticlassSvmModel::load(&path).unwrap_err().to_string().contains("payload"));
    }
}

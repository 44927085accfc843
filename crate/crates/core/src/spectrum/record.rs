use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EigenSpectrum;
use crate::error::{Error, Result};

/// Serialisable eigenvalue list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub omega: f64,
    pub t_obs: f64,
    pub quad_order: usize,
    pub lambdas: Vec<f64>,
    pub trace_error: f64,
}

impl SpectrumRecord {
    /// Accepts a bare record, a document with a `spectrum` field, or the
    /// `spectrum` command's JSON output.
    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_string(),
            message: e.to_string(),
        })?;
        let inner = value
            .pointer("/result/spectrum")
            .or_else(|| value.get("spectrum"))
            .cloned()
            .unwrap_or(value);
        let rec: SpectrumRecord = serde_json::from_value(inner).map_err(|e| Error::Parse {
            path: origin.to_string(),
            message: e.to_string(),
        })?;
        if rec.lambdas.is_empty() {
            return Err(Error::Parse {
                path: origin.to_string(),
                message: "empty eigenvalue list".into(),
            });
        }
        Ok(rec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn n0(&self) -> f64 {
        self.omega * self.t_obs / std::f64::consts::PI
    }

    pub fn resolution(&self) -> f64 {
        super::resolution(self.quad_order)
    }
}

impl EigenSpectrum {
    /// Dump sampled eigenfunctions as little-endian `u64 rows, u64 cols`
    /// followed by column-major `f64` values.
    pub fn write_eigvecs(&self, path: impl AsRef<Path>, count: usize) -> Result<()> {
        let path = path.as_ref();
        let cols = count.min(self.quad_order);
        let rows = self.quad_order;
        let mut buf = Vec::with_capacity(16 + 8 * rows * cols);
        buf.extend_from_slice(&(rows as u64).to_le_bytes());
        buf.extend_from_slice(&(cols as u64).to_le_bytes());
        for c in 0..cols {
            for r in 0..rows {
                buf.extend_from_slice(&self.eigvecs[(r, c)].to_le_bytes());
            }
        }
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&buf).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_wrapped_and_bare() {
        let bare =
            r#"{"omega":1.0,"t_obs":2.0,"quad_order":8,"lambdas":[0.5,0.1],"trace_error":0.0}"#;
        let wrapped = format!(r#"{{"manifest":{{}},"spectrum":{bare}}}"#);
        let a = SpectrumRecord::from_json(bare, "a").unwrap();
        let b = SpectrumRecord::from_json(&wrapped, "b").unwrap();
        assert_eq!(a, b);
        assert!(SpectrumRecord::from_json("{", "c").is_err());
    }
}

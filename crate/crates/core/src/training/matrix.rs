use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::Rgb;

/// 3×3 colour conversion applied as a row vector times the matrix:
/// `out[k] = Σ_j in[j] · rows[j][k]`. Rows index the input channels
/// (R, G, B), columns the output channels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConversionMatrix {
    rows: [[f64; 3]; 3],
}

impl ConversionMatrix {
    /// Flame-highlighting matrix used by the first detection stage.
    pub const FLAME_HIGHLIGHT: ConversionMatrix = ConversionMatrix {
        rows: [
            [3.2753, 1.9701, 1.8017],
            [-0.0269, -0.0774, 0.2938],
            [-3.0439, -1.9676, -2.3011],
        ],
    };

    /// Colour-differentiating matrix trained against a fire-coloured
    /// background; drives the linear detector and the second stage.
    pub const COLOUR_DIFFERENTIATING: ConversionMatrix = ConversionMatrix {
        rows: [
            [1.7673, 2.9860, -0.9186],
            [0.1479, -0.9451, -1.2610],
            [-3.2330, -2.8938, -1.3918],
        ],
    };

    pub const IDENTITY: ConversionMatrix = ConversionMatrix {
        rows: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    pub const ZERO: ConversionMatrix = ConversionMatrix { rows: [[0.0; 3]; 3] };

    pub fn new(rows: [[f64; 3]; 3]) -> Result<Self> {
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("conversion matrix entries must be finite".into()));
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[[f64; 3]; 3] {
        &self.rows
    }

    /// Row-major entries.
    pub fn to_flat(&self) -> [f64; 9] {
        let r = &self.rows;
        [
            r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2],
        ]
    }

    pub(crate) fn from_flat(v: [f64; 9]) -> Self {
        Self {
            rows: [[v[0], v[1], v[2]], [v[3], v[4], v[5]], [v[6], v[7], v[8]]],
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            rows: self.rows.map(|r| r.map(|v| v * s)),
        }
    }

    #[inline]
    pub fn apply(&self, x: &Rgb) -> [f64; 3] {
        let r = &self.rows;
        [
            x[0] * r[0][0] + x[1] * r[1][0] + x[2] * r[2][0],
            x[0] * r[0][1] + x[1] * r[1][1] + x[2] * r[2][1],
            x[0] * r[0][2] + x[1] * r[1][2] + x[2] * r[2][2],
        ]
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("matrix serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            rows: Vec<Vec<f64>>,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if raw.rows.len() != 3 || raw.rows.iter().any(|r| r.len() != 3) {
            return Err(Error::Parse(format!(
                "expected a 3x3 matrix, got {} rows",
                raw.rows.len()
            )));
        }
        let mut rows = [[0.0; 3]; 3];
        for (dst, src) in rows.iter_mut().zip(&raw.rows) {
            dst.copy_from_slice(src);
        }
        Self::new(rows).map_err(|e| Error::Parse(e.to_string()))
    }
}

impl<'de> Deserialize<'de> for ConversionMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            rows: [[f64; 3]; 3],
        }
        let raw = Raw::deserialize(deserializer)?;
        ConversionMatrix::new(raw.rows).map_err(serde::de::Error::custom)
    }
}

/// Multiplies every pixel by `w`.
pub fn convert_pixels(pixels: &[Rgb], w: &ConversionMatrix) -> Vec<[f64; 3]> {
    pixels.iter().map(|p| w.apply(p)).collect()
}

pub fn save_matrix(w: &ConversionMatrix, path: &Path) -> Result<()> {
    std::fs::write(path, w.to_json())?;
    Ok(())
}

pub fn load_matrix(path: &Path) -> Result<ConversionMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    ConversionMatrix::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_vectors_select_rows() {
        let w = ConversionMatrix::COLOUR_DIFFERENTIATING;
        assert_eq!(w.apply(&[1.0, 0.0, 0.0]), [1.7673, 2.9860, -0.9186]);
        assert_eq!(w.apply(&[0.0, 1.0, 0.0]), [0.1479, -0.9451, -1.2610]);
        assert_eq!(w.apply(&[0.0, 0.0, 0.0]), [0.0, 0.0, 0.0]);
        let w8 = ConversionMatrix::FLAME_HIGHLIGHT;
        assert_eq!(w8.apply(&[1.0, 0.0, 0.0]), [3.2753, 1.9701, 1.8017]);
    }

    #[test]
    fn ones_give_column_sums() {
        let out = convert_pixels(&[[1.0; 3]], &ConversionMatrix::COLOUR_DIFFERENTIATING)[0];
        // 1.7673 + 0.1479 − 3.2330, 2.9860 − 0.9451 − 2.8938, −0.9186 − 1.2610 − 1.3918
        let expected = [-1.3178, -0.8529, -3.5714];
        for (o, e) in out.iter().zip(expected) {
            assert!((o - e).abs() < 1e-12, "{o} vs {e}");
        }
    }

    #[test]
    fn json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        let w = ConversionMatrix::COLOUR_DIFFERENTIATING;
        save_matrix(&w, &path).unwrap();
        assert_eq!(load_matrix(&path).unwrap(), w);

        let odd = ConversionMatrix::new([[0.1 + 0.2, 1e-300, -7.0 / 3.0], [0.0; 3], [1.0; 3]]).unwrap();
        assert_eq!(ConversionMatrix::from_json(&odd.to_json()).unwrap(), odd);
    }

    #[test]
    fn json_schema() {
        let text = ConversionMatrix::IDENTITY.to_json();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn load_errors() {
        assert!(matches!(ConversionMatrix::from_json("{rows"), Err(Error::Parse(_))));
        assert!(matches!(
            ConversionMatrix::from_json(r#"{"rows": [[1, 0], [0, 1]]}"#),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            ConversionMatrix::from_json(r#"{"rows": [[1, 0, 0], [0, 1, 0], [0, 0]]}"#),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            load_matrix(Path::new("/nonexistent/matrix.json")),
            Err(Error::MissingFile(_))
        ));
    }
}

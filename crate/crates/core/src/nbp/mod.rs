//! Trainable message weights: dense and translation-tied (convolutional)
//! weight sets, their file format, training and cross-distance transfer.

mod grad;
mod train;

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use grad::{backward, loss, unroll, LossHead, Unrolled};
pub use train::{loss_and_gradient, normalizer_rows, train, LossKind, LossReport, TrainConfig};

use crate::bp::EdgeWeights;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::toric::{build_edge_classes, MatrixKind, ToricCode, CLASS_CONVENTION, NUM_EDGE_CLASSES};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    /// One value per Tanner edge.
    Dense,
    /// One value per translation class of edges.
    Conv,
}

impl std::fmt::Display for WeightKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            WeightKind::Dense => "dense",
            WeightKind::Conv => "conv",
        })
    }
}

/// Short digest of the edge-class convention string.
pub fn class_convention_hash() -> String {
    hex::encode(&Sha256::digest(CLASS_CONVENTION.as_bytes())[..8])
}

/// Class id of every Tanner edge of `matrix`, row-major.
pub fn edge_class_ids(code: &ToricCode, matrix: MatrixKind) -> Result<Vec<usize>> {
    let map = build_edge_classes(code)?;
    Ok(match matrix {
        MatrixKind::Overcomplete => map.flat(),
        MatrixKind::Standard => map.truncated(code.standard().num_rows()).flat(),
    })
}

/// Weight values plus the metadata needed to bind them to a code.
///
/// Values are laid out `[t * width + k]` with `k` an edge (dense) or class
/// (conv) id; an iteration-shared set stores a single row.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSet<T> {
    pub kind: WeightKind,
    pub iterations: usize,
    pub shared: bool,
    pub distance: usize,
    pub matrix: MatrixKind,
    pub epsilon_train: Vec<f64>,
    width: usize,
    values: Vec<T>,
}

impl<T: Real> WeightSet<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        kind: WeightKind,
        iterations: usize,
        shared: bool,
        distance: usize,
        matrix: MatrixKind,
        epsilon_train: Vec<f64>,
        values: Vec<T>,
    ) -> Result<Self> {
        if iterations == 0 {
            return Err(Error::Weights("zero iterations".into()));
        }
        let rows = if shared { 1 } else { iterations };
        if values.is_empty() || values.len() % rows != 0 {
            return Err(Error::Weights(format!(
                "{} values do not split into {rows} rows",
                values.len()
            )));
        }
        let width = values.len() / rows;
        if kind == WeightKind::Conv && width != NUM_EDGE_CLASSES {
            return Err(Error::Dimension {
                what: "conv weights per iteration",
                expected: NUM_EDGE_CLASSES,
                got: width,
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Weights("non-finite weight".into()));
        }
        Ok(WeightSet {
            kind,
            iterations,
            shared,
            distance,
            matrix,
            epsilon_train,
            width,
            values,
        })
    }

    /// All-ones set; decoding with it reproduces plain BP exactly.
    pub fn init_unit(
        kind: WeightKind,
        iterations: usize,
        shared: bool,
        code: &ToricCode,
        matrix: MatrixKind,
    ) -> Result<Self> {
        let width = match kind {
            WeightKind::Conv => NUM_EDGE_CLASSES,
            WeightKind::Dense => code.matrix(matrix).num_edges(),
        };
        let rows = if shared { 1 } else { iterations };
        WeightSet::new(
            kind,
            iterations,
            shared,
            code.distance(),
            matrix,
            Vec::new(),
            vec![T::one(); rows * width],
        )
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    /// Values per iteration row.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn is_unit(&self) -> bool {
        self.values.iter().all(|&v| v == T::one())
    }

    fn check_dense_binding(&self, code: &ToricCode) -> Result<()> {
        if self.distance != code.distance() {
            return Err(Error::Weights(format!(
                "dense weights for d={} cannot bind to d={}; only conv weights transfer",
                self.distance,
                code.distance()
            )));
        }
        let ne = code.matrix(self.matrix).num_edges();
        if self.width != ne {
            return Err(Error::Dimension {
                what: "dense weights per iteration",
                expected: ne,
                got: self.width,
            });
        }
        Ok(())
    }

    /// Per-edge weights for this set's matrix on `code`.
    pub fn bind(&self, code: &ToricCode) -> Result<EdgeWeights<T>> {
        let ne = code.matrix(self.matrix).num_edges();
        let values = match self.kind {
            WeightKind::Dense => {
                self.check_dense_binding(code)?;
                self.values.clone()
            }
            WeightKind::Conv => {
                let classes = edge_class_ids(code, self.matrix)?;
                self.values
                    .chunks(self.width)
                    .flat_map(|row| classes.iter().map(move |&c| row[c]))
                    .collect()
            }
        };
        if self.shared {
            EdgeWeights::shared(ne, values)
        } else {
            EdgeWeights::per_iteration(ne, self.iterations, values)
        }
    }

    /// Expands a conv set into the dense set it induces on `target`.
    pub fn transfer(&self, target: &ToricCode) -> Result<WeightSet<T>> {
        if self.kind != WeightKind::Conv {
            return Err(Error::Weights("only conv weights can be transferred".into()));
        }
        let bound = self.bind(target)?;
        WeightSet::new(
            WeightKind::Dense,
            self.iterations,
            self.shared,
            target.distance(),
            self.matrix,
            self.epsilon_train.clone(),
            bound.values().to_vec(),
        )
    }

    /// Folds a per-edge, per-iteration gradient `[t * num_edges + e]` into
    /// this set's layout.
    pub fn reduce_gradient(&self, per_edge: &[T], classes: Option<&[usize]>) -> Vec<T> {
        let mut out = vec![T::zero(); self.values.len()];
        let ne = per_edge.len() / self.iterations;
        for t in 0..self.iterations {
            let row = if self.shared { 0 } else { t };
            let dst = &mut out[row * self.width..(row + 1) * self.width];
            let src = &per_edge[t * ne..(t + 1) * ne];
            match (self.kind, classes) {
                (WeightKind::Conv, Some(cls)) => {
                    for (e, &g) in src.iter().enumerate() {
                        dst[cls[e]] = dst[cls[e]] + g;
                    }
                }
                _ => {
                    for (o, &g) in dst.iter_mut().zip(src) {
                        *o = *o + g;
                    }
                }
            }
        }
        out
    }

    pub fn checksum(&self) -> String {
        self.to_file().1
    }

    fn to_file(&self) -> (WeightPayload, String) {
        let payload = WeightPayload {
            format_version: FORMAT_VERSION,
            kind: self.kind,
            iterations: self.iterations,
            shared: self.shared,
            d: self.distance,
            matrix: self.matrix,
            epsilon_train: self.epsilon_train.clone(),
            class_convention_hash: class_convention_hash(),
            values: self.values.iter().map(|v| v.as_f64()).collect(),
        };
        let sum = payload.digest();
        (payload, sum)
    }

    pub fn to_json(&self) -> String {
        let (payload, checksum) = self.to_file();
        serde_json::to_string_pretty(&WeightFile { payload, checksum }).expect("weight file serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: WeightFile = serde_json::from_str(text).map_err(|e| {
            if e.classify() == serde_json::error::Category::Eof {
                Error::Checksum
            } else {
                Error::Json(e)
            }
        })?;
        let p = file.payload;
        if p.format_version != FORMAT_VERSION {
            return Err(Error::Version {
                found: p.format_version,
                expected: FORMAT_VERSION,
            });
        }
        if p.class_convention_hash != class_convention_hash() {
            return Err(Error::ClassConvention {
                found: p.class_convention_hash,
                expected: class_convention_hash(),
            });
        }
        if p.digest() != file.checksum {
            return Err(Error::Checksum);
        }
        WeightSet::new(
            p.kind,
            p.iterations,
            p.shared,
            p.d,
            p.matrix,
            p.epsilon_train,
            p.values.into_iter().map(T::of).collect(),
        )
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        WeightSet::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightPayload {
    format_version: u32,
    kind: WeightKind,
    #[serde(rename = "T")]
    iterations: usize,
    shared: bool,
    d: usize,
    matrix: MatrixKind,
    epsilon_train: Vec<f64>,
    class_convention_hash: String,
    values: Vec<f64>,
}

impl WeightPayload {
    fn digest(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("payload serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}

#[derive(Serialize, Deserialize)]
struct WeightFile {
    #[serde(flatten)]
    payload: WeightPayload,
    checksum: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_sizes() {
        let c4 = ToricCode::new(4).unwrap();
        let c10 = ToricCode::new(10).unwrap();
        let conv = WeightSet::<f64>::init_unit(WeightKind::Conv, 8, false, &c4, MatrixKind::Overcomplete).unwrap();
        assert_eq!(conv.values().len(), 256);
        assert!(conv.is_unit());
        let dense = WeightSet::<f64>::init_unit(WeightKind::Dense, 8, false, &c4, MatrixKind::Overcomplete).unwrap();
        assert_eq!(dense.values().len(), 4096);
        let dense = WeightSet::<f64>::init_unit(WeightKind::Dense, 8, false, &c10, MatrixKind::Overcomplete).unwrap();
        assert_eq!(dense.values().len(), 8 * 3200);
    }

    #[test]
    fn transfer_expands_by_class() {
        let c4 = ToricCode::new(4).unwrap();
        let c10 = ToricCode::new(10).unwrap();
        let vals: Vec<f64> = (0..64).map(|k| 1.0 + k as f64 / 64.0).collect();
        let conv = WeightSet::new(WeightKind::Conv, 2, false, 4, MatrixKind::Overcomplete, vec![0.1], vals.clone()).unwrap();
        let dense = conv.transfer(&c10).unwrap();
        assert_eq!(dense.kind, WeightKind::Dense);
        assert_eq!(dense.distance, 10);
        assert_eq!(dense.width(), 3200);
        let cls = edge_class_ids(&c10, MatrixKind::Overcomplete).unwrap();
        for t in 0..2 {
            for (e, &c) in cls.iter().enumerate() {
                assert_eq!(dense.values()[t * 3200 + e], vals[t * 32 + c]);
            }
        }
        // Back at the training distance the binding is unchanged.
        assert_eq!(conv.transfer(&c4).unwrap().bind(&c4).unwrap(), conv.bind(&c4).unwrap());
        assert!(dense.transfer(&c4).is_err());
        assert!(dense.bind(&c4).is_err());
    }

    #[test]
    fn file_round_trip_and_rejections() {
        let vals: Vec<f64> = (0..96).map(|k| (k as f64 * 0.37).sin() + 1.0 / 3.0).collect();
        let w = WeightSet::new(WeightKind::Conv, 3, false, 4, MatrixKind::Overcomplete, vec![0.1], vals).unwrap();
        let text = w.to_json();
        let back = WeightSet::<f64>::from_json(&text).unwrap();
        assert_eq!(back, w);
        assert!(back.values().iter().zip(w.values()).all(|(a, b)| a.to_bits() == b.to_bits()));

        assert!(matches!(
            WeightSet::<f64>::from_json(&text[..text.len() / 2]),
            Err(Error::Checksum)
        ));
        let tampered = text.replacen("0.", "1.", 1);
        assert!(matches!(WeightSet::<f64>::from_json(&tampered), Err(Error::Checksum)));
        let other = text.replace(&class_convention_hash(), "0000000000000000");
        assert!(matches!(
            WeightSet::<f64>::from_json(&other),
            Err(Error::ClassConvention { .. })
        ));
        let old = text.replace("\"format_version\": 1", "\"format_version\": 0");
        assert!(matches!(WeightSet::<f64>::from_json(&old), Err(Error::Version { found: 0, .. })));
    }
}

//! Learned weight-selection policy: feature extraction, oracle-labeled
//! dataset generation, per-antenna 4-class GBDT training, and the
//! predict-then-refine pipeline.
//!
//! Labels are always canonical (symbol 0 fixed to class 0), which makes the
//! per-antenna classification target well-posed despite the objective's
//! invariance to a global symbol rotation; antenna 0's constant-label model
//! doubles as a sanity anchor.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::array::{
    random_scenario, sample_covariance, steering_vector, synthesize_snapshots, ArrayGeometry,
    ScenarioDistribution,
};
use crate::beamformer::{
    coordinate_descent, oracle_search, ObjectiveParams, QpskWeights, ORACLE_MAX_N,
};
use crate::error::{Error, Result};
use crate::gbdt::{fit_classifier, Classifier, FeatureMatrix, Presorted, TrainingConfig};
use crate::linalg::{hermitian_eigenvalues, HermitianMatrix};
use crate::seed::derive_seed;

/// Model file format version accepted by [`load_model`].
pub const MODEL_VERSION: u32 = 1;

/// Default coordinate-descent budget applied after prediction.
pub const DEFAULT_REFINE_SWEEPS: usize = 3;

/// Feature vector length for an `n`-element array.
///
/// Layout: strict lower triangle of the covariance in row-major order, real
/// then imaginary per entry (`n(n-1)` values); the real diagonal (`n`);
/// eigenvalues sorted descending (`n`); then per steering element real,
/// imaginary, magnitude, phase (`4n`). Total `n^2 + 5n`.
pub fn feature_length(n: usize) -> usize {
    n * n + 5 * n
}

/// Extracts the fixed-layout feature vector from a covariance estimate and
/// steering vector. The layout is the contract; see [`feature_length`].
pub fn extract_features(r: &HermitianMatrix, a_g: &[Complex64]) -> Result<Vec<f64>> {
    let n = r.order();
    if a_g.len() != n {
        return Err(Error::Dimension(format!(
            "covariance order {} vs steering length {}",
            n,
            a_g.len()
        )));
    }
    let mut f = Vec::with_capacity(feature_length(n));
    for i in 1..n {
        for j in 0..i {
            let z = r.get(i, j);
            f.push(z.re);
            f.push(z.im);
        }
    }
    for i in 0..n {
        f.push(r.get(i, i).re);
    }
    let eigs = hermitian_eigenvalues(r)?;
    f.extend_from_slice(&eigs);
    for z in a_g {
        f.push(z.re);
        f.push(z.im);
        f.push(z.norm());
        let mut phase = z.arg();
        // atan2 can land on -pi for negative-real inputs with a -0.0
        // imaginary part; the layout uses the (-pi, pi] branch.
        if phase <= -std::f64::consts::PI {
            phase = std::f64::consts::PI;
        }
        f.push(phase);
    }
    debug_assert_eq!(f.len(), feature_length(n));
    Ok(f)
}

/// One labeled training example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub features: Vec<f64>,
    pub labels: Vec<u8>,
    pub scenario_id: u64,
}

/// An oracle-labeled training set for one array size.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingDataset {
    n: usize,
    rows: Vec<DatasetRow>,
}

impl TrainingDataset {
    pub fn from_rows(n: usize, rows: Vec<DatasetRow>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("array size {n} < 2")));
        }
        let want = feature_length(n);
        for (i, row) in rows.iter().enumerate() {
            if row.features.len() != want {
                return Err(Error::FeatureLength {
                    got: row.features.len(),
                    expected: want,
                });
            }
            if row.labels.len() != n {
                return Err(Error::Dimension(format!(
                    "row {i} has {} labels for n = {n}",
                    row.labels.len()
                )));
            }
            if row.labels.iter().any(|&l| l > 3) {
                return Err(Error::InvalidArgument(format!(
                    "row {i} has a label outside 0..=3"
                )));
            }
            if row.labels[0] != 0 {
                return Err(Error::InvalidArgument(format!(
                    "row {i} is not canonical (labels[0] = {})",
                    row.labels[0]
                )));
            }
            if row.features.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("row {i} features")));
            }
        }
        Ok(TrainingDataset { n, rows })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[DatasetRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Splits off the last `count` rows (held-out evaluation convention).
    pub fn split_tail(&self, count: usize) -> (TrainingDataset, TrainingDataset) {
        let cut = self.rows.len().saturating_sub(count);
        (
            TrainingDataset {
                n: self.n,
                rows: self.rows[..cut].to_vec(),
            },
            TrainingDataset {
                n: self.n,
                rows: self.rows[cut..].to_vec(),
            },
        )
    }

    /// Writes one JSON object per line: `{"features": [...], "labels":
    /// [...], "scenario_id": ...}`.
    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let display = path.display().to_string();
        let file = fs::File::create(path).map_err(|e| Error::io(&display, e))?;
        let mut out = BufWriter::new(file);
        for row in &self.rows {
            serde_json::to_writer(&mut out, row)
                .map_err(|e| Error::io(&display, std::io::Error::other(e)))?;
            out.write_all(b"\n").map_err(|e| Error::io(&display, e))?;
        }
        out.flush().map_err(|e| Error::io(&display, e))
    }

    pub fn read_jsonl(path: &Path) -> Result<Self> {
        let display = path.display().to_string();
        let file = fs::File::open(path).map_err(|e| Error::io(&display, e))?;
        let reader = BufReader::new(file);
        let mut rows = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(&display, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let row: DatasetRow = serde_json::from_str(&line)
                .map_err(|e| Error::parse(&display, format!("line {}: {e}", lineno + 1)))?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::parse(&display, "no dataset rows"));
        }
        let n = rows[0].labels.len();
        TrainingDataset::from_rows(n, rows)
            .map_err(|e| Error::parse(&display, e.to_string()))
    }

    /// SHA-256 over the serialized rows, hex-encoded; identifies the exact
    /// training data inside model metadata.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for row in &self.rows {
            hasher.update(serde_json::to_string(row).expect("row serializes").as_bytes());
            hasher.update(b"\n");
        }
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Generates `count` oracle-labeled rows: per row, draw a scenario from the
/// distribution, synthesize snapshots, estimate the covariance, and label
/// with the canonical oracle symbols. Row `i` is seeded independently from
/// `(seed, i)`, so the dataset is identical regardless of thread count.
pub fn generate_dataset(
    dist: &ScenarioDistribution,
    count: usize,
    geom: &ArrayGeometry,
    p: &ObjectiveParams,
    seed: u64,
) -> Result<TrainingDataset> {
    if count == 0 {
        return Err(Error::InvalidArgument("dataset needs at least one row".into()));
    }
    dist.validate()?;
    p.validate()?;
    let n = geom.len();
    if n > ORACLE_MAX_N {
        return Err(Error::OracleTooLarge {
            n,
            candidates: 4u128.pow((n - 1) as u32),
        });
    }
    let rows: Vec<DatasetRow> = (0..count)
        .into_par_iter()
        .map(|i| -> Result<DatasetRow> {
            let row_seed = derive_seed(seed, i as u64);
            let sc = random_scenario(dist, row_seed)?;
            let batch = synthesize_snapshots(geom, &sc)?;
            let r = sample_covariance(&batch);
            let a_g = steering_vector(geom, &sc.sat_dir);
            let best = oracle_search(&r, &a_g, p)?;
            let features = extract_features(&r, &a_g)?;
            Ok(DatasetRow {
                features,
                labels: best.symbols().to_vec(),
                scenario_id: row_seed,
            })
        })
        .collect::<Result<_>>()?;
    TrainingDataset::from_rows(n, rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub seed: u64,
    pub hyperparameters: TrainingConfig,
    pub dataset_fingerprint: String,
    pub dataset_rows: usize,
    #[serde(default)]
    pub warnings: Vec<String>,
}

/// Per-antenna boosted classifiers plus provenance metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    pub version: u32,
    pub n_antennas: usize,
    pub feature_length: usize,
    pub learning_rate: f64,
    pub classifiers: Vec<Classifier>,
    pub metadata: ModelMetadata,
}

impl GbdtModel {
    pub fn validate(&self) -> Result<()> {
        if self.version != MODEL_VERSION {
            return Err(Error::ModelVersion {
                got: self.version,
                expected: MODEL_VERSION,
            });
        }
        if self.n_antennas < 2 {
            return Err(Error::ModelInvalid(format!(
                "n_antennas {} < 2",
                self.n_antennas
            )));
        }
        if self.feature_length != feature_length(self.n_antennas) {
            return Err(Error::ModelInvalid(format!(
                "feature_length {} does not match n_antennas {}",
                self.feature_length, self.n_antennas
            )));
        }
        if self.classifiers.len() != self.n_antennas {
            return Err(Error::ModelInvalid(format!(
                "{} classifiers for {} antennas",
                self.classifiers.len(),
                self.n_antennas
            )));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::ModelInvalid(format!(
                "learning_rate {}",
                self.learning_rate
            )));
        }
        for (a, clf) in self.classifiers.iter().enumerate() {
            clf.validate(self.feature_length)
                .map_err(|e| Error::ModelInvalid(format!("antenna {a}: {e}")))?;
        }
        Ok(())
    }
}

/// Trains one 4-class classifier per antenna on canonical oracle labels.
/// Deterministic in (dataset, config); classifiers train in parallel but
/// each antenna's result is independent of scheduling.
pub fn train_gbdt(ds: &TrainingDataset, cfg: &TrainingConfig) -> Result<GbdtModel> {
    cfg.validate()?;
    if ds.is_empty() {
        return Err(Error::InvalidArgument("empty training dataset".into()));
    }
    let n = ds.n();
    let flen = feature_length(n);
    let mut data = Vec::with_capacity(ds.len() * flen);
    for row in ds.rows() {
        data.extend_from_slice(&row.features);
    }
    let fm = FeatureMatrix::new(ds.len(), flen, data)?;
    let pre = Presorted::new(&fm);
    let classifiers: Vec<Classifier> = (0..n)
        .into_par_iter()
        .map(|a| {
            let labels: Vec<u8> = ds.rows().iter().map(|row| row.labels[a]).collect();
            fit_classifier(&fm, &pre, &labels, cfg)
        })
        .collect::<Result<_>>()?;
    let mut warnings = Vec::new();
    if ds.len() == 1 {
        warnings.push("dataset has a single row; the model cannot generalize".to_string());
    }
    Ok(GbdtModel {
        version: MODEL_VERSION,
        n_antennas: n,
        feature_length: flen,
        learning_rate: cfg.learning_rate,
        classifiers,
        metadata: ModelMetadata {
            seed: cfg.seed,
            hyperparameters: *cfg,
            dataset_fingerprint: ds.fingerprint(),
            dataset_rows: ds.len(),
            warnings,
        },
    })
}

/// Per-antenna argmax prediction (ties resolve to the lowest class).
pub fn predict_weights(m: &GbdtModel, features: &[f64]) -> Result<QpskWeights> {
    if features.len() != m.feature_length {
        return Err(Error::FeatureLength {
            got: features.len(),
            expected: m.feature_length,
        });
    }
    let symbols: Vec<u8> = m.classifiers.iter().map(|c| c.predict(features)).collect();
    QpskWeights::new(symbols)
}

/// Predict-then-refine: extract features, predict per-antenna symbols, then
/// polish with a short coordinate-descent run. The result never scores below
/// the raw prediction.
pub fn gbdt_refine(
    m: &GbdtModel,
    r: &HermitianMatrix,
    a_g: &[Complex64],
    p: &ObjectiveParams,
    max_sweeps: usize,
) -> Result<QpskWeights> {
    if r.order() != m.n_antennas {
        return Err(Error::Dimension(format!(
            "covariance order {} vs model antennas {}",
            r.order(),
            m.n_antennas
        )));
    }
    p.validate()?;
    let features = extract_features(r, a_g)?;
    let init = predict_weights(m, &features)?;
    Ok(coordinate_descent(&init, r, a_g, p, max_sweeps))
}

/// Writes the model as a single compact JSON document plus trailing newline.
pub fn save_model(m: &GbdtModel, path: &Path) -> Result<()> {
    let display = path.display().to_string();
    m.validate()?;
    let mut text = serde_json::to_string(m)
        .map_err(|e| Error::io(&display, std::io::Error::other(e)))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(&display, e))
}

/// Loads and validates a model file; refuses unknown format versions before
/// attempting a full decode.
pub fn load_model(path: &Path) -> Result<GbdtModel> {
    let display = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| Error::io(&display, e))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::parse(&display, e.to_string()))?;
    let version = value
        .get("version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::parse(&display, "missing version field"))?;
    if version != MODEL_VERSION as u64 {
        return Err(Error::ModelVersion {
            got: u32::try_from(version).unwrap_or(u32::MAX),
            expected: MODEL_VERSION,
        });
    }
    let model: GbdtModel = serde_json::from_value(value)
        .map_err(|e| Error::parse(&display, e.to_string()))?;
    model.validate()?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::Direction;
    use crate::beamformer::objective;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn identity(n: usize) -> HermitianMatrix {
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            entries[i * n + i] = Complex64::new(1.0, 0.0);
        }
        HermitianMatrix::new(n, entries).unwrap()
    }

    fn random_instance(n: usize, seed: u64) -> (HermitianMatrix, Vec<Complex64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = |rng: &mut ChaCha8Rng| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        let b: Vec<Complex64> = (0..n * n).map(|_| draw(&mut rng)).collect();
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += b[i * n + k] * b[j * n + k].conj();
                }
                entries[i * n + j] = acc;
            }
            entries[i * n + i] += Complex64::new(0.1, 0.0);
        }
        let r = HermitianMatrix::new(n, entries).unwrap();
        let a_g: Vec<Complex64> = (0..n)
            .map(|_| Complex64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU))
            .collect();
        (r, a_g)
    }

    #[test]
    fn feature_length_arithmetic() {
        assert_eq!(feature_length(4), 36);
        assert_eq!(feature_length(8), 104);
        assert_eq!(feature_length(10), 150);
    }

    #[test]
    fn identity_features_by_hand() {
        // R = I, a_g = all ones, N = 2: lower-tri (0, 0), diag (1, 1),
        // eigenvalues (1, 1), per element (1, 0, 1, 0).
        let r = identity(2);
        let a_g = vec![Complex64::new(1.0, 0.0); 2];
        let f = extract_features(&r, &a_g).unwrap();
        let want = [0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        assert_eq!(f.len(), want.len());
        for (got, want) in f.iter().zip(want.iter()) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn phase_uses_half_open_branch() {
        let r = identity(2);
        let a_g = vec![Complex64::new(-1.0, 0.0), Complex64::new(-1.0, -0.0)];
        let f = extract_features(&r, &a_g).unwrap();
        let phase0 = f[feature_length(2) - 5];
        let phase1 = f[feature_length(2) - 1];
        assert_eq!(phase0, std::f64::consts::PI);
        assert_eq!(phase1, std::f64::consts::PI);
    }

    #[test]
    fn feature_dimension_mismatch() {
        let r = identity(3);
        let a_g = vec![Complex64::new(1.0, 0.0); 2];
        assert!(matches!(extract_features(&r, &a_g), Err(Error::Dimension(_))));
    }

    fn small_dataset(count: usize, seed: u64) -> TrainingDataset {
        let geom = ArrayGeometry::uniform_circular(3).unwrap();
        let dist = ScenarioDistribution {
            snapshots: 64,
            ..ScenarioDistribution::default()
        };
        generate_dataset(&dist, count, &geom, &ObjectiveParams::default(), seed).unwrap()
    }

    #[test]
    fn dataset_generation_is_deterministic_and_canonical() {
        let a = small_dataset(6, 11);
        let b = small_dataset(6, 11);
        assert_eq!(a, b);
        assert_eq!(a.len(), 6);
        for row in a.rows() {
            assert_eq!(row.labels[0], 0);
            assert_eq!(row.features.len(), feature_length(3));
        }
        let c = small_dataset(6, 12);
        assert_ne!(a, c);
        assert_eq!(small_dataset(1, 7), small_dataset(1, 7));
    }

    #[test]
    fn dataset_jsonl_round_trip() {
        let ds = small_dataset(5, 3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.jsonl");
        ds.write_jsonl(&path).unwrap();
        let back = TrainingDataset::read_jsonl(&path).unwrap();
        assert_eq!(ds, back);
        assert_eq!(ds.fingerprint(), back.fingerprint());
    }

    #[test]
    fn dataset_rejects_oversized_oracle() {
        let geom = ArrayGeometry::uniform_circular(15).unwrap();
        let dist = ScenarioDistribution::default();
        let err = generate_dataset(&dist, 1, &geom, &ObjectiveParams::default(), 0).unwrap_err();
        assert!(matches!(err, Error::OracleTooLarge { n: 15, .. }));
    }

    /// Hand-built dataset: antenna 0 constant zero (canonical), antenna 1 a
    /// threshold rule on feature 0.
    fn separable_dataset(rows: usize) -> TrainingDataset {
        let n = 2;
        let flen = feature_length(n);
        let rows: Vec<DatasetRow> = (0..rows)
            .map(|i| {
                let x = i as f64 / 100.0;
                let mut features = vec![0.0; flen];
                features[0] = x;
                features[1] = ((i * 37) % 11) as f64;
                let label = if x > 0.4 { 3 } else { 1 };
                DatasetRow {
                    features,
                    labels: vec![0, label],
                    scenario_id: i as u64,
                }
            })
            .collect();
        TrainingDataset::from_rows(n, rows).unwrap()
    }

    #[test]
    fn training_learns_threshold_and_anchors_antenna_zero() {
        let ds = separable_dataset(100);
        let cfg = TrainingConfig {
            rounds: 20,
            max_depth: 2,
            learning_rate: 0.3,
            min_leaf: 1,
            seed: 5,
        };
        let model = train_gbdt(&ds, &cfg).unwrap();
        model.validate().unwrap();
        for row in ds.rows() {
            let w = predict_weights(&model, &row.features).unwrap();
            assert_eq!(w.symbols(), row.labels.as_slice());
        }
        assert!(model.metadata.warnings.is_empty());
        assert_eq!(model.metadata.dataset_rows, 100);
        assert_eq!(model.metadata.dataset_fingerprint, ds.fingerprint());
    }

    #[test]
    fn single_row_dataset_warns() {
        let ds = separable_dataset(1);
        let cfg = TrainingConfig {
            rounds: 2,
            max_depth: 1,
            learning_rate: 0.1,
            min_leaf: 1,
            seed: 0,
        };
        let model = train_gbdt(&ds, &cfg).unwrap();
        assert_eq!(model.metadata.warnings.len(), 1);
    }

    #[test]
    fn identical_training_is_byte_identical() {
        let ds = separable_dataset(60);
        let cfg = TrainingConfig {
            rounds: 6,
            max_depth: 2,
            learning_rate: 0.2,
            min_leaf: 2,
            seed: 9,
        };
        let a = serde_json::to_string(&train_gbdt(&ds, &cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&train_gbdt(&ds, &cfg).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn predict_rejects_wrong_length() {
        let ds = separable_dataset(30);
        let cfg = TrainingConfig {
            rounds: 2,
            max_depth: 1,
            learning_rate: 0.1,
            min_leaf: 1,
            seed: 0,
        };
        let model = train_gbdt(&ds, &cfg).unwrap();
        let err = predict_weights(&model, &[0.0; 3]).unwrap_err();
        assert!(matches!(
            err,
            Error::FeatureLength {
                got: 3,
                expected: 14
            }
        ));
    }

    #[test]
    fn model_file_round_trip_and_rejections() {
        let ds = separable_dataset(40);
        let cfg = TrainingConfig {
            rounds: 3,
            max_depth: 2,
            learning_rate: 0.2,
            min_leaf: 1,
            seed: 1,
        };
        let model = train_gbdt(&ds, &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&model, &path).unwrap();
        let back = load_model(&path).unwrap();
        assert_eq!(model, back);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let f: Vec<f64> = (0..model.feature_length).map(|_| rng.random::<f64>()).collect();
            assert_eq!(
                predict_weights(&model, &f).unwrap(),
                predict_weights(&back, &f).unwrap()
            );
        }

        // Truncation breaks the parse.
        let text = fs::read_to_string(&path).unwrap();
        let cut = path.with_extension("cut.json");
        fs::write(&cut, &text[..text.len() / 2]).unwrap();
        assert!(matches!(load_model(&cut), Err(Error::Parse { .. })));

        // Unknown version is refused before decoding the body.
        let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
        value["version"] = serde_json::json!(99);
        let vpath = path.with_extension("v99.json");
        fs::write(&vpath, serde_json::to_string(&value).unwrap()).unwrap();
        assert!(matches!(
            load_model(&vpath),
            Err(Error::ModelVersion { got: 99, expected: 1 })
        ));

        // Inconsistent classifier count fails validation.
        let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
        value["n_antennas"] = serde_json::json!(3);
        let bpath = path.with_extension("bad.json");
        fs::write(&bpath, serde_json::to_string(&value).unwrap()).unwrap();
        assert!(matches!(load_model(&bpath), Err(Error::ModelInvalid(_))));
    }

    #[test]
    fn refine_never_scores_below_raw_prediction() {
        let geom = ArrayGeometry::uniform_circular(4).unwrap();
        let dist = ScenarioDistribution {
            snapshots: 128,
            ..ScenarioDistribution::default()
        };
        let p = ObjectiveParams::default();
        let ds = generate_dataset(&dist, 40, &geom, &p, 21).unwrap();
        let cfg = TrainingConfig {
            rounds: 10,
            max_depth: 3,
            learning_rate: 0.2,
            min_leaf: 2,
            seed: 0,
        };
        let model = train_gbdt(&ds, &cfg).unwrap();
        for seed in 0..20u64 {
            let (r, _) = random_instance(4, 900 + seed);
            let sat = Direction::new(10.0 * seed as f64, 35.0).unwrap();
            let a_g = steering_vector(&geom, &sat);
            let features = extract_features(&r, &a_g).unwrap();
            let raw = predict_weights(&model, &features).unwrap();
            let refined = gbdt_refine(&model, &r, &a_g, &p, DEFAULT_REFINE_SWEEPS).unwrap();
            assert!(objective(&refined, &r, &a_g, &p) >= objective(&raw, &r, &a_g, &p) - 1e-15);
        }
    }

    #[test]
    fn refine_rejects_model_size_mismatch() {
        let ds = separable_dataset(30);
        let cfg = TrainingConfig {
            rounds: 2,
            max_depth: 1,
            learning_rate: 0.1,
            min_leaf: 1,
            seed: 0,
        };
        let model = train_gbdt(&ds, &cfg).unwrap();
        let (r, a_g) = random_instance(4, 1);
        assert!(matches!(
            gbdt_refine(&model, &r, &a_g, &ObjectiveParams::default(), 3),
            Err(Error::Dimension(_))
        ));
    }
}

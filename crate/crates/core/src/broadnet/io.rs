use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BroadNetConfig, BroadNetModel};
use crate::error::{Error, Result};
use crate::imagery::{Pattern, Standardization};
use crate::linalg::Matrix;

pub const MODEL_FORMAT_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    version: u64,
    config: BroadNetConfig,
    mean: Pattern,
    std: Pattern,
    layers: Vec<Matrix>,
    output_weights: Matrix,
    trace: Vec<f64>,
}

pub fn model_to_json(model: &BroadNetModel) -> String {
    let file = ModelFile {
        version: MODEL_FORMAT_VERSION,
        config: model.config,
        mean: model.standardization.mean,
        std: model.standardization.std,
        layers: model.layers.clone(),
        output_weights: model.output_weights.clone(),
        trace: model.trace.clone(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("model serializes");
    s.push('\n');
    s
}

pub fn model_from_json(text: &str) -> Result<BroadNetModel> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    let version = value
        .get("version")
        .ok_or_else(|| Error::Format("missing `version`".into()))?
        .as_u64()
        .ok_or_else(|| Error::Format("`version` is not an unsigned integer".into()))?;
    if version != MODEL_FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: MODEL_FORMAT_VERSION,
        });
    }
    let file: ModelFile =
        serde_json::from_value(value).map_err(|e| Error::Format(e.to_string()))?;
    if file.std.iter().any(|&s| s.is_nan() || s <= 0.0) {
        return Err(Error::Format("standard deviations must be positive".into()));
    }
    if file.trace.iter().any(|v| !v.is_finite()) {
        return Err(Error::Format("non-finite trace entry".into()));
    }
    file.config
        .validate()
        .map_err(|e| Error::Format(format!("invalid config: {e}")))?;
    BroadNetModel::from_parts(
        file.config,
        Standardization {
            mean: file.mean,
            std: file.std,
        },
        file.layers,
        file.output_weights,
        file.trace,
    )
    .map_err(|e| Error::Format(e.to_string()))
}

pub fn save_model(model: &BroadNetModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model_to_json(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<BroadNetModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagery::PATTERN_DIM;

    fn tiny_model() -> BroadNetModel {
        let layer = Matrix::from_fn(PATTERN_DIM, 2, |r, c| {
            0.1 * r as f64 - 0.37 * c as f64 + 1e-17
        });
        let out = Matrix::from_fn(PATTERN_DIM + 2, 2, |r, c| {
            (r as f64 + 0.3) / (c as f64 + 7.0)
        });
        let mut st = Standardization::identity();
        st.mean[2] = 0.1 + 0.2;
        st.std[4] = std::f64::consts::PI;
        BroadNetModel::from_parts(
            BroadNetConfig::default(),
            st,
            vec![layer],
            out,
            vec![88.125],
        )
        .unwrap()
    }

    #[test]
    fn json_round_trip_is_exact() {
        let m = tiny_model();
        let text = model_to_json(&m);
        let back = model_from_json(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(model_to_json(&back), text);
    }

    #[test]
    fn format_errors() {
        let text = model_to_json(&tiny_model());
        assert!(matches!(
            model_from_json(&text[..text.len() / 2]),
            Err(Error::Format(_))
        ));
        assert!(matches!(model_from_json("{}"), Err(Error::Format(_))));
        let v2 = text.replacen("\"version\": 1", "\"version\": 2", 1);
        assert!(matches!(
            model_from_json(&v2),
            Err(Error::VersionMismatch {
                found: 2,
                expected: 1
            })
        ));
        let extra = text.replacen("\"version\": 1", "\"version\": 1, \"extra\": 0", 1);
        assert!(matches!(model_from_json(&extra), Err(Error::Format(_))));
        let bad_trace = text.replacen("88.125", "88.125, 1.0", 1);
        assert!(matches!(model_from_json(&bad_trace), Err(Error::Format(_))));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        let m = tiny_model();
        save_model(&m, &path).unwrap();
        assert_eq!(load_model(&path).unwrap(), m);
        assert!(matches!(
            load_model(dir.path().join("nope.json")),
            Err(Error::Io { .. })
        ));
    }
}

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DescriptorChoice;
use crate::clustering::{gmm_assign, pca_transform, DataMatrix, GmmModel, KMeansModel, Partition, PcaModel};
use crate::error::{Error, Result};
use crate::funclust::NearestCentroid;

pub const MODEL_SCHEMA_VERSION: u32 = 1;

/// A fitted clusterer, tagged by `kind` in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FittedModel {
    Kmeans(KMeansModel),
    Gmm(GmmModel),
    /// Mean curves on the 200-point grid.
    Gpmix(NearestCentroid),
}

impl FittedModel {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Kmeans(_) => "kmeans",
            Self::Gmm(_) => "gmm",
            Self::Gpmix(_) => "gpmix",
        }
    }
}

/// Serialized model: descriptor, optional PCA and the clusterer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub schema_version: u32,
    pub descriptor: DescriptorChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pca: Option<PcaModel>,
    pub model: FittedModel,
}

impl ModelDocument {
    pub fn new(descriptor: DescriptorChoice, pca: Option<PcaModel>, model: FittedModel) -> Self {
        Self {
            schema_version: MODEL_SCHEMA_VERSION,
            descriptor,
            pca,
            model,
        }
    }

    /// Labels for raw descriptor rows. For `gpmix` the rows are smoothed
    /// curve values on the functional grid.
    pub fn predict(&self, features: &DataMatrix) -> Result<Partition> {
        let projected;
        let x = match &self.pca {
            Some(p) => {
                projected = pca_transform(p, features)?;
                &projected
            }
            None => features,
        };
        match &self.model {
            FittedModel::Kmeans(m) => m.predict(x),
            FittedModel::Gmm(m) => gmm_assign(m, x),
            FittedModel::Gpmix(m) => m.classify_all(x),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text)?;
        if doc.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "model schema version {} is not supported (expected {MODEL_SCHEMA_VERSION})",
                doc.schema_version
            )));
        }
        Ok(doc)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::UnreadableFile {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::{gmm_fit, kmeans_fit};

    fn data() -> DataMatrix {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                let c = if i % 2 == 0 { 0.0 } else { 5.0 };
                vec![c + (i as f64 * 0.37).sin() / 3.0, c + (i as f64 * 1.3).cos() / 7.0]
            })
            .collect();
        DataMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn kmeans_document_round_trips_bitwise() {
        let x = data();
        let (m, p) = kmeans_fit(&x, 2, 3, 4).unwrap();
        let doc = ModelDocument::new(DescriptorChoice::Fd10, None, FittedModel::Kmeans(m));
        let json = doc.to_json().unwrap();
        assert!(json.contains("\"kind\": \"kmeans\""));
        let back = ModelDocument::from_json(&json).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.predict(&x).unwrap(), p);
    }

    #[test]
    fn gmm_document_round_trips_bitwise() {
        let x = data();
        let m = gmm_fit(&x, 2, 1, 2).unwrap();
        let doc = ModelDocument::new(DescriptorChoice::Zm12, None, FittedModel::Gmm(m));
        let back = ModelDocument::from_json(&doc.to_json().unwrap()).unwrap();
        assert_eq!(back, doc);
    }

    #[test]
    fn rejects_unknown_schema() {
        let x = data();
        let (m, _) = kmeans_fit(&x, 2, 3, 1).unwrap();
        let mut doc = ModelDocument::new(DescriptorChoice::Fd10, None, FittedModel::Kmeans(m));
        doc.schema_version = 99;
        assert!(matches!(
            ModelDocument::from_json(&doc.to_json().unwrap()),
            Err(Error::Config(_))
        ));
    }
}

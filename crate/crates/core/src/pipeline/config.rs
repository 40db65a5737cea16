use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::descriptors::DescriptorKind;
use crate::error::{Error, Result};
use crate::funclust::{FunclustConfig, FUNCTIONAL_SAMPLES};
use crate::synth::DatasetSpec;

/// Feature representation used for clustering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DescriptorChoice {
    Cdf100,
    Fd10,
    Zm12,
    /// 200-sample aligned radial profile, clustered as a function.
    Functional,
}

impl DescriptorChoice {
    pub fn kind(self) -> Option<DescriptorKind> {
        match self {
            Self::Cdf100 => Some(DescriptorKind::Cdf100),
            Self::Fd10 => Some(DescriptorKind::Fd10),
            Self::Zm12 => Some(DescriptorKind::Zm12),
            Self::Functional => None,
        }
    }

    pub fn dim(self) -> usize {
        self.kind().map_or(FUNCTIONAL_SAMPLES, DescriptorKind::dim)
    }

    pub fn name(self) -> &'static str {
        self.kind().map_or("functional", DescriptorKind::name)
    }

    pub fn column_names(self) -> Vec<String> {
        match self.kind() {
            Some(k) => k.column_names(),
            None => (0..FUNCTIONAL_SAMPLES).map(|i| format!("prof_{i:03}")).collect(),
        }
    }
}

impl FromStr for DescriptorChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cdf100" => Ok(Self::Cdf100),
            "fd10" => Ok(Self::Fd10),
            "zm12" => Ok(Self::Zm12),
            "functional" => Ok(Self::Functional),
            _ => Err(Error::Config(format!(
                "unknown descriptor {s:?} (expected cdf100, fd10, zm12 or functional)"
            ))),
        }
    }
}

impl fmt::Display for DescriptorChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClustererChoice {
    Kmeans,
    Gmm,
    Gpmix,
}

impl ClustererChoice {
    pub fn name(self) -> &'static str {
        match self {
            Self::Kmeans => "kmeans",
            Self::Gmm => "gmm",
            Self::Gpmix => "gpmix",
        }
    }
}

impl FromStr for ClustererChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kmeans" => Ok(Self::Kmeans),
            "gmm" => Ok(Self::Gmm),
            "gpmix" => Ok(Self::Gpmix),
            _ => Err(Error::Config(format!(
                "unknown clusterer {s:?} (expected kmeans, gmm or gpmix)"
            ))),
        }
    }
}

impl fmt::Display for ClustererChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Cluster count: chosen by the clusterer's criterion, or fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KChoice {
    #[default]
    Auto,
    Fixed(usize),
}

impl FromStr for KChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Self::Auto);
        }
        s.parse()
            .map(Self::Fixed)
            .map_err(|_| Error::Config(format!("k must be \"auto\" or a positive integer, got {s:?}")))
    }
}

impl fmt::Display for KChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Auto => f.write_str("auto"),
            Self::Fixed(k) => write!(f, "{k}"),
        }
    }
}

impl Serialize for KChoice {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Auto => s.serialize_str("auto"),
            Self::Fixed(k) => s.serialize_u64(*k as u64),
        }
    }
}

impl<'de> Deserialize<'de> for KChoice {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(usize),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(k) => Ok(Self::Fixed(k)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// A dataset spec given inline or as a path to its JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SyntheticSource {
    Inline(DatasetSpec),
    File(PathBuf),
}

impl SyntheticSource {
    pub fn resolve(&self) -> Result<DatasetSpec> {
        match self {
            Self::Inline(spec) => Ok(spec.clone()),
            Self::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::UnreadableFile {
                    path: path.clone(),
                    reason: e.to_string(),
                })?;
                serde_json::from_str(&text)
                    .map_err(|e| Error::Config(format!("synthetic spec {}: {e}", path.display())))
            }
        }
    }
}

/// Everything a run needs; the JSON form mirrors the command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Directory of particle images.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticSource>,
    pub descriptor: DescriptorChoice,
    pub clusterer: ClustererChoice,
    #[serde(default)]
    pub k: KChoice,
    /// Principal components kept before clustering.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pca: Option<usize>,
    /// Master seed; also used as the functional-clustering seed.
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default)]
    pub funclust: FunclustConfig,
}

impl PipelineConfig {
    pub fn synthetic(spec: DatasetSpec, descriptor: DescriptorChoice, clusterer: ClustererChoice) -> Self {
        Self {
            input: None,
            synthetic: Some(SyntheticSource::Inline(spec)),
            descriptor,
            clusterer,
            k: KChoice::Auto,
            pca: None,
            seed: 0,
            out: None,
            threads: None,
            funclust: FunclustConfig::default(),
        }
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::UnreadableFile {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Functional-clustering settings with the run seed applied.
    pub fn effective_funclust(&self) -> FunclustConfig {
        FunclustConfig {
            seed: self.seed,
            ..self.funclust.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.input, &self.synthetic) {
            (Some(_), Some(_)) => return Err(Error::Config("give either input or synthetic, not both".into())),
            (None, None) => {
                return Err(Error::Config(
                    "an input directory or a synthetic spec is required".into(),
                ))
            }
            _ => {}
        }
        let functional = self.descriptor == DescriptorChoice::Functional;
        let gpmix = self.clusterer == ClustererChoice::Gpmix;
        if functional != gpmix {
            return Err(Error::Config(format!(
                "descriptor {} cannot be used with clusterer {}: functional pairs only with gpmix",
                self.descriptor, self.clusterer
            )));
        }
        if let Some(p) = self.pca {
            if functional {
                return Err(Error::Config("pca does not apply to the functional descriptor".into()));
            }
            if p == 0 || p >= self.descriptor.dim() {
                return Err(Error::Config(format!(
                    "pca must lie in 1..{} for {}, got {p}",
                    self.descriptor.dim(),
                    self.descriptor
                )));
            }
        }
        if let KChoice::Fixed(k) = self.k {
            if k < 2 {
                return Err(Error::Config(format!("k must be at least 2, got {k}")));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        let f = &self.funclust;
        if f.m_projections == 0
            || !(f.ou_theta.is_finite() && f.ou_theta > 0.0)
            || !(f.ou_sigma.is_finite() && f.ou_sigma > 0.0)
            || f.n_basis < 4
        {
            return Err(Error::Config(
                "funclust needs m_projections >= 1, ou_theta > 0, ou_sigma > 0, n_basis >= 4".into(),
            ));
        }
        if f.k_min < 2 || f.k_min > f.k_max {
            return Err(Error::Config(format!(
                "funclust K range {}..={} is invalid",
                f.k_min, f.k_max
            )));
        }
        Ok(())
    }

    /// Minimum particle count for this configuration.
    pub fn min_particles(&self) -> usize {
        match self.k {
            KChoice::Fixed(k) => 50.max(10 * k),
            KChoice::Auto => 50,
        }
    }
}

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{emit_figures, KSelection, PipelineConfig, RunOutput};
use crate::error::Result;
use crate::validity::ValidityReport;

/// An input that was dropped, and why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedInput {
    pub source: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleRecord {
    /// Index in input order, counting skipped inputs.
    pub particle_id: usize,
    pub source: String,
    pub area: f64,
    pub perimeter: f64,
    pub circularity: f64,
    pub aspect_ratio: f64,
    pub descriptor: Vec<f64>,
    pub label: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<usize>,
}

/// Wall-clock seconds per stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub ingest_s: f64,
    pub extraction_s: f64,
    pub clustering_s: f64,
    pub validity_s: f64,
    /// Extraction plus clustering, per kept particle.
    pub ms_per_particle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub config: PipelineConfig,
    pub n_particles: usize,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection: Option<KSelection>,
    pub validity: ValidityReport,
    /// Fraction of particles per label.
    pub shares: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ari_vs_truth: Option<f64>,
    pub skipped: Vec<SkippedInput>,
    pub particles: Vec<ParticleRecord>,
    pub timings: Timings,
}

impl RunReport {
    pub fn labels(&self) -> Vec<usize> {
        self.particles.iter().map(|p| p.label).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// The JSON report without the `timings` key; equal across reruns with
    /// the same configuration and seed.
    pub fn deterministic_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        if let Some(obj) = v.as_object_mut() {
            obj.remove("timings");
        }
        Ok(serde_json::to_string_pretty(&v)?)
    }

    /// One row per particle: id, source, metrics, descriptor columns, label.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("particle_id,source,area,perimeter,circularity,aspect_ratio");
        for c in self.config.descriptor.column_names() {
            out.push(',');
            out.push_str(&c);
        }
        out.push_str(",cluster");
        let with_truth = self.particles.iter().any(|p| p.truth.is_some());
        if with_truth {
            out.push_str(",truth");
        }
        out.push('\n');
        for p in &self.particles {
            let _ = write!(
                out,
                "{},{},{},{},{},{}",
                p.particle_id,
                csv_field(&p.source),
                p.area,
                p.perimeter,
                p.circularity,
                p.aspect_ratio
            );
            for v in &p.descriptor {
                let _ = write!(out, ",{v}");
            }
            let _ = write!(out, ",{}", p.label);
            if with_truth {
                let _ = write!(out, ",{}", p.truth.map_or(String::new(), |t| t.to_string()));
            }
            out.push('\n');
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Write report.json, particles.csv, model.json and the three figures.
pub fn write_outputs(run: &RunOutput, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.json"), run.report.to_json()?)?;
    std::fs::write(dir.join("particles.csv"), run.report.to_csv())?;
    run.model.save(dir.join("model.json"))?;
    for (name, svg) in emit_figures(run)? {
        std::fs::write(dir.join(name), svg)?;
    }
    Ok(())
}

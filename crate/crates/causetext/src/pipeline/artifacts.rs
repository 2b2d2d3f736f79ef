//! Artifact plumbing: traceable TSV/JSON writers and the run manifest.
//!
//! Every TSV starts with a `#` meta line naming the producing subcommand,
//! the config hash, and the seed; every JSON artifact carries the same
//! information in a `meta` object. NDJSON corpus files are the exception:
//! their per-line schema is the document schema itself, so their provenance
//! lives in the manifest instead.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::ingest::Document;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance stamped onto every artifact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Meta {
    pub subcommand: String,
    pub config_hash: String,
    pub seed: u64,
    pub tool_version: String,
}

impl Meta {
    pub fn new(subcommand: &str, config_hash: &str, seed: u64) -> Self {
        Meta {
            subcommand: subcommand.to_string(),
            config_hash: config_hash.to_string(),
            seed,
            tool_version: TOOL_VERSION.to_string(),
        }
    }

    /// The TSV comment line, extendable with extra `key=value` pairs.
    fn tsv_line(&self, extra: &[(&str, String)]) -> String {
        let mut line = format!(
            "# subcommand={}\tconfig_hash={}\tseed={}\ttool_version={}",
            self.subcommand, self.config_hash, self.seed, self.tool_version
        );
        for (k, v) in extra {
            line.push('\t');
            line.push_str(k);
            line.push('=');
            line.push_str(v);
        }
        line
    }
}

fn internal(stage: &'static str, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Internal {
        stage,
        message: e.to_string(),
    }
}

/// Formats a float for TSV output: shortest round-trip representation,
/// always with a period decimal separator, `NaN` for undefined values.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x}")
    }
}

/// Writes a TSV with the meta comment line, a header row, and data rows.
pub fn write_tsv(
    stage: &'static str,
    path: &Path,
    meta: &Meta,
    extra_meta: &[(&str, String)],
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<(), PipelineError> {
    let mut out = String::new();
    out.push_str(&meta.tsv_line(extra_meta));
    out.push('\n');
    out.push_str(&header.join("\t"));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| internal(stage, format!("{}: {e}", path.display())))
}

/// Writes a JSON artifact as `{"meta": ..., <payload fields>}`.
pub fn write_json<T: Serialize>(
    stage: &'static str,
    path: &Path,
    meta: &Meta,
    payload: &T,
) -> Result<(), PipelineError> {
    let mut value = serde_json::to_value(payload)
        .map_err(|e| internal(stage, format!("serializing {}: {e}", path.display())))?;
    let obj = value
        .as_object_mut()
        .expect("JSON artifacts are objects");
    obj.insert(
        "meta".to_string(),
        serde_json::to_value(meta).expect("meta serializes"),
    );
    let mut text = serde_json::to_string_pretty(&value)
        .map_err(|e| internal(stage, format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| internal(stage, format!("{}: {e}", path.display())))
}

/// Writes one document per line in the corpus schema.
pub fn write_documents(
    stage: &'static str,
    path: &Path,
    docs: &[Document],
) -> Result<(), PipelineError> {
    let file = std::fs::File::create(path)
        .map_err(|e| internal(stage, format!("{}: {e}", path.display())))?;
    let mut w = std::io::BufWriter::new(file);
    for doc in docs {
        serde_json::to_writer(&mut w, doc)
            .map_err(|e| internal(stage, format!("{}: {e}", path.display())))?;
        w.write_all(b"\n")
            .map_err(|e| internal(stage, format!("{}: {e}", path.display())))?;
    }
    w.flush()
        .map_err(|e| internal(stage, format!("{}: {e}", path.display())))
}

/// Reads a corpus artifact written by [`write_documents`]. Unlike raw input
/// ingestion, artifact files must parse cleanly: any bad line is a data
/// error naming the file and line.
pub fn read_documents(stage: &'static str, path: &Path) -> Result<Vec<Document>, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::Data {
        stage,
        message: format!("{}: {e}", path.display()),
    })?;
    let mut docs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document = serde_json::from_str(line).map_err(|e| PipelineError::Data {
            stage,
            message: format!("{} line {}: {e}", path.display(), lineno + 1),
        })?;
        docs.push(doc);
    }
    Ok(docs)
}

/// One pipeline stage execution, as recorded in the manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub docs_in: u64,
    pub docs_out: u64,
    pub warnings: Vec<String>,
    pub wall_ms: u64,
}

/// The run manifest: configuration echo plus per-stage accounting. One
/// manifest lives in the output directory and is updated by every
/// subcommand; a stage re-run replaces its previous record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config_hash: String,
    pub config: Vec<(String, String)>,
    pub stages: Vec<StageRecord>,
}

impl RunManifest {
    pub fn path(output_dir: &Path) -> PathBuf {
        output_dir.join("manifest.json")
    }

    pub fn new(config_hash: &str, config: Vec<(String, String)>) -> Self {
        RunManifest {
            tool_version: TOOL_VERSION.to_string(),
            config_hash: config_hash.to_string(),
            config,
            stages: Vec::new(),
        }
    }

    /// Loads the manifest if present and produced under the same config
    /// hash; otherwise starts fresh (stale stage records under a different
    /// configuration must not survive).
    pub fn load_or_new(output_dir: &Path, config_hash: &str, config: Vec<(String, String)>) -> Self {
        let path = Self::path(output_dir);
        if let Ok(text) = std::fs::read_to_string(&path) {
            if let Ok(manifest) = serde_json::from_str::<RunManifest>(&text) {
                if manifest.config_hash == config_hash {
                    return manifest;
                }
            }
        }
        Self::new(config_hash, config)
    }

    /// Inserts or replaces the record for `record.name`.
    pub fn upsert(&mut self, record: StageRecord) {
        if let Some(existing) = self.stages.iter_mut().find(|s| s.name == record.name) {
            *existing = record;
        } else {
            self.stages.push(record);
        }
    }

    pub fn stage(&self, name: &str) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.name == name)
    }

    pub fn save(&self, output_dir: &Path) -> Result<(), PipelineError> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| internal("manifest", e.to_string()))?;
        text.push('\n');
        std::fs::write(Self::path(output_dir), text)
            .map_err(|e| internal("manifest", e.to_string()))
    }
}

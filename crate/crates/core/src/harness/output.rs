use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{parse_config, ExperimentConfig, ExperimentKind};
use crate::{Error, Result};

/// SHA-256 over `"blob <len>\0" ‖ bytes`, the framing git uses for
/// object ids, as lowercase hex.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub fn config_hash(config: &ExperimentConfig) -> String {
    content_hash(serde_json::to_string(config).expect("config serializes").as_bytes())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

/// CSV body prefixed by `#` lines carrying the kind, both hashes and the
/// resolved configuration on one line.
pub fn csv_file(config: &ExperimentConfig, name: &str, body: &str) -> OutputFile {
    let compact = serde_json::to_string(config).expect("config serializes");
    let contents = format!(
        "# coexist {}\n# config-hash: {}\n# content-hash: {}\n# config: {}\n{}",
        config.kind,
        config_hash(config),
        content_hash(body.as_bytes()),
        compact,
        body
    );
    OutputFile { name: name.into(), contents }
}

#[derive(Serialize)]
struct JsonEnvelope<'a, T: Serialize> {
    kind: ExperimentKind,
    config_hash: String,
    content_hash: String,
    config: &'a ExperimentConfig,
    result: &'a T,
}

/// JSON report `{kind, config_hash, content_hash, config, result}`; the
/// content hash covers the compact serialization of `result`.
pub fn json_file<T: Serialize>(config: &ExperimentConfig, name: &str, result: &T) -> Result<OutputFile> {
    let compact = serde_json::to_string(result)?;
    let env = JsonEnvelope {
        kind: config.kind,
        config_hash: config_hash(config),
        content_hash: content_hash(compact.as_bytes()),
        config,
        result,
    };
    let mut contents = serde_json::to_string_pretty(&env)?;
    contents.push('\n');
    Ok(OutputFile { name: name.into(), contents })
}

/// Resolved configuration embedded in a result file written by
/// [`csv_file`] or [`json_file`].
pub fn embedded_config(contents: &str) -> Result<ExperimentConfig> {
    if contents.starts_with('#') {
        let line = contents
            .lines()
            .take_while(|l| l.starts_with('#'))
            .find_map(|l| l.strip_prefix("# config: "))
            .ok_or_else(|| Error::Config("no embedded configuration".into()))?;
        return parse_config(line);
    }
    let v: serde_json::Value = serde_json::from_str(contents)?;
    let c = v.get("config").ok_or_else(|| Error::Config("no embedded configuration".into()))?;
    parse_config(&c.to_string())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub name: String,
    pub content_hash: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub kind: ExperimentKind,
    /// All checks of the run passed. Exploratory kinds always pass.
    pub pass: bool,
    pub config_hash: String,
    pub files: Vec<FileDigest>,
    pub headline: serde_json::Value,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub config: ExperimentConfig,
    pub files: Vec<OutputFile>,
    pub summary: Summary,
}

impl RunOutput {
    pub(crate) fn new(config: ExperimentConfig, files: Vec<OutputFile>, pass: bool, headline: serde_json::Value) -> Self {
        let digests = files
            .iter()
            .map(|f| FileDigest { name: f.name.clone(), content_hash: content_hash(f.contents.as_bytes()) })
            .collect();
        let summary = Summary { kind: config.kind, pass, config_hash: config_hash(&config), files: digests, headline };
        RunOutput { config, files, summary }
    }

    pub fn summary_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.summary).expect("summary serializes");
        s.push('\n');
        s
    }

    /// Write every file and `<prefix>.summary.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut out = Vec::new();
        let summary = OutputFile { name: format!("{}.summary.json", self.config.prefix()), contents: self.summary_json() };
        for f in self.files.iter().chain(std::iter::once(&summary)) {
            let p = dir.join(&f.name);
            std::fs::write(&p, &f.contents)?;
            out.push(p);
        }
        Ok(out)
    }
}

//! Run manifests written next to every artifact.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

/// Provenance of one CLI invocation. Timestamps live here and only here, so
/// CSV bodies stay byte-identical across reruns.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub flags: BTreeMap<String, Value>,
    pub seed: u64,
    pub version: String,
    pub started_at: String,
    pub finished_at: String,
    /// Defaults and substitutions that are ours rather than given by the method.
    pub notes: Vec<String>,
    pub results: BTreeMap<String, Value>,
    pub artifacts: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            flags: BTreeMap::new(),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_at: now(),
            finished_at: String::new(),
            notes: Vec::new(),
            results: BTreeMap::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn flag(&mut self, name: &str, value: impl Serialize) -> &mut Self {
        self.flags.insert(
            name.to_string(),
            serde_json::to_value(value).expect("flag serializes"),
        );
        self
    }

    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.notes.push(text.into());
        self
    }

    pub fn result(&mut self, name: &str, value: impl Serialize) -> &mut Self {
        self.results.insert(
            name.to_string(),
            serde_json::to_value(value).expect("result serializes"),
        );
        self
    }

    pub fn finish(&mut self) {
        self.finished_at = now();
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

//! Run manifests and the hash stamped into every CSV.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Duration;

use sha2::{Digest, Sha256};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Fully resolved description of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub subcommand: &'static str,
    pub config: BTreeMap<String, String>,
    pub seed: u64,
}

impl RunManifest {
    pub fn new(subcommand: &'static str, seed: u64) -> Self {
        Self { subcommand, config: BTreeMap::new(), seed }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.config.insert(key.to_string(), value.to_string());
        self
    }

    /// Digest of everything that determines the outputs (timings excluded).
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("pccc {TOOL_VERSION}\n{}\nseed={}\n", self.subcommand, self.seed));
        for (k, v) in &self.config {
            h.update(format!("{k}={v}\n"));
        }
        h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Text for the leading `#` line of each CSV.
    pub fn comment(&self) -> String {
        format!("manifest {} pccc {}", self.hash(), TOOL_VERSION)
    }

    pub fn file_name(&self) -> String {
        format!("manifest_{}_{}.json", self.subcommand, self.hash())
    }

    pub fn to_json(&self, outputs: &[PathBuf], elapsed: Duration) -> String {
        let outputs: Vec<String> = outputs.iter().map(|p| p.display().to_string()).collect();
        let value = serde_json::json!({
            "subcommand": self.subcommand,
            "hash": self.hash(),
            "tool_version": TOOL_VERSION,
            "seed": self.seed,
            "config": self.config,
            "outputs": outputs,
            "wall_clock_seconds": (elapsed.as_secs_f64() * 1000.0).round() / 1000.0,
        });
        serde_json::to_string_pretty(&value).expect("manifest is valid JSON") + "\n"
    }

    pub fn write(&self, dir: &Path, outputs: &[PathBuf], elapsed: Duration) -> io::Result<PathBuf> {
        let path = dir.join(self.file_name());
        fs::write(&path, self.to_json(outputs, elapsed))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_depends_on_config_only() {
        let mut a = RunManifest::new("ber", 1);
        a.set("n", 1000);
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
        b.set("n", 1001);
        assert_ne!(a.hash(), b.hash());
        let mut c = a.clone();
        c.seed = 2;
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn json_lists_outputs() {
        let mut m = RunManifest::new("bound", 0);
        m.set("code", "1,5/7");
        let text = m.to_json(&[PathBuf::from("x.csv")], Duration::from_millis(1500));
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["outputs"][0], "x.csv");
        assert_eq!(v["config"]["code"], "1,5/7");
        assert_eq!(v["hash"], m.hash());
    }
}

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use ihas_core::pipeline::{EvalEvent, PipelineConfig, Stage};
use ihas_core::{Error, Result};

pub const MANIFEST_FORMAT: &str = "ihas-manifest-v1";

/// Everything needed to repeat a run: resolved config, seed, input and output hashes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: String,
    pub commands: Vec<String>,
    pub config: Option<PipelineConfig>,
    pub seed: Option<u64>,
    /// File name to sha256 of each input read.
    pub inputs: BTreeMap<String, String>,
    /// File name (relative to the run directory) to sha256 of each output written.
    pub outputs: BTreeMap<String, String>,
}

/// Layout of a run directory.
#[derive(Debug, Clone)]
pub struct RunDir {
    root: PathBuf,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl RunDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root)?;
        Ok(RunDir { root: root.to_path_buf() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn dataset_path(&self) -> PathBuf {
        self.path("dataset.json")
    }

    pub fn checkpoint_name(stage: Stage) -> String {
        format!("ckpt-{}.json", stage.as_str())
    }

    pub fn checkpoint_path(&self, stage: Stage) -> PathBuf {
        self.path(&Self::checkpoint_name(stage))
    }

    /// The furthest stage with a checkpoint on disk.
    pub fn latest_checkpoint(&self) -> Option<Stage> {
        [Stage::Retrained, Stage::Clustered, Stage::Searched, Stage::Pretrained]
            .into_iter()
            .find(|&s| self.checkpoint_path(s).is_file())
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.path("manifest.json")
    }

    pub fn load_manifest(&self) -> Result<Manifest> {
        let path = self.manifest_path();
        if !path.is_file() {
            return Ok(Manifest {
                format: MANIFEST_FORMAT.into(),
                version: env!("CARGO_PKG_VERSION").into(),
                ..Manifest::default()
            });
        }
        let m: Manifest = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if m.format != MANIFEST_FORMAT {
            return Err(Error::Pipeline(format!("unrecognised manifest format `{}`", m.format)));
        }
        Ok(m)
    }

    pub fn save_manifest(&self, m: &Manifest) -> Result<()> {
        std::fs::write(self.manifest_path(), serde_json::to_string_pretty(m)? + "\n")?;
        Ok(())
    }

    /// Append one JSON record to `run.log`.
    pub fn log(&self, record: &serde_json::Value) -> Result<()> {
        let mut f = OpenOptions::new().create(true).append(true).open(self.path("run.log"))?;
        writeln!(f, "{}", serde_json::to_string(record)?)?;
        Ok(())
    }

    pub fn log_events(&self, events: &[EvalEvent]) -> Result<()> {
        for e in events {
            let mut v = serde_json::to_value(e)?;
            if let serde_json::Value::Object(map) = &mut v {
                map.insert("event".into(), "eval".into());
            }
            self.log(&v)?;
        }
        Ok(())
    }
}

/// Accumulates manifest changes for one command and writes them on `finish`.
pub struct Session {
    pub dir: RunDir,
    manifest: Manifest,
}

impl Session {
    pub fn open(dir: RunDir, command: &str) -> Result<Self> {
        let mut manifest = dir.load_manifest()?;
        manifest.commands.push(command.to_string());
        dir.log(&serde_json::json!({ "event": "command", "command": command }))?;
        Ok(Session { dir, manifest })
    }

    /// Record the resolved config in the manifest and echo it to the log.
    pub fn config(&mut self, config: &PipelineConfig) -> Result<()> {
        self.dir.log(&serde_json::json!({ "event": "config", "config": config }))?;
        self.manifest.seed = Some(config.seed);
        self.manifest.config = Some(config.clone());
        Ok(())
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let name = path
            .file_name()
            .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
        self.manifest.inputs.insert(name, sha256_file(path)?);
        Ok(())
    }

    /// Hash a file already written under the run directory.
    pub fn output(&mut self, name: &str) -> Result<()> {
        let hash = sha256_file(&self.dir.path(name))?;
        self.dir.log(&serde_json::json!({ "event": "output", "file": name, "sha256": hash }))?;
        self.manifest.outputs.insert(name.to_string(), hash);
        Ok(())
    }

    pub fn finish(self) -> Result<()> {
        self.dir.save_manifest(&self.manifest)
    }
}

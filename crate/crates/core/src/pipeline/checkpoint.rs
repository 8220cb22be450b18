use std::path::Path;

use serde::{Deserialize, Serialize};

use super::state::{PipelineState, Stage};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &str = "IHAS-CKPT-v1";

/// On-disk pipeline state with enough header to reject mismatched inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub magic: String,
    pub stage: Stage,
    pub schema_hash: String,
    pub seed: u64,
    /// Base-model embedding width per field.
    pub widths: Vec<usize>,
    pub state: PipelineState,
}

impl Checkpoint {
    pub fn new(state: PipelineState, schema_hash: impl Into<String>) -> Self {
        Checkpoint {
            magic: CHECKPOINT_MAGIC.to_string(),
            stage: state.stage,
            schema_hash: schema_hash.into(),
            seed: state.config.seed,
            widths: state.base.widths(),
            state,
        }
    }

    /// Check the header against the state and an expected schema hash.
    pub fn verify(&self, schema_hash: Option<&str>) -> Result<()> {
        if self.magic != CHECKPOINT_MAGIC {
            return Err(Error::Checkpoint(format!("bad magic `{}`", self.magic)));
        }
        if self.stage != self.state.stage {
            return Err(Error::Checkpoint("header stage disagrees with state".into()));
        }
        if self.widths != self.state.base.widths() {
            return Err(Error::Checkpoint("header widths disagree with the base model".into()));
        }
        if let Some(h) = schema_hash {
            if h != self.schema_hash {
                return Err(Error::Checkpoint("checkpoint was written for a different schema".into()));
            }
        }
        Ok(())
    }
}

pub fn save_checkpoint(path: &Path, state: &PipelineState, schema_hash: &str) -> Result<()> {
    let ckpt = Checkpoint::new(state.clone(), schema_hash);
    let f = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer(f, &ckpt)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path, schema_hash: Option<&str>) -> Result<Checkpoint> {
    let f = std::io::BufReader::new(std::fs::File::open(path)?);
    let ckpt: Checkpoint =
        serde_json::from_reader(f).map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))?;
    ckpt.verify(schema_hash)?;
    Ok(ckpt)
}

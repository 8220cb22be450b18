//! Dataset schema, vocabulary construction with rare-token grouping,
//! numerical binning, encoding, splitting and a planted-structure generator.

mod schema;
mod split;
mod synth;
mod vocab;

pub use schema::{bin_numeric, DatasetSchema, FieldKind, FieldSchema};
pub use split::{split_dataset, DatasetSplit};
pub use synth::{generate_synthetic, GroundTruth, GroupSpec, SynthSpec, SyntheticData};
pub use vocab::{build_vocab, encode, Encoder, FieldVocab, RawRow, RawTable, Vocabulary};

use serde::{Deserialize, Serialize};

/// One sample in index form: a category index per field plus a binary label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EncodedSample {
    pub fields: Vec<usize>,
    pub label: u8,
}

impl EncodedSample {
    pub fn new(fields: Vec<usize>, label: u8) -> Self {
        EncodedSample { fields, label }
    }

    #[inline]
    pub fn y(&self) -> f64 {
        f64::from(self.label)
    }
}

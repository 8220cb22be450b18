use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{
    build_vocab, split_dataset, DatasetSchema, EncodedSample, Encoder, RawTable, SyntheticData, Vocabulary,
};
use crate::error::{Error, Result};

/// Encoded train/validation/test splits with the vocabulary they were encoded under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedDataset {
    pub schema: DatasetSchema,
    pub vocab: Vocabulary,
    pub train: Vec<EncodedSample>,
    pub val: Vec<EncodedSample>,
    pub test: Vec<EncodedSample>,
}

impl EncodedDataset {
    /// Split raw rows, build the vocabulary on the training rows only, encode all splits.
    pub fn from_table(table: &RawTable, schema: &DatasetSchema, min_freq: usize, seed: u64) -> Result<Self> {
        schema.validate()?;
        if table.is_empty() {
            return Err(Error::EmptyDataset("input table has no rows".into()));
        }
        let split = split_dataset((0..table.len()).collect(), seed)?;
        let vocab = build_vocab(split.train.iter().map(|&i| table.row(i)), schema, min_freq)?;
        let enc = Encoder::new(schema, &vocab, &table.header)?;
        let encode = |idx: &[usize]| -> Result<Vec<EncodedSample>> {
            idx.iter().map(|&i| enc.encode(&table.rows[i])).collect()
        };
        Ok(EncodedDataset {
            train: encode(&split.train)?,
            val: encode(&split.val)?,
            test: encode(&split.test)?,
            schema: schema.clone(),
            vocab,
        })
    }

    /// Wrap planted data whose indices are already dense; every index is its own token.
    pub fn from_synthetic(data: &SyntheticData, vocab_sizes: &[usize], seed: u64) -> Result<Self> {
        use crate::data::FieldVocab;
        let split = split_dataset(data.samples.clone(), seed)?;
        let vocab = Vocabulary {
            fields: vocab_sizes
                .iter()
                .enumerate()
                .map(|(f, &v)| FieldVocab::from_tokens((0..v).map(|t| format!("f{f}_t{t}")).collect()))
                .collect(),
        };
        Ok(EncodedDataset {
            schema: data.schema(),
            vocab,
            train: split.train,
            val: split.val,
            test: split.test,
        })
    }

    pub fn vocab_sizes(&self) -> Vec<usize> {
        self.vocab.sizes()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer(f, self)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::io::BufReader::new(std::fs::File::open(path)?);
        Ok(serde_json::from_reader(f)?)
    }
}

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::schema::{bin_numeric, DatasetSchema, FieldKind, FieldSchema};
use super::EncodedSample;
use crate::error::{Error, Result};

/// Headered table of raw string values, as read from CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RawTable {
    pub fn from_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            rows.push(rec?.iter().map(str::to_string).collect());
        }
        Ok(RawTable { header, rows })
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> RawRow<'_> {
        RawRow {
            header: &self.header,
            values: &self.rows[i],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = RawRow<'_>> {
        self.rows.iter().map(|values| RawRow {
            header: &self.header,
            values,
        })
    }
}

/// A borrowed row addressed by column name.
#[derive(Debug, Clone, Copy)]
pub struct RawRow<'a> {
    pub header: &'a [String],
    pub values: &'a [String],
}

impl<'a> RawRow<'a> {
    pub fn get(&self, name: &str) -> Option<&'a str> {
        let pos = self.header.iter().position(|h| h == name)?;
        self.values.get(pos).map(String::as_str)
    }
}

fn missing(field: &str) -> Error {
    Error::Encoding {
        field: field.to_string(),
        message: "missing field".into(),
    }
}

/// Token string a raw value contributes for `field`.
fn token_for(raw: &str, field: &FieldSchema) -> Result<String> {
    let raw = raw.trim();
    match field.kind {
        FieldKind::Categorical => Ok(raw.to_string()),
        FieldKind::Numerical if raw.is_empty() => Ok(String::new()),
        FieldKind::Numerical => {
            let x: f64 = raw.parse().map_err(|_| Error::Encoding {
                field: field.name.clone(),
                message: format!("unparsable numerical value `{raw}`"),
            })?;
            Ok(bin_numeric(x, field)?.to_string())
        }
    }
}

/// Per-field token table: frequent tokens in first-seen order, then "others".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "FieldVocabRepr", into = "FieldVocabRepr")]
pub struct FieldVocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct FieldVocabRepr {
    tokens: Vec<String>,
}

impl From<FieldVocabRepr> for FieldVocab {
    fn from(r: FieldVocabRepr) -> Self {
        FieldVocab::from_tokens(r.tokens)
    }
}

impl From<FieldVocab> for FieldVocabRepr {
    fn from(v: FieldVocab) -> Self {
        FieldVocabRepr { tokens: v.tokens }
    }
}

impl FieldVocab {
    pub fn from_tokens(tokens: Vec<String>) -> Self {
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        FieldVocab { tokens, index }
    }

    /// Number of indices including the reserved "others" slot.
    pub fn size(&self) -> usize {
        self.tokens.len() + 1
    }

    pub fn others_index(&self) -> usize {
        self.tokens.len()
    }

    pub fn lookup(&self, token: &str) -> usize {
        self.index
            .get(token)
            .copied()
            .unwrap_or_else(|| self.others_index())
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub fields: Vec<FieldVocab>,
}

impl Vocabulary {
    pub fn sizes(&self) -> Vec<usize> {
        self.fields.iter().map(FieldVocab::size).collect()
    }
}

/// Count tokens per field and keep those seen at least `min_freq` times.
pub fn build_vocab<'a, I>(rows: I, schema: &DatasetSchema, min_freq: usize) -> Result<Vocabulary>
where
    I: IntoIterator<Item = RawRow<'a>>,
{
    let n = schema.num_fields();
    let mut order: Vec<Vec<String>> = vec![Vec::new(); n];
    let mut counts: Vec<HashMap<String, usize>> = vec![HashMap::new(); n];
    let mut seen_rows = 0usize;
    for row in rows {
        seen_rows += 1;
        for (f, field) in schema.fields.iter().enumerate() {
            let raw = row.get(&field.name).ok_or_else(|| missing(&field.name))?;
            let tok = token_for(raw, field)?;
            let c = counts[f].entry(tok.clone()).or_insert(0);
            if *c == 0 {
                order[f].push(tok);
            }
            *c += 1;
        }
    }
    if seen_rows == 0 {
        return Err(Error::EmptyDataset("no rows to build a vocabulary from".into()));
    }
    let fields = order
        .into_iter()
        .zip(&counts)
        .map(|(toks, cnt)| {
            FieldVocab::from_tokens(toks.into_iter().filter(|t| cnt[t] >= min_freq).collect())
        })
        .collect();
    Ok(Vocabulary { fields })
}

fn parse_label(raw: &str, name: &str) -> Result<u8> {
    match raw.trim() {
        "1" | "1.0" | "true" => Ok(1),
        "0" | "0.0" | "false" => Ok(0),
        other => Err(Error::Encoding {
            field: name.to_string(),
            message: format!("label `{other}` is not 0/1"),
        }),
    }
}

/// Encode one raw row. Rare and unseen tokens map to the field's "others" index.
pub fn encode(row: RawRow<'_>, schema: &DatasetSchema, vocab: &Vocabulary) -> Result<EncodedSample> {
    let mut fields = Vec::with_capacity(schema.num_fields());
    for (field, fv) in schema.fields.iter().zip(&vocab.fields) {
        let raw = row.get(&field.name).ok_or_else(|| missing(&field.name))?;
        fields.push(fv.lookup(&token_for(raw, field)?));
    }
    let label_raw = row.get(&schema.label).ok_or_else(|| missing(&schema.label))?;
    Ok(EncodedSample::new(fields, parse_label(label_raw, &schema.label)?))
}

/// Encoder with column positions resolved once against a header.
pub struct Encoder<'a> {
    schema: &'a DatasetSchema,
    vocab: &'a Vocabulary,
    columns: Vec<usize>,
    label_column: usize,
}

impl<'a> Encoder<'a> {
    pub fn new(schema: &'a DatasetSchema, vocab: &'a Vocabulary, header: &[String]) -> Result<Self> {
        let find = |name: &str| header.iter().position(|h| h == name).ok_or_else(|| missing(name));
        let columns = schema
            .fields
            .iter()
            .map(|f| find(&f.name))
            .collect::<Result<Vec<_>>>()?;
        Ok(Encoder {
            schema,
            vocab,
            columns,
            label_column: find(&schema.label)?,
        })
    }

    pub fn encode(&self, values: &[String]) -> Result<EncodedSample> {
        let fields = self
            .schema
            .fields
            .iter()
            .zip(&self.vocab.fields)
            .zip(&self.columns)
            .map(|((field, fv), &c)| {
                let raw = values.get(c).ok_or_else(|| missing(&field.name))?;
                Ok(fv.lookup(&token_for(raw, field)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let label = values
            .get(self.label_column)
            .ok_or_else(|| missing(&self.schema.label))?;
        Ok(EncodedSample::new(fields, parse_label(label, &self.schema.label)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(header: &[&str], rows: &[&[&str]]) -> RawTable {
        RawTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: rows
                .iter()
                .map(|r| r.iter().map(|s| s.to_string()).collect())
                .collect(),
        }
    }

    fn one_field_schema() -> DatasetSchema {
        DatasetSchema {
            label: "y".into(),
            fields: vec![FieldSchema::categorical("f")],
        }
    }

    #[test]
    fn rare_tokens_group_into_others() {
        let mut rows: Vec<Vec<String>> = Vec::new();
        for (tok, n) in [("a", 12), ("b", 3), ("c", 11)] {
            for _ in 0..n {
                rows.push(vec![tok.into(), "0".into()]);
            }
        }
        let t = RawTable {
            header: vec!["f".into(), "y".into()],
            rows,
        };
        let v = build_vocab(t.iter(), &one_field_schema(), 10).unwrap();
        let fv = &v.fields[0];
        assert_eq!(fv.size(), 3);
        assert_eq!(fv.lookup("a"), 0);
        assert_eq!(fv.lookup("c"), 1);
        assert_eq!(fv.lookup("b"), fv.others_index());
        assert_eq!(fv.others_index(), 2);
    }

    #[test]
    fn others_reserved_even_when_unused() {
        let rows: Vec<&[&str]> = vec![&["a", "1"]; 10];
        let t = table(&["f", "y"], &rows);
        let v = build_vocab(t.iter(), &one_field_schema(), 10).unwrap();
        assert_eq!(v.fields[0].size(), 2);
        assert!(t.iter().all(|r| encode(r, &one_field_schema(), &v).unwrap().fields[0] == 0));
    }

    #[test]
    fn empty_stream_is_an_error() {
        let t = table(&["f", "y"], &[]);
        assert!(matches!(
            build_vocab(t.iter(), &one_field_schema(), 10),
            Err(Error::EmptyDataset(_))
        ));
    }

    #[test]
    fn gender_example_and_fallbacks() {
        let schema = DatasetSchema {
            label: "click".into(),
            fields: vec![FieldSchema::categorical("gender")],
        };
        let vocab = Vocabulary {
            fields: vec![FieldVocab::from_tokens(vec![
                "male".into(),
                "female".into(),
                "unknown".into(),
            ])],
        };
        assert_eq!(vocab.fields[0].others_index(), 3);
        let t = table(&["gender", "click"], &[&["male", "1"], &["zzz", "0"]]);
        let a = encode(t.row(0), &schema, &vocab).unwrap();
        assert_eq!(a, EncodedSample::new(vec![0], 1));
        let b = encode(t.row(1), &schema, &vocab).unwrap();
        assert_eq!(b, EncodedSample::new(vec![3], 0));

        let enc = Encoder::new(&schema, &vocab, &t.header).unwrap();
        assert_eq!(enc.encode(&t.rows[0]).unwrap(), a);
    }

    #[test]
    fn missing_field_names_the_field() {
        let schema = DatasetSchema {
            label: "y".into(),
            fields: vec![FieldSchema::categorical("site_id")],
        };
        let vocab = Vocabulary {
            fields: vec![FieldVocab::from_tokens(vec![])],
        };
        let t = table(&["other", "y"], &[&["x", "1"]]);
        let err = encode(t.row(0), &schema, &vocab).unwrap_err();
        assert!(err.to_string().contains("site_id"));
        assert!(Encoder::new(&schema, &vocab, &t.header).is_err());
    }

    #[test]
    fn numerical_fields_tokenize_by_bin() {
        let schema = DatasetSchema {
            label: "y".into(),
            fields: vec![FieldSchema::numerical("n")],
        };
        let vals = ["7.5", "8", "1", "", "1"];
        let rows: Vec<Vec<String>> = vals.iter().map(|v| vec![v.to_string(), "0".into()]).collect();
        let t = RawTable {
            header: vec!["n".into(), "y".into()],
            rows,
        };
        let v = build_vocab(t.iter(), &schema, 1).unwrap();
        // 7.5 and 8 share bin 4; 1 and the missing value are their own tokens.
        assert_eq!(v.fields[0].tokens(), &["4", "1", ""]);
        let bad = table(&["n", "y"], &[&["abc", "0"]]);
        assert!(encode(bad.row(0), &schema, &v).is_err());
    }

    #[test]
    fn csv_reader_parses_header() {
        let t = RawTable::from_reader("f,y\na,1\nb,0\n".as_bytes()).unwrap();
        assert_eq!(t.header, vec!["f", "y"]);
        assert_eq!(t.len(), 2);
        assert_eq!(t.row(1).get("f"), Some("b"));
    }

    proptest! {
        #[test]
        fn encoding_is_total_and_in_range(tokens in proptest::collection::vec(0u8..20, 1..200), min_freq in 1usize..6) {
            let rows: Vec<Vec<String>> = tokens.iter().map(|t| vec![format!("t{t}"), "1".into()]).collect();
            let t = RawTable { header: vec!["f".into(), "y".into()], rows };
            let schema = one_field_schema();
            let v = build_vocab(t.iter(), &schema, min_freq).unwrap();
            let again = build_vocab(t.iter(), &schema, min_freq).unwrap();
            prop_assert_eq!(&v, &again);
            for r in t.iter() {
                let s = encode(r, &schema, &v).unwrap();
                prop_assert!(s.fields[0] < v.fields[0].size());
            }
        }
    }
}

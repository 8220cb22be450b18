use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Categorical,
    Numerical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSchema {
    pub name: String,
    pub kind: FieldKind,
    /// Optional custom-width bin edges applied after the log-square transform.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bin_edges: Option<Vec<f64>>,
}

impl FieldSchema {
    pub fn categorical(name: impl Into<String>) -> Self {
        FieldSchema {
            name: name.into(),
            kind: FieldKind::Categorical,
            bin_edges: None,
        }
    }

    pub fn numerical(name: impl Into<String>) -> Self {
        FieldSchema {
            name: name.into(),
            kind: FieldKind::Numerical,
            bin_edges: None,
        }
    }
}

/// Field list plus the name of the label column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub label: String,
    pub fields: Vec<FieldSchema>,
}

const AVAZU_FIELDS: [&str; 22] = [
    "hour",
    "C1",
    "banner_pos",
    "site_id",
    "site_domain",
    "site_category",
    "app_id",
    "app_domain",
    "app_category",
    "device_id",
    "device_ip",
    "device_model",
    "device_type",
    "device_conn_type",
    "C14",
    "C15",
    "C16",
    "C17",
    "C18",
    "C19",
    "C20",
    "C21",
];

impl DatasetSchema {
    /// Avazu click logs: 22 categorical fields, label column `click`.
    pub fn avazu() -> Self {
        DatasetSchema {
            label: "click".into(),
            fields: AVAZU_FIELDS
                .iter()
                .map(|n| FieldSchema::categorical(*n))
                .collect(),
        }
    }

    /// Criteo display ads: 13 numerical and 26 categorical fields, label column `label`.
    pub fn criteo() -> Self {
        let mut fields: Vec<FieldSchema> = (1..=13)
            .map(|i| FieldSchema::numerical(format!("I{i}")))
            .collect();
        fields.extend((1..=26).map(|i| FieldSchema::categorical(format!("C{i}"))));
        DatasetSchema {
            label: "label".into(),
            fields,
        }
    }

    pub fn num_fields(&self) -> usize {
        self.fields.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.fields.is_empty() {
            return Err(Error::config("fields", "schema declares no fields"));
        }
        for f in &self.fields {
            if f.name == self.label {
                return Err(Error::config(&f.name, "field shares the label column name"));
            }
            if let Some(edges) = &f.bin_edges {
                if f.kind != FieldKind::Numerical {
                    return Err(Error::config(&f.name, "bin_edges on a categorical field"));
                }
                if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::config(
                        &f.name,
                        "bin_edges must be at least two strictly increasing values",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let schema: DatasetSchema =
            toml::from_str(text).map_err(|e| Error::config("schema", e.to_string()))?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("schema serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Stable content hash used to tie checkpoints to a schema.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(serde_json::to_vec(self).expect("schema serializes")))
    }
}

/// Map a numerical value to its bin label.
///
/// Values above 2 are replaced by `floor((ln x)^2)`. With bin edges the
/// result is the bin index (clamped at both ends); otherwise the integer
/// part of the value is itself the bin label.
pub fn bin_numeric(x: f64, field: &FieldSchema) -> Result<i64> {
    if field.kind != FieldKind::Numerical {
        return Err(Error::Encoding {
            field: field.name.clone(),
            message: "bin_numeric on a categorical field".into(),
        });
    }
    if x.is_nan() {
        return Err(Error::Encoding {
            field: field.name.clone(),
            message: "NaN numerical value".into(),
        });
    }
    let v = if x > 2.0 { x.ln().powi(2).floor() } else { x };
    match &field.bin_edges {
        Some(edges) => {
            let bins = edges.len() - 1;
            let above = edges.iter().take_while(|&&e| e <= v).count();
            Ok(above.saturating_sub(1).min(bins - 1) as i64)
        }
        None => Ok(v.floor() as i64),
    }
}

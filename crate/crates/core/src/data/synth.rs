use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::schema::{DatasetSchema, FieldSchema};
use super::EncodedSample;
use crate::error::{Error, Result};
use crate::numeric::{sigmoid, RngStream};

/// One latent sample group of the planted generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    /// Fields whose tokens enter this group's logistic score.
    pub relevant_fields: Vec<usize>,
    #[serde(default)]
    pub intercept: f64,
    /// Relative sampling weight.
    #[serde(default = "one")]
    pub weight: f64,
}

fn one() -> f64 {
    1.0
}

/// Planted-structure configuration.
///
/// Fields relevant to exactly one group draw tokens from a per-group slice
/// of their vocabulary (when `disjoint_group_tokens` is set), so the group is
/// recoverable from those fields. Fields shared by several groups draw from
/// the whole vocabulary, with the coefficient ordering reversed for every
/// other sharing group. Fields relevant to no group draw uniformly from their
/// whole vocabulary, independent of group and label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub vocab_sizes: Vec<usize>,
    pub groups: Vec<GroupSpec>,
    pub coef_scale: f64,
    /// Added to every nonzero coefficient, shifting relevant tokens off zero.
    #[serde(default)]
    pub coef_offset: f64,
    pub num_samples: usize,
    #[serde(default = "yes")]
    pub disjoint_group_tokens: bool,
}

fn yes() -> bool {
    true
}

impl SynthSpec {
    pub fn num_fields(&self) -> usize {
        self.vocab_sizes.len()
    }

    /// Two groups over ten fields: group 0 scores on fields 0-3, group 1 on
    /// fields 4-7. Fields 8 and 9 are high-cardinality noise.
    pub fn two_group_default(num_samples: usize) -> Self {
        SynthSpec {
            vocab_sizes: vec![20, 20, 20, 20, 20, 20, 20, 20, 1000, 1000],
            groups: vec![
                GroupSpec {
                    relevant_fields: vec![0, 1, 2, 3],
                    intercept: 2.0,
                    weight: 1.0,
                },
                GroupSpec {
                    relevant_fields: vec![4, 5, 6, 7],
                    intercept: -2.0,
                    weight: 1.0,
                },
            ],
            coef_scale: 1.5,
            coef_offset: 0.0,
            num_samples,
            disjoint_group_tokens: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.vocab_sizes.is_empty() {
            return Err(Error::config("vocab_sizes", "no fields"));
        }
        if self.groups.is_empty() {
            return Err(Error::config("groups", "no groups"));
        }
        let g = self.groups.len();
        for (i, grp) in self.groups.iter().enumerate() {
            if grp.relevant_fields.is_empty() {
                return Err(Error::config(
                    format!("groups[{i}].relevant_fields"),
                    "group has no relevant fields",
                ));
            }
            if let Some(&f) = grp.relevant_fields.iter().find(|&&f| f >= self.num_fields()) {
                return Err(Error::config(
                    format!("groups[{i}].relevant_fields"),
                    format!("field {f} out of range"),
                ));
            }
            if !(grp.weight > 0.0) {
                return Err(Error::config(format!("groups[{i}].weight"), "must be positive"));
            }
        }
        for (f, &v) in self.vocab_sizes.iter().enumerate() {
            let min = if self.disjoint_group_tokens && self.sharing_groups(f) == 1 { g } else { 1 };
            if v < min {
                return Err(Error::config(
                    format!("vocab_sizes[{f}]"),
                    format!("needs at least {min} tokens"),
                ));
            }
        }
        if self.num_samples == 0 {
            return Err(Error::config("num_samples", "must be positive"));
        }
        Ok(())
    }

    fn sharing_groups(&self, f: usize) -> usize {
        self.groups.iter().filter(|g| g.relevant_fields.contains(&f)).count()
    }

    /// Token range `[lo, hi)` group `g` draws from in field `f`.
    fn token_range(&self, g: usize, f: usize) -> (usize, usize) {
        let v = self.vocab_sizes[f];
        if self.disjoint_group_tokens && self.sharing_groups(f) == 1 {
            let k = self.groups.len();
            (g * v / k, (g + 1) * v / k)
        } else {
            (0, v)
        }
    }

    /// Score contribution of token `t` in field `f` for group `g`: evenly
    /// spaced in `[-scale, scale]` over the group's token range, so each
    /// field's contribution is symmetric about zero. On a shared field the
    /// spacing runs downward for every second sharing group. `coef_offset`
    /// is added on top.
    pub fn coefficient(&self, g: usize, f: usize, t: usize) -> f64 {
        if !self.groups[g].relevant_fields.contains(&f) {
            return 0.0;
        }
        let (lo, hi) = self.token_range(g, f);
        if t < lo || t >= hi || hi - lo < 2 {
            return 0.0;
        }
        let r = (t - lo) as f64 / (hi - lo - 1) as f64;
        let rank = (0..g).filter(|&h| self.groups[h].relevant_fields.contains(&f)).count();
        let sign = if rank % 2 == 0 { 1.0 } else { -1.0 };
        sign * self.coef_scale * (2.0 * r - 1.0) + self.coef_offset
    }

    pub fn score(&self, g: usize, fields: &[usize]) -> f64 {
        self.groups[g].intercept
            + fields
                .iter()
                .enumerate()
                .map(|(f, &t)| self.coefficient(g, f, t))
                .sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub group_of: Vec<usize>,
    pub relevant_fields: Vec<Vec<usize>>,
}

impl GroundTruth {
    /// Fields relevant to no group.
    pub fn noise_fields(&self, num_fields: usize) -> Vec<usize> {
        (0..num_fields)
            .filter(|f| !self.relevant_fields.iter().any(|r| r.contains(f)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub samples: Vec<EncodedSample>,
    pub truth: GroundTruth,
}

pub fn generate_synthetic(spec: &SynthSpec, rng: &mut RngStream) -> Result<SyntheticData> {
    spec.validate()?;
    let total_w: f64 = spec.groups.iter().map(|g| g.weight).sum();
    let mut samples = Vec::with_capacity(spec.num_samples);
    let mut group_of = Vec::with_capacity(spec.num_samples);
    for _ in 0..spec.num_samples {
        let mut u = rng.uniform() * total_w;
        let mut g = spec.groups.len() - 1;
        for (i, grp) in spec.groups.iter().enumerate() {
            if u < grp.weight {
                g = i;
                break;
            }
            u -= grp.weight;
        }
        let fields: Vec<usize> = (0..spec.num_fields())
            .map(|f| {
                let (lo, hi) = spec.token_range(g, f);
                lo + rng.below(hi - lo)
            })
            .collect();
        let label = u8::from(rng.bernoulli(sigmoid(spec.score(g, &fields))));
        samples.push(EncodedSample::new(fields, label));
        group_of.push(g);
    }
    Ok(SyntheticData {
        samples,
        truth: GroundTruth {
            group_of,
            relevant_fields: spec.groups.iter().map(|g| g.relevant_fields.clone()).collect(),
        },
    })
}

impl SyntheticData {
    /// Schema matching [`SyntheticData::write_csv`]: fields `f0..`, label `label`.
    pub fn schema(&self) -> DatasetSchema {
        let n = self.samples.first().map_or(0, |s| s.fields.len());
        DatasetSchema {
            label: "label".into(),
            fields: (0..n).map(|f| FieldSchema::categorical(format!("f{f}"))).collect(),
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        let schema = self.schema();
        let header: Vec<&str> = schema.fields.iter().map(|f| f.name.as_str()).collect();
        writeln!(w, "{},label", header.join(","))?;
        for s in &self.samples {
            let toks: Vec<String> = s
                .fields
                .iter()
                .enumerate()
                .map(|(f, t)| format!("f{f}_t{t}"))
                .collect();
            writeln!(w, "{},{}", toks.join(","), s.label)?;
        }
        w.flush()?;
        Ok(())
    }
}

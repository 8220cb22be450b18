use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplit<T> {
    pub train: Vec<T>,
    pub val: Vec<T>,
    pub test: Vec<T>,
}

/// Seeded shuffle followed by a contiguous 80/10/10 cut.
pub fn split_dataset<T>(items: Vec<T>, seed: u64) -> Result<DatasetSplit<T>> {
    let n = items.len();
    if n < 10 {
        return Err(Error::EmptyDataset(format!(
            "need at least 10 samples to split, got {n}"
        )));
    }
    let n_train = (n as f64 * 0.8).round() as usize;
    let n_val = (n as f64 * 0.1).round() as usize;
    let perm = RngStream::new(seed).permutation(n);
    let mut slots: Vec<Option<T>> = items.into_iter().map(Some).collect();
    let mut ordered = perm.into_iter().map(|i| slots[i].take().expect("permutation"));
    let train = ordered.by_ref().take(n_train).collect();
    let val = ordered.by_ref().take(n_val).collect();
    let test = ordered.collect();
    Ok(DatasetSplit { train, val, test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hundred_splits_80_10_10() {
        let s = split_dataset((0..100).collect::<Vec<_>>(), 1).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (80, 10, 10));
    }

    #[test]
    fn deterministic_by_seed() {
        let a = split_dataset((0..57).collect::<Vec<_>>(), 4).unwrap();
        let b = split_dataset((0..57).collect::<Vec<_>>(), 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn too_few_samples() {
        assert!(split_dataset(vec![1, 2, 3], 0).is_err());
    }

    proptest! {
        #[test]
        fn split_is_a_partition(n in 10usize..400, seed in any::<u64>()) {
            let s = split_dataset((0..n).collect::<Vec<_>>(), seed).unwrap();
            let expect = |f: f64| (n as f64 * f).round() as i64;
            prop_assert!((s.train.len() as i64 - expect(0.8)).abs() <= 1);
            prop_assert!((s.val.len() as i64 - expect(0.1)).abs() <= 1);
            prop_assert!((s.test.len() as i64 - expect(0.1)).abs() <= 1);
            let mut all: Vec<usize> = s.train.iter().chain(&s.val).chain(&s.test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        }
    }
}

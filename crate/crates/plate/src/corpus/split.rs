use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::CorpusError;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<String>,
    pub test: Vec<String>,
}

/// Seeded shuffle, then the first `test_count` ids form the test set.
/// Both halves are returned in ascending id order.
pub fn split_dataset(ids: &[String], test_count: usize, seed: u64) -> Result<DatasetSplit, CorpusError> {
    if test_count > ids.len() {
        return Err(CorpusError::TestCountTooLarge {
            test_count,
            available: ids.len(),
        });
    }
    let mut shuffled = ids.to_vec();
    shuffled.sort();
    shuffled.shuffle(&mut rng::seeded(seed));
    let mut test = shuffled[..test_count].to_vec();
    let mut train = shuffled[test_count..].to_vec();
    test.sort();
    train.sort();
    Ok(DatasetSplit { train, test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("img_{i:04}")).collect()
    }

    #[test]
    fn kaggle_sized_split() {
        let s = split_dataset(&ids(433), 22, 5).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (411, 22));
        assert_eq!(s, split_dataset(&ids(433), 22, 5).unwrap());
    }

    #[test]
    fn empty_and_oversized() {
        let s = split_dataset(&[], 0, 1).unwrap();
        assert!(s.train.is_empty() && s.test.is_empty());
        assert!(matches!(
            split_dataset(&ids(3), 4, 1),
            Err(CorpusError::TestCountTooLarge { test_count: 4, available: 3 })
        ));
    }

    proptest! {
        #[test]
        fn partitions_ids(n in 0usize..80, frac in 0.0f64..=1.0, seed: u64) {
            let all = ids(n);
            let test_count = (n as f64 * frac) as usize;
            let s = split_dataset(&all, test_count, seed).unwrap();
            let train: BTreeSet<_> = s.train.iter().collect();
            let test: BTreeSet<_> = s.test.iter().collect();
            prop_assert!(train.is_disjoint(&test));
            let union: BTreeSet<_> = train.union(&test).cloned().collect();
            prop_assert_eq!(union, all.iter().collect::<BTreeSet<_>>());
            prop_assert_eq!(s.test.len(), test_count);
        }
    }
}

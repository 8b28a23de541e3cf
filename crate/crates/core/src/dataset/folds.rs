//! Stratified fold assignment.
//!
//! Each class's members are shuffled with a ChaCha8 stream seeded from the
//! plan seed, then dealt round-robin into folds. The deal position carries
//! over from one class to the next, so leftover samples of different classes
//! land in different folds and fold sizes stay balanced overall.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub k: usize,
    pub assignment: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &f)| f == fold)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &f)| f != fold)
            .map(|(i, _)| i)
            .collect()
    }
}

pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Config(format!("fold count must be at least 2, got {k}")));
    }
    let n_classes = labels.iter().max().map_or(0, |&m| m + 1);
    let mut members = vec![Vec::new(); n_classes];
    for (i, &l) in labels.iter().enumerate() {
        members[l].push(i);
    }
    for (class, m) in members.iter().enumerate() {
        // Ids absent from the label vector are not classes of this sample set.
        if !m.is_empty() && m.len() < k {
            return Err(Error::ClassTooSmall { class, count: m.len(), k });
        }
    }
    if labels.is_empty() {
        return Err(Error::Empty("label vector".into()));
    }

    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for (class, mut m) in members.into_iter().enumerate() {
        let mut rng = rng_from_seed(derive_seed(seed, &[class as u64]));
        m.shuffle(&mut rng);
        for i in m {
            assignment[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldPlan { k, assignment, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn per_fold(plan: &FoldPlan, labels: &[usize], class: usize) -> Vec<usize> {
        let mut counts = vec![0; plan.k];
        for (i, &f) in plan.assignment.iter().enumerate() {
            if labels[i] == class {
                counts[f] += 1;
            }
        }
        counts
    }

    #[test]
    fn db1_shape() {
        let labels: Vec<usize> = [(0, 126), (1, 500), (2, 500)]
            .iter()
            .flat_map(|&(c, n)| std::iter::repeat_n(c, n))
            .collect();
        let plan = stratified_kfold(&labels, 5, 0).unwrap();
        let mut covid = per_fold(&plan, &labels, 0);
        covid.sort();
        assert_eq!(covid, vec![25, 25, 25, 25, 26]);
        assert_eq!(per_fold(&plan, &labels, 1), vec![100; 5]);
        assert_eq!(per_fold(&plan, &labels, 2), vec![100; 5]);
    }

    #[test]
    fn two_by_two() {
        let labels = [0, 0, 1, 1];
        let plan = stratified_kfold(&labels, 2, 3).unwrap();
        for f in 0..2 {
            let mut got: Vec<usize> = plan.test_indices(f).iter().map(|&i| labels[i]).collect();
            got.sort();
            assert_eq!(got, vec![0, 1]);
        }
    }

    #[test]
    fn deterministic() {
        let labels: Vec<usize> = (0..40).map(|i| i % 3).collect();
        assert_eq!(stratified_kfold(&labels, 4, 9).unwrap(), stratified_kfold(&labels, 4, 9).unwrap());
    }

    #[test]
    fn rejects_small_class_and_k_one() {
        assert!(matches!(
            stratified_kfold(&[0, 0, 0, 1], 2, 0),
            Err(Error::ClassTooSmall { class: 1, count: 1, k: 2 })
        ));
        assert!(matches!(stratified_kfold(&[0, 1], 1, 0), Err(Error::Config(_))));
    }

    proptest! {
        #[test]
        fn disjoint_cover_and_balance(
            sizes in prop::collection::vec(5usize..40, 2..5),
            k in 2usize..6,
            seed in any::<u64>(),
        ) {
            let labels: Vec<usize> = sizes.iter().enumerate()
                .flat_map(|(c, &n)| std::iter::repeat_n(c, n)).collect();
            let plan = stratified_kfold(&labels, k, seed).unwrap();
            let mut seen = vec![0; labels.len()];
            for f in 0..k {
                let test = plan.test_indices(f);
                prop_assert!(!test.is_empty());
                for i in test { seen[i] += 1; }
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
            for c in 0..sizes.len() {
                let counts = per_fold(&plan, &labels, c);
                prop_assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
            }
        }
    }
}

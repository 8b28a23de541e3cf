//! Decision-level fusion by hard-label majority voting.
//!
//! Per sample, the label with the most votes wins. Ties between labels are
//! broken by the mean confidence of the voters backing each tied label, and
//! any remaining tie by fixed voter priority: softmax, then RBF SVM, then
//! polynomial SVM. With two voters "majority" reduces to agreement, and a
//! disagreement is always settled by the tie rules.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Declaration order is voting priority (earlier wins residual ties).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VoterId {
    Softmax,
    SvmRbf,
    SvmPoly,
}

impl VoterId {
    pub const ALL: [VoterId; 3] = [VoterId::Softmax, VoterId::SvmRbf, VoterId::SvmPoly];

    pub fn as_str(self) -> &'static str {
        match self {
            VoterId::Softmax => "softmax",
            VoterId::SvmRbf => "svm_rbf",
            VoterId::SvmPoly => "svm_poly",
        }
    }
}

impl fmt::Display for VoterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoterOutput {
    pub voter: VoterId,
    pub labels: Vec<usize>,
    /// Per-sample confidence in `[0, 1]`.
    pub confidence: Vec<f64>,
}

impl VoterOutput {
    pub fn new(voter: VoterId, labels: Vec<usize>, confidence: Vec<f64>) -> Result<Self> {
        if labels.len() != confidence.len() {
            return Err(Error::LengthMismatch {
                context: format!("{voter} labels vs confidences"),
                left: labels.len(),
                right: confidence.len(),
            });
        }
        if let Some(c) = confidence.iter().find(|c| !(0.0..=1.0).contains(*c)) {
            return Err(Error::Config(format!("{voter} confidence {c} outside [0, 1]")));
        }
        Ok(VoterOutput { voter, labels, confidence })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FusionStrategy {
    /// RBF + polynomial SVM
    F1,
    /// softmax + RBF SVM
    F2,
    /// softmax + polynomial SVM
    F3,
    /// all three
    F4,
}

impl FusionStrategy {
    pub const ALL: [FusionStrategy; 4] = [FusionStrategy::F1, FusionStrategy::F2, FusionStrategy::F3, FusionStrategy::F4];

    pub fn members(self) -> &'static [VoterId] {
        match self {
            FusionStrategy::F1 => &[VoterId::SvmRbf, VoterId::SvmPoly],
            FusionStrategy::F2 => &[VoterId::Softmax, VoterId::SvmRbf],
            FusionStrategy::F3 => &[VoterId::Softmax, VoterId::SvmPoly],
            FusionStrategy::F4 => &[VoterId::Softmax, VoterId::SvmRbf, VoterId::SvmPoly],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FusionStrategy::F1 => "fusion1",
            FusionStrategy::F2 => "fusion2",
            FusionStrategy::F3 => "fusion3",
            FusionStrategy::F4 => "fusion4",
        }
    }
}

impl fmt::Display for FusionStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn majority_vote(outputs: &[VoterOutput], strategy: FusionStrategy) -> Result<Vec<usize>> {
    // Members in priority order, independent of input order.
    let voters = strategy
        .members()
        .iter()
        .map(|&id| {
            outputs
                .iter()
                .find(|o| o.voter == id)
                .ok_or_else(|| Error::VoterMissing(id.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = voters[0].labels.len();
    for v in &voters {
        if v.labels.len() != n {
            return Err(Error::LengthMismatch {
                context: format!("{} vs {} predictions", voters[0].voter, v.voter),
                left: n,
                right: v.labels.len(),
            });
        }
    }
    Ok((0..n).map(|i| fuse_sample(&voters, i)).collect())
}

fn fuse_sample(voters: &[&VoterOutput], i: usize) -> usize {
    // label -> (votes, summed confidence, best priority rank)
    let mut tally: BTreeMap<usize, (usize, f64, usize)> = BTreeMap::new();
    for (rank, v) in voters.iter().enumerate() {
        let e = tally.entry(v.labels[i]).or_insert((0, 0.0, rank));
        e.0 += 1;
        e.1 += v.confidence[i];
        e.2 = e.2.min(rank);
    }
    tally
        .into_iter()
        .max_by(|(_, a), (_, b)| {
            a.0.cmp(&b.0)
                .then((a.1 / a.0 as f64).total_cmp(&(b.1 / b.0 as f64)))
                .then(b.2.cmp(&a.2))
        })
        .map(|(label, _)| label)
        .expect("at least one voter")
}

pub fn fuse_all_strategies(outputs: &[VoterOutput]) -> Result<BTreeMap<FusionStrategy, Vec<usize>>> {
    FusionStrategy::ALL
        .iter()
        .map(|&s| Ok((s, majority_vote(outputs, s)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn out(voter: VoterId, labels: &[usize], conf: &[f64]) -> VoterOutput {
        VoterOutput::new(voter, labels.to_vec(), conf.to_vec()).unwrap()
    }

    fn three(a: usize, b: usize, c: usize, conf: [f64; 3]) -> Vec<VoterOutput> {
        vec![
            out(VoterId::Softmax, &[a], &[conf[0]]),
            out(VoterId::SvmRbf, &[b], &[conf[1]]),
            out(VoterId::SvmPoly, &[c], &[conf[2]]),
        ]
    }

    #[test]
    fn strict_majority() {
        assert_eq!(majority_vote(&three(0, 0, 1, [0.1, 0.1, 1.0]), FusionStrategy::F4).unwrap(), vec![0]);
    }

    #[test]
    fn three_way_split_goes_to_most_confident() {
        assert_eq!(majority_vote(&three(0, 1, 2, [0.9, 0.8, 0.7]), FusionStrategy::F4).unwrap(), vec![0]);
        assert_eq!(majority_vote(&three(0, 1, 2, [0.2, 0.8, 0.7]), FusionStrategy::F4).unwrap(), vec![1]);
    }

    #[test]
    fn equal_confidence_falls_back_to_priority() {
        let o = three(0, 1, 2, [0.6, 0.6, 0.6]);
        assert_eq!(majority_vote(&o, FusionStrategy::F2).unwrap(), vec![0]);
        assert_eq!(majority_vote(&o, FusionStrategy::F1).unwrap(), vec![1]);
        assert_eq!(majority_vote(&o, FusionStrategy::F4).unwrap(), vec![0]);
    }

    #[test]
    fn missing_voter_and_length_mismatch() {
        let o = vec![out(VoterId::Softmax, &[0], &[1.0]), out(VoterId::SvmRbf, &[0], &[1.0])];
        assert!(matches!(majority_vote(&o, FusionStrategy::F3), Err(Error::VoterMissing(v)) if v == "svm_poly"));
        let o = vec![out(VoterId::Softmax, &[0, 1], &[1.0, 1.0]), out(VoterId::SvmRbf, &[0], &[1.0])];
        assert!(matches!(majority_vote(&o, FusionStrategy::F2), Err(Error::LengthMismatch { .. })));
        assert!(VoterOutput::new(VoterId::Softmax, vec![0], vec![1.5]).is_err());
    }

    #[test]
    fn all_strategies_agree_with_unanimous_voters() {
        let labels = [2, 0, 1, 1];
        let c = [0.5; 4];
        let o: Vec<_> = VoterId::ALL.iter().map(|&v| out(v, &labels, &c)).collect();
        let fused = fuse_all_strategies(&o).unwrap();
        assert_eq!(fused.len(), 4);
        assert!(fused.values().all(|l| l == &labels));
    }

    #[test]
    fn copies_of_softmax() {
        let labels = [2, 0, 1];
        let o = vec![
            out(VoterId::Softmax, &labels, &[0.9, 0.4, 0.7]),
            out(VoterId::SvmRbf, &labels, &[0.5, 1.0, 0.5]),
            out(VoterId::SvmPoly, &labels, &[0.0, 0.5, 1.0]),
        ];
        let fused = fuse_all_strategies(&o).unwrap();
        for s in [FusionStrategy::F2, FusionStrategy::F3, FusionStrategy::F4] {
            assert_eq!(fused[&s], labels);
        }
    }

    proptest! {
        #[test]
        fn order_free_and_only_voted_labels(
            votes in prop::collection::vec((0usize..4, 0usize..4, 0usize..4), 1..20),
            conf in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0), 20),
        ) {
            let n = votes.len();
            let mk = |id, f: &dyn Fn(&(usize, usize, usize)) -> usize, g: &dyn Fn(&(f64, f64, f64)) -> f64| {
                VoterOutput::new(id, votes.iter().map(f).collect(), conf[..n].iter().map(g).collect()).unwrap()
            };
            let outputs = vec![
                mk(VoterId::Softmax, &|v| v.0, &|c| c.0),
                mk(VoterId::SvmRbf, &|v| v.1, &|c| c.1),
                mk(VoterId::SvmPoly, &|v| v.2, &|c| c.2),
            ];
            let reversed: Vec<_> = outputs.iter().rev().cloned().collect();
            let a = fuse_all_strategies(&outputs).unwrap();
            let b = fuse_all_strategies(&reversed).unwrap();
            prop_assert_eq!(&a, &b);
            for (s, fused) in &a {
                for (i, &l) in fused.iter().enumerate() {
                    let voted: Vec<usize> = s.members().iter().map(|m| match m {
                        VoterId::Softmax => votes[i].0,
                        VoterId::SvmRbf => votes[i].1,
                        VoterId::SvmPoly => votes[i].2,
                    }).collect();
                    prop_assert!(voted.contains(&l));
                    if voted.iter().all(|&v| v == voted[0]) {
                        prop_assert_eq!(l, voted[0]);
                    }
                }
            }
        }
    }
}

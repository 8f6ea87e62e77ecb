use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// One positive and one negative subject held out together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub positive: usize,
    pub negative: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub splits: Vec<Split>,
    pub subjects: usize,
}

impl SplitPlan {
    pub fn len(&self) -> usize {
        self.splits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.splits.is_empty()
    }

    pub fn test(&self, k: usize) -> [usize; 2] {
        [self.splits[k].positive, self.splits[k].negative]
    }

    /// Every subject outside split `k`'s test pair.
    pub fn train(&self, k: usize) -> Vec<usize> {
        let t = self.test(k);
        (0..self.subjects).filter(|i| !t.contains(i)).collect()
    }

    /// How many test sets contain each subject.
    pub fn appearances(&self) -> Vec<usize> {
        let mut c = vec![0; self.subjects];
        for s in &self.splits {
            c[s.positive] += 1;
            c[s.negative] += 1;
        }
        c
    }
}

/// Paired leave-one-out: every majority-class subject is tested once, in a
/// seeded order, and the shuffled minority class is cycled alongside it.
/// Positives count as the majority on a tie.
pub fn make_loocv_splits(labels: &[bool], seed: u64) -> Result<SplitPlan> {
    let mut pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let mut neg: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Domain(
            "leave-one-out splits need subjects of both classes".to_string(),
        ));
    }
    pos.shuffle(&mut rng::stream(seed, &[0x73706c, 1]));
    neg.shuffle(&mut rng::stream(seed, &[0x73706c, 0]));
    let splits = if pos.len() >= neg.len() {
        pos.iter()
            .enumerate()
            .map(|(i, &p)| Split {
                positive: p,
                negative: neg[i % neg.len()],
            })
            .collect()
    } else {
        neg.iter()
            .enumerate()
            .map(|(i, &n)| Split {
                positive: pos[i % pos.len()],
                negative: n,
            })
            .collect()
    };
    Ok(SplitPlan {
        splits,
        subjects: labels.len(),
    })
}

//! C4.5-style decision tree induction over numeric attributes.
//!
//! Every split is binary (`value <= threshold` goes left). Candidate
//! thresholds are midpoints between consecutive distinct values. Among the
//! candidates whose information gain is at least the mean gain of all
//! candidates at the node, the largest gain ratio wins; ties go to the lowest
//! attribute index, then the lowest threshold.

use super::info::{midpoint, score_partition, SplitCandidate};
use super::prune::prune_tree;
use super::{majority, ClassifierError, Prediction};
use crate::stroke::SkillClass;
use crate::windowing::Dataset;

/// Slack used when comparing gains and gain ratios.
pub const SCORE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct C45Params {
    /// Minimum instances on each side of a split.
    pub min_leaf: usize,
    pub prune: bool,
    /// Confidence factor for pessimistic pruning.
    pub cf: f64,
}

impl Default for C45Params {
    fn default() -> Self {
        C45Params { min_leaf: 2, prune: true, cf: 0.25 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Internal { attribute: usize, threshold: f64, left: Box<TreeNode>, right: Box<TreeNode> },
    Leaf { class_counts: Vec<usize>, majority: usize },
}

impl TreeNode {
    pub fn node_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Internal { left, right, .. } => 1 + left.node_count() + right.node_count(),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Internal { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    /// Leaf reached by `features`.
    pub fn route(&self, features: &[f64]) -> &TreeNode {
        let mut node = self;
        while let TreeNode::Internal { attribute, threshold, left, right } = node {
            node = if features[*attribute] <= *threshold { left } else { right };
        }
        node
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub schema: Vec<String>,
    pub classes: Vec<SkillClass>,
    pub root: TreeNode,
}

impl DecisionTree {
    pub fn predict(&self, features: &[f64]) -> Result<Prediction, ClassifierError> {
        predict_tree(self, features)
    }
}

pub fn predict_tree(tree: &DecisionTree, features: &[f64]) -> Result<Prediction, ClassifierError> {
    super::check_features(&tree.schema, features)?;
    let TreeNode::Leaf { class_counts, majority } = tree.root.route(features) else {
        unreachable!("route always ends at a leaf")
    };
    let total: usize = class_counts.iter().sum();
    let distribution = if total == 0 {
        (0..tree.classes.len()).map(|c| if c == *majority { 1.0 } else { 0.0 }).collect()
    } else {
        class_counts.iter().map(|&c| c as f64 / total as f64).collect()
    };
    Ok(Prediction { class: tree.classes[*majority], distribution })
}

pub fn train_c45(ds: &Dataset, params: &C45Params) -> Result<DecisionTree, ClassifierError> {
    if ds.is_empty() {
        return Err(ClassifierError::EmptyDataset);
    }
    if params.min_leaf == 0 {
        return Err(ClassifierError::InvalidParams("min_leaf must be at least 1".into()));
    }
    if !(params.cf > 0.0 && params.cf <= 1.0) {
        return Err(ClassifierError::InvalidParams(format!("cf must lie in (0, 1], got {}", params.cf)));
    }
    let builder = Builder { ds, labels: ds.label_indices(), n_classes: ds.classes().len(), min_leaf: params.min_leaf };
    let rows: Vec<usize> = (0..ds.len()).collect();
    let root = builder.grow(rows, 0);
    let tree = DecisionTree { schema: ds.schema().to_vec(), classes: ds.classes().to_vec(), root };
    Ok(if params.prune { prune_tree(&tree, ds, params.cf)? } else { tree })
}

/// Split chosen at a node by [`best_split`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChosenSplit {
    pub candidate: SplitCandidate,
    pub left_size: usize,
}

struct Builder<'a> {
    ds: &'a Dataset,
    labels: Vec<usize>,
    n_classes: usize,
    min_leaf: usize,
}

impl Builder<'_> {
    fn counts(&self, rows: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &r in rows {
            counts[self.labels[r]] += 1;
        }
        counts
    }

    fn grow(&self, rows: Vec<usize>, parent_majority: usize) -> TreeNode {
        let counts = self.counts(&rows);
        let majority = majority(&counts, parent_majority);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || rows.len() < 2 * self.min_leaf {
            return TreeNode::Leaf { class_counts: counts, majority };
        }
        let Some(split) = best_split(self.ds, &self.labels, &rows, self.min_leaf) else {
            return TreeNode::Leaf { class_counts: counts, majority };
        };
        let SplitCandidate { attribute, threshold, .. } = split.candidate;
        let (left, right): (Vec<usize>, Vec<usize>) =
            rows.into_iter().partition(|&r| self.ds.instances()[r].features[attribute] <= threshold);
        TreeNode::Internal {
            attribute,
            threshold,
            left: Box::new(self.grow(left, majority)),
            right: Box::new(self.grow(right, majority)),
        }
    }
}

/// Every size-admissible candidate split of `rows`, ordered by attribute then
/// threshold.
pub fn candidate_splits(ds: &Dataset, labels: &[usize], rows: &[usize], min_leaf: usize) -> Vec<ChosenSplit> {
    let n_classes = ds.classes().len();
    let mut parent = vec![0; n_classes];
    for &r in rows {
        parent[labels[r]] += 1;
    }
    let mut out = Vec::new();
    let mut sorted: Vec<(f64, usize)> = Vec::with_capacity(rows.len());
    for attribute in 0..ds.n_attributes() {
        sorted.clear();
        sorted.extend(rows.iter().map(|&r| (ds.instances()[r].features[attribute], labels[r])));
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut left = vec![0; n_classes];
        for i in 0..sorted.len().saturating_sub(1) {
            left[sorted[i].1] += 1;
            let (lo, hi) = (sorted[i].0, sorted[i + 1].0);
            let left_size = i + 1;
            if lo == hi || left_size < min_leaf || rows.len() - left_size < min_leaf {
                continue;
            }
            out.push(ChosenSplit {
                candidate: score_partition(attribute, midpoint(lo, hi), &parent, &left),
                left_size,
            });
        }
    }
    out
}

/// The split C4.5 would install at a node holding `rows`, if any.
pub fn best_split(ds: &Dataset, labels: &[usize], rows: &[usize], min_leaf: usize) -> Option<ChosenSplit> {
    let candidates = candidate_splits(ds, labels, rows, min_leaf);
    if candidates.is_empty() {
        return None;
    }
    let mean_gain = candidates.iter().map(|c| c.candidate.info_gain).sum::<f64>() / candidates.len() as f64;
    let admissible = || {
        candidates
            .iter()
            .filter(move |c| c.candidate.info_gain + SCORE_EPS >= mean_gain && c.candidate.gain_ratio.is_some())
    };
    let top = admissible().map(|c| c.candidate.gain_ratio.unwrap()).fold(f64::NEG_INFINITY, f64::max);
    admissible().find(|c| c.candidate.gain_ratio.unwrap() + SCORE_EPS >= top).copied()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::test_support::{dataset, E, N};

    #[test]
    fn pure_dataset_gives_single_leaf() {
        let ds = dataset(&[(&[1.0], E), (&[2.0], E), (&[3.0], E)]);
        let tree = train_c45(&ds, &C45Params::default()).unwrap();
        assert_eq!(tree.root, TreeNode::Leaf { class_counts: vec![3, 0], majority: 0 });
    }

    #[test]
    fn four_value_root_split_at_two_and_a_half() {
        // candidates 1.5, 2.5, 3.5: gains 0.311, 1.0, 0.311 (mean 0.541), so only
        // 2.5 is admissible and its gain ratio 1.0 is maximal
        let ds = dataset(&[(&[1.0], E), (&[2.0], E), (&[3.0], N), (&[4.0], N)]);
        let tree = train_c45(&ds, &C45Params { min_leaf: 1, prune: false, cf: 0.25 }).unwrap();
        match &tree.root {
            TreeNode::Internal { attribute, threshold, left, right } => {
                assert_eq!((*attribute, *threshold), (0, 2.5));
                assert_eq!(**left, TreeNode::Leaf { class_counts: vec![2, 0], majority: 0 });
                assert_eq!(**right, TreeNode::Leaf { class_counts: vec![0, 2], majority: 1 });
            }
            leaf => panic!("expected split, got {leaf:?}"),
        }
        // same answer with the default min_leaf of 2
        let tree = train_c45(&ds, &C45Params { prune: false, ..Default::default() }).unwrap();
        assert!(matches!(tree.root, TreeNode::Internal { threshold, .. } if threshold == 2.5));
    }

    #[test]
    fn small_node_is_not_split() {
        let ds = dataset(&[(&[1.0], E), (&[2.0], N), (&[3.0], E)]);
        let tree = train_c45(&ds, &C45Params { prune: false, ..Default::default() }).unwrap();
        assert_eq!(tree.root.node_count(), 1);
    }

    #[test]
    fn unpruned_tree_fits_xor_exactly() {
        // zero-gain root candidates still allow a split that leads to purity
        let ds = dataset(&[(&[0.0, 0.0], E), (&[1.0, 1.0], E), (&[0.0, 1.0], N), (&[1.0, 0.0], N)]);
        let tree = train_c45(&ds, &C45Params { min_leaf: 1, prune: false, cf: 0.25 }).unwrap();
        for inst in ds.instances() {
            assert_eq!(tree.predict(&inst.features).unwrap().class, inst.label);
        }
    }

    #[test]
    fn prediction_routes_boundary_left() {
        let ds = dataset(&[(&[1.0], E), (&[2.0], E), (&[3.0], N), (&[4.0], N)]);
        let tree = train_c45(&ds, &C45Params { min_leaf: 1, prune: false, cf: 0.25 }).unwrap();
        let p = tree.predict(&[2.5]).unwrap();
        assert_eq!(p.class, E);
        assert_eq!(p.distribution, vec![1.0, 0.0]);
        assert_eq!(tree.predict(&[2.5000001]).unwrap().class, N);
        assert!(matches!(tree.predict(&[1.0, 2.0]), Err(ClassifierError::Schema(_))));
    }

    #[test]
    fn single_leaf_tree_predicts_constant() {
        let tree = DecisionTree {
            schema: vec!["a".into()],
            classes: vec![E, N],
            root: TreeNode::Leaf { class_counts: vec![40, 0], majority: 0 },
        };
        for x in [-1e9, 0.0, 7.0] {
            let p = predict_tree(&tree, &[x]).unwrap();
            assert_eq!((p.class, p.distribution), (E, vec![1.0, 0.0]));
        }
    }

    /// Manual trace: root a1 <= 2.5 ? (a0 <= 10 ? E : N) : N.
    #[test]
    fn fixture_tree_hand_trace() {
        let tree = DecisionTree {
            schema: vec!["a0".into(), "a1".into()],
            classes: vec![E, N],
            root: TreeNode::Internal {
                attribute: 1,
                threshold: 2.5,
                left: Box::new(TreeNode::Internal {
                    attribute: 0,
                    threshold: 10.0,
                    left: Box::new(TreeNode::Leaf { class_counts: vec![3, 1], majority: 0 }),
                    right: Box::new(TreeNode::Leaf { class_counts: vec![0, 2], majority: 1 }),
                }),
                right: Box::new(TreeNode::Leaf { class_counts: vec![1, 5], majority: 1 }),
            },
        };
        // a1 = 2 goes left, a0 = 9 goes left -> leaf [3, 1]
        let p = tree.predict(&[9.0, 2.0]).unwrap();
        assert_eq!(p.class, E);
        assert_eq!(p.distribution, vec![0.75, 0.25]);
        assert_eq!(tree.predict(&[11.0, 2.0]).unwrap().class, N);
        assert_eq!(tree.predict(&[0.0, 3.0]).unwrap().distribution, vec![1.0 / 6.0, 5.0 / 6.0]);
    }

    #[test]
    fn empty_dataset_and_bad_params_rejected() {
        let ds = dataset(&[(&[1.0], E)]).subset(&[]);
        assert_eq!(train_c45(&ds, &C45Params::default()), Err(ClassifierError::EmptyDataset));
        let ds = dataset(&[(&[1.0], E)]);
        assert!(train_c45(&ds, &C45Params { cf: 0.0, ..Default::default() }).is_err());
        assert!(train_c45(&ds, &C45Params { min_leaf: 0, ..Default::default() }).is_err());
    }

    #[test]
    fn training_is_deterministic() {
        let rows: Vec<(Vec<f64>, _)> = (0..40)
            .map(|i| (vec![(i * 7 % 11) as f64, (i * 3 % 5) as f64], if (i * 13) % 3 == 0 { E } else { N }))
            .collect();
        let refs: Vec<(&[f64], _)> = rows.iter().map(|(f, c)| (f.as_slice(), *c)).collect();
        let ds = dataset(&refs);
        assert_eq!(train_c45(&ds, &C45Params::default()), train_c45(&ds, &C45Params::default()));
    }
}

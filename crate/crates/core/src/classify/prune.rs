//! Error-based pessimistic pruning (subtree replacement).

use statrs::distribution::{ContinuousCDF, Normal};

use super::c45::{DecisionTree, TreeNode};
use super::{majority, ClassifierError};
use crate::windowing::Dataset;

/// Extra errors to add to `errors` observed among `n` instances so that the
/// total is the upper confidence limit at level `cf` on the error count.
///
/// Uses the normal approximation with continuity correction; zero observed
/// errors use the exact binomial limit `n * (1 - cf^(1/n))`, and fractional
/// counts below one interpolate linearly. `cf = 1` adds nothing.
pub fn added_errors(n: f64, errors: f64, cf: f64) -> f64 {
    if n <= 0.0 || cf >= 1.0 {
        return 0.0;
    }
    if errors < 1.0 {
        let base = n * (1.0 - cf.powf(1.0 / n));
        if errors == 0.0 {
            return base;
        }
        return base + errors * (added_errors(n, 1.0, cf) - base);
    }
    if errors + 0.5 >= n {
        return (n - errors).max(0.0);
    }
    let z = Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(1.0 - cf);
    let f = (errors + 0.5) / n;
    let r = (f + z * z / (2.0 * n) + z * (f / n - f * f / n + z * z / (4.0 * n * n)).sqrt()) / (1.0 + z * z / n);
    r * n - errors
}

/// Observed plus added errors.
pub fn pessimistic_errors(n: usize, errors: usize, cf: f64) -> f64 {
    errors as f64 + added_errors(n as f64, errors as f64, cf)
}

/// Bottom-up subtree replacement: an internal node becomes a leaf when the
/// leaf's pessimistic error on the instances of `ds` reaching it is no larger
/// than the summed pessimistic error of the subtree's leaves.
pub fn prune_tree(tree: &DecisionTree, ds: &Dataset, cf: f64) -> Result<DecisionTree, ClassifierError> {
    if !(cf > 0.0 && cf <= 1.0) {
        return Err(ClassifierError::InvalidParams(format!("cf must lie in (0, 1], got {cf}")));
    }
    if !tree_matches(tree, ds) {
        return Err(ClassifierError::Schema("pruning dataset does not match the tree's schema".into()));
    }
    let pruner = Pruner { ds, labels: ds.label_indices(), n_classes: tree.classes.len(), cf };
    let rows: Vec<usize> = (0..ds.len()).collect();
    let root_majority = match &tree.root {
        TreeNode::Leaf { majority, .. } => *majority,
        TreeNode::Internal { .. } => majority(&pruner.counts(&rows), 0),
    };
    let (root, _) = pruner.prune(&tree.root, rows, root_majority);
    Ok(DecisionTree { root, ..tree.clone() })
}

fn tree_matches(tree: &DecisionTree, ds: &Dataset) -> bool {
    tree.schema == ds.schema() && tree.classes == ds.classes()
}

struct Pruner<'a> {
    ds: &'a Dataset,
    labels: Vec<usize>,
    n_classes: usize,
    cf: f64,
}

impl Pruner<'_> {
    fn counts(&self, rows: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &r in rows {
            counts[self.labels[r]] += 1;
        }
        counts
    }

    /// Returns the pruned node and its pessimistic error.
    fn prune(&self, node: &TreeNode, rows: Vec<usize>, parent_majority: usize) -> (TreeNode, f64) {
        let counts = self.counts(&rows);
        let n = rows.len();
        match node {
            TreeNode::Leaf { majority, .. } => {
                let errors = n - counts[*majority];
                (node.clone(), pessimistic_errors(n, errors, self.cf))
            }
            TreeNode::Internal { attribute, threshold, left, right } => {
                let node_majority = majority(&counts, parent_majority);
                let (l_rows, r_rows): (Vec<usize>, Vec<usize>) =
                    rows.into_iter().partition(|&r| self.ds.instances()[r].features[*attribute] <= *threshold);
                let (left, l_err) = self.prune(left, l_rows, node_majority);
                let (right, r_err) = self.prune(right, r_rows, node_majority);
                let subtree_err = l_err + r_err;
                let leaf_err = pessimistic_errors(n, n - counts[node_majority].min(n), self.cf);
                if leaf_err <= subtree_err {
                    (TreeNode::Leaf { class_counts: counts, majority: node_majority }, leaf_err)
                } else {
                    let node = TreeNode::Internal {
                        attribute: *attribute,
                        threshold: *threshold,
                        left: Box::new(left),
                        right: Box::new(right),
                    };
                    (node, subtree_err)
                }
            }
        }
    }
}

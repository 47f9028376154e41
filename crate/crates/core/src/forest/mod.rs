//! Random-forest classifier with out-of-bag bookkeeping.
//!
//! Each tree is grown on a bootstrap of the training rows with a fresh
//! random feature subset at every split. Trees are trained in parallel and
//! collected in index order; tree `t` draws from a generator seeded with
//! `seed ^ t`, so results do not depend on the worker count.

mod importance;
mod io;
mod tree;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

pub use importance::{permutation_importance, ImportanceReport};
pub use io::{load_model, save_model, ModelFormatError, FORMAT_VERSION};
pub use tree::{gini, majority, DecisionTree, Node};

use crate::sampler::NUM_CATEGORIES;
use tree::GrowParams;

#[derive(Debug, Error, PartialEq)]
pub enum ForestError {
    #[error("training set is empty")]
    Empty,
    #[error("{rows} feature rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("non-finite feature value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("label {0} is not a valid category")]
    BadLabel(u8),
    #[error("invalid forest parameters: {0}")]
    BadParams(String),
    #[error("expected {expected} features, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("no sample is out-of-bag for any tree")]
    NoOutOfBag,
}

/// Dense row-major feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    data: Vec<f64>,
    cols: usize,
}

impl Matrix {
    pub fn new(data: Vec<f64>, cols: usize) -> Self {
        assert!(cols > 0 && data.len() % cols == 0, "data length must be a multiple of cols");
        Self { data, cols }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(1, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        Self { data, cols }
    }

    pub fn rows(&self) -> usize {
        self.data.len() / self.cols
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestParams {
    pub n_trees: usize,
    /// `None` means `ceil(sqrt(n_features))`.
    pub features_per_split: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 200,
            features_per_split: None,
            max_depth: None,
            min_samples_leaf: 1,
            seed: 0,
        }
    }
}

impl ForestParams {
    pub fn resolved_features_per_split(&self, n_features: usize) -> usize {
        self.features_per_split
            .unwrap_or_else(|| (n_features as f64).sqrt().ceil() as usize)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub trees: Vec<DecisionTree>,
    pub params: ForestParams,
    pub n_features: usize,
    pub n_classes: usize,
    /// Row count of the training matrix the OOB sets index into.
    pub n_train: usize,
    pub feature_names: Vec<String>,
}

/// Per-tree generator, shared by training and tests that replay it.
pub fn tree_rng(seed: u64, tree: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ tree as u64)
}

fn validate(x: &Matrix, y: &[u8], n_classes: usize) -> Result<(), ForestError> {
    if x.rows() == 0 {
        return Err(ForestError::Empty);
    }
    if x.rows() != y.len() {
        return Err(ForestError::LengthMismatch { rows: x.rows(), labels: y.len() });
    }
    for row in 0..x.rows() {
        if let Some(col) = x.row(row).iter().position(|v| !v.is_finite()) {
            return Err(ForestError::NonFinite { row, col });
        }
    }
    if let Some(&bad) = y.iter().find(|&&l| l as usize >= n_classes) {
        return Err(ForestError::BadLabel(bad));
    }
    Ok(())
}

/// Trains a forest on `x` (one row per tile) and category labels `y`.
pub fn train(
    x: &Matrix,
    y: &[u8],
    params: &ForestParams,
    feature_names: Vec<String>,
) -> Result<ForestModel, ForestError> {
    let n_classes = NUM_CATEGORIES;
    validate(x, y, n_classes)?;
    let d = x.cols();
    let mtry = params.resolved_features_per_split(d);
    if params.n_trees == 0 {
        return Err(ForestError::BadParams("n_trees must be at least 1".into()));
    }
    if mtry == 0 || mtry > d {
        return Err(ForestError::BadParams(format!("features_per_split {mtry} not in 1..={d}")));
    }
    if params.min_samples_leaf == 0 {
        return Err(ForestError::BadParams("min_samples_leaf must be at least 1".into()));
    }
    if feature_names.len() != d {
        return Err(ForestError::Dimension { expected: d, got: feature_names.len() });
    }
    let first = y[0];
    if y.iter().all(|&l| l == first) {
        warn!("training labels contain a single class ({first}); trees will be single leaves");
    }

    let n = x.rows();
    let grow = GrowParams {
        features_per_split: mtry,
        max_depth: params.max_depth,
        min_samples_leaf: params.min_samples_leaf,
        n_classes,
    };
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = tree_rng(params.seed, t);
            let mut in_bag = vec![false; n];
            let rows: Vec<u32> = (0..n)
                .map(|_| {
                    let r = rng.gen_range(0..n);
                    in_bag[r] = true;
                    r as u32
                })
                .collect();
            let oob = (0..n as u32).filter(|&r| !in_bag[r as usize]).collect();
            DecisionTree::grow(x, y, rows, oob, &grow, &mut rng)
        })
        .collect();

    Ok(ForestModel {
        trees,
        params: params.clone(),
        n_features: d,
        n_classes,
        n_train: n,
        feature_names,
    })
}

/// Majority vote and per-class vote counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub category: usize,
    pub votes: Vec<u32>,
}

impl Prediction {
    /// Winning votes minus runner-up votes, as a fraction of all votes.
    pub fn margin(&self) -> f64 {
        let total: u32 = self.votes.iter().sum();
        if total == 0 {
            return 0.0;
        }
        let mut sorted = self.votes.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let second = sorted.get(1).copied().unwrap_or(0);
        f64::from(sorted[0] - second) / f64::from(total)
    }
}

impl ForestModel {
    pub fn predict(&self, x: &[f64]) -> Result<Prediction, ForestError> {
        if x.len() != self.n_features {
            return Err(ForestError::Dimension { expected: self.n_features, got: x.len() });
        }
        let mut votes = vec![0u32; self.n_classes];
        for tree in &self.trees {
            votes[tree.predict(x)] += 1;
        }
        Ok(Prediction { category: majority(&votes), votes })
    }

    pub fn predict_matrix(&self, x: &Matrix) -> Result<Vec<Prediction>, ForestError> {
        (0..x.rows()).into_par_iter().map(|i| self.predict(x.row(i))).collect()
    }

    fn check_training_shape(&self, x: &Matrix, y: &[u8]) -> Result<(), ForestError> {
        if x.cols() != self.n_features {
            return Err(ForestError::Dimension { expected: self.n_features, got: x.cols() });
        }
        if x.rows() != self.n_train || y.len() != self.n_train {
            return Err(ForestError::LengthMismatch { rows: x.rows(), labels: y.len() });
        }
        Ok(())
    }

    /// Misclassified fraction under out-of-bag majority voting, over the
    /// rows that are out-of-bag for at least one tree. `x` and `y` must be
    /// the training set in training order.
    pub fn oob_error(&self, x: &Matrix, y: &[u8]) -> Result<f64, ForestError> {
        self.check_training_shape(x, y)?;
        let mut votes = vec![0u32; self.n_train * self.n_classes];
        for tree in &self.trees {
            for &r in &tree.oob {
                let r = r as usize;
                votes[r * self.n_classes + tree.predict(x.row(r))] += 1;
            }
        }
        let mut counted = 0usize;
        let mut wrong = 0usize;
        for (r, v) in votes.chunks(self.n_classes).enumerate() {
            if v.iter().all(|&c| c == 0) {
                continue;
            }
            counted += 1;
            if majority(v) != y[r] as usize {
                wrong += 1;
            }
        }
        if counted == 0 {
            return Err(ForestError::NoOutOfBag);
        }
        Ok(wrong as f64 / counted as f64)
    }
}

/// Free-function form of [`ForestModel::oob_error`].
pub fn oob_error(model: &ForestModel, x: &Matrix, y: &[u8]) -> Result<f64, ForestError> {
    model.oob_error(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(d: usize) -> Vec<String> {
        (0..d).map(|i| format!("f{i}")).collect()
    }

    fn separable(n: usize) -> (Matrix, Vec<u8>) {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let v = i as f64 / n as f64;
            rows.push(vec![v, (i * 7 % 13) as f64]);
            y.push(u8::from(v >= 0.5));
        }
        (Matrix::from_rows(&rows), y)
    }

    #[test]
    fn single_tree_fits_bootstrap_exactly() {
        let (x, y) = separable(100);
        let params = ForestParams { n_trees: 1, features_per_split: Some(2), seed: 3, ..Default::default() };
        let model = train(&x, &y, &params, names(2)).unwrap();
        let tree = &model.trees[0];
        let oob: std::collections::HashSet<u32> = tree.oob.iter().copied().collect();
        for r in (0..100).filter(|r| !oob.contains(&(*r as u32))) {
            assert_eq!(tree.predict(x.row(r)), y[r] as usize);
        }
    }

    #[test]
    fn constant_features_give_majority_predictor() {
        let x = Matrix::from_rows(&vec![vec![1.0, 2.0]; 10]);
        let y = vec![0, 0, 0, 1, 1, 0, 0, 2, 0, 0];
        let model = train(&x, &y, &ForestParams { n_trees: 5, ..Default::default() }, names(2)).unwrap();
        assert!(model.trees.iter().all(|t| t.nodes.len() == 1));
        assert_eq!(model.predict(&[1.0, 2.0]).unwrap().category, 0);
    }

    #[test]
    fn votes_sum_and_dimension_check() {
        let (x, y) = separable(60);
        let model = train(&x, &y, &ForestParams { n_trees: 17, ..Default::default() }, names(2)).unwrap();
        let p = model.predict(&[0.9, 1.0]).unwrap();
        assert_eq!(p.votes.iter().sum::<u32>(), 17);
        assert_eq!(p.category, 1);
        assert_eq!(
            model.predict(&[0.1]).unwrap_err(),
            ForestError::Dimension { expected: 2, got: 1 }
        );
    }

    #[test]
    fn vote_tie_goes_to_lower_class() {
        let leaf = |class: usize| DecisionTree {
            nodes: vec![Node::Leaf {
                counts: (0..8).map(|c| u32::from(c == class)).collect(),
                impurity: 0.0,
            }],
            oob: vec![],
        };
        let model = ForestModel {
            trees: vec![leaf(5), leaf(2), leaf(5), leaf(2)],
            params: ForestParams::default(),
            n_features: 1,
            n_classes: 8,
            n_train: 0,
            feature_names: names(1),
        };
        let p = model.predict(&[0.0]).unwrap();
        assert_eq!(p.category, 2);
        assert_eq!(p.margin(), 0.0);
    }

    #[test]
    fn unanimous_vote() {
        let (x, _) = separable(40);
        let y = vec![3u8; 40];
        let model = train(&x, &y, &ForestParams { n_trees: 9, ..Default::default() }, names(2)).unwrap();
        let p = model.predict(&[0.2, 0.0]).unwrap();
        assert_eq!((p.category, p.votes[3]), (3, 9));
    }

    #[test]
    fn single_tree_oob_is_complement_of_bootstrap() {
        let (x, y) = separable(50);
        let params = ForestParams { n_trees: 1, seed: 11, ..Default::default() };
        let model = train(&x, &y, &params, names(2)).unwrap();
        // Replay the bootstrap draws.
        let mut rng = tree_rng(11, 0);
        let drawn: std::collections::BTreeSet<u32> = (0..50).map(|_| rng.gen_range(0..50usize) as u32).collect();
        let expected: Vec<u32> = (0..50).filter(|r| !drawn.contains(r)).collect();
        assert_eq!(model.trees[0].oob, expected);
        assert!(model.oob_error(&x, &y).is_ok());
    }

    #[test]
    fn oob_error_without_oob_rows_is_signalled() {
        let (x, y) = separable(4);
        let mut model = train(&x, &y, &ForestParams { n_trees: 2, ..Default::default() }, names(2)).unwrap();
        for t in &mut model.trees {
            t.oob.clear();
        }
        assert_eq!(model.oob_error(&x, &y), Err(ForestError::NoOutOfBag));
    }

    #[test]
    fn input_validation() {
        let (x, y) = separable(10);
        assert!(matches!(train(&x, &y[..5], &ForestParams::default(), names(2)), Err(ForestError::LengthMismatch { .. })));
        let bad = ForestParams { features_per_split: Some(3), ..Default::default() };
        assert!(matches!(train(&x, &y, &bad, names(2)), Err(ForestError::BadParams(_))));
        let nan = Matrix::from_rows(&[vec![f64::NAN, 0.0]]);
        assert_eq!(train(&nan, &[0], &ForestParams::default(), names(2)).unwrap_err(), ForestError::NonFinite { row: 0, col: 0 });
        assert_eq!(train(&x, &[9; 10], &ForestParams::default(), names(2)).unwrap_err(), ForestError::BadLabel(9));
    }

    #[test]
    fn default_features_per_split() {
        assert_eq!(ForestParams::default().resolved_features_per_split(40), 7);
    }

    #[test]
    fn children_never_less_pure_than_parent() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rows: Vec<Vec<f64>> = (0..300).map(|_| (0..5).map(|_| rng.gen::<f64>()).collect()).collect();
        let y: Vec<u8> = rows.iter().map(|r| ((r[0] + r[1] * 0.5 + rng.gen::<f64>() * 0.3) * 3.0) as u8 % 4).collect();
        let model = train(&Matrix::from_rows(&rows), &y, &ForestParams { n_trees: 10, ..Default::default() }, names(5)).unwrap();
        for tree in &model.trees {
            for node in &tree.nodes {
                if let Node::Split { left, right, impurity, .. } = node {
                    assert!(tree.nodes[*left].impurity() <= *impurity);
                    assert!(tree.nodes[*right].impurity() <= *impurity);
                }
            }
        }
    }
}

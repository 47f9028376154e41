//! Out-of-bag permutation importance and its per-family grouping.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{majority, ForestError, ForestModel, Matrix};
use crate::morpho::FeatureFamily;
use crate::seeds::derive_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceReport {
    /// Mean OOB error increase per feature, clamped at zero.
    pub per_dimension: Vec<f64>,
    /// Share of total importance per family, indexed like
    /// [`FeatureFamily::ALL`]. Sums to one unless every dimension is zero.
    pub per_family: [f64; 4],
}

impl ImportanceReport {
    pub fn family(&self, family: FeatureFamily) -> f64 {
        let i = FeatureFamily::ALL.iter().position(|f| *f == family).unwrap();
        self.per_family[i]
    }

    /// Dimensions ordered by decreasing importance, ties by index.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.per_dimension.len()).collect();
        idx.sort_by(|&a, &b| self.per_dimension[b].total_cmp(&self.per_dimension[a]).then(a.cmp(&b)));
        idx
    }

    pub fn from_dimensions(per_dimension: Vec<f64>) -> Self {
        let mut per_family = [0.0; 4];
        for (dim, v) in per_dimension.iter().enumerate() {
            if let Some(f) = FeatureFamily::of_dimension(dim) {
                let i = FeatureFamily::ALL.iter().position(|x| *x == f).unwrap();
                per_family[i] += v;
            }
        }
        let total: f64 = per_family.iter().sum();
        if total > 0.0 {
            per_family.iter_mut().for_each(|v| *v /= total);
        }
        Self { per_dimension, per_family }
    }
}

/// For every tree, shuffles one feature at a time among that tree's
/// out-of-bag rows and records the rise in the tree's OOB error. The
/// importance of a feature is the mean rise over trees with at least one
/// OOB row, floored at zero. `x` and `y` must be the training set in
/// training order.
pub fn permutation_importance(
    model: &ForestModel,
    x: &Matrix,
    y: &[u8],
    seed: u64,
) -> Result<ImportanceReport, ForestError> {
    if x.cols() != model.n_features {
        return Err(ForestError::Dimension { expected: model.n_features, got: x.cols() });
    }
    if x.rows() != model.n_train || y.len() != model.n_train {
        return Err(ForestError::LengthMismatch { rows: x.rows(), labels: y.len() });
    }
    let d = model.n_features;
    let per_tree: Vec<Option<Vec<f64>>> = model
        .trees
        .par_iter()
        .enumerate()
        .map(|(t, tree)| {
            if tree.oob.is_empty() {
                return None;
            }
            let m = tree.oob.len() as f64;
            let errors = |replace: Option<(usize, &[f64])>| -> f64 {
                let wrong = tree
                    .oob
                    .iter()
                    .enumerate()
                    .filter(|(k, &r)| {
                        let row = x.row(r as usize);
                        let leaf = match replace {
                            Some((j, vals)) => tree.leaf_with(|f| if f == j { vals[*k] } else { row[f] }),
                            None => tree.leaf_with(|f| row[f]),
                        };
                        majority(leaf) != y[r as usize] as usize
                    })
                    .count();
                wrong as f64 / m
            };
            let baseline = errors(None);
            let mut column: Vec<f64> = Vec::with_capacity(tree.oob.len());
            let rises = (0..d)
                .map(|j| {
                    column.clear();
                    column.extend(tree.oob.iter().map(|&r| x.get(r as usize, j)));
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[t as u64, j as u64]));
                    column.shuffle(&mut rng);
                    errors(Some((j, &column))) - baseline
                })
                .collect();
            Some(rises)
        })
        .collect();

    let mut sums = vec![0.0; d];
    let mut used = 0usize;
    for rises in per_tree.into_iter().flatten() {
        used += 1;
        for (s, r) in sums.iter_mut().zip(rises) {
            *s += r;
        }
    }
    if used == 0 {
        return Err(ForestError::NoOutOfBag);
    }
    let per_dimension = sums.into_iter().map(|s| (s / used as f64).max(0.0)).collect();
    Ok(ImportanceReport::from_dimensions(per_dimension))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_shares_sum_to_one() {
        let mut dims = vec![0.0; 40];
        dims[3] = 2.0;
        dims[15] = 1.0;
        dims[39] = 1.0;
        let r = ImportanceReport::from_dimensions(dims);
        assert_eq!(r.family(FeatureFamily::Directionality), 0.5);
        assert_eq!(r.family(FeatureFamily::Density), 0.25);
        assert_eq!(r.family(FeatureFamily::BuildingSize), 0.0);
        assert!((r.per_family.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(r.ranking()[0], 3);
    }

    #[test]
    fn all_zero_dimensions_give_zero_families() {
        let r = ImportanceReport::from_dimensions(vec![0.0; 40]);
        assert_eq!(r.per_family, [0.0; 4]);
    }
}

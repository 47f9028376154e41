//! CART classification tree grown on a bootstrap sample.

use rand::seq::index;
use rand::Rng;

use super::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        impurity: f64,
        n_samples: usize,
    },
    Leaf {
        counts: Vec<u32>,
        impurity: f64,
    },
}

impl Node {
    pub fn impurity(&self) -> f64 {
        match self {
            Node::Split { impurity, .. } | Node::Leaf { impurity, .. } => *impurity,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
    /// Training rows never drawn into this tree's bootstrap, ascending.
    pub oob: Vec<u32>,
}

/// Growth limits shared by all trees of a forest.
#[derive(Debug, Clone, Copy)]
pub(crate) struct GrowParams {
    pub features_per_split: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub n_classes: usize,
}

pub fn gini(counts: &[u32], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>()
}

/// Lowest class index among those with the most counts.
pub fn majority(counts: &[u32]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

struct Candidate {
    feature: usize,
    threshold: f64,
    decrease: f64,
}

impl DecisionTree {
    /// Leaf reached by a row whose feature values come from `value`.
    pub fn leaf_with(&self, value: impl Fn(usize) -> f64) -> &[u32] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split { feature, threshold, left, right, .. } => {
                    i = if value(*feature) <= *threshold { *left } else { *right };
                }
                Node::Leaf { counts, .. } => return counts,
            }
        }
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        majority(self.leaf_with(|f| row[f]))
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        go(&self.nodes, 0)
    }

    /// Grows a tree on `rows` (bootstrap draws, duplicates allowed).
    pub(crate) fn grow<R: Rng>(x: &Matrix, y: &[u8], rows: Vec<u32>, oob: Vec<u32>, params: &GrowParams, rng: &mut R) -> Self {
        let mut nodes: Vec<Node> = Vec::new();
        // (rows, depth, slot to patch with this node's index)
        let mut stack: Vec<(Vec<u32>, usize, Option<(usize, bool)>)> = vec![(rows, 0, None)];
        let mut sorted: Vec<(f64, u8)> = Vec::new();
        while let Some((rows, depth, parent)) = stack.pop() {
            let id = nodes.len();
            if let Some((p, is_left)) = parent {
                if let Node::Split { left, right, .. } = &mut nodes[p] {
                    *(if is_left { left } else { right }) = id;
                }
            }
            let mut counts = vec![0u32; params.n_classes];
            for &r in &rows {
                counts[y[r as usize] as usize] += 1;
            }
            let n = rows.len();
            let impurity = gini(&counts, n);

            let can_split = impurity > 0.0
                && n >= 2 * params.min_samples_leaf
                && params.max_depth.is_none_or(|d| depth < d);
            let best = if can_split {
                best_split(x, y, &rows, &counts, impurity, params, rng, &mut sorted)
            } else {
                None
            };
            match best {
                None => nodes.push(Node::Leaf { counts, impurity }),
                Some(c) => {
                    let (left, right): (Vec<u32>, Vec<u32>) =
                        rows.iter().partition(|&&r| x.get(r as usize, c.feature) <= c.threshold);
                    nodes.push(Node::Split {
                        feature: c.feature,
                        threshold: c.threshold,
                        left: usize::MAX,
                        right: usize::MAX,
                        impurity,
                        n_samples: n,
                    });
                    // Right pushed first so the left subtree is numbered first.
                    stack.push((right, depth + 1, Some((id, false))));
                    stack.push((left, depth + 1, Some((id, true))));
                }
            }
        }
        DecisionTree { nodes, oob }
    }
}

/// Best admissible Gini split over a random feature subset. A split is
/// admissible when both children are non-empty, meet the leaf size, and
/// neither child is less pure than the parent. Ties go to the lowest
/// feature index, then the lowest threshold.
#[allow(clippy::too_many_arguments)]
fn best_split<R: Rng>(
    x: &Matrix,
    y: &[u8],
    rows: &[u32],
    counts: &[u32],
    impurity: f64,
    params: &GrowParams,
    rng: &mut R,
    sorted: &mut Vec<(f64, u8)>,
) -> Option<Candidate> {
    let n = rows.len();
    let mut features = index::sample(rng, x.cols(), params.features_per_split).into_vec();
    features.sort_unstable();

    let mut best: Option<Candidate> = None;
    let mut left = vec![0u32; counts.len()];
    let mut right = vec![0u32; counts.len()];
    for &f in &features {
        sorted.clear();
        sorted.extend(rows.iter().map(|&r| (x.get(r as usize, f), y[r as usize])));
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        if sorted[0].0 == sorted[n - 1].0 {
            continue;
        }
        left.iter_mut().for_each(|c| *c = 0);
        right.copy_from_slice(counts);
        for i in 0..n - 1 {
            let label = sorted[i].1 as usize;
            left[label] += 1;
            right[label] -= 1;
            let (v, next) = (sorted[i].0, sorted[i + 1].0);
            if v == next {
                continue;
            }
            let n_left = i + 1;
            let n_right = n - n_left;
            if n_left < params.min_samples_leaf || n_right < params.min_samples_leaf {
                continue;
            }
            let g_left = gini(&left, n_left);
            let g_right = gini(&right, n_right);
            if g_left > impurity || g_right > impurity {
                continue;
            }
            let decrease = impurity - (n_left as f64 * g_left + n_right as f64 * g_right) / n as f64;
            if decrease <= 0.0 || best.as_ref().is_some_and(|b| decrease <= b.decrease) {
                continue;
            }
            let mut threshold = v + (next - v) / 2.0;
            if !(threshold < next) {
                threshold = v;
            }
            best = Some(Candidate { feature: f, threshold, decrease });
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gini_values() {
        assert_eq!(gini(&[5, 5], 10), 0.5);
        assert_eq!(gini(&[10, 0], 10), 0.0);
        assert_eq!(gini(&[0, 0], 0), 0.0);
    }

    #[test]
    fn majority_ties_go_low() {
        assert_eq!(majority(&[0, 0, 4, 0, 0, 4, 0, 0]), 2);
        assert_eq!(majority(&[0, 0, 0]), 0);
    }
}

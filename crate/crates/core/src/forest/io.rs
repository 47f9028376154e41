//! Versioned plain-text model serialization.
//!
//! ```text
//! figground-forest 1
//! n_features 40
//! n_classes 8
//! n_train 2800
//! n_trees 200
//! features_per_split 7
//! max_depth none
//! min_samples_leaf 1
//! seed 42
//! feature_names direction0 ... complexity9
//! tree 0 nodes 57 oob 1030
//! oob 3 5 9 ...
//! S <feature> <threshold> <left> <right> <impurity> <n_samples>
//! L <impurity> <count_0> ... <count_{n_classes-1}>
//! ...
//! end
//! ```
//!
//! Floats are written in Rust's shortest round-trip form, so loading
//! reproduces every threshold bit for bit.

use std::fmt::Write as _;

use thiserror::Error;

use super::{DecisionTree, ForestModel, ForestParams, Node};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "figground-forest";

#[derive(Debug, Error, PartialEq)]
pub enum ModelFormatError {
    #[error("refusing to save a forest with no trees")]
    EmptyForest,
    #[error("feature name `{0}` contains whitespace")]
    BadFeatureName(String),
    #[error("not a forest model file")]
    BadMagic,
    #[error("model format version {found} is not supported (expected {FORMAT_VERSION})")]
    Version { found: String },
    #[error("model file is truncated")]
    Truncated,
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

pub fn save_model(model: &ForestModel) -> Result<String, ModelFormatError> {
    if model.trees.is_empty() {
        return Err(ModelFormatError::EmptyForest);
    }
    if let Some(bad) = model.feature_names.iter().find(|n| n.is_empty() || n.contains(char::is_whitespace)) {
        return Err(ModelFormatError::BadFeatureName(bad.clone()));
    }
    let p = &model.params;
    let mut s = String::new();
    let opt = |v: Option<usize>| v.map_or("none".to_string(), |v| v.to_string());
    writeln!(s, "{MAGIC} {FORMAT_VERSION}").unwrap();
    writeln!(s, "n_features {}", model.n_features).unwrap();
    writeln!(s, "n_classes {}", model.n_classes).unwrap();
    writeln!(s, "n_train {}", model.n_train).unwrap();
    writeln!(s, "n_trees {}", model.trees.len()).unwrap();
    writeln!(s, "features_per_split {}", opt(p.features_per_split)).unwrap();
    writeln!(s, "max_depth {}", opt(p.max_depth)).unwrap();
    writeln!(s, "min_samples_leaf {}", p.min_samples_leaf).unwrap();
    writeln!(s, "seed {}", p.seed).unwrap();
    writeln!(s, "feature_names {}", model.feature_names.join(" ")).unwrap();
    for (t, tree) in model.trees.iter().enumerate() {
        writeln!(s, "tree {t} nodes {} oob {}", tree.nodes.len(), tree.oob.len()).unwrap();
        s.push_str("oob");
        for r in &tree.oob {
            write!(s, " {r}").unwrap();
        }
        s.push('\n');
        for node in &tree.nodes {
            match node {
                Node::Split { feature, threshold, left, right, impurity, n_samples } => {
                    writeln!(s, "S {feature} {threshold:?} {left} {right} {impurity:?} {n_samples}").unwrap()
                }
                Node::Leaf { counts, impurity } => {
                    write!(s, "L {impurity:?}").unwrap();
                    for c in counts {
                        write!(s, " {c}").unwrap();
                    }
                    s.push('\n');
                }
            }
        }
    }
    s.push_str("end\n");
    Ok(s)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<Vec<&'a str>, ModelFormatError> {
        let (i, l) = self.inner.next().ok_or(ModelFormatError::Truncated)?;
        self.line = i + 1;
        Ok(l.split_whitespace().collect())
    }

    fn err(&self, message: impl Into<String>) -> ModelFormatError {
        ModelFormatError::Malformed { line: self.line, message: message.into() }
    }

    fn num<T: std::str::FromStr>(&self, tok: Option<&&str>) -> Result<T, ModelFormatError> {
        let tok = tok.ok_or_else(|| self.err("missing value"))?;
        tok.parse().map_err(|_| self.err(format!("bad number `{tok}`")))
    }

    fn keyed<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, ModelFormatError> {
        let toks = self.next()?;
        if toks.first() != Some(&key) || toks.len() != 2 {
            return Err(self.err(format!("expected `{key} <value>`")));
        }
        self.num(toks.get(1))
    }

    fn keyed_opt(&mut self, key: &str) -> Result<Option<usize>, ModelFormatError> {
        let toks = self.next()?;
        if toks.first() != Some(&key) || toks.len() != 2 {
            return Err(self.err(format!("expected `{key} <value>`")));
        }
        if toks[1] == "none" {
            Ok(None)
        } else {
            self.num(toks.get(1)).map(Some)
        }
    }
}

/// Parses a model written by [`save_model`]. Any structural problem fails
/// the whole load.
pub fn load_model(text: &str) -> Result<ForestModel, ModelFormatError> {
    let mut lines = Lines { inner: text.lines().enumerate(), line: 0 };
    let header = lines.next().map_err(|_| ModelFormatError::BadMagic)?;
    if header.first() != Some(&MAGIC) {
        return Err(ModelFormatError::BadMagic);
    }
    let version = header.get(1).copied().unwrap_or("");
    if version != FORMAT_VERSION.to_string() {
        return Err(ModelFormatError::Version { found: version.to_string() });
    }
    let n_features: usize = lines.keyed("n_features")?;
    let n_classes: usize = lines.keyed("n_classes")?;
    let n_train: usize = lines.keyed("n_train")?;
    let n_trees: usize = lines.keyed("n_trees")?;
    let features_per_split = lines.keyed_opt("features_per_split")?;
    let max_depth = lines.keyed_opt("max_depth")?;
    let min_samples_leaf: usize = lines.keyed("min_samples_leaf")?;
    let seed: u64 = lines.keyed("seed")?;
    let names = lines.next()?;
    if names.first() != Some(&"feature_names") || names.len() != n_features + 1 {
        return Err(lines.err("expected feature_names with one name per feature"));
    }
    let feature_names = names[1..].iter().map(|s| s.to_string()).collect();
    if n_trees == 0 {
        return Err(lines.err("forest has no trees"));
    }

    let mut trees = Vec::with_capacity(n_trees);
    for t in 0..n_trees {
        let head = lines.next()?;
        if head.len() != 6 || head[0] != "tree" || head[2] != "nodes" || head[4] != "oob" {
            return Err(lines.err("expected `tree <i> nodes <n> oob <m>`"));
        }
        if lines.num::<usize>(head.get(1))? != t {
            return Err(lines.err("trees out of order"));
        }
        let n_nodes: usize = lines.num(head.get(3))?;
        let n_oob: usize = lines.num(head.get(5))?;
        let oob_toks = lines.next()?;
        if oob_toks.first() != Some(&"oob") || oob_toks.len() != n_oob + 1 {
            return Err(lines.err("oob list length mismatch"));
        }
        let oob = oob_toks[1..]
            .iter()
            .map(|tok| {
                let r: u32 = lines.num(Some(tok))?;
                if r as usize >= n_train {
                    return Err(lines.err("oob row out of range"));
                }
                Ok(r)
            })
            .collect::<Result<Vec<u32>, _>>()?;
        let mut nodes = Vec::with_capacity(n_nodes);
        for _ in 0..n_nodes {
            let toks = lines.next()?;
            let node = match toks.first() {
                Some(&"S") if toks.len() == 7 => {
                    let feature: usize = lines.num(toks.get(1))?;
                    let left: usize = lines.num(toks.get(3))?;
                    let right: usize = lines.num(toks.get(4))?;
                    if feature >= n_features || left >= n_nodes || right >= n_nodes {
                        return Err(lines.err("split references out of range"));
                    }
                    Node::Split {
                        feature,
                        threshold: lines.num(toks.get(2))?,
                        left,
                        right,
                        impurity: lines.num(toks.get(5))?,
                        n_samples: lines.num(toks.get(6))?,
                    }
                }
                Some(&"L") if toks.len() == n_classes + 2 => Node::Leaf {
                    impurity: lines.num(toks.get(1))?,
                    counts: toks[2..].iter().map(|c| lines.num(Some(c))).collect::<Result<_, _>>()?,
                },
                _ => return Err(lines.err("expected a split or leaf node")),
            };
            nodes.push(node);
        }
        trees.push(DecisionTree { nodes, oob });
    }
    let end = lines.next()?;
    if end != ["end"] {
        return Err(lines.err("expected `end`"));
    }
    Ok(ForestModel {
        trees,
        params: ForestParams { n_trees, features_per_split, max_depth, min_samples_leaf, seed },
        n_features,
        n_classes,
        n_train,
        feature_names,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::{train, Matrix};

    fn small_model() -> ForestModel {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64 * 0.1, (i % 3) as f64]).collect();
        let y: Vec<u8> = (0..40).map(|i| u8::from(i >= 20)).collect();
        let params = ForestParams { n_trees: 4, seed: 5, ..Default::default() };
        train(&Matrix::from_rows(&rows), &y, &params, vec!["a".into(), "b".into()]).unwrap()
    }

    #[test]
    fn round_trip_is_identical() {
        let m = small_model();
        let text = save_model(&m).unwrap();
        let back = load_model(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(save_model(&back).unwrap(), text);
    }

    #[test]
    fn truncated_file_fails() {
        let text = save_model(&small_model()).unwrap();
        let cut = &text[..text.len() / 2];
        let cut = &cut[..cut.rfind('\n').unwrap() + 1];
        assert_eq!(load_model(cut).unwrap_err(), ModelFormatError::Truncated);
        let no_end = text.trim_end().trim_end_matches("end");
        assert_eq!(load_model(no_end).unwrap_err(), ModelFormatError::Truncated);
    }

    #[test]
    fn version_mismatch_fails() {
        let text = save_model(&small_model()).unwrap().replacen("figground-forest 1", "figground-forest 2", 1);
        assert!(matches!(load_model(&text), Err(ModelFormatError::Version { .. })));
        assert_eq!(load_model("hello").unwrap_err(), ModelFormatError::BadMagic);
    }

    #[test]
    fn empty_forest_rejected_at_save() {
        let mut m = small_model();
        m.trees.clear();
        assert_eq!(save_model(&m).unwrap_err(), ModelFormatError::EmptyForest);
    }
}

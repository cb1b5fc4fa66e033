use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Node {
    /// Rows with `x[feature] < threshold` go to `left`.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { value: f64 },
}

/// Binary regression tree stored as a node array with the root at index 0.
///
/// Serializes as parallel arrays (`feature` is -1 for leaves).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "FlatTree", try_from = "FlatTree")]
pub struct RegressionTree {
    nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn from_nodes(nodes: Vec<Node>) -> Self {
        assert!(!nodes.is_empty(), "a tree needs at least a root");
        Self { nodes }
    }

    pub fn leaf(value: f64) -> Self {
        Self { nodes: alloc::vec![Node::Leaf { value }] }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Index of the leaf reached by `row`.
    #[inline]
    pub fn leaf_index(&self, row: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { .. } => return i,
                Node::Split { feature, threshold, left, right } => {
                    i = if row[feature] < threshold { left } else { right };
                }
            }
        }
    }

    #[inline]
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        match self.nodes[self.leaf_index(row)] {
            Node::Leaf { value } => value,
            Node::Split { .. } => unreachable!(),
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }

    pub fn leaf_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf { value } => Some(*value),
            Node::Split { .. } => None,
        })
    }

    pub fn max_feature(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { feature, .. } => Some(*feature),
                Node::Leaf { .. } => None,
            })
            .max()
    }
}

#[derive(Serialize, Deserialize)]
struct FlatTree {
    feature: Vec<i64>,
    threshold: Vec<f64>,
    left: Vec<i64>,
    right: Vec<i64>,
    value: Vec<f64>,
}

impl From<RegressionTree> for FlatTree {
    fn from(t: RegressionTree) -> Self {
        let n = t.nodes.len();
        let mut f = FlatTree {
            feature: Vec::with_capacity(n),
            threshold: Vec::with_capacity(n),
            left: Vec::with_capacity(n),
            right: Vec::with_capacity(n),
            value: Vec::with_capacity(n),
        };
        for node in t.nodes {
            match node {
                Node::Split { feature, threshold, left, right } => {
                    f.feature.push(feature as i64);
                    f.threshold.push(threshold);
                    f.left.push(left as i64);
                    f.right.push(right as i64);
                    f.value.push(0.0);
                }
                Node::Leaf { value } => {
                    f.feature.push(-1);
                    f.threshold.push(0.0);
                    f.left.push(-1);
                    f.right.push(-1);
                    f.value.push(value);
                }
            }
        }
        f
    }
}

impl TryFrom<FlatTree> for RegressionTree {
    type Error = String;

    fn try_from(f: FlatTree) -> Result<Self, Self::Error> {
        let n = f.feature.len();
        if n == 0 {
            return Err("tree has no nodes".into());
        }
        if [f.threshold.len(), f.left.len(), f.right.len(), f.value.len()].iter().any(|&l| l != n) {
            return Err("tree arrays have different lengths".into());
        }
        let mut nodes = Vec::with_capacity(n);
        for i in 0..n {
            if f.feature[i] < 0 {
                nodes.push(Node::Leaf { value: f.value[i] });
                continue;
            }
            let (l, r) = (f.left[i], f.right[i]);
            // Children always follow their parent, which also rules out cycles.
            if l <= i as i64 || r <= i as i64 || l as usize >= n || r as usize >= n {
                return Err(alloc::format!("node {i} has invalid children ({l}, {r})"));
            }
            nodes.push(Node::Split {
                feature: f.feature[i] as usize,
                threshold: f.threshold[i],
                left: l as usize,
                right: r as usize,
            });
        }
        Ok(RegressionTree { nodes })
    }
}

use crate::{Matrix, Result};

/// Training targets for a single tree.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Targets<'a> {
    Classes { labels: &'a [usize], n_classes: usize },
    Values(&'a [f64]),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf(usize),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Axis-aligned binary tree. Leaves hold a class-probability vector
/// (Gini splits) or a mean value (variance splits).
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    /// Leaf payloads, `width` values per leaf.
    leaves: Vec<f64>,
    width: usize,
}

impl DecisionTree {
    /// Leaf payload reached by `row`: class probabilities, or a single value.
    pub fn leaf_for(&self, row: &[f64]) -> &[f64] {
        let mut id = 0;
        loop {
            match self.nodes[id] {
                Node::Leaf(leaf) => return &self.leaves[leaf * self.width..(leaf + 1) * self.width],
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.leaves.len() / self.width
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], id: usize) -> usize {
            match nodes[id] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }

    /// Grows a tree on the rows listed in `sample` (repeats allowed).
    ///
    /// Split candidates are midpoints between consecutive distinct values.
    /// The best weighted impurity decrease wins; equal gains keep the lowest
    /// feature index, then the lowest threshold.
    pub(crate) fn fit(x: &Matrix, targets: Targets<'_>, sample: &[usize], params: TreeParams) -> Result<Self> {
        let width = match targets {
            Targets::Classes { n_classes, .. } => n_classes,
            Targets::Values(_) => 1,
        };
        let mut builder = Builder {
            x,
            targets,
            sample,
            params,
            nodes: Vec::new(),
            leaves: Vec::new(),
            width,
            goes_left: vec![false; sample.len()],
            counts: vec![0; width],
        };
        let sorted: Vec<Vec<u32>> = (0..x.cols())
            .map(|f| {
                let mut order: Vec<u32> = (0..sample.len() as u32).collect();
                order.sort_by(|&a, &b| {
                    x.get(sample[a as usize], f)
                        .total_cmp(&x.get(sample[b as usize], f))
                        .then(a.cmp(&b))
                });
                order
            })
            .collect();
        let all: Vec<u32> = (0..sample.len() as u32).collect();
        builder.grow(sorted, all, 0);
        Ok(DecisionTree {
            nodes: builder.nodes,
            leaves: builder.leaves,
            width,
        })
    }
}

struct Builder<'a> {
    x: &'a Matrix,
    targets: Targets<'a>,
    sample: &'a [usize],
    params: TreeParams,
    nodes: Vec<Node>,
    leaves: Vec<f64>,
    width: usize,
    goes_left: Vec<bool>,
    counts: Vec<usize>,
}

struct Split {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl Builder<'_> {
    #[inline]
    fn value(&self, pos: u32, feature: usize) -> f64 {
        self.x.get(self.sample[pos as usize], feature)
    }

    /// `members` lists the node's sample positions; `sorted[f]` holds the same
    /// positions ordered by feature `f` (empty when there are no features).
    fn grow(&mut self, sorted: Vec<Vec<u32>>, members: Vec<u32>, depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf(0));

        let n = members.len();
        let can_split = self.params.max_depth.is_none_or(|d| depth < d)
            && n >= 2 * self.params.min_leaf.max(1)
            && !self.is_pure(&members);
        let split = if can_split { self.best_split(&sorted) } else { None };

        let Some(split) = split else {
            let leaf = self.push_leaf(&members);
            self.nodes[id] = Node::Leaf(leaf);
            return id;
        };

        for &p in &members {
            self.goes_left[p as usize] = self.value(p, split.feature) <= split.threshold;
        }
        let (left_members, right_members): (Vec<u32>, Vec<u32>) =
            members.iter().partition(|&&p| self.goes_left[p as usize]);
        let mut left_sorted = Vec::with_capacity(sorted.len());
        let mut right_sorted = Vec::with_capacity(sorted.len());
        for list in sorted {
            let (l, r): (Vec<u32>, Vec<u32>) = list.into_iter().partition(|&p| self.goes_left[p as usize]);
            left_sorted.push(l);
            right_sorted.push(r);
        }
        drop(members);

        let left = self.grow(left_sorted, left_members, depth + 1);
        let right = self.grow(right_sorted, right_members, depth + 1);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }

    fn is_pure(&self, members: &[u32]) -> bool {
        match self.targets {
            Targets::Classes { labels, .. } => {
                let first = labels[self.sample[members[0] as usize]];
                members.iter().all(|&p| labels[self.sample[p as usize]] == first)
            }
            Targets::Values(values) => {
                let first = values[self.sample[members[0] as usize]];
                members.iter().all(|&p| values[self.sample[p as usize]] == first)
            }
        }
    }

    fn push_leaf(&mut self, members: &[u32]) -> usize {
        let leaf = self.leaves.len() / self.width;
        let n = members.len() as f64;
        match self.targets {
            Targets::Classes { labels, n_classes } => {
                let mut counts = vec![0usize; n_classes];
                for &p in members {
                    counts[labels[self.sample[p as usize]]] += 1;
                }
                self.leaves.extend(counts.iter().map(|&c| c as f64 / n));
            }
            Targets::Values(values) => {
                let sum: f64 = members.iter().map(|&p| values[self.sample[p as usize]]).sum();
                self.leaves.push(sum / n);
            }
        }
        leaf
    }

    fn best_split(&mut self, sorted: &[Vec<u32>]) -> Option<Split> {
        let mut best: Option<Split> = None;
        for (feature, order) in sorted.iter().enumerate() {
            let candidate = match self.targets {
                Targets::Classes { labels, .. } => self.scan_gini(feature, order, labels),
                Targets::Values(values) => self.scan_variance(feature, order, values),
            };
            if let Some(c) = candidate {
                if best.as_ref().is_none_or(|b| c.gain > b.gain) {
                    best = Some(c);
                }
            }
        }
        best
    }

    /// Best split on one feature by Gini decrease. Works with
    /// `sum_c n_c^2 / n` per side, which the weighted Gini impurity subtracts
    /// from the node size.
    fn scan_gini(&mut self, feature: usize, order: &[u32], labels: &[usize]) -> Option<Split> {
        let n = order.len();
        let min_leaf = self.params.min_leaf.max(1);
        self.counts.iter_mut().for_each(|c| *c = 0);
        for &p in order {
            self.counts[labels[self.sample[p as usize]]] += 1;
        }
        let mut right = self.counts.clone();
        let mut left = vec![0usize; self.width];
        let mut sq_right: f64 = right.iter().map(|&c| (c * c) as f64).sum();
        let mut sq_left = 0.0;
        let parent = sq_right / n as f64;
        let mut best: Option<Split> = None;
        for i in 0..n - 1 {
            let c = labels[self.sample[order[i] as usize]];
            sq_left += (2 * left[c] + 1) as f64;
            sq_right -= (2 * right[c] - 1) as f64;
            left[c] += 1;
            right[c] -= 1;
            let nl = i + 1;
            let nr = n - nl;
            if nl < min_leaf || nr < min_leaf {
                continue;
            }
            let a = self.value(order[i], feature);
            let b = self.value(order[i + 1], feature);
            if a == b {
                continue;
            }
            let gain = sq_left / nl as f64 + sq_right / nr as f64 - parent;
            if gain > GAIN_TOL * n as f64 && best.as_ref().is_none_or(|s| gain > s.gain) {
                best = Some(Split {
                    feature,
                    threshold: midpoint(a, b),
                    gain,
                });
            }
        }
        best
    }

    /// Best split on one feature by decrease in summed squared error.
    fn scan_variance(&self, feature: usize, order: &[u32], values: &[f64]) -> Option<Split> {
        let n = order.len();
        let min_leaf = self.params.min_leaf.max(1);
        let total: f64 = order.iter().map(|&p| values[self.sample[p as usize]]).sum();
        let parent = total * total / n as f64;
        let scale: f64 = order
            .iter()
            .map(|&p| {
                let v = values[self.sample[p as usize]];
                v * v
            })
            .sum::<f64>()
            .max(1.0);
        let mut sum_left = 0.0;
        let mut best: Option<Split> = None;
        for i in 0..n - 1 {
            sum_left += values[self.sample[order[i] as usize]];
            let nl = i + 1;
            let nr = n - nl;
            if nl < min_leaf || nr < min_leaf {
                continue;
            }
            let a = self.value(order[i], feature);
            let b = self.value(order[i + 1], feature);
            if a == b {
                continue;
            }
            let sum_right = total - sum_left;
            let gain = sum_left * sum_left / nl as f64 + sum_right * sum_right / nr as f64 - parent;
            if gain > GAIN_TOL * scale && best.as_ref().is_none_or(|s| gain > s.gain) {
                best = Some(Split {
                    feature,
                    threshold: midpoint(a, b),
                    gain,
                });
            }
        }
        best
    }
}

/// Gains below this (relative) level are treated as rounding noise.
const GAIN_TOL: f64 = 1e-12;

/// Midpoint of `a < b` that still separates them after rounding.
fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m < b {
        m
    } else {
        a
    }
}

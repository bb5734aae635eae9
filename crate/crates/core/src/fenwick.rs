use alloc::vec::Vec;

/// Binary indexed tree over non-negative weights, used to draw an index with
/// probability proportional to its weight in O(log n).
///
/// Weights are kept alongside the tree so that accumulated floating-point
/// drift from delta updates can be flushed by a periodic rebuild.
#[derive(Clone, Debug, Default)]
pub(crate) struct Fenwick {
    tree: Vec<f64>,
    weights: Vec<f64>,
    updates: usize,
}

impl Fenwick {
    pub(crate) fn len(&self) -> usize {
        self.weights.len()
    }

    pub(crate) fn weight(&self, index: usize) -> f64 {
        self.weights[index]
    }

    pub(crate) fn push(&mut self, weight: f64) {
        let index = self.weights.len() + 1;
        let low = index & index.wrapping_neg();
        let node = weight + self.prefix(index - 1) - self.prefix(index - low);
        self.weights.push(weight);
        self.tree.push(node);
    }

    pub(crate) fn set(&mut self, index: usize, weight: f64) {
        let delta = weight - self.weights[index];
        if delta == 0.0 {
            return;
        }
        self.weights[index] = weight;
        let mut i = index + 1;
        while i <= self.tree.len() {
            self.tree[i - 1] += delta;
            i += i & i.wrapping_neg();
        }
        self.updates += 1;
        if self.updates > 4 * self.len().max(1024) {
            self.rebuild();
        }
    }

    /// Sum of the first `count` weights.
    fn prefix(&self, count: usize) -> f64 {
        let mut sum = 0.0;
        let mut i = count;
        while i > 0 {
            sum += self.tree[i - 1];
            i &= i - 1;
        }
        sum
    }

    pub(crate) fn total(&self) -> f64 {
        self.prefix(self.len())
    }

    /// Index whose cumulative weight interval contains `target`.
    pub(crate) fn find(&self, mut target: f64) -> usize {
        let n = self.tree.len();
        if n == 0 {
            return 0;
        }
        let mut pos = 0;
        let mut step = 1usize << (usize::BITS - 1 - n.leading_zeros());
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next - 1] <= target {
                pos = next;
                target -= self.tree[next - 1];
            }
            step >>= 1;
        }
        pos.min(n - 1)
    }

    fn rebuild(&mut self) {
        let n = self.weights.len();
        self.tree.clear();
        self.tree.extend_from_slice(&self.weights);
        for i in 1..=n {
            let parent = i + (i & i.wrapping_neg());
            if parent <= n {
                let v = self.tree[i - 1];
                self.tree[parent - 1] += v;
            }
        }
        self.updates = 0;
    }
}

//! Dense arrays of polynomial components, indexed row-major.

use crate::poly::PolyField;

#[derive(Clone, Debug, PartialEq)]
pub struct PolyTensor {
    dim: usize,
    rank: usize,
    num_vars: usize,
    data: Vec<PolyField>,
}

impl PolyTensor {
    /// All-zero tensor with `rank` indices, each ranging over `0..dim`.
    pub fn zeros(dim: usize, rank: usize, num_vars: usize) -> Self {
        Self {
            dim,
            rank,
            num_vars,
            data: vec![PolyField::zero(num_vars); dim.pow(rank as u32)],
        }
    }

    pub fn from_fn<F>(dim: usize, rank: usize, num_vars: usize, mut f: F) -> Self
    where
        F: FnMut(&[usize]) -> PolyField,
    {
        let mut t = Self::zeros(dim, rank, num_vars);
        for flat in 0..t.data.len() {
            let idx = t.unflatten(flat);
            t.data[flat] = f(&idx);
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn get(&self, idx: &[usize]) -> &PolyField {
        &self.data[self.flatten(idx)]
    }

    pub fn get_mut(&mut self, idx: &[usize]) -> &mut PolyField {
        let flat = self.flatten(idx);
        &mut self.data[flat]
    }

    pub fn set(&mut self, idx: &[usize], value: PolyField) {
        debug_assert_eq!(value.num_vars(), self.num_vars);
        *self.get_mut(idx) = value;
    }

    /// Iterates `(multi-index, component)` pairs in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, &PolyField)> + '_ {
        self.data
            .iter()
            .enumerate()
            .map(|(flat, p)| (self.unflatten(flat), p))
    }

    pub fn components(&self) -> &[PolyField] {
        &self.data
    }

    /// Values of every component at `x`, row-major.
    pub fn eval_at(&self, x: &[f64]) -> Vec<f64> {
        self.data.iter().map(|p| p.value_at(x)).collect()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.data.iter().fold(0.0, |m, p| m.max(p.max_abs_coeff()))
    }

    /// Largest coefficient magnitude over all component differences.
    pub fn max_abs_diff(&self, other: &PolyTensor) -> f64 {
        assert_eq!(self.data.len(), other.data.len(), "tensor shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max(a.max_abs_diff(b)))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(PolyField::is_zero)
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank);
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < self.dim);
            acc * self.dim + i
        })
    }

    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.rank];
        for slot in idx.iter_mut().rev() {
            *slot = flat % self.dim;
            flat /= self.dim;
        }
        idx
    }
}

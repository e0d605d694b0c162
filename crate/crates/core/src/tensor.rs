//! Dense tensors with the same linearization as [`crate::segre::linear_index`].

use crate::field::Field;
use crate::segre::{linear_index, multi_index};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tensor<T> {
    dims: Vec<usize>,
    data: Vec<T>,
}

impl<T: Clone> Tensor<T> {
    pub fn from_vec(dims: Vec<usize>, data: Vec<T>) -> Self {
        assert_eq!(data.len(), dims.iter().product::<usize>());
        Self { dims, data }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn get(&self, multi: &[usize]) -> &T {
        &self.data[linear_index(&self.dims, multi).expect("index in range")]
    }

    pub fn map<U: Clone>(&self, f: impl FnMut(&T) -> U) -> Tensor<U> {
        Tensor::from_vec(self.dims.clone(), self.data.iter().map(f).collect())
    }

    /// Permutes modes: mode `k` of the result is mode `perm[k]` of `self`.
    pub fn permute_modes(&self, perm: &[usize]) -> Self {
        let dims: Vec<usize> = perm.iter().map(|&k| self.dims[k]).collect();
        let mut src = vec![0; self.dims.len()];
        let data = (0..self.data.len())
            .map(|idx| {
                let m = multi_index(&dims, idx).expect("in range");
                for (k, &p) in perm.iter().enumerate() {
                    src[p] = m[k];
                }
                self.get(&src).clone()
            })
            .collect();
        Self::from_vec(dims, data)
    }
}

impl<T: Clone> Tensor<T> {
    pub fn zeros<F: Field<Elem = T>>(field: &F, dims: Vec<usize>) -> Self {
        let n = dims.iter().product();
        Self::from_vec(dims, vec![field.zero(); n])
    }

    /// `v1 ⊗ v2 ⊗ ... ⊗ vd`.
    pub fn outer<F: Field<Elem = T>>(field: &F, factors: &[Vec<T>]) -> Self {
        let mut data = vec![field.one()];
        for f in factors {
            data = data
                .iter()
                .flat_map(|a| f.iter().map(move |b| (a, b)))
                .map(|(a, b)| field.mul(a, b))
                .collect();
        }
        Self::from_vec(factors.iter().map(Vec::len).collect(), data)
    }

    pub fn add_assign<F: Field<Elem = T>>(&mut self, field: &F, other: &Self) {
        assert_eq!(self.dims, other.dims);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a = field.add(a, b);
        }
    }

    pub fn scale<F: Field<Elem = T>>(&self, field: &F, s: &T) -> Self {
        self.map(|v| field.mul(v, s))
    }

    /// Multiplies mode `k` by `m` (shape `p x n_k`), giving mode size `p`.
    pub fn mode_product<F: Field<Elem = T>>(&self, field: &F, k: usize, m: &crate::linalg::Matrix<T>) -> Self {
        assert_eq!(m.cols(), self.dims[k]);
        let outer: usize = self.dims[..k].iter().product();
        let inner: usize = self.dims[k + 1..].iter().product();
        let (n, p) = (self.dims[k], m.rows());
        let mut dims = self.dims.clone();
        dims[k] = p;
        let mut data = vec![field.zero(); outer * p * inner];
        for o in 0..outer {
            for a in 0..p {
                for b in 0..n {
                    let c = m.get(a, b);
                    if field.is_zero(c) {
                        continue;
                    }
                    let src = &self.data[(o * n + b) * inner..(o * n + b + 1) * inner];
                    let dst = &mut data[(o * p + a) * inner..(o * p + a + 1) * inner];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d = field.add(d, &field.mul(c, s));
                    }
                }
            }
        }
        Self::from_vec(dims, data)
    }
}

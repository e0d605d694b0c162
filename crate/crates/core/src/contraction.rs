//! Flattenings and Young flattenings of third-order tensors.
//!
//! The Young flattening of `T` is the matrix of
//! `F^{n1} ⊗ ∧^p F^{n3} → F^{n2} ⊗ ∧^{p+1} F^{n3}`,
//! `f ⊗ g ↦ (a1·f) a2 ⊗ (g ∧ a3)` on rank-one terms, extended linearly.

use std::collections::HashMap;

use thiserror::Error;

use crate::field::Field;
use crate::linalg::Matrix;
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContractionError {
    #[error("not applicable: {0}")]
    NotApplicable(String),
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// The `p`-subsets of `{0..n}` in lexicographic order, a basis of `∧^p F^n`.
#[derive(Debug, Clone)]
pub struct WedgeBasis {
    n: usize,
    p: usize,
    subsets: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

impl WedgeBasis {
    pub fn new(n: usize, p: usize) -> Self {
        let mut subsets = Vec::with_capacity(binomial(n, p));
        let mut cur = Vec::with_capacity(p);
        fn rec(start: usize, n: usize, p: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == p {
                out.push(cur.clone());
                return;
            }
            for s in start..n {
                cur.push(s);
                rec(s + 1, n, p, cur, out);
                cur.pop();
            }
        }
        rec(0, n, p, &mut cur, &mut subsets);
        let index = subsets.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Self { n, p, subsets, index }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    pub fn index_of(&self, subset: &[usize]) -> Option<usize> {
        self.index.get(subset).copied()
    }

    /// `e_S ∧ e_t = sign · e_{S ∪ {t}}`: `-1` to the number of elements of
    /// `S` above `t`. `None` when `t ∈ S`.
    pub fn sign(subset: &[usize], t: usize) -> Option<i64> {
        if subset.contains(&t) {
            return None;
        }
        let above = subset.iter().filter(|&&s| s > t).count();
        Some(if above % 2 == 0 { 1 } else { -1 })
    }

    /// `S ∪ {t}`, sorted.
    pub fn insert(subset: &[usize], t: usize) -> Vec<usize> {
        let mut s = subset.to_vec();
        let pos = s.partition_point(|&x| x < t);
        s.insert(pos, t);
        s
    }
}

#[derive(Debug, Clone)]
pub struct YoungFlattening<E> {
    pub matrix: Matrix<E>,
    pub p: usize,
    pub n1: usize,
    pub n2: usize,
    /// Basis of `∧^p F^{n3}` indexing the column blocks.
    pub domain: WedgeBasis,
    /// Basis of `∧^{p+1} F^{n3}` indexing the row blocks.
    pub codomain: WedgeBasis,
}

impl<E> YoungFlattening<E> {
    pub fn col_index(&self, i: usize, subset: usize) -> usize {
        subset * self.n1 + i
    }

    pub fn row_index(&self, j: usize, subset: usize) -> usize {
        subset * self.n2 + j
    }
}

fn dims3<T: Clone>(tensor: &Tensor<T>) -> Result<[usize; 3], ContractionError> {
    match *tensor.dims() {
        [a, b, c] => Ok([a, b, c]),
        _ => Err(ContractionError::NotApplicable(format!(
            "order {} tensor, need order 3",
            tensor.order()
        ))),
    }
}

/// Mode-`mode` unfolding: `n_mode x Π/n_mode`, remaining modes in order with
/// the last one fastest.
pub fn flattening<T: Clone>(tensor: &Tensor<T>, mode: usize) -> Matrix<T> {
    let order = tensor.order();
    assert!(mode < order);
    let mut perm = vec![mode];
    perm.extend((0..order).filter(|&k| k != mode));
    let moved = tensor.permute_modes(&perm);
    let rows = tensor.dims()[mode];
    Matrix::from_vec(rows, tensor.as_slice().len() / rows, moved.as_slice().to_vec())
}

pub fn young_flattening<F: Field>(
    field: &F,
    tensor: &Tensor<F::Elem>,
    p: usize,
) -> Result<YoungFlattening<F::Elem>, ContractionError> {
    let [n1, n2, n3] = dims3(tensor)?;
    if p == 0 || p > n3 / 2 {
        return Err(ContractionError::NotApplicable(format!(
            "p = {p} outside 1..={}",
            n3 / 2
        )));
    }
    let domain = WedgeBasis::new(n3, p);
    let codomain = WedgeBasis::new(n3, p + 1);
    let mut m = Matrix::zeros(field, n2 * codomain.len(), n1 * domain.len());
    for (si, s) in domain.subsets().iter().enumerate() {
        for t in (0..n3).filter(|t| !s.contains(t)) {
            let ti = codomain.index_of(&WedgeBasis::insert(s, t)).expect("p+1 subset");
            let sign = WedgeBasis::sign(s, t).expect("t not in S");
            for i in 0..n1 {
                for j in 0..n2 {
                    let v = tensor.get(&[i, j, t]);
                    let v = if sign < 0 { field.neg(v) } else { v.clone() };
                    m.set(ti * n2 + j, si * n1 + i, v);
                }
            }
        }
    }
    Ok(YoungFlattening {
        matrix: m,
        p,
        n1,
        n2,
        domain,
        codomain,
    })
}

/// Cyclic mode shift applied `rotation` times; one shift sends entry
/// `(j, k, i)` of `T` to `(i, j, k)`.
///
/// The Young flattening of `rotate(T, 2)` is the contraction
/// `F^{n2} ⊗ ∧^p F^{n1} → F^{n3} ⊗ ∧^{p+1} F^{n1}`, and that of `rotate(T, 1)`
/// is `F^{n3} ⊗ ∧^p F^{n2} → F^{n1} ⊗ ∧^{p+1} F^{n2}`.
pub fn rotate<T: Clone>(tensor: &Tensor<T>, rotation: usize) -> Result<Tensor<T>, ContractionError> {
    dims3(tensor)?;
    let mut t = tensor.clone();
    for _ in 0..rotation % 3 {
        t = t.permute_modes(&[2, 0, 1]);
    }
    Ok(t)
}

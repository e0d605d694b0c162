//! Stacked Hessians of the hyperplane equations restricted to the Segre
//! variety, and the rank tests built on them.
//!
//! In the affine chart `a^k_1 = 1` around `e1 ⊗ ... ⊗ e1`, the Hessian of
//! `q_l(a) = Σ k_{m(i), l} a^1_{i1} ... a^d_{id}` has zero diagonal blocks and
//! off-diagonal block `(I, J)` with entry `(i, j)` equal to the coefficient at
//! the multi-index that is `i+1` in mode `I`, `j+1` in mode `J` and `1`
//! elsewhere. Other points are moved to the canonical one by a change of
//! basis in each mode.

use thiserror::Error;

use crate::field::Field;
use crate::linalg::{rank, Matrix};
use crate::segre::Shape;
use crate::tangent::RankOnePoint;
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HessianError {
    #[error("basis completion for mode {0} is singular")]
    SingularBasisCompletion(usize),
    #[error("kernel rows have length {found}, expected {expected}")]
    KernelShape { found: usize, expected: usize },
}

/// `H = [H^1 ... H^ℓ]`, each block `Σ x Σ`.
#[derive(Debug, Clone)]
pub struct StackedHessian<E> {
    pub h: Matrix<E>,
    pub sigma: usize,
    pub ell: usize,
    /// Which of the decomposition's points this was evaluated at, if any.
    pub point_index: Option<usize>,
}

impl<E: Clone + PartialEq> StackedHessian<E> {
    pub fn block(&self, l: usize) -> Matrix<E> {
        self.h.submatrix(0, self.sigma, l * self.sigma, (l + 1) * self.sigma)
    }

    /// Every block symmetric with zero diagonal blocks.
    pub fn is_well_formed<F: Field<Elem = E>>(&self, field: &F, shape: &Shape) -> bool {
        let offsets = shape.parameter_offsets();
        let sizes: Vec<usize> = shape.dims().iter().map(|n| n - 1).collect();
        (0..self.ell).all(|l| {
            let b = self.block(l);
            let symmetric = b == b.transpose();
            let zero_diag = offsets
                .iter()
                .zip(&sizes)
                .all(|(&o, &s)| (o..o + s).all(|i| (o..o + s).all(|j| field.is_zero(b.get(i, j)))));
            symmetric && zero_diag
        })
    }
}

/// Hessian at `e1 ⊗ ... ⊗ e1` from the kernel rows `k_t` (one per hyperplane).
pub fn canonical_hessian<F: Field>(
    field: &F,
    k_t: &Matrix<F::Elem>,
    shape: &Shape,
) -> Result<StackedHessian<F::Elem>, HessianError> {
    if k_t.cols() != shape.pi() {
        return Err(HessianError::KernelShape {
            found: k_t.cols(),
            expected: shape.pi(),
        });
    }
    let dims = shape.dims();
    let sigma = shape.sigma();
    let ell = k_t.rows();
    // (mode, coordinate) for each chart parameter.
    let params: Vec<(usize, usize)> = dims
        .iter()
        .enumerate()
        .flat_map(|(k, &n)| (1..n).map(move |i| (k, i)))
        .collect();
    let mut pairs = Vec::new();
    let mut multi = vec![0; dims.len()];
    for (row, &(mi, i)) in params.iter().enumerate() {
        for (col, &(mj, j)) in params.iter().enumerate() {
            if mi == mj {
                continue;
            }
            multi.fill(0);
            multi[mi] = i;
            multi[mj] = j;
            pairs.push((row, col, shape.linear_index(&multi).expect("in range")));
        }
    }
    let mut h = Matrix::zeros(field, sigma, ell * sigma);
    for l in 0..ell {
        let coeffs = k_t.row(l);
        for &(row, col, idx) in &pairs {
            h.set(row, l * sigma + col, coeffs[idx].clone());
        }
    }
    Ok(StackedHessian {
        h,
        sigma,
        ell,
        point_index: None,
    })
}

/// The deterministic change of basis for one factor `v`: the returned
/// matrix `C` is invertible with first column `v`, so `C^{-1} v = e1`.
///
/// Built by swapping coordinate 1 with the first nonzero coordinate `t` and
/// eliminating, which leaves `C = [v, P e2, ..., P en]` with `P` the swap.
pub fn default_completion<F: Field>(field: &F, v: &[F::Elem]) -> Option<Matrix<F::Elem>> {
    let n = v.len();
    let t = v.iter().position(|x| !field.is_zero(x))?;
    let mut c = Matrix::zeros(field, n, n);
    for (i, x) in v.iter().enumerate() {
        c.set(i, 0, x.clone());
    }
    for i in 1..n {
        let target = if i == t { 0 } else { i };
        c.set(target, i, field.one());
    }
    Some(c)
}

/// Hessian at an arbitrary point, using [`default_completion`] in every mode.
pub fn point_hessian<F: Field>(
    field: &F,
    k_t: &Matrix<F::Elem>,
    shape: &Shape,
    point: &RankOnePoint<F::Elem>,
) -> Result<StackedHessian<F::Elem>, HessianError> {
    let completions = point
        .factors
        .iter()
        .enumerate()
        .map(|(k, v)| default_completion(field, v).ok_or(HessianError::SingularBasisCompletion(k)))
        .collect::<Result<Vec<_>, _>>()?;
    point_hessian_with_completion(field, k_t, shape, &completions)
}

/// Hessian at the point whose factors are the first columns of
/// `completions`.
///
/// In coordinates `x = (C_1, ..., C_d) · x'` the point becomes canonical and
/// the hyperplane `k` becomes `(C_1^T, ..., C_d^T) · k`.
pub fn point_hessian_with_completion<F: Field>(
    field: &F,
    k_t: &Matrix<F::Elem>,
    shape: &Shape,
    completions: &[Matrix<F::Elem>],
) -> Result<StackedHessian<F::Elem>, HessianError> {
    if k_t.cols() != shape.pi() {
        return Err(HessianError::KernelShape {
            found: k_t.cols(),
            expected: shape.pi(),
        });
    }
    for (k, c) in completions.iter().enumerate() {
        if rank(field, c) != c.rows() {
            return Err(HessianError::SingularBasisCompletion(k));
        }
    }
    let transposed: Vec<Matrix<F::Elem>> = completions.iter().map(Matrix::transpose).collect();
    let rows: Vec<Vec<F::Elem>> = (0..k_t.rows())
        .map(|l| {
            let mut t = Tensor::from_vec(shape.dims().to_vec(), k_t.row(l).to_vec());
            for (k, ct) in transposed.iter().enumerate() {
                t = t.mode_product(field, k, ct);
            }
            t.as_slice().to_vec()
        })
        .collect();
    let moved = Matrix::from_rows(rows, shape.pi());
    canonical_hessian(field, &moved, shape)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum S7Mode {
    /// Proof needs rank Σ.
    Standard { target: usize },
    /// `n1 − 1 > ℓ Σ'`: the rank can be at most `(ℓ+1) Σ'`, and reaching
    /// that bound still proves identifiability.
    WeaklyDefective { target: usize },
}

impl S7Mode {
    pub fn target(&self) -> usize {
        match *self {
            Self::Standard { target } | Self::WeaklyDefective { target } => target,
        }
    }
}

pub fn classify_s7(shape: &Shape, ell: usize) -> S7Mode {
    let tail = shape.sigma_tail();
    if shape.dims()[0] - 1 > ell * tail {
        S7Mode::WeaklyDefective {
            target: (ell + 1) * tail,
        }
    } else {
        S7Mode::Standard { target: shape.sigma() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HessianCheck {
    pub rank: usize,
    pub mode: S7Mode,
    pub proved: bool,
}

pub fn hessian_verdict<F: Field>(field: &F, h: &StackedHessian<F::Elem>, mode: S7Mode) -> HessianCheck {
    let r = rank(field, &h.h);
    HessianCheck {
        rank: r,
        mode,
        proved: r == mode.target(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{PrimeField, RationalField};
    use crate::tangent::{assemble, hyperplane_kernel, sample_points, KernelStatus};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn s(d: &[usize]) -> Shape {
        Shape::new(d.to_vec()).unwrap()
    }

    fn kernel<F: Field>(
        f: &F,
        sh: &Shape,
        r: usize,
        seed: u64,
        first: bool,
    ) -> (Matrix<F::Elem>, Vec<RankOnePoint<F::Elem>>) {
        let pts = sample_points(f, sh, r, seed, first);
        let a = assemble(f, sh, &pts, true).unwrap();
        let (k, st) = hyperplane_kernel(f, &a).unwrap();
        assert_eq!(st, KernelStatus::Ok);
        (k, pts)
    }

    #[test]
    fn zero_kernel_row_gives_zero_hessian() {
        let f = PrimeField::new(127).unwrap();
        let sh = s(&[3, 3, 2]);
        let k = Matrix::zeros(&f, 2, sh.pi());
        let h = canonical_hessian(&f, &k, &sh).unwrap();
        assert!(h.h.is_zero(&f));
        assert_eq!((h.h.rows(), h.h.cols()), (5, 10));
    }

    #[test]
    fn support_off_two_slot_pattern_is_invisible() {
        let f = PrimeField::new(127).unwrap();
        let sh = s(&[3, 3, 3]);
        let mut k = Matrix::zeros(&f, 1, sh.pi());
        // Three non-unit slots, and the all-ones index.
        k.set(0, sh.linear_index(&[1, 2, 1]).unwrap(), 5);
        k.set(0, sh.linear_index(&[2, 2, 2]).unwrap(), 7);
        k.set(0, 0, 3);
        assert!(canonical_hessian(&f, &k, &sh).unwrap().h.is_zero(&f));
    }

    #[test]
    fn canonical_555_rank_nine_is_full() {
        let f = PrimeField::new(127).unwrap();
        let sh = s(&[5, 5, 5]);
        let (k, _) = kernel(&f, &sh, 9, 0, true);
        let h = canonical_hessian(&f, &k, &sh).unwrap();
        assert_eq!((h.h.rows(), h.h.cols()), (12, 96));
        assert!(h.is_well_formed(&f, &sh));
        let check = hessian_verdict(&f, &h, classify_s7(&sh, 8));
        assert_eq!(check.rank, 12);
        assert!(check.proved);
    }

    #[test]
    fn point_hessian_at_canonical_point_is_canonical() {
        let f = PrimeField::new(127).unwrap();
        let sh = s(&[4, 3, 3]);
        let (k, pts) = kernel(&f, &sh, 3, 1, true);
        let a = canonical_hessian(&f, &k, &sh).unwrap();
        let b = point_hessian(&f, &k, &sh, &pts[0]).unwrap();
        assert_eq!(a.h, b.h);
    }

    #[test]
    fn default_completion_is_invertible_and_maps_to_e1() {
        let f = RationalField;
        let v: Vec<_> = [0, 0, 3, -1].iter().map(|&x| f.from_i64(x)).collect();
        let c = default_completion(&f, &v).unwrap();
        assert_eq!(rank(&f, &c), 4);
        assert_eq!(c.column(0), v);
        assert!(default_completion(&f, &vec![f.zero(); 3]).is_none());
    }

    fn random_completion(f: &PrimeField, v: &[u32], rng: &mut ChaCha8Rng) -> Matrix<u32> {
        let n = v.len();
        loop {
            let mut c = Matrix::zeros(f, n, n);
            for i in 0..n {
                c.set(i, 0, v[i]);
                for j in 1..n {
                    c.set(i, j, rng.random_range(0..f.modulus()));
                }
            }
            if rank(f, &c) == n {
                return c;
            }
        }
    }

    #[test]
    fn chart_rank_does_not_depend_on_completion() {
        let f = PrimeField::new(8191).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut cases = 0;
        for seed in 0..40u64 {
            let dims = [vec![4, 4, 3], vec![5, 4, 3], vec![3, 3, 3, 2]][seed as usize % 3].clone();
            let sh = s(&dims);
            // Below rbar as well, where Hessians are far from full rank.
            let r = 1 + seed as usize % sh.rbar();
            if crate::segre::exception_lookup(&sh, r).is_some() {
                continue;
            }
            let pts = sample_points(&f, &sh, r, seed, false);
            let a = assemble(&f, &sh, &pts, true).unwrap();
            let (k, st) = hyperplane_kernel(&f, &a).unwrap();
            if st != KernelStatus::Ok {
                continue;
            }
            for p in &pts {
                let c1: Vec<_> = p.factors.iter().map(|v| random_completion(&f, v, &mut rng)).collect();
                let c2: Vec<_> = p.factors.iter().map(|v| random_completion(&f, v, &mut rng)).collect();
                let h1 = point_hessian_with_completion(&f, &k, &sh, &c1).unwrap();
                let h2 = point_hessian_with_completion(&f, &k, &sh, &c2).unwrap();
                let h0 = point_hessian(&f, &k, &sh, p).unwrap();
                assert!(h1.is_well_formed(&f, &sh) && h2.is_well_formed(&f, &sh));
                let r0 = rank(&f, &h0.h);
                assert_eq!(rank(&f, &h1.h), r0);
                assert_eq!(rank(&f, &h2.h), r0);
                cases += 1;
            }
        }
        assert!(cases >= 100, "only {cases} cases");
    }

    #[test]
    fn singular_completion_is_reported() {
        let f = PrimeField::new(127).unwrap();
        let sh = s(&[2, 2, 2]);
        let k = Matrix::zeros(&f, 1, 8);
        let sing = Matrix::from_vec(2, 2, vec![1, 1, 1, 1]);
        let id = Matrix::identity(&f, 2);
        let err = point_hessian_with_completion(&f, &k, &sh, &[id.clone(), sing, id]).unwrap_err();
        assert_eq!(err, HessianError::SingularBasisCompletion(1));
    }

    #[test]
    fn s7_classification() {
        let sh = s(&[8, 3, 3, 2]);
        assert_eq!(sh.rbar(), 11);
        assert_eq!(sh.ell(11), 1);
        assert_eq!(classify_s7(&sh, 1), S7Mode::WeaklyDefective { target: 10 });
        assert_eq!(classify_s7(&s(&[5, 5, 5]), 8), S7Mode::Standard { target: 12 });
        let six = s(&[6, 6, 6]);
        assert_eq!(six.ell(13), 8);
        assert_eq!(classify_s7(&six, 8), S7Mode::Standard { target: 15 });
    }

    #[test]
    fn sporadic_22222_never_reaches_sigma() {
        let f = PrimeField::new(8191).unwrap();
        let sh = s(&[2, 2, 2, 2, 2]);
        for seed in 0..4 {
            let (k, _) = kernel(&f, &sh, 5, seed, true);
            let h = canonical_hessian(&f, &k, &sh).unwrap();
            let check = hessian_verdict(&f, &h, classify_s7(&sh, k.rows()));
            assert!(!check.proved);
            assert!(check.rank < sh.sigma());
        }
    }

    #[test]
    fn weakly_defective_8332_hits_bound() {
        let f = PrimeField::new(127).unwrap();
        let sh = s(&[8, 3, 3, 2]);
        let mut proved = false;
        for seed in 0..3 {
            let (k, _) = kernel(&f, &sh, 11, seed, true);
            let h = canonical_hessian(&f, &k, &sh).unwrap();
            let check = hessian_verdict(&f, &h, classify_s7(&sh, 1));
            assert!(check.rank <= 10);
            proved |= check.proved;
        }
        assert!(proved);
    }
}

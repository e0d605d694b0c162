//! Tangent spaces to the Segre variety and the span H they generate.
//!
//! For a rank-one point `a1 ⊗ ... ⊗ ad` the tangent space is the column span
//! of `[T^1 ... T^d]` with `T^k = a1 ⊗ .. ⊗ I_{n_k} ⊗ .. ⊗ ad`. Stacking the
//! blocks of r points gives the Terracini matrix `T` whose left kernel holds
//! the coefficients of the hyperplanes containing H.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::field::Field;
use crate::linalg::{left_kernel, Matrix};
use crate::segre::Shape;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TangentError {
    #[error("kernel has {found} rows but at least {expected} were expected")]
    InternalError { found: usize, expected: i64 },
    #[error("point factor {0} is the zero vector")]
    ZeroFactor(usize),
    #[error("point does not match shape {0}")]
    ShapeMismatch(String),
}

/// One rank-one tensor, stored by its factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankOnePoint<E> {
    pub factors: Vec<Vec<E>>,
}

impl<E: Clone> RankOnePoint<E> {
    pub fn new<F: Field<Elem = E>>(field: &F, factors: Vec<Vec<E>>) -> Result<Self, TangentError> {
        if let Some(k) = factors.iter().position(|f| f.iter().all(|v| field.is_zero(v))) {
            return Err(TangentError::ZeroFactor(k));
        }
        Ok(Self { factors })
    }

    /// `e1 ⊗ ... ⊗ e1`.
    pub fn canonical<F: Field<Elem = E>>(field: &F, shape: &Shape) -> Self {
        let factors = shape
            .dims()
            .iter()
            .map(|&n| {
                let mut v = vec![field.zero(); n];
                v[0] = field.one();
                v
            })
            .collect();
        Self { factors }
    }

    fn check_shape(&self, shape: &Shape) -> Result<(), TangentError> {
        let ok =
            self.factors.len() == shape.order() && self.factors.iter().zip(shape.dims()).all(|(f, &n)| f.len() == n);
        if ok {
            Ok(())
        } else {
            Err(TangentError::ShapeMismatch(shape.to_string()))
        }
    }
}

/// `r` random points; with `canonical_first` the first one is `e1 ⊗ ... ⊗ e1`.
///
/// Deterministic in `seed`. Factors that come out as zero vectors are
/// redrawn.
pub fn sample_points<F: Field>(
    field: &F,
    shape: &Shape,
    r: usize,
    seed: u64,
    canonical_first: bool,
) -> Vec<RankOnePoint<F::Elem>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..r)
        .map(|i| {
            if i == 0 && canonical_first {
                return RankOnePoint::canonical(field, shape);
            }
            let factors = shape
                .dims()
                .iter()
                .map(|&n| loop {
                    let v: Vec<_> = (0..n).map(|_| field.random_element(&mut rng)).collect();
                    if v.iter().any(|x| !field.is_zero(x)) {
                        break v;
                    }
                })
                .collect();
            RankOnePoint { factors }
        })
        .collect()
}

/// The `Π x Σ n_k` matrix whose columns span the affine tangent space at
/// `point`: column `(k, j)` is the point with factor `k` replaced by `e_j`.
pub fn tangent_block<F: Field>(
    field: &F,
    shape: &Shape,
    point: &RankOnePoint<F::Elem>,
) -> Result<Matrix<F::Elem>, TangentError> {
    point.check_shape(shape)?;
    let dims = shape.dims();
    let d = dims.len();
    let offsets: Vec<usize> = dims
        .iter()
        .scan(0, |acc, n| {
            let o = *acc;
            *acc += n;
            Some(o)
        })
        .collect();
    let cols: usize = dims.iter().sum();
    let mut m = Matrix::zeros(field, shape.pi(), cols);
    let mut multi = vec![0usize; d];
    let mut prefix = vec![field.one(); d + 1];
    let mut suffix = vec![field.one(); d + 1];
    for row in 0..shape.pi() {
        for k in 0..d {
            prefix[k + 1] = field.mul(&prefix[k], &point.factors[k][multi[k]]);
        }
        for k in (0..d).rev() {
            suffix[k] = field.mul(&suffix[k + 1], &point.factors[k][multi[k]]);
        }
        for k in 0..d {
            // Product of all factors except the k-th.
            m.set(row, offsets[k] + multi[k], field.mul(&prefix[k], &suffix[k + 1]));
        }
        // Advance the multi-index, last mode fastest.
        for k in (0..d).rev() {
            multi[k] += 1;
            if multi[k] < dims[k] {
                break;
            }
            multi[k] = 0;
        }
    }
    Ok(m)
}

/// The Terracini matrix of a set of points.
#[derive(Debug, Clone)]
pub struct TangentAssembly<E> {
    pub t: Matrix<E>,
    pub trimmed: bool,
    pub points: Vec<RankOnePoint<E>>,
    /// `Π − r(Σ+1)`.
    pub expected_ell: i64,
}

/// Columns of a tangent block kept by trimming. In every block `k >= 2` the
/// column of the last nonzero coordinate of `a^k` is dropped: it equals `p`
/// minus the other columns of that block, and `p` already lies in block 1.
/// For generic points that is the last column.
fn trim_columns<F: Field>(field: &F, point: &RankOnePoint<F::Elem>) -> Vec<usize> {
    let mut keep = Vec::new();
    let mut off = 0;
    for (k, a) in point.factors.iter().enumerate() {
        let drop = if k > 0 {
            a.iter().rposition(|x| !field.is_zero(x))
        } else {
            None
        };
        keep.extend((0..a.len()).filter(|&i| Some(i) != drop).map(|i| off + i));
        off += a.len();
    }
    keep
}

/// Concatenates the tangent blocks of `points`. With `trim`, one redundant
/// column of every block `k >= 2` is dropped, leaving `r(Σ+1)` columns
/// without changing the rank.
pub fn assemble<F: Field>(
    field: &F,
    shape: &Shape,
    points: &[RankOnePoint<F::Elem>],
    trim: bool,
) -> Result<TangentAssembly<F::Elem>, TangentError> {
    assert!(!points.is_empty(), "need at least one point");
    let mut t: Option<Matrix<F::Elem>> = None;
    for p in points {
        let block = tangent_block(field, shape, p)?;
        let block = if trim {
            block.select_columns(&trim_columns(field, p))
        } else {
            block
        };
        t = Some(match t {
            None => block,
            Some(acc) => acc.hstack(&block),
        });
    }
    Ok(TangentAssembly {
        t: t.expect("nonempty"),
        trimmed: trim,
        points: points.to_vec(),
        expected_ell: shape.ell(points.len()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelStatus {
    /// `l = ℓ`: the points span a tangent space of the expected dimension.
    Ok,
    /// `l > ℓ`: either unlucky points or a defective secant variety.
    DefectiveSuspected,
}

/// Left kernel `K^T` of the assembly (one hyperplane per row) plus the
/// dimension check against ℓ.
pub fn hyperplane_kernel<F: Field>(
    field: &F,
    assembly: &TangentAssembly<F::Elem>,
) -> Result<(Matrix<F::Elem>, KernelStatus), TangentError> {
    let k = left_kernel(field, &assembly.t);
    let l = k.rows() as i64;
    match l.cmp(&assembly.expected_ell) {
        std::cmp::Ordering::Equal => Ok((k, KernelStatus::Ok)),
        std::cmp::Ordering::Greater => Ok((k, KernelStatus::DefectiveSuspected)),
        std::cmp::Ordering::Less => Err(TangentError::InternalError {
            found: k.rows(),
            expected: assembly.expected_ell,
        }),
    }
}

//! Smoothness certificate for a point of the `r`-th secant variety of a
//! three-factor Segre variety.
//!
//! Pairs `(u, w)` of right and left kernel vectors of the Young flattening
//! give linear forms `X ↦ wᵀ A_X u` that vanish on the tangent space of the
//! rank-locus of the flattening. If those forms span a space of dimension
//! `ℓ = Π − r(Σ+1)`, the point is smooth on the secant variety.

use serde::Serialize;
use thiserror::Error;

use crate::contraction::{binomial, rotate, young_flattening, ContractionError, WedgeBasis};
use crate::field::Field;
use crate::linalg::{left_kernel, rank, right_kernel, Matrix};
use crate::segre::Shape;
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmoothError {
    #[error(transparent)]
    NotApplicable(#[from] ContractionError),
    #[error("rotations must be 1, 2 or 3, got {0}")]
    BadRotations(usize),
    #[error("flattening rank {found} below r·C(n3−1,p) = {expected} (rotation {rotation})")]
    RankShortfall {
        rotation: usize,
        found: usize,
        expected: usize,
    },
}

/// Rotations in the order they are added: `A¹`, then `A²`, then `A³`.
pub const ROTATION_ORDER: [usize; 3] = [0, 2, 1];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RotationReport {
    pub rotation: usize,
    pub flattening_rank: usize,
    pub expected_rank: usize,
    pub kernel_dim: usize,
    pub cokernel_dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateStatus {
    /// Exact computation, image dimension equals ℓ.
    Certified,
    /// Passed over a finite field only.
    ModularEvidence,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SmoothnessCertificate {
    pub p: usize,
    pub rotations: Vec<RotationReport>,
    pub image_dim: usize,
    pub target: i64,
    pub passed: bool,
    pub exact: bool,
    pub reason: Option<String>,
}

impl SmoothnessCertificate {
    pub fn status(&self) -> CertificateStatus {
        match (self.passed, self.exact) {
            (true, true) => CertificateStatus::Certified,
            (true, false) => CertificateStatus::ModularEvidence,
            (false, _) => CertificateStatus::Failed,
        }
    }
}

/// `p = floor(n3 / 2)`.
pub fn default_p(n3: usize) -> usize {
    n3 / 2
}

/// Linear form `X ↦ wᵀ A_X u` as a tensor of the flattened tensor's shape.
fn conormal<F: Field>(
    field: &F,
    dims: [usize; 3],
    domain: &WedgeBasis,
    codomain: &WedgeBasis,
    u: &[F::Elem],
    w: &[F::Elem],
) -> Tensor<F::Elem> {
    let [n1, n2, n3] = dims;
    let mut x = vec![field.zero(); n1 * n2 * n3];
    for (si, s) in domain.subsets().iter().enumerate() {
        for t in (0..n3).filter(|t| !s.contains(t)) {
            let ti = codomain.index_of(&WedgeBasis::insert(s, t)).expect("p+1 subset");
            let neg = WedgeBasis::sign(s, t) == Some(-1);
            for a in 0..n1 {
                let ua = &u[si * n1 + a];
                if field.is_zero(ua) {
                    continue;
                }
                for b in 0..n2 {
                    let mut v = field.mul(ua, &w[ti * n2 + b]);
                    if neg {
                        v = field.neg(&v);
                    }
                    let slot = &mut x[(a * n2 + b) * n3 + t];
                    *slot = field.add(slot, &v);
                }
            }
        }
    }
    Tensor::from_vec(dims.to_vec(), x)
}

/// Dimension of the image of `⊕ ker A^i ⊗ (Im A^i)^⊥` in the ambient space,
/// over the first `rotations` contractions of [`ROTATION_ORDER`].
pub fn normal_space_image<F: Field>(
    field: &F,
    tensor: &Tensor<F::Elem>,
    r: usize,
    p: usize,
    rotations: usize,
) -> Result<SmoothnessCertificate, SmoothError> {
    if !(1..=3).contains(&rotations) {
        return Err(SmoothError::BadRotations(rotations));
    }
    let dims = tensor.dims().to_vec();
    if dims.len() != 3 {
        return Err(ContractionError::NotApplicable(format!("order {} tensor", dims.len())).into());
    }
    let pi: usize = dims.iter().product();
    let sigma: usize = dims.iter().map(|n| n - 1).sum();
    let target = pi as i64 - (r * (sigma + 1)) as i64;

    let mut reports = Vec::new();
    let mut forms: Vec<Vec<F::Elem>> = Vec::new();
    let mut reason = None;
    for &rot in &ROTATION_ORDER[..rotations] {
        let rt = rotate(tensor, rot)?;
        let y = young_flattening(field, &rt, p)?;
        let rdims = [rt.dims()[0], rt.dims()[1], rt.dims()[2]];
        let expected = r * binomial(rdims[2] - 1, p);
        let found = rank(field, &y.matrix);
        if found < expected {
            return Err(SmoothError::RankShortfall {
                rotation: rot,
                found,
                expected,
            });
        }
        if found > expected && reason.is_none() {
            reason = Some(format!(
                "flattening rank {found} exceeds r·C(n3−1,p) = {expected}: rank is above {r}"
            ));
        }
        let ker = right_kernel(field, &y.matrix);
        let coker = left_kernel(field, &y.matrix);
        reports.push(RotationReport {
            rotation: rot,
            flattening_rank: found,
            expected_rank: expected,
            kernel_dim: ker.cols(),
            cokernel_dim: coker.rows(),
        });
        let back = (3 - rot) % 3;
        for a in 0..ker.cols() {
            let u = ker.column(a);
            for b in 0..coker.rows() {
                let x = conormal(field, rdims, &y.domain, &y.codomain, &u, coker.row(b));
                forms.push(rotate(&x, back)?.as_slice().to_vec());
            }
        }
    }
    let image_dim = if forms.is_empty() {
        0
    } else {
        rank(field, &Matrix::from_rows(forms, pi))
    };
    if reason.is_none() && image_dim as i64 != target {
        reason = Some(format!("image dimension {image_dim} differs from ℓ = {target}"));
    }
    Ok(SmoothnessCertificate {
        p,
        rotations: reports,
        image_dim,
        target,
        passed: reason.is_none(),
        exact: field.characteristic().is_none(),
        reason,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ApplicabilityHint {
    InRange { rotations: usize },
    OutOfTabulatedRange,
}

/// Whether `(shape, r)` lies in the tabulated range where the certificate is
/// known to succeed for generic tensors. Advisory only.
pub fn applicability_hint(shape: &Shape, r: usize) -> ApplicabilityHint {
    let bound = match shape.dims() {
        [4, 4, 4] => 4,
        [5, 5, 5] => 7,
        [6, 6, 6] => 8,
        [7, 7, 7] => 11,
        [8, 8, 8] => 12,
        [9, 9, 9] if r == 16 => return ApplicabilityHint::InRange { rotations: 2 },
        [9, 9, 9] => 15,
        _ => 0,
    };
    if r >= 1 && r <= bound {
        ApplicabilityHint::InRange { rotations: 1 }
    } else {
        ApplicabilityHint::OutOfTabulatedRange
    }
}

//! Shape combinatorics of the Segre variety `P^{n1-1} x ... x P^{nd-1}`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SegreError {
    #[error("a tensor shape needs at least 3 modes, got {0}")]
    TooFewModes(usize),
    #[error("mode sizes must be at least 2 (squeeze singleton modes first), got {0:?}")]
    DegenerateMode(Vec<usize>),
    #[error("mode sizes must be non-increasing, got {0:?}")]
    NotSorted(Vec<usize>),
    #[error("cannot parse shape {0:?}")]
    Parse(String),
    #[error("multi-index {multi:?} out of range for {dims:?}")]
    IndexOutOfRange { dims: Vec<usize>, multi: Vec<usize> },
    #[error("linear index {0} out of range")]
    LinearOutOfRange(usize),
    #[error("{0} is only defined for third-order tensors")]
    NotApplicable(&'static str),
}

/// Mode sizes `n1 >= n2 >= ... >= nd >= 2`, `d >= 3`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Shape(Vec<usize>);

impl Shape {
    pub fn new(dims: Vec<usize>) -> Result<Self, SegreError> {
        if dims.len() < 3 {
            return Err(SegreError::TooFewModes(dims.len()));
        }
        if dims.iter().any(|&n| n < 2) {
            return Err(SegreError::DegenerateMode(dims));
        }
        if dims.windows(2).any(|w| w[0] < w[1]) {
            return Err(SegreError::NotSorted(dims));
        }
        Ok(Self(dims))
    }

    /// Sorts the dimensions into descending order before validating.
    pub fn normalized(mut dims: Vec<usize>) -> Result<Self, SegreError> {
        dims.sort_unstable_by(|a, b| b.cmp(a));
        Self::new(dims)
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    /// Π, the ambient dimension.
    pub fn pi(&self) -> usize {
        self.0.iter().product()
    }

    /// Σ, the dimension of the Segre variety.
    pub fn sigma(&self) -> usize {
        self.0.iter().map(|n| n - 1).sum()
    }

    /// Σ' = Σ over the modes after the first.
    pub fn sigma_tail(&self) -> usize {
        self.0[1..].iter().map(|n| n - 1).sum()
    }

    /// Largest rank the generic algorithm targets.
    pub fn rbar(&self) -> usize {
        self.pi().div_ceil(self.sigma() + 1) - 1
    }

    pub fn is_perfect(&self) -> bool {
        self.pi() % (self.sigma() + 1) == 0
    }

    /// Expected codimension of the r-secant variety, `Π − r(Σ+1)`.
    pub fn ell(&self, r: usize) -> i64 {
        self.pi() as i64 - (r * (self.sigma() + 1)) as i64
    }

    pub fn derive(&self) -> DerivedQuantities {
        let rbar = self.rbar();
        DerivedQuantities {
            pi: self.pi(),
            sigma: self.sigma(),
            rbar,
            perfect: self.is_perfect(),
            ell_at_rbar: self.ell(rbar),
        }
    }

    /// Offset of each mode's block of Σ chart parameters (`n_k - 1` each).
    pub fn parameter_offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.0
            .iter()
            .map(|n| {
                let o = acc;
                acc += n - 1;
                o
            })
            .collect()
    }

    pub fn linear_index(&self, multi: &[usize]) -> Result<usize, SegreError> {
        linear_index(&self.0, multi)
    }

    pub fn multi_index(&self, index: usize) -> Result<Vec<usize>, SegreError> {
        multi_index(&self.0, index)
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl FromStr for Shape {
    type Err = SegreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let dims = s
            .trim()
            .trim_start_matches('(')
            .trim_end_matches(')')
            .split([',', 'x'])
            .map(|p| p.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| SegreError::Parse(s.to_string()))?;
        Self::normalized(dims)
    }
}

impl TryFrom<Vec<usize>> for Shape {
    type Error = SegreError;
    fn try_from(v: Vec<usize>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<Shape> for Vec<usize> {
    fn from(s: Shape) -> Self {
        s.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DerivedQuantities {
    pub pi: usize,
    pub sigma: usize,
    pub rbar: usize,
    pub perfect: bool,
    pub ell_at_rbar: i64,
}

/// Zero-based row-major index, last mode fastest.
pub fn linear_index(dims: &[usize], multi: &[usize]) -> Result<usize, SegreError> {
    if dims.len() != multi.len() || multi.iter().zip(dims).any(|(i, n)| i >= n) {
        return Err(SegreError::IndexOutOfRange {
            dims: dims.to_vec(),
            multi: multi.to_vec(),
        });
    }
    Ok(multi.iter().zip(dims).fold(0, |acc, (i, n)| acc * n + i))
}

/// Inverse of [`linear_index`].
pub fn multi_index(dims: &[usize], mut index: usize) -> Result<Vec<usize>, SegreError> {
    if index >= dims.iter().product() {
        return Err(SegreError::LinearOutOfRange(index));
    }
    let mut out = vec![0; dims.len()];
    for (slot, n) in out.iter_mut().zip(dims).rev() {
        *slot = index % n;
        index /= n;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExceptionKind {
    Defective,
    Sporadic,
    Unbalanced,
}

impl fmt::Display for ExceptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Defective => "defective",
            Self::Sporadic => "sporadic",
            Self::Unbalanced => "unbalanced",
        })
    }
}

/// A known non-identifiable (shape, rank) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KnownException {
    pub kind: ExceptionKind,
    /// Short description of why identifiability fails.
    pub note: &'static str,
}

/// Looks `(shape, r)` up in the catalog of subgeneric ranks at which generic
/// identifiability is known to fail.
pub fn exception_lookup(shape: &Shape, r: usize) -> Option<KnownException> {
    let d = shape.dims();
    let hit = |kind, note| Some(KnownException { kind, note });
    match (d, r) {
        ([4, 4, 3], 5) => return hit(ExceptionKind::Defective, "5-secant is defective"),
        ([4, 4, 4], 6) => return hit(ExceptionKind::Sporadic, "generic tensor has two decompositions"),
        ([6, 6, 3], 8) => return hit(ExceptionKind::Sporadic, "not generically identifiable"),
        ([2, 2, 2, 2, 2], 5) => return hit(ExceptionKind::Sporadic, "not generically identifiable"),
        ([a, b, 2, 2], _) if a == b && r == 2 * a - 1 => {
            return hit(ExceptionKind::Defective, "(2n-1)-secant is defective")
        }
        _ => {}
    }
    let tail_product: usize = d[1..].iter().product();
    let threshold = tail_product - shape.sigma_tail();
    if d[0] > threshold && r >= threshold {
        return hit(ExceptionKind::Unbalanced, "n1 reaches the unbalanced threshold");
    }
    None
}

/// Largest `r` with `2r <= min(n1,r) + min(n2,r) + min(n3,r) - 2`.
pub fn kruskal_generic_bound(shape: &Shape) -> Result<usize, SegreError> {
    let [a, b, c] = shape.dims() else {
        return Err(SegreError::NotApplicable("Kruskal's bound"));
    };
    let holds = |r: usize| 2 * r + 2 <= a.min(&r) + b.min(&r) + c.min(&r);
    // The right-hand side stops growing once r >= n1.
    Ok((1..=a + b + c).filter(|&r| holds(r)).max().unwrap_or(0))
}

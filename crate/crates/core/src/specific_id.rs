//! Identifiability of one given decomposition.
//!
//! The decomposition is first compressed to its multilinear-rank core. The
//! core must be a smooth point of the secant variety (certified through a
//! Young flattening), the span of the tangent spaces at its points must have
//! the expected dimension, and the stacked Hessian must have full rank at
//! every point.

use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::field::{format_rational, parse_rational, Field, FieldError, PrimeField, Rational, RationalField};
use crate::hessian::point_hessian;
use crate::linalg::{rank, rref, Matrix};
use crate::segre::Shape;
use crate::smooth::{default_p, normal_space_image, SmoothError, SmoothnessCertificate};
use crate::tangent::{assemble, RankOnePoint};
use crate::tensor::Tensor;

#[derive(Debug, Error)]
pub enum DecompositionError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("entry {0}: expected an integer or a \"p/q\" string")]
    BadEntry(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("{0}")]
    Shape(String),
    #[error("column {column} of factor {mode} is zero")]
    ZeroColumn { mode: usize, column: usize },
}

/// Rank-`r` decomposition `Σ_i a_i^(1) ⊗ ... ⊗ a_i^(d)`; factor `k` is the
/// `n_k x r` matrix with columns `a_i^(k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition<E> {
    pub dims: Vec<usize>,
    pub r: usize,
    pub factors: Vec<Matrix<E>>,
}

#[derive(Serialize, Deserialize)]
struct DecompositionJson {
    shape: Vec<usize>,
    rank: usize,
    factors: Vec<Vec<Vec<Value>>>,
}

fn parse_entry(v: &Value) -> Result<Rational, DecompositionError> {
    match v {
        Value::Number(n) if n.is_i64() || n.is_u64() => Ok(parse_rational(&n.to_string())?),
        Value::String(s) => Ok(parse_rational(s)?),
        other => Err(DecompositionError::BadEntry(other.to_string())),
    }
}

fn entry_json(v: &Rational) -> Value {
    if v.is_integer() {
        if let Ok(n) = v.numer().to_string().parse::<i64>() {
            return Value::from(n);
        }
    }
    Value::String(format_rational(v))
}

impl Decomposition<Rational> {
    pub fn from_json_str(s: &str) -> Result<Self, DecompositionError> {
        let raw: DecompositionJson = serde_json::from_str(s)?;
        let factors = raw
            .factors
            .iter()
            .map(|rows| {
                let cols = rows.first().map_or(0, Vec::len);
                let data = rows
                    .iter()
                    .map(|row| {
                        if row.len() != cols {
                            return Err(DecompositionError::Shape("ragged factor matrix".into()));
                        }
                        row.iter().map(parse_entry).collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Matrix::from_rows(data, cols))
            })
            .collect::<Result<Vec<_>, DecompositionError>>()?;
        Self::new(&RationalField, raw.shape, raw.rank, factors)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, DecompositionError> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        let raw = DecompositionJson {
            shape: self.dims.clone(),
            rank: self.r,
            factors: self
                .factors
                .iter()
                .map(|m| {
                    (0..m.rows())
                        .map(|i| m.row(i).iter().map(entry_json).collect())
                        .collect()
                })
                .collect(),
        };
        serde_json::to_string(&raw).expect("serializable")
    }

    /// The same decomposition over GF(q).
    pub fn reduce(&self, field: &PrimeField) -> Result<Decomposition<u32>, DecompositionError> {
        let factors = self
            .factors
            .iter()
            .map(|m| {
                let data = m
                    .as_slice()
                    .iter()
                    .map(|v| field.from_rational(v))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Matrix::from_vec(m.rows(), m.cols(), data))
            })
            .collect::<Result<Vec<_>, DecompositionError>>()?;
        Decomposition::new(field, self.dims.clone(), self.r, factors)
    }
}

impl<E: Clone> Decomposition<E> {
    pub fn new<F: Field<Elem = E>>(
        field: &F,
        dims: Vec<usize>,
        r: usize,
        factors: Vec<Matrix<E>>,
    ) -> Result<Self, DecompositionError> {
        if r == 0 || dims.len() < 2 {
            return Err(DecompositionError::Shape(
                "need rank >= 1 and at least two factors".into(),
            ));
        }
        if factors.len() != dims.len() {
            return Err(DecompositionError::Shape(format!(
                "{} factor matrices for {} modes",
                factors.len(),
                dims.len()
            )));
        }
        for (k, (m, &n)) in factors.iter().zip(&dims).enumerate() {
            if (m.rows(), m.cols()) != (n, r) {
                return Err(DecompositionError::Shape(format!(
                    "factor {k} is {}x{}, expected {n}x{r}",
                    m.rows(),
                    m.cols()
                )));
            }
            if let Some(column) = (0..r).find(|&j| (0..n).all(|i| field.is_zero(m.get(i, j)))) {
                return Err(DecompositionError::ZeroColumn { mode: k, column });
            }
        }
        Ok(Self { dims, r, factors })
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    /// Rank-one term `i`.
    pub fn point(&self, i: usize) -> RankOnePoint<E> {
        RankOnePoint {
            factors: self.factors.iter().map(|m| m.column(i)).collect(),
        }
    }

    pub fn points(&self) -> Vec<RankOnePoint<E>> {
        (0..self.r).map(|i| self.point(i)).collect()
    }

    pub fn tensor<F: Field<Elem = E>>(&self, field: &F) -> Tensor<E> {
        let mut t = Tensor::zeros(field, self.dims.clone());
        for p in self.points() {
            t.add_assign(field, &Tensor::outer(field, &p.factors));
        }
        t
    }

    /// Modes reordered so the dimensions are non-increasing (stable).
    pub fn sorted(&self) -> Self {
        let mut order: Vec<usize> = (0..self.order()).collect();
        order.sort_by(|&a, &b| self.dims[b].cmp(&self.dims[a]));
        Self {
            dims: order.iter().map(|&k| self.dims[k]).collect(),
            r: self.r,
            factors: order.iter().map(|&k| self.factors[k].clone()).collect(),
        }
    }
}

/// A decomposition rewritten in bases of its factor column spaces.
#[derive(Debug, Clone)]
pub struct Compression<E> {
    pub core: Decomposition<E>,
    /// `Q_k`, `n_k x r_k`, chosen among the columns of `A^(k)`.
    pub bases: Vec<Matrix<E>>,
}

impl<E: Clone> Compression<E> {
    pub fn multilinear_ranks(&self) -> Vec<usize> {
        self.core.dims.clone()
    }

    /// `(Q_1, ..., Q_d) · core`.
    pub fn reconstruct<F: Field<Elem = E>>(&self, field: &F) -> Tensor<E> {
        let mut t = self.core.tensor(field);
        for (k, q) in self.bases.iter().enumerate() {
            t = t.mode_product(field, k, q);
        }
        t
    }
}

/// `A^(k) = Q_k X^(k)` with `Q_k` the pivot columns of `A^(k)` and `X^(k)`
/// the nonzero rows of its reduced echelon form.
pub fn compress<F: Field>(field: &F, dec: &Decomposition<F::Elem>) -> Compression<F::Elem> {
    let mut bases = Vec::new();
    let mut factors = Vec::new();
    for a in &dec.factors {
        let (e, pivots) = rref(field, a);
        bases.push(a.select_columns(&pivots));
        factors.push(e.submatrix(0, pivots.len(), 0, a.cols()));
    }
    let core = Decomposition {
        dims: factors.iter().map(Matrix::rows).collect(),
        r: dec.r,
        factors,
    };
    Compression { core, bases }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KruskalReport {
    pub k_ranks: Vec<usize>,
    pub r: usize,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KruskalError {
    #[error("Kruskal's test needs three factors, got {0}")]
    NotThreeFactors(usize),
    #[error("rank {r} above the subset enumeration cap {cap}")]
    TooLarge { r: usize, cap: usize },
}

pub const KRUSKAL_CAP: usize = 14;

/// Largest `k` such that every `k` columns of `m` are independent.
pub fn k_rank<F: Field>(field: &F, m: &Matrix<F::Elem>) -> usize {
    let n = m.cols();
    let mut best = 0;
    for k in 1..=n.min(m.rows()) {
        let mut subset: Vec<usize> = (0..k).collect();
        loop {
            if rank(field, &m.select_columns(&subset)) < k {
                return best;
            }
            // Next k-subset in lexicographic order.
            let Some(i) = (0..k).rev().find(|&i| subset[i] < n - k + i) else {
                break;
            };
            subset[i] += 1;
            for j in i + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
        }
        best = k;
    }
    best
}

/// `2r <= k1 + k2 + k3 - 2` certifies uniqueness.
pub fn kruskal_specific<F: Field>(field: &F, dec: &Decomposition<F::Elem>) -> Result<KruskalReport, KruskalError> {
    if dec.order() != 3 {
        return Err(KruskalError::NotThreeFactors(dec.order()));
    }
    if dec.r > KRUSKAL_CAP {
        return Err(KruskalError::TooLarge {
            r: dec.r,
            cap: KRUSKAL_CAP,
        });
    }
    let k_ranks: Vec<usize> = dec.factors.iter().map(|m| k_rank(field, m)).collect();
    let sum: usize = k_ranks.iter().sum();
    Ok(KruskalReport {
        certified: 2 * dec.r + 2 <= sum,
        k_ranks,
        r: dec.r,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldChoice {
    #[default]
    Exact,
    Prime(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecificConfig {
    /// Defaults to `floor(n3 / 2)` of the core.
    pub p: Option<usize>,
    /// `None` tries 1, 2, then 3 rotations until the image is large enough.
    pub rotations: Option<usize>,
    pub field: FieldChoice,
    pub skip_smoothness: bool,
    pub compress: bool,
}

impl Default for SpecificConfig {
    fn default() -> Self {
        Self {
            p: None,
            rotations: None,
            field: FieldChoice::Exact,
            skip_smoothness: false,
            compress: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "stage", content = "point", rename_all = "snake_case")]
pub enum Stage {
    Compression,
    Smoothness,
    KernelCount,
    HessianAtPoint(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpecificVerdict {
    Unique,
    /// Every check passed but smoothness was not certified.
    UniqueAssumingNonsingularity,
    /// Every check passed over GF(q) only; never a proof.
    ModularEvidence {
        prime: u32,
    },
    Inconclusive {
        stage: Stage,
        reason: String,
    },
}

impl SpecificVerdict {
    pub fn is_unique(&self) -> bool {
        matches!(self, Self::Unique | Self::UniqueAssumingNonsingularity)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PointHessianReport {
    pub point: usize,
    pub rows: usize,
    pub cols: usize,
    pub blocks: usize,
    pub rank: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpecificReport {
    pub verdict: SpecificVerdict,
    pub input_dims: Vec<usize>,
    pub core_dims: Vec<usize>,
    pub r: usize,
    pub smoothness: Option<SmoothnessCertificate>,
    pub tangent_rows: usize,
    pub tangent_cols: usize,
    pub kernel_dim: Option<usize>,
    pub expected_ell: Option<i64>,
    pub hessians: Vec<PointHessianReport>,
    pub kruskal: Option<KruskalReport>,
    #[serde(serialize_with = "ser_millis")]
    pub elapsed: Duration,
}

fn ser_millis<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u64(d.as_millis() as u64)
}

/// Runs the full pipeline on `dec`.
pub fn check_specific(
    dec: &Decomposition<Rational>,
    config: &SpecificConfig,
) -> Result<SpecificReport, DecompositionError> {
    match config.field {
        FieldChoice::Exact => Ok(run_pipeline(&RationalField, dec, config)),
        FieldChoice::Prime(q) => {
            let f = PrimeField::new(q)?;
            let reduced = dec.reduce(&f)?;
            let mut report = run_pipeline(&f, &reduced, config);
            if report.verdict.is_unique() {
                report.verdict = SpecificVerdict::ModularEvidence { prime: q };
            }
            Ok(report)
        }
    }
}

/// Field-generic pipeline. A pass over a finite field is reported as
/// `Unique` here; [`check_specific`] downgrades it.
pub fn run_pipeline<F: Field>(field: &F, dec: &Decomposition<F::Elem>, config: &SpecificConfig) -> SpecificReport {
    let start = Instant::now();
    let mut report = SpecificReport {
        verdict: SpecificVerdict::Unique,
        input_dims: dec.dims.clone(),
        core_dims: dec.dims.clone(),
        r: dec.r,
        smoothness: None,
        tangent_rows: 0,
        tangent_cols: 0,
        kernel_dim: None,
        expected_ell: None,
        hessians: Vec::new(),
        kruskal: None,
        elapsed: Duration::ZERO,
    };
    let verdict = pipeline_stages(field, dec, config, &mut report);
    report.verdict = verdict;
    report.elapsed = start.elapsed();
    report
}

fn inconclusive(stage: Stage, reason: impl Into<String>) -> SpecificVerdict {
    SpecificVerdict::Inconclusive {
        stage,
        reason: reason.into(),
    }
}

fn pipeline_stages<F: Field>(
    field: &F,
    dec: &Decomposition<F::Elem>,
    config: &SpecificConfig,
    report: &mut SpecificReport,
) -> SpecificVerdict {
    let core = if config.compress {
        compress(field, dec).core.sorted()
    } else {
        dec.sorted()
    };
    report.core_dims = core.dims.clone();
    if dec.order() == 3 {
        report.kruskal = kruskal_specific(field, dec).ok();
    }
    let shape = match Shape::new(core.dims.clone()) {
        Ok(s) => s,
        Err(e) => return inconclusive(Stage::Compression, format!("core shape {:?}: {e}", core.dims)),
    };

    if !config.skip_smoothness {
        if core.order() != 3 {
            return inconclusive(Stage::Smoothness, "smoothness certificate needs three factors");
        }
        match smoothness(field, &core, config) {
            Ok(cert) => {
                let passed = cert.passed;
                let reason = cert.reason.clone().unwrap_or_default();
                report.smoothness = Some(cert);
                if !passed {
                    return inconclusive(Stage::Smoothness, reason);
                }
            }
            Err(e) => return inconclusive(Stage::Smoothness, e.to_string()),
        }
    }

    let points = core.points();
    let assembly = match assemble(field, &shape, &points, false) {
        Ok(a) => a,
        Err(e) => return inconclusive(Stage::KernelCount, e.to_string()),
    };
    report.tangent_rows = assembly.t.rows();
    report.tangent_cols = assembly.t.cols();
    let ell = assembly.expected_ell;
    report.expected_ell = Some(ell);
    let k = crate::linalg::left_kernel(field, &assembly.t);
    report.kernel_dim = Some(k.rows());
    if ell < 1 || k.rows() as i64 != ell {
        return inconclusive(
            Stage::KernelCount,
            format!("kernel dimension {} but expected ℓ = {ell}", k.rows()),
        );
    }

    let sigma = shape.sigma();
    let results: Vec<Result<PointHessianReport, String>> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let h = point_hessian(field, &k, &shape, p).map_err(|e| e.to_string())?;
            Ok(PointHessianReport {
                point: i,
                rows: h.h.rows(),
                cols: h.h.cols(),
                blocks: h.ell,
                rank: rank(field, &h.h),
            })
        })
        .collect();
    for (i, res) in results.into_iter().enumerate() {
        match res {
            Ok(rep) => report.hessians.push(rep),
            Err(e) => return inconclusive(Stage::HessianAtPoint(i), e),
        }
    }
    if let Some(bad) = report.hessians.iter().find(|h| h.rank != sigma) {
        return inconclusive(
            Stage::HessianAtPoint(bad.point),
            format!("Hessian rank {} below Σ = {sigma}", bad.rank),
        );
    }
    if config.skip_smoothness {
        SpecificVerdict::UniqueAssumingNonsingularity
    } else {
        SpecificVerdict::Unique
    }
}

fn smoothness<F: Field>(
    field: &F,
    core: &Decomposition<F::Elem>,
    config: &SpecificConfig,
) -> Result<SmoothnessCertificate, SmoothError> {
    let t = core.tensor(field);
    let p = config.p.unwrap_or_else(|| default_p(core.dims[2]));
    let tries: Vec<usize> = match config.rotations {
        Some(n) => vec![n],
        None => vec![1, 2, 3],
    };
    let mut last = None;
    for n in tries {
        let cert = normal_space_image(field, &t, core.r, p, n)?;
        // More rotations only help when the image is too small.
        let retry = !cert.passed
            && cert.image_dim < cert.target.max(0) as usize
            && cert.rotations.iter().all(|r| r.flattening_rank == r.expected_rank);
        last = Some(cert);
        if !retry {
            break;
        }
    }
    Ok(last.expect("at least one try"))
}

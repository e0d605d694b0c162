//! Generic identifiability: sample points, check the dimension of the span
//! of their tangent spaces, then the rank of the stacked Hessian.

use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;
use tracing::debug;

use crate::field::{Field, FieldError, PrimeField, DEFAULT_PRIME, ESCALATION_PRIME};
use crate::hessian::{canonical_hessian, classify_s7, hessian_verdict, point_hessian, HessianError, S7Mode};
use crate::segre::{exception_lookup, KnownException, Shape};
use crate::tangent::{assemble, hyperplane_kernel, sample_points, KernelStatus, RankOnePoint, TangentError};

#[derive(Debug, Error)]
pub enum GenericError {
    #[error("rank {r} exceeds the largest subgeneric rank {rbar} of {shape}")]
    InvalidRank { shape: Shape, r: usize, rbar: usize },
    #[error("rank must be at least 1")]
    ZeroRank,
    #[error("retries must be at least 1")]
    NoRetries,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Tangent(#[from] TangentError),
    #[error(transparent)]
    Hessian(#[from] HessianError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenericConfig {
    pub prime: u32,
    pub retries: usize,
    pub escalate_prime: Option<u32>,
    /// Check the Hessian at every sampled point instead of only at `e1⊗...⊗e1`.
    pub all_points: bool,
    pub seed: u64,
    pub use_catalog: bool,
}

impl Default for GenericConfig {
    fn default() -> Self {
        Self {
            prime: DEFAULT_PRIME,
            retries: 3,
            escalate_prime: Some(ESCALATION_PRIME),
            all_points: false,
            seed: 0,
            use_catalog: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AttemptOutcome {
    Proved,
    ProvedWeaklyDefectivePath,
    /// More hyperplanes than expected: the tangent spaces are dependent.
    DefectiveGate,
    /// Hessian rank below the target.
    HessianShort,
}

/// What one run of the algorithm observed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Attempt {
    pub prime: Option<u32>,
    pub seed: u64,
    pub kernel_dim: usize,
    pub expected_ell: usize,
    /// Lowest Hessian rank over the checked points; absent when the gate failed.
    pub hessian_rank: Option<usize>,
    pub target: Option<usize>,
    pub outcome: AttemptOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VerdictKind {
    Proved,
    ProvedWeaklyDefectivePath,
    Inconclusive { reason: String },
    DefectiveSuspected,
    KnownException { exception: KnownException },
}

impl VerdictKind {
    pub fn is_proved(&self) -> bool {
        matches!(self, Self::Proved | Self::ProvedWeaklyDefectivePath)
    }

    /// Short tag used in sweep output.
    pub fn tag(&self) -> &'static str {
        match self {
            Self::Proved => "proved",
            Self::ProvedWeaklyDefectivePath => "proved_weakly_defective_path",
            Self::Inconclusive { .. } => "inconclusive",
            Self::DefectiveSuspected => "defective_suspected",
            Self::KnownException { .. } => "known_exception",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub shape: Shape,
    pub r: usize,
    pub kind: VerdictKind,
    pub attempts: Vec<Attempt>,
    /// Prime of the deciding attempt (the last one if none proved).
    pub prime: Option<u32>,
    pub seed: u64,
    #[serde(serialize_with = "ser_millis")]
    pub elapsed: Duration,
}

fn ser_millis<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u64(d.as_millis() as u64)
}

/// Seed of attempt `i`; attempts at the escalation prime continue the count.
pub fn attempt_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_add(i as u64)
}

/// One pass of the algorithm on the given points.
///
/// With `all_points` off, the first point must be `e1⊗...⊗e1` and the closed
/// form Hessian is used there.
pub fn attempt_with_points<F: Field>(
    field: &F,
    shape: &Shape,
    points: &[RankOnePoint<F::Elem>],
    all_points: bool,
) -> Result<Attempt, GenericError> {
    let assembly = assemble(field, shape, points, true)?;
    let (k, status) = hyperplane_kernel(field, &assembly)?;
    let expected_ell = usize::try_from(assembly.expected_ell).expect("r <= rbar keeps ell positive");
    let mut attempt = Attempt {
        prime: field.characteristic(),
        seed: 0,
        kernel_dim: k.rows(),
        expected_ell,
        hessian_rank: None,
        target: None,
        outcome: AttemptOutcome::DefectiveGate,
    };
    if status == KernelStatus::DefectiveSuspected {
        return Ok(attempt);
    }
    let mode = classify_s7(shape, expected_ell);
    let mut lowest = usize::MAX;
    if all_points {
        for p in points {
            let h = point_hessian(field, &k, shape, p)?;
            lowest = lowest.min(hessian_verdict(field, &h, mode).rank);
            if lowest < mode.target() {
                break;
            }
        }
    } else {
        let h = canonical_hessian(field, &k, shape)?;
        lowest = hessian_verdict(field, &h, mode).rank;
    }
    attempt.hessian_rank = Some(lowest);
    attempt.target = Some(mode.target());
    attempt.outcome = match (lowest == mode.target(), mode) {
        (true, S7Mode::Standard { .. }) => AttemptOutcome::Proved,
        (true, S7Mode::WeaklyDefective { .. }) => AttemptOutcome::ProvedWeaklyDefectivePath,
        (false, _) => AttemptOutcome::HessianShort,
    };
    Ok(attempt)
}

/// Samples points with `seed` and runs one attempt over `field`.
pub fn run_attempt<F: Field>(
    field: &F,
    shape: &Shape,
    r: usize,
    seed: u64,
    all_points: bool,
) -> Result<Attempt, GenericError> {
    let points = sample_points(field, shape, r, seed, !all_points);
    let mut attempt = attempt_with_points(field, shape, &points, all_points)?;
    attempt.seed = seed;
    Ok(attempt)
}

/// Decides generic `r`-identifiability of `shape` (dims sorted descending).
pub fn check_generic(shape: &Shape, r: usize, config: &GenericConfig) -> Result<Verdict, GenericError> {
    let start = Instant::now();
    if r == 0 {
        return Err(GenericError::ZeroRank);
    }
    if config.retries == 0 {
        return Err(GenericError::NoRetries);
    }
    let rbar = shape.rbar();
    if r > rbar {
        return Err(GenericError::InvalidRank {
            shape: shape.clone(),
            r,
            rbar,
        });
    }
    let finish = |kind, attempts: Vec<Attempt>, prime| Verdict {
        shape: shape.clone(),
        r,
        kind,
        attempts,
        prime,
        seed: config.seed,
        elapsed: start.elapsed(),
    };
    if config.use_catalog {
        if let Some(exception) = exception_lookup(shape, r) {
            return Ok(finish(VerdictKind::KnownException { exception }, Vec::new(), None));
        }
    }

    let mut primes = vec![config.prime];
    primes.extend(config.escalate_prime.filter(|&q| q != config.prime));
    let mut attempts = Vec::new();
    for q in primes {
        let field = PrimeField::new(q)?;
        for _ in 0..config.retries {
            let seed = attempt_seed(config.seed, attempts.len());
            let a = run_attempt(&field, shape, r, seed, config.all_points)?;
            debug!(%shape, r, q, seed, outcome = ?a.outcome, "attempt");
            let outcome = a.outcome;
            attempts.push(a);
            let kind = match outcome {
                AttemptOutcome::Proved => VerdictKind::Proved,
                AttemptOutcome::ProvedWeaklyDefectivePath => VerdictKind::ProvedWeaklyDefectivePath,
                _ => continue,
            };
            return Ok(finish(kind, attempts, Some(q)));
        }
    }
    let last_prime = attempts.last().and_then(|a| a.prime);
    let kind = if attempts.iter().all(|a| a.outcome == AttemptOutcome::DefectiveGate) {
        VerdictKind::DefectiveSuspected
    } else {
        VerdictKind::Inconclusive {
            reason: inconclusive_reason(&attempts),
        }
    };
    Ok(finish(kind, attempts, last_prime))
}

fn inconclusive_reason(attempts: &[Attempt]) -> String {
    let parts: Vec<String> = attempts
        .iter()
        .map(|a| match (a.hessian_rank, a.target) {
            (Some(h), Some(t)) => format!("Hessian rank {h}/{t}"),
            _ => format!("kernel {} > {}", a.kernel_dim, a.expected_ell),
        })
        .collect();
    format!("no attempt reached the target: {}", parts.join(", "))
}

//! Run the generic check at `r̄` over every shape up to a size bound.

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tracing::info;

use crate::generic_id::{check_generic, GenericConfig, GenericError, VerdictKind};
use crate::segre::{ExceptionKind, Shape};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{shape}: {source}")]
    Generic {
        shape: Shape,
        #[source]
        source: GenericError,
    },
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// All `n1 >= ... >= nd >= 2` with `3 <= d <= max_order` and `Π <= max_pi`,
/// in lexicographic order.
pub fn enumerate_shapes(max_pi: usize, max_order: usize) -> Vec<Shape> {
    fn rec(prefix: &mut Vec<usize>, pi: usize, max_pi: usize, max_order: usize, out: &mut Vec<Shape>) {
        if prefix.len() >= 3 {
            out.push(Shape::new(prefix.clone()).expect("non-increasing"));
        }
        if prefix.len() == max_order {
            return;
        }
        let cap = prefix.last().copied().unwrap_or(usize::MAX);
        let mut n = 2;
        while n <= cap && pi * n <= max_pi {
            // Remaining modes need at least a factor 2 each to reach order 3.
            let missing = 3usize.saturating_sub(prefix.len() + 1);
            if pi * n * (1 << missing) <= max_pi {
                prefix.push(n);
                rec(prefix, pi * n, max_pi, max_order, out);
                prefix.pop();
            }
            n += 1;
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), 1, max_pi, max_order, &mut out);
    out
}

/// Seed of one shape, independent of scheduling.
pub fn shape_seed(global: u64, shape: &Shape) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    shape.dims().iter().fold(mix(global), |h, &n| mix(h ^ n as u64))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub shape: Vec<usize>,
    pub r: usize,
    pub verdict: String,
    pub exception: Option<ExceptionKind>,
    pub prime: Option<u32>,
    pub seed: u64,
    pub attempts: usize,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub max_pi: usize,
    pub max_order: usize,
    /// Worker threads; `None` uses rayon's default.
    pub jobs: Option<usize>,
    pub out_path: PathBuf,
    pub resume: bool,
    pub generic: GenericConfig,
}

impl SweepConfig {
    pub fn new(max_pi: usize, out_path: impl Into<PathBuf>) -> Self {
        Self {
            max_pi,
            max_order: usize::MAX,
            jobs: None,
            out_path: out_path.into(),
            resume: false,
            generic: GenericConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SweepSummary {
    pub shapes: usize,
    pub computed: usize,
    /// Records per verdict tag, over the whole output file.
    pub counts: BTreeMap<String, usize>,
}

pub fn run_one(shape: &Shape, config: &GenericConfig) -> Result<SweepRecord, SweepError> {
    let cfg = GenericConfig {
        seed: shape_seed(config.seed, shape),
        ..config.clone()
    };
    let r = shape.rbar();
    let v = check_generic(shape, r, &cfg).map_err(|source| SweepError::Generic {
        shape: shape.clone(),
        source,
    })?;
    Ok(SweepRecord {
        shape: shape.dims().to_vec(),
        r,
        verdict: v.kind.tag().to_string(),
        exception: match &v.kind {
            VerdictKind::KnownException { exception } => Some(exception.kind),
            _ => None,
        },
        prime: v.prime,
        seed: v.seed,
        attempts: v.attempts.len(),
        elapsed_ms: v.elapsed.as_millis() as u64,
    })
}

/// Reads the complete records of an earlier run, rewriting the file without
/// any torn trailing line.
fn load_existing(path: &Path) -> Result<Vec<SweepRecord>, SweepError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut records = Vec::new();
    let mut dirty = false;
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        match serde_json::from_str::<SweepRecord>(&line) {
            Ok(r) => records.push(r),
            Err(_) if line.trim().is_empty() => {}
            Err(_) => dirty = true,
        }
    }
    if dirty {
        let tmp = path.with_extension("resume.tmp");
        {
            let mut w = BufWriter::new(File::create(&tmp)?);
            for r in &records {
                serde_json::to_writer(&mut w, r)?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
        }
        fs::rename(tmp, path)?;
    }
    Ok(records)
}

pub fn run_sweep(config: &SweepConfig) -> Result<SweepSummary, SweepError> {
    let shapes = enumerate_shapes(config.max_pi, config.max_order);
    let existing = if config.resume {
        load_existing(&config.out_path)?
    } else {
        Vec::new()
    };
    let done: HashSet<Vec<usize>> = existing.iter().map(|r| r.shape.clone()).collect();
    let todo: Vec<&Shape> = shapes.iter().filter(|s| !done.contains(s.dims())).collect();
    info!(total = shapes.len(), todo = todo.len(), "sweep");

    let file = OpenOptions::new()
        .create(true)
        .append(config.resume)
        .write(true)
        .truncate(!config.resume)
        .open(&config.out_path)?;
    let writer = Mutex::new(BufWriter::new(file));
    let work = || -> Result<Vec<SweepRecord>, SweepError> {
        todo.par_iter()
            .map(|shape| {
                let rec = run_one(shape, &config.generic)?;
                let mut line = serde_json::to_string(&rec)?;
                line.push('\n');
                let mut w = writer.lock().expect("writer lock");
                w.write_all(line.as_bytes())?;
                w.flush()?;
                Ok(rec)
            })
            .collect()
    };
    let new = match config.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(work)?,
        None => work()?,
    };

    let mut counts = BTreeMap::new();
    for r in existing.iter().chain(&new) {
        *counts.entry(r.verdict.clone()).or_insert(0) += 1;
    }
    Ok(SweepSummary {
        shapes: shapes.len(),
        computed: new.len(),
        counts,
    })
}

/// Reads every record of a sweep output file.
pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<SweepRecord>, SweepError> {
    BufReader::new(File::open(path)?)
        .lines()
        .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|l| Ok(serde_json::from_str(&l?)?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims(v: &[Shape]) -> Vec<Vec<usize>> {
        v.iter().map(|s| s.dims().to_vec()).collect()
    }

    #[test]
    fn small_enumerations() {
        assert_eq!(dims(&enumerate_shapes(8, 20)), vec![vec![2, 2, 2]]);
        assert_eq!(dims(&enumerate_shapes(12, 20)), vec![vec![2, 2, 2], vec![3, 2, 2]]);
        assert_eq!(
            dims(&enumerate_shapes(16, 20)),
            vec![vec![2, 2, 2], vec![2, 2, 2, 2], vec![3, 2, 2], vec![4, 2, 2]]
        );
        assert!(enumerate_shapes(7, 20).is_empty());
    }

    #[test]
    fn thirteen_twos() {
        let has = |max_pi| enumerate_shapes(max_pi, 13).iter().any(|s| s.order() == 13);
        assert!(!has(8191));
        assert!(has(8192));
        assert!(enumerate_shapes(8192, 12).iter().all(|s| s.order() <= 12));
    }

    #[test]
    fn order_is_lexicographic() {
        let v = dims(&enumerate_shapes(300, 20));
        let mut sorted = v.clone();
        sorted.sort();
        assert_eq!(v, sorted);
    }

    #[test]
    fn seeds_differ_per_shape() {
        let a = shape_seed(1, &Shape::new(vec![3, 2, 2]).unwrap());
        let b = shape_seed(1, &Shape::new(vec![2, 2, 2]).unwrap());
        let c = shape_seed(2, &Shape::new(vec![3, 2, 2]).unwrap());
        assert!(a != b && a != c);
        assert_eq!(a, shape_seed(1, &Shape::new(vec![3, 2, 2]).unwrap()));
    }

    #[test]
    fn sweep_and_resume() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.jsonl");
        let mut cfg = SweepConfig::new(40, &path);
        let first = run_sweep(&cfg).unwrap();
        assert_eq!(first.shapes, first.computed);
        let records = read_records(&path).unwrap();
        assert_eq!(records.len(), first.shapes);

        // Tear the last line, as an interrupted run would.
        let text = fs::read_to_string(&path).unwrap();
        let cut = text.trim_end().rfind('\n').unwrap() + 1;
        fs::write(&path, format!("{}{{\"shape\":[", &text[..cut])).unwrap();

        cfg.resume = true;
        let second = run_sweep(&cfg).unwrap();
        assert_eq!(second.computed, 1);
        assert_eq!(second.counts, first.counts);
        let third = run_sweep(&cfg).unwrap();
        assert_eq!(third.computed, 0);
        assert_eq!(third.counts, first.counts);
        let again = read_records(&path).unwrap();
        let keys: HashSet<_> = again.iter().map(|r| r.shape.clone()).collect();
        assert_eq!(keys.len(), again.len());
    }
}
